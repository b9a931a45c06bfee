//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_rational::Ratio;

pub type Q = Ratio<i128>;

/// Integer square root by linear search.
pub fn floor_sqrt(n: u64) -> u64 {
    (0..=n).take_while(|k| k * k <= n).last().unwrap_or(0)
}

/// Offset law built stage by stage: window `(s, t)` with
/// `s ∈ [0, ℓ-1]`, `t ∈ [ℓ+2, ⌊√n⌋]`, then radius, then a uniform offset.
pub fn staged_offset_law(n: usize, ell: u64) -> Vec<(i64, Q)> {
    let t_max = floor_sqrt(n as u64) as i64;
    let ell = ell as i64;
    let windows: Vec<(i64, i64)> = (0..ell)
        .flat_map(|s| (ell + 2..=t_max).map(move |t| (s, t)))
        .collect();
    let window_w = |s: i64, t: i64| -> i128 { (s..t).map(|m| (2 * m + 3) as i128).sum() };
    let total: i128 = windows.iter().map(|&(s, t)| window_w(s, t)).sum();
    let mut law = vec![Q::from_integer(0); (2 * t_max + 1) as usize];
    for &(s, t) in &windows {
        let p_window = Q::new(window_w(s, t), total);
        for m in s..t {
            let p_radius = Q::new((2 * m + 3) as i128, window_w(s, t));
            let p_offset = Q::new(1, (2 * m + 3) as i128);
            for k in -(m + 1)..=m + 1 {
                law[(k + t_max) as usize] += p_window * p_radius * p_offset;
            }
        }
    }
    law.into_iter()
        .enumerate()
        .map(|(i, p)| (i as i64 - t_max, p))
        .collect()
}

/// Signs of `idx` read as a bit string, bit `b` set meaning `-1`.
pub fn signs_of(n: usize, idx: u64) -> Vec<i8> {
    (0..n)
        .map(|b| if (idx >> b) & 1 == 1 { -1 } else { 1 })
        .collect()
}

/// `E_{k, r}[vote]` for bit `i`, from plain sign arrays. Answers are
/// clipped to `[-n, n]`.
pub fn oracle_mu(i: usize, z: &[i8], answer: &dyn Fn(&[i8]) -> i64, law: &[(i64, Q)]) -> Q {
    let n = z.len();
    let mut total = Q::from_integer(0);
    for idx in 0..1u64 << n {
        let r = signs_of(n, idx);
        let a = answer(&r).clamp(-(n as i64), n as i64);
        let rest: i64 = (0..n)
            .filter(|&b| b != i)
            .map(|b| (z[b] * r[b]) as i64)
            .sum();
        for &(k, p) in law {
            let d = a - rest - k;
            if d == 1 || d == -1 {
                total += p * Q::from_integer((d * r[i] as i64) as i128);
            }
        }
    }
    total / Q::from_integer(1i128 << n)
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `ln C(n, h)`.
pub fn ln_choose(n: usize, h: usize) -> f64 {
    (1..=h).map(|k| ((n - h + k) as f64 / k as f64).ln()).sum()
}

/// `Pr[Bin(n, 1/2) = h]`.
pub fn binomial_pmf(n: usize, h: usize) -> f64 {
    (ln_choose(n, h) - n as f64 * 2f64.ln()).exp()
}

/// `Pr[|n - 2H| <= ℓ]` for `H ~ Bin(n, 1/2)`: the law of `⟨X, Y⟩` for
/// independent uniform `X, Y`.
pub fn binomial_within(n: usize, ell: u64) -> f64 {
    (0..=n)
        .filter(|&h| (n as i64 - 2 * h as i64).unsigned_abs() <= ell)
        .map(|h| binomial_pmf(n, h))
        .sum()
}

/// `Pr[|⌊W⌉| <= a]` for `W ~ Lap(b)` rounded half away from zero.
pub fn rounded_laplace_within(a: u64, b: f64) -> f64 {
    1.0 - (-(a as f64 + 0.5) / b).exp()
}

/// `Pr[⌊W⌉ = k]` for `W ~ Lap(b)` rounded half away from zero.
pub fn rounded_laplace_pmf(k: i64, b: f64) -> f64 {
    let cdf = |w: f64| {
        if w < 0.0 {
            0.5 * (w / b).exp()
        } else {
            1.0 - 0.5 * (-w / b).exp()
        }
    };
    let k = k as f64;
    cdf(k + 0.5) - cdf(k - 0.5)
}
