#![allow(dead_code)]

use mqwalk::C64;
use nalgebra::DMatrix;

/// `exp(-i·h·t)` by scaling and squaring a 20-term Taylor series.
pub fn taylor_exp(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let dim = h.nrows();
    let a = h * C64::new(0.0, -t);
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 0.5 {
        squarings += 1;
    }
    let a = a / C64::new(f64::powi(2.0, squarings), 0.0);
    let mut term = DMatrix::<C64>::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..=20 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `p_n` by summing amplitudes over every path of intermediate sites that
/// avoid the detection site.
pub fn path_sum_pmf(v: &DMatrix<C64>, initial: usize, detect: usize, n: usize) -> f64 {
    let dim = v.nrows();
    let free: Vec<usize> = (0..dim).filter(|&s| s != detect).collect();
    let mut total = C64::new(0.0, 0.0);
    let paths = free.len().pow((n - 1) as u32);
    for code in 0..paths {
        let mut rest = code;
        let mut site = initial;
        let mut amp = C64::new(1.0, 0.0);
        for _ in 0..n - 1 {
            let next = free[rest % free.len()];
            rest /= free.len();
            amp *= v[(next, site)];
            site = next;
        }
        total += v[(detect, site)] * amp;
    }
    total.norm_sqr()
}
