//! Small numerical helpers shared across modules.

const PAIRWISE_BLOCK: usize = 16;

/// Pairwise (cascade) summation. The reduction tree depends only on the length,
/// so results are reproducible.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// log2 of Σ 2^{t_i}, computed with a max shift.
pub fn log2_sum_exp2(ts: &mut [f64]) -> f64 {
    let max = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    for t in ts.iter_mut() {
        *t = (*t - max).exp2();
    }
    max + pairwise_sum(ts).log2()
}

/// Ordinary least-squares slope of y against x. Returns `None` with fewer than two
/// distinct x values.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn log_sum_exp_handles_tiny_terms() {
        let mut ts = vec![-2000.0, -2000.0];
        assert!((log2_sum_exp2(&mut ts) + 1999.0).abs() < 1e-12);
    }

    #[test]
    fn slope_of_line() {
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 4.0, 6.0];
        assert!((ls_slope(&x, &y).unwrap() - 2.0).abs() < 1e-15);
        assert!(ls_slope(&[1.0], &[1.0]).is_none());
    }
}
