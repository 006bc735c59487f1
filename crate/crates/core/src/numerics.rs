//! Small numerical helpers shared across modules.

/// Pairwise (cascade) summation in a fixed order.
///
/// The reduction tree depends only on the slice length, so results are
/// reproducible regardless of how the terms were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

pub fn cot(x: f64) -> f64 {
    1.0 / x.tan()
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    use gauss_quad::legendre::GaussLegendre;
    use std::num::NonZeroUsize;

    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(5, 1.0, 3.0);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(9)).sum();
        let exact = (3f64.powi(10) - 1.0) / 10.0;
        assert!((s - exact).abs() / exact < 1e-13);
    }
}
