//! Asymmetric l1 machinery behind the balance term.
//!
//! For a vertex function `f` and `lambda > 0`:
//!
//! * `med_lambda(f)` is the `(k+1)`-st largest entry of `f` counted with
//!   multiplicity, `k = floor(N / (lambda + 1))`;
//! * `|t|_lambda = lambda t` for `t >= 0` and `-t` otherwise;
//! * `B(f) = sum_i |f_i - med_lambda(f)|_lambda`.
//!
//! On an indicator `1_A` the ratio `tv(f) / B(f)` equals
//! `cut(A) / min(lambda |A|, |A^c|)`, which is how the relaxed energy
//! reproduces the multiclass balanced cut.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{GradientOperator, SimilarityGraph};

/// Balance parameter `lambda` together with the class count it was chosen for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceParam {
    lambda: f64,
    r_classes: usize,
}

impl BalanceParam {
    /// `lambda` defaults to `R - 1`, which makes `min(lambda |A|, |A^c|)`
    /// peak at `|A| = N / R`.
    pub fn new(r_classes: usize, lambda: Option<f64>) -> Result<Self> {
        if r_classes < 2 {
            return Err(Error::InvalidParameter("need at least two classes"));
        }
        let lambda = lambda.unwrap_or((r_classes - 1) as f64);
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be positive"));
        }
        Ok(BalanceParam { lambda, r_classes })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn r_classes(&self) -> usize {
        self.r_classes
    }
}

/// Vertex counts above, at and below the lambda-median.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MedianCounts {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
}

#[inline]
fn median_rank(n: usize, lambda: f64) -> usize {
    let k = libm::floor(n as f64 / (lambda + 1.0)) as usize;
    // the quotient is strictly below n for lambda > 0, even if it rounds to n
    k.min(n - 1)
}

/// Selects the lambda-median in place; `buf` is reordered.
pub(crate) fn median_in_place(buf: &mut [f64], lambda: f64) -> f64 {
    let k = median_rank(buf.len(), lambda);
    let (_, m, _) = buf.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    *m
}

/// The `(k+1)`-st largest value of `f` with multiplicity, `k = floor(N/(lambda+1))`.
pub fn lambda_median(f: &[f64], lambda: f64) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::Empty);
    }
    let mut buf = f.to_vec();
    Ok(median_in_place(&mut buf, lambda))
}

#[inline]
pub fn asym_abs(t: f64, lambda: f64) -> f64 {
    if t >= 0.0 {
        lambda * t
    } else {
        -t
    }
}

/// `||f||_{1,lambda}`.
pub fn asym_l1_norm(f: &[f64], lambda: f64) -> f64 {
    f.iter().map(|&t| asym_abs(t, lambda)).sum()
}

/// `B(f) = ||f - med_lambda(f) 1||_{1,lambda}`; zero for an empty function.
pub fn balance_term(f: &[f64], lambda: f64) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    let med = lambda_median(f, lambda).unwrap_or(0.0);
    f.iter().map(|&t| asym_abs(t - med, lambda)).sum()
}

/// The lambda-median and the counts of entries above, at and below it.
pub fn median_counts(f: &[f64], lambda: f64) -> Result<(f64, MedianCounts)> {
    let med = lambda_median(f, lambda)?;
    let mut c = MedianCounts { n_plus: 0, n_zero: 0, n_minus: 0 };
    for &t in f {
        if t > med {
            c.n_plus += 1;
        } else if t < med {
            c.n_minus += 1;
        } else {
            c.n_zero += 1;
        }
    }
    Ok((med, c))
}

/// Element of the subdifferential of `B` at `f`: `lambda` above the median,
/// `-1` below it and `(n- - lambda n+) / n0` on it.
///
/// The entries sitting on the median share the value `(n- - lambda n+)`
/// between them so that the returned vector sums to zero exactly whenever
/// that remainder is representable; the last of them absorbs the rounding.
pub fn subgradient_b(f: &[f64], lambda: f64) -> Vec<f64> {
    let mut v = vec![0.0; f.len()];
    subgradient_b_into(f, lambda, &mut v);
    v
}

pub(crate) fn subgradient_b_into(f: &[f64], lambda: f64, out: &mut [f64]) {
    let Ok((med, c)) = median_counts(f, lambda) else {
        return;
    };
    let q = libm::fma(-lambda, c.n_plus as f64, c.n_minus as f64);
    let mid = q / c.n_zero as f64;
    let last_mid = libm::fma(-((c.n_zero - 1) as f64), mid, q);
    let mut seen = 0;
    for (o, &t) in out.iter_mut().zip(f) {
        *o = if t > med {
            lambda
        } else if t < med {
            -1.0
        } else {
            seen += 1;
            if seen == c.n_zero {
                last_mid
            } else {
                mid
            }
        };
    }
}

/// `E(f) = tv(f) / B(f)`.
pub fn cluster_energy(op: &GradientOperator, f: &[f64], lambda: f64) -> Result<f64> {
    let tv = op.tv_norm(f)?;
    let b = balance_term(f, lambda);
    if !(b > 0.0) {
        return Err(Error::DegenerateCluster { cluster: 0 });
    }
    Ok(tv / b)
}

/// `sum_r cut(A_r) / min(lambda |A_r|, |A_r^c|)` for a hard partition with
/// classes `0..n_classes`.
pub fn discrete_energy(
    graph: &SimilarityGraph,
    partition: &[usize],
    n_classes: usize,
    lambda: f64,
) -> Result<f64> {
    let n = graph.n_vertices();
    if partition.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: partition.len() });
    }
    if n_classes < 2 {
        return Err(Error::InvalidParameter("need at least two classes"));
    }
    let mut size = vec![0usize; n_classes];
    for &c in partition {
        if c >= n_classes {
            return Err(Error::ClassOutOfRange { class: c, n_classes });
        }
        size[c] += 1;
    }
    if let Some(r) = size.iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass(r));
    }
    let mut cut = vec![0.0; n_classes];
    for e in graph.edges() {
        let (a, b) = (partition[e.i], partition[e.j]);
        if a != b {
            cut[a] += e.w;
            cut[b] += e.w;
        }
    }
    Ok(cut.iter().zip(&size).map(|(&c, &s)| c / (lambda * s as f64).min((n - s) as f64)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(n: usize, members: &[usize]) -> Vec<f64> {
        let mut f = vec![0.0; n];
        for &i in members {
            f[i] = 1.0;
        }
        f
    }

    #[test]
    fn median_examples() {
        assert_eq!(lambda_median(&[5.0, 3.0, 1.0], 1.0).unwrap(), 3.0);
        assert_eq!(lambda_median(&[], 1.0), Err(Error::Empty));
        // N = 10, lambda = 1: k = 5
        assert_eq!(lambda_median(&indicator(10, &[0, 1, 2, 3, 4]), 1.0).unwrap(), 0.0);
        assert_eq!(lambda_median(&indicator(10, &[0, 1, 2, 3, 4, 5]), 1.0).unwrap(), 1.0);
        // tiny lambda keeps the rank in range
        assert_eq!(lambda_median(&[2.0, 1.0], 1e-300).unwrap(), 1.0);
    }

    #[test]
    fn asymmetric_norm_examples() {
        assert_eq!(asym_l1_norm(&[1.0, -1.0], 2.0), 3.0);
        assert_eq!(asym_l1_norm(&[0.0, 0.0], 2.0), 0.0);
        let f = [0.3, -1.2, 2.5, -0.1];
        let l1: f64 = f.iter().map(|x: &f64| x.abs()).sum();
        assert_eq!(asym_l1_norm(&f, 1.0), l1);
    }

    #[test]
    fn balance_of_indicators() {
        // lambda |A| <= |A^c|
        assert_eq!(balance_term(&indicator(9, &[0, 1]), 2.0), 4.0);
        // |A^c| < lambda |A|
        assert_eq!(balance_term(&indicator(9, &[0, 1, 2, 3]), 2.0), 5.0);
        assert_eq!(balance_term(&[0.4; 6], 3.0), 0.0);
    }

    #[test]
    fn subgradient_examples() {
        assert_eq!(subgradient_b(&[2.0, 1.0, 0.0], 1.0), vec![1.0, 0.0, -1.0]);
        assert_eq!(subgradient_b(&[0.7; 5], 2.0), vec![0.0; 5]);
    }

    #[test]
    fn energy_of_constant_is_an_error() {
        let op = GradientOperator::new(&SimilarityGraph::path(4));
        assert!(matches!(cluster_energy(&op, &[1.0; 4], 1.0), Err(Error::DegenerateCluster { .. })));
    }

    #[test]
    fn line_half_indicator_energy() {
        let op = GradientOperator::new(&SimilarityGraph::path(20));
        let f = indicator(20, &(0..10).collect::<Vec<_>>());
        assert!((cluster_energy(&op, &f, 1.0).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn discrete_energy_examples() {
        let g = SimilarityGraph::path(20);
        let part: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        assert!((discrete_energy(&g, &part, 2, 1.0).unwrap() - 0.2).abs() < 1e-15);

        let cliques = SimilarityGraph::new(
            6,
            [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0)],
        )
        .unwrap();
        assert_eq!(discrete_energy(&cliques, &[0, 0, 0, 1, 1, 1], 2, 1.0).unwrap(), 0.0);
        assert_eq!(discrete_energy(&cliques, &[0; 6], 2, 1.0), Err(Error::EmptyClass(1)));
        assert!(discrete_energy(&cliques, &[0, 0, 0, 1, 1, 2], 2, 1.0).is_err());
    }

    #[test]
    fn default_lambda() {
        assert_eq!(BalanceParam::new(4, None).unwrap().lambda(), 3.0);
        assert_eq!(BalanceParam::new(4, Some(1.0)).unwrap().lambda(), 1.0);
        assert!(BalanceParam::new(1, None).is_err());
        assert!(BalanceParam::new(3, Some(0.0)).is_err());
    }
}
