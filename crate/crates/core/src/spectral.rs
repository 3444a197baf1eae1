//! Laplacian spectra: the closed form for `M_g^r`, a dense numerical oracle,
//! explicit eigenvectors for both closed-form families, the transition
//! spectrum, and the extremes that govern convergence speed and delay
//! tolerance.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::eigen::symmetric_eigenvalues;
use crate::graph::{build_matrices, DenseMatrix, Graph};
use crate::hsw::{order_and_size, HierarchicalNetwork};
use crate::numeric::{csum, Sig17};
use crate::{Error, Result};

/// Largest order accepted by the dense eigensolver.
pub const DENSE_LIMIT: usize = 4096;

/// Eigenvalues closer than this are reported as one multiplicity cluster.
pub const CLUSTER_GAP: f64 = 1e-6;

/// Eigenvalues at or below this magnitude are treated as zero.
pub const ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPair {
    pub lambda: f64,
    pub mult: usize,
}

/// Multiset of Laplacian eigenvalues sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub n: usize,
    pub source: SpectrumSource,
    pub pairs: Vec<SpectralPair>,
}

impl SpectrumResult {
    pub fn total_multiplicity(&self) -> usize {
        self.pairs.iter().map(|p| p.mult).sum()
    }

    pub fn trace(&self) -> f64 {
        csum(self.pairs.iter().map(|p| p.lambda * p.mult as f64))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &SpectralPair> {
        self.pairs.iter().filter(|p| p.lambda.abs() > ZERO_TOL)
    }

    /// Eigenvalues expanded with multiplicity, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.lambda, p.mult))
            .collect()
    }

    /// Equal as multisets: same multiplicities, eigenvalues within `tol`.
    pub fn agrees_with(&self, other: &SpectrumResult, tol: f64) -> bool {
        self.n == other.n
            && self.pairs.len() == other.pairs.len()
            && self
                .pairs
                .iter()
                .zip(&other.pairs)
                .all(|(a, b)| a.mult == b.mult && (a.lambda - b.lambda).abs() <= tol)
    }

    /// Checks the structural invariants: multiplicities sum to `n`, a single
    /// zero eigenvalue comes first, and ascending order.
    pub fn validate(&self) -> Result<()> {
        if self.total_multiplicity() != self.n {
            return Err(Error::MalformedSpectrum(format!(
                "multiplicities sum to {} for n = {}",
                self.total_multiplicity(),
                self.n
            )));
        }
        match self.pairs.first() {
            Some(p) if p.lambda.abs() <= ZERO_TOL && p.mult == 1 => {}
            _ => {
                return Err(Error::MalformedSpectrum(
                    "expected a simple zero eigenvalue first".into(),
                ))
            }
        }
        if self.pairs.windows(2).any(|w| w[0].lambda >= w[1].lambda) {
            return Err(Error::MalformedSpectrum(
                "pairs not strictly ascending".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Pair {
            lambda: Sig17,
            mult: usize,
        }
        #[derive(Serialize)]
        struct Doc {
            n: usize,
            source: SpectrumSource,
            pairs: Vec<Pair>,
        }
        let doc = Doc {
            n: self.n,
            source: self.source,
            pairs: self
                .pairs
                .iter()
                .map(|p| Pair {
                    lambda: Sig17(p.lambda),
                    mult: p.mult,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Groups sorted values into `(mean, count)` clusters separated by more
/// than [`CLUSTER_GAP`].
fn cluster(sorted: &[f64]) -> Vec<SpectralPair> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new(); // (sum, count, last)
    for &x in sorted {
        match out.last_mut() {
            Some((sum, count, last)) if x - *last < CLUSTER_GAP => {
                *sum += x;
                *count += 1;
                *last = x;
            }
            _ => out.push((x, 1, x)),
        }
    }
    out.into_iter()
        .map(|(sum, count, _)| SpectralPair {
            lambda: sum / count as f64,
            mult: count,
        })
        .collect()
}

/// Exact Laplacian spectrum of `M_g^r`: for each level `i < g`, eigenvalue
/// `i + 1` with multiplicity `(r-1) r^i` and eigenvalue
/// `(r^{g-i+1} - 1)/(r - 1) + i` with multiplicity `r^i`, plus a simple zero.
pub fn closed_form_spectrum(r: usize, g: usize) -> Result<SpectrumResult> {
    if g == 0 {
        return Err(Error::InvalidParameter(
            "g must be >= 1 (M_0 has spectrum {0})".into(),
        ));
    }
    let (n, _) = order_and_size(r, g)?;
    let n = usize::try_from(n).map_err(|_| Error::Overflow("N_g"))?;
    let r128 = r as u128;
    let mut merged: BTreeMap<u128, usize> = BTreeMap::new();
    merged.insert(0, 1);
    for i in 0..g {
        let ri = r.checked_pow(i as u32).ok_or(Error::Overflow("r^i"))?;
        *merged.entry(i as u128 + 1).or_insert(0) += (r - 1) * ri;
        let p = r128
            .checked_pow((g - i + 1) as u32)
            .ok_or(Error::Overflow("r^(g-i+1)"))?;
        *merged.entry((p - 1) / (r128 - 1) + i as u128).or_insert(0) += ri;
    }
    Ok(SpectrumResult {
        n,
        source: SpectrumSource::ClosedForm,
        pairs: merged
            .into_iter()
            .map(|(lambda, mult)| SpectralPair {
                lambda: lambda as f64,
                mult,
            })
            .collect(),
    })
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "dense matrix order",
            size: n,
            budget: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// Laplacian spectrum from the dense eigensolver, clustered into
/// multiplicities.
pub fn numeric_spectrum(g: &Graph) -> Result<SpectrumResult> {
    check_dense(g.n())?;
    let lap = build_matrices(g).laplacian;
    let values = symmetric_eigenvalues(&lap)?;
    Ok(SpectrumResult {
        n: g.n(),
        source: SpectrumSource::Numeric,
        pairs: cluster(&values),
    })
}

/// Eigenvalues of `D^{-1/2} A D^{-1/2}` (similar to the transition matrix),
/// sorted descending.
pub fn transition_spectrum(g: &Graph) -> Result<Vec<f64>> {
    check_dense(g.n())?;
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| 1.0 / (d as f64).sqrt())
        .collect();
    let mut s = DenseMatrix::zeros(g.n());
    for &(u, v) in g.edges() {
        let w = inv_sqrt[u] * inv_sqrt[v];
        s[(u, v)] = w;
        s[(v, u)] = w;
    }
    let mut theta = symmetric_eigenvalues(&s)?;
    theta.reverse();
    Ok(theta)
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
}

impl EigenPair {
    /// `‖L x − λ x‖_∞ / ‖x‖_∞`.
    pub fn residual(&self, g: &Graph) -> f64 {
        let mut lx = vec![0.0; g.n()];
        g.laplacian_apply(&self.vector, &mut lx);
        let scale = self.vector.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let err = lx
            .iter()
            .zip(&self.vector)
            .fold(0.0f64, |a, (y, x)| a.max((y - self.eigenvalue * x).abs()));
        err / scale.max(f64::MIN_POSITIVE)
    }

    pub fn entry_sum(&self) -> f64 {
        csum(self.vector.iter().copied())
    }
}

fn require_internal(net: &HierarchicalNetwork, v: usize) -> Result<()> {
    if v >= net.n() {
        return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
    }
    if net.is_leaf(v) {
        return Err(Error::InvalidParameter(format!("vertex {v} is a leaf")));
    }
    Ok(())
}

/// Eigenvector for `d(v) + 1`: `-D_v` at `v`, `1` on each descendant.
pub fn eigenvector_family1(net: &HierarchicalNetwork, v: usize) -> Result<EigenPair> {
    require_internal(net, v)?;
    let mut x = vec![0.0; net.n()];
    x[v] = -(net.desc_count(v) as f64);
    for w in net.descendants(v) {
        x[w] = 1.0;
    }
    Ok(EigenPair {
        eigenvalue: (net.graph().degree(v) + 1) as f64,
        vector: x,
    })
}

/// Eigenvector for `level(v) + 1`: `-1` on the subtree of the first child
/// of `v`, `+1` on the subtree of child `s` (`2 <= s <= r`).
pub fn eigenvector_family2(net: &HierarchicalNetwork, v: usize, s: usize) -> Result<EigenPair> {
    require_internal(net, v)?;
    if !(2..=net.r()).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "sibling index {s} outside [2, {}]",
            net.r()
        )));
    }
    let first = net.children(v).start;
    let mut x = vec![0.0; net.n()];
    for w in net.subtree(first) {
        x[w] = -1.0;
    }
    for w in net.subtree(first + s - 1) {
        x[w] = 1.0;
    }
    Ok(EigenPair {
        eigenvalue: (net.level(v) + 1) as f64,
        vector: x,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralExtremes {
    pub lambda2: Sig17,
    #[serde(rename = "lambdaN")]
    pub lambda_n: Sig17,
    /// Largest constant delay for which delayed consensus still converges.
    pub eps_max: Sig17,
}

pub fn extremes(spec: &SpectrumResult) -> Result<SpectralExtremes> {
    spec.validate()?;
    let lambda2 = spec
        .nonzero()
        .next()
        .ok_or_else(|| Error::MalformedSpectrum("no nonzero eigenvalue".into()))?
        .lambda;
    let lambda_n = spec.pairs.last().expect("validated").lambda;
    Ok(SpectralExtremes {
        lambda2: Sig17(lambda2),
        lambda_n: Sig17(lambda_n),
        eps_max: Sig17(PI / (2.0 * lambda_n)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::numeric_rank;
    use crate::graph::{build_baseline, Baseline};
    use crate::hsw::build_hsw;

    fn pairs(spec: &SpectrumResult) -> Vec<(f64, usize)> {
        spec.pairs.iter().map(|p| (p.lambda, p.mult)).collect()
    }

    #[test]
    fn closed_form_m32_matches_table() {
        let spec = closed_form_spectrum(2, 3).unwrap();
        assert_eq!(
            pairs(&spec),
            vec![
                (0.0, 1),
                (1.0, 1),
                (2.0, 2),
                (3.0, 4),
                (5.0, 4),
                (8.0, 2),
                (15.0, 1)
            ]
        );
    }

    #[test]
    fn closed_form_small_cases() {
        assert_eq!(
            pairs(&closed_form_spectrum(2, 1).unwrap()),
            vec![(0.0, 1), (1.0, 1), (3.0, 1)]
        );
        assert_eq!(
            pairs(&closed_form_spectrum(3, 2).unwrap()),
            vec![(0.0, 1), (1.0, 2), (2.0, 6), (5.0, 3), (13.0, 1)]
        );
        assert!(closed_form_spectrum(2, 0).is_err());
    }

    #[test]
    fn families_never_collide() {
        // family 1 spans {1..g}; the smallest family 2 value is r + g
        for r in 2..=6 {
            for g in 1..=12 {
                let spec = closed_form_spectrum(r, g).unwrap();
                assert_eq!(spec.pairs.len(), 2 * g + 1);
            }
        }
    }

    #[test]
    fn closed_form_invariants() {
        for r in 2..=5 {
            for g in 1..=10 {
                let spec = closed_form_spectrum(r, g).unwrap();
                spec.validate().unwrap();
                let (n, e) = order_and_size(r, g).unwrap();
                assert_eq!(
                    spec.nonzero().map(|p| p.mult).sum::<usize>(),
                    n as usize - 1
                );
                assert_eq!(spec.trace(), 2.0 * e as f64);
                assert_eq!(spec.pairs[1].lambda, 1.0);
                assert_eq!(spec.pairs.last().unwrap().lambda, n as f64);
            }
        }
    }

    #[test]
    fn numeric_small_graphs() {
        let k2 = numeric_spectrum(&build_baseline(Baseline::Complete, 2).unwrap()).unwrap();
        assert_eq!(k2.pairs.len(), 2);
        assert!(k2.pairs[0].lambda.abs() < 1e-12 && (k2.pairs[1].lambda - 2.0).abs() < 1e-12);

        let x5 = numeric_spectrum(&build_baseline(Baseline::Star, 5).unwrap()).unwrap();
        let got: Vec<_> = x5.pairs.iter().map(|p| p.mult).collect();
        assert_eq!(got, vec![1, 3, 1]);
        assert!((x5.pairs[1].lambda - 1.0).abs() < 1e-12);
        assert!((x5.pairs[2].lambda - 5.0).abs() < 1e-12);

        let x4 = numeric_spectrum(&build_baseline(Baseline::Star, 4).unwrap()).unwrap();
        assert!(x4
            .values()
            .iter()
            .zip([0.0, 1.0, 1.0, 4.0])
            .all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn numeric_matches_closed_form_m32() {
        let net = build_hsw(2, 3).unwrap();
        let numeric = numeric_spectrum(net.graph()).unwrap();
        let closed = closed_form_spectrum(2, 3).unwrap();
        assert!(numeric.agrees_with(&closed, 1e-8), "{numeric:?}");
    }

    #[test]
    fn dense_budget_enforced() {
        let g = build_baseline(Baseline::Path, DENSE_LIMIT + 1).unwrap();
        assert!(matches!(
            numeric_spectrum(&g),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn family1_root_of_m32() {
        let net = build_hsw(2, 3).unwrap();
        let pair = eigenvector_family1(&net, 0).unwrap();
        assert_eq!(pair.eigenvalue, 15.0);
        assert_eq!(pair.vector[0], -14.0);
        assert!(pair.vector[1..].iter().all(|&x| x == 1.0));
        assert_eq!(pair.residual(net.graph()), 0.0);
        assert_eq!(pair.entry_sum(), 0.0);
    }

    #[test]
    fn family1_path3() {
        let net = build_hsw(2, 1).unwrap();
        let pair = eigenvector_family1(&net, 0).unwrap();
        assert_eq!(pair.eigenvalue, 3.0);
        assert_eq!(pair.vector, vec![-2.0, 1.0, 1.0]);
    }

    #[test]
    fn family2_root_of_m32() {
        let net = build_hsw(2, 3).unwrap();
        let pair = eigenvector_family2(&net, 0, 2).unwrap();
        assert_eq!(pair.eigenvalue, 1.0);
        assert_eq!(pair.vector.iter().filter(|&&x| x == -1.0).count(), 7);
        assert_eq!(pair.vector.iter().filter(|&&x| x == 1.0).count(), 7);
        assert_eq!(pair.vector[0], 0.0);
        assert_eq!(pair.residual(net.graph()), 0.0);
    }

    #[test]
    fn family2_independent_for_ternary_root() {
        let net = build_hsw(3, 2).unwrap();
        let vs: Vec<_> = (2..=3)
            .map(|s| eigenvector_family2(&net, 0, s).unwrap())
            .collect();
        assert!(vs.iter().all(|p| p.eigenvalue == 1.0));
        let rows: Vec<Vec<f64>> = vs.into_iter().map(|p| p.vector).collect();
        assert_eq!(numeric_rank(&rows, 1e-12), 2);
    }

    #[test]
    fn eigenvector_errors() {
        let net = build_hsw(2, 2).unwrap();
        assert!(eigenvector_family1(&net, 6).is_err());
        assert!(eigenvector_family2(&net, 0, 1).is_err());
        assert!(eigenvector_family2(&net, 0, 3).is_err());
        assert!(eigenvector_family2(&net, 5, 2).is_err());
    }

    #[test]
    fn transition_small() {
        let t = transition_spectrum(&build_baseline(Baseline::Complete, 2).unwrap()).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-14 && (t[1] + 1.0).abs() < 1e-14);
        let t = transition_spectrum(&build_baseline(Baseline::Path, 3).unwrap()).unwrap();
        for (a, b) in t.iter().zip([1.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        for g in [
            build_hsw(2, 3).unwrap().into_graph(),
            build_baseline(Baseline::Cycle, 9).unwrap(),
        ] {
            let t = transition_spectrum(&g).unwrap();
            assert!((t[0] - 1.0).abs() < 1e-12);
            assert!(t[1] < 1.0 - 1e-6);
        }
    }

    #[test]
    fn extremes_examples() {
        let e = extremes(&closed_form_spectrum(2, 3).unwrap()).unwrap();
        assert_eq!((e.lambda2.0, e.lambda_n.0), (1.0, 15.0));
        assert!((e.eps_max.0 - PI / 30.0).abs() < 1e-15);
        let k5 = numeric_spectrum(&build_baseline(Baseline::Complete, 5).unwrap()).unwrap();
        let e = extremes(&k5).unwrap();
        assert!((e.lambda2.0 - 5.0).abs() < 1e-12 && (e.lambda_n.0 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn extremes_rejects_malformed() {
        let bad = SpectrumResult {
            n: 2,
            source: SpectrumSource::Numeric,
            pairs: vec![SpectralPair {
                lambda: 1.0,
                mult: 2,
            }],
        };
        assert!(matches!(extremes(&bad), Err(Error::MalformedSpectrum(_))));
    }

    #[test]
    fn spectrum_json_shape() {
        let s = closed_form_spectrum(2, 1).unwrap().to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["source"], "closed_form");
        assert_eq!(v["pairs"][2]["lambda"].as_f64(), Some(3.0));
        assert_eq!(v["pairs"][2]["mult"], 1);
        assert!(s.contains("3.0000000000000000e0"));
    }
}
