//! Network coherence from Laplacian spectra, the closed forms for `M_g^r`,
//! the Kirchhoff index, the coherence bounds, and scaling tables.

use std::fmt::Write as _;

use serde::Serialize;

use crate::graph::{Graph, GraphMetrics};
use crate::hsw::order_and_size;
use crate::numeric::{csum, fmt17, le_tol, Sig17};
use crate::spectral::SpectrumResult;
use crate::{Error, Result};

/// Relative slack for the bound inequalities, several of which are tight
/// (complete graphs, even cycles).
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceOrder {
    First,
    Second,
}

impl CoherenceOrder {
    fn exponent(self) -> i32 {
        match self {
            CoherenceOrder::First => 1,
            CoherenceOrder::Second => 2,
        }
    }
}

impl TryFrom<u8> for CoherenceOrder {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(CoherenceOrder::First),
            2 => Ok(CoherenceOrder::Second),
            _ => Err(Error::InvalidParameter(format!(
                "coherence order must be 1 or 2, got {v}"
            ))),
        }
    }
}

fn reciprocal_sum(spec: &SpectrumResult, power: i32) -> Result<f64> {
    let mut any = false;
    let s = csum(spec.nonzero().map(|p| {
        any = true;
        p.mult as f64 / p.lambda.powi(power)
    }));
    if !any || spec.n < 2 {
        return Err(Error::MalformedSpectrum("no nonzero eigenvalues".into()));
    }
    Ok(s)
}

/// `(1/2n) Σ mult / λ^k` over the nonzero eigenvalues, `k` = 1 or 2.
pub fn coherence_from_spectrum(spec: &SpectrumResult, order: CoherenceOrder) -> Result<f64> {
    Ok(reciprocal_sum(spec, order.exponent())? / (2.0 * spec.n as f64))
}

fn closed_sum(r: usize, g: usize, term: impl Fn(f64, f64, f64) -> f64) -> Result<f64> {
    if r < 2 || g < 1 {
        return Err(Error::InvalidParameter(format!(
            "need r >= 2 and g >= 1, got r={r} g={g}"
        )));
    }
    order_and_size(r, g)?;
    let rf = r as f64;
    let prefactor = (rf - 1.0).powi(2) / (2.0 * (rf.powi(g as i32 + 1) - 1.0));
    let s = csum((0..g).map(|i| {
        let i_f = i as f64;
        let big = rf.powi((g - i + 1) as i32) + i_f * (rf - 1.0) - 1.0;
        rf.powi(i as i32) * term(rf, i_f, big)
    }));
    Ok(prefactor * s)
}

/// First-order coherence of `M_g^r`:
/// `(r-1)^2 / (2(r^{g+1}-1)) Σ_i r^i (1/(r^{g-i+1} + i(r-1) - 1) + 1/(i+1))`.
pub fn h1_closed(r: usize, g: usize) -> Result<f64> {
    closed_sum(r, g, |_, i, big| 1.0 / big + 1.0 / (i + 1.0))
}

/// Second-order coherence of `M_g^r`:
/// `(r-1)^2 / (2(r^{g+1}-1)) Σ_i r^i ((r-1)/(r^{g-i+1} + i(r-1) - 1)^2 + 1/(i+1)^2)`.
pub fn h2_closed(r: usize, g: usize) -> Result<f64> {
    closed_sum(r, g, |rf, i, big| {
        (rf - 1.0) / (big * big) + 1.0 / ((i + 1.0) * (i + 1.0))
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Kirchhoff {
    /// `R = n Σ mult / λ`.
    pub index: Sig17,
    /// `R / (2 n^2)`.
    pub h1: Sig17,
}

pub fn kirchhoff_index(spec: &SpectrumResult) -> Result<Kirchhoff> {
    let n = spec.n as f64;
    let index = n * reciprocal_sum(spec, 1)?;
    Ok(Kirchhoff {
        index: Sig17(index),
        h1: Sig17(index / (2.0 * n * n)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One inequality `lhs <= rhs` (or identity `lhs == rhs`).
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: Sig17,
    pub rhs: Sig17,
    pub status: CheckStatus,
}

impl BoundCheck {
    fn le(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let status = if le_tol(lhs, rhs, BOUND_TOL) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name,
            lhs: Sig17(lhs),
            rhs: Sig17(rhs),
            status,
        }
    }

    fn le_opt(name: &'static str, lhs: Option<f64>, rhs: Option<f64>) -> Self {
        match (lhs, rhs) {
            (Some(a), Some(b)) => Self::le(name, a, b),
            _ => Self {
                name,
                lhs: Sig17(lhs.unwrap_or(f64::NAN)),
                rhs: Sig17(rhs.unwrap_or(f64::NAN)),
                status: CheckStatus::Skipped,
            },
        }
    }

    fn eq_rel(name: &'static str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let ok = (lhs - rhs).abs() <= tol * lhs.abs().max(rhs.abs());
        Self {
            name,
            lhs: Sig17(lhs),
            rhs: Sig17(rhs),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub n: usize,
    pub h1: Sig17,
    pub h2: Sig17,
    pub kirchhoff: Sig17,
    /// `1 / (2⟨k⟩)`, the large-n form of the degree lower bound.
    pub lower_bound_k: Sig17,
    /// `(n-1)^2 / (2 n^2 ⟨k⟩)`, the finite-n degree lower bound.
    pub lower_bound_k_exact: Sig17,
    /// `μ / 4`.
    pub upper_bound_mu: Sig17,
    /// `(1/(2nΔ)) Σ_{i>=2} 1/(1-θ_i)`.
    pub transition_lower: Sig17,
    /// `(1/(2nδ)) Σ_{i>=2} 1/(1-θ_i)`.
    pub transition_upper: Sig17,
    pub lambda2: Sig17,
    pub checks: Vec<BoundCheck>,
}

impl CoherenceReport {
    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

/// Evaluates every coherence bound and the Fiedler chain for one graph.
///
/// `theta` is the transition spectrum sorted descending.
pub fn bound_report(
    g: &Graph,
    spec: &SpectrumResult,
    theta: &[f64],
    metrics: &GraphMetrics,
) -> Result<CoherenceReport> {
    let n = g.n();
    if spec.n != n || theta.len() != n || metrics.n != n {
        return Err(Error::SizeMismatch(format!(
            "graph n={n}, spectrum n={}, theta len={}, metrics n={}",
            spec.n,
            theta.len(),
            metrics.n
        )));
    }
    let nf = n as f64;
    let h1 = coherence_from_spectrum(spec, CoherenceOrder::First)?;
    let h2 = coherence_from_spectrum(spec, CoherenceOrder::Second)?;
    let kirchhoff = kirchhoff_index(spec)?;
    let avg_k = metrics.avg_degree.0;
    let lower_bound_k = 1.0 / (2.0 * avg_k);
    let lower_bound_k_exact = (nf - 1.0).powi(2) / (2.0 * nf * nf * avg_k);
    let upper_bound_mu = metrics.avg_path_length.0 / 4.0;
    let kemeny = csum(theta[1..].iter().map(|t| 1.0 / (1.0 - t)));
    let transition_lower = kemeny / (2.0 * nf * metrics.max_degree as f64);
    let transition_upper = kemeny / (2.0 * nf * metrics.min_degree as f64);
    let lambda2 = spec
        .nonzero()
        .next()
        .ok_or_else(|| Error::MalformedSpectrum("no nonzero eigenvalue".into()))?
        .lambda;
    let cv = metrics.vertex_connectivity.map(|c| c as f64);
    let ce = metrics.edge_connectivity.map(|c| c as f64);
    let checks = vec![
        BoundCheck::le("lower_bound_k", lower_bound_k, h1),
        BoundCheck::le("lower_bound_k_exact", lower_bound_k_exact, h1),
        BoundCheck::le("upper_bound_mu", h1, upper_bound_mu),
        BoundCheck::le("transition_lower", transition_lower, h1),
        BoundCheck::le("transition_upper", h1, transition_upper),
        BoundCheck::eq_rel("kirchhoff_identity", h1, kirchhoff.h1.0, 1e-12),
        BoundCheck::le_opt("fiedler_lambda2_cv", Some(lambda2), cv),
        BoundCheck::le_opt("fiedler_cv_ce", cv, ce),
        BoundCheck::le_opt("fiedler_ce_delta", ce, Some(metrics.min_degree as f64)),
    ];
    Ok(CoherenceReport {
        n,
        h1: Sig17(h1),
        h2: Sig17(h2),
        kirchhoff: kirchhoff.index,
        lower_bound_k: Sig17(lower_bound_k),
        lower_bound_k_exact: Sig17(lower_bound_k_exact),
        upper_bound_mu: Sig17(upper_bound_mu),
        transition_lower: Sig17(transition_lower),
        transition_upper: Sig17(transition_upper),
        lambda2: Sig17(lambda2),
        checks,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingRow {
    pub r: usize,
    pub g: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub h1: Sig17,
    pub h2: Sig17,
    /// `h1 · ln N · ln ln N`
    pub h1_scaled: Sig17,
    /// `h2 · (ln N)^2 · ln ln N`
    pub h2_scaled: Sig17,
}

/// Rows for `g = 1..=g_max` from the closed forms alone.
pub fn scaling_table(r: usize, g_max: usize) -> Result<Vec<ScalingRow>> {
    if g_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "g_max must be >= 2, got {g_max}"
        )));
    }
    (1..=g_max)
        .map(|g| {
            let (n, _) = order_and_size(r, g)?;
            let h1 = h1_closed(r, g)?;
            let h2 = h2_closed(r, g)?;
            let ln = (n as f64).ln();
            let lnln = ln.ln();
            Ok(ScalingRow {
                r,
                g,
                n,
                h1: Sig17(h1),
                h2: Sig17(h2),
                h1_scaled: Sig17(h1 * ln * lnln),
                h2_scaled: Sig17(h2 * ln * ln * lnln),
            })
        })
        .collect()
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut s = String::from("r,g,N,h1,h2,h1_scaled,h2_scaled\n");
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            row.r,
            row.g,
            row.n,
            fmt17(row.h1.0),
            fmt17(row.h2.0),
            fmt17(row.h1_scaled.0),
            fmt17(row.h2_scaled.0)
        );
    }
    s
}

/// Thresholds that turn the graphical scaling claims into checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingCriteria {
    /// Max allowed ratio max/min of the scaled coherence over the window.
    pub drift_factor: f64,
    /// Max relative difference of `h1` between `r = 2` and `r = 3`.
    pub r_effect_threshold: f64,
    /// Generations from which the `r` comparison applies.
    pub r_effect_min_g: usize,
}

impl Default for ScalingCriteria {
    fn default() -> Self {
        Self {
            drift_factor: 2.0,
            r_effect_threshold: 0.25,
            r_effect_min_g: 6,
        }
    }
}

/// `max / min` of `h1_scaled` and `h2_scaled` over rows with `g` in `[g_lo, g_hi]`.
pub fn scaled_drift(rows: &[ScalingRow], g_lo: usize, g_hi: usize) -> (f64, f64) {
    let ratio = |f: fn(&ScalingRow) -> f64| {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|row| (g_lo..=g_hi).contains(&row.g))
            .map(f)
            .collect();
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    };
    (ratio(|row| row.h1_scaled.0), ratio(|row| row.h2_scaled.0))
}

/// Relative difference `|h1(r_a, g) - h1(r_b, g)| / h1(r_a, g)`.
pub fn r_effect(r_a: usize, r_b: usize, g: usize) -> Result<f64> {
    let a = h1_closed(r_a, g)?;
    let b = h1_closed(r_b, g)?;
    Ok((a - b).abs() / a)
}
