//! Per-node adaptation rules and the combine step.
//!
//! All updates share one shape: the new local estimate is the previous
//! combined estimate plus `mu * sum_l c[l][k] * gain(e_l) * u_l`, where the
//! gain is a scalar function of the a-priori error `e_l = d_l - u_l^T w`.
//! The logarithmic-cost family blends norms through the error magnitude:
//!
//! ```text
//! dLMLS:  gain(e) = delta e^3 / (1 + delta e^2)
//! dLLAD:  gain(e) = delta e / (1 + delta |e|)
//! dLLMP:  gain(e) = delta |e|^(2p-1) sign(e) / (1 + delta |e|^p)
//! ```
//!
//! with the `dLMS` (`gain = e`) and `dLMP` (`gain = |e|^(p-1) sign(e)`)
//! baselines alongside. At `p = 1` the dLLMP gain equals dLLAD's, at
//! `p = 2` it equals dLMLS's. An optional zero-attraction term subtracts
//! `rho * grad` once per step, where the gradient approximates an l0-norm
//! penalty and acts only on coefficients within `[-1/beta, 1/beta]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volterra::{volterra_output, ExpandedRegressor, VolterraKernel};

/// Beyond this error magnitude the log-family gains are evaluated through
/// their large-error limits; the dropped terms are below 1e-200 relative.
const LARGE_ERROR: f64 = 1e100;

/// Which update rule a node runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgorithmFamily {
    /// Diffusion least mean squares baseline.
    #[serde(rename = "dlms")]
    Lms,
    /// Diffusion least mean p-power baseline.
    #[serde(rename = "dlmp")]
    Lmp,
    /// Diffusion least mean logarithmic square.
    #[serde(rename = "dlmls")]
    Lmls,
    /// Diffusion least logarithmic absolute difference.
    #[serde(rename = "dllad")]
    Llad,
    /// Diffusion logarithmic least mean p-power.
    #[serde(rename = "dllmp")]
    Llmp,
}

impl AlgorithmFamily {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmFamily::Lms => "dlms",
            AlgorithmFamily::Lmp => "dlmp",
            AlgorithmFamily::Lmls => "dlmls",
            AlgorithmFamily::Llad => "dllad",
            AlgorithmFamily::Llmp => "dllmp",
        }
    }

    /// Whether the family uses the log-cost parameter `delta`.
    pub fn uses_delta(&self) -> bool {
        matches!(
            self,
            AlgorithmFamily::Lmls | AlgorithmFamily::Llad | AlgorithmFamily::Llmp
        )
    }

    /// Whether the family uses the per-node exponent `p`.
    pub fn uses_p(&self) -> bool {
        matches!(self, AlgorithmFamily::Lmp | AlgorithmFamily::Llmp)
    }
}

impl std::fmt::Display for AlgorithmFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Order of the two diffusion sub-steps within one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionMode {
    /// Adapt on local data first, then combine neighbor estimates.
    Atc,
    /// Combine neighbor estimates first, then adapt the blend.
    Cta,
}

/// Algorithm identity and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub family: AlgorithmFamily,
    /// Step size, > 0.
    pub mu: f64,
    /// Log-cost parameter, > 0 for the log families.
    pub delta: f64,
    /// Per-node exponent for dLMP/dLLMP, each in [1, 2].
    pub p_per_node: Vec<f64>,
    /// Whether the zero-attraction term is applied.
    pub l0_enabled: bool,
    /// Zero-attraction strength `rho = lambda * mu`, >= 0.
    pub rho: f64,
    /// Attraction-region parameter, in [5, 20] when l0 is enabled.
    pub beta: f64,
    pub mode: DiffusionMode,
}

impl AlgorithmSpec {
    pub fn validate(&self) -> Result<()> {
        // mu = 0 is allowed as a degenerate no-adaptation diagnostic
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::invalid(format!("mu must be >= 0, got {}", self.mu)));
        }
        if self.family.uses_delta() && (!self.delta.is_finite() || self.delta <= 0.0) {
            return Err(Error::invalid(format!(
                "delta must be > 0 for {}, got {}",
                self.family, self.delta
            )));
        }
        if !self.rho.is_finite() || self.rho < 0.0 {
            return Err(Error::invalid(format!(
                "rho must be >= 0, got {}",
                self.rho
            )));
        }
        if self.l0_enabled && !(5.0..=20.0).contains(&self.beta) {
            return Err(Error::invalid(format!(
                "beta must be in [5, 20] with l0 enabled, got {}",
                self.beta
            )));
        }
        for (k, &p) in self.p_per_node.iter().enumerate() {
            if !(1.0..=2.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "p for node {k} must be in [1, 2], got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-node state across one diffusion iteration: the combined estimate
/// `w` and the local intermediate estimate `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub w: VolterraKernel,
    pub phi: VolterraKernel,
}

impl NodeState {
    pub fn zeros(p: usize) -> Result<Self> {
        Ok(Self {
            w: VolterraKernel::zeros(p)?,
            phi: VolterraKernel::zeros(p)?,
        })
    }
}

/// One neighbor's contribution to an adapt step.
#[derive(Debug, Clone)]
pub struct NeighborDatum {
    pub u: ExpandedRegressor,
    /// Desired signal observed at the neighbor.
    pub d: f64,
    /// Adaptation weight `c[l][k]`, >= 0.
    pub weight: f64,
    /// The neighbor's exponent `p`.
    pub p: f64,
}

/// A-priori error `d - u^T w`.
pub fn error(d: f64, u: &ExpandedRegressor, w: &VolterraKernel) -> Result<f64> {
    Ok(d - volterra_output(w, u)?)
}

fn sign(e: f64) -> f64 {
    if e > 0.0 {
        1.0
    } else if e < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Scalar error gain of each family; the update adds
/// `mu * weight * gain * u`.
pub fn update_gain(family: AlgorithmFamily, e: f64, delta: f64, p: f64) -> f64 {
    let a = e.abs();
    match family {
        AlgorithmFamily::Lms => e,
        AlgorithmFamily::Lmp => a.powf(p - 1.0) * sign(e),
        AlgorithmFamily::Lmls => {
            if a <= LARGE_ERROR {
                delta * e * e * e / (1.0 + delta * e * e)
            } else {
                e
            }
        }
        AlgorithmFamily::Llad => {
            if a <= LARGE_ERROR {
                delta * e / (1.0 + delta * a)
            } else {
                sign(e)
            }
        }
        AlgorithmFamily::Llmp => {
            if e == 0.0 {
                0.0
            } else if a <= LARGE_ERROR {
                delta * a.powf(2.0 * p - 1.0) * sign(e) / (1.0 + delta * a.powf(p))
            } else {
                a.powf(p - 1.0) * sign(e)
            }
        }
    }
}

/// Element-wise gradient of the l0-norm approximation: attraction toward
/// zero inside `[-1/beta, 1/beta]`, zero outside and at zero itself.
pub fn zero_attraction(w_m: f64, beta: f64) -> f64 {
    if w_m >= -1.0 / beta && w_m < 0.0 {
        -beta * beta * w_m - beta
    } else if w_m > 0.0 && w_m <= 1.0 / beta {
        -beta * beta * w_m + beta
    } else {
        0.0
    }
}

/// [`zero_attraction`] applied to every coefficient.
pub fn zero_attraction_grad(w: &VolterraKernel, beta: f64) -> Vec<f64> {
    w.coeffs()
        .iter()
        .map(|&c| zero_attraction(c, beta))
        .collect()
}

/// One local adapt step: fold every neighbor datum into the previous
/// combined estimate, then apply the zero-attraction term if enabled.
/// Non-finite intermediates surface as numeric failures.
pub fn adapt_step(
    spec: &AlgorithmSpec,
    w_prev: &VolterraKernel,
    data: &[NeighborDatum],
) -> Result<VolterraKernel> {
    let mut phi = w_prev.clone();
    for datum in data {
        debug_assert!(datum.weight >= 0.0);
        let e = error(datum.d, &datum.u, w_prev)?;
        let step = spec.mu * datum.weight * update_gain(spec.family, e, spec.delta, datum.p);
        if !step.is_finite() {
            return Err(Error::NumericFailure(format!(
                "non-finite {} update for error {e}",
                spec.family
            )));
        }
        for (w, u) in phi.coeffs_mut().iter_mut().zip(datum.u.values()) {
            *w += step * u;
        }
    }
    if spec.l0_enabled {
        let beta = spec.beta;
        for (w, prev) in phi.coeffs_mut().iter_mut().zip(w_prev.coeffs()) {
            *w -= spec.rho * zero_attraction(*prev, beta);
        }
    }
    if let Some(bad) = phi.coeffs().iter().find(|v| !v.is_finite()) {
        return Err(Error::NumericFailure(format!(
            "non-finite coefficient {bad} after {} step",
            spec.family
        )));
    }
    Ok(phi)
}

/// Combine step: weighted average of neighbor estimates. Weights must be
/// non-negative and sum to 1 within 1e-12.
pub fn combine(a_column: &[f64], phis: &[&VolterraKernel]) -> Result<VolterraKernel> {
    if a_column.len() != phis.len() {
        return Err(Error::DimensionMismatch {
            expected: a_column.len(),
            actual: phis.len(),
        });
    }
    if phis.is_empty() {
        return Err(Error::invalid("combine needs at least one estimate"));
    }
    let sum: f64 = a_column.iter().sum();
    if a_column.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "combine weights must be non-negative and sum to 1, got sum {sum}"
        )));
    }
    let m = phis[0].len();
    let mut out = vec![0.0; m];
    for (&a, phi) in a_column.iter().zip(phis) {
        if phi.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: phi.len(),
            });
        }
        for (o, &c) in out.iter_mut().zip(phi.coeffs()) {
            *o += a * c;
        }
    }
    VolterraKernel::new(out, phis[0].memory_length())
}

/// Which logarithm the scalar cost uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogCostForm {
    /// `F - (1/delta) ln(delta F)`; needs `F > 0`.
    LnScaled,
    /// `F - (1/delta) ln(1 + delta F)`; needs `F >= 0`. Its derivative in
    /// `F` is `delta F / (1 + delta F)`, the factor appearing in every
    /// update gain above.
    LnOnePlus,
}

/// Scalar logarithmic cost of an error functional value. Used by the
/// gradient-verification suite, not by the runtime updates.
pub fn log_cost(f_value: f64, delta: f64, form: LogCostForm) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::invalid(format!("delta must be > 0, got {delta}")));
    }
    match form {
        LogCostForm::LnScaled => {
            if f_value.is_nan() || f_value <= 0.0 {
                return Err(Error::invalid(format!(
                    "F must be > 0 for the ln(delta F) form, got {f_value}"
                )));
            }
            Ok(f_value - (delta * f_value).ln() / delta)
        }
        LogCostForm::LnOnePlus => {
            if f_value.is_nan() || f_value < 0.0 {
                return Err(Error::invalid(format!(
                    "F must be >= 0 for the ln(1 + delta F) form, got {f_value}"
                )));
            }
            Ok(f_value - (delta * f_value).ln_1p() / delta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::stream_rng;
    use crate::volterra::{expand, expanded_length, InputWindow};
    use proptest::prelude::*;
    use rand::Rng;

    fn spec(family: AlgorithmFamily, mu: f64, delta: f64) -> AlgorithmSpec {
        AlgorithmSpec {
            family,
            mu,
            delta,
            p_per_node: vec![],
            l0_enabled: false,
            rho: 0.0,
            beta: 10.0,
            mode: DiffusionMode::Atc,
        }
    }

    #[test]
    fn error_examples() {
        // w = w_o, zero noise
        let window = InputWindow::new(vec![0.4, -1.1, 0.3]).unwrap();
        let u = expand(&window);
        let mut rng = stream_rng(1, &[0]);
        let w_o = crate::volterra::make_sparse_plant(3, 4, &mut rng).unwrap();
        let d = volterra_output(&w_o, &u).unwrap();
        assert_eq!(error(d, &u, &w_o).unwrap(), 0.0);

        // w = 0 -> e = d
        let zero = VolterraKernel::zeros(3).unwrap();
        assert_eq!(error(d, &u, &zero).unwrap(), d);

        // d = 1, u = unit at 0, w[0] = 0.3 -> 0.7
        let u = expand(&InputWindow::new(vec![1.0]).unwrap()); // [1, 1]
        let w = VolterraKernel::new(vec![0.3, 0.0], 1).unwrap();
        assert!((error(1.0, &u, &w).unwrap() - 0.7).abs() < 1e-15);
    }

    /// Single-datum step with u the unit vector at index 0 (P = 2, M = 5),
    /// starting from w = 0, so e = d.
    fn one_datum_phi(family: AlgorithmFamily, mu: f64, delta: f64, d: f64) -> VolterraKernel {
        let u = ExpandedRegressor::new(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let w = VolterraKernel::zeros(2).unwrap();
        let data = [NeighborDatum {
            u,
            d,
            weight: 1.0,
            p: 1.5,
        }];
        adapt_step(&spec(family, mu, delta), &w, &data).unwrap()
    }

    #[test]
    fn hand_evaluated_steps() {
        // dLMLS: e = 1 -> mu * 1^3 * delta / (1 + delta) = 0.1 * 0.5 = 0.05
        let phi = one_datum_phi(AlgorithmFamily::Lmls, 0.1, 1.0, 1.0);
        assert!(
            (phi.coeffs()[0] - 0.05).abs() < 1e-15,
            "{}",
            phi.coeffs()[0]
        );
        assert!(phi.coeffs()[1..].iter().all(|&c| c == 0.0));

        // dLLAD: e = 2 -> mu * delta * 2 / (1 + 2 delta) = 0.1 * 2/3
        let phi = one_datum_phi(AlgorithmFamily::Llad, 0.1, 1.0, 2.0);
        assert!(
            (phi.coeffs()[0] - 0.2 / 3.0).abs() < 1e-15,
            "{}",
            phi.coeffs()[0]
        );
        assert!(phi.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn zero_error_means_no_update() {
        let window = InputWindow::new(vec![0.7, -0.2]).unwrap();
        let u = expand(&window);
        let w = VolterraKernel::new(vec![0.1, -0.4, 0.2, 0.0, 1.0], 2).unwrap();
        let d = volterra_output(&w, &u).unwrap();
        for family in [
            AlgorithmFamily::Lms,
            AlgorithmFamily::Lmp,
            AlgorithmFamily::Lmls,
            AlgorithmFamily::Llad,
            AlgorithmFamily::Llmp,
        ] {
            let data = [NeighborDatum {
                u: u.clone(),
                d,
                weight: 1.0,
                p: 1.3,
            }];
            let phi = adapt_step(&spec(family, 0.05, 2.0), &w, &data).unwrap();
            assert_eq!(phi, w, "{family} moved on zero error");
        }
    }

    fn random_datum<R: Rng>(rng: &mut R, p_mem: usize, p_exp: f64) -> NeighborDatum {
        let window =
            InputWindow::new((0..p_mem).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        NeighborDatum {
            u: expand(&window),
            d: rng.gen_range(-3.0..3.0),
            weight: 1.0,
            p: p_exp,
        }
    }

    #[test]
    fn llmp_reduces_to_llad_and_lmls() {
        let mut rng = stream_rng(21, &[0]);
        for _ in 0..1000 {
            let p_mem = rng.gen_range(1..=4);
            let m = expanded_length(p_mem).unwrap();
            let coeffs: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = VolterraKernel::new(coeffs, p_mem).unwrap();
            let mu = rng.gen_range(0.001..0.2);
            let delta = rng.gen_range(0.1..5.0);

            let d1 = [random_datum(&mut rng, p_mem, 1.0)];
            let llmp = adapt_step(&spec(AlgorithmFamily::Llmp, mu, delta), &w, &d1).unwrap();
            let llad = adapt_step(&spec(AlgorithmFamily::Llad, mu, delta), &w, &d1).unwrap();
            for (a, b) in llmp.coeffs().iter().zip(llad.coeffs()) {
                assert!((a - b).abs() < 1e-12, "p=1 reduction: {a} vs {b}");
            }

            let d2 = [random_datum(&mut rng, p_mem, 2.0)];
            let llmp = adapt_step(&spec(AlgorithmFamily::Llmp, mu, delta), &w, &d2).unwrap();
            let lmls = adapt_step(&spec(AlgorithmFamily::Lmls, mu, delta), &w, &d2).unwrap();
            for (a, b) in llmp.coeffs().iter().zip(lmls.coeffs()) {
                assert!((a - b).abs() < 1e-12, "p=2 reduction: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_attraction_hand_values() {
        assert_eq!(zero_attraction(0.05, 10.0), 5.0);
        assert_eq!(zero_attraction(-0.05, 10.0), -5.0);
        assert_eq!(zero_attraction(0.2, 10.0), 0.0);
        assert_eq!(zero_attraction(0.0, 10.0), 0.0);
        // boundary of the region: -beta^2/beta + beta = 0
        assert_eq!(zero_attraction(0.1, 10.0), 0.0);
    }

    proptest! {
        #[test]
        fn zero_attraction_locality(w_m in -0.5f64..0.5, beta in 5.0f64..20.0) {
            let g = zero_attraction(w_m, beta);
            let inside = w_m != 0.0 && w_m.abs() <= 1.0 / beta;
            if inside {
                // |grad| = beta - beta^2 |w|, strictly decreasing in |w|
                prop_assert!((g.abs() - (beta - beta * beta * w_m.abs())).abs() < 1e-9);
                let closer = zero_attraction(w_m * 0.5, beta);
                prop_assert!(closer.abs() > g.abs() || g.abs() == 0.0);
            } else {
                prop_assert_eq!(g, 0.0);
            }
        }

        #[test]
        fn combine_stays_in_convex_hull(
            vals in proptest::collection::vec(-2.0f64..2.0, 10),
            t in 0.0f64..1.0,
        ) {
            let a = VolterraKernel::new(vals[..5].to_vec(), 2).unwrap();
            let b = VolterraKernel::new(vals[5..].to_vec(), 2).unwrap();
            let out = combine(&[t, 1.0 - t], &[&a, &b]).unwrap();
            for j in 0..5 {
                let lo = a.coeffs()[j].min(b.coeffs()[j]) - 1e-12;
                let hi = a.coeffs()[j].max(b.coeffs()[j]) + 1e-12;
                prop_assert!(out.coeffs()[j] >= lo && out.coeffs()[j] <= hi);
            }
        }
    }

    #[test]
    fn combine_examples_and_errors() {
        let a = VolterraKernel::new(vec![1.0, 0.0, 0.0, 0.0, 0.0], 2).unwrap();
        let b = VolterraKernel::new(vec![0.0, 1.0, 0.0, 0.0, 0.0], 2).unwrap();

        let same = combine(&[1.0], &[&a]).unwrap();
        assert_eq!(same, a);

        let avg = combine(&[0.5, 0.5], &[&a, &b]).unwrap();
        assert_eq!(avg.coeffs(), &[0.5, 0.5, 0.0, 0.0, 0.0]);

        let both = combine(&[0.3, 0.7], &[&a, &a]).unwrap();
        assert_eq!(both, a);

        assert!(combine(&[0.5, 0.6], &[&a, &b]).is_err());
        assert!(combine(&[-0.5, 1.5], &[&a, &b]).is_err());
    }

    #[test]
    fn log_cost_values_and_derivative() {
        assert_eq!(log_cost(0.0, 2.0, LogCostForm::LnOnePlus).unwrap(), 0.0);
        let v = log_cost(1.0, 1.0, LogCostForm::LnOnePlus).unwrap();
        assert!((v - (1.0 - 2.0f64.ln())).abs() < 1e-15, "{v}");
        assert!(log_cost(0.0, 1.0, LogCostForm::LnScaled).is_err());
        // F - ln(delta F)/delta at F = 1, delta = 1 is 1 - ln 1 = 1
        assert_eq!(log_cost(1.0, 1.0, LogCostForm::LnScaled).unwrap(), 1.0);

        // d/dF [F - ln(1 + delta F)/delta] = delta F / (1 + delta F)
        let delta = 1.7;
        for f in [0.3, 1.0, 4.2] {
            let h = 1e-6;
            let fd = (log_cost(f + h, delta, LogCostForm::LnOnePlus).unwrap()
                - log_cost(f - h, delta, LogCostForm::LnOnePlus).unwrap())
                / (2.0 * h);
            let closed = delta * f / (1.0 + delta * f);
            assert!((fd - closed).abs() < 1e-8, "F={f}: fd {fd} vs {closed}");
        }
    }

    #[test]
    fn lmls_influence_grows_linearly_llad_saturates() {
        let delta = 0.8;
        let mut prev = 0.0;
        for k in 0..12 {
            let e = 10.0f64.powi(k - 3);
            let g = update_gain(AlgorithmFamily::Lmls, e, delta, 1.0);
            assert!(g > prev, "dLMLS gain must increase with |e|");
            prev = g;
        }
        // asymptotic slope ~ 1: gain(10 e) / gain(e) -> 10
        let big = update_gain(AlgorithmFamily::Lmls, 1e8, delta, 1.0);
        let bigger = update_gain(AlgorithmFamily::Lmls, 1e9, delta, 1.0);
        assert!((bigger / big - 10.0).abs() < 1e-6);

        for k in 0..14 {
            let e = 10.0f64.powi(k - 3);
            let g = update_gain(AlgorithmFamily::Llad, e, delta, 1.0);
            assert!(g <= 1.0, "dLLAD gain must stay below 1, got {g} at e={e}");
        }
        assert!(update_gain(AlgorithmFamily::Llad, 1e12, delta, 1.0) > 0.999);
    }

    #[test]
    fn huge_errors_stay_finite_in_log_families() {
        for family in [
            AlgorithmFamily::Lmls,
            AlgorithmFamily::Llad,
            AlgorithmFamily::Llmp,
        ] {
            for e in [1e120, -1e150, 1e300] {
                let g = update_gain(family, e, 1.0, 1.5);
                assert!(g.is_finite(), "{family} gain at e={e} is {g}");
            }
        }
        // a dLMS step that overflows the coefficients is surfaced, not clamped
        let u = ExpandedRegressor::new(vec![1e200, 0.0]);
        let w = VolterraKernel::zeros(1).unwrap();
        let data = [NeighborDatum {
            u,
            d: 1e200,
            weight: 1.0,
            p: 2.0,
        }];
        let err = adapt_step(&spec(AlgorithmFamily::Lms, 1.0, 1.0), &w, &data);
        assert!(matches!(err, Err(Error::NumericFailure(_))));
    }

    #[test]
    fn l0_term_matches_plain_path_when_rho_zero() {
        let mut rng = stream_rng(77, &[0]);
        let w = crate::volterra::make_sparse_plant(3, 2, &mut rng).unwrap();
        let data = [random_datum(&mut rng, 3, 1.5)];
        let mut s = spec(AlgorithmFamily::Lmls, 0.05, 1.0);
        let plain = adapt_step(&s, &w, &data).unwrap();
        s.l0_enabled = true;
        s.rho = 0.0;
        let with_l0 = adapt_step(&s, &w, &data).unwrap();
        assert_eq!(plain, with_l0);
    }

    #[test]
    fn adapt_step_rejects_mismatched_regressor() {
        let w = VolterraKernel::zeros(3).unwrap();
        let data = [NeighborDatum {
            u: ExpandedRegressor::new(vec![1.0, 2.0]),
            d: 1.0,
            weight: 1.0,
            p: 1.5,
        }];
        let err = adapt_step(&spec(AlgorithmFamily::Lms, 0.1, 1.0), &w, &data);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spec_validation_catches_bad_parameters() {
        let mut s = spec(AlgorithmFamily::Lmls, 0.1, 1.0);
        s.validate().unwrap();
        s.mu = -0.1;
        assert!(s.validate().is_err());
        s.mu = 0.1;
        s.delta = 0.0;
        assert!(s.validate().is_err());
        s.delta = 1.0;
        s.l0_enabled = true;
        s.beta = 3.0;
        assert!(s.validate().is_err());
        s.beta = 10.0;
        s.p_per_node = vec![1.5, 2.5];
        assert!(s.validate().is_err());
    }
}
