//! Built-in self-checks behind the `verify` CLI verb.
//!
//! Each check re-derives an expected behaviour through an independent
//! route (hand-expanded sums, finite differences, order statistics) and
//! compares the runtime implementation against it.

use rand::Rng;

use crate::adapt::{
    adapt_step, log_cost, zero_attraction, AlgorithmFamily, AlgorithmSpec, DiffusionMode,
    LogCostForm, NeighborDatum,
};
use crate::noise::{sample_gaussian, sample_sas, NoiseSpec};
use crate::seeds::stream_rng;
use crate::topology::{metropolis_weights, random_connected_graph, uniform_weights};
use crate::volterra::{
    expand, expanded_length, volterra_output, ExpandedRegressor, InputWindow, VolterraKernel,
};

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from(name: &'static str, result: Result<String, String>) -> Self {
        match result {
            Ok(detail) => Self {
                name,
                passed: true,
                detail,
            },
            Err(detail) => Self {
                name,
                passed: false,
                detail,
            },
        }
    }
}

/// Run every check.
pub fn all_checks() -> Vec<CheckOutcome> {
    vec![
        check_volterra_expansion(),
        check_reduction_identity(),
        check_gradient_consistency(),
        check_attraction_region(),
        check_combination_matrices(),
        check_sas_distribution(),
    ]
}

fn bare_spec(family: AlgorithmFamily, mu: f64, delta: f64) -> AlgorithmSpec {
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

/// Inner-product output against the literal double-sum expansion.
pub fn check_volterra_expansion() -> CheckOutcome {
    let mut rng = stream_rng(0x5601, &[]);
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let p = rng.gen_range(1..=8);
        let m = expanded_length(p).expect("p >= 1");
        let w = VolterraKernel::new((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(), p)
            .expect("length checked");
        let window =
            InputWindow::new((0..p).map(|_| rng.gen_range(-2.0..2.0)).collect()).expect("p >= 1");
        let x = window.samples();

        let mut by_sums = 0.0;
        for m1 in 0..p {
            by_sums += w.linear()[m1] * x[m1];
        }
        for m1 in 0..p {
            for m2 in m1..p {
                by_sums += w.quadratic(m1, m2) * x[m2] * x[m1];
            }
        }
        let by_dot = volterra_output(&w, &expand(&window)).expect("matching M");
        let rel = (by_dot - by_sums).abs() / by_sums.abs().max(1.0);
        worst = worst.max(rel);
    }
    CheckOutcome::from(
        "volterra-expansion",
        if worst < 1e-12 {
            Ok(format!(
                "max relative deviation {worst:.2e} over 2000 random filters"
            ))
        } else {
            Err(format!(
                "inner product deviates from the double sum by {worst:.2e}"
            ))
        },
    )
}

/// dLLMP collapses onto dLLAD at p = 1 and onto dLMLS at p = 2.
pub fn check_reduction_identity() -> CheckOutcome {
    let mut rng = stream_rng(0x5602, &[]);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p_mem = rng.gen_range(1..=4);
        let m = expanded_length(p_mem).expect("p >= 1");
        let w = VolterraKernel::new((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(), p_mem)
            .expect("length checked");
        let u = ExpandedRegressor::new((0..m).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let d = rng.gen_range(-3.0..3.0);
        let mu = rng.gen_range(1e-3..0.2);
        let delta = rng.gen_range(0.1..5.0);

        for (p_exp, twin) in [(1.0, AlgorithmFamily::Llad), (2.0, AlgorithmFamily::Lmls)] {
            let datum = [NeighborDatum {
                u: u.clone(),
                d,
                weight: 1.0,
                p: p_exp,
            }];
            let a = adapt_step(&bare_spec(AlgorithmFamily::Llmp, mu, delta), &w, &datum)
                .expect("finite inputs");
            let b = adapt_step(&bare_spec(twin, mu, delta), &w, &datum).expect("finite inputs");
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    CheckOutcome::from(
        "reduction-identity",
        if worst < 1e-12 {
            Ok(format!(
                "max element difference {worst:.2e} over 10000 tuples"
            ))
        } else {
            Err(format!("reductions differ by {worst:.2e}, above 1e-12"))
        },
    )
}

/// The update direction must be a positive multiple of the negated
/// finite-difference gradient of `F - (1/delta) ln(1 + delta F)`.
pub fn check_gradient_consistency() -> CheckOutcome {
    let mut rng = stream_rng(0x5603, &[]);
    let cases: [(AlgorithmFamily, f64); 4] = [
        (AlgorithmFamily::Lmls, 2.0),
        (AlgorithmFamily::Llmp, 1.3),
        (AlgorithmFamily::Llmp, 1.7),
        (AlgorithmFamily::Llmp, 2.0),
    ];
    let mut worst = 0.0f64;
    for (family, p_exp) in cases {
        for _ in 0..100 {
            let p_mem = 2;
            let m = expanded_length(p_mem).expect("p >= 1");
            let w = VolterraKernel::new((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(), p_mem)
                .expect("length checked");
            let u = ExpandedRegressor::new((0..m).map(|_| rng.gen_range(0.2..2.0)).collect());
            let delta = rng.gen_range(0.2..3.0);
            let mu = rng.gen_range(0.01..0.5);
            // put the error well away from zero where |e|^p is smooth
            let e_target = rng.gen_range(0.1..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let d = volterra_output(&w, &u).expect("matching M") + e_target;

            let datum = [NeighborDatum {
                u: u.clone(),
                d,
                weight: 1.0,
                p: p_exp,
            }];
            let phi = adapt_step(&bare_spec(family, mu, delta), &w, &datum).expect("finite inputs");
            let dir: Vec<f64> = phi
                .coeffs()
                .iter()
                .zip(w.coeffs())
                .map(|(a, b)| a - b)
                .collect();

            // central finite differences of the scalar cost in w
            let cost = |coeffs: &[f64]| -> f64 {
                let wk = VolterraKernel::new(coeffs.to_vec(), p_mem).expect("length checked");
                let e = d - volterra_output(&wk, &u).expect("matching M");
                let f = match family {
                    AlgorithmFamily::Lmls => e * e,
                    _ => e.abs().powf(p_exp),
                };
                log_cost(f, delta, LogCostForm::LnOnePlus).expect("F >= 0")
            };
            let mut neg_grad = vec![0.0; m];
            for j in 0..m {
                let h = 1e-6 * w.coeffs()[j].abs().max(1.0);
                let mut hi = w.coeffs().to_vec();
                let mut lo = w.coeffs().to_vec();
                hi[j] += h;
                lo[j] -= h;
                neg_grad[j] = -(cost(&hi) - cost(&lo)) / (2.0 * h);
            }

            let dot: f64 = dir.iter().zip(&neg_grad).map(|(a, b)| a * b).sum();
            let gg: f64 = neg_grad.iter().map(|g| g * g).sum();
            let scale = dot / gg;
            if scale <= 0.0 {
                return CheckOutcome::from(
                    "gradient-consistency",
                    Err(format!(
                        "update is not a positive multiple of -grad ({family}, p={p_exp})"
                    )),
                );
            }
            let dir_norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let resid: f64 = dir
                .iter()
                .zip(&neg_grad)
                .map(|(a, g)| (a - scale * g) * (a - scale * g))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(resid / dir_norm);
        }
    }
    CheckOutcome::from(
        "gradient-consistency",
        if worst < 1e-5 {
            Ok(format!(
                "max direction residual {worst:.2e} over 400 points"
            ))
        } else {
            Err(format!("direction residual {worst:.2e}, above 1e-5"))
        },
    )
}

/// Attraction region of the zero-attraction gradient, parameterized over
/// the gradient function so a corrupted bound is caught.
pub fn check_attraction_region_with(grad: impl Fn(f64, f64) -> f64) -> CheckOutcome {
    let mut rng = stream_rng(0x5604, &[]);
    for _ in 0..100_000 {
        let w: f64 = rng.gen_range(-0.5..0.5);
        let beta: f64 = rng.gen_range(5.0..20.0);
        let g = grad(w, beta);
        let inside = w != 0.0 && w.abs() <= 1.0 / beta;
        if inside != (g != 0.0) {
            // w exactly at the region edge has a genuinely zero gradient;
            // random draws do not hit it
            return CheckOutcome::from(
                "attraction-region",
                Err(format!(
                    "gradient {g} at w = {w}, beta = {beta} (inside = {inside})"
                )),
            );
        }
        if inside {
            // small rho must shrink |w|; below w/(2 beta) it cannot overshoot
            let rho = w.abs() / (2.0 * beta);
            let next = w - rho * g;
            if next.abs() >= w.abs() {
                return CheckOutcome::from(
                    "attraction-region",
                    Err(format!(
                        "update does not pull w = {w} toward zero (beta = {beta})"
                    )),
                );
            }
        }
    }
    CheckOutcome::from(
        "attraction-region",
        Ok("region and pull direction verified on 100000 pairs".to_string()),
    )
}

pub fn check_attraction_region() -> CheckOutcome {
    check_attraction_region_with(zero_attraction)
}

/// Combination matrices over random topologies: non-negative,
/// column-stochastic, sparsity pattern exactly adjacency-plus-self.
pub fn check_combination_matrices() -> CheckOutcome {
    let mut rng = stream_rng(0x5605, &[]);
    for trial in 0..100 {
        let n = rng.gen_range(2..=50);
        let d = rng.gen_range(1..n.min(8));
        let topo = match random_connected_graph(n, d, &mut rng) {
            Ok(t) => t,
            Err(e) => {
                return CheckOutcome::from(
                    "combination-matrix",
                    Err(format!("trial {trial}: graph construction failed: {e}")),
                )
            }
        };
        for (rule, a) in [
            ("uniform", uniform_weights(&topo)),
            ("metropolis", metropolis_weights(&topo)),
        ] {
            if let Err(e) = a.validate_for(&topo) {
                return CheckOutcome::from(
                    "combination-matrix",
                    Err(format!("trial {trial} ({rule}, n={n}, d={d}): {e}")),
                );
            }
            for k in 0..n {
                for l in 0..n {
                    if (a.get(l, k) > 0.0) != topo.neighbors(k).contains(&l) {
                        return CheckOutcome::from(
                            "combination-matrix",
                            Err(format!(
                                "trial {trial} ({rule}): pattern mismatch at ({l}, {k})"
                            )),
                        );
                    }
                }
            }
        }
    }
    CheckOutcome::from(
        "combination-matrix",
        Ok("both rules valid on 100 random topologies up to 50 nodes".to_string()),
    )
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        // evaluate both empirical CDFs just past the next jump point
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at the 1% level:
/// `c(0.01) * sqrt((n + m) / (n m))` with `c = sqrt(-ln(0.005) / 2)`.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let c = (-(0.005f64).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// The alpha-stable sampler against its Gaussian special case, plus tail
/// monotonicity in alpha.
pub fn check_sas_distribution() -> CheckOutcome {
    let mut rng = stream_rng(0x5606, &[]);
    for scale in [1.0, 0.5] {
        let spec = NoiseSpec { alpha: 2.0, scale };
        let mut sas: Vec<f64> = (0..100_000).map(|_| sample_sas(&spec, &mut rng)).collect();
        let mut gauss: Vec<f64> = (0..100_000)
            .map(|_| sample_gaussian(2.0 * scale, &mut rng))
            .collect();
        let d = two_sample_ks(&mut sas, &mut gauss);
        let crit = ks_critical_1pct(100_000, 100_000);
        if d > crit {
            return CheckOutcome::from(
                "sas-distribution",
                Err(format!(
                    "KS statistic {d:.5} above the 1% critical value {crit:.5} at scale {scale}"
                )),
            );
        }
    }

    let p999 = |alpha: f64, rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
        let spec = NoiseSpec { alpha, scale: 1.0 };
        let mut xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_sas(&spec, rng).abs())
            .collect();
        let k = (xs.len() as f64 * 0.999) as usize;
        xs.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
        xs[k]
    };
    let heavy = p999(1.2, &mut rng);
    let light = p999(1.8, &mut rng);
    if heavy <= light {
        return CheckOutcome::from(
            "sas-distribution",
            Err(format!(
                "tail ordering violated: p999(1.2) = {heavy} <= p999(1.8) = {light}"
            )),
        );
    }
    CheckOutcome::from(
        "sas-distribution",
        Ok(format!(
            "KS within 1% critical value; p999 tails {heavy:.1} > {light:.1}"
        )),
    )
}
