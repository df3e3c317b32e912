//! End-to-end experiment harness: data generation, synchronous diffusion
//! iterations, NMSD traces, Monte-Carlo averaging.
//!
//! A fully-resolved [`ExperimentSpec`] pins everything a run depends on,
//! including per-node noise exponents and per-node `p`, so the whole
//! pipeline is a pure function of the spec. The network and the plant are
//! drawn once from seed-derived streams and shared by all Monte-Carlo
//! runs; input and noise streams are keyed by `(master seed, run, node)`,
//! which makes parallel run execution bitwise-identical to sequential.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adapt::{adapt_step, combine, AlgorithmSpec, NeighborDatum, NodeState};
use crate::error::{Error, Result};
use crate::noise::{sample_gaussian, sample_sas, NoiseSpec};
use crate::seeds::{derive_seed, stream_rng, DATA_TAG, PLANT_TAG, P_ASSIGNMENT_TAG, TOPOLOGY_TAG};
use crate::topology::{
    identity_weights, metropolis_weights, random_connected_graph, uniform_weights,
    CombinationMatrix, NetworkTopology,
};
use crate::volterra::{
    expand, make_sparse_plant, volterra_output, ExpandedRegressor, InputWindow, VolterraKernel,
};

/// Rule used to build the combine-step weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinationRule {
    Uniform,
    Metropolis,
    /// No diffusion: every node keeps its own estimate.
    Identity,
}

/// Which measurements feed each node's adapt step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdaptationWeights {
    /// `c` is the identity: each node adapts on its own data only.
    SelfOnly,
    /// `c = a`: neighbors' regressors and measurements are shared.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub nodes: usize,
    pub target_degree: usize,
    pub combination_rule: CombinationRule,
    pub adaptation_weights: AdaptationWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    /// Volterra memory length `P`.
    pub memory_length: usize,
    /// Number of nonzero plant coefficients.
    pub active_count: usize,
}

/// Fully-resolved measurement-noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseModel {
    /// Zero-mean Gaussian; `variance = 0` disables noise.
    Gaussian { variance: f64 },
    /// Symmetric alpha-stable with one exponent per node.
    Sas { scale: f64, alphas: Vec<f64> },
}

/// Stream seeds derived from the master seed, recorded in manifests so a
/// run can be audited without re-deriving them. Serialized as hex strings
/// (TOML integers are signed 64-bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedSeeds {
    #[serde(with = "hex_u64")]
    pub topology: u64,
    #[serde(with = "hex_u64")]
    pub plant: u64,
    #[serde(with = "hex_u64")]
    pub p_assignment: u64,
}

impl DerivedSeeds {
    pub fn from_master(master: u64) -> Self {
        Self {
            topology: derive_seed(master, &[TOPOLOGY_TAG]),
            plant: derive_seed(master, &[PLANT_TAG]),
            p_assignment: derive_seed(master, &[P_ASSIGNMENT_TAG]),
        }
    }
}

mod hex_u64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:#018x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        let digits = text.strip_prefix("0x").unwrap_or(&text);
        u64::from_str_radix(digits, 16).map_err(serde::de::Error::custom)
    }
}

/// Everything one experiment depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub iterations: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub derived_seeds: DerivedSeeds,
    pub topology: TopologySpec,
    pub plant: PlantSpec,
    pub noise: NoiseModel,
    pub algorithm: AlgorithmSpec,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be >= 1"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be >= 1"));
        }
        if self.derived_seeds != DerivedSeeds::from_master(self.master_seed) {
            return Err(Error::invalid("derived seeds do not match the master seed"));
        }
        let n = self.topology.nodes;
        match &self.noise {
            NoiseModel::Gaussian { variance } => {
                if variance.is_nan() || *variance < 0.0 {
                    return Err(Error::invalid(format!(
                        "noise variance must be >= 0, got {variance}"
                    )));
                }
            }
            NoiseModel::Sas { scale, alphas } => {
                if alphas.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: alphas.len(),
                    });
                }
                for &alpha in alphas {
                    NoiseSpec::new(alpha, *scale)?;
                }
            }
        }
        self.algorithm.validate()?;
        if self.algorithm.family.uses_p() && self.algorithm.p_per_node.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.algorithm.p_per_node.len(),
            });
        }
        Ok(())
    }
}

/// Per-iteration network mean-square deviation, averaged over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct NmsdTrace {
    values: Vec<f64>,
}

impl NmsdTrace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::invalid("NMSD values must be non-negative"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `10 log10` of each value; zero maps to `-inf`.
    pub fn to_db(&self) -> Vec<f64> {
        self.values.iter().map(|&v| 10.0 * v.log10()).collect()
    }

    /// CSV with header `iteration,nmsd_linear,nmsd_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,nmsd_linear,nmsd_db\n");
        for (i, &v) in self.values.iter().enumerate() {
            let db = 10.0 * v.log10();
            out.push_str(&format!("{i},{v},{db}\n"));
        }
        out
    }
}

/// Element-wise mean of equally-long traces.
pub fn average_traces(traces: &[NmsdTrace]) -> Result<NmsdTrace> {
    let first = traces
        .first()
        .ok_or_else(|| Error::invalid("cannot average zero traces"))?;
    let len = first.len();
    let mut acc = vec![0.0; len];
    for t in traces {
        if t.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: t.len(),
            });
        }
        for (a, v) in acc.iter_mut().zip(t.values()) {
            *a += v;
        }
    }
    let n = traces.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    NmsdTrace::new(acc)
}

/// One node's measurement: the expanded regressor and the noisy output.
pub fn generate_measurement(
    w_o: &VolterraKernel,
    window: &InputWindow,
    noise_draw: f64,
) -> Result<(ExpandedRegressor, f64)> {
    let u = expand(window);
    let d = volterra_output(w_o, &u)? + noise_draw;
    Ok((u, d))
}

/// Network mean-square deviation `(1/N) sum_k ||w_k - w_o||^2`.
pub fn nmsd(states: &[NodeState], w_o: &VolterraKernel) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::invalid("nmsd needs at least one node"));
    }
    let mut total = 0.0;
    for s in states {
        total += s.w.squared_distance(w_o)?;
    }
    Ok(total / states.len() as f64)
}

/// The seed-derived objects shared by every run of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentInstance {
    pub topology: NetworkTopology,
    /// Combine-step weights.
    pub a: CombinationMatrix,
    /// Adapt-step weights.
    pub c: CombinationMatrix,
    pub plant: VolterraKernel,
    /// Per-node `(l, a[l][k])` over `N_k`.
    columns: Vec<Vec<(usize, f64)>>,
}

/// Build the topology, weight matrices and plant for a spec.
pub fn build_instance(spec: &ExperimentSpec) -> Result<ExperimentInstance> {
    spec.validate()?;
    let mut topo_rng = stream_rng(spec.master_seed, &[TOPOLOGY_TAG]);
    let topology = random_connected_graph(
        spec.topology.nodes,
        spec.topology.target_degree,
        &mut topo_rng,
    )?;
    let a = match spec.topology.combination_rule {
        CombinationRule::Uniform => uniform_weights(&topology),
        CombinationRule::Metropolis => metropolis_weights(&topology),
        CombinationRule::Identity => identity_weights(spec.topology.nodes),
    };
    let c = match spec.topology.adaptation_weights {
        AdaptationWeights::SelfOnly => identity_weights(spec.topology.nodes),
        AdaptationWeights::Shared => a.clone(),
    };
    let mut plant_rng = stream_rng(spec.master_seed, &[PLANT_TAG]);
    let plant = make_sparse_plant(
        spec.plant.memory_length,
        spec.plant.active_count,
        &mut plant_rng,
    )?;
    let columns = (0..spec.topology.nodes).map(|k| a.in_weights(k)).collect();
    Ok(ExperimentInstance {
        topology,
        a,
        c,
        plant,
        columns,
    })
}

/// Draw per-node exponents uniformly in [1, 2] from the exponent stream of
/// `master_seed`. The stream does not depend on the algorithm, so variants
/// compared under one seed see the same assignment.
pub fn draw_p_per_node(master_seed: u64, nodes: usize) -> Vec<f64> {
    let mut rng = stream_rng(master_seed, &[P_ASSIGNMENT_TAG]);
    (0..nodes).map(|_| rng.gen_range(1.0..=2.0)).collect()
}

fn noise_draw(model: &NoiseModel, node: usize, rng: &mut ChaCha8Rng) -> f64 {
    match model {
        NoiseModel::Gaussian { variance } => {
            if *variance > 0.0 {
                sample_gaussian(*variance, rng)
            } else {
                0.0
            }
        }
        NoiseModel::Sas { scale, alphas } => {
            let spec = NoiseSpec {
                alpha: alphas[node],
                scale: *scale,
            };
            sample_sas(&spec, rng)
        }
    }
}

fn with_context(err: Error, run: usize, iteration: usize, node: usize) -> Error {
    match err {
        Error::NumericFailure(msg) => Error::NumericFailure(format!(
            "run {run}, iteration {iteration}, node {node}: {msg}"
        )),
        other => other,
    }
}

fn run_once_with(
    inst: &ExperimentInstance,
    spec: &ExperimentSpec,
    run_index: usize,
) -> Result<NmsdTrace> {
    let n = spec.topology.nodes;
    let p_mem = spec.plant.memory_length;
    let uses_p = spec.algorithm.family.uses_p();

    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|k| stream_rng(spec.master_seed, &[DATA_TAG, run_index as u64, k as u64]))
        .collect();
    let mut states: Vec<NodeState> = (0..n)
        .map(|_| NodeState::zeros(p_mem))
        .collect::<Result<_>>()?;
    let mut trace = Vec::with_capacity(spec.iterations);
    let mut measurements: Vec<(ExpandedRegressor, f64)> = Vec::with_capacity(n);

    for i in 0..spec.iterations {
        // fresh i.i.d. inputs and noise at every node
        measurements.clear();
        for k in 0..n {
            let window = InputWindow::new(
                (0..p_mem)
                    .map(|_| rngs[k].sample::<f64, _>(StandardNormal))
                    .collect(),
            )?;
            let v = noise_draw(&spec.noise, k, &mut rngs[k]);
            measurements.push(generate_measurement(&inst.plant, &window, v)?);
        }

        let data_for = |k: usize| -> Vec<NeighborDatum> {
            inst.c
                .in_weights(k)
                .into_iter()
                .map(|(l, weight)| NeighborDatum {
                    u: measurements[l].0.clone(),
                    d: measurements[l].1,
                    weight,
                    p: if uses_p {
                        spec.algorithm.p_per_node[l]
                    } else {
                        1.0
                    },
                })
                .collect()
        };

        match spec.algorithm.mode {
            crate::adapt::DiffusionMode::Atc => {
                for k in 0..n {
                    states[k].phi = adapt_step(&spec.algorithm, &states[k].w, &data_for(k))
                        .map_err(|e| with_context(e, run_index, i, k))?;
                }
                let new_w: Vec<VolterraKernel> = (0..n)
                    .map(|k| {
                        let (ids, weights): (Vec<usize>, Vec<f64>) =
                            inst.columns[k].iter().copied().unzip();
                        let phis: Vec<&VolterraKernel> =
                            ids.iter().map(|&l| &states[l].phi).collect();
                        combine(&weights, &phis).map_err(|e| with_context(e, run_index, i, k))
                    })
                    .collect::<Result<_>>()?;
                for (s, w) in states.iter_mut().zip(new_w) {
                    s.w = w;
                }
            }
            crate::adapt::DiffusionMode::Cta => {
                let blends: Vec<VolterraKernel> = (0..n)
                    .map(|k| {
                        let (ids, weights): (Vec<usize>, Vec<f64>) =
                            inst.columns[k].iter().copied().unzip();
                        let ws: Vec<&VolterraKernel> = ids.iter().map(|&l| &states[l].w).collect();
                        combine(&weights, &ws).map_err(|e| with_context(e, run_index, i, k))
                    })
                    .collect::<Result<_>>()?;
                for k in 0..n {
                    states[k].phi = blends[k].clone();
                    states[k].w = adapt_step(&spec.algorithm, &blends[k], &data_for(k))
                        .map_err(|e| with_context(e, run_index, i, k))?;
                }
            }
        }

        trace.push(nmsd(&states, &inst.plant)?);
    }
    NmsdTrace::new(trace)
}

/// One Monte-Carlo run: zero-initialized estimates, `iterations` diffusion
/// steps, NMSD recorded after each.
pub fn run_once(spec: &ExperimentSpec, run_index: usize) -> Result<NmsdTrace> {
    let inst = build_instance(spec)?;
    run_once_with(&inst, spec, run_index)
}

/// Average of [`run_once`] traces over `spec.runs` independent runs. Runs
/// execute in parallel on the current rayon pool; per-run streams make the
/// result identical to sequential execution.
pub fn monte_carlo(spec: &ExperimentSpec) -> Result<NmsdTrace> {
    let inst = build_instance(spec)?;
    let results: Vec<Result<NmsdTrace>> = (0..spec.runs)
        .into_par_iter()
        .map(|r| run_once_with(&inst, spec, r))
        .collect();
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        traces.push(r?);
    }
    average_traces(&traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::{AlgorithmFamily, DiffusionMode};

    fn base_spec() -> ExperimentSpec {
        ExperimentSpec {
            iterations: 200,
            runs: 2,
            master_seed: 7,
            derived_seeds: DerivedSeeds::from_master(7),
            topology: TopologySpec {
                nodes: 8,
                target_degree: 3,
                combination_rule: CombinationRule::Uniform,
                adaptation_weights: AdaptationWeights::SelfOnly,
            },
            plant: PlantSpec {
                memory_length: 3,
                active_count: 3,
            },
            noise: NoiseModel::Gaussian { variance: 0.01 },
            algorithm: AlgorithmSpec {
                family: AlgorithmFamily::Lms,
                mu: 0.02,
                delta: 1.0,
                p_per_node: vec![],
                l0_enabled: false,
                rho: 0.0,
                beta: 10.0,
                mode: DiffusionMode::Atc,
            },
        }
    }

    #[test]
    fn generate_measurement_examples() {
        let mut rng = stream_rng(3, &[PLANT_TAG]);
        let w_o = make_sparse_plant(3, 4, &mut rng).unwrap();
        let window = InputWindow::new(vec![0.3, -0.8, 1.1]).unwrap();

        let (u, d) = generate_measurement(&w_o, &window, 0.0).unwrap();
        assert_eq!(d, volterra_output(&w_o, &u).unwrap());

        let zero = VolterraKernel::zeros(3).unwrap();
        let (_, d) = generate_measurement(&zero, &window, 0.25).unwrap();
        assert_eq!(d, 0.25);
    }

    #[test]
    fn nmsd_examples() {
        let w_o = VolterraKernel::new(vec![1.0, 2.0, 0.0, 0.0, 0.0], 2).unwrap();
        let same = NodeState {
            w: w_o.clone(),
            phi: w_o.clone(),
        };
        assert_eq!(nmsd(&[same.clone(), same.clone()], &w_o).unwrap(), 0.0);

        let mut off = w_o.clone();
        off.coeffs_mut()[0] += 1.0;
        let states = [
            NodeState {
                w: off,
                phi: w_o.clone(),
            },
            same,
        ];
        assert_eq!(nmsd(&states, &w_o).unwrap(), 0.5);

        // scaling every deviation by c multiplies NMSD by c^2
        let mut off2 = w_o.clone();
        off2.coeffs_mut()[0] += 3.0;
        let states2 = [
            NodeState {
                w: off2,
                phi: w_o.clone(),
            },
            NodeState {
                w: w_o.clone(),
                phi: w_o.clone(),
            },
        ];
        assert_eq!(nmsd(&states2, &w_o).unwrap(), 4.5);
    }

    #[test]
    fn zero_step_size_keeps_nmsd_constant() {
        let mut spec = base_spec();
        spec.algorithm.mu = 0.0;
        spec.iterations = 50;
        let inst = build_instance(&spec).unwrap();
        let expected = inst
            .plant
            .squared_distance(&VolterraKernel::zeros(3).unwrap())
            .unwrap();
        let trace = run_once(&spec, 0).unwrap();
        for &v in trace.values() {
            assert_eq!(v, expected, "estimates must not move with mu = 0");
        }
    }

    #[test]
    fn run_once_is_deterministic() {
        let spec = base_spec();
        let a = run_once(&spec, 1).unwrap();
        let b = run_once(&spec, 1).unwrap();
        assert_eq!(a, b);
        let c = run_once(&spec, 2).unwrap();
        assert_ne!(a, c, "different run indices must give different traces");
    }

    #[test]
    fn lms_converges_in_quiet_network() {
        let mut spec = base_spec();
        spec.noise = NoiseModel::Gaussian { variance: 0.0 };
        spec.iterations = 5000;
        let trace = run_once(&spec, 0).unwrap();
        let first = trace.values()[0];
        let last = *trace.values().last().unwrap();
        let drop_db = 10.0 * (first / last).log10();
        assert!(
            drop_db >= 30.0,
            "only {drop_db:.1} dB of NMSD drop without noise"
        );
    }

    #[test]
    fn monte_carlo_single_run_matches_run_once() {
        let mut spec = base_spec();
        spec.runs = 1;
        assert_eq!(monte_carlo(&spec).unwrap(), run_once(&spec, 0).unwrap());
    }

    #[test]
    fn monte_carlo_parallel_matches_sequential() {
        let mut spec = base_spec();
        spec.runs = 6;
        spec.iterations = 100;
        let parallel = monte_carlo(&spec).unwrap();
        let inst = build_instance(&spec).unwrap();
        let sequential: Vec<NmsdTrace> = (0..spec.runs)
            .map(|r| run_once_with(&inst, &spec, r).unwrap())
            .collect();
        let sequential = average_traces(&sequential).unwrap();
        assert_eq!(parallel, sequential);
    }

    #[test]
    fn average_traces_of_constants() {
        let a = NmsdTrace::new(vec![1.0, 1.0, 1.0]).unwrap();
        let b = NmsdTrace::new(vec![3.0, 3.0, 3.0]).unwrap();
        let avg = average_traces(&[a, b]).unwrap();
        assert_eq!(avg.values(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn l0_path_with_zero_rho_equals_plain_path() {
        let mut plain = base_spec();
        plain.algorithm.family = AlgorithmFamily::Lmls;
        plain.iterations = 300;
        let mut with_l0 = plain.clone();
        with_l0.algorithm.l0_enabled = true;
        with_l0.algorithm.rho = 0.0;
        assert_eq!(run_once(&plain, 0).unwrap(), run_once(&with_l0, 0).unwrap());
    }

    #[test]
    fn atc_and_cta_coincide_without_diffusion() {
        let mut spec = base_spec();
        spec.topology.combination_rule = CombinationRule::Identity;
        spec.iterations = 200;
        let atc = run_once(&spec, 0).unwrap();
        spec.algorithm.mode = DiffusionMode::Cta;
        let cta = run_once(&spec, 0).unwrap();
        for (a, b) in atc.values().iter().zip(cta.values()) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn csv_format_and_db_sentinel() {
        let t = NmsdTrace::new(vec![1.0, 0.0]).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "iteration,nmsd_linear,nmsd_db");
        assert_eq!(lines.next().unwrap(), "0,1,0");
        assert_eq!(lines.next().unwrap(), "1,0,-inf");
        assert!(NmsdTrace::new(vec![-0.5]).is_err());
    }

    #[test]
    fn spec_validation_rejects_bad_fields() {
        let mut s = base_spec();
        s.iterations = 0;
        assert!(s.validate().is_err());

        let mut s = base_spec();
        s.derived_seeds = DerivedSeeds::from_master(8);
        assert!(s.validate().is_err());

        let mut s = base_spec();
        s.noise = NoiseModel::Sas {
            scale: 0.1,
            alphas: vec![1.5; 3],
        };
        assert!(s.validate().is_err(), "alpha list length must match nodes");

        let mut s = base_spec();
        s.algorithm.family = AlgorithmFamily::Llmp;
        s.algorithm.p_per_node = vec![];
        assert!(s.validate().is_err(), "p-family needs per-node exponents");
        s.algorithm.p_per_node = draw_p_per_node(s.master_seed, 8);
        s.validate().unwrap();
    }
}
