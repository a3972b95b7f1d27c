//! Flat `key = value` configuration with `[section]` blocks.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::circuitsim::NoiseScope;
use crate::noise::NoiseParams;
use crate::Error;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepNoiseConfig {
    pub dims: Vec<usize>,
    pub dephasing: Vec<f64>,
    pub amplitude_damping: Vec<f64>,
    pub depolarizing: Vec<f64>,
    pub copies: usize,
    pub hybrid_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepDimConfig {
    pub dims: Vec<usize>,
    pub states: usize,
    pub hybrid_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCopiesConfig {
    pub copies: Vec<usize>,
    pub trials: usize,
    pub eps0: f64,
    pub dim: usize,
    pub dephasing: f64,
    pub depolarizing: f64,
    pub amplitude_damping: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityConfig {
    pub dims: Vec<usize>,
    pub deltas: Vec<f64>,
    pub states: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedHybridConfig {
    pub werner_dim: usize,
    pub purities: Vec<f64>,
    pub werner_states: usize,
    pub hybrid_dims: Vec<usize>,
    pub weights: Vec<f64>,
    pub hybrid_states: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QemConfig {
    pub dims: Vec<usize>,
    pub states: usize,
    pub scales: Vec<f64>,
    pub vd_order: u32,
    pub tomo_copies: usize,
    pub eps0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VqeBenchConfig {
    pub noise: NoiseParams,
    pub budget: usize,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitConfig {
    pub p_gate: f64,
    pub scope: NoiseScope,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverConfig {
    pub dims: Vec<usize>,
    pub states: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkConfig {
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub noise: NoiseParams,
    pub sweep_noise: SweepNoiseConfig,
    pub sweep_dim: SweepDimConfig,
    pub sweep_copies: SweepCopiesConfig,
    pub sensitivity: SensitivityConfig,
    pub mixed_hybrid: MixedHybridConfig,
    pub qem: QemConfig,
    pub vqe: VqeBenchConfig,
    pub circuit: CircuitConfig,
    pub crossover: CrossoverConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            out_dir: PathBuf::from("results"),
            workers: 1,
            noise: NoiseParams::default(),
            sweep_noise: SweepNoiseConfig {
                dims: vec![2, 3],
                dephasing: linspace(0.1, 5.0, 20),
                amplitude_damping: linspace(0.05, 0.95, 20),
                depolarizing: linspace(0.05, 0.95, 19),
                copies: 5,
                hybrid_weight: 0.5,
            },
            sweep_dim: SweepDimConfig {
                dims: vec![2, 4, 8, 16, 32, 64, 128, 256],
                states: 20,
                hybrid_weight: 0.5,
            },
            sweep_copies: SweepCopiesConfig {
                copies: vec![1, 2, 5, 10, 20, 50, 100, 200],
                trials: 200,
                eps0: 0.05,
                dim: 2,
                dephasing: 2.0,
                depolarizing: 0.3,
                amplitude_damping: 0.3,
            },
            sensitivity: SensitivityConfig {
                dims: vec![4, 8, 16, 64],
                deltas: vec![-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3],
                states: 20,
            },
            mixed_hybrid: MixedHybridConfig {
                werner_dim: 8,
                purities: linspace(0.3, 1.0, 8),
                werner_states: 10,
                hybrid_dims: vec![4, 8, 16, 32, 64],
                weights: linspace(0.0, 1.0, 21),
                hybrid_states: 20,
            },
            qem: QemConfig {
                dims: vec![4, 8, 16, 64],
                states: 20,
                scales: vec![1.0, 2.0, 3.0],
                vd_order: 2,
                tomo_copies: 10,
                eps0: 0.05,
            },
            vqe: VqeBenchConfig {
                noise: NoiseParams {
                    gamma_dephasing: 0.5,
                    p_depolarizing: 0.1,
                    gamma_ad: 0.05,
                },
                budget: 200,
                restarts: 3,
            },
            circuit: CircuitConfig {
                p_gate: 0.1,
                scope: NoiseScope::GateSupport,
            },
            crossover: CrossoverConfig {
                dims: vec![2, 4, 8, 16, 32, 64],
                states: 20,
            },
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, Error> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, Error> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{v}` is not a nonnegative integer")))
}

/// Comma-separated list, or `linspace(a, b, n)`.
fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>, Error> {
    let v = v.trim();
    if let Some(inner) = v.strip_prefix("linspace(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("{key}: linspace needs 3 arguments")));
        }
        return Ok(linspace(
            parse_f64(key, parts[0])?,
            parse_f64(key, parts[1])?,
            parse_usize(key, parts[2])?,
        ));
    }
    let out = v.split(',').map(|s| parse_f64(key, s)).collect::<Result<Vec<_>, _>>()?;
    nonempty(key, out)
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>, Error> {
    let out = v
        .split(',')
        .map(|s| parse_usize(key, s))
        .collect::<Result<Vec<_>, _>>()?;
    nonempty(key, out)
}

fn nonempty<T>(key: &str, v: Vec<T>) -> Result<Vec<T>, Error> {
    if v.is_empty() {
        return Err(Error::Config(format!("{key}: empty list")));
    }
    Ok(v)
}

impl BenchmarkConfig {
    /// Parses config text on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self, Error> {
        let mut cfg = Self::default();
        let mut section = String::from("global");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(&format!("{section}.{}", k.trim()), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one `section.key` value.
    pub fn set(&mut self, path: &str, v: &str) -> Result<(), Error> {
        let k = path;
        match path {
            "global.master_seed" | "global.seed" => {
                self.master_seed = v.parse().map_err(|_| Error::Config(format!("{k}: bad seed")))?
            }
            "global.out_dir" | "global.out" => self.out_dir = PathBuf::from(v),
            "global.workers" => self.workers = parse_usize(k, v)?,
            "noise.gamma_dephasing" => self.noise.gamma_dephasing = parse_f64(k, v)?,
            "noise.p_depolarizing" => self.noise.p_depolarizing = parse_f64(k, v)?,
            "noise.gamma_ad" => self.noise.gamma_ad = parse_f64(k, v)?,
            "sweep-noise.dims" => self.sweep_noise.dims = parse_usize_list(k, v)?,
            "sweep-noise.dephasing" => self.sweep_noise.dephasing = parse_f64_list(k, v)?,
            "sweep-noise.amplitude_damping" => self.sweep_noise.amplitude_damping = parse_f64_list(k, v)?,
            "sweep-noise.depolarizing" => self.sweep_noise.depolarizing = parse_f64_list(k, v)?,
            "sweep-noise.copies" => self.sweep_noise.copies = parse_usize(k, v)?,
            "sweep-noise.hybrid_weight" => self.sweep_noise.hybrid_weight = parse_f64(k, v)?,
            "sweep-dim.dims" => self.sweep_dim.dims = parse_usize_list(k, v)?,
            "sweep-dim.states" => self.sweep_dim.states = parse_usize(k, v)?,
            "sweep-dim.hybrid_weight" => self.sweep_dim.hybrid_weight = parse_f64(k, v)?,
            "sweep-copies.copies" => self.sweep_copies.copies = parse_usize_list(k, v)?,
            "sweep-copies.trials" => self.sweep_copies.trials = parse_usize(k, v)?,
            "sweep-copies.eps0" => self.sweep_copies.eps0 = parse_f64(k, v)?,
            "sweep-copies.dim" => self.sweep_copies.dim = parse_usize(k, v)?,
            "sweep-copies.dephasing" => self.sweep_copies.dephasing = parse_f64(k, v)?,
            "sweep-copies.depolarizing" => self.sweep_copies.depolarizing = parse_f64(k, v)?,
            "sweep-copies.amplitude_damping" => self.sweep_copies.amplitude_damping = parse_f64(k, v)?,
            "sensitivity.dims" => self.sensitivity.dims = parse_usize_list(k, v)?,
            "sensitivity.deltas" => self.sensitivity.deltas = parse_f64_list(k, v)?,
            "sensitivity.states" => self.sensitivity.states = parse_usize(k, v)?,
            "mixed-hybrid.werner_dim" => self.mixed_hybrid.werner_dim = parse_usize(k, v)?,
            "mixed-hybrid.purities" => self.mixed_hybrid.purities = parse_f64_list(k, v)?,
            "mixed-hybrid.werner_states" => self.mixed_hybrid.werner_states = parse_usize(k, v)?,
            "mixed-hybrid.hybrid_dims" => self.mixed_hybrid.hybrid_dims = parse_usize_list(k, v)?,
            "mixed-hybrid.weights" => self.mixed_hybrid.weights = parse_f64_list(k, v)?,
            "mixed-hybrid.hybrid_states" => self.mixed_hybrid.hybrid_states = parse_usize(k, v)?,
            "qem-compare.dims" => self.qem.dims = parse_usize_list(k, v)?,
            "qem-compare.states" => self.qem.states = parse_usize(k, v)?,
            "qem-compare.scales" => self.qem.scales = parse_f64_list(k, v)?,
            "qem-compare.vd_order" => self.qem.vd_order = parse_usize(k, v)? as u32,
            "qem-compare.tomo_copies" => self.qem.tomo_copies = parse_usize(k, v)?,
            "qem-compare.eps0" => self.qem.eps0 = parse_f64(k, v)?,
            "vqe.gamma_dephasing" => self.vqe.noise.gamma_dephasing = parse_f64(k, v)?,
            "vqe.p_depolarizing" => self.vqe.noise.p_depolarizing = parse_f64(k, v)?,
            "vqe.gamma_ad" => self.vqe.noise.gamma_ad = parse_f64(k, v)?,
            "vqe.budget" => self.vqe.budget = parse_usize(k, v)?,
            "vqe.restarts" => self.vqe.restarts = parse_usize(k, v)?,
            "circuit-sanity.p_gate" => self.circuit.p_gate = parse_f64(k, v)?,
            "circuit-sanity.scope" => {
                self.circuit.scope = match v {
                    "gate" | "local" => NoiseScope::GateSupport,
                    "global" | "register" => NoiseScope::FullRegister,
                    _ => return Err(Error::Config(format!("{k}: scope must be `local` or `global`"))),
                }
            }
            "crossover.dims" => self.crossover.dims = parse_usize_list(k, v)?,
            "crossover.states" => self.crossover.states = parse_usize(k, v)?,
            _ => return Err(Error::Config(format!("unknown key `{path}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.noise.validate()?;
        self.vqe.noise.validate()?;
        let dims = [
            &self.sweep_noise.dims,
            &self.sweep_dim.dims,
            &self.sensitivity.dims,
            &self.mixed_hybrid.hybrid_dims,
            &self.qem.dims,
            &self.crossover.dims,
        ];
        if dims
            .iter()
            .any(|d| d.is_empty() || d.iter().any(|&x| !(2..=1024).contains(&x)))
        {
            return Err(Error::Config(
                "dimensions must lie in 2..=1024 and lists must be non-empty".into(),
            ));
        }
        let counts = [
            self.sweep_dim.states,
            self.sweep_copies.trials,
            self.sensitivity.states,
            self.mixed_hybrid.werner_states,
            self.mixed_hybrid.hybrid_states,
            self.qem.states,
            self.crossover.states,
            self.sweep_noise.copies,
            self.vqe.budget,
        ];
        if counts.contains(&0) {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        if self.sweep_copies.copies.len() < 3 || self.sweep_copies.copies.contains(&0) {
            return Err(Error::Config("copy grid needs at least 3 positive entries".into()));
        }
        if self.qem.scales.len() < 2 {
            return Err(Error::Config("extrapolation needs at least 2 scales".into()));
        }
        let unit = |x: f64| (0.0..1.0).contains(&x);
        if !self.sweep_noise.amplitude_damping.iter().all(|&x| unit(x))
            || !self.sweep_noise.depolarizing.iter().all(|&x| unit(x))
            || !self.sweep_noise.dephasing.iter().all(|&x| x >= 0.0)
        {
            return Err(Error::Config("sweep-noise grids outside channel ranges".into()));
        }
        if !self.mixed_hybrid.purities.iter().all(|&v| (0.0..=1.0).contains(&v))
            || !self.mixed_hybrid.weights.iter().all(|&w| (0.0..=1.0).contains(&w))
        {
            return Err(Error::Config("purities and weights must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.circuit.p_gate) {
            return Err(Error::Config("circuit gate error outside [0, 1]".into()));
        }
        Ok(())
    }

    /// Flat echo of the configuration for sidecars.
    pub fn echo(&self) -> BTreeMap<String, serde_json::Value> {
        let v = serde_json::to_value(self).expect("config serializes");
        let mut out = BTreeMap::new();
        if let serde_json::Value::Object(m) = v {
            for (k, val) in m {
                out.insert(k, val);
            }
        }
        out
    }
}
