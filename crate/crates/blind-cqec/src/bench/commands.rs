//! One function per subcommand. Each returns its tables and threshold checks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::bench::config::BenchmarkConfig;
use crate::bench::output::{write_table, Cell, Table, VERSION};
use crate::bench::{mean, std_dev, task_rng, task_seed, Runner};
use crate::circuitsim::sanity_suite;
use crate::core_linalg::{
    haar_random_pure, haar_random_vector, trace_norm, werner_state, DensityMatrix, EnergySpectrum,
};
use crate::estimators::{
    average, estimate_channel_inversion, estimate_coherence_max, estimate_hybrid, perturbed_copy, EstimatorKind,
    EstimatorSpec,
};
use crate::fitting::{crossover_fixed_point, fit_power_law};
use crate::noise::{apply_combined, NoiseParams};
use crate::qem::{linear_inversion, pec_recover, tomo_bound_curves, vd_recover, zne_combined};
use crate::recovery::{empirical_lipschitz, recover, NoisyContext, RecordLabels, RecoveryRecord};
use crate::targets::{maximally_coherent, target_suite};
use crate::vqe::{load_h2_hamiltonian, run_vqe, Scenario, VqeConfig, H2_REFERENCE_ENERGY};
use crate::Error;

pub const COMMANDS: [&str; 10] = [
    "sweep-noise",
    "sweep-dim",
    "sweep-copies",
    "sensitivity",
    "mixed-hybrid",
    "qem-compare",
    "correlation",
    "vqe",
    "circuit-sanity",
    "crossover",
];

// Stream tags keep the random streams of different commands apart.
const STREAM_HAAR: u64 = 0x4841_4152;
const STREAM_NOISE: u64 = 0x4e4f_4953;
const STREAM_COPIES: u64 = 0x434f_5059;
const STREAM_WERNER: u64 = 0x5745_524e;
const STREAM_TOMO: u64 = 0x544f_4d4f;
const STREAM_VQE: u64 = 0x5651_4500;
const STREAM_CIRCUIT: u64 = 0x4349_5243;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(criterion: u32, name: &str, pass: bool, detail: String) -> Self {
        Self {
            criterion,
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub command: String,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl CommandOutput {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tables: vec![],
            checks: vec![],
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_command(name: &str, cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    match name {
        "sweep-noise" => sweep_noise(cfg, runner),
        "sweep-dim" => sweep_dim(cfg, runner),
        "sweep-copies" => sweep_copies(cfg, runner),
        "sensitivity" => sensitivity(cfg, runner),
        "mixed-hybrid" => mixed_hybrid(cfg, runner),
        "qem-compare" => qem_compare(cfg, runner),
        "correlation" => correlation(cfg, runner),
        "vqe" => vqe(cfg),
        "circuit-sanity" => circuit_sanity(cfg),
        "crossover" => crossover(cfg, runner),
        "all" => all(cfg, runner),
        _ => Err(Error::Config(format!("unknown subcommand `{name}`"))),
    }
}

/// Writes every table plus `manifest.json`; returns the paths written.
pub fn write_output(out: &CommandOutput, cfg: &BenchmarkConfig, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let echo = serde_json::to_value(cfg.echo()).map_err(|e| Error::Io(e.to_string()))?;
    let mut paths = vec![];
    for t in &out.tables {
        paths.push(write_table(dir, t, &echo, &out.command)?);
    }
    let manifest = json!({
        "version": VERSION,
        "command": out.command,
        "master_seed": cfg.master_seed,
        "tables": out.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        "checks": out.checks,
        "config": echo,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    paths.push(path);
    Ok(paths)
}

/// The `s`-th Haar-random pure state of dimension `dim`. Shared by every command
/// that samples Haar targets, so the same seed gives the same states everywhere.
pub fn haar_target(master: u64, dim: usize, s: usize) -> DensityMatrix {
    let mut rng = task_rng(task_seed(master ^ STREAM_HAAR, dim as u64), s as u64);
    haar_random_pure(dim, &mut rng)
}

/// Parameters with only one channel switched on.
pub fn single_channel(noise: &str, x: f64) -> NoiseParams {
    match noise {
        "dephasing" => NoiseParams::dephasing(x),
        "depolarizing" => NoiseParams::depolarizing(x),
        "amplitude_damping" => NoiseParams::amplitude_damping(x),
        _ => unreachable!("unknown channel {noise}"),
    }
}

const RECORD_COLUMNS: [&str; 16] = [
    "dim",
    "noise",
    "param",
    "sample",
    "strategy",
    "seed",
    "f_noisy",
    "f_est",
    "f_rec",
    "f_oracle",
    "trace_dist",
    "coh_ratio",
    "est_error",
    "mode_ok",
    "rank_warning",
    "bound_ok",
];

/// A benchmark record plus the sweep coordinates it was produced at.
#[derive(Clone, Debug)]
struct Row {
    extra: Vec<Cell>,
    param: f64,
    sample: usize,
    rec: RecoveryRecord,
}

fn record_table(name: &str, extra: &[&str], rows: &[Row]) -> Table {
    let header: Vec<&str> = extra.iter().copied().chain(RECORD_COLUMNS).collect();
    let mut t = Table::new(name, &header);
    for row in rows {
        let r = &row.rec;
        let mut cells = row.extra.clone();
        cells.extend([
            Cell::from(r.dim),
            Cell::from(r.noise.as_str()),
            Cell::from(row.param),
            Cell::from(row.sample),
            Cell::from(r.strategy.as_str()),
            Cell::from(r.seed),
            Cell::from(r.f_noisy),
            Cell::from(r.f_est),
            Cell::from(r.f_rec),
            Cell::from(r.f_oracle),
            Cell::from(r.trace_dist),
            Cell::from(r.coherence_ratio),
            Cell::from(r.est_error),
            Cell::from(r.mode_ok),
            Cell::from(r.rank_warning),
            Cell::from(r.bound_holds()),
        ]);
        t.push(cells);
    }
    t
}

fn bound_check(rows: &[Row]) -> Check {
    let bad = rows.iter().filter(|r| !r.rec.bound_holds()).count();
    Check::new(
        5,
        "fidelity bound at every record",
        bad == 0,
        format!("{bad} violations in {} records", rows.len()),
    )
}

/// Runs each blind strategy on one noisy state and scores it.
fn blind_records(
    ctx: &NoisyContext<'_>,
    assumed: &NoiseParams,
    kinds: &[EstimatorKind],
    copies: Option<&[DensityMatrix]>,
    weight: f64,
    noise: &str,
    seed: u64,
) -> Result<Vec<RecoveryRecord>, Error> {
    let single = std::slice::from_ref(ctx.noisy);
    kinds
        .iter()
        .map(|&k| {
            let plan = EstimatorSpec::new(k).with_noise(*assumed).with_weight(weight);
            let input = if k == EstimatorKind::MultiCopy {
                copies.unwrap_or(single)
            } else {
                single
            };
            let est = plan.estimate(input, ctx.spectrum)?;
            ctx.evaluate(
                &est.state,
                RecordLabels {
                    strategy: k.label(),
                    noise,
                    seed,
                },
            )
        })
        .collect()
}

/// Mean and standard deviation of `f_rec` per key, in key order.
fn summarize<K: Ord + Clone>(items: impl Iterator<Item = (K, f64)>) -> BTreeMap<K, (f64, f64, usize)> {
    let mut groups: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, v) in items {
        groups.entry(k).or_default().push(v);
    }
    groups
        .into_iter()
        .map(|(k, v)| (k, (mean(&v), std_dev(&v), v.len())))
        .collect()
}

fn within(x: f64, center: f64, tol: f64) -> bool {
    (x - center).abs() <= tol
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

const SWEEP_KINDS: [EstimatorKind; 6] = [
    EstimatorKind::Naive,
    EstimatorKind::CoherenceMax,
    EstimatorKind::ChannelInversion,
    EstimatorKind::Iterative,
    EstimatorKind::MultiCopy,
    EstimatorKind::Hybrid,
];

/// Every strategy, the oracle and the uncorrected baseline on one maximally coherent state.
fn noise_point(cfg: &BenchmarkConfig, dim: usize, noise: &str, param: f64, seed: u64) -> Result<Vec<Row>, Error> {
    let target = maximally_coherent(dim);
    let sp = EnergySpectrum::equally_spaced(dim);
    let params = single_channel(noise, param);
    let noisy = apply_combined(&target, &params, &sp)?;
    let ctx = NoisyContext::new(&target, &noisy, &sp)?;
    let mut rng = rand_chacha_from(seed);
    let copies = (0..cfg.sweep_noise.copies)
        .map(|_| perturbed_copy(&noisy, cfg.sweep_copies.eps0, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let mut recs = blind_records(
        &ctx,
        &params,
        &SWEEP_KINDS,
        Some(&copies),
        cfg.sweep_noise.hybrid_weight,
        noise,
        seed,
    )?;
    recs.push(ctx.evaluate(
        &target,
        RecordLabels {
            strategy: "oracle",
            noise,
            seed,
        },
    )?);
    recs.push(ctx.baseline(RecordLabels {
        strategy: "baseline",
        noise,
        seed,
    })?);
    Ok(recs
        .into_iter()
        .map(|rec| Row {
            extra: vec![],
            param,
            sample: 0,
            rec,
        })
        .collect())
}

fn rand_chacha_from(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

pub fn sweep_noise(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let sc = &cfg.sweep_noise;
    let mut tasks = vec![];
    for &dim in &sc.dims {
        for (noise, grid) in [
            ("dephasing", &sc.dephasing),
            ("amplitude_damping", &sc.amplitude_damping),
            ("depolarizing", &sc.depolarizing),
        ] {
            for &x in grid {
                tasks.push((dim, noise, x));
            }
        }
    }
    let master = cfg.master_seed ^ STREAM_NOISE;
    let indexed: Vec<_> = tasks.into_iter().enumerate().collect();
    let rows: Vec<Row> = runner
        .map(indexed, |(i, (dim, noise, x))| {
            noise_point(cfg, dim, noise, x, task_seed(master, i as u64))
        })?
        .into_iter()
        .flatten()
        .collect();
    let spot = noise_point(cfg, 2, "amplitude_damping", 0.5, task_seed(master, u64::MAX))?;

    let mut out = CommandOutput::new("sweep-noise");
    let c1: Vec<&Row> = rows
        .iter()
        .filter(|r| r.rec.dim == 2 && r.rec.noise == "dephasing")
        .filter(|r| ["coherence_max", "channel_inversion", "iterative"].contains(&r.rec.strategy.as_str()))
        .collect();
    let worst = c1.iter().map(|r| (1.0 - r.rec.f_rec).abs()).fold(0.0, f64::max);
    out.checks.push(Check::new(
        1,
        "dephased qubit recovered exactly",
        !c1.is_empty() && worst <= 1e-9,
        format!("max |1 - F_rec| = {worst:e} over {} records", c1.len()),
    ));
    let f_of = |s: &str| {
        spot.iter()
            .find(|r| r.rec.strategy == s)
            .map(|r| r.rec.f_rec)
            .unwrap_or(f64::NAN)
    };
    let (com, inv) = (f_of("coherence_max"), f_of("channel_inversion"));
    out.checks.push(Check::new(
        2,
        "amplitude-damped qubit at gamma_ad = 0.5",
        within(com, 0.926, 0.005) && inv >= 0.999,
        format!(
            "coherence_max F_rec = {com:.6} (want 0.926 +- 0.005), channel_inversion F_rec = {inv:.6} (want >= 0.999)"
        ),
    ));
    let naive: Vec<&Row> = rows.iter().filter(|r| r.rec.strategy == "naive").collect();
    let gap = naive
        .iter()
        .map(|r| (r.rec.f_rec - r.rec.f_noisy).abs())
        .fold(0.0, f64::max);
    out.checks.push(Check::new(
        3,
        "naive estimate is a fixed point",
        !naive.is_empty() && gap <= 1e-12,
        format!("max |F_rec - F_noisy| = {gap:e} over {} grid points", naive.len()),
    ));
    out.checks.push(bound_check(&rows));
    out.tables.push(record_table("sweep_noise", &[], &rows));
    out.tables.push(record_table("sweep_noise_spot", &[], &spot));
    Ok(out)
}

const DIM_KINDS: [EstimatorKind; 5] = [
    EstimatorKind::Naive,
    EstimatorKind::CoherenceMax,
    EstimatorKind::ChannelInversion,
    EstimatorKind::Iterative,
    EstimatorKind::Hybrid,
];

/// Blind strategies on Haar targets under the combined channel, one task per (dim, sample).
fn haar_rows(
    cfg: &BenchmarkConfig,
    runner: &Runner,
    dims: &[usize],
    states: usize,
    kinds: &[EstimatorKind],
    weight: f64,
    with_oracle: bool,
) -> Result<Vec<Row>, Error> {
    let tasks: Vec<(usize, usize)> = dims.iter().flat_map(|&d| (0..states).map(move |s| (d, s))).collect();
    let noise = cfg.noise;
    let label = noise.label();
    let rows = runner.map(tasks, |(dim, s)| {
        let target = haar_target(cfg.master_seed, dim, s);
        let sp = EnergySpectrum::equally_spaced(dim);
        let noisy = apply_combined(&target, &noise, &sp)?;
        let ctx = NoisyContext::new(&target, &noisy, &sp)?;
        let seed = task_seed(task_seed(cfg.master_seed ^ STREAM_HAAR, dim as u64), s as u64);
        let mut recs = blind_records(&ctx, &noise, kinds, None, weight, &label, seed)?;
        if with_oracle {
            recs.push(ctx.evaluate(
                &target,
                RecordLabels {
                    strategy: "oracle",
                    noise: &label,
                    seed,
                },
            )?);
        }
        Ok(recs
            .into_iter()
            .map(|rec| Row {
                extra: vec![],
                param: 0.0,
                sample: s,
                rec,
            })
            .collect::<Vec<_>>())
    })?;
    Ok(rows.into_iter().flatten().collect())
}

/// Smallest dimension from which channel inversion stays at least as good as
/// coherence maximization for every larger dimension.
pub fn empirical_crossover(dims: &[usize], com: &[f64], inv: &[f64]) -> Option<usize> {
    let mut found = None;
    for i in (0..dims.len()).rev() {
        if inv[i] >= com[i] {
            found = Some(dims[i]);
        } else {
            break;
        }
    }
    found
}

fn mean_of(summary: &BTreeMap<(usize, String), (f64, f64, usize)>, dim: usize, strategy: &str) -> Option<(f64, f64)> {
    summary.get(&(dim, strategy.to_string())).map(|&(m, s, _)| (m, s))
}

pub fn sweep_dim(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let sc = &cfg.sweep_dim;
    let rows = haar_rows(cfg, runner, &sc.dims, sc.states, &DIM_KINDS, sc.hybrid_weight, true)?;
    let summary = summarize(rows.iter().map(|r| ((r.rec.dim, r.rec.strategy.clone()), r.rec.f_rec)));
    let mut st = Table::new(
        "sweep_dim_summary",
        &["dim", "strategy", "mean_f_rec", "std_f_rec", "n"],
    );
    for ((dim, strategy), (m, s, n)) in &summary {
        st.push(vec![
            Cell::from(*dim),
            Cell::from(strategy.as_str()),
            Cell::from(*m),
            Cell::from(*s),
            Cell::from(*n),
        ]);
    }

    let mut out = CommandOutput::new("sweep-dim");
    let mut dims = sc.dims.clone();
    dims.sort_unstable();
    let inv = |d| mean_of(&summary, d, "channel_inversion");
    let com = |d| mean_of(&summary, d, "coherence_max");
    for (dim, want_inv, tol_inv, want_com, tol_com) in [(2, 0.955, 0.03, 0.979, 0.03), (256, 0.648, 0.05, 0.494, 0.05)]
    {
        if let (Some((mi, _)), Some((mc, _))) = (inv(dim), com(dim)) {
            out.checks.push(Check::new(
                6,
                &format!("Haar means at d = {dim}"),
                within(mi, want_inv, tol_inv) && within(mc, want_com, tol_com),
                format!(
                    "channel_inversion {mi:.4} (want {want_inv} +- {tol_inv}), coherence_max {mc:.4} (want {want_com} +- {tol_com})"
                ),
            ));
        }
    }
    let com_means: Vec<f64> = dims.iter().map(|&d| com(d).map_or(f64::NAN, |x| x.0)).collect();
    let inv_means: Vec<f64> = dims.iter().map(|&d| inv(d).map_or(f64::NAN, |x| x.0)).collect();
    let cross = empirical_crossover(&dims, &com_means, &inv_means);
    out.checks.push(Check::new(
        6,
        "coherence_max / channel_inversion crossover",
        cross.is_some_and(|d| (16..=64).contains(&d)),
        format!("crossover at d = {cross:?} (want within [16, 64])"),
    ));
    let sig: Vec<(usize, f64)> = dims
        .iter()
        .filter(|&&d| d >= 4)
        .filter_map(|&d| inv(d).map(|x| (d, x.1)))
        .collect();
    let monotone = sig.len() >= 2 && sig.windows(2).all(|w| w[1].1 < w[0].1);
    out.checks.push(Check::new(
        6,
        "channel_inversion spread shrinks with d",
        monotone,
        sig.iter()
            .map(|(d, s)| format!("d={d}: {s:.4}"))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    out.checks.push(bound_check(&rows));
    out.tables.push(record_table("sweep_dim", &[], &rows));
    out.tables.push(st);
    Ok(out)
}

pub const COPY_CURVES: [(&str, EstimatorKind, &str); 4] = [
    (
        "channel_inversion/amplitude_damping",
        EstimatorKind::ChannelInversion,
        "amplitude_damping",
    ),
    (
        "channel_inversion/depolarizing",
        EstimatorKind::ChannelInversion,
        "depolarizing",
    ),
    ("coherence_max/dephasing", EstimatorKind::CoherenceMax, "dephasing"),
    (
        "coherence_max/amplitude_damping",
        EstimatorKind::CoherenceMax,
        "amplitude_damping",
    ),
];

pub fn sweep_copies(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let sc = &cfg.sweep_copies;
    let param_of = |noise: &str| match noise {
        "dephasing" => sc.dephasing,
        "depolarizing" => sc.depolarizing,
        _ => sc.amplitude_damping,
    };
    let tasks: Vec<(usize, usize)> = (0..COPY_CURVES.len())
        .flat_map(|c| sc.copies.iter().map(move |&n| (c, n)))
        .collect();
    let indexed: Vec<_> = tasks.into_iter().enumerate().collect();
    let master = cfg.master_seed ^ STREAM_COPIES;
    let target = maximally_coherent(sc.dim);
    let sp = EnergySpectrum::equally_spaced(sc.dim);
    let results = runner.map(indexed, |(i, (c, n))| {
        let (_, kind, noise) = COPY_CURVES[c];
        let params = single_channel(noise, param_of(noise));
        let noisy = apply_combined(&target, &params, &sp)?;
        let plan = EstimatorSpec::new(kind).with_noise(params);
        let mut rng = task_rng(master, i as u64);
        let mut fs = Vec::with_capacity(sc.trials);
        for _ in 0..sc.trials {
            let copies = (0..n)
                .map(|_| perturbed_copy(&noisy, sc.eps0, &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            let avg = average(&copies)?;
            let est = plan.estimate(&copies, &sp)?;
            fs.push(crate::core_linalg::fidelity(&recover(&avg, &est.state, &sp)?, &target)?);
        }
        Ok((c, n, mean(&fs), std_dev(&fs)))
    })?;

    let mut t = Table::new(
        "sweep_copies",
        &[
            "curve",
            "strategy",
            "noise",
            "param",
            "copies",
            "mean_f_rec",
            "std_f_rec",
            "trials",
        ],
    );
    for &(c, n, m, s) in &results {
        let (curve, kind, noise) = COPY_CURVES[c];
        t.push(vec![
            Cell::from(curve),
            Cell::from(kind.label()),
            Cell::from(noise),
            Cell::from(param_of(noise)),
            Cell::from(n),
            Cell::from(m),
            Cell::from(s),
            Cell::from(sc.trials),
        ]);
    }
    let mut ft = Table::new(
        "sweep_copies_fits",
        &[
            "curve",
            "a",
            "a_stderr",
            "alpha",
            "alpha_stderr",
            "alpha_ci_low",
            "alpha_ci_high",
            "r_squared",
            "converged",
            "identifiable",
        ],
    );
    let mut fits = vec![];
    for (c, (curve, _, _)) in COPY_CURVES.iter().enumerate() {
        let pts: Vec<(f64, f64)> = results.iter().filter(|r| r.0 == c).map(|r| (r.1 as f64, r.2)).collect();
        let ns: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let fsv: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let fit = fit_power_law(&ns, &fsv)?;
        let se = fit.alpha_stderr();
        ft.push(vec![
            Cell::from(*curve),
            Cell::from(fit.a),
            Cell::from(fit.a_stderr()),
            Cell::from(fit.alpha),
            Cell::from(se),
            Cell::from(fit.alpha - 1.96 * se),
            Cell::from(fit.alpha + 1.96 * se),
            Cell::from(fit.r_squared),
            Cell::from(fit.converged),
            Cell::from(fit.identifiable),
        ]);
        fits.push(fit);
    }
    let mut out = CommandOutput::new("sweep-copies");
    let a: Vec<f64> = fits.iter().map(|f| f.alpha).collect();
    out.checks.push(Check::new(
        8,
        "copy-scaling exponent ordering",
        a[0] > a[1] && a[1] > a[2] && a[2] > a[3],
        COPY_CURVES
            .iter()
            .zip(&a)
            .map(|(c, x)| format!("{}: {x:.4}", c.0))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    out.checks.push(Check::new(
        8,
        "coherence_max under amplitude damping is flat",
        a[3] < 0.2 && fits[3].r_squared < 0.6,
        format!(
            "alpha = {:.4} (want < 0.2), R^2 = {:.4} (want < 0.6)",
            a[3], fits[3].r_squared
        ),
    ));
    out.tables.push(t);
    out.tables.push(ft);
    Ok(out)
}

pub const SENSITIVITY_MODES: [&str; 4] = ["all", "dephasing", "depolarizing", "amplitude_damping"];

fn misspecified(base: &NoiseParams, mode: &str, delta: f64) -> NoiseParams {
    let f = 1.0 + delta;
    match mode {
        "all" => base.perturbed(f, f, f),
        "dephasing" => base.perturbed(f, 1.0, 1.0),
        "depolarizing" => base.perturbed(1.0, f, 1.0),
        _ => base.perturbed(1.0, 1.0, f),
    }
}

pub fn sensitivity(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let sc = &cfg.sensitivity;
    let tasks: Vec<(usize, usize)> = sc
        .dims
        .iter()
        .flat_map(|&d| (0..sc.states).map(move |s| (d, s)))
        .collect();
    let noise = cfg.noise;
    let label = noise.label();
    let rows: Vec<Row> = runner
        .map(tasks, |(dim, s)| {
            let target = haar_target(cfg.master_seed, dim, s);
            let sp = EnergySpectrum::equally_spaced(dim);
            let noisy = apply_combined(&target, &noise, &sp)?;
            let ctx = NoisyContext::new(&target, &noisy, &sp)?;
            let mut rows = vec![];
            for mode in SENSITIVITY_MODES {
                for &delta in &sc.deltas {
                    let assumed = misspecified(&noise, mode, delta);
                    let est = estimate_channel_inversion(&noisy, &assumed, &sp)?;
                    let rec = ctx.evaluate(
                        &est.state,
                        RecordLabels {
                            strategy: "channel_inversion",
                            noise: &label,
                            seed: 0,
                        },
                    )?;
                    rows.push(Row {
                        extra: vec![Cell::from(mode)],
                        param: delta,
                        sample: s,
                        rec,
                    });
                }
            }
            Ok(rows)
        })?
        .into_iter()
        .flatten()
        .collect();
    let mode_of = |r: &Row| match &r.extra[0] {
        Cell::Str(s) => s.clone(),
        _ => unreachable!(),
    };
    let delta_idx = |x: f64| sc.deltas.iter().position(|&d| close(d, x)).unwrap_or(usize::MAX);
    let summary = summarize(rows.iter().map(|r| {
        let m = SENSITIVITY_MODES.iter().position(|&x| x == mode_of(r)).unwrap_or(0);
        ((r.rec.dim, m, delta_idx(r.param)), r.rec.f_rec)
    }));
    let mut t = Table::new(
        "sensitivity",
        &["dim", "parameter", "delta", "mean_f_rec", "std_f_rec", "n"],
    );
    for (&(dim, m, di), &(mu, s, n)) in &summary {
        t.push(vec![
            Cell::from(dim),
            Cell::from(SENSITIVITY_MODES[m]),
            Cell::from(sc.deltas[di]),
            Cell::from(mu),
            Cell::from(s),
            Cell::from(n),
        ]);
    }
    let f = |dim: usize, delta: f64| summary.get(&(dim, 0, delta_idx(delta))).map(|x| x.0);
    let mut out = CommandOutput::new("sensitivity");
    if let (Some(lo), Some(hi)) = (f(4, -0.3), f(4, 0.3)) {
        out.checks.push(Check::new(
            9,
            "d = 4 tolerates 30% misspecification",
            lo >= 0.75 && hi >= 0.75,
            format!("F(-30%) = {lo:.4}, F(+30%) = {hi:.4} (want both >= 0.75)"),
        ));
    }
    if let (Some(lo), Some(hi)) = (f(64, -0.3), f(64, 0.3)) {
        out.checks.push(Check::new(
            9,
            "d = 64 underestimation hurts more",
            lo < hi,
            format!("F(-30%) = {lo:.4}, F(+30%) = {hi:.4}"),
        ));
    }
    out.checks.push(bound_check(&rows));
    out.tables
        .push(record_table("sensitivity_records", &["parameter"], &rows));
    out.tables.push(t);
    Ok(out)
}

pub fn mixed_hybrid(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let mc = &cfg.mixed_hybrid;
    let noise = cfg.noise;
    let label = noise.label();
    let dim = mc.werner_dim;
    let sp = EnergySpectrum::equally_spaced(dim);
    let tasks: Vec<(usize, usize)> = (0..mc.purities.len())
        .flat_map(|v| (0..mc.werner_states).map(move |s| (v, s)))
        .collect();
    let indexed: Vec<_> = tasks.into_iter().enumerate().collect();
    let master = cfg.master_seed ^ STREAM_WERNER;
    let werner: Vec<Row> = runner
        .map(indexed, |(i, (vi, s))| {
            let v = mc.purities[vi];
            let seed = task_seed(master, i as u64);
            let psi = haar_random_vector(dim, &mut rand_chacha_from(seed));
            let target = werner_state(v, &psi)?;
            let noisy = apply_combined(&target, &noise, &sp)?;
            let ctx = NoisyContext::new(&target, &noisy, &sp)?;
            let kinds = [
                EstimatorKind::Naive,
                EstimatorKind::CoherenceMax,
                EstimatorKind::ChannelInversion,
            ];
            let mut recs = blind_records(&ctx, &noise, &kinds, None, 0.5, &label, seed)?;
            recs.push(ctx.evaluate(
                &target,
                RecordLabels {
                    strategy: "oracle",
                    noise: &label,
                    seed,
                },
            )?);
            Ok(recs
                .into_iter()
                .map(|rec| Row {
                    extra: vec![],
                    param: v,
                    sample: s,
                    rec,
                })
                .collect::<Vec<_>>())
        })?
        .into_iter()
        .flatten()
        .collect();
    let v_idx = |x: f64| mc.purities.iter().position(|&p| close(p, x)).unwrap_or(usize::MAX);
    let wsum = summarize(
        werner
            .iter()
            .map(|r| ((v_idx(r.param), r.rec.strategy.clone()), r.rec.f_rec)),
    );
    let mut wt = Table::new(
        "werner_summary",
        &["purity", "strategy", "mean_f_rec", "std_f_rec", "n"],
    );
    for ((vi, strategy), (m, s, n)) in &wsum {
        wt.push(vec![
            Cell::from(mc.purities[*vi]),
            Cell::from(strategy.as_str()),
            Cell::from(*m),
            Cell::from(*s),
            Cell::from(*n),
        ]);
    }

    let tasks: Vec<(usize, usize)> = mc
        .hybrid_dims
        .iter()
        .flat_map(|&d| (0..mc.hybrid_states).map(move |s| (d, s)))
        .collect();
    let hybrid: Vec<Row> = runner
        .map(tasks, |(dim, s)| {
            let target = haar_target(cfg.master_seed, dim, s);
            let sp = EnergySpectrum::equally_spaced(dim);
            let noisy = apply_combined(&target, &noise, &sp)?;
            let ctx = NoisyContext::new(&target, &noisy, &sp)?;
            mc.weights
                .iter()
                .map(|&w| {
                    let est = estimate_hybrid(&noisy, &noise, w, &sp)?;
                    let rec = ctx.evaluate(
                        &est.state,
                        RecordLabels {
                            strategy: "hybrid",
                            noise: &label,
                            seed: 0,
                        },
                    )?;
                    Ok(Row {
                        extra: vec![],
                        param: w,
                        sample: s,
                        rec,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()
        })?
        .into_iter()
        .flatten()
        .collect();
    let w_idx = |x: f64| mc.weights.iter().position(|&w| close(w, x)).unwrap_or(usize::MAX);
    let hsum = summarize(hybrid.iter().map(|r| ((r.rec.dim, w_idx(r.param)), r.rec.f_rec)));
    let mut ht = Table::new("hybrid_summary", &["dim", "weight", "mean_f_rec", "std_f_rec", "n"]);
    for (&(dim, wi), &(m, s, n)) in &hsum {
        ht.push(vec![
            Cell::from(dim),
            Cell::from(mc.weights[wi]),
            Cell::from(m),
            Cell::from(s),
            Cell::from(n),
        ]);
    }
    let mut ot = Table::new(
        "hybrid_optimum",
        &["dim", "w_star", "f_best", "f_w0", "f_w1", "gain_over_endpoints"],
    );
    let mut optima = BTreeMap::new();
    let (i0, i1) = (w_idx(0.0), w_idx(1.0));
    for &dim in &mc.hybrid_dims {
        let curve: Vec<f64> = (0..mc.weights.len())
            .map(|wi| hsum.get(&(dim, wi)).map_or(f64::NAN, |x| x.0))
            .collect();
        let mut best = 0;
        for (i, &f) in curve.iter().enumerate() {
            if f > curve[best] {
                best = i;
            }
        }
        let f0 = curve.get(i0).copied().unwrap_or(f64::NAN);
        let f1 = curve.get(i1).copied().unwrap_or(f64::NAN);
        let gain = curve[best] - f0.max(f1);
        ot.push(vec![
            Cell::from(dim),
            Cell::from(mc.weights[best]),
            Cell::from(curve[best]),
            Cell::from(f0),
            Cell::from(f1),
            Cell::from(gain),
        ]);
        optima.insert(dim, (mc.weights[best], gain));
    }

    let mut out = CommandOutput::new("mixed-hybrid");
    let wmean = |v: f64, s: &str| wsum.get(&(v_idx(v), s.to_string())).map(|x| x.0);
    let inv_min = mc
        .purities
        .iter()
        .filter_map(|&v| wmean(v, "channel_inversion"))
        .fold(f64::INFINITY, f64::min);
    out.checks.push(Check::new(
        10,
        "channel inversion on Werner targets",
        inv_min >= 0.90,
        format!("min over purities of mean F_rec = {inv_min:.4} (want >= 0.90)"),
    ));
    let vlo = mc.purities.iter().copied().fold(f64::INFINITY, f64::min);
    let vhi = mc.purities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let (Some(lo), Some(hi)) = (wmean(vlo, "coherence_max"), wmean(vhi, "coherence_max")) {
        out.checks.push(Check::new(
            10,
            "coherence max degrades with mixedness",
            lo <= hi - 0.1,
            format!("CoM(v={vlo}) = {lo:.4}, CoM(v={vhi}) = {hi:.4}"),
        ));
    }
    let ws = |d: usize| optima.get(&d).map(|x: &(f64, f64)| x.0);
    out.checks.push(Check::new(
        11,
        "hybrid endpoint regimes",
        ws(4) == Some(0.0) && ws(64) == Some(1.0),
        format!("w*(4) = {:?}, w*(64) = {:?}", ws(4), ws(64)),
    ));
    let interior: Vec<String> = [16, 32]
        .iter()
        .filter_map(|d| optima.get(d).map(|(w, g)| format!("d={d}: w* = {w}, gain = {g:.4}")))
        .collect();
    let ok = [16, 32]
        .iter()
        .any(|d| optima.get(d).is_some_and(|&(w, g)| w > 0.0 && w < 1.0 && g >= 0.005));
    out.checks
        .push(Check::new(11, "interior hybrid optimum", ok, interior.join(", ")));
    let all_rows: Vec<Row> = werner.iter().chain(&hybrid).cloned().collect();
    out.checks.push(bound_check(&all_rows));
    out.tables.push(record_table("werner", &[], &werner));
    out.tables.push(wt);
    out.tables.push(record_table("hybrid", &[], &hybrid));
    out.tables.push(ht);
    out.tables.push(ot);
    Ok(out)
}

pub const QEM_STRATEGIES: [&str; 7] = [
    "none",
    "coherence_max",
    "channel_inversion",
    "pec",
    "zne",
    "vd",
    "linear_inversion",
];

pub fn qem_compare(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let qc = &cfg.qem;
    let noise = cfg.noise;
    let label = noise.label();
    let tasks: Vec<(usize, usize)> = qc
        .dims
        .iter()
        .flat_map(|&d| (0..qc.states).map(move |s| (d, s)))
        .collect();
    let master = cfg.master_seed ^ STREAM_TOMO;
    let results = runner.map(tasks, |(dim, s)| {
        let target = haar_target(cfg.master_seed, dim, s);
        let sp = EnergySpectrum::equally_spaced(dim);
        let noisy = apply_combined(&target, &noise, &sp)?;
        let ctx = NoisyContext::new(&target, &noisy, &sp)?;
        let seed = task_seed(task_seed(master, dim as u64), s as u64);
        let lab = |strategy| RecordLabels {
            strategy,
            noise: &label,
            seed,
        };
        let com = estimate_coherence_max(&noisy)?;
        let inv = estimate_channel_inversion(&noisy, &noise, &sp)?;
        let pec = pec_recover(&noisy, &noise, &sp)?;
        let zne = zne_combined(&target, &noise, &sp, &qc.scales)?;
        let vd = vd_recover(&noisy, qc.vd_order)?;
        let mut rng = rand_chacha_from(seed);
        let copies = (0..qc.tomo_copies)
            .map(|_| perturbed_copy(&noisy, qc.eps0, &mut rng))
            .collect::<Result<Vec<_>, _>>()?;
        let li = linear_inversion(&copies)?;
        let recs = vec![
            ctx.baseline(lab("none"))?,
            ctx.evaluate(&com.state, lab("coherence_max"))?,
            ctx.evaluate(&inv.state, lab("channel_inversion"))?,
            ctx.evaluate(&pec.state, lab("pec"))?,
            ctx.score_output(&zne, lab("zne"))?,
            ctx.score_output(&vd, lab("vd"))?,
            ctx.score_output(&li, lab("linear_inversion"))?,
        ];
        let diff = trace_norm(&(pec.state.matrix() - inv.state.matrix()));
        Ok((
            recs.into_iter()
                .map(|rec| Row {
                    extra: vec![],
                    param: 0.0,
                    sample: s,
                    rec,
                })
                .collect::<Vec<_>>(),
            (dim, s, diff),
        ))
    })?;
    let rows: Vec<Row> = results.iter().flat_map(|r| r.0.clone()).collect();
    let mut pt = Table::new("qem_pec_equivalence", &["dim", "sample", "trace_norm_diff"]);
    for (_, (dim, s, diff)) in &results {
        pt.push(vec![Cell::from(*dim), Cell::from(*s), Cell::from(*diff)]);
    }
    let strat_idx = |s: &str| QEM_STRATEGIES.iter().position(|&x| x == s).unwrap_or(usize::MAX);
    let summary = summarize(
        rows.iter()
            .map(|r| ((r.rec.dim, strat_idx(&r.rec.strategy)), r.rec.f_rec)),
    );
    let mut st = Table::new("qem_summary", &["dim", "strategy", "mean_f_rec", "std_f_rec", "n"]);
    for (&(dim, si), &(m, s, n)) in &summary {
        st.push(vec![
            Cell::from(dim),
            Cell::from(QEM_STRATEGIES[si]),
            Cell::from(m),
            Cell::from(s),
            Cell::from(n),
        ]);
    }
    let f = |dim: usize, s: &str| summary.get(&(dim, strat_idx(s))).map(|x| x.0);

    let dmin = qc.dims.iter().copied().min().unwrap_or(2);
    let anchor = f(dmin, "linear_inversion").map_or(1.0, |x| 1.0 - x);
    let ns = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
    let mut bt = Table::new("qem_tomography_bounds", &["copies", "tomographic", "statistical"]);
    for b in tomo_bound_curves(&ns, anchor) {
        bt.push(vec![
            Cell::from(b.n),
            Cell::from(b.tomographic),
            Cell::from(b.statistical),
        ]);
    }

    let mut out = CommandOutput::new("qem-compare");
    let worst = results.iter().map(|r| r.1 .2).fold(0.0, f64::max);
    out.checks.push(Check::new(
        12,
        "PEC equals channel inversion",
        worst <= 1e-9,
        format!("max trace-norm difference {worst:e}"),
    ));
    if let (Some(z), Some(v)) = (f(64, "zne"), f(64, "vd")) {
        out.checks.push(Check::new(
            12,
            "ZNE and VD collapse at d = 64",
            z < 0.10 && v < 0.10,
            format!("ZNE {z:.4}, VD {v:.4} (want both < 0.10)"),
        ));
    }
    if let (Some(z), Some(v)) = (f(4, "zne"), f(4, "vd")) {
        out.checks.push(Check::new(
            12,
            "ZNE and VD at d = 4",
            within(z, 0.51, 0.05) && within(v, 0.67, 0.06),
            format!("ZNE {z:.4} (want 0.51 +- 0.05), VD {v:.4} (want 0.67 +- 0.06)"),
        ));
    }
    let gaps: Vec<(usize, f64)> = qc
        .dims
        .iter()
        .filter_map(|&d| Some((d, f(d, "linear_inversion")? - f(d, "none")?)))
        .collect();
    out.checks.push(Check::new(
        12,
        "linear inversion matches no correction",
        gaps.iter().all(|g| g.1.abs() <= 0.02),
        gaps.iter()
            .map(|(d, g)| format!("d={d}: {g:+.4}"))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    out.checks.push(bound_check(&rows));
    out.tables.push(record_table("qem_compare", &[], &rows));
    out.tables.push(st);
    out.tables.push(pt);
    out.tables.push(bt);
    Ok(out)
}

const CORRELATION_KINDS: [EstimatorKind; 5] = [
    EstimatorKind::Naive,
    EstimatorKind::CoherenceMax,
    EstimatorKind::ChannelInversion,
    EstimatorKind::Iterative,
    EstimatorKind::Hybrid,
];

pub fn correlation(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let mut targets: Vec<(String, DensityMatrix)> = vec![
        ("maximally_coherent_d2".into(), maximally_coherent(2)),
        ("maximally_coherent_d3".into(), maximally_coherent(3)),
    ];
    targets.extend(target_suite().into_iter().map(|t| (t.label.to_string(), t.state)));
    let n = cfg.noise;
    let noises = [
        ("dephasing", NoiseParams::dephasing(n.gamma_dephasing)),
        ("depolarizing", NoiseParams::depolarizing(n.p_depolarizing)),
        ("amplitude_damping", NoiseParams::amplitude_damping(n.gamma_ad)),
        ("combined", n),
    ];
    let tasks: Vec<(usize, usize)> = (0..targets.len())
        .flat_map(|t| (0..noises.len()).map(move |k| (t, k)))
        .collect();
    let rows: Vec<Row> = runner
        .map(tasks, |(ti, ki)| {
            let (name, target) = &targets[ti];
            let (noise, params) = noises[ki];
            let sp = EnergySpectrum::equally_spaced(target.dim());
            let noisy = apply_combined(target, &params, &sp)?;
            let ctx = NoisyContext::new(target, &noisy, &sp)?;
            let recs = blind_records(&ctx, &params, &CORRELATION_KINDS, None, 0.5, noise, 0)?;
            Ok(recs
                .into_iter()
                .map(|rec| Row {
                    extra: vec![Cell::from(name.as_str())],
                    param: 0.0,
                    sample: 0,
                    rec,
                })
                .collect::<Vec<_>>())
        })?
        .into_iter()
        .flatten()
        .collect();

    let mut ft = Table::new(
        "correlation_fit",
        &[
            "group",
            "n",
            "slope",
            "intercept",
            "pearson_r",
            "r_squared",
            "degenerate",
        ],
    );
    let mut groups: Vec<(String, Vec<RecoveryRecord>)> =
        vec![("pooled".into(), rows.iter().map(|r| r.rec.clone()).collect())];
    let mut dims: Vec<usize> = rows.iter().map(|r| r.rec.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    for d in &dims {
        groups.push((
            format!("d={d}"),
            rows.iter().filter(|r| r.rec.dim == *d).map(|r| r.rec.clone()).collect(),
        ));
    }
    let mut fits = vec![];
    for (g, recs) in &groups {
        let fit = empirical_lipschitz(recs)?;
        ft.push(vec![
            Cell::from(g.as_str()),
            Cell::from(recs.len()),
            Cell::from(fit.fit.slope),
            Cell::from(fit.fit.intercept),
            Cell::from(fit.fit.pearson_r),
            Cell::from(fit.fit.r_squared),
            Cell::from(fit.degenerate),
        ]);
        fits.push((g.clone(), fit));
    }
    let mut out = CommandOutput::new("correlation");
    let pooled = &fits[0].1;
    out.checks.push(Check::new(
        7,
        "pooled estimation/recovery correlation",
        !pooled.degenerate && pooled.fit.pearson_r >= 0.95 && (0.90..=1.05).contains(&pooled.fit.slope),
        format!(
            "r = {:.4} (want >= 0.95), slope = {:.4} (want in [0.90, 1.05])",
            pooled.fit.pearson_r, pooled.fit.slope
        ),
    ));
    let per_dim: Vec<String> = fits[1..]
        .iter()
        .map(|(g, f)| format!("{g}: r = {:.4}", f.fit.pearson_r))
        .collect();
    out.checks.push(Check::new(
        7,
        "per-dimension correlation",
        fits[1..].iter().all(|(_, f)| !f.degenerate && f.fit.pearson_r >= 0.95),
        per_dim.join(", "),
    ));
    out.checks.push(bound_check(&rows));
    out.tables.push(record_table("correlation", &["target"], &rows));
    out.tables.push(ft);
    Ok(out)
}

pub fn vqe(cfg: &BenchmarkConfig) -> Result<CommandOutput, Error> {
    let h = load_h2_hamiltonian()?;
    let vc = VqeConfig {
        noise: cfg.vqe.noise,
        budget: cfg.vqe.budget,
        restarts: cfg.vqe.restarts,
        seed: task_seed(cfg.master_seed ^ STREAM_VQE, 0),
        ..VqeConfig::default()
    };
    let mut trace = Table::new("vqe_trace", &["scenario", "iteration", "best_energy"]);
    let mut summary = Table::new(
        "vqe_summary",
        &[
            "scenario",
            "energy",
            "error_vs_exact",
            "error_vs_reference",
            "theta0",
            "theta1",
            "theta2",
            "theta3",
            "converged",
        ],
    );
    let exact = h.ground_energy();
    let mut err = BTreeMap::new();
    for sc in Scenario::ALL {
        let run = run_vqe(&h, sc, &vc)?;
        for (i, e) in run.trace.iter().enumerate() {
            trace.push(vec![Cell::from(sc.label()), Cell::from(i), Cell::from(*e)]);
        }
        let e_ref = (run.energy - H2_REFERENCE_ENERGY).abs();
        let mut row = vec![
            Cell::from(sc.label()),
            Cell::from(run.energy),
            Cell::from(run.energy - exact),
            Cell::from(e_ref),
        ];
        row.extend(run.theta.iter().map(|&t| Cell::from(t)));
        row.push(Cell::from(run.converged));
        summary.push(row);
        err.insert(sc.label(), e_ref);
    }
    let mut out = CommandOutput::new("vqe");
    let (e0, en, ecm, ein) = (
        err["noiseless"],
        err["noisy"],
        err["blind_coherence_max"],
        err["blind_channel_inversion"],
    );
    out.checks.push(Check::new(
        13,
        "noiseless VQE reaches the reference",
        e0 <= 0.005,
        format!("error {e0:.5} Ha"),
    ));
    out.checks.push(Check::new(
        13,
        "blind channel inversion halves the error",
        ein <= 0.5 * en,
        format!("blind_channel_inversion {ein:.4} Ha vs uncorrected {en:.4} Ha"),
    ));
    out.checks.push(Check::new(
        13,
        "blind coherence max stays near uncorrected",
        (ecm - en).abs() <= 0.05,
        format!("blind_coherence_max {ecm:.4} Ha vs uncorrected {en:.4} Ha"),
    ));
    out.tables.push(trace);
    out.tables.push(summary);
    Ok(out)
}

/// Winning strategy per circuit row in the reference circuit table.
pub const CIRCUIT_WINNERS: [(&str, &str); 5] = [
    ("ghz_2q", "channel_inversion"),
    ("ghz_3q", "channel_inversion"),
    ("w_like_2q", "coherence_max"),
    ("random_2q", "channel_inversion"),
    ("random_3q", "channel_inversion"),
];

pub fn circuit_sanity(cfg: &BenchmarkConfig) -> Result<CommandOutput, Error> {
    let rows = sanity_suite(
        task_seed(cfg.master_seed ^ STREAM_CIRCUIT, 0),
        cfg.circuit.p_gate,
        cfg.circuit.scope,
    )?;
    let mut t = Table::new(
        "circuit_sanity",
        &[
            "test",
            "dim",
            "f_noisy",
            "f_coherence_max",
            "f_channel_inversion",
            "p_eff",
            "winner",
            "expected_winner",
        ],
    );
    let mut out = CommandOutput::new("circuit-sanity");
    let mut improve = vec![];
    let mut order = vec![];
    for r in &rows {
        let winner = if r.f_channel_inversion >= r.f_coherence_max {
            "channel_inversion"
        } else {
            "coherence_max"
        };
        let expected = CIRCUIT_WINNERS.iter().find(|w| w.0 == r.test).map_or("", |w| w.1);
        t.push(vec![
            Cell::from(r.test.as_str()),
            Cell::from(r.dim),
            Cell::from(r.f_noisy),
            Cell::from(r.f_coherence_max),
            Cell::from(r.f_channel_inversion),
            Cell::from(r.p_eff),
            Cell::from(winner),
            Cell::from(expected),
        ]);
        improve.push((r.test.clone(), r.f_coherence_max.max(r.f_channel_inversion) - r.f_noisy));
        order.push((r.test.clone(), winner == expected));
    }
    out.checks.push(Check::new(
        14,
        "every circuit improves by 0.03",
        improve.iter().all(|x| x.1 >= 0.03),
        improve
            .iter()
            .map(|(n, g)| format!("{n}: {g:+.4}"))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    out.checks.push(Check::new(
        14,
        "winning strategy per circuit",
        order.iter().all(|x| x.1),
        order
            .iter()
            .map(|(n, ok)| format!("{n}: {}", if *ok { "match" } else { "mismatch" }))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    let p = rows.iter().find(|r| r.test == "ghz_2q").map_or(f64::NAN, |r| r.p_eff);
    out.checks.push(Check::new(
        14,
        "GHZ-2q effective depolarizing rate",
        within(p, 0.16, 0.05),
        format!("p_eff = {p:.4}"),
    ));
    out.tables.push(t);
    Ok(out)
}

pub fn crossover(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let cc = &cfg.crossover;
    let a = crossover_fixed_point(cfg.noise.gamma_dephasing, cfg.noise.gamma_ad);
    let mut at = Table::new(
        "crossover_analytic",
        &[
            "gamma",
            "gamma_ad",
            "root_d",
            "physical",
            "identically_satisfied",
            "diagnostic",
        ],
    );
    if a.roots.is_empty() {
        at.push(vec![
            Cell::from(a.gamma),
            Cell::from(a.gamma_ad),
            Cell::from(f64::NAN),
            Cell::from(false),
            Cell::from(a.identically_satisfied),
            Cell::from(a.diagnostic.as_str()),
        ]);
    }
    for r in &a.roots {
        at.push(vec![
            Cell::from(a.gamma),
            Cell::from(a.gamma_ad),
            Cell::from(r.d),
            Cell::from(r.physical),
            Cell::from(a.identically_satisfied),
            Cell::from(a.diagnostic.as_str()),
        ]);
    }
    let kinds = [EstimatorKind::CoherenceMax, EstimatorKind::ChannelInversion];
    let rows = haar_rows(cfg, runner, &cc.dims, cc.states, &kinds, 0.5, false)?;
    let summary = summarize(rows.iter().map(|r| ((r.rec.dim, r.rec.strategy.clone()), r.rec.f_rec)));
    let mut dims = cc.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let mut et = Table::new(
        "crossover_empirical",
        &["dim", "f_coherence_max", "f_channel_inversion", "difference"],
    );
    let com: Vec<f64> = dims
        .iter()
        .map(|&d| mean_of(&summary, d, "coherence_max").map_or(f64::NAN, |x| x.0))
        .collect();
    let inv: Vec<f64> = dims
        .iter()
        .map(|&d| mean_of(&summary, d, "channel_inversion").map_or(f64::NAN, |x| x.0))
        .collect();
    for i in 0..dims.len() {
        et.push(vec![
            Cell::from(dims[i]),
            Cell::from(com[i]),
            Cell::from(inv[i]),
            Cell::from(inv[i] - com[i]),
        ]);
    }
    let cross = empirical_crossover(&dims, &com, &inv);
    let mut out = CommandOutput::new("crossover");
    out.checks.push(Check::new(
        6,
        "empirical crossover dimension",
        cross.is_some_and(|d| (16..=64).contains(&d)),
        format!(
            "crossover at d = {cross:?}; analytic: {}",
            if a.diagnostic.is_empty() {
                "physical root"
            } else {
                &a.diagnostic
            }
        ),
    ));
    out.tables.push(at);
    out.tables.push(et);
    Ok(out)
}

/// Every subcommand in sequence; tables and checks are concatenated.
pub fn all(cfg: &BenchmarkConfig, runner: &Runner) -> Result<CommandOutput, Error> {
    let mut out = CommandOutput::new("all");
    for name in COMMANDS {
        let o = run_command(name, cfg, runner)?;
        out.tables.extend(o.tables);
        out.checks.extend(o.checks);
    }
    Ok(out)
}
