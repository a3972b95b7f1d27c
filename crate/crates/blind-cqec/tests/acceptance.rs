//! Acceptance criteria 1-15. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Values are recomputed from the emitted tables rather
//! than read from the commands' own checks.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use blind_cqec::bench::{run_command, BenchmarkConfig, Cell, Runner, Table};
use blind_cqec::core_linalg::{fidelity, psd_project, trace_norm, CMatrix, EnergySpectrum};
use blind_cqec::estimators::{estimate_channel_inversion, estimate_coherence_max};
use blind_cqec::noise::{apply_amplitude_damping, NoiseParams};
use blind_cqec::recovery::recover;
use blind_cqec::targets::maximally_coherent;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn num(c: &Cell) -> f64 {
    c.as_f64().unwrap_or(f64::NAN)
}

fn text(c: &Cell) -> String {
    match c {
        Cell::Str(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
        other => other.render(),
    }
}

/// Row accessor by column name.
struct Rows<'a> {
    t: &'a Table,
}

impl<'a> Rows<'a> {
    fn new(t: &'a Table) -> Self {
        Self { t }
    }

    fn idx(&self, col: &str) -> usize {
        self.t
            .column(col)
            .unwrap_or_else(|| panic!("{} has no column {col}", self.t.name))
    }

    fn f(&self, row: &[Cell], col: &str) -> f64 {
        num(&row[self.idx(col)])
    }

    fn s(&self, row: &[Cell], col: &str) -> String {
        text(&row[self.idx(col)])
    }

    fn filter(&self, pred: impl Fn(&Self, &[Cell]) -> bool) -> Vec<&'a Vec<Cell>> {
        self.t.rows.iter().filter(|r| pred(self, r)).collect()
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed().as_secs_f64())
}

fn pearson_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / (sxx * syy).sqrt(), sxy / sxx)
}

fn time_note(secs: f64, limit: f64) -> String {
    format!("{secs:.2} s (limit {limit} s)")
}

fn random_trace_one_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let shift = (h.trace().re - 1.0) / d as f64;
    h - CMatrix::identity(d, d) * Complex64::new(shift, 0.0)
}

fn main() {
    let cfg = BenchmarkConfig::default();
    let runner = Runner::new(1).expect("pool");
    let run = |name: &str| timed(|| run_command(name, &cfg, &runner).expect(name));
    let mut results: Vec<Outcome> = vec![];
    let mut record_tables: Vec<Table> = vec![];

    // 1 and 3 come from the noise sweep.
    let (noise, t_noise) = run("sweep-noise");
    let sweep = Rows::new(noise.table("sweep_noise").unwrap());
    let c1 = sweep.filter(|r, row| {
        r.f(row, "dim") == 2.0
            && r.s(row, "noise") == "dephasing"
            && ["coherence_max", "channel_inversion", "iterative"].contains(&r.s(row, "strategy").as_str())
    });
    let worst = c1
        .iter()
        .map(|row| (sweep.f(row, "f_rec") - 1.0).abs())
        .fold(0.0, f64::max);
    results.push(Outcome {
        id: 1,
        pass: c1.len() == 60 && worst <= 1e-9 && t_noise < 1.0,
        detail: format!(
            "{} records, max |F_rec - 1| = {worst:e}, {}",
            c1.len(),
            time_note(t_noise, 1.0)
        ),
    });

    // 2: maximally coherent qubit under amplitude damping 0.5.
    let ((com, inv), t2) = timed(|| {
        let sp = EnergySpectrum::equally_spaced(2);
        let t = maximally_coherent(2);
        let n = apply_amplitude_damping(&t, 0.5).unwrap();
        let com = recover(&n, &estimate_coherence_max(&n).unwrap().state, &sp).unwrap();
        let inv = recover(
            &n,
            &estimate_channel_inversion(&n, &NoiseParams::amplitude_damping(0.5), &sp)
                .unwrap()
                .state,
            &sp,
        )
        .unwrap();
        (fidelity(&com, &t).unwrap(), fidelity(&inv, &t).unwrap())
    });
    results.push(Outcome {
        id: 2,
        pass: (com - 0.926).abs() <= 0.005 && inv >= 0.999 && t2 < 1.0,
        detail: format!(
            "CoM {com:.6} (want 0.926 +- 0.005), ChInv {inv:.6} (want >= 0.999), {}",
            time_note(t2, 1.0)
        ),
    });

    let (dim, t_dim) = run("sweep-dim");
    let naive_gap = |t: &Table| {
        let r = Rows::new(t);
        r.filter(|r, row| r.s(row, "strategy") == "naive")
            .iter()
            .map(|row| (r.f(row, "f_rec") - r.f(row, "f_noisy")).abs())
            .fold(0.0, f64::max)
    };
    let gap = naive_gap(noise.table("sweep_noise").unwrap()).max(naive_gap(dim.table("sweep_dim").unwrap()));
    results.push(Outcome {
        id: 3,
        pass: gap <= 1e-12,
        detail: format!("max |F_rec - F_noisy| over naive rows = {gap:e}"),
    });

    // 4: Lipschitz property of Π on random Hermitian trace-one pairs.
    let ((violations, worst_ratio), t4) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut bad = 0usize;
        let mut worst: f64 = 0.0;
        for d in [2, 4, 8, 16] {
            for _ in 0..10_000 {
                let a = random_trace_one_hermitian(d, &mut rng);
                let b = random_trace_one_hermitian(d, &mut rng);
                let lhs = trace_norm(&(psd_project(&a).unwrap().matrix() - psd_project(&b).unwrap().matrix()));
                let rhs = trace_norm(&(&a - &b));
                if lhs > 2.0 * rhs + 1e-9 {
                    bad += 1;
                }
                worst = worst.max(lhs / rhs);
            }
        }
        (bad, worst)
    });
    results.push(Outcome {
        id: 4,
        pass: violations == 0 && t4 < 30.0,
        detail: format!(
            "{violations} violations in 40000 pairs, max ratio {worst_ratio:.4}, {}",
            time_note(t4, 30.0)
        ),
    });

    // 6: Haar dimension sweep.
    let summary = Rows::new(dim.table("sweep_dim_summary").unwrap());
    let stat = |d: f64, s: &str| {
        summary
            .filter(|r, row| r.f(row, "dim") == d && r.s(row, "strategy") == s)
            .first()
            .map(|row| (summary.f(row, "mean_f_rec"), summary.f(row, "std_f_rec")))
            .unwrap_or((f64::NAN, f64::NAN))
    };
    let dims = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
    let inv_m: Vec<f64> = dims.iter().map(|&d| stat(d, "channel_inversion").0).collect();
    let com_m: Vec<f64> = dims.iter().map(|&d| stat(d, "coherence_max").0).collect();
    let mut cross = None;
    for i in (0..dims.len()).rev() {
        if inv_m[i] >= com_m[i] {
            cross = Some(dims[i]);
        } else {
            break;
        }
    }
    let sig: Vec<f64> = dims[1..].iter().map(|&d| stat(d, "channel_inversion").1).collect();
    let parts = [
        ((inv_m[0] - 0.955).abs() <= 0.03, format!("ChInv(2) = {:.4}", inv_m[0])),
        (
            (inv_m[7] - 0.648).abs() <= 0.05,
            format!("ChInv(256) = {:.4}", inv_m[7]),
        ),
        ((com_m[0] - 0.979).abs() <= 0.03, format!("CoM(2) = {:.4}", com_m[0])),
        ((com_m[7] - 0.494).abs() <= 0.05, format!("CoM(256) = {:.4}", com_m[7])),
        (
            cross.is_some_and(|d| (16.0..=64.0).contains(&d)),
            format!("crossover d = {cross:?}"),
        ),
        (
            sig.windows(2).all(|w| w[1] < w[0]),
            format!(
                "sigma(4..256) = {:?}",
                sig.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>()
            ),
        ),
        (t_dim < 120.0, time_note(t_dim, 120.0)),
    ];
    results.push(Outcome {
        id: 6,
        pass: parts.iter().all(|p| p.0),
        detail: parts
            .iter()
            .map(|(ok, s)| format!("{s} [{}]", if *ok { "ok" } else { "miss" }))
            .collect::<Vec<_>>()
            .join("; "),
    });

    // 7: correlation between estimation and recovery fidelity.
    let (corr, t7) = run("correlation");
    let ct = Rows::new(corr.table("correlation").unwrap());
    let xs: Vec<f64> = ct.t.rows.iter().map(|row| ct.f(row, "f_est")).collect();
    let ys: Vec<f64> = ct.t.rows.iter().map(|row| ct.f(row, "f_rec")).collect();
    let (r, slope) = pearson_slope(&xs, &ys);
    let mut by_dim: BTreeMap<i64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in &ct.t.rows {
        let e = by_dim.entry(ct.f(row, "dim") as i64).or_default();
        e.0.push(ct.f(row, "f_est"));
        e.1.push(ct.f(row, "f_rec"));
    }
    let per: Vec<(i64, f64)> = by_dim.iter().map(|(d, (x, y))| (*d, pearson_slope(x, y).0)).collect();
    results.push(Outcome {
        id: 7,
        pass: ct.t.rows.len() >= 50
            && r >= 0.95
            && (0.90..=1.05).contains(&slope)
            && per.iter().all(|p| p.1 >= 0.95)
            && t7 < 60.0,
        detail: format!(
            "{} conditions, pooled r = {r:.4}, slope = {slope:.4}, per-dim r = {:?}, {}",
            ct.t.rows.len(),
            per.iter().map(|(d, r)| format!("{d}:{r:.4}")).collect::<Vec<_>>(),
            time_note(t7, 60.0)
        ),
    });

    // 8: copy-scaling exponents.
    let (copies, t8) = run("sweep-copies");
    let ft = Rows::new(copies.table("sweep_copies_fits").unwrap());
    let fit = |curve: &str| {
        let row = ft.filter(|r, row| r.s(row, "curve") == curve)[0];
        (ft.f(row, "alpha"), ft.f(row, "r_squared"))
    };
    let a = [
        fit("channel_inversion/amplitude_damping"),
        fit("channel_inversion/depolarizing"),
        fit("coherence_max/dephasing"),
        fit("coherence_max/amplitude_damping"),
    ];
    results.push(Outcome {
        id: 8,
        pass: a[0].0 > a[1].0 && a[1].0 > a[2].0 && a[2].0 > a[3].0 && a[3].0 < 0.2 && a[3].1 < 0.6 && t8 < 60.0,
        detail: format!(
            "alpha ChInv/AD {:.4}, ChInv/dep {:.4}, CoM/deph {:.4}, CoM/AD {:.4} (R^2 {:.4}), {}",
            a[0].0,
            a[1].0,
            a[2].0,
            a[3].0,
            a[3].1,
            time_note(t8, 60.0)
        ),
    });

    // 9: misspecified channel inversion.
    let (sens, t9) = run("sensitivity");
    let st = Rows::new(sens.table("sensitivity").unwrap());
    let sf = |d: f64, delta: f64| {
        st.filter(|r, row| {
            r.f(row, "dim") == d && r.s(row, "parameter") == "all" && (r.f(row, "delta") - delta).abs() < 1e-9
        })
        .first()
        .map_or(f64::NAN, |row| st.f(row, "mean_f_rec"))
    };
    let (lo4, hi4, lo64, hi64) = (sf(4.0, -0.3), sf(4.0, 0.3), sf(64.0, -0.3), sf(64.0, 0.3));
    results.push(Outcome {
        id: 9,
        pass: lo4 >= 0.75 && hi4 >= 0.75 && lo64 < hi64 && t9 < 40.0,
        detail: format!(
            "d=4: F(-30%) = {lo4:.4}, F(+30%) = {hi4:.4}; d=64: F(-30%) = {lo64:.4}, F(+30%) = {hi64:.4}; {}",
            time_note(t9, 40.0)
        ),
    });

    // 10 and 11: Werner targets and the hybrid weight.
    let (mixed, t10) = run("mixed-hybrid");
    let wt = Rows::new(mixed.table("werner_summary").unwrap());
    let wf = |v: f64, s: &str| {
        wt.filter(|r, row| (r.f(row, "purity") - v).abs() < 1e-9 && r.s(row, "strategy") == s)
            .first()
            .map_or(f64::NAN, |row| wt.f(row, "mean_f_rec"))
    };
    let purities = blind_cqec::bench::config::linspace(0.3, 1.0, 8);
    let inv_min = purities
        .iter()
        .map(|&v| wf(v, "channel_inversion"))
        .fold(f64::INFINITY, f64::min);
    let (c03, c10) = (wf(0.3, "coherence_max"), wf(1.0, "coherence_max"));
    results.push(Outcome {
        id: 10,
        pass: inv_min >= 0.90 && c03 <= c10 - 0.1 && t10 < 20.0,
        detail: format!(
            "min ChInv = {inv_min:.4}, CoM(0.3) = {c03:.4}, CoM(1.0) = {c10:.4}, {} (whole command)",
            time_note(t10, 20.0)
        ),
    });
    let ht = Rows::new(mixed.table("hybrid_summary").unwrap());
    let optimum = |d: f64| {
        let rows = ht.filter(|r, row| r.f(row, "dim") == d);
        let curve: Vec<(f64, f64)> = rows
            .iter()
            .map(|row| (ht.f(row, "weight"), ht.f(row, "mean_f_rec")))
            .collect();
        let best = curve
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b });
        let ends = curve.first().unwrap().1.max(curve.last().unwrap().1);
        (best.0, best.1 - ends)
    };
    let (w4, w16, w32, w64) = (optimum(4.0), optimum(16.0), optimum(32.0), optimum(64.0));
    let interior = [w16, w32].iter().any(|&(w, g)| w > 0.0 && w < 1.0 && g >= 0.005);
    results.push(Outcome {
        id: 11,
        pass: w4.0 == 0.0 && w64.0 == 1.0 && interior && t10 < 30.0,
        detail: format!(
            "w*(4) = {}, w*(64) = {}, d=16: w* = {} gain {:.4}, d=32: w* = {} gain {:.4}",
            w4.0, w64.0, w16.0, w16.1, w32.0, w32.1
        ),
    });

    // 12: error-mitigation baselines.
    let (qem, t12) = run("qem-compare");
    let qs = Rows::new(qem.table("qem_summary").unwrap());
    let qf = |d: f64, s: &str| {
        qs.filter(|r, row| r.f(row, "dim") == d && r.s(row, "strategy") == s)
            .first()
            .map_or(f64::NAN, |row| qs.f(row, "mean_f_rec"))
    };
    let pe = Rows::new(qem.table("qem_pec_equivalence").unwrap());
    let pec_diff =
        pe.t.rows
            .iter()
            .map(|row| pe.f(row, "trace_norm_diff"))
            .fold(0.0, f64::max);
    let li_gap = [4.0, 8.0, 16.0, 64.0]
        .iter()
        .map(|&d| (qf(d, "linear_inversion") - qf(d, "none")).abs())
        .fold(0.0, f64::max);
    let (z4, v4, z64, v64) = (qf(4.0, "zne"), qf(4.0, "vd"), qf(64.0, "zne"), qf(64.0, "vd"));
    results.push(Outcome {
        id: 12,
        pass: pec_diff <= 1e-9
            && z64 < 0.10
            && v64 < 0.10
            && (z4 - 0.51).abs() <= 0.05
            && (v4 - 0.67).abs() <= 0.06
            && li_gap <= 0.02
            && t12 < 60.0,
        detail: format!(
            "PEC-ChInv {pec_diff:e}; d=4 ZNE {z4:.4} VD {v4:.4}; d=64 ZNE {z64:.4} VD {v64:.4}; linear inversion gap {li_gap:.4}; {}",
            time_note(t12, 60.0)
        ),
    });

    // 13: VQE on H2.
    let (vqe, t13) = run("vqe");
    let vt = Rows::new(vqe.table("vqe_summary").unwrap());
    let ve = |s: &str| {
        vt.filter(|r, row| r.s(row, "scenario") == s)
            .first()
            .map_or(f64::NAN, |row| vt.f(row, "error_vs_reference"))
    };
    let (e0, en, ecm, ein) = (
        ve("noiseless"),
        ve("noisy"),
        ve("blind_coherence_max"),
        ve("blind_channel_inversion"),
    );
    results.push(Outcome {
        id: 13,
        pass: e0 <= 0.005 && ein <= 0.5 * en && (ecm - en).abs() <= 0.05 && t13 < 30.0,
        detail: format!(
            "errors vs -1.851 Ha: noiseless {e0:.4}, noisy {en:.4}, blind CoM {ecm:.4}, blind ChInv {ein:.4}; {}",
            time_note(t13, 30.0)
        ),
    });

    // 14: circuit-level sanity check.
    let (circ, t14) = run("circuit-sanity");
    let cs = Rows::new(circ.table("circuit_sanity").unwrap());
    let expected = [
        ("ghz_2q", "ci"),
        ("ghz_3q", "ci"),
        ("w_like_2q", "cm"),
        ("random_2q", "ci"),
        ("random_3q", "ci"),
    ];
    let mut ok14 = cs.t.rows.len() == 5 && t14 < 10.0;
    let mut notes = vec![];
    for (name, want) in expected {
        let row = cs.filter(|r, row| r.s(row, "test") == name)[0];
        let (fnz, fcm, fci) = (
            cs.f(row, "f_noisy"),
            cs.f(row, "f_coherence_max"),
            cs.f(row, "f_channel_inversion"),
        );
        let got = if fci >= fcm { "ci" } else { "cm" };
        ok14 &= fcm.max(fci) - fnz >= 0.03 && got == want;
        notes.push(format!(
            "{name}: noisy {fnz:.3} CM {fcm:.3} CI {fci:.3} winner {got} (want {want})"
        ));
    }
    let p = cs.f(cs.filter(|r, row| r.s(row, "test") == "ghz_2q")[0], "p_eff");
    ok14 &= (p - 0.16).abs() <= 0.05;
    notes.push(format!("p_eff(ghz_2q) = {p:.4}"));
    results.push(Outcome {
        id: 14,
        pass: ok14,
        detail: notes.join("; "),
    });

    // 5: the fidelity bound over every record table.
    for o in [&noise, &dim, &corr, &sens, &mixed, &qem] {
        record_tables.extend(o.tables.iter().filter(|t| t.column("est_error").is_some()).cloned());
    }
    let mut checked = 0;
    let mut bad = 0;
    for t in &record_tables {
        let r = Rows::new(t);
        for row in &t.rows {
            checked += 1;
            if r.f(row, "f_rec") < 1.0 - 2.0 * r.f(row, "est_error") - 1e-9 {
                bad += 1;
            }
        }
    }
    results.push(Outcome {
        id: 5,
        pass: bad == 0 && checked > 0,
        detail: format!("{bad} violations in {checked} records"),
    });

    // 15: determinism of the full run, through the binary.
    let (det, t15) = timed(|| {
        let base = std::env::temp_dir().join(format!("blind-cqec-acceptance-{}", std::process::id()));
        let bin = env!("CARGO_BIN_EXE_blind-cqec");
        let mut durations = vec![];
        for run in ["a", "b"] {
            let t0 = Instant::now();
            let status = Command::new(bin)
                .args(["all", "--seed", "42", "--out"])
                .arg(base.join(run))
                .output()
                .expect("binary runs");
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            durations.push(t0.elapsed().as_secs_f64());
        }
        let same = compare_csvs(&base.join("a"), &base.join("b"));
        let _ = std::fs::remove_dir_all(&base);
        (same, durations)
    });
    let (same, durations) = det;
    let (n_files, identical) = same;
    let slowest = durations.iter().copied().fold(0.0, f64::max);
    results.push(Outcome {
        id: 15,
        pass: identical && n_files > 0 && slowest <= 300.0,
        detail: format!(
            "{n_files} CSVs identical = {identical}; slowest run {slowest:.1} s (limit 300 s); total {t15:.1} s"
        ),
    });

    results.sort_by_key(|o| o.id);
    let mut failed = 0;
    for o in &results {
        println!(
            "{} criterion {:>2}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn compare_csvs(a: &Path, b: &Path) -> (usize, bool) {
    let mut names: Vec<_> = std::fs::read_dir(a)
        .expect("output dir")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    let identical = names
        .iter()
        .all(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok());
    (names.len(), identical)
}
