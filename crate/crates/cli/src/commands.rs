//! The four subcommands: classify, run, decay, verify.

use std::time::Instant;

use qsflow_core::coefficients::MaterialCoefficients;
use qsflow_core::diagnostics::{self, DiagnosticsRecord};
use qsflow_core::dynamics::{
    make_initial_data, rhs_qtensor, rhs_velocity, step, suggested_dt, FlowState,
};
use qsflow_core::oracle;
use qsflow_core::spectral::{l2_inner, Grid, ScalarField, SobolevNorms};
use qsflow_core::Error;

use crate::config::RunConfig;
use crate::output::{self, CsvWriter, RunStats};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BLOWUP: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

fn print_warnings(cfg: &RunConfig) {
    if let Some(w) = cfg.sobolev_warning() {
        eprintln!("{w}");
    }
}

/// `classify`: evaluate every coefficient gate, print the table, margins,
/// and the capability list.
pub fn cmd_classify(cfg: &RunConfig) -> u8 {
    let c = &cfg.coeffs;
    let report = match c.classify_regime() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let m = c.mu2_tilde - c.mu2;
    let rows: Vec<(String, f64, f64, bool)> = vec![
        ("a > 0".into(), c.a, 0.0, c.a > 0.0),
        ("J > 0".into(), c.j, 0.0, c.j > 0.0),
        ("L > 0".into(), c.l, 0.0, c.l > 0.0),
        ("beta1 >= 0".into(), c.beta1, 0.0, c.beta1 >= 0.0),
        ("beta4 > 0".into(), c.beta4, 0.0, c.beta4 > 0.0),
        ("mu1 > 0".into(), c.mu1, 0.0, c.mu1 > 0.0),
        (
            "Parodi |beta6 - beta5 - mu2| <= tol".into(),
            (c.beta6 - c.beta5 - c.mu2).abs(),
            1e-12,
            report.parodi_ok,
        ),
        (
            "|beta5 + beta6| <= tol".into(),
            (c.beta5 + c.beta6).abs(),
            1e-12,
            (c.beta5 + c.beta6).abs() <= 1e-12,
        ),
        (
            "(mu2~ - mu2)^2 < 8 beta4 mu1".into(),
            m * m,
            8.0 * c.beta4 * c.mu1,
            m * m < 8.0 * c.beta4 * c.mu1,
        ),
        (
            "(mu2~ - mu2)^2 + 4 mu2^2 < 8 beta4 mu1".into(),
            m * m + 4.0 * c.mu2 * c.mu2,
            8.0 * c.beta4 * c.mu1,
            report.condition_h_ok,
        ),
        (
            "|mu2~ - mu2| <= tol".into(),
            m.abs(),
            1e-12,
            report.mu2_equal,
        ),
    ];
    println!("{:<42} {:>14} {:>14}  status", "gate", "lhs", "rhs");
    for (name, lhs, rhs, ok) in rows {
        println!(
            "{:<42} {:>14.6e} {:>14.6e}  {}",
            name,
            lhs,
            rhs,
            if ok { "pass" } else { "fail" }
        );
    }
    println!();
    println!(
        "entropy inequality: {}",
        if report.entropy_ok { "pass" } else { "fail" }
    );
    println!(
        "condition (H):      {}",
        if report.condition_h_ok {
            "pass"
        } else {
            "fail"
        }
    );
    match (report.delta0, report.delta1) {
        (Some(d0), Some(d1)) => println!("coercivity margins: delta0 = {d0}, delta1 = {d1}"),
        _ => println!("coercivity margins: absent"),
    }
    let caps: Vec<&str> = report.capabilities.iter().map(|c| c.name()).collect();
    println!("capabilities:       {}", caps.join(" "));
    EXIT_OK
}

pub struct RunSeries {
    pub records: Vec<DiagnosticsRecord>,
    pub steps: usize,
    pub state: FlowState,
}

pub enum RunEnd {
    Completed(RunSeries),
    BlownUp {
        message: String,
        t: f64,
        partial: RunSeries,
    },
}

/// Shared integration loop: deterministic given the configuration, samples
/// diagnostics at step 0, every `cadence` steps, and the final step.
pub fn execute(cfg: &RunConfig) -> Result<RunEnd, String> {
    let grid = Grid::new(cfg.dimension, cfg.grid_n).map_err(|e| e.to_string())?;
    let eta = cfg.eta_value();
    let max_eta = diagnostics::eta_admissible_max(&cfg.coeffs);
    if !(eta > 0.0 && eta <= max_eta) {
        return Err(format!(
            "eta = {eta} outside the admissible range (0, {max_eta}]"
        ));
    }
    let mut state =
        make_initial_data(&cfg.initial_spec(), &grid, &cfg.coeffs).map_err(|e| e.to_string())?;
    let mut records =
        vec![diagnostics::record(&state, &cfg.coeffs, cfg.s, eta).map_err(|e| e.to_string())?];
    let mut steps = 0usize;
    while state.t < cfg.t_end - 1e-12 {
        let mut dt = cfg
            .dt
            .unwrap_or_else(|| suggested_dt(&state, cfg.cfl, cfg.dt_cap));
        if state.t + dt > cfg.t_end {
            dt = cfg.t_end - state.t;
        }
        match step(&state, dt, &cfg.coeffs) {
            Ok(next) => {
                state = next;
                steps += 1;
                if steps % cfg.cadence == 0 || state.t >= cfg.t_end - 1e-12 {
                    records.push(
                        diagnostics::record(&state, &cfg.coeffs, cfg.s, eta)
                            .map_err(|e| e.to_string())?,
                    );
                }
            }
            Err(e @ Error::BlowUp { t, .. }) => {
                return Ok(RunEnd::BlownUp {
                    message: e.to_string(),
                    t,
                    partial: RunSeries {
                        records,
                        steps,
                        state,
                    },
                });
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(RunEnd::Completed(RunSeries {
        records,
        steps,
        state,
    }))
}

fn prepare(cfg: &RunConfig) -> Result<(), String> {
    cfg.validate().map_err(|e| e.to_string())?;
    cfg.coeffs.classify_regime().map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", cfg.out_dir.display()))?;
    Ok(())
}

/// `run`: integrate to t_end, writing the diagnostics CSV, the final-state
/// snapshot, and the manifest.
pub fn cmd_run(cfg: &RunConfig) -> u8 {
    if let Err(e) = prepare(cfg) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    print_warnings(cfg);
    let start = Instant::now();
    let outcome = match execute(cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let csv_path = cfg.out_dir.join("diagnostics.csv");
    let manifest_path = cfg.out_dir.join("manifest.txt");
    let snapshot_path = cfg.out_dir.join("state.snap");

    let io_fail = |e: std::io::Error| {
        eprintln!("error: output failed: {e}");
        EXIT_CONFIG
    };

    match outcome {
        RunEnd::Completed(series) => {
            let mut csv = match CsvWriter::create(&csv_path) {
                Ok(w) => w,
                Err(e) => return io_fail(e),
            };
            for r in &series.records {
                if let Err(e) = csv.write_record(r) {
                    return io_fail(e);
                }
            }
            if let Err(e) = csv.finish() {
                return io_fail(e);
            }
            if let Err(e) = output::write_snapshot(&snapshot_path, &series.state, &cfg.coeffs) {
                return io_fail(e);
            }
            let stats = RunStats {
                status: "completed",
                steps: series.steps,
                final_t: series.state.t,
                wall_seconds: start.elapsed().as_secs_f64(),
            };
            if let Err(e) =
                output::write_manifest(&manifest_path, cfg, &stats, &csv_path, Some(&snapshot_path))
            {
                return io_fail(e);
            }
            let last = series.records.last().expect("at least the initial record");
            println!(
                "completed: {} steps to t = {}, E = {}, outputs in {}",
                series.steps,
                series.state.t,
                last.energy,
                cfg.out_dir.display()
            );
            EXIT_OK
        }
        RunEnd::BlownUp {
            message,
            t,
            partial,
        } => {
            if let Ok(mut csv) = CsvWriter::create(&csv_path) {
                for r in &partial.records {
                    let _ = csv.write_record(r);
                }
                let _ = csv.write_truncation_marker(t, &message);
                let _ = csv.finish();
            }
            let stats = RunStats {
                status: "blown-up",
                steps: partial.steps,
                final_t: partial.state.t,
                wall_seconds: start.elapsed().as_secs_f64(),
            };
            let _ = output::write_manifest(&manifest_path, cfg, &stats, &csv_path, None);
            eprintln!("error: {message}");
            EXIT_BLOWUP
        }
    }
}

/// `decay`: integrate and fit an exponential rate to the energy series
/// over the second half of the run.
pub fn cmd_decay(cfg: &RunConfig) -> u8 {
    if let Err(e) = prepare(cfg) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    print_warnings(cfg);

    // The velocity mean is a conserved quantity of the flow, so a nonzero
    // mean never decays; decay analysis requires mean-zero initial velocity.
    let grid = match Grid::new(cfg.dimension, cfg.grid_n) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match make_initial_data(&cfg.initial_spec(), &grid, &cfg.coeffs) {
        Ok(st) => {
            let mean = st.u.mean_magnitude();
            if mean > 1e-13 {
                eprintln!(
                    "error: decay analysis requires mean-zero initial velocity \
                     (|mean u| = {mean:.3e})"
                );
                return EXIT_CONFIG;
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }

    let series = match execute(cfg) {
        Ok(RunEnd::Completed(s)) => s,
        Ok(RunEnd::BlownUp { message, .. }) => {
            eprintln!("error: {message}");
            return EXIT_BLOWUP;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };

    let energies: Vec<(f64, f64)> = series.records.iter().map(|r| (r.t, r.energy)).collect();
    let fit = match diagnostics::fit_decay(&energies, None) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: decay fit refused: {e}");
            return EXIT_CONFIG;
        }
    };
    let confirmed = fit.c3 > 0.0 && !fit.degenerate;
    println!(
        "decay fit over [{}, {}]: c2 = {}, c3 = {}, r^2 = {}{}",
        fit.window.0,
        fit.window.1,
        fit.c2,
        fit.c3,
        fit.r_squared,
        if fit.degenerate { " (degenerate)" } else { "" }
    );
    println!("decay confirmed: {confirmed}");

    let path = cfg.out_dir.join("decay.csv");
    let row = format!(
        "c2,c3,r_squared,window_start,window_end,degenerate\n{},{},{},{},{},{}\n",
        fit.c2, fit.c3, fit.r_squared, fit.window.0, fit.window.1, fit.degenerate
    );
    if let Err(e) = std::fs::write(&path, row) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return EXIT_CONFIG;
    }
    EXIT_OK
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// `verify`: run the oracle suite and report pass/fail with residuals.
pub fn cmd_verify(cfg: &RunConfig) -> u8 {
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let mut checks = Vec::new();
    checks.push(check_convolution_agreement(cfg));
    checks.push(check_form_minimization(cfg));
    checks.push(check_gradient(cfg));
    checks.push(check_cancellation(cfg));

    let mut all_ok = true;
    for c in &checks {
        println!(
            "{} {:<24} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        all_ok &= c.pass;
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn check_convolution_agreement(cfg: &RunConfig) -> Check {
    let grid = Grid::new(cfg.dimension, 8).expect("8 is a valid edge");
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let st = oracle::narrow_band_state(&grid, seed, 0.0);
        let du = rhs_velocity(&st, &cfg.coeffs);
        let dr = rhs_qtensor(&st, &cfg.coeffs);
        let (du_o, dr_o) = match oracle::convolution_rhs_oracle(&st, &cfg.coeffs) {
            Ok(p) => p,
            Err(e) => {
                return Check {
                    name: "convolution-agreement",
                    pass: false,
                    detail: format!("oracle failed: {e}"),
                }
            }
        };
        for k in oracle::retained_modes(&grid) {
            let d = grid.dim();
            for i in 0..d {
                worst = worst.max((du.comp(i).mode(&k[..d]) - du_o.comp(i).mode(&k[..d])).norm());
            }
            for i in 0..d {
                for j in 0..d {
                    worst = worst
                        .max((dr.comp(i, j).mode(&k[..d]) - dr_o.comp(i, j).mode(&k[..d])).norm());
                }
            }
        }
    }
    Check {
        name: "convolution-agreement",
        pass: worst <= 1e-10,
        detail: format!("max retained-mode residual {worst:.3e} (tolerance 1e-10)"),
    }
}

fn check_form_minimization(cfg: &RunConfig) -> Check {
    // the configured coefficients plus scaled variants on both sides of
    // the coercivity boundary
    let mut sets: Vec<MaterialCoefficients> = vec![cfg.coeffs];
    let mut weak = cfg.coeffs;
    weak.mu2 *= 4.0;
    weak.mu2_tilde *= 4.0;
    weak.beta5 = -0.5 * weak.mu2;
    weak.beta6 = 0.5 * weak.mu2;
    sets.push(weak);
    let mut strong = cfg.coeffs;
    strong.mu2 = 0.0;
    strong.mu2_tilde = 0.0;
    strong.beta5 = 0.0;
    strong.beta6 = 0.0;
    sets.push(strong);

    let mut detail = String::new();
    for (i, c) in sets.iter().enumerate() {
        let m = c.mu2_tilde - c.mu2;
        let gap = m * m + 4.0 * c.mu2 * c.mu2 - 8.0 * c.beta4 * c.mu1;
        if gap.abs() < 1e-3 {
            continue; // boundary set: sampling noise decides the sign
        }
        let min = match oracle::mc_min_f(c, 100_000, 1000 + i as u64) {
            Ok(v) => v,
            Err(e) => {
                return Check {
                    name: "form-minimization",
                    pass: false,
                    detail: e.to_string(),
                }
            }
        };
        let psd = c.hessian_psd(0.0, 0.0).expect("delta in range");
        if (min >= -1e-9) != psd {
            return Check {
                name: "form-minimization",
                pass: false,
                detail: format!("set {i}: Monte-Carlo min {min:.3e} disagrees with Hessian {psd}"),
            };
        }
        detail = format!("{detail}set{i}: min {min:.3e}; ");
    }
    Check {
        name: "form-minimization",
        pass: true,
        detail,
    }
}

fn check_gradient(cfg: &RunConfig) -> Check {
    use qsflow_core::tensor::{bulk_potential, molecular_field, sym_traceless_project, Mat};
    let mut worst = 0.0f64;
    let mut lcg = 12345u64;
    let mut next = move || {
        lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1);
        ((lcg >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for d in [2usize, 3] {
        for _ in 0..50 {
            let mut raw = Mat::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    raw.set(i, j, next());
                }
            }
            let q = sym_traceless_project(&raw).expect("finite");
            let g = match oracle::fd_gradient_check(|q| bulk_potential(q, &cfg.coeffs), &q, 1e-6) {
                Ok(g) => g,
                Err(e) => {
                    return Check {
                        name: "molecular-field-gradient",
                        pass: false,
                        detail: e.to_string(),
                    }
                }
            };
            let h = molecular_field(&q, &cfg.coeffs);
            let err = g.add(h.mat()).max_abs() / (1.0 + g.max_abs());
            worst = worst.max(err);
        }
    }
    Check {
        name: "molecular-field-gradient",
        pass: worst <= 1e-6,
        detail: format!("max relative deviation {worst:.3e} (tolerance 1e-6)"),
    }
}

fn check_cancellation(cfg: &RunConfig) -> Check {
    let n = if cfg.dimension == 3 {
        cfg.grid_n.min(32)
    } else {
        cfg.grid_n.min(64)
    };
    let grid = Grid::new(cfg.dimension, n.max(16)).expect("valid grid");
    let spec = qsflow_core::dynamics::InitialSpec {
        target_energy: 4.0,
        seed: 5,
        sobolev_order: cfg.s,
        ..Default::default()
    };
    let st = match make_initial_data(&spec, &grid, &cfg.coeffs) {
        Ok(s) => s,
        Err(e) => {
            return Check {
                name: "elastic-cancellation",
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    let d = grid.dim();
    let sigma1 = qsflow_core::dynamics::ericksen_stress(&st.q, cfg.coeffs.l);
    let div = sigma1.divergence();
    let mut lhs = 0.0;
    for i in 0..d {
        lhs += l2_inner(div.comp(i), st.u.comp(i));
    }
    let up: Vec<Vec<f64>> = (0..d).map(|i| st.u.comp(i).to_physical()).collect();
    let mut rhs = 0.0;
    for ij in 0..d * d {
        let (i, j) = (ij / d, ij % d);
        let mut adv = vec![0.0; grid.size()];
        for (axis, u_ax) in up.iter().enumerate() {
            let dq =
                st.q.comp(i, j)
                    .derivative(axis)
                    .expect("axis < d")
                    .to_physical();
            for (p, v) in adv.iter_mut().enumerate() {
                *v += u_ax[p] * dq[p];
            }
        }
        let adv = ScalarField::from_physical(&grid, &adv).expect("sizes match");
        rhs += cfg.coeffs.l * l2_inner(&st.q.comp(i, j).laplacian(), &adv);
    }
    if cfg.verify_negative_control {
        rhs = -rhs; // test hook: force the identity to fail
    }
    let total = (lhs + rhs).abs();
    let scale = st.u.sobolev_norm(0) * st.q.hs_norm_sq(2) + 1.0;
    Check {
        name: "elastic-cancellation",
        pass: total <= 1e-9 * scale,
        detail: format!("residual {total:.3e} vs budget {:.3e}", 1e-9 * scale),
    }
}
