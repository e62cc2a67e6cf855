use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use spindeq_core::case::Case;
use spindeq_core::coadjoint::{self, OrbitState};
use spindeq_core::cpi::{self, build_cpi_hamiltonian, CpiSpec};
use spindeq_core::report::{Check, RunReport};
use spindeq_core::spin::{self, MagneticField};
use spindeq_core::suite::{self, DiracTolerances, SuiteConfig};
use spindeq_core::superfield;
use spindeq_core::symbolic::{Declarations, GradedPolynomial, Symbol};

use super::{AllArgs, ClassicalArgs, DiracArgs, PrecessionArgs, QuantumArgs, VerifyArgs};

fn write_json(report: &RunReport, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display())),
        None => quiet_pipe(writeln!(std::io::stdout().lock(), "{}", report.to_json())),
    }
}

/// A closed downstream pipe (`spindeq ... | head`) is not an error.
fn quiet_pipe(r: std::io::Result<()>) -> Result<()> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_csv<R: Serialize>(rows: &[R], out: Option<&Path>) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        match w.serialize(r) {
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe) => {
                return Ok(())
            }
            other => other?,
        }
    }
    quiet_pipe(w.flush())
}

fn hamiltonians(case: Case, src: Option<&str>, builtin: Option<&str>) -> Result<Vec<(String, GradedPolynomial)>> {
    if let Some(src) = src {
        let h = case.parse_hamiltonian(src, &Declarations::new())?;
        return Ok(vec![(src.to_string(), h)]);
    }
    let names: Vec<&str> = match builtin {
        Some(name) => vec![name],
        None => case.builtins().iter().map(|(n, _)| *n).collect(),
    };
    names
        .into_iter()
        .map(|name| {
            let h = case.builtin_hamiltonian(name).ok_or_else(|| {
                let known: Vec<&str> = case.builtins().iter().map(|(n, _)| *n).collect();
                anyhow!("unknown builtin `{name}` for the {case} case; known: {}", known.join(", "))
            })?;
            Ok((name.to_string(), h))
        })
        .collect()
}

pub fn verify_dequantization(a: VerifyArgs) -> Result<RunReport> {
    let start = Instant::now();
    let case = a.case;
    let mut report = RunReport::new("verify-dequantization")
        .parameter("case", case)
        .parameter("gamma", a.gamma)
        .parameter("hbar", a.hbar);
    let hbar = Symbol::constant("hbar");
    let factor = if a.hbar { hbar.poly() } else { GradedPolynomial::one() };
    let mut identities = Vec::new();
    for (label, h) in hamiltonians(case, a.hamiltonian.as_deref(), a.builtin.as_deref())? {
        let l = case.lagrangian(&h, a.gamma);
        let dq = match superfield::dequantize_with(&l, case, a.hbar.then_some(&hbar)) {
            Ok(dq) => dq,
            Err(e) => {
                report.checks.push(Check::exact(format!("{label}: residual"), "0", &e));
                continue;
            }
        };
        let expected_l = &factor * &cpi::cpi_lagrangian(case, &h);
        let expected_s = &factor * &superfield::expected_primitive(case, a.gamma).formal_time_derivative();
        let residual = &(&dq.raw - &expected_l) - &expected_s;
        report.checks.push(Check::exact(format!("{label}: residual"), "0", &residual));
        report.checks.push(Check::exact(format!("{label}: recognized L~"), &expected_l, &dq.cpi_lagrangian));
        report.checks.push(Check::exact(format!("{label}: recognized surface term"), &expected_s, &dq.surface_term));
        println!("{label}: H = {h}");
        println!("  L~         = {}", dq.cpi_lagrangian);
        println!("  surface    = {}", dq.surface_term);
        println!("  residual   = {residual}");
        identities.push(json!({
            "label": label,
            "hamiltonian": h.to_string(),
            "lagrangian": l.to_string(),
            "raw": dq.raw.to_string(),
            "cpi_lagrangian": dq.cpi_lagrangian.to_string(),
            "surface_term": dq.surface_term.to_string(),
            "primitive": dq.primitive.to_string(),
            "residual": residual.to_string(),
        }));
    }
    report.artifact("identities", identities);
    report.timing = start.elapsed().as_secs_f64();
    if let Some(path) = &a.report {
        write_json(&report, Some(path))?;
    }
    Ok(report)
}

#[derive(Serialize)]
struct ConvergenceRow {
    n: usize,
    max_error_vs_oracle: f64,
    wall_time: f64,
}

pub fn propagate_quantum(a: QuantumArgs) -> Result<RunReport> {
    let start = Instant::now();
    if a.b.len() != 3 {
        bail!("--b takes three components BX,BY,BZ");
    }
    if a.slices.is_empty() || a.slices.contains(&0) {
        bail!("--slices needs positive slice counts");
    }
    let b = MagneticField::new(a.b[0], a.b[1], a.b[2]).with_moment(a.mu_b);
    let points = spin::convergence_sweep(&b, a.t, &a.slices)?;
    let mut report = RunReport::new("propagate-quantum")
        .parameter("b", &a.b)
        .parameter("muB", a.mu_b)
        .parameter("t", a.t)
        .parameter("slices", &a.slices);
    for w in points.windows(2) {
        if w[1].n == 2 * w[0].n {
            let ratio = w[0].max_error / w[1].max_error;
            report.checks.push(Check::within(
                format!("error({}) / error({})", w[0].n, w[1].n),
                ratio,
                a.ratio_min,
                a.ratio_max,
            ));
        }
    }
    let finest = points.iter().max_by_key(|p| p.n).expect("nonempty");
    report.checks.push(Check::small(format!("error at n = {}", finest.n), finest.max_error, a.max_error));
    report.artifact("first_order_constant", spin::fit_first_order(&points));
    report.artifact("points", &points);
    report.timing = start.elapsed().as_secs_f64();
    let rows: Vec<ConvergenceRow> = points
        .iter()
        .map(|p| ConvergenceRow { n: p.n, max_error_vs_oracle: p.max_error, wall_time: p.wall_time })
        .collect();
    write_csv(&rows, a.out.as_deref())?;
    if a.out.is_some() {
        for p in &points {
            println!("n = {:>6}  error = {:.3e}", p.n, p.max_error);
        }
        println!("error ≈ {:.4}/n", spin::fit_first_order(&points));
    }
    Ok(report)
}

pub fn propagate_classical(a: ClassicalArgs) -> Result<RunReport> {
    let start = Instant::now();
    let mut spec = match a.case {
        Case::Grassmann => CpiSpec::spin(a.omega),
        Case::Coadjoint => CpiSpec::precession(a.mu_b),
        Case::Bosonic => {
            let builtin = a.builtin.as_deref().or(a.hamiltonian.is_none().then_some("harmonic"));
            let (_, h) = hamiltonians(Case::Bosonic, a.hamiltonian.as_deref(), builtin)?.remove(0);
            CpiSpec::new(Case::Bosonic, h)
        }
    };
    for (k, v) in &a.params {
        spec = spec.with_parameter(k, *v);
    }
    spec = spec.with_truncation(a.truncation);
    let op = build_cpi_hamiltonian(&spec)?;
    let modes: Vec<i64> = if a.case == Case::Coadjoint { (-a.modes..=a.modes).collect() } else { vec![0] };
    let phases = op.eigenphases(&modes)?;
    let kind = cpi::classify_spectrum(
        phases.iter().filter_map(|m| m.eigenvalue.map(|[re, im]| Complex64::new(re, im))),
        1e-12,
    );
    let centers: &[f64] = if a.case == Case::Coadjoint { &[0.0, 1.0, 2.5] } else { &[] };
    let checks = cpi::characteristics_check(&spec, centers, a.t)?;
    let mut report = RunReport::new("propagate-classical")
        .parameter("case", a.case)
        .parameter("omega", a.omega)
        .parameter("muB", a.mu_b)
        .parameter("t", a.t)
        .parameter("truncation", a.truncation)
        .parameter("hamiltonian", spec.hamiltonian.to_string())
        .parameter("parameters", &spec.parameters);
    for c in &checks {
        report.checks.push(Check::small(c.name.clone(), c.residual, a.tolerance));
    }
    report.artifact("cpi_hamiltonian", spec.cpi_hamiltonian().to_string());
    report.artifact("eigenphases", &phases);
    report.artifact("spectrum", kind);
    report.artifact("characteristics", &checks);
    if a.case != Case::Bosonic || cpi::equations_of_motion(&spec).is_ok() {
        let one = Complex64::new(1.0, 0.0);
        let c = cpi::jacobi_fields(&spec, [one, one], a.t)?;
        report.artifact("jacobi_fields_from_unit", c.map(|z| [z.re, z.im]));
    }
    report.timing = start.elapsed().as_secs_f64();
    if a.out.is_some() {
        println!("H~ = {}", spec.cpi_hamiltonian());
        println!("spectrum: {kind:?}");
        let worst = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
        println!("{} characteristics checks, worst residual {worst:.2e}", checks.len());
    }
    write_json(&report, a.out.as_deref())?;
    Ok(report)
}

#[derive(Serialize)]
struct PrecessionRow {
    t: f64,
    theta: f64,
    phi: f64,
    eta: f64,
    #[serde(rename = "H")]
    h: f64,
}

pub fn precession(a: PrecessionArgs) -> Result<RunReport> {
    let start = Instant::now();
    if a.steps == 0 {
        bail!("--steps must be positive");
    }
    let s0 = OrbitState::on_shell(a.theta0, a.phi0, a.lambda);
    let h0 = coadjoint::total_hamiltonian(&s0, a.mu_b, 1.0);
    let mut rows = Vec::with_capacity(a.steps + 1);
    let (mut eom, mut drift) = (0.0f64, 0.0f64);
    for k in 0..=a.steps {
        let t = a.t * k as f64 / a.steps as f64;
        let s = coadjoint::classical_trajectory(&s0, a.mu_b, 1.0, t);
        let h = coadjoint::total_hamiltonian(&s, a.mu_b, 1.0);
        let r = coadjoint::equation_of_motion_residuals(&s0, a.mu_b, 1.0, t, 1e-3);
        eom = eom.max(r[0]).max(r[1]);
        drift = drift.max((s.eta() - s0.eta()).abs()).max((h - h0).abs());
        rows.push(PrecessionRow { t, theta: s.theta, phi: s.wrapped_phi(), eta: s.eta(), h });
    }
    let mut report = RunReport::new("precession")
        .parameter("theta0", a.theta0)
        .parameter("phi0", a.phi0)
        .parameter("muB", a.mu_b)
        .parameter("lambda", a.lambda)
        .parameter("t", a.t);
    report.checks.push(Check::small("equations of motion", eom, a.tolerance));
    report.checks.push(Check::with_residual("eta and H conserved", 0.0, drift, drift, 0.0));
    if a.mu_b != 0.0 {
        let period = coadjoint::period(a.mu_b, 1.0);
        let back = coadjoint::classical_trajectory(&s0, a.mu_b, 1.0, period);
        report.checks.push(Check::small("return after one period", coadjoint::angle_distance(back.phi, s0.phi), 1e-12));
    }
    report.timing = start.elapsed().as_secs_f64();
    write_csv(&rows, a.out.as_deref())?;
    if a.out.is_some() {
        println!("{} samples, eta = {:.6}, H = {:.6}", rows.len(), s0.eta(), h0);
    }
    Ok(report)
}

pub fn check_dirac(a: DiracArgs) -> Result<RunReport> {
    let start = Instant::now();
    let tol = DiracTolerances { bracket: a.bracket_tol, so3: a.so3_tol, ..DiracTolerances::default() };
    let mut report = RunReport::new("check-dirac")
        .parameter("samples", a.samples)
        .parameter("seed", a.seed)
        .parameter("tolerances", tol);
    report.checks = suite::dirac_checks(a.samples, a.seed, &tol);
    report.timing = start.elapsed().as_secs_f64();
    if a.out.is_some() {
        for c in &report.checks {
            println!("{:<4} {} ({:.2e})", if c.pass { "ok" } else { "FAIL" }, c.name, c.residual);
        }
    }
    write_json(&report, a.out.as_deref())?;
    Ok(report)
}

pub fn all(a: AllArgs) -> Result<RunReport> {
    let start = Instant::now();
    let config = SuiteConfig { seed: a.seed, dirac_samples: a.samples, random_fields: a.fields };
    let criteria = suite::run_all(&config);
    for c in &criteria {
        println!(
            "criterion {}: {} - {} ({:.3} s of {} s)",
            c.id,
            if c.passed() { "PASS" } else { "FAIL" },
            c.title,
            c.elapsed_seconds,
            c.budget_seconds
        );
    }
    let report = suite::to_report(&config, &criteria, start.elapsed().as_secs_f64());
    if let Some(path) = &a.out {
        write_json(&report, Some(path))?;
    }
    Ok(report)
}
