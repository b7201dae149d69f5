//! Command-line front end. Exit codes are a stable contract:
//! 0 success, 1 domain violation, 2 parse/IO error, 3 numerical failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::constructions::{apply_wiring, pr_box, pr_pseudostate, prop2_pseudostate, Wiring};
use crate::correlations::{bell_value, chsh_functional, Box};
use crate::di_bounds::{certify, saturation_report};
use crate::error::{Error, Result};
use crate::operators::{
    closest_state, negativity, negativity_witness, trace_norm, HermitianOp, PseudoState,
};
use crate::robustness::{
    best_local_approximation, generalized_local_robustness, local_robustness, verify_certificate,
    RobustnessResult,
};

#[derive(Parser)]
#[command(name = "nsbox", version, about = "No-signalling boxes, pseudo-states and robustness quantifiers of non-locality")]
pub struct Cli {
    /// Tolerance for probability/no-signalling membership checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Validate a box file: probabilities, no-signalling, marginals.
    Check { box_file: PathBuf },
    /// Robustness of non-locality with a dual Bell-functional certificate.
    Robustness {
        box_file: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Both)]
        kind: Kind,
        /// Write the certificate JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best local approximation: minimal non-local weight q_NL^min.
    Epr2 { box_file: PathBuf },
    /// Trace norm, negativity, closest state and witness of an operator.
    Negativity {
        operator_file: PathBuf,
        /// Write the closest quantum state here.
        #[arg(long)]
        closest_state: Option<PathBuf>,
    },
    /// Realize a no-signalling box as measurements on an explicit
    /// affine combination of two separable blocks.
    Realize {
        box_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Device-independent certificate from the box alone.
    Certify {
        box_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the noisy PR family and write a CSV table.
    PrSweep {
        /// Grid: comma list "0,0.1,0.2" or linspace "start:end:count".
        #[arg(long = "eps-grid", default_value = "0:0.5:21")]
        eps_grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a classical wiring to a box.
    Wire {
        box_file: PathBuf,
        wiring_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Local,
    Generalized,
    Both,
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.cmd {
        Cmd::Check { ref box_file } => cmd_check(box_file, cli.tol),
        Cmd::Robustness { ref box_file, kind, ref out } => {
            cmd_robustness(box_file, kind, out.as_deref(), cli.tol)
        }
        Cmd::Epr2 { ref box_file } => cmd_epr2(box_file, cli.tol),
        Cmd::Negativity { ref operator_file, ref closest_state } => {
            cmd_negativity(operator_file, closest_state.as_deref())
        }
        Cmd::Realize { ref box_file, ref out } => cmd_realize(box_file, out.as_deref(), cli.tol),
        Cmd::Certify { ref box_file, ref out } => cmd_certify(box_file, out.as_deref(), cli.tol),
        Cmd::PrSweep { ref eps_grid, ref out } => cmd_pr_sweep(eps_grid, out),
        Cmd::Wire { ref box_file, ref wiring_file, ref out } => {
            cmd_wire(box_file, wiring_file, out.as_deref())
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => 2,
        Error::NumericalFailure(_) | Error::ConvergenceFailure(_) | Error::LpInfeasible(_) => 3,
        _ => 1,
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none()
}

fn verdict(ok: bool) -> String {
    match (ok, color_enabled()) {
        (true, true) => "\x1b[32myes\x1b[0m".into(),
        (false, true) => "\x1b[31mno\x1b[0m".into(),
        (true, false) => "yes".into(),
        (false, false) => "no".into(),
    }
}

fn cmd_check(box_file: &Path, tol: f64) -> Result<i32> {
    let bx: Box = read_json(box_file)?;
    let s = bx.scenario();
    println!("scenario: ({}, {}, {}, {})", s.nx, s.ny, s.na, s.nb);
    let valid = bx.is_probability(tol);
    let ns = bx.is_no_signalling(tol);
    println!("valid probabilities (tol {tol:e}): {}", verdict(valid));
    println!(
        "no-signalling (tol {tol:e}): {} (deviation {:e})",
        verdict(ns),
        bx.signalling_deviation()
    );
    if ns {
        // Evaluated at y = 0 / x = 0; within tol of any other choice.
        for x in 0..s.nx {
            let m: Vec<f64> = (0..s.na)
                .map(|a| (0..s.nb).map(|b| bx.get(x, 0, a, b)).sum())
                .collect();
            println!("P(a|x={x}) = {m:?}");
        }
        for y in 0..s.ny {
            let m: Vec<f64> = (0..s.nb)
                .map(|b| (0..s.na).map(|a| bx.get(0, y, a, b)).sum())
                .collect();
            println!("P(b|y={y}) = {m:?}");
        }
    }
    Ok(if valid && ns { 0 } else { 1 })
}

fn require_ns(bx: &Box, tol: f64) -> Result<()> {
    let dev = bx.signalling_deviation();
    if dev > tol {
        return Err(Error::SignallingInput(dev, tol));
    }
    Ok(())
}

fn report_robustness(bx: &Box, r: &RobustnessResult, label: &str) -> bool {
    println!("{label} robustness t = {}", r.value);
    if let Some(f) = &r.dual {
        println!("  dual Bell functional (classical bound {}):", f.classical_bound);
        let s = f.scenario;
        for x in 0..s.nx {
            for y in 0..s.ny {
                let row: Vec<f64> = (0..s.na)
                    .flat_map(|a| (0..s.nb).map(move |b| (a, b)))
                    .map(|(a, b)| f.coefficients[s.index(x, y, a, b)])
                    .collect();
                println!("    B(.,.|{x},{y}) = {row:?}");
            }
        }
        if let Ok(v) = bell_value(bx, f) {
            println!("  functional value on box = {v}");
        }
    }
    println!("  LP duality gap = {:e}", r.gap);
    let report = verify_certificate(bx, r);
    println!("  certificate verified (tol 1e-8): {}", verdict(report.passed));
    for f in &report.failures {
        println!("    failure: {f}");
    }
    report.passed
}

fn cmd_robustness(box_file: &Path, kind: Kind, out: Option<&Path>, tol: f64) -> Result<i32> {
    let bx: Box = read_json(box_file)?;
    require_ns(&bx, tol)?;
    let mut results = Vec::new();
    if kind != Kind::Generalized {
        results.push(("local", local_robustness(&bx)?));
    }
    if kind != Kind::Local {
        results.push(("generalized", generalized_local_robustness(&bx)?));
    }
    let mut all_ok = true;
    for (label, r) in &results {
        all_ok &= report_robustness(&bx, r, label);
    }
    if let Some(path) = out {
        let map: serde_json::Map<String, serde_json::Value> = results
            .iter()
            .map(|(label, r)| Ok((label.to_string(), serde_json::to_value(r)?)))
            .collect::<Result<_>>()?;
        write_json(path, &map)?;
    }
    Ok(if all_ok { 0 } else { 3 })
}

fn cmd_epr2(box_file: &Path, tol: f64) -> Result<i32> {
    let bx: Box = read_json(box_file)?;
    require_ns(&bx, tol)?;
    let a = best_local_approximation(&bx)?;
    println!("minimal non-local weight q_NL^min = {}", a.q_nl_min);
    println!("maximal local weight = {}", 1.0 - a.q_nl_min);
    println!("local part present: {}", verdict(a.local_part.is_some()));
    println!("non-local part present: {}", verdict(a.ns_part.is_some()));
    Ok(0)
}

/// Raw operator file, parsed leniently so that domain violations (wrong
/// trace, asymmetry) surface as domain errors rather than parse errors.
#[derive(Deserialize)]
struct RawOperator {
    dim: usize,
    #[serde(default)]
    bipartition: Option<[usize; 2]>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn cmd_negativity(operator_file: &Path, closest_out: Option<&Path>) -> Result<i32> {
    let raw: RawOperator = read_json(operator_file)?;
    let d = raw.dim;
    if raw.re.len() != d
        || raw.im.len() != d
        || raw.re.iter().chain(&raw.im).any(|row| row.len() != d)
    {
        return Err(Error::Parse("re/im are not dim x dim".into()));
    }
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            entries.push(Complex64::new(raw.re[i][j], raw.im[i][j]));
        }
    }
    let op = HermitianOp::new(d, entries)?;
    let bip = raw.bipartition.map(|[a, b]| (a, b)).unwrap_or((1, d));
    let o = PseudoState::new(op, bip)?;

    let tn = trace_norm(o.op())?;
    let neg = negativity(&o)?;
    println!("trace norm = {tn}");
    println!("negativity = {neg}");
    let w = negativity_witness(&o)?;
    println!("witness expectation Tr(W O) = {}", w.hs_inner(o.op())?);
    let (sigma, dist) = closest_state(&o)?;
    println!("trace distance to closest state = {dist}");
    if let Some(path) = closest_out {
        write_json(path, &sigma)?;
    }
    Ok(0)
}

fn cmd_realize(box_file: &Path, out: Option<&Path>, tol: f64) -> Result<i32> {
    let bx: Box = read_json(box_file)?;
    require_ns(&bx, tol)?;
    let r = prop2_pseudostate(&bx)?;
    let tn = trace_norm(r.realization.state.op())?;
    println!("affine coefficients: ({}, {})", 1.0 + r.t, -r.t);
    println!("constructed operator dimension = {}", r.realization.state.dim());
    println!("trace norm of constructed operator = {tn}");
    let cert = certify(&bx)?;
    println!(
        "device-independent trace-norm floor = {} (gap {:e})",
        cert.trace_norm_floor,
        tn - cert.trace_norm_floor
    );
    if let Some(path) = out {
        write_json(path, &r)?;
    }
    Ok(0)
}

fn cmd_certify(box_file: &Path, out: Option<&Path>, tol: f64) -> Result<i32> {
    let bx: Box = read_json(box_file)?;
    require_ns(&bx, tol)?;
    let c = certify(&bx)?;
    println!("box digest = {}", c.box_digest);
    println!("|CHSH| = {}", c.chsh_value);
    println!("trace-norm floor = {}", c.trace_norm_floor);
    println!("negativity floor = {}", c.negativity_floor);
    println!("entanglement robustness floor = {}", c.entanglement_floor);
    for a in &c.assumptions {
        println!("assumption: {a}");
    }
    if let Some(path) = out {
        write_json(path, &c)?;
    }
    Ok(0)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Parse(format!("eps grid '{spec}': {msg}"));
    let grid: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:end:count"));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad("bad start"))?;
        let end: f64 = parts[1].parse().map_err(|_| bad("bad end"))?;
        let count: usize = parts[2].parse().map_err(|_| bad("bad count"))?;
        if count < 2 {
            return Err(bad("count must be at least 2"));
        }
        (0..count)
            .map(|k| start + (end - start) * k as f64 / (count - 1) as f64)
            .collect()
    } else {
        spec.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad("bad value")))
            .collect::<Result<_>>()?
    };
    for &eps in &grid {
        if !(0.0..=0.5).contains(&eps) {
            return Err(Error::RangeError { name: "eps", value: eps, lo: 0.0, hi: 0.5 });
        }
    }
    Ok(grid)
}

fn cmd_pr_sweep(eps_grid: &str, out: &Path) -> Result<i32> {
    let grid = parse_grid(eps_grid)?;
    let sat_hi = (2.0 - std::f64::consts::SQRT_2) / 4.0;
    let mut csv =
        String::from("eps,chsh_value,r_local,r_generalized,q_nl_min,neg_floor,neg_actual,saturation_gap\n");
    for &eps in &grid {
        let p = pr_box(eps)?;
        let chsh = bell_value(&p, &chsh_functional())?;
        let r_local = local_robustness(&p)?.value;
        let r_generalized = generalized_local_robustness(&p)?.value;
        let q_nl_min = best_local_approximation(&p)?.q_nl_min;
        let neg_floor = certify(&p)?.negativity_floor;
        let neg_actual = negativity(&pr_pseudostate(eps)?)?;
        let saturation_gap = if eps <= sat_hi {
            saturation_report(eps)?.gap
        } else {
            (neg_floor - neg_actual).abs()
        };
        csv.push_str(&format!(
            "{eps},{chsh},{r_local},{r_generalized},{q_nl_min},{neg_floor},{neg_actual},{saturation_gap}\n"
        ));
    }
    std::fs::write(out, &csv)?;
    println!("wrote {} rows to {}", grid.len(), out.display());
    Ok(0)
}

fn cmd_wire(box_file: &Path, wiring_file: &Path, out: Option<&Path>) -> Result<i32> {
    let bx: Box = read_json(box_file)?;
    let wiring: Wiring = read_json(wiring_file)?;
    let wired = apply_wiring(&bx, &wiring)?;
    let before = local_robustness(&bx)?.value;
    let after = local_robustness(&wired)?.value;
    println!("r_local before = {before}");
    println!("r_local after  = {after}");
    if after > before + 1e-8 {
        println!("monotonicity violated: {}", after - before);
        return Ok(3);
    }
    println!("monotone (tol 1e-8): {}", verdict(true));
    if let Some(path) = out {
        write_json(path, &wired)?;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_linspace() {
        let g = parse_grid("0:0.5:21").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert!((g[20] - 0.5).abs() < 1e-15);
        assert!((g[1] - 0.025).abs() < 1e-15);
    }

    #[test]
    fn grid_list_and_errors() {
        let g = parse_grid("0, 0.25,0.5").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5]);
        assert!(parse_grid("0:0.5").is_err());
        assert!(parse_grid("0.6").is_err());
        assert!(parse_grid("x").is_err());
    }
}
