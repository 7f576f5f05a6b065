//! Batch front end: load chart or constraint specs from JSON, run any
//! pipeline stage, and emit machine-readable reports plus a short
//! human-readable summary. Reports are deterministic for a given input
//! and seed; timing goes to stderr only.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::brst::{ClassicalBRSTSetup, QuantumBRSTSetup, OPEN_TRUNC};
use crate::error::Error;
use crate::fedosov::{extract_mt, rothstein_bracket_both, FedosovState};
use crate::geometry::ChartGeometry;
use crate::report::Report;
use crate::sample::Sampler;
use crate::superalgebra::AlgebraElement;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SUPSTAR_OUT_DIR";

#[derive(Parser)]
#[command(name = "supstar", version, about = "Exact deformation quantization over super-Poisson chart data")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for JSON outputs (falls back to SUPSTAR_OUT_DIR, else stdout only)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a chart or constraint spec
    Validate { spec: PathBuf },
    /// Star product of two elements with the M_t coefficient table
    Star {
        spec: PathBuf,
        phi: PathBuf,
        psi: PathBuf,
        /// λ-order of the result
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// Direct curvature-corrected super-Poisson bracket, both closed forms
    Bracket { spec: PathBuf, phi: PathBuf, psi: PathBuf },
    /// Taylor-series lift of an element
    Taylor {
        spec: PathBuf,
        phi: PathBuf,
        /// total-degree truncation
        #[arg(long, default_value_t = 6)]
        trunc: u32,
    },
    /// The recursion element r of the flat derivation
    FedosovR {
        spec: PathBuf,
        #[arg(long, default_value_t = 6)]
        trunc: u32,
    },
    /// Run seeded property suites
    Check {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 6)]
        trunc: u32,
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// BRST checks and the bounded-degree cohomology probe
    Brst {
        spec: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        probe_degree: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        trials: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Algebra,
    Geometry,
    Fedosov,
    Brst,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Quantum,
    Classical,
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

enum Spec {
    Chart(ChartGeometry),
    Quantum(QuantumBRSTSetup),
    Classical(ClassicalBRSTSetup),
}

fn load_spec(path: &Path) -> Result<Spec, Error> {
    let v = read_json(path)?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("spec must be a JSON object".into()))?;
    if obj.contains_key("omega") {
        Ok(Spec::Chart(ChartGeometry::from_json(&v)?))
    } else if obj.contains_key("structure") {
        Ok(Spec::Quantum(QuantumBRSTSetup::from_json(&v)?))
    } else if obj.contains_key("constraints") {
        Ok(Spec::Classical(ClassicalBRSTSetup::from_json(&v)?))
    } else {
        Err(Error::Parse("spec is neither a chart (omega) nor a BRST setup (structure/constraints)".into()))
    }
}

fn chart_spec(path: &Path) -> Result<ChartGeometry, Error> {
    match load_spec(path)? {
        Spec::Chart(g) => Ok(g),
        _ => Err(Error::Setup("this command needs a chart spec".into())),
    }
}

fn load_element(path: &Path, g: &ChartGeometry) -> Result<AlgebraElement, Error> {
    AlgebraElement::from_json(&read_json(path)?, g.dim, g.rank)
}

fn report_json(rep: &Report, extra: Value) -> Value {
    let mut out = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "pass": rep.pass(),
        "checks": rep.checks.iter().map(|c| json!({
            "name": c.name, "pass": c.pass, "detail": c.detail,
        })).collect::<Vec<_>>(),
    });
    if let (Some(o), Some(e)) = (out.as_object_mut(), extra.as_object()) {
        for (k, v) in e {
            o.insert(k.clone(), v.clone());
        }
    }
    out
}

fn emit(name: &str, out_dir: &Option<PathBuf>, payload: &Value) -> Result<(), Error> {
    let dir = out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    let text = serde_json::to_string_pretty(payload).expect("serializable");
    match dir {
        Some(d) => {
            std::fs::create_dir_all(&d)?;
            let path = d.join(format!("{name}.json"));
            std::fs::write(&path, text + "\n")?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let code = match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    eprintln!("elapsed: {:?}", started.elapsed());
    code
}

fn dispatch(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Validate { spec } => {
            let rep = match load_spec(spec)? {
                Spec::Chart(g) => g.validate(),
                Spec::Quantum(s) => s.validate(),
                Spec::Classical(s) => s.validate(),
            };
            println!("{rep}");
            emit("validate", &cli.out, &report_json(&rep, json!({})))?;
            Ok(if rep.pass() { 0 } else { 1 })
        }
        Command::Star { spec, phi, psi, order } => {
            let g = chart_spec(spec)?;
            let trunc = FedosovState::required_trunc(g.rank, *order);
            let state = FedosovState::build(g.clone(), trunc)?;
            let f = load_element(phi, &g)?;
            let h = load_element(psi, &g)?;
            let star = state.star(&f, &h, *order)?;
            let mts = extract_mt(&star, *order);
            println!("star product through λ-order {order} (truncation {trunc})");
            for (t, m) in mts.iter().enumerate() {
                println!("  M_{t}: {} term(s)", m.num_terms());
            }
            let payload = json!({
                "tool_version": env!("CARGO_PKG_VERSION"),
                "order": order,
                "trunc": trunc,
                "star": star.to_json(),
                "m": mts.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
            });
            emit("star", &cli.out, &payload)?;
            Ok(0)
        }
        Command::Bracket { spec, phi, psi } => {
            let g = chart_spec(spec)?;
            let f = load_element(phi, &g)?;
            let h = load_element(psi, &g)?;
            let (two, one) = rothstein_bracket_both(&g, &f, &h)?;
            let mut rep = Report::new();
            rep.record("closed forms agree", two == one, "the two bracket forms differ");
            println!("{rep}");
            let payload = report_json(&rep, json!({ "bracket": two.to_json() }));
            emit("bracket", &cli.out, &payload)?;
            Ok(if rep.pass() { 0 } else { 1 })
        }
        Command::Taylor { spec, phi, trunc } => {
            let g = chart_spec(spec)?;
            let state = FedosovState::build(g.clone(), *trunc)?;
            let f = load_element(phi, &g)?;
            let tau = state.taylor(&f)?;
            let dtau = state.apply_d(&tau)?;
            let mut rep = Report::new();
            let flat = (0..=trunc.saturating_sub(1))
                .all(|d| dtau.total_degree_component(d).is_zero());
            rep.record("taylor series is flat", flat, "Dτ(φ) has a nonzero exact component");
            rep.record("projection recovers the input", tau.sigma_c() == f.retruncate(tau.trunc()), "σ(τ(φ)) != φ");
            println!("{rep}");
            let payload = report_json(&rep, json!({ "trunc": trunc, "taylor": tau.to_json() }));
            emit("taylor", &cli.out, &payload)?;
            Ok(if rep.pass() { 0 } else { 1 })
        }
        Command::FedosovR { spec, trunc } => {
            let g = chart_spec(spec)?;
            let state = FedosovState::build(g.clone(), *trunc)?;
            println!("r through total degree {trunc}");
            for d in 0..=*trunc as usize {
                let part = state.r_part(d);
                if !part.is_zero() {
                    println!("  degree {d}: {} term(s)", part.num_terms());
                }
            }
            let payload = json!({
                "tool_version": env!("CARGO_PKG_VERSION"),
                "trunc": trunc,
                "r": state.r().to_json(),
            });
            emit("fedosov-r", &cli.out, &payload)?;
            Ok(0)
        }
        Command::Check { spec, suite, seed, trials, trunc, order } => {
            let mut rep = Report::new();
            match load_spec(spec)? {
                Spec::Chart(g) => {
                    if matches!(suite, Suite::Algebra | Suite::All) {
                        rep.merge(crate::suites::algebra_suite(&g, *trunc, *seed, *trials));
                        rep.merge(crate::suites::circ_suite(&g, *trunc, *seed, *trials)?);
                    }
                    if matches!(suite, Suite::Geometry | Suite::All) {
                        rep.merge(crate::suites::geometry_suite(&g, *trunc, *seed, *trials));
                    }
                    if matches!(suite, Suite::Fedosov | Suite::All) {
                        rep.merge(crate::suites::fedosov_suite(&g, *trunc, *seed, *trials)?);
                        rep.merge(crate::suites::star_suite(&g, *order, *seed, *trials)?);
                        rep.merge(crate::suites::bracket_suite(&g, *seed, *trials)?);
                        rep.merge(crate::suites::headline_suite(&g, *seed, *trials)?);
                    }
                    if matches!(suite, Suite::Brst) {
                        return Err(Error::Setup("the brst suite needs a BRST spec".into()));
                    }
                }
                Spec::Quantum(s) => rep.merge(quantum_report(&s, *seed, *trials)?),
                Spec::Classical(s) => rep.merge(classical_report(&s, *seed, *trials, 2)?.0),
            }
            println!("{rep}");
            let payload = report_json(&rep, json!({ "seed": seed, "trials": trials, "trunc": trunc }));
            emit("check", &cli.out, &payload)?;
            Ok(if rep.pass() { 0 } else { 1 })
        }
        Command::Brst { spec, mode, probe_degree, seed, trials } => {
            match (load_spec(spec)?, mode) {
                (Spec::Quantum(s), Mode::Quantum) => {
                    let rep = quantum_report(&s, *seed, *trials)?;
                    println!("{rep}");
                    let payload = report_json(&rep, json!({ "seed": seed, "trials": trials }));
                    emit("brst", &cli.out, &payload)?;
                    Ok(if rep.pass() { 0 } else { 1 })
                }
                (Spec::Classical(s), Mode::Classical) => {
                    let (rep, rows, theta) = classical_report(&s, *seed, *trials, *probe_degree)?;
                    println!("{rep}");
                    println!("cohomology probe (poly degree ≤ {probe_degree}):");
                    println!("  gh   dim  rank  closed  cohomology");
                    for row in &rows {
                        println!(
                            "  {:3} {:5} {:5} {:7} {:5}",
                            row.ghost_number, row.dimension, row.rank, row.closed, row.cohomology
                        );
                    }
                    let payload = report_json(
                        &rep,
                        json!({
                            "seed": seed,
                            "probe_degree": probe_degree,
                            "charge": theta.to_json(),
                            "probe": rows,
                        }),
                    );
                    emit("brst", &cli.out, &payload)?;
                    Ok(if rep.pass() { 0 } else { 1 })
                }
                _ => Err(Error::Setup("spec kind does not match --mode".into())),
            }
        }
    }
}

/// Quantum BRST checks: setup invariants, `Θ∗Θ = 0`, the ghost-number
/// derivation identity, and `Q² = 0` on sampled elements.
pub fn quantum_report(s: &QuantumBRSTSetup, seed: u64, trials: u32) -> Result<Report, Error> {
    let mut rep = s.validate();
    if !rep.pass() {
        return Ok(rep);
    }
    let theta = s.charge()?;
    rep.record("charge squares to zero", s.star(&theta, &theta)?.is_zero(), "Θ∗Θ != 0");
    let g = &s.geom;
    let mut sampler = Sampler::new(seed);
    let mut gh_ok = true;
    let mut q_ok = true;
    for _ in 0..trials {
        let phi = sampler.observable(g.dim, g.rank, OPEN_TRUNC, 2);
        gh_ok &= s.inner_ghost_number(&phi)? == crate::brst::apply_ghost_number(&phi, s.lie_dim);
        for (key, coeff) in phi.terms() {
            // one bidegree-homogeneous piece at a time
            let mut hom = AlgebraElement::zero(g.dim, g.rank, OPEN_TRUNC);
            hom.add_term(key.clone(), coeff);
            let q2 = s.operator(&theta, &s.operator(&theta, &hom)?)?;
            q_ok &= q2.is_zero();
        }
    }
    rep.record("ghost number is the inner derivation", gh_ok, "Gh != (1/iλ)ad(γ)");
    rep.record("operator squares to zero", q_ok, "Q² != 0");
    Ok(rep)
}

/// Classical BRST checks: setup invariants, Koszul identities on sampled
/// elements, charge closure, `Q² = 0`, and the cohomology probe.
pub fn classical_report(
    s: &ClassicalBRSTSetup,
    seed: u64,
    trials: u32,
    probe_degree: u32,
) -> Result<(Report, Vec<crate::brst::ProbeRow>, AlgebraElement), Error> {
    let mut rep = s.validate();
    if !rep.pass() {
        return Ok((rep, Vec::new(), AlgebraElement::zero(s.geom.dim, s.geom.rank, OPEN_TRUNC)));
    }
    let g = &s.geom;
    let mut sampler = Sampler::new(seed);
    let mut dd = true;
    let mut homotopy = true;
    for _ in 0..trials {
        let w = sampler
            .observable(g.dim, g.rank, OPEN_TRUNC, 2)
            .filter_terms(|k| crate::brst::ghost_degree(k.eset, s.n) == 0);
        dd &= s.koszul_boundary(&s.koszul_boundary(&w)?)?.is_zero();
        let lhs = s
            .koszul_boundary(&s.koszul_homotopy(&w)?)?
            .add(&s.koszul_homotopy(&s.koszul_boundary(&w)?)?);
        homotopy &= lhs == w.sub(&s.koszul_restriction(&w)?);
    }
    rep.record("koszul boundary squares to zero", dd, "∂² != 0");
    rep.record("koszul homotopy identity", homotopy, "h∂+∂h != 1−ε");
    let theta = s.charge()?;
    rep.record(
        "charge bracket vanishes",
        rothstein_bracket_both(g, &theta, &theta)?.0.is_zero(),
        "{Θ,Θ}_R != 0",
    );
    let mut q_ok = true;
    for _ in 0..trials {
        let phi = sampler.observable(g.dim, g.rank, OPEN_TRUNC, 2);
        q_ok &= s.operator(&theta, &s.operator(&theta, &phi)?)?.is_zero();
    }
    rep.record("operator squares to zero", q_ok, "Q² != 0");
    let rows = s.cohomology_probe(&theta, probe_degree)?;
    Ok((rep, rows, theta))
}
