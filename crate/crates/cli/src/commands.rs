use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use synaptic_core::battery::{self, BatteryConfig, InstanceRecord, VerificationReport};
use synaptic_core::{
    atom_structure, cbs_carriers, cbs_decompose, inequality_chain, inf_with_atom_complement,
    inf_with_projection, is_atom, pair_commutator_via_closure, restrict_cbs, spectral_resolution,
    Effect, InfimumBranch, Projection, SymmetricElement, ToleranceConfig,
};

use crate::input::{load_pair_input, load_projection, parse_element, read_json, tolerance, unwrap_record, CliError, Rows};
use crate::output::{field, matrix, to_json};

/// What a command produced: both renderings plus whether it counts as a
/// failure (exit 1) even though it ran to completion.
pub struct Rendered {
    pub json: String,
    pub text: String,
    pub failed: bool,
}

impl Rendered {
    fn ok<T: Serialize>(value: &T, text: String) -> Self {
        Rendered {
            json: to_json(value),
            text,
            failed: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TolFlags {
    pub rank: Option<f64>,
    pub comm: Option<f64>,
}

#[derive(Serialize)]
struct CarrierOut {
    rank: usize,
    matrix: Rows,
}

impl CarrierOut {
    fn of(p: &Projection) -> Self {
        CarrierOut {
            rank: p.rank(),
            matrix: p.element().to_rows(),
        }
    }
}

#[derive(Serialize)]
struct Carriers {
    c: CarrierOut,
    s: CarrierOut,
    j: CarrierOut,
    b: CarrierOut,
    cs: CarrierOut,
}

#[derive(Serialize)]
struct CornerOut {
    rank: usize,
    c: Rows,
    s: Rows,
    j: Rows,
    b: Rows,
    k: Rows,
}

#[derive(Serialize)]
struct DecomposeOut {
    dim: usize,
    commuting: bool,
    generic_position: bool,
    reconstruction_residual: f64,
    c: Rows,
    s: Rows,
    j: Rows,
    b: Rows,
    k: Rows,
    z: Rows,
    t: Rows,
    offdiag: Rows,
    carriers: Carriers,
    #[serde(skip_serializing_if = "Option::is_none")]
    corner: Option<CornerOut>,
}

pub fn decompose(input: &Path, q: Option<&Path>, flags: TolFlags) -> Result<Rendered, CliError> {
    let pair = load_pair_input(input)?;
    let tol = tolerance(pair.tol.as_ref(), flags.rank, flags.comm)?;
    let p = pair.projection(&tol)?;
    let e = pair.effect(&tol)?;
    let q = match q {
        Some(path) => Some(load_projection(path, pair.dim, &tol)?),
        None => pair.q_projection(&tol)?,
    };

    let d = cbs_decompose(&p, &e, &tol)?;
    let carriers = cbs_carriers(&d, &tol)?;
    let corner = match &q {
        Some(q) => {
            let cd = restrict_cbs(&d, q, &tol)?;
            Some(CornerOut {
                rank: q.rank(),
                c: cd.lift(|l| l.c.element()).to_rows(),
                s: cd.lift(|l| l.s.element()).to_rows(),
                j: cd.lift(|l| l.j.element()).to_rows(),
                b: cd.lift(|l| l.b.element()).to_rows(),
                k: cd.lift(|l| l.k.element()).to_rows(),
            })
        }
        None => None,
    };
    let out = DecomposeOut {
        dim: d.dim(),
        commuting: d.b_carrier.is_zero(),
        generic_position: d.generic_position(),
        reconstruction_residual: d.reconstruction_residual(),
        c: d.c.element().to_rows(),
        s: d.s.element().to_rows(),
        j: d.j.element().to_rows(),
        b: d.b.element().to_rows(),
        k: d.k.element().to_rows(),
        z: d.z.element().to_rows(),
        t: d.t.element().to_rows(),
        offdiag: d.offdiag.to_rows(),
        carriers: Carriers {
            c: CarrierOut::of(&carriers.c),
            s: CarrierOut::of(&carriers.s),
            j: CarrierOut::of(&carriers.j),
            b: CarrierOut::of(&d.b_carrier),
            cs: CarrierOut::of(&carriers.cs),
        },
        corner,
    };

    let mut text = String::new();
    field(&mut text, "dim", out.dim);
    field(&mut text, "p commutes with e", out.commuting);
    field(&mut text, "generic position", out.generic_position);
    field(&mut text, "reconstruction residual", format!("{:.3e}", out.reconstruction_residual));
    field(
        &mut text,
        "carrier ranks c° s° j° b°",
        format!(
            "{} {} {} {}",
            out.carriers.c.rank, out.carriers.s.rank, out.carriers.j.rank, out.carriers.b.rank
        ),
    );
    for (name, rows) in [("c", &out.c), ("s", &out.s), ("j", &out.j), ("b", &out.b), ("k", &out.k)] {
        matrix(&mut text, name, rows);
    }
    if let Some(c) = &out.corner {
        field(&mut text, "corner rank", c.rank);
        matrix(&mut text, "cq", &c.c);
        matrix(&mut text, "sq", &c.s);
        matrix(&mut text, "bq", &c.b);
    }
    Ok(Rendered::ok(&out, text))
}

#[derive(Serialize)]
struct CommutatorOut {
    dim: usize,
    commutator: CarrierOut,
    b_carrier: CarrierOut,
    c_carrier_rank: usize,
    s_carrier_rank: usize,
    chain_holds: bool,
    closure_agrees: bool,
    totally_noncompatible: bool,
    generic_position: bool,
    e_commutes_with_b_carrier: bool,
    compatible_residual: f64,
}

pub fn commutator(input: &Path, flags: TolFlags) -> Result<Rendered, CliError> {
    let pair = load_pair_input(input)?;
    let tol = tolerance(pair.tol.as_ref(), flags.rank, flags.comm)?;
    let p = pair.projection(&tol)?;
    let e = pair.effect(&tol)?;
    let report = inequality_chain(&p, &e, &tol)?;
    let closure = pair_commutator_via_closure(&p, &e, &tol)?;
    let out = CommutatorOut {
        dim: pair.dim,
        commutator: CarrierOut::of(&report.r),
        b_carrier: CarrierOut::of(&report.b_carrier),
        c_carrier_rank: report.c_carrier.rank(),
        s_carrier_rank: report.s_carrier.rank(),
        chain_holds: report.chain_ok,
        closure_agrees: closure.approx_eq(&report.r, &tol),
        totally_noncompatible: report.totally_noncompatible,
        generic_position: report.generic_position,
        e_commutes_with_b_carrier: report.e_commutes_with_b_carrier,
        compatible_residual: report.splitting.compatible_residual,
    };
    if !out.closure_agrees {
        return Err(CliError::Check(format!(
            "[p,e] by lattice formula has rank {}, by closure rank {}",
            report.r.rank(),
            closure.rank()
        )));
    }

    let mut text = String::new();
    field(&mut text, "rank [p,e]", out.commutator.rank);
    field(&mut text, "rank b°", out.b_carrier.rank);
    field(&mut text, "rank c° s°", format!("{} {}", out.c_carrier_rank, out.s_carrier_rank));
    field(&mut text, "b° ≤ [p,e] ≤ c° ∧ s°", out.chain_holds);
    field(&mut text, "totally noncompatible", out.totally_noncompatible);
    field(&mut text, "generic position", out.generic_position);
    field(&mut text, "e commutes with b°", out.e_commutes_with_b_carrier);
    field(&mut text, "r⊥ corner residual", format!("{:.3e}", out.compatible_residual));
    matrix(&mut text, "[p,e]", &out.commutator.matrix);
    Ok(Rendered::ok(&out, text))
}

#[derive(Serialize)]
struct InfimumOut {
    dim: usize,
    /// `"atom_complement"` for `e ∧ p⊥` with an atom `p`, else `"projection"`.
    method: &'static str,
    q_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch: Option<InfimumBranch>,
    infimum: Rows,
    trace: f64,
}

pub fn infimum(input: &Path, q: Option<&Path>, flags: TolFlags) -> Result<Rendered, CliError> {
    let pair = load_pair_input(input)?;
    let tol = tolerance(pair.tol.as_ref(), flags.rank, flags.comm)?;
    let e = pair.effect(&tol)?;
    let q = match q {
        Some(path) => Some(load_projection(path, pair.dim, &tol)?),
        None => pair.q_projection(&tol)?,
    };
    let out = match q {
        Some(q) => projection_infimum(&e, &q, &tol)?,
        None => {
            let p = pair.projection(&tol)?;
            if is_atom(&p) {
                let record = inf_with_atom_complement(&p, &e, &tol)?;
                let beta = match record.branch {
                    InfimumBranch::General if !cbs_decompose(&p, &e, &tol)?.b_carrier.is_zero() => {
                        Some(atom_structure(&p, &e, &tol)?.beta)
                    }
                    _ => None,
                };
                InfimumOut {
                    dim: pair.dim,
                    method: "atom_complement",
                    q_rank: pair.dim - 1,
                    alpha: Some(record.alpha),
                    beta,
                    branch: Some(record.branch),
                    trace: record.infimum.element().trace(),
                    infimum: record.infimum.element().to_rows(),
                }
            } else {
                projection_infimum(&e, &p.ortho(), &tol)?
            }
        }
    };

    let mut text = String::new();
    field(&mut text, "method", out.method);
    field(&mut text, "rank q", out.q_rank);
    if let Some(a) = out.alpha {
        field(&mut text, "α", a);
    }
    if let Some(b) = out.beta {
        field(&mut text, "β", b);
    }
    if let Some(b) = out.branch {
        field(&mut text, "branch", if b == InfimumBranch::AlphaZero { "α = 0" } else { "α > 0" });
    }
    field(&mut text, "trace", out.trace);
    matrix(&mut text, "e ∧ q", &out.infimum);
    Ok(Rendered::ok(&out, text))
}

fn projection_infimum(e: &Effect, q: &Projection, tol: &ToleranceConfig) -> Result<InfimumOut, CliError> {
    let inf = inf_with_projection(e, q, tol)?;
    Ok(InfimumOut {
        dim: e.dim(),
        method: "projection",
        q_rank: q.rank(),
        alpha: None,
        beta: None,
        branch: None,
        trace: inf.element().trace(),
        infimum: inf.element().to_rows(),
    })
}

/// `spectral` only needs `e`; a bare `{"dim", "e"}` file is enough.
#[derive(Deserialize)]
struct ElementInput {
    dim: usize,
    e: Rows,
    #[serde(default)]
    tol: Option<ToleranceConfig>,
}

#[derive(Serialize)]
struct SpectralOut {
    dim: usize,
    thresholds: Vec<f64>,
    cuts: Vec<CarrierOut>,
}

pub fn spectral(input: &Path, flags: TolFlags) -> Result<Rendered, CliError> {
    let value = unwrap_record(read_json(input)?);
    let parsed: ElementInput =
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let tol = tolerance(parsed.tol.as_ref(), flags.rank, flags.comm)?;
    let a = parse_element("e", &parsed.e, parsed.dim, &tol)?;
    let res = spectral_resolution(&a, &tol)?;
    let out = SpectralOut {
        dim: parsed.dim,
        thresholds: res.thresholds.clone(),
        cuts: res.cuts.iter().map(CarrierOut::of).collect(),
    };
    let mut text = String::new();
    for (lambda, cut) in out.thresholds.iter().zip(&out.cuts) {
        field(&mut text, &format!("λ = {lambda}"), format!("rank {}", cut.rank));
    }
    Ok(Rendered::ok(&out, text))
}

/// `A..B`, `A..=B` (both inclusive) or a single `A`.
pub fn parse_dims(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::Usage(format!("--dims expects A..B, got {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let a = num(s)?;
            (a, a)
        }
    };
    if a < 2 || b < a {
        return Err(CliError::Usage(format!(
            "--dims needs 2 <= A <= B, got {a}..{b}"
        )));
    }
    Ok(a..=b)
}

pub struct VerifyArgs<'a> {
    pub seed: u64,
    pub trials: u64,
    pub dims: &'a str,
    pub check: Option<&'a str>,
    pub input: Option<&'a Path>,
    pub report: Option<&'a Path>,
}

pub fn verify(args: VerifyArgs<'_>, flags: TolFlags) -> Result<Rendered, CliError> {
    let tol = tolerance(None, flags.rank, flags.comm)?;
    if let Some(c) = args.check {
        if !battery::all_checks().iter().any(|k| k.matches(c)) {
            return Err(CliError::Usage(format!("no check matches {c:?}")));
        }
    }
    let started = Instant::now();
    let report = match args.input {
        Some(path) => {
            let value = unwrap_record(read_json(path)?);
            let record: InstanceRecord =
                serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            battery::replay(&record, args.check, &tol)?
        }
        None => {
            if args.trials == 0 {
                return Err(CliError::Usage("--trials must be at least 1".into()));
            }
            let config = BatteryConfig {
                seed: args.seed,
                trials: args.trials,
                dims: parse_dims(args.dims)?,
                filter: args.check.map(String::from),
            };
            battery::run_battery(&config, &tol)?
        }
    };
    eprintln!("verify: {:.2}s", started.elapsed().as_secs_f64());

    let json = to_json(&report);
    if let Some(path) = args.report {
        fs::write(path, &json).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(Rendered {
        text: verify_text(&report),
        json,
        failed: !report.all_passed(),
    })
}

fn verify_text(report: &VerificationReport) -> String {
    let mut text = String::new();
    let width = report.checks.keys().map(|k| k.len()).max().unwrap_or(0);
    for (name, s) in &report.checks {
        let status = if s.failed == 0 { "PASS" } else { "FAIL" };
        text.push_str(&format!(
            "{status}  {name:<width$}  {:>6} passed  {:>4} failed  worst {:.2e}\n",
            s.passed, s.failed, s.worst_residual
        ));
    }
    for f in &report.failures {
        text.push_str(&format!("  {} trial {} (dim {}): {}\n", f.check, f.trial, f.instance.dim, f.message));
    }
    text.push_str(&format!(
        "{} checks, {} passed, {} failed (seed {}, {} trials, dims {:?})\n",
        report.total_checks, report.passed, report.failed, report.seed, report.trials, report.dims
    ));
    text
}

const R3_GOLDEN: &str = include_str!("../golden/r3.json");

#[derive(Deserialize)]
struct Golden {
    dim: usize,
    p: Rows,
    e: Rows,
    commutator_rank: usize,
    b_carrier_rank: usize,
    b_carrier: Rows,
    totally_noncompatible: bool,
    generic_position: bool,
    e_commutes_with_b_carrier: bool,
    alpha: f64,
    beta: f64,
    spectral_thresholds: Vec<f64>,
    spectral_cuts: Vec<Rows>,
    infimum: Rows,
    infimum_trace: f64,
}

#[derive(Serialize)]
struct GoldenCheck {
    name: &'static str,
    passed: bool,
    expected: String,
    actual: String,
}

#[derive(Serialize)]
struct ExampleOut {
    all_passed: bool,
    checks: Vec<GoldenCheck>,
}

/// Matrices and scalars in the worked example are compared to this
/// absolute tolerance.
const GOLDEN_TOL: f64 = 1e-12;

fn max_diff(a: &Rows, b: &Rows) -> f64 {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.len() != y.len()) {
        return f64::INFINITY;
    }
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn example_r3(golden: Option<&Path>, flags: TolFlags) -> Result<Rendered, CliError> {
    let source = match golden {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => R3_GOLDEN.to_string(),
    };
    let g: Golden = serde_json::from_str(&source).map_err(|e| CliError::Input(format!("golden file: {e}")))?;
    let tol = tolerance(None, flags.rank, flags.comm)?;
    let p = Projection::new(
        SymmetricElement::from_rows(&g.p).map_err(|e| CliError::Input(format!("golden p: {e}")))?,
        &tol,
    )?;
    let e = Effect::new(
        SymmetricElement::from_rows(&g.e).map_err(|e| CliError::Input(format!("golden e: {e}")))?,
        &tol,
    )?;

    let report = inequality_chain(&p, &e, &tol)?;
    let atom = atom_structure(&p, &e, &tol)?;
    let record = inf_with_atom_complement(&p, &e, &tol)?;
    let res = spectral_resolution(e.element(), &tol)?;
    let cut_rows: Vec<Rows> = res.cuts.iter().map(|c| c.element().to_rows()).collect();
    let cuts_diff = if cut_rows.len() == g.spectral_cuts.len() {
        cut_rows.iter().zip(&g.spectral_cuts).map(|(a, b)| max_diff(a, b)).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let thresholds_diff = if res.thresholds.len() == g.spectral_thresholds.len() {
        res.thresholds
            .iter()
            .zip(&g.spectral_thresholds)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let mut checks = Vec::new();
    let mut exact = |name: &'static str, expected: String, actual: String| {
        checks.push(GoldenCheck {
            name,
            passed: expected == actual,
            expected,
            actual,
        });
    };
    exact("dim", g.dim.to_string(), p.dim().to_string());
    exact("rank [p,e]", g.commutator_rank.to_string(), report.r.rank().to_string());
    exact("rank b°", g.b_carrier_rank.to_string(), report.b_carrier.rank().to_string());
    exact(
        "[p,e] = 1",
        g.totally_noncompatible.to_string(),
        report.totally_noncompatible.to_string(),
    );
    exact("b° = 1", g.generic_position.to_string(), report.generic_position.to_string());
    exact(
        "e commutes with b°",
        g.e_commutes_with_b_carrier.to_string(),
        report.e_commutes_with_b_carrier.to_string(),
    );
    let mut close = |name: &'static str, expected: String, actual: String, diff: f64| {
        checks.push(GoldenCheck {
            name,
            passed: diff <= GOLDEN_TOL,
            expected,
            actual,
        });
    };
    close(
        "b°",
        format!("{:?}", g.b_carrier),
        format!("{:?}", report.b_carrier.element().to_rows()),
        max_diff(&g.b_carrier, &report.b_carrier.element().to_rows()),
    );
    close("α", g.alpha.to_string(), record.alpha.to_string(), (g.alpha - record.alpha).abs());
    close("β", g.beta.to_string(), atom.beta.to_string(), (g.beta - atom.beta).abs());
    close(
        "spectral thresholds",
        format!("{:?}", g.spectral_thresholds),
        format!("{:?}", res.thresholds),
        thresholds_diff,
    );
    close("spectral cuts", format!("{:?}", g.spectral_cuts), format!("{cut_rows:?}"), cuts_diff);
    let inf_rows = record.infimum.element().to_rows();
    close(
        "e ∧ p⊥",
        format!("{:?}", g.infimum),
        format!("{inf_rows:?}"),
        max_diff(&g.infimum, &inf_rows),
    );
    let trace = record.infimum.element().trace();
    close(
        "trace(e ∧ p⊥)",
        g.infimum_trace.to_string(),
        trace.to_string(),
        (g.infimum_trace - trace).abs(),
    );

    let out = ExampleOut {
        all_passed: checks.iter().all(|c| c.passed),
        checks,
    };

    let mut text = String::new();
    text.push_str(&format!("[p,e] = {}\n", if report.totally_noncompatible { "1" } else { "proper" }));
    text.push_str(&format!("rank(b°) = {}\n", report.b_carrier.rank()));
    text.push_str(&format!("α = {}\n", record.alpha));
    text.push_str(&format!("β = {}\n", atom.beta));
    text.push_str(&format!("trace(e ∧ p⊥) = {trace}\n"));
    matrix(&mut text, "e ∧ p⊥", &inf_rows);
    let width = out.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    for c in &out.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        if c.passed {
            text.push_str(&format!("{status}  {}\n", c.name));
        } else {
            let pad = " ".repeat(width - c.name.chars().count());
            text.push_str(&format!("{status}  {}{pad}  expected {} got {}\n", c.name, c.expected, c.actual));
        }
    }
    Ok(Rendered {
        json: to_json(&out),
        text,
        failed: !out.all_passed,
    })
}
