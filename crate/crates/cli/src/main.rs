//! `fundsys`: analyse random dynamical systems with place-dependent probabilities.
//!
//! Exit status: 0 on success, 1 on parse or validation failure, 2 when a
//! budget is exhausted, 3 when an internal invariant is violated.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use fundsys::dynamics::{
    class_frequencies, contraction_estimate, ergodic_average, rate_experiment, simulate_with_cap, Observable,
    RateParams, DEFAULT_DENOMINATOR_BITS,
};
use fundsys::graph::{exact_first_moment, stationary_exact, Digraph};
use fundsys::measures::{enumerate_cylinders, xi_estimate, Verdict, XiParams, DEFAULT_BUDGET};
use fundsys::model::{parse_system, validate_system, Point};
use fundsys::partition::{
    fundamental_partition, lift_check, operator_discrepancy, FundamentalPartition, PartitionParams,
    DEFAULT_BREAKPOINT_CAP,
};
use fundsys::scalar::{fmt_exact, parse_rational};
use fundsys::specimens;
use fundsys::{Error, ExactPoint, ExactSystem, Rational, Scalar};

#[derive(Parser)]
#[command(name = "fundsys", version, about = "Fundamental Markov systems of random dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Directory for report and CSV files; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write (or print) the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a system file.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// List cylinder masses P_x([w]) for all words of one length.
    Cylinders {
        file: PathBuf,
        /// Start point: `p/q`, a decimal, or `irr:<value>` for a tagged irrational.
        #[arg(long)]
        x: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Keep zero-mass words.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Evidence for mutual absolute continuity of P_x and P_y.
    Xi {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        xi: XiArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Markov partition, merge certificates and the fundamental system.
    Partition {
        file: PathBuf,
        #[command(flatten)]
        xi: XiArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Graph predicates, stationary weights and first moments.
    Graph {
        file: PathBuf,
        #[command(flatten)]
        xi: XiArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate an orbit; report ergodic averages and class frequencies.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        steps: usize,
        /// Observables to average: `x`, `x^2`, `poly(c0,c1,..)`, `ind(a,b]`, or a constant.
        #[arg(long = "f", default_value = "x")]
        observables: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_DENOMINATOR_BITS)]
        cap_bits: u64,
        #[command(flatten)]
        xi: XiArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Empirical W1 convergence rate of a point cloud.
    Rate {
        /// System file; defaults to the two-map step system with parameter `--b`.
        file: Option<PathBuf>,
        #[arg(long, default_value = "1/2")]
        b: String,
        /// Use the constant-probability variant (p0 = b everywhere).
        #[arg(long)]
        constant: bool,
        #[arg(long, default_value = "1")]
        x0: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4000)]
        atoms: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        burn_in: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct XiArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n_exact: usize,
    #[arg(long, default_value_t = 2000)]
    n_mc: usize,
    #[arg(long, default_value_t = 4000)]
    samples: usize,
    #[arg(long, default_value_t = 4.0)]
    drift_z: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = DEFAULT_BREAKPOINT_CAP)]
    breakpoints: usize,
}

impl XiArgs {
    fn params(&self) -> Result<XiParams> {
        for (name, v) in [("n-mc", self.n_mc), ("samples", self.samples), ("breakpoints", self.breakpoints)] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("--{name} must be positive")).into());
            }
        }
        Ok(XiParams {
            n_exact: self.n_exact,
            n_mc: self.n_mc,
            num_samples: self.samples,
            drift_z: self.drift_z,
            budget: self.budget,
            breakpoint_cap: self.breakpoints,
            ..XiParams::new(self.seed)
        })
    }

    fn partition_params(&self) -> Result<PartitionParams> {
        Ok(PartitionParams { breakpoint_cap: self.breakpoints, xi: self.params()? })
    }
}

/// A finished report: plain text, its JSON mirror, and extra CSV files.
struct Report {
    text: String,
    json: Value,
    files: Vec<(&'static str, String)>,
    /// Nonzero when the report itself records a failure (validation).
    status: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_budget() => 2,
        Some(err) if err.is_invariant_violation() => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8> {
    let (report, output) = match cli.command {
        Command::Validate { file, output } => (validate(&file)?, output),
        Command::Cylinders { file, x, depth, budget, all, output } => {
            (cylinders(&load(&file)?, &parse_point(&x)?, depth, budget, all)?, output)
        }
        Command::Xi { file, x, y, xi, output } => {
            (xi_report(&load(&file)?, &parse_point(&x)?, &parse_point(&y)?, &xi.params()?)?, output)
        }
        Command::Partition { file, xi, output } => (partition(&load(&file)?, &xi.partition_params()?)?, output),
        Command::Graph { file, xi, output } => (graph(&load(&file)?, &xi.partition_params()?)?, output),
        Command::Simulate { file, x0, steps, observables, cap_bits, xi, output } => {
            let fs = observables
                .iter()
                .map(|s| Ok((s.clone(), s.parse::<Observable>()?)))
                .collect::<Result<Vec<_>>>()?;
            let spec = load(&file)?;
            (simulate(&spec, &parse_point(&x0)?, steps, &fs, cap_bits, &xi.partition_params()?)?, output)
        }
        Command::Rate { file, b, constant, x0, seed, atoms, n_max, burn_in, output } => {
            let params = RateParams { atoms, n_max, burn_in, seed };
            (rate(file.as_deref(), &b, constant, &x0, &params)?, output)
        }
    };
    emit(&report, &output)?;
    Ok(report.status)
}

fn emit(report: &Report, output: &Output) -> Result<()> {
    let json_text = serde_json::to_string_pretty(&report.json)? + "\n";
    match &output.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_file(dir, "report.txt", &report.text)?;
            for (name, body) in &report.files {
                write_file(dir, name, body)?;
            }
            if output.json {
                write_file(dir, "report.json", &json_text)?;
            }
            print!("{}", report.text);
        }
        None if output.json => print!("{json_text}"),
        None => print!("{}", report.text),
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
}

fn read_system(path: &Path) -> Result<ExactSystem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_system(&text)?)
}

/// Parses and validates; validation issues become an error.
fn load(path: &Path) -> Result<ExactSystem> {
    let spec = read_system(path)?;
    validate_system(&spec).into_result()?;
    Ok(spec)
}

fn parse_point(s: &str) -> Result<ExactPoint> {
    let bad = || Error::InvalidArgument(format!("`{s}` is not a point (use p/q, a decimal, or irr:<value>)"));
    match s.trim().strip_prefix("irr:") {
        Some(v) => Ok(Point::irrational(parse_rational(v).ok_or_else(bad)?)),
        None => Ok(Point::rational(parse_rational(s).ok_or_else(bad)?)),
    }
}

fn q(r: &Rational) -> String {
    fmt_exact(r)
}

fn point_string(p: &ExactPoint) -> String {
    if p.irrational {
        format!("irr:{}", q(&p.value))
    } else {
        q(&p.value)
    }
}

fn validate(path: &Path) -> Result<Report> {
    let spec = read_system(path)?;
    let report = validate_system(&spec);
    let mut text = String::new();
    let mut csv = String::from("cell,points,sum\n");
    let mut cells = Vec::new();
    for c in &report.cells {
        let points = match c.irrational {
            None => "all",
            Some(true) => "irrationals",
            Some(false) => "rationals",
        };
        let _ = writeln!(csv, "\"{}\",{points},{}", c.cell, q(&c.sum));
        cells.push(json!({ "cell": c.cell.to_string(), "points": points, "sum": q(&c.sum) }));
    }
    let issues: Vec<String> = report.issues.iter().map(ToString::to_string).collect();
    let _ = writeln!(text, "edges: {}", spec.edges.len());
    let _ = writeln!(text, "cells checked: {}", report.cells.len());
    if issues.is_empty() {
        let _ = writeln!(text, "status: OK");
    } else {
        let _ = writeln!(text, "status: INVALID");
        for i in &issues {
            let _ = writeln!(text, "  {i}");
        }
    }
    let status = if issues.is_empty() { 0 } else { 1 };
    Ok(Report {
        text,
        json: json!({ "ok": issues.is_empty(), "issues": issues, "cells": cells }),
        files: vec![("cell_sums.csv", csv)],
        status,
    })
}

fn cylinders(spec: &ExactSystem, x: &ExactPoint, depth: usize, budget: u64, all: bool) -> Result<Report> {
    let words = enumerate_cylinders(spec, x, depth, budget, all)?;
    let mut csv = String::from("word,mass\n");
    for (w, m) in &words {
        let _ = writeln!(csv, "\"{w}\",{}", q(m));
    }
    let text = format!("x = {}, depth {depth}: {} words\n{csv}", point_string(x), words.len());
    let json = json!({
        "x": point_string(x),
        "depth": depth,
        "cylinders": words.iter().map(|(w, m)| json!({ "word": w.to_string(), "mass": q(m) })).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, files: vec![("cylinders.csv", csv)], status: 0 })
}

fn xi_report(spec: &ExactSystem, x: &ExactPoint, y: &ExactPoint, params: &XiParams) -> Result<Report> {
    let r = xi_estimate(spec, x, y, params)?;
    let mut text = String::new();
    let _ = writeln!(text, "x = {}, y = {}", point_string(x), point_string(y));
    let _ = writeln!(text, "verdict: {} ({})", r.verdict, r.reason);
    let exact = r.verdict == Verdict::SingularCertified || (r.verdict == Verdict::Equivalent && params.certified_equivalent);
    let grade = if exact { "exact certificate".to_string() } else { format!("statistical, seed={}", r.seed) };
    let _ = writeln!(text, "evidence: {grade}");
    if let Some((w, px, py)) = &r.witness {
        let _ = writeln!(text, "witness word {w}: P_x = {}, P_y = {}", q(px), q(py));
    }
    let _ = writeln!(text, "exact depth: {}", r.exact_depth);
    let _ = writeln!(
        text,
        "drift of log X_n under P_x: {:e} +- {:e} (z = {:.3}); under P_y: {:e} +- {:e} (z = {:.3})",
        r.under_x.mean, r.under_x.stderr, r.under_x.z, r.under_y.mean, r.under_y.stderr, r.under_y.z
    );
    let _ = writeln!(text, "Monte Carlo: {} paths x {} steps per direction, sampler {:?}", r.samples, r.mc_steps, r.sampler);
    let json = json!({
        "x": point_string(x),
        "y": point_string(y),
        "verdict": r.verdict,
        "reason": r.reason,
        "evidence": grade,
        "witness": r.witness.as_ref().map(|(w, px, py)| json!({ "word": w.to_string(), "px": q(px), "py": q(py) })),
        "exact_depth": r.exact_depth,
        "exact_tail": r.exact_tail.iter().map(|t| json!({ "n": t.n, "M": q(&t.m), "mass": q(&t.mass) })).collect::<Vec<_>>(),
        "drift": { "mean": r.under_x.mean, "stderr": r.under_x.stderr, "z": r.under_x.z, "infinite_paths": r.under_x.infinite_paths },
        "reverse_drift": { "mean": r.under_y.mean, "stderr": r.under_y.stderr, "z": r.under_y.z, "infinite_paths": r.under_y.infinite_paths },
        "samples": r.samples,
        "steps": r.mc_steps,
        "seed": r.seed,
        "sampler": r.sampler,
    });
    Ok(Report { text, json, files: vec![("xi.csv", r.to_csv())], status: 0 })
}

fn matrix_text(m: &[Vec<Rational>]) -> String {
    m.iter().map(|row| format!("  [{}]\n", row.iter().map(q).collect::<Vec<_>>().join(", "))).collect()
}

fn matrix_json(m: &[Vec<Rational>]) -> Value {
    json!(m.iter().map(|row| row.iter().map(q).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// Cells of the terminal strongly connected components of the cell chain.
fn terminal_cells(fp: &FundamentalPartition) -> Vec<Vec<usize>> {
    Digraph::from_chain(&fp.chain).terminal_components()
}

fn lift_summary(spec: &ExactSystem, fp: &FundamentalPartition, budget: u64) -> Result<(usize, Rational, Rational)> {
    let mut depth = 0;
    while depth < 6 && (fp.edges.len() as u128).pow(depth as u32 + 1) <= u128::from(budget) {
        depth += 1;
    }
    let mut worst_lift = Rational::from_integer(0.into());
    let mut worst_op = worst_lift.clone();
    for cell in &fp.partition.cells {
        let x = cell.representative();
        worst_lift = worst_lift.max(lift_check(spec, fp, &x, depth, budget)?);
        let fs: [fn(&ExactPoint) -> Rational; 3] = [
            |_| Rational::from_integer(1.into()),
            |p| p.value.clone(),
            |p| p.value.clone() * p.value.clone(),
        ];
        for f in fs {
            worst_op = worst_op.max(operator_discrepancy(spec, fp, f, &x)?);
        }
    }
    Ok((depth, worst_lift, worst_op))
}

fn partition(spec: &ExactSystem, params: &PartitionParams) -> Result<Report> {
    let fp = fundamental_partition(spec, params)?;
    let mut text = fp.to_text();
    let terminal = terminal_cells(&fp);
    let mut terminal_json = Vec::new();
    for comp in &terminal {
        let sub = fp.chain.restrict(comp)?;
        let m = sub.matrix();
        let names: Vec<String> = comp.iter().map(|&c| fp.partition.cells[c].to_string()).collect();
        let _ = writeln!(text, "\nterminal component {}:\n{}", names.join(" u "), matrix_text(&m).trim_end());
        terminal_json.push(json!({ "cells": comp, "matrix": matrix_json(&m) }));
    }
    let (depth, lift, op) = lift_summary(spec, &fp, params.xi.budget)?;
    let _ = writeln!(text, "\nlift check at cell representatives, depth {depth}: max discrepancy {}", q(&lift));
    let _ = writeln!(text, "U'f = Uf for f in {{1, x, x^2}} at cell representatives: max discrepancy {}", q(&op));

    let json = json!({
        "breakpoints": fp.partition.cut_points().iter().map(q).collect::<Vec<_>>(),
        "breakpoint_origins": fp.partition.breakpoints.iter().map(|(b, o)| json!({ "point": q(b), "origin": o.to_string() })).collect::<Vec<_>>(),
        "cells": fp.partition.cells.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "classes": fp.classes.iter().enumerate().map(|(k, cells)| json!({
            "cells": cells,
            "exact": fp.class_is_exact(k),
        })).collect::<Vec<_>>(),
        "pairs": fp.pairs.iter().map(|p| json!({
            "i": p.i,
            "j": p.j,
            "outcome": p.outcome,
            "certificate": p.certificate.kind(),
            "grade": p.grade(),
        })).collect::<Vec<_>>(),
        "edges": fp.edges.iter().map(|e| json!({
            "source": e.source,
            "label": e.label.0,
            "target": e.target,
            "probs": e.probs.iter().map(|(c, p)| json!({ "cell": c, "p": q(p) })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "terminal_components": terminal_json,
        "lift_check": { "depth": depth, "max_discrepancy": q(&lift) },
        "operator_check": q(&op),
        "diagnostics": fp.diagnostics,
    });
    let mut classes_csv = String::from("cell,interval,points,class\n");
    for (k, c) in fp.partition.cells.iter().enumerate() {
        let _ = writeln!(classes_csv, "{k},\"{}\",{},{}", c.interval, c.points, fp.class_of[k]);
    }
    Ok(Report { text, json, files: vec![("classes.csv", classes_csv)], status: 0 })
}

fn flags(g: &Digraph) -> (bool, bool, bool) {
    (g.is_irreducible(), g.is_aperiodic(), g.is_recurrent())
}

fn graph(spec: &ExactSystem, params: &PartitionParams) -> Result<Report> {
    let fp = fundamental_partition(spec, params)?;
    let mut text = String::new();
    let class_graph = fp.digraph();
    let (irr, ap, rec) = flags(&class_graph);
    let _ = writeln!(text, "class graph: {} vertices, {} edges", class_graph.vertices, class_graph.arcs.len());
    let _ = writeln!(text, "  irreducible: {irr}\n  aperiodic: {ap}\n  recurrent: {rec}");
    let mut components = Vec::new();
    for comp in class_graph.terminal_components() {
        let (irr, ap, rec) = flags(&class_graph.induced(&comp));
        let _ = writeln!(
            text,
            "terminal component {comp:?}: irreducible {irr}, aperiodic {ap}, recurrent {rec}; {}",
            if rec {
                "every vertex is reached from any other, so the stability prediction applies"
            } else {
                "not every vertex is reached from every other; the stability prediction does not apply"
            }
        );
        components.push(json!({ "classes": comp, "irreducible": irr, "aperiodic": ap, "recurrent": rec }));
    }

    let m = fp.chain.matrix();
    let st = stationary_exact(&m)?;
    let mut stationary = Vec::new();
    for (k, pi) in st.per_component.iter().enumerate() {
        let moments = exact_first_moment(spec, &fp.chain, &fp.partition.cells, pi)?;
        let by_class: Vec<Rational> = fp
            .classes
            .iter()
            .map(|cells| cells.iter().fold(Rational::from_integer(0.into()), |a, &c| a + &pi[c]))
            .collect();
        let _ = writeln!(text, "\nstationary weights (terminal component {k}, exact solve):");
        let _ = writeln!(text, "  per cell: {}", pi.iter().map(q).collect::<Vec<_>>().join(", "));
        let _ = writeln!(text, "  per class: {}", by_class.iter().map(q).collect::<Vec<_>>().join(", "));
        let _ = writeln!(text, "  mean of x: {}", q(&moments.mean));
        let per_state: Vec<String> =
            moments.per_state.iter().map(|m| m.as_ref().map_or_else(|| "-".to_string(), q)).collect();
        let _ = writeln!(text, "  conditional means per cell: {}", per_state.join(", "));
        stationary.push(json!({
            "pi_cells": pi.iter().map(q).collect::<Vec<_>>(),
            "pi_classes": by_class.iter().map(q).collect::<Vec<_>>(),
            "mean": q(&moments.mean),
            "conditional_means": per_state,
        }));
    }
    let _ = writeln!(text, "residual: {}", q(&st.residual));
    if !st.is_unique() {
        let _ = writeln!(text, "{} terminal components: the stationary measure is not unique", st.per_component.len());
    }
    let float: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
    let moduli = fundsys::graph::eigenvalue_moduli(&float);
    let _ = writeln!(text, "eigenvalue moduli (diagnostic): {}", moduli.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "));

    let json = json!({
        "class_graph": { "vertices": class_graph.vertices, "arcs": class_graph.arcs, "irreducible": irr, "aperiodic": ap, "recurrent": rec },
        "terminal_components": components,
        "stationary": stationary,
        "matrix": matrix_json(&m),
        "unique": st.is_unique(),
        "residual": q(&st.residual),
    });
    let mut csv = String::from("cell,interval,points,class");
    for k in 0..st.per_component.len() {
        let _ = write!(csv, ",pi_{k}");
    }
    csv.push('\n');
    for (c, cell) in fp.partition.cells.iter().enumerate() {
        let _ = write!(csv, "{c},\"{}\",{},{}", cell.interval, cell.points, fp.class_of[c]);
        for pi in &st.per_component {
            let _ = write!(csv, ",{}", q(&pi[c]));
        }
        csv.push('\n');
    }
    let mut matrix_csv = String::from("from,to,p\n");
    for (i, row) in m.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            let _ = writeln!(matrix_csv, "{i},{j},{}", q(p));
        }
    }
    Ok(Report { text, json, files: vec![("stationary.csv", csv), ("matrix.csv", matrix_csv)], status: 0 })
}

fn simulate(
    spec: &ExactSystem,
    x0: &ExactPoint,
    steps: usize,
    observables: &[(String, Observable)],
    cap_bits: u64,
    params: &PartitionParams,
) -> Result<Report> {
    let trace = simulate_with_cap(spec, x0, steps, params.xi.seed, cap_bits)?;
    let mut text = String::new();
    let _ = writeln!(text, "x0 = {}, {steps} steps, seed {}", point_string(x0), trace.seed);
    let _ = writeln!(text, "exact points: {}, f64 points: {}", trace.exact_points.len(), trace.approx_points.len());
    let mut averages = Vec::new();
    if steps > 0 {
        for (name, f) in observables {
            let avg = ergodic_average(&trace, f)?;
            let _ = writeln!(text, "average of {name}: {avg:.9}");
            averages.push(json!({ "f": name, "parsed": f.to_string(), "average": avg }));
        }
    }
    let mut freq_json = Value::Null;
    match fundamental_partition(spec, params) {
        Ok(fp) if steps > 0 => {
            let freq = class_frequencies(&trace, &fp)?;
            let _ = writeln!(text, "class frequencies: {}", freq.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "));
            freq_json = json!(freq);
        }
        Ok(_) => {}
        Err(e) if matches!(e, Error::NotPiecewiseConstant) || e.is_budget() => {
            let _ = writeln!(text, "class frequencies unavailable: {e}");
        }
        Err(e) => return Err(e.into()),
    }
    let json = json!({
        "x0": point_string(x0),
        "steps": steps,
        "seed": trace.seed,
        "exact_points": trace.exact_points.len(),
        "averages": averages,
        "class_frequencies": freq_json,
    });
    Ok(Report { text, json, files: vec![("trace.csv", trace.to_csv())], status: 0 })
}

fn rate(file: Option<&Path>, b: &str, constant: bool, x0: &str, params: &RateParams) -> Result<Report> {
    let (spec, bound, label) = match file {
        Some(path) => (load(path)?, None, path.display().to_string()),
        None => {
            let b = parse_rational(b).ok_or_else(|| Error::InvalidArgument(format!("`{b}` is not a rational b")))?;
            if b <= Rational::from_integer(0.into()) || b >= Rational::from_integer(1.into()) {
                return Err(Error::InvalidArgument("b must lie strictly between 0 and 1".into()).into());
            }
            let third = 1.0 / 3.0;
            if constant {
                (specimens::example2_constant(b.clone()), Some(third), format!("constant variant, b = {}", q(&b)))
            } else {
                let bound = b.to_f64().max(third).sqrt();
                (specimens::example2(b.clone()), Some(bound), format!("step system, b = {}", q(&b)))
            }
        }
    };
    if params.atoms == 0 {
        return Err(Error::InvalidArgument("--atoms must be positive".into()).into());
    }
    let x0 = parse_point(x0)?;
    let part = fundsys::partition::base_partition(&spec, DEFAULT_BREAKPOINT_CAP)?;
    let contraction = contraction_estimate(&spec, &part, 200, params.seed)?;
    let mut report = rate_experiment(&spec.to_float(), &x0.map_scalar(Scalar::to_f64), params)?;
    report.bound = bound;
    let mut text = String::new();
    let _ = writeln!(text, "{label}; {} atoms from {}, seed {}", report.atoms, point_string(&x0), report.seed);
    let _ = writeln!(text, "contraction estimate: {} ({})", q(&contraction.rate), if contraction.contractive { "contractive" } else { "not contractive" });
    let _ = writeln!(text, "noise floor: {:e}", report.noise_floor);
    for (n, d) in report.distances.iter().enumerate() {
        let _ = writeln!(text, "  d_{n} = {d:e}");
    }
    match report.geometric_mean {
        Some(g) => {
            let _ = writeln!(text, "geometric-mean ratio over {} steps above the floor: {g:.6}", report.ratios.len());
        }
        None => {
            let _ = writeln!(text, "geometric-mean ratio: none (fewer than two distances above the floor)");
        }
    }
    if let Some(bound) = bound {
        let _ = writeln!(text, "bound: {bound:.6}");
    }
    let json = json!({
        "system": label,
        "seed": report.seed,
        "atoms": report.atoms,
        "contraction": q(&contraction.rate),
        "distances": report.distances,
        "noise_floor": report.noise_floor,
        "ratios": report.ratios,
        "geometric_mean": report.geometric_mean,
        "bound": bound,
    });
    Ok(Report { text, json, files: vec![("rate.csv", report.to_csv())], status: 0 })
}
