use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qca::dot::to_dot;
use qca::report::VerdictReport;
use qca::rulefile::{read_rule, rule_to_json};
use qca::state::read_state;
use qca::{read_input, FormatError};
use qca_core::debruijn::{build_g1, build_g2, deterministic_sector, EdgeFilter, DEFAULT_CYCLE_CAP};
use qca_core::families::{make_family, Family, FamilySpec, FrameOrientation, ParamKind, Params};
use qca_core::linalg::CMatrix;
use qca_core::oracle::{
    apply, global_matrix, is_permutation_matrix, probabilities, unitarity_defect, NeighborhoodOffsets,
    StateVector,
};
use qca_core::rule::{decode, digits_to_string, encode, parse_digits};
use qca_core::transfer::{path_monomials, trace_series, transfer_matrix, z_polynomial, Convention};
use qca_core::unitarity::{check_infinite_with, check_periodic_with, witness_string, CheckOptions, Verdict};
use qca_core::{Amplitude, RuleTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Unitarity checks, rule families and brute-force simulation for
/// one-dimensional quantum cellular automata.
#[derive(Parser)]
#[command(name = "qca", version)]
struct Cli {
    /// Equality tolerance applied to every rule read or produced.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized parameters and initial states.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide unitarity from the local rule.
    Verify {
        /// Rule file, or `-` for standard input.
        rule: String,
        #[arg(long, value_enum, default_value = "periodic")]
        mode: ModeArg,
    },
    /// Build the global matrix on a ring of N sites and measure F†F − I.
    Oracle {
        rule: String,
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        defect_only: bool,
    },
    /// Evolve a state on a ring of N sites.
    Simulate {
        rule: String,
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        steps: usize,
        /// A configuration string such as `0110`, a state file, or `random`.
        #[arg(long)]
        initial: String,
        /// Number of most probable configurations printed per step.
        #[arg(long, default_value_t = 8)]
        top: usize,
    },
    /// Emit a rule file for a named family.
    Family(FamilyArgs),
    /// Export G1 or G2 as Graphviz.
    Graph {
        rule: String,
        #[arg(long, value_enum, default_value = "g1")]
        which: WhichArg,
        #[arg(long, value_enum, default_value = "all")]
        filter: FilterArg,
    },
    /// Print the label monomials of acyclic mismatched paths.
    Paths {
        rule: String,
        #[arg(long)]
        max_len: usize,
    },
    /// Print the coefficients of Z(t) = det(I − tA).
    Zpoly {
        rule: String,
        #[arg(long, value_enum, default_value = "g1")]
        which: WhichArg,
        #[arg(long, value_enum, default_value = "raw")]
        convention: ConventionArg,
        /// Also print Tr A(t) up to this order.
        #[arg(long)]
        trace: Option<usize>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// Family name; `frame` and `quantized` take their inputs from files.
    #[arg(required_unless_present = "list")]
    name: Option<String>,
    /// `name=value`; complex values as `re,im`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// List families and their parameters.
    #[arg(long)]
    list: bool,
    /// Draw unspecified parameters at random from `--seed`.
    #[arg(long)]
    random: bool,
    /// Frame prefix length for `frame`.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, value_enum, default_value = "leading")]
    orientation: OrientationArg,
    /// Rule file supplying the amplitude vectors for `frame`.
    #[arg(long)]
    vectors: Option<String>,
    /// Deterministic base rule for `quantized`.
    #[arg(long)]
    base: Option<String>,
    /// JSON q×q matrix of `[re, im]` pairs for `quantized`.
    #[arg(long)]
    unitary: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Periodic,
    Infinite,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    G1,
    G2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Raw,
    Simplified,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Leading,
    Trailing,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    All,
    Mismatched,
    Diagonal,
    Sector,
    SectorMismatched,
}

const NOT_UNITARY: u8 = 1;
const USAGE: u8 = 2;
const RESOURCE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    let core = e
        .downcast_ref::<qca_core::Error>()
        .or_else(|| match e.downcast_ref::<FormatError>() {
            Some(FormatError::Rule(inner)) => Some(inner),
            _ => None,
        });
    match core {
        Some(c) if c.is_resource() => RESOURCE,
        _ => USAGE,
    }
}

fn load(cli: &Cli, path: &str) -> Result<RuleTable> {
    let rule = read_rule(path)?;
    Ok(match cli.tolerance {
        Some(t) => rule.with_tolerance(t)?,
        None => rule,
    })
}

fn check_options() -> Result<CheckOptions> {
    let mut opts = CheckOptions::default();
    if let Ok(v) = std::env::var("QCA_CYCLE_CAP") {
        opts.cycle_cap = v.trim().parse().map_err(|_| anyhow!("QCA_CYCLE_CAP must be a positive integer, got {v:?}"))?;
    }
    if opts.cycle_cap == 0 {
        opts.cycle_cap = DEFAULT_CYCLE_CAP;
    }
    Ok(opts)
}

fn fmt_amp(a: Amplitude) -> String {
    format!("{}{:+}i", a.re, a.im)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let mut out = io::stdout().lock();
    match &cli.command {
        Command::Verify { rule, mode } => {
            let r = load(cli, rule)?;
            let opts = check_options()?;
            let v = match mode {
                ModeArg::Periodic => check_periodic_with(&r, &opts)?,
                ModeArg::Infinite => check_infinite_with(&r, &opts)?,
            };
            print_verdict(cli, &mut out, &r, &v)?;
            Ok(if v.unitary { ExitCode::SUCCESS } else { ExitCode::from(NOT_UNITARY) })
        }
        Command::Oracle { rule, sites, defect_only } => {
            let r = load(cli, rule)?;
            let f = global_matrix(&r, *sites, &NeighborhoodOffsets::standard(r.k()))?;
            let defect = unitarity_defect(&f);
            let permutation = is_permutation_matrix(&f, r.tolerance());
            let config = |i: usize| digits_to_string(&decode(i, r.q(), *sites));
            let entries: Vec<(usize, usize, Amplitude)> = if *defect_only {
                Vec::new()
            } else {
                let m = &f.matrix;
                (0..m.ncols())
                    .flat_map(|c| (0..m.nrows()).map(move |row| (row, c, m[(row, c)])))
                    .filter(|e| e.2.norm() > r.tolerance())
                    .collect()
            };
            if cli.json {
                let list: Vec<_> =
                    entries.iter().map(|(row, c, a)| json!({"row": config(*row), "column": config(*c), "value": [a.re, a.im]})).collect();
                let mut doc = json!({"sites": sites, "dimension": f.matrix.nrows(), "defect": defect, "permutation": permutation});
                if !defect_only {
                    doc["entries"] = list.into();
                }
                writeln!(out, "{doc}")?;
            } else {
                writeln!(out, "sites {sites}, dimension {}", f.matrix.nrows())?;
                writeln!(out, "defect {defect:e}")?;
                if !defect_only {
                    writeln!(out, "permutation {}", if permutation { "yes" } else { "no" })?;
                    writeln!(out, "note: only the ring of {sites} sites is checked")?;
                    for (row, c, a) in &entries {
                        writeln!(out, "{} <- {} {}", config(*row), config(*c), fmt_amp(*a))?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { rule, sites, steps, initial, top } => {
            let r = load(cli, rule)?;
            let state = initial_state(cli, &r, *sites, initial)?;
            simulate(cli, &mut out, &r, state, *steps, *top)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Family(args) => family(cli, &mut out, args),
        Command::Graph { rule, which, filter } => {
            let r = load(cli, rule)?;
            let g = match which {
                WhichArg::G1 => build_g1(&r),
                WhichArg::G2 => build_g2(&r),
            };
            let g = g.with_sector(&deterministic_sector(&r));
            let f = match filter {
                FilterArg::All => EdgeFilter::All,
                FilterArg::Mismatched => EdgeFilter::Mismatched,
                FilterArg::Diagonal => EdgeFilter::Diagonal,
                FilterArg::Sector => EdgeFilter::Sector,
                FilterArg::SectorMismatched => EdgeFilter::SectorMismatched,
            };
            write!(out, "{}", to_dot(&g.filtered(f)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Paths { rule, max_len } => {
            let r = load(cli, rule)?;
            let mut lengths = Vec::new();
            for n in 1..=*max_len {
                let monomials: Vec<String> = path_monomials(&r, n)?.iter().map(|m| m.to_string()).collect();
                lengths.push((n, monomials));
            }
            if cli.json {
                let doc: Vec<_> = lengths.iter().map(|(n, m)| json!({"length": n, "monomials": m})).collect();
                writeln!(out, "{}", serde_json::Value::from(doc))?;
            } else {
                for (n, m) in &lengths {
                    writeln!(out, "length {n} ({})", m.len())?;
                    for s in m {
                        writeln!(out, "  {s}")?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Zpoly { rule, which, convention, trace } => {
            let r = load(cli, rule)?;
            let g = match which {
                WhichArg::G1 => build_g1(&r),
                WhichArg::G2 => build_g2(&r),
            };
            let conv = match convention {
                ConventionArg::Raw => Convention::Raw,
                ConventionArg::Simplified => Convention::Simplified,
            };
            let a = transfer_matrix(&g, conv)?;
            let z = z_polynomial(&a);
            let tr = trace.map(|order| trace_series(&a, order)).transpose()?;
            let pairs = |c: &[Amplitude]| c.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>();
            if cli.json {
                let mut doc = json!({"z": pairs(z.coefficients())});
                if let Some(t) = &tr {
                    doc["trace"] = json!(pairs(t.coefficients()));
                }
                writeln!(out, "{doc}")?;
            } else {
                writeln!(out, "Z(t)")?;
                for (n, c) in z.coefficients().iter().enumerate() {
                    writeln!(out, "  t^{n} {}", fmt_amp(*c))?;
                }
                if let Some(t) = &tr {
                    writeln!(out, "Tr A(t)")?;
                    for (n, c) in t.coefficients().iter().enumerate().skip(1) {
                        writeln!(out, "  t^{n} {}", fmt_amp(*c))?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_verdict(cli: &Cli, out: &mut impl Write, r: &RuleTable, v: &Verdict) -> Result<()> {
    if cli.json {
        let report = VerdictReport::from_verdict(r.q(), r.k(), v);
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(());
    }
    writeln!(out, "{}: {}", v.mode, if v.unitary { "unitary" } else { "not unitary" })?;
    for rep in &v.reports {
        writeln!(
            out,
            "{:<5} {}  value {}  margin {:.3e}",
            rep.condition.as_str(),
            witness_string(r, &rep.witness),
            fmt_amp(rep.value),
            rep.margin
        )?;
    }
    Ok(())
}

fn initial_state(cli: &Cli, r: &RuleTable, sites: usize, initial: &str) -> Result<StateVector> {
    let dim = r.q().checked_pow(sites as u32).ok_or_else(|| anyhow!("too many sites"))?;
    if initial == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        let mut amps: Vec<Amplitude> =
            (0..dim).map(|_| Amplitude::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        return Ok(StateVector::new(r.q(), sites, amps)?);
    }
    if let Ok(digits) = parse_digits(initial, r.q()) {
        if digits.len() == sites {
            return Ok(StateVector::basis(r.q(), sites, encode(&digits, r.q()))?);
        }
        if !std::path::Path::new(initial).exists() {
            bail!("configuration {initial:?} has {} cells, expected {sites}", digits.len());
        }
    }
    Ok(read_state(initial, r.q(), sites)?)
}

/// Squared moduli, normalized only when the state still has unit norm, so a
/// non-unitary rule shows its loss or gain directly.
fn top_probabilities(r: &RuleTable, state: &StateVector, m: usize) -> Result<Vec<(String, f64)>> {
    let p = probabilities(state, 1e-7)
        .unwrap_or_else(|_| state.amplitudes().iter().map(|a| a.norm_sqr()).collect());
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    Ok(idx.into_iter().take(m).map(|i| (digits_to_string(&decode(i, r.q(), state.sites())), p[i])).collect())
}

fn simulate(cli: &Cli, out: &mut impl Write, r: &RuleTable, mut state: StateVector, steps: usize, m: usize) -> Result<()> {
    let e = NeighborhoodOffsets::standard(r.k());
    for t in 0..=steps {
        if t > 0 {
            state = apply(r, &e, &state)?;
        }
        let top = top_probabilities(r, &state, m)?;
        if cli.json {
            let probs: Vec<_> = top.iter().map(|(c, p)| json!([c, p])).collect();
            writeln!(out, "{}", json!({"step": t, "norm": state.norm(), "top": probs}))?;
        } else {
            let probs: Vec<String> = top.iter().map(|(c, p)| format!("{c}:{p:.6}")).collect();
            writeln!(out, "step {t} norm {:.12} {}", state.norm(), probs.join(" "))?;
        }
    }
    Ok(())
}

fn parse_param(s: &str) -> Result<(String, Amplitude)> {
    let (key, value) = s.split_once('=').ok_or_else(|| anyhow!("parameter {s:?} is not KEY=VALUE"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| anyhow!("parameter {key}: {x:?} is not a number"));
    let value = match value.split_once(',') {
        Some((re, im)) => Amplitude::new(num(re)?, num(im)?),
        None => Amplitude::new(num(value)?, 0.0),
    };
    Ok((key.trim().to_string(), value))
}

fn parse_matrix(text: &str, source: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text).with_context(|| format!("{source}: expected rows of [re, im] pairs"))?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        bail!("{source}: matrix is not square");
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Amplitude::new(rows[i][j][0], rows[i][j][1])))
}

fn family(cli: &Cli, out: &mut impl Write, args: &FamilyArgs) -> Result<ExitCode> {
    if args.list {
        let mut doc = Vec::new();
        for f in Family::ALL {
            let params: Vec<_> = f
                .params()
                .iter()
                .map(|p| {
                    let kind = match p.kind {
                        ParamKind::Angle => "angle",
                        ParamKind::Positive => "positive",
                        ParamKind::Complex => "complex",
                    };
                    (p.name, kind)
                })
                .collect();
            doc.push((f.as_str(), f.k(), params));
        }
        doc.push(("frame", 0, vec![("j", "integer"), ("orientation", "leading|trailing"), ("vectors", "rule file")]));
        doc.push(("quantized", 0, vec![("base", "rule file"), ("unitary", "matrix file")]));
        if cli.json {
            let list: Vec<_> = doc
                .iter()
                .map(|(n, k, p)| {
                    let params: Vec<_> = p.iter().map(|(name, kind)| json!({"name": name, "kind": kind})).collect();
                    json!({"name": n, "k": k, "params": params})
                })
                .collect();
            writeln!(out, "{}", serde_json::Value::from(list))?;
        } else {
            for (n, k, p) in &doc {
                let params: Vec<String> = p.iter().map(|(name, kind)| format!("{name}:{kind}")).collect();
                let k = if *k == 0 { String::from("-") } else { k.to_string() };
                writeln!(out, "{n:<12} k={k:<2} {}", params.join(" "))?;
            }
        }
        return Ok(ExitCode::SUCCESS);
    }

    let name = args.name.as_deref().expect("clap requires a name without --list");
    let spec = match name {
        "frame" => {
            let j = args.j.ok_or_else(|| anyhow!("frame needs --j"))?;
            let path = args.vectors.as_deref().ok_or_else(|| anyhow!("frame needs --vectors"))?;
            let src = read_rule(path)?;
            let vectors = src.configs().map(|c| src.vector(c).to_vec()).collect();
            let orientation = match args.orientation {
                OrientationArg::Leading => FrameOrientation::Leading,
                OrientationArg::Trailing => FrameOrientation::Trailing,
            };
            FamilySpec::Frame { q: src.q(), k: src.k(), j, orientation, vectors }
        }
        "quantized" => {
            let base = read_rule(args.base.as_deref().ok_or_else(|| anyhow!("quantized needs --base"))?)?;
            let path = args.unitary.as_deref().ok_or_else(|| anyhow!("quantized needs --unitary"))?;
            FamilySpec::Quantized { base, unitary: parse_matrix(&read_input(path)?, path)? }
        }
        other => {
            let family: Family = other.parse()?;
            let mut params = Params::new();
            for p in &args.params {
                let (k, v) = parse_param(p)?;
                params.set(&k, v);
            }
            if args.random {
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                for spec in family.params() {
                    // drawn in schema order so the seed fixes every value
                    let draw = match spec.kind {
                        ParamKind::Angle => Amplitude::new(rng.random_range(0.0..std::f64::consts::TAU), 0.0),
                        ParamKind::Positive => Amplitude::new(rng.random_range(0.5..2.0), 0.0),
                        ParamKind::Complex => Amplitude::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
                    };
                    if params.get(spec.name).is_none() {
                        params.set(spec.name, draw);
                    }
                }
            }
            FamilySpec::Named { family, params }
        }
    };
    let mut rule = make_family(&spec)?;
    if let Some(t) = cli.tolerance {
        rule = rule.with_tolerance(t)?;
    }
    writeln!(out, "{}", rule_to_json(&rule))?;
    Ok(ExitCode::SUCCESS)
}
