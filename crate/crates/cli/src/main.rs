use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use albert_theta::enumerate::{estimate_candidates, sigma3, shell, ShellCache, ShellSource, CACHE_ENV, GENERAL_TRACE_LIMIT};
use albert_theta::lattice::make_lattice;
use albert_theta::localzeta::{compare, rows_to_csv, SatakeParam};
use albert_theta::modforms::{identify_named, Space};
use albert_theta::verify::{self, Suite};
use albert_theta::weightpoly::{
    builtin_b, construct_xelements, low_points, solve_collinear, theta_series, third_point_on_line, Normalization,
    Provenance, ThetaSeries, WeightPolynomial, XElement,
};
use albert_theta::{arith::parse_rational, Error, LatticeName, QSeries};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const ENUMERATE_SCHEMA: &str = "albert-theta/enumerate/v1";
const THETA_SCHEMA: &str = "albert-theta/theta/v1";
const ZETA_SCHEMA: &str = "albert-theta/zeta/v1";

#[derive(Parser)]
#[command(name = "albert-theta", version, about = "Weighted theta series on the Albert lattices")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Shell cache directory.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Neither read nor write the shell cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads [default: all cores].
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    /// Run enumerations beyond the default budget.
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeArg {
    Jz,
    Je,
}

impl From<LatticeArg> for LatticeName {
    fn from(l: LatticeArg) -> Self {
        match l {
            LatticeArg::Jz => LatticeName::JZ,
            LatticeArg::Je => LatticeName::JE,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Plain,
    ElkiesGross,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Weight12,
    Weight14,
    Weight16,
    Span24,
    LocalZeta,
    AlgebraLaws,
}

#[derive(Subcommand)]
enum Command {
    /// Count the positive rank-one elements of one trace.
    Enumerate {
        #[arg(long, value_enum)]
        lattice: LatticeArg,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        trace: u32,
    },
    /// Theta series weighted by a polynomial.
    Theta {
        #[arg(long, value_enum)]
        lattice: LatticeArg,
        /// const, builtin-B, triple:auto[:K], triple:I,J,K or triple:I,J,K,L
        #[arg(long, default_value = "const")]
        poly: String,
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        prec: u64,
        #[arg(long, value_enum, default_value_t = NormArg::Plain)]
        normalization: NormArg,
        /// Decompose each component in the named generators.
        #[arg(long)]
        identify: bool,
        /// Also write the output to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
    /// Truncated local zeta sums against the closed form.
    Zeta {
        #[arg(long, value_delimiter = ',', default_values_t = ["1".to_string(), "1/2".to_string(), "3".to_string()])]
        alpha: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3, 5])]
        p: Vec<u64>,
        #[arg(long, default_value_t = 60)]
        terms: u32,
    },
    /// Lattice descriptors.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
}

#[derive(Subcommand)]
enum LatticeAction {
    /// Basis, unit and Gram matrix as JSON.
    Export {
        #[arg(long, value_enum)]
        lattice: LatticeArg,
    },
}

/// Process outcome; the discriminant is the exit code.
enum Failure {
    Verification(String),
    Usage(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget(m) => Failure::Budget(m),
            Error::InvalidArgument(_) | Error::Parse(_) | Error::BadField(_) => Failure::Usage(e.to_string()),
            e => Failure::Verification(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Verification(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Verification(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w as usize).build_global() {
            log::warn!("worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exceeded: {m}");
            ExitCode::from(3)
        }
    }
}

fn source(g: &Global) -> ShellSource {
    let cache = if g.no_cache {
        None
    } else {
        Some(g.cache_dir.clone().map(ShellCache::new).unwrap_or_else(ShellCache::from_env))
    };
    ShellSource { cache, force: g.force, ..ShellSource::default() }
}

fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Enumerate { lattice, trace } => cmd_enumerate(g, (*lattice).into(), *trace),
        Command::Theta { lattice, poly, degree, prec, normalization, identify, out } => {
            let norm = match normalization {
                NormArg::Plain => Normalization::Plain,
                NormArg::ElkiesGross => Normalization::ElkiesGross,
            };
            cmd_theta(g, (*lattice).into(), poly, *degree, *prec as usize, norm, *identify, out.as_ref())
        }
        Command::Verify { suite } => cmd_verify(g, *suite),
        Command::Zeta { alpha, p, terms } => cmd_zeta(g, alpha, p, *terms),
        Command::Lattice { action: LatticeAction::Export { lattice } } => {
            emit(&(serde_json::to_string_pretty(&make_lattice((*lattice).into()).descriptor())? + "\n"))
        }
    }
}

fn print(g: &Global, value: &Value, csv: impl FnOnce() -> String) -> CliResult<String> {
    let text = match g.format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Csv => csv(),
    };
    emit(&text)?;
    Ok(text)
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn cmd_enumerate(g: &Global, lattice: LatticeName, trace: u32) -> CliResult<()> {
    let src = source(g);
    if lattice == LatticeName::JE && trace > GENERAL_TRACE_LIMIT {
        let est = estimate_candidates(trace);
        if !g.force {
            return Err(Failure::Budget(format!(
                "je trace {trace} visits about {est:.1e} candidate vectors; rerun with --force"
            )));
        }
        eprintln!("cost estimate: about {est:.1e} candidate vectors");
    }
    let (count, weighted, cached) = match src.cache.as_ref().map(|c| c.load(lattice, trace)).transpose()?.flatten() {
        Some(s) => (s.len() as u64, s.weighted_count, true),
        None if lattice == LatticeName::JZ && trace >= src.stream_from => {
            let (c, w) = src.fold(
                lattice,
                trace,
                || (0u64, 0u64),
                |(c, w), _, content| (c + 1, w + sigma3(content).expect("content >= 1")),
                |a, b| (a.0 + b.0, a.1 + b.1),
            )?;
            (c, w, false)
        }
        None => {
            let s = shell(lattice, trace, src.cache.as_ref(), g.force)?;
            (s.len() as u64, s.weighted_count, src.cache.is_some())
        }
    };
    let v = json!({
        "schema": ENUMERATE_SCHEMA,
        "lattice": lattice,
        "trace": trace,
        "count": count,
        "weighted_count": weighted,
        "cached": cached,
    });
    print(g, &v, || format!("lattice,trace,count,weighted_count\n{lattice},{trace},{count},{weighted}\n"))?;
    Ok(())
}

fn parse_indices(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Failure::Usage(format!("bad index {t:?}"))))
        .collect()
}

/// Resolves `--poly` into a generator, or `None` for the constant.
fn parse_poly(spec: &str, lattice: LatticeName, src: &ShellSource) -> CliResult<Option<XElement>> {
    match spec {
        "const" => return Ok(None),
        "builtin-B" => {
            if lattice != LatticeName::JZ {
                return Err(Failure::Usage("builtin-B lives in jz".into()));
            }
            return Ok(Some(builtin_b()?));
        }
        _ => {}
    }
    let args = spec
        .strip_prefix("triple:")
        .ok_or_else(|| Failure::Usage(format!("unknown polynomial {spec:?}")))?;
    let l = make_lattice(lattice);
    let pts = low_points(lattice, src)?;
    if let Some(rest) = args.strip_prefix("auto") {
        let k: usize = match rest.strip_prefix(':') {
            Some(k) => k.parse().map_err(|_| Failure::Usage(format!("bad index {k:?}")))?,
            None if rest.is_empty() => 0,
            None => return Err(Failure::Usage(format!("bad triple spec {spec:?}"))),
        };
        return construct_xelements(l, &pts, k + 1)
            .into_iter()
            .nth(k)
            .map(Some)
            .ok_or_else(|| Failure::Verification(format!("fewer than {} generators found", k + 1)));
    }
    let idx = parse_indices(args)?;
    if let Some(&bad) = idx.iter().find(|&&i| i >= pts.len()) {
        return Err(Failure::Usage(format!("index {bad} out of range (there are {} points)", pts.len())));
    }
    let e = |i: usize| l.element(&pts[i]);
    let coords = |i: usize| pts[i].to_vec();
    let x = match idx[..] {
        [i, j, k] => solve_collinear(
            l,
            [&e(i), &e(j), &e(k)],
            Provenance::CollinearTriple { points: vec![coords(i), coords(j), coords(k)] },
        )?,
        [i, j, k, m] => {
            let p0 = third_point_on_line(l, &e(i), &e(j), &e(k), &e(m))?;
            let prov = Provenance::ThirdPoint { t1: coords(i), t2: coords(j), u1: coords(k), u2: coords(m) };
            solve_collinear(l, [&e(i), &e(j), &p0], prov)?
        }
        _ => return Err(Failure::Usage("triple takes three or four indices".into())),
    };
    Ok(Some(x))
}

fn identify_text(s: &QSeries, space: Space) -> String {
    match identify_named(s, space) {
        Ok(i) => i.to_string(),
        Err(e) => format!("unidentified: {e}"),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_theta(
    g: &Global,
    lattice: LatticeName,
    poly: &str,
    degree: Option<u32>,
    prec: usize,
    norm: Normalization,
    identify: bool,
    out: Option<&PathBuf>,
) -> CliResult<()> {
    let src = source(g);
    if lattice == LatticeName::JE && prec > GENERAL_TRACE_LIMIT as usize && !g.force {
        return Err(Failure::Budget(format!(
            "je precision {prec} needs trace {prec}, about {:.1e} candidate vectors; rerun with --force",
            estimate_candidates(prec as u32)
        )));
    }
    if lattice == LatticeName::JE && prec > GENERAL_TRACE_LIMIT as usize {
        eprintln!("cost estimate: about {:.1e} candidate vectors", estimate_candidates(prec as u32));
    }
    let gen = parse_poly(poly, lattice, &src)?;
    let wp = match (&gen, degree) {
        (None, None | Some(0)) => None,
        (None, Some(_)) => return Err(Failure::Usage("the constant polynomial has degree 0".into())),
        (Some(_), Some(0)) => return Err(Failure::Usage("weight polynomials have degree >= 1".into())),
        (Some(x), d) => Some(WeightPolynomial::new(d.unwrap_or(1), x.clone())?),
    };
    let t = theta_series(lattice, wp.as_ref(), prec, norm, &src)?;
    let mut v = theta_json(&t, wp.as_ref());
    let space = if wp.is_some() { Space::Cusp } else { Space::Modular };
    if identify {
        let mut ids = serde_json::Map::new();
        ids.insert("1".into(), Value::String(identify_text(&t.rational, space)));
        if wp.is_some() {
            ids.insert("surd".into(), Value::String(identify_text(&t.surd, space)));
        }
        if g.format == Format::Csv {
            for (k, s) in &ids {
                eprintln!("identify {k}: {}", s.as_str().unwrap_or_default());
            }
        }
        v["identify"] = Value::Object(ids);
    }
    let text = print(g, &v, || theta_csv(&t))?;
    if let Some(path) = out {
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn theta_json(t: &ThetaSeries, p: Option<&WeightPolynomial>) -> Value {
    json!({
        "schema": THETA_SCHEMA,
        "lattice": t.lattice,
        "degree": t.degree,
        "normalization": t.normalization,
        "weight": t.rational.weight,
        "prec": t.rational.prec,
        "d": t.d,
        "polynomial": p.map(WeightPolynomial::to_json),
        "components": {
            "1": serde_json::to_value(&t.rational).expect("serializable"),
            "surd": serde_json::to_value(&t.surd).expect("serializable"),
        },
        "display": { "1": t.rational.to_string(), "surd": t.surd.to_string() },
    })
}

fn theta_csv(t: &ThetaSeries) -> String {
    let mut s = String::from("n,coeff_1,coeff_surd\n");
    for n in 0..=t.rational.prec {
        let _ = writeln!(s, "{n},{},{}", t.rational.coeffs[n], t.surd.coeffs[n]);
    }
    s
}

fn cmd_verify(g: &Global, suite: SuiteArg) -> CliResult<()> {
    let suite = match suite {
        SuiteArg::Weight12 => Suite::Weight12,
        SuiteArg::Weight14 => Suite::Weight14,
        SuiteArg::Weight16 => Suite::Weight16,
        SuiteArg::Span24 => Suite::Span24,
        SuiteArg::LocalZeta => Suite::LocalZeta,
        SuiteArg::AlgebraLaws => Suite::AlgebraLaws,
    };
    let report = verify::run(suite, &source(g))?;
    print(g, &report.to_json(), || {
        let mut s = String::from("check,passed,detail\n");
        for c in &report.checks {
            let _ = writeln!(s, "\"{}\",{},\"{}\"", c.name, c.passed, c.detail.replace('"', "'"));
        }
        s
    })?;
    eprintln!("{report}");
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(format!("{suite}: failed {}", failed.join(", "))))
    }
}

fn cmd_zeta(g: &Global, alphas: &[String], ps: &[u64], terms: u32) -> CliResult<()> {
    let mut rows = Vec::new();
    for a in alphas {
        let alpha = parse_rational(a)?;
        for &p in ps {
            rows.push(compare(&SatakeParam::new(alpha.clone(), p)?, terms)?);
        }
    }
    let v = json!({ "schema": ZETA_SCHEMA, "rows": rows });
    print(g, &v, || rows_to_csv(&rows))?;
    Ok(())
}
