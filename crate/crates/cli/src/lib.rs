//! `starmetric` command line.
//!
//! Exit codes: 0 success, 1 metric or domain violation (including an
//! infeasible star in `verify`), 2 parse or I/O error.

pub mod result;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use starmetric::oracle::{bisect_lambda, exact_lambda_by_cycles, MAX_ENUMERATION_SITES};
use starmetric::{
    build_lambda_graph, embed_with_report, gen_random_metric, lambda_star, parse_metric,
    parse_rational, to_decimal, verify_star, Error, Format, MetricSpace, Model, Rational,
};

use result::{EmbedResult, InputDigest, Timing, DECIMAL_DIGITS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "starmetric",
    version,
    about = "Minimum-dilation star embeddings of finite metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Matrix,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Matrix => Format::Matrix,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute λ* and hub edge lengths; writes a JSON result.
    Embed {
        /// Metric file, or `-` for standard input.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "matrix")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print λ* only, exact and decimal.
    Lambda {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "matrix")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a star result file against a metric at the star's declared λ.
    Verify {
        metric: PathBuf,
        star: PathBuf,
        #[arg(long, value_enum, default_value = "matrix")]
        format: FormatArg,
    },
    /// Write a random metric.
    Gen {
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "shortest_path", value_parser = parse_model)]
        model: Model,
        #[arg(long, value_enum, default_value = "matrix")]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time `embed` over a size sweep; CSV report.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        /// Single seed; overrides --seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "shortest_path", value_parser = parse_model)]
        model: Model,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reference values: cycle enumeration (small n) and bisection.
    Oracle {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "matrix")]
        format: FormatArg,
        /// Bisection tolerance, `P/Q` or decimal.
        #[arg(long, default_value = "1/1000000000", value_parser = parse_tol)]
        tol: Rational,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse::<Model>().map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<Rational, String> {
    match parse_rational(s) {
        Some(r) if r > Rational::from_integer(0.into()) => Ok(r),
        Some(_) => Err("tolerance must be positive".into()),
        None => Err(format!("{s:?} is not a rational number")),
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn violation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VIOLATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_INPUT,
            _ => EXIT_VIOLATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the command line given by `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Embed {
            input,
            format,
            output,
        } => cmd_embed(&input, format.into(), output.as_deref(), out),
        Command::Lambda {
            input,
            format,
            output,
        } => cmd_lambda(&input, format.into(), output.as_deref(), out),
        Command::Verify {
            metric,
            star,
            format,
        } => cmd_verify(&metric, &star, format.into(), out),
        Command::Gen {
            n,
            seed,
            model,
            format,
            output,
        } => {
            let m = gen_random_metric(n, seed, model)?;
            let text = match Format::from(format) {
                Format::Matrix => m.to_matrix_text(),
                Format::Json => m.to_json_text(),
            };
            emit(output.as_deref(), &text, out)?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            sizes,
            seeds,
            seed,
            model,
            output,
        } => {
            let seeds = seed.map_or(seeds, |s| vec![s]);
            let csv = cmd_bench(&sizes, &seeds, model, err)?;
            emit(output.as_deref(), &csv, out)?;
            Ok(EXIT_OK)
        }
        Command::Oracle {
            input,
            format,
            tol,
            output,
        } => cmd_oracle(&input, format.into(), &tol, output.as_deref(), out),
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    let mut bytes = Vec::new();
    if path == Path::new("-") {
        io::stdin()
            .read_to_end(&mut bytes)
            .map_err(|e| Failure::input(format!("stdin: {e}")))?;
    } else {
        bytes = fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    Ok(bytes)
}

fn read_metric(path: &Path, format: Format) -> Result<(MetricSpace, Vec<u8>), Failure> {
    let bytes = read_input(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Failure::input(format!("{}: not valid UTF-8", path.display())))?;
    let m = parse_metric(text, format).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })?;
    Ok((m, bytes))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("stdout: {e}"))),
    }
}

pub fn embed_result(
    m: &MetricSpace,
    input: &[u8],
    parse_seconds: f64,
) -> Result<EmbedResult, Error> {
    let t = Instant::now();
    let (star, report) = embed_with_report(m)?;
    let timing = Timing {
        parse_seconds,
        embed_seconds: t.elapsed().as_secs_f64(),
    };
    Ok(EmbedResult::new(
        &star,
        &report,
        InputDigest::of(input, m.len()),
        timing,
    ))
}

fn cmd_embed(
    input: &Path,
    format: Format,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let t = Instant::now();
    let (m, bytes) = read_metric(input, format)?;
    let r = embed_result(&m, &bytes, t.elapsed().as_secs_f64())?;
    let mut text = serde_json::to_string_pretty(&r).expect("serializable");
    text.push('\n');
    emit(output, &text, out)?;
    Ok(EXIT_OK)
}

fn cmd_lambda(
    input: &Path,
    format: Format,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (m, _) = read_metric(input, format)?;
    let l = lambda_star(&build_lambda_graph(&m))?;
    emit(
        output,
        &format!("{l} {}\n", to_decimal(&l, DECIMAL_DIGITS)),
        out,
    )?;
    Ok(EXIT_OK)
}

fn cmd_verify(
    metric: &Path,
    star: &Path,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (m, _) = read_metric(metric, format)?;
    let bytes = read_input(star)?;
    let r: EmbedResult = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::input(format!("{}: {e}", star.display())))?;
    let s = r
        .to_star()
        .map_err(|e| Failure::input(format!("{}: {e}", star.display())))?;
    let report = verify_star(&m, &s);
    let w = |e: io::Error| Failure::input(format!("stdout: {e}"));
    if report.is_feasible() {
        writeln!(out, "feasible at lambda = {}", s.lambda_star).map_err(w)?;
        return Ok(EXIT_OK);
    }
    for v in &report.violations {
        writeln!(out, "constraint ({}): {v}", v.constraint()).map_err(w)?;
    }
    writeln!(
        out,
        "infeasible: {} violation(s) at lambda = {}",
        report.violations.len(),
        s.lambda_star
    )
    .map_err(w)?;
    Ok(EXIT_VIOLATION)
}

pub const BENCH_HEADER: &str =
    "n,seed,model,seconds,lambda_star,lambda_decimal,iterations,max_breakpoints,probes";

fn cmd_bench(
    sizes: &[usize],
    seeds: &[u64],
    model: Model,
    err: &mut dyn Write,
) -> Result<String, Failure> {
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for &seed in seeds {
        for &n in sizes {
            let m = gen_random_metric(n, seed, model)?;
            let t = Instant::now();
            let (star, report) = embed_with_report(&m)?;
            let secs = t.elapsed().as_secs_f64();
            let _ = writeln!(err, "n={n} seed={seed}: {secs:.3}s");
            csv.push_str(&format!(
                "{n},{seed},{model},{secs:.6},{},{},{},{},{}\n",
                star.lambda_star,
                to_decimal(&star.lambda_star, DECIMAL_DIGITS),
                report.iterations,
                report.max_envelope_breakpoints,
                report.probes
            ));
        }
    }
    Ok(csv)
}

fn cmd_oracle(
    input: &Path,
    format: Format,
    tol: &Rational,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (m, _) = read_metric(input, format)?;
    let g = build_lambda_graph(&m);
    let parametric = lambda_star(&g)?;
    let bisect = bisect_lambda(&m, &g, tol)?;
    let mut text = format!(
        "parametric {parametric} {}\n",
        to_decimal(&parametric, DECIMAL_DIGITS)
    );
    text += &format!(
        "bisection {} (tol {tol})\n",
        to_decimal(&bisect, DECIMAL_DIGITS)
    );
    let mut agree = (&bisect - &parametric) <= *tol && (&parametric - &bisect) <= *tol;
    if m.len() <= MAX_ENUMERATION_SITES {
        let exact = exact_lambda_by_cycles(&g)?;
        text += &format!("cycles {exact} {}\n", to_decimal(&exact, DECIMAL_DIGITS));
        agree &= exact == parametric;
    } else {
        text += &format!("cycles skipped (n > {MAX_ENUMERATION_SITES})\n");
    }
    text += if agree { "agree\n" } else { "DISAGREE\n" };
    emit(output, &text, out)?;
    if agree {
        Ok(EXIT_OK)
    } else {
        Err(Failure::violation("oracles disagree"))
    }
}
