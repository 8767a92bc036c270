use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use weylab::endomatrix::{exp_lambda_with, DenomSeq};
use weylab::json::{self, ExpandSpec, JsonError};
use weylab::ladder::{self, ContinuousMode};
use weylab::oneparam::integrate_monomial;
use weylab::parser::{parse_normal_form, ParseError};
use weylab::rational::parse_q;
use weylab::stirling::{egf_extract, in_sheffer_scope, sheffer_check, stirling_table};
use weylab::{Exec, NormalForm, Q};

const GRAMMAR: &str = "\
Operator expressions:
  expr     := ['-'] term (('+' | '-') term)*
  term     := factor ('*'? factor)*         juxtaposition multiplies
  factor   := atom ('^' nat)?
  atom     := 'a+' | 'a' | rational | '(' expr ')'
  rational := p | p/q                        no inner spaces

A '+' directly after 'a' forms the creation operator a+; with whitespace in
between it is addition. The spellings a\u{207a} and a\u{2020} are also accepted.
Products are noncommutative with a a+ - a+ a = 1.

Examples:
  weylab normal-order \"a a+\"
  weylab stirling --op \"a+ a a+\" --rows 6 --format latex
  weylab expand crates/cli/fixtures/epsilon.json --margin 8";

#[derive(Parser)]
#[command(name = "weylab", version, about = "Exact normal ordering, Stirling tables and ladder expansions")]
#[command(after_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the normal-ordered form of an expression.
    NormalOrder {
        #[command(flatten)]
        op: OpArg,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
        #[command(flatten)]
        out: OutArg,
    },
    /// Tabulate the generalized Stirling numbers of a homogeneous operator.
    Stirling {
        #[command(flatten)]
        op: OpArg,
        /// Largest power n in the table.
        #[arg(long, default_value_t = 6, value_parser = positive)]
        rows: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[command(flatten)]
        out: OutArg,
    },
    /// Extract g and phi from the first two table columns and check the Sheffer form.
    Egf {
        #[command(flatten)]
        op: OpArg,
        /// Largest power n in the table.
        #[arg(long, default_value_t = 8, value_parser = positive)]
        rows: usize,
        /// Truncation order of g and phi, at most --rows.
        #[arg(long, value_parser = positive)]
        trunc: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Matrix of exp(lambda Omega) on polynomials of degree at most --trunc.
    Exp {
        #[command(flatten)]
        op: OpArg,
        /// Top degree N of the truncated representation.
        #[arg(long, default_value_t = 8, value_parser = positive)]
        trunc: usize,
        #[arg(long, default_value_t = 4, value_parser = positive)]
        lambda_order: usize,
        #[arg(long, value_enum, default_value_t = Denoms::Ones)]
        denoms: Denoms,
        #[command(flatten)]
        out: OutArg,
    },
    /// Integrate the vector field alpha x^m d/dx + beta x^(m-1) to a prefunction-substitution pair.
    Integrate {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value_t = 4, value_parser = positive)]
        lambda_order: usize,
        #[arg(long, default_value_t = 10, value_parser = positive)]
        x_order: usize,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
        #[command(flatten)]
        out: OutArg,
    },
    /// Expand an endomorphism in ladder operators from a JSON job file.
    Expand {
        /// Job file with schema, top, phi, a, alpha, b, beta.
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Endo)]
        mode: Mode,
        /// Extra basis vectors kept beyond the top index [default: the top index].
        #[arg(long, env = "WEYLAB_MARGIN")]
        margin: Option<usize>,
        #[arg(long, value_enum, default_value_t = PolyFormat::Json)]
        format: PolyFormat,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args)]
struct OpArg {
    /// Operator expression.
    #[arg(conflicts_with = "op", allow_hyphen_values = true)]
    expr: Option<String>,
    /// Operator expression, as an alternative to the positional form.
    #[arg(long = "op", allow_hyphen_values = true)]
    op: Option<String>,
}

#[derive(Args)]
struct OutArg {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
    Latex,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolyFormat {
    Json,
    Latex,
}

#[derive(Clone, Copy, ValueEnum)]
enum Denoms {
    Ones,
    Factorial,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// phi = sum_n P_n(R_a) L_b^n with ladders relative to the bases a and b.
    Endo,
    /// psi = sum_n R^n P_n(L) with R, L built from beta shifted up and alpha shifted down.
    Continuous,
    /// psi = sum_n R_alpha^n P_n(L_beta).
    Dual,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    fn domain(e: impl Display) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<JsonError> for Failure {
    fn from(e: JsonError) -> Self {
        match e {
            JsonError::Ladder(e) => Failure::Domain(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Result of a command: the text to emit and whether its check passed.
struct Output {
    text: String,
    ok: bool,
}

impl Output {
    fn plain(text: String) -> Self {
        Output { text, ok: true }
    }
}

fn located(src: &str, e: &ParseError) -> String {
    let col = src[..e.offset.min(src.len())].chars().count();
    format!("{e}\n  {src}\n  {}^", " ".repeat(col))
}

impl OpArg {
    fn source(&self) -> Result<&str, Failure> {
        let src = self.op.as_deref().or(self.expr.as_deref());
        match src {
            None => Err(Failure::Usage("an operator expression is required".into())),
            Some(s) if s.trim().is_empty() => Err(Failure::Usage("empty operator expression".into())),
            Some(s) => Ok(s),
        }
    }

    fn parse(&self) -> Result<(String, NormalForm), Failure> {
        let src = self.source()?;
        let f = parse_normal_form(src).map_err(|e| Failure::Usage(located(src, &e)))?;
        Ok((src.trim().to_string(), f))
    }
}

fn to_json(doc: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

fn rational_arg(name: &str, s: &str) -> Result<Q, Failure> {
    parse_q(s.trim()).ok_or_else(|| Failure::Usage(format!("--{name}: invalid rational {s:?}")))
}

fn normal_order(op: &OpArg, format: TextFormat) -> Result<Output, Failure> {
    let (_, f) = op.parse()?;
    Ok(Output::plain(match format {
        TextFormat::Text => format!("{}\n", f.render()),
        TextFormat::Json => to_json(&json::normal_form(&f)),
    }))
}

fn stirling(op: &OpArg, rows: usize, format: TableFormat) -> Result<Output, Failure> {
    let (src, f) = op.parse()?;
    let table = stirling_table(&f, rows).map_err(Failure::domain)?;
    Ok(Output::plain(match format {
        TableFormat::Csv => table.to_csv(),
        TableFormat::Json => to_json(&json::stirling(&table, &src)),
        TableFormat::Latex => table.to_latex(),
    }))
}

fn egf(op: &OpArg, rows: usize, trunc: Option<usize>) -> Result<Output, Failure> {
    let (src, f) = op.parse()?;
    let order = trunc.unwrap_or(rows);
    if order > rows {
        return Err(Failure::Usage(format!("--trunc {order} exceeds --rows {rows}")));
    }
    let table = stirling_table(&f, rows).map_err(Failure::domain)?;
    let (g, phi) = egf_extract(&table, order).map_err(Failure::domain)?;
    let check = sheffer_check(&table, &g, &phi);
    let in_scope = in_sheffer_scope(&f);
    Ok(Output {
        text: to_json(&json::egf(&src, &table, in_scope, &g, &phi, &check)),
        ok: check.passed() || !in_scope,
    })
}

fn exp(op: &OpArg, trunc: usize, lambda_order: usize, denoms: Denoms) -> Result<Output, Failure> {
    let (_, f) = op.parse()?;
    let denoms = match denoms {
        Denoms::Ones => DenomSeq::Ones,
        Denoms::Factorial => DenomSeq::Factorial,
    };
    let m = exp_lambda_with(&f, trunc, lambda_order, denoms, Exec::default()).map_err(Failure::domain)?;
    Ok(Output::plain(to_json(&json::series_matrix(&m))))
}

fn integrate(
    alpha: &str,
    m: u32,
    beta: &str,
    lambda_order: usize,
    x_order: usize,
    format: TextFormat,
) -> Result<Output, Failure> {
    let alpha = rational_arg("alpha", alpha)?;
    let beta = rational_arg("beta", beta)?;
    let u = integrate_monomial(&alpha, m, &beta, lambda_order, x_order).map_err(Failure::domain)?;
    let text = match format {
        TextFormat::Json => to_json(&json::prefsub(&u)),
        TextFormat::Text => {
            let mut out = String::new();
            for (name, series) in [("g", u.g()), ("s", u.s())] {
                for k in 0..=lambda_order {
                    let c = series.coeff_series("lambda", k).map_err(Failure::domain)?;
                    let c = c.to_univariate().map_err(Failure::domain)?;
                    if !c.is_zero() {
                        out.push_str(&format!("{name}[lambda^{k}] = {}\n", c.render("x")));
                    }
                }
            }
            out
        }
    };
    Ok(Output::plain(text))
}

fn expand(file: &PathBuf, mode: Mode, margin: Option<usize>, format: PolyFormat) -> Result<Output, Failure> {
    let text = fs::read_to_string(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let job = ExpandSpec::parse(&text)?.resolve(margin)?;
    let w = job.phi.dim();
    let (p, check, name) = match mode {
        Mode::Endo => {
            let p = ladder::expand_endo(&job.phi, &job.a, &job.alpha, &job.b, &job.beta, job.top).map_err(Failure::domain)?;
            let rebuilt = ladder::reconstruct(&p, &job.a, &job.alpha, &job.b, &job.beta).map_err(Failure::domain)?;
            let check = ladder::agree_on_span(&job.phi, &rebuilt, &job.b, job.top).map_err(Failure::domain)?;
            (p, check, "endo")
        }
        Mode::Continuous | Mode::Dual => {
            let (mode, name) = match mode {
                Mode::Dual => (ContinuousMode::Dual, "dual"),
                _ => (ContinuousMode::Direct, "continuous"),
            };
            let p = ladder::expand_continuous(&job.phi, &job.a, &job.alpha, &job.beta, job.top, mode)
                .map_err(Failure::domain)?;
            let check = ladder::verify_continuous(&job.phi, &job.a, &job.alpha, &job.beta, &p, mode)
                .map_err(Failure::domain)?;
            (p, check, name)
        }
    };
    let text = match format {
        PolyFormat::Json => to_json(&json::poly_seq(&p, name, w, &check)),
        PolyFormat::Latex => p.to_latex(),
    };
    Ok(Output { text, ok: check.passed() })
}

fn emit(out: &OutArg, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Domain(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (result, out) = match &cli.command {
        Command::NormalOrder { op, format, out } => (normal_order(op, *format), out),
        Command::Stirling { op, rows, format, out } => (stirling(op, *rows, *format), out),
        Command::Egf { op, rows, trunc, out } => (egf(op, *rows, *trunc), out),
        Command::Exp { op, trunc, lambda_order, denoms, out } => (exp(op, *trunc, *lambda_order, *denoms), out),
        Command::Integrate { alpha, m, beta, lambda_order, x_order, format, out } => {
            (integrate(alpha, *m, beta, *lambda_order, *x_order, *format), out)
        }
        Command::Expand { file, mode, margin, format, out } => (expand(file, *mode, *margin, *format), out),
    };
    let output = result?;
    emit(out, &output.text)?;
    Ok(output.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed, see the check field of the output");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

