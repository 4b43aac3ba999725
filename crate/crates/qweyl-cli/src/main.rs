//! Command-line front end: normalize expressions, run identity suites, emit
//! matrices, derivative profiles, and relation fits.
//!
//! Exit status: 0 when every verification in the run passed, 1 on a
//! verification failure (with a differing-term witness on stdout), 2 on
//! parse/context/usage errors (diagnostics on stderr). Timings go to stderr
//! so identical configurations produce byte-identical stdout.

use std::io::Read;
use std::process;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use qweyl::exprlang::{self, print as print_expr};
use qweyl::identities::{
    fit_relations5, verify_identity, Family, IdentitySpec, ScalarFit, VerificationReport,
};
use qweyl::polyrep;
use qweyl::{AlgebraContext, OperatorExpr, Rational, RuleSet};

#[derive(Parser)]
#[command(name = "qweyl", version, about = "Exact operator normal ordering and identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize an expression (from the argument or stdin)
    Normalize(NormalizeArgs),
    /// Verify an identity family over a range of n
    Verify(VerifyArgs),
    /// Matrix of an operator on the module of polynomials of degree <= n
    Matrix(MatrixArgs),
    /// Derivative-order profile of a normalized expression
    Profile(ProfileArgs),
    /// Fit multiplicative factors for the q-deformed sl2 relations
    Fit5(Fit5Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum CtxName {
    Classical,
    Grassmann,
    Qline,
    Qplane,
    Qhyper,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Structured,
}

#[derive(Args)]
struct CtxArgs {
    /// Algebra rule set
    #[arg(long = "ctx", value_enum, default_value = "classical")]
    ctx: CtxName,
    /// Bosonic variable count (defaults: classical/grassmann 1, qhyper 3)
    #[arg(long)]
    vars: Option<usize>,
    /// Grassmann variable count (grassmann rule set, default 1)
    #[arg(long)]
    grassmann_vars: Option<usize>,
}

impl CtxArgs {
    fn resolve(&self) -> Result<AlgebraContext, String> {
        let fixed = |want: usize, name: &str| -> Result<(), String> {
            match self.vars {
                Some(v) if v != want => Err(format!("{name} has exactly {want} variable(s)")),
                _ => Ok(()),
            }
        };
        let ctx = match self.ctx {
            CtxName::Classical => {
                AlgebraContext::new(self.vars.unwrap_or(1), 0, RuleSet::Classical)
            }
            CtxName::Grassmann => AlgebraContext::new(
                self.vars.unwrap_or(1),
                self.grassmann_vars.unwrap_or(1),
                RuleSet::ClassicalGrassmann,
            ),
            CtxName::Qline => {
                fixed(1, "the q-line")?;
                AlgebraContext::new(1, 0, RuleSet::QLine)
            }
            CtxName::Qplane => {
                fixed(2, "the quantum plane")?;
                AlgebraContext::new(2, 0, RuleSet::QuantumPlane)
            }
            CtxName::Qhyper => {
                AlgebraContext::new(self.vars.unwrap_or(3), 0, RuleSet::QuantumHyperplane)
            }
        };
        ctx.map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct NormalizeArgs {
    #[command(flatten)]
    ctx: CtxArgs,
    /// Evaluate coefficients at a rational q
    #[arg(long)]
    q: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Expression; read from stdin when absent
    expr: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Identity family
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Inclusive range `a..b` or a single value
    #[arg(long)]
    n: String,
    /// Variable count (eq3 and hyper)
    #[arg(long)]
    vars: Option<usize>,
    /// Grassmann variant (eq2)
    #[arg(long)]
    grassmann: bool,
    /// Compare coefficients evaluated at a rational q instead of symbolically
    #[arg(long)]
    q: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Eq1,
    Eq2,
    Eq3,
    Eq4,
    Eq7,
    Hyper,
}

impl From<FamilyName> for Family {
    fn from(f: FamilyName) -> Family {
        match f {
            FamilyName::Eq1 => Family::Eq1,
            FamilyName::Eq2 => Family::Eq2,
            FamilyName::Eq3 => Family::Eq3,
            FamilyName::Eq4 => Family::Eq4,
            FamilyName::Eq7 => Family::Eq7,
            FamilyName::Hyper => Family::HyperplaneAnnihilation,
        }
    }
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    ctx: CtxArgs,
    /// Module degree bound n
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Expression; read from stdin when absent
    expr: Option<String>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    ctx: CtxArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Expression; read from stdin when absent
    expr: Option<String>,
}

#[derive(Args)]
struct Fit5Args {
    /// Inclusive range `a..b` or a single value
    #[arg(long)]
    n: String,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

fn parse_range(text: &str) -> Result<(u32, u32), String> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| format!("invalid range bound `{s}`"))
    };
    if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (parse_one(a)?, parse_one(b)?);
        if a > b {
            return Err(format!("empty range `{text}`"));
        }
        Ok((a, b))
    } else {
        let n = parse_one(text)?;
        Ok((n, n))
    }
}

fn parse_rational(text: &str) -> Result<Rational, String> {
    let parse_int = |s: &str| {
        s.trim()
            .parse::<BigInt>()
            .map_err(|_| format!("invalid rational `{text}`"))
    };
    if let Some((num, den)) = text.split_once('/') {
        let den = parse_int(den)?;
        if den == BigInt::from(0) {
            return Err(format!("invalid rational `{text}`: zero denominator"));
        }
        Ok(Rational::new(parse_int(num)?, den))
    } else {
        Ok(Rational::from_integer(parse_int(text)?))
    }
}

fn read_expr(arg: Option<String>) -> Result<String, String> {
    match arg {
        Some(text) => Ok(text),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("failed to read stdin: {e}"))?;
            Ok(buf)
        }
    }
}

fn parse_input(text: &str, ctx: &AlgebraContext) -> Result<OperatorExpr, String> {
    exprlang::parse(text.trim(), ctx).map_err(|e| e.to_string())
}

fn cmd_normalize(args: NormalizeArgs) -> Result<u32, String> {
    let ctx = args.ctx.resolve()?;
    let text = read_expr(args.expr)?;
    let mut e = parse_input(&text, &ctx)?.normalize();
    if let Some(q) = &args.q {
        let q0 = parse_rational(q)?;
        e = e.specialize_q(&q0).map_err(|err| err.to_string())?;
    }
    match args.format {
        OutputFormat::Text => println!("{}", print_expr(&e)),
        OutputFormat::Structured => {
            let record = json!({
                "command": "normalize",
                "input": text.trim(),
                "normalForm": print_expr(&e),
                "termCount": e.term_count(),
                "gradedDegree": e.graded_degree(),
            });
            println!("{record}");
        }
    }
    Ok(0)
}

fn witness_json(report: &VerificationReport) -> serde_json::Value {
    match &report.witness {
        None => serde_json::Value::Null,
        Some(w) => {
            // render the monomial through a one-term expression
            let ctx = *report.lhs_normal.context();
            let as_expr = OperatorExpr::from_terms(
                ctx,
                [(w.monomial.clone(), qweyl::ScalarQuotient::one())],
            );
            json!({
                "monomial": print_expr(&as_expr),
                "lhs": w.lhs_coeff.to_string(),
                "rhs": w.rhs_coeff.to_string(),
            })
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<u32, String> {
    let (lo, hi) = parse_range(&args.n)?;
    let q0 = args.q.as_deref().map(parse_rational).transpose()?;
    let family: Family = args.family.into();
    let mut failures = 0u32;
    for n in lo..=hi {
        let mut spec = IdentitySpec::new(family, n);
        if let Some(v) = args.vars {
            spec.n_vars = v;
        }
        spec.grassmann = args.grassmann;
        let started = Instant::now();
        let report = verify_identity(&spec).map_err(|e| e.to_string())?;
        let equal = match (&q0, &report.rhs_normal) {
            // smoke mode: compare coefficients evaluated at q = q0
            (Some(q0), Some(rhs)) => {
                let lhs_at = report
                    .lhs_normal
                    .coefficients_at(q0)
                    .map_err(|e| e.to_string())?;
                let rhs_at = rhs.coefficients_at(q0).map_err(|e| e.to_string())?;
                lhs_at == rhs_at
            }
            _ => report.equal,
        };
        if !equal {
            failures += 1;
        }
        eprintln!(
            "timing: {spec}: {:.1?} (terms={})",
            started.elapsed(),
            report.term_count
        );
        match args.format {
            OutputFormat::Text => {
                let verdict = if equal { "PASS" } else { "FAIL" };
                let mut line = format!("verify {spec}: {verdict} (terms={})", report.term_count);
                if let Some(q) = &args.q {
                    line.push_str(&format!(" at q={q}"));
                }
                println!("{line}");
                if let Some(w) = &report.witness {
                    println!(
                        "  differing term: lhs={} rhs={} at monomial exponents {:?}|{:?}",
                        w.lhs_coeff,
                        w.rhs_coeff,
                        w.monomial.var_exp(),
                        w.monomial.deriv_exp()
                    );
                }
            }
            OutputFormat::Structured => {
                let record = json!({
                    "command": "verify",
                    "family": spec.family.to_string(),
                    "n": spec.n,
                    "vars": spec.n_vars,
                    "grassmann": spec.grassmann,
                    "q": args.q,
                    "equal": equal,
                    "termCount": report.term_count,
                    "lhs": print_expr(&report.lhs_normal),
                    "rhs": report.rhs_normal.as_ref().map(print_expr),
                    "witness": witness_json(&report),
                });
                println!("{record}");
            }
        }
    }
    Ok(failures)
}

fn cmd_matrix(args: MatrixArgs) -> Result<u32, String> {
    let ctx = args.ctx.resolve()?;
    let text = read_expr(args.expr)?;
    let e = parse_input(&text, &ctx)?.normalize();
    let m = polyrep::matrix_of(&e, args.n).map_err(|err| err.to_string())?;
    match args.format {
        OutputFormat::Text => print!("{m}"),
        OutputFormat::Structured => {
            let d = m.dim();
            let rows: Vec<Vec<String>> = (0..d)
                .map(|i| (0..d).map(|j| m.entry(i, j).to_string()).collect())
                .collect();
            let basis: Vec<String> = m
                .basis()
                .iter()
                .map(|b| {
                    qweyl::polyrep::PolyElement::monomial(ctx, b.clone()).to_string()
                })
                .collect();
            let record = json!({
                "command": "matrix",
                "n": args.n,
                "dim": d,
                "basis": basis,
                "rows": rows,
            });
            println!("{record}");
        }
    }
    Ok(0)
}

fn cmd_profile(args: ProfileArgs) -> Result<u32, String> {
    let ctx = args.ctx.resolve()?;
    let text = read_expr(args.expr)?;
    let e = parse_input(&text, &ctx)?.normalize();
    let orders: Vec<u32> = polyrep::derivative_profile(&e).into_iter().collect();
    match args.format {
        OutputFormat::Text => {
            let rendered: Vec<String> = orders.iter().map(u32::to_string).collect();
            println!("derivative orders: {}", rendered.join(" "));
        }
        OutputFormat::Structured => {
            let record = json!({ "command": "profile", "orders": orders });
            println!("{record}");
        }
    }
    Ok(0)
}

fn fit_text(fit: &ScalarFit) -> String {
    match (&fit.relations_hold, &fit.factors) {
        (true, Some(f)) => format!(
            "fit5 n={}: PASS alpha_plus={} alpha_zero={} alpha_minus={}",
            fit.n, f.plus, f.zero, f.minus
        ),
        _ => {
            let lams: Vec<String> = fit
                .proportionality
                .iter()
                .map(|l| match l {
                    Some(v) => v.to_string(),
                    None => "not proportional".to_string(),
                })
                .collect();
            format!(
                "fit5 n={}: FAIL proportionality=[{}]",
                fit.n,
                lams.join("; ")
            )
        }
    }
}

fn cmd_fit5(args: Fit5Args) -> Result<u32, String> {
    let (lo, hi) = parse_range(&args.n)?;
    let mut failures = 0u32;
    for n in lo..=hi {
        let started = Instant::now();
        let fit = fit_relations5(n);
        eprintln!("timing: fit5 n={n}: {:.1?}", started.elapsed());
        if !fit.relations_hold {
            failures += 1;
        }
        match args.format {
            OutputFormat::Text => println!("{}", fit_text(&fit)),
            OutputFormat::Structured => {
                let lams: Vec<serde_json::Value> = fit
                    .proportionality
                    .iter()
                    .map(|l| match l {
                        Some(v) => json!(v.to_string()),
                        None => serde_json::Value::Null,
                    })
                    .collect();
                let record = json!({
                    "command": "fit5",
                    "n": n,
                    "relationsHold": fit.relations_hold,
                    "factors": fit.factors.as_ref().map(|f| json!({
                        "plus": f.plus.to_string(),
                        "zero": f.zero.to_string(),
                        "minus": f.minus.to_string(),
                    })),
                    "proportionality": lams,
                    "residuals": if fit.relations_hold {
                        serde_json::Value::Null
                    } else {
                        json!(fit.residuals.iter().map(print_expr).collect::<Vec<_>>())
                    },
                });
                println!("{record}");
            }
        }
    }
    Ok(failures)
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Normalize(args) => cmd_normalize(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Matrix(args) => cmd_matrix(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Fit5(args) => cmd_fit5(args),
    };
    match outcome {
        Ok(0) => {}
        Ok(failures) => {
            eprintln!("{failures} verification(s) failed");
            process::exit(1);
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            process::exit(2);
        }
    }
}
