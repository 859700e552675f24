use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use toa_core::kernel::{boundary_report, kernel_to_qq, pde_residual};
use toa_core::numeric::{
    convergence_region_check, evaluate_phase, global_toa_quadrature, poisson_bracket_check,
    NumericConfig, PhasePoint,
};
use toa_core::ratseries::{format_rational, parse_rational};
use toa_core::tables::{table1_markdown, table2_markdown};
use toa_core::transforms::{t_hbar_transform, weyl_kernel};
use toa_core::{
    local_toa_series, solve_time_kernel, verify_correspondence, Arrival, Error,
    PolynomialPotential, Series,
};

/// Environment variable naming the directory for relative `-o` paths.
const OUTPUT_DIR_VAR: &str = "TOA_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "toa", version, about = "Exact time-of-arrival series engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format (defaults: json; csv for numeric; md for tables)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to this file instead of stdout
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical local arrival-time series
    Local {
        #[arg(short = 'V', long)]
        potential: String,
        #[arg(short = 'K', long, default_value_t = 4)]
        depth: u32,
        /// Emit -t_0 instead of t_0
        #[arg(long)]
        negate: bool,
        /// Arrival point (rational) or `x` to keep it symbolic
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        x: String,
    },
    /// Solve the time kernel equation
    Kernel {
        #[arg(short = 'V', long)]
        potential: String,
        #[arg(short = 'N', long, default_value_t = 8)]
        order: u32,
        /// Also emit the expansion in q and q'
        #[arg(long)]
        qq: bool,
    },
    /// Phase-space image of the solved kernel
    Transform {
        #[arg(short = 'V', long)]
        potential: String,
        #[arg(short = 'N', long, default_value_t = 8)]
        order: u32,
    },
    /// Weyl kernel of the local arrival-time series
    Weyl {
        #[arg(short = 'V', long)]
        potential: String,
        #[arg(short = 'K', long, default_value_t = 4)]
        depth: u32,
    },
    /// Compare the kernel and Weyl pipelines
    Compare {
        #[arg(short = 'V', long)]
        potential: String,
        #[arg(short = 'N', long, default_value_t = 8)]
        order: u32,
    },
    /// Series against quadrature at one or more phase-space points
    Numeric {
        #[arg(short = 'V', long)]
        potential: String,
        /// Positions, comma separated
        #[arg(
            long,
            allow_hyphen_values = true,
            value_delimiter = ',',
            required = true
        )]
        q: Vec<f64>,
        /// Momenta, comma separated
        #[arg(
            long,
            allow_hyphen_values = true,
            value_delimiter = ',',
            required = true
        )]
        p: Vec<f64>,
        #[arg(short = 'K', long, default_value_t = 10)]
        depth: u32,
        /// Symbol value, e.g. `lambda=2`; unset symbols default to 1
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Regenerate the reference tables
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        which: u32,
        #[arg(short = 'K', long, default_value_t = 4)]
        depth: u32,
        #[arg(short = 'N', long, default_value_t = 6)]
        order: u32,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Argument(_)
            | Error::Domain(_)
            | Error::UnboundSymbol(_) => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

/// Rendered output plus whether the run should signal inconsistency.
struct Output {
    text: String,
    inconsistent: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output {
            text,
            inconsistent: false,
        }
    }
}

fn potential(text: &str) -> Result<PolynomialPotential, Failure> {
    Ok(PolynomialPotential::parse(text)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn series_json(s: &Series) -> Value {
    serde_json::to_value(s.to_json()).expect("serializable")
}

fn series_table(s: &Series, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("coeff,term\n");
            for (m, c) in s.iter() {
                writeln!(out, "{},{}", format_rational(c), m).unwrap();
            }
        }
        _ => {
            out.push_str("| coeff | term |\n|---|---|\n");
            for (m, c) in s.iter() {
                writeln!(out, "| {} | {} |", format_rational(c), m).unwrap();
            }
        }
    }
    out
}

fn cmd_local(
    text: &str,
    depth: u32,
    negate: bool,
    x: &str,
    format: Format,
) -> Result<Output, Failure> {
    let v = potential(text)?;
    let arrival = if x.trim() == "x" {
        Arrival::Symbolic
    } else {
        Arrival::At(parse_rational(x.trim()).map_err(|e| Failure::Usage(e.to_string()))?)
    };
    let result = local_toa_series(&v, depth, &arrival)?;
    let series = if negate {
        result.series.neg()
    } else {
        result.series.clone()
    };
    let text = match format {
        Format::Json => pretty(&json!({
            "potential": v.to_string(),
            "depth": depth,
            "negated": negate,
            "series": series_json(&series),
            "per_order": result.per_order.iter().map(series_json).collect::<Vec<_>>(),
        })),
        Format::Csv | Format::Md => {
            let mut out = String::new();
            if format == Format::Csv {
                out.push_str("k,coeff,term\n");
            } else {
                let label = if negate { "-t_0" } else { "t_0" };
                writeln!(out, "Local arrival time for V = {v}\n").unwrap();
                writeln!(out, "| k | coefficient of {label} | term |\n|---|---|---|").unwrap();
            }
            for (k, t) in result.per_order.iter().enumerate() {
                // the k-th order enters t_0 with sign (-1)^k
                let flip = (k % 2 == 1) != negate;
                for (m, c) in t.iter() {
                    let c = if flip { -c.clone() } else { c.clone() };
                    if format == Format::Csv {
                        writeln!(out, "{k},{},{m}", format_rational(&c)).unwrap();
                    } else {
                        writeln!(out, "| {k} | {} | {m} |", format_rational(&c)).unwrap();
                    }
                }
            }
            out
        }
    };
    Ok(Output::ok(text))
}

fn cmd_kernel(text: &str, order: u32, qq: bool, format: Format) -> Result<Output, Failure> {
    let v = potential(text)?;
    let kernel = solve_time_kernel(&v, order)?;
    let boundary = boundary_report(&kernel)?;
    let residual_empty = pde_residual(&kernel)?.is_empty();
    let text = match format {
        Format::Json => {
            let mut doc = json!({
                "potential": v.to_string(),
                "order": order,
                "series": series_json(&kernel.series),
                "boundary": {
                    "diagonal": boundary.diagonal,
                    "antidiagonal": boundary.antidiagonal,
                    "composite": boundary.composite,
                    "passed": boundary.passed(),
                },
                "residual_empty": residual_empty,
            });
            if qq {
                let terms: Vec<Value> = kernel_to_qq(&kernel)
                    .into_iter()
                    .map(|t| {
                        json!({
                            "coeff": format_rational(&t.coeff),
                            "factor": t.factor.to_string(),
                            "q": t.q,
                            "qp": t.qp,
                        })
                    })
                    .collect();
                doc["qq"] = Value::Array(terms);
            }
            pretty(&doc)
        }
        Format::Md => {
            let mut out = format!("Time kernel for V = {v}, v order {order}\n\n");
            out.push_str("| u | v | coefficient | term |\n|---|---|---|---|\n");
            for (m, c) in kernel.series.iter() {
                writeln!(
                    out,
                    "| {} | {} | {} | {m} |",
                    m.u(),
                    m.v(),
                    format_rational(c)
                )
                .unwrap();
            }
            writeln!(
                out,
                "\nboundary conditions: {}; residual: {}",
                if boundary.passed() {
                    "satisfied"
                } else {
                    "VIOLATED"
                },
                if residual_empty { "zero" } else { "NONZERO" }
            )
            .unwrap();
            if qq {
                out.push_str(
                    "\n| q power | q' power | coefficient | factor |\n|---|---|---|---|\n",
                );
                for t in kernel_to_qq(&kernel) {
                    writeln!(
                        out,
                        "| {} | {} | {} | {} |",
                        t.q,
                        t.qp,
                        format_rational(&t.coeff),
                        t.factor
                    )
                    .unwrap();
                }
            }
            out
        }
        Format::Csv => series_table(&kernel.series, Format::Csv),
    };
    Ok(Output::ok(text))
}

fn cmd_transform(text: &str, order: u32, format: Format) -> Result<Output, Failure> {
    let v = potential(text)?;
    let kernel = solve_time_kernel(&v, order)?;
    let image = t_hbar_transform(&kernel)?;
    Ok(Output::ok(match format {
        Format::Json => pretty(&series_json(&image)),
        f => series_table(&image, f),
    }))
}

fn cmd_weyl(text: &str, depth: u32, format: Format) -> Result<Output, Failure> {
    let v = potential(text)?;
    let t0 = local_toa_series(&v, depth, &Arrival::origin())?;
    let w = weyl_kernel(&t0.series)?;
    Ok(Output::ok(match format {
        Format::Json => pretty(&series_json(&w)),
        f => series_table(&w, f),
    }))
}

fn cmd_compare(text: &str, order: u32, format: Format) -> Result<Output, Failure> {
    let v = potential(text)?;
    let report = verify_correspondence(&v, order)?;
    let text = match format {
        Format::Json => pretty(&serde_json::to_value(report.to_json()).expect("serializable")),
        f => {
            let mut out = String::new();
            if f == Format::Md {
                writeln!(out, "Comparison for V = {v}, v order {order}\n").unwrap();
            }
            let orders: Vec<String> = report
                .correction_orders
                .iter()
                .map(|h| h.to_string())
                .collect();
            let rows = [
                ("system_class", format!("{:?}", report.system_class)),
                ("classical_match", report.classical_match.to_string()),
                ("correction_orders", orders.join(" ")),
                ("weyl_equals_kernel", report.weyl_equals_kernel.to_string()),
                (
                    "weyl_matches_leading_family",
                    report.weyl_matches_leading_family.to_string(),
                ),
                ("delta_terms", report.delta_series.len().to_string()),
            ];
            if f == Format::Csv {
                out.push_str("field,value\n");
                for (k, val) in rows {
                    writeln!(out, "{k},{val}").unwrap();
                }
            } else {
                out.push_str("| field | value |\n|---|---|\n");
                for (k, val) in rows {
                    writeln!(out, "| {k} | {val} |").unwrap();
                }
                out.push('\n');
                out.push_str(&series_table(&report.delta_series, Format::Md));
            }
            out
        }
    };
    Ok(Output {
        text,
        inconsistent: !report.consistent(),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_numeric(
    text: &str,
    qs: &[f64],
    ps: &[f64],
    depth: u32,
    params: &[(String, f64)],
    mu: f64,
    hbar: f64,
    tol: f64,
    format: Format,
) -> Result<Output, Failure> {
    let v = potential(text)?;
    let cfg = NumericConfig {
        abs_tol: tol,
        ..NumericConfig::default()
    };
    cfg.validate()?;
    let mut values: BTreeMap<String, f64> = v.symbols().into_iter().map(|s| (s, 1.0)).collect();
    values.extend(params.iter().cloned());
    let base = PhasePoint {
        q: 0.0,
        p: 1.0,
        x: 0.0,
        params: values,
        mu,
        hbar,
    };
    let series = local_toa_series(&v, depth, &Arrival::origin())?.series;

    let mut rows = Vec::new();
    for &q in qs {
        for &p in ps {
            let pt = base.at(q, p);
            let series_value = evaluate_phase(&series, &pt).ok();
            let in_region = convergence_region_check(&v, &pt)?;
            let (quadrature_value, status) = match global_toa_quadrature(&v, &pt, &cfg) {
                Ok(t) => (Some(t), "ok"),
                Err(Error::Unreachable { .. }) => (None, "unreachable"),
                Err(Error::SingularEvaluation(_)) => (None, "singular"),
                Err(Error::Budget(_)) => (None, "budget"),
                Err(e) => return Err(e.into()),
            };
            let status = if status == "ok" && !in_region {
                "out_of_region"
            } else {
                status
            };
            let residual =
                poisson_bracket_check(|q, p| evaluate_phase(&series, &pt.at(q, p)), &v, &pt, &cfg)
                    .ok();
            let abs_error = match (series_value, quadrature_value) {
                (Some(s), Some(t)) => Some((s - t).abs()),
                _ => None,
            };
            rows.push((
                q,
                p,
                series_value,
                quadrature_value,
                abs_error,
                in_region,
                residual,
                status,
            ));
        }
    }
    let cell = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    let text = match format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "q": r.0, "p": r.1, "K": depth,
                        "series_value": r.2, "quadrature_value": r.3, "abs_error": r.4,
                        "in_region": r.5, "poisson_residual": r.6, "status": r.7,
                    })
                })
                .collect();
            pretty(&Value::Array(items))
        }
        Format::Csv | Format::Md => {
            let header = [
                "q",
                "p",
                "K",
                "series_value",
                "quadrature_value",
                "abs_error",
                "in_region",
                "poisson_residual",
                "status",
            ];
            let mut out = String::new();
            let lines: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.0.to_string(),
                        r.1.to_string(),
                        depth.to_string(),
                        cell(r.2),
                        cell(r.3),
                        cell(r.4),
                        r.5.to_string(),
                        cell(r.6),
                        r.7.to_string(),
                    ]
                })
                .collect();
            if format == Format::Csv {
                writeln!(out, "{}", header.join(",")).unwrap();
                for l in lines {
                    writeln!(out, "{}", l.join(",")).unwrap();
                }
            } else {
                writeln!(out, "| {} |", header.join(" | ")).unwrap();
                writeln!(out, "|{}", "---|".repeat(header.len())).unwrap();
                for l in lines {
                    writeln!(out, "| {} |", l.join(" | ")).unwrap();
                }
            }
            out
        }
    };
    Ok(Output::ok(text))
}

fn cmd_tables(which: u32, depth: u32, order: u32, format: Format) -> Result<Output, Failure> {
    if format != Format::Md {
        return Err(Failure::Usage(
            "tables are only rendered as markdown".into(),
        ));
    }
    let text = match which {
        1 => table1_markdown(depth)?,
        _ => table2_markdown(order)?,
    };
    Ok(Output::ok(text))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Local {
            potential,
            depth,
            negate,
            x,
        } => cmd_local(potential, *depth, *negate, x, fmt(Format::Json)),
        Command::Kernel {
            potential,
            order,
            qq,
        } => cmd_kernel(potential, *order, *qq, fmt(Format::Json)),
        Command::Transform { potential, order } => {
            cmd_transform(potential, *order, fmt(Format::Json))
        }
        Command::Weyl { potential, depth } => cmd_weyl(potential, *depth, fmt(Format::Json)),
        Command::Compare { potential, order } => cmd_compare(potential, *order, fmt(Format::Json)),
        Command::Numeric {
            potential,
            q,
            p,
            depth,
            params,
            mu,
            hbar,
            tol,
        } => cmd_numeric(
            potential,
            q,
            p,
            *depth,
            params,
            *mu,
            *hbar,
            *tol,
            fmt(Format::Csv),
        ),
        Command::Tables {
            which,
            depth,
            order,
        } => cmd_tables(*which, *depth, *order, fmt(Format::Md)),
    }
}

fn resolve_output(path: &PathBuf) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_VAR) {
            return PathBuf::from(dir).join(path);
        }
    }
    path.clone()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (output, code) = match run(&cli) {
        Ok(out) => {
            let code = if out.inconsistent { 3 } else { 0 };
            (out.text, code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match &cli.output {
        Some(path) => {
            let path = resolve_output(path);
            if let Err(e) = std::fs::write(&path, &output) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{output}"),
    }
    if code == 3 {
        eprintln!("error: pipelines disagree");
    }
    ExitCode::from(code)
}
