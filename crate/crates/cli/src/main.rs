//! `linforms`: decompose nested sums and integrals into linear forms in
//! polylogarithms and verify the results.
//!
//! Exit codes: 0 when every check passes, 1 on usage or pipeline errors,
//! 2 when a verification check fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use linforms::algebra::{lcm_upto, rational_to_string};
use linforms::cache::{decompose_integral_cached, FormCache};
use linforms::corpus::{elementary_corpus, nested_sum_corpus, ElementaryBounds};
use linforms::elementary::{check_form, decompose, Decomposer};
use linforms::heights::{
    empirical_height_growth, maximize_f, rows_to_csv, upper_bound_conditions, vasilyev_asymptotic,
};
use linforms::linear_form::{
    integral_value_at_1, validate, value_at_one, vasilyev_params, vasilyev_structure_check,
    ParamsFile, ValidationMode,
};
use linforms::normal_reduction::{clears, reduce};
use linforms::oracle::{
    coupled_sum_series, linear_form_series, nested_sum_series, series_equal, SeriesWindow,
};
use linforms::real;
use linforms::{
    ElementarySum, Error, LinearForm, MultiIndex, Polynomial, PrecisionContext, Rational,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "linforms",
    version,
    about = "Linear forms in polylogarithms from nested sums and integrals"
)]
struct Cli {
    /// Worker threads for independent jobs (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose one shifted elementary sum and check it.
    Elementary {
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<u32>,
        #[arg(long, default_value_t = 60)]
        order: usize,
    },
    /// The odd-zeta integral family: form, integrality, structure and value at 1.
    Vasilyev {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
    /// Decompose an integral given by a JSON parameter file.
    Decompose {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
    /// Check a seeded random corpus of elementary and nested sums.
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        nested: usize,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        #[arg(long, default_value_t = 3)]
        max_u: u32,
        #[arg(long, default_value_t = 4)]
        max_p: u32,
        #[arg(long, default_value_t = 60)]
        order: usize,
        /// Corrupt every form before checking, to exercise the failure path.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Exact heights of the odd-zeta forms against the growth constant M.
    Heights {
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn json(value: &Value, passed: bool) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        Self { text, passed }
    }
}

fn form_value(form: &LinearForm) -> Result<Value, Error> {
    Ok(serde_json::from_str(&form.to_json()?)?)
}

fn header(command: &str, params: Value) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("tool".into(), json!("linforms"));
    map.insert("version".into(), json!(VERSION));
    map.insert("command".into(), json!(command));
    map.insert("params".into(), params);
    map
}

/// Cache state goes to stderr so reports stay identical across runs.
fn note_cache(hit: bool) {
    if FormCache::from_env().is_some() {
        eprintln!("cache {}", if hit { "hit" } else { "miss" });
    }
}

fn series_check(form: &LinearForm, direct: &SeriesWindow, order: usize) -> Value {
    match linear_form_series(form, order).and_then(|s| series_equal(&s, direct)) {
        Ok(None) => json!({ "ok": true, "order": order }),
        Ok(Some(k)) => json!({ "ok": false, "order": order, "first_mismatch": k }),
        Err(e) => json!({ "ok": false, "order": order, "error": e.to_string() }),
    }
}

fn cmd_elementary(u: Vec<u32>, p: Vec<u32>, order: usize) -> Result<Outcome, Error> {
    let e = ElementarySum::new(u.clone(), p.clone())?;
    let form = decompose(&e);
    let report = check_form(&e, &form, order);
    let mut map = header("elementary", json!({ "u": u, "p": p, "order": order }));
    map.insert("sum".into(), json!(e.to_string()));
    map.insert("form".into(), form_value(&form)?);
    map.insert("checks".into(), serde_json::to_value(&report)?);
    Ok(Outcome::json(&Value::Object(map), report.passed()))
}

fn zeta_string(coefs: &[(u32, Rational)], free: &Rational) -> String {
    let mut parts: Vec<String> = coefs
        .iter()
        .filter(|(_, c)| *c != Rational::from_integer(0.into()))
        .map(|(k, c)| format!("({}) zeta({})", rational_to_string(c), 2 * k + 1))
        .collect();
    parts.push(format!("({})", rational_to_string(free)));
    parts.join(" + ")
}

fn cmd_vasilyev(l: usize, n: u32, digits: u32, order: usize) -> Result<Outcome, Error> {
    let ctx = PrecisionContext::with_digits(digits)?;
    let (params, d) = vasilyev_params(l, n)?;
    let cache = FormCache::from_env();
    let (form, hit) =
        decompose_integral_cached(cache.as_ref(), &params, &d, &mut Decomposer::new())?;
    let structure = vasilyev_structure_check(&form, l, n);
    // every run compares against the direct expansion, so cache hits are checked too
    let series = series_check(&form, &coupled_sum_series(&params, order), order);
    let mut passed = structure.passed() && series["ok"] == json!(true);

    let mut map = header(
        "vasilyev",
        json!({ "l": l, "n": n, "digits": digits, "order": order }),
    );
    note_cache(hit);
    map.insert("form".into(), form_value(&form)?);
    map.insert("structure".into(), serde_json::to_value(&structure)?);
    map.insert("series".into(), series);
    if structure.indices && structure.divergent_vanish {
        let value = value_at_one(&form, l, n, &ctx)?;
        let direct = integral_value_at_1(&params, &ctx)?;
        let residual = real::relative_difference(&value.numeric, &direct.value);
        let tolerance = ctx.target_tolerance();
        passed &= residual < tolerance;
        let shown = digits as usize;
        map.insert(
            "value_at_1".into(),
            json!({
                "combination": zeta_string(&value.zeta_coefficients, &value.free_value),
                "zeta_coefficients": value.zeta_coefficients.iter()
                    .map(|(k, c)| json!({ "zeta": 2 * k + 1, "coef": rational_to_string(c) }))
                    .collect::<Vec<_>>(),
                "free": rational_to_string(&value.free_value),
                "from_form": real::to_decimal_string(&value.numeric, shown),
                "direct": real::to_decimal_string(&direct.value, shown),
                "residual": format!("{residual:.3e}"),
                "tolerance": format!("{tolerance:.1e}"),
                "ok": residual < tolerance,
            }),
        );
    }
    Ok(Outcome::json(&Value::Object(map), passed))
}

fn cmd_decompose(path: &PathBuf, order: usize) -> Result<Outcome, Error> {
    let file = ParamsFile::from_json(&std::fs::read_to_string(path)?)?;
    let (params, d) = (&file.params, file.shift());
    let report = validate(params, &ValidationMode::Shifted(d.clone()));
    let mut map = header("decompose", serde_json::to_value(&file)?);
    map.insert("validation".into(), serde_json::to_value(&report)?);
    if !report.passed() {
        return Ok(Outcome::json(&Value::Object(map), false));
    }
    let cache = FormCache::from_env();
    let (form, hit) =
        decompose_integral_cached(cache.as_ref(), params, &d, &mut Decomposer::new())?;
    let series = series_check(&form, &coupled_sum_series(params, order), order);
    let delta = u32::try_from(report.delta).unwrap_or(0);
    let graded = form.check_graded_clearing(&lcm_upto(delta)).is_ok();
    let passed = series["ok"] == json!(true) && graded;
    note_cache(hit);
    map.insert("form".into(), form_value(&form)?);
    map.insert("graded_clearing".into(), json!(graded));
    map.insert("series".into(), series);
    Ok(Outcome::json(&Value::Object(map), passed))
}

/// Adds 1 to the constant coefficient of the first term, or of the free part.
fn corrupt(form: &LinearForm) -> LinearForm {
    let mut out = form.clone();
    let bump = Polynomial::constant(Rational::from_integer(1.into()));
    match form.terms().keys().next() {
        Some(s) => out.add_term(s.clone(), &bump),
        None => out.add_term(MultiIndex::empty(), &bump),
    }
    out
}

fn cmd_fuzz(
    seed: u64,
    count: usize,
    nested: usize,
    bounds: ElementaryBounds,
    order: usize,
    inject_fault: bool,
) -> Result<Outcome, Error> {
    let corpus = elementary_corpus(seed, count, bounds);
    let results: Vec<(String, Vec<String>)> = corpus
        .par_iter()
        .map(|e| {
            let mut form = decompose(e);
            if inject_fault {
                form = corrupt(&form);
            }
            let report = check_form(e, &form, order);
            (e.to_string(), report.failures)
        })
        .collect();
    let first_elementary = results.iter().find(|(_, f)| !f.is_empty());
    let elementary_pass = results.iter().filter(|(_, f)| f.is_empty()).count();

    let nested_corpus = nested_sum_corpus(seed, nested);
    let nested_order = order.min(40);
    let nested_results: Vec<Option<String>> = nested_corpus
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let check = || -> Result<Option<String>, Error> {
                let direct = nested_sum_series(s, nested_order)?;
                let d = lcm_upto(s.delta());
                let mut total = SeriesWindow::zero(nested_order);
                for t in reduce(s)? {
                    if t.sum.factors().iter().any(|f| !f.is_proper()) {
                        return Ok(Some("improper output factor".into()));
                    }
                    if !clears(&d, t.weight_drop, &t.lambda) {
                        return Ok(Some(format!("lambda {} not cleared", t.lambda)));
                    }
                    total.add_scaled(&nested_sum_series(&t.sum, nested_order)?, &t.lambda);
                }
                Ok(series_equal(&total, &direct)?.map(|k| format!("series differ at z^{k}")))
            };
            match check() {
                Ok(r) => r.map(|m| format!("nested sum #{i}: {m}")),
                Err(e) => Some(format!("nested sum #{i}: {e}")),
            }
        })
        .collect();
    let first_nested = nested_results.iter().flatten().next();
    let nested_pass = nested_results.iter().filter(|r| r.is_none()).count();

    let passed = elementary_pass == count && nested_pass == nested;
    let mut map = header(
        "fuzz",
        json!({
            "seed": seed, "count": count, "nested": nested, "order": order,
            "max_depth": bounds.max_depth, "max_u": bounds.max_u, "max_p": bounds.max_p,
            "inject_fault": inject_fault,
        }),
    );
    map.insert("elementary_passed".into(), json!(elementary_pass));
    map.insert("elementary_total".into(), json!(count));
    map.insert("nested_passed".into(), json!(nested_pass));
    map.insert("nested_total".into(), json!(nested));
    map.insert(
        "first_counterexample".into(),
        match (first_elementary, first_nested) {
            (Some((e, f)), _) => json!({ "sum": e, "failures": f }),
            (None, Some(msg)) => json!({ "nested": msg }),
            (None, None) => Value::Null,
        },
    );
    Ok(Outcome::json(&Value::Object(map), passed))
}

fn cmd_heights(
    l: usize,
    n_max: u32,
    grid: usize,
    tol: f64,
    format: Format,
) -> Result<Outcome, Error> {
    let profile = vasilyev_asymptotic(l);
    let best = maximize_f(&profile, grid, tol)?;
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| empirical_height_growth(l, &[n], best.value).map(|mut r| r.remove(0)))
        .collect::<Result<Vec<_>, Error>>()?;
    let text = match format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => {
            let conditions: Vec<Value> = (1..=n_max)
                .map(|n| {
                    let params = profile.instantiate(n).expect("profile instantiates");
                    json!({ "n": n, "groups": upper_bound_conditions(&params)
                        .into_iter()
                        .map(|(j, lhs, rhs)| json!({ "j": j, "lhs": lhs, "rhs": rhs, "ok": lhs <= rhs }))
                        .collect::<Vec<_>>() })
                })
                .collect();
            let mut map = header(
                "heights",
                json!({ "l": l, "n_max": n_max, "grid": grid, "tol": tol }),
            );
            map.insert("M".into(), json!(best.value));
            map.insert("argmax".into(), json!(best.argmax));
            map.insert("rows".into(), serde_json::to_value(&rows)?);
            map.insert("bound_hypotheses".into(), json!(conditions));
            let mut text = serde_json::to_string_pretty(&Value::Object(map))?;
            text.push('\n');
            text
        }
    };
    Ok(Outcome { text, passed: true })
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Elementary { u, p, order } => cmd_elementary(u, p, order),
        Command::Vasilyev {
            l,
            n,
            digits,
            order,
        } => cmd_vasilyev(l, n, digits, order),
        Command::Decompose { params, order } => cmd_decompose(&params, order),
        Command::Fuzz {
            seed,
            count,
            nested,
            max_depth,
            max_u,
            max_p,
            order,
            inject_fault,
        } => {
            let bounds = ElementaryBounds {
                max_depth,
                max_u,
                max_p,
            };
            cmd_fuzz(seed, count, nested, bounds, order, inject_fault)
        }
        Command::Heights {
            l,
            n_max,
            grid,
            tol,
            format,
        } => cmd_heights(l, n_max, grid, tol, format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let output = cli.output.clone();
    match run(cli) {
        Ok(outcome) => {
            let written = match &output {
                Some(path) => std::fs::write(path, &outcome.text),
                None => {
                    print!("{}", outcome.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
