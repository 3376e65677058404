use std::path::Path;

use qdiscrim::bounds::CSV_COLUMNS;
use qdiscrim::measurement::{
    attainment_residual, check_conditions_with, error_probability, helstrom_povm,
    hykl_certificate_with, theorem2_povm_with,
};
use qdiscrim::oracle::{search_cor1 as run_search, square_root_measurement};
use qdiscrim::{
    channel_bound, full_report_with, generate, optimize_min_error, BoundsReport,
    ChannelBoundOptions, GeneratorSpec, OracleOptions, Povm, PriorSpec, ReportOptions,
    WeightedEnsemble,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::io::{self, Item};
use crate::{
    BoundsArgs, ChannelArgs, CompareArgs, ConstructArgs, GenArgs, GlobalArgs, InputArgs,
    OptimizeArgs, PovmMethod, SearchArgs,
};

/// A numerical-health observation; `--strict` turns any of these into a
/// non-zero exit.
pub struct Warning {
    pub id: String,
    pub message: String,
}

impl Warning {
    fn new(id: &str, message: impl Into<String>) -> Self {
        Self {
            id: id.to_string(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "warning": self.message, "id": self.id })
    }
}

type CmdResult = Result<Vec<Warning>, CliError>;

fn compute(id: &str) -> impl Fn(qdiscrim::Error) -> CliError + '_ {
    move |source| CliError::Compute {
        id: id.to_string(),
        source,
    }
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable output")
}

fn parse_json(s: &str) -> Value {
    serde_json::from_str(s).expect("library emits valid JSON")
}

fn oracle_options(g: &GlobalArgs, restarts: usize) -> OracleOptions {
    OracleOptions {
        restarts,
        seed: g.seed,
        cert_tol: g.tol_cert,
        ..Default::default()
    }
}

/// Runs `f` on every input in parallel; results keep the sorted input order
/// and the first failure in that order is returned.
fn per_item<T: Send>(
    g: &GlobalArgs,
    input: &InputArgs,
    f: impl Fn(&Item, &WeightedEnsemble) -> Result<T, CliError> + Sync,
) -> Result<(Vec<(String, T)>, bool), CliError> {
    let (items, is_dir) = io::collect_inputs(&input.input)?;
    let out = items
        .par_iter()
        .map(|it| {
            let e = io::load_ensemble(&it.path, g.tol_psd, g.project_support)?;
            f(it, &e).map(|v| (it.id.clone(), v))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, is_dir))
}

/// One object for a file, an array of `{id, ...}` objects for a directory.
fn batch_json(rows: Vec<(String, Value)>, is_dir: bool) -> Value {
    if !is_dir {
        return rows
            .into_iter()
            .next()
            .map(|(_, v)| v)
            .unwrap_or(Value::Null);
    }
    Value::Array(
        rows.into_iter()
            .map(|(id, v)| {
                let mut obj = serde_json::Map::new();
                obj.insert("id".into(), json!(id));
                if let Value::Object(fields) = v {
                    obj.extend(fields);
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

fn gen_spec(g: &GlobalArgs, a: &GenArgs) -> Result<GeneratorSpec, CliError> {
    if let Some(path) = &a.spec {
        return serde_json::from_str(&io::read(path)?).map_err(|e| {
            CliError::input(
                path,
                qdiscrim::Error::Parse {
                    location: format!("line {} column {}", e.line(), e.column()),
                    message: e.to_string(),
                },
            )
        });
    }
    let (Some(kind), Some(dim), Some(m)) = (a.kind, a.dim, a.m) else {
        return Err(CliError::Usage(
            "--kind, --dim and --m are required without --spec".into(),
        ));
    };
    Ok(GeneratorSpec {
        kind,
        dim,
        m,
        rank: a.rank,
        priors: a.priors.clone(),
        seed: g.seed,
    })
}

pub fn gen(g: &GlobalArgs, a: &GenArgs) -> CmdResult {
    let spec = gen_spec(g, a)?;
    let e = generate(&spec).map_err(compute("gen"))?;
    io::emit(g.output.as_deref(), &e.to_json())?;
    Ok(e.warnings()
        .into_iter()
        .map(|w| Warning::new("gen", w))
        .collect())
}

pub fn bounds(g: &GlobalArgs, a: &BoundsArgs) -> CmdResult {
    let povm = a
        .povm
        .as_ref()
        .map(|p| Povm::from_json(&io::read(p)?).map_err(|e| CliError::input(p, e)))
        .transpose()?;
    let opts = ReportOptions {
        ortho_tol: g.tol_ortho,
        best_first: a.best_first,
    };
    let (reports, is_dir) = per_item(g, &a.input, |it, e| {
        let err = compute(&it.id);
        let mut extra = Vec::new();
        let (report, oracle_q) = if a.oracle {
            let r = optimize_min_error(e, &oracle_options(g, a.restarts)).map_err(&err)?;
            if !r.certificate.optimal {
                extra.push("oracle optimum not certified".to_string());
            }
            (
                full_report_with(e, Some(&r.povm), opts).map_err(&err)?,
                Some(r.q_star),
            )
        } else {
            (
                full_report_with(e, povm.as_ref(), opts).map_err(&err)?,
                None,
            )
        };
        let mut report = BoundsReport { oracle_q, ..report };
        report.warnings.extend(extra);
        Ok(report)
    })?;
    let mut warnings = Vec::new();
    for (id, r) in &reports {
        warnings.extend(r.warnings.iter().map(|w| Warning::new(id, w.as_str())));
    }
    if let Some(path) = &a.csv {
        let rows: Vec<Vec<String>> = reports.iter().map(|(id, r)| r.csv_record(id)).collect();
        io::write_csv(path, &CSV_COLUMNS, &rows)?;
    }
    let rows = reports
        .iter()
        .map(|(id, r)| (id.clone(), parse_json(&r.to_json())))
        .collect();
    io::emit(g.output.as_deref(), &pretty(&batch_json(rows, is_dir)))?;
    Ok(warnings)
}

pub fn check(g: &GlobalArgs, a: &InputArgs) -> CmdResult {
    let (rows, is_dir) = per_item(g, a, |it, e| {
        let c = check_conditions_with(e, g.tol_ortho).map_err(compute(&it.id))?;
        let mut v = serde_json::to_value(&c).expect("serializable report");
        v["theorem2_holds"] = json!(c.theorem2_holds());
        v["upper_bound_certified"] = json!(c.upper_bound_certified());
        v["corollary1_holds"] = json!(c.corollary1_holds());
        Ok((v, e.warnings()))
    })?;
    let mut warnings = Vec::new();
    let mut out = Vec::new();
    for (id, (v, w)) in rows {
        warnings.extend(w.into_iter().map(|w| Warning::new(&id, w)));
        out.push((id, v));
    }
    io::emit(g.output.as_deref(), &pretty(&batch_json(out, is_dir)))?;
    Ok(warnings)
}

pub fn construct_povm(g: &GlobalArgs, a: &ConstructArgs) -> CmdResult {
    let e = io::load_ensemble(&a.input, g.tol_psd, g.project_support)?;
    let id = io::collect_id(&a.input);
    let err = compute(&id);
    let povm = match a.method {
        PovmMethod::Theorem2 => theorem2_povm_with(&e, g.tol_ortho),
        PovmMethod::Srm => square_root_measurement(&e),
        PovmMethod::Helstrom => helstrom_povm(&e),
        PovmMethod::Oracle => {
            optimize_min_error(&e, &oracle_options(g, a.restarts)).map(|r| r.povm)
        }
    }
    .map_err(&err)?;
    let certificate = hykl_certificate_with(&e, &povm, g.tol_cert).map_err(&err)?;
    let mut warnings = Vec::new();
    if a.method != PovmMethod::Srm && !certificate.optimal {
        warnings.push(Warning::new(&id, "constructed POVM not certified optimal"));
    }
    let mut summary = json!({
        "method": format!("{:?}", a.method).to_lowercase(),
        "error_probability": error_probability(&e, &povm).map_err(&err)?,
        "attainment_gap": attainment_residual(&e, &povm).map_err(&err)?,
        "completeness_residual": povm.completeness_residual(),
        "certificate": certificate,
    });
    match &g.output {
        Some(path) => {
            io::emit(Some(path), &povm.to_json())?;
            io::emit(None, &pretty(&summary))?;
        }
        None => {
            summary["povm"] = parse_json(&povm.to_json());
            io::emit(None, &pretty(&summary))?;
        }
    }
    Ok(warnings)
}

pub fn optimize(g: &GlobalArgs, a: &OptimizeArgs) -> CmdResult {
    let e = io::load_ensemble(&a.input, g.tol_psd, g.project_support)?;
    let id = io::collect_id(&a.input);
    let opts = OracleOptions {
        max_iters: a.max_iters,
        tol: a.tol,
        ..oracle_options(g, a.restarts)
    };
    let r = optimize_min_error(&e, &opts).map_err(compute(&id))?;
    io::emit(g.output.as_deref(), &r.to_json())?;
    let mut warnings: Vec<Warning> = e
        .warnings()
        .into_iter()
        .map(|w| Warning::new(&id, w))
        .collect();
    if !r.certificate.optimal {
        warnings.push(Warning::new(&id, "oracle optimum not certified"));
    }
    Ok(warnings)
}

fn resolve_priors(spec: &PriorSpec, m: usize) -> Vec<f64> {
    match spec {
        PriorSpec::Uniform => vec![1.0 / m as f64; m],
        PriorSpec::Explicit(v) => v.clone(),
    }
}

pub fn channels(g: &GlobalArgs, a: &ChannelArgs) -> CmdResult {
    let chans = a
        .channels
        .iter()
        .map(|p| io::load_channel(p))
        .collect::<Result<Vec<_>, _>>()?;
    let priors = resolve_priors(&a.priors, chans.len());
    let opts = ChannelBoundOptions {
        samples: a.samples,
        refine: !a.no_refine,
        seed: g.seed,
    };
    let r = channel_bound(&chans, &priors, &opts).map_err(compute("channels"))?;
    io::emit(g.output.as_deref(), &r.to_json())?;
    Ok(Vec::new())
}

/// Bounds next to the numerical optimum for one ensemble.
#[derive(Serialize)]
struct CompareRow {
    m: usize,
    dim: usize,
    q_lower: f64,
    q_star: f64,
    two_q_lower: f64,
    qu_feng: f64,
    qu_pairwise: f64,
    ineq122_lhs: f64,
    ineq122_holds: bool,
    certified: bool,
}

pub const COMPARE_COLUMNS: [&str; 11] = [
    "id",
    "m",
    "dim",
    "q_lower",
    "q_star",
    "two_q_lower",
    "qu_feng",
    "qu_pairwise",
    "ineq122_lhs",
    "ineq122_holds",
    "certified",
];

pub fn compare(g: &GlobalArgs, a: &CompareArgs) -> CmdResult {
    let opts = ReportOptions {
        ortho_tol: g.tol_ortho,
        ..Default::default()
    };
    let (rows, is_dir) = per_item(g, &a.input, |it, e| {
        let err = compute(&it.id);
        let report = full_report_with(e, None, opts).map_err(&err)?;
        let r = optimize_min_error(e, &oracle_options(g, a.restarts)).map_err(&err)?;
        let row = CompareRow {
            m: report.m,
            dim: report.dim,
            q_lower: report.q_lower,
            q_star: r.q_star,
            two_q_lower: 2.0 * report.q_lower,
            qu_feng: report.qu_lower_feng,
            qu_pairwise: report.qu_lower_pairwise,
            ineq122_lhs: report.ineq122_lhs,
            ineq122_holds: report.ineq122_holds,
            certified: r.certificate.optimal,
        };
        Ok((row, report.warnings))
    })?;
    let mut warnings = Vec::new();
    for (id, (row, w)) in &rows {
        warnings.extend(w.iter().map(|w| Warning::new(id, w.as_str())));
        if !row.certified {
            warnings.push(Warning::new(id, "oracle optimum not certified"));
        }
    }
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|(id, (r, _))| {
            vec![
                id.clone(),
                r.m.to_string(),
                r.dim.to_string(),
                r.q_lower.to_string(),
                r.q_star.to_string(),
                r.two_q_lower.to_string(),
                r.qu_feng.to_string(),
                r.qu_pairwise.to_string(),
                r.ineq122_lhs.to_string(),
                r.ineq122_holds.to_string(),
                r.certified.to_string(),
            ]
        })
        .collect();
    if let Some(path) = &a.csv {
        io::write_csv(path, &COMPARE_COLUMNS, &records)?;
    }
    if let Some(path) = &g.output {
        let json_rows = rows
            .iter()
            .map(|(id, (r, _))| {
                (
                    id.clone(),
                    serde_json::to_value(r).expect("serializable row"),
                )
            })
            .collect();
        io::emit(Some(path), &pretty(&batch_json(json_rows, is_dir)))?;
    }
    if a.csv.as_deref() != Some(Path::new("-")) {
        print!("{}", table(&rows));
    }
    Ok(warnings)
}

fn table(rows: &[(String, (CompareRow, Vec<String>))]) -> String {
    let id_w = rows
        .iter()
        .map(|(id, _)| id.len())
        .max()
        .unwrap_or(2)
        .max(2);
    let mut out = format!(
        "{:<id_w$} {:>2} {:>3} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9} {:>4}\n",
        "id",
        "m",
        "dim",
        "q_lower",
        "q_star",
        "2*q_lower",
        "qu_feng",
        "qu_pairwise",
        "ineq122",
        "cert"
    );
    for (id, (r, _)) in rows {
        out.push_str(&format!(
            "{:<id_w$} {:>2} {:>3} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>9} {:>4}\n",
            id,
            r.m,
            r.dim,
            r.q_lower,
            r.q_star,
            r.two_q_lower,
            r.qu_feng,
            r.qu_pairwise,
            if r.ineq122_holds { "ok" } else { "FAIL" },
            if r.certified { "yes" } else { "no" },
        ));
    }
    out
}

pub fn search_cor1(g: &GlobalArgs, a: &SearchArgs) -> CmdResult {
    let spec = gen_spec(g, &a.gen)?;
    let hits = run_search(&spec, a.trials).map_err(compute("search-cor1"))?;
    let out = json!({
        "spec": spec,
        "trials": a.trials,
        "hit_count": hits.len(),
        "hits": hits.iter().map(|h| h.to_json_value()).collect::<Vec<_>>(),
    });
    io::emit(g.output.as_deref(), &pretty(&out))?;
    Ok(Vec::new())
}
