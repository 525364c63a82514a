use std::path::{Path, PathBuf};

use qpoly::acceptance::{run_criterion, CriterionReport};
use qpoly::families::{identity_residual, FamilyId, FamilyInstance, Identity, QMode};
use qpoly::functionals::{
    aw_circle_functional, aw_degenerate_functional, aw_rootofunity_functional, bqj_functional,
    bqj_rootofunity_functional, christoffel_functional, gram_matrix, qracah_functional, solve_root_of_unity_r,
    AwNodes, DEFAULT_NODES, DEFAULT_TAIL_TOL,
};
use qpoly::qdiff::{aw_zform_eigen_check, operator_table_data, operator_table_eigen_check, Realization, RowStatus, OPERATOR_TABLE};
use qpoly::sobolev::{
    base_functional, build_level_plan, build_sobolev_form, characterization_residual, factorization_check,
    gram_check, power_factorization_residual, Chain, GramReport,
};
use qpoly::{c64, CExact, Family64, Functional64, Scalar, C64};
use serde_json::{json, Value};

use crate::config::{EvalPath, JobConfig, QCfg, ScalarKind};
use crate::output::{cplx, csv_float, csv_text, pair};
use crate::CliError;

/// Result of a command: the JSON document, extra files and the verdict.
pub struct Outcome {
    pub json: Value,
    pub files: Vec<(String, String)>,
    pub pass: bool,
}

impl Outcome {
    fn new(json: Value, pass: bool) -> Self {
        Outcome { json, files: Vec::new(), pass }
    }
}

/// Command-line overrides of config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub nodes: Option<usize>,
    pub seed: Option<u64>,
    pub degrees: Option<Vec<usize>>,
    pub functional: Option<String>,
    pub suite: Option<String>,
}

const DEFAULT_POINTS: [f64; 5] = [0.13, -0.41, 0.77, -0.9, 0.5];

fn header(cfg: &JobConfig, fam: &Family64) -> Value {
    let q = match cfg.q {
        QCfg::Value(_) => cplx(*fam.q()),
        QCfg::Root { root_of_unity: r } => json!({ "root_of_unity": { "M": r.m, "N": r.n } }),
    };
    let params: serde_json::Map<String, Value> =
        fam.id().param_names().iter().zip(fam.params()).map(|(n, v)| (n.to_string(), cplx(*v))).collect();
    json!({ "family": fam.id().tag(), "params": params, "q": q, "n_max": cfg.n_max })
}

fn tol(cfg: &JobConfig, o: &Overrides) -> f64 {
    o.tol.unwrap_or(cfg.tol)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

pub fn eval(cfg: &JobConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let fam = cfg.build()?;
    let tol = tol(cfg, o);
    let degrees = o.degrees.clone().or_else(|| cfg.degrees.clone()).unwrap_or_else(|| (0..=cfg.n_max).collect());
    let points: Vec<C64> = match &cfg.points {
        Some(p) => p.iter().map(|&z| z.into()).collect(),
        None => DEFAULT_POINTS.iter().map(|&x| c64(x, 0.0)).collect(),
    };
    let default_paths = if fam.id().has_recurrence() { vec![EvalPath::Ttrr, EvalPath::Hyper] } else { vec![EvalPath::Hyper] };
    let paths = cfg.paths.clone().unwrap_or(default_paths);
    let mut rows = match cfg.scalar {
        ScalarKind::F64 => eval_rows(&fam, &degrees, &points, &paths)?,
        ScalarKind::Exact => eval_rows(&cfg.build_as::<CExact>()?, &degrees, &points, &paths)?,
    };
    let mut worst = 0.0f64;
    let values = rows
        .drain(..)
        .map(|(n, x, t, h)| {
            let mut row = json!({ "n": n, "x": cplx(x) });
            if let Some(t) = t {
                row["ttrr"] = cplx(t);
            }
            if let Some(h) = h {
                row["hyper"] = cplx(h);
            }
            if let (Some(t), Some(h)) = (t, h) {
                let d = rel(t, h);
                worst = worst.max(d);
                row["discrepancy"] = json!(d);
            }
            row
        })
        .collect();
    let pass = worst <= tol;
    let mut doc = header(cfg, &fam);
    doc["scalar"] = json!(if cfg.scalar == ScalarKind::Exact { "exact" } else { "f64" });
    doc["values"] = Value::Array(values);
    doc["max_discrepancy"] = json!(worst);
    doc["tol"] = json!(tol);
    doc["pass"] = json!(pass);
    Ok(Outcome::new(doc, pass))
}

type EvalRow = (usize, C64, Option<C64>, Option<C64>);

fn eval_rows<S: Scalar>(fam: &FamilyInstance<S>, degrees: &[usize], points: &[C64], paths: &[EvalPath]) -> Result<Vec<EvalRow>, CliError> {
    let top = degrees.iter().copied().max().unwrap_or(0);
    let seq = if paths.contains(&EvalPath::Ttrr) { Some(fam.sequence(top)?) } else { None };
    let hyper = paths.contains(&EvalPath::Hyper);
    let mut rows = Vec::new();
    for &n in degrees {
        for &x in points {
            let xs = S::from_parts(x.re, x.im);
            let t = seq.as_ref().map(|s| s.get(n).eval(&xs).to_c64());
            let h = if hyper { Some(fam.hyper_eval(n, &xs)?.to_c64()) } else { None };
            rows.push((n, x, t, h));
        }
    }
    Ok(rows)
}

fn pick_functional(fam: &Family64, id: &str, nodes: usize, n_max: usize) -> Result<Functional64, CliError> {
    let lambda = fam.lambda_set(n_max.max(1))?.lambda_set;
    let f = match id {
        "auto" => base_functional(fam, n_max)?.0,
        "canonical" => Functional64::canonical(&fam.recurrence()?, 2 * n_max)?,
        "circle" => aw_circle_functional(fam, nodes)?,
        "qracah" => qracah_functional(fam)?,
        "aw_degenerate" => aw_degenerate_functional(fam)?,
        "jackson" => bqj_functional(fam, DEFAULT_TAIL_TOL)?,
        "christoffel" => christoffel_functional(&fam.recurrence()?, lambda.first().copied().unwrap_or(n_max + 1))?,
        "root_of_unity" => {
            let data = solve_root_of_unity_r(fam)?;
            match fam.id() {
                FamilyId::AskeyWilson => aw_rootofunity_functional(fam, &data, AwNodes::Half)?,
                FamilyId::BigQJacobi => bqj_rootofunity_functional(fam, &data)?,
                other => {
                    return Err(CliError::Config(format!("root_of_unity functional is not available for {}", other.tag())))
                }
            }
        }
        other => return Err(CliError::Config(format!("at `functional`: unknown functional `{other}`"))),
    };
    Ok(f)
}

fn gram_summary(rep: &GramReport) -> Value {
    json!({
        "max_offdiag_rel": rep.max_offdiag_rel,
        "max_offdiag_scaled": rep.max_offdiag_scaled,
        "min_diag_rel": rep.min_diag_rel,
        "zero_diag_at": rep.zero_diag_at,
        "diag": rep.diag.iter().map(|d| pair(*d)).collect::<Vec<_>>(),
        "pass": rep.pass,
    })
}

pub fn gram(cfg: &JobConfig, o: &Overrides) -> Result<Outcome, CliError> {
    if cfg.n_max == 0 {
        return Err(CliError::Config("at `n_max`: the Gram matrix needs n_max >= 1".into()));
    }
    let fam = cfg.build()?;
    let tol = tol(cfg, o);
    let id = o.functional.clone().or_else(|| cfg.functional.clone()).unwrap_or_else(|| "auto".into());
    let nodes = o.nodes.or(cfg.nodes).unwrap_or(DEFAULT_NODES);
    let top = cfg.n_max - 1;
    let f = pick_functional(&fam, &id, nodes, top)?;
    let seq = fam.sequence(top)?;
    let g = gram_matrix(&f, &seq, top)?;
    let full = gram_check(&f, &seq, top, tol)?;
    // Largest leading block with a nonzero diagonal.
    let block = full.zero_diag_at.unwrap_or(cfg.n_max);
    let block_rep = if block == cfg.n_max { Some(full.clone()) } else if block > 0 { Some(gram_check(&f, &seq, block - 1, tol)?) } else { None };
    let pass = block_rep.as_ref().is_some_and(|r| r.pass);
    let rows: Vec<Vec<String>> = (0..cfg.n_max)
        .flat_map(|n| (0..cfg.n_max).map(move |m| (n, m)))
        .map(|(n, m)| vec![n.to_string(), m.to_string(), csv_float(g[n][m].re), csv_float(g[n][m].im)])
        .collect();
    let mut doc = header(cfg, &fam);
    doc["functional"] = json!(id);
    doc["size"] = json!(cfg.n_max);
    doc["summary"] = gram_summary(&full);
    doc["orthogonal_block"] = json!({
        "size": block,
        "max_offdiag_rel": block_rep.as_ref().map(|r| r.max_offdiag_rel),
        "pass": pass,
    });
    doc["tol"] = json!(tol);
    doc["pass"] = json!(pass);
    let mut out = Outcome::new(doc, pass);
    out.files.push(("gram.csv".into(), csv_text(&["row", "col", "re", "im"], &rows)?));
    Ok(out)
}

fn chain_json(chain: &Chain<C64>) -> Value {
    match chain {
        Chain::Iterated { count, .. } => json!({ "kind": "iterated", "count": count }),
        Chain::Regularized { order, times, .. } => json!({ "kind": "regularized", "order": order, "times": times }),
    }
}

pub fn sobolev(cfg: &JobConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let fam = cfg.build()?;
    let tol = tol(cfg, o);
    let plan = build_level_plan(&fam, cfg.n_max)?;
    let form = build_sobolev_form(&fam, &plan)?;
    let seq = fam.sequence(cfg.n_max)?;
    let rep = gram_check(&form, &seq, cfg.n_max, tol)?;
    let characterization = characterization_residual(&form, &seq, cfg.n_max)?;
    let pass = rep.pass && characterization <= tol;
    let levels: Vec<Value> = plan
        .levels
        .iter()
        .zip(&form.terms)
        .map(|(l, t)| {
            json!({
                "degree": l.degree,
                "chain": chain_json(&l.chain),
                "family": l.family.id().tag(),
                "params": l.family.params().iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
                "reflected": l.reflected,
                "functional": serde_json::to_value(t.source).unwrap_or(Value::Null),
            })
        })
        .collect();
    let mut doc = header(cfg, &fam);
    doc["base_functional"] = serde_json::to_value(form.base_source).unwrap_or(Value::Null);
    doc["levels"] = Value::Array(levels);
    doc["truncated"] = json!(plan.truncated);
    doc["gram_check"] = gram_summary(&rep);
    doc["characterization_residual"] = json!(characterization);
    doc["tol"] = json!(tol);
    doc["pass"] = json!(pass);
    Ok(Outcome::new(doc, pass))
}

pub fn factorize(cfg: &JobConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let fam = cfg.build()?;
    let tol = tol(cfg, o);
    let big_n = match cfg.big_n {
        Some(n) => n,
        None => *fam
            .lambda_set(cfg.n_max)?
            .lambda_set
            .first()
            .ok_or_else(|| qpoly::Error::AssumptionViolated(format!("no vanishing gamma up to {}", cfg.n_max)))?,
    };
    let rep = factorization_check(&fam, big_n, cfg.n_max)?;
    let mut pass = rep.residual <= tol && rep.associated_family_match.is_none_or(|m| m <= tol);
    let mut doc = header(cfg, &fam);
    doc["N"] = json!(rep.n);
    doc["residual"] = json!(rep.residual);
    doc["associated_family_match"] = json!(rep.associated_family_match);
    if let QMode::RootOfUnity { n, .. } = fam.q_mode() {
        let n = n as usize;
        let power = power_factorization_residual(&fam, n, cfg.n_max / n)?;
        pass &= power <= tol;
        doc["power_residual"] = json!(power);
    }
    doc["tol"] = json!(tol);
    doc["pass"] = json!(pass);
    Ok(Outcome::new(doc, pass))
}

pub fn identities(cfg: &JobConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let tol = tol(cfg, o);
    let suite = o.suite.clone().or_else(|| cfg.suite.clone()).unwrap_or_else(|| "all".into());
    let points: Vec<C64> = match &cfg.points {
        Some(p) => p.iter().map(|&z| z.into()).collect(),
        None => DEFAULT_POINTS.iter().map(|&x| c64(x, 0.0)).collect(),
    };
    let fam = cfg.build()?;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut run = |ident: Identity, inst: &Family64, skip_inapplicable: bool| -> Result<(), CliError> {
        match identity_residual(ident, inst, cfg.n_max, &points) {
            Ok(r) => {
                pass &= r <= tol;
                rows.push(json!({ "identity": ident.name(), "source": inst.id().tag(), "residual": r, "pass": r <= tol }));
            }
            Err(e @ qpoly::Error::InapplicableIdentity { .. }) if skip_inapplicable => {
                rows.push(json!({ "identity": ident.name(), "source": inst.id().tag(), "skipped": e.to_string() }));
            }
            Err(e) => return Err(e.into()),
        }
        Ok(())
    };
    match suite.as_str() {
        "all" => {
            for &ident in Identity::all() {
                run(ident, &qpoly::acceptance::identity_instance(ident)?, false)?;
            }
        }
        "family" => {
            for &ident in Identity::all().iter().filter(|i| i.source() == fam.id()) {
                run(ident, &fam, true)?;
            }
        }
        name => {
            let ident = Identity::all()
                .iter()
                .copied()
                .find(|i| i.name() == name)
                .ok_or_else(|| CliError::Config(format!("at `suite`: unknown suite `{name}`")))?;
            run(ident, &fam, false)?;
        }
    }
    let mut doc = header(cfg, &fam);
    doc["suite"] = json!(suite);
    doc["rows"] = Value::Array(rows);
    doc["tol"] = json!(tol);
    doc["pass"] = json!(pass);
    Ok(Outcome::new(doc, pass))
}

pub fn eigencheck(cfg: &JobConfig, o: &Overrides) -> Result<Outcome, CliError> {
    let fam = cfg.build()?;
    let tol = tol(cfg, o);
    let mut rows = Vec::new();
    let mut pass = true;
    if fam.id() == FamilyId::AskeyWilson {
        for n in 1..=cfg.n_max {
            let rep = aw_zform_eigen_check(&fam, n)?;
            pass &= rep.eigen.residual <= tol;
            rows.push(json!({
                "operator": "z-form",
                "n": n,
                "lambda_fit": pair(rep.eigen.lambda_fit),
                "residual": rep.eigen.residual,
                "ratio_to_tabulated": rep.ratio_to_stated.map(pair),
            }));
        }
    } else {
        let tag = fam.id().tag();
        let table_rows: Vec<_> = OPERATOR_TABLE.iter().filter(|r| r.family == Some(tag)).collect();
        if table_rows.is_empty() {
            return Err(CliError::Config(format!("at `family`: no operator data for {tag}")));
        }
        for row in table_rows {
            let variants: &[bool] = if row.status == RowStatus::Corrected { &[false, true] } else { &[false] };
            for &corrected in variants {
                let data = operator_table_data(row.index, fam.params(), fam.q(), corrected)?;
                for n in 1..=cfg.n_max {
                    let rep = operator_table_eigen_check(row.index, &fam, n, corrected, Realization::FullStep)?;
                    if !corrected {
                        pass &= rep.residual <= tol;
                    }
                    let lam = data.lambda(n, fam.q(), Realization::FullStep)?;
                    let ratio = (lam.norm() > 0.0).then(|| cplx(c64(rep.lambda_fit[0], rep.lambda_fit[1]) / lam));
                    rows.push(json!({
                        "operator": format!("row {}", row.index),
                        "variant": if corrected { "corrected" } else { "printed" },
                        "n": n,
                        "lambda_fit": pair(rep.lambda_fit),
                        "residual": rep.residual,
                        "ratio_to_tabulated": ratio,
                    }));
                }
            }
        }
    }
    let mut doc = header(cfg, &fam);
    doc["rows"] = Value::Array(rows);
    doc["tol"] = json!(tol);
    doc["pass"] = json!(pass);
    Ok(Outcome::new(doc, pass))
}

/// Job files of a directory, sorted by name.
pub fn config_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn report(dir: &Path, o: &Overrides) -> Result<Outcome, CliError> {
    let seed = o.seed.unwrap_or(qpoly::acceptance::DEFAULT_SEED);
    let mut jobs = Vec::new();
    for path in config_files(dir)? {
        let cfg = JobConfig::load(&path)?;
        let id = cfg
            .criterion
            .ok_or_else(|| CliError::Config(format!("{}: at `criterion`: missing field", path.display())))?;
        let spec = cfg.spec()?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        jobs.push((name, id, spec, cfg.n_max));
    }
    let mut reports: Vec<(String, CriterionReport)> = Vec::new();
    for (name, id, spec, n_max) in jobs {
        reports.push((name, run_criterion(id, Some(&spec), Some(n_max), seed)?));
    }
    let pass = reports.iter().all(|(_, r)| r.pass);
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    for (name, r) in &reports {
        let mut v = serde_json::to_value(r).map_err(|e| CliError::Config(e.to_string()))?;
        v["config"] = json!(name);
        criteria.push(v);
        for c in &r.checks {
            rows.push(vec![
                r.id.to_string(),
                c.name.clone(),
                csv_float(c.value),
                csv_float(c.bound),
                format!("{:?}", c.kind),
                c.gating.to_string(),
                c.pass.to_string(),
            ]);
        }
    }
    let failed: Vec<u8> = reports.iter().filter(|(_, r)| !r.pass).map(|(_, r)| r.id).collect();
    let doc = json!({
        "seed": seed,
        "criteria": criteria,
        "passed": reports.len() - failed.len(),
        "failed": failed,
        "pass": pass,
    });
    let mut out = Outcome::new(doc, pass);
    out.files.push((
        "report.csv".into(),
        csv_text(&["criterion", "check", "value", "bound", "kind", "gating", "pass"], &rows)?,
    ));
    Ok(out)
}
