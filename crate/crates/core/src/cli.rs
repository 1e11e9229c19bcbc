//! Batch front end: config resolution, the `verify` / `sweep` / `identities`
//! commands, and their exit-code contract.
//!
//! Exit codes: `0` success (verdict matches the entry's expectation, or all
//! identity residuals below tolerance), `2` configuration errors, `3` the
//! candidate is not a Riemannian submersion, `1` anything else.
//!
//! A run is configured by an optional flat key-value file plus command-line
//! overrides; the command line wins key by key. Custom submersions are
//! described entirely by expression strings (map components, total metric,
//! base metric) in the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::bcv::{bcv_frame, bcv_metric, bcv_oracle_deviation, classify_bcv, BcvParams};
use crate::biharmonic::{classify_map, Tolerances, Verdict};
use crate::catalog::{build_entry, CatalogEntry, EntryParams};
use crate::error::EngineError;
use crate::expr::{Expr, ExprError};
use crate::geometry::ChartDomain;
use crate::report::{IdentityDoc, ReportDoc, SweepDoc, SweepRow, SCHEMA_VERSION};
use crate::sample::{sample_points, SamplePlan};
use crate::submersion::{base_curvature_field, integrability_data, SubmersionSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        let code = match &e {
            EngineError::InvalidSubmersion(_) => 3,
            EngineError::Expr(ExprError::Parse(..)) | EngineError::Expr(ExprError::UnknownIdentifier(_)) => 2,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Raw configuration before validation: every field optional so a config
/// file and the command line can be merged key by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entry: Option<String>,
    pub m: Option<String>,
    pub l: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol_h: Option<f64>,
    pub tol_b: Option<f64>,
    pub tol: Option<f64>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub bcv: Option<(f64, f64)>,
    // custom-spec expression strings (config file only)
    pub pi1: Option<String>,
    pub pi2: Option<String>,
    pub g: [Option<String>; 6],
    pub h: [Option<String>; 3],
    pub domain: Option<String>,
    pub base_domain: Option<String>,
}

impl RawConfig {
    /// Parse a flat `key = value` document. `#` starts a comment.
    pub fn from_file(path: &Path) -> CliResult<RawConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim().to_string());
            let parse_usize = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| CliError::config(format!("line {}: `{key}` must be an integer", lineno + 1)))
            };
            let parse_u64 = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| CliError::config(format!("line {}: `{key}` must be an integer", lineno + 1)))
            };
            let parse_f64 = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| CliError::config(format!("line {}: `{key}` must be a number", lineno + 1)))
            };
            match key {
                "entry" => cfg.entry = Some(value),
                "m" => cfg.m = Some(value),
                "l" => cfg.l = Some(value),
                "a" => cfg.a = Some(value),
                "b" => cfg.b = Some(value),
                "points" => cfg.points = Some(parse_usize(&value)?),
                "seed" => cfg.seed = Some(parse_u64(&value)?),
                "tol_h" => cfg.tol_h = Some(parse_f64(&value)?),
                "tol_b" => cfg.tol_b = Some(parse_f64(&value)?),
                "tol" => cfg.tol = Some(parse_f64(&value)?),
                "format" => cfg.format = Some(value),
                "out" => cfg.out = Some(value),
                "jobs" => cfg.jobs = Some(parse_usize(&value)?),
                "pi1" => cfg.pi1 = Some(value),
                "pi2" => cfg.pi2 = Some(value),
                "g11" => cfg.g[0] = Some(value),
                "g12" => cfg.g[1] = Some(value),
                "g13" => cfg.g[2] = Some(value),
                "g22" => cfg.g[3] = Some(value),
                "g23" => cfg.g[4] = Some(value),
                "g33" => cfg.g[5] = Some(value),
                "h11" => cfg.h[0] = Some(value),
                "h12" => cfg.h[1] = Some(value),
                "h22" => cfg.h[2] = Some(value),
                "domain" => cfg.domain = Some(value),
                "base_domain" => cfg.base_domain = Some(value),
                other => {
                    return Err(CliError::config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    /// Overlay `self` (command line) on top of `base` (config file).
    pub fn over(self, base: RawConfig) -> RawConfig {
        let mut g = base.g;
        for (i, v) in self.g.into_iter().enumerate() {
            if v.is_some() {
                g[i] = v;
            }
        }
        let mut h = base.h;
        for (i, v) in self.h.into_iter().enumerate() {
            if v.is_some() {
                h[i] = v;
            }
        }
        RawConfig {
            entry: self.entry.or(base.entry),
            m: self.m.or(base.m),
            l: self.l.or(base.l),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            points: self.points.or(base.points),
            seed: self.seed.or(base.seed),
            tol_h: self.tol_h.or(base.tol_h),
            tol_b: self.tol_b.or(base.tol_b),
            tol: self.tol.or(base.tol),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            jobs: self.jobs.or(base.jobs),
            bcv: self.bcv.or(base.bcv),
            pi1: self.pi1.or(base.pi1),
            pi2: self.pi2.or(base.pi2),
            g,
            h,
            domain: self.domain.or(base.domain),
            base_domain: self.base_domain.or(base.base_domain),
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub entry: Option<String>,
    pub m: Vec<f64>,
    pub l: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub points: usize,
    pub seed: u64,
    pub tols: Tolerances,
    pub tol_identities: f64,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub bcv: Option<(f64, f64)>,
    pub custom: Option<CustomSpecStrings>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpecStrings {
    pub pi1: String,
    pub pi2: String,
    pub g: [String; 6],
    pub h: [String; 3],
    pub domain: String,
    pub base_domain: String,
}

fn parse_list(key: &str, v: &Option<String>) -> CliResult<Vec<f64>> {
    match v {
        None => Ok(Vec::new()),
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CliError::config(format!("`{key}`: `{t}` is not a number")))
            })
            .collect(),
    }
}

pub fn resolve(raw: RawConfig) -> CliResult<Resolved> {
    let points = raw.points.unwrap_or(50);
    if points == 0 {
        return Err(CliError::config("points must be >= 1"));
    }
    let defaults = Tolerances::default();
    let tol_h = raw.tol_h.unwrap_or(defaults.tol_h);
    let tol_b = raw.tol_b.unwrap_or(defaults.tol_b);
    if !(tol_h > 0.0) || !(tol_b > 0.0) {
        return Err(CliError::config("tolerances must be positive"));
    }
    let tol_identities = raw.tol.unwrap_or(1e-7);
    if !(tol_identities > 0.0) {
        return Err(CliError::config("tol must be positive"));
    }
    let format = match raw.format.as_deref() {
        None => None,
        Some("json") => Some(OutputFormat::Json),
        Some("csv") => Some(OutputFormat::Csv),
        Some(other) => {
            return Err(CliError::config(format!(
                "format must be `json` or `csv`, got `{other}`"
            )))
        }
    };
    let custom = match (&raw.pi1, &raw.pi2) {
        (None, None) => None,
        (Some(pi1), Some(pi2)) => {
            let mut g = [const { String::new() }; 6];
            for (i, (slot, name)) in raw
                .g
                .iter()
                .zip(["g11", "g12", "g13", "g22", "g23", "g33"])
                .enumerate()
            {
                g[i] = slot
                    .clone()
                    .ok_or_else(|| CliError::config(format!("custom spec: missing `{name}`")))?;
            }
            let mut h = [const { String::new() }; 3];
            for (i, (slot, name)) in raw.h.iter().zip(["h11", "h12", "h22"]).enumerate() {
                h[i] = slot
                    .clone()
                    .ok_or_else(|| CliError::config(format!("custom spec: missing `{name}`")))?;
            }
            Some(CustomSpecStrings {
                pi1: pi1.clone(),
                pi2: pi2.clone(),
                g,
                h,
                domain: raw.domain.clone().unwrap_or_else(|| "all".to_string()),
                base_domain: raw.base_domain.clone().unwrap_or_else(|| "all".to_string()),
            })
        }
        _ => return Err(CliError::config("custom spec needs both pi1 and pi2")),
    };
    Ok(Resolved {
        entry: raw.entry,
        m: parse_list("m", &raw.m)?,
        l: parse_list("l", &raw.l)?,
        a: parse_list("a", &raw.a)?,
        b: parse_list("b", &raw.b)?,
        points,
        seed: raw.seed.unwrap_or(SamplePlan::default().seed),
        tols: Tolerances {
            tol_h,
            tol_b,
            ..defaults
        },
        tol_identities,
        format,
        out: raw.out.map(PathBuf::from),
        jobs: raw.jobs,
        bcv: raw.bcv,
        custom,
    })
}

pub fn parse_domain(s: &str) -> CliResult<ChartDomain> {
    match s {
        "all" => Ok(ChartDomain::All),
        "x>0" => Ok(ChartDomain::HalfSpacePos { axis: 0 }),
        "y>0" => Ok(ChartDomain::HalfSpacePos { axis: 1 }),
        "z>0" => Ok(ChartDomain::HalfSpacePos { axis: 2 }),
        other => match other.strip_prefix("disk:") {
            Some(r2) => {
                let r2: f64 = r2
                    .parse()
                    .map_err(|_| CliError::config(format!("bad disk radius `{r2}`")))?;
                if r2 > 0.0 {
                    Ok(ChartDomain::Disk { r2 })
                } else {
                    Err(CliError::config("disk radius must be positive"))
                }
            }
            None => Err(CliError::config(format!(
                "unknown domain `{other}` (use all, x>0, y>0, z>0 or disk:<r2>)"
            ))),
        },
    }
}

/// Build and sanity-check a user-described submersion: expressions must
/// parse, and both metrics must be positive definite at a probe point.
pub fn build_custom_spec(s: &CustomSpecStrings, seed: u64) -> CliResult<SubmersionSpec> {
    let parse = |name: &str, src: &str| -> CliResult<Expr> {
        Expr::parse(src).map_err(|e| CliError::config(format!("{name}: {e}")))
    };
    let domain = parse_domain(&s.domain)?;
    let base_domain = parse_domain(&s.base_domain)?;
    let g_exprs = vec![
        parse("g11", &s.g[0])?,
        parse("g12", &s.g[1])?,
        parse("g13", &s.g[2])?,
        parse("g22", &s.g[3])?,
        parse("g23", &s.g[4])?,
        parse("g33", &s.g[5])?,
    ];
    let spec = SubmersionSpec::builder()
        .name("custom")
        .map(parse("pi1", &s.pi1)?, parse("pi2", &s.pi2)?)
        .metric(crate::geometry::MetricField::from_upper_triangle_exprs(
            3, domain, g_exprs,
        ))
        .base_metric(
            base_domain,
            parse("h11", &s.h[0])?,
            parse("h12", &s.h[1])?,
            parse("h22", &s.h[2])?,
        )
        .build();
    let probe = sample_points(domain, SamplePlan { count: 1, seed })[0];
    spec.metric()
        .check_spd(probe, 1e-12)
        .map_err(|_| CliError::config("custom metric g is not positive definite at the probe point"))?;
    let base_probe = spec.base_point(probe).map_err(CliError::from)?;
    spec.base_metric_2d()
        .check_spd(base_probe, 1e-12)
        .map_err(|_| CliError::config("custom base metric h is not positive definite at the probe point"))?;
    Ok(spec)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            if n == 0 {
                return Err(CliError::config("jobs must be >= 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError {
                    code: 1,
                    message: format!("thread pool: {e}"),
                })?;
            Ok(pool.install(f))
        }
    }
}

fn single_param(name: &str, list: &[f64]) -> CliResult<Option<f64>> {
    match list {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(CliError::config(format!(
            "`{name}` takes a single value here (lists are for sweep)"
        ))),
    }
}

/// Command output: exit code, rendered report body, one-line summary.
pub struct CmdOutput {
    pub exit_code: i32,
    pub rendered: String,
    pub summary: String,
}

/// Run the full analysis for one entry or a custom spec; exit 0 when the
/// verdict matches the expectation (for custom specs: when it is conclusive).
pub fn cmd_verify(r: &Resolved) -> CliResult<CmdOutput> {
    let plan = SamplePlan {
        count: r.points,
        seed: r.seed,
    };
    let (label, params, spec, expected) = if let Some(custom) = &r.custom {
        let spec = build_custom_spec(custom, r.seed)?;
        ("custom".to_string(), BTreeMap::new(), spec, None)
    } else {
        let key = r
            .entry
            .as_deref()
            .ok_or_else(|| CliError::config("verify needs a catalog entry or a custom spec"))?;
        let entry = lookup_entry(key, r)?;
        let params: BTreeMap<String, f64> =
            entry.params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        (entry.label, params, entry.spec, Some(entry.expected))
    };
    let report = with_pool(r.jobs, || classify_map(&spec, plan, r.tols))??;
    let verdict = report.aggregate.verdict;
    let doc = ReportDoc {
        schema_version: SCHEMA_VERSION,
        entry: label.clone(),
        params,
        points_sampled: plan.count,
        seed: plan.seed,
        report,
    };
    let rendered = match r.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => doc.to_json(),
        OutputFormat::Csv => doc.to_csv(),
    };
    let ok = match expected {
        Some(e) => verdict == e,
        None => verdict != Verdict::Inconclusive,
    };
    let summary = match expected {
        Some(e) => format!("{label}: verdict {verdict} (expected {e})"),
        None => format!("{label}: verdict {verdict}"),
    };
    Ok(CmdOutput {
        exit_code: if ok { 0 } else { 1 },
        rendered,
        summary,
    })
}

fn lookup_entry(key: &str, r: &Resolved) -> CliResult<CatalogEntry> {
    let params = EntryParams {
        a: single_param("a", &r.a)?,
        b: single_param("b", &r.b)?,
        m: single_param("m", &r.m)?,
        l: single_param("l", &r.l)?,
    };
    build_entry(key, params).map_err(CliError::from)
}

const DEFAULT_ML_GRID: [f64; 5] = [-1.0, -0.25, 0.0, 0.25, 1.0];

/// One row per grid cell; cell errors are recorded in the row, not fatal.
pub fn cmd_sweep(r: &Resolved) -> CliResult<CmdOutput> {
    let entry_key = r.entry.as_deref().unwrap_or("bcv-z");
    let or_default = |list: &[f64], d: &[f64]| -> Vec<f64> {
        if list.is_empty() {
            d.to_vec()
        } else {
            list.to_vec()
        }
    };
    // cells as (m, l, a, b) options per entry kind
    let cells: Vec<EntryParams> = match entry_key {
        "bcv-z" => {
            let ms = or_default(&r.m, &DEFAULT_ML_GRID);
            let ls = or_default(&r.l, &DEFAULT_ML_GRID);
            ms.iter()
                .flat_map(|&m| {
                    ls.iter().map(move |&l| EntryParams {
                        m: Some(m),
                        l: Some(l),
                        ..Default::default()
                    })
                })
                .collect()
        }
        "pr1" => {
            let az = or_default(&r.a, &[0.5, 1.0, 2.0]);
            let bz = or_default(&r.b, &[0.0, 1.0, 3.0]);
            az.iter()
                .flat_map(|&a| {
                    bz.iter().map(move |&b| EntryParams {
                        a: Some(a),
                        b: Some(b),
                        ..Default::default()
                    })
                })
                .collect()
        }
        "h2r-exp" => or_default(&r.m, &[-1.0, -0.25, -0.01])
            .iter()
            .map(|&m| EntryParams {
                m: Some(m),
                ..Default::default()
            })
            .collect(),
        _ => vec![EntryParams::default()],
    };
    if cells.is_empty() {
        return Err(CliError::config("empty sweep grid"));
    }
    let plan = SamplePlan {
        count: r.points,
        seed: r.seed,
    };
    let tols = r.tols;
    let rows: Vec<SweepRow> = with_pool(r.jobs, || {
        use rayon::prelude::*;
        cells
            .par_iter()
            .enumerate()
            .map(|(index, params)| {
                let model = match entry_key {
                    "bcv-z" => Some(classify_bcv(BcvParams::new(
                        params.m.unwrap_or(0.0),
                        params.l.unwrap_or(0.0),
                    ))),
                    _ => None,
                };
                let mut row = SweepRow {
                    index,
                    entry: entry_key.to_string(),
                    m: params.m,
                    l: params.l,
                    a: params.a,
                    b: params.b,
                    model,
                    expected: None,
                    verdict: None,
                    max_residual: None,
                    max_tension: None,
                    max_jacobi: None,
                    max_rc: None,
                    max_fiber: None,
                    status: "ok".to_string(),
                };
                match build_entry(entry_key, *params) {
                    Err(e) => row.status = format!("error: {e}"),
                    Ok(entry) => {
                        row.expected = Some(entry.expected);
                        match classify_map(&entry.spec, plan, tols) {
                            Err(e) => row.status = format!("error: {e}"),
                            Ok(report) => {
                                row.verdict = Some(report.aggregate.verdict);
                                row.max_residual = Some(report.aggregate.max_residual);
                                row.max_tension = Some(report.aggregate.max_tension);
                                row.max_jacobi = Some(report.aggregate.max_jacobi);
                                row.max_rc = Some(report.aggregate.max_rc);
                                row.max_fiber = Some(report.aggregate.max_fiber);
                            }
                        }
                    }
                }
                row
            })
            .collect()
    })?;
    let all_ok = rows
        .iter()
        .all(|row| row.status == "ok" && row.verdict.is_some() && row.verdict == row.expected);
    let doc = SweepDoc {
        schema_version: SCHEMA_VERSION,
        entry: entry_key.to_string(),
        points_per_cell: r.points,
        seed: r.seed,
        rows,
    };
    let rendered = match r.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => doc.to_json(),
        OutputFormat::Csv => doc.to_csv(),
    };
    let summary = format!(
        "sweep {entry_key}: {} cells, {}",
        doc.rows.len(),
        if all_ok { "all verdicts as expected" } else { "DEVIATIONS present" }
    );
    Ok(CmdOutput {
        exit_code: if all_ok { 0 } else { 1 },
        rendered,
        summary,
    })
}

/// Structural identity suites: closed-form table comparisons for the
/// homogeneous family (with `--bcv m l`) or the Jacobi/curvature/fiber
/// residuals for a catalog entry.
pub fn cmd_identities(r: &Resolved) -> CliResult<CmdOutput> {
    let plan = SamplePlan {
        count: r.points,
        seed: r.seed,
    };
    let tol = r.tol_identities;
    let doc = if let Some((m, l)) = r.bcv {
        let params = BcvParams::new(m, l);
        let points = sample_points(params.domain(), plan);
        let (conn, curv) = bcv_oracle_deviation(params, &points)?;
        let g = bcv_metric(params);
        let frame = bcv_frame(params);
        let mut gram: f64 = 0.0;
        for &p in &points {
            gram = gram.max(frame.gram_deviation(&g, p)?);
        }
        let pass = conn < tol && curv < tol && gram < tol;
        IdentityDoc {
            schema_version: SCHEMA_VERSION,
            target: format!("bcv(m={m}, l={l}) [{}]", classify_bcv(params)),
            points: plan.count,
            seed: plan.seed,
            tol,
            max_connection_deviation: Some(conn),
            max_curvature_deviation: Some(curv),
            max_gram_deviation: Some(gram),
            max_jacobi: None,
            max_rc: None,
            max_fiber: None,
            max_structure: None,
            pass,
        }
    } else {
        let key = r
            .entry
            .as_deref()
            .ok_or_else(|| CliError::config("identities needs an entry or --bcv M L"))?;
        let entry = lookup_entry(key, r)?;
        let points = sample_points(entry.spec.domain(), plan);
        let frame = entry.spec.build_frame();
        let data = integrability_data(&frame, entry.spec.metric());
        let k_n = base_curvature_field(&data, &frame);
        let e3 = frame.vector(2);
        let fiber_field = e3.derive(&k_n);
        let (mut gram, mut jac, mut rc, mut fiber, mut structure) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &p in &points {
            gram = gram.max(frame.gram_deviation(entry.spec.metric(), p)?);
            for v in crate::biharmonic::jacobi_residuals(&frame, &data, entry.spec.metric(), p)? {
                jac = jac.max(v.abs());
            }
            for v in crate::biharmonic::rc_residuals(&frame, &data, entry.spec.metric(), p)? {
                rc = rc.max(v.abs());
            }
            fiber = fiber.max(fiber_field.eval(p)?.value().abs());
            structure = structure.max(data.structure_residual(p)?);
        }
        let pass = gram < tol && jac < tol && rc < tol && fiber < tol && structure < tol;
        IdentityDoc {
            schema_version: SCHEMA_VERSION,
            target: entry.label.clone(),
            points: plan.count,
            seed: plan.seed,
            tol,
            max_connection_deviation: None,
            max_curvature_deviation: None,
            max_gram_deviation: Some(gram),
            max_jacobi: Some(jac),
            max_rc: Some(rc),
            max_fiber: Some(fiber),
            max_structure: Some(structure),
            pass,
        }
    };
    let rendered = match r.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => doc.to_json(),
        OutputFormat::Csv => doc.to_csv(),
    };
    let summary = format!(
        "identities {}: {}",
        doc.target,
        if doc.pass { "pass" } else { "FAIL" }
    );
    Ok(CmdOutput {
        exit_code: if doc.pass { 0 } else { 1 },
        rendered,
        summary,
    })
}
