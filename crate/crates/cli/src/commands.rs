use std::collections::BTreeMap;
use std::path::Path;

use gapcert::bounds::{best_bound, certify_weight, GridSpec};
use gapcert::descriptor::{Options, WeightDescriptor};
use gapcert::gsa::{sobol_upper_bound, GsaReport, SampleSet};
use gapcert::report::{serialize_f64, serialize_f64_map};
use gapcert::validate::{galerkin_upper, product_gap, radial_gap, GalerkinProblem, Quadrature};
use gapcert::{Body, BoundKind, BoundReport, GapError, Potential};
use serde::Serialize;

use crate::output::{num, to_json, Table};
use crate::problem::{Instance, Problem};
use crate::{classify, Failure};

/// Relative slack allowed before a lower bound above a reference is an alarm.
pub const SANDWICH_TOL: f64 = 1e-6;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INAPPLICABLE: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;

pub struct Outcome {
    pub json: String,
    pub text: String,
    pub code: u8,
}

fn diag_cell(m: &BTreeMap<String, f64>) -> String {
    m.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect::<Vec<_>>().join(" ")
}

fn bounds_table(title: &[String], bounds: &[BoundReport]) -> Table {
    let mut t = Table::new(&["method", "kind", "ok", "value", "diagnostics", "notes"]);
    for line in title {
        t.title(line.clone());
    }
    for b in bounds {
        t.row(vec![
            b.method.name().into(),
            b.kind.name().into(),
            if b.assumptions_ok { "yes" } else { "no" }.into(),
            num(b.value),
            diag_cell(&b.diagnostics),
            b.notes.join("; "),
        ]);
    }
    t
}

fn header(inst: &Instance) -> Vec<String> {
    vec![format!("body: {}", inst.body.label()), format!("potential: {}", inst.pot.label())]
}

#[derive(Serialize)]
struct BoundRun {
    dim: usize,
    body: String,
    potential: String,
    bounds: Vec<BoundReport>,
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    command: &'static str,
    options: &'a Options,
    runs: Vec<BoundRun>,
}

pub fn bound(problem: &Problem) -> Result<Outcome, Failure> {
    let grid = problem.desc.options.grid();
    let mut runs = Vec::new();
    let mut text = String::new();
    let mut code = EXIT_OK;
    for inst in problem.instances(None)? {
        let bounds = best_bound(&inst.pot, &inst.body, &grid);
        if !bounds.iter().any(BoundReport::is_certified_lower) {
            code = EXIT_INAPPLICABLE;
        }
        text.push_str(&bounds_table(&header(&inst), &bounds).render());
        text.push('\n');
        runs.push(BoundRun { dim: inst.dim, body: inst.body.label(), potential: inst.pot.label(), bounds });
    }
    let json = to_json(&BoundOutput { command: "bound", options: &problem.desc.options, runs })?;
    Ok(Outcome { json, text, code })
}

#[derive(Serialize)]
struct Reference {
    name: String,
    /// numeric, upper or exact.
    kind: &'static str,
    #[serde(serialize_with = "serialize_f64")]
    value: f64,
    #[serde(serialize_with = "serialize_f64")]
    std_error: f64,
    #[serde(serialize_with = "serialize_f64_map")]
    diagnostics: BTreeMap<String, f64>,
}

impl Reference {
    /// value + 3 standard errors: the largest value the reference allows.
    fn limit(&self) -> f64 {
        self.value + 3.0 * self.std_error
    }
}

#[derive(Serialize)]
struct Check {
    lower: String,
    reference: String,
    #[serde(serialize_with = "serialize_f64")]
    lower_value: f64,
    #[serde(serialize_with = "serialize_f64")]
    reference_limit: f64,
    #[serde(serialize_with = "serialize_f64")]
    margin: f64,
    ok: bool,
}

#[derive(Serialize)]
struct Skipped {
    reference: &'static str,
    reason: String,
}

#[derive(Serialize)]
struct ValidateRun {
    dim: usize,
    body: String,
    potential: String,
    bounds: Vec<BoundReport>,
    references: Vec<Reference>,
    skipped: Vec<Skipped>,
    checks: Vec<Check>,
    sandwich_ok: bool,
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    command: &'static str,
    options: &'a Options,
    #[serde(skip_serializing_if = "Option::is_none")]
    inflate_lower: Option<f64>,
    runs: Vec<ValidateRun>,
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Largest degree ≤ `max` whose basis and moment table stay affordable.
fn galerkin_degree(d: usize, max: usize, exact: bool) -> usize {
    let basis_cap = if exact { 250 } else { 60 };
    (1..=max.max(1))
        .take_while(|&k| binom(d + k, k) - 1 <= basis_cap && (exact || binom(d + 2 * k, 2 * k) <= 1000))
        .last()
        .unwrap_or(1)
}

fn galerkin_reference(body: &Body, pot: &Potential, opts: &Options) -> Result<Reference, GapError> {
    let probe = GalerkinProblem::new(body.clone(), pot.clone(), 1);
    let exact = probe.quadrature == Quadrature::Exact;
    let mut problem = GalerkinProblem { degree: galerkin_degree(body.dim(), opts.degree, exact), ..probe };
    if let Quadrature::MonteCarlo { ref mut seed, .. } = problem.quadrature {
        *seed = opts.seed;
    }
    let g = galerkin_upper(&problem)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("degree".into(), problem.degree as f64);
    diagnostics.insert("basis_size".into(), g.basis_size as f64);
    diagnostics.insert("rank".into(), g.rank as f64);
    Ok(Reference { name: "galerkin_upper".into(), kind: "upper", value: g.value, std_error: g.std_error, diagnostics })
}

fn numeric_references(inst: &Instance, opts: &Options, refs: &mut Vec<Reference>, skipped: &mut Vec<Skipped>) {
    let (body, pot) = (&inst.body, &inst.pot);
    if pot.is_radial() && matches!(body, Body::Ball { .. } | Body::BallComplement { .. }) {
        match radial_gap(pot, body, opts.grid_n, opts.trunc) {
            Ok(g) => {
                let mut diagnostics = BTreeMap::new();
                diagnostics.insert("sector".into(), if g.sector == gapcert::validate::Sector::L1 { 1.0 } else { 0.0 });
                diagnostics.insert("l0".into(), g.l0.extrapolated);
                diagnostics.insert("l1".into(), g.l1.extrapolated);
                if let (Some(r), Some(dbl)) = (g.r_max, g.doubled) {
                    diagnostics.insert("r_max".into(), r);
                    diagnostics.insert("doubled_truncation".into(), dbl);
                }
                refs.push(Reference {
                    name: "sturm_radial".into(),
                    kind: "numeric",
                    value: g.value,
                    std_error: 0.0,
                    diagnostics,
                });
            }
            Err(e) => skipped.push(Skipped { reference: "sturm_radial", reason: e.to_string() }),
        }
    }
    if matches!(body, Body::Box { .. }) {
        match product_gap(pot, body, opts.grid_n) {
            Ok(g) => {
                let mut diagnostics = BTreeMap::new();
                diagnostics.insert("axis".into(), g.axis as f64);
                refs.push(Reference {
                    name: "sturm_product".into(),
                    kind: "numeric",
                    value: g.value,
                    std_error: 0.0,
                    diagnostics,
                });
            }
            Err(e) => skipped.push(Skipped { reference: "sturm_product", reason: e.to_string() }),
        }
    }
    if body.is_bounded() {
        match galerkin_reference(body, pot, opts) {
            Ok(r) => refs.push(r),
            Err(e) => skipped.push(Skipped { reference: "galerkin_upper", reason: e.to_string() }),
        }
    }
}

fn sandwich(bounds: &[BoundReport], refs: &[Reference]) -> Vec<Check> {
    let mut checks = Vec::new();
    for lo in bounds.iter().filter(|b| b.is_certified_lower()) {
        for r in refs {
            if r.name == lo.method.name() {
                continue;
            }
            let limit = r.limit();
            checks.push(Check {
                lower: lo.method.name().into(),
                reference: r.name.clone(),
                lower_value: lo.value,
                reference_limit: limit,
                margin: limit - lo.value,
                ok: lo.value <= limit + SANDWICH_TOL * limit.abs(),
            });
        }
    }
    checks
}

pub fn validate(problem: &Problem, inflate_lower: Option<f64>) -> Result<Outcome, Failure> {
    if let Some(f) = inflate_lower {
        if !(f.is_finite() && f > 0.0) {
            return Err(Failure::Input(format!("inflation factor must be positive, got {f}")));
        }
    }
    let opts = &problem.desc.options;
    let grid = opts.grid();
    let mut runs = Vec::new();
    let mut text = String::new();
    let mut code = EXIT_OK;
    for inst in problem.instances(None)? {
        let mut bounds = best_bound(&inst.pot, &inst.body, &grid);
        if let Some(f) = inflate_lower {
            for b in bounds.iter_mut().filter(|b| b.is_certified_lower()) {
                b.value *= f;
            }
        }
        let mut refs: Vec<Reference> = bounds
            .iter()
            .filter(|b| b.is_reference_upper())
            .map(|b| Reference {
                name: b.method.name().into(),
                kind: if b.kind == BoundKind::Exact { "exact" } else { "upper" },
                value: b.value,
                std_error: 0.0,
                diagnostics: BTreeMap::new(),
            })
            .collect();
        let mut skipped = Vec::new();
        numeric_references(&inst, opts, &mut refs, &mut skipped);
        let checks = sandwich(&bounds, &refs);
        let sandwich_ok = checks.iter().all(|c| c.ok);
        if !sandwich_ok {
            code = EXIT_VIOLATION;
        } else if code == EXIT_OK && !bounds.iter().any(BoundReport::is_certified_lower) {
            code = EXIT_INAPPLICABLE;
        }

        let mut title = header(&inst);
        title.push(format!("sandwich: {}", if sandwich_ok { "ok" } else { "VIOLATED" }));
        text.push_str(&bounds_table(&title, &bounds).render());
        let mut rt = Table::new(&["reference", "kind", "value", "std_error", "diagnostics"]);
        for r in &refs {
            rt.row(vec![r.name.clone(), r.kind.into(), num(r.value), num(r.std_error), diag_cell(&r.diagnostics)]);
        }
        for s in &skipped {
            rt.row(vec![s.reference.into(), "skipped".into(), String::new(), String::new(), s.reason.clone()]);
        }
        text.push('\n');
        text.push_str(&rt.render());
        let mut ct = Table::new(&["lower", "reference", "lower_value", "reference_limit", "margin", "ok"]);
        for c in &checks {
            ct.row(vec![
                c.lower.clone(),
                c.reference.clone(),
                num(c.lower_value),
                num(c.reference_limit),
                num(c.margin),
                if c.ok { "yes" } else { "NO" }.into(),
            ]);
        }
        text.push('\n');
        text.push_str(&ct.render());
        text.push('\n');
        runs.push(ValidateRun {
            dim: inst.dim,
            body: inst.body.label(),
            potential: inst.pot.label(),
            bounds,
            references: refs,
            skipped,
            checks,
            sandwich_ok,
        });
    }
    let json = to_json(&ValidateOutput { command: "validate", options: opts, inflate_lower, runs })?;
    Ok(Outcome { json, text, code })
}

#[derive(Serialize)]
struct CertifyRun {
    dim: usize,
    body: String,
    potential: String,
    weight: String,
    report: BoundReport,
}

#[derive(Serialize)]
struct CertifyOutput<'a> {
    command: &'static str,
    options: &'a Options,
    runs: Vec<CertifyRun>,
}

pub fn certify(problem: &Problem, weight: &WeightDescriptor) -> Result<Outcome, Failure> {
    let spec = weight.build().map_err(|e| Failure::Input(e.to_string()))?;
    let grid: GridSpec = problem.desc.options.grid();
    let mut runs = Vec::new();
    let mut text = String::new();
    let mut code = EXIT_OK;
    for inst in problem.instances(None)? {
        let report = certify_weight(&inst.pot, &inst.body, &spec, &grid).map_err(classify)?;
        if !report.assumptions_ok {
            code = EXIT_INAPPLICABLE;
        }
        let mut title = header(&inst);
        title.push(format!("weight: {}", spec.label()));
        text.push_str(&bounds_table(&title, std::slice::from_ref(&report)).render());
        text.push('\n');
        runs.push(CertifyRun {
            dim: inst.dim,
            body: inst.body.label(),
            potential: inst.pot.label(),
            weight: spec.label(),
            report,
        });
    }
    let json = to_json(&CertifyOutput { command: "certify", options: &problem.desc.options, runs })?;
    Ok(Outcome { json, text, code })
}

#[derive(Serialize)]
struct GsaOutput<'a> {
    command: &'static str,
    options: &'a Options,
    body: String,
    potential: String,
    report: GsaReport,
}

/// The certified lower bound used for λ: the named method, or the largest.
fn pick_lambda(bounds: &[BoundReport], method: Option<&str>) -> Result<BoundReport, Failure> {
    let mut ok = bounds.iter().filter(|b| b.is_certified_lower() && b.value > 0.0 && b.value.is_finite());
    let found = match method {
        Some(m) => ok.find(|b| b.method.name() == m),
        None => ok.max_by(|a, b| a.value.total_cmp(&b.value)),
    };
    found.cloned().ok_or_else(|| {
        Failure::Inapplicable(match method {
            Some(m) => format!("no certified lower bound from method {m:?}"),
            None => "no certified lower bound for this problem".into(),
        })
    })
}

pub fn gsa(problem: &Problem, csv: &Path, method: Option<&str>) -> Result<Outcome, Failure> {
    let samples = SampleSet::from_csv(csv).map_err(|e| Failure::Input(e.to_string()))?;
    let mut inst = problem.instances(Some(samples.dim))?;
    if inst.len() != 1 {
        return Err(Failure::Input("gsa takes a single dimension".into()));
    }
    let inst = inst.remove(0);
    if inst.dim != samples.dim {
        return Err(Failure::Input(format!("samples have {} inputs, body has dimension {}", samples.dim, inst.dim)));
    }
    let samples = samples.restrict_to(&inst.body).map_err(|e| Failure::Input(e.to_string()))?;
    let bounds = best_bound(&inst.pot, &inst.body, &problem.desc.options.grid());
    let lambda = pick_lambda(&bounds, method)?;
    let report = sobol_upper_bound(&samples, &lambda).map_err(|e| Failure::Input(e.to_string()))?;

    let mut t =
        Table::new(&["input", "dgsm", "dgsm_std_error", "sobol_upper", "sobol_upper_std_error", "uninformative"]);
    for line in header(&inst) {
        t.title(line);
    }
    t.title(format!("lambda: {} = {} ({})", lambda.method.name(), num(lambda.value), lambda.kind.name()));
    t.title(format!("variance: {} +- {}", num(report.variance_hat), num(report.variance_std_error)));
    t.title(format!("rows: {} used, {} rejected", report.rows, report.rejected_rows));
    for i in 0..report.dgsm.len() {
        t.row(vec![
            format!("x{}", i + 1),
            num(report.dgsm[i]),
            num(report.dgsm_std_error[i]),
            num(report.sobol_upper[i]),
            num(report.sobol_upper_std_error[i]),
            if report.uninformative[i] { "yes" } else { "no" }.into(),
        ]);
    }
    let json = to_json(&GsaOutput {
        command: "gsa",
        options: &problem.desc.options,
        body: inst.body.label(),
        potential: inst.pot.label(),
        report,
    })?;
    Ok(Outcome { json, text: t.render(), code: EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_choice_respects_caps() {
        assert_eq!(galerkin_degree(2, 6, true), 6);
        assert_eq!(galerkin_degree(10, 6, true), 2);
        assert_eq!(galerkin_degree(2, 6, false), 6);
        assert_eq!(galerkin_degree(10, 6, false), 1);
        assert_eq!(galerkin_degree(3, 0, true), 1);
        assert_eq!(binom(6, 3), 20);
    }

    #[test]
    fn sandwich_flags_only_real_excess() {
        let lo = vec![BoundReport::lower(gapcert::Method::PayneWeinberger, 1.0)];
        let r = |v: f64, se: f64| Reference {
            name: "x".into(),
            kind: "numeric",
            value: v,
            std_error: se,
            diagnostics: BTreeMap::new(),
        };
        assert!(sandwich(&lo, &[r(1.0, 0.0)])[0].ok);
        assert!(sandwich(&lo, &[r(1.0 - 5e-7, 0.0)])[0].ok);
        assert!(!sandwich(&lo, &[r(0.99, 0.0)])[0].ok);
        assert!(sandwich(&lo, &[r(0.99, 0.004)])[0].ok);
    }
}
