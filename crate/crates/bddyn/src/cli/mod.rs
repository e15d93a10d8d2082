//! Command-line front end: configuration ingestion, the six analysis
//! commands, and deterministic serialization of their results.
//!
//! Exit-code contract: 0 on success, 1 on computation or validation
//! failure, 2 on configuration errors.

pub mod config;
pub mod report;
pub mod validate;

use serde::Serialize;

use crate::dynamics::{self, detect_attractor, AttractorClass, IntegratorConfig};
use crate::equilibria::{self, Diagnostic, EquilibriumKind};
use crate::hopf;
use crate::linalg::vec_max_abs;
use crate::model::{rhs, Params, PredatorIndex, State};
use crate::reference;
use crate::stability::{self, boundedness_bounds, persistence_check};

pub use config::RunConfig;
pub use validate::{run_validation, JacobianFault, ValidationOptions};

#[derive(Debug, Clone)]
pub enum CmdError {
    /// Bad configuration; exit code 2.
    Config(String),
    /// Computation failed; exit code 1.
    Computation(String),
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(m) => write!(f, "configuration error: {m}"),
            CmdError::Computation(m) => write!(f, "computation error: {m}"),
        }
    }
}

impl std::error::Error for CmdError {}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Computation(_) => 1,
        }
    }
}

/// Everything a command produces: a human summary for stdout and named
/// output files (the first is the machine-readable results document).
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub summary: String,
    pub files: Vec<(String, String)>,
    pub exit_code: i32,
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn comp(e: impl std::fmt::Display) -> CmdError {
    CmdError::Computation(e.to_string())
}

// ---------------------------------------------------------------------
// equilibria
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
struct EquilibriumRow {
    kind: EquilibriumKind,
    coords: [f64; 3],
    feasible: bool,
    /// Max-norm of the vector field at the point; absent for infeasible
    /// candidates with negative components.
    rhs_residual: Option<f64>,
    diagnostics: Vec<Diagnostic<f64>>,
}

#[derive(Debug, Clone, Serialize)]
struct EquilibriaDoc {
    r: f64,
    params: Params<f64>,
    equilibria: Vec<EquilibriumRow>,
}

pub fn cmd_equilibria(cfg: &RunConfig) -> Result<ReportBundle, CmdError> {
    let p = cfg.params()?;
    let mut rows = Vec::new();
    for e in equilibria::all_equilibria(&p) {
        let residual = rhs(&p, &e.coords)
            .ok()
            .map(|d| vec_max_abs(&d.as_array()));
        rows.push(EquilibriumRow {
            kind: e.kind,
            coords: e.coords.as_array(),
            feasible: e.feasible,
            rhs_residual: residual,
            diagnostics: e.diagnostics,
        });
    }

    let mut summary = format!("equilibria at r = {}\n", report::sig17(p.r));
    for row in &rows {
        summary.push_str(&format!(
            "{:?}: ({}, {}, {}) feasible={} residual={}\n",
            row.kind,
            report::sig17(row.coords[0]),
            report::sig17(row.coords[1]),
            report::sig17(row.coords[2]),
            row.feasible,
            row.rhs_residual
                .map(|r| format!("{r:.3e}"))
                .unwrap_or_else(|| "n/a".to_string()),
        ));
    }

    let doc = EquilibriaDoc {
        r: p.r,
        params: p,
        equilibria: rows,
    };
    Ok(ReportBundle {
        summary,
        files: vec![("equilibria_results.json".to_string(), to_json(&doc))],
        exit_code: 0,
    })
}

// ---------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
struct StabilityDoc {
    r: f64,
    params: Params<f64>,
    reports: Vec<stability::StabilityReport<f64>>,
    persistence: Vec<stability::ConditionReport<f64>>,
    boundedness: stability::BoundednessReport<f64>,
    boundary_conditions: Vec<stability::ConditionReport<f64>>,
    interior_local: Option<stability::ConditionReport<f64>>,
    interior_global: Option<stability::GlobalStabilityReport<f64>>,
}

pub fn cmd_stability(cfg: &RunConfig) -> Result<ReportBundle, CmdError> {
    let p = cfg.params()?;
    let all = equilibria::all_equilibria(&p);
    let mut reports = Vec::new();
    for e in &all {
        if e.feasible {
            reports.push(stability::classify(&p, e).map_err(comp)?);
        }
    }

    let e1 = equilibria::boundary1(&p).equilibrium;
    let e2 = equilibria::boundary2(&p).equilibrium;
    let persistence = persistence_check(&p, e1.as_ref(), e2.as_ref());
    let boundedness = boundedness_bounds(&p, None, None).map_err(comp)?;

    let mut boundary_conditions = Vec::new();
    if let Some(ref e) = e1 {
        if e.feasible {
            boundary_conditions
                .push(stability::local_condition_boundary(&p, e, PredatorIndex::First).map_err(comp)?);
        }
    }
    if let Some(ref e) = e2 {
        if e.feasible {
            boundary_conditions
                .push(stability::local_condition_boundary(&p, e, PredatorIndex::Second).map_err(comp)?);
        }
    }

    let estar = all
        .iter()
        .find(|e| e.kind == EquilibriumKind::Interior && e.feasible);
    let interior_local = match estar {
        Some(e) => Some(stability::local_condition_interior(&p, e).map_err(comp)?),
        None => None,
    };
    let interior_global = match estar {
        Some(e) => {
            Some(stability::global_condition(&p, e, boundedness.prey_bound).map_err(comp)?)
        }
        None => None,
    };

    let mut summary = format!("stability at r = {}\n", report::sig17(p.r));
    for rep in &reports {
        summary.push_str(&format!(
            "{:?}: {:?}, routh_hurwitz_stable={} (k1={:.6e}, k2={:.6e}, k3={:.6e}, C2={:.6e})\n",
            rep.equilibrium.kind,
            rep.classification,
            rep.routh_hurwitz_stable,
            rep.charpoly.k1,
            rep.charpoly.k2,
            rep.charpoly.k3,
            rep.charpoly.c2,
        ));
    }
    let fmt_cond = |c: &stability::ConditionReport<f64>| match (c.lhs, c.rhs) {
        (Some(l), Some(r)) => format!("{}: {:.6e} vs {:.6e} -> {:?}\n", c.name, l, r, c.status),
        _ => format!("{}: {:?} ({})\n", c.name, c.status, c.context),
    };
    for c in &persistence {
        summary.push_str(&fmt_cond(c));
    }
    for c in &boundedness.conditions {
        summary.push_str(&fmt_cond(c));
    }
    for c in &boundary_conditions {
        summary.push_str(&fmt_cond(c));
    }
    if let Some(ref c) = interior_local {
        summary.push_str(&fmt_cond(c));
    }
    if let Some(ref g) = interior_global {
        summary.push_str(&fmt_cond(&g.condition));
    }
    summary.push_str(&format!(
        "ultimate bound M = {} (rho = {}, w = {})\n",
        report::sig17(boundedness.ultimate_bound),
        report::sig17(boundedness.rho),
        report::sig17(boundedness.prey_bound),
    ));

    let doc = StabilityDoc {
        r: p.r,
        params: p,
        reports,
        persistence,
        boundedness,
        boundary_conditions,
        interior_local,
        interior_global,
    };
    Ok(ReportBundle {
        summary,
        files: vec![("stability_results.json".to_string(), to_json(&doc))],
        exit_code: 0,
    })
}

// ---------------------------------------------------------------------
// hopf
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
struct HopfDoc {
    params: Params<f64>,
    bracket: (f64, f64),
    search: hopf::HopfSearchResult<f64>,
    center_manifold: hopf::CenterManifoldReport<f64>,
    closed_form_diagnostic: hopf::RcClosedFormDiagnostic<f64>,
    direction_validation: hopf::DirectionValidation<f64>,
    published_rc: f64,
    published_pi: f64,
}

pub fn cmd_hopf(cfg: &RunConfig) -> Result<ReportBundle, CmdError> {
    let p = cfg.params()?;
    let search = hopf::find_rc(&p, cfg.hopf_bracket).map_err(comp)?;
    let cm = hopf::center_manifold(&p, search.r_c).map_err(comp)?;
    let diag = hopf::rc_closed_form_diagnostic(&p, &cm.equilibrium).map_err(comp)?;
    let direction_validation =
        hopf::validate_direction(&p, search.r_c, cm.direction).map_err(comp)?;

    let mut summary = String::new();
    summary.push_str(&format!(
        "critical growth rate r_c = {} (bracket [{}, {}])\n",
        report::sig17(search.r_c),
        cfg.hopf_bracket.0,
        cfg.hopf_bracket.1
    ));
    summary.push_str(&format!(
        "|C2(r_c)| = {:.3e}, k2 = {:.6e}, dC2/dr = {:.6e}, |Re lambda_pair| = {:.3e}\n",
        search.c2_residual, search.k2_at_rc, search.transversality, search.eigen_crosscheck
    ));
    summary.push_str(&format!(
        "Pi = {} -> {:?} (literal-transcription variant: {})\n",
        report::sig17(cm.pi),
        cm.direction,
        report::sig17(cm.pi_printed_variant)
    ));
    summary.push_str(&format!(
        "published comparison: r_c {} vs {} (rel diff {:.2e}); Pi {} vs {} (sign {})\n",
        report::sig17(search.r_c),
        reference::PUBLISHED_RC,
        (search.r_c - reference::PUBLISHED_RC).abs() / reference::PUBLISHED_RC,
        report::sig17(cm.pi),
        reference::PUBLISHED_PI,
        if cm.pi.signum() == reference::PUBLISHED_PI.signum() {
            "agrees"
        } else {
            "disagrees"
        }
    ));
    summary.push_str(&format!(
        "direction vs simulation: {} ({})\n",
        if direction_validation.consistent {
            "consistent"
        } else {
            "NOT consistent"
        },
        direction_validation.notes
    ));

    let doc = HopfDoc {
        params: p,
        bracket: cfg.hopf_bracket,
        search,
        center_manifold: cm,
        closed_form_diagnostic: diag,
        direction_validation,
        published_rc: reference::PUBLISHED_RC,
        published_pi: reference::PUBLISHED_PI,
    };
    Ok(ReportBundle {
        summary,
        files: vec![("hopf_results.json".to_string(), to_json(&doc))],
        exit_code: 0,
    })
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
struct SimulateDoc {
    r: f64,
    params: Params<f64>,
    init: [f64; 3],
    integrator: IntegratorConfig<f64>,
    accepted_steps: u64,
    rejected_steps: u64,
    estimate: Option<dynamics::CycleEstimate<f64>>,
    failure: Option<String>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<ReportBundle, CmdError> {
    let p = cfg.params()?;
    let init = match cfg.simulate_init {
        Some(a) => State::from_array(a),
        None => {
            let estar = equilibria::feasible_interior(&p).map_err(|e| {
                CmdError::Config(format!(
                    "simulate.init missing and no interior equilibrium to perturb: {e}"
                ))
            })?;
            dynamics::sweep_init(&estar.coords)
        }
    };
    let mut icfg = cfg.integrator;
    icfg.divergence_threshold = IntegratorConfig::for_params(&p).divergence_threshold;

    let (traj, failure, exit_code) = match dynamics::integrate(&p, &init, &icfg) {
        Ok(t) => (t, None, 0),
        Err(f) => {
            if f.kind == dynamics::FailureKind::InvalidInput {
                return Err(CmdError::Config(f.message));
            }
            let msg = f.to_string();
            (f.partial, Some(msg), 1)
        }
    };
    let estimate = if traj.len() > 4 {
        Some(detect_attractor(&traj, &icfg))
    } else {
        None
    };

    let mut summary = format!(
        "simulate at r = {} from ({}, {}, {}) to t = {}\n",
        report::sig17(p.r),
        report::sig17(init.x1),
        report::sig17(init.x2),
        report::sig17(init.x3),
        icfg.t_end
    );
    match &estimate {
        Some(est) => {
            summary.push_str(&format!(
                "class = {}{}; amplitudes = ({:.6e}, {:.6e}, {:.6e})\n",
                report::class_label(&est.class),
                est.period
                    .map(|p| format!(", period ~ {p:.4}"))
                    .unwrap_or_default(),
                est.amplitude[0],
                est.amplitude[1],
                est.amplitude[2],
            ));
        }
        None => summary.push_str("trajectory too short to classify\n"),
    }
    if let Some(ref f) = failure {
        summary.push_str(&format!("FAILED: {f}\n"));
    }

    let doc = SimulateDoc {
        r: p.r,
        params: p,
        init: init.as_array(),
        integrator: icfg,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        estimate,
        failure,
    };
    Ok(ReportBundle {
        summary,
        files: vec![
            ("simulate_results.json".to_string(), to_json(&doc)),
            ("trajectory.csv".to_string(), report::trajectory_csv(&traj)),
        ],
        exit_code,
    })
}

// ---------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
struct SweepDoc {
    params: Params<f64>,
    r_lo: f64,
    r_hi: f64,
    n_points: usize,
    integrator: IntegratorConfig<f64>,
    succeeded: usize,
    transitions_periodic_to_steady: usize,
    first_transition_interval: Option<(f64, f64)>,
    points: Vec<dynamics::SweepPoint<f64>>,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<ReportBundle, CmdError> {
    let template = cfg.params_template();
    let sw = cfg.sweep;
    let mut icfg = cfg.integrator;
    icfg.t_end = sw.t_end;
    icfg.n_samples = sw.n_samples;
    icfg.divergence_threshold =
        IntegratorConfig::for_params(&template.with_r(sw.r_hi)).divergence_threshold;

    let sweep =
        dynamics::sweep_r(&template, sw.r_lo, sw.r_hi, sw.n_points, &icfg).map_err(comp)?;

    let succeeded = sweep.points.iter().filter(|pt| pt.error.is_none()).count();
    let classes: Vec<Option<&AttractorClass>> = sweep
        .points
        .iter()
        .map(|pt| pt.cycle.as_ref().map(|c| &c.class))
        .collect();
    let mut transitions = 0;
    let mut first_transition = None;
    for w in 0..classes.len().saturating_sub(1) {
        if let (Some(AttractorClass::Periodic), Some(AttractorClass::Steady)) =
            (classes[w], classes[w + 1])
        {
            transitions += 1;
            if first_transition.is_none() {
                first_transition = Some((sweep.points[w].r, sweep.points[w + 1].r));
            }
        }
    }

    let exit_code = if succeeded * 10 >= sweep.points.len() * 9 {
        0
    } else {
        1
    };

    let mut summary = format!(
        "sweep r in [{}, {}] with {} points (t_end = {}): {} succeeded\n",
        sw.r_lo,
        sw.r_hi,
        sw.n_points,
        sw.t_end,
        succeeded
    );
    summary.push_str(&format!(
        "periodic->steady transitions: {}{}\n",
        transitions,
        first_transition
            .map(|(a, b)| format!(" (first inside [{}, {}])", report::sig17(a), report::sig17(b)))
            .unwrap_or_default()
    ));

    let doc = SweepDoc {
        params: template,
        r_lo: sw.r_lo,
        r_hi: sw.r_hi,
        n_points: sw.n_points,
        integrator: icfg,
        succeeded,
        transitions_periodic_to_steady: transitions,
        first_transition_interval: first_transition,
        points: sweep.points.clone(),
    };
    Ok(ReportBundle {
        summary,
        files: vec![
            ("sweep_results.json".to_string(), to_json(&doc)),
            ("sweep.csv".to_string(), report::sweep_csv(&sweep)),
        ],
        exit_code,
    })
}

// ---------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------

pub fn cmd_validate(cfg: &RunConfig) -> Result<ReportBundle, CmdError> {
    cmd_validate_with(cfg, &ValidationOptions::default())
}

pub fn cmd_validate_with(
    cfg: &RunConfig,
    opts: &ValidationOptions,
) -> Result<ReportBundle, CmdError> {
    let p = cfg.params()?;
    let doc = run_validation(&p, cfg.hopf_bracket, opts).map_err(comp)?;
    let summary = validate::render_summary(&doc);
    let exit_code = if doc.passed { 0 } else { 1 };
    Ok(ReportBundle {
        summary,
        files: vec![("validate_results.json".to_string(), to_json(&doc))],
        exit_code,
    })
}
