//! Run configuration: a flat JSON document whose top-level keys match the
//! model parameter names, plus per-command sections. Every value is
//! validated before any computation starts, and validation errors name the
//! offending key and constraint.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    IntegratorConfig, DEFAULT_ABS_TOL, DEFAULT_EXTINCTION_THRESHOLD, DEFAULT_N_SAMPLES,
    DEFAULT_REL_TOL, DEFAULT_TRANSIENT_FRACTION, DEFAULT_T_END,
};
use crate::model::Params;
use crate::presets;

use super::CmdError;

/// Raw file document; all parameters optional so presets and flags can
/// fill the gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub r: Option<f64>,
    pub k: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    #[serde(default)]
    pub integrator: Option<IntegratorSection>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub hopf: Option<HopfSection>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub t_end: Option<f64>,
    pub max_step: Option<f64>,
    pub transient_fraction: Option<f64>,
    pub extinction_threshold: Option<f64>,
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Initial state; when absent the run starts from a 1% perturbation of
    /// the interior equilibrium.
    pub init: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub r_lo: Option<f64>,
    pub r_hi: Option<f64>,
    pub n_points: Option<usize>,
    /// Sweep integrations use a long horizon by default: near the
    /// bifurcation the slowest transients decay like exp(-|r - r_c| t),
    /// and resolving the transition cell needs tens of thousands of time
    /// units.
    pub t_end: Option<f64>,
    pub n_samples: Option<usize>,
}

pub const SWEEP_DEFAULT_R_LO: f64 = 0.8;
pub const SWEEP_DEFAULT_R_HI: f64 = 2.0;
pub const SWEEP_DEFAULT_N_POINTS: usize = 120;
pub const SWEEP_DEFAULT_T_END: f64 = 60_000.0;
pub const SWEEP_DEFAULT_N_SAMPLES: usize = 60_000;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HopfSection {
    /// Search bracket for the critical growth rate; default [0.8, 2.0].
    pub bracket: Option<[f64; 2]>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// The eleven r-free parameters, validated. `r` is tracked separately
    /// because it must always be explicit.
    base: Params<f64>,
    r: Option<f64>,
    pub integrator: IntegratorConfig<f64>,
    pub simulate_init: Option<[f64; 3]>,
    pub sweep: ResolvedSweep,
    pub hopf_bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedSweep {
    pub r_lo: f64,
    pub r_hi: f64,
    pub n_points: usize,
    pub t_end: f64,
    pub n_samples: usize,
}

impl RunConfig {
    /// Parameters with the explicit growth rate; errors if `r` was never
    /// supplied.
    pub fn params(&self) -> Result<Params<f64>, CmdError> {
        let r = self.r.ok_or_else(|| {
            CmdError::Config(
                "r: missing; the growth rate is always explicit (use --r or the config file)"
                    .to_string(),
            )
        })?;
        Ok(self.base.with_r(r))
    }

    /// Parameter template for sweep runs, where the grid supplies `r`.
    pub fn params_template(&self) -> Params<f64> {
        self.base.with_r(self.r.unwrap_or(self.sweep.r_lo))
    }

    pub fn r(&self) -> Option<f64> {
        self.r
    }
}

/// Merge file, preset and the explicit `--r` flag into a validated
/// configuration. Precedence: the preset overrides file parameters (the
/// flag exists to combine a preset with file-level command sections), and
/// `--r` overrides everything.
pub fn load(
    config_path: Option<&Path>,
    preset: Option<&str>,
    r_flag: Option<f64>,
) -> Result<RunConfig, CmdError> {
    let mut raw = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CmdError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str::<RawConfig>(&text)
                .map_err(|e| CmdError::Config(format!("config {}: {e}", path.display())))?
        }
        None => RawConfig::default(),
    };

    if let Some(name) = preset {
        let p = presets::by_name::<f64>(name, 1.0)
            .ok_or_else(|| CmdError::Config(format!("unknown preset `{name}`")))?;
        raw.k = Some(p.k);
        raw.a1 = Some(p.a1);
        raw.a2 = Some(p.a2);
        raw.b1 = Some(p.b1);
        raw.b2 = Some(p.b2);
        raw.c1 = Some(p.c1);
        raw.c2 = Some(p.c2);
        raw.delta1 = Some(p.delta1);
        raw.delta2 = Some(p.delta2);
        raw.e1 = Some(p.e1);
        raw.e2 = Some(p.e2);
    }
    if r_flag.is_some() {
        raw.r = r_flag;
    }

    let need = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| {
            CmdError::Config(format!(
                "{key}: missing model parameter (supply it in the config file or via --preset)"
            ))
        })
    };
    let base = Params {
        // Placeholder growth rate for validation of the other eleven; the
        // real value is attached per command via params()/params_template().
        r: 1.0,
        k: need(raw.k, "k")?,
        a1: need(raw.a1, "a1")?,
        a2: need(raw.a2, "a2")?,
        b1: need(raw.b1, "b1")?,
        b2: need(raw.b2, "b2")?,
        c1: need(raw.c1, "c1")?,
        c2: need(raw.c2, "c2")?,
        delta1: need(raw.delta1, "delta1")?,
        delta2: need(raw.delta2, "delta2")?,
        e1: need(raw.e1, "e1")?,
        e2: need(raw.e2, "e2")?,
    };
    base.validate()
        .map_err(|e| CmdError::Config(e.to_string()))?;
    if let Some(r) = raw.r {
        base.with_r(r)
            .validate()
            .map_err(|e| CmdError::Config(e.to_string()))?;
    }

    let integ = raw.integrator.unwrap_or_default();
    let integrator = IntegratorConfig {
        rel_tol: integ.rel_tol.unwrap_or(DEFAULT_REL_TOL),
        abs_tol: integ.abs_tol.unwrap_or(DEFAULT_ABS_TOL),
        t_end: integ.t_end.unwrap_or(DEFAULT_T_END),
        max_step: integ.max_step,
        transient_fraction: integ.transient_fraction.unwrap_or(DEFAULT_TRANSIENT_FRACTION),
        extinction_threshold: integ
            .extinction_threshold
            .unwrap_or(DEFAULT_EXTINCTION_THRESHOLD),
        n_samples: integ.n_samples.unwrap_or(DEFAULT_N_SAMPLES),
        amplitude_rel_threshold: crate::dynamics::DEFAULT_AMPLITUDE_REL_THRESHOLD,
        divergence_threshold: None,
    };
    integrator
        .validate()
        .map_err(|e| CmdError::Config(format!("integrator.{e}")))?;

    let sw = raw.sweep.unwrap_or(SweepSection {
        r_lo: None,
        r_hi: None,
        n_points: None,
        t_end: None,
        n_samples: None,
    });
    let sweep = ResolvedSweep {
        r_lo: sw.r_lo.unwrap_or(SWEEP_DEFAULT_R_LO),
        r_hi: sw.r_hi.unwrap_or(SWEEP_DEFAULT_R_HI),
        n_points: sw.n_points.unwrap_or(SWEEP_DEFAULT_N_POINTS),
        t_end: sw.t_end.unwrap_or(SWEEP_DEFAULT_T_END),
        n_samples: sw.n_samples.unwrap_or(SWEEP_DEFAULT_N_SAMPLES),
    };
    if !(sweep.r_lo < sweep.r_hi) {
        return Err(CmdError::Config(format!(
            "sweep.r_lo/r_hi: need r_lo < r_hi, got [{}, {}]",
            sweep.r_lo, sweep.r_hi
        )));
    }
    if sweep.n_points < 2 {
        return Err(CmdError::Config(format!(
            "sweep.n_points: need at least 2 points, got {}",
            sweep.n_points
        )));
    }

    let hopf = raw.hopf.unwrap_or_default();
    let [lo, hi] = hopf.bracket.unwrap_or([0.8, 2.0]);
    if !(lo < hi) {
        return Err(CmdError::Config(format!(
            "hopf.bracket: need lo < hi, got [{lo}, {hi}]"
        )));
    }

    Ok(RunConfig {
        base,
        r: raw.r,
        integrator,
        simulate_init: raw.simulate.and_then(|s| s.init),
        sweep,
        hopf_bracket: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_with_flag_resolves() {
        let cfg = load(None, Some("table2"), Some(1.37)).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!(p.r, 1.37);
        assert_eq!(p.k, 200.0);
        assert_eq!(cfg.hopf_bracket, (0.8, 2.0));
    }

    #[test]
    fn missing_r_is_an_error_naming_the_key() {
        let cfg = load(None, Some("table2"), None).unwrap();
        let err = cfg.params().unwrap_err();
        match err {
            CmdError::Config(msg) => assert!(msg.starts_with("r:"), "{msg}"),
            other => panic!("wrong error kind: {other:?}"),
        }
    }

    #[test]
    fn missing_parameter_is_an_error_naming_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"r": 1.0, "k": 200.0}"#).unwrap();
        let err = load(Some(&path), None, None).unwrap_err();
        match err {
            CmdError::Config(msg) => assert!(msg.starts_with("a1:"), "{msg}"),
            other => panic!("wrong error kind: {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"growth": 1.0}"#).unwrap();
        let err = load(Some(&path), None, None).unwrap_err();
        match err {
            CmdError::Config(msg) => assert!(msg.contains("growth"), "{msg}"),
            other => panic!("wrong error kind: {other:?}"),
        }
    }

    #[test]
    fn invalid_parameter_value_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        let mut doc = serde_json::json!({
            "r": 1.0, "k": 200.0, "a1": 100.0, "a2": 100.0, "b1": 0.5, "b2": 0.5,
            "c1": 1.8, "c2": 1.8, "delta1": 0.82, "delta2": 0.62, "e1": 0.8143, "e2": 0.625
        });
        doc["e1"] = serde_json::json!(1.5);
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        let err = load(Some(&path), None, None).unwrap_err();
        match err {
            CmdError::Config(msg) => assert!(msg.contains("e1"), "{msg}"),
            other => panic!("wrong error kind: {other:?}"),
        }
    }

    #[test]
    fn sweep_defaults_are_applied() {
        let cfg = load(None, Some("table2"), Some(1.0)).unwrap();
        assert_eq!(cfg.sweep.r_lo, SWEEP_DEFAULT_R_LO);
        assert_eq!(cfg.sweep.n_points, SWEEP_DEFAULT_N_POINTS);
        assert_eq!(cfg.sweep.t_end, SWEEP_DEFAULT_T_END);
    }
}
