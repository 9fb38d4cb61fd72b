//! Scenario files: TOML with `[warp]`, `[curve]`, `[solver]`, `[checks.*]`,
//! `[output]` and an optional `[sweep]` section.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use warpflow_core::curve::Preset;
use warpflow_core::{Params, Warp};

pub const FAMILIES: [&str; 6] = ["exponential", "reciprocal", "shifted_reciprocal", "constant", "even_bowl", "extended"];
pub const PRESETS: [&str; 4] = ["circle", "graph_sine", "fold", "contractible"];
pub const CHECKS: [&str; 15] = [
    "graph_time",
    "graph_preserved",
    "v_monotone",
    "lemma32",
    "comparison",
    "length_monotone",
    "length_decay",
    "theta_pde",
    "v_pde",
    "kappa_sq_pde",
    "circle_oracle",
    "z_max_drop",
    "psi_decay",
    "derivative_trend",
    "residual_zero",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub warp: WarpConfig,
    pub curve: CurveConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub checks: std::collections::BTreeMap<String, CheckParams>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Base family of an `extended` warp.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub preset: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Build at `oversample × n` and resample to `n` equal-arclength vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remesh_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remesh_ratio_trigger: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Write a curve snapshot every this many samples; 0 keeps only the first and last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    UnknownFamily { name: String, suggestion: Option<String> },
    UnknownPreset { name: String, suggestion: Option<String> },
    UnknownCheck { name: String, suggestion: Option<String> },
    Invalid { field: String, message: String },
}

fn hint(s: &Option<String>) -> String {
    s.as_ref().map(|x| format!(" (did you mean \"{x}\"?)")).unwrap_or_default()
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "io error: {m}"),
            ConfigError::Parse(m) => write!(f, "parse error: {m}"),
            ConfigError::UnknownFamily { name, suggestion } => {
                write!(f, "unknown warp family \"{name}\"{}", hint(suggestion))
            }
            ConfigError::UnknownPreset { name, suggestion } => {
                write!(f, "unknown curve preset \"{name}\"{}", hint(suggestion))
            }
            ConfigError::UnknownCheck { name, suggestion } => write!(f, "unknown check \"{name}\"{}", hint(suggestion)),
            ConfigError::Invalid { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

/// Every problem found in one config.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

fn suggest(name: &str, known: &[&str]) -> Option<String> {
    known
        .iter()
        .map(|k| (strsim::levenshtein(name, k), *k))
        .filter(|(d, k)| *d <= 3.max(k.len() / 3))
        .min()
        .map(|(_, k)| k.to_string())
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

/// A named check with its parameters resolved to defaults.
#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    GraphTime,
    GraphPreserved,
    VMonotone { tol: f64 },
    Lemma32 { c0: f64, tol: f64 },
    Comparison { z_lower: f64, z_upper: f64 },
    LengthMonotone,
    LengthDecay { tol: f64 },
    ThetaPde { tol: f64 },
    VPde { tol: f64 },
    KappaSqPde { tol: f64 },
    CircleOracle { tol: f64 },
    ZMaxDrop { drop: f64 },
    PsiDecay { factor: f64 },
    DerivativeTrend { m_max: usize },
    ResidualZero { tol: f64 },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::GraphTime => "graph_time",
            Check::GraphPreserved => "graph_preserved",
            Check::VMonotone { .. } => "v_monotone",
            Check::Lemma32 { .. } => "lemma32",
            Check::Comparison { .. } => "comparison",
            Check::LengthMonotone => "length_monotone",
            Check::LengthDecay { .. } => "length_decay",
            Check::ThetaPde { .. } => "theta_pde",
            Check::VPde { .. } => "v_pde",
            Check::KappaSqPde { .. } => "kappa_sq_pde",
            Check::CircleOracle { .. } => "circle_oracle",
            Check::ZMaxDrop { .. } => "z_max_drop",
            Check::PsiDecay { .. } => "psi_decay",
            Check::DerivativeTrend { .. } => "derivative_trend",
            Check::ResidualZero { .. } => "residual_zero",
        }
    }
}

/// A validated scenario, ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub warp: Warp,
    pub preset: Preset<f64>,
    pub oversample: usize,
    pub params: Params,
    pub checks: Vec<Check>,
}

fn need(errors: &mut Vec<ConfigError>, field: &str, v: Option<f64>) -> f64 {
    v.unwrap_or_else(|| {
        errors.push(invalid(field, "required"));
        f64::NAN
    })
}

fn build_warp(cfg: &WarpConfig, family: &str, errors: &mut Vec<ConfigError>, nested: bool) -> Option<Warp> {
    if !FAMILIES.contains(&family) {
        errors.push(ConfigError::UnknownFamily { name: family.to_string(), suggestion: suggest(family, &FAMILIES) });
        return None;
    }
    let default_upper = match family {
        "reciprocal" | "shifted_reciprocal" => Some(-1.0),
        "exponential" | "constant" => Some(0.0),
        _ => None,
    };
    let a = match cfg.domain_upper.or(default_upper) {
        Some(a) => a,
        None if family == "extended" => f64::NAN,
        None => {
            errors.push(invalid("warp.domain_upper", format!("required for family \"{family}\"")));
            return None;
        }
    };
    let before = errors.len();
    let built = match family {
        "exponential" => Warp::exponential(need(errors, "warp.c", cfg.c), a),
        "reciprocal" => Warp::reciprocal(a),
        "shifted_reciprocal" => Warp::shifted_reciprocal(need(errors, "warp.c0", cfg.c0), a),
        "constant" => Warp::constant(need(errors, "warp.r0", cfg.r0), a),
        "even_bowl" => Warp::even_bowl(need(errors, "warp.r0", cfg.r0), need(errors, "warp.k", cfg.k), a),
        "extended" => {
            if nested {
                errors.push(invalid("warp.base", "an extended warp cannot extend another extended warp"));
                return None;
            }
            let base_name = match &cfg.base {
                Some(b) => b.clone(),
                None => {
                    errors.push(invalid("warp.base", "required for family \"extended\""));
                    return None;
                }
            };
            let a0 = need(errors, "warp.a0", cfg.a0);
            let base = build_warp(cfg, &base_name, errors, true)?;
            if errors.len() > before {
                return None;
            }
            base.extend_convex_at_infinity(a0)
        }
        _ => unreachable!("family checked above"),
    };
    if errors.len() > before {
        return None;
    }
    let warp = match built {
        Ok(w) => w,
        Err(e) => {
            errors.push(invalid("warp", e.to_string()));
            return None;
        }
    };
    match cfg.max_order {
        Some(m) if !nested => match warp.with_max_order(m) {
            Ok(w) => Some(w),
            Err(e) => {
                errors.push(invalid("warp.max_order", e.to_string()));
                None
            }
        },
        _ => Some(warp),
    }
}

fn build_preset(cfg: &CurveConfig, errors: &mut Vec<ConfigError>) -> Option<Preset<f64>> {
    let n = cfg.n;
    let before = errors.len();
    let preset = match cfg.preset.as_str() {
        "circle" => Preset::Circle { z0: need(errors, "curve.z0", cfg.z0), n, winding: cfg.winding.unwrap_or(1) },
        "graph_sine" => Preset::GraphSine {
            z0: need(errors, "curve.z0", cfg.z0),
            amp: need(errors, "curve.amp", cfg.amp),
            n,
        },
        "fold" => Preset::Fold {
            z0: need(errors, "curve.z0", cfg.z0),
            depth: need(errors, "curve.depth", cfg.depth),
            width: need(errors, "curve.width", cfg.width),
            n,
        },
        "contractible" => Preset::Contractible {
            z0: need(errors, "curve.z0", cfg.z0),
            rho: need(errors, "curve.rho", cfg.rho),
            n,
        },
        other => {
            errors.push(ConfigError::UnknownPreset { name: other.to_string(), suggestion: suggest(other, &PRESETS) });
            return None;
        }
    };
    if errors.len() > before {
        return None;
    }
    if let Err(e) = preset.build() {
        errors.push(invalid("curve", e.to_string()));
        return None;
    }
    Some(preset)
}

fn build_params(cfg: &SolverConfig, errors: &mut Vec<ConfigError>) -> Params {
    let d = Params::default();
    let params = Params {
        cfl: cfg.cfl.unwrap_or(d.cfl),
        remesh_every: cfg.remesh_every.unwrap_or(d.remesh_every),
        remesh_ratio_trigger: cfg.remesh_ratio_trigger.unwrap_or(d.remesh_ratio_trigger),
        t_end: cfg.t_end.unwrap_or(d.t_end),
        z_floor: cfg.z_floor.unwrap_or(d.z_floor),
        graph_margin: cfg.graph_margin.unwrap_or(d.graph_margin),
        sample_dt: cfg.sample_dt.unwrap_or(d.sample_dt),
        windows: cfg.windows.unwrap_or(d.windows),
        max_steps: cfg.max_steps.unwrap_or(d.max_steps),
    };
    if let Err(e) = params.validate() {
        errors.push(invalid("solver", e.to_string()));
    }
    params
}

fn build_check(name: &str, p: &CheckParams, errors: &mut Vec<ConfigError>) -> Option<Check> {
    let field = |k: &str| format!("checks.{name}.{k}");
    let check = match name {
        "graph_time" => Check::GraphTime,
        "graph_preserved" => Check::GraphPreserved,
        "v_monotone" => Check::VMonotone { tol: p.tol.unwrap_or(1e-3) },
        "lemma32" => {
            let c0 = p.c0.unwrap_or(0.0);
            if !(0.0..1.0).contains(&c0) {
                errors.push(invalid(&field("c0"), format!("must lie in [0, 1), got {c0}")));
                return None;
            }
            Check::Lemma32 { c0, tol: p.tol.unwrap_or(1e-8) }
        }
        "comparison" => {
            let (lo, hi) = (p.z_lower, p.z_upper);
            if lo.is_none() {
                errors.push(invalid(&field("z_lower"), "required"));
            }
            if hi.is_none() {
                errors.push(invalid(&field("z_upper"), "required"));
            }
            Check::Comparison { z_lower: lo?, z_upper: hi? }
        }
        "length_monotone" => Check::LengthMonotone,
        "length_decay" => Check::LengthDecay { tol: p.tol.unwrap_or(1e-2) },
        "theta_pde" => Check::ThetaPde { tol: p.tol.unwrap_or(1e-2) },
        "v_pde" => Check::VPde { tol: p.tol.unwrap_or(1e-2) },
        "kappa_sq_pde" => Check::KappaSqPde { tol: p.tol.unwrap_or(1e-1) },
        "circle_oracle" => Check::CircleOracle { tol: p.tol.unwrap_or(1e-3) },
        "z_max_drop" => match p.drop {
            Some(drop) => Check::ZMaxDrop { drop },
            None => {
                errors.push(invalid(&field("drop"), "required"));
                return None;
            }
        },
        "psi_decay" => Check::PsiDecay { factor: p.factor.unwrap_or(0.5) },
        "derivative_trend" => {
            let m_max = p.m_max.unwrap_or(2);
            if m_max > 2 {
                errors.push(invalid(&field("m_max"), format!("at most 2, got {m_max}")));
                return None;
            }
            Check::DerivativeTrend { m_max }
        }
        "residual_zero" => Check::ResidualZero { tol: p.tol.unwrap_or(1e-10) },
        other => {
            errors.push(ConfigError::UnknownCheck { name: other.to_string(), suggestion: suggest(other, &CHECKS) });
            return None;
        }
    };
    Some(check)
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigErrors> {
        if text.trim().is_empty() {
            return Err(ConfigErrors(vec![ConfigError::Parse("empty config".into())]));
        }
        toml::from_str(text).map_err(|e| ConfigErrors(vec![ConfigError::Parse(e.message().to_string())]))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Checks every reference and parameter, reporting all problems at once.
    pub fn validate(&self) -> Result<Scenario, ConfigErrors> {
        let mut errors = Vec::new();
        let warp = build_warp(&self.warp, &self.warp.family, &mut errors, false);
        let preset = build_preset(&self.curve, &mut errors);
        let params = build_params(&self.solver, &mut errors);
        let oversample = self.curve.oversample.unwrap_or(1);
        if oversample == 0 {
            errors.push(invalid("curve.oversample", "must be at least 1"));
        }
        let checks: Vec<Check> =
            self.checks.iter().filter_map(|(name, p)| build_check(name, p, &mut errors)).collect();
        if let Some(s) = &self.sweep {
            if let Err(e) = resolve_axis(&s.axis) {
                errors.push(e);
            }
        }
        match (warp, preset) {
            (Some(warp), Some(preset)) if errors.is_empty() => {
                Ok(Scenario { config: self.clone(), warp, preset, oversample, params, checks })
            }
            _ => Err(ConfigErrors(errors)),
        }
    }

    /// Copy with the numeric field at dotted path `axis` set to `value`.
    pub fn with_axis(&self, axis: &str, value: f64) -> Result<Self, ConfigErrors> {
        let mut doc = toml::Value::try_from(self).expect("config serializes");
        let integral = resolve_axis(axis).map_err(|e| ConfigErrors(vec![e]))?;
        let (section, key) = axis.split_once('.').expect("axis checked");
        let table = doc
            .as_table_mut()
            .and_then(|t| t.get_mut(section))
            .and_then(|s| s.as_table_mut())
            .expect("axis checked");
        let new = if integral {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(ConfigErrors(vec![invalid(axis, format!("needs a non-negative integer, got {value}"))]));
            }
            toml::Value::Integer(value as i64)
        } else {
            toml::Value::Float(value)
        };
        table.insert(key.to_string(), new);
        doc.try_into().map_err(|e: toml::de::Error| ConfigErrors(vec![ConfigError::Parse(e.message().to_string())]))
    }
}

const INTEGER_AXES: [&str; 7] = [
    "curve.n",
    "curve.winding",
    "curve.oversample",
    "solver.remesh_every",
    "solver.max_steps",
    "warp.max_order",
    "output.snapshot_every",
];

/// Whether `axis` names a numeric field, and if so whether it is integral.
fn resolve_axis(axis: &str) -> Result<bool, ConfigError> {
    const FLOAT_AXES: [&str; 17] = [
        "warp.domain_upper",
        "warp.c",
        "warp.c0",
        "warp.r0",
        "warp.k",
        "warp.a0",
        "curve.z0",
        "curve.amp",
        "curve.depth",
        "curve.width",
        "curve.rho",
        "solver.cfl",
        "solver.remesh_ratio_trigger",
        "solver.t_end",
        "solver.z_floor",
        "solver.graph_margin",
        "solver.sample_dt",
    ];
    if FLOAT_AXES.contains(&axis) {
        Ok(false)
    } else if INTEGER_AXES.contains(&axis) {
        Ok(true)
    } else {
        let known: Vec<&str> = FLOAT_AXES.iter().chain(&INTEGER_AXES).copied().collect();
        Err(ConfigError::Invalid {
            field: "sweep.axis".into(),
            message: format!("\"{axis}\" is not a numeric field{}", hint(&suggest(axis, &known))),
        })
    }
}

/// Reads, parses and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<Scenario, ConfigErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![ConfigError::Io(format!("{}: {e}", path.display()))]))?;
    ScenarioConfig::from_toml(&text)?.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOLD: &str = r#"
[warp]
family = "shifted_reciprocal"
c0 = 0.2
domain_upper = -1.0

[curve]
preset = "fold"
z0 = -5.0
depth = 1.0
width = 0.5
n = 128

[solver]
t_end = 1.0

[checks.graph_time]
[checks.lemma32]
c0 = 0.0
"#;

    #[test]
    fn parses_and_validates() {
        let s = ScenarioConfig::from_toml(FOLD).unwrap().validate().unwrap();
        assert_eq!(s.warp.family_key(), "shifted_reciprocal");
        assert_eq!(s.checks.len(), 2);
        assert_eq!(s.params.t_end, 1.0);
        assert_eq!(s.params.cfl, 0.25);
    }

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::from_toml(FOLD).unwrap();
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn misspelled_family_suggests() {
        let text = FOLD.replace("shifted_reciprocal", "reciproal");
        let errs = ScenarioConfig::from_toml(&text).unwrap().validate().unwrap_err();
        assert_eq!(
            errs.0[0],
            ConfigError::UnknownFamily { name: "reciproal".into(), suggestion: Some("reciprocal".into()) }
        );
    }

    #[test]
    fn collects_every_error() {
        let text = FOLD
            .replace("shifted_reciprocal", "expnential")
            .replace("\"fold\"", "\"flod\"")
            .replace("[checks.lemma32]", "[checks.lema32]")
            .replace("t_end = 1.0", "t_end = -1.0");
        let errs = ScenarioConfig::from_toml(&text).unwrap().validate().unwrap_err();
        assert!(errs.0.iter().any(|e| matches!(e, ConfigError::UnknownFamily { .. })));
        assert!(errs.0.iter().any(|e| matches!(e, ConfigError::UnknownPreset { suggestion: Some(s), .. } if s == "fold")));
        assert!(errs.0.iter().any(|e| matches!(e, ConfigError::UnknownCheck { suggestion: Some(s), .. } if s == "lemma32")));
        assert!(errs.0.iter().any(|e| matches!(e, ConfigError::Invalid { field, .. } if field == "solver")));
    }

    #[test]
    fn empty_and_malformed_are_parse_errors() {
        assert!(matches!(ScenarioConfig::from_toml("").unwrap_err().0[0], ConfigError::Parse(_)));
        assert!(matches!(ScenarioConfig::from_toml("[warp\n").unwrap_err().0[0], ConfigError::Parse(_)));
        assert!(matches!(ScenarioConfig::from_toml("[warp]\nfamily = \"constant\"\n").unwrap_err().0[0], ConfigError::Parse(_)));
    }

    #[test]
    fn missing_family_parameters() {
        let text = FOLD.replace("c0 = 0.2\n", "");
        let errs = ScenarioConfig::from_toml(&text).unwrap().validate().unwrap_err();
        assert_eq!(errs.0, vec![invalid("warp.c0", "required")]);
    }

    #[test]
    fn extended_warp() {
        let text = FOLD.replace("family = \"shifted_reciprocal\"", "family = \"extended\"\nbase = \"shifted_reciprocal\"\na0 = -6.0");
        let s = ScenarioConfig::from_toml(&text).unwrap().validate().unwrap();
        assert_eq!(s.warp.family_key(), "extended");
        assert_eq!(s.warp.domain_upper(), -1.0);
    }

    #[test]
    fn axis_override() {
        let cfg = ScenarioConfig::from_toml(FOLD).unwrap();
        let depth = cfg.with_axis("curve.depth", 2.0).unwrap();
        assert_eq!(depth.curve.depth, Some(2.0));
        let n = cfg.with_axis("curve.n", 256.0).unwrap();
        assert_eq!(n.curve.n, 256);
        assert!(cfg.with_axis("curve.n", 2.5).is_err());
        assert!(cfg.with_axis("curve.dept", 1.0).is_err());
        let amp = cfg.with_axis("curve.amp", 0.1).unwrap();
        assert_eq!(amp.curve.amp, Some(0.1));
    }
}
