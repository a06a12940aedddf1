//! Experiment configuration: presets, defaults, overrides and validation.

use std::fmt;
use std::path::PathBuf;

use membrane_voter::{InitialProfile, Regime};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    HydroSub,
    HydroRobin,
    HydroNeumann,
    Invariance,
    QvLimit,
    MartingaleExact,
    GammaEstimate,
    VarianceScaling,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::HydroSub,
        Preset::HydroRobin,
        Preset::HydroNeumann,
        Preset::Invariance,
        Preset::QvLimit,
        Preset::MartingaleExact,
        Preset::GammaEstimate,
        Preset::VarianceScaling,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::HydroSub => "hydro-sub",
            Preset::HydroRobin => "hydro-robin",
            Preset::HydroNeumann => "hydro-neumann",
            Preset::Invariance => "invariance",
            Preset::QvLimit => "qv-limit",
            Preset::MartingaleExact => "martingale-exact",
            Preset::GammaEstimate => "gamma-estimate",
            Preset::VarianceScaling => "variance-scaling",
        }
    }

    pub fn parse(s: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    pub alpha: f64,
    pub beta: f64,
}

/// Everything needed to reproduce a run. `threads` and `output_dir` do not
/// affect results and are left out of the run id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub rates: Rates,
    /// Macroscopic half-width of the observation window.
    #[serde(rename = "L")]
    pub l: u64,
    pub t: f64,
    pub profile: InitialProfile,
    pub replicas: u64,
    pub seed: u64,
    /// Pass threshold; its unit depends on the preset.
    pub tolerance: f64,
    /// Step horizon of hitting-probability walks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Fields(Vec<FieldError>),
    #[error("cannot read configuration: {0}")]
    Io(#[from] std::io::Error),
}

fn field_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Fields(vec![FieldError { field: field.into(), message: message.into() }])
}

impl ExperimentConfig {
    pub fn defaults(preset: Preset) -> Self {
        let ramp = InitialProfile::Ramp { intercept: 0.5, slope: 0.4 };
        let half = InitialProfile::Constant { value: 0.5 };
        let base = |d, n, beta, t, profile, replicas, tolerance| ExperimentConfig {
            preset,
            d,
            n,
            rates: Rates { alpha: 1.0, beta },
            l: 1,
            t,
            profile,
            replicas,
            seed: 1,
            tolerance,
            horizon: None,
            threads: None,
            output_dir: None,
        };
        match preset {
            Preset::HydroSub => base(1, 500, 0.5, 0.1, ramp, 20_000, 0.02),
            Preset::HydroRobin => base(1, 500, 1.0, 0.1, ramp, 20_000, 0.02),
            Preset::HydroNeumann => base(1, 500, 2.0, 0.1, ramp, 20_000, 0.02),
            Preset::Invariance => base(1, 200, 1.0, 0.5, ramp, 100_000, 0.05),
            Preset::QvLimit => ExperimentConfig { horizon: Some(1_000_000), ..base(4, 50, 1.0, 0.1, half, 20_000, 0.1) },
            Preset::MartingaleExact => ExperimentConfig {
                rates: Rates { alpha: 0.5, beta: 1.0 },
                l: 3,
                ..base(1, 1, 1.0, 0.5, InitialProfile::Step { plus: 0.8, minus: 0.3 }, 100_000, 3.0)
            },
            Preset::GammaEstimate => {
                ExperimentConfig { horizon: Some(1_000_000), ..base(3, 1, 1.0, 0.0, half, 100_000, 0.01) }
            }
            Preset::VarianceScaling => {
                ExperimentConfig { horizon: Some(1_000_000), ..base(4, 32, 1.0, 1.0, half, 4000, 0.3) }
            }
        }
    }

    /// Builds a configuration from an optional JSON document and `path=value`
    /// overrides (later ones win). Missing fields take the preset defaults.
    pub fn build(file: Option<&Value>, preset: Option<Preset>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut doc = file.cloned().unwrap_or_else(|| Value::Object(Default::default()));
        if !doc.is_object() {
            return Err(field_error("<root>", "configuration must be a JSON object"));
        }
        if let Some(p) = preset {
            doc["preset"] = Value::String(p.name().into());
        }
        for (path, raw) in overrides {
            if path == "preset" {
                doc["preset"] = Value::String(raw.clone());
            }
        }
        let preset = match doc.get("preset") {
            Some(Value::String(s)) => Preset::parse(s).ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                field_error("preset", format!("unknown preset `{s}`; expected one of {}", names.join(", ")))
            })?,
            _ => return Err(field_error("preset", "missing preset")),
        };
        let mut merged = serde_json::to_value(Self::defaults(preset)).expect("defaults serialize");
        merge(&mut merged, &doc);
        for (path, raw) in overrides {
            set_path(&mut merged, path, parse_value(raw))?;
        }
        let text = merged.to_string();
        let de = &mut serde_json::Deserializer::from_str(&text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            field_error(if field == "." { "<root>" } else { &field }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut bad = |field: &str, msg: &str| errs.push(FieldError { field: field.into(), message: msg.into() });
        if self.replicas == 0 {
            bad("replicas", "must be at least 1");
        }
        if self.n == 0 {
            bad("N", "must be at least 1");
        }
        if !(self.rates.alpha.is_finite() && self.rates.alpha > 0.0) {
            bad("rates.alpha", "must be positive and finite");
        }
        if !(self.rates.beta.is_finite() && self.rates.beta >= 0.0) {
            bad("rates.beta", "must be nonnegative and finite");
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            bad("t", "must be finite and nonnegative");
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            bad("tolerance", "must be positive");
        }
        if self.l == 0 {
            bad("L", "must be at least 1");
        }
        if self.threads == Some(0) {
            bad("threads", "must be at least 1");
        }
        if let Err(e) = self.profile.validate() {
            bad("profile", &e.to_string());
        }
        match self.preset {
            Preset::HydroSub | Preset::HydroRobin | Preset::HydroNeumann | Preset::Invariance | Preset::MartingaleExact => {
                if self.d != 1 {
                    bad("d", "this preset uses the one-dimensional reduction; set d = 1");
                }
                if self.t == 0.0 {
                    bad("t", "must be positive");
                }
            }
            Preset::QvLimit | Preset::VarianceScaling => {
                if self.d < 2 {
                    bad("d", "needs d >= 2");
                }
            }
            Preset::GammaEstimate => {
                if self.d == 0 {
                    bad("d", "must be at least 1");
                }
            }
        }
        let regime = Regime::from_beta(self.rates.beta);
        let wanted = match self.preset {
            Preset::HydroSub => Some((Regime::Sub, "beta < 1")),
            Preset::HydroRobin => Some((Regime::Critical, "beta = 1")),
            Preset::HydroNeumann => Some((Regime::Super, "beta > 1")),
            _ => None,
        };
        if let Some((r, text)) = wanted {
            if self.rates.beta.is_finite() && regime != r {
                bad("rates.beta", &format!("{} needs {text}", self.preset));
            }
        }
        if self.preset == Preset::QvLimit && !matches!(self.profile, InitialProfile::Constant { .. }) {
            bad("profile", "qv-limit needs a constant profile");
        }
        if self.preset == Preset::MartingaleExact && 2 * self.l * self.n > 16 {
            bad("L", "martingale-exact runs on 2 L N <= 16 sites");
        }
        if self.preset == Preset::VarianceScaling && self.n < 4 {
            bad("N", "variance-scaling uses N/4, N/2 and N; needs N >= 4");
        }
        if matches!(self.preset, Preset::QvLimit | Preset::GammaEstimate | Preset::VarianceScaling) && self.horizon.unwrap_or(0) == 0 {
            bad("horizon", "must be at least 1");
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Fields(errs))
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON of the
    /// result-relevant fields.
    pub fn run_id(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.remove("threads");
            m.remove("output_dir");
        }
        let digest = Sha256::digest(canonical(&v).as_bytes());
        hex::encode(&digest[..8])
    }
}

/// JSON with object keys sorted at every level.
fn canonical(v: &Value) -> String {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let body: Vec<String> =
                keys.iter().map(|k| format!("{}:{}", Value::String((*k).clone()), canonical(&m[*k]))).collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(a) => format!("[{}]", a.iter().map(canonical).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                // A new profile replaces the default wholesale: its variant fields differ.
                if k != "profile" && b.get(k).is_some_and(Value::is_object) && v.is_object() {
                    merge(b.get_mut(k).expect("checked"), v);
                } else {
                    b.insert(k.clone(), v.clone());
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.into()))
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), ConfigError> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| field_error(path, "parent is not an object"))?;
        if i + 1 == parts.len() {
            obj.insert((*part).into(), value);
            return Ok(());
        }
        cur = obj.entry(*part).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(field_error(path, "empty field path"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for p in Preset::ALL {
            ExperimentConfig::defaults(p).validate().unwrap();
            assert_eq!(Preset::parse(p.name()), Some(p));
        }
    }

    #[test]
    fn overrides_follow_schema_paths() {
        let o = vec![("rates.alpha".to_string(), "2.5".to_string()), ("seed".to_string(), "9".to_string())];
        let c = ExperimentConfig::build(None, Some(Preset::HydroRobin), &o).unwrap();
        assert_eq!(c.rates.alpha, 2.5);
        assert_eq!(c.rates.beta, 1.0);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn errors_name_the_field() {
        let o = vec![("rates.alpha".to_string(), "\"fast\"".to_string())];
        let Err(ConfigError::Fields(e)) = ExperimentConfig::build(None, Some(Preset::HydroRobin), &o) else {
            panic!("expected field error")
        };
        assert_eq!(e[0].field, "rates.alpha");
        let o = vec![("replicas".to_string(), "0".to_string()), ("t".to_string(), "-1".to_string())];
        let Err(ConfigError::Fields(e)) = ExperimentConfig::build(None, Some(Preset::HydroRobin), &o) else {
            panic!("expected field error")
        };
        let fields: Vec<&str> = e.iter().map(|f| f.field.as_str()).collect();
        assert!(fields.contains(&"replicas") && fields.contains(&"t"));
    }

    #[test]
    fn run_id_ignores_placement_but_not_semantics() {
        let a = ExperimentConfig::defaults(Preset::Invariance);
        let b = ExperimentConfig { threads: Some(3), output_dir: Some("elsewhere".into()), ..a.clone() };
        assert_eq!(a.run_id(), b.run_id());
        let c = ExperimentConfig { seed: 2, ..a.clone() };
        assert_ne!(a.run_id(), c.run_id());
        let round: ExperimentConfig = serde_json::from_str(&serde_json::to_string_pretty(&a).unwrap()).unwrap();
        assert_eq!(round.run_id(), a.run_id());
    }
}
