use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize};

use super::suite::CheckKind;
use crate::error::{Error, Result};
use crate::models::{ModelId, ModelParams, SamplerSettings};
use crate::phase::{PhasePoint, SpinBlock};
use crate::verify::{DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_NU};

/// Environment variable capping the Lax matrix size.
pub const MAX_N_ENV: &str = "LAXKIT_MAX_N";
pub const DEFAULT_MAX_N: usize = 8;

/// Everything a run needs. Every field has a default, so a config file may
/// name only what it changes; command-line flags override the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// One model id or a list.
    #[serde(deserialize_with = "one_or_many")]
    pub model: Vec<ModelId>,
    /// Particle numbers (`n` for SU(n,n)); one value or a list.
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Check names; empty selects the default suite of each model.
    pub checks: Vec<String>,
    pub params: ModelParams,
    pub spectral: SpectralArgs,
    /// Tolerance applied to every check.
    pub tol: Option<f64>,
    /// Per-check tolerances; these win over `tol`.
    pub tols: BTreeMap<String, f64>,
    /// Involution orders run over `1..=max_order`.
    pub max_order: u32,
    pub sampler: SamplerSettings,
    pub evolve: EvolveSettings,
    pub report: Option<PathBuf>,
    pub deterministic_report: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: Vec::new(),
            n: vec![2],
            seeds: vec![0],
            checks: Vec::new(),
            params: ModelParams::default(),
            spectral: SpectralArgs::default(),
            tol: None,
            tols: BTreeMap::new(),
            max_order: 4,
            sampler: SamplerSettings::default(),
            evolve: EvolveSettings::default(),
            report: None,
            deterministic_report: false,
        }
    }
}

/// Spectral arguments as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralArgs {
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    pub nu: [f64; 2],
}

impl Default for SpectralArgs {
    fn default() -> Self {
        let pair = |z: C64| [z.re, z.im];
        SpectralArgs {
            lambda: pair(DEFAULT_LAMBDA),
            mu: pair(DEFAULT_MU),
            nu: pair(DEFAULT_NU),
        }
    }
}

impl SpectralArgs {
    pub fn lambda(&self) -> C64 {
        C64::new(self.lambda[0], self.lambda[1])
    }

    pub fn mu(&self) -> C64 {
        C64::new(self.mu[0], self.mu[1])
    }

    pub fn nu(&self) -> C64 {
        C64::new(self.nu[0], self.nu[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSettings {
    pub t_end: f64,
    /// Integrator tolerance.
    pub tol: f64,
    pub sample_dt: f64,
    /// Run back to `t = 0` after reaching `t_end`.
    pub reverse: bool,
    /// Explicit initial point; sampled from the first seed when absent.
    pub initial: Option<InitialPoint>,
    /// Trajectory table path; standard output when absent.
    pub trajectory: Option<PathBuf>,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        EvolveSettings {
            t_end: 10.0,
            tol: 1e-10,
            sample_dt: 0.5,
            reverse: false,
            initial: None,
            trajectory: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Spin vectors, row-major `n × r`.
    #[serde(default)]
    pub xi: Option<Vec<f64>>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
}

impl InitialPoint {
    pub fn point(&self, rank: usize) -> Result<PhasePoint> {
        let n = self.q.len();
        let mut x = PhasePoint::new(self.q.clone(), self.p.clone())?;
        match (&self.xi, &self.eta) {
            (Some(xi), Some(eta)) => x.set_spin(Some(SpinBlock::new(n, rank, xi.clone(), eta.clone())?)),
            (None, None) => {}
            _ => return Err(Error::Config("initial point needs both xi and eta or neither".into())),
        }
        Ok(x)
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: serde::de::DeserializeOwned,
{
    use serde::de::Error as _;
    let v = serde_json::Value::deserialize(d)?;
    if v.is_array() {
        serde_json::from_value(v).map_err(D::Error::custom)
    } else {
        serde_json::from_value(v).map(|one| vec![one]).map_err(D::Error::custom)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(config_message(&e.to_string())))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Tolerance for a check: per-check override, then the global override,
    /// then the check's default.
    pub fn tol_for(&self, kind: CheckKind) -> f64 {
        self.tols
            .get(kind.name())
            .copied()
            .or(self.tol)
            .unwrap_or_else(|| kind.default_tol())
    }

    /// Check names parsed against the catalog.
    pub fn check_kinds(&self) -> Result<Vec<CheckKind>> {
        self.checks.iter().map(|c| c.parse()).collect()
    }

    /// Validation shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.model.is_empty() {
            return Err(Error::Config(format!(
                "no model given; valid models: {}",
                ModelId::catalog()
            )));
        }
        if self.n.is_empty() {
            return Err(Error::Config("no particle number given".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        let cap = size_cap()?;
        for &m in &self.model {
            for &n in &self.n {
                if n == 0 {
                    return Err(Error::Config("particle number must be at least 1".into()));
                }
                let size = if m == ModelId::CmSunn { 2 * n } else { n };
                if size > cap {
                    return Err(Error::Config(format!(
                        "{m} with n = {n} has Lax size {size}, above the cap {cap} (set {MAX_N_ENV} to raise it)"
                    )));
                }
            }
        }
        for (name, tol) in self.tol.iter().map(|t| ("tol", t)).chain(self.tols.iter().map(|(k, v)| (k.as_str(), v))) {
            if !(*tol > 0.0) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {tol}")));
            }
        }
        for name in self.tols.keys() {
            name.parse::<CheckKind>()?;
        }
        if self.max_order == 0 {
            return Err(Error::Config("max_order must be at least 1".into()));
        }
        self.check_kinds()?;
        self.sampler.validate()?;
        let e = &self.evolve;
        if !(e.t_end.is_finite() && e.t_end > 0.0 && e.tol > 0.0 && e.sample_dt > 0.0) {
            return Err(Error::Config("evolve needs t_end > 0, tol > 0 and sample_dt > 0".into()));
        }
        Ok(())
    }
}

/// Largest Lax matrix size allowed; SU(n,n) therefore caps `n` at half of it.
pub fn size_cap() -> Result<usize> {
    match std::env::var(MAX_N_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| Error::Config(format!("{MAX_N_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(DEFAULT_MAX_N),
    }
}

fn config_message(serde_msg: &str) -> String {
    if serde_msg.contains("unknown variant") {
        format!("invalid config: {serde_msg}")
    } else {
        format!("invalid config: {serde_msg}; valid models: {}", ModelId::catalog())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_single_or_list() {
        let a = RunConfig::from_json(r#"{"model": "cm-rational", "n": 3}"#).unwrap();
        let b = RunConfig::from_json(r#"{"model": ["cm-rational"], "n": [3]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model, vec![ModelId::CmRational]);
    }

    #[test]
    fn unknown_model_lists_catalog() {
        let e = RunConfig::from_json(r#"{"model": "cm-bogus"}"#).unwrap_err().to_string();
        assert!(e.contains("cm-bogus") && e.contains("cm-rational"), "{e}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(RunConfig::from_json(r#"{"modle": "cm-rational"}"#).is_err());
    }

    #[test]
    fn empty_seeds_rejected() {
        let c = RunConfig::from_json(r#"{"model": "cm-rational", "seeds": []}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::from_json(r#"{"model": ["cm-sunn", "rs-elliptic"], "n": [1, 2], "tol": 1e-6}"#).unwrap();
        c.params.coupling = Some([0.5, -0.25]);
        c.tols.insert("yb2".into(), 1e-8);
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }
}
