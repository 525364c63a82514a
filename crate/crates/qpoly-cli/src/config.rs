use std::collections::BTreeMap;
use std::path::Path;

use qpoly::acceptance::{FamilySpec, QSpec};
use qpoly::families::{FamilyId, FamilyInstance, QMode};
use qpoly::{c64, Family64, Scalar, C64};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Cplx {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<Cplx> for C64 {
    fn from(z: Cplx) -> C64 {
        c64(z.re, z.im)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RootCfg {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum QCfg {
    Value(Cplx),
    Root {
        root_of_unity: RootCfg,
    },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    #[default]
    F64,
    Exact,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    Ttrr,
    Hyper,
}

/// One job file.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, Cplx>,
    pub q: QCfg,
    pub n_max: usize,
    pub tol: f64,
    /// Acceptance criterion driven by this file (`report`).
    #[serde(default)]
    pub criterion: Option<u8>,
    /// Degrees for `eval`; `0..=n_max` when absent.
    #[serde(default)]
    pub degrees: Option<Vec<usize>>,
    /// Points for `eval`.
    #[serde(default)]
    pub points: Option<Vec<Cplx>>,
    /// Evaluation paths for `eval`.
    #[serde(default)]
    pub paths: Option<Vec<EvalPath>>,
    /// Arithmetic for `eval`.
    #[serde(default)]
    pub scalar: ScalarKind,
    /// Functional id for `gram`.
    #[serde(default)]
    pub functional: Option<String>,
    /// Circle nodes for `gram`.
    #[serde(default)]
    pub nodes: Option<usize>,
    /// Identity suite: `all`, `family`, or an identity name.
    #[serde(default)]
    pub suite: Option<String>,
    /// Factorization index for `factorize`; the first vanishing `γ` when absent.
    #[serde(default)]
    pub big_n: Option<usize>,
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.inner()))
        })?;
        if !cfg.tol.is_finite() || cfg.tol <= 0.0 {
            return Err(CliError::Config("at `tol`: must be a positive number".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn family_id(&self) -> Result<FamilyId, CliError> {
        Ok(FamilyId::from_tag(&self.family)?)
    }

    /// Parameters in the family's positional order.
    pub fn positional_params(&self) -> Result<Vec<C64>, CliError> {
        let id = self.family_id()?;
        let names = id.param_names();
        if let Some(bad) = self.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(qpoly::Error::UnknownParam(bad.clone()).into());
        }
        names
            .iter()
            .map(|n| {
                self.params.get(*n).map(|&z| C64::from(z)).ok_or_else(|| qpoly::Error::MissingParam(n.to_string()).into())
            })
            .collect()
    }

    pub fn spec(&self) -> Result<FamilySpec, CliError> {
        let q = match self.q {
            QCfg::Value(z) => QSpec::Value(z.into()),
            QCfg::Root { root_of_unity: r } => QSpec::RootOfUnity { m: r.m, n: r.n },
        };
        Ok(FamilySpec { family: self.family_id()?, params: self.positional_params()?, q })
    }

    pub fn build(&self) -> Result<Family64, CliError> {
        self.build_as()
    }

    pub fn build_as<S: Scalar>(&self) -> Result<FamilyInstance<S>, CliError> {
        let id = self.family_id()?;
        let named: Vec<(&str, S)> = self.params.iter().map(|(k, v)| (k.as_str(), S::from_parts(v.re, v.im))).collect();
        let fam = match self.q {
            QCfg::Value(z) => FamilyInstance::make_family(id, &named, S::from_parts(z.re, z.im), QMode::Generic)?,
            QCfg::Root { root_of_unity: r } => {
                let t = 2.0 * std::f64::consts::PI * r.m as f64 / r.n.max(1) as f64;
                let q = S::from_parts(t.cos(), t.sin());
                FamilyInstance::make_family(id, &named, q, QMode::RootOfUnity { m: r.m, n: r.n })?
            }
        };
        Ok(fam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AW: &str = r#"{
        "family": "AW",
        "params": {"a": {"re": 0.3, "im": 0}, "b": {"re": -0.2, "im": 0}, "c": {"re": 0.4, "im": 0}, "d": {"re": 0.25, "im": 0}},
        "q": {"re": 0.55, "im": 0},
        "n_max": 5,
        "tol": 1e-9
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = JobConfig::parse(AW).unwrap();
        assert_eq!(cfg.positional_params().unwrap()[3], c64(0.25, 0.0));
        assert_eq!(cfg.build().unwrap().id(), FamilyId::AskeyWilson);
    }

    #[test]
    fn root_of_unity_q() {
        let text = AW.replace(r#""q": {"re": 0.55, "im": 0}"#, r#""q": {"root_of_unity": {"M": 1, "N": 5}}"#);
        let cfg = JobConfig::parse(&text).unwrap();
        assert_eq!(cfg.q, QCfg::Root { root_of_unity: RootCfg { m: 1, n: 5 } });
        assert_eq!(cfg.build().unwrap().q_mode(), QMode::RootOfUnity { m: 1, n: 5 });
    }

    #[test]
    fn unknown_key_reports_its_path() {
        let text = AW.replace(r#""tol": 1e-9"#, r#""tol": 1e-9, "nmax": 3"#);
        let err = JobConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("nmax"), "{err}");
        let text = AW.replace(r#"{"re": 0.3, "im": 0}"#, r#"{"re": 0.3, "imag": 0}"#);
        let err = JobConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("params.a"), "{err}");
    }

    #[test]
    fn schema_errors_are_config_errors() {
        let cfg = JobConfig::parse(&AW.replace(r#""a": "#, r#""e": "#)).unwrap();
        assert!(matches!(cfg.build(), Err(CliError::Math(qpoly::Error::UnknownParam(_)))));
        assert_eq!(cfg.build().unwrap_err().exit_code(), 2);
        let cfg = JobConfig::parse(&AW.replace(r#""AW""#, r#""XY""#)).unwrap();
        assert_eq!(cfg.build().unwrap_err().exit_code(), 2);
    }
}
