//! Run configuration: TOML file, then command-line flags, then zoo defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pi1_core::certify::CertificationCase;
use pi1_core::quadrature::QuadratureSpec;
use pi1_core::zoo::cases::{case_ids, is_known};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

/// Quadrature and tolerance overrides; unset fields fall through.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_membership: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_invariance: Option<f64>,
}

impl Overrides {
    /// `self` wins wherever it is set.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            nodes: self.nodes.or(base.nodes),
            samples: self.samples.or(base.samples),
            seed: self.seed.or(base.seed),
            tol_membership: self.tol_membership.or(base.tol_membership),
            tol_invariance: self.tol_invariance.or(base.tol_invariance),
        }
    }

    /// Grid cases take `nodes`; MC cases take `samples` and `seed`.
    pub fn apply(&self, case: &mut CertificationCase) {
        let q = &mut case.quadrature;
        if q.is_grid() {
            if let Some(n) = self.nodes {
                q.nodes = n;
            }
        } else {
            if let Some(s) = self.samples {
                q.samples = s;
            }
            if let Some(seed) = self.seed {
                q.seed = Some(seed);
            }
        }
        if let Some(t) = self.tol_membership {
            case.tolerances.membership = t;
        }
        if let Some(t) = self.tol_invariance {
            case.tolerances.invariance = t;
        }
    }

    fn validate(&self, scope: &str) -> Result<(), ConfigError> {
        for (name, v) in [
            ("tol_membership", self.tol_membership),
            ("tol_invariance", self.tol_invariance),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError(format!(
                        "{scope}: {name} must be positive, got {v}"
                    )));
                }
            }
        }
        if matches!(self.nodes, Some(n) if n < 2) {
            return Err(ConfigError(format!("{scope}: nodes must be at least 2")));
        }
        if matches!(self.samples, Some(n) if n < 2) {
            return Err(ConfigError(format!("{scope}: samples must be at least 2")));
        }
        Ok(())
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub cases: Option<Vec<String>>,
    #[serde(default)]
    pub format: Option<Format>,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol_membership: Option<f64>,
    pub tol_invariance: Option<f64>,
    /// Per-case sections, `[case.<id>]`.
    #[serde(default)]
    pub case: BTreeMap<String, Overrides>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| LoadError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn global(&self) -> Overrides {
        Overrides {
            nodes: self.nodes,
            samples: self.samples,
            seed: self.seed,
            tol_membership: self.tol_membership,
            tol_invariance: self.tol_invariance,
        }
    }
}

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Parse(String),
}

/// Fully resolved run; embedded verbatim in every report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub cases: Vec<String>,
    pub format: Format,
    #[serde(flatten)]
    pub global: Overrides,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub case: BTreeMap<String, Overrides>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Expands `all`, rejects unknown ids and duplicates, keeps request order.
pub fn resolve_cases(requested: &[String]) -> Result<Vec<String>, ConfigError> {
    if requested.is_empty() {
        return Err(ConfigError(
            "no cases requested; pass --case <id>|all".into(),
        ));
    }
    let mut out: Vec<String> = Vec::new();
    for entry in requested {
        for id in entry.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let expanded = if id == "all" {
                case_ids()
            } else {
                vec![id.to_string()]
            };
            for id in expanded {
                if !is_known(&id) {
                    return Err(ConfigError(format!("unknown case '{id}' (see `list`)")));
                }
                if !out.contains(&id) {
                    out.push(id);
                }
            }
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Flags override the file; the file overrides zoo defaults.
    pub fn resolve(
        file: FileConfig,
        flag_cases: &[String],
        flags: Overrides,
        format: Option<Format>,
    ) -> Result<Self, ConfigError> {
        let requested = if flag_cases.is_empty() {
            file.cases.clone().unwrap_or_default()
        } else {
            flag_cases.to_vec()
        };
        let cases = resolve_cases(&requested)?;
        for id in file.case.keys() {
            if !is_known(id) {
                return Err(ConfigError(format!(
                    "config section for unknown case '{id}'"
                )));
            }
        }
        let global = flags.over(file.global());
        global.validate("global")?;
        for (id, o) in &file.case {
            o.validate(id)?;
        }
        Ok(RunConfig {
            cases,
            format: format.or(file.format).unwrap_or_default(),
            global,
            case: file.case,
        })
    }

    /// Case section, then global values. Flags were already folded into `global`,
    /// and must still beat case sections, so they are reapplied on top.
    pub fn overrides_for(&self, id: &str, flags: &Overrides) -> Overrides {
        let section = self.case.get(id).copied().unwrap_or_default();
        flags.over(section.over(self.global))
    }
}

/// Quadrature and tolerances a case actually ran with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseConfig {
    pub quadrature: QuadratureSpec,
    pub tolerances: pi1_core::certify::Tolerances,
}

impl CaseConfig {
    pub fn of(case: &CertificationCase) -> Self {
        Self {
            quadrature: case.quadrature,
            tolerances: case.tolerances,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_expands_and_deduplicates() {
        let ids = resolve_cases(&["t3,all".into(), "t2".into()]).unwrap();
        assert_eq!(ids[0], "t3");
        assert_eq!(ids.len(), case_ids().len());
    }

    #[test]
    fn unknown_case_is_rejected() {
        assert!(resolve_cases(&["t9".into()]).is_err());
    }

    #[test]
    fn flags_beat_case_sections_beat_globals() {
        let file: FileConfig = toml::from_str(
            "cases = [\"t3\"]\nnodes = 16\nseed = 7\n[case.t3]\nnodes = 32\n[case.t2]\nnodes = 8\n",
        )
        .unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(file, &[], flags, None).unwrap();
        let t3 = cfg.overrides_for("t3", &flags);
        assert_eq!(t3.nodes, Some(32));
        assert_eq!(t3.seed, Some(9));
        let nodes_flag = Overrides {
            nodes: Some(4),
            ..Default::default()
        };
        assert_eq!(cfg.overrides_for("t2", &nodes_flag).nodes, Some(4));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("node = 3\n").is_err());
    }
}
