//! Experiment configuration: a flat TOML file, optionally starting from a
//! bundled preset.

use std::fmt;
use std::path::Path;

use qpir::codes::{example_rs_4_2, lrc_field, lrc_generator, parity_check_3_2, LinearCode};
use qpir::field::Field;
use qpir::lrc_protocol::{plan_lrc_retrieval, LrcRetrievalPlan};
use qpir::presets::{preset, PresetScheme};
use qpir::protocol::{DssConfig, OddMode};
use qpir::quantum::BackendKind;
use serde::Deserialize;

use crate::CliError;

/// Keys of the configuration file. Indices (`file_index`, `colluders`) are
/// 1-based.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub scheme: Option<String>,
    pub code: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub r: Option<usize>,
    pub rho: Option<usize>,
    #[serde(rename = "L")]
    pub degree: Option<u8>,
    pub m: Option<usize>,
    pub beta: Option<usize>,
    pub file_index: Option<usize>,
    pub seed: Option<u64>,
    pub backend: Option<String>,
    pub odd_n_mode: Option<String>,
    pub audits: Option<Vec<String>>,
    pub colluders: Option<Vec<usize>>,
    pub server_trials: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::parse(&text).map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_preset(name: &str) -> ExperimentConfig {
        ExperimentConfig { preset: Some(name.to_string()), ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    Exact,
    Symbolic,
    Both,
}

impl BackendChoice {
    pub fn parse(s: &str) -> Result<BackendChoice, CliError> {
        match s {
            "exact" => Ok(BackendChoice::Exact),
            "symbolic" => Ok(BackendChoice::Symbolic),
            "both" => Ok(BackendChoice::Both),
            other => Err(CliError::Validation(format!("backend: unknown value '{other}' (exact, symbolic, both)"))),
        }
    }

    pub fn kinds(self) -> Vec<BackendKind> {
        match self {
            BackendChoice::Exact => vec![BackendKind::Exact],
            BackendChoice::Symbolic => vec![BackendKind::Symbolic],
            BackendChoice::Both => vec![BackendKind::Exact, BackendKind::Symbolic],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Audit {
    UserPrivacy,
    CollusionControl,
    ServerPrivacy,
    LrcCollusion,
}

impl Audit {
    fn parse(s: &str) -> Result<Audit, CliError> {
        match s {
            "user-privacy" => Ok(Audit::UserPrivacy),
            "collusion-control" => Ok(Audit::CollusionControl),
            "server-privacy" => Ok(Audit::ServerPrivacy),
            "lrc-collusion" => Ok(Audit::LrcCollusion),
            other => Err(CliError::Validation(format!(
                "audits: unknown audit '{other}' (user-privacy, collusion-control, server-privacy, lrc-collusion)"
            ))),
        }
    }
}

impl fmt::Display for Audit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Audit::UserPrivacy => "user-privacy",
            Audit::CollusionControl => "collusion-control",
            Audit::ServerPrivacy => "server-privacy",
            Audit::LrcCollusion => "lrc-collusion",
        })
    }
}

#[derive(Clone, Debug)]
pub enum Scheme {
    Mds(DssConfig),
    Lrc { code: LinearCode, plan: LrcRetrievalPlan },
}

impl Scheme {
    pub fn code(&self) -> &LinearCode {
        match self {
            Scheme::Mds(cfg) => cfg.code(),
            Scheme::Lrc { code, .. } => code,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Scheme::Mds(cfg) => cfg.m(),
            Scheme::Lrc { plan, .. } => plan.m(),
        }
    }

    pub fn beta(&self) -> usize {
        match self {
            Scheme::Mds(cfg) => cfg.beta(),
            Scheme::Lrc { plan, .. } => plan.beta(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Scheme::Mds(cfg) => format!(
                "mds n {} k {} t {} L {} m {} beta {} odd_mode {}",
                cfg.n(),
                cfg.k(),
                cfg.t(),
                cfg.degree(),
                cfg.m(),
                cfg.beta(),
                cfg.odd_mode()
            ),
            Scheme::Lrc { code, plan } => format!(
                "lrc n {} k {} r {} rho {} t {} L {} m {} beta {}",
                code.n(),
                code.k(),
                plan.profile.r,
                plan.profile.rho,
                plan.t,
                code.field().degree(),
                plan.m(),
                plan.beta()
            ),
        }
    }
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub name: String,
    pub scheme: Scheme,
    /// 0-based.
    pub file: usize,
    pub seed: u64,
    pub backend: BackendChoice,
    pub audits: Vec<Audit>,
    /// 0-based working-server (MDS) or physical (LRC) positions.
    pub colluders: Option<Vec<usize>>,
    pub server_trials: usize,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn require(v: Option<usize>, key: &str) -> Result<usize, CliError> {
    v.ok_or_else(|| invalid(format!("missing key '{key}'")))
}

fn field_for(degree: Option<u8>, default: Field) -> Result<Field, CliError> {
    match degree {
        Some(l) => Field::new(l).map_err(|e| invalid(format!("L: {e}"))),
        None => Ok(default),
    }
}

impl Experiment {
    /// Validates `cfg`. `seed` and `backend` from the command line take
    /// precedence over the file.
    pub fn resolve(
        cfg: &ExperimentConfig,
        seed: Option<u64>,
        backend: Option<BackendChoice>,
    ) -> Result<Experiment, CliError> {
        let odd_mode = match cfg.odd_n_mode.as_deref() {
            None | Some("quantum") => OddMode::Quantum,
            Some("basis") => OddMode::Basis,
            Some(other) => return Err(invalid(format!("odd_n_mode: unknown value '{other}' (quantum, basis)"))),
        };
        let (name, scheme, default_file) = match &cfg.preset {
            Some(name) => {
                let p = preset(name).map_err(|e| invalid(format!("preset: {e}")))?;
                let structural = [cfg.n, cfg.k, cfg.t, cfg.r, cfg.rho, cfg.m, cfg.beta];
                if structural.iter().any(Option::is_some) || cfg.code.is_some() || cfg.degree.is_some() {
                    return Err(invalid("a preset fixes the code and parameters; remove n/k/t/r/rho/L/m/beta/code"));
                }
                let scheme = match p.scheme {
                    PresetScheme::Mds(c) => Scheme::Mds(c.with_odd_mode(odd_mode)),
                    PresetScheme::Lrc { code, plan } => Scheme::Lrc { code, plan: plan.with_odd_mode(odd_mode) },
                };
                (p.name.to_string(), scheme, p.file)
            }
            None => {
                let scheme = build_scheme(cfg, odd_mode)?;
                ("custom".to_string(), scheme, 0)
            }
        };
        let m = scheme.m();
        let file = match cfg.file_index {
            Some(0) => return Err(invalid("file_index is 1-based")),
            Some(i) if i > m => return Err(invalid(format!("file_index {i} exceeds m = {m}"))),
            Some(i) => i - 1,
            None => default_file,
        };
        let backend = match (backend, cfg.backend.as_deref()) {
            (Some(b), _) => b,
            (None, Some(s)) => BackendChoice::parse(s)?,
            (None, None) => BackendChoice::Symbolic,
        };
        let audits = match &cfg.audits {
            Some(list) => list.iter().map(|s| Audit::parse(s)).collect::<Result<_, _>>()?,
            None => match scheme {
                Scheme::Mds(_) => vec![Audit::UserPrivacy, Audit::CollusionControl, Audit::ServerPrivacy],
                Scheme::Lrc { .. } => vec![Audit::UserPrivacy, Audit::LrcCollusion],
            },
        };
        let bound = match &scheme {
            Scheme::Mds(c) => c.n(),
            Scheme::Lrc { code, .. } => code.n(),
        };
        let colluders = match &cfg.colluders {
            None => None,
            Some(list) => {
                let mut out = Vec::with_capacity(list.len());
                for &c in list {
                    if c == 0 || c > bound {
                        return Err(invalid(format!("colluders: server {c} outside 1..={bound}")));
                    }
                    out.push(c - 1);
                }
                out.sort_unstable();
                out.dedup();
                Some(out)
            }
        };
        Ok(Experiment {
            name,
            scheme,
            file,
            seed: seed.or(cfg.seed).unwrap_or(0),
            backend,
            audits,
            colluders,
            server_trials: cfg.server_trials.unwrap_or(1000),
        })
    }
}

fn build_scheme(cfg: &ExperimentConfig, odd_mode: OddMode) -> Result<Scheme, CliError> {
    let m = cfg.m.unwrap_or(2);
    let beta = cfg.beta.unwrap_or(1);
    match cfg.scheme.as_deref().unwrap_or("mds") {
        "mds" => {
            let code = match cfg.code.as_deref().unwrap_or("grs") {
                "parity-3-2" => parity_check_3_2(),
                "rs-4-2" => example_rs_4_2(),
                "grs" => {
                    let n = require(cfg.n, "n")?;
                    let k = require(cfg.k, "k")?;
                    let default = Field::for_length(n).map_err(|e| invalid(format!("n: {e}")))?;
                    let field = field_for(cfg.degree, default)?;
                    LinearCode::grs_default(field, n, k).map_err(|e| invalid(format!("code: {e}")))?
                }
                other => return Err(invalid(format!("code: unknown value '{other}' (grs, parity-3-2, rs-4-2)"))),
            };
            for (key, v, actual) in [("n", cfg.n, code.n()), ("k", cfg.k, code.k())] {
                if v.is_some_and(|v| v != actual) {
                    return Err(invalid(format!("{key} = {} conflicts with the chosen code ({actual})", v.unwrap())));
                }
            }
            if cfg.r.is_some() || cfg.rho.is_some() {
                return Err(invalid("r and rho apply only to scheme = \"lrc\""));
            }
            let t = cfg.t.unwrap_or(code.n() - code.k());
            let dss = DssConfig::new(code, t, m, beta).map_err(|e| invalid(e.to_string()))?;
            Ok(Scheme::Mds(dss.with_odd_mode(odd_mode)))
        }
        "lrc" => {
            let n = require(cfg.n, "n")?;
            let k = require(cfg.k, "k")?;
            let r = require(cfg.r, "r")?;
            let rho = require(cfg.rho, "rho")?;
            let t = cfg.t.unwrap_or(rho.saturating_sub(1));
            if cfg.code.is_some() {
                return Err(invalid("code applies only to scheme = \"mds\""));
            }
            let default = lrc_field(n, r + rho - 1).map_err(|e| invalid(format!("lrc: {e}")))?;
            let field = field_for(cfg.degree, default)?;
            let (code, profile) = lrc_generator(field, n, k, r, rho).map_err(|e| invalid(format!("lrc: {e}")))?;
            let plan = plan_lrc_retrieval(&code, &profile, t, m, beta).map_err(|e| invalid(e.to_string()))?;
            Ok(Scheme::Lrc { code, plan: plan.with_odd_mode(odd_mode) })
        }
        other => Err(invalid(format!("scheme: unknown value '{other}' (mds, lrc)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_with_overrides() {
        let cfg = ExperimentConfig::parse("preset = \"example-4-2\"\nfile_index = 2\nseed = 9\n").unwrap();
        let e = Experiment::resolve(&cfg, None, None).unwrap();
        assert_eq!((e.file, e.seed), (1, 9));
        let e = Experiment::resolve(&cfg, Some(4), Some(BackendChoice::Exact)).unwrap();
        assert_eq!((e.seed, e.backend), (4, BackendChoice::Exact));
    }

    #[test]
    fn custom_grs() {
        let cfg = ExperimentConfig::parse("n = 5\nk = 2\nm = 3\nodd_n_mode = \"basis\"").unwrap();
        let e = Experiment::resolve(&cfg, None, None).unwrap();
        match e.scheme {
            Scheme::Mds(c) => assert_eq!((c.n(), c.k(), c.t(), c.degree(), c.odd_mode()), (5, 2, 3, 2, OddMode::Basis)),
            _ => panic!(),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("n = ").is_err());
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        let bad = ["preset = \"example-3-2\"\nn = 4", "n = 4\nk = 2\nt = 3", "file_index = 0\npreset = \"example-3-2\"", "scheme = \"x\""];
        for text in bad {
            let cfg = ExperimentConfig::parse(text).unwrap();
            assert!(Experiment::resolve(&cfg, None, None).is_err(), "{text}");
        }
    }

    #[test]
    fn lrc_defaults() {
        let cfg = ExperimentConfig::parse("scheme = \"lrc\"\nn = 8\nk = 4\nr = 2\nrho = 3").unwrap();
        let e = Experiment::resolve(&cfg, None, None).unwrap();
        assert!(matches!(e.scheme, Scheme::Lrc { ref plan, .. } if plan.t == 2));
        assert_eq!(e.audits, vec![Audit::UserPrivacy, Audit::LrcCollusion]);
    }
}
