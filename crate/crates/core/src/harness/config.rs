use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{step_count, CavityQubitParams};
use crate::estimators::Rule;
use crate::harness::HarnessError;
use crate::state::QubitState;
use crate::trajectory::ItoScheme;

pub const DEFAULT_COARSE_WINDOW: usize = 100;

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: CavityQubitParams,
    pub rho0: QubitState,
    pub t_m: f64,
    pub dt: f64,
    pub seed: u64,
    pub trajectories: usize,
    pub rules: Vec<Rule>,
    pub scheme: ItoScheme,
    pub out: PathBuf,
    /// Moving-average window (bins) of the displayed current.
    pub coarse_window: usize,
    /// Trajectories whose full paths are retained in the report.
    pub keep_paths: usize,
    /// Step sizes for convergence runs, coarsest first.
    pub dt_levels: Vec<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: CavityQubitParams::reference(0.5),
            rho0: QubitState::superposition(),
            t_m: 10.0,
            dt: 1e-4,
            seed: 1,
            trajectories: 1,
            rules: Rule::ALL.to_vec(),
            scheme: ItoScheme::Milstein,
            out: PathBuf::from("out"),
            coarse_window: DEFAULT_COARSE_WINDOW,
            keep_paths: 1,
            dt_levels: vec![1e-3, 5e-4, 2.5e-4, 1.25e-4],
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg = |e: crate::Error| HarnessError::Config(e.to_string());
        self.params.validate().map_err(cfg)?;
        self.rho0.validate().map_err(cfg)?;
        step_count(self.t_m, self.dt).map_err(cfg)?;
        if self.trajectories == 0 {
            return Err(HarnessError::Config("trajectory count must be >= 1".into()));
        }
        let mut rules = self.rules.clone();
        rules.sort();
        rules.dedup();
        if rules.len() != self.rules.len() {
            return Err(HarnessError::Config(format!(
                "duplicate rules in {:?}",
                self.rules
            )));
        }
        if self.coarse_window == 0 {
            return Err(HarnessError::Config(
                "coarse-graining window must be >= 1".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("thread count must be >= 1".into()));
        }
        Ok(())
    }

    /// Enabled rules in canonical E, G, K order.
    pub fn ordered_rules(&self) -> Vec<Rule> {
        Rule::ALL
            .iter()
            .copied()
            .filter(|r| self.rules.contains(r))
            .collect()
    }
}

/// Partial configuration: every field optional. Used both for the JSON
/// config file and for command-line overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub chi: Option<f64>,
    pub kappa: Option<f64>,
    pub eps_m: Option<f64>,
    pub delta_r: Option<f64>,
    pub phi: Option<f64>,
    pub omega_q: Option<f64>,
    pub alpha0: Option<[f64; 2]>,
    pub rho11_0: Option<f64>,
    pub rho12_0: Option<[f64; 2]>,
    pub tm: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub trajectories: Option<usize>,
    pub rules: Option<String>,
    pub scheme: Option<String>,
    pub out: Option<PathBuf>,
    pub window: Option<usize>,
    pub keep_paths: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub threads: Option<usize>,
}

impl ConfigOverrides {
    pub fn from_json_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Values set in `self` win over those in `base`.
    pub fn over(self, base: ConfigOverrides) -> ConfigOverrides {
        macro_rules! pick {
            ($($f:ident),*) => {
                ConfigOverrides { $($f: self.$f.or(base.$f)),* }
            };
        }
        pick!(
            chi,
            kappa,
            eps_m,
            delta_r,
            phi,
            omega_q,
            alpha0,
            rho11_0,
            rho12_0,
            tm,
            dt,
            seed,
            trajectories,
            rules,
            scheme,
            out,
            window,
            keep_paths,
            levels,
            threads
        )
    }

    pub fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig, HarnessError> {
        let p = &mut cfg.params;
        if let Some(v) = self.chi {
            p.chi = v;
        }
        if let Some(v) = self.kappa {
            p.kappa = v;
        }
        if let Some(v) = self.eps_m {
            p.epsilon_m = v;
        }
        if let Some(v) = self.delta_r {
            p.delta_r = v;
        }
        if let Some(v) = self.phi {
            p.phi = v;
        }
        if let Some(v) = self.omega_q {
            p.omega_q = v;
        }
        if let Some([re, im]) = self.alpha0 {
            p.alpha0 = Complex64::new(re, im);
        }
        if let Some(v) = self.rho11_0 {
            cfg.rho0.rho11 = v;
        }
        if let Some([re, im]) = self.rho12_0 {
            cfg.rho0.rho12 = Complex64::new(re, im);
        }
        if let Some(v) = self.tm {
            cfg.t_m = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trajectories {
            cfg.trajectories = v;
        }
        if let Some(rules) = &self.rules {
            cfg.rules = parse_rules(rules)?;
        }
        if let Some(scheme) = &self.scheme {
            cfg.scheme = scheme
                .parse()
                .map_err(|e: crate::Error| HarnessError::Config(e.to_string()))?;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.window {
            cfg.coarse_window = v;
        }
        if let Some(v) = self.keep_paths {
            cfg.keep_paths = v;
        }
        if let Some(v) = &self.levels {
            cfg.dt_levels = v.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(cfg)
    }
}

/// Parses a comma-separated rule list such as `E,G,K`. An empty string
/// selects no rule.
pub fn parse_rules(list: &str) -> Result<Vec<Rule>, HarnessError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<Rule>()
                .map_err(|e| HarnessError::Config(e.to_string()))
        })
        .collect()
}
