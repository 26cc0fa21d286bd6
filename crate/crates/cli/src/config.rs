//! `key = value` config files and their merge with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hslab_core::params::ProblemParams;
use hslab_core::quadrature::GridSpec;
use hslab_core::solvers::SolverOptions;

use crate::args::Common;
use crate::CliError;

const KEYS: &[&str] = &[
    "n",
    "p",
    "s",
    "mu",
    "q",
    "r_min",
    "r_max",
    "m",
    "max_iter",
    "tol",
    "seed",
    "out",
    "csv",
    "profile_out",
    "profile_in",
    "epsilon",
    "q_values",
    "alphas",
    "delta",
    "rates",
    "mus",
    "ss",
    "task",
    "best",
    "timing",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("config line {}: expected key = value", k + 1))
            })?;
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Validation(format!(
                    "config line {}: unknown key {key}",
                    k + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    CliError::Validation(format!("config key {key}: cannot parse {v:?}"))
                })
            })
            .transpose()
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.entries
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim().parse::<f64>().map_err(|_| {
                            CliError::Validation(format!("config key {key}: cannot parse {x:?}"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

/// Everything a command needs after merging flags, file and defaults.
#[derive(Debug)]
pub struct Settings {
    pub params: ProblemParams,
    pub grid: GridSpec,
    pub opts: SolverOptions,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub profile_out: Option<PathBuf>,
    pub profile_in: Option<PathBuf>,
    pub timing: bool,
    pub file: FileConfig,
}

pub const DEFAULT_SEED: u64 = 20240917;

fn pick<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

impl Settings {
    pub fn resolve(c: &Common) -> Result<Self, CliError> {
        let file = match &c.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let n = pick(c.n, &file, "n")?.unwrap_or(3);
        let p = pick(c.p, &file, "p")?.unwrap_or(2.0);
        let s = pick(c.s, &file, "s")?.unwrap_or(0.0);
        let mu = pick(c.mu, &file, "mu")?.unwrap_or(0.0);
        let mut params = ProblemParams::new(n, p, s, mu)?;
        if let Some(q) = pick(c.q, &file, "q")? {
            params = params.with_q(q)?;
        }
        let default = GridSpec::default_for(n);
        let grid = GridSpec {
            r_min: pick(c.r_min, &file, "r_min")?.unwrap_or(default.r_min),
            r_max: pick(c.r_max, &file, "r_max")?.unwrap_or(default.r_max),
            m: pick(c.m, &file, "m")?.unwrap_or(default.m),
            n,
        };
        grid.build()?;
        let mut opts = SolverOptions::default();
        if let Some(v) = pick(c.max_iter, &file, "max_iter")? {
            opts.max_iter = v;
        }
        if let Some(v) = pick(c.tol, &file, "tol")? {
            if !(v > 0.0) {
                return Err(CliError::Validation(format!(
                    "tol must be positive, got {v}"
                )));
            }
            opts.tol = v;
        }
        let path = |flag: &Option<PathBuf>, key: &str| -> Result<Option<PathBuf>, CliError> {
            Ok(flag.clone().or(file.get::<String>(key)?.map(PathBuf::from)))
        };
        Ok(Self {
            params,
            grid,
            opts,
            seed: pick(c.seed, &file, "seed")?.unwrap_or(DEFAULT_SEED),
            out: path(&c.out, "out")?,
            csv: path(&c.csv, "csv")?,
            profile_out: path(&c.profile_out, "profile_out")?,
            profile_in: path(&c.profile_in, "profile_in")?,
            timing: c.timing || file.flag("timing")?,
            file,
        })
    }

    pub fn list(&self, flag: &Option<Vec<f64>>, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match flag {
            Some(v) => Ok(Some(v.clone())),
            None => self.file.get_list(key),
        }
    }

    pub fn value<T: FromStr + Clone>(
        &self,
        flag: &Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        pick(flag.clone(), &self.file, key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let f = FileConfig::parse("# run\nmu = 0.1  # hardy\nr-min=1e-5\n\nalphas = 0, 5,10\n")
            .unwrap();
        assert_eq!(f.get::<f64>("mu").unwrap(), Some(0.1));
        assert_eq!(f.get::<f64>("r_min").unwrap(), Some(1e-5));
        assert_eq!(f.get_list("alphas").unwrap(), Some(vec![0.0, 5.0, 10.0]));
        assert_eq!(f.get::<f64>("s").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(FileConfig::parse("colour = red").is_err());
        assert!(FileConfig::parse("mu 0.1").is_err());
        assert!(FileConfig::parse("mu = x")
            .unwrap()
            .get::<f64>("mu")
            .is_err());
    }
}
