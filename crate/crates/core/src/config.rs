//! Run configuration: search radii, caps and the RNG seed.
//!
//! The on-disk format is one `key = value` pair per line; `#` starts a
//! comment. The environment variable [`CONFIG_ENV`] overrides the path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_ENV: &str = "SYNDETIC_CONFIG";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Seeds every randomized search.
    pub seed: u64,
    /// Largest ball that may be enumerated.
    pub ball_cap: usize,
    /// Largest explicit tuple or subset enumeration.
    pub tuple_cap: u128,
    /// Node budget for partition and multiset searches.
    pub search_budget: u64,
    /// Word-length radius of coordinate windows in free groups.
    pub radius: u32,
    /// Word-length radius of the candidate witness ball.
    pub witness_radius: u32,
    /// Half-width of the coordinate window used for aperiodic subsets of ℤ.
    pub int_window: u64,
    /// Largest gap bound tried for ℤ witnesses `{0..k}`.
    pub max_k: u32,
    pub scs_support_radius: u32,
    pub scs_max_size: u32,
    pub scs_max_mult: u32,
    /// Hill-climbing restarts after the exhaustive multiset phase.
    pub scs_restarts: u32,
    /// Largest modulus tried when searching periodic candidates.
    pub periodic_cap: u64,
    pub cert_dir: PathBuf,
    /// Worker threads; 0 picks the number of cores.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 20_240_601,
            ball_cap: crate::group::DEFAULT_BALL_CAP,
            tuple_cap: 100_000_000,
            search_budget: 2_000_000,
            radius: 3,
            witness_radius: 3,
            int_window: 1 << 20,
            max_k: 127,
            scs_support_radius: 4,
            scs_max_size: 12,
            scs_max_mult: 4,
            scs_restarts: 64,
            periodic_cap: 12,
            cert_dir: PathBuf::from("certs"),
            threads: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.replace('_', "").parse().map_err(|e| Error::Parse(format!("config key {key}: {e}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "seed" => c.seed = parse_num(k, v)?,
                "ball_cap" => c.ball_cap = parse_num(k, v)?,
                "tuple_cap" => c.tuple_cap = parse_num(k, v)?,
                "search_budget" => c.search_budget = parse_num(k, v)?,
                "radius" => c.radius = parse_num(k, v)?,
                "witness_radius" => c.witness_radius = parse_num(k, v)?,
                "int_window" => c.int_window = parse_num(k, v)?,
                "max_k" => c.max_k = parse_num(k, v)?,
                "scs_support_radius" => c.scs_support_radius = parse_num(k, v)?,
                "scs_max_size" => c.scs_max_size = parse_num(k, v)?,
                "scs_max_mult" => c.scs_max_mult = parse_num(k, v)?,
                "scs_restarts" => c.scs_restarts = parse_num(k, v)?,
                "periodic_cap" => c.periodic_cap = parse_num(k, v)?,
                "cert_dir" => c.cert_dir = PathBuf::from(v),
                "threads" => c.threads = parse_num(k, v)?,
                _ => return Err(Error::Parse(format!("unknown config key {k:?}"))),
            }
        }
        if c.max_k >= 128 {
            return Err(Error::Parse("max_k must be below 128".into()));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Loads from the path named by [`CONFIG_ENV`] if set, else from
    /// `fallback` if given, else returns the defaults.
    pub fn load_default(fallback: Option<&Path>) -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => RunConfig::load(Path::new(&p)),
            None => match fallback {
                Some(p) => RunConfig::load(p),
                None => Ok(RunConfig::default()),
            },
        }
    }

    /// Sizes rayon's global pool from `threads`. Only the first call in a
    /// process takes effect.
    pub fn init_threads(&self) {
        if self.threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(self.threads).build_global();
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "seed = {}\nball_cap = {}\ntuple_cap = {}\nsearch_budget = {}\nradius = {}\nwitness_radius = {}\n\
             int_window = {}\nmax_k = {}\nscs_support_radius = {}\nscs_max_size = {}\nscs_max_mult = {}\n\
             scs_restarts = {}\nperiodic_cap = {}\ncert_dir = {}\nthreads = {}\n",
            self.seed,
            self.ball_cap,
            self.tuple_cap,
            self.search_budget,
            self.radius,
            self.witness_radius,
            self.int_window,
            self.max_k,
            self.scs_support_radius,
            self.scs_max_size,
            self.scs_max_mult,
            self.scs_restarts,
            self.periodic_cap,
            self.cert_dir.display(),
            self.threads,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.seed = 99;
        c.radius = 5;
        c.cert_dir = PathBuf::from("/tmp/x");
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn comments_and_unknown_keys() {
        let c = RunConfig::parse("# hi\nseed = 1_000 # trailing\n\n").unwrap();
        assert_eq!(c.seed, 1000);
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("seed").is_err());
        assert!(RunConfig::parse("max_k = 200").is_err());
    }
}
