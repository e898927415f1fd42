//! Experiment configuration.
//!
//! A config is plain text, one `key = value` pair per line:
//!
//! ```text
//! # comment
//! weights = stable 1.25
//! order = 2048
//! grid = 256 512 1024
//! samples = 2000
//! radius = 1
//! seed = 7
//! ```
//!
//! Blank lines and lines starting with `#` are ignored, except lines of the
//! form `# config.<key> = <value>`, which are read as `<key> = <value>`. CSV
//! reports embed their config that way, so a report can be passed back as
//! `--config` to reproduce it; when such lines are present, lines not
//! starting with `#` are skipped. Keys may appear once.
//!
//! Keys:
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `weights` | weight spec, see [`WeightSpec`] | required |
//! | `order` | series order N | 1024 |
//! | `grid` | increasing perimeter half-lengths k; `2^8..2^13` expands powers of two | `256` |
//! | `samples` | replicas per k | 1000 |
//! | `radius` | ball radius r | 1 |
//! | `seed` | u64 | 0 |
//! | `threads` | worker threads, 0 for all cores | 0 |
//! | `out` | output path | stdout |
//! | `hill_fraction` | share of the largest loop lengths used by the Hill estimator | 0.01 |
//!
//! `threads` and `out` do not change report contents and are left out of
//! the embedded config and its hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bmap_core::weights::WeightSeq;
use sha2::{Digest, Sha256};

use crate::LabError;

/// Weight sequence source.
///
/// ```text
/// zero                       q = 0
/// qstar [truncation]         the a = 2 sequence
/// explicit q1 q2 ...         finite list
/// stable alpha [s] [trunc]   power-law family; s omitted or `critical`
///                            picks the critical member
/// file PATH                  whitespace-separated q1 q2 ...
/// ```
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Zero,
    QStar { truncation: usize },
    Explicit(Vec<f64>),
    Stable { alpha: f64, s: Option<f64>, truncation: usize },
    File(PathBuf),
}

/// Truncation of the power-law family unless given.
pub const STABLE_TRUNCATION: usize = 1 << 16;

impl WeightSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut it = s.split_whitespace();
        let head = it.next().ok_or("empty weight spec")?;
        let rest: Vec<&str> = it.collect();
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("bad number `{x}`"));
        let int = |x: &str| x.parse::<usize>().map_err(|_| format!("bad integer `{x}`"));
        match head {
            "zero" if rest.is_empty() => Ok(WeightSpec::Zero),
            "qstar" => match rest.as_slice() {
                [] => Ok(WeightSpec::QStar { truncation: 1 << 14 }),
                [n] => Ok(WeightSpec::QStar { truncation: int(n)? }),
                _ => Err("qstar takes at most a truncation".into()),
            },
            "explicit" => {
                let q = rest.iter().map(|x| num(x)).collect::<Result<Vec<_>, _>>()?;
                if q.is_empty() {
                    return Err("explicit needs coefficients".into());
                }
                Ok(WeightSpec::Explicit(q))
            }
            "stable" => {
                let mass = |x: &str| if x == "critical" { Ok(None) } else { num(x).map(Some) };
                let (alpha, s, truncation) = match rest.as_slice() {
                    [a] => (num(a)?, None, STABLE_TRUNCATION),
                    [a, s] => (num(a)?, mass(s)?, STABLE_TRUNCATION),
                    [a, s, n] => (num(a)?, mass(s)?, int(n)?),
                    _ => return Err("stable takes alpha [s] [truncation]".into()),
                };
                Ok(WeightSpec::Stable { alpha, s, truncation })
            }
            "file" if rest.len() == 1 => Ok(WeightSpec::File(PathBuf::from(rest[0]))),
            _ => Err(format!("unknown weight spec `{s}`")),
        }
    }

    pub fn resolve(&self) -> Result<WeightSeq, LabError> {
        Ok(match self {
            WeightSpec::Zero => WeightSeq::zero(),
            WeightSpec::QStar { truncation } => WeightSeq::qstar(*truncation),
            WeightSpec::Explicit(q) => WeightSeq::explicit(q.clone())?,
            WeightSpec::Stable { alpha, s: None, truncation } => WeightSeq::stable_critical(*alpha, *truncation)?,
            WeightSpec::Stable { alpha, s: Some(s), truncation } => WeightSeq::stable(*alpha, *s, *truncation)?,
            WeightSpec::File(p) => WeightSeq::explicit(read_coeffs(p)?)?,
        })
    }
}

fn read_coeffs(p: &Path) -> Result<Vec<f64>, LabError> {
    let text = std::fs::read_to_string(p)?;
    text.split_whitespace()
        .map(|x| {
            x.parse::<f64>().map_err(|_| LabError::Config {
                line: 0,
                msg: format!("{}: bad number `{x}`", p.display()),
            })
        })
        .collect()
}

impl std::fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightSpec::Zero => write!(f, "zero"),
            WeightSpec::QStar { truncation } => write!(f, "qstar {truncation}"),
            WeightSpec::Explicit(q) => {
                write!(f, "explicit")?;
                for x in q {
                    write!(f, " {x:?}")?;
                }
                Ok(())
            }
            WeightSpec::Stable { alpha, s, truncation } => match s {
                None if *truncation == STABLE_TRUNCATION => write!(f, "stable {alpha:?}"),
                None => write!(f, "stable {alpha:?} critical {truncation}"),
                Some(s) => write!(f, "stable {alpha:?} {s:?} {truncation}"),
            },
            WeightSpec::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCfg {
    pub weights: WeightSpec,
    pub order: usize,
    pub grid: Vec<usize>,
    pub samples: usize,
    pub radius: usize,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub hill_fraction: f64,
}

impl ExperimentCfg {
    pub fn new(weights: WeightSpec) -> Self {
        ExperimentCfg {
            weights,
            order: 1024,
            grid: vec![256],
            samples: 1000,
            radius: 1,
            seed: 0,
            threads: 0,
            out: None,
            hill_fraction: 0.01,
        }
    }

    pub fn from_file(p: &Path) -> Result<Self, LabError> {
        Self::parse(&std::fs::read_to_string(p)?)
    }

    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut weights = None;
        let mut cfg = ExperimentCfg::new(WeightSpec::Zero);
        let mut seen: Vec<String> = Vec::new();
        let report = text.lines().any(|l| l.starts_with("# config."));
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| LabError::Config { line, msg };
            let body = match raw.trim().strip_prefix('#') {
                Some(c) => match c.trim_start().strip_prefix("config.") {
                    Some(kv) => kv,
                    None => continue,
                },
                None if report => continue,
                None => raw.trim(),
            };
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            let int = |v: &str| v.parse::<usize>().map_err(|_| err(format!("bad integer `{v}`")));
            match key {
                "weights" => weights = Some(WeightSpec::parse(value).map_err(err)?),
                "order" => cfg.order = int(value)?,
                "grid" => cfg.grid = parse_grid(value).map_err(err)?,
                "samples" => cfg.samples = int(value)?,
                "radius" => cfg.radius = int(value)?,
                "seed" => cfg.seed = value.parse().map_err(|_| err(format!("bad seed `{value}`")))?,
                "threads" => cfg.threads = int(value)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "hill_fraction" => {
                    cfg.hill_fraction = value.parse().map_err(|_| err(format!("bad number `{value}`")))?
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.weights = weights.ok_or(LabError::Config {
            line: 0,
            msg: "missing `weights`".into(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let err = |msg: &str| {
            Err(LabError::Config {
                line: 0,
                msg: msg.into(),
            })
        };
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return err("grid must be nonempty and strictly increasing");
        }
        if self.grid[0] == 0 {
            return err("grid sizes must be positive");
        }
        if self.samples == 0 {
            return err("samples must be at least 1");
        }
        if self.order < 8 {
            return err("order must be at least 8");
        }
        if !(self.hill_fraction > 0.0 && self.hill_fraction <= 1.0) {
            return err("hill_fraction must lie in (0, 1]");
        }
        Ok(())
    }

    /// Keys that determine report contents, in a fixed order.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let grid: Vec<String> = self.grid.iter().map(|k| k.to_string()).collect();
        writeln!(s, "weights = {}", self.weights).unwrap();
        writeln!(s, "order = {}", self.order).unwrap();
        writeln!(s, "grid = {}", grid.join(" ")).unwrap();
        writeln!(s, "samples = {}", self.samples).unwrap();
        writeln!(s, "radius = {}", self.radius).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "hill_fraction = {:?}", self.hill_fraction).unwrap();
        s
    }

    /// SHA-256 of the canonical text, plus the weight file when there is one.
    pub fn hash(&self) -> Result<String, LabError> {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        if let WeightSpec::File(p) = &self.weights {
            h.update(std::fs::read(p)?);
        }
        let mut out = String::with_capacity(64);
        for b in h.finalize() {
            write!(out, "{b:02x}").unwrap();
        }
        Ok(out)
    }
}

/// `a b c`, or `2^i..2^j` for the powers of two in between.
fn parse_grid(v: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, hi)) = v.split_once("..") {
        let exp = |x: &str| {
            x.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse::<u32>().ok())
                .filter(|&e| e < 40)
                .ok_or(format!("bad power of two `{x}`"))
        };
        let (a, b) = (exp(lo)?, exp(hi)?);
        return Ok((a..=b).map(|e| 1usize << e).collect());
    }
    v.split_whitespace()
        .map(|x| x.parse::<usize>().map_err(|_| format!("bad grid entry `{x}`")))
        .collect()
}
