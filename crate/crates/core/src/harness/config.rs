use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::decode::DEFAULT_TOL;
use crate::error::{AlcError, Result};

const MAX_TRIALS: i64 = 100_000_000;
const MAX_DIM: i64 = 100_000;
const MAX_STARTS: i64 = 1_000_000;
const MAX_POINTS: i64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Dim,
    Nsp,
    Recover,
    Kron,
    Collide,
    Interleave,
}

impl ExperimentKind {
    pub const ALL: [Self; 6] = [
        Self::Dim,
        Self::Nsp,
        Self::Recover,
        Self::Kron,
        Self::Collide,
        Self::Interleave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dim => "dim",
            Self::Nsp => "nsp",
            Self::Recover => "recover",
            Self::Kron => "kron",
            Self::Collide => "collide",
            Self::Interleave => "interleave",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Self::Dim => &["set", "points", "depth", "input", "scales", "expect", "expect_tol"],
            Self::Nsp => &["m", "n", "s", "trials", "min_gain"],
            Self::Recover => &["m", "n", "s", "trials", "tol", "fresh_matrix", "sweep_n", "max_error"],
            Self::Kron => &[
                "k", "l", "r", "t", "n", "trials", "starts", "tol", "fresh_matrix", "sweep_n", "max_error",
            ],
            Self::Collide => &["k", "l", "r", "t", "n", "starts", "expect"],
            Self::Interleave => &["precision", "trials"],
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = AlcError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| AlcError::Config(format!("unknown kind `{s}`; expected one of dim, nsp, recover, kron, collide, interleave")))
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which point set a `dim` experiment measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSource {
    /// `points` uniform samples of the unit segment in ℝ².
    Segment { points: usize },
    /// Middle-thirds Cantor endpoints at the given depth.
    Cantor { depth: u32 },
    /// `{0} ∪ {1/i}` with `points` elements.
    SetF { points: usize },
    /// `points` uniform samples of the unit square in ℝ³.
    Square { points: usize },
    /// Points read from a CSV file.
    Csv { input: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimParams {
    pub set: SetSource,
    /// Radii `2^-j` for `j` in `scales.0..=scales.1`.
    pub scales: (i32, i32),
    pub expect: Option<f64>,
    pub expect_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NspParams {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub trials: usize,
    /// Assertion threshold: the observed minimum gain must exceed it.
    pub min_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverParams {
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub trials: usize,
    pub tol: f64,
    pub fresh_matrix: bool,
    /// Optional sweep over the number of rows.
    pub sweep_n: Option<(usize, usize)>,
    /// Assertion threshold on the empirical error.
    pub max_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KronParams {
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub t: usize,
    pub n: usize,
    pub trials: usize,
    pub starts: usize,
    pub tol: f64,
    pub fresh_matrix: bool,
    pub sweep_n: Option<(usize, usize)>,
    pub max_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollideParams {
    pub k: usize,
    pub l: usize,
    pub r: usize,
    pub t: usize,
    pub n: usize,
    pub starts: usize,
    /// Assertion: whether a collision is expected.
    pub expect: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleaveParams {
    pub precision: u32,
    /// Random grid points checked on top of the exhaustive small grid.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    Dim(DimParams),
    Nsp(NspParams),
    Recover(RecoverParams),
    Kron(KronParams),
    Collide(CollideParams),
    Interleave(InterleaveParams),
}

/// A parsed experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub params: Params,
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        match self.params {
            Params::Dim(_) => ExperimentKind::Dim,
            Params::Nsp(_) => ExperimentKind::Nsp,
            Params::Recover(_) => ExperimentKind::Recover,
            Params::Kron(_) => ExperimentKind::Kron,
            Params::Collide(_) => ExperimentKind::Collide,
            Params::Interleave(_) => ExperimentKind::Interleave,
        }
    }

    /// Parses flat `key = value` text. `#` starts a comment.
    ///
    /// ```
    /// let cfg = alc::harness::parse_config("kind = recover\nm = 20\nn = 4\ns = 3\ntrials = 10\n").unwrap();
    /// assert_eq!(cfg.kind(), alc::harness::ExperimentKind::Recover);
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_as(text, None)
    }

    /// Like [`parse`](Self::parse), but `kind` may be omitted from the text when
    /// `expected` is given; a conflicting `kind` is an error.
    pub fn parse_as(text: &str, expected: Option<ExperimentKind>) -> Result<Self> {
        let mut table = Table::read(text)?;
        let kind = match (table.take_raw("kind")?, expected) {
            (Some(raw), None) => raw.parse()?,
            (Some(raw), Some(e)) => {
                let k: ExperimentKind = raw.parse()?;
                if k != e {
                    return Err(cfg_err(format!("config declares kind `{k}` but `{e}` was requested")));
                }
                k
            }
            (None, Some(e)) => e,
            (None, None) => return Err(cfg_err("missing required key `kind`")),
        };
        let allowed: Vec<&str> = ["seed", "output"].iter().chain(kind.keys()).copied().collect();
        let unknown: Vec<&str> = table
            .entries
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(cfg_err(format!(
                "unknown keys for kind `{kind}`: {}",
                unknown.join(", ")
            )));
        }
        let master_seed = table.opt_u64("seed")?.unwrap_or(0);
        let output_path = table.take_raw("output")?.map(PathBuf::from);
        let params = match kind {
            ExperimentKind::Dim => Params::Dim(parse_dim(&mut table)?),
            ExperimentKind::Nsp => {
                let m = table.req_int("m", 1, MAX_DIM)?;
                let n = table.req_int("n", 1, m as i64)?;
                Params::Nsp(NspParams {
                    m,
                    n,
                    s: table.req_int("s", 1, m as i64)?,
                    trials: table.req_int("trials", 1, MAX_TRIALS)?,
                    min_gain: table.opt_float("min_gain", 0.0, f64::INFINITY)?,
                })
            }
            ExperimentKind::Recover => {
                let m = table.req_int("m", 1, MAX_DIM)?;
                let n = table.req_int("n", 1, m as i64)?;
                let s = table.req_int("s", 0, n as i64)?;
                Params::Recover(RecoverParams {
                    m,
                    n,
                    s,
                    trials: table.req_int("trials", 1, MAX_TRIALS)?,
                    tol: table.opt_float("tol", f64::MIN_POSITIVE, 1.0)?.unwrap_or(DEFAULT_TOL),
                    fresh_matrix: table.opt_bool("fresh_matrix")?.unwrap_or(false),
                    sweep_n: table.opt_range("sweep_n", s as i64, m as i64)?,
                    max_error: table.opt_float("max_error", 0.0, 1.0)?,
                })
            }
            ExperimentKind::Kron => {
                let (k, l, r, t) = kron_shape(&mut table)?;
                let n = table.req_int("n", (r + t) as i64, (k * l) as i64)?;
                Params::Kron(KronParams {
                    k,
                    l,
                    r,
                    t,
                    n,
                    trials: table.req_int("trials", 1, MAX_TRIALS)?,
                    starts: table.opt_int("starts", 1, MAX_STARTS)?.unwrap_or(20),
                    tol: table.opt_float("tol", f64::MIN_POSITIVE, 1.0)?.unwrap_or(DEFAULT_TOL),
                    fresh_matrix: table.opt_bool("fresh_matrix")?.unwrap_or(false),
                    sweep_n: table.opt_range("sweep_n", (r + t) as i64, (k * l) as i64)?,
                    max_error: table.opt_float("max_error", 0.0, 1.0)?,
                })
            }
            ExperimentKind::Collide => {
                let (k, l, r, t) = kron_shape(&mut table)?;
                Params::Collide(CollideParams {
                    k,
                    l,
                    r,
                    t,
                    n: table.req_int("n", 1, (k * l) as i64)?,
                    starts: table.opt_int("starts", 1, MAX_STARTS)?.unwrap_or(20),
                    expect: table.opt_bool("expect")?,
                })
            }
            ExperimentKind::Interleave => Params::Interleave(InterleaveParams {
                precision: table.req_int::<u32>("precision", 1, crate::decode::MAX_PRECISION as i64)?,
                trials: table.opt_int("trials", 1, MAX_TRIALS)?.unwrap_or(100_000),
            }),
        };
        Ok(Self {
            master_seed,
            output_path,
            params,
        })
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("kind", self.kind().to_string());
        kv("seed", self.master_seed.to_string());
        if let Some(p) = &self.output_path {
            kv("output", p.display().to_string());
        }
        let range = |(a, b): (usize, usize)| format!("{a}:{b}");
        match &self.params {
            Params::Dim(p) => {
                match &p.set {
                    SetSource::Segment { points } => {
                        kv("set", "segment".into());
                        kv("points", points.to_string());
                    }
                    SetSource::Cantor { depth } => {
                        kv("set", "cantor".into());
                        kv("depth", depth.to_string());
                    }
                    SetSource::SetF { points } => {
                        kv("set", "set_f".into());
                        kv("points", points.to_string());
                    }
                    SetSource::Square { points } => {
                        kv("set", "square".into());
                        kv("points", points.to_string());
                    }
                    SetSource::Csv { input } => {
                        kv("set", "csv".into());
                        kv("input", input.display().to_string());
                    }
                }
                kv("scales", format!("{}:{}", p.scales.0, p.scales.1));
                if let Some(e) = p.expect {
                    kv("expect", e.to_string());
                }
                kv("expect_tol", p.expect_tol.to_string());
            }
            Params::Nsp(p) => {
                kv("m", p.m.to_string());
                kv("n", p.n.to_string());
                kv("s", p.s.to_string());
                kv("trials", p.trials.to_string());
                if let Some(g) = p.min_gain {
                    kv("min_gain", g.to_string());
                }
            }
            Params::Recover(p) => {
                kv("m", p.m.to_string());
                kv("n", p.n.to_string());
                kv("s", p.s.to_string());
                kv("trials", p.trials.to_string());
                kv("tol", p.tol.to_string());
                kv("fresh_matrix", p.fresh_matrix.to_string());
                if let Some(r) = p.sweep_n {
                    kv("sweep_n", range(r));
                }
                if let Some(e) = p.max_error {
                    kv("max_error", e.to_string());
                }
            }
            Params::Kron(p) => {
                kv("k", p.k.to_string());
                kv("l", p.l.to_string());
                kv("r", p.r.to_string());
                kv("t", p.t.to_string());
                kv("n", p.n.to_string());
                kv("trials", p.trials.to_string());
                kv("starts", p.starts.to_string());
                kv("tol", p.tol.to_string());
                kv("fresh_matrix", p.fresh_matrix.to_string());
                if let Some(r) = p.sweep_n {
                    kv("sweep_n", range(r));
                }
                if let Some(e) = p.max_error {
                    kv("max_error", e.to_string());
                }
            }
            Params::Collide(p) => {
                kv("k", p.k.to_string());
                kv("l", p.l.to_string());
                kv("r", p.r.to_string());
                kv("t", p.t.to_string());
                kv("n", p.n.to_string());
                kv("starts", p.starts.to_string());
                if let Some(e) = p.expect {
                    kv("expect", e.to_string());
                }
            }
            Params::Interleave(p) => {
                kv("precision", p.precision.to_string());
                kv("trials", p.trials.to_string());
            }
        }
        out
    }
}

/// Shorthand for [`ExperimentConfig::parse`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::parse(text)
}

fn cfg_err(msg: impl Into<String>) -> AlcError {
    AlcError::Config(msg.into())
}

fn parse_dim(table: &mut Table) -> Result<DimParams> {
    let set_name = table.take_raw("set")?.ok_or_else(|| cfg_err("missing required key `set`"))?;
    let set = match set_name.as_str() {
        "segment" => SetSource::Segment {
            points: table.req_int("points", 1, MAX_POINTS)?,
        },
        "set_f" => SetSource::SetF {
            points: table.req_int("points", 1, MAX_POINTS)?,
        },
        "square" => SetSource::Square {
            points: table.req_int("points", 1, MAX_POINTS)?,
        },
        "cantor" => SetSource::Cantor {
            depth: table.req_int("depth", 0, crate::setgen::MAX_CANTOR_DEPTH as i64)?,
        },
        "csv" => SetSource::Csv {
            input: table
                .take_raw("input")?
                .map(PathBuf::from)
                .ok_or_else(|| cfg_err("set = csv requires key `input`"))?,
        },
        other => {
            return Err(cfg_err(format!(
                "`set` = `{other}` is not one of segment, cantor, set_f, square, csv"
            )))
        }
    };
    // keys that belong to a different set choice
    for stray in ["points", "depth", "input"] {
        if table.entries.contains_key(stray) {
            return Err(cfg_err(format!("key `{stray}` does not apply to set = {set_name}")));
        }
    }
    let scales = table
        .take_raw("scales")?
        .ok_or_else(|| cfg_err("missing required key `scales`"))?;
    let scales = parse_pair(&scales)
        .filter(|(a, b)| (-60..=60).contains(a) && (-60..=60).contains(b) && b - a >= 2)
        .ok_or_else(|| {
            cfg_err(format!(
                "`scales` = `{scales}` is out of range: expected jmin:jmax with -60 <= jmin, jmax <= 60 and jmax - jmin >= 2"
            ))
        })?;
    Ok(DimParams {
        set,
        scales: (scales.0 as i32, scales.1 as i32),
        expect: table.opt_float("expect", 0.0, 1e3)?,
        expect_tol: table.opt_float("expect_tol", f64::MIN_POSITIVE, 1e3)?.unwrap_or(0.05),
    })
}

fn kron_shape(table: &mut Table) -> Result<(usize, usize, usize, usize)> {
    let k = table.req_int("k", 1, 1000)?;
    let l = table.req_int("l", 1, 1000)?;
    let r = table.req_int("r", 1, k as i64)?;
    let t = table.req_int("t", 1, l as i64)?;
    Ok((k, l, r, t))
}

fn parse_pair(s: &str) -> Option<(i64, i64)> {
    let (a, b) = s.split_once(':')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

struct Table {
    entries: BTreeMap<String, String>,
}

impl Table {
    fn read(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(format!("line {}: expected `key = value`", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(cfg_err(format!("line {}: empty key or value", no + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(cfg_err(format!("line {}: duplicate key `{k}`", no + 1)));
            }
        }
        Ok(Self { entries })
    }

    fn take_raw(&mut self, key: &str) -> Result<Option<String>> {
        Ok(self.entries.remove(key))
    }

    fn opt_int<T: TryFrom<i64>>(&mut self, key: &str, lo: i64, hi: i64) -> Result<Option<T>> {
        let Some(raw) = self.entries.remove(key) else {
            return Ok(None);
        };
        let bounds = || cfg_err(format!("`{key}` = `{raw}` is out of range: expected an integer in [{lo}, {hi}]"));
        let v: i64 = raw.parse().map_err(|_| bounds())?;
        if v < lo || v > hi {
            return Err(bounds());
        }
        T::try_from(v).map(Some).map_err(|_| bounds())
    }

    fn req_int<T: TryFrom<i64>>(&mut self, key: &str, lo: i64, hi: i64) -> Result<T> {
        self.opt_int(key, lo, hi)?
            .ok_or_else(|| cfg_err(format!("missing required key `{key}`")))
    }

    fn opt_u64(&mut self, key: &str) -> Result<Option<u64>> {
        let Some(raw) = self.entries.remove(key) else {
            return Ok(None);
        };
        raw.parse()
            .map(Some)
            .map_err(|_| cfg_err(format!("`{key}` = `{raw}` is out of range: expected an integer in [0, {}]", u64::MAX)))
    }

    fn opt_float(&mut self, key: &str, lo: f64, hi: f64) -> Result<Option<f64>> {
        let Some(raw) = self.entries.remove(key) else {
            return Ok(None);
        };
        let v: f64 = raw.parse().unwrap_or(f64::NAN);
        if !(v >= lo && v <= hi) {
            return Err(cfg_err(format!("`{key}` = `{raw}` is out of range: expected a number in [{lo}, {hi}]")));
        }
        Ok(Some(v))
    }

    fn opt_bool(&mut self, key: &str) -> Result<Option<bool>> {
        let Some(raw) = self.entries.remove(key) else {
            return Ok(None);
        };
        match raw.as_str() {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            _ => Err(cfg_err(format!("`{key}` = `{raw}` must be true or false"))),
        }
    }

    fn opt_range(&mut self, key: &str, lo: i64, hi: i64) -> Result<Option<(usize, usize)>> {
        let Some(raw) = self.entries.remove(key) else {
            return Ok(None);
        };
        match parse_pair(&raw) {
            Some((a, b)) if lo <= a && a <= b && b <= hi => Ok(Some((a as usize, b as usize))),
            _ => Err(cfg_err(format!(
                "`{key}` = `{raw}` is out of range: expected a:b with {lo} <= a <= b <= {hi}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_config("kind = kron\nk = 4\nl = 4\nr = 2\nt = 2\nn = 4\ntrials = 5 # few\n").unwrap();
        match cfg.params {
            Params::Kron(p) => {
                assert_eq!(p.tol, 1e-9);
                assert_eq!(p.starts, 20);
                assert!(!p.fresh_matrix);
            }
            _ => panic!("wrong kind"),
        }
        assert_eq!(cfg.master_seed, 0);
    }

    #[test]
    fn negative_trials_names_the_key() {
        let err = parse_config("kind = recover\nm = 20\nn = 4\ns = 3\ntrials = -1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trials") && msg.contains("[1, "), "{msg}");
        let err = parse_config("kind = recover\nm = 20\nn = 4\ns = 3\ntrials = 0\n").unwrap_err();
        assert!(err.to_string().contains("trials"));
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config("kind = nsp\nm = 5\nn = 2\ns = 1\ntrials = 3\nfoo = 1\nbar = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("foo") && msg.contains("bar"), "{msg}");
    }

    #[test]
    fn round_trip_all_kinds() {
        let texts = [
            "kind = dim\nset = cantor\ndepth = 10\nscales = 2:8\nexpect = 0.63\n",
            "kind = dim\nset = csv\ninput = pts.csv\nscales = -1:5\n",
            "kind = nsp\nseed = 3\nm = 10\nn = 3\ns = 2\ntrials = 100\nmin_gain = 0.0001\n",
            "kind = recover\nm = 20\nn = 4\ns = 3\ntrials = 200\nsweep_n = 3:6\noutput = out/rec.csv\n",
            "kind = kron\nk = 6\nl = 6\nr = 2\nt = 2\nn = 4\ntrials = 10\ntol = 1e-10\nfresh_matrix = true\n",
            "kind = collide\nk = 4\nl = 4\nr = 2\nt = 2\nn = 1\nexpect = true\n",
            "kind = interleave\nprecision = 20\n",
        ];
        for t in texts {
            let cfg = parse_config(t).unwrap();
            assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg, "{t}");
        }
    }
}
