//! Run configuration: `key = value` text with `#` comments.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::angular::FilterSettings;
use crate::chart::{FoliationParams, Power};
use crate::error::{Error, Result};
use crate::evolve::EvolutionConfig;
use crate::exactdata::Direction;
use crate::grid::Symmetry;

/// How the initial slice is filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    /// Gaussian shells times harmonics with vanishing time derivative.
    Static,
    /// Exact linear solution sampled at `id.t0`.
    ExactLinear,
}

impl FromStr for InitialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Self::Static),
            "exact-linear" | "exact" => Ok(Self::ExactLinear),
            _ => Err(Error::config(format!("unknown id.kind '{s}' (use 'static' or 'exact-linear')"))),
        }
    }
}

impl std::fmt::Display for InitialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Static => "static",
            Self::ExactLinear => "exact-linear",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Double,
    Extended,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Self::Double),
            "extended" => Ok(Self::Extended),
            _ => Err(Error::config(format!("unknown precision '{s}' (use 'double' or 'extended')"))),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Double => "double",
            Self::Extended => "extended",
        })
    }
}

/// One `(l, m, A)` entry of `id.modes`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeSpec {
    pub l: usize,
    pub m: Option<i32>,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    pub kind: InitialKind,
    pub modes: Vec<ModeSpec>,
    /// Centre of the static Gaussian.
    pub r0: f64,
    /// Width; defaults to 0.07 for static and 1 for exact-linear data.
    pub sigma: Option<f64>,
    /// Time of the exact solution placed on the initial slice.
    pub t0: f64,
    pub direction: Direction,
}

impl InitialData {
    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(match self.kind {
            InitialKind::Static => 0.07,
            InitialKind::ExactLinear => 1.0,
        })
    }

    /// Clock value of the initial slice.
    pub fn start_time(&self) -> f64 {
        match self.kind {
            InitialKind::Static => 0.0,
            InitialKind::ExactLinear => self.t0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub evolution: EvolutionConfig,
    pub initial: InitialData,
    pub extract_radii: Vec<f64>,
    pub extract_lmax: usize,
    pub out_dir: PathBuf,
    pub precision: Precision,
    /// Radial resolutions for the convergence harness; empty means `N_r, 2 N_r, 4 N_r`.
    pub converge_nr: Vec<usize>,
    /// Fraction of the final time over which late-time indices are averaged.
    pub tails_window: f64,
}

const KEYS: &[&str] = &[
    "n",
    "symmetry",
    "C",
    "p",
    "mu",
    "N_r",
    "N_theta",
    "N_phi",
    "eps",
    "lambda",
    "t_end",
    "cadence",
    "blowup",
    "filter.dealias",
    "filter.pole",
    "id.kind",
    "id.modes",
    "id.r0",
    "id.sigma",
    "id.t0",
    "id.direction",
    "extract.radii",
    "extract.lmax",
    "out.dir",
    "precision",
    "converge.N_r",
    "tails.window",
];

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::config(format!("invalid value '{v}' for key '{key}'")))
}

/// Attaches the line number of the offending key to config errors.
fn at<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(msg) if line > 0 => Error::Parse { line, msg },
        e => e,
    })
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::config(format!("invalid value '{v}' for key '{key}' (use true/false)"))),
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

/// `"l,m,A;l,m,A"` with `_` for an absent `m`.
pub fn parse_modes(v: &str) -> Result<Vec<ModeSpec>> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|triple| {
            let parts: Vec<&str> = triple.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::config(format!("mode '{triple}' must be 'l,m,A' (m may be '_')")));
            }
            Ok(ModeSpec {
                l: parse_value("id.modes", parts[0])?,
                m: match parts[1] {
                    "_" => None,
                    m => Some(parse_value("id.modes", m)?),
                },
                amplitude: parse_value("id.modes", parts[2])?,
            })
        })
        .collect()
}

fn render_modes(modes: &[ModeSpec]) -> String {
    modes
        .iter()
        .map(|m| {
            let mm = m.m.map_or("_".to_string(), |v| v.to_string());
            format!("{},{},{:?}", m.l, mm, m.amplitude)
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses and validates a configuration.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut kv: Vec<(usize, String, String)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or(Error::Parse {
                line,
                msg: format!("expected 'key = value', got '{body}'"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key '{k}'"),
                });
            }
            if !seen.insert(k.to_string()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key '{k}'"),
                });
            }
            kv.push((line, k.to_string(), v.to_string()));
        }
        let get = |k: &str| kv.iter().find(|e| e.1 == k).map(|e| (e.0, e.2.as_str()));
        let line_of = |k: &str| get(k).map_or(0, |x| x.0);
        macro_rules! val {
            ($k:expr, $default:expr) => {
                match get($k) {
                    Some((_, v)) => at(line_of($k), parse_value($k, v))?,
                    None => $default,
                }
            };
        }

        let n: usize = match get("n") {
            Some((_, v)) => at(line_of("n"), parse_value("n", v))?,
            None => return Err(Error::config("missing key 'n'")),
        };
        let nr: usize = match get("N_r") {
            Some((_, v)) => at(line_of("N_r"), parse_value("N_r", v))?,
            None => return Err(Error::config("missing key 'N_r'")),
        };
        let symmetry: Symmetry = val!("symmetry", Symmetry::SoReduced);
        let c: f64 = val!("C", n as f64);
        let foliation = at(line_of("C"), FoliationParams::new(n, c).map_err(|e| Error::config(e.to_string())))?;
        let ntheta: usize = val!("N_theta", 8);
        let nphi: Option<usize> = match get("N_phi") {
            Some((_, v)) => Some(at(line_of("N_phi"), parse_value("N_phi", v))?),
            None => None,
        };
        let mut evolution = EvolutionConfig::new(foliation, symmetry, nr, ntheta, nphi);
        evolution.p = match get("p") {
            Some((_, v)) => Some(at(line_of("p"), Power::from_str(v).map_err(|e| Error::config(e.to_string())))?),
            None => None,
        };
        evolution.mu = val!("mu", 0);
        evolution.eps = val!("eps", evolution.eps);
        evolution.lambda = val!("lambda", evolution.lambda);
        evolution.t_end = val!("t_end", 10.0);
        evolution.cadence = val!("cadence", evolution.cadence);
        evolution.blowup_threshold = val!("blowup", evolution.blowup_threshold);
        evolution.filters = FilterSettings {
            dealias: match get("filter.dealias") {
                Some((_, v)) => at(line_of("filter.dealias"), parse_bool("filter.dealias", v))?,
                None => true,
            },
            pole: match get("filter.pole") {
                Some((_, v)) => at(line_of("filter.pole"), parse_bool("filter.pole", v))?,
                None => true,
            },
        };

        let kind: InitialKind = val!("id.kind", InitialKind::Static);
        let modes = match get("id.modes") {
            Some((_, v)) => at(line_of("id.modes"), parse_modes(v))?,
            None => Vec::new(),
        };
        let initial = InitialData {
            kind,
            modes,
            r0: val!("id.r0", 0.3),
            sigma: match get("id.sigma") {
                Some((_, v)) => Some(at(line_of("id.sigma"), parse_value("id.sigma", v))?),
                None => None,
            },
            t0: val!("id.t0", -15.0),
            direction: val!("id.direction", Direction::RegularSum),
        };
        let extract_radii = match get("extract.radii") {
            Some((_, v)) => at(line_of("extract.radii"), parse_list("extract.radii", v))?,
            None => vec![0.5, 1.0],
        };
        let converge_nr = match get("converge.N_r") {
            Some((_, v)) => at(line_of("converge.N_r"), parse_list("converge.N_r", v))?,
            None => Vec::new(),
        };
        let cfg = RunConfig {
            evolution,
            initial,
            extract_radii,
            extract_lmax: val!("extract.lmax", 3),
            out_dir: match get("out.dir") {
                Some((_, v)) => PathBuf::from(v),
                None => PathBuf::from("out"),
            },
            precision: val!("precision", Precision::Double),
            converge_nr,
            tails_window: val!("tails.window", 0.1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every constraint; builds nothing larger than coordinate arrays.
    pub fn validate(&self) -> Result<()> {
        self.evolution.validate()?;
        let grid = self.evolution.grid()?;
        grid.check_stencil_fit()?;
        if self.precision == Precision::Extended {
            return Err(Error::config("precision = extended is not supported by this build; use double"));
        }
        let id = &self.initial;
        if id.modes.is_empty() {
            return Err(Error::config("missing key 'id.modes' (at least one mode)"));
        }
        for m in &id.modes {
            match (self.evolution.symmetry, m.m) {
                (Symmetry::SoReduced, Some(_)) => {
                    return Err(Error::config(format!("mode l = {} has an m index but the grid is SO-reduced", m.l)))
                }
                (Symmetry::Full3D, None) => {
                    return Err(Error::config(format!("mode l = {} needs an m index on the full grid", m.l)))
                }
                (_, Some(mm)) if mm.unsigned_abs() as usize > m.l => {
                    return Err(Error::config(format!("|m| = {} exceeds l = {}", mm.abs(), m.l)))
                }
                _ => {}
            }
            if id.kind == InitialKind::ExactLinear && (m.l > 2 || !matches!(grid.n(), 3 | 5)) {
                return Err(Error::config(format!(
                    "exact linear data exist for n in {{3, 5}} and l <= 2 (got n = {}, l = {})",
                    grid.n(),
                    m.l
                )));
            }
        }
        if id.kind == InitialKind::ExactLinear && self.evolution.mu != 0 {
            return Err(Error::config("exact-linear initial data require mu = 0"));
        }
        if !(id.sigma() > 0.0) {
            return Err(Error::config("id.sigma must be positive"));
        }
        if self.extract_radii.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::config("extraction radii must lie in [0, 1]"));
        }
        if self.converge_nr.iter().any(|&n| n % 2 != 0 || n < 8) {
            return Err(Error::config("converge.N_r entries must be even and at least 8"));
        }
        if !(self.tails_window > 0.0 && self.tails_window < 1.0) {
            return Err(Error::config("tails.window must lie in (0, 1)"));
        }
        if self.evolution.t_end < id.start_time() {
            return Err(Error::config(format!(
                "t_end = {} precedes the initial time {}",
                self.evolution.t_end,
                id.start_time()
            )));
        }
        Ok(())
    }

    /// Every key with its value, one per line; `parse(render(c)) == c`.
    pub fn render(&self) -> String {
        let e = &self.evolution;
        let id = &self.initial;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n", e.foliation.n().to_string());
        kv("symmetry", e.symmetry.to_string());
        kv("C", format!("{:?}", e.foliation.c()));
        if let Some(p) = e.p {
            kv("p", p.to_string());
        }
        kv("mu", e.mu.to_string());
        kv("N_r", e.nr.to_string());
        kv("N_theta", e.ntheta.to_string());
        if let Some(np) = e.nphi {
            kv("N_phi", np.to_string());
        }
        kv("eps", format!("{:?}", e.eps));
        kv("lambda", format!("{:?}", e.lambda));
        kv("t_end", format!("{:?}", e.t_end));
        kv("cadence", e.cadence.to_string());
        kv("blowup", format!("{:?}", e.blowup_threshold));
        kv("filter.dealias", e.filters.dealias.to_string());
        kv("filter.pole", e.filters.pole.to_string());
        kv("id.kind", id.kind.to_string());
        kv("id.modes", render_modes(&id.modes));
        kv("id.r0", format!("{:?}", id.r0));
        if let Some(sg) = id.sigma {
            kv("id.sigma", format!("{sg:?}"));
        }
        kv("id.t0", format!("{:?}", id.t0));
        kv("id.direction", id.direction.to_string());
        kv("extract.radii", join(&self.extract_radii));
        kv("extract.lmax", self.extract_lmax.to_string());
        kv("out.dir", self.out_dir.display().to_string());
        kv("precision", self.precision.to_string());
        if !self.converge_nr.is_empty() {
            kv("converge.N_r", join(&self.converge_nr));
        }
        kv("tails.window", format!("{:?}", self.tails_window));
        s
    }

    /// Radial resolutions used by the convergence harness.
    pub fn convergence_resolutions(&self) -> Vec<usize> {
        if self.converge_nr.is_empty() {
            let n = self.evolution.nr;
            vec![n, 2 * n, 4 * n]
        } else {
            self.converge_nr.clone()
        }
    }
}
