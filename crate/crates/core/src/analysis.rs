//! Mode extraction, local power indices, power-law fits and tail reports.

use std::fmt::{self, Write as _};

use crate::angular::{dealias_cutoff, AngularOps, FilterSettings};
use crate::chart::Power;
use crate::error::{Error, Result};
use crate::evolve::{Evolver, Sink, State};
use crate::exactdata::spherical_harmonic;
use crate::grid::{Grid, Symmetry};

/// Amplitudes below this are excluded from log-derivatives.
pub const AMPLITUDE_FLOOR: f64 = 1e-13;
/// Standard deviation below which the local power index counts as a plateau.
pub const PLATEAU_STD: f64 = 0.1;
/// Minimum number of samples for a power-law fit.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Harmonic label `(l, m)`; `m` is absent under SO(n-1) symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub l: usize,
    pub m: Option<i32>,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            Some(m) => write!(f, "l{}m{}", self.l, m),
            None => write!(f, "l{}", self.l),
        }
    }
}

/// Precomputed projections of shells onto real harmonics.
///
/// The overlap of a nodal shell with `Y_lm` is `sum_q Y_lm(q) s_q u_q`, where
/// `s_q` are the exact sphere-quadrature weights of the collocation grid. For
/// band-limited shells this equals the integral of the truncated expansion.
#[derive(Clone, Debug)]
pub struct ModeExtractor {
    grid: Grid,
    radius_index: Vec<usize>,
    modes: Vec<ModeLabel>,
    weights: Vec<Vec<f64>>,
    warnings: Vec<String>,
}

impl ModeExtractor {
    pub fn new(grid: &Grid, radii: &[f64], lmax: usize) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::config("at least one extraction radius is required"));
        }
        let mut radius_index = Vec::with_capacity(radii.len());
        for &r in radii {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::config(format!("extraction radius {r} outside [0, 1]")));
            }
            radius_index.push(grid.nearest_radial_index(r));
        }
        let mut warnings = Vec::new();
        let cut = dealias_cutoff(grid.ntheta());
        if lmax >= cut {
            warnings.push(format!(
                "l_max = {lmax} lies beyond the dealiased band (l < {cut}); those modes are filtered to zero"
            ));
        }
        let modes: Vec<ModeLabel> = (0..=lmax)
            .flat_map(|l| match grid.symmetry() {
                Symmetry::SoReduced => vec![ModeLabel { l, m: None }],
                Symmetry::Full3D => (-(l as i32)..=l as i32).map(|m| ModeLabel { l, m: Some(m) }).collect(),
            })
            .collect();

        let ops = AngularOps::new(grid, FilterSettings::default())?;
        let plane = grid.shape().plane();
        let mut e = vec![0.0; plane];
        let node_w: Vec<f64> = (0..plane)
            .map(|q| {
                e.fill(0.0);
                e[q] = 1.0;
                ops.sphere_integral(&e)
            })
            .collect();
        let mut weights = Vec::with_capacity(modes.len());
        for mode in &modes {
            let mut w = Vec::with_capacity(plane);
            for &th in grid.theta() {
                for &ph in grid.phi() {
                    w.push(spherical_harmonic(grid.n(), mode.l, mode.m, th, ph)?);
                }
            }
            w.iter_mut().zip(&node_w).for_each(|(a, b)| *a *= b);
            weights.push(w);
        }
        Ok(Self {
            grid: grid.clone(),
            radius_index,
            modes,
            weights,
            warnings,
        })
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    /// Radii actually used (grid nodes).
    pub fn radii(&self) -> Vec<f64> {
        self.radius_index.iter().map(|&i| self.grid.r()[i]).collect()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Overlaps of one shell with every mode.
    pub fn project_shell(&self, shell: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(shell).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Mode amplitudes `[radius][mode]` of `state.phi`.
    pub fn extract(&self, state: &State) -> Vec<Vec<f64>> {
        self.radius_index
            .iter()
            .map(|&i| self.project_shell(state.phi.shell(i)))
            .collect()
    }
}

/// Time series of one mode at one extraction radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSeries {
    pub mode: ModeLabel,
    pub radius: f64,
    pub samples: Vec<(f64, f64)>,
}

impl ModeSeries {
    pub fn new(mode: ModeLabel, radius: f64) -> Self {
        Self {
            mode,
            radius,
            samples: Vec::new(),
        }
    }

    /// Appends a sample; times must increase strictly.
    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&(last, _)) = self.samples.last() {
            if t <= last {
                return Err(Error::Analysis(format!("sample time {t} does not exceed {last}")));
            }
        }
        self.samples.push((t, v));
        Ok(())
    }
}

/// Sink recording every mode at every extraction radius.
#[derive(Debug)]
pub struct ModeRecorder {
    extractor: ModeExtractor,
    /// `[radius][mode]`.
    pub series: Vec<Vec<ModeSeries>>,
}

impl ModeRecorder {
    pub fn new(extractor: ModeExtractor) -> Self {
        let series = extractor
            .radii()
            .into_iter()
            .map(|r| extractor.modes().iter().map(|&m| ModeSeries::new(m, r)).collect())
            .collect();
        Self { extractor, series }
    }

    pub fn extractor(&self) -> &ModeExtractor {
        &self.extractor
    }

    pub fn record(&mut self, state: &State) -> Result<()> {
        for (per_r, vals) in self.series.iter_mut().zip(self.extractor.extract(state)) {
            for (s, v) in per_r.iter_mut().zip(vals) {
                s.push(state.time, v)?;
            }
        }
        Ok(())
    }

    /// Series of `mode` at the extraction radius nearest `radius`.
    pub fn find(&self, mode: ModeLabel, radius: f64) -> Option<&ModeSeries> {
        let per_r = self.series.iter().min_by(|a, b| {
            let da = (a[0].radius - radius).abs();
            let db = (b[0].radius - radius).abs();
            da.total_cmp(&db)
        })?;
        per_r.iter().find(|s| s.mode == mode)
    }
}

impl Sink for ModeRecorder {
    fn observe(&mut self, _: &Evolver, state: &State, _: usize) -> Result<()> {
        self.record(state)
    }
}

/// Sampled local power index with the intervals where the amplitude was too small.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LocalPowerIndex {
    pub samples: Vec<(f64, f64)>,
    pub gaps: Vec<(f64, f64)>,
}

impl LocalPowerIndex {
    /// Mean of the index over `t >= t_from`.
    pub fn mean_after(&self, t_from: f64) -> Option<f64> {
        let v: Vec<f64> = self.samples.iter().filter(|s| s.0 >= t_from).map(|s| s.1).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// `q(t) = -d ln|u| / d ln t` by three-point centred differences in `ln t`.
/// Samples with `t <= 0` or `|u| <= floor` are dropped and recorded as gaps;
/// differences never straddle a gap.
pub fn local_power_index(series: &ModeSeries, floor: f64) -> LocalPowerIndex {
    let mut out = LocalPowerIndex::default();
    let mut run: Vec<(f64, f64)> = Vec::new();
    let mut gap_start: Option<f64> = None;
    let flush = |run: &mut Vec<(f64, f64)>, out: &mut LocalPowerIndex| {
        for w in run.windows(3) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let (x2, y2) = w[2];
            let (h0, h1) = (x1 - x0, x2 - x1);
            // second-order derivative on a non-uniform stencil
            let d = -h1 / (h0 * (h0 + h1)) * y0 + (h1 - h0) / (h0 * h1) * y1 + h0 / (h1 * (h0 + h1)) * y2;
            out.samples.push((x1.exp(), -d));
        }
        run.clear();
    };
    for &(t, u) in &series.samples {
        if t > 0.0 && u.abs() > floor && u.is_finite() {
            if let Some(g) = gap_start.take() {
                out.gaps.push((g, t));
            }
            run.push((t.ln(), u.abs().ln()));
        } else if t > 0.0 {
            gap_start.get_or_insert(t);
            flush(&mut run, &mut out);
        }
    }
    if let (Some(g), Some(&(t, _))) = (gap_start, series.samples.last()) {
        out.gaps.push((g, t));
    }
    flush(&mut run, &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMethod {
    LpiPlateau,
    LsFit,
}

impl fmt::Display for TailMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailMethod::LpiPlateau => "lpi-plateau",
            TailMethod::LsFit => "ls-fit",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEstimate {
    pub q: f64,
    pub window: (f64, f64),
    pub method: TailMethod,
    pub uncertainty: f64,
}

/// Least-squares slope of `ln|u|` against `ln t` over `window`.
pub fn powerlaw_fit(series: &ModeSeries, window: (f64, f64)) -> Result<TailEstimate> {
    let (ta, tb) = window;
    if !(ta > 0.0 && ta < tb) {
        return Err(Error::Analysis(format!("invalid fit window ({ta}, {tb})")));
    }
    let pts: Vec<(f64, f64)> = series.samples.iter().copied().filter(|s| s.0 >= ta && s.0 <= tb).collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Analysis(format!(
            "power-law fit needs at least {MIN_FIT_SAMPLES} samples in the window, got {}",
            pts.len()
        )));
    }
    if let Some(&(t, u)) = pts.iter().find(|s| !(s.1.abs() > AMPLITUDE_FLOOR)) {
        return Err(Error::Analysis(format!("amplitude {u:e} at t = {t} is below the floor")));
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(t, u)| (t.ln(), u.abs().ln())).collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let q = -sxy / sxx;
    let lpi = local_power_index(series, AMPLITUDE_FLOOR);
    let uncertainty = lpi
        .samples
        .iter()
        .filter(|s| s.0 >= ta && s.0 <= tb)
        .map(|s| (s.1 - q).abs())
        .fold(0.0, f64::max);
    Ok(TailEstimate {
        q,
        window,
        method: TailMethod::LsFit,
        uncertainty,
    })
}

/// Plateau of the local power index over the last decade of time, if its
/// standard deviation there is below [`PLATEAU_STD`].
pub fn lpi_plateau(lpi: &LocalPowerIndex) -> Option<TailEstimate> {
    lpi_plateau_over(lpi, 0.1)
}

/// Plateau over `[fraction * t_end, t_end]`.
pub fn lpi_plateau_over(lpi: &LocalPowerIndex, fraction: f64) -> Option<TailEstimate> {
    let t_end = lpi.samples.last()?.0;
    let window = (t_end * fraction, t_end);
    let v: Vec<f64> = lpi.samples.iter().filter(|s| s.0 >= window.0).map(|s| s.1).collect();
    if v.len() < 3 {
        return None;
    }
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    let std = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / k).sqrt();
    if std >= PLATEAU_STD {
        return None;
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    Some(TailEstimate {
        q: mean,
        window,
        method: TailMethod::LpiPlateau,
        uncertainty: 0.5 * (hi - lo),
    })
}

/// Plateau estimate when one exists, otherwise a fit over the last decade.
pub fn tail_estimate(series: &ModeSeries) -> Result<TailEstimate> {
    tail_estimate_over(series, 0.1)
}

/// As [`tail_estimate`] over `[fraction * t_end, t_end]`.
pub fn tail_estimate_over(series: &ModeSeries, fraction: f64) -> Result<TailEstimate> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Analysis(format!("window fraction {fraction} outside (0, 1)")));
    }
    let lpi = local_power_index(series, AMPLITUDE_FLOOR);
    if let Some(p) = lpi_plateau_over(&lpi, fraction) {
        return Ok(p);
    }
    let t_end = series
        .samples
        .last()
        .map(|s| s.0)
        .ok_or_else(|| Error::Analysis("empty series".into()))?;
    powerlaw_fit(series, (t_end * fraction, t_end))
}

/// Decay exponents predicted by the conjectured formulas, `(finite radius, scri)`.
/// Defined for integer `p` and `n` in {3, 5}.
pub fn conjectured_rates(n: usize, p: i64, l: usize) -> Option<(i64, i64)> {
    let l = l as i64;
    match n {
        3 => Some(((l + p - 1).max(2 * l + 2), (p - 2).max(l + 1))),
        5 => Some(((l + p + 2).max(2 * l + 4), p.max(l + 2))),
        _ => None,
    }
}

/// One measured table entry; `uncertain` marks values reported as doubtful.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableValue {
    pub q: i64,
    pub uncertain: bool,
}

/// Reference decay rates `(finite radius, scri)` measured under SO(n-1) symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub n: usize,
    pub p: i64,
    pub l: usize,
    pub finite: TableValue,
    pub scri: TableValue,
}

const fn e(n: usize, p: i64, l: usize, f: i64, fu: bool, s: i64, su: bool) -> TableEntry {
    TableEntry {
        n,
        p,
        l,
        finite: TableValue { q: f, uncertain: fu },
        scri: TableValue { q: s, uncertain: su },
    }
}

/// Reference decay-rate table.
pub const DECAY_TABLE: [TableEntry; 28] = [
    e(3, 3, 0, 2, false, 1, false),
    e(3, 3, 1, 4, false, 2, false),
    e(3, 3, 2, 6, false, 3, false),
    e(3, 3, 3, 8, false, 4, false),
    e(3, 4, 0, 3, false, 2, false),
    e(3, 4, 1, 4, false, 2, false),
    e(3, 4, 2, 6, false, 3, false),
    e(3, 4, 3, 8, false, 4, false),
    e(3, 5, 0, 4, false, 3, false),
    e(3, 5, 1, 5, false, 3, false),
    e(3, 5, 2, 6, false, 3, false),
    e(3, 5, 3, 8, false, 4, false),
    e(3, 6, 0, 5, false, 4, false),
    e(3, 6, 1, 6, false, 4, false),
    e(3, 6, 2, 7, false, 4, false),
    e(3, 6, 3, 8, true, 4, false),
    e(3, 7, 0, 6, false, 5, false),
    e(3, 7, 1, 7, false, 5, false),
    e(3, 7, 2, 8, false, 5, false),
    e(3, 7, 3, 9, true, 5, true),
    e(5, 2, 0, 4, false, 2, false),
    e(5, 2, 1, 6, false, 3, false),
    e(5, 2, 2, 8, false, 4, false),
    e(5, 2, 3, 10, false, 5, false),
    e(5, 3, 0, 5, false, 3, false),
    e(5, 3, 1, 6, false, 3, false),
    e(5, 3, 2, 8, true, 4, false),
    e(5, 3, 3, 10, true, 5, false),
];

pub fn table_entry(n: usize, p: i64, l: usize) -> Option<TableEntry> {
    DECAY_TABLE.iter().copied().find(|t| t.n == n && t.p == p && t.l == l)
}

/// Measured exponents of one mode in one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRun {
    pub n: usize,
    pub p: Power,
    pub mu: i8,
    pub l: usize,
    pub q_finite: Option<f64>,
    pub q_scri: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Agrees,
    Mismatch,
    /// Reference value marked uncertain; shown but never a failure.
    Informational,
    NoReference,
    NotMeasured,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Agrees => "ok",
            Verdict::Mismatch => "MISMATCH",
            Verdict::Informational => "info",
            Verdict::NoReference => "-",
            Verdict::NotMeasured => "n/a",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRow {
    pub run: TailRun,
    pub conjecture: Option<(i64, i64)>,
    pub table: Option<TableEntry>,
    pub finite: Verdict,
    pub scri: Verdict,
}

fn verdict(measured: Option<f64>, reference: Option<TableValue>, tol: f64) -> Verdict {
    match (measured, reference) {
        (None, _) => Verdict::NotMeasured,
        (Some(_), None) => Verdict::NoReference,
        (Some(_), Some(r)) if r.uncertain => Verdict::Informational,
        (Some(q), Some(r)) if (q - r.q as f64).abs() <= tol => Verdict::Agrees,
        _ => Verdict::Mismatch,
    }
}

/// Compares measured exponents with the reference table (within `tol`) and the conjectured formulas.
pub fn tail_report(runs: &[TailRun], tol: f64) -> Vec<TailRow> {
    runs.iter()
        .map(|run| {
            let p_int = run.p.as_integer();
            let table = p_int.and_then(|p| table_entry(run.n, p, run.l));
            let conjecture = p_int.and_then(|p| conjectured_rates(run.n, p, run.l));
            TailRow {
                run: *run,
                conjecture,
                table,
                finite: verdict(run.q_finite, table.map(|t| t.finite), tol),
                scri: verdict(run.q_scri, table.map(|t| t.scri), tol),
            }
        })
        .collect()
}

/// Plain-text rendering of a tail report.
pub fn render_tail_report(rows: &[TailRow]) -> String {
    let fmt_q = |q: Option<f64>| q.map_or("-".to_string(), |v| format!("{v:.3}"));
    let fmt_t = |v: TableValue| format!("{}{}", v.q, if v.uncertain { "?" } else { "" });
    let mut s = String::from("n,p,mu,l,q_finite,q_scri,table_finite,table_scri,conj_finite,conj_scri,check_finite,check_scri\n");
    for r in rows {
        let (tf, ts) = r.table.map_or(("-".into(), "-".into()), |t| (fmt_t(t.finite), fmt_t(t.scri)));
        let (cf, cs) = r.conjecture.map_or(("-".into(), "-".into()), |(a, b)| (a.to_string(), b.to_string()));
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run.n,
            r.run.p,
            r.run.mu,
            r.run.l,
            fmt_q(r.run.q_finite),
            fmt_q(r.run.q_scri),
            tf,
            ts,
            cf,
            cs,
            r.finite,
            r.scri
        );
    }
    s
}
