//! Experiment drivers behind the command-line tool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::analysis::{
    local_power_index, render_tail_report, tail_estimate_over, tail_report, ModeExtractor, ModeLabel, ModeRecorder,
    ModeSeries, TailEstimate, TailRow, TailRun, AMPLITUDE_FLOOR,
};
use crate::config::{InitialKind, RunConfig};
use crate::diagnostics::{Diagnostics, EnergyMonitor, EnergyRecord};
use crate::error::{Error, Result};
use crate::evolve::{evolve_run, static_initial_data, Evolver, Sink, State, StaticMode, Termination};
use crate::exactdata::{exact_linear_state, LinearMode, ModeFunction};
use crate::output::{config_echo, fmt_f64, write_snapshot, CsvTable};

/// Tolerance on measured exponents when comparing against the reference table.
pub const TAIL_TOLERANCE: f64 = 0.2;

/// Exact linear modes described by the configuration.
pub fn linear_modes(cfg: &RunConfig) -> Result<Vec<LinearMode>> {
    cfg.initial
        .modes
        .iter()
        .map(|m| {
            Ok(LinearMode {
                l: m.l,
                m: m.m,
                direction: cfg.initial.direction,
                profile: ModeFunction::new(m.amplitude, cfg.initial.sigma())?,
            })
        })
        .collect()
}

/// Initial slice for `cfg`, projected onto the evolved function space.
pub fn initial_state(cfg: &RunConfig, ev: &mut Evolver) -> Result<State> {
    let grid = ev.grid().clone();
    let mut s = match cfg.initial.kind {
        InitialKind::Static => {
            let modes: Vec<StaticMode> = cfg
                .initial
                .modes
                .iter()
                .map(|m| StaticMode {
                    l: m.l,
                    m: m.m,
                    amplitude: m.amplitude,
                })
                .collect();
            static_initial_data(&modes, cfg.initial.r0, cfg.initial.sigma(), &grid)?
        }
        InitialKind::ExactLinear => {
            exact_linear_state(cfg.initial.t0, &grid, &cfg.evolution.foliation, &linear_modes(cfg)?)?
        }
    };
    s.time = cfg.initial.start_time();
    ev.project(&mut s);
    Ok(s)
}

/// Energy and mode amplitudes at every diagnostic sample.
#[derive(Debug)]
pub struct Recorder {
    pub energy: EnergyMonitor,
    pub modes: ModeRecorder,
}

impl Recorder {
    pub fn new(cfg: &RunConfig, ev: &Evolver) -> Result<Self> {
        let e = &cfg.evolution;
        let diag = Diagnostics::new(ev.grid(), e.foliation, e.mu, e.p)?;
        let extractor = ModeExtractor::new(ev.grid(), &cfg.extract_radii, cfg.extract_lmax)?;
        Ok(Self {
            energy: EnergyMonitor::new(diag),
            modes: ModeRecorder::new(extractor),
        })
    }

    /// `t, E, Epot, dFdt, Fcum, residual`, then one column per mode and radius.
    pub fn table(&self, cfg: &RunConfig) -> Result<CsvTable> {
        let mut cols: Vec<String> = ["t", "E", "Epot", "dFdt", "Fcum", "residual"].iter().map(|s| s.to_string()).collect();
        for (per_r, r) in self.modes.series.iter().zip(&cfg.extract_radii) {
            for s in per_r {
                cols.push(format!("phi_{}_r{r}", s.mode));
            }
        }
        let mut t = CsvTable::new(cols);
        for (k, rec) in self.energy.records.iter().enumerate() {
            let mut row = vec![rec.time, rec.energy, rec.potential, rec.flux_rate, rec.flux_cum, rec.residual];
            for s in self.modes.series.iter().flatten() {
                row.push(s.samples[k].1);
            }
            t.push(row)?;
        }
        Ok(t)
    }
}

impl Sink for Recorder {
    fn observe(&mut self, ev: &Evolver, state: &State, step: usize) -> Result<()> {
        self.energy.observe(ev, state, step)?;
        self.modes.observe(ev, state, step)
    }
}

/// Outcome of one evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub termination: Termination,
    pub steps: usize,
    pub dt: f64,
    pub final_time: f64,
    pub wall: Duration,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} after {} steps of dt = {:.6e}, t~ = {}, wall {:.2?}",
            self.termination, self.steps, self.dt, self.final_time, self.wall
        )
    }
}

fn prepare_out(out: Option<&Path>) -> Result<Option<PathBuf>> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.to_path_buf()))
        }
        None => Ok(None),
    }
}

fn write_text(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, text)?;
    files.push(p);
    Ok(())
}

fn write_table(dir: &Path, name: &str, table: &CsvTable, echo: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    table.write(&p, echo)?;
    files.push(p);
    Ok(())
}

/// Runs `cfg` once with the standard recorder.
fn run_recorded(cfg: &RunConfig) -> Result<(Evolver, Recorder, State, RunSummary)> {
    let mut ev = Evolver::new(cfg.evolution.clone())?;
    let s0 = initial_state(cfg, &mut ev)?;
    let mut rec = Recorder::new(cfg, &ev)?;
    let res = evolve_run(&mut ev, s0, &mut [&mut rec])?;
    let summary = RunSummary {
        termination: res.termination,
        steps: res.steps,
        dt: res.dt,
        final_time: res.state.time,
        wall: res.wall,
    };
    Ok((ev, rec, res.state, summary))
}

#[derive(Debug)]
pub struct EvolveReport {
    pub run: RunSummary,
    pub energy: Vec<EnergyRecord>,
    /// `[radius][mode]`.
    pub series: Vec<Vec<ModeSeries>>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Evolves `cfg`, writing `timeseries.csv` and `final.hypw` into `out`.
pub fn cmd_evolve(cfg: &RunConfig, out: Option<&Path>) -> Result<EvolveReport> {
    let (ev, rec, state, run) = run_recorded(cfg)?;
    let mut files = Vec::new();
    if let Some(dir) = prepare_out(out)? {
        write_table(&dir, "timeseries.csv", &rec.table(cfg)?, &config_echo(cfg), &mut files)?;
        let p = dir.join("final.hypw");
        write_snapshot(&p, ev.grid(), &state)?;
        files.push(p);
    }
    Ok(EvolveReport {
        run,
        warnings: rec.modes.extractor().warnings().to_vec(),
        energy: rec.energy.records,
        series: rec.modes.series,
        files,
    })
}

/// L² distance to the exact linear solution at every sample.
struct ErrorSink {
    diag: Diagnostics,
    modes: Vec<LinearMode>,
    errors: Vec<(f64, f64)>,
}

impl Sink for ErrorSink {
    fn observe(&mut self, ev: &Evolver, state: &State, _: usize) -> Result<()> {
        let exact = exact_linear_state(state.time, ev.grid(), &ev.config().foliation, &self.modes)?;
        self.errors.push((state.time, self.diag.l2_error(state, &exact)));
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub nr: usize,
    pub h: f64,
    pub error_final: f64,
    pub error_max: f64,
    /// Observed order against the previous resolution.
    pub order_final: Option<f64>,
    pub order_max: Option<f64>,
    pub run: RunSummary,
    pub errors: Vec<(f64, f64)>,
}

#[derive(Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub files: Vec<PathBuf>,
}

impl ConvergenceReport {
    pub fn table(&self) -> String {
        let mut s = String::from("N_r,h,err_final,err_max,order_final,order_max\n");
        let o = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.nr,
                fmt_f64(r.h),
                fmt_f64(r.error_final),
                fmt_f64(r.error_max),
                o(r.order_final),
                o(r.order_max)
            );
        }
        s
    }
}

/// Observed order from errors at two spacings.
pub fn observed_order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Same exact linear data at each resolution; L² errors and pairwise orders.
pub fn cmd_converge(cfg: &RunConfig, out: Option<&Path>) -> Result<ConvergenceReport> {
    if cfg.initial.kind != InitialKind::ExactLinear {
        return Err(Error::config("converge needs id.kind = exact-linear"));
    }
    let resolutions = cfg.convergence_resolutions();
    let base_nr = resolutions[0];
    let modes = linear_modes(cfg)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &nr in &resolutions {
        let mut evo = cfg.evolution.clone();
        evo.nr = nr;
        evo.cadence = (cfg.evolution.cadence * nr).div_ceil(base_nr);
        let mut ev = Evolver::new(evo)?;
        let c = RunConfig {
            evolution: ev.config().clone(),
            ..cfg.clone()
        };
        let s0 = initial_state(&c, &mut ev)?;
        let mut sink = ErrorSink {
            diag: Diagnostics::new(ev.grid(), c.evolution.foliation, 0, None)?,
            modes: modes.clone(),
            errors: Vec::new(),
        };
        let res = evolve_run(&mut ev, s0, &mut [&mut sink])?;
        let h = ev.grid().hr();
        let error_final = sink.errors.last().map_or(f64::NAN, |e| e.1);
        let error_max = sink.errors.iter().map(|e| e.1).fold(0.0, f64::max);
        let (order_final, order_max) = match rows.last() {
            Some(p) => (
                Some(observed_order(p.error_final, error_final, p.h, h)),
                Some(observed_order(p.error_max, error_max, p.h, h)),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            nr,
            h,
            error_final,
            error_max,
            order_final,
            order_max,
            run: RunSummary {
                termination: res.termination,
                steps: res.steps,
                dt: res.dt,
                final_time: res.state.time,
                wall: res.wall,
            },
            errors: sink.errors,
        });
    }
    let mut report = ConvergenceReport { rows, files: Vec::new() };
    if let Some(dir) = prepare_out(out)? {
        let echo = config_echo(cfg);
        let mut files = Vec::new();
        write_text(&dir, "convergence.csv", &format!("{echo}{}", report.table()), &mut files)?;
        for r in &report.rows {
            let mut t = CsvTable::new(vec!["t".into(), "l2_error".into()]);
            for &(time, e) in &r.errors {
                t.push(vec![time, e])?;
            }
            write_table(&dir, &format!("errors_nr{}.csv", r.nr), &t, &echo, &mut files)?;
        }
        report.files = files;
    }
    Ok(report)
}

#[derive(Debug)]
pub struct EnergyReport {
    pub run: RunSummary,
    pub records: Vec<EnergyRecord>,
    pub max_relative_residual: f64,
    /// Cumulative flux never increases.
    pub flux_monotone: bool,
    /// `|E_pot / E|` at the last sample.
    pub final_potential_fraction: f64,
    pub files: Vec<PathBuf>,
}

impl EnergyReport {
    pub fn summary(&self) -> String {
        let e0 = self.records.first().map_or(f64::NAN, |r| r.energy);
        format!(
            "{}\nE(0) = {}\nmax |E - F - E(0)| / |E(0)| = {:.3e}\nflux monotone: {}\nfinal |Epot / E| = {:.3e}\n",
            self.run,
            fmt_f64(e0),
            self.max_relative_residual,
            self.flux_monotone,
            self.final_potential_fraction
        )
    }
}

/// Energy, flux and balance residual series.
pub fn cmd_energy_balance(cfg: &RunConfig, out: Option<&Path>) -> Result<EnergyReport> {
    let (_, rec, _, run) = run_recorded(cfg)?;
    let records = rec.energy.records.clone();
    let flux_monotone = records.windows(2).all(|w| w[1].flux_cum <= w[0].flux_cum);
    let final_potential_fraction = records.last().map_or(f64::NAN, |r| (r.potential / r.energy).abs());
    let mut report = EnergyReport {
        run,
        max_relative_residual: rec.energy.max_relative_residual(),
        flux_monotone,
        final_potential_fraction,
        records,
        files: Vec::new(),
    };
    if let Some(dir) = prepare_out(out)? {
        let echo = config_echo(cfg);
        let mut files = Vec::new();
        write_table(&dir, "timeseries.csv", &rec.table(cfg)?, &echo, &mut files)?;
        write_text(&dir, "energy_summary.txt", &format!("{echo}{}", report.summary()), &mut files)?;
        report.files = files;
    }
    Ok(report)
}

/// Decay estimate of one mode at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTail {
    pub mode: ModeLabel,
    pub radius: f64,
    pub estimate: Option<TailEstimate>,
    /// Why no estimate was produced.
    pub note: Option<String>,
}

#[derive(Debug)]
pub struct TailsReport {
    pub run: RunSummary,
    pub series: Vec<Vec<ModeSeries>>,
    pub tails: Vec<ModeTail>,
    pub rows: Vec<TailRow>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl TailsReport {
    pub fn find(&self, mode: ModeLabel, radius: f64) -> Option<&ModeTail> {
        self.tails
            .iter()
            .filter(|t| t.mode == mode)
            .min_by(|a, b| (a.radius - radius).abs().total_cmp(&(b.radius - radius).abs()))
    }

    pub fn table(&self) -> String {
        let mut s = String::from("mode,radius,q,method,window_start,window_end,uncertainty,note\n");
        for t in &self.tails {
            let _ = match &t.estimate {
                Some(e) => writeln!(
                    s,
                    "{},{},{:.4},{},{},{},{:.4},",
                    t.mode, t.radius, e.q, e.method, e.window.0, e.window.1, e.uncertainty
                ),
                None => writeln!(s, "{},{},-,-,-,-,-,{}", t.mode, t.radius, t.note.as_deref().unwrap_or("")),
            };
        }
        s
    }
}

/// Mode series, local power indices and the comparison table.
pub fn cmd_tails(cfg: &RunConfig, out: Option<&Path>) -> Result<TailsReport> {
    let (_, rec, _, run) = run_recorded(cfg)?;
    let radii = rec.modes.extractor().radii();
    let mut tails = Vec::new();
    for s in rec.modes.series.iter().flatten() {
        let (estimate, note) = match tail_estimate_over(s, cfg.tails_window) {
            Ok(e) => (Some(e), None),
            Err(e) => (None, Some(e.to_string())),
        };
        tails.push(ModeTail {
            mode: s.mode,
            radius: s.radius,
            estimate,
            note,
        });
    }
    let e = &cfg.evolution;
    let scri = radii.iter().position(|&r| r == 1.0);
    let finite = radii.iter().position(|&r| r < 1.0);
    let q_at = |ri: Option<usize>, mode: ModeLabel| {
        let r = radii[ri?];
        tails.iter().find(|t| t.mode == mode && t.radius == r)?.estimate.map(|e| e.q)
    };
    let mut runs = Vec::new();
    if let (Some(p), true) = (e.p, e.mu != 0) {
        for l in 0..=cfg.extract_lmax {
            let mode = ModeLabel {
                l,
                m: rec.modes.series[0].iter().find(|s| s.mode.l == l).and_then(|s| s.mode.m.map(|_| 0)),
            };
            runs.push(TailRun {
                n: e.foliation.n(),
                p,
                mu: e.mu,
                l,
                q_finite: q_at(finite, mode),
                q_scri: q_at(scri, mode),
            });
        }
    }
    let rows = tail_report(&runs, TAIL_TOLERANCE);
    let mut report = TailsReport {
        run,
        series: rec.modes.series.clone(),
        tails,
        rows,
        warnings: rec.modes.extractor().warnings().to_vec(),
        files: Vec::new(),
    };
    if let Some(dir) = prepare_out(out)? {
        let echo = config_echo(cfg);
        let mut files = Vec::new();
        write_table(&dir, "timeseries.csv", &rec.table(cfg)?, &echo, &mut files)?;
        let lpi_dir = dir.join("lpi");
        fs::create_dir_all(&lpi_dir)?;
        for (per_r, r) in report.series.iter().zip(&cfg.extract_radii) {
            for s in per_r {
                let lpi = local_power_index(s, AMPLITUDE_FLOOR);
                let mut t = CsvTable::new(vec!["t".into(), "q".into()]);
                for &(time, q) in &lpi.samples {
                    t.push(vec![time, q])?;
                }
                write_table(&lpi_dir, &format!("lpi_{}_r{r}.csv", s.mode), &t, &echo, &mut files)?;
            }
        }
        write_text(&dir, "tails.csv", &format!("{echo}{}", report.table()), &mut files)?;
        write_text(&dir, "tail_report.csv", &format!("{echo}{}", render_tail_report(&report.rows)), &mut files)?;
        report.files = files;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::{read_snapshot, CsvTable};

    fn small(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn evolve_writes_series_and_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small("n = 3\nN_r = 24\nN_theta = 6\nt_end = 0.2\ncadence = 5\nid.modes = 0,_,1;2,_,0.5\nid.sigma = 0.2\n");
        let rep = cmd_evolve(&cfg, Some(dir.path())).unwrap();
        assert_eq!(rep.run.termination, Termination::Completed);
        assert!((rep.run.final_time - 0.2).abs() < 1e-12);
        let text = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
        assert!(text.starts_with("# n = 3\n"));
        let t = CsvTable::parse(&text).unwrap();
        assert_eq!(&t.columns[..6], ["t", "E", "Epot", "dFdt", "Fcum", "residual"]);
        assert!(t.columns.contains(&"phi_l2_r0.5".to_string()));
        assert_eq!(t.rows.len(), rep.energy.len());
        let (h, s) = read_snapshot(&dir.path().join("final.hypw")).unwrap();
        assert_eq!(h.shape.nr, 24);
        assert_eq!(s.time, rep.run.final_time);
    }

    #[test]
    fn converge_reports_orders_against_previous_resolution() {
        let cfg = small(
            "n = 5\nN_r = 16\nN_theta = 4\nid.kind = exact-linear\nid.modes = 1,_,1\nid.t0 = -15\nt_end = -14.5\nconverge.N_r = 16,32\n",
        );
        let rep = cmd_converge(&cfg, None).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows[0].order_final.is_none());
        let r = &rep.rows[1];
        let want = observed_order(rep.rows[0].error_final, r.error_final, rep.rows[0].h, r.h);
        assert_eq!(r.order_final, Some(want));
        assert!(r.error_final < rep.rows[0].error_final);
        assert!(rep.table().lines().count() == 3);
    }

    #[test]
    fn converge_requires_exact_data() {
        let cfg = small("n = 3\nN_r = 16\nid.modes = 0,_,1\n");
        assert!(matches!(cmd_converge(&cfg, None), Err(Error::Config(_))));
    }

    #[test]
    fn energy_balance_of_linear_run() {
        let cfg = small("n = 3\nN_r = 100\nN_theta = 6\nt_end = 1\ncadence = 10\nid.modes = 0,_,1;1,_,0.5\nid.r0 = 0.4\nid.sigma = 0.1\n");
        let rep = cmd_energy_balance(&cfg, None).unwrap();
        assert!(rep.flux_monotone);
        assert!(rep.max_relative_residual < 1e-2, "{}", rep.max_relative_residual);
        assert_eq!(rep.final_potential_fraction, 0.0);
    }

    #[test]
    fn blow_up_is_an_outcome() {
        let cfg = small(
            "n = 3\np = 5\nmu = -1\nN_r = 40\nN_theta = 4\nt_end = 5\nblowup = 50\nid.modes = 0,_,40\nid.sigma = 0.1\n",
        );
        let rep = cmd_energy_balance(&cfg, None).unwrap();
        assert!(matches!(rep.run.termination, Termination::BlowUp { .. }), "{}", rep.run);
    }

    #[test]
    fn tails_writes_report_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(
            "n = 3\np = 5\nmu = -1\nN_r = 24\nN_theta = 6\nt_end = 0.5\ncadence = 1\nid.modes = 0,_,1\nid.sigma = 0.2\nextract.lmax = 1\n",
        );
        let rep = cmd_tails(&cfg, Some(dir.path())).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert_eq!(rep.tails.len(), 4);
        for f in ["timeseries.csv", "tails.csv", "tail_report.csv", "lpi/lpi_l0_r0.5.csv", "lpi/lpi_l1_r1.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
