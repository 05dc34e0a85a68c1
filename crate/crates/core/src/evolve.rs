//! First-order conformal evolution system, RK4 stepping and the run loop.

use std::time::{Duration, Instant};

use crate::angular::{AngularOps, AngularWorkspace, FilterSettings};
use crate::chart::{chart_coeffs, check_conformal_power, nonlinearity_weight, FoliationParams, Power};
use crate::error::{Error, Result};
use crate::exactdata::spherical_harmonic;
use crate::grid::{Field, Grid, Shape, Symmetry};
use crate::radial::{cfl_timestep, ko_dissipation_add, radial_d1_into, GhostMap, Padded, Parity};

/// Conformal field `Phi~`, its momentum `Pi~` and the time `t~`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub phi: Field,
    pub pi: Field,
    pub time: f64,
}

impl State {
    pub fn zeros(grid: &Grid, time: f64) -> Self {
        Self {
            phi: Field::zeros(grid.shape()),
            pi: Field::zeros(grid.shape()),
            time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.pi.is_finite()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.phi.scale(c);
        s.pi.scale(c);
        s
    }
}

/// Physics and numerics of one evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub foliation: FoliationParams,
    pub symmetry: Symmetry,
    pub nr: usize,
    pub ntheta: usize,
    pub nphi: Option<usize>,
    /// Required unless `mu == 0`.
    pub p: Option<Power>,
    /// `-1` focusing, `+1` defocusing, `0` linear.
    pub mu: i8,
    pub eps: f64,
    pub lambda: f64,
    pub t_end: f64,
    /// Steps between diagnostic samples.
    pub cadence: usize,
    pub blowup_threshold: f64,
    pub filters: FilterSettings,
}

impl EvolutionConfig {
    /// Defaults for everything but the grid.
    pub fn new(foliation: FoliationParams, symmetry: Symmetry, nr: usize, ntheta: usize, nphi: Option<usize>) -> Self {
        Self {
            foliation,
            symmetry,
            nr,
            ntheta,
            nphi,
            p: None,
            mu: 0,
            eps: 0.2,
            lambda: 0.8,
            t_end: 0.0,
            cadence: 50,
            blowup_threshold: 1e6,
            filters: FilterSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.foliation.n();
        if !matches!(self.mu, -1..=1) {
            return Err(Error::config(format!("mu = {} must be -1, 0 or 1", self.mu)));
        }
        if self.mu != 0 {
            let p = self.p.ok_or_else(|| Error::config("missing key 'p' (required when mu != 0)"))?;
            if !(p.value() > 1.0) {
                return Err(Error::config(format!("p = {p} must exceed 1")));
            }
            check_conformal_power(n, &p)?;
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::config(format!("eps = {} must be non-negative", self.eps)));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::config(format!("lambda = {} must lie in (0, 1)", self.lambda)));
        }
        if self.cadence == 0 {
            return Err(Error::config("cadence must be at least 1"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::config("blow-up threshold must be positive"));
        }
        if !self.t_end.is_finite() {
            return Err(Error::config("t_end must be finite"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.foliation.n(), self.symmetry, self.nr, self.ntheta, self.nphi)
    }
}

/// Per-node radial coefficient tables.
#[derive(Clone, Debug)]
struct RadialTables {
    shift: Vec<f64>,
    lapse: Vec<f64>,
    /// `alpha~ / r~^2`.
    lapse_over_r2: Vec<f64>,
    /// `(n-1)/(4n) alpha~ R~`.
    curvature: Vec<f64>,
    /// `mu alpha~ Omega^w`.
    nonlinear: Vec<f64>,
    r_pow: Vec<f64>,
    r_inv_pow: Vec<f64>,
}

/// Rates `(d Phi~/dt~, d Pi~/dt~)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub phi: Field,
    pub pi: Field,
}

/// Owns the grid, operators, coefficient tables and scratch space for one run.
pub struct Evolver {
    config: EvolutionConfig,
    grid: Grid,
    ops: AngularOps,
    ws: AngularWorkspace,
    ghosts: GhostMap,
    tables: RadialTables,
    power: f64,
    power_int: Option<i32>,
    pad_phi: Padded,
    pad_pi: Padded,
    pad_flux: Padded,
    dphi: Vec<f64>,
    lap: Vec<f64>,
    stage: State,
    k: [Rates; 4],
}

impl std::fmt::Debug for Evolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Evolver").field("config", &self.config).finish()
    }
}

impl Evolver {
    pub fn new(config: EvolutionConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        grid.check_stencil_fit()?;
        let ops = AngularOps::new(&grid, config.filters)?;
        let ws = ops.workspace();
        let params = config.foliation;
        let n = params.n();
        let nf = n as f64;

        let mut t = RadialTables {
            shift: Vec::new(),
            lapse: Vec::new(),
            lapse_over_r2: Vec::new(),
            curvature: Vec::new(),
            nonlinear: Vec::new(),
            r_pow: Vec::new(),
            r_inv_pow: Vec::new(),
        };
        for &rt in grid.r() {
            let c = chart_coeffs(rt, &params)?;
            t.shift.push(c.shift);
            t.lapse.push(c.lapse);
            t.lapse_over_r2.push(c.lapse / (rt * rt));
            t.curvature.push((nf - 1.0) / (4.0 * nf) * c.lapse * c.ricci);
            let w = match (config.mu, &config.p) {
                (0, _) | (_, None) => 0.0,
                (mu, Some(p)) => mu as f64 * c.lapse * nonlinearity_weight(rt, &params, p)?,
            };
            t.nonlinear.push(w);
            t.r_pow.push(rt.powi(n as i32 - 1));
            t.r_inv_pow.push(rt.powi(1 - n as i32));
        }
        let (power, power_int) = match &config.p {
            Some(p) => (p.value(), p.as_integer().map(|k| k as i32)),
            None => (1.0, Some(1)),
        };
        let shape = grid.shape();
        let zero_rates = || Rates {
            phi: Field::zeros(shape),
            pi: Field::zeros(shape),
        };
        Ok(Self {
            ghosts: GhostMap::new(&grid),
            pad_phi: Padded::zeros(shape),
            pad_pi: Padded::zeros(shape),
            pad_flux: Padded::zeros(shape),
            dphi: vec![0.0; shape.len()],
            lap: vec![0.0; shape.len()],
            stage: State::zeros(&grid, 0.0),
            k: [zero_rates(), zero_rates(), zero_rates(), zero_rates()],
            config,
            grid,
            ops,
            ws,
            tables: t,
            power,
            power_int,
        })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn angular(&self) -> &AngularOps {
        &self.ops
    }

    /// Time step from the CFL condition.
    pub fn cfl_dt(&self) -> Result<f64> {
        cfl_timestep(&self.grid, self.config.lambda)
    }

    /// Applies the angular filters to both fields of a state.
    pub fn project(&mut self, state: &mut State) {
        self.ops.project_field(&mut self.ws, &mut state.phi);
        self.ops.project_field(&mut self.ws, &mut state.pi);
    }

    /// `|Phi|^{p-1} Phi`.
    #[inline]
    fn power_term(&self, v: f64) -> f64 {
        match self.power_int {
            Some(k) => v.abs().powi(k - 1) * v,
            None => v.abs().powf(self.power - 1.0) * v,
        }
    }

    /// Right-hand side at `state`. The fields are filtered first and every
    /// term is computed from the filtered values.
    pub fn rhs(&mut self, state: &State) -> Rates {
        let mut stage = state.clone();
        let mut out = Rates {
            phi: Field::zeros(self.grid.shape()),
            pi: Field::zeros(self.grid.shape()),
        };
        self.rhs_into(&mut stage, &mut out);
        out
    }

    /// Filters `stage` in place and writes its rates into `out`.
    fn rhs_into(&mut self, stage: &mut State, out: &mut Rates) {
        let p = self.grid.shape().plane();
        let nr = self.grid.nr();
        let hr = self.grid.hr();
        let eps = self.config.eps;

        for i in 0..nr {
            let lap = &mut self.lap[i * p..(i + 1) * p];
            self.ops.project_with_laplacian(&mut self.ws, stage.phi.shell_mut(i), lap);
            self.ops.project(&mut self.ws, stage.pi.shell_mut(i));
        }
        self.pad_phi.load(stage.phi.as_slice(), &self.ghosts, Parity::Even);
        self.pad_pi.load(stage.pi.as_slice(), &self.ghosts, Parity::Even);
        radial_d1_into(&self.pad_phi, hr, &mut self.dphi);

        let t = &self.tables;
        let phi = stage.phi.as_slice();
        let pi = stage.pi.as_slice();
        {
            let flux = self.pad_flux.interior_mut();
            let dphi_out = out.phi.as_mut_slice();
            for i in 0..nr {
                let (b, a, w) = (t.shift[i], t.lapse[i], t.r_pow[i]);
                for q in i * p..(i + 1) * p {
                    let d = self.dphi[q];
                    flux[q] = w * (b * pi[q] + a * d);
                    dphi_out[q] = b * d + a * pi[q];
                }
            }
        }
        let flux_parity = Parity::Odd.times_radius_power(self.grid.n() - 1);
        self.pad_flux.fill_ghosts(&self.ghosts, flux_parity);
        let dpi_out = out.pi.as_mut_slice();
        radial_d1_into(&self.pad_flux, hr, dpi_out);
        let nonlinear = self.config.mu != 0;
        for i in 0..nr {
            let (ri, l2, cv, nl) = (t.r_inv_pow[i], t.lapse_over_r2[i], t.curvature[i], t.nonlinear[i]);
            for q in i * p..(i + 1) * p {
                let mut v = ri * dpi_out[q] + l2 * self.lap[q] - cv * phi[q];
                if nonlinear {
                    v -= nl * self.power_term(phi[q]);
                }
                dpi_out[q] = v;
            }
        }
        ko_dissipation_add(&self.pad_phi, eps, hr, out.phi.as_mut_slice());
        ko_dissipation_add(&self.pad_pi, eps, hr, out.pi.as_mut_slice());
    }

    /// One classical RK4 step; the result is filtered.
    pub fn rk4_step(&mut self, state: &mut State, dt: f64) {
        let mut k = std::mem::replace(&mut self.k, empty_rates());
        let mut stage = std::mem::replace(&mut self.stage, empty_state());
        let coef = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            stage.phi.as_mut_slice().copy_from_slice(state.phi.as_slice());
            stage.pi.as_mut_slice().copy_from_slice(state.pi.as_slice());
            if s > 0 {
                stage.phi.axpy(coef[s] * dt, &k[s - 1].phi);
                stage.pi.axpy(coef[s] * dt, &k[s - 1].pi);
            }
            self.rhs_into(&mut stage, &mut k[s]);
        }
        let w = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
        for s in 0..4 {
            state.phi.axpy(w[s], &k[s].phi);
            state.pi.axpy(w[s], &k[s].pi);
        }
        state.time += dt;
        self.project(state);
        self.k = k;
        self.stage = stage;
    }
}

const EMPTY: Shape = Shape { nr: 0, ntheta: 0, nphi: 0 };

// Placeholders swapped in while scratch buffers are borrowed; they never allocate.
fn empty_rates() -> [Rates; 4] {
    let e = || Rates {
        phi: Field::zeros(EMPTY),
        pi: Field::zeros(EMPTY),
    };
    [e(), e(), e(), e()]
}

fn empty_state() -> State {
    State {
        phi: Field::zeros(EMPTY),
        pi: Field::zeros(EMPTY),
        time: 0.0,
    }
}

/// One Gaussian shell of static initial data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticMode {
    pub l: usize,
    pub m: Option<i32>,
    pub amplitude: f64,
}

/// Momentarily static data: `Phi~ = sum A exp(-((r~ - r0)/sigma)^2) Y`,
/// `Pi~ = 2 r~ / (1 + r~^2) Phi~_{,r~}`.
pub fn static_initial_data(modes: &[StaticMode], r0: f64, sigma: f64, grid: &Grid) -> Result<State> {
    if !(sigma > 0.0) {
        return Err(Error::config(format!("id.sigma = {sigma} must be positive")));
    }
    let n = grid.n();
    let mut phi = Field::zeros(grid.shape());
    for mode in modes {
        let m = match (grid.symmetry(), mode.m) {
            (Symmetry::Full3D, Some(m)) => Some(m),
            (Symmetry::Full3D, None) => Some(0),
            (Symmetry::SoReduced, None | Some(0)) => None,
            (Symmetry::SoReduced, Some(m)) => {
                return Err(Error::config(format!("mode (l = {}, m = {m}) breaks SO(n-1) symmetry", mode.l)))
            }
        };
        let mut harm = Vec::with_capacity(grid.shape().plane());
        for &th in grid.theta() {
            for &ph in grid.phi() {
                harm.push(spherical_harmonic(n, mode.l, m, th, ph)?);
            }
        }
        for (i, &rt) in grid.r().iter().enumerate() {
            let g = mode.amplitude * (-((rt - r0) / sigma).powi(2)).exp();
            for (v, y) in phi.shell_mut(i).iter_mut().zip(&harm) {
                *v += g * y;
            }
        }
    }
    let mut pad = Padded::zeros(grid.shape());
    pad.load(phi.as_slice(), &GhostMap::new(grid), Parity::Even);
    let mut pi = Field::zeros(grid.shape());
    radial_d1_into(&pad, grid.hr(), pi.as_mut_slice());
    let p = grid.shape().plane();
    for (i, &rt) in grid.r().iter().enumerate() {
        let f = 2.0 * rt / (1.0 + rt * rt);
        pi.as_mut_slice()[i * p..(i + 1) * p].iter_mut().for_each(|v| *v *= f);
    }
    Ok(State { phi, pi, time: 0.0 })
}

/// Receives the state at the diagnostic cadence.
pub trait Sink {
    fn observe(&mut self, evolver: &Evolver, state: &State, step: usize) -> Result<()>;
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    /// `|Phi~|_inf` exceeded the threshold.
    BlowUp { time: f64, max_abs: f64 },
    /// Non-finite values appeared below the threshold.
    NonFinite { time: f64 },
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::BlowUp { time, max_abs } => write!(f, "blow-up at t~={time} (|Phi~|_inf = {max_abs:e})"),
            Termination::NonFinite { time } => write!(f, "non-finite values at t~={time}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub state: State,
    pub termination: Termination,
    pub steps: usize,
    pub dt: f64,
    pub wall: Duration,
}

/// Number of uniform steps and their size to reach `t_end` exactly.
pub fn step_plan(t0: f64, t_end: f64, dt_max: f64) -> (usize, f64) {
    let span = t_end - t0;
    if span <= 0.0 {
        return (0, dt_max);
    }
    let steps = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
    (steps, span / steps as f64)
}

/// Steps `initial` to the configured `t_end`, calling every sink at step 0,
/// every `cadence` steps, and at the final step.
pub fn evolve_run(evolver: &mut Evolver, initial: State, sinks: &mut [&mut dyn Sink]) -> Result<RunResult> {
    let start = Instant::now();
    let mut state = initial;
    let t0 = state.time;
    let (steps, dt) = step_plan(t0, evolver.config.t_end, evolver.cfl_dt()?);
    let cadence = evolver.config.cadence;
    let threshold = evolver.config.blowup_threshold;
    for s in sinks.iter_mut() {
        s.observe(evolver, &state, 0)?;
    }
    let mut termination = Termination::Completed;
    let mut done = 0;
    for step in 1..=steps {
        evolver.rk4_step(&mut state, dt);
        state.time = t0 + step as f64 * dt;
        done = step;
        let max_abs = state.phi.max_abs();
        if !state.is_finite() {
            termination = if max_abs.is_nan() {
                Termination::NonFinite { time: state.time }
            } else {
                Termination::BlowUp { time: state.time, max_abs }
            };
            break;
        }
        if max_abs > threshold {
            termination = Termination::BlowUp { time: state.time, max_abs };
            break;
        }
        if step % cadence == 0 || step == steps {
            for s in sinks.iter_mut() {
                s.observe(evolver, &state, step)?;
            }
        }
    }
    Ok(RunResult {
        state,
        termination,
        steps: done,
        dt,
        wall: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactdata::{exact_linear_state, Direction, LinearMode, ModeFunction};

    fn config(n: usize, sym: Symmetry, nr: usize, nth: usize, nphi: Option<usize>) -> EvolutionConfig {
        EvolutionConfig::new(FoliationParams::unit(n).unwrap(), sym, nr, nth, nphi)
    }

    #[test]
    fn zero_state_has_zero_rates() {
        let mut ev = Evolver::new(config(3, Symmetry::Full3D, 16, 4, Some(8))).unwrap();
        let s = State::zeros(ev.grid(), 0.0);
        let r = ev.rhs(&s);
        assert_eq!(r.phi.max_abs(), 0.0);
        assert_eq!(r.pi.max_abs(), 0.0);
        let mut s2 = s.clone();
        ev.rk4_step(&mut s2, 1e-3);
        assert_eq!(s2.phi.max_abs(), 0.0);
    }

    #[test]
    fn static_data_has_vanishing_field_rate() {
        for (n, sym, nphi) in [(3, Symmetry::SoReduced, None), (5, Symmetry::SoReduced, None), (3, Symmetry::Full3D, Some(8))] {
            let mut cfg = config(n, sym, 200, 8, nphi);
            cfg.eps = 0.0;
            cfg.mu = -1;
            cfg.p = Some(Power::integer(5));
            let mut ev = Evolver::new(cfg).unwrap();
            let modes = [
                StaticMode { l: 2, m: Some(0), amplitude: 6.0 },
                StaticMode { l: 3, m: None, amplitude: 12.0 },
            ];
            let mut s = static_initial_data(&modes, 0.3, 0.07, ev.grid()).unwrap();
            ev.project(&mut s);
            let r = ev.rhs(&s);
            assert!(r.phi.max_abs() < 1e-11 * s.phi.max_abs().max(1.0), "n={n}: {}", r.phi.max_abs());
            // Pi equals Phi_r at scri
            let g = ev.grid().clone();
            let last = g.nr() - 1;
            let s0 = static_initial_data(&modes, 0.3, 0.07, &g).unwrap();
            let pad = crate::radial::fill_ghosts_origin(&g, &s0.phi);
            let d = crate::radial::radial_d1(&pad, &g);
            for q in 0..g.shape().plane() {
                assert!((s0.pi.shell(last)[q] - d.shell(last)[q]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_evolution_is_linear() {
        let mut cfg = config(3, Symmetry::SoReduced, 40, 6, None);
        cfg.t_end = 0.2;
        let grid = cfg.grid().unwrap();
        let modes = [StaticMode { l: 1, m: None, amplitude: 1.0 }];
        let s = static_initial_data(&modes, 0.4, 0.1, &grid).unwrap();
        let mut ev = Evolver::new(cfg).unwrap();
        let base = evolve_run(&mut ev, s.clone(), &mut []).unwrap().state;
        for c in [2.0, -3.0] {
            let scaled = evolve_run(&mut ev, s.scaled(c), &mut []).unwrap().state;
            let want = base.scaled(c);
            assert!(scaled.phi.max_abs_diff(&want.phi) <= 1e-10 * want.phi.max_abs());
        }
    }

    #[test]
    fn step_plan_lands_on_end_time() {
        let (n, dt) = step_plan(0.0, 1.0, 0.3);
        assert_eq!(n, 4);
        assert!((dt * n as f64 - 1.0).abs() < 1e-15);
        assert_eq!(step_plan(0.0, 0.0, 0.1).0, 0);
    }

    #[test]
    fn zero_end_time_returns_initial_state() {
        let cfg = config(3, Symmetry::SoReduced, 16, 4, None);
        let grid = cfg.grid().unwrap();
        let s = static_initial_data(&[StaticMode { l: 0, m: None, amplitude: 1.0 }], 0.5, 0.1, &grid).unwrap();
        let mut ev = Evolver::new(cfg).unwrap();
        let r = evolve_run(&mut ev, s.clone(), &mut []).unwrap();
        assert_eq!(r.state, s);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn focusing_large_data_reports_blow_up() {
        let mut cfg = config(3, Symmetry::SoReduced, 60, 4, None);
        cfg.mu = -1;
        cfg.p = Some(Power::integer(5));
        cfg.t_end = 5.0;
        let grid = cfg.grid().unwrap();
        let s = static_initial_data(&[StaticMode { l: 0, m: None, amplitude: 60.0 }], 0.3, 0.1, &grid).unwrap();
        let mut ev = Evolver::new(cfg).unwrap();
        let r = evolve_run(&mut ev, s, &mut []).unwrap();
        assert!(matches!(r.termination, Termination::BlowUp { .. }), "{:?}", r.termination);
    }

    #[test]
    fn time_reversal_without_filters() {
        let mut cfg = config(3, Symmetry::SoReduced, 100, 6, None);
        cfg.eps = 0.0;
        cfg.filters = FilterSettings { dealias: false, pole: false };
        let grid = cfg.grid().unwrap();
        let params = cfg.foliation;
        let f = ModeFunction::new(1.0, 1.0).unwrap();
        let modes = [LinearMode { l: 1, m: None, direction: Direction::RegularSum, profile: f }];
        let s0 = exact_linear_state(-3.0, &grid, &params, &modes).unwrap();
        let mut ev = Evolver::new(cfg).unwrap();
        let dt = ev.cfl_dt().unwrap();
        let mut s = s0.clone();
        ev.rk4_step(&mut s, dt);
        ev.rk4_step(&mut s, -dt);
        assert!(s.phi.max_abs_diff(&s0.phi) < 1e-10, "{}", s.phi.max_abs_diff(&s0.phi));
    }

    #[test]
    fn rhs_matches_exact_time_derivative() {
        // residual of the Phi-rate against the exact solution's time derivative shrinks at fourth order
        let mut errs = Vec::new();
        for nr in [100, 200] {
            let mut cfg = config(3, Symmetry::SoReduced, nr, 6, None);
            cfg.eps = 0.0;
            let grid = cfg.grid().unwrap();
            let params = cfg.foliation;
            let f = ModeFunction::new(1.0, 1.0).unwrap();
            let modes = [LinearMode { l: 1, m: None, direction: Direction::RegularSum, profile: f }];
            let t = 0.3;
            let s = exact_linear_state(t, &grid, &params, &modes).unwrap();
            let mut ev = Evolver::new(cfg).unwrap();
            let r = ev.rhs(&s);
            let h = 1e-4;
            let sp = exact_linear_state(t + h, &grid, &params, &modes).unwrap();
            let sm = exact_linear_state(t - h, &grid, &params, &modes).unwrap();
            let mut e = 0.0f64;
            for q in 0..s.phi.as_slice().len() {
                let dt = (sp.phi.as_slice()[q] - sm.phi.as_slice()[q]) / (2.0 * h);
                e = e.max((r.phi.as_slice()[q] - dt).abs());
            }
            errs.push(e);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.5, "errors {errs:?}");
    }
}
