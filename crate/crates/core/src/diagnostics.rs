//! Slice quadrature, energy, boundary flux and error norms.

use crate::angular::{AngularOps, FilterSettings};
use crate::chart::{FoliationParams, Power};
use crate::error::{Error, Result};
use crate::evolve::{Evolver, Sink, State};
use crate::grid::{Field, Grid};
use crate::radial::{fill_ghosts_origin, radial_d1};

/// Simpson weights for the staggered radial grid, before the factor `h / 3`:
/// `27/8, 17/8, 4, 2, 4, ..., 2, 4, 1`.
pub fn radial_weights(nr: usize) -> Result<Vec<f64>> {
    if !nr.is_multiple_of(2) || nr < 4 {
        return Err(Error::domain(format!("radial Simpson rule needs an even N_r >= 4, got {nr}")));
    }
    Ok((0..nr)
        .map(|i| match i {
            0 => 27.0 / 8.0,
            1 => 17.0 / 8.0,
            _ if i == nr - 1 => 1.0,
            _ if i % 2 == 0 => 4.0,
            _ => 2.0,
        })
        .collect())
}

/// `int_0^1 u dr~` from samples on the staggered grid.
pub fn radial_integral(u: &[f64], h: f64) -> Result<f64> {
    let w = radial_weights(u.len())?;
    Ok(h / 3.0 * w.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
}

/// Energy split into the total and its potential part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParts {
    pub total: f64,
    pub potential: f64,
}

/// Precomputed weights and operators for integrals over a slice.
pub struct Diagnostics {
    grid: Grid,
    ops: AngularOps,
    params: FoliationParams,
    mu: i8,
    p: Option<Power>,
    /// `h/3 * simpson_i * r_i^{n-1}`.
    volume_w: Vec<f64>,
    /// `Omega^w / (p + 1)` per shell.
    potential_w: Vec<f64>,
}

impl std::fmt::Debug for Diagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Diagnostics").field("mu", &self.mu).field("p", &self.p).finish()
    }
}

impl Diagnostics {
    pub fn new(grid: &Grid, params: FoliationParams, mu: i8, p: Option<Power>) -> Result<Self> {
        if mu != 0 && p.is_none() {
            return Err(Error::config("missing key 'p' (required when mu != 0)"));
        }
        grid.check_stencil_fit()?;
        let ops = AngularOps::new(grid, FilterSettings::default())?;
        let n = grid.n() as i32;
        let h = grid.hr();
        let volume_w = radial_weights(grid.nr())?
            .iter()
            .zip(grid.r())
            .map(|(w, r)| h / 3.0 * w * r.powi(n - 1))
            .collect();
        let potential_w = match &p {
            Some(p) if mu != 0 => {
                let e = p.omega_exponent(grid.n());
                grid.r().iter().map(|&r| e.weight(params.omega(r)) / (p.value() + 1.0)).collect()
            }
            _ => vec![0.0; grid.nr()],
        };
        Ok(Self {
            grid: grid.clone(),
            ops,
            params,
            mu,
            p,
            volume_w,
            potential_w,
        })
    }

    pub fn for_evolver(ev: &Evolver) -> Result<Self> {
        let c = ev.config();
        Self::new(ev.grid(), c.foliation, c.mu, c.p)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn angular(&self) -> &AngularOps {
        &self.ops
    }

    /// `int_{S^{n-1}} u dS` on one shell.
    pub fn sphere_integral(&self, plane: &[f64]) -> f64 {
        self.ops.sphere_integral(plane)
    }

    /// `int_0^1 r~^{n-1} dr~ int_{S^{n-1}} f dS`.
    pub fn volume_integral(&self, f: &Field) -> f64 {
        (0..self.grid.nr())
            .map(|i| self.volume_w[i] * self.ops.sphere_integral(f.shell(i)))
            .sum()
    }

    /// Weighted `L^2` norm over the slice.
    pub fn l2_norm(&self, f: &Field) -> f64 {
        let mut sq = f.clone();
        sq.as_mut_slice().iter_mut().for_each(|v| *v *= *v);
        self.volume_integral(&sq).max(0.0).sqrt()
    }

    /// `|| Phi~ - Phi~_exact ||_{L^2}`.
    pub fn l2_error(&self, state: &State, exact: &State) -> f64 {
        let mut d = state.phi.clone();
        d.axpy(-1.0, &exact.phi);
        self.l2_norm(&d)
    }

    fn phi_r(&self, state: &State) -> Field {
        radial_d1(&fill_ghosts_origin(&self.grid, &state.phi), &self.grid)
    }

    fn abs_power(&self, v: f64) -> f64 {
        let p = self.p.expect("checked at construction");
        match p.as_integer() {
            Some(k) => v.abs().powi(k as i32 + 1),
            None => v.abs().powf(p.value() + 1.0),
        }
    }

    /// Total energy on the slice and its potential part.
    pub fn energy(&self, state: &State) -> Result<EnergyParts> {
        let grid = &self.grid;
        let n = grid.n() as f64;
        let c = self.params.c();
        let mu = self.mu as f64;
        let phi_r = self.phi_r(state);
        let plane = grid.shape().plane();
        let mut dens = Field::zeros(grid.shape());
        let mut pot = Field::zeros(grid.shape());
        for (i, &r) in grid.r().iter().enumerate() {
            let grad = self.ops.gradient_squared(state.phi.shell(i))?;
            let r2 = r * r;
            let (a1, a2, a3) = (
                2.0 * (n - 1.0) * (r2 - 1.0) / (r2 + 1.0) * r,
                4.0 * r,
                (n - 1.0) * (n - 1.0) * r2 / (r2 + 1.0),
            );
            let pw = self.potential_w[i];
            for q in 0..plane {
                let (f, pi, fr) = (state.phi.shell(i)[q], state.pi.shell(i)[q], phi_r.shell(i)[q]);
                let v = if self.mu != 0 { pw * self.abs_power(f) } else { 0.0 };
                pot.shell_mut(i)[q] = (1.0 + r2) * v;
                dens.shell_mut(i)[q] = (1.0 + r2) * (pi * pi + fr * fr + grad[q] / r2 + 2.0 * mu * v) + a1 * fr * f
                    - a2 * fr * pi
                    + a3 * f * f;
            }
        }
        Ok(EnergyParts {
            total: c / (4.0 * n) * self.volume_integral(&dens),
            potential: c * mu / (2.0 * n) * self.volume_integral(&pot),
        })
    }

    /// `E_pot` alone.
    pub fn potential_energy(&self, state: &State) -> Result<f64> {
        Ok(self.energy(state)?.potential)
    }

    /// `dF/dt~ = -(C/n)^2 int_{S^{n-1}} (Phi~_{,r~} - Pi~)^2 dS` at `r~ = 1`.
    pub fn boundary_flux_rate(&self, state: &State) -> f64 {
        let phi_r = self.phi_r(state);
        let last = self.grid.nr() - 1;
        let sq: Vec<f64> = phi_r
            .shell(last)
            .iter()
            .zip(state.pi.shell(last))
            .map(|(a, b)| (a - b) * (a - b))
            .collect();
        let k = self.params.c() / self.params.n() as f64;
        -k * k * self.ops.sphere_integral(&sq).max(0.0)
    }
}

/// Trapezoidal time integral of the boundary flux rate.
#[derive(Clone, Debug, Default)]
pub struct FluxAccumulator {
    last: Option<(f64, f64)>,
    total: f64,
}

impl FluxAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a sample and returns `F(t_first, t)`.
    pub fn push(&mut self, t: f64, rate: f64) -> f64 {
        if let Some((t0, r0)) = self.last {
            self.total += 0.5 * (t - t0) * (rate + r0);
        }
        self.last = Some((t, rate));
        self.total
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// `F(t1, t2)` by the trapezoidal rule over `(t, dF/dt)` samples.
pub fn accumulate_flux(series: &[(f64, f64)]) -> f64 {
    let mut acc = FluxAccumulator::new();
    for &(t, r) in series {
        acc.push(t, r);
    }
    acc.total()
}

/// One diagnostic sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord {
    pub time: f64,
    pub energy: f64,
    pub potential: f64,
    pub flux_rate: f64,
    pub flux_cum: f64,
    /// `E(t) - F(0, t) - E(0)`.
    pub residual: f64,
}

/// Sink recording energy, flux and balance residual.
#[derive(Debug)]
pub struct EnergyMonitor {
    diag: Diagnostics,
    flux: FluxAccumulator,
    e0: Option<f64>,
    pub records: Vec<EnergyRecord>,
}

impl EnergyMonitor {
    pub fn new(diag: Diagnostics) -> Self {
        Self {
            diag,
            flux: FluxAccumulator::new(),
            e0: None,
            records: Vec::new(),
        }
    }

    pub fn record(&mut self, state: &State) -> Result<EnergyRecord> {
        let e = self.diag.energy(state)?;
        let rate = self.diag.boundary_flux_rate(state);
        let f = self.flux.push(state.time, rate);
        let e0 = *self.e0.get_or_insert(e.total);
        let rec = EnergyRecord {
            time: state.time,
            energy: e.total,
            potential: e.potential,
            flux_rate: rate,
            flux_cum: f,
            residual: e.total - f - e0,
        };
        self.records.push(rec);
        Ok(rec)
    }

    /// `max |residual| / |E(0)|`.
    pub fn max_relative_residual(&self) -> f64 {
        let e0 = self.e0.unwrap_or(0.0).abs();
        self.records.iter().map(|r| r.residual.abs()).fold(0.0, f64::max) / e0
    }
}

impl Sink for EnergyMonitor {
    fn observe(&mut self, _: &Evolver, state: &State, _: usize) -> Result<()> {
        self.record(state).map(|_| ())
    }
}
