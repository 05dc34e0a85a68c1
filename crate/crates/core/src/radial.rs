//! Fourth-order radial finite differences, origin ghost shells, Kreiss-Oliger
//! dissipation and the CFL time step.
//!
//! Radial operators act shell-by-shell: every stencil combines whole angular
//! planes, so the inner loops run over contiguous memory.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Shape};

/// Ghost shells kept below the origin (enough for the 7-point dissipation stencil).
pub const GHOST_SHELLS: usize = 3;

/// Behaviour of a quantity under `(-r, theta, phi) -> (r, pi - theta, phi + pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// Scalars such as the field itself.
    Even,
    /// Radial derivatives of scalars.
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    /// Parity of `r^k * q` for a quantity `q` of parity `self`.
    pub fn times_radius_power(self, k: usize) -> Parity {
        if k.is_multiple_of(2) {
            self
        } else {
            match self {
                Parity::Even => Parity::Odd,
                Parity::Odd => Parity::Even,
            }
        }
    }
}

/// Field extended by [`GHOST_SHELLS`] shells at negative radius.
#[derive(Clone, Debug)]
pub struct Padded {
    shape: Shape,
    data: Vec<f64>,
}

impl Padded {
    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            data: vec![0.0; (shape.nr + GHOST_SHELLS) * shape.plane()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Shell `i`, where `i = -1, -2, -3` are the ghosts at `-r_0, -r_1, -r_2`.
    #[inline]
    pub fn shell(&self, i: isize) -> &[f64] {
        let p = self.shape.plane();
        let s = (i + GHOST_SHELLS as isize) as usize;
        &self.data[s * p..(s + 1) * p]
    }

    pub fn interior(&self) -> &[f64] {
        &self.data[GHOST_SHELLS * self.shape.plane()..]
    }

    pub fn interior_mut(&mut self) -> &mut [f64] {
        let p = self.shape.plane();
        &mut self.data[GHOST_SHELLS * p..]
    }

    /// Interior values as a plain field.
    pub fn to_field(&self) -> Field {
        Field::from_vec(self.shape, self.interior().to_vec()).expect("shape is consistent")
    }

    /// Copy `src` into the interior and fill the ghosts.
    pub fn load(&mut self, src: &[f64], map: &GhostMap, parity: Parity) {
        self.interior_mut().copy_from_slice(src);
        self.fill_ghosts(map, parity);
    }

    /// Fill the ghost shells from the interior according to the origin symmetry.
    pub fn fill_ghosts(&mut self, map: &GhostMap, parity: Parity) {
        let p = self.shape.plane();
        let sign = parity.sign();
        let (ghosts, interior) = self.data.split_at_mut(GHOST_SHELLS * p);
        for g in 1..=GHOST_SHELLS {
            // ghost at -r_{g-1} lives in padded shell GHOST_SHELLS - g
            let dst = &mut ghosts[(GHOST_SHELLS - g) * p..(GHOST_SHELLS - g + 1) * p];
            let src = &interior[(g - 1) * p..g * p];
            for (d, &q) in dst.iter_mut().zip(&map.partner) {
                *d = sign * src[q];
            }
        }
    }
}

/// Plane-index permutation realising the reflection through the origin.
#[derive(Clone, Debug)]
pub struct GhostMap {
    partner: Vec<usize>,
}

impl GhostMap {
    pub fn new(grid: &Grid) -> Self {
        let mut partner = Vec::with_capacity(grid.shape().plane());
        for j in 0..grid.ntheta() {
            for k in 0..grid.nphi() {
                partner.push(grid.antipodal_plane_index(j, k));
            }
        }
        Self { partner }
    }

    pub fn partner(&self, q: usize) -> usize {
        self.partner[q]
    }
}

/// Extend a scalar field by ghost shells `u(-r, theta, phi) = u(r, pi - theta, phi + pi)`.
pub fn fill_ghosts_origin(grid: &Grid, f: &Field) -> Padded {
    fill_ghosts_with_parity(grid, f, Parity::Even)
}

pub fn fill_ghosts_with_parity(grid: &Grid, f: &Field, parity: Parity) -> Padded {
    let mut padded = Padded::zeros(f.shape());
    padded.load(f.as_slice(), &GhostMap::new(grid), parity);
    padded
}

#[inline]
fn combine<const K: usize>(out: &mut [f64], rows: [&[f64]; K], coefs: [f64; K], scale: f64) {
    let len = out.len();
    let rows = rows.map(|r| &r[..len]);
    for q in 0..len {
        let mut s = 0.0;
        for t in 0..K {
            s += coefs[t] * rows[t][q];
        }
        out[q] = scale * s;
    }
}

/// Applies a centred stencil to shells `first..first + count` as one flat loop.
/// `offsets[t]` is the shell offset of tap `t`.
#[inline]
fn stencil_span<const K: usize, const ADD: bool>(
    u: &Padded,
    out: &mut [f64],
    first: usize,
    count: usize,
    offsets: [isize; K],
    coefs: [f64; K],
    scale: f64,
) {
    let p = u.shape.plane();
    let base = (first + GHOST_SHELLS) * p;
    let len = count * p;
    let taps = offsets.map(|o| {
        let s = (base as isize + o * p as isize) as usize;
        &u.data[s..s + len]
    });
    let out = &mut out[first * p..first * p + len];
    for q in 0..len {
        let mut acc = 0.0;
        for t in 0..K {
            acc += coefs[t] * taps[t][q];
        }
        if ADD {
            out[q] += scale * acc;
        } else {
            out[q] = scale * acc;
        }
    }
}

const D1_CENTRED: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
const D1_PENULTIMATE: [f64; 5] = [-1.0, 6.0, -18.0, 10.0, 3.0];
const D1_LAST: [f64; 5] = [3.0, -16.0, 36.0, -48.0, 25.0];
const D2_CENTRED: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_PENULTIMATE: [f64; 6] = [1.0, -6.0, 14.0, -4.0, -15.0, 10.0];
const D2_LAST: [f64; 6] = [-10.0, 61.0, -156.0, 214.0, -154.0, 45.0];
const KO: [f64; 7] = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0];

/// First radial derivative of the padded field into `out` (interior shells).
pub fn radial_d1_into(u: &Padded, hr: f64, out: &mut [f64]) {
    let shape = u.shape();
    let (nr, p) = (shape.nr as isize, shape.plane());
    let scale = 1.0 / (12.0 * hr);
    stencil_span::<4, false>(u, out, 0, (nr - 2) as usize, [-2, -1, 1, 2], D1_CENTRED, scale);
    for (i, o) in out.chunks_exact_mut(p).enumerate().skip((nr - 2) as usize) {
        let i = i as isize;
        {
            let c = if i == nr - 2 { D1_PENULTIMATE } else { D1_LAST };
            let b = nr - 5;
            let rows = [u.shell(b), u.shell(b + 1), u.shell(b + 2), u.shell(b + 3), u.shell(b + 4)];
            combine(o, rows, c, scale);
        }
    }
}

/// Second radial derivative of the padded field into `out`.
pub fn radial_d2_into(u: &Padded, hr: f64, out: &mut [f64]) {
    let shape = u.shape();
    let (nr, p) = (shape.nr as isize, shape.plane());
    let scale = 1.0 / (12.0 * hr * hr);
    for (i, o) in out.chunks_exact_mut(p).enumerate() {
        let i = i as isize;
        if i <= nr - 3 {
            let rows = [u.shell(i - 2), u.shell(i - 1), u.shell(i), u.shell(i + 1), u.shell(i + 2)];
            combine(o, rows, D2_CENTRED, scale);
        } else {
            let c = if i == nr - 2 { D2_PENULTIMATE } else { D2_LAST };
            let b = nr - 6;
            let rows = [
                u.shell(b),
                u.shell(b + 1),
                u.shell(b + 2),
                u.shell(b + 3),
                u.shell(b + 4),
                u.shell(b + 5),
            ];
            combine(o, rows, c, scale);
        }
    }
}

pub fn radial_d1(u: &Padded, grid: &Grid) -> Field {
    let mut out = Field::zeros(u.shape());
    radial_d1_into(u, grid.hr(), out.as_mut_slice());
    out
}

pub fn radial_d2(u: &Padded, grid: &Grid) -> Field {
    let mut out = Field::zeros(u.shape());
    radial_d2_into(u, grid.hr(), out.as_mut_slice());
    out
}

/// `r^{1-n} d/dr [flux]` with the flux already multiplied by `r^{n-1}`.
/// The derivative is taken of the assembled product.
pub fn conservative_radial_term(flux: &Padded, grid: &Grid) -> Field {
    let mut out = radial_d1(flux, grid);
    let p = grid.shape().plane();
    let e = 1 - grid.n() as i32;
    for (o, &r) in out.as_mut_slice().chunks_exact_mut(p).zip(grid.r()) {
        let w = r.powi(e);
        o.iter_mut().for_each(|v| *v *= w);
    }
    out
}

/// Adds `eps / (64 h) * delta^6 u` to `out` at every node whose 7-point stencil
/// fits; the outermost three shells receive nothing.
pub fn ko_dissipation_add(u: &Padded, eps: f64, hr: f64, out: &mut [f64]) {
    if eps == 0.0 {
        return;
    }
    let shape = u.shape();
    let scale = eps / (64.0 * hr);
    stencil_span::<7, true>(u, out, 0, shape.nr - 3, [-3, -2, -1, 0, 1, 2, 3], KO, scale);
}

pub fn ko_dissipation(u: &Padded, grid: &Grid, eps: f64) -> Field {
    let mut out = Field::zeros(u.shape());
    ko_dissipation_add(u, eps, grid.hr(), out.as_mut_slice());
    out
}

/// `dt = lambda * r_0 * h_theta` with `r_0 = h_r / 2`, the smallest node spacing.
pub fn cfl_timestep(grid: &Grid, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::config(format!("CFL factor lambda = {lambda} must lie in (0, 1)")));
    }
    Ok(lambda * 0.5 * grid.hr() * grid.htheta())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Symmetry;
    use approx::assert_relative_eq;

    fn so_grid(nr: usize, nth: usize) -> Grid {
        Grid::new(3, Symmetry::SoReduced, nr, nth, None).unwrap()
    }

    /// Pads a purely radial profile using its analytic continuation to r < 0.
    fn padded_from(grid: &Grid, f: impl Fn(f64) -> f64) -> Padded {
        let mut p = Padded::zeros(grid.shape());
        let plane = grid.shape().plane();
        for i in -(GHOST_SHELLS as isize)..grid.nr() as isize {
            let r = if i < 0 { -grid.r()[(-i - 1) as usize] } else { grid.r()[i as usize] };
            let s = (i + GHOST_SHELLS as isize) as usize;
            p.data[s * plane..(s + 1) * plane].fill(f(r));
        }
        p
    }

    #[test]
    fn constant_ghosts_are_constant() {
        let g = Grid::new(3, Symmetry::Full3D, 10, 4, Some(6)).unwrap();
        let f = Field::from_fn(&g, |_, _, _| 1.0);
        let p = fill_ghosts_origin(&g, &f);
        for i in 1..=3 {
            assert!(p.shell(-i).iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn ghosts_extend_cartesian_z_oddly() {
        let g = Grid::new(3, Symmetry::Full3D, 10, 6, Some(8)).unwrap();
        let f = Field::from_fn(&g, |r, th, _| r * th.cos());
        let p = fill_ghosts_origin(&g, &f);
        for gi in 1..=3usize {
            let shell = p.shell(-(gi as isize));
            for j in 0..6 {
                for k in 0..8 {
                    let want = -g.r()[gi - 1] * g.theta()[j].cos();
                    assert_relative_eq!(shell[j * 8 + k], want, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn so_ghosts_flip_theta() {
        let g = so_grid(10, 8);
        let f = Field::from_fn(&g, |r, th, _| r * r * th.cos());
        let p = fill_ghosts_origin(&g, &f);
        for j in 0..8 {
            let want = g.r()[0].powi(2) * (std::f64::consts::PI - g.theta()[j]).cos();
            assert_relative_eq!(p.shell(-1)[j], want, epsilon = 1e-15);
        }
    }

    #[test]
    fn ghost_map_is_an_involution() {
        let g = Grid::new(3, Symmetry::Full3D, 10, 6, Some(8)).unwrap();
        let m = GhostMap::new(&g);
        for q in 0..g.shape().plane() {
            assert_eq!(m.partner(m.partner(q)), q);
        }
    }

    #[test]
    fn stencils_exact_on_monomials() {
        let g = so_grid(16, 2);
        for m in 0..=4i32 {
            let p = padded_from(&g, |r| r.powi(m));
            let d1 = radial_d1(&p, &g);
            let d2 = radial_d2(&p, &g);
            for (i, &r) in g.r().iter().enumerate() {
                let mf = m as f64;
                let e1 = if m >= 1 { mf * r.powi(m - 1) } else { 0.0 };
                let e2 = if m >= 2 { mf * (mf - 1.0) * r.powi(m - 2) } else { 0.0 };
                assert!((d1.get(i, 0, 0) - e1).abs() < 1e-11, "d1 m={m} i={i}");
                assert!((d2.get(i, 0, 0) - e2).abs() < 1e-9, "d2 m={m} i={i}");
            }
        }
    }

    #[test]
    fn ko_annihilates_quintics_and_damps_nyquist() {
        let g = so_grid(20, 2);
        let p = padded_from(&g, |r| 1.0 - 2.0 * r + r.powi(3) + 0.5 * r.powi(5));
        let q = ko_dissipation(&p, &g, 0.2);
        assert!(q.max_abs() < 1e-9);

        let mut alt = Padded::zeros(g.shape());
        for i in -3..20isize {
            let s = (i + 3) as usize;
            let v = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            alt.data[s * 2..(s + 1) * 2].fill(v);
        }
        let q = ko_dissipation(&alt, &g, 0.2);
        for i in 0..17 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(q.get(i, 0, 0), -0.2 * sign / g.hr(), max_relative = 1e-12);
        }
        for i in 17..20 {
            assert_eq!(q.get(i, 1, 0), 0.0);
        }
    }

    #[test]
    fn conservative_term_on_cubic_flux() {
        let g = so_grid(40, 2);
        let p = padded_from(&g, |r| r.powi(3));
        let c = conservative_radial_term(&p, &g);
        for i in 0..40 {
            assert_relative_eq!(c.get(i, 0, 0), 3.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn cfl_examples() {
        let dt = cfl_timestep(&so_grid(100, 8), 0.8).unwrap();
        assert_relative_eq!(dt, 0.8 / 199.0 * std::f64::consts::PI / 8.0, max_relative = 1e-14);
        assert_relative_eq!(dt, 1.5788e-3, max_relative = 1e-4);
        let dt2 = cfl_timestep(&so_grid(100, 16), 0.8).unwrap();
        assert_relative_eq!(dt2, dt / 2.0, max_relative = 1e-14);
        let dt = cfl_timestep(&so_grid(4000, 12), 0.8).unwrap();
        assert_relative_eq!(dt, 2.618e-5, max_relative = 1e-3);
        assert!(cfl_timestep(&so_grid(100, 8), 1.0).is_err());
        assert!(cfl_timestep(&so_grid(100, 8), 0.0).is_err());
    }
}
