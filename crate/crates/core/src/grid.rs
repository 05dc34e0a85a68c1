//! Collocation grids and field storage.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Angular treatment of the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    /// No symmetry, both `theta` and `phi` resolved (`n = 3` only).
    Full3D,
    /// SO(n-1) symmetry: a single effective angle `theta`.
    SoReduced,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::Full3D => "full",
            Symmetry::SoReduced => "so",
        })
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "full3d" | "none" => Ok(Symmetry::Full3D),
            "so" | "so-reduced" | "axisymmetric" => Ok(Symmetry::SoReduced),
            other => Err(Error::config(format!("unknown symmetry '{other}' (use 'full' or 'so')"))),
        }
    }
}

/// Array extents `(nr, ntheta, nphi)`; `nphi == 1` under SO(n-1) symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub nr: usize,
    pub ntheta: usize,
    pub nphi: usize,
}

impl Shape {
    /// Number of angular nodes on one radial shell.
    pub fn plane(&self) -> usize {
        self.ntheta * self.nphi
    }

    pub fn len(&self) -> usize {
        self.nr * self.plane()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ntheta + j) * self.nphi + k
    }
}

/// Radial grid staggered at the origin with its last node on null infinity;
/// `theta` staggered about the axis; `phi` uniform from 0.
#[derive(Clone, Debug)]
pub struct Grid {
    n: usize,
    symmetry: Symmetry,
    shape: Shape,
    hr: f64,
    htheta: f64,
    hphi: f64,
    r: Vec<f64>,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl Grid {
    /// Smallest radial resolution accepted by the grid.
    pub const MIN_NR: usize = 4;
    /// Smallest radial resolution for which every derivative stencil fits.
    pub const MIN_NR_STENCIL: usize = 8;

    pub fn check_stencil_fit(&self) -> Result<()> {
        if self.nr() < Self::MIN_NR_STENCIL {
            return Err(Error::config(format!(
                "N_r = {} is too small for the radial stencils (need >= {})",
                self.nr(),
                Self::MIN_NR_STENCIL
            )));
        }
        Ok(())
    }

    pub fn new(
        n: usize,
        symmetry: Symmetry,
        nr: usize,
        ntheta: usize,
        nphi: Option<usize>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("dimension n = {n} must be >= 2")));
        }
        if nr < Self::MIN_NR || !nr.is_multiple_of(2) {
            return Err(Error::config(format!(
                "N_r = {nr} must be even and at least {}",
                Self::MIN_NR
            )));
        }
        if ntheta < 2 {
            return Err(Error::config(format!("N_theta = {ntheta} must be >= 2")));
        }
        let nphi = match symmetry {
            Symmetry::Full3D => {
                if n != 3 {
                    return Err(Error::config(format!(
                        "full 3D angular grid requires n = 3, got n = {n}"
                    )));
                }
                let nphi = nphi.ok_or_else(|| Error::config("N_phi is required for symmetry = full"))?;
                if nphi < 2 || nphi % 2 != 0 {
                    return Err(Error::config(format!("N_phi = {nphi} must be even and >= 2")));
                }
                nphi
            }
            Symmetry::SoReduced => match nphi {
                None | Some(1) => 1,
                Some(k) => {
                    return Err(Error::config(format!(
                        "N_phi = {k} given for an SO(n-1)-reduced grid"
                    )))
                }
            },
        };

        let hr = 1.0 / (nr as f64 - 0.5);
        let mut r: Vec<f64> = (0..nr).map(|i| (i as f64 + 0.5) * hr).collect();
        r[nr - 1] = 1.0;
        let htheta = PI / ntheta as f64;
        let theta = (0..ntheta).map(|j| (j as f64 + 0.5) * htheta).collect();
        let hphi = 2.0 * PI / nphi as f64;
        let phi = (0..nphi).map(|k| k as f64 * hphi).collect();

        Ok(Self {
            n,
            symmetry,
            shape: Shape { nr, ntheta, nphi },
            hr,
            htheta,
            hphi,
            r,
            theta,
            phi,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn nr(&self) -> usize {
        self.shape.nr
    }

    pub fn ntheta(&self) -> usize {
        self.shape.ntheta
    }

    pub fn nphi(&self) -> usize {
        self.shape.nphi
    }

    pub fn hr(&self) -> f64 {
        self.hr
    }

    pub fn htheta(&self) -> f64 {
        self.htheta
    }

    pub fn hphi(&self) -> f64 {
        self.hphi
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Index of the radial node closest to `rt`.
    pub fn nearest_radial_index(&self, rt: f64) -> usize {
        let i = (rt / self.hr - 0.5).round();
        i.clamp(0.0, (self.shape.nr - 1) as f64) as usize
    }

    /// Plane index of the point `(r, pi - theta, phi + pi)`, which represents
    /// the reflection of `(-r, theta, phi)` through the origin.
    pub fn antipodal_plane_index(&self, j: usize, k: usize) -> usize {
        let Shape { ntheta, nphi, .. } = self.shape;
        let jj = ntheta - 1 - j;
        let kk = (k + nphi / 2) % nphi;
        jj * nphi + kk
    }
}

/// Values on all grid nodes, `(i, j, k)` row-major (`k` fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    shape: Shape,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(shape: Shape) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn from_vec(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Shape {
                expected: shape.len(),
                got: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    /// Samples `f(r, theta, phi)` at every node.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64, f64) -> f64) -> Self {
        let shape = grid.shape();
        let mut data = Vec::with_capacity(shape.len());
        for &r in grid.r() {
            for &th in grid.theta() {
                for &ph in grid.phi() {
                    data.push(f(r, th, ph));
                }
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.shape.index(i, j, k)]
    }

    pub fn shell(&self, i: usize) -> &[f64] {
        let p = self.shape.plane();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn shell_mut(&mut self, i: usize) -> &mut [f64] {
        let p = self.shape.plane();
        &mut self.data[i * p..(i + 1) * p]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &Field) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smallest_grid_nodes() {
        let g = Grid::new(3, Symmetry::SoReduced, 4, 2, None).unwrap();
        assert_relative_eq!(g.hr(), 1.0 / 3.5);
        for (r, want) in g.r().iter().zip([1.0 / 7.0, 3.0 / 7.0, 5.0 / 7.0]) {
            assert_relative_eq!(*r, want, max_relative = 1e-15);
        }
        assert_eq!(g.r()[3], 1.0);
        assert!(g.check_stencil_fit().is_err());
    }

    #[test]
    fn radial_nodes_are_staggered_and_end_on_scri() {
        let g = Grid::new(3, Symmetry::SoReduced, 8, 4, None).unwrap();
        assert_relative_eq!(g.hr(), 1.0 / 7.5);
        assert_relative_eq!(g.r()[0], 0.5 / 7.5);
        assert_eq!(*g.r().last().unwrap(), 1.0);
        for nr in [8, 100, 2000, 4000] {
            let g = Grid::new(3, Symmetry::SoReduced, nr, 8, None).unwrap();
            assert_eq!(g.r()[nr - 1], 1.0);
        }
    }

    #[test]
    fn four_point_radial_grid_matches_hand_values() {
        // Below MIN_NR for evolution, so check the formula directly.
        let h = 1.0 / 3.5;
        let nodes: Vec<f64> = (0..4).map(|i| (i as f64 + 0.5) * h).collect();
        for (x, want) in nodes.iter().zip([1.0 / 7.0, 3.0 / 7.0, 5.0 / 7.0, 1.0]) {
            assert_relative_eq!(*x, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn theta_grid_avoids_axis() {
        let g = Grid::new(3, Symmetry::SoReduced, 8, 8, None).unwrap();
        assert_relative_eq!(g.theta()[0], PI / 16.0);
        assert_relative_eq!(g.theta()[7], 15.0 * PI / 16.0);
        assert!(g.theta().iter().all(|t| t.sin() > 0.0));
        for j in 0..8 {
            assert_relative_eq!(g.theta()[7 - j], PI - g.theta()[j], epsilon = 1e-14);
        }
    }

    #[test]
    fn phi_grid_contains_antipodes() {
        let g = Grid::new(3, Symmetry::Full3D, 8, 4, Some(8)).unwrap();
        assert_eq!(g.phi()[0], 0.0);
        assert_relative_eq!(g.phi()[4], PI);
        for k in 0..8 {
            let kk = g.antipodal_plane_index(0, k) % 8;
            let d = (g.phi()[kk] - g.phi()[k] - PI).rem_euclid(2.0 * PI);
            assert!(d < 1e-12 || (2.0 * PI - d) < 1e-12);
        }
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(Grid::new(3, Symmetry::Full3D, 100, 8, Some(7)).is_err());
        assert!(Grid::new(3, Symmetry::SoReduced, 101, 8, None).is_err());
        assert!(Grid::new(5, Symmetry::Full3D, 100, 8, Some(8)).is_err());
        assert!(Grid::new(3, Symmetry::Full3D, 100, 8, None).is_err());
        assert!(Grid::new(3, Symmetry::SoReduced, 100, 8, Some(8)).is_err());
    }

    #[test]
    fn nearest_radial_index_snaps() {
        let g = Grid::new(3, Symmetry::SoReduced, 1000, 8, None).unwrap();
        assert_eq!(g.nearest_radial_index(1.0), 999);
        let i = g.nearest_radial_index(0.5);
        assert!((g.r()[i] - 0.5).abs() <= 0.5 * g.hr());
        assert_eq!(g.nearest_radial_index(0.0), 0);
    }
}
