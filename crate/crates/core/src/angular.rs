//! Pseudo-spectral angular operators on the staggered `(theta, phi)` grid.
//!
//! A smooth function on the sphere is expanded in `e^{i m phi}` and, for each
//! `m`, in `cos(l theta)` (even `m`) or `sin(l theta)` (odd `m`). The parity
//! split makes every basis function regular on the axis and encodes the
//! reflection symmetries of the sphere. SO(n-1)-reduced fields use the cosine
//! series alone.
//!
//! Coefficients are stored `m`-major: slot `m * ntheta + idx`, where the
//! physical order is `l = idx` for cosine columns and `l = idx + 1` for sine
//! columns. The `phi` Nyquist frequency is kept so that the transforms are
//! exact inverses, but every filter drops it.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Symmetry};
use crate::quadrature::{sine_power_cosine_integral, sphere_area};

/// Largest `N_theta` handled with dense matrices; above it the transforms run through FFTs.
pub const DENSE_MAX: usize = 32;

/// Trigonometric family of a `theta` column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaParity {
    /// `cos(l theta)`, `l = 0..N-1`.
    Cos,
    /// `sin(l theta)`, `l = 1..N`.
    Sin,
}

impl ThetaParity {
    pub fn of_m(m: usize) -> Self {
        if m.is_multiple_of(2) {
            ThetaParity::Cos
        } else {
            ThetaParity::Sin
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            ThetaParity::Cos => ThetaParity::Sin,
            ThetaParity::Sin => ThetaParity::Cos,
        }
    }

    /// Wavenumber stored in slot `idx`.
    pub fn l(self, idx: usize) -> usize {
        match self {
            ThetaParity::Cos => idx,
            ThetaParity::Sin => idx + 1,
        }
    }
}

/// Buffers for the FFT-backed `theta` transforms.
#[derive(Clone, Debug, Default)]
pub struct ThetaScratch {
    real: Vec<f64>,
    spec: Vec<Complex64>,
    fft: Vec<Complex64>,
    tmp: Vec<f64>,
}

enum ThetaKernel {
    Dense {
        cos_fwd: Vec<f64>,
        cos_inv: Vec<f64>,
        sin_fwd: Vec<f64>,
        sin_inv: Vec<f64>,
    },
    Fft {
        r2c: Arc<dyn RealToComplex<f64>>,
        c2r: Arc<dyn ComplexToReal<f64>>,
        /// `e^{-i pi k / (2N)}`, `k = 0..=N`.
        twiddle: Vec<Complex64>,
    },
}

/// Normalised Type-II cosine and sine transforms on `theta_j = (j + 1/2) pi / N`.
///
/// Forward maps samples to coefficients of `sum a_l cos(l theta)` or
/// `sum b_l sin(l theta)`; inverse evaluates those sums at the nodes.
pub struct ThetaTransform {
    n: usize,
    kernel: ThetaKernel,
}

impl std::fmt::Debug for ThetaTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kernel {
            ThetaKernel::Dense { .. } => "dense",
            ThetaKernel::Fft { .. } => "fft",
        };
        f.debug_struct("ThetaTransform").field("n", &self.n).field("kernel", &kind).finish()
    }
}

impl ThetaTransform {
    pub fn new(n: usize) -> Self {
        if n <= DENSE_MAX {
            Self::dense(n)
        } else {
            Self::fft(n)
        }
    }

    pub fn dense(n: usize) -> Self {
        let nf = n as f64;
        let theta = |j: usize| (j as f64 + 0.5) * PI / nf;
        let mut cos_fwd = vec![0.0; n * n];
        let mut cos_inv = vec![0.0; n * n];
        let mut sin_fwd = vec![0.0; n * n];
        let mut sin_inv = vec![0.0; n * n];
        for j in 0..n {
            for idx in 0..n {
                let c = (idx as f64 * theta(j)).cos();
                let s = if idx == n - 1 {
                    // sin(N theta_j) = (-1)^j exactly
                    if j % 2 == 0 { 1.0 } else { -1.0 }
                } else {
                    ((idx + 1) as f64 * theta(j)).sin()
                };
                // column-major
                cos_inv[idx * n + j] = c;
                sin_inv[idx * n + j] = s;
                cos_fwd[j * n + idx] = if idx == 0 { c / nf } else { 2.0 * c / nf };
                sin_fwd[j * n + idx] = if idx == n - 1 { s / nf } else { 2.0 * s / nf };
            }
        }
        Self {
            n,
            kernel: ThetaKernel::Dense { cos_fwd, cos_inv, sin_fwd, sin_inv },
        }
    }

    pub fn fft(n: usize) -> Self {
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(2 * n);
        let c2r = planner.plan_fft_inverse(2 * n);
        let twiddle = (0..=n)
            .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2.0 * n as f64)))
            .collect();
        Self {
            n,
            kernel: ThetaKernel::Fft { r2c, c2r, twiddle },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> ThetaScratch {
        match &self.kernel {
            ThetaKernel::Dense { .. } => ThetaScratch::default(),
            ThetaKernel::Fft { r2c, c2r, .. } => ThetaScratch {
                real: vec![0.0; 2 * self.n],
                spec: vec![Complex64::new(0.0, 0.0); self.n + 1],
                fft: vec![Complex64::new(0.0, 0.0); r2c.get_scratch_len().max(c2r.get_scratch_len())],
                tmp: vec![0.0; self.n],
            },
        }
    }

    /// Samples to coefficients.
    pub fn forward(&self, parity: ThetaParity, x: &[f64], out: &mut [f64], s: &mut ThetaScratch) {
        let n = self.n;
        match &self.kernel {
            ThetaKernel::Dense { cos_fwd, sin_fwd, .. } => {
                let m = if parity == ThetaParity::Cos { cos_fwd } else { sin_fwd };
                matvec(m, n, x, out);
            }
            ThetaKernel::Fft { r2c, twiddle, .. } => {
                let nf = n as f64;
                match parity {
                    ThetaParity::Cos => {
                        self.dct2(r2c.as_ref(), twiddle, x, out, s);
                        out[0] /= nf;
                        out[1..].iter_mut().for_each(|v| *v *= 2.0 / nf);
                    }
                    ThetaParity::Sin => {
                        let mut alt = std::mem::take(&mut s.tmp);
                        for (j, (a, v)) in alt.iter_mut().zip(x).enumerate() {
                            *a = if j % 2 == 0 { *v } else { -*v };
                        }
                        self.dct2(r2c.as_ref(), twiddle, &alt, out, s);
                        s.tmp = alt;
                        out.reverse();
                        out[..n - 1].iter_mut().for_each(|v| *v *= 2.0 / nf);
                        out[n - 1] /= nf;
                    }
                }
            }
        }
    }

    /// Unnormalised DCT-II, `X_k = sum_j x_j cos(pi k (j + 1/2) / N)`.
    fn dct2(
        &self,
        r2c: &dyn RealToComplex<f64>,
        twiddle: &[Complex64],
        x: &[f64],
        out: &mut [f64],
        s: &mut ThetaScratch,
    ) {
        let n = self.n;
        for (j, &v) in x.iter().enumerate() {
            s.real[j] = v;
            s.real[2 * n - 1 - j] = v;
        }
        r2c.process_with_scratch(&mut s.real, &mut s.spec, &mut s.fft)
            .expect("buffer sizes fixed at plan time");
        for k in 0..n {
            out[k] = 0.5 * (twiddle[k] * s.spec[k]).re;
        }
    }

    /// Coefficients to samples.
    pub fn inverse(&self, parity: ThetaParity, a: &[f64], out: &mut [f64], s: &mut ThetaScratch) {
        let n = self.n;
        match &self.kernel {
            ThetaKernel::Dense { cos_inv, sin_inv, .. } => {
                let m = if parity == ThetaParity::Cos { cos_inv } else { sin_inv };
                matvec(m, n, a, out);
            }
            ThetaKernel::Fft { c2r, twiddle, .. } => {
                match parity {
                    ThetaParity::Cos => {
                        s.spec[0] = Complex64::new(a[0], 0.0);
                        for l in 1..n {
                            s.spec[l] = 0.5 * a[l] * twiddle[l].conj();
                        }
                        s.spec[n] = Complex64::new(0.0, 0.0);
                    }
                    ThetaParity::Sin => {
                        s.spec[0] = Complex64::new(0.0, 0.0);
                        for l in 1..n {
                            s.spec[l] = Complex64::new(0.0, -0.5 * a[l - 1]) * twiddle[l].conj();
                        }
                        s.spec[n] = Complex64::new(a[n - 1], 0.0);
                    }
                }
                c2r.process_with_scratch(&mut s.spec, &mut s.real, &mut s.fft)
                    .expect("buffer sizes fixed at plan time");
                out.copy_from_slice(&s.real[..n]);
            }
        }
    }
}

/// `out = M x` with `M` stored column-major.
fn matvec(m: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (col, &xj) in m.chunks_exact(n).zip(x) {
        for (o, a) in out.iter_mut().zip(col) {
            *o += a * xj;
        }
    }
}

/// `out1 = M1 x`, `out2 = M2 x` in one pass; both column-major.
fn matvec2(m1: &[f64], m2: &[f64], n: usize, x: &[f64], out1: &mut [f64], out2: &mut [f64]) {
    out1.fill(0.0);
    out2.fill(0.0);
    for ((c1, c2), &xj) in m1.chunks_exact(n).zip(m2.chunks_exact(n)).zip(x) {
        for (o, a) in out1.iter_mut().zip(c1) {
            *o += a * xj;
        }
        for (o, a) in out2.iter_mut().zip(c2) {
            *o += a * xj;
        }
    }
}

/// Angular expansion coefficients of one shell.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    symmetry: Symmetry,
    ntheta: usize,
    nm: usize,
    data: Vec<Complex64>,
}

impl SpectralCoeffs {
    fn zeros(symmetry: Symmetry, ntheta: usize, nm: usize) -> Self {
        Self {
            symmetry,
            ntheta,
            nm,
            data: vec![Complex64::new(0.0, 0.0); ntheta * nm],
        }
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    /// Number of stored `phi` frequencies `m = 0..nm` (1 under SO(n-1) symmetry).
    pub fn nm(&self) -> usize {
        self.nm
    }

    pub fn parity(&self, m: usize) -> ThetaParity {
        match self.symmetry {
            Symmetry::Full3D => ThetaParity::of_m(m),
            Symmetry::SoReduced => ThetaParity::Cos,
        }
    }

    /// Coefficient of `cos(l theta)` or `sin(l theta)` times `e^{i m phi}`;
    /// zero if `(l, m)` is not representable.
    pub fn get(&self, l: usize, m: usize) -> Complex64 {
        if m >= self.nm {
            return Complex64::new(0.0, 0.0);
        }
        let idx = match self.parity(m) {
            ThetaParity::Cos => l,
            ThetaParity::Sin => match l.checked_sub(1) {
                Some(i) => i,
                None => return Complex64::new(0.0, 0.0),
            },
        };
        if idx < self.ntheta {
            self.data[m * self.ntheta + idx]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, l: usize, m: usize, v: Complex64) -> Result<()> {
        let idx = match self.parity(m) {
            ThetaParity::Cos => Some(l),
            ThetaParity::Sin => l.checked_sub(1),
        };
        match idx {
            Some(idx) if idx < self.ntheta && m < self.nm => {
                self.data[m * self.ntheta + idx] = v;
                Ok(())
            }
            _ => Err(Error::domain(format!("mode (l={l}, m={m}) not representable"))),
        }
    }

    /// `(l, m, coefficient)` for every slot.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.data.iter().enumerate().map(move |(s, &v)| {
            let (m, idx) = (s / self.ntheta, s % self.ntheta);
            (self.parity(m).l(idx), m, v)
        })
    }

    /// Zero every slot with `theta` wavenumber `l >= cut`.
    pub fn truncate_l(&mut self, cut: usize) {
        for m in 0..self.nm {
            let par = self.parity(m);
            for idx in 0..self.ntheta {
                if par.l(idx) >= cut {
                    self.data[m * self.ntheta + idx] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}

/// Which projections the evolution applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilterSettings {
    pub dealias: bool,
    pub pole: bool,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self { dealias: true, pole: true }
    }
}

/// Per-shell scratch space.
#[derive(Clone, Debug)]
pub struct AngularWorkspace {
    spectrum: Vec<Complex64>,
    spectrum_lap: Vec<Complex64>,
    row: Vec<f64>,
    row_spec: Vec<Complex64>,
    phi_scratch: Vec<Complex64>,
    theta: ThetaScratch,
    col: [Vec<f64>; 6],
}

struct PhiFft {
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

/// Fused filter and Laplacian for one `m`, acting on a real `theta` column.
struct FusedColumn {
    project: Vec<f64>,
    laplacian: Vec<f64>,
}

/// Angular transforms, derivatives, filters and quadrature for one grid.
pub struct AngularOps {
    symmetry: Symmetry,
    n: usize,
    ntheta: usize,
    nphi: usize,
    nm: usize,
    theta: ThetaTransform,
    phi: Option<PhiFft>,
    cot: Vec<f64>,
    inv_sin2: Vec<f64>,
    /// Coefficient of `cot(theta) d_theta` in the Laplacian.
    cot_coef: f64,
    dealias_cut: usize,
    filters: FilterSettings,
    /// At latitude `j` the frequencies `m >= pole_keep[j]` are removed.
    pole_keep: Vec<usize>,
    fused: Option<Vec<FusedColumn>>,
    sphere_weights: Vec<f64>,
    sphere_coeff_weights: Vec<f64>,
}

impl std::fmt::Debug for AngularOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AngularOps")
            .field("symmetry", &self.symmetry)
            .field("ntheta", &self.ntheta)
            .field("nphi", &self.nphi)
            .field("filters", &self.filters)
            .finish()
    }
}

/// `ceil(2 N / 3)`: the first `theta` wavenumber removed by dealiasing.
pub fn dealias_cutoff(ntheta: usize) -> usize {
    (2 * ntheta).div_ceil(3)
}

/// Number of `phi` frequencies (out of `nphi / 2`) kept at a latitude with `sin(theta) = s`.
pub fn pole_keep_count(sin_theta: f64, nphi: usize) -> usize {
    let half = nphi / 2;
    let removed = ((1.0 - sin_theta) * half as f64 + 1e-12).floor() as usize;
    half - removed.min(half)
}

impl AngularOps {
    pub fn new(grid: &Grid, filters: FilterSettings) -> Result<Self> {
        let (ntheta, nphi) = (grid.ntheta(), grid.nphi());
        let symmetry = grid.symmetry();
        let nm = match symmetry {
            Symmetry::Full3D => nphi / 2 + 1,
            Symmetry::SoReduced => 1,
        };
        let phi = match symmetry {
            Symmetry::Full3D => {
                let mut planner = RealFftPlanner::<f64>::new();
                Some(PhiFft {
                    r2c: planner.plan_fft_forward(nphi),
                    c2r: planner.plan_fft_inverse(nphi),
                })
            }
            Symmetry::SoReduced => None,
        };
        let sin: Vec<f64> = grid.theta().iter().map(|t| t.sin()).collect();
        let cot = grid.theta().iter().map(|t| t.cos() / t.sin()).collect();
        let inv_sin2 = sin.iter().map(|s| 1.0 / (s * s)).collect();
        let pole_keep = sin
            .iter()
            .map(|&s| match symmetry {
                Symmetry::Full3D if filters.pole => pole_keep_count(s, nphi),
                Symmetry::Full3D => nphi / 2,
                Symmetry::SoReduced => 1,
            })
            .collect();
        let cot_coef = match symmetry {
            Symmetry::Full3D => 1.0,
            Symmetry::SoReduced => grid.n() as f64 - 2.0,
        };

        let mut ops = Self {
            symmetry,
            n: grid.n(),
            ntheta,
            nphi,
            nm,
            theta: ThetaTransform::new(ntheta),
            phi,
            cot,
            inv_sin2,
            cot_coef,
            dealias_cut: if filters.dealias { dealias_cutoff(ntheta) } else { usize::MAX },
            filters,
            pole_keep,
            fused: None,
            sphere_weights: Vec::new(),
            sphere_coeff_weights: Vec::new(),
        };
        ops.sphere_coeff_weights = ops.build_sphere_coeff_weights()?;
        ops.sphere_weights = ops.build_sphere_weights();
        if ntheta <= DENSE_MAX {
            ops.fused = Some(ops.build_fused());
        }
        Ok(ops)
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn filters(&self) -> FilterSettings {
        self.filters
    }

    pub fn plane(&self) -> usize {
        self.ntheta * self.nphi
    }

    pub fn workspace(&self) -> AngularWorkspace {
        let nt = self.ntheta;
        let (row_spec, phi_scratch) = match &self.phi {
            Some(p) => (
                vec![Complex64::new(0.0, 0.0); self.nphi / 2 + 1],
                vec![Complex64::new(0.0, 0.0); p.r2c.get_scratch_len().max(p.c2r.get_scratch_len())],
            ),
            None => (Vec::new(), Vec::new()),
        };
        AngularWorkspace {
            spectrum: vec![Complex64::new(0.0, 0.0); self.nm * nt],
            spectrum_lap: vec![Complex64::new(0.0, 0.0); self.nm * nt],
            row: vec![0.0; self.nphi],
            row_spec,
            phi_scratch,
            theta: self.theta.scratch(),
            col: std::array::from_fn(|_| vec![0.0; nt]),
        }
    }

    fn parity(&self, m: usize) -> ThetaParity {
        match self.symmetry {
            Symmetry::Full3D => ThetaParity::of_m(m),
            Symmetry::SoReduced => ThetaParity::Cos,
        }
    }

    fn check_plane(&self, plane: &[f64]) -> Result<()> {
        if plane.len() != self.plane() {
            return Err(Error::Shape {
                expected: self.plane(),
                got: plane.len(),
            });
        }
        Ok(())
    }

    /// Real FFT along every latitude into `spectrum[m * ntheta + j]`.
    fn phi_forward(&self, ws: &mut AngularWorkspace, plane: &[f64], spectrum: &mut [Complex64]) {
        let nt = self.ntheta;
        match &self.phi {
            None => {
                for (s, &v) in spectrum.iter_mut().zip(plane) {
                    *s = Complex64::new(v, 0.0);
                }
            }
            Some(fft) => {
                let np = self.nphi;
                let half = np / 2;
                let nf = np as f64;
                for j in 0..nt {
                    ws.row.copy_from_slice(&plane[j * np..(j + 1) * np]);
                    fft.r2c
                        .process_with_scratch(&mut ws.row, &mut ws.row_spec, &mut ws.phi_scratch)
                        .expect("buffer sizes fixed at plan time");
                    for (m, c) in ws.row_spec.iter().enumerate() {
                        let w = if m == 0 || m == half { 1.0 / nf } else { 2.0 / nf };
                        spectrum[m * nt + j] = c * w;
                    }
                }
            }
        }
    }

    /// Inverse of [`Self::phi_forward`]; imaginary parts of `m = 0` and the Nyquist slot are ignored.
    fn phi_inverse(&self, ws: &mut AngularWorkspace, spectrum: &[Complex64], plane: &mut [f64]) {
        let nt = self.ntheta;
        match &self.phi {
            None => {
                for (v, s) in plane.iter_mut().zip(spectrum) {
                    *v = s.re;
                }
            }
            Some(fft) => {
                let np = self.nphi;
                let half = np / 2;
                for j in 0..nt {
                    for m in 0..=half {
                        let a = spectrum[m * nt + j];
                        ws.row_spec[m] = if m == 0 || m == half { Complex64::new(a.re, 0.0) } else { 0.5 * a };
                    }
                    fft.c2r
                        .process_with_scratch(&mut ws.row_spec, &mut ws.row, &mut ws.phi_scratch)
                        .expect("buffer sizes fixed at plan time");
                    plane[j * np..(j + 1) * np].copy_from_slice(&ws.row);
                }
            }
        }
    }

    /// Applies a real-linear column map to the real and imaginary parts of column `m`.
    fn map_column(
        &self,
        col: &[Complex64],
        out: &mut [Complex64],
        ws_cols: &mut [Vec<f64>; 6],
        scratch: &mut ThetaScratch,
        f: impl Fn(&Self, &[f64], &mut [f64], &mut ThetaScratch),
    ) {
        let [re, im, ore, oim, ..] = ws_cols;
        for (j, c) in col.iter().enumerate() {
            re[j] = c.re;
            im[j] = c.im;
        }
        f(self, re, ore, scratch);
        f(self, im, oim, scratch);
        for (j, o) in out.iter_mut().enumerate() {
            *o = Complex64::new(ore[j], oim[j]);
        }
    }

    /// Samples on one shell to expansion coefficients (no filtering).
    pub fn to_coeffs(&self, plane: &[f64]) -> Result<SpectralCoeffs> {
        self.check_plane(plane)?;
        let mut ws = self.workspace();
        let mut spectrum = std::mem::take(&mut ws.spectrum);
        self.phi_forward(&mut ws, plane, &mut spectrum);
        let mut c = SpectralCoeffs::zeros(self.symmetry, self.ntheta, self.nm);
        let nt = self.ntheta;
        for m in 0..self.nm {
            let par = self.parity(m);
            self.map_column(
                &spectrum[m * nt..(m + 1) * nt],
                &mut c.data[m * nt..(m + 1) * nt],
                &mut ws.col,
                &mut ws.theta,
                |ops, x, y, s| ops.theta.forward(par, x, y, s),
            );
        }
        Ok(c)
    }

    /// Evaluates an expansion at the shell nodes.
    pub fn from_coeffs(&self, c: &SpectralCoeffs) -> Result<Vec<f64>> {
        if c.ntheta != self.ntheta || c.nm != self.nm {
            return Err(Error::Shape {
                expected: self.ntheta * self.nm,
                got: c.data.len(),
            });
        }
        let mut ws = self.workspace();
        let nt = self.ntheta;
        let mut spectrum = std::mem::take(&mut ws.spectrum);
        for m in 0..self.nm {
            let par = self.parity(m);
            self.map_column(
                &c.data[m * nt..(m + 1) * nt],
                &mut spectrum[m * nt..(m + 1) * nt],
                &mut ws.col,
                &mut ws.theta,
                |ops, x, y, s| ops.theta.inverse(par, x, y, s),
            );
        }
        let mut plane = vec![0.0; self.plane()];
        self.phi_inverse(&mut ws, &spectrum, &mut plane);
        Ok(plane)
    }

    /// 2/3-rule truncation in `theta`: zero every `l >= ceil(2 N_theta / 3)`.
    pub fn dealias(&self, c: &mut SpectralCoeffs) {
        c.truncate_l(dealias_cutoff(self.ntheta));
    }

    /// Per-latitude removal of the highest `phi` frequencies, by the fraction
    /// `1 - sin(theta_j)` of the `N_phi / 2` non-Nyquist ones. Identity under SO symmetry.
    pub fn pole_filter(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.check_plane(plane)?;
        if self.phi.is_none() {
            return Ok(plane.to_vec());
        }
        let mut ws = self.workspace();
        let mut spectrum = std::mem::take(&mut ws.spectrum);
        self.phi_forward(&mut ws, plane, &mut spectrum);
        let nt = self.ntheta;
        for j in 0..nt {
            let keep = pole_keep_count(self.sin_theta(j), self.nphi);
            for m in keep..self.nm {
                spectrum[m * nt + j] = Complex64::new(0.0, 0.0);
            }
        }
        let mut out = vec![0.0; self.plane()];
        self.phi_inverse(&mut ws, &spectrum, &mut out);
        Ok(out)
    }

    fn sin_theta(&self, j: usize) -> f64 {
        ((j as f64 + 0.5) * PI / self.ntheta as f64).sin()
    }

    /// `theta`-derivative coefficients of a column: the result has the swapped parity.
    fn theta_derivative_coeffs(par: ThetaParity, a: &[f64], out: &mut [f64]) {
        let n = a.len();
        match par {
            ThetaParity::Cos => {
                // cos(l t)' = -l sin(l t); sin slot idx holds l = idx + 1
                for idx in 0..n {
                    let l = idx + 1;
                    out[idx] = if l < n { -(l as f64) * a[l] } else { 0.0 };
                }
            }
            ThetaParity::Sin => {
                // sin(l t)' = l cos(l t); the l = N cosine vanishes on the grid
                out[0] = 0.0;
                for l in 1..n {
                    out[l] = l as f64 * a[l - 1];
                }
            }
        }
    }

    /// Column pipeline shared by every derivative: optional pole mask on the
    /// samples, forward transform, optional dealias mask.
    fn column_coeffs(&self, m: usize, x: &[f64], a: &mut [f64], s: &mut ThetaScratch, filtered: bool) {
        let par = self.parity(m);
        if filtered && self.phi.is_some() {
            let masked: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(j, &v)| if m < self.pole_keep[j] { v } else { 0.0 })
                .collect();
            self.theta.forward(par, &masked, a, s);
        } else {
            self.theta.forward(par, x, a, s);
        }
        if filtered {
            for (idx, v) in a.iter_mut().enumerate() {
                if par.l(idx) >= self.dealias_cut {
                    *v = 0.0;
                }
            }
        }
    }

    /// Filtered column values and the Laplacian of the filtered column, for frequency `m`.
    fn column_project_laplacian(&self, m: usize, x: &[f64], proj: &mut [f64], lap: &mut [f64], s: &mut ThetaScratch) {
        let nt = self.ntheta;
        let par = self.parity(m);
        let mut a = vec![0.0; nt];
        self.column_coeffs(m, x, &mut a, s, true);
        self.theta.inverse(par, &a, proj, s);

        let mut b = vec![0.0; nt];
        let mut tmp = vec![0.0; nt];
        Self::theta_derivative_coeffs(par, &a, &mut b);
        self.theta.inverse(par.swapped(), &b, &mut tmp, s);
        for (idx, v) in a.iter_mut().enumerate() {
            let l = par.l(idx) as f64;
            *v *= -l * l;
        }
        self.theta.inverse(par, &a, lap, s);
        let m2 = (m * m) as f64;
        for j in 0..nt {
            lap[j] += self.cot_coef * self.cot[j] * tmp[j] - m2 * self.inv_sin2[j] * proj[j];
        }
    }

    fn build_fused(&self) -> Vec<FusedColumn> {
        let nt = self.ntheta;
        let mut s = self.theta.scratch();
        let half = self.nphi / 2;
        (0..self.nm)
            .map(|m| {
                let mut project = vec![0.0; nt * nt];
                let mut laplacian = vec![0.0; nt * nt];
                let dropped = self.phi.is_some() && m == half;
                if !dropped {
                    let mut e = vec![0.0; nt];
                    let mut p = vec![0.0; nt];
                    let mut l = vec![0.0; nt];
                    for j in 0..nt {
                        e.fill(0.0);
                        e[j] = 1.0;
                        self.column_project_laplacian(m, &e, &mut p, &mut l, &mut s);
                        project[j * nt..(j + 1) * nt].copy_from_slice(&p);
                        laplacian[j * nt..(j + 1) * nt].copy_from_slice(&l);
                    }
                }
                FusedColumn { project, laplacian }
            })
            .collect()
    }

    /// Replace a shell by its filtered version (pole filter, 2/3 rule, Nyquist removal).
    pub fn project(&self, ws: &mut AngularWorkspace, plane: &mut [f64]) {
        self.project_impl(ws, plane, None);
    }

    /// Filter a shell in place and write the Laplacian of the filtered shell into `lap`.
    pub fn project_with_laplacian(&self, ws: &mut AngularWorkspace, plane: &mut [f64], lap: &mut [f64]) {
        self.project_impl(ws, plane, Some(lap));
    }

    fn project_impl(&self, ws: &mut AngularWorkspace, plane: &mut [f64], lap: Option<&mut [f64]>) {
        let nt = self.ntheta;
        if let (None, Some(f)) = (&self.phi, &self.fused) {
            // one real column, no phi transform needed
            let x = &mut ws.col[0];
            x.copy_from_slice(plane);
            match lap {
                Some(lap) => matvec2(&f[0].project, &f[0].laplacian, nt, x, plane, lap),
                None => matvec(&f[0].project, nt, x, plane),
            }
            return;
        }
        let mut spectrum = std::mem::take(&mut ws.spectrum);
        let mut spec_lap = std::mem::take(&mut ws.spectrum_lap);
        self.phi_forward(ws, plane, &mut spectrum);
        let want_lap = lap.is_some();
        let half = self.nphi / 2;
        for m in 0..self.nm {
            let cols = m * nt..(m + 1) * nt;
            if self.phi.is_some() && m == half {
                spectrum[cols.clone()].fill(Complex64::new(0.0, 0.0));
                spec_lap[cols].fill(Complex64::new(0.0, 0.0));
                continue;
            }
            let [re, im, pre, pim, lre, lim] = &mut ws.col;
            for (j, c) in spectrum[cols.clone()].iter().enumerate() {
                re[j] = c.re;
                im[j] = c.im;
            }
            let is_real = self.phi.is_none() || m == 0;
            match &self.fused {
                Some(f) => {
                    let fc = &f[m];
                    if want_lap {
                        matvec2(&fc.project, &fc.laplacian, nt, re, pre, lre);
                        if !is_real {
                            matvec2(&fc.project, &fc.laplacian, nt, im, pim, lim);
                        }
                    } else {
                        matvec(&fc.project, nt, re, pre);
                        if !is_real {
                            matvec(&fc.project, nt, im, pim);
                        }
                    }
                }
                None => {
                    self.column_project_laplacian(m, re, pre, lre, &mut ws.theta);
                    if !is_real {
                        self.column_project_laplacian(m, im, pim, lim, &mut ws.theta);
                    }
                }
            }
            if is_real {
                pim.fill(0.0);
                lim.fill(0.0);
            }
            for j in 0..nt {
                spectrum[m * nt + j] = Complex64::new(pre[j], pim[j]);
                spec_lap[m * nt + j] = Complex64::new(lre[j], lim[j]);
            }
        }
        self.phi_inverse(ws, &spectrum, plane);
        if let Some(lap) = lap {
            self.phi_inverse(ws, &spec_lap, lap);
        }
        ws.spectrum = spectrum;
        ws.spectrum_lap = spec_lap;
    }

    /// Unfiltered spectral derivative helper: per-`m` column map on the `phi` spectrum.
    fn spectral_map(
        &self,
        plane: &[f64],
        f: impl Fn(&Self, usize, &[f64], &mut [f64], &mut ThetaScratch),
    ) -> Result<Vec<f64>> {
        self.check_plane(plane)?;
        let mut ws = self.workspace();
        let nt = self.ntheta;
        let mut spectrum = std::mem::take(&mut ws.spectrum);
        let mut out_spec = std::mem::take(&mut ws.spectrum_lap);
        self.phi_forward(&mut ws, plane, &mut spectrum);
        for m in 0..self.nm {
            self.map_column(
                &spectrum[m * nt..(m + 1) * nt],
                &mut out_spec[m * nt..(m + 1) * nt],
                &mut ws.col,
                &mut ws.theta,
                |ops, x, y, s| f(ops, m, x, y, s),
            );
        }
        let mut out = vec![0.0; self.plane()];
        self.phi_inverse(&mut ws, &out_spec, &mut out);
        Ok(out)
    }

    /// `d/d theta` of one shell.
    pub fn d_theta(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.spectral_map(plane, |ops, m, x, y, s| {
            let par = ops.parity(m);
            let mut a = vec![0.0; x.len()];
            let mut b = vec![0.0; x.len()];
            ops.theta.forward(par, x, &mut a, s);
            Self::theta_derivative_coeffs(par, &a, &mut b);
            ops.theta.inverse(par.swapped(), &b, y, s);
        })
    }

    /// `d^2/d theta^2` of one shell.
    pub fn d_theta2(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.spectral_map(plane, |ops, m, x, y, s| {
            let par = ops.parity(m);
            let mut a = vec![0.0; x.len()];
            ops.theta.forward(par, x, &mut a, s);
            for (idx, v) in a.iter_mut().enumerate() {
                let l = par.l(idx) as f64;
                *v *= -l * l;
            }
            ops.theta.inverse(par, &a, y, s);
        })
    }

    /// `d/d phi` of one shell; zero under SO symmetry. The Nyquist frequency has zero derivative.
    pub fn d_phi(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.check_plane(plane)?;
        if self.phi.is_none() {
            return Ok(vec![0.0; plane.len()]);
        }
        let mut ws = self.workspace();
        let mut spectrum = std::mem::take(&mut ws.spectrum);
        self.phi_forward(&mut ws, plane, &mut spectrum);
        let nt = self.ntheta;
        let half = self.nphi / 2;
        for (s, c) in spectrum.iter_mut().enumerate() {
            let m = s / nt;
            *c = if m == half { Complex64::new(0.0, 0.0) } else { *c * Complex64::new(0.0, m as f64) };
        }
        let mut out = vec![0.0; plane.len()];
        self.phi_inverse(&mut ws, &spectrum, &mut out);
        Ok(out)
    }

    /// Angular Laplacian of one shell, unfiltered: `d_theta^2 + cot d_theta + sin^{-2} d_phi^2`
    /// on `S^2`, or `d_theta^2 + (n - 2) cot d_theta` under SO(n-1) symmetry.
    pub fn laplacian(&self, plane: &[f64]) -> Result<Vec<f64>> {
        self.spectral_map(plane, |ops, m, x, y, s| {
            let nt = x.len();
            let par = ops.parity(m);
            let mut a = vec![0.0; nt];
            let mut b = vec![0.0; nt];
            let mut dt = vec![0.0; nt];
            ops.theta.forward(par, x, &mut a, s);
            Self::theta_derivative_coeffs(par, &a, &mut b);
            ops.theta.inverse(par.swapped(), &b, &mut dt, s);
            for (idx, v) in a.iter_mut().enumerate() {
                let l = par.l(idx) as f64;
                *v *= -l * l;
            }
            ops.theta.inverse(par, &a, y, s);
            let m2 = (m * m) as f64;
            for j in 0..nt {
                y[j] += ops.cot_coef * ops.cot[j] * dt[j] - m2 * ops.inv_sin2[j] * x[j];
            }
        })
    }

    /// `|grad u|^2` on the unit sphere at every node of one shell.
    pub fn gradient_squared(&self, plane: &[f64]) -> Result<Vec<f64>> {
        let mut g: Vec<f64> = self.d_theta(plane)?.iter().map(|v| v * v).collect();
        if self.phi.is_some() {
            let dp = self.d_phi(plane)?;
            let np = self.nphi;
            for (q, v) in g.iter_mut().enumerate() {
                *v += dp[q] * dp[q] * self.inv_sin2[q / np];
            }
        }
        Ok(g)
    }

    /// `int_{S^{n-1}} u dS` of the truncated expansion, from coefficients.
    pub fn sphere_integral_coeffs(&self, c: &SpectralCoeffs) -> f64 {
        self.sphere_coeff_weights
            .iter()
            .enumerate()
            .map(|(l, w)| w * c.get(l, 0).re)
            .sum()
    }

    /// `int_{S^{n-1}} u dS` as a fixed weighted sum of `phi`-means.
    pub fn sphere_integral(&self, plane: &[f64]) -> f64 {
        let np = self.nphi;
        let inv = 1.0 / np as f64;
        self.sphere_weights
            .iter()
            .zip(plane.chunks_exact(np))
            .map(|(w, row)| w * row.iter().sum::<f64>() * inv)
            .sum()
    }

    pub fn sphere_weights(&self) -> &[f64] {
        &self.sphere_weights
    }

    /// Weights multiplying the cosine coefficients `a_{l0}`.
    fn build_sphere_coeff_weights(&self) -> Result<Vec<f64>> {
        let nt = self.ntheta;
        match self.symmetry {
            Symmetry::Full3D => Ok((0..nt)
                .map(|l| if l % 2 == 0 { 2.0 * PI * 2.0 / (1.0 - (l * l) as f64) } else { 0.0 })
                .collect()),
            Symmetry::SoReduced => {
                let k = self.n as u32 - 2;
                let area = sphere_area(k);
                (0..nt).map(|l| Ok(area * sine_power_cosine_integral(k, l)?)).collect()
            }
        }
    }

    fn build_sphere_weights(&self) -> Vec<f64> {
        let nt = self.ntheta;
        let dense = ThetaTransform::dense(nt);
        let mut s = dense.scratch();
        let mut e = vec![0.0; nt];
        let mut a = vec![0.0; nt];
        (0..nt)
            .map(|j| {
                e.fill(0.0);
                e[j] = 1.0;
                dense.forward(ThetaParity::Cos, &e, &mut a, &mut s);
                a.iter().zip(&self.sphere_coeff_weights).map(|(x, w)| x * w).sum()
            })
            .collect()
    }

    /// Applies `op` to every radial shell.
    pub fn map_shells(&self, f: &Field, op: impl Fn(&Self, &[f64]) -> Result<Vec<f64>>) -> Result<Field> {
        let shape = f.shape();
        let mut out = Field::zeros(shape);
        for i in 0..shape.nr {
            let v = op(self, f.shell(i))?;
            out.shell_mut(i).copy_from_slice(&v);
        }
        Ok(out)
    }

    /// Projects every shell of a field in place.
    pub fn project_field(&self, ws: &mut AngularWorkspace, f: &mut Field) {
        for i in 0..f.shape().nr {
            self.project(ws, f.shell_mut(i));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn so(n: usize, nth: usize) -> (Grid, AngularOps) {
        let g = Grid::new(n, Symmetry::SoReduced, 8, nth, None).unwrap();
        let a = AngularOps::new(&g, FilterSettings::default()).unwrap();
        (g, a)
    }

    fn full(nth: usize, nph: usize) -> (Grid, AngularOps) {
        let g = Grid::new(3, Symmetry::Full3D, 8, nth, Some(nph)).unwrap();
        let a = AngularOps::new(&g, FilterSettings::default()).unwrap();
        (g, a)
    }

    fn sample(g: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = Vec::new();
        for &t in g.theta() {
            for &p in g.phi() {
                v.push(f(t, p));
            }
        }
        v
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn dense_and_fft_transforms_agree() {
        let mut seed = 7;
        for n in [4, 7, 12, 16, 33, 64] {
            let d = ThetaTransform::dense(n);
            let f = ThetaTransform::fft(n);
            let (mut sd, mut sf) = (d.scratch(), f.scratch());
            let x: Vec<f64> = (0..n).map(|_| lcg(&mut seed)).collect();
            for par in [ThetaParity::Cos, ThetaParity::Sin] {
                let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
                d.forward(par, &x, &mut a, &mut sd);
                f.forward(par, &x, &mut b, &mut sf);
                assert!(max_diff(&a, &b) < 1e-13, "forward n={n} {par:?}");
                let (mut u, mut w) = (vec![0.0; n], vec![0.0; n]);
                d.inverse(par, &a, &mut u, &mut sd);
                f.inverse(par, &a, &mut w, &mut sf);
                assert!(max_diff(&u, &w) < 1e-13, "inverse n={n} {par:?}");
                assert!(max_diff(&u, &x) < 1e-13, "round trip n={n} {par:?}");
            }
        }
    }

    #[test]
    fn basis_functions_map_to_unit_coefficients() {
        let (g, a) = so(3, 8);
        let c = a.to_coeffs(&sample(&g, |_, _| 1.0)).unwrap();
        assert_relative_eq!(c.get(0, 0).re, 1.0, epsilon = 1e-15);
        assert!(c.iter().filter(|&(l, _, _)| l != 0).all(|(_, _, v)| v.norm() < 1e-14));
        let c = a.to_coeffs(&sample(&g, |t, _| (3.0 * t).cos())).unwrap();
        for (l, _, v) in c.iter() {
            let want = if l == 3 { 1.0 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-14);
        }

        let (g, a) = full(8, 8);
        let c = a
            .to_coeffs(&sample(&g, |t, p| (2.0 * t).cos() * (2.0 * p).cos() + t.sin() * p.sin()))
            .unwrap();
        let nonzero: Vec<_> = c.iter().filter(|(_, _, v)| v.norm() > 1e-13).collect();
        assert_eq!(nonzero.len(), 2);
        assert_relative_eq!(c.get(2, 2).re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.get(1, 1).im, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn round_trip_on_random_fields() {
        let mut seed = 11;
        for (nth, nph) in [(8, 8), (8, 16), (16, 8), (16, 16), (40, 12)] {
            let (_, a) = full(nth, nph);
            let u: Vec<f64> = (0..nth * nph).map(|_| lcg(&mut seed)).collect();
            let back = a.from_coeffs(&a.to_coeffs(&u).unwrap()).unwrap();
            assert!(max_diff(&u, &back) < 1e-12);
        }
        for nth in [8, 16, 48] {
            let (_, a) = so(5, nth);
            let u: Vec<f64> = (0..nth).map(|_| lcg(&mut seed)).collect();
            let back = a.from_coeffs(&a.to_coeffs(&u).unwrap()).unwrap();
            assert!(max_diff(&u, &back) < 1e-12);
        }
    }

    #[test]
    fn single_mode_derivatives() {
        let (g, a) = so(3, 8);
        let d = a.d_theta(&sample(&g, |t, _| (2.0 * t).cos())).unwrap();
        assert!(max_diff(&d, &sample(&g, |t, _| -2.0 * (2.0 * t).sin())) < 1e-13);

        let (g, a) = full(8, 8);
        let u = sample(&g, |t, p| t.sin() * p.sin());
        assert!(max_diff(&a.d_phi(&u).unwrap(), &sample(&g, |t, p| t.sin() * p.cos())) < 1e-14);
        assert!(max_diff(&a.d_theta(&u).unwrap(), &sample(&g, |t, p| t.cos() * p.sin())) < 1e-13);
    }

    #[test]
    fn derivative_of_five_dimensional_quadrupole() {
        let (g, a) = so(5, 8);
        let y2 = |t: f64| 21f64.sqrt() / (8.0 * PI) * (5.0 * t.cos().powi(2) - 1.0);
        let dy2 = |t: f64| -21f64.sqrt() / (8.0 * PI) * 10.0 * t.cos() * t.sin();
        let d = a.d_theta(&sample(&g, |t, _| y2(t))).unwrap();
        assert!(max_diff(&d, &sample(&g, |t, _| dy2(t))) < 1e-12);
    }

    #[test]
    fn derivatives_commute() {
        let (g, a) = full(12, 12);
        let u = sample(&g, |t, p| (t.cos() * 2.0).exp() * t.sin().powi(2) * (2.0 * p).cos() + t.sin() * t.cos() * p.sin());
        let tp = a.d_phi(&a.d_theta(&u).unwrap()).unwrap();
        let pt = a.d_theta(&a.d_phi(&u).unwrap()).unwrap();
        assert!(max_diff(&tp, &pt) < 1e-11);
    }

    #[test]
    fn laplacian_eigenvalues_reduced() {
        for n in [3usize, 4, 5, 6] {
            let (g, a) = so(n, 12);
            let lap = a.laplacian(&sample(&g, |_, _| 1.0)).unwrap();
            assert!(lap.iter().all(|v| v.abs() < 1e-12));
            let u = sample(&g, |t, _| t.cos());
            let lap = a.laplacian(&u).unwrap();
            let want: Vec<f64> = u.iter().map(|v| -(n as f64 - 1.0) * v).collect();
            assert!(max_diff(&lap, &want) < 1e-11, "n={n}");
        }
    }

    #[test]
    fn laplacian_of_quadrupole_on_two_sphere() {
        let (g, a) = full(8, 8);
        let u = sample(&g, |t, p| t.sin().powi(2) * (2.0 * p).cos());
        let lap = a.laplacian(&u).unwrap();
        let want: Vec<f64> = u.iter().map(|v| -6.0 * v).collect();
        assert!(max_diff(&lap, &want) < 1e-10);
    }

    #[test]
    fn fused_projection_matches_generic_pipeline() {
        let mut seed = 3;
        for (sym, nth, nph) in [(Symmetry::Full3D, 8, 12), (Symmetry::SoReduced, 12, 1)] {
            let nphi = if sym == Symmetry::Full3D { Some(nph) } else { None };
            let g = Grid::new(3, sym, 8, nth, nphi).unwrap();
            let ops = AngularOps::new(&g, FilterSettings::default()).unwrap();
            let mut slow = AngularOps::new(&g, FilterSettings::default()).unwrap();
            slow.fused = None;
            let u: Vec<f64> = (0..g.shape().plane()).map(|_| lcg(&mut seed)).collect();
            let (mut p1, mut p2) = (u.clone(), u.clone());
            let (mut l1, mut l2) = (vec![0.0; u.len()], vec![0.0; u.len()]);
            ops.project_with_laplacian(&mut ops.workspace(), &mut p1, &mut l1);
            slow.project_with_laplacian(&mut slow.workspace(), &mut p2, &mut l2);
            assert!(max_diff(&p1, &p2) < 1e-12);
            assert!(max_diff(&l1, &l2) < 1e-10);
            // the Laplacian of the projection agrees with the plain Laplacian of the projected data
            let direct = ops.laplacian(&p1).unwrap();
            assert!(max_diff(&l1, &direct) < 1e-9);
        }
    }

    #[test]
    fn dealias_cutoffs() {
        assert_eq!(dealias_cutoff(12), 8);
        assert_eq!(dealias_cutoff(8), 6);
        let (g, a) = so(3, 12);
        let u = sample(&g, |t, _| (7.0 * t).cos() + 0.5 * (9.0 * t).cos());
        let mut c = a.to_coeffs(&u).unwrap();
        a.dealias(&mut c);
        assert_relative_eq!(c.get(7, 0).re, 1.0, epsilon = 1e-14);
        assert_eq!(c.get(9, 0).re, 0.0);
        let once = c.clone();
        a.dealias(&mut c);
        assert_eq!(once, c);
    }

    #[test]
    fn pole_filter_counts_and_idempotence() {
        assert_eq!(pole_keep_count(1.0, 16), 8);
        assert_eq!(pole_keep_count(0.5, 16), 4);
        let (g, a) = full(8, 16);
        let axi = sample(&g, |t, _| t.cos() + (2.0 * t).cos());
        assert!(max_diff(&a.pole_filter(&axi).unwrap(), &axi) < 1e-14);
        let mut seed = 5;
        let u: Vec<f64> = (0..8 * 16).map(|_| lcg(&mut seed)).collect();
        let once = a.pole_filter(&u).unwrap();
        let twice = a.pole_filter(&once).unwrap();
        assert!(max_diff(&once, &twice) < 1e-14);
    }

    #[test]
    fn sphere_integrals() {
        let (g, a) = full(8, 8);
        assert_relative_eq!(a.sphere_integral(&sample(&g, |_, _| 1.0)), 4.0 * PI, max_relative = 1e-14);
        let c = a.to_coeffs(&sample(&g, |_, _| 1.0)).unwrap();
        assert_relative_eq!(a.sphere_integral_coeffs(&c), 4.0 * PI, max_relative = 1e-14);
        let u = sample(&g, |t, _| t.cos().powi(2));
        assert_relative_eq!(a.sphere_integral(&u), 4.0 * PI / 3.0, max_relative = 1e-13);

        let (g, a) = so(5, 8);
        let y2 = sample(&g, |t, _| 5.0 * t.cos().powi(2) - 1.0);
        assert!(a.sphere_integral(&y2).abs() < 1e-12);
        assert_relative_eq!(a.sphere_integral(&sample(&g, |_, _| 1.0)), 8.0 * PI * PI / 3.0, max_relative = 1e-12);
        let c = a.to_coeffs(&y2).unwrap();
        assert!(a.sphere_integral_coeffs(&c).abs() < 1e-12);
    }
}
