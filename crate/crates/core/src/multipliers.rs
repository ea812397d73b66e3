//! Dyadic, modulation, angular, and elliptic Fourier multipliers.
//!
//! All cutoffs are sharp indicators so that partition-of-unity identities
//! hold exactly on the lattice. Space-time fields carry a recorded time
//! taper: the sampled window is not periodic in time, so modulation-resolved
//! quantities are always reported "as tapered".

use crate::error::{CsdError, Result};
use crate::fft;
use crate::field::{Rep, ScalarField, SpinorField};
use crate::grid::{dyadic_shell, GridSpec};
use num_complex::Complex64 as C64;

/// Sharp Littlewood-Paley projection onto the dyadic shell of `N`.
/// `N = 1` keeps `|xi| < 2` (including the zero mode); `N >= 2` keeps
/// `N <= |xi| < 2N`.
pub fn littlewood_paley(f: &ScalarField, n_shell: u64) -> Result<ScalarField> {
    if !n_shell.is_power_of_two() {
        return Err(CsdError::Domain(format!(
            "Littlewood-Paley shell must be dyadic, got {n_shell}"
        )));
    }
    f.apply_multiplier(|xi| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        if dyadic_shell(r) == n_shell {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Component-wise Littlewood-Paley projection of a spinor.
pub fn littlewood_paley_spinor(psi: &SpinorField, n_shell: u64) -> Result<SpinorField> {
    psi.map_components(|c| littlewood_paley(c, n_shell))
}

/// All dyadic shells that intersect the frequency lattice of `grid`.
pub fn shells_of_grid(grid: &GridSpec) -> Vec<u64> {
    let top = dyadic_shell(grid.max_freq_norm());
    let mut shells = vec![1u64];
    let mut s = 2u64;
    while s <= top {
        shells.push(s);
        s *= 2;
    }
    shells
}

/// `Delta^{-1}`: multiplies the mode `xi` by `-1/|xi|^2`; the zero mode is
/// annihilated (on the torus the mean of the source is projected out).
pub fn inverse_laplacian(f: &ScalarField) -> Result<ScalarField> {
    f.apply_multiplier(|xi| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        if r2 == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(-1.0 / r2, 0.0)
        }
    })
}

/// Spectral Laplacian (multiplier `-|xi|^2`).
pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    f.apply_multiplier(|xi| C64::new(-(xi[0] * xi[0] + xi[1] * xi[1]), 0.0))
}

/// Spectral partial derivative along `axis` (0 or 1): multiplier `i xi_axis`.
pub fn partial_deriv(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    if axis > 1 {
        return Err(CsdError::Domain(format!("derivative axis {axis} out of range")));
    }
    f.apply_multiplier(|xi| C64::new(0.0, xi[axis]))
}

// ---------------------------------------------------------------------------
// Angular sectors
// ---------------------------------------------------------------------------

/// An angular sector of half-aperture `gamma` about the unit direction
/// `omega`. Membership is half-open in the signed angular offset
/// (`-gamma <= offset < gamma`) so abutting sectors partition rather than
/// double-count boundary lattice points; the zero mode never belongs.
#[derive(Debug, Clone, Copy)]
pub struct AngularSector {
    pub omega: [f64; 2],
    pub gamma: f64,
}

impl AngularSector {
    pub fn new(omega: [f64; 2], gamma: f64) -> Result<Self> {
        let r = (omega[0] * omega[0] + omega[1] * omega[1]).sqrt();
        if r.is_nan() || r <= 0.0 {
            return Err(CsdError::Domain("sector direction must be nonzero".into()));
        }
        if !(gamma > 0.0 && gamma < std::f64::consts::PI) {
            return Err(CsdError::Domain(format!(
                "sector aperture must lie in (0, pi), got {gamma}"
            )));
        }
        Ok(AngularSector { omega: [omega[0] / r, omega[1] / r], gamma })
    }

    /// Signed angular offset of `xi` from `omega`, in `(-pi, pi]`.
    fn offset(&self, xi: [f64; 2]) -> f64 {
        let cross = self.omega[0] * xi[1] - self.omega[1] * xi[0];
        let dot = self.omega[0] * xi[0] + self.omega[1] * xi[1];
        cross.atan2(dot)
    }

    pub fn contains(&self, xi: [f64; 2]) -> bool {
        if xi[0] == 0.0 && xi[1] == 0.0 {
            return false;
        }
        let d = self.offset(xi);
        -self.gamma <= d && d < self.gamma
    }
}

/// Sharp indicator projection onto an angular sector. The zero mode is
/// dropped (the angle is undefined there).
pub fn angular_sector_projection(f: &ScalarField, sector: &AngularSector) -> Result<ScalarField> {
    f.apply_multiplier(|xi| {
        if sector.contains(xi) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Spinor version of [`angular_sector_projection`].
pub fn angular_sector_projection_spinor(
    psi: &SpinorField,
    sector: &AngularSector,
) -> Result<SpinorField> {
    psi.map_components(|c| angular_sector_projection(c, sector))
}

/// A set of `ceil(2 pi / gamma)` uniformly spaced unit directions. The
/// realized spacing `2 pi / count` is at most `gamma` and at least
/// `gamma (1 - gamma / (2 pi))`, and with sectors of half-aperture `gamma`
/// about each direction every nonzero frequency is covered between 1 and 3
/// times.
pub fn omega_set(gamma: f64) -> Result<Vec<[f64; 2]>> {
    if !(gamma > 0.0 && gamma < std::f64::consts::PI) {
        return Err(CsdError::Domain(format!(
            "direction spacing must lie in (0, pi), got {gamma}"
        )));
    }
    let count = (2.0 * std::f64::consts::PI / gamma).ceil() as usize;
    let step = 2.0 * std::f64::consts::PI / count as f64;
    Ok((0..count)
        .map(|j| {
            let a = j as f64 * step;
            [a.cos(), a.sin()]
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Space-time fields and modulation projections
// ---------------------------------------------------------------------------

/// Time taper applied before the temporal transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taper {
    /// No taper; exact for windows that are genuinely time-periodic
    /// (synthetic data built directly in frequency space).
    None,
    /// Periodic Hann window `(1 - cos(2 pi j / n_t)) / 2`.
    Cosine,
}

/// Representation of a space-time field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StRep {
    PositionTime,
    Frequency,
}

/// A complex scalar field on the `n_t x n x n` space-time lattice, stored
/// with time slowest (`values[it * n^2 + i1 * n + i2]`).
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    pub grid: GridSpec,
    pub rep: StRep,
    /// Taper that was (or will be) applied by the temporal transform.
    pub taper: Taper,
    pub values: Vec<C64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: GridSpec, rep: StRep, taper: Taper) -> Result<Self> {
        let t = grid.time_axis()?;
        Ok(SpaceTimeField {
            grid,
            rep,
            taper,
            values: vec![C64::new(0.0, 0.0); t.n_t * grid.len()],
        })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Flat index of `(it, i1, i2)`.
    pub fn index(&self, it: usize, i1: usize, i2: usize) -> usize {
        (it * self.grid.n + i1) * self.grid.n + i2
    }

    /// Physical `(tau, xi)` of a flat frequency index.
    pub fn freq_of_index(&self, idx: usize) -> (f64, [f64; 2]) {
        let spatial = self.grid.len();
        let it = idx / spatial;
        let t = self.grid.time.expect("space-time grid");
        (t.tau_of_index(it), self.grid.frequency_of_index(idx % spatial))
    }

    /// `l^2` norm of the stored samples; mean-normalized in position-time so
    /// that it matches the frequency-side value (Parseval for the tapered
    /// transform).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.rep {
            StRep::Frequency => s.sqrt(),
            StRep::PositionTime => (s / self.len() as f64).sqrt(),
        }
    }

    fn taper_weights(&self) -> Vec<f64> {
        let n_t = self.grid.time.expect("space-time grid").n_t;
        match self.taper {
            Taper::None => vec![1.0; n_t],
            Taper::Cosine => (0..n_t)
                .map(|j| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * j as f64 / n_t as f64).cos()))
                .collect(),
        }
    }

    /// Tapered space-time transform. The spatial axes use the standard
    /// unitary convention; the time axis additionally carries the phase
    /// `exp(-i tau t0)` so coefficients refer to `exp(i tau t)` on the real
    /// window.
    pub fn to_frequency(&self) -> Result<SpaceTimeField> {
        if self.rep != StRep::PositionTime {
            return Err(CsdError::Representation { expected: "position-time", got: "frequency" });
        }
        let t = self.grid.time_axis()?;
        let n = self.grid.n;
        let spatial = self.grid.len();
        let w = self.taper_weights();
        let mut values = self.values.clone();
        for (it, slab) in values.chunks_exact_mut(spatial).enumerate() {
            let weight = w[it];
            if weight != 1.0 {
                for v in slab.iter_mut() {
                    *v *= weight;
                }
            }
            fft::forward_2d(slab, n);
        }
        fft::dft_time_axis(&mut values, t.n_t, spatial, true);
        let scale = 1.0 / t.n_t as f64;
        for (idx, v) in values.iter_mut().enumerate() {
            let it = idx / spatial;
            let tau = t.tau_of_index(it);
            *v *= scale * (-C64::i() * tau * t.t_span.0).exp();
        }
        Ok(SpaceTimeField { grid: self.grid, rep: StRep::Frequency, taper: self.taper, values })
    }

    /// Inverse of [`to_frequency`] except for the taper, which is not
    /// divided back out (it may vanish at the window edges).
    pub fn to_position_time(&self) -> Result<SpaceTimeField> {
        if self.rep != StRep::Frequency {
            return Err(CsdError::Representation { expected: "frequency", got: "position-time" });
        }
        let t = self.grid.time_axis()?;
        let n = self.grid.n;
        let spatial = self.grid.len();
        let mut values = self.values.clone();
        for (idx, v) in values.iter_mut().enumerate() {
            let it = idx / spatial;
            let tau = t.tau_of_index(it);
            *v *= (C64::i() * tau * t.t_span.0).exp();
        }
        fft::dft_time_axis(&mut values, t.n_t, spatial, false);
        for slab in values.chunks_exact_mut(spatial) {
            fft::inverse_2d(slab, n);
        }
        Ok(SpaceTimeField { grid: self.grid, rep: StRep::PositionTime, taper: self.taper, values })
    }

    /// Sample a time-dependent spatial field on the grid's window.
    pub fn from_slices(
        grid: GridSpec,
        taper: Taper,
        mut slice_at: impl FnMut(f64) -> Result<ScalarField>,
    ) -> Result<SpaceTimeField> {
        let t = grid.time_axis()?;
        let mut out = SpaceTimeField::zeros(grid, StRep::PositionTime, taper)?;
        let spatial = grid.len();
        for it in 0..t.n_t {
            let time = t.time_of_index(it);
            let slab = slice_at(time)?;
            slab.grid.expect_same(&GridSpec { time: None, ..grid })?;
            if slab.rep != Rep::Position {
                return Err(CsdError::Representation { expected: "position", got: "frequency" });
            }
            out.values[it * spatial..(it + 1) * spatial].copy_from_slice(&slab.values);
        }
        Ok(out)
    }
}

/// A dyadic space-time box: frequencies with `|xi|` in the shell of `N` and
/// modulation `|tau + sign |xi||` in the shell of `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicBox {
    pub sign: crate::dirac::Sign,
    pub n_shell: u64,
    pub l_shell: u64,
}

impl DyadicBox {
    pub fn new(sign: crate::dirac::Sign, n_shell: u64, l_shell: u64) -> Result<Self> {
        if !n_shell.is_power_of_two() || !l_shell.is_power_of_two() {
            return Err(CsdError::Domain(format!(
                "dyadic box parameters must be powers of two, got N={n_shell}, L={l_shell}"
            )));
        }
        Ok(DyadicBox { sign, n_shell, l_shell })
    }

    /// Lattice membership of a physical `(tau, xi)` pair.
    pub fn contains(&self, tau: f64, xi: [f64; 2]) -> bool {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        dyadic_shell(r) == self.n_shell
            && dyadic_shell((tau + self.sign.val() * r).abs()) == self.l_shell
    }

    pub fn label(&self) -> String {
        format!("K[{}{}/{}]", self.sign.symbol(), self.n_shell, self.l_shell)
    }
}

/// Sharp projection onto a dyadic modulation box (frequency rep required).
pub fn modulation_projection(u: &SpaceTimeField, b: &DyadicBox) -> Result<SpaceTimeField> {
    if u.rep != StRep::Frequency {
        return Err(CsdError::Representation { expected: "frequency", got: "position-time" });
    }
    let mut out = u.clone();
    for (idx, v) in out.values.iter_mut().enumerate() {
        let (tau, xi) = u.freq_of_index(idx);
        if !b.contains(tau, xi) {
            *v = C64::new(0.0, 0.0);
        }
    }
    Ok(out)
}
