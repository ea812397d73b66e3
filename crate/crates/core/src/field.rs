//! Complex scalar and two-component spinor fields on the periodic lattice,
//! with forward/inverse transforms and the Sobolev norms built from dyadic
//! shells.
//!
//! Shell convention: the shell of `N = 1` is `{ |xi| < 2 }` (it contains the
//! zero mode); for dyadic `N >= 2` the shell is `{ N <= |xi| < 2N }`. The
//! shells partition the frequency lattice exactly.

use crate::error::{CsdError, Result};
use crate::fft;
use crate::grid::{dyadic_shell, GridSpec};
use num_complex::Complex64 as C64;

/// Which space the stored samples live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rep {
    Position,
    Frequency,
}

impl Rep {
    pub fn name(self) -> &'static str {
        match self {
            Rep::Position => "position",
            Rep::Frequency => "frequency",
        }
    }
}

/// A complex scalar field on an `n x n` periodic lattice, stored row-major
/// (`values[i1 * n + i2]`, axis 1 slow).
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub rep: Rep,
    pub values: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec, rep: Rep) -> Self {
        ScalarField { grid, rep, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: GridSpec, rep: Rep, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CsdError::Config(format!(
                "field length {} does not match grid {}^2",
                values.len(),
                grid.n
            )));
        }
        Ok(ScalarField { grid, rep, values })
    }

    /// Build a field in frequency space from a function of the physical
    /// frequency vector.
    pub fn from_modes(grid: GridSpec, f: impl Fn([f64; 2]) -> C64) -> Self {
        let values = (0..grid.len())
            .map(|idx| f(grid.frequency_of_index(idx)))
            .collect();
        ScalarField { grid, rep: Rep::Frequency, values }
    }

    fn expect_rep(&self, rep: Rep) -> Result<()> {
        if self.rep != rep {
            return Err(CsdError::Representation {
                expected: rep.name(),
                got: self.rep.name(),
            });
        }
        Ok(())
    }

    /// Forward transform; unitary in the L^2 norms below.
    pub fn to_fourier(&self) -> Result<ScalarField> {
        self.expect_rep(Rep::Position)?;
        let mut values = self.values.clone();
        fft::forward_2d(&mut values, self.grid.n);
        Ok(ScalarField { grid: self.grid, rep: Rep::Frequency, values })
    }

    /// Inverse transform.
    pub fn from_fourier(&self) -> Result<ScalarField> {
        self.expect_rep(Rep::Frequency)?;
        let mut values = self.values.clone();
        fft::inverse_2d(&mut values, self.grid.n);
        Ok(ScalarField { grid: self.grid, rep: Rep::Position, values })
    }

    /// The field in frequency representation (clone if already there).
    pub fn ensure_frequency(&self) -> Result<ScalarField> {
        match self.rep {
            Rep::Frequency => Ok(self.clone()),
            Rep::Position => self.to_fourier(),
        }
    }

    /// The field in position representation (clone if already there).
    pub fn ensure_position(&self) -> Result<ScalarField> {
        match self.rep {
            Rep::Position => Ok(self.clone()),
            Rep::Frequency => self.from_fourier(),
        }
    }

    /// L^2 norm. In frequency space this is the plain `l^2` sum of the
    /// coefficients; in position space the mean-normalized sum, so the two
    /// representations agree (Parseval).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.rep {
            Rep::Frequency => s.sqrt(),
            Rep::Position => (s / self.grid.len() as f64).sqrt(),
        }
    }

    /// Apply a frequency multiplier in place (field must be in frequency rep).
    pub fn multiplier_inplace(&mut self, m: impl Fn([f64; 2]) -> C64) -> Result<()> {
        self.expect_rep(Rep::Frequency)?;
        for idx in 0..self.values.len() {
            let xi = self.grid.frequency_of_index(idx);
            self.values[idx] *= m(xi);
        }
        Ok(())
    }

    /// Apply a frequency multiplier, converting representations as needed;
    /// the result is returned in the representation of the input.
    pub fn apply_multiplier(&self, m: impl Fn([f64; 2]) -> C64) -> Result<ScalarField> {
        let mut hat = self.ensure_frequency()?;
        hat.multiplier_inplace(m)?;
        if self.rep == Rep::Position {
            hat.from_fourier()
        } else {
            Ok(hat)
        }
    }

    pub fn scale(&mut self, c: C64) {
        for v in self.values.iter_mut() {
            *v *= c;
        }
    }

    pub fn add_assign(&mut self, other: &ScalarField) -> Result<()> {
        self.grid.expect_same(&other.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.grid.expect_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ScalarField { grid: self.grid, rep: self.rep, values })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.grid.expect_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ScalarField { grid: self.grid, rep: self.rep, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Two-component spinor field; both components share one grid and one
/// representation.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub up: ScalarField,
    pub down: ScalarField,
}

impl SpinorField {
    pub fn new(up: ScalarField, down: ScalarField) -> Result<Self> {
        up.grid.expect_same(&down.grid)?;
        if up.rep != down.rep {
            return Err(CsdError::Representation {
                expected: up.rep.name(),
                got: down.rep.name(),
            });
        }
        Ok(SpinorField { up, down })
    }

    pub fn zeros(grid: GridSpec, rep: Rep) -> Self {
        SpinorField {
            up: ScalarField::zeros(grid, rep),
            down: ScalarField::zeros(grid, rep),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.up.grid
    }

    pub fn rep(&self) -> Rep {
        self.up.rep
    }

    pub fn to_fourier(&self) -> Result<SpinorField> {
        Ok(SpinorField { up: self.up.to_fourier()?, down: self.down.to_fourier()? })
    }

    pub fn from_fourier(&self) -> Result<SpinorField> {
        Ok(SpinorField { up: self.up.from_fourier()?, down: self.down.from_fourier()? })
    }

    pub fn ensure_frequency(&self) -> Result<SpinorField> {
        Ok(SpinorField {
            up: self.up.ensure_frequency()?,
            down: self.down.ensure_frequency()?,
        })
    }

    pub fn ensure_position(&self) -> Result<SpinorField> {
        Ok(SpinorField {
            up: self.up.ensure_position()?,
            down: self.down.ensure_position()?,
        })
    }

    pub fn l2_norm(&self) -> f64 {
        (self.up.l2_norm().powi(2) + self.down.l2_norm().powi(2)).sqrt()
    }

    /// Charge `Q = ||psi||_{L^2}^2`.
    pub fn charge(&self) -> f64 {
        self.up.l2_norm().powi(2) + self.down.l2_norm().powi(2)
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> Result<ScalarField>) -> Result<SpinorField> {
        SpinorField::new(f(&self.up)?, f(&self.down)?)
    }

    pub fn scale(&mut self, c: C64) {
        self.up.scale(c);
        self.down.scale(c);
    }

    pub fn add_assign(&mut self, other: &SpinorField) -> Result<()> {
        self.up.add_assign(&other.up)?;
        self.down.add_assign(&other.down)
    }

    pub fn sub(&self, other: &SpinorField) -> Result<SpinorField> {
        SpinorField::new(self.up.sub(&other.up)?, self.down.sub(&other.down)?)
    }

    pub fn is_finite(&self) -> bool {
        self.up
            .values
            .iter()
            .chain(self.down.values.iter())
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Squared L^2 mass per dyadic shell of a frequency-space scalar field.
fn shell_masses(hat: &ScalarField) -> Vec<(u64, f64)> {
    let mut acc: Vec<(u64, f64)> = Vec::new();
    for (idx, v) in hat.values.iter().enumerate() {
        let xi = hat.grid.frequency_of_index(idx);
        let shell = dyadic_shell((xi[0] * xi[0] + xi[1] * xi[1]).sqrt());
        match acc.iter_mut().find(|(s, _)| *s == shell) {
            Some((_, m)) => *m += v.norm_sqr(),
            None => acc.push((shell, v.norm_sqr())),
        }
    }
    acc
}

/// Inhomogeneous Sobolev norm `( sum_{N>=1} N^{2s} ||P_N f||^2 )^{1/2}` over
/// the dyadic shells; `s = 0` collapses to the L^2 norm exactly.
pub fn sobolev_norm_scalar(f: &ScalarField, s: f64) -> Result<f64> {
    let hat = f.ensure_frequency()?;
    let total: f64 = shell_masses(&hat)
        .into_iter()
        .map(|(shell, m)| (shell as f64).powf(2.0 * s) * m)
        .sum();
    Ok(total.sqrt())
}

/// Sobolev norm of a spinor: the root of the summed squared component norms.
pub fn sobolev_norm(psi: &SpinorField, s: f64) -> Result<f64> {
    let a = sobolev_norm_scalar(&psi.up, s)?;
    let b = sobolev_norm_scalar(&psi.down, s)?;
    Ok((a * a + b * b).sqrt())
}

/// Fraction of the squared L^2 mass sitting in the top dyadic shell of the
/// grid; used as a resolution warning for the solver.
pub fn top_shell_fraction(psi: &SpinorField) -> Result<f64> {
    let hat = psi.ensure_frequency()?;
    let top = dyadic_shell(hat.grid().max_freq_norm());
    let mut top_mass = 0.0;
    let mut total = 0.0;
    for comp in [&hat.up, &hat.down] {
        for (idx, v) in comp.values.iter().enumerate() {
            let xi = comp.grid.frequency_of_index(idx);
            let shell = dyadic_shell((xi[0] * xi[0] + xi[1] * xi[1]).sqrt());
            let m = v.norm_sqr();
            total += m;
            if shell == top {
                top_mass += m;
            }
        }
    }
    if total == 0.0 {
        Ok(0.0)
    } else {
        Ok(top_mass / total)
    }
}
