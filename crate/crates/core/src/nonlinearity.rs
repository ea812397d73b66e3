//! Dirac currents, the Coulomb-gauge elliptic nonlinearity, its two-part
//! split, and reconstruction of the gauge potential.
//!
//! Sign conventions, fixed once and verified by the Gauss-constraint
//! residual (`epsilon_{012} = +1`, metric `(+,-,-)`):
//!
//! * currents: `J^mu = psi1^dag alpha^mu psi2`;
//! * potential: `A0 = inv_lap(d1 J2 - d2 J1)`, `A1 = inv_lap(d2 J0)`,
//!   `A2 = -inv_lap(d1 J0)`, which gives `div A = 0` identically and
//!   `d1 A2 - d2 A1 + (J0 - mean J0) = 0`;
//! * the alpha-form operator `Nl(psi1, psi2) = -(A0 I + A1 a1 + A2 a2)`
//!   enters the evolution as `i dt psi = -i a^j dj psi + m beta psi + Nl psi`;
//! * the gamma-form assembly of the same operator (built from
//!   `gamma^0 [d1 J2 - d2 J1] + gamma^1 d2 J0 - gamma^2 d1 J0` behind
//!   `Delta^{-1}`) satisfies `alpha-form = -beta * gamma-form`.
//!
//! Every quadratic product (currents, operator times spinor) is evaluated in
//! position space on a grid padded by 3/2 per axis and truncated back to the
//! base band, so the retained convolution is alias-free.

use crate::dirac::{alpha, Mat2, ALPHA1, ALPHA2, GAMMA0, GAMMA1, GAMMA2};
use crate::error::{CsdError, Result};
use crate::fft;
use crate::field::{Rep, ScalarField, SpinorField};
use crate::grid::GridSpec;
use crate::multipliers::{inverse_laplacian, partial_deriv};
use num_complex::Complex64 as C64;

/// The three current components `J^mu = psi1^dag alpha^mu psi2`.
#[derive(Debug, Clone)]
pub struct CurrentTriple {
    pub j0: ScalarField,
    pub j1: ScalarField,
    pub j2: ScalarField,
}

/// The Coulomb-gauge potential reconstructed from a spinor.
#[derive(Debug, Clone)]
pub struct GaugePotential {
    pub a0: ScalarField,
    pub a1: ScalarField,
    pub a2: ScalarField,
}

/// Pointwise Dirac current `psi1^dag alpha^mu psi2` on the base grid.
/// Real-valued (to roundoff) when `psi1 = psi2`; `mu = 0` with equal
/// arguments is `|psi|^2` pointwise.
pub fn dirac_current(psi1: &SpinorField, psi2: &SpinorField, mu: usize) -> Result<ScalarField> {
    psi1.grid().expect_same(psi2.grid())?;
    if mu > 2 {
        return Err(CsdError::Domain(format!("current index {mu} out of range")));
    }
    let p1 = psi1.ensure_position()?;
    let p2 = psi2.ensure_position()?;
    let a = alpha(mu);
    let values = (0..p1.grid().len())
        .map(|i| {
            let v1 = [p1.up.values[i], p1.down.values[i]];
            let v2 = [p2.up.values[i], p2.down.values[i]];
            let av2 = a.apply(v2);
            v1[0].conj() * av2[0] + v1[1].conj() * av2[1]
        })
        .collect();
    ScalarField::from_values(*p1.grid(), Rep::Position, values)
}

// ---------------------------------------------------------------------------
// Dealiased product engine
// ---------------------------------------------------------------------------

/// A spinor's components as padded position-space sample vectors.
pub(crate) struct PaddedSpinor {
    pub(crate) up: Vec<C64>,
    pub(crate) down: Vec<C64>,
}

fn padded_size(n: usize) -> usize {
    3 * n / 2
}

/// Zero-pad a spectrum by 3/2 per axis and move to position samples.
pub(crate) fn pad_scalar_to_position(hat: &ScalarField) -> Vec<C64> {
    let n = hat.grid.n;
    let p = padded_size(n);
    let mut values = fft::pad_spectrum(&hat.values, n, p);
    fft::inverse_2d(&mut values, p);
    values
}

pub(crate) fn padded_spinor(psi: &SpinorField) -> Result<PaddedSpinor> {
    let hat = psi.ensure_frequency()?;
    Ok(PaddedSpinor {
        up: pad_scalar_to_position(&hat.up),
        down: pad_scalar_to_position(&hat.down),
    })
}

/// Forward transform of padded position samples, truncated to the base band.
/// The unpaired Nyquist row and column (`k = -n/2`, whose mirror `+n/2` is
/// not on the lattice) are zeroed so that real densities keep real spectra.
pub(crate) fn truncate_to_spectrum(mut values: Vec<C64>, grid: GridSpec) -> ScalarField {
    let n = grid.n;
    let p = padded_size(n);
    fft::forward_2d(&mut values, p);
    let mut vals = fft::truncate_spectrum(&values, p, n);
    let ny = n / 2;
    for i in 0..n {
        vals[ny * n + i] = C64::new(0.0, 0.0);
        vals[i * n + ny] = C64::new(0.0, 0.0);
    }
    ScalarField { grid, rep: Rep::Frequency, values: vals }
}

/// Alias-free current spectra of a spinor pair.
fn current_spectra(psi1: &SpinorField, psi2: &SpinorField) -> Result<[ScalarField; 3]> {
    psi1.grid().expect_same(psi2.grid())?;
    let grid = *psi1.grid();
    let a = padded_spinor(psi1)?;
    let b = padded_spinor(psi2)?;
    current_spectra_padded(&a, &b, grid)
}

pub(crate) fn current_spectra_padded(
    a: &PaddedSpinor,
    b: &PaddedSpinor,
    grid: GridSpec,
) -> Result<[ScalarField; 3]> {
    let m = a.up.len();
    let mut j0 = vec![C64::new(0.0, 0.0); m];
    let mut j1 = vec![C64::new(0.0, 0.0); m];
    let mut j2 = vec![C64::new(0.0, 0.0); m];
    for i in 0..m {
        let u1 = a.up[i].conj();
        let d1 = a.down[i].conj();
        let u2 = b.up[i];
        let d2 = b.down[i];
        j0[i] = u1 * u2 + d1 * d2;
        j1[i] = u1 * d2 + d1 * u2;
        j2[i] = C64::i() * (d1 * u2 - u1 * d2);
    }
    Ok([
        truncate_to_spectrum(j0, grid),
        truncate_to_spectrum(j1, grid),
        truncate_to_spectrum(j2, grid),
    ])
}

/// Coulomb-gauge potential of a single spinor, from dealiased currents.
/// `div A = 0` holds identically by construction.
pub fn gauge_potential(psi: &SpinorField) -> Result<GaugePotential> {
    let [j0, j1, j2] = current_spectra(psi, psi)?;
    let a0 = inverse_laplacian(&partial_deriv(&j2, 0)?.sub(&partial_deriv(&j1, 1)?)?)?;
    let a1 = inverse_laplacian(&partial_deriv(&j0, 1)?)?;
    let mut a2 = inverse_laplacian(&partial_deriv(&j0, 0)?)?;
    a2.scale(C64::new(-1.0, 0.0));
    Ok(GaugePotential {
        a0: a0.from_fourier()?,
        a1: a1.from_fourier()?,
        a2: a2.from_fourier()?,
    })
}

/// L^2 size of the spatial Chern-Simons constraint
/// `d1 A2 - d2 A1 + (J0 - mean J0)`; the zero mode of the charge density is
/// removed because the torus inversion annihilates it.
pub fn cs_gauss_residual(psi: &SpinorField, a: &GaugePotential) -> Result<f64> {
    let curl = partial_deriv(&a.a2.ensure_frequency()?, 0)?
        .sub(&partial_deriv(&a.a1.ensure_frequency()?, 1)?)?;
    let [j0, _, _] = current_spectra(psi, psi)?;
    let mut source = j0;
    source.values[0] = C64::new(0.0, 0.0);
    let mut residual = curl;
    residual.add_assign(&source)?;
    Ok(residual.l2_norm())
}

// ---------------------------------------------------------------------------
// Matrix-valued multiplication operators
// ---------------------------------------------------------------------------

/// A pointwise 2x2 matrix field `m0 I + m1 a1 + m2 a2 + m3 beta` stored by
/// entries, in one representation on one grid.
#[derive(Debug, Clone)]
pub struct MatrixField {
    pub grid: GridSpec,
    pub rep: Rep,
    /// Entries `[e11, e12, e21, e22]`, each a full lattice of values.
    pub entries: [Vec<C64>; 4],
}

impl MatrixField {
    pub fn zeros(grid: GridSpec, rep: Rep) -> Self {
        MatrixField {
            grid,
            rep,
            entries: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); grid.len()]),
        }
    }

    /// Assemble from coefficient fields of a matrix basis expansion:
    /// `sum_k coeff_k * basis_k`.
    pub fn from_basis(coeffs: &[(&ScalarField, Mat2)]) -> Result<MatrixField> {
        let first = coeffs
            .first()
            .ok_or_else(|| CsdError::Domain("empty matrix basis".into()))?;
        let grid = first.0.grid;
        let rep = first.0.rep;
        let mut out = MatrixField::zeros(grid, rep);
        for (field, mat) in coeffs {
            field.grid.expect_same(&grid)?;
            if field.rep != rep {
                return Err(CsdError::Representation { expected: rep.name(), got: field.rep.name() });
            }
            for (i, v) in field.values.iter().enumerate() {
                for e in 0..4 {
                    out.entries[e][i] += v * mat.0[e];
                }
            }
        }
        Ok(out)
    }

    pub fn matrix_at(&self, i: usize) -> Mat2 {
        Mat2([
            self.entries[0][i],
            self.entries[1][i],
            self.entries[2][i],
            self.entries[3][i],
        ])
    }

    pub fn add(&self, other: &MatrixField) -> Result<MatrixField> {
        self.grid.expect_same(&other.grid)?;
        let mut out = self.clone();
        for e in 0..4 {
            for (a, b) in out.entries[e].iter_mut().zip(&other.entries[e]) {
                *a += b;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MatrixField) -> Result<MatrixField> {
        self.grid.expect_same(&other.grid)?;
        let mut out = self.clone();
        for e in 0..4 {
            for (a, b) in out.entries[e].iter_mut().zip(&other.entries[e]) {
                *a -= b;
            }
        }
        Ok(out)
    }

    /// Left-multiply every pointwise matrix by a constant matrix.
    pub fn left_mul(&self, m: &Mat2) -> MatrixField {
        let mut out = MatrixField::zeros(self.grid, self.rep);
        for i in 0..self.grid.len() {
            let prod = m.mul(&self.matrix_at(i));
            for e in 0..4 {
                out.entries[e][i] = prod.0[e];
            }
        }
        out
    }

    /// Largest entry magnitude over the lattice.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise operator norm over the lattice (position rep).
    pub fn max_op_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.matrix_at(i).op_norm())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise deviation from Hermitian symmetry.
    pub fn max_hermitian_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let m = self.matrix_at(i);
                m.sub(&m.adjoint()).max_abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Coefficient fields `(c_I, c_1, c_2)` of the alpha-form operator
/// `c_I I + c_1 a1 + c_2 a2` from precomputed current spectra.
pub(crate) fn coefficients_from_currents(currents: &[ScalarField; 3]) -> Result<[ScalarField; 3]> {
    let [j0, j1, j2] = currents;
    // -Delta^{-1} of the scalar curl d1 J2 - d2 J1.
    let mut c_i = inverse_laplacian(&partial_deriv(j2, 0)?.sub(&partial_deriv(j1, 1)?)?)?;
    c_i.scale(C64::new(-1.0, 0.0));
    let mut c_1 = inverse_laplacian(&partial_deriv(j0, 1)?)?;
    c_1.scale(C64::new(-1.0, 0.0));
    let c_2 = inverse_laplacian(&partial_deriv(j0, 0)?)?;
    Ok([c_i, c_1, c_2])
}

/// Coefficient fields of the alpha-form operator for a spinor pair.
fn alpha_form_coefficients(psi1: &SpinorField, psi2: &SpinorField) -> Result<[ScalarField; 3]> {
    coefficients_from_currents(&current_spectra(psi1, psi2)?)
}

/// The alpha-form operator `Nl(psi1, psi2)` as a matrix field in position
/// space (band-limited entries on the base grid).
pub fn nonlinear_matrix(psi1: &SpinorField, psi2: &SpinorField) -> Result<MatrixField> {
    let [c_i, c_1, c_2] = alpha_form_coefficients(psi1, psi2)?;
    MatrixField::from_basis(&[
        (&c_i.from_fourier()?, Mat2::identity()),
        (&c_1.from_fourier()?, ALPHA1),
        (&c_2.from_fourier()?, ALPHA2),
    ])
}

/// The two parts of the operator: the charge-free part driven by the spatial
/// currents (a scalar multiple of the identity) and the charge part driven by
/// `J^0` (off-diagonal in the alpha basis). Their sum is [`nonlinear_matrix`].
pub fn split_n1_n2(psi1: &SpinorField, psi2: &SpinorField) -> Result<(MatrixField, MatrixField)> {
    let [c_i, c_1, c_2] = alpha_form_coefficients(psi1, psi2)?;
    let n1 = MatrixField::from_basis(&[(&c_i.from_fourier()?, Mat2::identity())])?;
    let n2 = MatrixField::from_basis(&[
        (&c_1.from_fourier()?, ALPHA1),
        (&c_2.from_fourier()?, ALPHA2),
    ])?;
    Ok((n1, n2))
}

/// The gamma-form assembly of the same bilinear operator, built literally
/// from the gamma matrices. Satisfies `alpha-form = -beta * gamma-form`.
pub fn nonlinear_matrix_gamma(psi1: &SpinorField, psi2: &SpinorField) -> Result<MatrixField> {
    let [j0, j1, j2] = current_spectra(psi1, psi2)?;
    let curl = inverse_laplacian(&partial_deriv(&j2, 0)?.sub(&partial_deriv(&j1, 1)?)?)?;
    let g1 = inverse_laplacian(&partial_deriv(&j0, 1)?)?;
    let mut g2 = inverse_laplacian(&partial_deriv(&j0, 0)?)?;
    g2.scale(C64::new(-1.0, 0.0));
    MatrixField::from_basis(&[
        (&curl.from_fourier()?, GAMMA0),
        (&g1.from_fourier()?, GAMMA1),
        (&g2.from_fourier()?, GAMMA2),
    ])
}

/// Apply a (band-limited, position-space) matrix field to a spinor with the
/// padded product rule, returning the spinor in the representation of `psi3`.
pub fn apply_matrix_dealiased(m: &MatrixField, psi3: &SpinorField) -> Result<SpinorField> {
    m.grid.expect_same(psi3.grid())?;
    let grid = m.grid;
    // Pad the four entries and the spinor to the 3/2 grid.
    let entry_hat: Vec<ScalarField> = m
        .entries
        .iter()
        .map(|vals| {
            let f = ScalarField { grid, rep: m.rep, values: vals.clone() };
            f.ensure_frequency()
        })
        .collect::<Result<_>>()?;
    let e_pad: Vec<Vec<C64>> = entry_hat.iter().map(pad_scalar_to_position).collect();
    let s = padded_spinor(psi3)?;
    let len = s.up.len();
    let mut up = vec![C64::new(0.0, 0.0); len];
    let mut down = vec![C64::new(0.0, 0.0); len];
    for i in 0..len {
        up[i] = e_pad[0][i] * s.up[i] + e_pad[1][i] * s.down[i];
        down[i] = e_pad[2][i] * s.up[i] + e_pad[3][i] * s.down[i];
    }
    let out = SpinorField::new(
        truncate_to_spectrum(up, grid),
        truncate_to_spectrum(down, grid),
    )?;
    if psi3.rep() == Rep::Position {
        out.from_fourier()
    } else {
        Ok(out)
    }
}

/// The full cubic interaction `Nl(psi1, psi2) psi3`, fully dealiased.
/// Sesquilinear in the first slot: scaling the arguments by `(a, b, c)`
/// scales the output by `conj(a) b c`.
pub fn nonlinear_term(
    psi1: &SpinorField,
    psi2: &SpinorField,
    psi3: &SpinorField,
) -> Result<SpinorField> {
    let m = nonlinear_matrix(psi1, psi2)?;
    apply_matrix_dealiased(&m, psi3)
}
