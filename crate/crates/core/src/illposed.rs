//! The low-regularity scaling experiment: box-supported Fourier data, the
//! third-order flow-derivative term, its pointwise lower bound on the four
//! output boxes, and the lambda sweep that exhibits the growth of the cubic
//! ratio for negative Sobolev indices.
//!
//! Data: `phi` has upper component the indicator of the frequency box
//! centered at `(+lambda, 0)` with half-width `mu = lambda^(1-eps)`, and
//! lower component the mirrored box at `(-lambda, 0)`. All sixteen sign
//! assignments of the free evolutions are summed in
//! `L(phi)(t) = sum int_0^t S_[s1](t - t') Pi_[s1]
//!                  [ Nl(S_[s2](t') phi, S_[s3](t') phi) S_[s4](t') phi ] dt'`
//! evaluated at the probe time `t = delta lambda^(-1-eps)`. On the lattice
//! the boxes are realized as symmetric odd-sized index boxes (half-width
//! `floor(mu)` points at unit frequency spacing), so the mirror cancellations
//! of the center box are exact.

use crate::dirac::{projection_symbol_lattice, Sign};
use crate::error::{CsdError, Result};
use crate::field::{sobolev_norm, Rep, ScalarField, SpinorField};
use crate::grid::GridSpec;
use crate::nonlinearity::{
    coefficients_from_currents, current_spectra_padded, pad_scalar_to_position, padded_spinor,
    truncate_to_spectrum, PaddedSpinor,
};
use num_complex::Complex64 as C64;

/// Parameters of one ill-posedness run.
#[derive(Debug, Clone, Copy)]
pub struct IllposedConfig {
    /// Dyadic frequency scale, at least 16.
    pub lambda: f64,
    /// Exponent in `mu = lambda^(1 - eps)`, in (0, 1).
    pub eps: f64,
    /// Probe-time coefficient in `t = delta lambda^(-1-eps)`, in (0, 1).
    pub delta: f64,
    /// Sobolev index of the measured ratio.
    pub s: f64,
    /// Lattice; unit frequency spacing is the standard choice.
    pub grid: GridSpec,
}

/// Measured quantities of one run.
#[derive(Debug, Clone, Copy)]
pub struct IllposedRun {
    pub lambda: f64,
    pub mu: f64,
    pub t: f64,
    pub phi_hs: f64,
    pub l_hs: f64,
    /// `||L(phi)(t)||_{H^s} / ||phi||_{H^s}^3`.
    pub ratio: f64,
    /// Pointwise floor `min |FL(xi)| lambda / (t mu^4)` over the interior
    /// two-thirds of the four output boxes.
    pub c1: f64,
}

/// Sweep outcome: per-lambda records and the fitted power law.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    pub runs: Vec<IllposedRun>,
    /// Least-squares slope of `log ratio` against `log lambda`.
    pub slope: f64,
    /// Root-mean-square fit residual.
    pub residual: f64,
    pub expected_slope: f64,
}

/// The slope `-2s - 3eps` predicted by the exponent algebra of the scaling
/// argument.
pub fn expected_slope(s: f64, eps: f64) -> f64 {
    -2.0 * s - 3.0 * eps
}

/// Integer box geometry on the frequency lattice: centers at `(+-c, 0)`,
/// half-width `h` index steps.
#[derive(Debug, Clone, Copy)]
pub struct BoxGeometry {
    pub center: i64,
    pub half_width: i64,
}

impl IllposedConfig {
    pub fn new(lambda: f64, eps: f64, delta: f64, s: f64, grid: GridSpec) -> Result<Self> {
        let cfg = IllposedConfig { lambda, eps, delta, s, grid };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Smallest unit-spacing grid on which the input boxes, the doubled
    /// current boxes, and all four output boxes are fully resolved.
    pub fn auto(lambda: f64, eps: f64, delta: f64, s: f64) -> Result<Self> {
        let mu = lambda.powf(1.0 - eps);
        let reach = 3.0 * (lambda + mu) + 2.0;
        let mut n = 64usize;
        while (n / 2) as f64 <= reach {
            n *= 2;
        }
        IllposedConfig::new(lambda, eps, delta, s, GridSpec::unit_spacing(n)?)
    }

    pub fn mu(&self) -> f64 {
        self.lambda.powf(1.0 - self.eps)
    }

    /// Probe time `delta * lambda^(-1-eps)`.
    pub fn probe_time(&self) -> f64 {
        self.delta * self.lambda.powf(-1.0 - self.eps)
    }

    /// Input box geometry in index units.
    pub fn geometry(&self) -> Result<BoxGeometry> {
        let dxi = self.grid.dxi();
        let c = (self.lambda / dxi).round();
        if ((c * dxi) - self.lambda).abs() > 1e-9 * self.lambda {
            return Err(CsdError::Config(format!(
                "lambda = {} is not on the frequency lattice (spacing {})",
                self.lambda, dxi
            )));
        }
        Ok(BoxGeometry {
            center: c as i64,
            half_width: (self.mu() / dxi).floor() as i64,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.lambda < 16.0 || self.lambda.log2().fract().abs() > 1e-12 {
            return Err(CsdError::Config(format!(
                "lambda must be dyadic and >= 16, got {}",
                self.lambda
            )));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(CsdError::Config(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CsdError::Config(format!(
                "delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        if self.mu() < 1.0 {
            return Err(CsdError::Config("mu = lambda^(1-eps) must be at least 1".into()));
        }
        let g = self.geometry()?;
        if g.half_width < 8 {
            return Err(CsdError::Config(format!(
                "box needs at least 8 lattice points across mu, has {}",
                g.half_width
            )));
        }
        if g.center + g.half_width >= (self.grid.n / 2) as i64 {
            return Err(CsdError::Config(format!(
                "input box clipped by the lattice boundary: reach {} vs band {}",
                g.center + g.half_width,
                self.grid.n / 2
            )));
        }
        let t = self.probe_time();
        if t * self.lambda > 0.1 {
            return Err(CsdError::Config(format!(
                "probe time too long: t*lambda = {} exceeds 0.1",
                t * self.lambda
            )));
        }
        Ok(())
    }

    /// The four output boxes `(center_1, half_width)` in index units:
    /// centers `-c, +3c, -3c, +c`, all of half-width `3h`.
    pub fn output_boxes(&self) -> Result<[BoxGeometry; 4]> {
        let g = self.geometry()?;
        Ok([
            BoxGeometry { center: -g.center, half_width: 3 * g.half_width },
            BoxGeometry { center: 3 * g.center, half_width: 3 * g.half_width },
            BoxGeometry { center: -3 * g.center, half_width: 3 * g.half_width },
            BoxGeometry { center: g.center, half_width: 3 * g.half_width },
        ])
    }
}

/// The box-supported data: exact 0/1 indicators of the two mirrored boxes.
pub fn box_data(cfg: &IllposedConfig) -> Result<SpinorField> {
    cfg.validate()?;
    let g = cfg.geometry()?;
    let n = cfg.grid.n;
    let mut up = ScalarField::zeros(cfg.grid, Rep::Frequency);
    let mut down = ScalarField::zeros(cfg.grid, Rep::Frequency);
    for i1 in 0..n {
        let k1 = cfg.grid.signed_index(i1);
        for i2 in 0..n {
            let k2 = cfg.grid.signed_index(i2);
            if k2.abs() > g.half_width {
                continue;
            }
            if (k1 - g.center).abs() <= g.half_width {
                up.values[i1 * n + i2] = C64::new(1.0, 0.0);
            }
            if (k1 + g.center).abs() <= g.half_width {
                down.values[i1 * n + i2] = C64::new(1.0, 0.0);
            }
        }
    }
    SpinorField::new(up, down)
}

/// Half-wave phases applied directly to a frequency spinor.
fn phase_evolved(phi: &SpinorField, sign: Sign, t: f64) -> SpinorField {
    let grid = *phi.grid();
    let mut out = phi.clone();
    for comp in [&mut out.up, &mut out.down] {
        for (idx, v) in comp.values.iter_mut().enumerate() {
            let xi = grid.frequency_of_index(idx);
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            *v *= (-C64::i() * sign.val() * t * r).exp();
        }
    }
    out
}

/// Simpson weights for `n_quad` nodes (odd, >= 3) on `[0, t]`.
fn simpson_weights(n_quad: usize, t: f64) -> Result<Vec<f64>> {
    if n_quad < 3 || n_quad.is_multiple_of(2) {
        return Err(CsdError::Config(format!(
            "quadrature needs an odd node count >= 3, got {n_quad}"
        )));
    }
    let h = t / (n_quad - 1) as f64;
    let mut w = vec![0.0; n_quad];
    let mut k = 0;
    while k + 2 < n_quad {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
        k += 2;
    }
    Ok(w)
}

/// The summed third-derivative term `L(phi)(t)` over all sixteen sign
/// tuples, by Simpson quadrature in `t'` with the exact half-wave phases.
/// Input and output are frequency-representation spinors.
pub fn cubic_term(phi: &SpinorField, t: f64, n_quad: usize) -> Result<SpinorField> {
    if t.is_nan() || t <= 0.0 {
        return Err(CsdError::Domain(format!("cubic term needs t > 0, got {t}")));
    }
    let weights = simpson_weights(n_quad, t)?;
    let phi_hat = phi.ensure_frequency()?;
    let grid = *phi_hat.grid();
    let mut out = SpinorField::zeros(grid, Rep::Frequency);

    for (node, w) in weights.iter().enumerate() {
        let tp = t * node as f64 / (n_quad - 1) as f64;
        // The two phase-evolved copies of phi, in padded position space.
        let u_plus = phase_evolved(&phi_hat, Sign::Plus, tp);
        let u_minus = phase_evolved(&phi_hat, Sign::Minus, tp);
        let pads: [PaddedSpinor; 2] = [padded_spinor(&u_plus)?, padded_spinor(&u_minus)?];

        // Sum over the inner sign choices (s2, s3, s4) of Nl(u2, u3) u4.
        let mut inner = SpinorField::zeros(grid, Rep::Frequency);
        for p2 in 0..2 {
            for p3 in 0..2 {
                let currents = current_spectra_padded(&pads[p2], &pads[p3], grid)?;
                let coeffs = coefficients_from_currents(&currents)?;
                let a = pad_scalar_to_position(&coeffs[0]);
                let b = pad_scalar_to_position(&coeffs[1]);
                let c = pad_scalar_to_position(&coeffs[2]);
                for pad4 in &pads {
                    let m = a.len();
                    let mut up = vec![C64::new(0.0, 0.0); m];
                    let mut down = vec![C64::new(0.0, 0.0); m];
                    for i in 0..m {
                        // (a I + b alpha1 + c alpha2) psi
                        let (x, y) = (pad4.up[i], pad4.down[i]);
                        up[i] = a[i] * x + (b[i] - C64::i() * c[i]) * y;
                        down[i] = (b[i] + C64::i() * c[i]) * x + a[i] * y;
                    }
                    inner.up.add_assign(&truncate_to_spectrum(up, grid))?;
                    inner.down.add_assign(&truncate_to_spectrum(down, grid))?;
                }
            }
        }

        // Apply sum_[s1] exp(-s1 i (t - t') |xi|) Pi_[s1] and accumulate.
        let back = t - tp;
        for idx in 0..grid.len() {
            let xi = grid.frequency_of_index(idx);
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let v = [inner.up.values[idx], inner.down.values[idx]];
            let mut total = [C64::new(0.0, 0.0); 2];
            for s1 in Sign::BOTH {
                let proj = projection_symbol_lattice(s1, xi);
                let phase = (-C64::i() * s1.val() * back * r).exp();
                let pv = proj.apply(v);
                total[0] += phase * pv[0];
                total[1] += phase * pv[1];
            }
            out.up.values[idx] += w * total[0];
            out.down.values[idx] += w * total[1];
        }
    }
    Ok(out)
}

/// [`cubic_term`] with a quadrature-refinement check: recomputed with twice
/// the panel count, the Sobolev norm must move by at most one part in 1e3
/// (the refined field is returned). Non-convergence is an error.
pub fn cubic_term_verified(
    phi: &SpinorField,
    t: f64,
    n_quad: usize,
    s: f64,
) -> Result<(SpinorField, f64)> {
    let coarse = cubic_term(phi, t, n_quad)?;
    let fine = cubic_term(phi, t, 2 * n_quad - 1)?;
    let nc = sobolev_norm(&coarse, s)?;
    let nf = sobolev_norm(&fine, s)?;
    let change = if nf > 0.0 { (nc - nf).abs() / nf } else { 0.0 };
    if change > 1e-3 {
        return Err(CsdError::Numerical(format!(
            "quadrature not converged: |H^s| moved by {:.3e} when refining {} -> {} nodes \
             (t = {:.3e})",
            change,
            n_quad,
            2 * n_quad - 1,
            t
        )));
    }
    Ok((fine, change))
}

/// Minimum of `|FL(xi)| lambda / (t mu^4)` over the interior two-thirds of
/// the four output boxes of a precomputed `L(phi)(t)` field.
pub fn interior_min_constant(cfg: &IllposedConfig, l_hat: &SpinorField, t: f64) -> Result<f64> {
    let boxes = cfg.output_boxes()?;
    let n = cfg.grid.n;
    let band = (n / 2) as i64;
    let scale = cfg.lambda / (t * cfg.mu().powi(4));
    let mut overall = f64::INFINITY;
    for (i, b) in boxes.iter().enumerate() {
        let hw = 2 * b.half_width / 3;
        let mut region_min = f64::INFINITY;
        let mut count = 0usize;
        for k1 in (b.center - hw)..=(b.center + hw) {
            if k1 < -band || k1 >= band {
                continue;
            }
            for k2 in -hw..=hw {
                if k2 < -band || k2 >= band {
                    continue;
                }
                let idx = cfg.grid.index_of_freq_pair(k1, k2);
                let mag = (l_hat.up.values[idx].norm_sqr()
                    + l_hat.down.values[idx].norm_sqr())
                .sqrt();
                region_min = region_min.min(mag * scale);
                count += 1;
            }
        }
        if count == 0 {
            return Err(CsdError::Config(format!(
                "output box {} has an empty interior on this lattice",
                i + 1
            )));
        }
        overall = overall.min(region_min);
    }
    Ok(overall)
}

/// Run `box_data` + `cubic_term` + the pointwise floor at the probe time.
pub fn pointwise_lower_bound(cfg: &IllposedConfig, n_quad: usize) -> Result<f64> {
    let phi = box_data(cfg)?;
    let t = cfg.probe_time();
    let l_hat = cubic_term(&phi, t, n_quad)?;
    interior_min_constant(cfg, &l_hat, t)
}

fn run_with_norms(cfg: &IllposedConfig, n_quad: usize, s_list: &[f64]) -> Result<Vec<IllposedRun>> {
    let phi = box_data(cfg)?;
    let t = cfg.probe_time();
    let l_hat = cubic_term(&phi, t, n_quad)?;
    let c1 = interior_min_constant(cfg, &l_hat, t)?;
    s_list
        .iter()
        .map(|&s| {
            let phi_hs = sobolev_norm(&phi, s)?;
            let l_hs = sobolev_norm(&l_hat, s)?;
            Ok(IllposedRun {
                lambda: cfg.lambda,
                mu: cfg.mu(),
                t,
                phi_hs,
                l_hs,
                ratio: l_hs / phi_hs.powi(3),
                c1,
            })
        })
        .collect()
}

/// Full single-configuration run.
pub fn run_one(cfg: &IllposedConfig, n_quad: usize) -> Result<IllposedRun> {
    Ok(run_with_norms(cfg, n_quad, &[cfg.s])?.remove(0))
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    (slope, (ss / n).sqrt())
}

/// Sweep several lambdas for several Sobolev indices at once; the expensive
/// field computations are shared across the indices. Grids are sized
/// automatically per lambda. Any failing run aborts the sweep with the error
/// naming the lambda.
pub fn lambda_sweep_multi(
    lambdas: &[f64],
    eps: f64,
    delta: f64,
    s_list: &[f64],
    n_quad: usize,
) -> Result<Vec<SweepResult>> {
    if lambdas.len() < 4 {
        return Err(CsdError::Config(format!(
            "sweep needs at least 4 lambda values, got {}",
            lambdas.len()
        )));
    }
    if s_list.is_empty() {
        return Err(CsdError::Config("sweep needs at least one Sobolev index".into()));
    }
    let mut per_s: Vec<Vec<IllposedRun>> = vec![Vec::new(); s_list.len()];
    for (done, &lambda) in lambdas.iter().enumerate() {
        // A failing run invalidates the whole sweep; the error reports how
        // far it got so the partial per-lambda records are accounted for.
        let cfg = IllposedConfig::auto(lambda, eps, delta, s_list[0]).map_err(|e| {
            CsdError::Config(format!(
                "lambda = {lambda} (after {done} completed runs): {e}"
            ))
        })?;
        let runs = run_with_norms(&cfg, n_quad, s_list).map_err(|e| {
            CsdError::Numerical(format!(
                "lambda = {lambda} (after {done} completed runs): {e}"
            ))
        })?;
        for (i, r) in runs.into_iter().enumerate() {
            per_s[i].push(r);
        }
    }
    Ok(s_list
        .iter()
        .zip(per_s)
        .map(|(&s, runs)| {
            let xs: Vec<f64> = runs.iter().map(|r| r.lambda.ln()).collect();
            let ys: Vec<f64> = runs.iter().map(|r| r.ratio.ln()).collect();
            let (slope, residual) = fit_line(&xs, &ys);
            SweepResult {
                s,
                eps,
                delta,
                runs,
                slope,
                residual,
                expected_slope: expected_slope(s, eps),
            }
        })
        .collect())
}

/// Single-index sweep.
pub fn lambda_sweep(
    lambdas: &[f64],
    eps: f64,
    delta: f64,
    s: f64,
    n_quad: usize,
) -> Result<SweepResult> {
    Ok(lambda_sweep_multi(lambdas, eps, delta, &[s], n_quad)?.remove(0))
}
