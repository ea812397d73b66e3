//! Exact half-wave propagators, the coupled linear mass flow, the full
//! nonlinear evolution, and Picard iterates with contraction diagnostics.
//!
//! In Fourier variables the system reads
//! `i d/dt psi_hat = H0(xi) psi_hat + F[Nl(psi, psi) psi]` with the per-mode
//! Hermitian generator `H0(xi) = xi_j alpha^j + m beta`. Since
//! `H0^2 = (|xi|^2 + m^2) I`, the linear propagator has the closed form
//! `exp(-i t H0) = cos(E t) I - i sin(E t)/E * H0`, `E = sqrt(|xi|^2 + m^2)`,
//! which the stepper applies exactly; only the nonlinearity is integrated
//! numerically (a Lawson Runge-Kutta 4 scheme, so step size is limited by the
//! nonlinearity alone).

use crate::dirac::{project_field, Sign};
use crate::error::{CsdError, Result};
use crate::field::{sobolev_norm, Rep, SpinorField, top_shell_fraction};
use crate::grid::GridSpec;
use crate::nonlinearity::nonlinear_term;
use num_complex::Complex64 as C64;

/// Parameters of an evolution run.
#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    /// Mass parameter.
    pub m: f64,
    /// Final time (may be negative to run backwards).
    pub t_final: f64,
    /// Number of Runge-Kutta steps.
    pub n_steps: usize,
    /// Quadrature nodes per step for the Picard recursion (3 or 5).
    pub n_quad: usize,
    /// Data amplitude used by small-data experiments.
    pub amplitude: f64,
    /// Sobolev indices recorded along the trajectory.
    pub sobolev_indices: Vec<f64>,
    /// Set false to integrate the linear system only.
    pub nonlinear: bool,
    /// Times at which to retain full field snapshots.
    pub snapshot_times: Vec<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            m: 1.0,
            t_final: 1.0,
            n_steps: 64,
            n_quad: 3,
            amplitude: 1e-3,
            sobolev_indices: vec![0.0, 1.0],
            nonlinear: true,
            snapshot_times: Vec::new(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_final == 0.0 || !self.t_final.is_finite() {
            return Err(CsdError::Config("t_final must be nonzero and finite".into()));
        }
        if self.n_steps == 0 {
            return Err(CsdError::Config("n_steps must be at least 1".into()));
        }
        if self.n_quad != 3 && self.n_quad != 5 {
            return Err(CsdError::Config(format!(
                "n_quad must be 3 or 5, got {}",
                self.n_quad
            )));
        }
        Ok(())
    }
}

/// One recorded trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub charge: Vec<f64>,
    /// `hs_norms[i][k]` is the `H^{s_i}` norm at `times[k]`.
    pub hs_norms: Vec<Vec<f64>>,
    pub sobolev_indices: Vec<f64>,
    pub snapshots: Vec<(f64, SpinorField)>,
    pub warnings: Vec<String>,
    pub final_state: SpinorField,
}

/// Half-wave propagator `exp(-s i t D)`: multiplies the mode `xi` by
/// `exp(-s i t |xi|)`. An isometry of every Sobolev norm.
pub fn half_wave(psi: &SpinorField, s: Sign, t: f64) -> Result<SpinorField> {
    let hat = psi.ensure_frequency()?;
    let out = hat.map_components(|c| {
        c.apply_multiplier(|xi| {
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            (-C64::i() * s.val() * t * r).exp()
        })
    })?;
    if psi.rep() == Rep::Position {
        out.from_fourier()
    } else {
        Ok(out)
    }
}

/// Precomputed per-mode linear propagator `exp(-i t H0)`.
struct Propagator {
    cos_et: Vec<f64>,
    /// `sin(E t)/E`, with the `t` limit at `E = 0`.
    sinc_et: Vec<f64>,
    /// `z = xi_1 + i xi_2` per mode.
    z: Vec<C64>,
    m: f64,
}

impl Propagator {
    fn new(grid: &GridSpec, m: f64, t: f64) -> Propagator {
        let len = grid.len();
        let mut cos_et = Vec::with_capacity(len);
        let mut sinc_et = Vec::with_capacity(len);
        let mut z = Vec::with_capacity(len);
        for idx in 0..len {
            let xi = grid.frequency_of_index(idx);
            let e = (xi[0] * xi[0] + xi[1] * xi[1] + m * m).sqrt();
            cos_et.push((e * t).cos());
            sinc_et.push(if e == 0.0 { t } else { (e * t).sin() / e });
            z.push(C64::new(xi[0], xi[1]));
        }
        Propagator { cos_et, sinc_et, z, m }
    }

    /// Apply to a frequency-representation spinor in place.
    fn apply(&self, psi: &mut SpinorField) {
        debug_assert_eq!(psi.rep(), Rep::Frequency);
        let i = C64::i();
        for idx in 0..self.cos_et.len() {
            let u = psi.up.values[idx];
            let d = psi.down.values[idx];
            // H0 (u, d) = (m u + conj(z) d, z u - m d)
            let hu = self.m * u + self.z[idx].conj() * d;
            let hd = self.z[idx] * u - self.m * d;
            let c = self.cos_et[idx];
            let s = self.sinc_et[idx];
            psi.up.values[idx] = c * u - i * s * hu;
            psi.down.values[idx] = c * d - i * s * hd;
        }
    }

    fn applied(&self, psi: &SpinorField) -> SpinorField {
        let mut out = psi.clone();
        self.apply(&mut out);
        out
    }
}

/// Exact solution of the linear system (`Nl = 0`): per-mode matrix
/// exponential of the coupled generator. Charge-conserving for every `m`;
/// at `m = 0` it reduces to the half-wave flow on each projected part.
pub fn linear_flow(psi0: &SpinorField, m: f64, t: f64) -> Result<SpinorField> {
    let hat = psi0.ensure_frequency()?;
    let prop = Propagator::new(hat.grid(), m, t);
    let out = prop.applied(&hat);
    if psi0.rep() == Rep::Position {
        out.from_fourier()
    } else {
        Ok(out)
    }
}

/// Frequency-space nonlinear right-hand side `-i F[Nl(psi, psi) psi]`.
fn nonlinear_rhs(psi_hat: &SpinorField) -> Result<SpinorField> {
    let mut term = nonlinear_term(psi_hat, psi_hat, psi_hat)?;
    term.scale(-C64::i());
    Ok(term)
}

fn axpy(acc: &mut SpinorField, c: C64, x: &SpinorField) -> Result<()> {
    acc.grid().expect_same(x.grid())?;
    for (a, b) in acc.up.values.iter_mut().zip(&x.up.values) {
        *a += c * b;
    }
    for (a, b) in acc.down.values.iter_mut().zip(&x.down.values) {
        *a += c * b;
    }
    Ok(())
}

/// Integrate the full system with a Lawson RK4 stepper whose linear part is
/// exact. Records charge and the requested Sobolev norms at every step.
pub fn evolve(psi0: &SpinorField, cfg: &EvolutionConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let top = top_shell_fraction(psi0)?;
    if top >= 0.10 {
        warnings.push(format!(
            "initial data carries {:.1}% of its mass in the top frequency shell; \
             the grid may be under-resolving it",
            100.0 * top
        ));
    }

    let h = cfg.t_final / cfg.n_steps as f64;
    let grid = *psi0.grid();
    let full = Propagator::new(&grid, cfg.m, h);
    let half = Propagator::new(&grid, cfg.m, h / 2.0);

    let mut psi = psi0.ensure_frequency()?;
    let mut times = Vec::with_capacity(cfg.n_steps + 1);
    let mut charge = Vec::with_capacity(cfg.n_steps + 1);
    let mut hs_norms: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.n_steps + 1); cfg.sobolev_indices.len()];
    let mut snapshots = Vec::new();

    let record = |t: f64, state: &SpinorField,
                      times: &mut Vec<f64>,
                      charge: &mut Vec<f64>,
                      hs: &mut Vec<Vec<f64>>,
                      snaps: &mut Vec<(f64, SpinorField)>|
     -> Result<()> {
        times.push(t);
        charge.push(state.charge());
        for (i, s) in cfg.sobolev_indices.iter().enumerate() {
            hs[i].push(sobolev_norm(state, *s)?);
        }
        if cfg
            .snapshot_times
            .iter()
            .any(|st| (st - t).abs() <= h.abs() / 2.0 + 1e-12)
        {
            snaps.push((t, state.from_fourier()?));
        }
        Ok(())
    };

    record(0.0, &psi, &mut times, &mut charge, &mut hs_norms, &mut snapshots)?;

    let six = C64::new(6.0, 0.0);
    for step in 0..cfg.n_steps {
        let t_next = (step + 1) as f64 * h;
        if cfg.nonlinear {
            let hc = C64::new(h, 0.0);
            let k1 = nonlinear_rhs(&psi)?;
            // stage 2: E_half (psi + h/2 k1)
            let mut s2 = psi.clone();
            axpy(&mut s2, hc * 0.5, &k1)?;
            half.apply(&mut s2);
            let k2 = nonlinear_rhs(&s2)?;
            // stage 3: E_half psi + h/2 k2
            let mut s3 = half.applied(&psi);
            axpy(&mut s3, hc * 0.5, &k2)?;
            let k3 = nonlinear_rhs(&s3)?;
            // stage 4: E_full psi + h E_half k3
            let mut s4 = full.applied(&psi);
            let ek3 = half.applied(&k3);
            axpy(&mut s4, hc, &ek3)?;
            let k4 = nonlinear_rhs(&s4)?;

            // psi' = E_full psi + h/6 (E_full k1 + 2 E_half (k2 + k3) + k4)
            let mut out = full.applied(&psi);
            let ek1 = full.applied(&k1);
            axpy(&mut out, hc / six, &ek1)?;
            let mut k23 = k2;
            axpy(&mut k23, C64::new(1.0, 0.0), &k3)?;
            let ek23 = half.applied(&k23);
            axpy(&mut out, hc * 2.0 / six, &ek23)?;
            axpy(&mut out, hc / six, &k4)?;
            psi = out;
        } else {
            full.apply(&mut psi);
        }

        if !psi.is_finite() {
            return Err(CsdError::Numerical(format!(
                "non-finite field after step {} (t = {:.6}); {} steps, h = {:.3e}",
                step + 1,
                t_next,
                cfg.n_steps,
                h
            )));
        }
        record(t_next, &psi, &mut times, &mut charge, &mut hs_norms, &mut snapshots)?;
    }

    let final_state = psi;
    Ok(TrajectoryRecord {
        times,
        charge,
        hs_norms,
        sobolev_indices: cfg.sobolev_indices.clone(),
        snapshots,
        warnings,
        final_state,
    })
}

/// Result of a Picard iteration run.
#[derive(Debug, Clone)]
pub struct PicardRecord {
    /// Step-endpoint sample times over which the sups are taken.
    pub sample_times: Vec<f64>,
    /// `p[n]`: sup over samples of the summed projected Sobolev norms of the
    /// n-th iterate (n starts at 0, the homogeneous flow).
    pub p: Vec<f64>,
    /// `q[j]`: sup norm of the difference between iterates `j+1` and `j`.
    pub q: Vec<f64>,
    /// Final-time state of each iterate.
    pub finals: Vec<SpinorField>,
    /// True when the difference norms grew three times in a row.
    pub diverged: bool,
    /// Sobolev index used for the `p`/`q` norms.
    pub s: f64,
}

/// Sup over step endpoints of `sum_[s] ||Pi_[s] psi||_{H^s}` for a stored
/// node trajectory.
fn sup_projected_norm(traj: &[SpinorField], stride: usize, s: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for state in traj.iter().step_by(stride) {
        let mut total = 0.0;
        for sign in Sign::BOTH {
            total += sobolev_norm(&project_field(sign, state)?, s)?;
        }
        sup = sup.max(total);
    }
    Ok(sup)
}

/// Build the Picard iterates of the Duhamel equation and record the
/// contraction diagnostics `p_n`, `q_n` in `H^s`.
///
/// The zeroth iterate is the free half-wave flow of the projected data; each
/// following iterate feeds the previous one into the mass term and the cubic
/// nonlinearity under the Duhamel integral, evaluated by composite
/// panel quadrature on `n_quad - 1` sub-steps per step.
pub fn picard_sequence(
    psi0: &SpinorField,
    cfg: &EvolutionConfig,
    n_iter: usize,
    s: f64,
) -> Result<PicardRecord> {
    cfg.validate()?;
    if n_iter < 2 {
        return Err(CsdError::Config("picard iteration needs n_iter >= 2".into()));
    }
    let grid = *psi0.grid();
    let sub_per_step = cfg.n_quad - 1;
    let n_nodes = cfg.n_steps * sub_per_step + 1;
    if !(n_nodes - 1).is_multiple_of(2) {
        return Err(CsdError::Config("quadrature nodes must pair into panels".into()));
    }
    let h_sub = cfg.t_final / ((n_nodes - 1) as f64);
    let node_time = |k: usize| k as f64 * h_sub;

    let hat0 = psi0.ensure_frequency()?;

    // Free flow of the projected pieces: psi^(0)(t) = sum_s e^{-s i t D} Pi_s psi0.
    let plus0 = project_field(Sign::Plus, &hat0)?;
    let minus0 = project_field(Sign::Minus, &hat0)?;
    let free_at = |t: f64| -> Result<SpinorField> {
        let mut f = half_wave(&plus0, Sign::Plus, t)?;
        f.add_assign(&half_wave(&minus0, Sign::Minus, t)?)?;
        Ok(f)
    };

    let mut prev: Vec<SpinorField> = (0..n_nodes)
        .map(|k| free_at(node_time(k)))
        .collect::<Result<_>>()?;

    let mut p = vec![sup_projected_norm(&prev, sub_per_step, s)?];
    let mut q: Vec<f64> = Vec::new();
    let mut finals = vec![prev[n_nodes - 1].clone()];
    let mut growth_streak = 0;
    let mut diverged = false;

    for _iter in 1..=n_iter {
        // Integrand at every node, split by sign:
        // g_s(t) = e^{+ s i t D} Pi_s [ m beta psi + Nl(psi,psi) psi ](t).
        let mut w_plus = SpinorField::zeros(grid, Rep::Frequency);
        let mut w_minus = SpinorField::zeros(grid, Rep::Frequency);
        let mut g: Vec<[SpinorField; 2]> = Vec::with_capacity(n_nodes);
        for (k, state) in prev.iter().enumerate() {
            let mut integrand = nonlinear_term(state, state, state)?;
            if cfg.m != 0.0 {
                // m beta psi, beta = diag(1, -1).
                let mut mass = state.clone();
                mass.down.scale(C64::new(-1.0, 0.0));
                mass.scale(C64::new(cfg.m, 0.0));
                integrand.add_assign(&mass)?;
            }
            let t = node_time(k);
            let gp = half_wave(&project_field(Sign::Plus, &integrand)?, Sign::Minus, t)?;
            let gm = half_wave(&project_field(Sign::Minus, &integrand)?, Sign::Plus, t)?;
            g.push([gp, gm]);
        }

        // Cumulative panel quadrature, then assemble the new iterate.
        let mut next: Vec<SpinorField> = Vec::with_capacity(n_nodes);
        next.push(free_at(0.0)?);
        let mut k = 0;
        while k + 2 < n_nodes {
            // Panel nodes k, k+1, k+2.
            let (f0p, f1p, f2p) = (&g[k][0], &g[k + 1][0], &g[k + 2][0]);
            let (f0m, f1m, f2m) = (&g[k][1], &g[k + 1][1], &g[k + 2][1]);
            // Mid-panel partial integral of the quadratic interpolant.
            let mut wp_mid = w_plus.clone();
            axpy(&mut wp_mid, C64::new(5.0 * h_sub / 12.0, 0.0), f0p)?;
            axpy(&mut wp_mid, C64::new(8.0 * h_sub / 12.0, 0.0), f1p)?;
            axpy(&mut wp_mid, C64::new(-h_sub / 12.0, 0.0), f2p)?;
            let mut wm_mid = w_minus.clone();
            axpy(&mut wm_mid, C64::new(5.0 * h_sub / 12.0, 0.0), f0m)?;
            axpy(&mut wm_mid, C64::new(8.0 * h_sub / 12.0, 0.0), f1m)?;
            axpy(&mut wm_mid, C64::new(-h_sub / 12.0, 0.0), f2m)?;
            // Full-panel Simpson update.
            axpy(&mut w_plus, C64::new(h_sub / 3.0, 0.0), f0p)?;
            axpy(&mut w_plus, C64::new(4.0 * h_sub / 3.0, 0.0), f1p)?;
            axpy(&mut w_plus, C64::new(h_sub / 3.0, 0.0), f2p)?;
            axpy(&mut w_minus, C64::new(h_sub / 3.0, 0.0), f0m)?;
            axpy(&mut w_minus, C64::new(4.0 * h_sub / 3.0, 0.0), f1m)?;
            axpy(&mut w_minus, C64::new(h_sub / 3.0, 0.0), f2m)?;

            for (node, wp, wm) in [(k + 1, &wp_mid, &wm_mid), (k + 2, &w_plus, &w_minus)] {
                let t = node_time(node);
                let mut state = free_at(t)?;
                let mut dp = half_wave(wp, Sign::Plus, t)?;
                dp.scale(-C64::i());
                let mut dm = half_wave(wm, Sign::Minus, t)?;
                dm.scale(-C64::i());
                state.add_assign(&dp)?;
                state.add_assign(&dm)?;
                next.push(state);
            }
            k += 2;
        }
        debug_assert_eq!(next.len(), n_nodes);

        for st in &next {
            if !st.is_finite() {
                return Err(CsdError::Numerical("picard iterate became non-finite".into()));
            }
        }

        let mut diff_sup: f64 = 0.0;
        for kk in (0..n_nodes).step_by(sub_per_step) {
            let d = next[kk].sub(&prev[kk])?;
            let mut total = 0.0;
            for sign in Sign::BOTH {
                total += sobolev_norm(&project_field(sign, &d)?, s)?;
            }
            diff_sup = diff_sup.max(total);
        }
        q.push(diff_sup);
        if q.len() >= 2 && diff_sup > q[q.len() - 2] {
            growth_streak += 1;
            if growth_streak >= 3 {
                diverged = true;
            }
        } else {
            growth_streak = 0;
        }

        p.push(sup_projected_norm(&next, sub_per_step, s)?);
        finals.push(next[n_nodes - 1].clone());
        prev = next;
    }

    let sample_times = (0..cfg.n_steps + 1)
        .map(|j| j as f64 * cfg.t_final / cfg.n_steps as f64)
        .collect();
    Ok(PicardRecord { sample_times, p, q, finals, diverged, s })
}

/// Largest data amplitude (found by bisection on a fixed profile) for which
/// the first `n_check` Picard contraction ratios stay at or below one half.
pub fn find_contraction_amplitude(
    profile: &SpinorField,
    cfg: &EvolutionConfig,
    n_iter: usize,
    s: f64,
    n_check: usize,
) -> Result<f64> {
    let contracts = |amp: f64| -> Result<bool> {
        let mut data = profile.clone();
        data.scale(C64::new(amp, 0.0));
        let rec = picard_sequence(&data, cfg, n_iter, s)?;
        if rec.diverged {
            return Ok(false);
        }
        for j in 0..n_check.min(rec.q.len().saturating_sub(1)) {
            let (a, b) = (rec.q[j], rec.q[j + 1]);
            if a <= 1e-300 {
                continue;
            }
            if b / a > 0.5 {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut hi = 1.0;
    if contracts(hi)? {
        // Grow until failure or a generous cap.
        for _ in 0..6 {
            if contracts(hi * 2.0)? {
                hi *= 2.0;
            } else {
                break;
            }
        }
        return Ok(hi);
    }
    let mut lo = 0.0;
    let mut bad = hi;
    for _ in 0..12 {
        let mid = 0.5 * (lo + bad);
        if contracts(mid)? {
            lo = mid;
        } else {
            bad = mid;
        }
    }
    if lo == 0.0 {
        return Err(CsdError::Numerical(
            "no contracting amplitude found down to zero".into(),
        ));
    }
    Ok(lo)
}
