//! Independent oracles used by the integration suites. These deliberately
//! avoid the implementation paths they check: the operator norm is found by
//! power iteration instead of the closed form, the linear flow by fine-step
//! explicit integration instead of the matrix exponential, and the cubic
//! flow-derivative term by a direct frequency-domain triple sum with the
//! analytically integrated time phase instead of FFT products and Simpson
//! quadrature.

// Shared between several integration binaries; each uses a subset.
#![allow(dead_code)]

use csd_core::dirac::{projection_symbol_lattice, Mat2, Sign};
use csd_core::field::{Rep, ScalarField, SpinorField};
use csd_core::illposed::IllposedConfig;
use csd_core::num_complex::Complex64 as C64;
use csd_core::sampling::rng_for;
use rand::Rng;
use rayon::prelude::*;

/// Operator norm by power iteration on `M* M`; independent of the
/// closed-form eigenvalue route used by the library.
pub fn op_norm_power_iteration(m: &Mat2, seed: u64) -> f64 {
    let g = m.adjoint().mul(m);
    let mut rng = rng_for(seed, 0);
    let mut v = [
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
    ];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = g.apply(v);
        let norm = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        v = [w[0] / norm, w[1] / norm];
        lambda = norm;
    }
    lambda.sqrt()
}

/// Exact-per-mode linear-flow oracle: integrate
/// `i dv/dt = (xi . alpha + m beta) v` with classical RK4 at a step fine
/// enough that the O(h^4) error sits far below the comparison tolerance.
pub fn linear_flow_fine_rk4(psi0: &SpinorField, m: f64, t: f64, n_steps: usize) -> SpinorField {
    let hat = psi0.ensure_frequency().unwrap();
    let grid = *hat.grid();
    let h = t / n_steps as f64;
    let mut out = hat.clone();
    for idx in 0..grid.len() {
        let xi = grid.frequency_of_index(idx);
        let z = C64::new(xi[0], xi[1]);
        let apply_h = |v: [C64; 2]| -> [C64; 2] {
            // -i H0 v
            let hv = [m * v[0] + z.conj() * v[1], z * v[0] - m * v[1]];
            [-C64::i() * hv[0], -C64::i() * hv[1]]
        };
        let mut v = [out.up.values[idx], out.down.values[idx]];
        for _ in 0..n_steps {
            let k1 = apply_h(v);
            let k2 = apply_h([v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
            let k3 = apply_h([v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
            let k4 = apply_h([v[0] + h * k3[0], v[1] + h * k3[1]]);
            v = [
                v[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                v[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
        }
        out.up.values[idx] = v[0];
        out.down.values[idx] = v[1];
    }
    out
}

struct BoxIndicator {
    center: i64,
    half: i64,
}

impl BoxIndicator {
    fn contains(&self, k1: i64, k2: i64) -> bool {
        (k1 - self.center).abs() <= self.half && k2.abs() <= self.half
    }
}

fn sgn_exp(e: C64, positive: bool) -> C64 {
    if positive {
        e
    } else {
        e.conj()
    }
}

/// Brute-force frequency-domain evaluation of the summed third-derivative
/// term at time `t`: for every output frequency the double convolution over
/// the data boxes is summed directly, with the time integral
/// `int_0^t exp(i w t') dt' = (exp(i w t) - 1) / (i w)` carried out in
/// closed form per sign tuple. O(n^6)-type cost; intended for the smallest
/// configuration only.
pub fn cubic_term_reference(cfg: &IllposedConfig, t: f64) -> SpinorField {
    let g = cfg.geometry().unwrap();
    let grid = cfg.grid;
    let n = grid.n;
    let band = (n / 2) as i64;
    let plus = BoxIndicator { center: g.center, half: g.half_width };
    let minus = BoxIndicator { center: -g.center, half: g.half_width };

    // zeta candidates: both input boxes, with the mirrored memberships
    // chi_plus(-zeta) and chi_minus(-zeta) precomputed, along with the
    // time phase exp(i t |zeta|).
    struct Zeta {
        k: [i64; 2],
        p: bool,
        m: bool,
        r: f64,
        e: C64,
    }
    let mut zetas: Vec<Zeta> = Vec::new();
    for k1 in -band..band {
        for k2 in -band..band {
            let p = plus.contains(-k1, -k2);
            let m = minus.contains(-k1, -k2);
            if p || m {
                let r = ((k1 * k1 + k2 * k2) as f64).sqrt() * grid.dxi();
                zetas.push(Zeta { k: [k1, k2], p, m, r, e: (C64::i() * t * r).exp() });
            }
        }
    }

    // Output region: the four reachable boxes, clipped to the band.
    let out_boxes = [
        BoxIndicator { center: -g.center, half: 3 * g.half_width },
        BoxIndicator { center: 3 * g.center, half: 3 * g.half_width },
        BoxIndicator { center: -3 * g.center, half: 3 * g.half_width },
        BoxIndicator { center: g.center, half: 3 * g.half_width },
    ];
    let mut region: Vec<[i64; 2]> = Vec::new();
    for k1 in (-band + 1)..band {
        for k2 in (-band + 1)..band {
            if out_boxes.iter().any(|b| b.contains(k1, k2)) {
                region.push([k1, k2]);
            }
        }
    }

    // Input-box points, for the w = xi - eta loop.
    let mut w_points: Vec<([i64; 2], bool, bool)> = Vec::new();
    for k1 in -band..band {
        for k2 in -band..band {
            let wp = plus.contains(k1, k2);
            let wm = minus.contains(k1, k2);
            if wp || wm {
                w_points.push(([k1, k2], wp, wm));
            }
        }
    }

    // The implementation zeroes the unpaired Nyquist row/column when it
    // truncates products, and annihilates the zero mode of the inverse
    // Laplacian; the reference sum must match both conventions.
    let current_reach = 2 * g.half_width;
    let in_current_region = |k1: i64, k2: i64| -> bool {
        if (k1 == 0 && k2 == 0) || k1 == -band || k2 == -band {
            return false;
        }
        k2.abs() <= current_reach
            && (k1.abs() <= current_reach
                || (k1 - 2 * g.center).abs() <= current_reach
                || (k1 + 2 * g.center).abs() <= current_reach)
    };

    let dxi = grid.dxi();
    let values: Vec<[C64; 2]> = region
        .par_iter()
        .map(|&xi_k| {
            let xi = [xi_k[0] as f64 * dxi, xi_k[1] as f64 * dxi];
            let a_mag = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let e_a = (C64::i() * t * a_mag).exp();
            let mut acc = [[C64::new(0.0, 0.0); 2]; 2]; // per s1
            for &(wk, wp, wm) in &w_points {
                let eta_k = [xi_k[0] - wk[0], xi_k[1] - wk[1]];
                if !in_current_region(eta_k[0], eta_k[1]) {
                    continue;
                }
                if eta_k[0] < -band || eta_k[0] >= band || eta_k[1] < -band || eta_k[1] >= band {
                    continue;
                }
                let eta = [eta_k[0] as f64 * dxi, eta_k[1] as f64 * dxi];
                let eta_sq = eta[0] * eta[0] + eta[1] * eta[1];
                let w_mag = ((wk[0] * wk[0] + wk[1] * wk[1]) as f64).sqrt() * dxi;
                let e_w = (C64::i() * t * w_mag).exp();

                // Per-tuple phase-weighted current components.
                let mut j = [[C64::new(0.0, 0.0); 3]; 16];
                for z in &zetas {
                    let qk = [eta_k[0] - z.k[0], eta_k[1] - z.k[1]];
                    let qp = plus.contains(qk[0], qk[1]);
                    let qm = minus.contains(qk[0], qk[1]);
                    if !qp && !qm {
                        continue;
                    }
                    let c_mag = ((qk[0] * qk[0] + qk[1] * qk[1]) as f64).sqrt() * dxi;
                    let e_c = (C64::i() * t * c_mag).exp();
                    // Current bilinears of the indicator data: component
                    // pairings (conjugated slot first).
                    let g00 = (z.p && qp) as i64 + (z.m && qm) as i64; // alpha^0
                    let g1 = (z.p && qm) as i64 + (z.m && qp) as i64; // alpha^1
                    let g2 = (z.m && qp) as i64 - (z.p && qm) as i64; // alpha^2 / i
                    for (tuple, jt) in j.iter_mut().enumerate() {
                        let s1 = tuple & 8 != 0;
                        let s2 = tuple & 4 != 0;
                        let s3 = tuple & 2 != 0;
                        let s4 = tuple & 1 != 0;
                        // w_tilde = s1 A + s2 B - s3 C - s4 E
                        let phase = sgn_exp(e_a, s1)
                            * sgn_exp(z.e, s2)
                            * sgn_exp(e_c, !s3)
                            * sgn_exp(e_w, !s4);
                        let omega =
                            sv(s1) * a_mag + sv(s2) * z.r - sv(s3) * c_mag - sv(s4) * w_mag;
                        // (e^{i t w} - 1) / (i w); series below the
                        // cancellation threshold.
                        let x = t * omega;
                        let qf = if x.abs() < 1e-3 {
                            t * C64::new(
                                1.0 - x * x / 6.0,
                                0.5 * x - x * x * x / 24.0,
                            )
                        } else {
                            (phase - 1.0) / (C64::i() * omega)
                        };
                        jt[0] += qf * g00 as f64;
                        jt[1] += qf * g1 as f64;
                        jt[2] += C64::i() * qf * g2 as f64;
                    }
                }

                for (tuple, jt) in j.iter().enumerate() {
                    let s1 = tuple & 8 != 0;
                    let diag = C64::i() * (eta[0] * jt[2] - eta[1] * jt[1]) / eta_sq;
                    let off = jt[0] / eta_sq;
                    let z_eta = C64::new(eta[0], eta[1]);
                    let v0 = diag * wp_c(wp) + (-z_eta.conj() * off) * wp_c(wm);
                    let v1 = (z_eta * off) * wp_c(wp) + diag * wp_c(wm);
                    let slot = if s1 { 0 } else { 1 };
                    acc[slot][0] += v0;
                    acc[slot][1] += v1;
                }
            }
            // Apply exp(-s1 i t |xi|) Pi_[s1] and sum the two branches.
            let mut total = [C64::new(0.0, 0.0); 2];
            for (slot, sign) in [(0usize, Sign::Plus), (1, Sign::Minus)] {
                let proj = projection_symbol_lattice(sign, xi);
                let pv = proj.apply(acc[slot]);
                let phase = (-C64::i() * sign.val() * t * a_mag).exp();
                total[0] += phase * pv[0];
                total[1] += phase * pv[1];
            }
            total
        })
        .collect();

    let mut up = ScalarField::zeros(grid, Rep::Frequency);
    let mut down = ScalarField::zeros(grid, Rep::Frequency);
    for (pos, v) in region.iter().zip(values) {
        let idx = grid.index_of_freq_pair(pos[0], pos[1]);
        up.values[idx] = v[0];
        down.values[idx] = v[1];
    }
    SpinorField::new(up, down).unwrap()
}

fn sv(b: bool) -> f64 {
    if b {
        1.0
    } else {
        -1.0
    }
}

fn wp_c(b: bool) -> C64 {
    C64::new(b as i64 as f64, 0.0)
}

/// Relative L^2 distance between two spinors.
pub fn rel_l2(a: &SpinorField, b: &SpinorField) -> f64 {
    let diff = a.sub(b).unwrap().l2_norm();
    diff / b.l2_norm().max(1e-300)
}
