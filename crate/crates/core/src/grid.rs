//! Periodic-lattice discretization of the plane (and of space-time for
//! modulation analysis).
//!
//! The spatial domain is the square torus `[-L, L)^2` sampled on an `n x n`
//! lattice, `n` a power of two. The dual lattice carries the frequencies
//! `xi_k = (pi / L) * k` with integer `k` in `[-n/2, n/2)` per axis, so the
//! frequency spacing is `pi / L`. With `L = pi` the frequency lattice has
//! unit spacing, which is the convention used by the scaling experiments.
//!
//! An optional time axis (`n_t` samples over a window `[t0, t1)`) extends the
//! grid to space-time for modulation-localized analysis; the dual variable is
//! `tau_a = (2 pi / (t1 - t0)) * a` with `a` in `[-n_t/2, n_t/2)`.

use crate::error::{CsdError, Result};

/// Time axis of a space-time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAxis {
    /// Number of time samples.
    pub n_t: usize,
    /// Sampled window `[t0, t1)`; samples sit at `t0 + j (t1-t0)/n_t`.
    pub t_span: (f64, f64),
}

impl TimeAxis {
    /// Window length `t1 - t0`.
    pub fn window(&self) -> f64 {
        self.t_span.1 - self.t_span.0
    }

    /// Temporal frequency spacing `2 pi / (t1 - t0)`.
    pub fn dtau(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.window()
    }

    /// Sample time of index `j`.
    pub fn time_of_index(&self, j: usize) -> f64 {
        self.t_span.0 + self.window() * j as f64 / self.n_t as f64
    }

    /// Temporal frequency of FFT index `a` (upper half negative).
    pub fn tau_of_index(&self, a: usize) -> f64 {
        let k = signed_index(a, self.n_t);
        self.dtau() * k as f64
    }
}

/// Square periodic lattice specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points per spatial axis; a power of two, at least 8.
    pub n: usize,
    /// Domain half-width `L`; the torus is `[-L, L)^2`.
    pub dom_half_width: f64,
    /// Optional time axis for space-time analysis.
    pub time: Option<TimeAxis>,
}

impl GridSpec {
    /// Purely spatial grid.
    pub fn new(n: usize, dom_half_width: f64) -> Result<Self> {
        let g = GridSpec { n, dom_half_width, time: None };
        g.validate()?;
        Ok(g)
    }

    /// Grid with a time axis attached.
    pub fn with_time(n: usize, dom_half_width: f64, n_t: usize, t0: f64, t1: f64) -> Result<Self> {
        let g = GridSpec {
            n,
            dom_half_width,
            time: Some(TimeAxis { n_t, t_span: (t0, t1) }),
        };
        g.validate()?;
        Ok(g)
    }

    /// Unit-frequency-spacing grid (`L = pi`), the convention used by the
    /// low-regularity scaling experiments.
    pub fn unit_spacing(n: usize) -> Result<Self> {
        GridSpec::new(n, std::f64::consts::PI)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(CsdError::Config(format!(
                "grid.n must be a power of two >= 8, got {}",
                self.n
            )));
        }
        if !self.dom_half_width.is_finite() || self.dom_half_width <= 0.0 {
            return Err(CsdError::Config(format!(
                "grid.dom_half_width must be positive and finite, got {}",
                self.dom_half_width
            )));
        }
        if let Some(t) = &self.time {
            if t.n_t < 2 || !t.n_t.is_power_of_two() {
                return Err(CsdError::Config(format!(
                    "grid.n_t must be a power of two >= 2, got {}",
                    t.n_t
                )));
            }
            if t.t_span.0.is_nan() || t.t_span.1.is_nan() || t.t_span.1 <= t.t_span.0 {
                return Err(CsdError::Config(format!(
                    "grid time window must satisfy t1 > t0, got ({}, {})",
                    t.t_span.0, t.t_span.1
                )));
            }
        }
        Ok(())
    }

    /// Total number of spatial lattice points.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    /// Frequency spacing `pi / L`.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.dom_half_width
    }

    /// Position spacing `2 L / n`.
    pub fn dx(&self) -> f64 {
        2.0 * self.dom_half_width / self.n as f64
    }

    /// Signed integer frequency index of FFT index `i` along one axis.
    pub fn signed_index(&self, i: usize) -> i64 {
        signed_index(i, self.n)
    }

    /// FFT index of a signed integer frequency index.
    pub fn unsigned_index(&self, k: i64) -> usize {
        let n = self.n as i64;
        debug_assert!(k >= -n / 2 && k < n / 2);
        (k.rem_euclid(n)) as usize
    }

    /// Physical frequency vector of the flat mode index `idx = i1 * n + i2`.
    pub fn frequency_of_index(&self, idx: usize) -> [f64; 2] {
        let (i1, i2) = (idx / self.n, idx % self.n);
        let d = self.dxi();
        [
            self.signed_index(i1) as f64 * d,
            self.signed_index(i2) as f64 * d,
        ]
    }

    /// Flat mode index of a signed integer frequency pair.
    pub fn index_of_freq_pair(&self, k1: i64, k2: i64) -> usize {
        self.unsigned_index(k1) * self.n + self.unsigned_index(k2)
    }

    /// Position of the flat lattice index `idx = i1 * n + i2`.
    pub fn position_of_index(&self, idx: usize) -> [f64; 2] {
        let (i1, i2) = (idx / self.n, idx % self.n);
        let d = self.dx();
        [
            -self.dom_half_width + i1 as f64 * d,
            -self.dom_half_width + i2 as f64 * d,
        ]
    }

    /// Largest physical `|xi|` representable on the lattice.
    pub fn max_freq_norm(&self) -> f64 {
        let half = (self.n / 2) as f64 * self.dxi();
        half * std::f64::consts::SQRT_2
    }

    /// Time axis, or an error when an operation needs one.
    pub fn time_axis(&self) -> Result<TimeAxis> {
        self.time.ok_or_else(|| {
            CsdError::Config("operation requires a grid with a time axis (n_t, t_span)".into())
        })
    }

    /// Grid equality check used by binary operations.
    pub fn expect_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(CsdError::GridMismatch(format!(
                "{:?} vs {:?}",
                self, other
            )));
        }
        Ok(())
    }
}

/// Signed frequency index of FFT bin `i` on an `n`-point axis.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Dyadic shell number of a non-negative magnitude: `1` when `x < 2`,
/// otherwise the power of two `N` with `N <= x < 2N`.
pub fn dyadic_shell(x: f64) -> u64 {
    debug_assert!(x >= 0.0);
    let mut shell = 1u64;
    while (2 * shell) as f64 <= x {
        shell *= 2;
    }
    shell
}
