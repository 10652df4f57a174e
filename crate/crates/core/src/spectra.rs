//! Bound-state energies of the ordinary Coulomb problem.
//!
//! Square integrability terminates the hypergeometric series of the
//! closed-form solution, which requires `½ − w + μ = −n` with
//! `w = gη/√(1−η²)`. Solving for `η` with `N = n + ½ + μ` gives
//! `η = N/√(N² + g²)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::physcore::mu_of_coupling;

/// Guard keeping the bracketing interval away from `η = 0` and `η = 1`.
pub const BRACKET_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumLine {
    pub n: u32,
    pub z: u32,
    pub g: f64,
    /// `E/(mc²)`
    pub eta: f64,
    /// Quantization function at `eta`.
    pub residual: f64,
}

impl SpectrumLine {
    /// `1 − η`, the binding energy in units of `mc²`.
    pub fn binding(&self) -> f64 {
        1.0 - self.eta
    }
}

fn require_subcritical(g: f64) -> Result<f64> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!(
            "coupling must be nonnegative, got {g}"
        )));
    }
    if g > 0.5 {
        return Err(Error::Supercritical { g });
    }
    Ok(mu_of_coupling(g).re)
}

/// `½ − gη/√(1−η²) + μ(g) + n`, zero exactly at a bound state.
pub fn quantization_residual(g: f64, eta: f64, n: u32) -> Result<f64> {
    let mu = require_subcritical(g)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::NoBoundState { eta });
    }
    let eps = ((1.0 - eta) * (1.0 + eta)).sqrt();
    Ok(0.5 - g * eta / eps + mu + n as f64)
}

/// `η = N/√(N² + g²)`, `N = n + ½ + μ(g)`.
pub fn energy_closed_form(g: f64, n: u32) -> Result<f64> {
    let mu = require_subcritical(g)?;
    let big_n = n as f64 + 0.5 + mu;
    let h = big_n.hypot(g);
    // 1 − η = g²/(h(h + N)), free of cancellation
    let binding = g * g / (h * (h + big_n));
    Ok(if binding < 0.25 {
        1.0 - binding
    } else {
        big_n / h
    })
}

/// Root of [`quantization_residual`] by bisection on
/// `(BRACKET_GUARD, 1 − BRACKET_GUARD)` followed by Newton polishing.
pub fn solve_quantization(g: f64, n: u32) -> Result<SpectrumLine> {
    require_subcritical(g)?;
    let f = |eta: f64| quantization_residual(g, eta, n);
    let (mut lo, mut hi) = (BRACKET_GUARD, 1.0 - BRACKET_GUARD);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::Bracketing { lo, hi });
    }
    // The residual falls off like −g/√(2(1−η)) near η = 1, so bisect in
    // log(1 − η) first, then finish in η.
    for _ in 0..200 {
        let mid = 1.0 - ((1.0 - lo) * (1.0 - hi)).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-3 * (1.0 - hi) {
            break;
        }
    }
    let mut eta = 0.5 * (lo + hi);
    for _ in 0..60 {
        let eps2 = (1.0 - eta) * (1.0 + eta);
        let slope = -g / (eps2 * eps2.sqrt());
        let step = f(eta)? / slope;
        let next = eta - step;
        let next = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if f(next)? > 0.0 {
            lo = next;
        } else {
            hi = next;
        }
        if (next - eta).abs() <= 2.0 * f64::EPSILON * (1.0 - next).max(f64::EPSILON) {
            eta = next;
            break;
        }
        eta = next;
    }
    Ok(SpectrumLine {
        n,
        z: 0,
        g,
        eta,
        residual: f(eta)?,
    })
}
