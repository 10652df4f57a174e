//! Unit conventions and the scalar formulas shared by every model.
//!
//! All quantities are dimensionless: momentum in units of `mc`, energy in
//! units of `mc²`, length in units of `ħ/(mc)`. In these units
//!
//! * `u = p/(mc)`, `η = E/(mc²)`,
//! * `θ = β(mc)²`, `θ′ = β′(mc)²`,
//! * `g = Zα = Ze²/(ħc)`,
//! * `ε̃ = √(1 − η²)` (both `ε/(mc²)` with `ε² = m²c⁴ − E²` and
//!   `ε/(mc)` with `ε² = m²c² − E²/c²`),
//! * `w = gη/ε̃`, `ω̃ = gη`, `k = g²`, `μ = √(¼ − g²)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const FINE_STRUCTURE: f64 = 1.0 / 137.035999;

/// Deformation sector of the position representation in momentum space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformationParams {
    /// `β(mc)²`
    pub theta: f64,
    /// `β′(mc)²`
    pub theta_prime: f64,
    /// Representation parameter; every computation here uses `γ = 0`.
    pub gamma: f64,
}

impl DeformationParams {
    pub fn new(theta: f64, theta_prime: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta_prime >= 0.0) || !theta.is_finite() || !theta_prime.is_finite() {
            return Err(Error::InvalidInput(format!(
                "deformation parameters must be finite and nonnegative (theta = {theta}, theta' = {theta_prime})"
            )));
        }
        Ok(Self {
            theta,
            theta_prime,
            gamma: 0.0,
        })
    }

    /// `θ + θ′`, the combination that sets the compactification scale.
    pub fn sum(&self) -> f64 {
        self.theta + self.theta_prime
    }

    /// `β/(β+β′)`. See `kgmodels::to_heun` for why this and not twice it.
    pub fn omega1(&self) -> f64 {
        self.theta / self.sum()
    }

    /// `½(β+β′)m²c²`
    pub fn omega2(&self) -> f64 {
        0.5 * self.sum()
    }

    pub(crate) fn require_deformed(&self) -> Result<()> {
        if self.sum() > 0.0 {
            Ok(())
        } else {
            Err(Error::DegenerateDeformation(
                "theta + theta' = 0; use the ordinary model".into(),
            ))
        }
    }
}

/// Physical inputs of the Coulomb problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoulombSystem {
    pub z: u32,
    pub alpha: f64,
    /// `E/(mc²)`
    pub eta: f64,
    /// Coupling `g`. Equal to `Z·α` unless set directly.
    pub g: f64,
}

impl CoulombSystem {
    pub fn new(z: u32, alpha: f64, eta: f64) -> Result<Self> {
        if z == 0 {
            return Err(Error::InvalidInput("Z must be positive".into()));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            z,
            alpha,
            eta,
            g: z as f64 * alpha,
        })
    }

    /// A system described by its coupling alone; `z` is the nearest integer
    /// to `g/α` and is only informative.
    pub fn from_coupling(g: f64, eta: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coupling must be positive, got {g}"
            )));
        }
        Ok(Self {
            z: (g / FINE_STRUCTURE).round().max(1.0) as u32,
            alpha: FINE_STRUCTURE,
            eta,
            g,
        })
    }

    pub fn require_bound(&self) -> Result<()> {
        if self.eta > 0.0 && self.eta < 1.0 {
            Ok(())
        } else {
            Err(Error::NoBoundState { eta: self.eta })
        }
    }

    /// `ε̃² = 1 − η²`, evaluated as `(1−η)(1+η)` to keep precision near `η → 1`.
    pub fn eps_tilde_sq(&self) -> f64 {
        (1.0 - self.eta) * (1.0 + self.eta)
    }

    pub fn eps_tilde(&self) -> f64 {
        self.eps_tilde_sq().sqrt()
    }

    pub fn mu(&self) -> Complex64 {
        mu_of_coupling(self.g)
    }

    /// `w = gη/ε̃`
    pub fn w(&self) -> f64 {
        self.g * self.eta / self.eps_tilde()
    }

    /// `ω̃ = gη`
    pub fn omega_tilde(&self) -> f64 {
        self.g * self.eta
    }

    /// `k = g²`
    pub fn k(&self) -> f64 {
        self.g * self.g
    }
}

/// Minimal position uncertainty `√(N·θ + θ′)` in units of `ħ/(mc)`.
pub fn minimal_length(params: &DeformationParams, dims: u32) -> Result<f64> {
    if dims == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    Ok((dims as f64 * params.theta + params.theta_prime).sqrt())
}

/// `μ = √(¼ − g²)`, principal branch; purely imaginary with positive
/// imaginary part when `g > ½`.
pub fn mu_of_coupling(g: f64) -> Complex64 {
    let d = (0.5 - g) * (0.5 + g);
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// Largest `Z` with `Z·α < ½`. The boundary `Zα = ½` counts as supercritical.
pub fn critical_z(alpha: f64) -> u32 {
    if !(alpha > 0.0) || alpha >= 0.5 {
        return 0;
    }
    let mut z = (0.5 / alpha).floor();
    while z > 0.0 && z * alpha >= 0.5 {
        z -= 1.0;
    }
    while (z + 1.0) * alpha < 0.5 {
        z += 1.0;
    }
    z as u32
}
