//! Gauss hypergeometric and local Heun functions, and the closed-form
//! momentum-space wavefunction of the ordinary Coulomb problem.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuchsian::{self, Jet, Point, RationalCoeffODE};
use crate::physcore::CoulombSystem;
use crate::poly::{Field, Poly};

const SERIES_TOL: f64 = f64::EPSILON;
const MAX_TERMS: usize = 10_000;
/// Taylor order used for each continuation step.
const STEP_ORDER: usize = 64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `Some(n)` when `x` is exactly the nonpositive integer `−n`.
fn nonpositive_integer(x: Complex64) -> Option<usize> {
    (x.im == 0.0 && x.re <= 0.0 && x.re.fract() == 0.0).then(|| (-x.re) as usize)
}

fn near_nonpositive_integer(x: Complex64) -> bool {
    let r = x.re.round();
    r <= 0.0 && (x.re - r).abs() < 1e-12 && x.im.abs() < 1e-12
}

/// Sums `Σ t_n` with `t_{n+1} = t_n·ratio(n)`, stopping after two
/// consecutive terms below tolerance. `limit` caps the number of terms for
/// terminating series.
fn sum_series(
    limit: Option<usize>,
    mut ratio: impl FnMut(usize) -> Complex64,
) -> Result<Complex64> {
    let mut term = c(1.0);
    let mut sum = term;
    let mut small = 0;
    let cap = limit.map_or(MAX_TERMS, |n| n + 1);
    for n in 0..cap {
        if limit == Some(n) {
            return Ok(sum);
        }
        term *= ratio(n);
        sum += term;
        if limit.is_none() && term.norm() <= SERIES_TOL * sum.norm() {
            small += 1;
            if small == 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    if limit.is_some() {
        return Ok(sum);
    }
    Err(Error::OutOfDomain(format!(
        "hypergeometric series did not converge in {MAX_TERMS} terms"
    )))
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)`.
///
/// Uses the defining series for `|z| < 1` or the Pfaff-transformed series
/// `(1−z)^(−a) ₂F₁(a, c−b; c; z/(z−1))`, whichever has the smaller
/// argument. When `a` or `b` is a nonpositive integer the series is a
/// polynomial and is summed exactly at any `z`.
pub fn hyp2f1(a: Complex64, b: Complex64, cc: Complex64, z: Complex64) -> Result<Complex64> {
    if near_nonpositive_integer(cc) {
        return Err(Error::Pole(format!(
            "2F1 with c = {cc} (nonpositive integer)"
        )));
    }
    let ratio = |n: usize| {
        let n = n as f64;
        (a + n) * (b + n) / ((cc + n) * (n + 1.0)) * z
    };
    let terminate = match (nonpositive_integer(a), nonpositive_integer(b)) {
        (Some(m), Some(k)) => Some(m.min(k)),
        (m, k) => m.or(k),
    };
    if let Some(m) = terminate {
        return sum_series(Some(m), ratio);
    }
    if z.norm() == 0.0 {
        return Ok(c(1.0));
    }
    let zp = z / (z - 1.0);
    if z.norm() < 1.0 && z.norm() <= zp.norm() {
        return sum_series(None, ratio);
    }
    if zp.norm() < 1.0 {
        let pre = (-a * (1.0 - z).ln()).exp();
        return Ok(pre * hyp2f1(a, cc - b, cc, zp)?);
    }
    Err(Error::OutOfDomain(format!(
        "2F1 argument z = {z} lies outside |z| < 1 and |z/(z−1)| < 1"
    )))
}

/// `(F, F′, F″)` at `z`.
pub fn hyp2f1_jet(
    a: Complex64,
    b: Complex64,
    cc: Complex64,
    z: Complex64,
) -> Result<(Complex64, Complex64, Complex64)> {
    // a terminating series has vanishing higher derivatives, whose shifted
    // parameters would no longer terminate
    let scaled = |k: Complex64, s: f64| -> Result<Complex64> {
        if k.norm() == 0.0 {
            Ok(c(0.0))
        } else {
            Ok(k * hyp2f1(a + s, b + s, cc + s, z)?)
        }
    };
    let f = hyp2f1(a, b, cc, z)?;
    let f1 = scaled(a * b / cc, 1.0)?;
    let f2 = scaled(a * (a + 1.0) * b * (b + 1.0) / (cc * (cc + 1.0)), 2.0)?;
    Ok((f, f1, f2))
}

/// Parameters of the Heun equation in the form
///
/// ```text
/// f″ + (c/ξ + e/(ξ−1) + d/(ξ−ξ0))·f′ + (abξ + q)/(ξ(ξ−1)(ξ−ξ0))·f = 0
/// ```
///
/// Note the `+q` sign in the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeunParams {
    pub xi0: Complex64,
    pub q: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub e: Complex64,
}

impl HeunParams {
    /// Recovers `e` from `a + b + 1 = c + d + e`.
    pub fn new(
        xi0: Complex64,
        q: Complex64,
        a: Complex64,
        b: Complex64,
        cc: Complex64,
        d: Complex64,
    ) -> Result<Self> {
        Self::with_e(xi0, q, a, b, cc, d, a + b + 1.0 - cc - d)
    }

    /// All seven parameters given; the Fuchsian relation is checked.
    pub fn with_e(
        xi0: Complex64,
        q: Complex64,
        a: Complex64,
        b: Complex64,
        cc: Complex64,
        d: Complex64,
        e: Complex64,
    ) -> Result<Self> {
        if xi0.norm() == 0.0 || (xi0 - 1.0).norm() == 0.0 || !xi0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Heun singularity xi0 = {xi0} must differ from 0 and 1"
            )));
        }
        let p = Self {
            xi0,
            q,
            a,
            b,
            c: cc,
            d,
            e,
        };
        let scale = 1.0 + a.norm() + b.norm() + cc.norm() + d.norm() + e.norm();
        if p.fuchs_residual() > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "Heun parameters violate a + b + 1 = c + d + e (residual {:e})",
                p.fuchs_residual()
            )));
        }
        Ok(p)
    }

    /// `|a + b + 1 − c − d − e|`
    pub fn fuchs_residual(&self) -> f64 {
        (self.a + self.b + 1.0 - self.c - self.d - self.e).norm()
    }

    /// Radius of the ξ = 0 disk.
    pub fn local_radius(&self) -> f64 {
        self.xi0.norm().min(1.0)
    }

    /// The Heun equation as a rational-coefficient ODE in `ξ`.
    pub fn ode(&self) -> RationalCoeffODE {
        let [a2, a1, a0] =
            heun_polynomial_form(self.xi0, self.q, self.a * self.b, self.c, self.d, self.e);
        RationalCoeffODE::from_polynomial_form(a2, a1, a0)
    }

    /// Taylor coefficients of the local solution with `H(0) = 1`:
    ///
    /// ```text
    /// ξ0(m+1)(m+c)·c_{m+1} = [m((m−1+c)(1+ξ0) + eξ0 + d) − q]·c_m
    ///                        − (m−1+a)(m−1+b)·c_{m−1}
    /// ```
    pub fn coefficients(&self, order: usize) -> Result<Vec<Complex64>> {
        self.require_regular_branch()?;
        let mut out = Vec::with_capacity(order + 1);
        out.push(c(1.0));
        let (mut prev, mut cur) = (c(0.0), c(1.0));
        for m in 0..order {
            let next = self.next_coefficient(m, prev, cur);
            out.push(next);
            prev = cur;
            cur = next;
        }
        Ok(out)
    }

    fn next_coefficient(&self, m: usize, prev: Complex64, cur: Complex64) -> Complex64 {
        let mf = m as f64;
        let diag =
            mf * ((self.c + mf - 1.0) * (self.xi0 + 1.0) + self.e * self.xi0 + self.d) - self.q;
        let low = (self.a + mf - 1.0) * (self.b + mf - 1.0);
        (diag * cur - low * prev) / (self.xi0 * (mf + 1.0) * (self.c + mf))
    }

    fn require_regular_branch(&self) -> Result<()> {
        if near_nonpositive_integer(self.c) {
            Err(Error::Pole(format!(
                "local Heun function with c = {} (nonpositive integer)",
                self.c
            )))
        } else {
            Ok(())
        }
    }
}

/// `[A2, A1, A0]` with `A2·f″ + A1·f′ + A0·f = 0` equivalent to the Heun
/// equation; only the product `ab` enters.
pub fn heun_polynomial_form<T: Field>(xi0: T, q: T, ab: T, cc: T, d: T, e: T) -> [Poly<T>; 3] {
    let x = Poly::<T>::x();
    let xm1 = &x - &Poly::constant(T::one());
    let xmx0 = &x - &Poly::constant(xi0);
    let a2 = &(&x * &xm1) * &xmx0;
    let a1 = &(&(&xm1 * &xmx0).scale(&cc) + &(&x * &xmx0).scale(&e)) + &(&x * &xm1).scale(&d);
    let a0 = Poly::new(vec![q, ab]);
    [a2, a1, a0]
}

/// Local Heun function `H(ξ0, q, a, b, c, d; ξ)` regular at `ξ = 0` with
/// `H(0) = 1`, summed from its three-term recurrence. Requires
/// `|ξ| < min(1, |ξ0|)`.
pub fn heun_local(p: &HeunParams, xi: Complex64) -> Result<Complex64> {
    Ok(heun_local_jet(p, xi)?.w)
}

/// Value and first two derivatives of [`heun_local`].
pub fn heun_local_jet(p: &HeunParams, xi: Complex64) -> Result<Jet> {
    p.require_regular_branch()?;
    let r = p.local_radius();
    if !(xi.norm() < r) {
        return Err(Error::OutOfDomain(format!(
            "|xi| = {} is outside the local Heun disk of radius {r}",
            xi.norm()
        )));
    }
    let zero = c(0.0);
    let (mut prev, mut cur) = (zero, c(1.0));
    let (mut w, mut dw, mut d2w) = (c(1.0), zero, zero);
    let mut power = c(1.0); // ξ^m
    let mut dpow = zero; // ξ^(m−1)
    let mut small = 0;
    for m in 0..MAX_TERMS {
        let next = p.next_coefficient(m, prev, cur);
        prev = cur;
        cur = next;
        let n = (m + 1) as f64;
        let d2pow = dpow;
        dpow = power;
        power *= xi;
        let t = cur * power;
        w += t;
        dw += cur * n * dpow;
        d2w += cur * n * (n - 1.0) * d2pow;
        let tiny = |x: Complex64, s: Complex64| x.norm() <= SERIES_TOL * s.norm();
        if tiny(t, w) && (xi.norm() == 0.0 || tiny(cur * n * dpow, dw) || dw.norm() == 0.0) {
            small += 1;
            if small == 2 {
                return Ok(Jet {
                    w,
                    dw,
                    d2w,
                    error: SERIES_TOL * w.norm(),
                });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::OutOfDomain(format!(
        "local Heun series did not converge at xi = {xi}"
    )))
}

/// Analytic continuation of the local Heun function along the straight
/// segment from `0` to `ξ`, by re-expanding in Taylor series at ordinary
/// points. Each step covers at most half the distance to the nearest
/// singularity. Fails when a singular point lies on the segment.
pub fn heun_continued(p: &HeunParams, xi: Complex64) -> Result<Jet> {
    let r0 = p.local_radius();
    if xi.norm() <= 0.5 * r0 {
        return heun_local_jet(p, xi);
    }
    for s in [c(0.0), c(1.0), p.xi0] {
        let on_segment = if s.norm() == 0.0 {
            false
        } else {
            let t = (s / xi).re;
            let perp = (s - xi * t).norm();
            t > 0.0 && t <= 1.0 + 1e-15 && perp <= 1e-12 * s.norm().max(1.0)
        };
        if on_segment {
            return Err(Error::OutOfDomain(format!(
                "singular point {s} lies on the continuation path from 0 to {xi}"
            )));
        }
    }
    let ode = p.ode();
    let dir = xi / xi.norm();
    let mut z = dir * (0.5 * r0);
    let mut jet = heun_local_jet(p, z)?;
    let mut error = jet.error;
    while (xi - z).norm() > 0.0 {
        let step = fuchsian::taylor_solution(&ode, z, jet.w, jet.dw, STEP_ORDER)?;
        let remaining = (xi - z).norm();
        let h = remaining.min(0.5 * step.radius);
        let next = if h == remaining { xi } else { z + dir * h };
        jet = step.evaluate_jet(next)?;
        error += jet.error;
        z = next;
    }
    jet.error = error;
    Ok(jet)
}

/// `ψ(u) = u⁻¹ (1 + iu/ε̃)^(−3/2−μ) ₂F₁(3/2+μ, ½−w+μ; 2μ+1; 2/(1 + iu/ε̃))`
/// with unit normalization.
pub fn psi_ordinary(system: &CoulombSystem, u: f64) -> Result<Complex64> {
    Ok(psi_ordinary_jet(system, u)?.w)
}

/// `ψ, ψ′, ψ″` of [`psi_ordinary`] with respect to `u`.
pub fn psi_ordinary_jet(system: &CoulombSystem, u: f64) -> Result<Jet> {
    system.require_bound()?;
    if !(u > 0.0) {
        return Err(Error::InvalidInput(format!(
            "momentum must be positive, got u = {u}"
        )));
    }
    let mu = system.mu();
    let lambda = mu + 1.5;
    let mut b = mu + 0.5 - system.w();
    let r = b.re.round();
    if r <= 0.0 && (b.re - r).abs() < 1e-9 && b.im.abs() < 1e-9 {
        b = c(r);
    }
    let kappa = Complex64::new(0.0, 1.0 / system.eps_tilde());
    let zf = 1.0 + kappa * u;
    let x = 2.0 / zf;
    let (f, f1, f2) = hyp2f1_jet(lambda, b, 2.0 * mu + 1.0, x)?;
    let dx = -x * x * kappa / 2.0;
    let d2x = x * x * x * kappa * kappa / 2.0;
    let p0 = (-lambda * zf.ln()).exp();
    let p1 = -lambda * kappa * p0 / zf;
    let p2 = lambda * (lambda + 1.0) * kappa * kappa * p0 / (zf * zf);
    let g = p0 * f;
    let g1 = p1 * f + p0 * f1 * dx;
    let g2 = p2 * f + 2.0 * p1 * f1 * dx + p0 * (f2 * dx * dx + f1 * d2x);
    Ok(Jet {
        w: g / u,
        dw: g1 / u - g / (u * u),
        d2w: g2 / u - 2.0 * g1 / (u * u) + 2.0 * g / (u * u * u),
        error: 10.0 * f64::EPSILON * (g / u).norm(),
    })
}

/// The hypergeometric ODE `z(1−z)w″ + [c − (a+b+1)z]w′ − ab·w = 0`.
pub fn hypergeometric_ode(a: Complex64, b: Complex64, cc: Complex64) -> RationalCoeffODE {
    RationalCoeffODE::from_polynomial_form(
        Poly::new(vec![c(0.0), c(1.0), c(-1.0)]),
        Poly::new(vec![cc, -(a + b + 1.0)]),
        Poly::constant(-a * b),
    )
}

/// Frobenius branch at `ξ = 0` with exponent 0 from the generic engine, for
/// cross-checking the built-in recurrence.
pub fn heun_local_via_engine(p: &HeunParams, order: usize) -> Result<fuchsian::FrobeniusSolution> {
    fuchsian::frobenius_series(&p.ode(), Point::Finite(c(0.0)), c(0.0), order)
}
