//! The three momentum-space models as rational-coefficient ODEs in `u`, and
//! their reductions to Heun-type normal forms.
//!
//! Every equation comes from the operator identity
//! `(E − V)²ψ = (m²c⁴ + c²p²)ψ` with `V = −Ze²/r`, where `r` acts in
//! momentum space as a differential operator `R̂`:
//!
//! * ordinary: `R̂² = −(d²/du² + (2/u) d/du)`, `R̂ = i(d/du + 1/u)`;
//! * deformed, `E = 0`: only `R̂²` enters, with the minimal-length
//!   corrections in both derivative terms;
//! * deformed first order (`β′ = 2β`): `R̂² = −[(1+6θu²)d²/du² +
//!   (2/u)(1+7θu²)d/du]` and `R̂ = i[(1+3θu²)d/du + (1+θu²)/u]`, both
//!   truncated at first order in `θ`, with the equation written for
//!   `φ = u·ψ`.
//!
//! The builders are generic over the scalar field so the same code runs in
//! `f64` and in exact rational arithmetic.

use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuchsian::{self, Point, RationalCoeffODE};
use crate::physcore::{CoulombSystem, DeformationParams};
use crate::poly::{cq, imag_unit, re, Field, Poly, Real};
use crate::specialfn::{heun_polynomial_form, HeunParams};

/// Separation of `x₁` and `x₂` below which a confluence warning is issued.
pub const CONFLUENCE_WARNING: f64 = 1e-3;

fn cr<R: Real>(x: R) -> Complex<R> {
    re(x)
}

fn poly<R: Real>(coeffs: Vec<Complex<R>>) -> Poly<Complex<R>> {
    Poly::new(coeffs)
}

fn zero<R: Real>() -> Complex<R> {
    cq(0, 1)
}

/// Polynomial form `[a2, a1, a0]` of the ordinary equation, multiplied
/// through by `u`:
///
/// ```text
/// (ε̃² + u²)ψ″ + (2ε̃²/u + 2iω̃ + 6u)ψ′ + (k + 2iω̃/u + 6)ψ = 0
/// ```
pub fn ordinary_form<R: Real>(eps2: R, omega: R, k: R) -> [Poly<Complex<R>>; 3] {
    let i = imag_unit::<R>();
    let e2 = cr(eps2);
    let iw = i * cr(omega);
    let two = cq::<R>(2, 1);
    let a2 = poly(vec![zero(), e2.clone(), zero(), cq(1, 1)]);
    let a1 = poly(vec![two.clone() * e2, two.clone() * iw.clone(), cq(6, 1)]);
    let a0 = poly(vec![two * iw, cq::<R>(6, 1) + cr(k)]);
    [a2, a1, a0]
}

/// Polynomial form of the deformed zero-energy equation. With
/// `s = θ+θ′`, `A = 1 + s·u²`, `B = 1 + (2θ+θ′)u²`:
///
/// ```text
/// ψ″ + [4u²A + 2B(1+u²)] / [u(1+u²)A] · ψ′ + [(2A + 4B)A + k] / [(1+u²)A²] · ψ = 0
/// ```
pub fn deformed_zero_energy_form<R: Real>(k: R, theta: R, theta_prime: R) -> [Poly<Complex<R>>; 3] {
    let s = cr(theta.clone() + theta_prime.clone());
    let two = cq::<R>(2, 1);
    let big_a = poly(vec![cq(1, 1), zero(), s]);
    let big_b = poly(vec![cq(1, 1), zero(), cr(two_of(theta) + theta_prime)]);
    let one_u2 = poly(vec![cq(1, 1), zero(), cq(1, 1)]);
    let u = Poly::<Complex<R>>::x();
    let u2 = u.mul_x_pow(1);
    let a2 = &(&u * &one_u2) * &(&big_a * &big_a);
    let a1 = &big_a * &(&(&u2 * &big_a).scale(&cq(4, 1)) + &(&big_b * &one_u2).scale(&two));
    let inner =
        &(&(&big_a.scale(&two) + &big_b.scale(&cq(4, 1))) * &big_a) + &Poly::constant(cr(k));
    let a0 = &u * &inner;
    [a2, a1, a0]
}

fn two_of<R: Real>(x: R) -> R {
    x.clone() + x
}

/// Polynomial form of the first-order (`β′ = 2β`) equation for `φ = u·ψ`:
///
/// ```text
/// (u²+ε̃²)(1+6θu²)φ″ + [2θu(u²+ε̃²) + 4u(1+6θu²) + 2iω̃(1+3θu²)]φ′
///   + [−2θ(u²+ε̃²) − 2(1+6θu²) + 4(1+7θu²) − 4iω̃θu + k]φ = 0
/// ```
pub fn first_order_form<R: Real>(eps2: R, omega: R, k: R, theta: R) -> [Poly<Complex<R>>; 3] {
    let i = imag_unit::<R>();
    let t = cr(theta);
    let e2 = cr(eps2);
    let w = cr(omega);
    let n = |v: i64| cq::<R>(v, 1);
    let u2e = poly(vec![e2.clone(), zero(), n(1)]);
    let six = poly(vec![n(1), zero(), n(6) * t.clone()]);
    let a2 = &u2e * &six;
    let a1 = &(&u2e.mul_x_pow(1).scale(&(n(2) * t.clone())) + &six.mul_x_pow(1).scale(&n(4)))
        + &poly(vec![
            n(2) * i.clone() * w.clone(),
            zero(),
            n(6) * i.clone() * w.clone() * t.clone(),
        ]);
    let a0 = poly(vec![
        n(2) - n(2) * t.clone() * e2 + cr(k),
        n(-4) * i * w * t.clone(),
        n(-2) * t.clone() - n(12) * t.clone() + n(28) * t,
    ]);
    [a2, a1, a0]
}

/// Ordinary Coulomb equation for `ψ(u)`.
pub fn build_ordinary_kg(system: &CoulombSystem) -> Result<RationalCoeffODE> {
    system.require_bound()?;
    let [a2, a1, a0] = ordinary_form(system.eps_tilde_sq(), system.omega_tilde(), system.k());
    Ok(RationalCoeffODE::from_polynomial_form(a2, a1, a0))
}

/// Deformed equation at `E = 0` for `ψ(u)`.
pub fn build_deformed_zero_energy(g: f64, params: &DeformationParams) -> Result<RationalCoeffODE> {
    params.require_deformed()?;
    let [a2, a1, a0] = deformed_zero_energy_form(g * g, params.theta, params.theta_prime);
    Ok(RationalCoeffODE::from_polynomial_form(a2, a1, a0))
}

/// First-order deformed equation (`β′ = 2β`) for `φ(u) = u·ψ(u)`. Exponents
/// reported by the engine refer to `φ`; subtract one for `ψ`.
pub fn build_deformed_first_order(system: &CoulombSystem, theta: f64) -> Result<RationalCoeffODE> {
    require_first_order(system, theta)?;
    let [a2, a1, a0] = first_order_form(
        system.eps_tilde_sq(),
        system.omega_tilde(),
        system.k(),
        theta,
    );
    Ok(RationalCoeffODE::from_polynomial_form(a2, a1, a0))
}

fn require_first_order(system: &CoulombSystem, theta: f64) -> Result<()> {
    system.require_bound()?;
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::DegenerateDeformation(format!(
            "theta = {theta}; the first-order model needs theta > 0 (use the ordinary model)"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ordinary,
    DeformedZeroEnergy,
    DeformedFirstOrder,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ordinary => "ordinary",
            ModelKind::DeformedZeroEnergy => "deformed-zero-energy",
            ModelKind::DeformedFirstOrder => "deformed-first-order",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordinary" => Ok(ModelKind::Ordinary),
            "deformed-zero-energy" => Ok(ModelKind::DeformedZeroEnergy),
            "deformed-first-order" => Ok(ModelKind::DeformedFirstOrder),
            other => Err(Error::InvalidInput(format!("unknown model '{other}'"))),
        }
    }
}

/// A model equation together with the power relating its unknown to `ψ`:
/// `ψ = u^prefactor_power · y`.
#[derive(Debug, Clone)]
pub struct KgModel {
    pub kind: ModelKind,
    pub ode: RationalCoeffODE,
    pub prefactor_power: i32,
}

impl KgModel {
    pub fn ordinary(system: &CoulombSystem) -> Result<Self> {
        Ok(Self {
            kind: ModelKind::Ordinary,
            ode: build_ordinary_kg(system)?,
            prefactor_power: 0,
        })
    }

    pub fn deformed_zero_energy(g: f64, params: &DeformationParams) -> Result<Self> {
        Ok(Self {
            kind: ModelKind::DeformedZeroEnergy,
            ode: build_deformed_zero_energy(g, params)?,
            prefactor_power: 0,
        })
    }

    pub fn deformed_first_order(system: &CoulombSystem, theta: f64) -> Result<Self> {
        Ok(Self {
            kind: ModelKind::DeformedFirstOrder,
            ode: build_deformed_first_order(system, theta)?,
            prefactor_power: -1,
        })
    }

    /// Large-momentum exponents of `ψ` (`ψ ~ u^ρ`), faster decay last.
    pub fn psi_exponents_at_infinity(&self) -> Result<[Complex64; 2]> {
        let e = fuchsian::indicial_exponents(&self.ode, Point::Infinity)?;
        let shift = self.prefactor_power as f64;
        Ok([e[0] + shift, e[1] + shift])
    }
}

/// `ξ = s·u²/(1 + s·u²)` with `s = θ + θ′`, and `ψ = (1 − ξ)·f(ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiMap {
    pub s: f64,
}

impl XiMap {
    pub fn xi(&self, u: f64) -> f64 {
        let t = self.s * u * u;
        t / (1.0 + t)
    }

    pub fn u(&self, xi: f64) -> f64 {
        (xi / (self.s * (1.0 - xi))).sqrt()
    }

    /// Gauge factor `1 − ξ = 1/(1 + s·u²)`.
    pub fn gauge(&self, u: f64) -> f64 {
        1.0 / (1.0 + self.s * u * u)
    }
}

/// The Heun reduction of the deformed zero-energy equation, with the
/// intermediate symbols of its parameter block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeunReduction {
    pub omega1: f64,
    pub omega2: f64,
    pub k: f64,
    pub nu: Complex64,
    pub params: HeunParams,
    pub map: XiMap,
}

/// Heun parameters of the deformed zero-energy equation.
///
/// The block is `ω₁ = θ/(θ+θ′)`, `ω₂ = ½(θ+θ′)`, `k = g²/4`,
/// `ν = √((ω₁−1)² − 4k/(1−2ω₂))`, `a, b = ½(3 − ω₁ ∓ ν)`, `c = 3/2`, `d = 2`,
/// `e = ½ − ω₁`, `q = −(3/2 + k/(1−2ω₂))`, `ξ₀ = 2ω₂/(2ω₂−1)`. With
/// `ω₁ = 2θ/(θ+θ′)` instead, the resulting equation no longer matches the
/// `u`-equation (its exponents at `ξ = 1` would give `−3 − 4θ/(θ+θ′)` at
/// large `u`), and the `θ = θ′` case would not reduce to a hypergeometric
/// function in `ξ/ξ₀`.
pub fn to_heun(g: f64, params: &DeformationParams) -> Result<HeunReduction> {
    params.require_deformed()?;
    let s = params.sum();
    let omega1 = params.omega1();
    let omega2 = params.omega2();
    let one_m = 1.0 - 2.0 * omega2;
    if one_m == 0.0 {
        return Err(Error::ParameterPole(
            "2*omega2 = theta + theta' = 1 puts xi0 = 2*omega2/(2*omega2 - 1) at infinity".into(),
        ));
    }
    let k = g * g / 4.0;
    let nu = Complex64::new((omega1 - 1.0).powi(2) - 4.0 * k / one_m, 0.0).sqrt();
    let half = |x: Complex64| x * 0.5;
    let base = Complex64::new(3.0 - omega1, 0.0);
    let p = HeunParams::with_e(
        Complex64::new(2.0 * omega2 / (2.0 * omega2 - 1.0), 0.0),
        Complex64::new(-(1.5 + k / one_m), 0.0),
        half(base - nu),
        half(base + nu),
        Complex64::new(1.5, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(0.5 - omega1, 0.0),
    )?;
    Ok(HeunReduction {
        omega1,
        omega2,
        k,
        nu,
        params: p,
        map: XiMap { s },
    })
}

/// Polynomial form of the Heun equation of [`to_heun`] in exact arithmetic.
/// Only `ab = 2 − ω₁ + k/(1−2ω₂)` enters, so no square root is needed.
pub fn heun_form<R: Real>(g2: R, theta: R, theta_prime: R) -> [Poly<Complex<R>>; 3] {
    let one = R::one();
    let s = theta.clone() + theta_prime;
    let omega1 = theta / s.clone();
    let k = g2 / R::from_i64(4).expect("integer");
    let one_m = one.clone() - s.clone();
    let ab = R::from_i64(2).expect("integer") - omega1.clone() + k.clone() / one_m.clone();
    let q = -(R::from_i64(3).expect("integer") / R::from_i64(2).expect("integer") + k / one_m);
    let xi0 = s.clone() / (s - one);
    heun_polynomial_form(
        cr(xi0),
        cr(q),
        cr(ab),
        cq(3, 2),
        cq(2, 1),
        cq::<R>(1, 2) - cr(omega1),
    )
}

/// Parameters of the generalized Heun equation
///
/// ```text
/// φ″ + (c/x + d/(x−1) + e/(x−x₁) + f/(x−x₂))φ′
///    + (abx² + ρ₁x + ρ₂)/(x(x−1)(x−x₁)(x−x₂))·φ = 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenHeunParams<T = Complex64> {
    pub a: T,
    pub b: T,
    pub rho1: T,
    pub rho2: T,
    pub c: T,
    pub d: T,
    pub e: T,
    pub f: T,
    pub x1: T,
    pub x2: T,
}

impl<R: Real> GenHeunParams<Complex<R>> {
    /// The parameter block for the first-order model, given `ε̃`, `ω̃ = gη`,
    /// `k = g²`, `θ` and `r = √(6θ)` separately so that exact arithmetic
    /// can be used when `r` is rational.
    pub fn block(eps: R, omega: R, k: R, theta: R, r: R) -> Self {
        let n = |v: i64, d: i64| cq::<R>(v, d);
        let (eps, omega, k, theta, r) = (cr(eps), cr(omega), cr(k), cr(theta), cr(r));
        let eps2 = eps.clone() * eps.clone();
        let den = n(1, 1) - n(6, 1) * theta.clone() * eps2.clone();
        let cd = omega.clone() * r.clone() / (n(2, 1) * den.clone());
        let ef = omega.clone() * (n(1, 1) - n(3, 1) * theta.clone() * eps2.clone())
            / (den * eps.clone());
        Self {
            a: n(1, 1),
            b: n(7, 3),
            rho1: n(-7, 3) - omega.clone() * r.clone() / n(3, 1),
            rho2: theta * eps2 / n(2, 1) + omega * r.clone() / n(6, 1) + n(1, 12) - k / n(4, 1),
            c: n(1, 6) + cd.clone(),
            d: n(1, 6) - cd,
            e: n(2, 1) + ef.clone(),
            f: n(2, 1) - ef,
            x1: (n(1, 1) + r.clone() * eps.clone()) / n(2, 1),
            x2: (n(1, 1) - r * eps) / n(2, 1),
        }
    }
}

impl<T: Field> GenHeunParams<T> {
    /// `a + b + 1 − (c + d + e + f)`
    pub fn fuchs_defect(&self) -> T {
        self.a.clone() + self.b.clone() + T::one()
            - (self.c.clone() + self.d.clone() + self.e.clone() + self.f.clone())
    }

    /// `[A2, A1, A0]` multiplying the equation by `x(x−1)(x−x₁)(x−x₂)`.
    pub fn polynomial_form(&self) -> [Poly<T>; 3] {
        let x = Poly::<T>::x();
        let lin = |r: &T| &x - &Poly::constant(r.clone());
        let (l0, l1, lx1, lx2) = (x.clone(), lin(&T::one()), lin(&self.x1), lin(&self.x2));
        let a2 = &(&l0 * &l1) * &(&lx1 * &lx2);
        let a1 = &(&(&(&l1 * &lx1) * &lx2).scale(&self.c) + &(&(&l0 * &lx1) * &lx2).scale(&self.d))
            + &(&(&(&l0 * &l1) * &lx2).scale(&self.e) + &(&(&l0 * &l1) * &lx1).scale(&self.f));
        let a0 = Poly::new(vec![
            self.rho2.clone(),
            self.rho1.clone(),
            self.a.clone() * self.b.clone(),
        ]);
        [a2, a1, a0]
    }
}

impl GenHeunParams<Complex64> {
    pub fn fuchs_residual(&self) -> f64 {
        self.fuchs_defect().norm()
    }

    pub fn ode(&self) -> RationalCoeffODE {
        let [a2, a1, a0] = self.polynomial_form();
        RationalCoeffODE::from_polynomial_form(a2, a1, a0)
    }
}

/// `x = ½(1 − i√(6θ)·u)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XMap {
    pub sqrt_6theta: f64,
}

impl XMap {
    pub fn x(&self, u: f64) -> Complex64 {
        Complex64::new(0.5, -0.5 * self.sqrt_6theta * u)
    }

    pub fn u(&self, x: Complex64) -> Complex64 {
        (1.0 - 2.0 * x) / Complex64::new(0.0, self.sqrt_6theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenHeunReduction {
    pub params: GenHeunParams,
    pub map: XMap,
    pub warnings: Vec<String>,
}

/// Generalized Heun form of the first-order model.
pub fn to_generalized_heun(system: &CoulombSystem, theta: f64) -> Result<GenHeunReduction> {
    require_first_order(system, theta)?;
    let eps = system.eps_tilde();
    if eps == 0.0 {
        return Err(Error::ParameterPole(
            "eps~ = 0 (rest energy) in the e, f parameters".into(),
        ));
    }
    let den = 1.0 - 6.0 * theta * system.eps_tilde_sq();
    if den.abs() < 1e-14 {
        return Err(Error::ParameterPole(format!(
            "1 - 6*theta*eps~^2 = {den:e} in the c, d, e, f parameters"
        )));
    }
    let r = (6.0 * theta).sqrt();
    let params = GenHeunParams::block(eps, system.omega_tilde(), system.k(), theta, r);
    let mut warnings = Vec::new();
    let gap = (params.x1 - params.x2).norm();
    if gap < CONFLUENCE_WARNING {
        warnings.push(format!(
            "x1 - x2 = {gap:e}: the singular points x1 and x2 are close to merging (theta -> 0 confluence)"
        ));
    }
    Ok(GenHeunReduction {
        params,
        map: XMap { sqrt_6theta: r },
        warnings,
    })
}
