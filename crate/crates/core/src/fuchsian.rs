//! Linear second-order ODEs `w″ + p1(z)·w′ + p0(z)·w = 0` with rational
//! coefficients: singular-point census, indicial exponents and Frobenius
//! series.
//!
//! Local analysis at a point `z0` multiplies the equation through by the
//! denominators so that it reads
//!
//! ```text
//! α(ζ)·ζ²w″ + β(ζ)·ζw′ + γ(ζ)·w = 0,   ζ = z − z0,
//! ```
//!
//! with polynomial `α`, `β`, `γ` and `α(0) ≠ 0`. Substituting
//! `w = Σ c_n ζ^(n+σ)` gives the banded recurrence
//!
//! ```text
//! c_N·F_0(N+σ) = −Σ_{j≥1} c_{N−j}·F_j(N−j+σ),
//! F_j(ρ) = α_j ρ(ρ−1) + β_j ρ + γ_j,
//! ```
//!
//! whose band width is the largest degree among `α, β, γ`. The point at
//! infinity goes through the same code after the pullback `z = 1/t`.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{Field, Poly, Rat};

/// Relative tolerance for a shifted coefficient to count as zero.
const VANISH_TOL: f64 = 1e-10;
/// Relative distance under which denominator roots are merged. Exact double
/// roots come back from the companion matrix split by about `√ε`.
const MERGE_TOL: f64 = 1e-6;

pub const DEFAULT_ORDER: usize = 64;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "z = {z}"),
            Point::Infinity => write!(f, "z = ∞"),
        }
    }
}

/// `w″ + p1·w′ + p0·w = 0`
#[derive(Debug, Clone, PartialEq)]
pub struct RationalCoeffODE<T = Complex64> {
    p1: Rat<T>,
    p0: Rat<T>,
}

impl<T: Field> RationalCoeffODE<T> {
    pub fn new(p1: Rat<T>, p0: Rat<T>) -> Self {
        Self {
            p1: p1.cancel_origin().monic(),
            p0: p0.cancel_origin().monic(),
        }
    }

    /// `a2·w″ + a1·w′ + a0·w = 0`
    pub fn from_polynomial_form(a2: Poly<T>, a1: Poly<T>, a0: Poly<T>) -> Self {
        Self::new(Rat::new(a1, a2.clone()), Rat::new(a0, a2))
    }

    pub fn p1(&self) -> &Rat<T> {
        &self.p1
    }

    pub fn p0(&self) -> &Rat<T> {
        &self.p0
    }

    /// Same equation as rational functions, regardless of representation.
    pub fn same_equation(&self, other: &Self) -> bool {
        self.p1.same_function(&other.p1) && self.p0.same_function(&other.p0)
    }

    /// The equation satisfied by `W(t) = w(1/t)`:
    /// `W″ + [2/t − p1(1/t)/t²]·W′ + [p0(1/t)/t⁴]·W = 0`.
    pub fn pullback_infinity(&self) -> Self {
        let two = T::one() + T::one();
        let p1 = &Rat::<T>::power(-1).scale(&two) - &(&at_inverse(&self.p1) * &Rat::power(-2));
        let p0 = &at_inverse(&self.p0) * &Rat::power(-4);
        Self::new(p1, p0)
    }
}

/// `r(1/t)` as a rational function of `t`.
fn at_inverse<T: Field>(r: &Rat<T>) -> Rat<T> {
    let Some(n) = r.num.degree() else {
        return r.clone();
    };
    let d = r.den.degree().expect("nonzero denominator");
    let num = r.num.reversed(n);
    let den = r.den.reversed(d);
    if d >= n {
        Rat::new(num.mul_x_pow(d - n), den)
    } else {
        Rat::new(num, den.mul_x_pow(n - d))
    }
}

impl RationalCoeffODE<Complex64> {
    /// Cancels common factors of numerator and denominator in both
    /// coefficients.
    pub fn reduced(&self) -> Result<Self> {
        Ok(Self {
            p1: self.p1.reduced()?,
            p0: self.p0.reduced()?,
        })
    }

    /// `(p1(z), p0(z))`
    pub fn coefficients_at(&self, z: Complex64) -> (Complex64, Complex64) {
        (self.p1.eval(&z), self.p0.eval(&z))
    }

    fn local_form(&self, point: Point) -> LocalForm {
        match point {
            Point::Finite(z0) => LocalForm::at(self, z0),
            Point::Infinity => LocalForm::at(&self.pullback_infinity(), Complex64::new(0.0, 0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SingularKind {
    Regular,
    Irregular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularPoint {
    pub location: Point,
    pub kind: SingularKind,
    /// Indicial exponents for regular points, ordered as in
    /// [`indicial_exponents`].
    pub exponents: Option<[Complex64; 2]>,
    /// Several numerically distinct denominator roots were merged here.
    pub merged: bool,
}

/// Local data of an equation at a point; see the module docs.
#[derive(Debug, Clone)]
struct LocalForm {
    /// Pole orders of `p1` and `p0` (zero when analytic).
    p1_pole: i32,
    p0_pole: i32,
    alpha: Poly<Complex64>,
    beta: Poly<Complex64>,
    gamma: Poly<Complex64>,
}

/// Order of the zero of `p` at `z0`, given its shifted form. Coefficients
/// below `VANISH_TOL` times the magnitude of their own evaluation count as
/// zero.
fn vanishing_order(p: &Poly<Complex64>, shifted: &Poly<Complex64>, z0: Complex64) -> Option<usize> {
    if p.is_zero() {
        return None;
    }
    let mags = Poly::new(p.coeffs().iter().map(|c| c.norm()).collect::<Vec<f64>>());
    let scales = mags.shifted(&z0.norm());
    let n = shifted.coeffs().len();
    let mut k = 0;
    while k < n && shifted.coeff(k).norm() <= VANISH_TOL * scales.coeff(k) {
        k += 1;
    }
    Some(k)
}

struct LocalPart {
    /// `ord(num) − ord(den)`, `None` for the zero function.
    order: Option<i32>,
    num: Poly<Complex64>,
    den: Poly<Complex64>,
}

fn local_part(r: &Rat<Complex64>, z0: Complex64) -> LocalPart {
    let ns = r.num.shifted(&z0);
    let ds = r.den.shifted(&z0);
    let kd = vanishing_order(&r.den, &ds, z0).expect("nonzero denominator");
    let den = ds.div_x_pow(kd);
    match vanishing_order(&r.num, &ns, z0) {
        None => LocalPart {
            order: None,
            num: Poly::zero(),
            den,
        },
        Some(kn) => LocalPart {
            order: Some(kn as i32 - kd as i32),
            num: ns.div_x_pow(kn),
            den,
        },
    }
}

impl LocalForm {
    fn at(ode: &RationalCoeffODE, z0: Complex64) -> Self {
        let a = local_part(&ode.p1, z0);
        let b = local_part(&ode.p0, z0);
        let p1_pole = a.order.map_or(0, |e| (-e).max(0));
        let p0_pole = b.order.map_or(0, |e| (-e).max(0));
        let alpha = &a.den * &b.den;
        let beta = match a.order {
            Some(e) if e >= -1 => (&a.num * &b.den).mul_x_pow((1 + e) as usize),
            _ => Poly::zero(),
        };
        let gamma = match b.order {
            Some(e) if e >= -2 => (&b.num * &a.den).mul_x_pow((2 + e) as usize),
            _ => Poly::zero(),
        };
        Self {
            p1_pole,
            p0_pole,
            alpha,
            beta,
            gamma,
        }
    }

    fn is_ordinary(&self) -> bool {
        self.p1_pole == 0 && self.p0_pole == 0
    }

    fn is_regular(&self) -> bool {
        self.p1_pole <= 1 && self.p0_pole <= 2
    }

    fn band(&self) -> usize {
        [&self.alpha, &self.beta, &self.gamma]
            .iter()
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// `F_j(ρ) = α_j ρ(ρ−1) + β_j ρ + γ_j`
    fn f(&self, j: usize, rho: Complex64) -> Complex64 {
        self.alpha.coeff(j) * rho * (rho - 1.0) + self.beta.coeff(j) * rho + self.gamma.coeff(j)
    }

    /// Roots of `F_0` in the local variable, larger real part first.
    fn indicial_roots(&self) -> [Complex64; 2] {
        let a = self.alpha.coeff(0);
        let b = self.beta.coeff(0) - a;
        let c = self.gamma.coeff(0);
        let center = -b / (a * 2.0);
        let half = (b * b - a * c * 4.0).sqrt() / (a * 2.0);
        order_desc([center + half, center - half])
    }
}

fn order_desc(mut r: [Complex64; 2]) -> [Complex64; 2] {
    let swap = r[1].re > r[0].re || (r[1].re == r[0].re && r[1].im > r[0].im);
    if swap {
        r.swap(0, 1);
    }
    r
}

fn not_regular(point: Point, lf: &LocalForm) -> Error {
    Error::NotRegularSingular {
        point: point.to_string(),
        p1_order: lf.p1_pole,
        p0_order: lf.p0_pole,
    }
}

fn finite_candidates(ode: &RationalCoeffODE) -> Result<Vec<(Complex64, bool)>> {
    let mut roots = ode.p1.den.roots()?;
    roots.extend(ode.p0.den.roots()?);
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for r in roots {
        let hit = clusters.iter_mut().find(|c| {
            let rep = c[0];
            (rep - r).norm() <= MERGE_TOL * rep.norm().max(1.0)
        });
        match hit {
            Some(c) => c.push(r),
            None => clusters.push(vec![r]),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|c| {
            let mean = c.iter().sum::<Complex64>() / c.len() as f64;
            // exact duplicates come from the two denominators sharing a root
            let merged = c.iter().any(|r| *r != c[0]) && c.iter().any(|r| (r - c[0]).norm() > 0.0);
            let rep = if merged { mean } else { c[0] };
            (rep, merged)
        })
        .collect())
}

/// All singular points: finite roots of the coefficient denominators that
/// are not removable, then the point at infinity when it is singular.
/// Finite points are sorted by real part, then imaginary part.
pub fn singular_points(ode: &RationalCoeffODE) -> Result<Vec<SingularPoint>> {
    let mut out = Vec::new();
    let mut finite = finite_candidates(ode)?;
    finite.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    for (z0, merged) in finite {
        let lf = LocalForm::at(ode, z0);
        if lf.is_ordinary() {
            continue;
        }
        out.push(classified(Point::Finite(z0), &lf, merged));
    }
    let lf = ode.local_form(Point::Infinity);
    if !lf.is_ordinary() {
        out.push(classified(Point::Infinity, &lf, false));
    }
    Ok(out)
}

fn classified(location: Point, lf: &LocalForm, merged: bool) -> SingularPoint {
    if lf.is_regular() {
        SingularPoint {
            location,
            kind: SingularKind::Regular,
            exponents: Some(reported_exponents(location, lf)),
            merged,
        }
    } else {
        SingularPoint {
            location,
            kind: SingularKind::Irregular,
            exponents: None,
            merged,
        }
    }
}

/// Exponents in the reporting convention: `w ~ (z−z0)^ρ` at a finite point,
/// `w ~ z^ρ` at infinity. Larger real part first, ties by imaginary part.
fn reported_exponents(point: Point, lf: &LocalForm) -> [Complex64; 2] {
    let r = lf.indicial_roots();
    match point {
        Point::Finite(_) => r,
        Point::Infinity => order_desc([-r[0], -r[1]]),
    }
}

/// The two indicial exponents at `point`. At infinity they are the powers
/// `ρ` in `w ~ z^ρ` as `z → ∞`. Ordered by descending real part, then
/// descending imaginary part. An ordinary point gives `{1, 0}`.
pub fn indicial_exponents(ode: &RationalCoeffODE, point: Point) -> Result<[Complex64; 2]> {
    let lf = ode.local_form(point);
    if !lf.is_regular() {
        return Err(not_regular(point, &lf));
    }
    Ok(reported_exponents(point, &lf))
}

/// Local power-series solution at a regular singular point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrobeniusSolution {
    pub expansion_point: Point,
    /// `w = (z−z0)^ρ Σ c_n (z−z0)^n`, or `w = z^ρ Σ c_n z^(−n)` at infinity.
    pub exponent: Complex64,
    /// `c_0 = 1` for Frobenius solutions; Taylor expansions at ordinary
    /// points carry the initial data in `c_0, c_1`.
    pub coefficients: Vec<Complex64>,
    /// Convergence radius in the local variable (`z − z0`, or `1/z`).
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub error: f64,
}

/// A solution value with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet {
    pub w: Complex64,
    pub dw: Complex64,
    pub d2w: Complex64,
    pub error: f64,
}

fn distance_to_others(points: &[SingularPoint], z0: Complex64) -> f64 {
    points
        .iter()
        .filter_map(|p| match p.location {
            Point::Finite(z) => Some((z - z0).norm()),
            Point::Infinity => None,
        })
        .filter(|&d| d > MERGE_TOL * z0.norm().max(1.0))
        .fold(f64::INFINITY, f64::min)
}

fn radius_at(ode: &RationalCoeffODE, point: Point) -> Result<f64> {
    let points = singular_points(ode)?;
    Ok(match point {
        Point::Finite(z0) => distance_to_others(&points, z0),
        Point::Infinity => {
            let far = points
                .iter()
                .filter_map(|p| match p.location {
                    Point::Finite(z) => Some(z.norm()),
                    Point::Infinity => None,
                })
                .fold(0.0, f64::max);
            if far == 0.0 {
                f64::INFINITY
            } else {
                1.0 / far
            }
        }
    })
}

fn near_integer(x: Complex64) -> Option<i64> {
    let n = x.re.round();
    ((x.re - n).abs() <= 1e-9 * n.abs().max(1.0) && x.im.abs() <= 1e-9).then_some(n as i64)
}

/// Frobenius series `c_0 = 1, c_1, …, c_order` for the branch with the given
/// exponent (reporting convention of [`indicial_exponents`]).
///
/// Fails with [`Error::Resonant`] when the requested root lies a positive
/// integer below the other root in the local variable, where the
/// recurrence pivot vanishes and a logarithmic solution would be needed.
pub fn frobenius_series(
    ode: &RationalCoeffODE,
    point: Point,
    exponent: Complex64,
    order: usize,
) -> Result<FrobeniusSolution> {
    if order < 1 {
        return Err(Error::InvalidInput(
            "series order must be at least 1".into(),
        ));
    }
    let lf = ode.local_form(point);
    if !lf.is_regular() {
        return Err(not_regular(point, &lf));
    }
    let sigma = match point {
        Point::Finite(_) => exponent,
        Point::Infinity => -exponent,
    };
    let roots = lf.indicial_roots();
    let (idx, dist) = roots
        .iter()
        .map(|r| (r - sigma).norm())
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two roots");
    if dist > 1e-8 * sigma.norm().max(1.0) {
        return Err(Error::NotAnExponent {
            point: point.to_string(),
            exponent,
            defect: lf.f(0, sigma).norm(),
        });
    }
    let other = roots[1 - idx];
    if let Some(m) = near_integer(other - sigma) {
        if m > 0 {
            let report = |s: Complex64| match point {
                Point::Finite(_) => s,
                Point::Infinity => -s,
            };
            return Err(Error::Resonant {
                point: point.to_string(),
                exponent,
                other: report(other),
            });
        }
    }
    let coefficients = recurrence(&lf, sigma, vec![Complex64::new(1.0, 0.0)], order, point)?;
    Ok(FrobeniusSolution {
        expansion_point: point,
        exponent,
        coefficients,
        radius: radius_at(ode, point)?,
    })
}

fn recurrence(
    lf: &LocalForm,
    sigma: Complex64,
    mut c: Vec<Complex64>,
    order: usize,
    point: Point,
) -> Result<Vec<Complex64>> {
    let band = lf.band();
    let scale = lf.alpha.coeff(0).norm();
    for n in c.len()..=order {
        let pivot = lf.f(0, sigma + n as f64);
        let size = scale * (sigma.norm() + n as f64 + 1.0).powi(2);
        if pivot.norm() <= 1e-13 * size {
            return Err(Error::Resonant {
                point: point.to_string(),
                exponent: sigma,
                other: sigma + n as f64,
            });
        }
        let mut rhs = Complex64::new(0.0, 0.0);
        for j in 1..=band.min(n) {
            rhs -= c[n - j] * lf.f(j, sigma + (n - j) as f64);
        }
        c.push(rhs / pivot);
    }
    Ok(c)
}

/// Taylor expansion at an ordinary point with `w(z0) = w0`, `w′(z0) = dw0`.
pub fn taylor_solution(
    ode: &RationalCoeffODE,
    z0: Complex64,
    w0: Complex64,
    dw0: Complex64,
    order: usize,
) -> Result<FrobeniusSolution> {
    let lf = LocalForm::at(ode, z0);
    if !lf.is_ordinary() {
        return Err(Error::OutOfDomain(format!(
            "Taylor expansion requested at singular point {}",
            Point::Finite(z0)
        )));
    }
    let coefficients = recurrence(
        &lf,
        Complex64::new(0.0, 0.0),
        vec![w0, dw0],
        order.max(1),
        Point::Finite(z0),
    )?;
    let points = singular_points(ode)?;
    Ok(FrobeniusSolution {
        expansion_point: Point::Finite(z0),
        exponent: Complex64::new(0.0, 0.0),
        coefficients,
        radius: distance_to_others(&points, z0),
    })
}

fn local_power(zeta: Complex64, sigma: Complex64) -> Complex64 {
    if sigma == Complex64::new(0.0, 0.0) {
        Complex64::new(1.0, 0.0)
    } else {
        (sigma * zeta.ln()).exp()
    }
}

impl FrobeniusSolution {
    fn local(&self, z: Complex64) -> Result<(Complex64, Complex64, f64)> {
        let (zeta, sigma) = match self.expansion_point {
            Point::Finite(z0) => (z - z0, self.exponent),
            Point::Infinity => {
                if z.norm() == 0.0 {
                    return Err(Error::OutOfDomain("z = 0 is not near infinity".into()));
                }
                (1.0 / z, -self.exponent)
            }
        };
        let q = zeta.norm() / self.radius;
        if !(q < 1.0) {
            return Err(Error::OutOfDomain(format!(
                "z = {z} lies outside the convergence disk of the series at {} (|ζ|/R = {q:.3})",
                self.expansion_point
            )));
        }
        if zeta.norm() == 0.0 && sigma != Complex64::new(0.0, 0.0) {
            return Err(Error::OutOfDomain(format!(
                "branch with exponent {} evaluated at its expansion point",
                self.exponent
            )));
        }
        Ok((zeta, sigma, q))
    }

    /// Partial sums `S, S′, S″` in the local variable, plus the magnitude of
    /// the last term.
    fn sums(&self, zeta: Complex64) -> (Complex64, Complex64, Complex64, f64) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut s, mut ds, mut d2s) = (zero, zero, zero);
        for c in self.coefficients.iter().rev() {
            d2s = d2s * zeta + ds * 2.0;
            ds = ds * zeta + s;
            s = s * zeta + c;
        }
        let n = self.coefficients.len() - 1;
        let last = self.coefficients[n].norm() * zeta.norm().powi(n as i32);
        (s, ds, d2s, last)
    }

    fn tail_bound(last: f64, q: f64) -> f64 {
        last * (q / (1.0 - q)).max(f64::EPSILON)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<SeriesValue> {
        let jet = self.evaluate_jet(z)?;
        Ok(SeriesValue {
            value: jet.w,
            error: jet.error,
        })
    }

    /// Value and first two derivatives with respect to `z`.
    pub fn evaluate_jet(&self, z: Complex64) -> Result<Jet> {
        let (zeta, sigma, q) = self.local(z)?;
        let (s, ds, d2s, last) = self.sums(zeta);
        let (w, dw, d2w) = if zeta.norm() == 0.0 {
            (s, ds, d2s)
        } else {
            let p = local_power(zeta, sigma);
            (
                p * s,
                p / zeta * (sigma * s + zeta * ds),
                p / (zeta * zeta)
                    * (sigma * (sigma - 1.0) * s + sigma * zeta * ds * 2.0 + zeta * zeta * d2s),
            )
        };
        let error = Self::tail_bound(last, q) * local_power(zeta, sigma).norm();
        match self.expansion_point {
            Point::Finite(_) => Ok(Jet { w, dw, d2w, error }),
            Point::Infinity => {
                let t = zeta;
                let t2 = t * t;
                Ok(Jet {
                    w,
                    dw: -t2 * dw,
                    d2w: t2 * t2 * d2w + t2 * t * dw * 2.0,
                    error,
                })
            }
        }
    }
}

/// `|w″+p1·w′+p0·w| / (|w″|+|p1·w′|+|p0·w| + floor)`
pub fn residual(ode: &RationalCoeffODE, jet: &Jet, z: Complex64) -> f64 {
    let (p1, p0) = ode.coefficients_at(z);
    let a = jet.d2w;
    let b = p1 * jet.dw;
    let c = p0 * jet.w;
    (a + b + c).norm() / (a.norm() + b.norm() + c.norm() + f64::MIN_POSITIVE)
}
