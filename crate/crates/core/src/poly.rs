//! Dense univariate polynomials and rational functions over a generic field.
//!
//! Everything here is generic so that the model builders can be run both in
//! `Complex64` and in exact Gaussian-rational arithmetic. Root finding is
//! only provided for `Complex64`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::{Complex, Complex64};
use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

/// Scalars the polynomial layer can work over.
pub trait Field: Clone + PartialEq + Debug + Num + Neg<Output = Self> {}
impl<T> Field for T where T: Clone + PartialEq + Debug + Num + Neg<Output = T> {}

/// Real scalars (`f64`, exact rationals) used as physical parameters.
pub trait Real: Field + FromPrimitive {}
impl<T> Real for T where T: Field + FromPrimitive {}

/// `n/d` as a complex number over `R`.
pub fn cq<R: Real>(n: i64, d: i64) -> Complex<R> {
    let n = R::from_i64(n).expect("integer conversion");
    let d = R::from_i64(d).expect("integer conversion");
    Complex::new(n / d, R::zero())
}

pub fn re<R: Real>(x: R) -> Complex<R> {
    Complex::new(x, R::zero())
}

pub fn imag_unit<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::one())
}

/// Polynomial with coefficients stored lowest order first. Trailing zeros are
/// always trimmed, so the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Field> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `c·z^k`
    pub fn monomial(c: T, k: usize) -> Self {
        let mut v = vec![T::zero(); k];
        v.push(c);
        Self::new(v)
    }

    pub fn x() -> Self {
        Self::monomial(T::one(), 1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, z: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        let mut k = T::zero();
        for c in self.coeffs.iter().skip(1) {
            k = k + T::one();
            out.push(c.clone() * k.clone());
        }
        Self::new(out)
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * k.clone()).collect())
    }

    pub fn mul_x_pow(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![T::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(v)
    }

    /// Number of exactly vanishing low-order coefficients (the order of the
    /// zero at the origin). `None` for the zero polynomial.
    pub fn low_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Drops the `k` lowest coefficients, i.e. divides by `z^k` discarding any
    /// remainder.
    pub fn div_x_pow(&self, k: usize) -> Self {
        Self::new(self.coeffs.iter().skip(k).cloned().collect())
    }

    /// `z^n · p(1/z)`. `n` must be at least the degree.
    pub fn reversed(&self, n: usize) -> Self {
        let mut v = vec![T::zero(); n + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            assert!(k <= n, "reversal length below degree");
            v[n - k] = c.clone();
        }
        Self::new(v)
    }

    /// Taylor shift: the polynomial `ζ ↦ p(z0 + ζ)`.
    pub fn shifted(&self, z0: &T) -> Self {
        if z0.is_zero() {
            return self.clone();
        }
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = c[j + 1].clone() * z0.clone();
                c[j] = c[j].clone() + t;
            }
        }
        Self::new(c)
    }

    /// Quotient of synthetic division by `(z − r)`; the remainder is dropped.
    pub fn div_linear(&self, r: &T) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut q = vec![T::zero(); n - 1];
        let mut acc = T::zero();
        for k in (1..n).rev() {
            acc = acc * r.clone() + self.coeffs[k].clone();
            q[k - 1] = acc.clone();
        }
        Self::new(q)
    }
}

impl<T: Field> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Field> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Field> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(v)
    }
}

impl<T: Field> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Field> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $m(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Poly<Complex64> {
    /// `Σ |c_k| |z|^k`, the magnitude scale of a naive evaluation at `z`.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// All complex roots, via eigenvalues of the companion matrix followed
    /// by one Newton polish step per root.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let Some(n) = self.degree() else {
            return Err(Error::RootFinding {
                coeffs: self.coeffs.clone(),
            });
        };
        // zeros at the origin are structural; peel them off exactly
        let k0 = self.low_order().unwrap_or(0);
        let reduced = self.div_x_pow(k0);
        let m = n - k0;
        let mut roots = vec![Complex64::new(0.0, 0.0); k0];
        match m {
            0 => {}
            1 => roots.push(-reduced.coeffs[0] / reduced.coeffs[1]),
            _ => {
                let lead = reduced.coeffs[m];
                let mut comp = DMatrix::<Complex64>::zeros(m, m);
                for i in 1..m {
                    comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
                }
                for i in 0..m {
                    comp[(i, m - 1)] = -reduced.coeffs[i] / lead;
                }
                // QR iteration can stall on clustered roots; Aberth's method
                // takes over then
                let eig = match Schur::try_new(comp, f64::EPSILON, 10_000)
                    .and_then(|s| s.eigenvalues())
                {
                    Some(e) => e.iter().copied().collect(),
                    None => aberth(&reduced).ok_or_else(|| Error::RootFinding {
                        coeffs: self.coeffs.clone(),
                    })?,
                };
                let deriv = reduced.derivative();
                for z in eig.iter() {
                    let d = deriv.eval(z);
                    let polished = if d.norm() > 0.0 {
                        let cand = z - reduced.eval(z) / d;
                        if reduced.eval(&cand).norm() <= reduced.eval(z).norm() {
                            cand
                        } else {
                            *z
                        }
                    } else {
                        *z
                    };
                    if !polished.re.is_finite() || !polished.im.is_finite() {
                        return Err(Error::RootFinding {
                            coeffs: self.coeffs.clone(),
                        });
                    }
                    roots.push(polished);
                }
            }
        }
        Ok(roots)
    }
}

/// Simultaneous Aberth-Ehrlich iteration for all roots of `p`, started on
/// a circle of radius `max |c_k/c_m|^(1/(m−k))`.
fn aberth(p: &Poly<Complex64>) -> Option<Vec<Complex64>> {
    let m = p.degree()?;
    let lead = p.coeffs[m];
    let radius = (0..m)
        .map(|k| (p.coeffs[k] / lead).norm().powf(1.0 / (m - k) as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            Complex64::from_polar(
                radius,
                (2.0 * std::f64::consts::PI * k as f64 + 0.7) / m as f64,
            )
        })
        .collect();
    let d = p.derivative();
    for _ in 0..2_000 {
        let mut moved: f64 = 0.0;
        for i in 0..m {
            let f = p.eval(&z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / d.eval(&z[i]);
            let repulsion: Complex64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(f64::MIN_POSITIVE));
            }
        }
        if moved <= 4.0 * f64::EPSILON {
            return Some(z);
        }
    }
    // multiple roots converge only linearly; accept once the residuals sit
    // at rounding level
    let scale: f64 = p.coeffs.iter().map(|c| c.norm()).sum();
    let ok = z
        .iter()
        .all(|x| p.eval(x).norm() <= 1e-8 * scale * x.norm().max(1.0).powi(m as i32));
    ok.then_some(z)
}

/// A rational function `num/den`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rat<T> {
    pub num: Poly<T>,
    pub den: Poly<T>,
}

impl<T: Field> Rat<T> {
    pub fn new(num: Poly<T>, den: Poly<T>) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        Self { num, den }
    }

    pub fn from_poly(p: Poly<T>) -> Self {
        Self::new(p, Poly::constant(T::one()))
    }

    /// `z^k` for any integer `k`.
    pub fn power(k: i32) -> Self {
        if k >= 0 {
            Self::from_poly(Poly::monomial(T::one(), k as usize))
        } else {
            Self::new(
                Poly::constant(T::one()),
                Poly::monomial(T::one(), (-k) as usize),
            )
        }
    }

    pub fn eval(&self, z: &T) -> T {
        self.num.eval(z) / self.den.eval(z)
    }

    /// Denominator scaled to leading coefficient one.
    pub fn monic(&self) -> Self {
        let lead = self.den.leading().expect("nonzero denominator").clone();
        let inv = T::one() / lead;
        Self {
            num: self.num.scale(&inv),
            den: self.den.scale(&inv),
        }
    }

    /// Cancels the common power of `z` shared by numerator and denominator.
    pub fn cancel_origin(&self) -> Self {
        let Some(kn) = self.num.low_order() else {
            return Self::new(Poly::zero(), Poly::constant(T::one()));
        };
        let kd = self.den.low_order().unwrap_or(0);
        let k = kn.min(kd);
        Self {
            num: self.num.div_x_pow(k),
            den: self.den.div_x_pow(k),
        }
    }

    /// Equality as rational functions (cross multiplication).
    pub fn same_function(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::new(self.num.scale(k), self.den.clone())
    }
}

impl<T: Field> Add for &Rat<T> {
    type Output = Rat<T>;
    fn add(self, rhs: &Rat<T>) -> Rat<T> {
        if self.den == rhs.den {
            return Rat::new(&self.num + &rhs.num, self.den.clone());
        }
        Rat::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl<T: Field> Sub for &Rat<T> {
    type Output = Rat<T>;
    fn sub(self, rhs: &Rat<T>) -> Rat<T> {
        self + &(-rhs)
    }
}

impl<T: Field> Mul for &Rat<T> {
    type Output = Rat<T>;
    fn mul(self, rhs: &Rat<T>) -> Rat<T> {
        Rat::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<T: Field> Neg for &Rat<T> {
    type Output = Rat<T>;
    fn neg(self) -> Rat<T> {
        Rat::new(-&self.num, self.den.clone())
    }
}

impl Rat<Complex64> {
    /// Removes common roots of numerator and denominator. A root `r` of the
    /// denominator is common when the numerator vanishes there to within
    /// `1e-10` of its evaluation scale. No-op when nothing cancels.
    pub fn reduced(&self) -> Result<Self> {
        let mut out = self.cancel_origin();
        if out.num.is_zero() {
            return Ok(out);
        }
        let roots = out.den.roots()?;
        for r in roots {
            if out.num.is_zero() || out.den.degree() == Some(0) {
                break;
            }
            let nv = out.num.eval(&r).norm();
            let dv = out.den.eval(&r).norm();
            let ns = out.num.eval_scale(r).max(f64::MIN_POSITIVE);
            let ds = out.den.eval_scale(r).max(f64::MIN_POSITIVE);
            if nv <= 1e-10 * ns && dv <= 1e-10 * ds {
                out = Self {
                    num: out.num.div_linear(&r),
                    den: out.den.div_linear(&r),
                };
            }
        }
        Ok(out.monic())
    }
}
