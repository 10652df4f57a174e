//! Exact symbolic-substitution oracle.
//!
//! Linear differential operators `Σ c·u^m·D^j` with Gaussian-rational
//! coefficients, composed with the Leibniz rule. The model equations are
//! rebuilt from the position operators and compared against the library
//! builders as rational functions.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use kgml::fuchsian::RationalCoeffODE;
use kgml::poly::{Poly, Rat};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;
pub type C = Complex<Q>;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn cq(n: i64, d: i64) -> C {
    Complex::new(q(n, d), Q::zero())
}

pub fn cr(x: Q) -> C {
    Complex::new(x, Q::zero())
}

pub fn i() -> C {
    Complex::new(Q::zero(), Q::one())
}

/// `Σ c·u^m·D^j`, keyed by `(j, m)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Op {
    terms: BTreeMap<(usize, i32), C>,
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn falling(m: i32, k: usize) -> i64 {
    (0..k as i32).map(|i| (m - i) as i64).product()
}

impl Op {
    pub fn zero() -> Self {
        Self::default()
    }

    fn push(&mut self, j: usize, m: i32, c: C) {
        let e = self.terms.entry((j, m)).or_insert_with(C::zero);
        *e = e.clone() + c;
        if self.terms[&(j, m)].is_zero() {
            self.terms.remove(&(j, m));
        }
    }

    pub fn term(c: C, m: i32, j: usize) -> Self {
        let mut o = Self::zero();
        o.push(j, m, c);
        o
    }

    /// Multiplication by `Σ c_m u^m`.
    pub fn mul(coeffs: &[(i32, C)]) -> Self {
        let mut o = Self::zero();
        for (m, c) in coeffs {
            o.push(0, *m, c.clone());
        }
        o
    }

    pub fn scalar(c: C) -> Self {
        Self::term(c, 0, 0)
    }

    /// `d/du`
    pub fn d() -> Self {
        Self::term(cq(1, 1), 0, 1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut o = self.clone();
        for ((j, m), c) in &other.terms {
            o.push(*j, *m, c.clone());
        }
        o
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut o = Self::zero();
        for ((j, m), c) in &self.terms {
            o.push(*j, *m, c.clone() * k.clone());
        }
        o
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&cq(-1, 1)))
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Self) -> Self {
        let mut o = Self::zero();
        for ((j, m), c) in &self.terms {
            for ((j2, m2), c2) in &other.terms {
                // u^m D^j (u^m2 D^j2) = Σ_k C(j,k) m2^(k) u^(m+m2−k) D^(j−k+j2)
                for k in 0..=*j {
                    let f = binomial(*j, k) * falling(*m2, k);
                    if f != 0 {
                        o.push(
                            j - k + j2,
                            m + m2 - k as i32,
                            c.clone() * c2.clone() * cq(f, 1),
                        );
                    }
                }
            }
        }
        o
    }

    /// Coefficient of `D^j` as a rational function of `u`.
    pub fn coefficient(&self, j: usize) -> Rat<C> {
        let ms: Vec<(i32, C)> = self
            .terms
            .iter()
            .filter(|((jj, _), _)| *jj == j)
            .map(|((_, m), c)| (*m, c.clone()))
            .collect();
        laurent(&ms)
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(|(j, _)| *j).max().unwrap_or(0)
    }

    /// The monomials `(j, m)` present.
    pub fn support(&self) -> BTreeSet<(usize, i32)> {
        self.terms.keys().copied().collect()
    }

    pub fn get(&self, j: usize, m: i32) -> C {
        self.terms.get(&(j, m)).cloned().unwrap_or_else(C::zero)
    }
}

/// `Σ c_m u^m` as a rational function.
pub fn laurent(ms: &[(i32, C)]) -> Rat<C> {
    let low = ms.iter().map(|(m, _)| *m).min().unwrap_or(0).min(0);
    let mut coeffs = vec![
        C::zero();
        ms.iter()
            .map(|(m, _)| (m - low) as usize + 1)
            .max()
            .unwrap_or(1)
    ];
    for (m, c) in ms {
        let k = (m - low) as usize;
        coeffs[k] = coeffs[k].clone() + c.clone();
    }
    Rat::new(Poly::new(coeffs), Poly::monomial(cq(1, 1), (-low) as usize))
}

/// An equation `Σ_j a_j·ψ^(j) + s = 0` normalized so that `a_2 = 1`; the
/// key `-1` holds the source term `s`.
pub type Form = BTreeMap<i32, Rat<C>>;

pub fn monic_form(parts: BTreeMap<i32, Rat<C>>) -> Form {
    let lead = parts.get(&2).expect("second-order equation").clone();
    let inv = Rat::new(lead.den.clone(), lead.num.clone());
    parts
        .into_iter()
        .filter(|(_, r)| !r.num.is_zero())
        .map(|(j, r)| (j, &r * &inv))
        .collect()
}

pub fn op_form(op: &Op) -> Form {
    assert_eq!(op.order(), 2);
    monic_form((0..=2).map(|j| (j as i32, op.coefficient(j))).collect())
}

pub fn ode_form(ode: &RationalCoeffODE<C>) -> Form {
    let one = Rat::from_poly(Poly::constant(cq(1, 1)));
    monic_form(
        [(2, one), (1, ode.p1().clone()), (0, ode.p0().clone())]
            .into_iter()
            .collect(),
    )
}

/// Keys whose coefficients differ between the two forms.
pub fn diff(a: &Form, b: &Form) -> BTreeSet<i32> {
    let zero = Rat::from_poly(Poly::<C>::zero());
    a.keys()
        .chain(b.keys())
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|j| {
            !a.get(j)
                .unwrap_or(&zero)
                .same_function(b.get(j).unwrap_or(&zero))
        })
        .collect()
}

/// `(d/du + 1/u)`, so that `R̂ = i·L1` and `R̂² = −L1∘L1` in the ordinary case.
pub fn l1() -> Op {
    Op::d().add(&Op::mul(&[(-1, cq(1, 1))]))
}

/// Ordinary `R̂² = −(D² + (2/u)D)`.
pub fn r2_ordinary() -> Op {
    Op::term(cq(-1, 1), 0, 2).add(&Op::term(cq(-2, 1), -1, 1))
}

pub fn r_ordinary() -> Op {
    l1().scale(&i())
}

/// Deformed `R̂² = −[A²D² + (2/u)·A·B·D]`, `A = 1+(θ+θ′)u²`, `B = 1+(2θ+θ′)u²`.
pub fn r2_deformed(theta: &Q, theta_p: &Q) -> Op {
    let s = cr(theta.clone() + theta_p.clone());
    let b = cr(theta.clone() + theta.clone() + theta_p.clone());
    let a = Op::mul(&[(0, cq(1, 1)), (2, s.clone())]);
    let bb = Op::mul(&[(0, cq(1, 1)), (2, b)]);
    let a2 = a.compose(&a);
    let d2 = a2.compose(&Op::term(cq(1, 1), 0, 2));
    let d1 = Op::mul(&[(-1, cq(2, 1))])
        .compose(&a)
        .compose(&bb)
        .compose(&Op::d());
    d2.add(&d1).scale(&cq(-1, 1))
}

/// First-order `R̂² = −[(1+6θu²)D² + (2/u)(1+7θu²)D]`.
pub fn r2_first_order(theta: &Q) -> Op {
    let t = cr(theta.clone());
    let d2 =
        Op::mul(&[(0, cq(1, 1)), (2, cq(6, 1) * t.clone())]).compose(&Op::term(cq(1, 1), 0, 2));
    let d1 = Op::mul(&[(-1, cq(2, 1)), (1, cq(14, 1) * t)]).compose(&Op::d());
    d2.add(&d1).scale(&cq(-1, 1))
}

/// First-order `R̂ = i[(1+3θu²)D + (1+θu²)/u]`.
pub fn r_first_order(theta: &Q) -> Op {
    let t = cr(theta.clone());
    let d = Op::mul(&[(0, cq(1, 1)), (2, cq(3, 1) * t.clone())]).compose(&Op::d());
    let m = Op::mul(&[(-1, cq(1, 1)), (1, t)]);
    d.add(&m).scale(&i())
}

/// `R̂²∘(1+u²) − η²R̂² − 2gηR̂ − g²` (squared interaction), acting on `ψ`.
pub fn coulomb_operator(r2: &Op, r: &Op, eta: &Q, g: &Q) -> Op {
    let e = cr(eta.clone());
    let gg = cr(g.clone());
    let kinetic = r2.compose(&Op::mul(&[(0, cq(1, 1)), (2, cq(1, 1))]));
    kinetic
        .sub(&r2.scale(&(e.clone() * e.clone())))
        .sub(&r.scale(&(cq(2, 1) * gg.clone() * e)))
        .sub(&Op::scalar(gg.clone() * gg))
}

/// The linear reading `R̂²∘(1+u²) − ηR̂² − gηR̂ − g`.
pub fn coulomb_operator_linear(r2: &Op, r: &Op, eta: &Q, g: &Q) -> Op {
    let e = cr(eta.clone());
    let gg = cr(g.clone());
    let kinetic = r2.compose(&Op::mul(&[(0, cq(1, 1)), (2, cq(1, 1))]));
    kinetic
        .sub(&r2.scale(&e))
        .sub(&r.scale(&(gg.clone() * e)))
        .sub(&Op::scalar(gg))
}

/// `(E − V)²` at `E = 0` reduces to `g²`.
pub fn zero_energy_operator(r2: &Op, g: &Q) -> Op {
    coulomb_operator(r2, &Op::zero(), &Q::zero(), g)
}

/// Operator on `φ` from an operator on `ψ = φ/u`.
pub fn on_phi(op: &Op) -> Op {
    op.compose(&Op::mul(&[(-1, cq(1, 1))]))
}

pub fn rat_of(p: Poly<C>) -> Rat<C> {
    Rat::from_poly(p)
}

/// `p(N/D)·D^deg` as a polynomial.
fn homogenize(p: &Poly<C>, n: &Poly<C>, d: &Poly<C>, deg: usize) -> Poly<C> {
    let mut out = Poly::zero();
    for (k, c) in p.coeffs().iter().enumerate() {
        let mut t = Poly::constant(c.clone());
        for _ in 0..k {
            t = &t * n;
        }
        for _ in k..deg {
            t = &t * d;
        }
        out = &out + &t;
    }
    out
}

fn pow(p: &Poly<C>, k: usize) -> Poly<C> {
    (0..k).fold(Poly::constant(cq(1, 1)), |acc, _| &acc * p)
}

/// `r(N/D)` as a rational function.
pub fn compose_rat(r: &Rat<C>, n: &Poly<C>, d: &Poly<C>) -> Rat<C> {
    let dn = r.num.degree().unwrap_or(0);
    let dd = r.den.degree().unwrap_or(0);
    let num = &homogenize(&r.num, n, d, dn) * &pow(d, dd);
    let den = &homogenize(&r.den, n, d, dd) * &pow(d, dn);
    Rat::new(num, den)
}

/// Pulls `f″ + P(ξ)f′ + Q(ξ)f = 0` back along `ξ = N(u)/D(u)` and applies
/// the gauge `f = G(u)·ψ`, returning the monic equation for `ψ(u)`.
pub fn pull_back(ode: &RationalCoeffODE<C>, n: &Poly<C>, d: &Poly<C>, gauge: &Rat<C>) -> Form {
    let xi = Rat::new(n.clone(), d.clone());
    let dxi = rat_derivative(&xi);
    let d2xi = rat_derivative(&dxi);
    let p = &compose_rat(ode.p1(), n, d) * &dxi;
    let p = &p - &(&d2xi * &invert(&dxi));
    let qq = &(&compose_rat(ode.p0(), n, d) * &dxi) * &dxi;
    let g1 = rat_derivative(gauge);
    let g2 = rat_derivative(&g1);
    let ginv = invert(gauge);
    let two = cq(2, 1);
    let c1 = &(&g1 * &ginv).scale(&two) + &p;
    let c0 = &(&(&g2 * &ginv) + &(&(&p * &g1) * &ginv)) + &qq;
    let one = Rat::from_poly(Poly::constant(cq(1, 1)));
    monic_form([(2, one), (1, c1), (0, c0)].into_iter().collect())
}

pub fn invert(r: &Rat<C>) -> Rat<C> {
    Rat::new(r.den.clone(), r.num.clone())
}

pub fn rat_derivative(r: &Rat<C>) -> Rat<C> {
    let num = &(&r.num.derivative() * &r.den) - &(&r.num * &r.den.derivative());
    Rat::new(num, &r.den * &r.den)
}

/// Parameters used for all exact comparisons: `η = 3/5` makes `ε̃ = 4/5`
/// rational and distinguishes `ε̃` from `ε̃²`; `θ = 1/54` makes `√(6θ) = 1/3`.
pub struct Exact {
    pub g: Q,
    pub eta: Q,
    pub eps: Q,
    pub theta: Q,
    pub theta_p: Q,
    pub sqrt6: Q,
}

pub fn exact() -> Exact {
    Exact {
        g: q(3, 10),
        eta: q(3, 5),
        eps: q(4, 5),
        theta: q(1, 54),
        theta_p: q(1, 20),
        sqrt6: q(1, 3),
    }
}

impl Exact {
    pub fn eps2(&self) -> Q {
        self.eps.clone() * self.eps.clone()
    }
    pub fn omega(&self) -> Q {
        self.g.clone() * self.eta.clone()
    }
    pub fn k(&self) -> Q {
        self.g.clone() * self.g.clone()
    }
}

fn lp(ms: &[(i32, C)]) -> Rat<C> {
    laurent(ms)
}

/// The ordinary equation as printed, with `ε̃` rather than `ε̃²` in the
/// `2/u` term of the `ψ′` coefficient.
pub fn printed_ordinary(x: &Exact) -> Form {
    let (e, e2, w, k) = (cr(x.eps.clone()), cr(x.eps2()), cr(x.omega()), cr(x.k()));
    let a2 = lp(&[(0, e2), (2, cq(1, 1))]);
    let a1 = lp(&[
        (-1, cq(2, 1) * e),
        (0, cq(2, 1) * i() * w.clone()),
        (1, cq(6, 1)),
    ]);
    let a0 = lp(&[(0, k + cq(6, 1)), (-1, cq(2, 1) * i() * w)]);
    monic_form([(2, a2), (1, a1), (0, a0)].into_iter().collect())
}

/// The zero-energy deformed equation as printed: the brace closes after
/// `ψ′`, so the `4(u²+½)/(u²+1)` term carries no `ψ′`.
pub fn printed_zero_energy(x: &Exact) -> Form {
    let (t, tp, k) = (cr(x.theta.clone()), cr(x.theta_p.clone()), cr(x.k()));
    let s = t.clone() + tp.clone();
    let a = Poly::new(vec![cq(1, 1), C::zero(), s]);
    let one_u2 = Poly::new(vec![cq(1, 1), C::zero(), cq(1, 1)]);
    let u = Poly::<C>::x();
    let source = Rat::new(Poly::new(vec![cq(4, 1), C::zero(), cq(8, 1)]), &u * &one_u2);
    let c1 = Rat::new(
        Poly::new(vec![cq(-2, 1), C::zero(), cq(-2, 1) * tp.clone()]),
        &u * &a,
    );
    let top = Poly::new(vec![cq(6, 1), C::zero(), cq(10, 1) * t + cq(6, 1) * tp]);
    let c0 = Rat::new(&(&top * &a) + &Poly::constant(k), &(&a * &a) * &one_u2);
    let one = Rat::from_poly(Poly::constant(cq(1, 1)));
    monic_form(
        [(2, one), (1, c1), (0, c0), (-1, source)]
            .into_iter()
            .collect(),
    )
}

/// The first-order equation for `φ` transcribed term by term from its
/// printed form, with `θ′ = 2θ`.
pub fn printed_first_order(x: &Exact) -> Form {
    let (t, e2, w, k) = (cr(x.theta.clone()), cr(x.eps2()), cr(x.omega()), cr(x.k()));
    let n = |v: i64| cq(v, 1);
    let u2e = [(0, e2.clone()), (2, n(1))];
    let six = [(0, n(1)), (2, n(6) * t.clone())];
    let mul = |a: &[(i32, C)], b: &[(i32, C)]| -> Vec<(i32, C)> {
        let mut out = Vec::new();
        for (m, c) in a {
            for (m2, c2) in b {
                out.push((m + m2, c.clone() * c2.clone()));
            }
        }
        out
    };
    let a2 = lp(&mul(&u2e, &six));
    let mut a1 = mul(&[(1, n(2) * t.clone())], &u2e);
    a1.extend(mul(&[(1, n(4))], &six));
    a1.extend([
        (0, n(2) * i() * w.clone()),
        (2, n(6) * i() * w.clone() * t.clone()),
    ]);
    let mut a0: Vec<(i32, C)> = u2e
        .iter()
        .map(|(m, c)| (*m, c.clone() * n(-2) * t.clone()))
        .collect();
    a0.extend(six.iter().map(|(m, c)| (*m, c.clone() * n(-2))));
    a0.extend([
        (0, n(4)),
        (2, n(28) * t.clone()),
        (1, n(-4) * i() * w * t),
        (0, k),
    ]);
    monic_form([(2, a2), (1, lp(&a1)), (0, lp(&a0))].into_iter().collect())
}

pub struct DerivationReport {
    /// Oracle equals builder, per model.
    pub ordinary_matches: bool,
    pub zero_energy_matches: bool,
    pub first_order_matches: bool,
    /// Coefficients where the printed equations differ from the oracle.
    pub ordinary_printed_diff: BTreeSet<i32>,
    pub zero_energy_printed_diff: BTreeSet<i32>,
    pub first_order_printed_diff: BTreeSet<i32>,
    /// Coefficients where the linear reading of the interaction differs
    /// from the squared one.
    pub linear_reading_diff: BTreeSet<i32>,
}

pub fn derivation_report() -> DerivationReport {
    use kgml::kgmodels::{deformed_zero_energy_form, first_order_form, ordinary_form};
    let x = exact();
    let to_ode = |f: [Poly<C>; 3]| {
        let [a2, a1, a0] = f;
        RationalCoeffODE::from_polynomial_form(a2, a1, a0)
    };

    let ord_op = coulomb_operator(&r2_ordinary(), &r_ordinary(), &x.eta, &x.g);
    let ord_oracle = op_form(&ord_op);
    let ord_impl = ode_form(&to_ode(ordinary_form(x.eps2(), x.omega(), x.k())));

    let lin_op = coulomb_operator_linear(&r2_ordinary(), &r_ordinary(), &x.eta, &x.g);

    let ze_op = zero_energy_operator(&r2_deformed(&x.theta, &x.theta_p), &x.g);
    let ze_oracle = op_form(&ze_op);
    let ze_impl = ode_form(&to_ode(deformed_zero_energy_form(
        x.k(),
        x.theta.clone(),
        x.theta_p.clone(),
    )));

    let fo_op = on_phi(&coulomb_operator(
        &r2_first_order(&x.theta),
        &r_first_order(&x.theta),
        &x.eta,
        &x.g,
    ));
    let fo_oracle = op_form(&fo_op);
    let fo_impl = ode_form(&to_ode(first_order_form(
        x.eps2(),
        x.omega(),
        x.k(),
        x.theta.clone(),
    )));

    DerivationReport {
        ordinary_matches: diff(&ord_oracle, &ord_impl).is_empty(),
        zero_energy_matches: diff(&ze_oracle, &ze_impl).is_empty(),
        first_order_matches: diff(&fo_oracle, &fo_impl).is_empty(),
        ordinary_printed_diff: diff(&ord_oracle, &printed_ordinary(&x)),
        zero_energy_printed_diff: diff(&ze_oracle, &printed_zero_energy(&x)),
        first_order_printed_diff: diff(&fo_oracle, &printed_first_order(&x)),
        linear_reading_diff: diff(&ord_oracle, &op_form(&lin_op)),
    }
}

/// Expected diff sets: the `ψ′` coefficient for the ordinary equation; the
/// source term and the `ψ′` coefficient for the zero-energy brace; nothing
/// for the first-order equation; `ψ′` and `ψ` for the linear reading.
pub fn expected_diffs() -> [BTreeSet<i32>; 4] {
    [
        [1].into_iter().collect(),
        [-1, 1].into_iter().collect(),
        BTreeSet::new(),
        [0, 1].into_iter().collect(),
    ]
}
