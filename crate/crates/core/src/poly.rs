//! Sparse multivariate polynomials.
//!
//! Coefficients are either exact Gaussian rationals ([`QI`]) for symbolic
//! identities (Hefer decompositions, `a∘γ ≡ 0`, jet matrices) or
//! [`Complex64`] for numerics. Exponent vectors have a fixed arity `N`;
//! the variable meaning is fixed by the caller (see the aliases below).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Ring operations required of a polynomial coefficient.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
}

impl Coeff for Complex64 {}
impl Coeff for QI {}
impl Coeff for BigRational {}

/// Gaussian rational `re + i·im` with arbitrary-precision parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QI {
    pub re: BigRational,
    pub im: BigRational,
}

impl QI {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        QI { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        QI::new(
            BigRational::from_integer(BigInt::from(n)),
            BigRational::zero(),
        )
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        QI::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn real(re: BigRational) -> Self {
        QI::new(re, BigRational::zero())
    }

    pub fn i() -> Self {
        QI::new(BigRational::zero(), BigRational::one())
    }

    pub fn conj(&self) -> Self {
        QI::new(self.re.clone(), -self.im.clone())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return None;
        }
        Some(QI::new(&self.re / &n, -&self.im / &n))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Debug for QI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}*i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({}-{}*i)", self.re, -self.im.clone())
                } else {
                    write!(f, "({}+{}*i)", self.re, self.im)
                }
            }
        }
    }
}

impl Zero for QI {
    fn zero() -> Self {
        QI::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for QI {
    fn one() -> Self {
        QI::new(BigRational::one(), BigRational::zero())
    }
}

impl Add for QI {
    type Output = QI;
    fn add(self, o: QI) -> QI {
        QI::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for QI {
    type Output = QI;
    fn sub(self, o: QI) -> QI {
        QI::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for QI {
    type Output = QI;
    fn mul(self, o: QI) -> QI {
        QI::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for QI {
    type Output = QI;
    fn neg(self) -> QI {
        QI::new(-self.re, -self.im)
    }
}

/// Sparse polynomial in `N` variables. Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Poly<T: Coeff, const N: usize> {
    terms: BTreeMap<[u32; N], T>,
}

/// Univariate polynomial.
pub type Poly1<T> = Poly<T, 1>;
/// Polynomial in the parameter variables `(τ, τ̄)`.
pub type ParamPoly<T> = Poly<T, 2>;
/// Polynomial in `(ζ₁, ζ̄₁, ζ₂, ζ̄₂)`.
pub type AmbientPoly<T> = Poly<T, 4>;

impl<T: Coeff, const N: usize> Default for Poly<T, N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Coeff, const N: usize> Poly<T, N> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial([0; N], c)
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn monomial(exp: [u32; N], c: T) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    /// The variable with index `i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; N];
        e[i] = 1;
        Self::monomial(e, T::one())
    }

    pub fn from_terms<I: IntoIterator<Item = ([u32; N], T)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exp: [u32; N], c: T) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; N], &T)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32; N]) -> T {
        self.terms.get(exp).cloned().unwrap_or_else(T::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Largest exponent of variable `i`.
    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v.clone() * c.clone())))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = *e;
            ne[i] -= 1;
            out.add_term(ne, c.clone() * int_coeff::<T>(e[i] as i64));
        }
        out
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Poly<U, N> {
        Poly::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))))
    }

    /// Evaluate at a point.
    pub fn eval(&self, x: &[T; N]) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for i in 0..N {
                for _ in 0..e[i] {
                    m = m * x[i].clone();
                }
            }
            acc = acc + m;
        }
        acc
    }

    /// Substitute polynomials in `M` variables for each of the `N` variables.
    pub fn compose<const M: usize>(&self, subs: &[Poly<T, M>; N]) -> Poly<T, M> {
        // cache powers per variable
        let mut cache: Vec<Vec<Poly<T, M>>> = vec![vec![Poly::one()]; N];
        let mut out = Poly::<T, M>::zero();
        for (e, c) in &self.terms {
            let mut m = Poly::<T, M>::constant(c.clone());
            for i in 0..N {
                let k = e[i] as usize;
                while cache[i].len() <= k {
                    let next = cache[i].last().unwrap() * &subs[i];
                    cache[i].push(next);
                }
                if k > 0 {
                    m = &m * &cache[i][k];
                }
            }
            out = &out + &m;
        }
        out
    }

    /// Keep only terms selected by the predicate.
    pub fn filter_terms(&self, keep: impl Fn(&[u32; N]) -> bool) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (*e, c.clone())),
        )
    }
}

/// Embed an integer into a coefficient ring.
pub fn int_coeff<T: Coeff>(n: i64) -> T {
    let mut acc = T::zero();
    let one = T::one();
    let mut base = if n < 0 { -one } else { one };
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc + base.clone();
        }
        base = base.clone() + base;
        k >>= 1;
    }
    acc
}

impl<T: Coeff, const N: usize> Add for &Poly<T, N> {
    type Output = Poly<T, N>;
    fn add(self, o: &Poly<T, N>) -> Poly<T, N> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<T: Coeff, const N: usize> Sub for &Poly<T, N> {
    type Output = Poly<T, N>;
    fn sub(self, o: &Poly<T, N>) -> Poly<T, N> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<T: Coeff, const N: usize> Mul for &Poly<T, N> {
    type Output = Poly<T, N>;
    fn mul(self, o: &Poly<T, N>) -> Poly<T, N> {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let mut e = [0; N];
                for i in 0..N {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<T: Coeff, const N: usize> Neg for &Poly<T, N> {
    type Output = Poly<T, N>;
    fn neg(self) -> Poly<T, N> {
        Poly::from_terms(self.terms.iter().map(|(e, c)| (*e, -c.clone())))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Coeff, const N: usize> $tr for Poly<T, N> {
            type Output = Poly<T, N>;
            fn $m(self, o: Poly<T, N>) -> Poly<T, N> {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Coeff, const N: usize> Neg for Poly<T, N> {
    type Output = Poly<T, N>;
    fn neg(self) -> Poly<T, N> {
        -&self
    }
}

impl<T: Coeff, const N: usize> fmt::Debug for Poly<T, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:?}")?;
            for (i, k) in e.iter().enumerate() {
                if *k > 0 {
                    write!(f, "·x{i}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// `Poly` printed with variable names, e.g. `3/10*tb^10 + z1*zb2`.
pub struct Named<'a, T: Coeff, const N: usize> {
    poly: &'a Poly<T, N>,
    names: [&'a str; N],
}

impl<T: Coeff, const N: usize> Poly<T, N> {
    pub fn named<'a>(&'a self, names: [&'a str; N]) -> Named<'a, T, N> {
        Named { poly: self, names }
    }
}

impl<T: Coeff + fmt::Display, const N: usize> fmt::Display for Named<'_, T, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.poly.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = e
                .iter()
                .zip(self.names)
                .filter(|(k, _)| **k > 0)
                .map(|(k, n)| {
                    if *k == 1 {
                        n.to_string()
                    } else {
                        format!("{n}^{k}")
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{c}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Poly1<QI> {
    /// Leading coefficient and degree; `None` for the zero polynomial.
    pub fn leading(&self) -> Option<(u32, QI)> {
        self.terms
            .iter()
            .next_back()
            .map(|(e, c)| (e[0], c.clone()))
    }

    /// Lowest exponent with nonzero coefficient.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|e| e[0])
    }

    /// Euclidean division over the field `Q(i)`.
    pub fn div_rem(&self, d: &Poly1<QI>) -> Option<(Poly1<QI>, Poly1<QI>)> {
        let (dd, dc) = d.leading()?;
        let inv = dc.inv()?;
        let mut q = Poly1::zero();
        let mut r = self.clone();
        while let Some((rd, rc)) = r.leading() {
            if rd < dd {
                break;
            }
            let c = rc * inv.clone();
            let m = Poly1::monomial([rd - dd], c);
            r = &r - &(&m * d);
            q = &q + &m;
        }
        Some((q, r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly1<QI>) -> Poly1<QI> {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        match a.leading() {
            Some((_, c)) => a.scale(&c.inv().expect("nonzero")),
            None => a,
        }
    }

    /// Divide out `x^k` where `k` is the order; returns `(k, quotient)`.
    pub fn split_order(&self) -> (u32, Poly1<QI>) {
        let k = self.order().unwrap_or(0);
        let q = Poly1::from_terms(self.terms.iter().map(|(e, c)| ([e[0] - k], c.clone())));
        (k, q)
    }
}

/// Univariate `Complex64` polynomial evaluated by Horner's rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense1 {
    /// `coeffs[k]` multiplies `x^k`.
    pub coeffs: Vec<Complex64>,
}

impl Dense1 {
    pub fn from_poly(p: &Poly1<QI>) -> Self {
        let deg = p.degree_in(0).unwrap_or(0) as usize;
        let mut coeffs = vec![Complex64::zero(); deg + 1];
        for (e, c) in p.terms() {
            coeffs[e[0] as usize] = c.to_c64();
        }
        Dense1 { coeffs }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Dense1 {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect::<Vec<_>>();
        Dense1 {
            coeffs: if coeffs.is_empty() {
                vec![Complex64::zero()]
            } else {
                coeffs
            },
        }
    }
}

/// Polynomial in `(τ, τ̄)` with `Complex64` coefficients, laid out for fast
/// repeated evaluation inside quadrature loops.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense2 {
    terms: Vec<(u32, u32, Complex64)>,
    max_a: u32,
    max_b: u32,
}

impl Dense2 {
    pub fn from_poly<T: Coeff>(p: &ParamPoly<T>, to_c: impl Fn(&T) -> Complex64) -> Self {
        let terms: Vec<_> = p.terms().map(|(e, c)| (e[0], e[1], to_c(c))).collect();
        let max_a = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let max_b = terms.iter().map(|t| t.1).max().unwrap_or(0);
        Dense2 {
            terms,
            max_a,
            max_b,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, tau: Complex64) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::zero();
        }
        const STACK: usize = 48;
        let conj = tau.conj();
        if self.max_a as usize >= STACK || self.max_b as usize >= STACK {
            return self
                .terms
                .iter()
                .map(|(a, b, c)| c * tau.powu(*a) * conj.powu(*b))
                .sum();
        }
        let mut pa = [Complex64::zero(); STACK];
        let mut pb = [Complex64::zero(); STACK];
        pa[0] = Complex64::one();
        pb[0] = Complex64::one();
        for k in 1..=self.max_a as usize {
            pa[k] = pa[k - 1] * tau;
        }
        for k in 1..=self.max_b as usize {
            pb[k] = pb[k - 1] * conj;
        }
        self.terms
            .iter()
            .map(|(a, b, c)| c * pa[*a as usize] * pb[*b as usize])
            .sum()
    }
}

/// Polynomial whose coefficients are all rational, as exact integers scaled.
pub fn is_integral(p: &Poly1<QI>) -> bool {
    p.terms().all(|(_, c)| c.is_real() && c.re.is_integer())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> QI {
        QI::from_int(n)
    }

    #[test]
    fn ring_identities() {
        let x = Poly::<QI, 2>::var(0);
        let y = Poly::<QI, 2>::var(1);
        let lhs = (&x - &y) * (&x + &y);
        let rhs = &x.pow(2) - &y.pow(2);
        assert_eq!(lhs, rhs);
        assert!((&lhs - &rhs).is_zero());
    }

    #[test]
    fn compose_and_derivative() {
        // (x^2 + 1)∘(2t) = 4t^2 + 1
        let x = Poly1::<QI>::var(0);
        let p = &x.pow(2) + &Poly1::one();
        let sub = Poly1::monomial([1], q(2));
        let c = p.compose(&[sub]);
        assert_eq!(c.coeff(&[2]), q(4));
        assert_eq!(c.coeff(&[0]), q(1));
        assert_eq!(c.derivative(0).coeff(&[1]), q(8));
    }

    #[test]
    fn division_and_gcd() {
        // (x^6-1)(x-1) / ((x^3-1)(x^2-1)) = x^2 - x + 1
        let x = Poly1::<QI>::var(0);
        let one = Poly1::<QI>::one();
        let num = &(&x.pow(6) - &one) * &(&x - &one);
        let den = &(&x.pow(3) - &one) * &(&x.pow(2) - &one);
        let (quot, rem) = num.div_rem(&den).unwrap();
        assert!(rem.is_zero());
        assert_eq!(quot.coeff(&[2]), q(1));
        assert_eq!(quot.coeff(&[1]), q(-1));
        assert_eq!(quot.coeff(&[0]), q(1));
        let g = (&x.pow(2) - &one).gcd(&(&x.pow(3) - &one));
        assert_eq!(g, &x - &one);
    }

    #[test]
    fn dense_eval_matches_sparse() {
        let t = Poly::<QI, 2>::var(0);
        let tb = Poly::<QI, 2>::var(1);
        let p = &(&t.pow(3) * &tb)
            + &tb.pow(2).scale(&QI::new(
                BigRational::from_integer(2.into()),
                BigRational::from_integer((-1).into()),
            ));
        let d = Dense2::from_poly(&p, QI::to_c64);
        let z = Complex64::new(0.3, -0.7);
        let exact = z.powu(3) * z.conj() + Complex64::new(2.0, -1.0) * z.conj().powu(2);
        assert!((d.eval(z) - exact).norm() < 1e-14);
    }

    #[test]
    fn int_coeff_embeds() {
        assert_eq!(int_coeff::<QI>(-7), q(-7));
        assert_eq!(int_coeff::<Complex64>(5), Complex64::new(5.0, 0.0));
    }
}
