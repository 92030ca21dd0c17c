//! Dense univariate polynomials over a [`Ring`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

use crate::ring::{El, Ring, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operation needs a field (k = 1)")]
    FieldRequired,
    #[error("constant term is not a unit")]
    NonUnitConstant,
    #[error("divisor has a non-unit leading coefficient")]
    NonUnitLeading,
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial is not palindromic")]
    NotPalindromic,
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `sum c_i x^i`, with no trailing zero coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ring: Ring,
    c: Vec<El>,
}

impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Poly {
    pub fn new(ring: &Ring, mut c: Vec<El>) -> Poly {
        while c.last().is_some_and(|e| e.is_zero()) {
            c.pop();
        }
        Poly { ring: ring.clone(), c }
    }

    pub fn from_ints(ring: &Ring, c: &[i64]) -> Poly {
        Poly::new(ring, c.iter().map(|&v| ring.from_int(v)).collect())
    }

    pub fn zero(ring: &Ring) -> Poly {
        Poly { ring: ring.clone(), c: Vec::new() }
    }

    pub fn one(ring: &Ring) -> Poly {
        Poly::constant(ring, ring.one())
    }

    pub fn constant(ring: &Ring, a: El) -> Poly {
        Poly::new(ring, vec![a])
    }

    pub fn x(ring: &Ring) -> Poly {
        Poly::monomial(ring, ring.one(), 1)
    }

    /// `a x^d`.
    pub fn monomial(ring: &Ring, a: El, d: usize) -> Poly {
        let mut c = vec![El::ZERO; d + 1];
        c[d] = a;
        Poly::new(ring, c)
    }

    /// `x - a`.
    pub fn linear(ring: &Ring, a: El) -> Poly {
        Poly::new(ring, vec![ring.neg(&a), ring.one()])
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[El] {
        &self.c
    }

    pub fn into_coeffs(self) -> Vec<El> {
        self.c
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> El {
        self.c.get(i).copied().unwrap_or(El::ZERO)
    }

    /// Coefficient vector padded or cut to length `n`.
    pub fn coeff_vec(&self, n: usize) -> Vec<El> {
        (0..n).map(|i| self.coeff(i)).collect()
    }

    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn lead(&self) -> El {
        self.c.last().copied().unwrap_or(El::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        !self.c.is_empty() && self.ring.is_one(&self.lead())
    }

    fn check(&self, other: &Poly) {
        assert!(self.ring == other.ring, "polynomials over different rings");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check(other);
        let n = self.c.len().max(other.c.len());
        let c = (0..n).map(|i| self.ring.add(&self.coeff(i), &other.coeff(i))).collect();
        Poly::new(&self.ring, c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.check(other);
        let n = self.c.len().max(other.c.len());
        let c = (0..n).map(|i| self.ring.sub(&self.coeff(i), &other.coeff(i))).collect();
        Poly::new(&self.ring, c)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(&self.ring, self.c.iter().map(|a| self.ring.neg(a)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check(other);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.ring);
        }
        let r = &self.ring;
        let mut c = vec![El::ZERO; self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] = r.add(&c[i + j], &r.mul(a, b));
            }
        }
        Poly::new(r, c)
    }

    pub fn scale(&self, a: &El) -> Poly {
        Poly::new(&self.ring, self.c.iter().map(|c| self.ring.mul(c, a)).collect())
    }

    /// `x^d f`.
    pub fn shift(&self, d: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![El::ZERO; d];
        c.extend_from_slice(&self.c);
        Poly::new(&self.ring, c)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Quotient and remainder; the divisor's leading coefficient must be a
    /// unit.
    pub fn divmod(&self, d: &Poly) -> Result<(Poly, Poly), PolyError> {
        self.check(d);
        let r = &self.ring;
        if d.is_zero() || !r.is_unit(&d.lead()) {
            return Err(PolyError::NonUnitLeading);
        }
        let inv = r.inv(&d.lead())?;
        let dd = d.c.len() - 1;
        let mut rem = self.c.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(r), self.clone()));
        }
        let mut quot = vec![El::ZERO; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let t = r.mul(&rem[i], &inv);
            if t.is_zero() {
                continue;
            }
            quot[i - dd] = t;
            for (j, dc) in d.c.iter().enumerate() {
                rem[i - dd + j] = r.sub(&rem[i - dd + j], &r.mul(&t, dc));
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(r, quot), Poly::new(r, rem)))
    }

    pub fn rem(&self, d: &Poly) -> Result<Poly, PolyError> {
        Ok(self.divmod(d)?.1)
    }

    /// Exact quotient, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.divmod(d).ok()?;
        r.is_zero().then_some(q)
    }

    pub fn eval(&self, a: &El) -> El {
        let r = &self.ring;
        self.c.iter().rev().fold(El::ZERO, |acc, c| r.add(&r.mul(&acc, a), c))
    }

    pub fn derivative(&self) -> Poly {
        let r = &self.ring;
        let c = self.c.iter().enumerate().skip(1).map(|(i, a)| r.scale(a, i as i64)).collect();
        Poly::new(r, c)
    }

    /// Scales to a monic polynomial (leading coefficient must be a unit).
    pub fn monic(&self) -> Result<Poly, PolyError> {
        if self.is_zero() {
            return Err(PolyError::NotMonic);
        }
        let inv = self.ring.inv(&self.lead()).map_err(|_| PolyError::NonUnitLeading)?;
        Ok(self.scale(&inv))
    }

    /// Monic gcd; only over fields.
    pub fn gcd(&self, other: &Poly) -> Result<Poly, PolyError> {
        if !self.ring.is_field() {
            return Err(PolyError::FieldRequired);
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic()
        }
    }

    /// `x^n f(1/x)` for `deg f <= n`.
    pub fn reverse(&self, n: usize) -> Poly {
        assert!(self.degree() <= n as i64, "reverse past the degree");
        let c = (0..=n).map(|i| self.coeff(n - i)).collect();
        Poly::new(&self.ring, c)
    }

    /// `x^{deg f} f(1/x) / f(0)`.
    pub fn reciprocal(&self) -> Result<Poly, PolyError> {
        let c0 = self.coeff(0);
        if !self.ring.is_unit(&c0) {
            return Err(PolyError::NonUnitConstant);
        }
        let inv = self.ring.inv(&c0)?;
        Ok(self.reverse(self.deg().unwrap_or(0)).scale(&inv))
    }

    /// `t^n tau(f)(1/t) / tau(f)(0)`, over a ring with an involution.
    pub fn skew_reciprocal(&self) -> Result<Poly, PolyError> {
        let t = self.tau()?;
        t.reciprocal()
    }

    pub fn map(&self, f: impl Fn(&El) -> El) -> Poly {
        Poly::new(&self.ring, self.c.iter().map(f).collect())
    }

    pub fn sigma(&self) -> Poly {
        self.map(|a| self.ring.sigma(a))
    }

    pub fn tau(&self) -> Result<Poly, PolyError> {
        if !self.ring.has_involution() {
            return Err(RingError::NoInvolution.into());
        }
        Ok(self.map(|a| self.ring.tau_unchecked(a)))
    }

    /// Coefficientwise image in the same ring at another level.
    pub fn to_ring(&self, target: &Ring) -> Poly {
        let c = if target.k() <= self.ring.k() {
            self.c.iter().map(|a| self.ring.reduce(a, target)).collect()
        } else {
            self.c.clone()
        };
        Poly::new(target, c)
    }

    /// Ordering key: degree first, then coefficients from the top down by
    /// enumeration index.
    pub fn sort_key(&self) -> (i64, Vec<u64>) {
        (self.degree(), self.c.iter().rev().map(|a| self.ring.index_of(a)).collect())
    }

    fn fmt_coeff(&self, a: &El) -> String {
        if self.ring.m() == 1 {
            self.ring.fmt_el(a)
        } else {
            format!("({})", self.ring.fmt_el(a))
        }
    }

    /// `c0 + c1*x + ...` without the ring suffix.
    pub fn fmt_terms(&self) -> String {
        if self.c.is_empty() {
            return "0".into();
        }
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| match i {
                0 => self.fmt_coeff(a),
                1 => format!("{}*x", self.fmt_coeff(a)),
                _ => format!("{}*x^{}", self.fmt_coeff(a), i),
            })
            .collect();
        terms.join(" + ")
    }

    pub fn parse_in(ring: &Ring, s: &str) -> Result<Poly, PolyError> {
        let bad = || PolyError::Invalid(format!("cannot parse polynomial {s:?}"));
        let mut acc = Poly::zero(ring);
        for term in s.split(" + ") {
            let term = term.trim();
            let (coef, power) = match term.split_once('*') {
                None => (term, 0usize),
                Some((c, xpart)) => {
                    let d = match xpart.trim() {
                        "x" => 1,
                        t => t.strip_prefix("x^").and_then(|d| d.parse().ok()).ok_or_else(bad)?,
                    };
                    (c, d)
                }
            };
            let coef = coef.trim().trim_start_matches('(').trim_end_matches(')');
            let a = ring.parse_el(coef).map_err(|_| bad())?;
            acc = acc.add(&Poly::monomial(ring, a, power));
        }
        Ok(acc)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.fmt_terms(), self.ring)
    }
}

impl FromStr for Poly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Poly, PolyError> {
        let (body, ctx) = s
            .rsplit_once('@')
            .ok_or_else(|| PolyError::Invalid(format!("missing ring in {s:?}")))?;
        let ring: Ring = ctx.parse()?;
        Poly::parse_in(&ring, body)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly::add(self, rhs)
    }
}
impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        Poly::sub(self, rhs)
    }
}
impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}
impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

/// All monic polynomials of degree `n` over `ring`, in enumeration order of
/// the lower coefficients.
pub fn monics(ring: &Ring, n: usize) -> impl Iterator<Item = Poly> + '_ {
    let size = ring.size();
    let count = size.pow(n as u32);
    (0..count).map(move |mut idx| {
        let mut c = Vec::with_capacity(n + 1);
        for _ in 0..n {
            c.push(ring.element_at(idx % size));
            idx /= size;
        }
        c.push(ring.one());
        Poly::new(ring, c)
    })
}

/// Polynomials of degree `< n` (all coefficient vectors of length `n`).
pub fn below_degree(ring: &Ring, n: usize) -> impl Iterator<Item = Poly> + '_ {
    let size = ring.size();
    (0..size.pow(n as u32)).map(move |mut idx| {
        let c = (0..n)
            .map(|_| {
                let e = ring.element_at(idx % size);
                idx /= size;
                e
            })
            .collect();
        Poly::new(ring, c)
    })
}
