//! Galois rings `GR(p^k, m)`: the unramified residue rings `O/p^k` with
//! residue field `F_q`, `q = p^m`.
//!
//! Elements are plain coefficient vectors in the power basis of a fixed
//! integer defining polynomial; all operations go through the owning
//! [`Ring`], which keeps the modulus, the reduction rule and the images of
//! the basis under Frobenius.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

/// Largest supported extension degree `m`.
pub const MAX_DEGREE: usize = 8;

/// `p^k` must stay below this so that coefficient products fit in `u64`
/// with room for a full row of accumulations.
const MAX_MODULUS: u64 = 1 << 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not an odd prime")]
    BadPrime(u32),
    #[error("extension degree {0} is outside 1..={MAX_DEGREE}")]
    BadDegree(usize),
    #[error("p^k = {p}^{k} exceeds the supported modulus")]
    TooLarge { p: u32, k: u32 },
    #[error("defining polynomial must be monic of degree m and irreducible mod p")]
    BadModulus,
    #[error("elements belong to different rings")]
    ContextMismatch,
    #[error("element is not a unit")]
    NonUnit,
    #[error("level {0} is outside 1..={1}")]
    LevelOutOfRange(u32, u32),
    #[error("extension degree is odd, so there is no relative involution")]
    NoInvolution,
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// A ring element: little-endian coefficients in `[0, p^k)`; only the first
/// `m` slots are meaningful, the rest stay zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct El(pub(crate) [u32; MAX_DEGREE]);

impl El {
    pub const ZERO: El = El([0; MAX_DEGREE]);

    pub(crate) fn scalar(c: u32) -> El {
        let mut e = El::ZERO;
        e.0[0] = c;
        e
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// `p`-adic valuation of a ring element. The value `k` stands for the zero
/// element of `GR(p^k, m)`, i.e. infinite valuation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Valuation(pub u32);

impl Valuation {
    pub fn is_infinite(self, k: u32) -> bool {
        self.0 >= k
    }
}

struct Inner {
    p: u32,
    m: usize,
    k: u32,
    modulus: u32,
    /// Integer coefficients of the defining polynomial, low degree first.
    defining: Vec<u32>,
    /// `-f_i mod p^k` for the non-leading coefficients.
    neg_low: [u64; MAX_DEGREE],
    /// Images of `1, z, ..., z^{m-1}` under Frobenius.
    sigma_basis: Vec<El>,
    /// Images of the basis under `sigma^{m/2}` when `m` is even.
    tau_basis: Option<Vec<El>>,
    unit_order: u64,
    residue: Option<Ring>,
}

/// Context for `GR(p^k, m)`; cheap to clone and shareable between threads.
#[derive(Clone)]
pub struct Ring(Arc<Inner>);

impl PartialEq for Ring {
    fn eq(&self, other: &Ring) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.k == other.0.k
                && self.0.defining == other.0.defining)
    }
}
impl Eq for Ring {}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GR({},{})", self.0.modulus, self.0.m)
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Built-in defining polynomials (low degree first), irreducible mod p.
fn table_poly(p: u32, m: usize) -> Option<Vec<u32>> {
    let v: &[u32] = match (p, m) {
        (_, 1) => &[0, 1],
        (3, 2) => &[1, 0, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (5, 2) => &[2, 0, 1],
        (5, 3) => &[3, 3, 0, 1],
        (5, 4) => &[2, 4, 4, 0, 1],
        (7, 2) => &[1, 0, 1],
        (7, 3) => &[4, 0, 6, 1],
        (7, 4) => &[3, 4, 5, 0, 1],
        _ => return None,
    };
    Some(v.to_vec())
}

fn fp_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    // b monic
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = r[r.len() - 1] % p as u64;
        let shift = r.len() - 1 - db;
        for (i, &bc) in b.iter().enumerate() {
            let t = lead * bc as u64 % p as u64;
            r[shift + i] = (r[shift + i] + p as u64 - t) % p as u64;
        }
        r.pop();
    }
    r.into_iter().map(|c| (c % p as u64) as u32).collect()
}

/// Irreducibility over `F_p` by trial division against every monic
/// polynomial of degree at most `deg/2`.
pub(crate) fn irreducible_mod_p(f: &[u32], p: u32) -> bool {
    let n = f.len() - 1;
    if n == 0 || f[n] % p != 1 {
        return false;
    }
    if n == 1 {
        return true;
    }
    for d in 1..=n / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                g.push((t % p as u64) as u32);
                t /= p as u64;
            }
            g.push(1);
            if fp_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn search_poly(p: u32, m: usize) -> Vec<u32> {
    let count = (p as u64).pow(m as u32);
    for idx in 0..count {
        let mut g = Vec::with_capacity(m + 1);
        let mut t = idx;
        for _ in 0..m {
            g.push((t % p as u64) as u32);
            t /= p as u64;
        }
        g.push(1);
        if g[0] != 0 && irreducible_mod_p(&g, p) {
            return g;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Ring {
    /// `GR(p^k, m)` with the built-in defining polynomial for `(p, m)`.
    pub fn new(p: u32, m: usize, k: u32) -> Result<Ring, RingError> {
        if !is_prime(p) || p == 2 {
            return Err(RingError::BadPrime(p));
        }
        if m == 0 || m > MAX_DEGREE {
            return Err(RingError::BadDegree(m));
        }
        let poly = table_poly(p, m).unwrap_or_else(|| search_poly(p, m));
        Ring::with_poly(p, k, &poly)
    }

    /// The residue field `F_{p^m}`.
    pub fn field(p: u32, m: usize) -> Result<Ring, RingError> {
        Ring::new(p, m, 1)
    }

    /// `GR(p^k, m)` for an explicit monic integer defining polynomial
    /// (coefficients low degree first, `m = poly.len() - 1`).
    pub fn with_poly(p: u32, k: u32, poly: &[u32]) -> Result<Ring, RingError> {
        if !is_prime(p) || p == 2 {
            return Err(RingError::BadPrime(p));
        }
        if poly.len() < 2 {
            return Err(RingError::BadModulus);
        }
        let m = poly.len() - 1;
        if m > MAX_DEGREE {
            return Err(RingError::BadDegree(m));
        }
        if k == 0 {
            return Err(RingError::LevelOutOfRange(0, 0));
        }
        let modulus = (p as u64).checked_pow(k).filter(|&v| v < MAX_MODULUS);
        let Some(modulus) = modulus else {
            return Err(RingError::TooLarge { p, k });
        };
        let defining: Vec<u32> = poly.iter().map(|&c| c % p).collect();
        if poly[m] != 1 || !irreducible_mod_p(&defining, p) {
            return Err(RingError::BadModulus);
        }
        let mut neg_low = [0u64; MAX_DEGREE];
        for i in 0..m {
            neg_low[i] = (modulus - defining[i] as u64) % modulus;
        }
        let q = (p as u64).pow(m as u32);
        let unit_order = q.pow(k - 1) * (q - 1);
        let mut inner = Inner {
            p,
            m,
            k,
            modulus: modulus as u32,
            defining,
            neg_low,
            sigma_basis: Vec::new(),
            tau_basis: None,
            unit_order,
            residue: None,
        };
        inner.sigma_basis = (0..m)
            .map(|i| {
                let mut e = El::ZERO;
                e.0[i] = 1;
                e
            })
            .collect();
        let ring = Ring(Arc::new(inner));
        let sigma_basis = ring.compute_sigma_basis();
        let ring = Ring(Arc::new(Inner {
            sigma_basis,
            ..ring.take_inner()
        }));
        let tau_basis = m.is_multiple_of(2).then(|| {
            (0..m)
                .map(|i| {
                    let mut e = El::ZERO;
                    e.0[i] = 1;
                    ring.sigma_pow(&e, (m / 2) as u32)
                })
                .collect::<Vec<_>>()
        });
        let residue = if k > 1 { Some(Ring::with_poly(p, 1, poly)?) } else { None };
        Ok(Ring(Arc::new(Inner {
            tau_basis,
            residue,
            ..ring.take_inner()
        })))
    }

    fn take_inner(&self) -> Inner {
        let s = &self.0;
        Inner {
            p: s.p,
            m: s.m,
            k: s.k,
            modulus: s.modulus,
            defining: s.defining.clone(),
            neg_low: s.neg_low,
            sigma_basis: s.sigma_basis.clone(),
            tau_basis: s.tau_basis.clone(),
            unit_order: s.unit_order,
            residue: s.residue.clone(),
        }
    }

    /// Frobenius image of the generator: the root of the defining polynomial
    /// congruent to `z^p`, refined by Newton's iteration.
    fn compute_sigma_basis(&self) -> Vec<El> {
        let m = self.m();
        if m == 1 {
            return vec![self.one()];
        }
        let z = self.gen();
        let f: Vec<El> = self.0.defining.iter().map(|&c| self.from_int(c as i64)).collect();
        let df: Vec<El> = (1..f.len())
            .map(|i| self.mul(&f[i], &self.from_int(i as i64)))
            .collect();
        let eval = |coeffs: &[El], y: &El| {
            let mut acc = El::ZERO;
            for c in coeffs.iter().rev() {
                acc = self.add(&self.mul(&acc, y), c);
            }
            acc
        };
        let mut y = self.pow(&z, self.p() as u64);
        for _ in 0..=self.k() {
            let fy = eval(&f, &y);
            if fy.is_zero() {
                break;
            }
            let step = self.mul(&fy, &self.inv(&eval(&df, &y)).expect("separable modulus"));
            y = self.sub(&y, &step);
        }
        let mut basis = Vec::with_capacity(m);
        let mut acc = self.one();
        for _ in 0..m {
            basis.push(acc);
            acc = self.mul(&acc, &y);
        }
        basis
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn m(&self) -> usize {
        self.0.m
    }
    pub fn k(&self) -> u32 {
        self.0.k
    }
    /// Size of the residue field.
    pub fn q(&self) -> u64 {
        (self.0.p as u64).pow(self.0.m as u32)
    }
    /// `p^k`, the characteristic.
    pub fn modulus(&self) -> u32 {
        self.0.modulus
    }
    /// Number of elements, `p^{km}`.
    pub fn size(&self) -> u64 {
        (self.0.modulus as u64).pow(self.0.m as u32)
    }
    pub fn unit_count(&self) -> u64 {
        self.0.unit_order
    }
    pub fn defining_poly(&self) -> &[u32] {
        &self.0.defining
    }
    pub fn is_field(&self) -> bool {
        self.0.k == 1
    }
    pub fn has_involution(&self) -> bool {
        self.0.tau_basis.is_some()
    }

    /// The same `(p, m, defining poly)` at another level `k'`.
    pub fn at_level(&self, k: u32) -> Result<Ring, RingError> {
        if k == self.k() {
            return Ok(self.clone());
        }
        Ring::with_poly(self.p(), k, &self.0.defining)
    }

    /// The residue field of this ring.
    pub fn residue_field(&self) -> Ring {
        self.0.residue.clone().unwrap_or_else(|| self.clone())
    }

    pub fn zero(&self) -> El {
        El::ZERO
    }
    pub fn one(&self) -> El {
        El::scalar(1)
    }
    /// The class of the variable, a root of the defining polynomial.
    pub fn gen(&self) -> El {
        if self.m() == 1 {
            return self.from_int(-(self.0.defining[0] as i64));
        }
        let mut e = El::ZERO;
        e.0[1] = 1;
        e
    }

    pub fn from_int(&self, v: i64) -> El {
        El::scalar(v.rem_euclid(self.0.modulus as i64) as u32)
    }

    /// Element with the given integer coefficients (reduced), low first.
    pub fn from_coeffs(&self, c: &[i64]) -> El {
        let mut e = El::ZERO;
        for (i, &v) in c.iter().enumerate().take(self.m()) {
            e.0[i] = v.rem_euclid(self.0.modulus as i64) as u32;
        }
        e
    }

    pub fn coeffs<'a>(&self, a: &'a El) -> &'a [u32] {
        &a.0[..self.m()]
    }

    pub fn add(&self, a: &El, b: &El) -> El {
        let md = self.0.modulus;
        let mut r = El::ZERO;
        for i in 0..self.m() {
            let s = a.0[i] + b.0[i];
            r.0[i] = if s >= md { s - md } else { s };
        }
        r
    }

    pub fn sub(&self, a: &El, b: &El) -> El {
        let md = self.0.modulus;
        let mut r = El::ZERO;
        for i in 0..self.m() {
            r.0[i] = if a.0[i] >= b.0[i] { a.0[i] - b.0[i] } else { a.0[i] + md - b.0[i] };
        }
        r
    }

    pub fn neg(&self, a: &El) -> El {
        self.sub(&El::ZERO, a)
    }

    pub fn mul(&self, a: &El, b: &El) -> El {
        let m = self.m();
        let md = self.0.modulus as u64;
        if m == 1 {
            return El::scalar((a.0[0] as u64 * b.0[0] as u64 % md) as u32);
        }
        let mut t = [0u64; 2 * MAX_DEGREE - 1];
        for i in 0..m {
            let ai = a.0[i] as u64;
            if ai == 0 {
                continue;
            }
            for j in 0..m {
                t[i + j] += ai * b.0[j] as u64;
            }
        }
        for d in (m..2 * m - 1).rev() {
            let c = t[d] % md;
            if c == 0 {
                continue;
            }
            for i in 0..m {
                t[d - m + i] += c * self.0.neg_low[i];
            }
        }
        let mut r = El::ZERO;
        for i in 0..m {
            r.0[i] = (t[i] % md) as u32;
        }
        r
    }

    /// Multiplication by an integer.
    pub fn scale(&self, a: &El, c: i64) -> El {
        let md = self.0.modulus as u64;
        let c = c.rem_euclid(md as i64) as u64;
        let mut r = El::ZERO;
        for i in 0..self.m() {
            r.0[i] = (a.0[i] as u64 * c % md) as u32;
        }
        r
    }

    pub fn pow(&self, a: &El, mut e: u64) -> El {
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, a: &El) -> bool {
        a.is_zero()
    }

    pub fn is_one(&self, a: &El) -> bool {
        *a == self.one()
    }

    /// Units are exactly the elements with nonzero reduction mod `p`.
    pub fn is_unit(&self, a: &El) -> bool {
        let p = self.p();
        self.coeffs(a).iter().any(|&c| c % p != 0)
    }

    pub fn inv(&self, a: &El) -> Result<El, RingError> {
        if !self.is_unit(a) {
            return Err(RingError::NonUnit);
        }
        Ok(self.pow(a, self.0.unit_order - 1))
    }

    pub fn valuation(&self, a: &El) -> Valuation {
        let p = self.p();
        let k = self.k();
        let v = self
            .coeffs(a)
            .iter()
            .map(|&c| {
                if c == 0 {
                    return k;
                }
                let mut c = c;
                let mut v = 0;
                while c % p == 0 {
                    c /= p;
                    v += 1;
                }
                v
            })
            .min()
            .unwrap_or(k);
        Valuation(v)
    }

    fn apply_basis(&self, basis: &[El], a: &El) -> El {
        let md = self.0.modulus as u64;
        let mut acc = [0u64; MAX_DEGREE];
        for (i, b) in basis.iter().enumerate() {
            let c = a.0[i] as u64;
            if c == 0 {
                continue;
            }
            for j in 0..self.m() {
                acc[j] += c * b.0[j] as u64;
            }
        }
        let mut r = El::ZERO;
        for j in 0..self.m() {
            r.0[j] = (acc[j] % md) as u32;
        }
        r
    }

    /// The Frobenius automorphism: the unique ring automorphism reducing to
    /// `x -> x^p` on the residue field.
    pub fn sigma(&self, a: &El) -> El {
        if self.m() == 1 {
            return *a;
        }
        self.apply_basis(&self.0.sigma_basis, a)
    }

    pub fn sigma_pow(&self, a: &El, e: u32) -> El {
        let mut r = *a;
        for _ in 0..e % self.m() as u32 {
            r = self.sigma(&r);
        }
        r
    }

    /// `sigma^{m/2}`, the generator of the relative Galois group over the
    /// index-2 subring.
    pub fn tau(&self, a: &El) -> Result<El, RingError> {
        match &self.0.tau_basis {
            Some(b) => Ok(self.apply_basis(b, a)),
            None => Err(RingError::NoInvolution),
        }
    }

    /// Panicking variant of [`Ring::tau`] for code paths that have already
    /// checked [`Ring::has_involution`].
    pub(crate) fn tau_unchecked(&self, a: &El) -> El {
        self.tau(a).expect("ring has an involution")
    }

    /// Image in `target`, which must be the same ring at a level `<= k`.
    pub fn reduce(&self, a: &El, target: &Ring) -> El {
        debug_assert!(target.k() <= self.k() && target.m() == self.m());
        let md = target.0.modulus;
        let mut r = El::ZERO;
        for i in 0..self.m() {
            r.0[i] = a.0[i] % md;
        }
        r
    }

    /// Coefficientwise lift into the same ring at a higher level.
    pub fn lift(&self, a: &El, target: &Ring) -> El {
        debug_assert!(target.k() >= self.k() && target.m() == self.m());
        *a
    }

    /// `a / p^j`, assuming `p^j` divides every coefficient.
    pub fn div_p_pow(&self, a: &El, j: u32) -> El {
        let d = self.p().pow(j);
        let mut r = El::ZERO;
        for i in 0..self.m() {
            debug_assert_eq!(a.0[i] % d, 0);
            r.0[i] = a.0[i] / d;
        }
        r
    }

    pub fn mul_p_pow(&self, a: &El, j: u32) -> El {
        self.scale(a, (self.p() as i64).pow(j))
    }

    /// Enumeration index: base-`p^k` digits of the coefficients.
    pub fn index_of(&self, a: &El) -> u64 {
        let md = self.0.modulus as u64;
        self.coeffs(a).iter().rev().fold(0, |acc, &c| acc * md + c as u64)
    }

    pub fn element_at(&self, mut idx: u64) -> El {
        let md = self.0.modulus as u64;
        let mut e = El::ZERO;
        for i in 0..self.m() {
            e.0[i] = (idx % md) as u32;
            idx /= md;
        }
        e
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = El> + '_ {
        (0..self.size()).map(move |i| self.element_at(i))
    }

    pub fn units(&self) -> impl Iterator<Item = El> + '_ {
        self.elements().filter(move |a| self.is_unit(a))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> El {
        let mut e = El::ZERO;
        for i in 0..self.m() {
            e.0[i] = rng.gen_range(0..self.0.modulus);
        }
        e
    }

    /// Uniform element with coefficients in `[0, p)`: a uniform residue
    /// class representative.
    pub fn random_residue<R: Rng + ?Sized>(&self, rng: &mut R) -> El {
        let mut e = El::ZERO;
        for i in 0..self.m() {
            e.0[i] = rng.gen_range(0..self.p());
        }
        e
    }

    /// Quadratic residuosity in the residue field (`0` counts as a square).
    pub fn is_square(&self, a: &El) -> bool {
        let f = self.residue_field();
        let a = self.reduce(a, &f);
        a.is_zero() || f.is_one(&f.pow(&a, (f.q() - 1) / 2))
    }

    /// The first non-square of the residue field in index order, lifted.
    pub fn nonsquare(&self) -> El {
        let f = self.residue_field();
        let found = f.elements().find(|a| !f.is_square(a));
        found.expect("odd q has non-squares")
    }

    /// A square root in the residue field, by search.
    pub fn sqrt_residue(&self, a: &El) -> Option<El> {
        let f = self.residue_field();
        let a = self.reduce(a, &f);
        let found = f.elements().find(|x| f.mul(x, x) == a);
        found
    }

    /// Elements fixed by `tau`, i.e. the index-2 subring, as a subset of
    /// the residue field enumeration.
    pub fn fixed_subfield(&self) -> Result<Vec<El>, RingError> {
        let f = self.residue_field();
        if !f.has_involution() {
            return Err(RingError::NoInvolution);
        }
        Ok(f.elements().filter(|a| f.tau_unchecked(a) == *a).collect())
    }

    pub fn fmt_el(&self, a: &El) -> String {
        self.coeffs(a)
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_el(&self, s: &str) -> Result<El, RingError> {
        let parts: Result<Vec<i64>, _> = s.split(',').map(|t| t.trim().parse::<i64>()).collect();
        let parts = parts.map_err(|_| RingError::Parse(s.to_string()))?;
        if parts.len() != self.m() {
            return Err(RingError::Parse(s.to_string()));
        }
        Ok(self.from_coeffs(&parts))
    }
}

impl FromStr for Ring {
    type Err = RingError;

    /// Parses `GR(p^k,m)`, e.g. `GR(9,2)`.
    fn from_str(s: &str) -> Result<Ring, RingError> {
        let bad = || RingError::Parse(s.to_string());
        let body = s.trim().strip_prefix("GR(").and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        let (n, m) = body.split_once(',').ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let m: usize = m.trim().parse().map_err(|_| bad())?;
        let p = (2..=n).find(|d| n.is_multiple_of(*d)).ok_or_else(bad)?;
        let mut k = 0;
        let mut t = n;
        while t.is_multiple_of(p) {
            t /= p;
            k += 1;
        }
        if t != 1 {
            return Err(bad());
        }
        Ring::new(p as u32, m, k)
    }
}

/// An element bundled with its ring, for checked arithmetic and the
/// `c0,c1,... @ GR(p^k,m)` text form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GrElem {
    ring: Ring,
    el: El,
}

impl GrElem {
    pub fn new(ring: &Ring, el: El) -> GrElem {
        GrElem { ring: ring.clone(), el }
    }
    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn el(&self) -> El {
        self.el
    }

    fn same(&self, other: &GrElem) -> Result<(), RingError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(RingError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &GrElem) -> Result<GrElem, RingError> {
        self.same(other)?;
        Ok(GrElem::new(&self.ring, self.ring.add(&self.el, &other.el)))
    }
    pub fn checked_sub(&self, other: &GrElem) -> Result<GrElem, RingError> {
        self.same(other)?;
        Ok(GrElem::new(&self.ring, self.ring.sub(&self.el, &other.el)))
    }
    pub fn checked_mul(&self, other: &GrElem) -> Result<GrElem, RingError> {
        self.same(other)?;
        Ok(GrElem::new(&self.ring, self.ring.mul(&self.el, &other.el)))
    }
    pub fn neg(&self) -> GrElem {
        GrElem::new(&self.ring, self.ring.neg(&self.el))
    }
    pub fn inv(&self) -> Result<GrElem, RingError> {
        Ok(GrElem::new(&self.ring, self.ring.inv(&self.el)?))
    }
    pub fn valuation(&self) -> Valuation {
        self.ring.valuation(&self.el)
    }
    pub fn sigma(&self) -> GrElem {
        GrElem::new(&self.ring, self.ring.sigma(&self.el))
    }
    pub fn tau(&self) -> Result<GrElem, RingError> {
        Ok(GrElem::new(&self.ring, self.ring.tau(&self.el)?))
    }
    /// Image under reduction to level `k`.
    pub fn reduce(&self, k: u32) -> Result<GrElem, RingError> {
        if k == 0 || k > self.ring.k() {
            return Err(RingError::LevelOutOfRange(k, self.ring.k()));
        }
        let target = self.ring.at_level(k)?;
        Ok(GrElem::new(&target, self.ring.reduce(&self.el, &target)))
    }
}

impl fmt::Display for GrElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.ring.fmt_el(&self.el), self.ring)
    }
}

impl FromStr for GrElem {
    type Err = RingError;
    fn from_str(s: &str) -> Result<GrElem, RingError> {
        let (el, ctx) = s.split_once('@').ok_or_else(|| RingError::Parse(s.to_string()))?;
        let ring: Ring = ctx.parse()?;
        let el = ring.parse_el(el)?;
        Ok(GrElem::new(&ring, el))
    }
}
