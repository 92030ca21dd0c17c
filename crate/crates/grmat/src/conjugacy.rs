//! Conjugacy-class data for the finite groups and their exact class
//! probabilities, the characteristic-polynomial law for `GL_n(F_q)`, and
//! exact minimal-polynomial statistics.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::char_derivative::WittClass;
use crate::factor::Irreducibles;
use crate::groups::{Family, Sign};
use crate::matrix::{field_rank, Matrix};
use crate::poly::{Poly, PolyError};
use crate::ring::Ring;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConjugacyError {
    #[error("invalid class datum: {0}")]
    InvalidDatum(String),
    #[error("polynomial has a zero root")]
    ZeroRoot,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A partition as weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Partition {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }

    /// Number of parts equal to `i`.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.0.iter().filter(|&&p| p == i).count()
    }

    /// `(i, m_i)` for every part size present, ascending.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in self.0.iter().rev() {
            match out.last_mut() {
                Some((i, m)) if *i == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn dual(&self) -> Partition {
        Partition((1..=self.largest()).map(|j| self.0.iter().filter(|&&p| p >= j).count()).collect())
    }

    /// All partitions of `n` in reverse lexicographic order.
    pub fn all(n: usize) -> Vec<Partition> {
        fn rec(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            for p in (1..=max.min(n)).rev() {
                cur.push(p);
                rec(n - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// One primary component: an irreducible with its partition and, for
/// `x - 1` and `x + 1` in the symplectic and orthogonal families, a sign
/// per decorated part size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub phi: Poly,
    pub partition: Partition,
    pub signs: Vec<(usize, Sign)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjClassDatum {
    pub family: Family,
    pub components: Vec<Component>,
}

impl ConjClassDatum {
    /// `prod phi^{|lambda_phi|}`.
    pub fn char_poly(&self, field: &Ring) -> Poly {
        self.components.iter().fold(Poly::one(field), |acc, c| acc.mul(&c.phi.pow(c.partition.size() as u64)))
    }

    /// `prod phi^{largest part}`.
    pub fn min_poly(&self, field: &Ring) -> Poly {
        self.components.iter().fold(Poly::one(field), |acc, c| acc.mul(&c.phi.pow(c.partition.largest() as u64)))
    }

    pub fn min_degree(&self) -> usize {
        self.components.iter().map(|c| c.phi.deg().unwrap_or(0) * c.partition.largest()).sum()
    }

    pub fn size(&self) -> usize {
        self.components.iter().map(|c| c.phi.deg().unwrap_or(0) * c.partition.size()).sum()
    }

    /// Rational canonical form: companion blocks of `phi^{part}`.
    pub fn representative_gl(&self) -> Matrix {
        let blocks: Vec<Matrix> = self
            .components
            .iter()
            .flat_map(|c| c.partition.parts().iter().map(move |&p| Matrix::companion(&c.phi.pow(p as u64))))
            .collect();
        let refs: Vec<&Matrix> = blocks.iter().collect();
        Matrix::block_diag(&refs)
    }

    /// Canonical text, e.g. `x + 2:(2,1)[1+];...`.
    pub fn canonical(&self) -> String {
        self.components
            .iter()
            .map(|c| {
                let signs: String = c.signs.iter().map(|(i, s)| format!("{i}{s}")).collect::<Vec<_>>().join(",");
                let signs = if signs.is_empty() { String::new() } else { format!("[{signs}]") };
                format!("{}:{}{}", c.phi.fmt_terms(), c.partition, signs)
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// The datum without signs, as `GL` sees it.
    pub fn forget_signs(&self) -> ConjClassDatum {
        ConjClassDatum {
            family: Family::GL,
            components: self.components.iter().map(|c| Component { signs: Vec::new(), ..c.clone() }).collect(),
        }
    }
}

fn pow_big(q: u64, e: usize) -> BigInt {
    num_traits::pow(BigInt::from(q), e)
}

pub fn gl_order(m: usize, q: u64) -> BigInt {
    (1..=m).fold(pow_big(q, m * (m.saturating_sub(1)) / 2), |acc, i| acc * (pow_big(q, i) - 1))
}

/// `|Sp_{m}(F_q)|` for even `m`.
pub fn sp_order(m: usize, q: u64) -> BigInt {
    let r = m / 2;
    (1..=r).fold(pow_big(q, r * r), |acc, i| acc * (pow_big(q, 2 * i) - 1))
}

/// `|O^sign_m(F_q)|`; the sign is irrelevant for odd `m`.
pub fn o_order(m: usize, sign: Sign, q: u64) -> BigInt {
    if m == 0 {
        return BigInt::one();
    }
    let r = m / 2;
    if m % 2 == 1 {
        return (1..=r).fold(2 * pow_big(q, r * r), |acc, i| acc * (pow_big(q, 2 * i) - 1));
    }
    let head = pow_big(q, r) - BigInt::from(sign.as_i32());
    (1..r).fold(2 * pow_big(q, r * (r - 1)) * head, |acc, i| acc * (pow_big(q, 2 * i) - 1))
}

pub fn so_order(m: usize, sign: Sign, q: u64) -> BigInt {
    o_order(m, sign, q) / 2
}

pub fn u_order(m: usize, q: u64) -> BigInt {
    (1..=m).fold(pow_big(q, m * (m.saturating_sub(1)) / 2), |acc, i| {
        let s = if i % 2 == 0 { -1 } else { 1 };
        acc * (pow_big(q, i) + s)
    })
}

/// Order of the finite group named by `family`, with matrix size `dim`.
pub fn group_order(family: Family, dim: usize, sign: Option<Sign>, q: u64) -> BigInt {
    match family {
        Family::GL => gl_order(dim, q),
        Family::SL => gl_order(dim, q) / (q - 1),
        Family::Sp => sp_order(dim, q),
        Family::SO => so_order(dim, sign.unwrap_or(Sign::Plus), q),
        Family::U => u_order(dim, q),
    }
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `prod_{j=1}^m (1 - Q^{-j})`.
fn q_pochhammer(big_q: u64, m: usize) -> BigRational {
    (1..=m).fold(BigRational::one(), |acc, j| {
        let qj = pow_big(big_q, j);
        acc * ratio(qj.clone() - 1, qj)
    })
}

fn deg(phi: &Poly) -> usize {
    phi.deg().unwrap_or(0)
}

fn is_linear_pm(phi: &Poly) -> Option<Sign> {
    let r = phi.ring();
    if deg(phi) != 1 {
        return None;
    }
    let c0 = phi.coeff(0);
    if r.is_one(&r.neg(&c0)) {
        Some(Sign::Plus)
    } else if r.is_one(&c0) {
        Some(Sign::Minus)
    } else {
        None
    }
}

pub fn fulman_prob_gl(datum: &ConjClassDatum) -> Result<BigRational, ConjugacyError> {
    let mut den = BigRational::one();
    for c in &datum.components {
        if c.phi.coeff(0).is_zero() {
            return Err(ConjugacyError::InvalidDatum("x cannot divide the characteristic polynomial".into()));
        }
        let qd = c.phi.ring().q().pow(deg(&c.phi) as u32);
        let s: usize = c.partition.dual().parts().iter().map(|l| l * l).sum();
        let mut term = BigRational::from_integer(pow_big(qd, s));
        for (_, m) in c.partition.multiplicities() {
            term *= q_pochhammer(qd, m);
        }
        den *= term;
    }
    Ok(den.recip())
}

/// Twice `sum_{h<i} h m_h m_i + 1/2 sum_i (i-1) m_i^2`.
fn twice_partition_exponent(lambda: &Partition) -> usize {
    let ms = lambda.multiplicities();
    let mut cross = 0;
    for (a, &(h, mh)) in ms.iter().enumerate() {
        for &(_, mi) in &ms[a + 1..] {
            cross += h * mh * mi;
        }
    }
    let diag: usize = ms.iter().map(|&(i, m)| (i - 1) * m * m).sum();
    2 * cross + diag
}

fn sign_of(c: &Component, i: usize) -> Result<Sign, ConjugacyError> {
    c.signs
        .iter()
        .find(|(j, _)| *j == i)
        .map(|(_, s)| *s)
        .ok_or_else(|| ConjugacyError::InvalidDatum(format!("missing sign for part size {i}")))
}

/// Components grouped into orbits `{phi}` or `{phi, dual(phi)}`, keeping
/// the first member.
fn orbit_leaders(datum: &ConjClassDatum, dual: impl Fn(&Poly) -> Poly) -> Result<Vec<(&Component, bool)>, ConjugacyError> {
    let mut out = Vec::new();
    for c in &datum.components {
        let d = dual(&c.phi);
        if d == c.phi {
            out.push((c, false));
            continue;
        }
        let partner = datum
            .components
            .iter()
            .find(|o| o.phi == d)
            .ok_or_else(|| ConjugacyError::InvalidDatum(format!("{} appears without its dual", c.phi.fmt_terms())))?;
        if partner.partition != c.partition {
            return Err(ConjugacyError::InvalidDatum("dual components need equal partitions".into()));
        }
        if c.phi.sort_key() < d.sort_key() {
            out.push((c, true));
        }
    }
    Ok(out)
}

fn reciprocal(phi: &Poly) -> Poly {
    phi.reciprocal().expect("x does not occur")
}

fn skew_reciprocal(phi: &Poly) -> Poly {
    phi.skew_reciprocal().expect("x does not occur")
}

/// Checks the parity rules on `x - 1`, `x + 1`: the parts of size `odd`
/// parity need even multiplicity and the other parts carry signs.
fn check_signed(c: &Component, constrained_odd: bool) -> Result<(), ConjugacyError> {
    for (i, m) in c.partition.multiplicities() {
        let constrained = (i % 2 == 1) == constrained_odd;
        if constrained && m % 2 == 1 {
            return Err(ConjugacyError::InvalidDatum(format!("part {i} needs even multiplicity")));
        }
        if !constrained {
            sign_of(c, i)?;
        }
    }
    Ok(())
}

/// `(twice the q-exponent, product of group orders)` for the symplectic
/// and orthogonal formulas.
fn classical_terms(datum: &ConjClassDatum, orthogonal: bool) -> Result<(i64, BigInt), ConjugacyError> {
    let mut e2: i64 = 0;
    let mut prod = BigInt::one();
    for (c, paired) in orbit_leaders(datum, reciprocal)? {
        let d = deg(&c.phi);
        let q = c.phi.ring().q();
        let orbit = if paired { 2 } else { 1 };
        e2 += (orbit * d * twice_partition_exponent(&c.partition)) as i64;
        if is_linear_pm(&c.phi).is_some() {
            check_signed(c, !orthogonal)?;
            for (i, m) in c.partition.multiplicities() {
                let odd = i % 2 == 1;
                if odd != orthogonal {
                    // Sp odd part or O even part: the symplectic factor
                    prod *= sp_order(m, q);
                    if orthogonal {
                        e2 -= m as i64;
                    }
                } else {
                    prod *= o_order(m, sign_of(c, i)?, q);
                    if !orthogonal {
                        e2 += m as i64;
                    }
                }
            }
        } else {
            for (_, m) in c.partition.multiplicities() {
                prod *= if paired { gl_order(m, q.pow(d as u32)) } else { u_order(m, q.pow(d as u32 / 2)) };
            }
        }
    }
    Ok((e2, prod))
}

fn finish(e2: i64, prod: BigInt, q: u64) -> BigRational {
    assert!(e2 % 2 == 0, "half-integral exponent survives");
    let e = e2 / 2;
    let qe = pow_big(q, e.unsigned_abs() as usize);
    if e >= 0 {
        ratio(BigInt::one(), qe * prod)
    } else {
        ratio(qe, prod)
    }
}

pub fn fulman_prob_sp(datum: &ConjClassDatum) -> Result<BigRational, ConjugacyError> {
    let q = field_q(datum)?;
    let (e2, prod) = classical_terms(datum, false)?;
    Ok(finish(e2, prod, q))
}

/// Probability of the class in the full orthogonal group that contains it.
pub fn fulman_prob_o(datum: &ConjClassDatum) -> Result<BigRational, ConjugacyError> {
    let q = field_q(datum)?;
    let (e2, prod) = classical_terms(datum, true)?;
    Ok(finish(e2, prod, q))
}

/// Probability in `SO`: zero unless the determinant is one, else twice the
/// orthogonal value.
pub fn fulman_prob_so(datum: &ConjClassDatum) -> Result<BigRational, ConjugacyError> {
    if orthogonal_det_sign(datum) == Sign::Minus {
        return Ok(BigRational::zero());
    }
    Ok(fulman_prob_o(datum)? * BigRational::from_integer(BigInt::from(2)))
}

pub fn fulman_prob_u(datum: &ConjClassDatum) -> Result<BigRational, ConjugacyError> {
    let ring = datum.components.first().map(|c| c.phi.ring().clone());
    let Some(ring) = ring else {
        return Ok(BigRational::one());
    };
    if !ring.has_involution() {
        return Err(ConjugacyError::InvalidDatum("unitary data live over a quadratic extension".into()));
    }
    let q = (ring.p() as u64).pow(ring.m() as u32 / 2);
    let mut e2: i64 = 0;
    let mut prod = BigInt::one();
    for (c, paired) in orbit_leaders(datum, skew_reciprocal)? {
        let d = deg(&c.phi);
        let orbit = if paired { 2 } else { 1 };
        e2 += (orbit * 2 * d * twice_partition_exponent(&c.partition)) as i64;
        for (_, m) in c.partition.multiplicities() {
            prod *= if paired { gl_order(m, q.pow(2 * d as u32)) } else { u_order(m, q.pow(d as u32)) };
        }
    }
    Ok(finish(e2, prod, q))
}

fn field_q(datum: &ConjClassDatum) -> Result<u64, ConjugacyError> {
    datum
        .components
        .first()
        .map(|c| c.phi.ring().q())
        .ok_or_else(|| ConjugacyError::InvalidDatum("empty datum".into()))
}

/// The family's class probability (for SO, within `SO`).
pub fn fulman_prob(datum: &ConjClassDatum) -> Result<BigRational, ConjugacyError> {
    match datum.family {
        Family::GL => fulman_prob_gl(datum),
        Family::Sp => fulman_prob_sp(datum),
        Family::SO => fulman_prob_so(datum),
        Family::U => fulman_prob_u(datum),
        Family::SL => Err(ConjugacyError::InvalidDatum("no class formula for SL".into())),
    }
}

/// `(-1)^{|lambda_{x+1}|}`.
pub fn orthogonal_det_sign(datum: &ConjClassDatum) -> Sign {
    let odd = datum.components.iter().any(|c| is_linear_pm(&c.phi) == Some(Sign::Minus) && c.partition.size() % 2 == 1);
    Sign::from_bool(!odd)
}

/// Witt class of the form restricted to the datum's primary components.
pub fn witt_class_of_datum(datum: &ConjClassDatum, field: &Ring) -> WittClass {
    let mut acc = WittClass::Zero;
    for c in &datum.components {
        let part = if is_linear_pm(&c.phi).is_some() {
            c.signs
                .iter()
                .filter(|(i, _)| i % 2 == 1)
                .map(|&(i, s)| WittClass::of_standard(c.partition.multiplicity(i), s))
                .fold(WittClass::Zero, |a, b| a.add(b, field))
        } else if reciprocal(&c.phi) == c.phi && c.partition.size() % 2 == 1 {
            WittClass::OneMinusDelta
        } else {
            WittClass::Zero
        };
        acc = acc.add(part, field);
    }
    acc
}

/// The `O^sign_n` containing the datum's classes.
pub fn orthogonal_sign_of_datum(datum: &ConjClassDatum, field: &Ring) -> Sign {
    let n = datum.size();
    let cls = witt_class_of_datum(datum, field);
    Sign::from_bool(cls == WittClass::of_standard(n, Sign::Plus))
}

/// An orbit of irreducibles under the family's duality.
#[derive(Clone, Debug)]
struct Orbit {
    members: Vec<Poly>,
    signed: bool,
}

fn orbits(family: Family, field: &Ring, max_deg: usize) -> Result<Vec<Orbit>, ConjugacyError> {
    let table = Irreducibles::shared(field, max_deg.max(1))?;
    let mut out = Vec::new();
    for phi in table.up_to(max_deg) {
        if phi.coeff(0).is_zero() {
            continue;
        }
        let dual = match family {
            Family::GL | Family::SL => phi.clone(),
            Family::Sp | Family::SO => reciprocal(phi),
            Family::U => skew_reciprocal(phi),
        };
        if dual == *phi {
            let signed = matches!(family, Family::Sp | Family::SO) && is_linear_pm(phi).is_some();
            out.push(Orbit { members: vec![phi.clone()], signed });
        } else if phi.sort_key() < dual.sort_key() {
            out.push(Orbit { members: vec![phi.clone(), dual], signed: false });
        }
    }
    Ok(out)
}

fn sign_choices(lambda: &Partition, family: Family) -> Vec<Vec<(usize, Sign)>> {
    let decorated: Vec<usize> = lambda
        .multiplicities()
        .into_iter()
        .map(|(i, _)| i)
        .filter(|i| (i % 2 == 0) == (family == Family::Sp))
        .collect();
    let mut out = vec![Vec::new()];
    for i in decorated {
        out = out
            .into_iter()
            .flat_map(|v: Vec<(usize, Sign)>| {
                [Sign::Plus, Sign::Minus].into_iter().map(move |s| {
                    let mut w = v.clone();
                    w.push((i, s));
                    w
                })
            })
            .collect();
    }
    out
}

fn signed_partition_ok(lambda: &Partition, family: Family) -> bool {
    lambda.multiplicities().iter().all(|&(i, m)| {
        let constrained = (i % 2 == 1) == (family == Family::Sp);
        !constrained || m % 2 == 0
    })
}

/// Every valid datum whose matrices have size `dim` (`2n` for `Sp_{2n}`).
/// For U the polynomials live over `F_{q^2}` (`field` must carry the
/// involution).
pub fn enumerate_data(family: Family, dim: usize, field: &Ring) -> Result<Vec<ConjClassDatum>, ConjugacyError> {
    let orbs = orbits(family, field, dim)?;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    extend_data(family, &orbs, 0, dim, &mut cur, &mut out, &|_, _| true);
    Ok(out)
}

/// Data whose characteristic polynomial is `h`.
pub fn data_with_char(family: Family, h: &Poly) -> Result<Vec<ConjClassDatum>, ConjugacyError> {
    let field = h.ring();
    let n = deg(h);
    if h.coeff(0).is_zero() {
        return Err(ConjugacyError::ZeroRoot);
    }
    let table = Irreducibles::shared(field, (n / 2).max(1))?;
    let exps: BTreeMap<Vec<u64>, (Poly, usize)> = table
        .factor(h)?
        .into_iter()
        .map(|(p, e)| (p.sort_key().1, (p, e as usize)))
        .collect();
    let orbs: Vec<Orbit> = orbits_of_factors(family, &exps)?;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let need = |phi: &Poly, size: usize| exps.get(&phi.sort_key().1).is_some_and(|(_, e)| *e == size);
    extend_data(family, &orbs, 0, n, &mut cur, &mut out, &need);
    Ok(out)
}

fn orbits_of_factors(family: Family, exps: &BTreeMap<Vec<u64>, (Poly, usize)>) -> Result<Vec<Orbit>, ConjugacyError> {
    let mut out = Vec::new();
    for (phi, _) in exps.values() {
        let dual = match family {
            Family::GL | Family::SL => phi.clone(),
            Family::Sp | Family::SO => reciprocal(phi),
            Family::U => skew_reciprocal(phi),
        };
        if dual == *phi {
            let signed = matches!(family, Family::Sp | Family::SO) && is_linear_pm(phi).is_some();
            out.push(Orbit { members: vec![phi.clone()], signed });
        } else if phi.sort_key() < dual.sort_key() {
            if !exps.contains_key(&dual.sort_key().1) {
                return Err(ConjugacyError::InvalidDatum("characteristic polynomial lacks the family symmetry".into()));
            }
            out.push(Orbit { members: vec![phi.clone(), dual], signed: false });
        }
    }
    Ok(out)
}

fn extend_data(
    family: Family,
    orbs: &[Orbit],
    idx: usize,
    remaining: usize,
    cur: &mut Vec<Component>,
    out: &mut Vec<ConjClassDatum>,
    accept: &dyn Fn(&Poly, usize) -> bool,
) {
    if remaining == 0 {
        let mut components = cur.clone();
        components.sort_by_key(|c| c.phi.sort_key());
        out.push(ConjClassDatum { family, components });
        return;
    }
    if idx == orbs.len() {
        return;
    }
    let orb = &orbs[idx];
    let weight = deg(&orb.members[0]) * orb.members.len();
    extend_data(family, orbs, idx + 1, remaining, cur, out, accept);
    for s in 1..=remaining / weight {
        if !accept(&orb.members[0], s) {
            continue;
        }
        for lambda in Partition::all(s) {
            let choices = if orb.signed {
                if !signed_partition_ok(&lambda, family) {
                    continue;
                }
                sign_choices(&lambda, family)
            } else {
                vec![Vec::new()]
            };
            for signs in choices {
                for phi in &orb.members {
                    cur.push(Component { phi: phi.clone(), partition: lambda.clone(), signs: signs.clone() });
                }
                extend_data(family, orbs, idx + 1, remaining - s * weight, cur, out, accept);
                for _ in &orb.members {
                    cur.pop();
                }
            }
        }
    }
}

/// Data of `SO^sign_n`: orthogonal data of that sign with determinant one.
pub fn so_data(n: usize, sign: Sign, field: &Ring) -> Result<Vec<ConjClassDatum>, ConjugacyError> {
    Ok(enumerate_data(Family::SO, n, field)?
        .into_iter()
        .filter(|d| orthogonal_det_sign(d) == Sign::Plus && orthogonal_sign_of_datum(d, field) == sign)
        .collect())
}

/// `phi(M)` by Horner's rule.
fn eval_at(phi: &Poly, m: &Matrix) -> Matrix {
    let r = m.ring();
    let n = m.n();
    phi.coeffs()
        .iter()
        .rev()
        .fold(Matrix::zero(r, n, n), |acc, c| acc.mul(m).add(&Matrix::scalar(r, n, *c)))
}

/// The `GL_n(F_q)` class of `M`: partitions from the rank profile of
/// `phi(M)^j`.
pub fn class_of_matrix_gl(m: &Matrix) -> Result<ConjClassDatum, ConjugacyError> {
    let field = m.ring().clone();
    let n = m.n();
    let c = m.char_poly();
    if c.coeff(0).is_zero() {
        return Err(ConjugacyError::ZeroRoot);
    }
    let table = Irreducibles::shared(&field, (n / 2).max(1))?;
    let mut components = Vec::new();
    for (phi, e) in table.factor(&c)? {
        let d = deg(&phi);
        let base = eval_at(&phi, m);
        let mut power = Matrix::identity(&field, n);
        let mut prev_rank = n;
        let mut dual_parts = Vec::new();
        for _ in 0..e {
            power = power.mul(&base);
            let rk = field_rank(&field, &power);
            if rk == prev_rank {
                break;
            }
            dual_parts.push((prev_rank - rk) / d);
            prev_rank = rk;
        }
        let partition = Partition::new(dual_parts).dual();
        components.push(Component { phi, partition, signs: Vec::new() });
    }
    components.sort_by_key(|c| c.phi.sort_key());
    Ok(ConjClassDatum { family: Family::GL, components })
}

/// `P(char M = f)` for `M` uniform in `GL_n(F_q)`:
/// `prod q^{d_i e_i (e_i - 1)} / |GL_{e_i}(F_{q^{d_i}})|`.
pub fn charpoly_prob_gl(f: &Poly) -> Result<BigRational, ConjugacyError> {
    if f.coeff(0).is_zero() {
        return Err(ConjugacyError::ZeroRoot);
    }
    let field = f.ring();
    let n = deg(f);
    let table = Irreducibles::shared(field, (n / 2).max(1))?;
    let q = field.q();
    let mut out = BigRational::one();
    for (phi, e) in table.factor(&f.monic()?)? {
        let d = deg(&phi);
        let e = e as usize;
        out *= ratio(pow_big(q, d * e * (e - 1)), gl_order(e, q.pow(d as u32)));
    }
    Ok(out)
}

/// `deg min -> P(deg min = m and char = h)` in the given family.
pub fn min_poly_joint(family: Family, h: &Poly) -> Result<BTreeMap<usize, BigRational>, ConjugacyError> {
    let mut out: BTreeMap<usize, BigRational> = BTreeMap::new();
    for d in data_with_char(family, h)? {
        let p = fulman_prob(&d)?;
        *out.entry(d.min_degree()).or_insert_with(BigRational::zero) += p;
    }
    Ok(out)
}

/// Exact `P(deg min <= bound)` in `GL_n(F_q)`.
pub fn small_min_poly_mass(n: usize, field: &Ring, bound: usize) -> Result<BigRational, ConjugacyError> {
    let mut total = BigRational::zero();
    for d in enumerate_data(Family::GL, n, field)? {
        if d.min_degree() <= bound {
            total += fulman_prob_gl(&d)?;
        }
    }
    Ok(total)
}

/// One line of the class table: canonical datum and exact probability.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassRow {
    pub datum: String,
    pub numerator: String,
    pub denominator: String,
}

/// Every class datum of the group with its probability. For SO the data
/// are those of `SO^sign_n`.
pub fn class_table(family: Family, dim: usize, sign: Option<Sign>, field: &Ring) -> Result<Vec<ClassRow>, ConjugacyError> {
    let data = match family {
        Family::SO => so_data(dim, sign.unwrap_or(Sign::Plus), field)?,
        _ => enumerate_data(family, dim, field)?,
    };
    data.iter()
        .map(|d| {
            let p = fulman_prob(d)?;
            Ok(ClassRow { datum: d.canonical(), numerator: p.numer().to_string(), denominator: p.denom().to_string() })
        })
        .collect()
}
