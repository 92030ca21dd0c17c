//! The five matrix families over `F_q` and `GR(p^k)`: preserved forms,
//! membership, Lie algebras, exact uniform sampling over the residue field
//! and Haar sampling at higher levels through a lifting section.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::matrix::{field_rank, Matrix, MatrixError};
use crate::ring::{El, Ring, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("a sign only applies to the orthogonal family")]
    SignNotApplicable,
    #[error("matrix is not a member of {0}")]
    NotMember(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("invalid size: {0}")]
    Size(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    GL,
    SL,
    Sp,
    SO,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bool(plus: bool) -> Sign {
        if plus { Sign::Plus } else { Sign::Minus }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn mul(self, other: Sign) -> Sign {
        Sign::from_bool(self == other)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// A family name as written on the command line: `gl|sl|sp|so|so+|so-|u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyName(pub Family, pub Option<Sign>);

impl FromStr for FamilyName {
    type Err = GroupError;
    fn from_str(s: &str) -> Result<FamilyName, GroupError> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "gl" => FamilyName(Family::GL, None),
            "sl" => FamilyName(Family::SL, None),
            "sp" => FamilyName(Family::Sp, None),
            "so" => FamilyName(Family::SO, None),
            "so+" => FamilyName(Family::SO, Some(Sign::Plus)),
            "so-" => FamilyName(Family::SO, Some(Sign::Minus)),
            "u" => FamilyName(Family::U, None),
            _ => return Err(GroupError::UnknownFamily(s.into())),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::GL => "gl",
            Family::SL => "sl",
            Family::Sp => "sp",
            Family::SO => "so",
            Family::U => "u",
        })
    }
}

/// `χ₂(det K · (-1)^{[n/2]})` for a symmetric form over a field.
pub fn witt_sign(form: &Matrix) -> Sign {
    let field = form.ring().residue_field();
    let k = form.reduce(&field);
    let n = k.n();
    let mut d = k.det();
    if (n / 2) % 2 == 1 {
        d = field.neg(&d);
    }
    Sign::from_bool(field.is_square(&d))
}

/// Lift of a non-square of the residue field.
pub fn nonsquare(ring: &Ring) -> El {
    let f = ring.residue_field();
    f.lift(&f.nonsquare(), ring)
}

/// The preserved form: `Ω_n` for Sp, a standard symmetric form for SO and
/// the identity (Hermitian) for U. `n` is the family size (Sp is `2n x 2n`).
pub fn standard_form(family: Family, n: usize, sign: Option<Sign>, ring: &Ring) -> Result<Matrix, GroupError> {
    match family {
        Family::GL | Family::SL => Err(GroupError::SignNotApplicable),
        Family::Sp | Family::U if sign.is_some() => Err(GroupError::SignNotApplicable),
        Family::Sp => {
            let mut m = Matrix::zero(ring, 2 * n, 2 * n);
            m.set_block(0, n, &Matrix::identity(ring, n));
            m.set_block(n, 0, &Matrix::identity(ring, n).neg());
            Ok(m)
        }
        Family::U => Ok(Matrix::identity(ring, n)),
        Family::SO => {
            let sign = sign.unwrap_or_else(|| default_orthogonal_sign(ring, n));
            Ok(symmetric_form(ring, n, sign))
        }
    }
}

/// The sign realized by the identity form, i.e. by `M M^t = I`.
pub fn default_orthogonal_sign(ring: &Ring, n: usize) -> Sign {
    witt_sign(&Matrix::identity(&ring.residue_field(), n))
}

/// `K_1, K_δ` (odd `n`) or `K_0, K_{1,-δ}` (even `n`).
pub fn symmetric_form(ring: &Ring, n: usize, sign: Sign) -> Matrix {
    let delta = nonsquare(ring);
    let mut k = Matrix::zero(ring, n, n);
    if n % 2 == 1 {
        let m = n / 2;
        let lam = Matrix::anti_identity(ring, m);
        k.set_block(0, m + 1, &lam);
        k.set_block(m + 1, 0, &lam);
        k.set(m, m, if sign == Sign::Plus { ring.one() } else { delta });
    } else if sign == Sign::Plus {
        k = Matrix::anti_identity(ring, n);
    } else {
        let m = n / 2;
        let lam = Matrix::anti_identity(ring, m - 1);
        k.set_block(0, m + 1, &lam);
        k.set_block(m + 1, 0, &lam);
        k.set(m - 1, m - 1, ring.one());
        k.set(m, m, ring.neg(&delta));
    }
    k
}

/// A family together with its size, coefficient ring and preserved form.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    family: Family,
    n: usize,
    base_m: usize,
    sign: Option<Sign>,
    levels: Vec<Ring>,
    forms: Vec<Option<Matrix>>,
}

impl GroupSpec {
    /// `family` of size `n` over `GR(p^k, m)` (entries in `GR(p^k, 2m)` for
    /// the unitary family). For SO a missing sign means the type of the
    /// identity form.
    pub fn new(family: Family, n: usize, p: u32, m: usize, k: u32, sign: Option<Sign>) -> Result<GroupSpec, GroupError> {
        if n == 0 {
            return Err(GroupError::Size("size must be positive".into()));
        }
        if sign.is_some() && family != Family::SO {
            return Err(GroupError::SignNotApplicable);
        }
        if family == Family::SO && n < 2 {
            return Err(GroupError::Size("SO needs n >= 2".into()));
        }
        let entry_m = if family == Family::U { 2 * m } else { m };
        let top = Ring::new(p, entry_m, k)?;
        let levels: Vec<Ring> = (1..=k).map(|j| top.at_level(j)).collect::<Result<_, _>>()?;
        let sign = match family {
            Family::SO => Some(sign.unwrap_or_else(|| default_orthogonal_sign(&top, n))),
            _ => None,
        };
        let forms = levels
            .iter()
            .map(|r| match family {
                Family::GL | Family::SL => Ok(None),
                _ => standard_form(family, n, sign, r).map(Some),
            })
            .collect::<Result<_, _>>()?;
        Ok(GroupSpec { family, n, base_m: m, sign, levels, forms })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Family size parameter (`Sp_{2n}` has `n` here).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        if self.family == Family::Sp { 2 * self.n } else { self.n }
    }

    pub fn sign(&self) -> Option<Sign> {
        self.sign
    }

    pub fn p(&self) -> u32 {
        self.ring().p()
    }

    pub fn k(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Degree of the base field `F_q` over `F_p`.
    pub fn base_m(&self) -> usize {
        self.base_m
    }

    /// `q = p^m` of the base field.
    pub fn q(&self) -> u64 {
        (self.p() as u64).pow(self.base_m as u32)
    }

    /// Entry ring at the top level.
    pub fn ring(&self) -> &Ring {
        self.levels.last().expect("at least one level")
    }

    pub fn ring_at(&self, level: u32) -> &Ring {
        &self.levels[level as usize - 1]
    }

    pub fn field(&self) -> &Ring {
        &self.levels[0]
    }

    pub fn form_at(&self, level: u32) -> Option<&Matrix> {
        self.forms[level as usize - 1].as_ref()
    }

    /// Same family and form at level `k`.
    pub fn at_level(&self, k: u32) -> Result<GroupSpec, GroupError> {
        if k == 0 || k > self.k() {
            let top = self.ring();
            let ring = Ring::new(top.p(), top.m(), k)?;
            return GroupSpec::new(self.family, self.n, ring.p(), self.base_m, k, self.sign);
        }
        Ok(GroupSpec {
            family: self.family,
            n: self.n,
            base_m: self.base_m,
            sign: self.sign,
            levels: self.levels[..k as usize].to_vec(),
            forms: self.forms[..k as usize].to_vec(),
        })
    }

    pub fn label(&self) -> String {
        let sign = self.sign.map(|s| s.to_string()).unwrap_or_default();
        format!("{}{}_{}(GR({}^{},{}))", self.family, sign, self.dim(), self.p(), self.k(), self.base_m)
    }

    pub fn is_member(&self, m: &Matrix) -> bool {
        let level = m.ring().k();
        if m.rows() != self.dim() || m.cols() != self.dim() || level > self.k() || *m.ring() != self.levels[level as usize - 1] {
            return false;
        }
        let r = m.ring();
        let det = m.det();
        if !r.is_unit(&det) {
            return false;
        }
        match self.family {
            Family::GL => true,
            Family::SL => r.is_one(&det),
            Family::Sp => {
                let f = self.form_at(level).expect("form");
                m.transpose().mul(f).mul(m) == *f
            }
            Family::SO => {
                let f = self.form_at(level).expect("form");
                r.is_one(&det) && m.transpose().mul(f).mul(m) == *f
            }
            Family::U => m.mul(&m.star().expect("involution")) == Matrix::identity(r, self.dim()),
        }
    }

    pub fn lie_algebra(&self) -> LieAlgebra {
        LieAlgebra::new(self)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The Lie algebra over the residue field, stored as an `F_p`-basis.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    field: Ring,
    n: usize,
    base_m: usize,
    basis: Vec<Matrix>,
}

impl LieAlgebra {
    fn new(spec: &GroupSpec) -> LieAlgebra {
        let field = spec.field().clone();
        let n = spec.dim();
        let form = spec.form_at(1).cloned();
        let family = spec.family;
        let cond = linalg::matrix_of(&field, n * n, |entries| {
            let x = Matrix::from_entries(&field, n, n, entries.to_vec());
            match family {
                Family::GL => Vec::new(),
                Family::SL => vec![x.trace()],
                Family::Sp | Family::SO => {
                    let f = form.as_ref().expect("form");
                    f.mul(&x).add(&x.transpose().mul(f)).entries().to_vec()
                }
                Family::U => x.add(&x.star().expect("involution")).entries().to_vec(),
            }
        });
        let ker = if cond.is_empty() {
            (0..n * n * field.m())
                .map(|i| {
                    let mut v = vec![0; n * n * field.m()];
                    v[i] = 1;
                    v
                })
                .collect()
        } else {
            linalg::kernel(&cond, n * n * field.m(), field.p())
        };
        let basis = ker
            .iter()
            .map(|v| Matrix::from_entries(&field, n, n, linalg::els_of(&field, v)))
            .collect();
        LieAlgebra { field, n, base_m: spec.base_m, basis }
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    /// Dimension over `F_q`.
    pub fn dim(&self) -> usize {
        self.basis.len() / self.base_m
    }

    pub fn dim_fp(&self) -> usize {
        self.basis.len()
    }

    pub fn size(&self) -> u128 {
        (self.field.p() as u128).pow(self.basis.len() as u32)
    }

    pub fn combination(&self, coeffs: &[u32]) -> Matrix {
        let f = &self.field;
        let mut acc = Matrix::zero(f, self.n, self.n);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            if c != 0 {
                acc = acc.add(&b.scale(&f.from_int(c as i64)));
            }
        }
        acc
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let p = self.field.p();
        let c: Vec<u32> = (0..self.basis.len()).map(|_| rng.gen_range(0..p)).collect();
        self.combination(&c)
    }

    /// Every element, in a fixed order.
    pub fn elements(&self) -> impl Iterator<Item = Matrix> + '_ {
        let p = self.field.p() as u128;
        let d = self.basis.len();
        (0..self.size()).map(move |mut idx| {
            let c: Vec<u32> = (0..d)
                .map(|_| {
                    let v = (idx % p) as u32;
                    idx /= p;
                    v
                })
                .collect();
            self.combination(&c)
        })
    }

    pub fn contains(&self, x: &Matrix) -> bool {
        let p = self.field.p();
        let ambient = self.n * self.n * self.field.m();
        let vecs: Vec<Vec<u32>> = self.basis.iter().map(|b| linalg::coords_of(&self.field, b.entries())).collect();
        linalg::Subspace::span(p, ambient, &vecs).contains(&linalg::coords_of(&self.field, x.entries()))
    }
}

/// Bilinear (or Hermitian) frame data: columns `m_i` must satisfy
/// `theta(m_i)^t F m_j = F_ij`.
struct Frame<'a> {
    field: &'a Ring,
    form: Matrix,
    hermitian: bool,
}

impl Frame<'_> {
    fn pair(&self, u: &[El], v: &[El]) -> El {
        let f = self.field;
        let fv = self.form.mul_vec(v);
        u.iter().zip(&fv).fold(El::ZERO, |acc, (a, b)| {
            let a = if self.hermitian { f.tau_unchecked(a) } else { *a };
            f.add(&acc, &f.mul(&a, b))
        })
    }

    /// Affine space of candidates for column `j`: `(x0, kernel)` in `F_p`
    /// coordinates.
    fn candidates(&self, cols: &[Vec<El>]) -> (Vec<u32>, Vec<Vec<u32>>) {
        let f = self.field;
        let n = self.form.n();
        let j = cols.len();
        if j == 0 {
            let dim = n * f.m();
            let ker = (0..dim)
                .map(|i| {
                    let mut v = vec![0; dim];
                    v[i] = 1;
                    v
                })
                .collect();
            return (vec![0; dim], ker);
        }
        let a = linalg::matrix_of(f, n, |v| cols.iter().map(|c| self.pair(c, v)).collect());
        let rhs: Vec<El> = (0..j).map(|i| self.form.get(i, j)).collect();
        linalg::solve_affine(&a, &linalg::coords_of(f, &rhs), n * f.m(), f.p()).expect("Witt extension exists")
    }

    fn accepts(&self, cols: &[Vec<El>], v: &[El]) -> bool {
        let j = cols.len();
        if self.pair(v, v) != self.form.get(j, j) {
            return false;
        }
        let n = self.form.n();
        let mut m = Matrix::zero(self.field, j + 1, n);
        for (i, c) in cols.iter().chain(std::iter::once(&v.to_vec())).enumerate() {
            for (t, e) in c.iter().enumerate() {
                m.set(i, t, *e);
            }
        }
        field_rank(self.field, &m) == j + 1
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let f = self.field;
        let n = self.form.n();
        let mut cols: Vec<Vec<El>> = Vec::with_capacity(n);
        while cols.len() < n {
            let (x0, ker) = self.candidates(&cols);
            loop {
                let coeffs: Vec<u32> = (0..ker.len()).map(|_| rng.gen_range(0..f.p())).collect();
                let mut x = linalg::combine(&ker, &coeffs, f.p());
                if x.is_empty() {
                    x = vec![0; x0.len()];
                }
                for (a, b) in x.iter_mut().zip(&x0) {
                    *a = (*a + b) % f.p();
                }
                let v = linalg::els_of(f, &x);
                if self.accepts(&cols, &v) {
                    cols.push(v);
                    break;
                }
            }
        }
        Matrix::from_fn(f, n, n, |i, j| cols[j][i])
    }

    fn enumerate(&self, out: &mut Vec<Matrix>, cols: &mut Vec<Vec<El>>, limit: usize) -> Result<(), GroupError> {
        let f = self.field;
        let n = self.form.n();
        if cols.len() == n {
            if out.len() >= limit {
                return Err(GroupError::BoundExceeded(format!("more than {limit} elements")));
            }
            out.push(Matrix::from_fn(f, n, n, |i, j| cols[j][i]));
            return Ok(());
        }
        let (x0, ker) = self.candidates(cols);
        let space = linalg::Subspace::span(f.p(), x0.len(), &ker);
        let pts = (f.p() as u128).pow(space.dim() as u32);
        if pts > 10 * limit as u128 + 1000 {
            return Err(GroupError::BoundExceeded(format!("{pts} candidate columns")));
        }
        for idx in 0..pts {
            let mut rest = idx;
            let coeffs: Vec<u32> = (0..space.dim())
                .map(|_| {
                    let c = (rest % f.p() as u128) as u32;
                    rest /= f.p() as u128;
                    c
                })
                .collect();
            let mut x = linalg::combine(space.basis(), &coeffs, f.p());
            if x.is_empty() {
                x = vec![0; x0.len()];
            }
            for (a, b) in x.iter_mut().zip(&x0) {
                *a = (*a + b) % f.p();
            }
            let v = linalg::els_of(f, &x);
            if self.accepts(cols, &v) {
                cols.push(v);
                self.enumerate(out, cols, limit)?;
                cols.pop();
            }
        }
        Ok(())
    }
}

fn frame_of(spec: &GroupSpec) -> Option<Frame<'_>> {
    match spec.family {
        Family::GL | Family::SL => None,
        Family::U => Some(Frame { field: spec.field(), form: Matrix::identity(spec.field(), spec.dim()), hermitian: true }),
        _ => Some(Frame { field: spec.field(), form: spec.form_at(1).expect("form").clone(), hermitian: false }),
    }
}

/// An exactly uniform element of `G(F_q)`.
pub fn sample_fq<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> Matrix {
    let f = spec.field();
    let n = spec.dim();
    match spec.family {
        Family::GL | Family::SL => {
            let m = loop {
                let m = Matrix::from_fn(f, n, n, |_, _| f.random(rng));
                if !m.det().is_zero() {
                    break m;
                }
            };
            if spec.family == Family::GL {
                m
            } else {
                scale_first_row(&m, &f.inv(&m.det()).expect("unit"))
            }
        }
        _ => {
            let frame = frame_of(spec).expect("form family");
            loop {
                let m = frame.sample(rng);
                if spec.family != Family::SO || f.is_one(&m.det()) {
                    break m;
                }
            }
        }
    }
}

fn scale_first_row(m: &Matrix, s: &El) -> Matrix {
    let r = m.ring();
    let mut out = m.clone();
    for j in 0..m.cols() {
        out.set(0, j, r.mul(&m.get(0, j), s));
    }
    out
}

/// Every element of `G(F_q)`, failing past `limit`.
pub fn enumerate_fq(spec: &GroupSpec, limit: usize) -> Result<Vec<Matrix>, GroupError> {
    let f = spec.field();
    let n = spec.dim();
    match spec.family {
        Family::GL | Family::SL => {
            let total = (f.size() as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
            if total > 50 * limit as u128 + 10_000 {
                return Err(GroupError::BoundExceeded(format!("{total} matrices to scan")));
            }
            let mut out = Vec::new();
            for idx in 0..total {
                let mut rest = idx;
                let m = Matrix::from_fn(f, n, n, |_, _| {
                    let e = f.element_at((rest % f.size() as u128) as u64);
                    rest /= f.size() as u128;
                    e
                });
                let d = m.det();
                let keep = if spec.family == Family::GL { !d.is_zero() } else { f.is_one(&d) };
                if keep {
                    if out.len() >= limit {
                        return Err(GroupError::BoundExceeded(format!("more than {limit} elements")));
                    }
                    out.push(m);
                }
            }
            Ok(out)
        }
        _ => {
            let frame = frame_of(spec).expect("form family");
            let mut out = Vec::new();
            frame.enumerate(&mut out, &mut Vec::new(), if spec.family == Family::SO { 2 * limit } else { limit })?;
            if spec.family == Family::SO {
                out.retain(|m| f.is_one(&m.det()));
            }
            if out.len() > limit {
                return Err(GroupError::BoundExceeded(format!("more than {limit} elements")));
            }
            Ok(out)
        }
    }
}

/// Choice of deterministic lifting section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    #[default]
    Standard,
    /// The standard section followed by a fixed, input-dependent Lie-algebra
    /// twist; any deterministic section gives the same distributions.
    Perturbed,
}

/// A member at level `to_level` reducing to `m` (a member at
/// `to_level - 1`).
pub fn lift_section(spec: &GroupSpec, m: &Matrix, to_level: u32, section: Section, lie: &LieAlgebra) -> Result<Matrix, GroupError> {
    let lower = to_level - 1;
    if lower == 0 || to_level > spec.k() || !spec.is_member(m) || m.ring().k() != lower {
        return Err(GroupError::NotMember(spec.label()));
    }
    let r = spec.ring_at(to_level);
    let j = lower;
    let n = spec.dim();
    let lifted = m.lift(r);
    let mut out = match spec.family {
        Family::GL => lifted,
        Family::SL => scale_first_row(&lifted, &r.inv(&lifted.det())?),
        Family::Sp | Family::SO | Family::U => {
            let (defect, form_inv) = match spec.family {
                Family::U => (lifted.star()?.mul(&lifted).sub(&Matrix::identity(r, n)), Matrix::identity(r, n)),
                _ => {
                    let f = spec.form_at(to_level).expect("form");
                    (lifted.transpose().mul(f).mul(&lifted).sub(f), f.inverse()?)
                }
            };
            let e = defect.map(|a| r.div_p_pow(a, j));
            let half = r.inv(&r.from_int(2))?;
            let c = form_inv.mul(&e).scale(&r.neg(&half));
            lifted.mul(&Matrix::identity(r, n).add(&c.map(|a| r.mul_p_pow(a, j))))
        }
    };
    if section == Section::Perturbed {
        let twist = perturbation(&out, lie);
        let step = Matrix::identity(r, n).add(&twist.lift(r).map(|a| r.mul_p_pow(a, j)));
        out = out.mul(&step);
    }
    debug_assert!(spec.is_member(&out));
    Ok(out)
}

fn perturbation(m: &Matrix, lie: &LieAlgebra) -> Matrix {
    let field = &lie.field;
    let reduced = m.reduce(field);
    let seed: u64 = reduced
        .entries()
        .iter()
        .enumerate()
        .map(|(t, a)| field.index_of(a).wrapping_mul(t as u64 * 2 + 1))
        .fold(0u64, |acc, v| acc.wrapping_mul(31).wrapping_add(v));
    let coeffs: Vec<u32> = (0..lie.basis.len())
        .map(|i| ((seed.wrapping_add(i as u64 * 7919)) % field.p() as u64) as u32)
        .collect();
    lie.combination(&coeffs)
}

/// `m (I + p^j a1)` at level `j + 1`, with `a1` over the residue field.
pub fn twist(m: &Matrix, a1: &Matrix, j: u32) -> Matrix {
    let r = m.ring();
    let step = Matrix::identity(r, m.n()).add(&a1.lift(r).map(|a| r.mul_p_pow(a, j)));
    m.mul(&step)
}

/// Haar-uniform element of `G(GR(p^k))`: uniform at level 1, then at each
/// level the section image times a uniform Lie-algebra step.
pub fn sample_haar<R: Rng + ?Sized>(spec: &GroupSpec, lie: &LieAlgebra, section: Section, rng: &mut R) -> Matrix {
    let mut m = sample_fq(spec, rng);
    for level in 2..=spec.k() {
        m = lift_section(spec, &m, level, section, lie).expect("member at previous level");
        m = twist(&m, &lie.random(rng), level - 1);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hyperbolic_plane_form() {
        let r = Ring::field(3, 1).unwrap();
        let k = standard_form(Family::SO, 2, Some(Sign::Plus), &r).unwrap();
        assert_eq!(k, Matrix::from_ints(&r, &[&[0, 1], &[1, 0]]));
        let om = standard_form(Family::Sp, 1, None, &r).unwrap();
        assert_eq!(om, Matrix::from_ints(&r, &[&[0, 1], &[-1, 0]]));
        assert!(standard_form(Family::Sp, 1, Some(Sign::Plus), &r).is_err());
    }

    #[test]
    fn standard_forms_have_their_type() {
        for (p, m) in [(3, 1), (5, 1), (3, 2), (7, 1)] {
            let r = Ring::field(p, m).unwrap();
            for n in 2..=5 {
                for s in [Sign::Plus, Sign::Minus] {
                    assert_eq!(witt_sign(&symmetric_form(&r, n, s)), s, "p={p} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn membership_basics() {
        let spec = GroupSpec::new(Family::SL, 2, 3, 1, 1, None).unwrap();
        let r = spec.field();
        assert!(spec.is_member(&Matrix::identity(r, 2)));
        assert!(!spec.is_member(&Matrix::from_ints(r, &[&[1, 0], &[0, 2]])));
        for fam in [Family::GL, Family::Sp, Family::SO, Family::U] {
            let s = GroupSpec::new(fam, 2, 3, 1, 2, None).unwrap();
            assert!(s.is_member(&Matrix::identity(s.ring(), s.dim())));
        }
    }

    #[test]
    fn lie_dimensions() {
        let cases = [
            (Family::GL, 3, 9),
            (Family::SL, 2, 3),
            (Family::Sp, 1, 3),
            (Family::Sp, 2, 10),
            (Family::SO, 3, 3),
            (Family::SO, 4, 6),
            (Family::U, 2, 4),
        ];
        for (fam, n, d) in cases {
            let s = GroupSpec::new(fam, n, 3, 1, 1, None).unwrap();
            assert_eq!(s.lie_algebra().dim(), d, "{fam} {n}");
        }
    }

    #[test]
    fn orthogonal_lie_algebra_is_anti_symmetric_across_anti_diagonal() {
        let s = GroupSpec::new(Family::SO, 3, 3, 1, 1, Some(Sign::Plus)).unwrap();
        for b in s.lie_algebra().basis() {
            assert_eq!(b.anti_transpose(), b.neg());
        }
    }

    #[test]
    fn small_group_orders() {
        let cases = [
            (Family::SL, 2, None, 24),
            (Family::Sp, 1, None, 24),
            (Family::SO, 2, Some(Sign::Plus), 2),
            (Family::SO, 2, Some(Sign::Minus), 4),
            (Family::SO, 3, Some(Sign::Plus), 24),
            (Family::U, 1, None, 4),
            (Family::GL, 1, None, 2),
        ];
        for (fam, n, s, order) in cases {
            let spec = GroupSpec::new(fam, n, 3, 1, 1, s).unwrap();
            let all = enumerate_fq(&spec, 1000).unwrap();
            assert_eq!(all.len(), order, "{fam} {n}");
            assert!(all.iter().all(|m| spec.is_member(m)));
        }
    }

    #[test]
    fn samples_are_members_and_lifts_reduce() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for fam in [Family::GL, Family::SL, Family::Sp, Family::SO, Family::U] {
            let spec = GroupSpec::new(fam, 2, 3, 1, 3, None).unwrap();
            let lie = spec.lie_algebra();
            for section in [Section::Standard, Section::Perturbed] {
                for _ in 0..10 {
                    let m = sample_haar(&spec, &lie, section, &mut rng);
                    assert!(spec.is_member(&m), "{fam}");
                    assert!(spec.is_member(&m.reduce(spec.field())));
                }
            }
            let a = sample_fq(&spec, &mut rng);
            let lifted = lift_section(&spec, &a, 2, Section::Standard, &lie).unwrap();
            assert_eq!(lifted.reduce(spec.field()), a);
        }
    }

    #[test]
    fn identity_lifts_to_identity() {
        let spec = GroupSpec::new(Family::Sp, 2, 3, 1, 2, None).unwrap();
        let lie = spec.lie_algebra();
        let id = Matrix::identity(spec.field(), 4);
        assert_eq!(lift_section(&spec, &id, 2, Section::Standard, &lie).unwrap(), Matrix::identity(spec.ring(), 4));
    }
}
