//! The first-order variation of the characteristic polynomial along a
//! group's Lie algebra, its predicted image, and explicit primary-block
//! representatives with closed-form adjugates.

use serde::Serialize;
use thiserror::Error;

use crate::groups::{standard_form, symmetric_form, witt_sign, Family, GroupError, GroupSpec, LieAlgebra, Sign};
use crate::linalg::{self, Subspace};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::ring::{El, Ring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivativeError {
    #[error("block constraint violated: {0}")]
    Constraint(String),
    #[error("no congruence between the forms")]
    NoCongruence,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// `A1 -> sum_j tr(B_j A0 A1) x^j` with `Adj(xI - A0) = sum_j B_j x^j`,
/// tabulated on the Lie-algebra basis.
#[derive(Clone, Debug)]
pub struct DerivativeMap {
    field: Ring,
    n: usize,
    base_m: usize,
    weights: Vec<Matrix>,
    images: Vec<Poly>,
}

impl DerivativeMap {
    /// Value on an arbitrary matrix.
    pub fn eval(&self, a1: &Matrix) -> Poly {
        let c = self.weights.iter().map(|w| w.mul(a1).trace()).collect();
        Poly::new(&self.field, c)
    }

    /// Images of the Lie basis, in basis order.
    pub fn images(&self) -> &[Poly] {
        &self.images
    }

    /// The image as an `F_p`-subspace of coefficient coordinates.
    pub fn image(&self) -> Subspace {
        let vecs: Vec<Vec<u32>> = self.images.iter().map(|f| linalg::coords_of(&self.field, &f.coeff_vec(self.n))).collect();
        Subspace::span(self.field.p(), self.n * self.field.m(), &vecs)
    }

    /// Rank over the base field `F_q`.
    pub fn rank(&self) -> usize {
        self.image().dim() / self.base_m
    }
}

fn check_member(spec: &GroupSpec, a0: &Matrix) -> Result<(), GroupError> {
    if a0.ring().k() != 1 || !spec.is_member(a0) {
        return Err(GroupError::NotMember(spec.label()));
    }
    Ok(())
}

pub fn dchar_map(spec: &GroupSpec, lie: &LieAlgebra, a0: &Matrix) -> Result<DerivativeMap, GroupError> {
    check_member(spec, a0)?;
    let weights: Vec<Matrix> = a0.adjugate_coeffs().iter().map(|b| b.mul(a0)).collect();
    let field = spec.field().clone();
    let mut map = DerivativeMap { field, n: spec.dim(), base_m: spec.base_m(), weights, images: Vec::new() };
    map.images = lie.basis().iter().map(|x| map.eval(x)).collect();
    Ok(map)
}

/// `char(A0) / min(A0)` together with `deg min(A0)`.
fn cofactor(a0: &Matrix) -> (Poly, usize) {
    let c = a0.char_poly();
    let m = a0.min_poly_mod_p();
    let g = c.div_exact(&m).expect("minimal polynomial divides the characteristic polynomial");
    (g, m.deg().unwrap_or(0))
}

fn span_polys(field: &Ring, n: usize, polys: &[Poly]) -> Subspace {
    let vecs: Vec<Vec<u32>> = polys.iter().map(|f| linalg::coords_of(field, &f.coeff_vec(n))).collect();
    Subspace::span(field.p(), n * field.m(), &vecs)
}

/// The span of all scalar multiples of `polys` over the coefficient field.
fn span_scalar_multiples(field: &Ring, n: usize, polys: &[Poly]) -> Subspace {
    let all: Vec<Poly> = polys
        .iter()
        .flat_map(|f| (0..field.m()).map(move |t| f.scale(&field.pow(&field.gen(), t as u64))))
        .collect();
    span_polys(field, n, &all)
}

/// `{ g b : deg b < deg min }` cut down by the linear condition `keep`.
fn multiples_where(field: &Ring, n: usize, g: &Poly, dm: usize, keep: impl Fn(&Poly) -> Vec<El>) -> Subspace {
    let all: Vec<Poly> = (0..dm)
        .flat_map(|i| {
            (0..field.m()).map(move |t| {
                let mut c = vec![0i64; field.m()];
                c[t] = 1;
                (i, c)
            })
        })
        .map(|(i, c)| g.mul(&Poly::monomial(field, field.from_coeffs(&c), i)))
        .collect();
    let space = span_polys(field, n, &all);
    space.kernel_of(|v| {
        let f = Poly::new(field, linalg::els_of(field, v));
        linalg::coords_of(field, &keep(&f))
    })
}

/// A trace-zero element `j` of the quadratic extension, i.e. `tau(j) = -j`.
pub fn trace_zero_unit(field: &Ring) -> El {
    field
        .elements()
        .find(|a| !a.is_zero() && field.tau_unchecked(a) == field.neg(a))
        .expect("quadratic extension has trace-zero units")
}

/// `j (g0 - x^n + g0(0))` for the unitary family.
pub fn unitary_direction(a0: &Matrix) -> Poly {
    let f = a0.ring();
    let n = a0.n();
    let g0 = a0.char_poly();
    let body = g0.sub(&Poly::monomial(f, f.one(), n)).add(&Poly::constant(f, g0.coeff(0)));
    body.scale(&trace_zero_unit(f))
}

/// The image the structure theory predicts for `dchar_map`.
pub fn predicted_image(spec: &GroupSpec, a0: &Matrix) -> Result<Subspace, GroupError> {
    check_member(spec, a0)?;
    let field = spec.field();
    let n = spec.dim();
    let (g, dm) = cofactor(a0);
    Ok(match spec.family() {
        Family::GL => span_scalar_multiples(field, n, &(0..dm).map(|i| g.shift(i)).collect::<Vec<_>>()),
        Family::SL => span_scalar_multiples(field, n, &(1..dm).map(|i| g.shift(i)).collect::<Vec<_>>()),
        Family::Sp | Family::SO => {
            let s = a0.char_poly().coeff(0);
            multiples_where(field, n, &g, dm, |f| f.reverse(n).sub(&f.scale(&s)).coeff_vec(n + 1))
        }
        Family::U => {
            let alpha = a0.char_poly().coeff(0);
            let j = unitary_direction(a0);
            // F_q-multiples of J; traces of a power basis span F_q
            let fixed: Vec<Poly> = (0..field.m())
                .map(|t| {
                    let g = field.pow(&field.gen(), t as u64);
                    field.add(&g, &field.tau_unchecked(&g))
                })
                .map(|c| j.scale(&c))
                .collect();
            // the J direction is only a multiple of char/min when they agree, so
            // the sum is cut back to the multiples of char/min
            let multiples = span_scalar_multiples(field, n, &(0..dm).map(|i| g.shift(i)).collect::<Vec<_>>());
            multiples.intersect(&span_polys(field, n, &fixed).sum(&skew_space(field, n, &alpha)))
        }
    })
}

fn skew_space(field: &Ring, n: usize, alpha: &El) -> Subspace {
    crate::palindromic::skew_palindromic_space(field, n, alpha).expect("norm-one parameter")
}

/// Structural comparison of computed and predicted images.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ImageReport {
    pub family: String,
    pub n: usize,
    pub q: u64,
    pub a0_digest: String,
    pub rank_computed: usize,
    pub rank_predicted: usize,
    pub pass: bool,
}

/// FNV-1a of the matrix text, as hex.
pub fn digest(m: &Matrix) -> String {
    let h = m.to_text().bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
    format!("{h:016x}")
}

pub fn verify_image(spec: &GroupSpec, lie: &LieAlgebra, a0: &Matrix) -> Result<ImageReport, GroupError> {
    let computed = dchar_map(spec, lie, a0)?.image();
    let predicted = predicted_image(spec, a0)?;
    let base = spec.base_m();
    Ok(ImageReport {
        family: spec.family().to_string() + &spec.sign().map(|s| s.to_string()).unwrap_or_default(),
        n: spec.dim(),
        q: spec.q(),
        a0_digest: digest(a0),
        rank_computed: computed.dim() / base,
        rank_predicted: predicted.dim() / base,
        pass: computed == predicted,
    })
}

/// `A1 -> r tr(A0^r A1)` on the Lie basis.
pub fn dtrace_functional(lie: &LieAlgebra, a0: &Matrix, r: u64) -> Vec<El> {
    let f = a0.ring();
    let w = a0.pow(r).scale(&f.from_int(r as i64));
    lie.basis().iter().map(|x| w.mul(x).trace()).collect()
}

/// Witt classes of nondegenerate quadratic forms over `F_q`, `q` odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WittClass {
    Zero,
    One,
    Delta,
    /// The anisotropic plane `<1, -delta>`.
    OneMinusDelta,
}

impl WittClass {
    /// A diagonal representative.
    pub fn diagonal(self, field: &Ring) -> Vec<El> {
        let d = field.nonsquare();
        match self {
            WittClass::Zero => vec![],
            WittClass::One => vec![field.one()],
            WittClass::Delta => vec![d],
            WittClass::OneMinusDelta => vec![field.one(), field.neg(&d)],
        }
    }

    pub fn of_form(form: &Matrix) -> WittClass {
        let plus = witt_sign(form) == Sign::Plus;
        match (form.n() % 2 == 1, plus) {
            (false, true) => WittClass::Zero,
            (false, false) => WittClass::OneMinusDelta,
            (true, true) => WittClass::One,
            (true, false) => WittClass::Delta,
        }
    }

    pub fn add(self, other: WittClass, field: &Ring) -> WittClass {
        let mut d = self.diagonal(field);
        d.extend(other.diagonal(field));
        if d.is_empty() {
            return WittClass::Zero;
        }
        WittClass::of_form(&Matrix::diag(field, &d))
    }

    /// The class of the standard form of that dimension and sign.
    pub fn of_standard(n: usize, sign: Sign) -> WittClass {
        match (n % 2 == 1, sign) {
            (false, Sign::Plus) => WittClass::Zero,
            (false, Sign::Minus) => WittClass::OneMinusDelta,
            (true, Sign::Plus) => WittClass::One,
            (true, Sign::Minus) => WittClass::Delta,
        }
    }
}

/// Primary block types.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockType {
    I,
    II,
    III,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockType,
    pub alpha: El,
    pub size: usize,
    pub sign: Sign,
}

impl Block {
    pub fn new(kind: BlockType, alpha: El, size: usize) -> Block {
        Block { kind, alpha, size, sign: Sign::Plus }
    }

    pub fn with_sign(mut self, sign: Sign) -> Block {
        self.sign = sign;
        self
    }
}

/// A group element together with the form it preserves.
#[derive(Clone, Debug)]
pub struct Representative {
    pub matrix: Matrix,
    pub form: Option<Matrix>,
    pub sign: Option<Sign>,
}

fn is_pm_one(f: &Ring, a: &El) -> bool {
    f.is_one(a) || f.is_one(&f.neg(a))
}

fn check_block(family: Family, field: &Ring, b: &Block) -> Result<(), DerivativeError> {
    let bad = |s: &str| Err(DerivativeError::Constraint(s.into()));
    if b.size == 0 || b.alpha.is_zero() {
        return bad("block needs positive size and unit eigenvalue");
    }
    let pm = is_pm_one(field, &b.alpha);
    match (family, b.kind) {
        (Family::GL, BlockType::I) => Ok(()),
        (Family::GL, _) => bad("GL blocks are Jordan blocks"),
        (Family::Sp | Family::SO, BlockType::I) => Ok(()),
        (_, BlockType::II | BlockType::III) if !pm => bad("types II and III need eigenvalue 1 or -1"),
        (Family::Sp, BlockType::II) if b.size.is_multiple_of(2) => bad("symplectic type II needs odd size"),
        (Family::SO, BlockType::II) if b.size % 2 == 1 => bad("orthogonal type II needs even size"),
        (Family::Sp | Family::SO, _) => Ok(()),
        _ => bad("no primary blocks for this family"),
    }
}

/// Block matrix and the form it preserves, before any congruence.
fn raw_block(family: Family, field: &Ring, b: &Block) -> Result<(Matrix, Option<Matrix>), DerivativeError> {
    check_block(family, field, b)?;
    let m = b.size;
    let a = b.alpha;
    let j = Matrix::jordan(field, m, a);
    Ok(match (family, b.kind) {
        (Family::GL, _) => (j, None),
        (Family::Sp, BlockType::I | BlockType::II) => {
            let jinv = j.inverse().expect("unit eigenvalue");
            (Matrix::block_diag(&[&jinv, &j.transpose()]), Some(standard_form(Family::Sp, m, None, field)?))
        }
        (Family::Sp, BlockType::III) => {
            let j1 = Matrix::jordan(field, m, field.one());
            let top = j1.inverse().expect("unipotent").scale(&a);
            let coef = match b.sign {
                Sign::Plus => field.one(),
                Sign::Minus => {
                    let t = field.mul(&field.from_int(2), &field.nonsquare());
                    if m % 2 == 1 { field.neg(&t) } else { t }
                }
            };
            let mut mat = Matrix::block_diag(&[&top, &j1.transpose().scale(&a)]);
            for c in 0..m {
                let s = if c % 2 == 0 { coef } else { field.neg(&coef) };
                mat.set(m, c, s);
            }
            (mat, Some(standard_form(Family::Sp, m, None, field)?))
        }
        (Family::SO, BlockType::I | BlockType::II) => {
            let jinv = j.inverse().expect("unit eigenvalue");
            (Matrix::block_diag(&[&j, &jinv.anti_transpose()]), Some(Matrix::anti_identity(field, 2 * m)))
        }
        (Family::SO, BlockType::III) => {
            let n = 2 * m + 1;
            let jinv = j.inverse().expect("unit eigenvalue");
            let mut mat = Matrix::block_diag(&[&Matrix::jordan(field, m + 1, a), &jinv.anti_transpose()]);
            // corner rows m-1 and m: -(a/2)(-a)^c and -(-a)^c
            let half = field.mul(&field.inv(&field.from_int(2)).expect("p odd"), &a);
            let neg_a = field.neg(&a);
            for c in 0..m {
                let alt = field.pow(&neg_a, c as u64);
                mat.set(m - 1, m + 1 + c, field.neg(&field.mul(&half, &alt)));
                mat.set(m, m + 1 + c, field.neg(&alt));
            }
            let k1 = symmetric_form(field, n, Sign::Plus);
            let form = if b.sign == Sign::Plus { k1 } else { k1.scale(&field.nonsquare()) };
            (mat, Some(form))
        }
        _ => unreachable!("rejected by check_block"),
    })
}

/// The single-block matrix before the congruence to the standard form;
/// [`closed_form_adjugate`] describes its adjugate.
pub fn raw_block_matrix(family: Family, field: &Ring, b: &Block) -> Result<Matrix, DerivativeError> {
    raw_block(family, field, b).map(|(m, _)| m)
}

/// `P` with `P^t F P` diagonal, and the diagonal, for a symmetric form.
fn diagonalize(f: &Matrix) -> (Vec<Vec<El>>, Vec<El>) {
    let r = f.ring();
    let n = f.n();
    let b = |u: &[El], v: &[El]| -> El {
        let fv = f.mul_vec(v);
        u.iter().zip(&fv).fold(El::ZERO, |acc, (x, y)| r.add(&acc, &r.mul(x, y)))
    };
    let mut rest: Vec<Vec<El>> = (0..n).map(|i| (0..n).map(|j| if i == j { r.one() } else { El::ZERO }).collect()).collect();
    let mut basis = Vec::new();
    let mut diag = Vec::new();
    while !rest.is_empty() {
        let idx = match rest.iter().position(|v| !b(v, v).is_zero()) {
            Some(i) => i,
            None => {
                let j = (1..rest.len()).find(|&j| !b(&rest[0], &rest[j]).is_zero()).expect("nondegenerate form");
                let w: Vec<El> = rest[0].iter().zip(&rest[j]).map(|(x, y)| r.add(x, y)).collect();
                rest[0] = w;
                0
            }
        };
        let u = rest.remove(idx);
        let nu = b(&u, &u);
        let inv = r.inv(&nu).expect("nonzero norm");
        for v in rest.iter_mut() {
            let c = r.mul(&b(&u, v), &inv);
            for (x, y) in v.iter_mut().zip(&u) {
                *x = r.sub(x, &r.mul(&c, y));
            }
        }
        basis.push(u);
        diag.push(nu);
    }
    (basis, diag)
}

/// Basis in which the form is `diag(1, ..., 1, D)`.
fn normalize(f: &Matrix) -> (Vec<Vec<El>>, El) {
    let r = f.ring();
    let (mut basis, mut d) = diagonalize(f);
    for i in 0..d.len().saturating_sub(1) {
        let (a, c) = (d[i], d[i + 1]);
        let (x, y) = r
            .elements()
            .flat_map(|x| r.elements().map(move |y| (x, y)))
            .find(|(x, y)| r.is_one(&r.add(&r.mul(&a, &r.mul(x, x)), &r.mul(&c, &r.mul(y, y)))))
            .expect("binary forms over a finite field are universal");
        let u: Vec<El> = basis[i].iter().zip(&basis[i + 1]).map(|(s, t)| r.add(&r.mul(&x, s), &r.mul(&y, t))).collect();
        let cy = r.neg(&r.mul(&c, &y));
        let ax = r.mul(&a, &x);
        let w: Vec<El> = basis[i].iter().zip(&basis[i + 1]).map(|(s, t)| r.add(&r.mul(&cy, s), &r.mul(&ax, t))).collect();
        basis[i] = u;
        basis[i + 1] = w;
        d[i] = r.one();
        d[i + 1] = r.mul(&a, &c);
    }
    (basis, *d.last().expect("nonempty form"))
}

fn columns(r: &Ring, cols: &[Vec<El>]) -> Matrix {
    Matrix::from_fn(r, cols.len(), cols.len(), |i, j| cols[j][i])
}

/// `X` with `X^t F X = K`, for symmetric forms of the same class.
pub fn symmetric_congruence(f: &Matrix, k: &Matrix) -> Result<Matrix, DerivativeError> {
    let r = f.ring();
    let (mut pf, df) = normalize(f);
    let (pk, dk) = normalize(k);
    let ratio = r.mul(&dk, &r.inv(&df).map_err(|_| DerivativeError::NoCongruence)?);
    let s = r.sqrt_residue(&ratio).ok_or(DerivativeError::NoCongruence)?;
    if let Some(last) = pf.last_mut() {
        for x in last.iter_mut() {
            *x = r.mul(x, &s);
        }
    }
    let x = columns(r, &pf).mul(&columns(r, &pk).inverse().map_err(|_| DerivativeError::NoCongruence)?);
    debug_assert_eq!(x.transpose().mul(f).mul(&x), *k);
    Ok(x)
}

/// Permutation `X` taking `Omega_{m1} + Omega_{m2} + ...` to `Omega_{sum}`.
fn symplectic_shuffle(field: &Ring, halves: &[usize]) -> Matrix {
    let total: usize = halves.iter().sum();
    let mut x = Matrix::zero(field, 2 * total, 2 * total);
    let mut offset = 0;
    let mut start = 0;
    for &h in halves {
        for i in 0..h {
            // old coordinate start + i -> new offset + i, old start + h + i -> new total + offset + i
            x.set(start + i, offset + i, field.one());
            x.set(start + h + i, total + offset + i, field.one());
        }
        offset += h;
        start += 2 * h;
    }
    x
}

/// Direct sum of group elements followed by a congruence to the standard
/// form of the total size.
pub fn join(family: Family, parts: &[Representative]) -> Result<Representative, DerivativeError> {
    let mats: Vec<&Matrix> = parts.iter().map(|p| &p.matrix).collect();
    let sum = Matrix::block_diag(&mats);
    let field = sum.ring().clone();
    match family {
        Family::GL | Family::SL => Ok(Representative { matrix: sum, form: None, sign: None }),
        Family::Sp => {
            let halves: Vec<usize> = parts.iter().map(|p| p.matrix.n() / 2).collect();
            let x = symplectic_shuffle(&field, &halves);
            let xinv = x.transpose();
            let form = standard_form(Family::Sp, sum.n() / 2, None, &field)?;
            Ok(Representative { matrix: xinv.mul(&sum).mul(&x), form: Some(form), sign: None })
        }
        Family::SO => {
            let forms: Vec<&Matrix> = parts.iter().map(|p| p.form.as_ref().expect("orthogonal parts carry forms")).collect();
            let f = Matrix::block_diag(&forms);
            let sign = witt_sign(&f);
            let k = symmetric_form(&field, f.n(), sign);
            let x = symmetric_congruence(&f, &k)?;
            let xinv = x.inverse().map_err(|_| DerivativeError::NoCongruence)?;
            Ok(Representative { matrix: xinv.mul(&sum).mul(&x), form: Some(k), sign: Some(sign) })
        }
        Family::U => Err(DerivativeError::Constraint("no unitary block construction".into())),
    }
}

/// Joins the primary blocks of `blocks` into one member of the family's
/// standard group.
pub fn build_representative(family: Family, field: &Ring, blocks: &[Block]) -> Result<Representative, DerivativeError> {
    if blocks.is_empty() {
        return Err(DerivativeError::Constraint("empty recipe".into()));
    }
    let parts = blocks
        .iter()
        .map(|b| raw_block(family, field, b).map(|(matrix, form)| Representative { matrix, form, sign: None }))
        .collect::<Result<Vec<_>, _>>()?;
    join(family, &parts)
}

/// Square matrix of polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    n: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn from_fn(n: usize, f: impl FnMut((usize, usize)) -> Poly) -> PolyMatrix {
        let data = (0..n * n).map(|t| (t / n, t % n)).map(f).collect();
        PolyMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.data[i * self.n + j]
    }

    /// `Adj(xI - M)` from the adjugate coefficients.
    pub fn adjugate_of(m: &Matrix) -> PolyMatrix {
        let b = m.adjugate_coeffs();
        PolyMatrix::from_fn(m.n(), |(i, j)| Poly::new(m.ring(), b.iter().map(|bj| bj.get(i, j)).collect()))
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        let n = self.n;
        PolyMatrix::from_fn(n, |(i, j)| {
            (0..n).fold(Poly::zero(self.get(0, 0).ring()), |acc, t| acc.add(&self.get(i, t).mul(other.get(t, j))))
        })
    }

    pub fn scale(&self, f: &Poly) -> PolyMatrix {
        PolyMatrix { n: self.n, data: self.data.iter().map(|a| a.mul(f)).collect() }
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(self.n, |(i, j)| self.get(j, i).clone())
    }

    pub fn anti_transpose(&self) -> PolyMatrix {
        let n = self.n;
        PolyMatrix::from_fn(n, |(i, j)| self.get(n - 1 - j, n - 1 - i).clone())
    }

    /// Conjugation by a constant matrix: `X^{-1} P X`.
    pub fn conjugate(&self, x: &Matrix, xinv: &Matrix) -> PolyMatrix {
        let lift = |m: &Matrix| PolyMatrix::from_fn(m.n(), |(i, j)| Poly::constant(m.ring(), m.get(i, j)));
        lift(xinv).mul(self).mul(&lift(x))
    }

    /// Block upper-triangular assembly `[[a, b], [0, d]]` (`b` may be
    /// rectangular, given as rows).
    fn assemble(a: &PolyMatrix, b: Option<&[Vec<Poly>]>, d: &PolyMatrix, lower: bool) -> PolyMatrix {
        let (na, nd) = (a.n, d.n);
        let ring = a.get(0, 0).ring().clone();
        PolyMatrix::from_fn(na + nd, |(i, j)| match (i < na, j < na) {
            (true, true) => a.get(i, j).clone(),
            (false, false) => d.get(i - na, j - na).clone(),
            (true, false) if !lower => b.map_or(Poly::zero(&ring), |b| b[i][j - na].clone()),
            (false, true) if lower => b.map_or(Poly::zero(&ring), |b| b[i - na][j].clone()),
            _ => Poly::zero(&ring),
        })
    }
}

fn x_minus(field: &Ring, a: &El) -> Poly {
    Poly::linear(field, *a)
}

fn sign_pow(field: &Ring, a: &El, e: usize) -> El {
    field.pow(a, e as u64)
}

/// `Adj(x - J_e(alpha))`: `(x - alpha)^{e-1-(j-i)}` on and above the diagonal.
pub fn jordan_adjugate(field: &Ring, alpha: &El, e: usize) -> PolyMatrix {
    let l = x_minus(field, alpha);
    PolyMatrix::from_fn(e, |(i, j)| if j >= i { l.pow((e - 1 - (j - i)) as u64) } else { Poly::zero(field) })
}

/// `Adj(x - J_e(alpha)^{-1})`: `(x - 1/alpha)^{e-1}` on the diagonal and
/// `-(-alpha)^{-(d+1)} x^{d-1} (x - 1/alpha)^{e-1-d}` on superdiagonal `d`.
pub fn inverse_jordan_adjugate(field: &Ring, alpha: &El, e: usize) -> PolyMatrix {
    let ainv = field.inv(alpha).expect("unit eigenvalue");
    let l = x_minus(field, &ainv);
    let neg_ainv = field.neg(&ainv);
    PolyMatrix::from_fn(e, |(i, j)| {
        if j < i {
            return Poly::zero(field);
        }
        let d = j - i;
        if d == 0 {
            return l.pow((e - 1) as u64);
        }
        let c = field.neg(&sign_pow(field, &neg_ainv, d + 1));
        Poly::monomial(field, c, d - 1).mul(&l.pow((e - 1 - d) as u64))
    })
}

/// `Adj(x - alpha J_e(1))`: `alpha^d (x - alpha)^{e-1-d}` on superdiagonal `d`.
fn scaled_unipotent_adjugate(field: &Ring, alpha: &El, e: usize) -> PolyMatrix {
    let l = x_minus(field, alpha);
    PolyMatrix::from_fn(e, |(i, j)| {
        if j < i {
            return Poly::zero(field);
        }
        let d = j - i;
        l.pow((e - 1 - d) as u64).scale(&sign_pow(field, alpha, d))
    })
}

/// Closed-form `Adj(xI - B)` for the block `B` that [`build_representative`]
/// produces from a single block, before the congruence to the standard
/// form.
pub fn closed_form_adjugate(family: Family, field: &Ring, b: &Block) -> Result<PolyMatrix, DerivativeError> {
    check_block(family, field, b)?;
    let m = b.size;
    let a = b.alpha;
    let ainv = field.inv(&a).expect("unit eigenvalue");
    let lam = x_minus(field, &a).pow(m as u64);
    let lam_inv = x_minus(field, &ainv).pow(m as u64);
    Ok(match (family, b.kind) {
        (Family::GL, _) => jordan_adjugate(field, &a, m),
        (Family::Sp, BlockType::I | BlockType::II) => PolyMatrix::assemble(
            &inverse_jordan_adjugate(field, &a, m).scale(&lam),
            None,
            &jordan_adjugate(field, &a, m).transpose().scale(&lam_inv),
            false,
        ),
        (Family::Sp, BlockType::III) => {
            // top-left: (x - a)^m Adj(x - a J(1)^{-1}) = a^{m-1} (x-a)^m Y_1(x/a)
            let y = inverse_jordan_adjugate(field, &field.one(), m);
            let rescaled = PolyMatrix::from_fn(m, |(i, j)| substitute_scale(y.get(i, j), &ainv).scale(&sign_pow(field, &a, m - 1)));
            let top = rescaled.scale(&lam);
            let bottom = scaled_unipotent_adjugate(field, &a, m).transpose().scale(&lam);
            // bottom-left: coef * Adj(x - Q) S Adj(x - P), entrywise
            // a^i (x-a)^{m-1-i} w_l with w_l = sum_j (-1)^j Adj(x - P)_{j l}
            // = (-1)^l ((x-a)^{m-1} + a sum_{d=1}^{l} x^{d-1} (x-a)^{m-1-d})
            let coef = match b.sign {
                Sign::Plus => field.one(),
                Sign::Minus => {
                    let t = field.mul(&field.from_int(2), &field.nonsquare());
                    if m % 2 == 1 { field.neg(&t) } else { t }
                }
            };
            let w: Vec<Poly> = (0..m)
                .map(|l| {
                    let s = if l % 2 == 0 { field.one() } else { field.neg(&field.one()) };
                    let mut acc = x_minus(field, &a).pow((m - 1) as u64);
                    for d in 1..=l {
                        acc = acc.add(&Poly::monomial(field, a, d - 1).mul(&x_minus(field, &a).pow((m - 1 - d) as u64)));
                    }
                    acc.scale(&field.mul(&s, &coef))
                })
                .collect();
            let z: Vec<Vec<Poly>> = (0..m)
                .map(|i| {
                    let left = x_minus(field, &a).pow((m - 1 - i) as u64).scale(&sign_pow(field, &a, i));
                    w.iter().map(|wl| left.mul(wl)).collect()
                })
                .collect();
            PolyMatrix::assemble(&top, Some(&z), &bottom, true)
        }
        (Family::SO, BlockType::I | BlockType::II) => PolyMatrix::assemble(
            &jordan_adjugate(field, &a, m).scale(&lam_inv),
            None,
            &inverse_jordan_adjugate(field, &a, m).anti_transpose().scale(&lam),
            false,
        ),
        (Family::SO, BlockType::III) => {
            let (mat, _) = raw_block(family, field, b)?;
            let top = jordan_adjugate(field, &a, m + 1);
            let bottom = inverse_jordan_adjugate(field, &a, m).anti_transpose();
            // W = Adj(x - P) S0 Adj(x - Q)
            let s0: Vec<Vec<Poly>> = (0..=m).map(|i| (0..m).map(|j| Poly::constant(field, mat.get(i, m + 1 + j))).collect()).collect();
            let w: Vec<Vec<Poly>> = (0..=m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            (0..=m).fold(Poly::zero(field), |acc, t| {
                                (0..m).fold(acc, |acc, u| acc.add(&top.get(i, t).mul(&s0[t][u]).mul(bottom.get(u, j))))
                            })
                        })
                        .collect()
                })
                .collect();
            PolyMatrix::assemble(&top.scale(&lam), Some(&w), &bottom.scale(&x_minus(field, &a).pow(m as u64 + 1)), false)
        }
        _ => unreachable!("rejected by check_block"),
    })
}

/// `f(c x)` for a constant `c`.
fn substitute_scale(f: &Poly, c: &El) -> Poly {
    let r = f.ring();
    let mut pw = r.one();
    let mut out = Vec::with_capacity(f.coeffs().len());
    for a in f.coeffs() {
        out.push(r.mul(a, &pw));
        pw = r.mul(&pw, c);
    }
    Poly::new(r, out)
}
