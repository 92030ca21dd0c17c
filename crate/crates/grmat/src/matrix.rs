//! Dense matrices over a [`Ring`] and the division-free algebra around
//! them: Berkowitz characteristic polynomials, adjugates of `xI - M`,
//! inverses with unit pivots and minimal polynomials over the residue field.

use std::fmt;

use thiserror::Error;

use crate::poly::Poly;
use crate::ring::{El, Ring, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("determinant is not a unit")]
    NonUnitDeterminant,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cannot parse matrix: {0}")]
    Parse(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<El>,
}

impl std::hash::Hash for Matrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] @ {}", self.to_text(), self.ring)
    }
}

impl Matrix {
    pub fn zero(ring: &Ring, rows: usize, cols: usize) -> Matrix {
        Matrix { ring: ring.clone(), rows, cols, data: vec![El::ZERO; rows * cols] }
    }

    pub fn identity(ring: &Ring, n: usize) -> Matrix {
        Matrix::scalar(ring, n, ring.one())
    }

    pub fn scalar(ring: &Ring, n: usize, a: El) -> Matrix {
        let mut m = Matrix::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, a);
        }
        m
    }

    pub fn from_fn(ring: &Ring, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> El) -> Matrix {
        let data = (0..rows * cols).map(|t| f(t / cols, t % cols)).collect();
        Matrix { ring: ring.clone(), rows, cols, data }
    }

    pub fn from_ints(ring: &Ring, rows: &[&[i64]]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Matrix::from_fn(ring, r, c, |i, j| ring.from_int(rows[i][j]))
    }

    pub fn diag(ring: &Ring, d: &[El]) -> Matrix {
        let mut m = Matrix::zero(ring, d.len(), d.len());
        for (i, a) in d.iter().enumerate() {
            m.set(i, i, *a);
        }
        m
    }

    /// Block diagonal sum.
    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let ring = blocks[0].ring.clone();
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zero(&ring, n, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// `J_n(a)`: `a` on the diagonal, ones on the superdiagonal.
    pub fn jordan(ring: &Ring, n: usize, a: El) -> Matrix {
        Matrix::from_fn(ring, n, n, |i, j| {
            if i == j {
                a
            } else if j == i + 1 {
                ring.one()
            } else {
                El::ZERO
            }
        })
    }

    /// Anti-diagonal ones.
    pub fn anti_identity(ring: &Ring, n: usize) -> Matrix {
        Matrix::from_fn(ring, n, n, |i, j| if i + j + 1 == n { ring.one() } else { El::ZERO })
    }

    /// Companion matrix of a monic polynomial.
    pub fn companion(f: &Poly) -> Matrix {
        let ring = f.ring();
        let n = f.deg().unwrap_or(0);
        Matrix::from_fn(ring, n, n, |i, j| {
            if j == n - 1 {
                ring.neg(&f.coeff(i))
            } else if i == j + 1 {
                ring.one()
            } else {
                El::ZERO
            }
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> El {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, a: El) {
        self.data[i * self.cols + j] = a;
    }

    pub fn entries(&self) -> &[El] {
        &self.data
    }

    pub fn from_entries(ring: &Ring, rows: usize, cols: usize, data: Vec<El>) -> Matrix {
        assert_eq!(data.len(), rows * cols);
        Matrix { ring: ring.clone(), rows, cols, data }
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j));
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(&self.ring, rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    pub fn column(&self, j: usize) -> Vec<El> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    fn zip(&self, other: &Matrix, f: impl Fn(&El, &El) -> El) -> Matrix {
        assert!(self.rows == other.rows && self.cols == other.cols, "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Matrix { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| self.ring.add(a, b))
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| self.ring.sub(a, b))
    }

    pub fn map(&self, f: impl Fn(&El) -> El) -> Matrix {
        Matrix { ring: self.ring.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn neg(&self) -> Matrix {
        self.map(|a| self.ring.neg(a))
    }

    pub fn scale(&self, c: &El) -> Matrix {
        self.map(|a| self.ring.mul(a, c))
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let r = &self.ring;
        let mut out = Matrix::zero(r, self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(i, t);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = r.add(&out.data[idx], &r.mul(&a, &other.get(t, j)));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[El]) -> Vec<El> {
        let r = &self.ring;
        (0..self.rows)
            .map(|i| (0..self.cols).fold(El::ZERO, |acc, j| r.add(&acc, &r.mul(&self.get(i, j), &v[j]))))
            .collect()
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Matrix::identity(&self.ring, self.n());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.ring, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Reflection in the main anti-diagonal.
    pub fn anti_transpose(&self) -> Matrix {
        let (r, c) = (self.rows, self.cols);
        Matrix::from_fn(&self.ring, c, r, |i, j| self.get(r - 1 - j, c - 1 - i))
    }

    pub fn sigma(&self) -> Matrix {
        self.map(|a| self.ring.sigma(a))
    }

    pub fn tau(&self) -> Result<Matrix, MatrixError> {
        if !self.ring.has_involution() {
            return Err(RingError::NoInvolution.into());
        }
        Ok(self.map(|a| self.ring.tau_unchecked(a)))
    }

    /// Conjugate transpose.
    pub fn star(&self) -> Result<Matrix, MatrixError> {
        Ok(self.tau()?.transpose())
    }

    pub fn trace(&self) -> El {
        (0..self.n()).fold(El::ZERO, |acc, i| self.ring.add(&acc, &self.get(i, i)))
    }

    /// Entrywise image in the same ring at a lower level.
    pub fn reduce(&self, target: &Ring) -> Matrix {
        Matrix {
            ring: target.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| self.ring.reduce(a, target)).collect(),
        }
    }

    /// Entrywise lift to the same ring at a higher level.
    pub fn lift(&self, target: &Ring) -> Matrix {
        Matrix {
            ring: target.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| self.ring.lift(a, target)).collect(),
        }
    }

    /// Coefficients `c_0..c_n` of `det(xI - M)`, by Berkowitz's algorithm.
    pub fn char_coeffs(&self) -> Vec<El> {
        let r = &self.ring;
        let n = self.n();
        // high-degree-first coefficient vector of the leading principal minor
        let mut p = vec![r.one()];
        for k in 0..n {
            let a = self.get(k, k);
            // column: 1, -a, -R C, -R A C, ..., length k + 2
            let mut col = vec![r.one(), r.neg(&a)];
            let mut v: Vec<El> = (0..k).map(|i| self.get(i, k)).collect();
            for _ in 0..k {
                let rc = (0..k).fold(El::ZERO, |acc, j| r.add(&acc, &r.mul(&self.get(k, j), &v[j])));
                col.push(r.neg(&rc));
                v = (0..k)
                    .map(|i| (0..k).fold(El::ZERO, |acc, j| r.add(&acc, &r.mul(&self.get(i, j), &v[j]))))
                    .collect();
            }
            let mut next = vec![El::ZERO; k + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, pj) in p.iter().enumerate() {
                    if i >= j {
                        *slot = r.add(slot, &r.mul(&col[i - j], pj));
                    }
                }
            }
            p = next;
        }
        p.reverse();
        p
    }

    pub fn char_poly(&self) -> Poly {
        Poly::new(&self.ring, self.char_coeffs())
    }

    pub fn det(&self) -> El {
        let c0 = self.char_coeffs()[0];
        if self.n().is_multiple_of(2) {
            c0
        } else {
            self.ring.neg(&c0)
        }
    }

    /// `B_0..B_{n-1}` with `Adj(xI - M) = sum B_j x^j`.
    pub fn adjugate_coeffs(&self) -> Vec<Matrix> {
        let n = self.n();
        let c = self.char_coeffs();
        let mut out = vec![Matrix::identity(&self.ring, n)];
        for j in (1..n).rev() {
            let prev = out.last().expect("nonempty");
            let next = self.mul(prev).add(&Matrix::scalar(&self.ring, n, c[j]));
            out.push(next);
        }
        out.reverse();
        out
    }

    /// Inverse by elimination with unit pivots.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let r = &self.ring;
        let n = self.n();
        let mut a = self.clone();
        let mut inv = Matrix::identity(r, n);
        for c in 0..n {
            let piv = (c..n).find(|&i| r.is_unit(&a.get(i, c))).ok_or(MatrixError::NonUnitDeterminant)?;
            a.swap_rows(c, piv);
            inv.swap_rows(c, piv);
            let s = r.inv(&a.get(c, c))?;
            a.scale_row(c, &s);
            inv.scale_row(c, &s);
            for i in 0..n {
                let f = a.get(i, c);
                if i != c && !f.is_zero() {
                    a.add_row_multiple(i, c, &r.neg(&f));
                    inv.add_row_multiple(i, c, &r.neg(&f));
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, i: usize, s: &El) {
        for j in 0..self.cols {
            let v = self.ring.mul(&self.get(i, j), s);
            self.set(i, j, v);
        }
    }

    /// row_i += f * row_src
    fn add_row_multiple(&mut self, i: usize, src: usize, f: &El) {
        for j in 0..self.cols {
            let v = self.ring.add(&self.get(i, j), &self.ring.mul(f, &self.get(src, j)));
            self.set(i, j, v);
        }
    }

    /// Rank over the residue field (entries are reduced first).
    pub fn rank_mod_p(&self) -> usize {
        let field = self.ring.residue_field();
        field_rank(&field, &self.reduce(&field))
    }

    /// Minimal polynomial of the reduction mod `p`.
    pub fn min_poly_mod_p(&self) -> Poly {
        let field = self.ring.residue_field();
        let m = self.reduce(&field);
        let n = m.n();
        let mut powers: Vec<Matrix> = vec![Matrix::identity(&field, n)];
        loop {
            let next = powers.last().expect("nonempty").mul(&m);
            if let Some(coeffs) = field_dependence(&field, &powers, &next) {
                // next = sum coeffs_i M^i
                let mut c: Vec<El> = coeffs.iter().map(|a| field.neg(a)).collect();
                c.push(field.one());
                return Poly::new(&field, c);
            }
            powers.push(next);
        }
    }

    pub fn to_text(&self) -> String {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let e = self.ring.fmt_el(&self.get(i, j));
                        if self.ring.m() > 1 { format!("({e})") } else { e }
                    })
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Parses `"a,b;c,d"`; entries over extensions are written `(c0,c1)`.
    pub fn parse(ring: &Ring, s: &str) -> Result<Matrix, MatrixError> {
        let mut rows: Vec<Vec<El>> = Vec::new();
        for row in s.split(';') {
            let mut entries = Vec::new();
            let mut rest = row.trim();
            while !rest.is_empty() {
                let (tok, tail) = if let Some(stripped) = rest.strip_prefix('(') {
                    let close = stripped.find(')').ok_or_else(|| MatrixError::Parse(s.into()))?;
                    (&stripped[..close], stripped[close + 1..].trim_start())
                } else {
                    match rest.find(',') {
                        Some(c) => (&rest[..c], &rest[c..]),
                        None => (rest, ""),
                    }
                };
                entries.push(ring.parse_el(tok.trim()).map_err(|_| MatrixError::Parse(s.into()))?);
                rest = tail.trim_start().strip_prefix(',').unwrap_or(tail).trim_start();
            }
            rows.push(entries);
        }
        let c = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != c) {
            return Err(MatrixError::Parse(format!("ragged rows in {s:?}")));
        }
        let r = rows.len();
        Ok(Matrix::from_entries(ring, r, c, rows.into_iter().flatten().collect()))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Reduced row echelon form over a field; returns pivot columns.
pub fn field_rref(field: &Ring, rows: &mut Vec<Vec<El>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = field.inv(&rows[r][c]).expect("nonzero in a field");
        for v in rows[r].iter_mut() {
            *v = field.mul(v, &inv);
        }
        let pr = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c];
            for (v, pv) in row.iter_mut().zip(&pr) {
                *v = field.sub(v, &field.mul(&f, pv));
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn field_rank(field: &Ring, m: &Matrix) -> usize {
    let mut rows: Vec<Vec<El>> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect();
    field_rref(field, &mut rows).len()
}

/// Coefficients `c` with `target = sum c_i basis_i`, if any.
fn field_dependence(field: &Ring, basis: &[Matrix], target: &Matrix) -> Option<Vec<El>> {
    let len = target.entries().len();
    let k = basis.len();
    // augmented system: columns are basis vectors, last column target
    let mut rows: Vec<Vec<El>> = (0..len)
        .map(|t| {
            let mut row: Vec<El> = basis.iter().map(|b| b.entries()[t]).collect();
            row.push(target.entries()[t]);
            row
        })
        .collect();
    let pivots = field_rref(field, &mut rows);
    if pivots.contains(&k) {
        return None;
    }
    let mut x = vec![El::ZERO; k];
    for (row, &pc) in rows.iter().zip(&pivots) {
        x[pc] = row[k];
    }
    Some(x)
}
