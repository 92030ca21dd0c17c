//! Exact linear algebra over the prime field `F_p`.
//!
//! Every `F_q`-linear question in the crate (Lie algebras, images of
//! derivative maps, Gram constraints) is answered in `F_p` coordinates: an
//! element of `F_{p^m}` is its coefficient vector, so an `F_q`-subspace is
//! also an `F_p`-subspace and equality can be tested there.

use crate::ring::{El, Ring};

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Reduces `rows` in place to reduced row echelon form, dropping zero rows.
/// Returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<u32>>, p: u32) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let pp = p as u64;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = inv_mod(rows[r][c], p) as u64;
        for v in rows[r].iter_mut() {
            *v = (*v as u64 * inv % pp) as u32;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c] as u64;
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v = ((*v as u64 + pp * pp - f * pv as u64) % pp) as u32;
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

pub fn rank(rows: &[Vec<u32>], p: u32) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, p).len()
}

/// Basis of `{x : A x = 0}` where `A` has the given rows and `ncols`
/// columns.
pub fn kernel(rows: &[Vec<u32>], ncols: usize, p: u32) -> Vec<Vec<u32>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, p);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![0u32; ncols];
            x[f] = 1;
            for (row, &pc) in m.iter().zip(&pivots) {
                x[pc] = (p - row[f] % p) % p;
            }
            x
        })
        .collect()
}

/// Solutions of `A x = b`: a particular solution and a kernel basis, or
/// `None` when the system is inconsistent.
pub fn solve_affine(
    rows: &[Vec<u32>],
    rhs: &[u32],
    ncols: usize,
    p: u32,
) -> Option<(Vec<u32>, Vec<Vec<u32>>)> {
    let mut aug: Vec<Vec<u32>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut v = r.clone();
            v.push(b % p);
            v
        })
        .collect();
    let pivots = rref(&mut aug, p);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x0 = vec![0u32; ncols];
    for (row, &pc) in aug.iter().zip(&pivots) {
        x0[pc] = row[ncols];
    }
    Some((x0, kernel(rows, ncols, p)))
}

/// A subspace of `F_p^n`, stored by its reduced echelon basis so equality
/// is structural.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    p: u32,
    ambient: usize,
    basis: Vec<Vec<u32>>,
}

impl Subspace {
    pub fn span(p: u32, ambient: usize, vectors: &[Vec<u32>]) -> Subspace {
        let mut basis: Vec<Vec<u32>> = vectors.iter().map(|v| v.iter().map(|&c| c % p).collect()).collect();
        if basis.is_empty() {
            return Subspace { p, ambient, basis };
        }
        rref(&mut basis, p);
        Subspace { p, ambient, basis }
    }

    pub fn zero(p: u32, ambient: usize) -> Subspace {
        Subspace { p, ambient, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank(&rows, self.p) == self.dim()
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        self.sum(other).dim() == self.dim()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut v = self.basis.clone();
        v.extend(other.basis.iter().cloned());
        Subspace::span(self.p, self.ambient, &v)
    }

    /// `v` minus its echelon reduction against this space; zero iff `v` lies
    /// in the space. Linear in `v`.
    pub fn residual(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut r: Vec<u32> = v.iter().map(|&c| c % self.p).collect();
        for b in &self.basis {
            let piv = b.iter().position(|&c| c != 0).expect("echelon rows are nonzero");
            let f = r[piv] as u64;
            if f != 0 {
                for (x, &y) in r.iter_mut().zip(b) {
                    *x = ((*x as u64 + p * p - f * y as u64) % p) as u32;
                }
            }
        }
        r
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        self.kernel_of(|v| other.residual(v))
    }

    /// Vectors of this space killed by the linear map `f`.
    pub fn kernel_of<F: Fn(&[u32]) -> Vec<u32>>(&self, f: F) -> Subspace {
        if self.basis.is_empty() {
            return self.clone();
        }
        let images: Vec<Vec<u32>> = self.basis.iter().map(|b| f(b)).collect();
        let out = images[0].len();
        // columns are images; solve sum c_i f(b_i) = 0
        let rows: Vec<Vec<u32>> = (0..out)
            .map(|j| images.iter().map(|img| img[j]).collect())
            .collect();
        let combos = kernel(&rows, self.basis.len(), self.p);
        let vecs: Vec<Vec<u32>> = combos.iter().map(|c| combine(&self.basis, c, self.p)).collect();
        Subspace::span(self.p, self.ambient, &vecs)
    }
}

/// `sum c_i v_i` over `F_p`.
pub fn combine(vectors: &[Vec<u32>], coeffs: &[u32], p: u32) -> Vec<u32> {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut acc = vec![0u64; n];
    for (v, &c) in vectors.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = (*a + c as u64 * x as u64) % p as u64;
        }
    }
    acc.into_iter().map(|a| a as u32).collect()
}

/// `F_p` coordinates of a sequence of residue-field elements.
pub fn coords_of(ring: &Ring, els: &[El]) -> Vec<u32> {
    let mut v = Vec::with_capacity(els.len() * ring.m());
    for e in els {
        v.extend(ring.coeffs(e).iter().map(|&c| c % ring.p()));
    }
    v
}

/// Inverse of [`coords_of`].
pub fn els_of(ring: &Ring, coords: &[u32]) -> Vec<El> {
    coords
        .chunks(ring.m())
        .map(|c| ring.from_coeffs(&c.iter().map(|&x| x as i64).collect::<Vec<_>>()))
        .collect()
}

/// The `F_p`-matrix (rows = output coordinates) of an `F_p`-linear map
/// between tuples of field elements, by evaluation on unit vectors.
pub fn matrix_of<F: Fn(&[El]) -> Vec<El>>(ring: &Ring, input_len: usize, f: F) -> Vec<Vec<u32>> {
    let m = ring.m();
    let mut cols = Vec::with_capacity(input_len * m);
    for i in 0..input_len * m {
        let mut x = vec![0u32; input_len * m];
        x[i] = 1;
        cols.push(coords_of(ring, &f(&els_of(ring, &x))));
    }
    let out = cols.first().map_or(0, |c| c.len());
    (0..out).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_single_equation() {
        // x + y + z = 0 over F_3
        let k = kernel(&[vec![1, 1, 1]], 3, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(v.iter().sum::<u32>() % 3, 0);
        }
    }

    #[test]
    fn affine_solution() {
        let (x0, k) = solve_affine(&[vec![1, 2], vec![0, 1]], &[1, 2], 2, 5).unwrap();
        assert!(k.is_empty());
        assert_eq!((x0[0] + 2 * x0[1]) % 5, 1);
        assert_eq!(x0[1], 2);
        assert!(solve_affine(&[vec![1, 1], vec![2, 2]], &[1, 1], 2, 3).is_none());
    }

    #[test]
    fn subspace_equality_is_order_free() {
        let a = Subspace::span(3, 3, &[vec![1, 0, 1], vec![0, 1, 1]]);
        let b = Subspace::span(3, 3, &[vec![1, 1, 2], vec![2, 0, 2]]);
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
        assert!(a.contains(&[1, 2, 0]));
        assert!(!a.contains(&[1, 0, 0]));
    }
}
