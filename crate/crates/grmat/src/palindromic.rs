//! Palindromic and skew-palindromic polynomial spaces, and the maps that
//! identify monic palindromics with monic polynomials of half degree.

use crate::linalg::{self, Subspace};
use crate::poly::{PolyError, Poly};
use crate::ring::{El, Ring, RingError};

/// `x^n f(1/x) = f` with `deg f <= n`.
pub fn is_palindromic(f: &Poly, n: usize) -> bool {
    f.degree() <= n as i64 && f.reverse(n) == *f
}

/// `x^n tau(f)(1/x)`.
pub fn star(f: &Poly, n: usize) -> Result<Poly, PolyError> {
    Ok(f.tau()?.reverse(n))
}

fn check_norm_one(ring: &Ring, alpha: &El) -> Result<(), PolyError> {
    let t = ring.tau(alpha)?;
    if ring.is_one(&ring.mul(alpha, &t)) {
        Ok(())
    } else {
        Err(PolyError::Invalid("skew parameter must have norm one".into()))
    }
}

/// `f^* / tau(alpha) = f`, with respect to `n`.
pub fn is_skew_palindromic(f: &Poly, n: usize, alpha: &El) -> Result<bool, PolyError> {
    let ring = f.ring();
    check_norm_one(ring, alpha)?;
    if f.degree() > n as i64 {
        return Ok(false);
    }
    let s = ring.inv(&ring.tau(alpha)?)?;
    Ok(star(f, n)?.scale(&s) == *f)
}

/// Basis `x^i + x^{n-i}` (and `x^{n/2}`) of the palindromics of degree `< n`.
pub fn palindromic_basis(ring: &Ring, n: usize) -> Vec<Poly> {
    let mut out = Vec::new();
    for i in 1..=n / 2 {
        let j = n - i;
        let mut b = Poly::monomial(ring, ring.one(), i);
        if j != i {
            b = &b + &Poly::monomial(ring, ring.one(), j);
        }
        out.push(b);
    }
    out
}

/// Every palindromic polynomial of degree `< n` (there are `q^δ`,
/// `δ = ⌈(n-1)/2⌉`).
pub fn palindromic_polys(ring: &Ring, n: usize) -> Vec<Poly> {
    span_all(ring, &palindromic_basis(ring, n))
}

/// All `F_q`-combinations of `basis` over the field `ring`.
fn span_all(ring: &Ring, basis: &[Poly]) -> Vec<Poly> {
    let mut out = vec![Poly::zero(ring)];
    for b in basis {
        out = out
            .iter()
            .flat_map(|acc| ring.elements().map(move |c| acc + &b.scale(&c)))
            .collect();
    }
    out
}

/// The `alpha`-skew palindromics of degree `< n` as an `F_p`-subspace of
/// coefficient coordinates (length `n * m`).
pub fn skew_palindromic_space(ring: &Ring, n: usize, alpha: &El) -> Result<Subspace, PolyError> {
    check_norm_one(ring, alpha)?;
    if !ring.is_field() {
        return Err(PolyError::FieldRequired);
    }
    let s = ring.inv(&ring.tau(alpha)?)?;
    let cond = linalg::matrix_of(ring, n, |c| {
        let f = Poly::new(ring, c.to_vec());
        let g = star(&f, n).expect("ring has an involution").scale(&s);
        (&g - &f).coeff_vec(n + 1)
    });
    let ker = linalg::kernel(&cond, n * ring.m(), ring.p());
    Ok(Subspace::span(ring.p(), n * ring.m(), &ker))
}

/// Every `alpha`-skew palindromic of degree `< n`.
pub fn skew_palindromic_polys(ring: &Ring, n: usize, alpha: &El) -> Result<Vec<Poly>, PolyError> {
    let space = skew_palindromic_space(ring, n, alpha)?;
    Ok(enumerate_space(ring, &space))
}

/// All vectors of an `F_p`-subspace, read back as polynomials.
pub fn enumerate_space(ring: &Ring, space: &Subspace) -> Vec<Poly> {
    let p = ring.p();
    let mut vecs = vec![vec![0u32; space.ambient()]];
    for b in space.basis() {
        vecs = vecs
            .iter()
            .flat_map(|v| {
                (0..p).map(move |c| v.iter().zip(b).map(|(&x, &y)| (x + c * y) % p).collect())
            })
            .collect();
    }
    vecs.iter().map(|v| Poly::new(ring, linalg::els_of(ring, v))).collect()
}

/// `g(x + 1/x) x^{deg g}`, i.e. `sum g_i (x^2+1)^i x^{deg g - i}`.
fn psi_core(g: &Poly) -> Poly {
    let ring = g.ring();
    let n = g.deg().unwrap_or(0);
    let quad = Poly::from_ints(ring, &[1, 0, 1]);
    let mut acc = Poly::zero(ring);
    let mut pw = Poly::one(ring);
    for i in 0..=n {
        acc = &acc + &pw.shift(n - i).scale(&g.coeff(i));
        pw = &pw * &quad;
    }
    acc
}

/// Palindromic lift of a monic `g` to degree `target`: `g(x+1/x) x^{n}` when
/// `target = 2n` and `(x+1) g(x+1/x) x^{n-1}` when `target = 2n-1`.
pub fn psi(g: &Poly, target: usize) -> Result<Poly, PolyError> {
    if !g.is_monic() || g.deg() != Some(target / 2) {
        return Err(PolyError::Invalid(format!("psi to degree {target} needs a monic of degree {}", target / 2)));
    }
    let core = psi_core(g);
    if target.is_multiple_of(2) {
        Ok(core)
    } else {
        Ok(&Poly::from_ints(g.ring(), &[1, 1]) * &core)
    }
}

/// Inverse of [`psi`] on monic palindromics.
pub fn phi(f: &Poly) -> Result<Poly, PolyError> {
    let ring = f.ring();
    let deg = f.deg().ok_or(PolyError::NotPalindromic)?;
    if !f.is_monic() || !is_palindromic(f, deg) {
        return Err(PolyError::NotPalindromic);
    }
    let even = if deg % 2 == 1 {
        f.div_exact(&Poly::from_ints(ring, &[1, 1])).ok_or(PolyError::NotPalindromic)?
    } else {
        f.clone()
    };
    let n = even.deg().unwrap_or(0) / 2;
    let quad = Poly::from_ints(ring, &[1, 0, 1]);
    let pows: Vec<Poly> = std::iter::successors(Some(Poly::one(ring)), |p| Some(p * &quad)).take(n + 1).collect();
    let mut rest = even;
    let mut g = vec![ring.zero(); n + 1];
    for i in (0..=n).rev() {
        let c = rest.coeff(n + i);
        g[i] = c;
        rest = &rest - &pows[i].shift(n - i).scale(&c);
    }
    if !rest.is_zero() {
        return Err(PolyError::NotPalindromic);
    }
    Ok(Poly::new(ring, g))
}

/// `beta` with `tau(beta)/beta = alpha`, for norm-one `alpha`.
pub fn hilbert90(ring: &Ring, alpha: &El) -> Result<El, PolyError> {
    check_norm_one(ring, alpha)?;
    for b in ring.units() {
        let lhs = ring.tau(&b)?;
        if lhs == ring.mul(alpha, &b) {
            return Ok(b);
        }
    }
    Err(RingError::NonUnit.into())
}
