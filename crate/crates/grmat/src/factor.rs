//! Monic irreducibles over small fields, factorization by trial division,
//! radicals, and counts of polynomials with small radical.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::poly::{monics, Poly, PolyError};
use crate::ring::Ring;

/// Largest irreducible degree kept in a table.
pub const MAX_TABLE_DEGREE: usize = 8;
/// Upper limit on `q^d` for any enumerated degree.
pub const ENUMERATION_BOUND: u64 = 1 << 20;

/// Monic irreducibles of each degree up to a cap, in the order of
/// [`Poly::sort_key`].
#[derive(Debug)]
pub struct Irreducibles {
    ring: Ring,
    by_degree: Vec<Vec<Poly>>,
}

fn shared_tables() -> &'static Mutex<HashMap<(u32, Vec<u32>), Arc<Irreducibles>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, Vec<u32>), Arc<Irreducibles>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl Irreducibles {
    pub fn new(ring: &Ring, max_deg: usize) -> Result<Irreducibles, PolyError> {
        if !ring.is_field() {
            return Err(PolyError::FieldRequired);
        }
        check_bound(ring, max_deg)?;
        let mut by_degree: Vec<Vec<Poly>> = vec![Vec::new()];
        for d in 1..=max_deg {
            let mut found: Vec<Poly> = monics(ring, d)
                .filter(|f| {
                    by_degree
                        .iter()
                        .take(d / 2 + 1)
                        .flatten()
                        .all(|g| f.rem(g).map(|r| !r.is_zero()).unwrap_or(true))
                })
                .collect();
            found.sort_by_key(|f| f.sort_key());
            by_degree.push(found);
        }
        Ok(Irreducibles { ring: ring.clone(), by_degree })
    }

    /// A process-wide table for `ring`, grown on demand.
    pub fn shared(ring: &Ring, max_deg: usize) -> Result<Arc<Irreducibles>, PolyError> {
        let key = (ring.p(), ring.defining_poly().to_vec());
        let mut cache = shared_tables().lock().expect("irreducible cache poisoned");
        if let Some(t) = cache.get(&key) {
            if t.max_degree() >= max_deg {
                return Ok(t.clone());
            }
        }
        let t = Arc::new(Irreducibles::new(ring, max_deg)?);
        cache.insert(key, t.clone());
        Ok(t)
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.len() - 1
    }

    pub fn of_degree(&self, d: usize) -> &[Poly] {
        self.by_degree.get(d).map_or(&[], |v| v.as_slice())
    }

    /// Irreducibles in ascending order up to degree `d`.
    pub fn up_to(&self, d: usize) -> impl Iterator<Item = &Poly> {
        self.by_degree.iter().take(d + 1).flatten()
    }

    /// Monic factorization `[(P, e)]`, sorted by [`Poly::sort_key`].
    pub fn factor(&self, f: &Poly) -> Result<Vec<(Poly, u32)>, PolyError> {
        let f = f.monic()?;
        let n = f.deg().unwrap_or(0);
        if n > 2 * self.max_degree() + 1 {
            return Err(PolyError::BoundExceeded(format!("degree {n} is beyond the trial-division table")));
        }
        let mut rest = f;
        let mut out = Vec::new();
        for g in self.up_to(n / 2) {
            let gd = g.deg().unwrap_or(0);
            if 2 * gd > rest.deg().unwrap_or(0) {
                break;
            }
            let mut e = 0;
            while let Some(q) = rest.div_exact(g) {
                rest = q;
                e += 1;
            }
            if e > 0 {
                out.push((g.clone(), e));
            }
        }
        if rest.deg().unwrap_or(0) > 0 {
            out.push((rest, 1));
        }
        out.sort_by_key(|(p, _)| p.sort_key());
        Ok(out)
    }

    pub fn is_irreducible(&self, f: &Poly) -> Result<bool, PolyError> {
        let fac = self.factor(f)?;
        Ok(fac.len() == 1 && fac[0].1 == 1)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
}

fn check_bound(ring: &Ring, d: usize) -> Result<(), PolyError> {
    if d > MAX_TABLE_DEGREE || ring.q() > 9 && d > 4 {
        return Err(PolyError::BoundExceeded(format!("irreducible table to degree {d} over F_{}", ring.q())));
    }
    match ring.q().checked_pow(d as u32) {
        Some(n) if n <= ENUMERATION_BOUND => Ok(()),
        _ => Err(PolyError::BoundExceeded(format!("{}^{d} candidates", ring.q()))),
    }
}

/// Monic irreducibles of degree exactly `d` in ascending order.
pub fn prime_enum(ring: &Ring, d: usize) -> Result<Vec<Poly>, PolyError> {
    Ok(Irreducibles::shared(ring, d)?.of_degree(d).to_vec())
}

/// `p`-th root of a polynomial with vanishing derivative.
fn pth_root(f: &Poly) -> Poly {
    let r = f.ring();
    let p = r.p() as usize;
    let c = (0..=f.deg().unwrap_or(0) / p)
        .map(|i| r.sigma_pow(&f.coeff(i * p), r.m() as u32 - 1))
        .collect();
    Poly::new(r, c)
}

/// Product of the distinct monic irreducible divisors of `f`.
pub fn radical(f: &Poly) -> Result<Poly, PolyError> {
    if !f.ring().is_field() {
        return Err(PolyError::FieldRequired);
    }
    let f = f.monic()?;
    if f.deg() == Some(0) {
        return Ok(f);
    }
    let df = f.derivative();
    if df.is_zero() {
        return radical(&pth_root(&f));
    }
    let g = f.gcd(&df)?;
    let w = f.div_exact(&g).expect("gcd divides");
    // strip from g every prime that also divides w; what remains has
    // multiplicities divisible by p
    let mut rest = g;
    loop {
        let h = rest.gcd(&w)?;
        if h.deg() == Some(0) {
            break;
        }
        rest = rest.div_exact(&h).expect("gcd divides");
    }
    Ok(&w * &radical(&rest)?)
}

/// Number of non-negative solutions of `sum e_i a_i = n`.
pub fn weighted_compositions(parts: &[usize], n: usize) -> u128 {
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for &a in parts {
        if a == 0 {
            continue;
        }
        for t in a..=n {
            ways[t] += ways[t - a];
        }
    }
    ways[n]
}

/// `F_g(n)`: monic degree-`n` polynomials whose radical divides the
/// squarefree `g`.
pub fn radical_divisor_count(table: &Irreducibles, g: &Poly, n: usize) -> Result<u128, PolyError> {
    let degs: Vec<usize> = table.factor(g)?.iter().map(|(p, _)| p.deg().unwrap_or(0)).collect();
    Ok(weighted_compositions(&degs, n))
}

/// `#{f monic, deg f = n, deg rad f <= d}`, summing over each squarefree
/// radical `g` the count `F_g(n - deg g)` of polynomials with radical
/// exactly `g`.
pub fn count_small_radical(ring: &Ring, n: usize, d: usize) -> Result<u128, PolyError> {
    let d = d.min(n);
    check_bound(ring, d)?;
    let table = Irreducibles::shared(ring, d.div_ceil(2).max(1))?;
    let mut total = 0u128;
    for deg in 0..=d {
        for g in monics(ring, deg) {
            let fac = table.factor(&g)?;
            if fac.iter().any(|(_, e)| *e > 1) {
                continue;
            }
            let degs: Vec<usize> = fac.iter().map(|(p, _)| p.deg().unwrap_or(0)).collect();
            total += weighted_compositions(&degs, n - deg);
        }
    }
    Ok(total)
}

/// Brute-force count of the same quantity over all `q^n` monics.
pub fn count_small_radical_brute(ring: &Ring, n: usize, d: usize) -> Result<u128, PolyError> {
    check_bound(ring, n)?;
    let mut total = 0;
    for f in monics(ring, n) {
        if radical(&f)?.deg().unwrap_or(0) <= d {
            total += 1;
        }
    }
    Ok(total)
}
