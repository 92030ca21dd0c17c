//! Traces of matrix powers versus characteristic polynomial coefficients:
//! Newton's identities, Frobenius-corrected trace data, and the families of
//! intervals (or Hayes classes) a trace datum pins the polynomial to.

use thiserror::Error;

use crate::hayes::{HayesLabel, HayesModulus};
use crate::poly::{Poly, PolyError};
use crate::ring::{El, Ring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("entry {index} has valuation below min(v_p(i), k); no matrix realizes it")]
    DivisibilityViolation { index: i64 },
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `v_p(i)` for `i > 0`.
pub fn vp(p: u32, mut i: u64) -> u32 {
    let mut v = 0;
    while i.is_multiple_of(p as u64) {
        i /= p as u64;
        v += 1;
    }
    v
}

/// `S(d, k) = sum_{j=1..k} floor(d / p^j)`.
pub fn s_count(p: u32, d: u64, k: u32) -> u64 {
    (1..=k).map(|j| d / (p as u64).pow(j)).sum()
}

/// Power sums `p_1..p_d` of the roots of a monic `f`, by Newton's
/// recurrence `p_i = -sum_{j<i} c_j p_{i-j} - i c_i` with
/// `f = x^n + c_1 x^{n-1} + ...`.
pub fn coeffs_to_traces(f: &Poly, d: usize) -> Vec<El> {
    let r = f.ring();
    let n = f.deg().unwrap_or(0);
    let c = |i: usize| if i <= n { f.coeff(n - i) } else { El::ZERO };
    let mut sums: Vec<El> = Vec::with_capacity(d);
    for i in 1..=d {
        let mut acc = r.scale(&c(i), -(i as i64));
        for j in 1..i {
            acc = r.sub(&acc, &r.mul(&c(j), &sums[i - j - 1]));
        }
        sums.push(acc);
    }
    sums
}

/// Frobenius-corrected traces `a_i = tr(M^i) - [p|i] sigma(tr(M^{i/p}))`,
/// indexed by nonzero `i` with `p^k ∤ i`; negative indices belong to
/// `M^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceDatum {
    ring: Ring,
    neg_len: usize,
    pos_len: usize,
    entries: Vec<(i64, El)>,
}

impl TraceDatum {
    /// From raw traces `tr(M^1), ..., tr(M^d)`.
    pub fn from_traces(ring: &Ring, traces: &[El]) -> Result<TraceDatum, TraceError> {
        let entries = corrected(ring, traces, 1)?;
        Ok(TraceDatum { ring: ring.clone(), neg_len: 0, pos_len: traces.len(), entries })
    }

    /// Concatenates the data of `M^{-1}` (length `d1`) and `M` (length `d2`).
    pub fn from_two_sided(ring: &Ring, inverse_traces: &[El], traces: &[El]) -> Result<TraceDatum, TraceError> {
        let mut entries = corrected(ring, inverse_traces, -1)?;
        entries.reverse();
        entries.extend(corrected(ring, traces, 1)?);
        Ok(TraceDatum { ring: ring.clone(), neg_len: inverse_traces.len(), pos_len: traces.len(), entries })
    }

    /// Directly from corrected entries, checking the divisibility invariant.
    pub fn from_entries(ring: &Ring, neg_len: usize, pos_len: usize, entries: Vec<(i64, El)>) -> Result<TraceDatum, TraceError> {
        let k = ring.k();
        for (i, a) in &entries {
            let need = vp(ring.p(), i.unsigned_abs()).min(k);
            if ring.valuation(a).0 < need {
                return Err(TraceError::DivisibilityViolation { index: *i });
            }
        }
        Ok(TraceDatum { ring: ring.clone(), neg_len, pos_len, entries })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn entries(&self) -> &[(i64, El)] {
        &self.entries
    }

    pub fn get(&self, i: i64) -> Option<El> {
        self.entries.iter().find(|(j, _)| *j == i).map(|(_, a)| *a)
    }

    pub fn lengths(&self) -> (usize, usize) {
        (self.neg_len, self.pos_len)
    }

    fn side(&self, sign: i64) -> Vec<Option<El>> {
        let len = if sign > 0 { self.pos_len } else { self.neg_len };
        (1..=len as i64).map(|i| self.get(sign * i)).collect()
    }

    /// Stable integer code for histogramming: mixed radix over the digits
    /// of each `a_i / p^{v_p(i)}` modulo `p^{k - v_p(i)}`.
    pub fn cell(&self) -> u128 {
        let r = &self.ring;
        let mut code: u128 = 0;
        for (i, a) in &self.entries {
            let v = vp(r.p(), i.unsigned_abs()).min(r.k());
            let base = (r.p() as u128).pow(r.k() - v);
            let scaled = r.div_p_pow(a, v);
            for c in r.coeffs(&scaled) {
                code = code * base + (*c as u128 % base);
            }
        }
        code
    }

    /// Number of values a datum of this shape can take: `q^{kd - S}`.
    pub fn value_count(&self) -> u128 {
        let r = &self.ring;
        let e: u64 = self
            .entries
            .iter()
            .map(|(i, _)| (r.k() - vp(r.p(), i.unsigned_abs()).min(r.k())) as u64)
            .sum();
        (r.q() as u128).pow(e as u32)
    }
}

fn corrected(ring: &Ring, traces: &[El], sign: i64) -> Result<Vec<(i64, El)>, TraceError> {
    let p = ring.p() as u64;
    let k = ring.k();
    let mut out = Vec::new();
    for i in 1..=traces.len() as u64 {
        let v = vp(ring.p(), i);
        if v >= k {
            continue;
        }
        let mut a = traces[i as usize - 1];
        if i % p == 0 {
            a = ring.sub(&a, &ring.sigma(&traces[(i / p) as usize - 1]));
        }
        if ring.valuation(&a).0 < v {
            return Err(TraceError::DivisibilityViolation { index: sign * i as i64 });
        }
        out.push((sign * i as i64, a));
    }
    Ok(out)
}

/// Every prefix `(c_1, ..., c_d)` of monic coefficients whose power sums
/// reproduce the (positive side of the) datum.
fn coefficient_prefixes(ring: &Ring, corrected: &[Option<El>]) -> Result<Vec<Vec<El>>, TraceError> {
    let d = corrected.len();
    let p = ring.p() as usize;
    let k = ring.k();
    // raw traces where known
    let mut raw: Vec<Option<El>> = vec![None; d];
    for i in 1..=d {
        raw[i - 1] = corrected[i - 1].map(|a| {
            if i % p == 0 {
                ring.add(&a, &ring.sigma(&raw[i / p - 1].expect("divisor index kept")))
            } else {
                a
            }
        });
    }
    // each state: (coefficients, power sums)
    let mut states: Vec<(Vec<El>, Vec<El>)> = vec![(Vec::new(), Vec::new())];
    for i in 1..=d {
        let mut next = Vec::new();
        for (cs, ps) in &states {
            let mut tail = El::ZERO;
            for j in 1..i {
                tail = ring.sub(&tail, &ring.mul(&cs[j - 1], &ps[i - j - 1]));
            }
            let options: Vec<El> = match raw[i - 1] {
                None => ring.elements().collect(),
                Some(tr) => {
                    let j = vp(ring.p(), i as u64);
                    let u = i as i64 / (p as i64).pow(j);
                    let rhs = ring.sub(&tail, &tr);
                    if ring.valuation(&rhs).0 < j {
                        return Err(TraceError::DivisibilityViolation { index: i as i64 });
                    }
                    let low = ring.at_level(k - j).expect("level in range");
                    let base = ring.mul(&ring.div_p_pow(&rhs, j), &ring.inv(&ring.from_int(u)).expect("unit"));
                    let base = ring.lift(&ring.reduce(&base, &low), ring);
                    if j == 0 {
                        vec![base]
                    } else {
                        let digits = ring.at_level(j).expect("level in range");
                        digits
                            .elements()
                            .map(|t| ring.add(&base, &ring.mul_p_pow(&t, k - j)))
                            .collect()
                    }
                }
            };
            for c in options {
                let mut cs2 = cs.clone();
                cs2.push(c);
                let mut ps2 = ps.clone();
                ps2.push(ring.sub(&tail, &ring.scale(&c, i as i64)));
                next.push((cs2, ps2));
            }
        }
        states = next;
    }
    Ok(states.into_iter().map(|(c, _)| c).collect())
}

fn monic_from_prefix(ring: &Ring, prefix: &[El], n: usize) -> Poly {
    let mut c = vec![El::ZERO; n + 1];
    c[n] = ring.one();
    for (i, e) in prefix.iter().enumerate() {
        c[n - 1 - i] = *e;
    }
    Poly::new(ring, c)
}

/// The `q^{S(d,k)}` degree-`n` monics `f_j` (trailing coefficients zero)
/// with `TR^d(M) = datum` iff `char(M)` lies in some `I(f_j, n - d)`.
pub fn traces_to_interval_family(datum: &TraceDatum, n: usize) -> Result<Vec<Poly>, TraceError> {
    if datum.neg_len != 0 {
        return Err(TraceError::Shape("use the Hayes family for two-sided data".into()));
    }
    if datum.pos_len > n {
        return Err(TraceError::Shape(format!("length {} exceeds degree {n}", datum.pos_len)));
    }
    let prefixes = coefficient_prefixes(&datum.ring, &datum.side(1))?;
    Ok(prefixes.iter().map(|c| monic_from_prefix(&datum.ring, c, n)).collect())
}

/// Hayes modulus `(d2, x^{d1+1})` attached to a two-sided datum.
pub fn two_sided_modulus(ring: &Ring, d1: usize, d2: usize) -> HayesModulus {
    HayesModulus::with_power_of_x(ring, d2, d1 + 1)
}

/// The Hayes classes for `(d2, x^{d1+1})` that a two-sided datum allows:
/// `q^{S(d1,k)+S(d2,k)}` choices of coefficient prefixes times the units
/// for the constant term.
pub fn traces_to_hayes_family(datum: &TraceDatum, n: usize) -> Result<Vec<HayesLabel>, TraceError> {
    let (d1, d2) = datum.lengths();
    if d1 + d2 + 1 >= n {
        return Err(TraceError::Shape(format!("d1 + d2 = {} must be < n - 1", d1 + d2)));
    }
    let ring = &datum.ring;
    let modulus = two_sided_modulus(ring, d1, d2);
    let tops = coefficient_prefixes(ring, &datum.side(1))?;
    let bottoms = coefficient_prefixes(ring, &datum.side(-1))?;
    let mut out = Vec::new();
    for top in &tops {
        for bottom in &bottoms {
            for c0 in ring.units() {
                // char(M^{-1}) = h^r, so h_i = c0 * (coefficient of x^{n-i} in h^r)
                let mut residue = vec![c0];
                residue.extend(bottom.iter().map(|b| ring.mul(b, &c0)));
                out.push(HayesLabel { lead_window: top.clone(), residue });
            }
        }
    }
    debug_assert!(out.iter().all(|l| modulus.is_unit_class(l)));
    Ok(out)
}

/// `h ∈ I(g, width)`: monic of degree `deg g` agreeing with `g` above
/// degree `width - 1`. With `reversed`, tests `h^r` instead (requires a unit
/// constant term).
pub fn interval_membership(h: &Poly, g: &Poly, width: usize, reversed: bool) -> bool {
    let h = if reversed {
        match h.reciprocal() {
            Ok(r) if h.is_monic() => r,
            _ => return false,
        }
    } else {
        h.clone()
    };
    h.is_monic() && h.deg() == g.deg() && (&h - g).degree() < width as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::monics;

    #[test]
    fn quadratic_newton() {
        let r = Ring::new(3, 1, 2).unwrap();
        let (e1, e2) = (r.from_int(4), r.from_int(7));
        let f = Poly::new(&r, vec![e2, e1, r.one()]);
        let t = coeffs_to_traces(&f, 2);
        assert_eq!(t[0], r.neg(&e1));
        assert_eq!(t[1], r.sub(&r.mul(&e1, &e1), &r.scale(&e2, 2)));
    }

    #[test]
    fn unipotent_traces() {
        let r = Ring::field(5, 1).unwrap();
        let f = Poly::from_ints(&r, &[-1, 1]).pow(3);
        for t in coeffs_to_traces(&f, 6) {
            assert_eq!(t, r.from_int(3));
        }
    }

    #[test]
    fn s_count_example() {
        assert_eq!(s_count(3, 7, 2), 2);
        assert_eq!(s_count(3, 7, 1), 2);
        assert_eq!(s_count(5, 3, 1), 0);
    }

    #[test]
    fn identity_correction_vanishes() {
        let r = Ring::new(3, 1, 2).unwrap();
        let n = r.from_int(4);
        let d = TraceDatum::from_traces(&r, &[n, n, n]).unwrap();
        assert_eq!(d.get(3), Some(r.zero()));
    }

    #[test]
    fn unipotent_two_by_two() {
        let r = Ring::new(3, 1, 2).unwrap();
        let two = r.from_int(2);
        let d = TraceDatum::from_traces(&r, &[two, two, two]).unwrap();
        assert!(d.get(3).unwrap().is_zero());
    }

    #[test]
    fn violation_detected() {
        let r = Ring::new(3, 1, 2).unwrap();
        let err = TraceDatum::from_traces(&r, &[r.zero(), r.zero(), r.one()]).unwrap_err();
        assert_eq!(err, TraceError::DivisibilityViolation { index: 3 });
    }

    #[test]
    fn family_sizes() {
        let r = Ring::new(3, 1, 2).unwrap();
        let d = TraceDatum::from_traces(&r, &vec![r.zero(); 7]).unwrap();
        assert_eq!(traces_to_interval_family(&d, 8).unwrap().len(), 9);
        let f = Ring::field(3, 1).unwrap();
        let d = TraceDatum::from_traces(&f, &[f.zero(); 2]).unwrap();
        assert_eq!(traces_to_interval_family(&d, 5).unwrap().len(), 1);
    }

    #[test]
    fn datum_space_size() {
        let r = Ring::new(3, 1, 2).unwrap();
        let mut cells = std::collections::HashSet::new();
        for f in monics(&r, 3) {
            let t = coeffs_to_traces(&f, 3);
            cells.insert(TraceDatum::from_traces(&r, &t).unwrap().cell());
        }
        assert_eq!(cells.len(), 243);
        let d = TraceDatum::from_traces(&r, &coeffs_to_traces(&Poly::x(&r).pow(3), 3)).unwrap();
        assert_eq!(d.value_count(), 243);
    }

    #[test]
    fn families_partition_monics() {
        let r = Ring::new(3, 1, 2).unwrap();
        let n = 3;
        let d = 3;
        for f in monics(&r, n) {
            let datum = TraceDatum::from_traces(&r, &coeffs_to_traces(&f, d)).unwrap();
            let fam = traces_to_interval_family(&datum, n).unwrap();
            assert_eq!(fam.len(), 3);
            assert!(fam.iter().any(|g| interval_membership(&f, g, n - d, false)));
        }
    }

    #[test]
    fn interval_basics() {
        let r = Ring::field(3, 1).unwrap();
        let g = Poly::from_ints(&r, &[1, 2, 0, 1]);
        assert!(interval_membership(&g, &g, 1, false));
        let h = Poly::from_ints(&r, &[1, 2, 1, 1]);
        assert!(!interval_membership(&h, &g, 2, false));
        assert!(interval_membership(&h, &g, 3, false));
    }
}
