//! Hayes equivalence: monic polynomials agreeing in their `l` next-to-leading
//! coefficients and congruent modulo `H`. The unit classes form a finite
//! abelian group; its characters are built by discovering a polycyclic
//! presentation of that group.

use std::collections::HashMap;
use std::sync::Arc;

use crate::poly::{Poly, PolyError};
use crate::ring::{El, Ring};

/// Class of a monic polynomial under the Hayes relation for `(l, H)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HayesLabel {
    /// Next-to-leading coefficients `x^{d-1}, ..., x^{d-l}`, zero past the
    /// constant term.
    pub lead_window: Vec<El>,
    /// `f mod H`, padded to `deg H` coefficients.
    pub residue: Vec<El>,
}

/// The pair `(l, H)` defining a Hayes relation over a ring.
#[derive(Clone, Debug)]
pub struct HayesModulus {
    ring: Ring,
    l: usize,
    h: Poly,
}

impl HayesModulus {
    pub fn new(l: usize, h: &Poly) -> Result<HayesModulus, PolyError> {
        if !h.is_monic() {
            return Err(PolyError::NotMonic);
        }
        Ok(HayesModulus { ring: h.ring().clone(), l, h: h.clone() })
    }

    /// `(l, x^e)`.
    pub fn with_power_of_x(ring: &Ring, l: usize, e: usize) -> HayesModulus {
        HayesModulus { ring: ring.clone(), l, h: Poly::monomial(ring, ring.one(), e) }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn modulus(&self) -> &Poly {
        &self.h
    }

    fn hdeg(&self) -> usize {
        self.h.deg().unwrap_or(0)
    }

    pub fn label(&self, f: &Poly) -> Result<HayesLabel, PolyError> {
        if !f.is_monic() {
            return Err(PolyError::NotMonic);
        }
        let d = f.deg().unwrap_or(0);
        let lead_window = (1..=self.l)
            .map(|j| if j <= d { f.coeff(d - j) } else { El::ZERO })
            .collect();
        let residue = f.rem(&self.h)?.coeff_vec(self.hdeg());
        Ok(HayesLabel { lead_window, residue })
    }

    pub fn identity(&self) -> HayesLabel {
        let mut residue = vec![El::ZERO; self.hdeg()];
        if let Some(c) = residue.first_mut() {
            *c = self.ring.one();
        }
        HayesLabel { lead_window: vec![El::ZERO; self.l], residue }
    }

    /// Label of a product, from the labels of the factors.
    pub fn mul(&self, a: &HayesLabel, b: &HayesLabel) -> HayesLabel {
        let r = &self.ring;
        // f = x^d (1 + a_1 t + ...), t = 1/x, truncated at t^{l+1}
        let series = |w: &[El]| {
            let mut v = vec![r.one()];
            v.extend_from_slice(w);
            v
        };
        let (sa, sb) = (series(&a.lead_window), series(&b.lead_window));
        let mut prod = vec![El::ZERO; self.l + 1];
        for (i, x) in sa.iter().enumerate() {
            for (j, y) in sb.iter().enumerate() {
                if i + j <= self.l {
                    prod[i + j] = r.add(&prod[i + j], &r.mul(x, y));
                }
            }
        }
        let res_a = Poly::new(r, a.residue.clone());
        let res_b = Poly::new(r, b.residue.clone());
        let residue = (&res_a * &res_b).rem(&self.h).expect("monic modulus").coeff_vec(self.hdeg());
        HayesLabel { lead_window: prod[1..].to_vec(), residue }
    }

    /// Whether the class consists of polynomials coprime to `H`.
    pub fn is_unit_class(&self, a: &HayesLabel) -> bool {
        if self.hdeg() == 0 {
            return true;
        }
        let field = self.ring.residue_field();
        let res = Poly::new(&self.ring, a.residue.clone()).to_ring(&field);
        let h = self.h.to_ring(&field);
        res.gcd(&h).map(|g| g.deg() == Some(0)).unwrap_or(false)
    }

    /// `q^l phi(H)`, by enumerating residues.
    pub fn unit_group_order(&self) -> u64 {
        let units = crate::poly::below_degree(&self.ring, self.hdeg())
            .filter(|res| {
                let lbl = HayesLabel { lead_window: vec![], residue: res.coeff_vec(self.hdeg()) };
                self.is_unit_class(&lbl)
            })
            .count() as u64;
        self.ring.size().pow(self.l as u32) * units
    }

    /// Every unit class.
    pub fn unit_classes(&self, bound: u64) -> Result<Vec<HayesLabel>, PolyError> {
        let n = self.ring.size().pow((self.l + self.hdeg()) as u32);
        if n > bound {
            return Err(PolyError::BoundExceeded(format!("{n} candidate classes > {bound}")));
        }
        let windows: Vec<Vec<El>> = crate::poly::below_degree(&self.ring, self.l).map(|p| p.coeff_vec(self.l)).collect();
        let mut out = Vec::new();
        for res in crate::poly::below_degree(&self.ring, self.hdeg()) {
            let residue = res.coeff_vec(self.hdeg());
            if !self.is_unit_class(&HayesLabel { lead_window: vec![], residue: residue.clone() }) {
                continue;
            }
            for w in &windows {
                out.push(HayesLabel { lead_window: w.clone(), residue: residue.clone() });
            }
        }
        Ok(out)
    }

    /// A monic polynomial of degree `n` in the class (`n >= l + deg H`).
    pub fn representative(&self, a: &HayesLabel, n: usize) -> Result<Poly, PolyError> {
        let hd = self.hdeg();
        if n < self.l + hd {
            return Err(PolyError::Invalid(format!("degree {n} too small for the class")));
        }
        let r = &self.ring;
        let mut c = vec![El::ZERO; n + 1];
        c[n] = r.one();
        for (j, w) in a.lead_window.iter().enumerate() {
            c[n - 1 - j] = *w;
        }
        // the correction has degree < deg H <= n - l, below the window
        let top = Poly::new(r, c);
        let target = Poly::new(r, a.residue.clone());
        let fix = (&target - &top).rem(&self.h)?;
        Ok(&top + &fix)
    }
}

/// Polycyclic presentation of the unit group: every element is uniquely
/// `prod g_i^{x_i}` with `0 <= x_i < e_i`.
#[derive(Debug)]
pub struct HayesGroup {
    modulus: HayesModulus,
    elements: Vec<HayesLabel>,
    index: HashMap<HayesLabel, usize>,
    coords: Vec<Vec<u64>>,
    rel_orders: Vec<u64>,
    relations: Vec<Vec<u64>>,
}

impl HayesGroup {
    pub fn new(modulus: &HayesModulus, bound: u64) -> Result<HayesGroup, PolyError> {
        let elements = modulus.unit_classes(bound)?;
        let index: HashMap<HayesLabel, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let n = elements.len();
        let mut coords: Vec<Option<Vec<u64>>> = vec![None; n];
        let id = index[&modulus.identity()];
        coords[id] = Some(Vec::new());
        let mut members = vec![id];
        let mut rel_orders = Vec::new();
        let mut relations = Vec::new();
        while let Some(g) = (0..n).find(|&i| coords[i].is_none()) {
            let r = rel_orders.len();
            let mut powers = vec![id, g];
            loop {
                let last = *powers.last().expect("nonempty");
                if coords[last].is_some() {
                    break;
                }
                powers.push(index[&modulus.mul(&elements[last], &elements[g])]);
            }
            let e = powers.len() as u64 - 1;
            let rel = coords[*powers.last().expect("nonempty")].clone().expect("in subgroup");
            rel_orders.push(e);
            relations.push(rel);
            let old = members.clone();
            for &s in &old {
                let base = coords[s].clone().expect("member");
                let mut padded = base.clone();
                padded.resize(r + 1, 0);
                coords[s] = Some(padded);
                for (t, &gt) in powers.iter().enumerate().take(e as usize).skip(1) {
                    let idx = index[&modulus.mul(&elements[s], &elements[gt])];
                    let mut c = base.clone();
                    c.resize(r, 0);
                    c.push(t as u64);
                    coords[idx] = Some(c);
                    members.push(idx);
                }
            }
        }
        let rank = rel_orders.len();
        let coords = coords
            .into_iter()
            .map(|c| {
                let mut c = c.expect("every class reached");
                c.resize(rank, 0);
                c
            })
            .collect();
        let relations = relations
            .into_iter()
            .map(|mut c: Vec<u64>| {
                c.resize(rank, 0);
                c
            })
            .collect();
        Ok(HayesGroup { modulus: modulus.clone(), elements, index, coords, rel_orders, relations })
    }

    pub fn modulus(&self) -> &HayesModulus {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn elements(&self) -> &[HayesLabel] {
        &self.elements
    }

    pub fn relative_orders(&self) -> &[u64] {
        &self.rel_orders
    }

    fn coords_of(&self, f: &Poly) -> Option<&[u64]> {
        let lbl = self.modulus.label(f).ok()?;
        self.index.get(&lbl).map(|&i| self.coords[i].as_slice())
    }
}

/// A character of the Hayes unit group: `chi(prod g_i^{x_i}) = zeta_E^{sum v_i x_i}`.
#[derive(Clone, Debug)]
pub struct HayesCharacter {
    group: Arc<HayesGroup>,
    exps: Vec<u64>,
    order: u64,
}

impl HayesCharacter {
    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&v| v == 0)
    }

    /// Root-of-unity order `E` in which values are expressed.
    pub fn root_order(&self) -> u64 {
        self.order
    }

    /// Exponent of `chi(f)` as a power of `zeta_E`; `None` when `f` is not
    /// coprime to `H`.
    pub fn eval(&self, f: &Poly) -> Option<u64> {
        let c = self.group.coords_of(f)?;
        Some(c.iter().zip(&self.exps).map(|(x, v)| x * v).sum::<u64>() % self.order)
    }

    /// `chi(f)` as an exact fraction `a/E` of a full turn.
    pub fn eval_fraction(&self, f: &Poly) -> Option<(u64, u64)> {
        self.eval(f).map(|a| (a, self.order))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// The full dual group of the Hayes unit group for `(l, H)`.
pub fn hayes_characters(modulus: &HayesModulus, bound: u64) -> Result<Vec<HayesCharacter>, PolyError> {
    let group = Arc::new(HayesGroup::new(modulus, bound)?);
    let n = group.order();
    let rank = group.rel_orders.len();
    // extend characters one generator at a time: e_i v_i = sum_j c_ij v_j (mod N)
    let mut partial: Vec<Vec<u64>> = vec![Vec::new()];
    for i in 0..rank {
        let e = group.rel_orders[i];
        let mut next = Vec::new();
        for v in &partial {
            let b = group.relations[i][..i].iter().zip(v).map(|(c, x)| c * x).sum::<u64>() % n;
            debug_assert_eq!(b % e, 0);
            for t in 0..e {
                let mut w = v.clone();
                w.push((b / e + t * (n / e)) % n);
                next.push(w);
            }
        }
        partial = next;
    }
    let g = partial.iter().flatten().fold(n, |acc, &v| gcd(acc, v));
    let order = n / g;
    Ok(partial
        .into_iter()
        .map(|v| HayesCharacter { group: group.clone(), exps: v.into_iter().map(|x| x / g).collect(), order })
        .collect())
}

/// An exact element of `Z[zeta_E]`, accumulated as a multiset of exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloSum {
    order: u64,
    counts: Vec<i64>,
}

impl CycloSum {
    pub fn new(order: u64) -> CycloSum {
        CycloSum { order, counts: vec![0; order as usize] }
    }

    pub fn add_power(&mut self, exp: u64, mult: i64) {
        let e = (exp % self.order) as usize;
        self.counts[e] += mult;
    }

    /// Coefficients reduced modulo the cyclotomic polynomial `Phi_E`.
    pub fn reduced(&self) -> Vec<i64> {
        let phi = cyclotomic(self.order);
        let dphi = phi.len() - 1;
        let mut r = self.counts.clone();
        for i in (dphi..r.len()).rev() {
            let c = r[i];
            if c == 0 {
                continue;
            }
            for (j, &pc) in phi.iter().enumerate() {
                r[i - dphi + j] -= c * pc;
            }
        }
        r.truncate(dphi);
        r
    }

    pub fn is_zero(&self) -> bool {
        self.reduced().iter().all(|&c| c == 0)
    }

    /// The value when it is a rational integer.
    pub fn as_integer(&self) -> Option<i64> {
        let r = self.reduced();
        r.iter().skip(1).all(|&c| c == 0).then(|| r.first().copied().unwrap_or(0))
    }
}

/// Integer coefficients of `Phi_n`, low degree first.
pub fn cyclotomic(n: u64) -> Vec<i64> {
    let n = n as usize;
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in 1..n {
        if !n.is_multiple_of(d) {
            continue;
        }
        let div = cyclotomic(d as u64);
        num = exact_div(&num, &div);
    }
    num
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dd = den.len() - 1;
    let mut r = num.to_vec();
    let mut q = vec![0i64; num.len() - dd];
    for i in (dd..r.len()).rev() {
        let c = r[i];
        q[i - dd] = c;
        for (j, &x) in den.iter().enumerate() {
            r[i - dd + j] -= c * x;
        }
    }
    q
}

/// `sum chi(f)` over the given polynomials, exactly.
pub fn character_sum<'a>(chi: &HayesCharacter, polys: impl IntoIterator<Item = &'a Poly>) -> CycloSum {
    let mut s = CycloSum::new(chi.root_order());
    for f in polys {
        if let Some(e) = chi.eval(f) {
            s.add_power(e, 1);
        }
    }
    s
}
