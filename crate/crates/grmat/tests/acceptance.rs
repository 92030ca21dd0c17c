//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`; pass criterion numbers
//! after `--` to run a subset.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use grmat::char_derivative::{closed_form_adjugate, raw_block_matrix, verify_image, Block, BlockType, PolyMatrix};
use grmat::conjugacy::{
    charpoly_prob_gl, enumerate_data, fulman_prob_gl, fulman_prob_o, fulman_prob_so, fulman_prob_sp, fulman_prob_u,
    orthogonal_sign_of_datum, so_data,
};
use grmat::experiments::{
    chi_square_uniformity, lifting_fibers, newton_correspondence, run_fulman_consistency, run_onestep_check,
    run_single_trace, run_trace_congruence, run_trace_equidistribution, ExperimentConfig, Mode, TraceShape,
};
use grmat::factor::{count_small_radical, count_small_radical_brute, radical, radical_divisor_count, Irreducibles};
use grmat::groups::{enumerate_fq, sample_fq, Family, GroupSpec, Sign};
use grmat::hayes::{character_sum, hayes_characters, CycloSum, HayesModulus};
use grmat::matrix::Matrix;
use grmat::palindromic::{palindromic_polys, skew_palindromic_polys};
use grmat::poly::{monics, Poly};
use grmat::ring::Ring;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn f3() -> Ring {
    Ring::field(3, 1).unwrap()
}

fn exact(family: Family, n: usize, p: u32, k: u32) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(family, n, p, 1, k);
    cfg.mode = Mode::Exact;
    cfg
}

fn trace_congruences() -> Verdict {
    let mut checks = 0;
    let mut violations = 0;
    let mut samples = 0;
    for fam in [Family::GL, Family::SL, Family::Sp, Family::SO, Family::U] {
        let sizes: &[usize] = if fam == Family::Sp { &[1, 2] } else { &[2, 3, 4] };
        for p in [3u32, 5] {
            let grid: Vec<(usize, u32)> = sizes.iter().flat_map(|&n| (1..=3).map(move |k| (n, k))).collect();
            let each = 10_000usize.div_ceil(grid.len());
            for (i, &(n, k)) in grid.iter().enumerate() {
                let mut cfg = ExperimentConfig::new(fam, n, p, 1, k);
                cfg.samples = each;
                cfg.seed = 1000 + i as u64;
                cfg.workers = 0;
                let rep = run_trace_congruence(&cfg, None).unwrap();
                checks += rep.checks;
                violations += rep.violations;
                samples += rep.samples;
            }
        }
    }
    verdict(violations == 0, format!("{samples} samples, {checks} congruences, {violations} violations"))
}

fn image_theorems() -> Verdict {
    let mut checked = 0;
    let mut mismatches = 0;
    let mut run = |spec: &GroupSpec, mats: Vec<Matrix>| {
        let lie = spec.lie_algebra();
        for a0 in &mats {
            checked += 1;
            if !verify_image(spec, &lie, a0).unwrap().pass {
                mismatches += 1;
            }
        }
    };
    for fam in [Family::GL, Family::SL] {
        let spec = GroupSpec::new(fam, 2, 3, 1, 1, None).unwrap();
        let all = enumerate_fq(&spec, 100).unwrap();
        run(&spec, all);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (fam, n, sign) in [
        (Family::Sp, 2, None),
        (Family::SO, 3, Some(Sign::Plus)),
        (Family::SO, 3, Some(Sign::Minus)),
        (Family::U, 2, None),
        (Family::U, 3, None),
    ] {
        let spec = GroupSpec::new(fam, n, 3, 1, 1, sign).unwrap();
        let mats = (0..200).map(|_| sample_fq(&spec, &mut rng)).collect();
        run(&spec, mats);
    }
    verdict(mismatches == 0 && checked == 48 + 24 + 1000, format!("{checked} base points, {mismatches} mismatches"))
}

fn one_step() -> Verdict {
    let gl = run_onestep_check(&ExperimentConfig { shape: TraceShape::Positive { d: 1 }, ..exact(Family::GL, 2, 3, 2) }).unwrap();
    let sp = run_onestep_check(&ExperimentConfig { shape: TraceShape::Positive { d: 1 }, ..exact(Family::Sp, 1, 3, 2) }).unwrap();
    let both_branches = |r: &grmat::experiments::OneStepReport| r.satisfied > 0 && r.satisfied < r.checked;
    verdict(
        gl.pass && sp.pass && both_branches(&gl) && both_branches(&sp),
        format!(
            "GL_2: {}/{} base points meet the hypothesis, Sp_2: {}/{}; every fiber exact",
            gl.satisfied, gl.checked, sp.satisfied, sp.checked
        ),
    )
}

fn total(data: impl IntoIterator<Item = BigRational>) -> BigRational {
    data.into_iter().fold(BigRational::zero(), |a, b| a + b)
}

fn fulman_formulas() -> Verdict {
    let r = f3();
    let r9 = Ring::field(3, 2).unwrap();
    let one = BigRational::one();
    let mut sums = Vec::new();
    for n in 1..=3 {
        sums.push((format!("GL_{n}"), total(enumerate_data(Family::GL, n, &r).unwrap().iter().map(|d| fulman_prob_gl(d).unwrap()))));
    }
    for dim in [2, 4] {
        sums.push((format!("Sp_{dim}"), total(enumerate_data(Family::Sp, dim, &r).unwrap().iter().map(|d| fulman_prob_sp(d).unwrap()))));
    }
    for n in 1..=3 {
        for sign in [Sign::Plus, Sign::Minus] {
            if n == 1 && sign == Sign::Minus {
                continue;
            }
            let o = enumerate_data(Family::SO, n, &r).unwrap();
            let o = total(o.iter().filter(|d| orthogonal_sign_of_datum(d, &r) == sign).map(|d| fulman_prob_o(d).unwrap()));
            sums.push((format!("O{sign}_{n}"), o));
            sums.push((format!("SO{sign}_{n}"), total(so_data(n, sign, &r).unwrap().iter().map(|d| fulman_prob_so(d).unwrap()))));
        }
    }
    for n in 1..=2 {
        sums.push((format!("U_{n}"), total(enumerate_data(Family::U, n, &r9).unwrap().iter().map(|d| fulman_prob_u(d).unwrap()))));
    }
    let bad: Vec<&String> = sums.iter().filter(|(_, s)| *s != one).map(|(l, _)| l).collect();
    let mut consistent = Vec::new();
    for (fam, n) in [(Family::GL, 2), (Family::SL, 2), (Family::Sp, 1)] {
        let rep = run_fulman_consistency(&exact(fam, n, 3, 1)).unwrap();
        consistent.push(rep.pass && rep.orbit_check != Some(false));
    }
    verdict(
        bad.is_empty() && consistent.iter().all(|&c| c),
        format!("{} total masses equal 1 (failing: {bad:?}); GL_2, SL_2, Sp_2 class frequencies exact: {consistent:?}", sums.len()),
    )
}

fn reiner_law() -> Verdict {
    let r = f3();
    let spec = GroupSpec::new(Family::GL, 2, 3, 1, 1, None).unwrap();
    let all = enumerate_fq(&spec, 100).unwrap();
    let mut counts: HashMap<Poly, u64> = HashMap::new();
    for m in &all {
        *counts.entry(m.char_poly()).or_insert(0) += 1;
    }
    let quadratics: Vec<Poly> = monics(&r, 2).filter(|f| !f.coeff(0).is_zero()).collect();
    let matches = quadratics
        .iter()
        .filter(|f| {
            let freq = BigRational::new(BigInt::from(counts.get(*f).copied().unwrap_or(0)), BigInt::from(all.len()));
            charpoly_prob_gl(f).unwrap() == freq
        })
        .count();
    let sums_ok = (1..=3).all(|n| total(monics(&r, n).filter(|f| !f.coeff(0).is_zero()).map(|f| charpoly_prob_gl(&f).unwrap())) == BigRational::one());
    verdict(
        matches == 6 && quadratics.len() == 6 && sums_ok,
        format!("{matches}/6 quadratic frequencies exact over 48 matrices; sums over n <= 3 equal 1: {sums_ok}"),
    )
}

fn newton_hayes() -> Verdict {
    let spec = GroupSpec::new(Family::GL, 2, 3, 1, 2, None).unwrap();
    let rep = newton_correspondence(&spec, 2, 0).unwrap();
    verdict(rep.pass && rep.elements == 3888, format!("{} elements, {} trace data, family size {}", rep.elements, rep.data, rep.family_size))
}

/// `sum_chi chi(f) conj(chi(g))` for every pair of small coprime monics.
fn second_orthogonality(modulus: &HayesModulus, order: u64) -> bool {
    let r = modulus.ring();
    let chars = hayes_characters(modulus, 10_000).unwrap();
    let e = chars.iter().map(|c| c.root_order()).fold(1, num_integer_lcm);
    let polys: Vec<Poly> = (1..=3).flat_map(|d| monics(r, d).collect::<Vec<_>>()).filter(|f| !f.coeff(0).is_zero()).collect();
    polys.iter().all(|f| {
        polys.iter().all(|g| {
            let mut s = CycloSum::new(e);
            for c in &chars {
                let o = c.root_order();
                let x = (c.eval(f).unwrap() + o - c.eval(g).unwrap()) % o;
                s.add_power(x * (e / o), 1);
            }
            let same = modulus.label(f).unwrap() == modulus.label(g).unwrap();
            s.as_integer() == Some(if same { order as i64 } else { 0 })
        })
    })
}

fn num_integer_lcm(a: u64, b: u64) -> u64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

fn hayes_machinery() -> Verdict {
    let r = f3();
    let x = Poly::x(&r);
    let mut notes = Vec::new();
    let mut ok = true;
    for (l, h, expected) in [(1, x.clone(), 6u64), (2, x.clone(), 18), (1, x.pow(2), 18)] {
        let m = HayesModulus::new(l, &h).unwrap();
        let order = m.unit_group_order();
        let chars = hayes_characters(&m, 10_000).unwrap();
        let reps: Vec<Poly> = m.unit_classes(10_000).unwrap().iter().map(|c| m.representative(c, 4).unwrap()).collect();
        let first = chars.iter().all(|c| {
            let s = character_sum(c, &reps);
            if c.is_trivial() {
                s.as_integer() == Some(order as i64)
            } else {
                s.is_zero()
            }
        });
        let second = second_orthogonality(&m, order);
        ok &= order == expected && chars.len() as u64 == order && first && second;
        notes.push(format!("({l},{}) order {order}", h.fmt_terms()));
    }
    // palindromic sums over F_3 and F_9
    let mut pal_cases = 0;
    for field in [f3(), Ring::field(3, 2).unwrap()] {
        for n in 1..=6usize {
            let delta = n / 2;
            let polys: Vec<Poly> = palindromic_polys(&field, n).iter().map(|f| f + &Poly::monomial(&field, field.one(), n)).collect();
            for l in 0..=delta {
                let chars = hayes_characters(&HayesModulus::new(l, &Poly::one(&field)).unwrap(), 1_000_000).unwrap();
                for c in &chars {
                    let s = character_sum(c, &polys);
                    let want = if c.is_trivial() { Some((field.q() as i64).pow(delta as u32)) } else { Some(0) };
                    ok &= s.as_integer() == want;
                    pal_cases += 1;
                }
            }
        }
    }
    // skew-palindromic sums over F_9 for every norm-one parameter
    let r9 = Ring::field(3, 2).unwrap();
    let norm_one: Vec<_> = r9.units().filter(|a| r9.is_one(&r9.mul(a, &r9.tau(a).unwrap()))).collect();
    let mut skew_cases = 0;
    let mut boundary_nonvanishing = 0;
    for alpha in &norm_one {
        for n in 1..=6usize {
            let delta = n / 2;
            let polys: Vec<Poly> =
                skew_palindromic_polys(&r9, n, alpha).unwrap().iter().map(|f| f + &Poly::monomial(&r9, r9.one(), n)).collect();
            ok &= polys.len() as u64 == 3u64.pow(n as u32 - 1);
            for l in 0..=delta {
                let chars = hayes_characters(&HayesModulus::new(l, &Poly::one(&r9)).unwrap(), 1_000_000).unwrap();
                let boundary = n % 2 == 0 && l == delta && l > 0;
                for c in &chars {
                    let s = character_sum(c, &polys);
                    if c.is_trivial() {
                        ok &= s.as_integer() == Some(polys.len() as i64);
                    } else if boundary {
                        boundary_nonvanishing += usize::from(!s.is_zero());
                    } else {
                        ok &= s.is_zero();
                    }
                    skew_cases += 1;
                }
            }
        }
    }
    notes.push(format!(
        "{pal_cases} palindromic and {skew_cases} skew-palindromic sums ({boundary_nonvanishing} non-vanishing at even n, l = n/2, reported)"
    ));
    verdict(ok, notes.join("; "))
}

fn closed_form_adjugates() -> Verdict {
    let mut compared = 0;
    let mut mismatches = 0;
    let mut kinds = std::collections::BTreeSet::new();
    for p in [3u32, 5] {
        let r = Ring::field(p, 1).unwrap();
        for m in 1..=3 {
            let mut alphas = vec![r.one(), r.from_int(-1)];
            if p == 5 {
                alphas.push(r.from_int(2));
            }
            for &a in &alphas {
                let pm = r.is_one(&a) || r.is_one(&r.neg(&a));
                let mut cases = vec![(Family::GL, BlockType::I), (Family::Sp, BlockType::I), (Family::SO, BlockType::I)];
                if pm {
                    cases.extend([
                        (Family::Sp, BlockType::II),
                        (Family::Sp, BlockType::III),
                        (Family::SO, BlockType::II),
                        (Family::SO, BlockType::III),
                    ]);
                }
                for (fam, kind) in cases {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let b = Block::new(kind, a, m).with_sign(sign);
                        let Ok(closed) = closed_form_adjugate(fam, &r, &b) else {
                            continue;
                        };
                        let generic = PolyMatrix::adjugate_of(&raw_block_matrix(fam, &r, &b).unwrap());
                        compared += 1;
                        kinds.insert(format!("{fam}-{kind:?}"));
                        if closed != generic {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
    }
    verdict(mismatches == 0 && kinds.len() == 7, format!("{compared} blocks over {} family/type pairs, {mismatches} mismatches", kinds.len()))
}

fn radical_counting() -> Verdict {
    let r = f3();
    let table = Irreducibles::new(&r, 4).unwrap();
    let mut ok = true;
    let mut cases = 0;
    for n in 0..=8 {
        for d in 0..=4 {
            ok &= count_small_radical(&r, n, d).unwrap() == count_small_radical_brute(&r, n, d).unwrap();
            cases += 1;
        }
    }
    let squarefree: Vec<Poly> = (0..=4)
        .flat_map(|d| monics(&r, d).collect::<Vec<_>>())
        .filter(|g| table.factor(g).unwrap().iter().all(|(_, e)| *e == 1))
        .collect();
    for n in 0..=8 {
        let radicals: Vec<Poly> = monics(&r, n).map(|f| radical(&f).unwrap()).collect();
        for g in &squarefree {
            let brute = radicals.iter().filter(|rad| g.rem(rad).unwrap().is_zero()).count() as u128;
            ok &= radical_divisor_count(&table, g, n).unwrap() == brute;
            cases += 1;
        }
    }
    verdict(ok, format!("{cases} counts equal brute force"))
}

fn sampler_exactness() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for (fam, n, k, sign) in [
        (Family::SL, 2, 1, None),
        (Family::Sp, 1, 1, None),
        (Family::SO, 2, 1, Some(Sign::Plus)),
        (Family::SO, 2, 1, Some(Sign::Minus)),
        (Family::U, 1, 1, None),
        (Family::GL, 1, 3, None),
    ] {
        let mut cfg = ExperimentConfig::new(fam, n, 3, 1, k);
        cfg.sign = sign;
        cfg.samples = 48_000;
        cfg.seed = 48;
        cfg.workers = 0;
        let rep = chi_square_uniformity(&cfg, 0.001).unwrap();
        ok &= rep.pass;
        notes.push(format!("{} p={:.3}", rep.group, rep.p_value));
    }
    let sl = GroupSpec::new(Family::SL, 2, 3, 1, 2, None).unwrap();
    let fibers = lifting_fibers(&sl, 0).unwrap();
    // independent count of det = 1 over all of M_2(Z/9)
    let z9 = sl.ring().clone();
    let els: Vec<_> = z9.elements().collect();
    let mut brute = 0;
    for a in &els {
        for b in &els {
            for c in &els {
                for d in &els {
                    if z9.is_one(&z9.sub(&z9.mul(a, d), &z9.mul(b, c))) {
                        brute += 1;
                    }
                }
            }
        }
    }
    ok &= fibers.pass && brute == fibers.elements;
    notes.push(format!("SL_2(Z/9) fibers {}..{} (want {}), {} elements", fibers.min_fiber, fibers.max_fiber, fibers.expected_fiber, brute));
    verdict(ok, notes.join("; "))
}

fn statistical_equidistribution() -> Verdict {
    let mut gl8 = ExperimentConfig::new(Family::GL, 8, 3, 1, 2);
    gl8.shape = TraceShape::Positive { d: 2 };
    gl8.samples = 100_000;
    gl8.seed = 7;
    gl8.workers = 0;
    gl8.tv_threshold = Some(0.05);
    let t = Instant::now();
    let a = run_trace_equidistribution(&gl8).unwrap();
    let a_secs = t.elapsed().as_secs_f64();
    let mut gl5 = ExperimentConfig::new(Family::GL, 5, 3, 1, 3);
    gl5.samples = 100_000;
    gl5.seed = 7;
    gl5.workers = 0;
    gl5.tv_threshold = Some(0.02);
    let t = Instant::now();
    let b = run_single_trace(&gl5, 4).unwrap();
    let b_secs = t.elapsed().as_secs_f64();
    // determinism: the same seed on a prefix-sized run, different worker counts
    let small = ExperimentConfig { samples: 10_000, workers: 1, ..gl8.clone() };
    let x = run_trace_equidistribution(&small).unwrap();
    let y = run_trace_equidistribution(&ExperimentConfig { workers: 3, ..small.clone() }).unwrap();
    let z = run_trace_equidistribution(&small).unwrap();
    let deterministic = x.same_outcome(&y) && x.same_outcome(&z);
    let exact_tv = exact_power_trace_tv(5, 4);
    verdict(
        a.pass && b.tv.pass && a.cell_count == 81 && b.tv.cell_count == 27 && a_secs < 300.0 && b_secs < 300.0 && deterministic,
        format!(
            "GL_8(Z/9) d=2: TV {:.4} (noise {:.4}, {:.0}s); GL_5(Z/27) tr(M^4): TV {:.4} (noise {:.4}, exact law {exact_tv:.4}, {:.0}s); deterministic: {deterministic}",
            a.tv, a.noise, a_secs, b.tv.tv, b.tv.noise, b_secs
        ),
    )
}

/// Exact TV of `tr(M^r)` on `GL_n(F_3)` from the characteristic polynomial law.
/// Fibers over the residue field are uniform, so this is also the TV over `Z/3^k`.
fn exact_power_trace_tv(n: usize, r: u64) -> f64 {
    let f3 = f3();
    let elements: Vec<_> = f3.elements().collect();
    let mut mass = vec![BigRational::zero(); elements.len()];
    for f in monics(&f3, n).filter(|f| !f.coeff(0).is_zero()) {
        let t = Matrix::companion(&f).pow(r).trace();
        let i = elements.iter().position(|e| *e == t).unwrap();
        mass[i] += charpoly_prob_gl(&f).unwrap();
    }
    let uniform = BigRational::new(BigInt::one(), BigInt::from(elements.len()));
    let tv = total(mass.iter().map(|m| num_traits::Signed::abs(&(m - &uniform)))) / BigInt::from(2);
    num_traits::ToPrimitive::to_f64(&tv).unwrap()
}

type Criterion = (u32, &'static str, Option<f64>, fn() -> Verdict);

const CRITERIA: [Criterion; 11] = [
    (1, "trace congruences over Haar samples", Some(120.0), trace_congruences),
    (2, "images of the characteristic-polynomial derivative", Some(60.0), image_theorems),
    (3, "one-step lemma by exhaustive Lie fibers", None, one_step),
    (4, "class probability formulas", Some(60.0), fulman_formulas),
    (5, "characteristic polynomial law on GL_2(F_3)", None, reiner_law),
    (6, "trace data versus polynomial families on GL_2(Z/9)", None, newton_hayes),
    (7, "Hayes groups, orthogonality, palindromic sums", None, hayes_machinery),
    (8, "closed-form adjugates", None, closed_form_adjugates),
    (9, "radical counting", None, radical_counting),
    (10, "sampler exactness", None, sampler_exactness),
    (11, "statistical equidistribution", Some(600.0), statistical_equidistribution),
];

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, title, budget, run) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs < b);
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        let budget = budget.map(|b| format!(", budget {b:.0}s")).unwrap_or_default();
        println!("criterion {id:>2} {} [{secs:.1}s{budget}] {title}: {}", if pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
