use grmat::char_derivative::{
    build_representative, closed_form_adjugate, dchar_map, dtrace_functional, join, predicted_image, verify_image, Block, BlockType, PolyMatrix,
    Representative,
};
use grmat::groups::{enumerate_fq, lift_section, sample_fq, twist, Family, GroupSpec, Section, Sign};
use grmat::linalg::Subspace;
use grmat::matrix::Matrix;
use grmat::poly::Poly;
use grmat::ring::Ring;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn all_pass(spec: &GroupSpec, mats: &[Matrix]) {
    let lie = spec.lie_algebra();
    for a0 in mats {
        let rep = verify_image(spec, &lie, a0).unwrap();
        assert!(rep.pass, "{} {:?} at {}", spec, rep, a0.to_text());
        assert_eq!(rep.rank_computed, rep.rank_predicted);
    }
}

#[test]
fn image_matches_exhaustively_on_gl2_and_sl2() {
    for fam in [Family::GL, Family::SL] {
        let spec = GroupSpec::new(fam, 2, 3, 1, 1, None).unwrap();
        let all = enumerate_fq(&spec, 100).unwrap();
        assert_eq!(all.len(), if fam == Family::GL { 48 } else { 24 });
        all_pass(&spec, &all);
    }
}

#[test]
fn gl_rank_is_degree_of_minimal_polynomial() {
    let spec = GroupSpec::new(Family::GL, 3, 3, 1, 1, None).unwrap();
    let lie = spec.lie_algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let a0 = sample_fq(&spec, &mut rng);
        let map = dchar_map(&spec, &lie, &a0).unwrap();
        assert_eq!(map.rank(), a0.min_poly_mod_p().deg().unwrap());
    }
}

#[test]
fn image_matches_on_sampled_classical_groups() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cases = [
        (Family::Sp, 2, 1, None),
        (Family::SO, 3, 1, Some(Sign::Plus)),
        (Family::SO, 3, 1, Some(Sign::Minus)),
        (Family::SO, 4, 1, Some(Sign::Plus)),
        (Family::SO, 4, 1, Some(Sign::Minus)),
        (Family::U, 2, 1, None),
        (Family::U, 3, 1, None),
        (Family::SL, 3, 1, None),
        (Family::GL, 2, 2, None),
    ];
    for (fam, n, m, sign) in cases {
        let spec = GroupSpec::new(fam, n, 3, m, 1, sign).unwrap();
        let mats: Vec<Matrix> = (0..200).map(|_| sample_fq(&spec, &mut rng)).collect();
        all_pass(&spec, &mats);
    }
}

#[test]
fn image_matches_on_special_elements() {
    let r = Ring::field(3, 1).unwrap();
    let sp = GroupSpec::new(Family::Sp, 2, 3, 1, 1, None).unwrap();
    let id = Matrix::identity(&r, 4);
    let d = Matrix::diag(&r, &[r.one(), r.from_int(-1), r.one(), r.from_int(-1)]);
    all_pass(&sp, &[id.clone(), id.neg(), d]);
    let so = GroupSpec::new(Family::SO, 3, 3, 1, 1, None).unwrap();
    all_pass(&so, &[Matrix::identity(&r, 3)]);
}

#[test]
fn lifting_identity_holds_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for fam in [Family::GL, Family::SL, Family::Sp, Family::SO, Family::U] {
        let spec = GroupSpec::new(fam, 2, 3, 1, 2, None).unwrap();
        let lie = spec.lie_algebra();
        let top = spec.ring();
        let p = top.from_int(3);
        for _ in 0..200 {
            let a0 = sample_fq(&spec, &mut rng);
            let lifted = lift_section(&spec, &a0, 2, Section::Standard, &lie).unwrap();
            let a1 = lie.random(&mut rng);
            let moved = twist(&lifted, &a1, 1);
            assert!(spec.is_member(&moved));
            let diff = moved.char_poly().sub(&lifted.char_poly());
            let dc = dchar_map(&spec, &lie, &a0).unwrap().eval(&a1).to_ring(top).scale(&p).neg();
            assert_eq!(diff, dc, "{fam}");
        }
    }
}

#[test]
fn images_are_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for fam in [Family::GL, Family::SL, Family::Sp, Family::SO, Family::U] {
        let spec = GroupSpec::new(fam, 2, 3, 1, 1, None).unwrap();
        let lie = spec.lie_algebra();
        for _ in 0..100 {
            let a0 = sample_fq(&spec, &mut rng);
            let g = sample_fq(&spec, &mut rng);
            let conj = g.mul(&a0).mul(&g.inverse().unwrap());
            let i1 = dchar_map(&spec, &lie, &a0).unwrap().image();
            let i2 = dchar_map(&spec, &lie, &conj).unwrap().image();
            assert_eq!(i1, i2);
        }
    }
}

#[test]
fn trace_functional_never_vanishes_on_gl2() {
    let spec = GroupSpec::new(Family::GL, 2, 3, 1, 1, None).unwrap();
    let lie = spec.lie_algebra();
    for a0 in enumerate_fq(&spec, 100).unwrap() {
        for r in [1, 2, 4] {
            assert!(dtrace_functional(&lie, &a0, r).iter().any(|v| !v.is_zero()));
        }
        assert!(dtrace_functional(&lie, &a0, 3).iter().all(|v| v.is_zero()));
    }
}

#[test]
fn closed_form_adjugates_match_generic() {
    for p in [3u32, 5] {
        let r = Ring::field(p, 1).unwrap();
        let mut alphas = vec![r.one(), r.from_int(-1)];
        if p == 5 {
            alphas.push(r.from_int(2));
        }
        for m in 1..=3 {
            for &a in &alphas {
                let pm = r.is_one(&a) || r.is_one(&r.neg(&a));
                let mut cases = vec![(Family::GL, BlockType::I), (Family::Sp, BlockType::I), (Family::SO, BlockType::I)];
                if pm {
                    cases.extend([(Family::Sp, BlockType::II), (Family::Sp, BlockType::III), (Family::SO, BlockType::II), (Family::SO, BlockType::III)]);
                }
                for (fam, kind) in cases {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let b = Block::new(kind, a, m).with_sign(sign);
                        let Ok(closed) = closed_form_adjugate(fam, &r, &b) else {
                            continue;
                        };
                        let single = Representative { matrix: raw(fam, &r, &b), form: None, sign: None };
                        assert_eq!(closed, PolyMatrix::adjugate_of(&single.matrix), "{fam} {kind:?} m={m} p={p}");
                    }
                }
            }
        }
    }
}

/// The block before any congruence: undo the join's change of basis for a
/// single block by comparing through conjugation.
fn raw(fam: Family, r: &Ring, b: &Block) -> Matrix {
    grmat::char_derivative::raw_block_matrix(fam, r, b).unwrap()
}

#[test]
fn representatives_are_members_with_expected_char() {
    for p in [3u32, 5] {
        let r = Ring::field(p, 1).unwrap();
        for m in 1..=3 {
            for a in [r.one(), r.from_int(-1)] {
                for (fam, kind, n) in [
                    (Family::Sp, BlockType::II, m),
                    (Family::Sp, BlockType::III, m),
                    (Family::SO, BlockType::II, 2 * m),
                    (Family::SO, BlockType::III, 2 * m + 1),
                ] {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let Ok(rep) = build_representative(fam, &r, &[Block::new(kind, a, m).with_sign(sign)]) else {
                            continue;
                        };
                        let spec = GroupSpec::new(fam, n, p, 1, 1, rep.sign).unwrap();
                        assert!(spec.is_member(&rep.matrix) || fam == Family::SO && rep.matrix.det() != r.one(), "{fam} {kind:?} {m}");
                        let dim = spec.dim() as u64;
                        assert_eq!(rep.matrix.char_poly(), Poly::linear(&r, a).pow(dim));
                    }
                }
            }
        }
    }
}

fn scaled_image(map_image: &Subspace, by: &Poly, field: &Ring, n_in: usize, n_out: usize) -> Vec<Poly> {
    grmat::palindromic::enumerate_space(field, map_image)
        .into_iter()
        .map(|f| f.mul(by))
        .inspect(|f| assert!(f.degree() < n_out as i64 + n_in as i64))
        .collect()
}

#[test]
fn join_law_for_images() {
    let r = Ring::field(3, 1).unwrap();
    let recipes: Vec<(Family, Vec<Block>)> = vec![
        (Family::GL, vec![Block::new(BlockType::I, r.one(), 2), Block::new(BlockType::I, r.from_int(2), 1)]),
        (Family::GL, vec![Block::new(BlockType::I, r.one(), 1), Block::new(BlockType::I, r.one(), 2)]),
        (Family::Sp, vec![Block::new(BlockType::III, r.one(), 1), Block::new(BlockType::II, r.from_int(-1), 1)]),
        (Family::Sp, vec![Block::new(BlockType::II, r.one(), 1), Block::new(BlockType::III, r.one(), 1)]),
        (Family::SO, vec![Block::new(BlockType::III, r.one(), 1), Block::new(BlockType::II, r.from_int(-1), 2)]),
    ];
    for (fam, blocks) in recipes {
        let parts: Vec<Representative> = blocks.iter().map(|b| build_representative(fam, &r, std::slice::from_ref(b)).unwrap()).collect();
        let joined = join(fam, &parts).unwrap();
        let spec_of = |rep: &Representative| {
            let n = if fam == Family::Sp { rep.matrix.n() / 2 } else { rep.matrix.n() };
            GroupSpec::new(fam, n, 3, 1, 1, rep.sign).unwrap()
        };
        let big = spec_of(&joined);
        assert!(big.is_member(&joined.matrix), "{fam}");
        let total = joined.matrix.n();
        let mut expected = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            let s = spec_of(part);
            let img = dchar_map(&s, &s.lie_algebra(), &part.matrix).unwrap().image();
            let other = parts.iter().enumerate().filter(|(j, _)| *j != i).fold(Poly::one(&r), |acc, (_, q)| acc.mul(&q.matrix.char_poly()));
            expected.extend(scaled_image(&img, &other, &r, part.matrix.n(), total));
        }
        let exp_space = Subspace::span(
            3,
            total,
            &expected.iter().map(|f| grmat::linalg::coords_of(&r, &f.coeff_vec(total))).collect::<Vec<_>>(),
        );
        let got = dchar_map(&big, &big.lie_algebra(), &joined.matrix).unwrap().image();
        assert_eq!(got, exp_space, "{fam}");
        assert_eq!(got, predicted_image(&big, &joined.matrix).unwrap());
    }
}
