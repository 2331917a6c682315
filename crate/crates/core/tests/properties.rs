use compop::classify::{classify_all, multiplicative_h, quasinormal};
use compop::exact::{complex, int, rat, ComplexRational};
use compop::l2ops::{apply_adjoint, apply_cphi, conditional_expectation, inner, l2_eq, norm_sq, Vector};
use compop::moments::{psd_exact, stieltjes_truncated, Matrix};
use compop::registry::{generator, Params};
use compop::space::{check_nonsingular, FiniteSpace, Mass};
use compop::{AtomId, MeasureSpace, Rational, Transformation};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn x(i: usize) -> AtomId {
    AtomId::indexed("x", i as u64)
}

/// Masses (possibly zero) and a self-map on `0..n`.
fn finite_space() -> impl Strategy<Value = (MeasureSpace, Transformation, usize)> {
    (1usize..=7).prop_flat_map(|n| {
        (prop::collection::vec((0i64..=4, 1i64..=3), n), prop::collection::vec(0..n, n)).prop_map(move |(masses, map)| {
            let space = FiniteSpace::new(
                masses.iter().enumerate().map(|(i, &(p, q))| (x(i), Mass::new(rat(p, q)).unwrap())),
            )
            .unwrap();
            let phi = Transformation::finite(map.iter().enumerate().map(|(i, &j)| (x(i), x(j))));
            (MeasureSpace::finite(space), phi, n)
        })
    })
}

fn vector(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec((-3i64..=3, -3i64..=3, 1i64..=4), n).prop_map(|entries| {
        Vector::from_entries(entries.into_iter().enumerate().map(|(i, (re, im, d))| (x(i), complex(rat(re, d), rat(im, d)))))
    })
}

fn nonsingular_with_vectors() -> impl Strategy<Value = (MeasureSpace, Transformation, Vector, Vector)> {
    finite_space()
        .prop_filter("nonsingular", |(s, phi, _)| check_nonsingular(s, phi, &s.window(1)).unwrap().is_holds())
        .prop_flat_map(|(s, phi, n)| (Just(s), Just(phi), vector(n), vector(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn adjoint_pairs_with_composition((s, phi, f, g) in nonsingular_with_vectors()) {
        let w = s.window(1);
        let cf = apply_cphi(&s, &phi, &f, &w).unwrap();
        let ag = apply_adjoint(&s, &phi, &g, &w).unwrap();
        prop_assert_eq!(inner(&s, &cf, &g).unwrap(), inner(&s, &f, &ag).unwrap());
    }

    #[test]
    fn expectation_is_an_orthogonal_projection((s, phi, f, g) in nonsingular_with_vectors()) {
        let w = s.window(1);
        let ef = conditional_expectation(&s, &phi, &f, &w).unwrap();
        let eef = conditional_expectation(&s, &phi, &ef, &w).unwrap();
        prop_assert!(l2_eq(&s, &ef, &eef).unwrap());
        let eg = conditional_expectation(&s, &phi, &g, &w).unwrap();
        prop_assert_eq!(inner(&s, &ef, &g).unwrap(), inner(&s, &f, &eg).unwrap());
        prop_assert!(norm_sq(&s, &ef).unwrap() <= norm_sq(&s, &f).unwrap());
    }

    #[test]
    fn inner_product_is_hermitian((s, _phi, f, g) in nonsingular_with_vectors()) {
        let fg: ComplexRational = inner(&s, &f, &g).unwrap();
        let gf = inner(&s, &g, &f).unwrap();
        prop_assert_eq!(fg, gf.conj());
        prop_assert!(!norm_sq(&s, &f).unwrap().is_negative());
    }

    #[test]
    fn report_lattice_is_consistent((s, phi, _n) in finite_space()) {
        let w = s.window(1);
        let report = classify_all(&s, &phi, &w, 4).unwrap();
        if report.normal.is_holds() {
            prop_assert!(report.quasinormal.is_holds());
            prop_assert!(report.injective.is_holds());
        }
        if quasinormal(&s, &phi, &w).unwrap().is_holds() {
            prop_assert!(multiplicative_h(&s, &phi, 2, &w).unwrap().is_holds());
            prop_assert!(report.stieltjes.is_holds());
        }
    }
}

fn leibniz_det(m: &[Vec<Rational>]) -> Rational {
    // sum over permutations, generated by Heap's algorithm
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1i64;
    let term = |perm: &[usize], sign: i64| -> Rational {
        perm.iter().enumerate().fold(int(sign), |acc, (i, &j)| acc * &m[i][j])
    };
    let mut total = term(&perm, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            perm.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
            sign = -sign;
            total += term(&perm, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

fn all_principal_minors_nonnegative(m: &Matrix) -> bool {
    let n = m.len();
    (1u32..1 << n).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sub: Vec<Vec<Rational>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect();
        !leibniz_det(&sub).is_negative()
    })
}

fn symmetric(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec((-4i64..=4, 1i64..=3), n * n).prop_map(move |v| {
        let mut m = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let (p, q) = v[i * n + j];
                m[i][j] = rat(p, q);
                m[j][i] = rat(p, q);
            }
        }
        m
    })
}

fn gram(n: usize) -> impl Strategy<Value = Matrix> {
    (0..=n).prop_flat_map(move |rank| {
        prop::collection::vec(-3i64..=3, rank * n).prop_map(move |b| {
            (0..n)
                .map(|i| (0..n).map(|j| (0..rank).map(|k| int(b[k * n + i] * b[k * n + j])).sum()).collect())
                .collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn psd_agrees_with_minors(m in (1usize..=5).prop_flat_map(|n| prop_oneof![symmetric(n), gram(n)])) {
        prop_assert_eq!(psd_exact(&m).is_psd(), all_principal_minors_nonnegative(&m));
    }

    #[test]
    fn stieltjes_verdict_is_scale_equivariant(
        gamma in prop::collection::vec((0i64..=6, 1i64..=3), 1..=7),
        (p, q) in (1i64..=9, 1i64..=9),
    ) {
        let gamma: Vec<Rational> = gamma.into_iter().map(|(a, b)| rat(a, b)).collect();
        let c = rat(p, q);
        let scaled: Vec<Rational> = gamma.iter().map(|g| g * &c).collect();
        prop_assert_eq!(stieltjes_truncated(&gamma).is_consistent(), stieltjes_truncated(&scaled).is_consistent());
    }

    #[test]
    fn generated_windows_nest(name in prop::sample::select(vec!["three-families", "identity-product", "partition", "binary-parent"]), level in 1u32..40) {
        let g = generator(name, &Params::new()).unwrap();
        let s = MeasureSpace::Generated(g);
        let small = s.window(level);
        let large = s.window(level + 1);
        prop_assert!(small.atoms.iter().all(|a| large.contains(a)));
        for (_, phi) in s.generated_maps() {
            for a in &small.atoms {
                let p = phi.preimage(a, level);
                let q = phi.preimage(a, level + 1);
                prop_assert!(p.atoms.iter().all(|b| q.atoms.contains(b)));
                prop_assert!(!p.complete || q.complete);
            }
        }
    }
}
