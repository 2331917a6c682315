//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod oracle;

use std::collections::HashMap;
use std::process::Command;
use std::time::Instant;

use compop::classify::{formal_normality_direct, generates_stieltjes, multiplicative_h, normal, quasinormal};
use compop::domains::{
    densely_defined, densely_defined_power, in_domain_iterate, in_domain_power, power_equals_iterate, product_closed,
    BoundStatus,
};
use compop::exact::{int, ExtRational};
use compop::l2ops::{self, Vector};
use compop::moments::{
    finite_atomic_moments, functional_l, functional_l_nonneg_all, point_mass_moments, psd_exact, stieltjes_truncated,
    PolynomialPair, Psd, StieltjesVerdict,
};
use compop::registry::{self, Params, Predicate, RandomSpaceSpec};
use compop::space::check_nonsingular;
use compop::verdict::HankelKind;
use compop::{h, AtomId, HValue, MeasureSpace, Rational, Transformation, Verdict, Witness};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracle::{brute_force_psd, cofactor_det, principal, random_vector, real, Finite};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn lib<T>(r: compop::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn params(pairs: &[(&str, &str)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn a(i: u64) -> AtomId {
    AtomId::indexed("a", i)
}

// ---------------------------------------------------------------------------

fn three_families() -> Outcome {
    let e = lib(registry::example("three-families", &Params::new()))?;
    let (space, phi) = (&e.space, e.phi());
    let w = space.window(16);

    ensure!(lib(densely_defined(space, phi, &w))?.is_holds(), "C_φ should be densely defined");

    // oracle: φ²-preimage mass of a_0 summed over growing windows grows like L
    let mut partial = Vec::new();
    for level in [4u32, 8, 16] {
        let atoms = space.window(level).atoms;
        let total: Rational =
            atoms.iter().filter(|x| phi.image(&phi.image(x)) == a(0)).map(|x| space.mass(x).unwrap()).sum();
        let expected = Rational::from_integer(level.into()) * (Rational::one() - Rational::new(1.into(), BigInt::from(2).pow(level)));
        ensure!(total == expected, "window-{level} φ²-preimage mass of a_0 is {total}, expected {expected}");
        partial.push(total);
    }
    ensure!(partial.windows(2).all(|p| p[1] > &p[0] * Rational::from_integer(3.into()) / Rational::from_integer(2.into())), "partial sums should diverge");
    let h2 = lib(h(space, phi, 2, &a(0), &w))?;
    ensure!(h2 == HValue::infinite(), "h_(φ²)(a_0) = {h2}, expected certified ∞");

    // oracle: nothing reaches a_0 in exactly three steps inside the window
    ensure!(w.atoms.iter().all(|x| phi.image(&phi.image(&phi.image(x))) != a(0)), "a φ³-preimage of a_0 exists");
    let h3 = lib(h(space, phi, 3, &a(0), &w))?;
    ensure!(h3 == HValue::exact(Rational::zero()), "h_(φ³)(a_0) = {h3:?}");

    let chi = Vector::indicator(a(0));
    ensure!(lib(in_domain_iterate(space, phi, &chi, 3, &w))?, "χ_(a_0) should lie in D(C_(φ³))");
    ensure!(!lib(in_domain_power(space, phi, &chi, 3, &w))?, "χ_(a_0) should not lie in D(C_φ³)");

    for j in 2..=6u32 {
        let v = lib(densely_defined_power(space, phi, j, &w))?;
        let want = Witness::AtomPower { atom: a(u64::from(j) - 2), power: j };
        ensure!(v.witness() == Some(&want), "densely_defined_power(φ, {j}) = {v:?}");
        ensure!(lib(h(space, phi, j, &a(u64::from(j) - 2), &w))?.is_infinite(), "h_(φ^{j})(a_{}) is not ∞", j - 2);
    }
    Ok("window 16, powers 2..6".into())
}

fn identity_product() -> Outcome {
    let e = lib(registry::example("identity-product", &Params::new()))?;
    let w = e.space.window(32);
    let (phi1, phi2) = (lib(e.map("phi1"))?, lib(e.map("phi2"))?);
    let both = lib(e.map("phi1∘phi2"))?;
    for x in &w.atoms {
        // oracle: φ₁(φ₂(n)) = n
        ensure!(phi1.image(&phi2.image(x)) == *x && both.image(x) == *x, "φ₁∘φ₂ moves {x}");
        let v = lib(h(&e.space, both, 1, x, &w))?;
        ensure!(v == HValue::exact(Rational::one()), "h_(φ₁∘φ₂)({x}) = {v}");
    }
    let zero = AtomId::indexed("n", 0);
    let v = lib(densely_defined(&e.space, phi1, &w))?;
    ensure!(v.witness() == Some(&Witness::Atom(zero.clone())), "densely_defined(φ₁) = {v:?}");
    ensure!(lib(h(&e.space, phi1, 1, &zero, &w))? == HValue::infinite(), "h_(φ₁)(0) is not certified ∞");
    Ok(format!("{} atoms", w.atoms.len()))
}

/// `(k, r) ↦ (k², 0)`, or `None` once the block index leaves `limit`.
fn partition_step(k: u64, limit: u64) -> Option<u64> {
    k.checked_mul(k).filter(|&s| s <= limit)
}

/// Block sizes written out from the case definition.
fn oracle_card(k: u64, kappa: u64, j1: u64) -> u64 {
    if k == 1 {
        return j1;
    }
    let (mut q, mut m) = (k, 0u32);
    loop {
        let r = (1..=q).take_while(|r| r * r <= q).last().unwrap_or(1);
        if r * r != q || q < 2 {
            break;
        }
        q = r;
        m += 1;
    }
    kappa.pow(m)
}

fn partition() -> Outcome {
    let level = 65537u32;
    let limit = u64::from(level);
    let (kappa, j1) = (2u64, 1u64);
    let e = lib(registry::example("partition", &params(&[("regime", "closed"), ("kappa", "2")])))?;
    let (space, phi) = (&e.space, e.phi());
    let w = space.window(level);

    // independent enumeration of the window, then forward iteration
    let mut atoms = Vec::new();
    for k in 1..=limit {
        for r in 0..oracle_card(k, kappa, j1) {
            atoms.push((k, r));
        }
    }
    ensure!(atoms.len() == w.atoms.len(), "window holds {} atoms, enumeration {}", w.atoms.len(), atoms.len());
    let mut counts: Vec<HashMap<u64, u64>> = vec![HashMap::new(); 5];
    for &(k, _) in &atoms {
        let mut cur = Some(k);
        for count in counts.iter_mut().skip(1) {
            cur = cur.and_then(|c| partition_step(c, limit));
            let Some(c) = cur else { break };
            *count.entry(c).or_default() += 1;
        }
    }
    // the case formula, written out again
    let formula = |k: u64, r: u64, j: u32| -> u64 {
        if j == 0 {
            return 1;
        }
        if r != 0 {
            return 0;
        }
        if k == 1 {
            return oracle_card(1, kappa, j1);
        }
        let mut roots = k;
        for _ in 0..j {
            let s = (1..=roots).take_while(|s| s * s <= roots).last().unwrap_or(1);
            if s * s != roots || roots < 2 {
                return 0;
            }
            roots = s;
        }
        oracle_card(roots, kappa, j1)
    };
    for (atom, &(k, r)) in w.atoms.iter().zip(&atoms) {
        ensure!(*atom == AtomId::new("j", vec![k, r]), "window order differs at {atom}");
        for j in 1..=4u32 {
            let brute = if r == 0 { counts[j as usize].get(&k).copied().unwrap_or(0) } else { 0 };
            let f = formula(k, r, j);
            ensure!(brute == f, "formula and enumeration disagree at {atom}, j = {j}: {f} vs {brute}");
            let got = lib(h(space, phi, j, atom, &w))?;
            ensure!(got == HValue::exact(int(brute as i64)), "h_(φ^{j})({atom}) = {got}, enumeration gives {brute}");
        }
    }

    // closed regime: window constants from the enumeration, certified globally
    for n in 2..=4u32 {
        let hs = |k: u64, r: u64| -> Vec<Rational> { (0..=n).map(|i| int(formula(k, r, i) as i64)).collect() };
        let window_c = |combine: fn(&[Rational]) -> Rational| -> Rational {
            atoms
                .iter()
                .map(|&(k, r)| {
                    let v = hs(k, r);
                    combine(&v[1..n as usize]) / (Rational::one() + &v[n as usize])
                })
                .max()
                .unwrap()
        };
        let want_max = window_c(|t| t.iter().max().unwrap().clone());
        let want_sum = window_c(|t| t.iter().sum());
        let pe = lib(power_equals_iterate(space, phi, n, &w))?;
        let pc = lib(product_closed(space, &vec![phi.clone(); n as usize], &w))?;
        for (name, v, want, declared) in [
            ("power-eq", &pe, &want_max, int(kappa as i64).pow(n as i32 - 1)),
            ("product-closed", &pc, &want_sum, (1..n).map(|i| int(kappa as i64).pow(i as i32)).sum()),
        ] {
            ensure!(v.verdict.is_holds() && v.verdict.certified(), "{name}(n = {n}) = {:?}", v.verdict);
            let b = v.bound.as_ref().ok_or("missing bound")?;
            ensure!(b.c == *want, "{name}(n = {n}) window c = {}, enumeration gives {want}", b.c);
            ensure!(b.status == BoundStatus::UniformCertified, "{name} status {:?}", b.status);
            ensure!(b.declared.as_ref() == Some(&declared) && b.c <= declared, "{name} declared {:?}", b.declared);
        }
    }

    // unbounded regime: the family j[q², 0] with q = 2^(2t+1) has ratios growing without bound
    let e = lib(registry::example("partition", &params(&[("regime", "unbounded")])))?;
    let w = e.space.window(4096);
    for n in 2..=4u32 {
        let v = lib(power_equals_iterate(&e.space, e.phi(), n, &w))?;
        let Verdict::Fails(Witness::Family { atoms, ratios }) = &v.verdict else {
            return Err(format!("unbounded power-eq(n = {n}) = {:?}", v.verdict));
        };
        let want: Vec<AtomId> = [4u64, 64, 1024].iter().map(|&k| AtomId::new("j", vec![k, 0])).collect();
        ensure!(*atoms == want, "family {atoms:?}");
        ensure!(ratios.windows(2).all(|p| p[1] > p[0]), "ratios {ratios:?} do not increase");
        let pc = lib(product_closed(&e.space, &vec![e.phi().clone(); n as usize], &w))?;
        ensure!(matches!(pc.verdict.witness(), Some(Witness::Family { .. })), "unbounded product-closed = {:?}", pc.verdict);
    }
    Ok(format!("{} atoms, j ≤ 4", atoms.len()))
}

fn singular() -> Outcome {
    let e = lib(registry::example("singular", &Params::new()))?;
    let w = e.space.window(1);
    let f = Finite::from_library(&e.space, e.phi());
    ensure!(f.singular(), "oracle: φ should map a positive atom onto t");
    let v = lib(check_nonsingular(&e.space, e.phi(), &w))?;
    let want = Witness::NullPreimage { null_atom: AtomId::bare("t"), positive_atom: AtomId::indexed("z", 0) };
    ensure!(v.witness() == Some(&want), "check_nonsingular(φ) = {v:?}");
    let sq = e.phi().pow(2);
    let f2 = Finite::from_library(&e.space, &sq);
    ensure!(!f2.singular(), "oracle: φ² should be nonsingular");
    ensure!(lib(check_nonsingular(&e.space, &sq, &w))?.is_holds(), "check_nonsingular(φ²) fails");
    Ok("φ fails at (t, z[0]), φ² holds".into())
}

fn random_spec(seed: u64, max_atoms: usize, null_atoms: bool) -> RandomSpaceSpec {
    RandomSpaceSpec { max_atoms, null_atoms, ..RandomSpaceSpec::new(seed) }
}

fn pairing() -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    for seed in 0..1000u64 {
        let (space, phi) = registry::random_finite(&random_spec(seed, 8, seed % 2 == 1));
        let o = Finite::from_library(&space, &phi);
        let w = space.window(1);
        ensure!(lib(check_nonsingular(&space, &phi, &w))?.is_holds() != o.singular(), "seed {seed}: nonsingularity disagrees");
        if o.singular() {
            skipped += 1;
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let (fv, gv) = (random_vector(&mut rng, o.len()), random_vector(&mut rng, o.len()));
            let (f, g) = (o.to_vector(&fv), o.to_vector(&gv));
            let cf = lib(l2ops::apply_cphi(&space, &phi, &f, &w))?;
            let ag = lib(l2ops::apply_adjoint(&space, &phi, &g, &w))?;
            ensure!(o.l2_eq(&o.values_of(&cf), &o.cphi(&fv)), "seed {seed}: C_φ f differs from the oracle");
            ensure!(o.l2_eq(&o.values_of(&ag), &o.adjoint(&gv)), "seed {seed}: C_φ* g differs from the oracle");
            let left = lib(l2ops::inner(&space, &cf, &g))?;
            let right = lib(l2ops::inner(&space, &f, &ag))?;
            ensure!(left == right, "seed {seed}: ⟨C_φ f, g⟩ = {left} but ⟨f, C_φ* g⟩ = {right}");
            ensure!(left == o.inner(&o.cphi(&fv), &gv), "seed {seed}: pairing differs from the oracle");
            let transport: Rational = (0..o.len())
                .filter(|&i| o.positive(i))
                .map(|i| o.norm_sq(&o.basis(i)) * (&fv[i] * fv[i].conj()).re * o.h(1, i).unwrap())
                .sum();
            ensure!(lib(l2ops::norm_sq(&space, &cf))? == transport, "seed {seed}: ‖C_φ f‖² ≠ Σ|f|²h_φμ");
            ensure!(
                lib(l2ops::transport_norm_sq(&space, &phi, &f, &w))? == Some(ExtRational::Finite(transport.clone())),
                "seed {seed}: transport_norm_sq differs"
            );
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs, {skipped} singular spaces skipped"))
}

fn formal_normality() -> Outcome {
    let (mut normal_count, mut other) = (0, 0);
    for seed in 0..500u64 {
        let (space, phi) = registry::random_finite(&random_spec(seed, 6, false));
        let o = Finite::from_library(&space, &phi);
        let w = space.window(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1_000_000 + seed);
        let mut family: Vec<Vec<oracle::C>> = (0..o.len()).map(|i| o.basis(i)).collect();
        family.extend((0..100).map(|_| random_vector(&mut rng, o.len())));
        let mut all_equal = true;
        for f in &family {
            let eq = o.norm_sq(&o.cphi(f)) == o.norm_sq(&o.adjoint(f));
            ensure!(lib(formal_normality_direct(&space, &phi, &o.to_vector(f), &w))? == eq, "seed {seed}: direct check disagrees with the oracle");
            all_equal &= eq;
        }
        let v = lib(normal(&space, &phi, &w))?;
        ensure!(!v.is_inconclusive(), "seed {seed}: normal is inconclusive");
        ensure!(v.is_holds() == all_equal, "seed {seed}: normal = {}, norms equal on the family = {all_equal}", v.status());
        if all_equal {
            normal_count += 1;
        } else {
            other += 1;
        }
    }
    Ok(format!("{normal_count} normal, {other} not normal"))
}

fn square_power_norms() -> Outcome {
    let (mut holds, mut fails) = (0, 0);
    for seed in 0..500u64 {
        let (space, phi) = registry::random_finite(&random_spec(seed, 6, seed % 3 == 0));
        let o = Finite::from_library(&space, &phi);
        if o.singular() {
            continue;
        }
        let w = space.window(1);
        let norms_agree = (0..o.len()).filter(|&i| o.positive(i)).all(|i| {
            let f = o.basis(i);
            let cf = o.cphi(&f);
            o.norm_sq(&o.cphi(&cf)) == o.norm_sq(&o.adjoint(&cf))
        });
        let v = lib(multiplicative_h(&space, &phi, 1, &w))?;
        ensure!(v.is_holds() == norms_agree, "seed {seed}: multiplicative_h = {}, basis norms agree = {norms_agree}", v.status());
        if norms_agree {
            holds += 1;
        } else {
            fails += 1;
        }
    }
    Ok(format!("{holds} multiplicative, {fails} not"))
}

fn quasinormal_chain() -> Outcome {
    let mut cases: Vec<(String, MeasureSpace, Transformation, u32)> = Vec::new();
    let e = lib(registry::example("binary-parent", &Params::new()))?;
    cases.push(("binary-parent".into(), e.space.clone(), e.phi().clone(), 16));
    let spec = random_spec(0, 6, true);
    let hits = lib(registry::search(&Predicate::Property("quasinormal".into()), &spec, 300, 4))?;
    ensure!(!hits.is_empty(), "search found no quasinormal spaces");
    for hit in &hits {
        let (space, phi) = registry::random_finite(&spec.with_seed(hit.seed));
        cases.push((format!("seed {}", hit.seed), space, phi, 1));
    }
    for (name, space, phi, level) in &cases {
        let w = space.window(*level);
        ensure!(lib(quasinormal(space, phi, &w))?.is_holds(), "{name}: not quasinormal");
        for n in 1..=5 {
            ensure!(lib(multiplicative_h(space, phi, n, &w))?.is_holds(), "{name}: multiplicative_h(φ, {n}) fails");
        }
        ensure!(lib(generates_stieltjes(space, phi, 6, &w))?.is_holds(), "{name}: Stieltjes at order 6 fails");
        let finite = space.is_finite().then(|| Finite::from_library(space, phi));
        for x in lib(w.positive_atoms(space))? {
            let seq: Vec<Rational> = (0..=6)
                .map(|n| lib(h(space, phi, n, &x, &w)).map(|v| v.exact_value().cloned()))
                .collect::<Result<Option<Vec<_>>, _>>()?
                .ok_or(format!("{name}: h at {x} is not exact"))?;
            ensure!(seq == point_mass_moments(&seq[1], 6), "{name}: sequence at {x} is {seq:?}");
            if let Some(o) = &finite {
                let i = o.ids.iter().position(|id| *id == x).unwrap();
                ensure!((0..=6).all(|n| o.h(n, i).as_ref() == Some(&seq[n as usize])), "{name}: h at {x} differs from the oracle");
            }
        }
    }
    Ok(format!("binary-parent and {} random spaces", hits.len()))
}

fn random_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<Rational>> {
    let n = rng.gen_range(1..=6usize);
    let entry = |rng: &mut ChaCha8Rng| Rational::new(BigInt::from(rng.gen_range(-3i64..=3)), BigInt::from(rng.gen_range(1i64..=2)));
    match rng.gen_range(0..3) {
        // a Gram matrix of low rank, so semidefinite cases are common
        0 | 1 => {
            let rank = rng.gen_range(0..=n);
            let b: Vec<Vec<Rational>> = (0..rank).map(|_| (0..n).map(|_| entry(rng)).collect()).collect();
            let mut m: Vec<Vec<Rational>> =
                (0..n).map(|i| (0..n).map(|j| (0..rank).map(|k| &b[k][i] * &b[k][j]).sum()).collect()).collect();
            if rng.gen_range(0..2) == 0 {
                let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let d = entry(rng);
                m[i][j] += &d;
                if i != j {
                    m[j][i] += d;
                }
            }
            m
        }
        _ => {
            let upper: Vec<Vec<Rational>> = (0..n).map(|i| (i..n).map(|_| entry(rng)).collect()).collect();
            (0..n).map(|i| (0..n).map(|j| upper[i.min(j)][i.max(j) - i.min(j)].clone()).collect()).collect()
        }
    }
}

fn moments_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut psd, mut not) = (0, 0);
    for trial in 0..10_000 {
        let m = random_matrix(&mut rng);
        let brute = brute_force_psd(&m);
        match psd_exact(&m) {
            Psd::Psd => {
                ensure!(brute, "matrix {trial}: accepted but a principal minor is negative");
                psd += 1;
            }
            Psd::NotPsd { indices, det } => {
                ensure!(!brute, "matrix {trial}: rejected but every principal minor is nonnegative");
                ensure!(det.is_negative() && cofactor_det(&principal(&m, &indices)) == det, "matrix {trial}: witness {indices:?} det {det} is wrong");
                not += 1;
            }
        }
    }
    for _ in 0..200 {
        let atoms: Vec<(Rational, Rational)> = (0..rng.gen_range(0..=4))
            .map(|_| {
                let w = Rational::new(BigInt::from(rng.gen_range(1i64..=5)), BigInt::from(rng.gen_range(1i64..=4)));
                let t = Rational::new(BigInt::from(rng.gen_range(0i64..=6)), BigInt::from(rng.gen_range(1i64..=3)));
                (w, t)
            })
            .collect();
        let order = rng.gen_range(0..=10);
        let gamma = finite_atomic_moments(&atoms, order);
        ensure!(stieltjes_truncated(&gamma) == StieltjesVerdict::ConsistentUpToOrder(order), "moments of {atoms:?} rejected");
    }
    let v = stieltjes_truncated(&[int(1), int(2), int(1)]);
    let want = StieltjesVerdict::Rejected { kind: HankelKind::Plain, indices: vec![0, 1], det: int(-3) };
    ensure!(v == want, "(1, 2, 1) gives {v:?}");
    Ok(format!("{psd} semidefinite, {not} not; 200 measures; (1,2,1) det -3"))
}

/// First nonzero entry positive and entries coprime: every integer vector is a
/// positive multiple of exactly one such vector or of its negative.
fn primitive(v: &[i64]) -> bool {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0) && v.iter().fold(0, |g, &x| gcd(g, x)) == 1
}

/// Pairs `(q₁, 0)` with `deg q₁ ≤ 1` and `(0, q₂)` with `deg q₂ ≤ 2`, integer coefficients in `[-9, 9]`.
/// `L` is linear, so nonnegativity on these is nonnegativity on all grid pairs `(q₁, q₂)`;
/// `|λq|² = λ²|q|²`, so primitive representatives suffice.
fn coefficient_grid() -> Vec<PolynomialPair> {
    let c = |v: &[i64]| v.iter().map(|&x| real(&int(x))).collect::<Vec<_>>();
    let mut out = Vec::new();
    for a0 in -9..=9 {
        for a1 in -9..=9 {
            if primitive(&[a0, a1]) {
                out.push(PolynomialPair::new(c(&[a0, a1]), vec![]));
            }
            for a2 in -9..=9 {
                if primitive(&[a0, a1, a2]) {
                    out.push(PolynomialPair::new(vec![], c(&[a0, a1, a2])));
                }
            }
        }
    }
    out
}

fn stieltjes_grid() -> Outcome {
    let grid = coefficient_grid();
    let coeffs: Vec<Vec<Rational>> = grid.iter().map(PolynomialPair::coefficients).collect();
    let (mut consistent, mut rejected) = (0, 0);
    for seed in 0..100u64 {
        let (space, phi) = registry::random_finite(&random_spec(5_000 + seed, 6, false));
        let o = Finite::from_library(&space, &phi);
        let w = space.window(1);
        let mut all_consistent = true;
        for i in 0..o.len() {
            let gamma: Vec<Rational> = (0..=4).map(|n| o.h(n, i).unwrap()).collect();
            let sti = stieltjes_truncated(&gamma).is_consistent();
            let l_ok = coeffs.iter().all(|c| !functional_l(&gamma, c).expect("degree ≤ 4").is_negative());
            ensure!(sti == l_ok, "seed {seed}, atom {}: Stieltjes {sti}, L ≥ 0 on the grid {l_ok}, γ = {gamma:?}", o.ids[i]);
            all_consistent &= sti;
        }
        let l_all = lib(functional_l_nonneg_all(&space, &phi, &grid, &w))?.is_holds();
        ensure!(l_all == all_consistent, "seed {seed}: window verdicts disagree");
        ensure!(lib(generates_stieltjes(&space, &phi, 4, &w))?.is_holds() == all_consistent, "seed {seed}: generates_stieltjes disagrees");
        if all_consistent {
            consistent += 1;
        } else {
            rejected += 1;
        }
    }
    Ok(format!("{consistent} consistent, {rejected} rejected, {} grid pairs", grid.len()))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_compop");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t3 = dir.path().join("t3.json");
    let t3s = t3.to_str().unwrap();
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "{args:?} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
        Ok(out.stdout)
    };
    run(&["example", "t3", "--write", t3s])?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["classify", "--example", "three-families", "--window", "16", "--order", "6"],
        vec!["h", "--space", t3s, "--n", "1"],
        vec!["apply", "--space", t3s, "--op", "Ustar", "--vector", r#"{"x[1]":"1/2","x[3]":"2-i"}"#],
        vec!["domains", "--example", "partition", "--check", "product-closed", "--n", "3", "--window", "300"],
        vec!["moments", "--seq", "1,2,1"],
        vec!["example", "binary-tree"],
        vec!["search", "--predicate", "normal & !injective | quasinormal", "--budget", "200", "--seed", "7", "--null-atoms"],
        vec!["validate", t3s],
    ];
    for args in &commands {
        let first = run(args)?;
        let second = run(args)?;
        ensure!(first == second, "{args:?} is not byte-identical across runs");
        let value: serde_json::Value = serde_json::from_slice(&first).map_err(|e| format!("{args:?}: {e}"))?;
        let again = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())? + "\n";
        ensure!(again.as_bytes() == first.as_slice(), "{args:?}: JSON does not round-trip");
    }
    Ok(format!("{} commands", commands.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("three-families regression", three_families),
        ("identity-product regression", identity_product),
        ("partition regression", partition),
        ("singular example", singular),
        ("pairing and transport", pairing),
        ("normal iff formally normal", formal_normality),
        ("h_(φ²) = h_φ² iff ‖C_φ²f‖ = ‖C_φ*C_φf‖", square_power_norms),
        ("quasinormal chain", quasinormal_chain),
        ("moments oracle", moments_oracle),
        ("Stieltjes iff L ≥ 0 on the grid", stieltjes_grid),
        ("CLI determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
