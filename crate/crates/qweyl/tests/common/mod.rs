//! Shared helpers for the property and acceptance suites: seeded random
//! words/expressions per rule set, and the independent calculus oracles the
//! engine is checked against.

#![allow(dead_code)]

use std::collections::BTreeMap;

use qweyl::polyrep::{self, PolyElement, PolyMonomial};
use qweyl::scalar::rational_int;
use qweyl::{
    AlgebraContext, Generator, OperatorExpr, Rational, RewriteStrategy, Scalar, ScalarQuotient,
    Word,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixed seed for every randomized battery; recorded in the acceptance
/// report so runs are reproducible.
pub const BATTERY_SEED: u64 = 0x71b1_4e5e_ed01;

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One representative context per rule set.
pub fn all_contexts() -> Vec<AlgebraContext> {
    vec![
        AlgebraContext::classical(2),
        AlgebraContext::classical_grassmann(2, 2),
        AlgebraContext::q_line(),
        AlgebraContext::quantum_plane(),
        AlgebraContext::quantum_hyperplane(3).expect("valid hyperplane context"),
    ]
}

pub fn generator_pool(ctx: &AlgebraContext) -> Vec<Generator> {
    let mut pool = Vec::new();
    for i in 1..=ctx.n_boson() as u32 {
        pool.push(Generator::BosonVar(i));
        pool.push(ctx.boson_deriv(i));
    }
    for i in 1..=ctx.n_grassmann() as u32 {
        pool.push(Generator::GrassmannVar(i));
        pool.push(Generator::GrassmannDeriv(i));
    }
    pool
}

pub fn random_word(rng: &mut ChaCha8Rng, ctx: &AlgebraContext, max_len: usize) -> Word {
    let pool = generator_pool(ctx);
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
}

pub fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let mut s = Scalar::zero();
    for _ in 0..rng.gen_range(1..=3) {
        let c = rng.gen_range(-4i64..=4);
        let e = rng.gen_range(-3i64..=3);
        s = &s + &Scalar::term(rational_int(c), e);
    }
    s
}

pub fn random_expr(
    rng: &mut ChaCha8Rng,
    ctx: &AlgebraContext,
    max_terms: usize,
    max_len: usize,
) -> OperatorExpr {
    let terms = rng.gen_range(1..=max_terms);
    let words = (0..terms)
        .map(|_| {
            (
                ScalarQuotient::from(random_scalar(rng)),
                random_word(rng, ctx, max_len),
            )
        })
        .collect::<Vec<_>>();
    OperatorExpr::from_words(*ctx, words).expect("pool generators are valid")
}

pub fn random_poly(rng: &mut ChaCha8Rng, ctx: &AlgebraContext, max_degree: u32) -> PolyElement {
    let basis = polyrep::basis(ctx, max_degree);
    let mut out = PolyElement::zero(*ctx);
    for _ in 0..rng.gen_range(1..=3) {
        let m = basis[rng.gen_range(0..basis.len())].clone();
        let c = ScalarQuotient::from(random_scalar(rng));
        out = out
            .add(&PolyElement::monomial(*ctx, m).scalar_mul(&c))
            .expect("same context");
    }
    out
}

/// Read a q-deformed word in the matching classical algebra.
pub fn classical_shadow(ctx: &AlgebraContext, w: &Word) -> (AlgebraContext, Word) {
    let shadow_ctx = AlgebraContext::classical(ctx.n_boson());
    let shadow_word = w
        .iter()
        .map(|g| match g {
            Generator::JacksonDeriv(i) => Generator::ClassicalDeriv(*i),
            other => *other,
        })
        .collect();
    (shadow_ctx, shadow_word)
}

// ---------------------------------------------------------------------------
// independent oracles
// ---------------------------------------------------------------------------

/// Independent classical action: formal differentiation with falling
/// factorials, no rewriting involved. Bosonic contexts only.
pub fn classical_apply_oracle(e: &OperatorExpr, p: &PolyElement) -> PolyElement {
    let ctx = *e.context();
    assert_eq!(ctx.n_grassmann(), 0, "oracle covers bosonic contexts");
    let mut out = PolyElement::zero(ctx);
    for (op, c_op) in e.terms() {
        'poly: for (mono, c_poly) in p.terms() {
            let mut coeff = c_op * c_poly;
            let mut exps = mono.var_exp().to_vec();
            for (i, &b) in op.deriv_exp().iter().enumerate() {
                if b > exps[i] {
                    continue 'poly;
                }
                for step in 0..b {
                    let factor = rational_int((exps[i] - step) as i64);
                    coeff = &coeff * &ScalarQuotient::from(factor);
                }
                exps[i] -= b;
            }
            for (i, &a) in op.var_exp().iter().enumerate() {
                exps[i] += a;
            }
            let term = PolyElement::monomial(ctx, PolyMonomial::new(&ctx, exps, vec![]))
                .scalar_mul(&coeff);
            out = out.add(&term).expect("same context");
        }
    }
    out
}

/// The Jackson quotient `(f(x) - f(q^2 x)) / ((1 - q^2) x)` computed by
/// exact polynomial substitution and exact coefficient division.
pub fn jackson_quotient(f: &BTreeMap<u32, Scalar>) -> BTreeMap<u32, Scalar> {
    let one_minus_q2 = &Scalar::one() - &Scalar::q_pow(2);
    let mut out = BTreeMap::new();
    for (&m, c) in f {
        // c x^m - c q^{2m} x^m
        let diff = c - &(c * &Scalar::q_pow(2 * m as i64));
        if diff.is_zero() {
            continue;
        }
        let quo = diff
            .exact_div(&one_minus_q2)
            .expect("1 - q^{2m} is divisible by 1 - q^2");
        assert!(m >= 1, "constant terms cancel in the difference");
        out.insert(m - 1, quo);
    }
    out
}

/// Independent q-line action built on [`jackson_quotient`].
pub fn q_line_apply_oracle(e: &OperatorExpr, f: &BTreeMap<u32, Scalar>) -> BTreeMap<u32, Scalar> {
    let mut out: BTreeMap<u32, Scalar> = BTreeMap::new();
    for (op, c_op) in e.terms() {
        let mut acc = f.clone();
        for _ in 0..op.deriv_exp()[0] {
            acc = jackson_quotient(&acc);
        }
        let shift = op.var_exp()[0];
        let c_op = c_op
            .as_scalar()
            .expect("q-line rewriting produces polynomial coefficients");
        for (m, c) in acc {
            let entry = out.entry(m + shift).or_insert_with(Scalar::zero);
            *entry = &*entry + &(&c * c_op);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn poly_to_map(p: &PolyElement) -> BTreeMap<u32, Scalar> {
    p.terms()
        .map(|(m, c)| {
            (
                m.var_exp()[0],
                c.as_scalar().expect("polynomial coefficient").clone(),
            )
        })
        .collect()
}

pub fn map_to_poly(ctx: &AlgebraContext, m: &BTreeMap<u32, Scalar>) -> PolyElement {
    let mut out = PolyElement::zero(*ctx);
    for (&e, c) in m {
        out = out
            .add(
                &PolyElement::monomial(*ctx, PolyMonomial::new(ctx, vec![e], vec![]))
                    .scalar_mul(&ScalarQuotient::from(c.clone())),
            )
            .expect("same context");
    }
    out
}

// ---------------------------------------------------------------------------
// batteries shared by the property and acceptance suites
// ---------------------------------------------------------------------------

/// Normalizing with leftmost and rightmost strategies agrees.
pub fn confluence_battery(seed: u64, cases_per_rule_set: usize) {
    let mut rng = rng_from(seed);
    for ctx in all_contexts() {
        for case in 0..cases_per_rule_set {
            let w = random_word(&mut rng, &ctx, 12);
            let e = OperatorExpr::word(ctx, w.clone()).expect("valid word");
            let left = e.clone().normalize_with(RewriteStrategy::Leftmost);
            let right = e.normalize_with(RewriteStrategy::Rightmost);
            assert_eq!(
                left, right,
                "confluence violated in {} on case {case}: word {w:?}",
                ctx.rule_set()
            );
        }
    }
}

/// normalize(a b) = normalize(normalize(a) normalize(b)).
pub fn homomorphism_battery(seed: u64, cases_per_rule_set: usize) {
    let mut rng = rng_from(seed);
    for ctx in all_contexts() {
        for case in 0..cases_per_rule_set {
            let a = random_expr(&mut rng, &ctx, 2, 6);
            let b = random_expr(&mut rng, &ctx, 2, 6);
            let direct = a.mul(&b).expect("same context").normalize();
            let staged = a
                .clone()
                .normalize()
                .mul(&b.clone().normalize())
                .expect("same context")
                .normalize();
            assert_eq!(
                direct, staged,
                "homomorphism violated in {} on case {case}",
                ctx.rule_set()
            );
        }
    }
}

/// normalize((a b) c) = normalize(a (b c)) with intermediate normal forms.
pub fn associativity_battery(ctx: &AlgebraContext, seed: u64, cases: usize) {
    let mut rng = rng_from(seed);
    for case in 0..cases {
        let a = random_expr(&mut rng, ctx, 2, 4);
        let b = random_expr(&mut rng, ctx, 2, 4);
        let c = random_expr(&mut rng, ctx, 2, 4);
        let left = a
            .mul(&b)
            .expect("same context")
            .normalize()
            .mul(&c)
            .expect("same context")
            .normalize();
        let right = a
            .mul(&b.mul(&c).expect("same context").normalize())
            .expect("same context")
            .normalize();
        assert_eq!(
            left,
            right,
            "associativity violated in {} on case {case}",
            ctx.rule_set()
        );
    }
}

/// q-deformed normal forms at q = 1 agree with the classical normal form of
/// the same word (Jackson derivatives read classically).
pub fn classical_limit_battery(seed: u64, cases_per_rule_set: usize) {
    let mut rng = rng_from(seed);
    let q_contexts = [
        AlgebraContext::q_line(),
        AlgebraContext::quantum_plane(),
        AlgebraContext::quantum_hyperplane(3).expect("valid hyperplane context"),
    ];
    for ctx in q_contexts {
        for case in 0..cases_per_rule_set {
            let w = random_word(&mut rng, &ctx, 10);
            let q_form = OperatorExpr::word(ctx, w.clone())
                .expect("valid word")
                .normalize();
            let (shadow_ctx, shadow_word) = classical_shadow(&ctx, &w);
            let c_form = OperatorExpr::word(shadow_ctx, shadow_word)
                .expect("valid word")
                .normalize();
            let at_one = q_form
                .coefficients_at(&rational_int(1))
                .expect("polynomial coefficients");
            let classical: BTreeMap<_, Rational> = c_form
                .coefficients_at(&rational_int(1))
                .expect("rational coefficients");
            assert_eq!(
                at_one, classical,
                "classical limit violated in {} on case {case}: word {w:?}",
                ctx.rule_set()
            );
        }
    }
}

/// apply(A B, p) = apply(A, apply(B, p)) in every rule set.
pub fn apply_compat_battery(seed: u64, cases_per_rule_set: usize) {
    let mut rng = rng_from(seed);
    for ctx in all_contexts() {
        for case in 0..cases_per_rule_set {
            let a = random_expr(&mut rng, &ctx, 2, 4).normalize();
            let b = random_expr(&mut rng, &ctx, 2, 4).normalize();
            let p = random_poly(&mut rng, &ctx, 4);
            let product = a.mul(&b).expect("same context").normalize();
            let direct = polyrep::apply(&product, &p).expect("same context");
            let staged = polyrep::apply(&a, &polyrep::apply(&b, &p).expect("same context"))
                .expect("same context");
            assert_eq!(
                direct, staged,
                "apply compatibility violated in {} on case {case}",
                ctx.rule_set()
            );
        }
    }
}
