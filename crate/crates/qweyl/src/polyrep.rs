//! Operators acting on the finite-dimensional modules `P_n`: polynomials of
//! total degree at most `n` (a Grassmann variable counts with degree 1).
//!
//! The action is derived from the rewriting engine itself: to apply a normal
//! monomial to a polynomial monomial, concatenate their words, normalize, and
//! keep the derivative-free part — any normal monomial still carrying a
//! derivative annihilates the constant 1. On the classical line this recovers
//! formal differentiation, on the q-line the Jackson derivative
//! `D x^m = {m} x^{m-1}`, and on the quantum plane/hyperplane it defines the
//! module structure (the apply-compatibility property backs that choice).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::opalg::{AlgebraContext, Generator, NormalMonomial, OperatorExpr, Word};
use crate::scalar::ScalarQuotient;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModuleError {
    #[error("operator and polynomial belong to different algebra contexts")]
    ContextMismatch,
    #[error("operator does not preserve P_{degree}: image of `{basis_monomial}` reaches `{offending}`")]
    NotInvariant {
        degree: u32,
        basis_monomial: String,
        offending: String,
    },
}

/// A monomial `x^a theta^eps` of the polynomial module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMonomial {
    var_exp: Vec<u32>,
    grass: Vec<bool>,
}

impl PolyMonomial {
    pub fn new(ctx: &AlgebraContext, var_exp: Vec<u32>, grass: Vec<bool>) -> Self {
        assert_eq!(var_exp.len(), ctx.n_boson());
        assert_eq!(grass.len(), ctx.n_grassmann());
        PolyMonomial { var_exp, grass }
    }

    pub fn one(ctx: &AlgebraContext) -> Self {
        PolyMonomial {
            var_exp: vec![0; ctx.n_boson()],
            grass: vec![false; ctx.n_grassmann()],
        }
    }

    pub fn var_exp(&self) -> &[u32] {
        &self.var_exp
    }

    pub fn grass(&self) -> &[bool] {
        &self.grass
    }

    pub fn total_degree(&self) -> u32 {
        self.var_exp.iter().sum::<u32>() + self.grass.iter().filter(|&&f| f).count() as u32
    }

    fn to_word(&self) -> Word {
        let mut w = Word::new();
        for (i, &e) in self.var_exp.iter().enumerate() {
            for _ in 0..e {
                w.push(Generator::BosonVar(i as u32 + 1));
            }
        }
        for (i, &f) in self.grass.iter().enumerate() {
            if f {
                w.push(Generator::GrassmannVar(i as u32 + 1));
            }
        }
        w
    }

    fn to_normal_monomial(&self, ctx: &AlgebraContext) -> NormalMonomial {
        NormalMonomial::from_parts(
            ctx,
            self.var_exp.clone(),
            self.grass.clone(),
            vec![0; ctx.n_boson()],
            vec![false; ctx.n_grassmann()],
        )
        .expect("dimensions match the context")
    }
}

impl Ord for PolyMonomial {
    /// Graded order with `x`-heavy monomials first within a degree; this is
    /// also the basis order of [`basis`] and [`OperatorMatrix`].
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.var_exp.cmp(&self.var_exp))
            .then_with(|| other.grass.cmp(&self.grass))
    }
}

impl PartialOrd for PolyMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Element of the module: monomials with scalar-quotient coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyElement {
    ctx: AlgebraContext,
    terms: BTreeMap<PolyMonomial, ScalarQuotient>,
}

impl PolyElement {
    pub fn zero(ctx: AlgebraContext) -> Self {
        PolyElement {
            ctx,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: AlgebraContext) -> Self {
        PolyElement::monomial(ctx, PolyMonomial::one(&ctx))
    }

    pub fn monomial(ctx: AlgebraContext, m: PolyMonomial) -> Self {
        let mut out = PolyElement::zero(ctx);
        out.add_term(m, ScalarQuotient::one());
        out
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PolyMonomial, &ScalarQuotient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &PolyMonomial) -> ScalarQuotient {
        self.terms.get(m).cloned().unwrap_or_else(ScalarQuotient::zero)
    }

    fn add_term(&mut self, m: PolyMonomial, c: ScalarQuotient) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = &*o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    o.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &PolyElement) -> Result<PolyElement, ModuleError> {
        if self.ctx != other.ctx {
            return Err(ModuleError::ContextMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolyElement) -> Result<PolyElement, ModuleError> {
        if self.ctx != other.ctx {
            return Err(ModuleError::ContextMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn scalar_mul(&self, c: &ScalarQuotient) -> PolyElement {
        if c.is_zero() {
            return PolyElement::zero(self.ctx);
        }
        PolyElement {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// View as an operator expression (pure multiplication operators); also
    /// how polynomials are printed.
    pub fn to_operator_expr(&self) -> OperatorExpr {
        OperatorExpr::from_terms(
            self.ctx,
            self.terms
                .iter()
                .map(|(m, c)| (m.to_normal_monomial(&self.ctx), c.clone())),
        )
    }
}

impl fmt::Display for PolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_operator_expr())
    }
}

/// Monomial basis of `P_n` in graded order (degree ascending, `x`-heavy
/// first within a degree). Dimension is `n+1` in one variable and
/// `C(n+p, p)` in `p` bosonic variables; Grassmann variables contribute
/// degree-1 flags.
pub fn basis(ctx: &AlgebraContext, n: u32) -> Vec<PolyMonomial> {
    let mut out = Vec::new();
    let n_boson = ctx.n_boson();
    let n_grass = ctx.n_grassmann();
    let mut var_exp = vec![0u32; n_boson];
    fn rec(
        ctx: &AlgebraContext,
        var_exp: &mut Vec<u32>,
        slot: usize,
        left: u32,
        out: &mut Vec<PolyMonomial>,
        n_grass: usize,
    ) {
        if slot == var_exp.len() {
            let mut flags = vec![false; n_grass];
            push_grass(ctx, var_exp, &mut flags, 0, left, out);
            return;
        }
        for e in 0..=left {
            var_exp[slot] = e;
            rec(ctx, var_exp, slot + 1, left - e, out, n_grass);
        }
        var_exp[slot] = 0;
    }
    fn push_grass(
        ctx: &AlgebraContext,
        var_exp: &[u32],
        flags: &mut Vec<bool>,
        slot: usize,
        left: u32,
        out: &mut Vec<PolyMonomial>,
    ) {
        if slot == flags.len() {
            out.push(PolyMonomial::new(ctx, var_exp.to_vec(), flags.clone()));
            return;
        }
        flags[slot] = false;
        push_grass(ctx, var_exp, flags, slot + 1, left, out);
        if left > 0 {
            flags[slot] = true;
            push_grass(ctx, var_exp, flags, slot + 1, left - 1, out);
            flags[slot] = false;
        }
    }
    rec(ctx, &mut var_exp, 0, n, &mut out, n_grass);
    out.sort();
    out
}

/// Apply a normalized operator to a polynomial: right-to-left action derived
/// from the rewriting rules, with derivatives annihilating the constant 1.
pub fn apply(e: &OperatorExpr, p: &PolyElement) -> Result<PolyElement, ModuleError> {
    if e.context() != p.context() {
        return Err(ModuleError::ContextMismatch);
    }
    let ctx = *e.context();
    let words = e.terms().flat_map(|(m_op, c_op)| {
        let op_word = m_op.to_word(&ctx);
        p.terms().map(move |(m_poly, c_poly)| {
            let mut w = op_word.clone();
            w.extend(m_poly.to_word());
            (c_op * c_poly, w)
        })
    });
    let product = OperatorExpr::from_words(ctx, words)
        .expect("words come from validated monomials")
        .normalize();
    let mut out = PolyElement::zero(ctx);
    for (m, c) in product.terms() {
        if m.deriv_order() == 0 {
            out.add_term(
                PolyMonomial::new(&ctx, m.var_exp().to_vec(), m.grass_var().to_vec()),
                c.clone(),
            );
        }
    }
    Ok(out)
}

/// Whether `e` maps every basis monomial of `P_n` to zero.
pub fn annihilates(e: &OperatorExpr, n: u32) -> bool {
    basis(e.context(), n).into_iter().all(|b| {
        apply(e, &PolyElement::monomial(*e.context(), b))
            .expect("same context")
            .is_zero()
    })
}

/// The set of total derivative orders present in a normal form (Grassmann
/// derivatives included).
pub fn derivative_profile(e: &OperatorExpr) -> BTreeSet<u32> {
    e.terms().map(|(m, _)| m.deriv_order()).collect()
}

/// Matrix of an operator on the monomial basis of `P_n`, entries row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorMatrix {
    ctx: AlgebraContext,
    degree_bound: u32,
    basis: Vec<PolyMonomial>,
    entries: Vec<ScalarQuotient>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn basis(&self) -> &[PolyMonomial] {
        &self.basis
    }

    pub fn entry(&self, row: usize, col: usize) -> &ScalarQuotient {
        &self.entries[row * self.dim() + col]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|c| c.is_zero())
    }

    pub fn identity_like(&self) -> bool {
        (0..self.dim()).all(|i| {
            (0..self.dim()).all(|j| {
                let e = self.entry(i, j);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix, ModuleError> {
        if self.ctx != other.ctx || self.degree_bound != other.degree_bound {
            return Err(ModuleError::ContextMismatch);
        }
        let d = self.dim();
        let mut entries = vec![ScalarQuotient::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = other.entry(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let slot = &mut entries[i * d + j];
                    *slot = &*slot + &(a * b);
                }
            }
        }
        Ok(OperatorMatrix {
            ctx: self.ctx,
            degree_bound: self.degree_bound,
            basis: self.basis.clone(),
            entries,
        })
    }

    pub fn pow(&self, n: u32) -> OperatorMatrix {
        let mut acc = OperatorMatrix {
            ctx: self.ctx,
            degree_bound: self.degree_bound,
            basis: self.basis.clone(),
            entries: {
                let d = self.dim();
                let mut e = vec![ScalarQuotient::zero(); d * d];
                for i in 0..d {
                    e[i * d + i] = ScalarQuotient::one();
                }
                e
            },
        };
        for _ in 0..n {
            acc = acc.mul(self).expect("same module");
        }
        acc
    }

    /// Least `m <= max_power` with `self^m = 0`, if any.
    pub fn nilpotency_index(&self, max_power: u32) -> Option<u32> {
        let mut acc = self.pow(0);
        for m in 0..=max_power {
            if acc.is_zero() {
                return Some(m);
            }
            acc = acc.mul(self).expect("same module");
        }
        None
    }
}

impl fmt::Display for OperatorMatrix {
    /// Dense row-major block; scalar entries in canonical text form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        writeln!(
            f,
            "dim {d} basis {}",
            self.basis
                .iter()
                .map(|m| {
                    let ctx = self.ctx;
                    PolyElement::monomial(ctx, m.clone()).to_string()
                })
                .collect::<Vec<_>>()
                .join(", ")
        )?;
        for i in 0..d {
            let row: Vec<String> = (0..d).map(|j| self.entry(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Matrix of `e` on `P_n`; fails with [`ModuleError::NotInvariant`] when the
/// image of a basis monomial leaves the module.
pub fn matrix_of(e: &OperatorExpr, n: u32) -> Result<OperatorMatrix, ModuleError> {
    let ctx = *e.context();
    let basis_vec = basis(&ctx, n);
    let index: BTreeMap<&PolyMonomial, usize> =
        basis_vec.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let d = basis_vec.len();
    let mut entries = vec![ScalarQuotient::zero(); d * d];
    for (j, b) in basis_vec.iter().enumerate() {
        let image = apply(e, &PolyElement::monomial(ctx, b.clone()))?;
        for (m, c) in image.terms() {
            match index.get(m) {
                Some(&i) => entries[i * d + j] = c.clone(),
                None => {
                    return Err(ModuleError::NotInvariant {
                        degree: n,
                        basis_monomial: PolyElement::monomial(ctx, b.clone()).to_string(),
                        offending: PolyElement::monomial(ctx, m.clone()).to_string(),
                    })
                }
            }
        }
    }
    Ok(OperatorMatrix {
        ctx,
        degree_bound: n,
        basis: basis_vec,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::RuleSet;
    use crate::scalar::q_number;

    fn classical_j_plus(n: u32) -> OperatorExpr {
        let ctx = AlgebraContext::classical(1);
        let x = Generator::BosonVar(1);
        let p = Generator::ClassicalDeriv(1);
        OperatorExpr::word(ctx, vec![x, x, p])
            .unwrap()
            .sub(
                &OperatorExpr::generator(ctx, x)
                    .unwrap()
                    .scalar_mul(&ScalarQuotient::from_int(n as i64)),
            )
            .unwrap()
            .normalize()
    }

    #[test]
    fn basis_sizes() {
        let line = AlgebraContext::classical(1);
        assert_eq!(basis(&line, 4).len(), 5);
        let plane = AlgebraContext::classical(2);
        assert_eq!(basis(&plane, 3).len(), 10); // C(5, 2)
        let grass = AlgebraContext::classical_grassmann(1, 1);
        // x^i theta^j with i + j <= n and j <= 1: dimension 2n + 1
        assert_eq!(basis(&grass, 3).len(), 7);
    }

    #[test]
    fn basis_order_is_graded_x_major() {
        let plane = AlgebraContext::classical(2);
        let names: Vec<String> = basis(&plane, 2)
            .into_iter()
            .map(|m| PolyElement::monomial(plane, m).to_string())
            .collect();
        assert_eq!(names, vec!["1", "x", "y", "x^2", "x*y", "y^2"]);
    }

    #[test]
    fn raising_operator_shifts_monomials() {
        // J+ x^i = (i - n) x^{i+1}
        let n = 3;
        let j = classical_j_plus(n);
        let ctx = *j.context();
        for i in 0..=5u32 {
            let p = PolyElement::monomial(ctx, PolyMonomial::new(&ctx, vec![i], vec![]));
            let image = apply(&j, &p).unwrap();
            let expected = PolyElement::monomial(
                ctx,
                PolyMonomial::new(&ctx, vec![i + 1], vec![]),
            )
            .scalar_mul(&ScalarQuotient::from_int(i as i64 - n as i64));
            assert_eq!(image, expected);
        }
    }

    #[test]
    fn jackson_derivative_action() {
        let ctx = AlgebraContext::q_line();
        let d = OperatorExpr::generator(ctx, Generator::JacksonDeriv(1))
            .unwrap()
            .normalize();
        let x3 = PolyElement::monomial(ctx, PolyMonomial::new(&ctx, vec![3], vec![]));
        let image = apply(&d, &x3).unwrap();
        let expected = PolyElement::monomial(ctx, PolyMonomial::new(&ctx, vec![2], vec![]))
            .scalar_mul(&ScalarQuotient::from(q_number(3)));
        assert_eq!(image, expected);
    }

    #[test]
    fn derivative_kills_constants() {
        let ctx = AlgebraContext::classical(1);
        let p = OperatorExpr::generator(ctx, Generator::ClassicalDeriv(1))
            .unwrap()
            .normalize();
        assert!(apply(&p, &PolyElement::one(ctx)).unwrap().is_zero());
    }

    #[test]
    fn annihilation_examples() {
        for n in 0..=4u32 {
            let j = classical_j_plus(n);
            assert!(annihilates(&j.pow(n + 1), n));
            if n >= 1 {
                assert!(!annihilates(&j, n));
            }
        }
    }

    #[test]
    fn matrix_of_lowering_operator() {
        let ctx = AlgebraContext::classical(1);
        let minus = OperatorExpr::generator(ctx, Generator::ClassicalDeriv(1))
            .unwrap()
            .normalize();
        let m = matrix_of(&minus, 1).unwrap();
        assert_eq!(m.dim(), 2);
        assert!(m.entry(0, 0).is_zero());
        assert!(m.entry(0, 1).is_one());
        assert!(m.entry(1, 0).is_zero());
        assert!(m.entry(1, 1).is_zero());
    }

    #[test]
    fn matrix_of_raising_operator_at_n1() {
        let j = classical_j_plus(1);
        let m = matrix_of(&j, 1).unwrap();
        // basis (1, x): J+ 1 = -x, J+ x = 0
        assert_eq!(m.entry(1, 0), &ScalarQuotient::from_int(-1));
        for (i, jj) in [(0, 0), (0, 1), (1, 1)] {
            assert!(m.entry(i, jj).is_zero());
        }
    }

    #[test]
    fn not_invariant_reported() {
        let ctx = AlgebraContext::classical(1);
        let x = OperatorExpr::generator(ctx, Generator::BosonVar(1))
            .unwrap()
            .normalize();
        let err = matrix_of(&x, 2).unwrap_err();
        assert!(matches!(err, ModuleError::NotInvariant { .. }));
    }

    #[test]
    fn derivative_profile_examples() {
        let j2 = classical_j_plus(2);
        let sq = j2.pow(2);
        assert_eq!(
            derivative_profile(&sq).into_iter().collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        let j1 = classical_j_plus(1);
        assert_eq!(
            derivative_profile(&j1.pow(3)).into_iter().collect::<Vec<_>>(),
            vec![2, 3]
        );
        let ctx = AlgebraContext::classical(1);
        assert_eq!(
            derivative_profile(&OperatorExpr::identity(ctx))
                .into_iter()
                .collect::<Vec<_>>(),
            vec![0]
        );
    }

    #[test]
    fn hyperplane_action_matches_plane() {
        // the 2-variable hyperplane is the quantum plane
        let plane = AlgebraContext::quantum_plane();
        let hyper = AlgebraContext::new(2, 0, RuleSet::QuantumHyperplane).unwrap();
        for (ctx_a, ctx_b) in [(plane, hyper)] {
            let da = OperatorExpr::generator(ctx_a, Generator::JacksonDeriv(1))
                .unwrap()
                .normalize();
            let db = OperatorExpr::generator(ctx_b, Generator::JacksonDeriv(1))
                .unwrap()
                .normalize();
            let pa = PolyElement::monomial(ctx_a, PolyMonomial::new(&ctx_a, vec![2, 1], vec![]));
            let pb = PolyElement::monomial(ctx_b, PolyMonomial::new(&ctx_b, vec![2, 1], vec![]));
            let ia = apply(&da, &pa).unwrap();
            let ib = apply(&db, &pb).unwrap();
            let ca: Vec<ScalarQuotient> = ia.terms().map(|(_, c)| c.clone()).collect();
            let cb: Vec<ScalarQuotient> = ib.terms().map(|(_, c)| c.clone()).collect();
            assert_eq!(ca, cb);
        }
    }

    #[test]
    fn grassmann_action_signs() {
        let ctx = AlgebraContext::classical_grassmann(1, 1);
        let dt = OperatorExpr::generator(ctx, Generator::GrassmannDeriv(1))
            .unwrap()
            .normalize();
        let xt = PolyElement::monomial(ctx, PolyMonomial::new(&ctx, vec![1], vec![true]));
        let image = apply(&dt, &xt).unwrap();
        let x = PolyElement::monomial(ctx, PolyMonomial::new(&ctx, vec![1], vec![false]));
        assert_eq!(image, x);
        // theta * theta = 0
        let t = OperatorExpr::generator(ctx, Generator::GrassmannVar(1))
            .unwrap()
            .normalize();
        assert!(apply(&t, &xt).unwrap().is_zero());
    }

    #[test]
    fn matrix_power_matches_operator_power() {
        let j = classical_j_plus(2);
        let m = matrix_of(&j, 2).unwrap();
        let jj = j.pow(2);
        let mm = matrix_of(&jj, 2).unwrap();
        assert_eq!(m.pow(2), mm);
        assert_eq!(m.nilpotency_index(5), Some(3));
    }

    #[test]
    fn q_line_raising_matrix_nilpotent() {
        let ctx = AlgebraContext::q_line();
        let x = Generator::BosonVar(1);
        let d = Generator::JacksonDeriv(1);
        for n in 0..=4u32 {
            let j = OperatorExpr::word(ctx, vec![x, x, d])
                .unwrap()
                .sub(
                    &OperatorExpr::generator(ctx, x)
                        .unwrap()
                        .scalar_mul(&ScalarQuotient::from(q_number(n))),
                )
                .unwrap()
                .normalize();
            let m = matrix_of(&j, n).unwrap();
            assert_eq!(m.nilpotency_index(n + 2), Some(n + 1));
        }
    }

    #[test]
    fn display_matrix_block() {
        let ctx = AlgebraContext::q_line();
        let d = OperatorExpr::generator(ctx, Generator::JacksonDeriv(1))
            .unwrap()
            .normalize();
        let m = matrix_of(&d, 2).unwrap();
        let text = m.to_string();
        assert!(text.starts_with("dim 3 basis 1, x, x^2"));
        assert!(text.contains("1 + q^2"), "expected {{2}} entry, got:\n{text}");
    }
}
