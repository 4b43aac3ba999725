//! Operator algebra core: generators, words, algebra contexts, and the
//! normal-ordering rewriting engine.
//!
//! Normal order places all variables left of all derivatives: bosonic
//! variables (ascending index), then Grassmann variables, then derivatives,
//! then Grassmann derivatives. Rewriting an out-of-order adjacent pair is
//! rule-set specific:
//!
//! * `Classical`: Leibniz rule `P_i x_i -> 1 + x_i P_i`, everything else
//!   commutes.
//! * `ClassicalGrassmann`: additionally `theta^2 -> 0`, distinct Grassmann
//!   generators anticommute, `Ptheta theta -> 1 - theta Ptheta`, and
//!   Grassmann/boson pairs commute.
//! * `QLine`: `D x -> 1 + q^2 x D`.
//! * `QuantumPlane`: `y x -> q^-1 x y`, `D_x x -> 1 + q^2 x D_x + (q^2-1) y D_y`,
//!   `D_x y -> q y D_x`, `D_y x -> q x D_y`, `D_y y -> 1 + q^2 y D_y`, and
//!   `D_y D_x -> q D_x D_y`.
//! * `QuantumHyperplane`: the k-variable extension of the plane rules, with
//!   `D_i x_i -> 1 + q^2 x_i D_i + (q^2-1) sum_{j>i} x_j D_j`.
//!
//! Every rewrite strictly decreases (derivative-before-variable crossings,
//! word length, class inversions) lexicographically, so rewriting terminates.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::scalar::{Rational, Scalar, ScalarError, ScalarQuotient};

/// Reordering rule family of an [`AlgebraContext`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleSet {
    Classical,
    ClassicalGrassmann,
    QLine,
    QuantumPlane,
    QuantumHyperplane,
}

impl RuleSet {
    pub fn is_q_deformed(self) -> bool {
        matches!(
            self,
            RuleSet::QLine | RuleSet::QuantumPlane | RuleSet::QuantumHyperplane
        )
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RuleSet::Classical => "classical",
            RuleSet::ClassicalGrassmann => "classical+grassmann",
            RuleSet::QLine => "q-line",
            RuleSet::QuantumPlane => "quantum-plane",
            RuleSet::QuantumHyperplane => "quantum-hyperplane",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("generator {0} is not valid in this context")]
    InvalidGenerator(String),
    #[error("operands belong to different algebra contexts")]
    ContextMismatch,
}

/// Variable roster plus rule-set tag. Small and copyable; expressions carry
/// their context by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgebraContext {
    n_boson: usize,
    n_grassmann: usize,
    rule_set: RuleSet,
}

impl AlgebraContext {
    pub fn new(
        n_boson: usize,
        n_grassmann: usize,
        rule_set: RuleSet,
    ) -> Result<Self, AlgebraError> {
        let err = |msg: String| Err(AlgebraError::InvalidContext(msg));
        match rule_set {
            RuleSet::Classical if n_grassmann != 0 => {
                return err("classical rule set has no Grassmann rules".into());
            }
            RuleSet::QLine if n_boson != 1 || n_grassmann != 0 => {
                return err(format!(
                    "q-line requires exactly 1 bosonic variable, got {n_boson} bosonic / {n_grassmann} Grassmann"
                ));
            }
            RuleSet::QuantumPlane if n_boson != 2 || n_grassmann != 0 => {
                return err(format!(
                    "quantum plane requires exactly 2 bosonic variables, got {n_boson} bosonic / {n_grassmann} Grassmann"
                ));
            }
            RuleSet::QuantumHyperplane if n_boson == 0 || n_grassmann != 0 => {
                return err("quantum hyperplane requires bosonic variables only".into());
            }
            _ => {}
        }
        Ok(AlgebraContext {
            n_boson,
            n_grassmann,
            rule_set,
        })
    }

    pub fn classical(n_boson: usize) -> Self {
        AlgebraContext::new(n_boson, 0, RuleSet::Classical).expect("valid classical context")
    }

    pub fn classical_grassmann(n_boson: usize, n_grassmann: usize) -> Self {
        AlgebraContext::new(n_boson, n_grassmann, RuleSet::ClassicalGrassmann)
            .expect("valid Grassmann context")
    }

    pub fn q_line() -> Self {
        AlgebraContext::new(1, 0, RuleSet::QLine).expect("valid q-line context")
    }

    pub fn quantum_plane() -> Self {
        AlgebraContext::new(2, 0, RuleSet::QuantumPlane).expect("valid quantum plane context")
    }

    pub fn quantum_hyperplane(n_boson: usize) -> Result<Self, AlgebraError> {
        AlgebraContext::new(n_boson, 0, RuleSet::QuantumHyperplane)
    }

    pub fn n_boson(&self) -> usize {
        self.n_boson
    }

    pub fn n_grassmann(&self) -> usize {
        self.n_grassmann
    }

    pub fn rule_set(&self) -> RuleSet {
        self.rule_set
    }

    /// The derivative generator for bosonic variable `index` in this context.
    pub fn boson_deriv(&self, index: u32) -> Generator {
        if self.rule_set.is_q_deformed() {
            Generator::JacksonDeriv(index)
        } else {
            Generator::ClassicalDeriv(index)
        }
    }

    pub fn validate_generator(&self, g: Generator) -> Result<(), AlgebraError> {
        let bad = |g: Generator| Err(AlgebraError::InvalidGenerator(format!("{g:?}")));
        match g {
            Generator::BosonVar(i) => {
                if i == 0 || i as usize > self.n_boson {
                    return bad(g);
                }
            }
            Generator::GrassmannVar(i) | Generator::GrassmannDeriv(i) => {
                if i == 0 || i as usize > self.n_grassmann {
                    return bad(g);
                }
            }
            Generator::ClassicalDeriv(i) => {
                if i == 0 || i as usize > self.n_boson || self.rule_set.is_q_deformed() {
                    return bad(g);
                }
            }
            Generator::JacksonDeriv(i) => {
                if i == 0 || i as usize > self.n_boson || !self.rule_set.is_q_deformed() {
                    return bad(g);
                }
            }
        }
        Ok(())
    }
}

/// A single algebra symbol. Indices are 1-based, matching the surface
/// syntax `x1, x2, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Generator {
    BosonVar(u32),
    GrassmannVar(u32),
    ClassicalDeriv(u32),
    JacksonDeriv(u32),
    GrassmannDeriv(u32),
}

/// Position of a generator in the canonical normal order.
#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
struct Rank(u8, u32);

impl Generator {
    fn rank(self) -> Rank {
        match self {
            Generator::BosonVar(i) => Rank(0, i),
            Generator::GrassmannVar(i) => Rank(1, i),
            Generator::ClassicalDeriv(i) | Generator::JacksonDeriv(i) => Rank(2, i),
            Generator::GrassmannDeriv(i) => Rank(3, i),
        }
    }

    fn is_grassmann_kind(self) -> bool {
        matches!(
            self,
            Generator::GrassmannVar(_) | Generator::GrassmannDeriv(_)
        )
    }
}

/// Ordered product of generators; the empty word is the identity operator.
pub type Word = Vec<Generator>;

/// Canonical exponent-vector form of a normally ordered product:
/// `x^a theta^eps D^b Ptheta^delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalMonomial {
    var_exp: Vec<u32>,
    grass_var: Vec<bool>,
    deriv_exp: Vec<u32>,
    grass_deriv: Vec<bool>,
}

impl NormalMonomial {
    pub fn identity(ctx: &AlgebraContext) -> Self {
        NormalMonomial {
            var_exp: vec![0; ctx.n_boson],
            grass_var: vec![false; ctx.n_grassmann],
            deriv_exp: vec![0; ctx.n_boson],
            grass_deriv: vec![false; ctx.n_grassmann],
        }
    }

    pub fn from_parts(
        ctx: &AlgebraContext,
        var_exp: Vec<u32>,
        grass_var: Vec<bool>,
        deriv_exp: Vec<u32>,
        grass_deriv: Vec<bool>,
    ) -> Result<Self, AlgebraError> {
        if var_exp.len() != ctx.n_boson
            || deriv_exp.len() != ctx.n_boson
            || grass_var.len() != ctx.n_grassmann
            || grass_deriv.len() != ctx.n_grassmann
        {
            return Err(AlgebraError::InvalidContext(
                "exponent vector lengths do not match the context".into(),
            ));
        }
        Ok(NormalMonomial {
            var_exp,
            grass_var,
            deriv_exp,
            grass_deriv,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.var_exp.iter().all(|&e| e == 0)
            && self.deriv_exp.iter().all(|&e| e == 0)
            && !self.grass_var.iter().any(|&f| f)
            && !self.grass_deriv.iter().any(|&f| f)
    }

    pub fn var_exp(&self) -> &[u32] {
        &self.var_exp
    }

    pub fn grass_var(&self) -> &[bool] {
        &self.grass_var
    }

    pub fn deriv_exp(&self) -> &[u32] {
        &self.deriv_exp
    }

    pub fn grass_deriv(&self) -> &[bool] {
        &self.grass_deriv
    }

    /// Degree as a graded operator: variables count +1, derivatives -1,
    /// Grassmann flags included in their respective sums.
    pub fn graded_degree(&self) -> i64 {
        let vars: i64 = self.var_exp.iter().map(|&e| e as i64).sum::<i64>()
            + self.grass_var.iter().filter(|&&f| f).count() as i64;
        let derivs: i64 = self.deriv_exp.iter().map(|&e| e as i64).sum::<i64>()
            + self.grass_deriv.iter().filter(|&&f| f).count() as i64;
        vars - derivs
    }

    /// Total derivative order, Grassmann derivatives included.
    pub fn deriv_order(&self) -> u32 {
        self.deriv_exp.iter().sum::<u32>()
            + self.grass_deriv.iter().filter(|&&f| f).count() as u32
    }

    /// Expand back into the canonical word.
    pub fn to_word(&self, ctx: &AlgebraContext) -> Word {
        let mut w = Word::new();
        for (i, &e) in self.var_exp.iter().enumerate() {
            for _ in 0..e {
                w.push(Generator::BosonVar(i as u32 + 1));
            }
        }
        for (i, &f) in self.grass_var.iter().enumerate() {
            if f {
                w.push(Generator::GrassmannVar(i as u32 + 1));
            }
        }
        for (i, &e) in self.deriv_exp.iter().enumerate() {
            for _ in 0..e {
                w.push(ctx.boson_deriv(i as u32 + 1));
            }
        }
        for (i, &f) in self.grass_deriv.iter().enumerate() {
            if f {
                w.push(Generator::GrassmannDeriv(i as u32 + 1));
            }
        }
        w
    }
}

impl Ord for NormalMonomial {
    /// Term order used for printing and witness selection: graded degree,
    /// then derivative order, then descending lexicographic exponents (so
    /// `x`-heavy monomials print first within a degree).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.graded_degree()
            .cmp(&other.graded_degree())
            .then_with(|| self.deriv_order().cmp(&other.deriv_order()))
            .then_with(|| other.var_exp.cmp(&self.var_exp))
            .then_with(|| other.grass_var.cmp(&self.grass_var))
            .then_with(|| other.deriv_exp.cmp(&self.deriv_exp))
            .then_with(|| other.grass_deriv.cmp(&self.grass_deriv))
    }
}

impl PartialOrd for NormalMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Inversion-selection order for the rewriting loop. Exposed so the
/// confluence tests can compare strategies; results are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteStrategy {
    Leftmost,
    Rightmost,
}

/// Finite linear combination of words with scalar-quotient coefficients.
///
/// Multiplication is lazy: products accumulate pending words, and
/// [`OperatorExpr::normalize`] rewrites them into the canonical term map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorExpr {
    ctx: AlgebraContext,
    terms: BTreeMap<NormalMonomial, ScalarQuotient>,
    pending: Vec<(ScalarQuotient, Word)>,
}

impl OperatorExpr {
    pub fn zero(ctx: AlgebraContext) -> Self {
        OperatorExpr {
            ctx,
            terms: BTreeMap::new(),
            pending: Vec::new(),
        }
    }

    pub fn identity(ctx: AlgebraContext) -> Self {
        OperatorExpr::scalar(ctx, ScalarQuotient::one())
    }

    pub fn scalar(ctx: AlgebraContext, c: impl Into<ScalarQuotient>) -> Self {
        let mut out = OperatorExpr::zero(ctx);
        let c = c.into();
        if !c.is_zero() {
            out.terms.insert(NormalMonomial::identity(&ctx), c);
        }
        out
    }

    pub fn generator(ctx: AlgebraContext, g: Generator) -> Result<Self, AlgebraError> {
        OperatorExpr::word(ctx, vec![g])
    }

    pub fn word(ctx: AlgebraContext, w: Word) -> Result<Self, AlgebraError> {
        OperatorExpr::weighted_word(ctx, ScalarQuotient::one(), w)
    }

    pub fn weighted_word(
        ctx: AlgebraContext,
        c: impl Into<ScalarQuotient>,
        w: Word,
    ) -> Result<Self, AlgebraError> {
        for &g in &w {
            ctx.validate_generator(g)?;
        }
        let mut out = OperatorExpr::zero(ctx);
        out.pending.push((c.into(), w));
        Ok(out)
    }

    pub fn from_words(
        ctx: AlgebraContext,
        words: impl IntoIterator<Item = (ScalarQuotient, Word)>,
    ) -> Result<Self, AlgebraError> {
        let mut out = OperatorExpr::zero(ctx);
        for (c, w) in words {
            for &g in &w {
                ctx.validate_generator(g)?;
            }
            out.pending.push((c, w));
        }
        Ok(out)
    }

    pub fn from_terms(
        ctx: AlgebraContext,
        terms: impl IntoIterator<Item = (NormalMonomial, ScalarQuotient)>,
    ) -> Self {
        let mut out = OperatorExpr::zero(ctx);
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn is_normalized(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        debug_assert!(self.is_normalized(), "zero test requires a normal form");
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NormalMonomial, &ScalarQuotient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &NormalMonomial) -> ScalarQuotient {
        self.terms.get(m).cloned().unwrap_or_else(ScalarQuotient::zero)
    }

    fn add_term(&mut self, m: NormalMonomial, c: ScalarQuotient) {
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

    fn check_ctx(&self, other: &OperatorExpr) -> Result<(), AlgebraError> {
        if self.ctx != other.ctx {
            return Err(AlgebraError::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorExpr) -> Result<OperatorExpr, AlgebraError> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out.pending.extend(other.pending.iter().cloned());
        Ok(out)
    }

    pub fn sub(&self, other: &OperatorExpr) -> Result<OperatorExpr, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> OperatorExpr {
        OperatorExpr {
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c))
                .collect(),
            pending: self
                .pending
                .iter()
                .map(|(c, w)| (-c, w.clone()))
                .collect(),
        }
    }

    pub fn scalar_mul(&self, c: &ScalarQuotient) -> OperatorExpr {
        if c.is_zero() {
            return OperatorExpr::zero(self.ctx);
        }
        OperatorExpr {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
            pending: self
                .pending
                .iter()
                .map(|(k, w)| (k * c, w.clone()))
                .collect(),
        }
    }

    fn all_words(&self) -> Vec<(ScalarQuotient, Word)> {
        let mut words: Vec<(ScalarQuotient, Word)> = self
            .terms
            .iter()
            .map(|(m, c)| (c.clone(), m.to_word(&self.ctx)))
            .collect();
        words.extend(self.pending.iter().cloned());
        words
    }

    /// Bilinear concatenation of words. The result is not normalized.
    pub fn mul(&self, other: &OperatorExpr) -> Result<OperatorExpr, AlgebraError> {
        self.check_ctx(other)?;
        let mut out = OperatorExpr::zero(self.ctx);
        for (ca, wa) in self.all_words() {
            for (cb, wb) in other.all_words() {
                let mut w = wa.clone();
                w.extend_from_slice(&wb);
                out.pending.push((&ca * &cb, w));
            }
        }
        Ok(out)
    }

    /// `self^n`, normalizing after each factor multiplication to curb
    /// intermediate blowup. `pow(_, 0)` is the identity.
    pub fn pow(&self, n: u32) -> OperatorExpr {
        if n == 0 {
            return OperatorExpr::identity(self.ctx);
        }
        let base = self.clone().normalize();
        let mut acc = base.clone();
        for _ in 1..n {
            acc = acc
                .mul(&base)
                .expect("same context")
                .normalize();
        }
        acc
    }

    pub fn normalize(self) -> OperatorExpr {
        self.normalize_with(RewriteStrategy::Leftmost)
    }

    /// Rewrite all pending words into normal monomials using the given
    /// inversion-selection strategy.
    pub fn normalize_with(mut self, strategy: RewriteStrategy) -> OperatorExpr {
        let ctx = self.ctx;
        let pending = std::mem::take(&mut self.pending);
        for (c, w) in pending {
            normalize_word(&ctx, c, w, strategy, &mut self);
        }
        self
    }

    /// Common degree of all terms as a graded operator, or `None` when the
    /// expression mixes degrees (or has no terms).
    pub fn graded_degree(&self) -> Option<i64> {
        debug_assert!(self.is_normalized(), "graded degree requires a normal form");
        let mut iter = self.terms.keys();
        let first = iter.next()?.graded_degree();
        iter.all(|m| m.graded_degree() == first).then_some(first)
    }

    /// Coefficients specialized at `q = q0`, with vanishing terms dropped.
    pub fn coefficients_at(
        &self,
        q0: &Rational,
    ) -> Result<BTreeMap<NormalMonomial, Rational>, ScalarError> {
        debug_assert!(self.is_normalized(), "specialization requires a normal form");
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = c.eval_at(q0)?;
            if !v.is_zero() {
                out.insert(m.clone(), v);
            }
        }
        Ok(out)
    }

    /// The same expression with every coefficient evaluated at `q = q0`.
    pub fn specialize_q(&self, q0: &Rational) -> Result<OperatorExpr, ScalarError> {
        let terms = self.coefficients_at(q0)?;
        Ok(OperatorExpr::from_terms(
            self.ctx,
            terms
                .into_iter()
                .map(|(m, v)| (m, ScalarQuotient::from(v))),
        ))
    }
}

/// Replacement sequences for one out-of-order adjacent pair `g1 g2`:
/// a list of `(scalar multiplier, replacement)` alternatives.
fn rewrite_pair(ctx: &AlgebraContext, g1: Generator, g2: Generator) -> Vec<(Scalar, Word)> {
    use Generator::*;
    let swap = |c: Scalar| vec![(c, vec![g2, g1])];
    let one = Scalar::one;
    let q_sq = || Scalar::q_pow(2);
    // q^2 - 1, the cross-variable weight of the quantum-plane Leibniz rule
    let q_sq_m1 = || &Scalar::q_pow(2) - &Scalar::one();

    match (g1, g2) {
        (BosonVar(i), BosonVar(j)) => {
            debug_assert!(i > j);
            if ctx.rule_set.is_q_deformed() {
                swap(Scalar::q_pow(-1))
            } else {
                swap(one())
            }
        }
        (GrassmannVar(i), GrassmannVar(j)) | (GrassmannDeriv(i), GrassmannDeriv(j)) => {
            if i == j {
                Vec::new() // theta^2 = 0
            } else {
                swap(Scalar::from_int(-1))
            }
        }
        (ClassicalDeriv(i), ClassicalDeriv(j)) => {
            debug_assert!(i > j);
            swap(one())
        }
        (JacksonDeriv(i), JacksonDeriv(j)) => {
            debug_assert!(i > j);
            swap(Scalar::q())
        }
        (ClassicalDeriv(i), BosonVar(j)) => {
            if i == j {
                vec![(one(), Vec::new()), (one(), vec![g2, g1])]
            } else {
                swap(one())
            }
        }
        (JacksonDeriv(i), BosonVar(j)) => {
            if i == j {
                let mut alts = vec![(one(), Vec::new()), (q_sq(), vec![g2, g1])];
                if ctx.rule_set != RuleSet::QLine {
                    for m in (i + 1)..=(ctx.n_boson as u32) {
                        alts.push((q_sq_m1(), vec![BosonVar(m), JacksonDeriv(m)]));
                    }
                }
                alts
            } else {
                swap(Scalar::q())
            }
        }
        (GrassmannDeriv(i), GrassmannVar(j)) => {
            if i == j {
                vec![
                    (one(), Vec::new()),
                    (Scalar::from_int(-1), vec![g2, g1]),
                ]
            } else {
                swap(Scalar::from_int(-1))
            }
        }
        // Grassmann/boson pairs commute, as do derivative-past-Grassmann moves.
        (g1, g2) if g1.is_grassmann_kind() != g2.is_grassmann_kind() => swap(one()),
        _ => unreachable!("no rewrite for ordered pair {g1:?} {g2:?}"),
    }
}

fn needs_rewrite(g1: Generator, g2: Generator) -> bool {
    if g1.rank() > g2.rank() {
        return true;
    }
    g1 == g2 && g1.is_grassmann_kind()
}

fn find_inversion(w: &[Generator], strategy: RewriteStrategy) -> Option<usize> {
    match strategy {
        RewriteStrategy::Leftmost => (0..w.len().saturating_sub(1))
            .find(|&i| needs_rewrite(w[i], w[i + 1])),
        RewriteStrategy::Rightmost => (0..w.len().saturating_sub(1))
            .rev()
            .find(|&i| needs_rewrite(w[i], w[i + 1])),
    }
}

// Rewriting terminates; the budget only guards against rule-table bugs.
const STEP_BUDGET: u64 = 1_000_000_000;

fn normalize_word(
    ctx: &AlgebraContext,
    coeff: ScalarQuotient,
    word: Word,
    strategy: RewriteStrategy,
    out: &mut OperatorExpr,
) {
    let mut stack: Vec<(ScalarQuotient, Word)> = vec![(coeff, word)];
    let mut steps: u64 = 0;
    while let Some((c, w)) = stack.pop() {
        steps += 1;
        assert!(steps < STEP_BUDGET, "rewrite step budget exceeded");
        if c.is_zero() {
            continue;
        }
        match find_inversion(&w, strategy) {
            None => {
                if let Some(m) = accumulate(ctx, &w) {
                    out.add_term(m, c);
                }
            }
            Some(i) => {
                for (mult, repl) in rewrite_pair(ctx, w[i], w[i + 1]) {
                    let mut nw = Word::with_capacity(w.len() + repl.len());
                    nw.extend_from_slice(&w[..i]);
                    nw.extend_from_slice(&repl);
                    nw.extend_from_slice(&w[i + 2..]);
                    stack.push((&c * &ScalarQuotient::from(mult), nw));
                }
            }
        }
    }
}

/// Fold a fully ordered word into a normal monomial. Returns `None` when a
/// repeated Grassmann generator makes the term vanish (signs were already
/// emitted by the anticommutation rewrites).
fn accumulate(ctx: &AlgebraContext, w: &[Generator]) -> Option<NormalMonomial> {
    let mut m = NormalMonomial::identity(ctx);
    for &g in w {
        match g {
            Generator::BosonVar(i) => m.var_exp[i as usize - 1] += 1,
            Generator::ClassicalDeriv(i) | Generator::JacksonDeriv(i) => {
                m.deriv_exp[i as usize - 1] += 1
            }
            Generator::GrassmannVar(i) => {
                let slot = &mut m.grass_var[i as usize - 1];
                if *slot {
                    return None;
                }
                *slot = true;
            }
            Generator::GrassmannDeriv(i) => {
                let slot = &mut m.grass_deriv[i as usize - 1];
                if *slot {
                    return None;
                }
                *slot = true;
            }
        }
    }
    Some(m)
}
