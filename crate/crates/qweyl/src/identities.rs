//! The named operators, the closed normal forms of their raising-operator
//! power identities, identity verification, and the multiplicative-factor
//! fit for the q-deformed sl2 commutation relations.
//!
//! Families:
//!
//! * `Eq1` — classical line: `(x^2 P - n x)^{n+1} = x^{2n+2} P^{n+1}`.
//! * `Eq2` — classical plane (optionally with the second variable Grassmann):
//!   `(x^2 Px + x y Py - n x)^{n+1} = sum_k C(n+1, k) x^{2n+2-k} y^k Px^{n+1-k} Py^k`.
//! * `Eq3` — k variables: `(x1 (sum_m x_m P_m - n))^{n+1}` against the
//!   multinomial expansion.
//! * `Eq4` — q-line: `(x^2 D - {n} x)^{n+1} = q^{2n(n+1)} x^{2n+2} D^{n+1}`.
//! * `Eq7` — quantum plane, with Gaussian binomials and the prefactor
//!   `q^{2n^2 - n(k-2) + k(k-1)}`.
//! * `HyperplaneAnnihilation` — the k-variable q-deformed raising operator
//!   has no closed normal form here; its power is checked to annihilate `P_n`.

use std::fmt;
use std::time::{Duration, Instant};

use crate::opalg::{AlgebraContext, Generator, NormalMonomial, OperatorExpr, Word};
use crate::polyrep;
use crate::scalar::{
    multinomial, n_hat, q_binomial, q_number, rational, Scalar, ScalarQuotient,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Eq1,
    Eq2,
    Eq3,
    Eq4,
    Eq7,
    HyperplaneAnnihilation,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Eq1 => "eq1",
            Family::Eq2 => "eq2",
            Family::Eq3 => "eq3",
            Family::Eq4 => "eq4",
            Family::Eq7 => "eq7",
            Family::HyperplaneAnnihilation => "hyper",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentityError {
    #[error("no closed-form right-hand side for this family")]
    UnsupportedFamily,
    #[error("invalid identity spec: {0}")]
    InvalidSpec(String),
}

/// Parameters of one verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentitySpec {
    pub family: Family,
    pub n: u32,
    /// Variable count; meaningful for `Eq3` and `HyperplaneAnnihilation`.
    pub n_vars: usize,
    /// Treat the second variable as Grassmann; `Eq2` only.
    pub grassmann: bool,
}

impl IdentitySpec {
    pub fn new(family: Family, n: u32) -> Self {
        let n_vars = match family {
            Family::Eq1 | Family::Eq4 => 1,
            Family::Eq2 | Family::Eq7 => 2,
            Family::Eq3 => 2,
            Family::HyperplaneAnnihilation => 3,
        };
        IdentitySpec {
            family,
            n,
            n_vars,
            grassmann: false,
        }
    }

    pub fn with_vars(family: Family, n: u32, n_vars: usize) -> Self {
        IdentitySpec {
            n_vars,
            ..IdentitySpec::new(family, n)
        }
    }

    pub fn eq2_grassmann(n: u32) -> Self {
        IdentitySpec {
            grassmann: true,
            ..IdentitySpec::new(Family::Eq2, n)
        }
    }

    pub fn validate(&self) -> Result<(), IdentityError> {
        if self.grassmann && self.family != Family::Eq2 {
            return Err(IdentityError::InvalidSpec(
                "the Grassmann variant exists for eq2 only".into(),
            ));
        }
        match self.family {
            Family::Eq3 if self.n_vars < 2 => Err(IdentityError::InvalidSpec(
                "eq3 requires at least 2 variables".into(),
            )),
            Family::HyperplaneAnnihilation if self.n_vars < 1 => Err(IdentityError::InvalidSpec(
                "the hyperplane requires at least 1 variable".into(),
            )),
            _ => Ok(()),
        }
    }

    /// The algebra the family lives in.
    pub fn context(&self) -> AlgebraContext {
        match (self.family, self.grassmann) {
            (Family::Eq1, _) => AlgebraContext::classical(1),
            (Family::Eq2, false) => AlgebraContext::classical(2),
            (Family::Eq2, true) => AlgebraContext::classical_grassmann(1, 1),
            (Family::Eq3, _) => AlgebraContext::classical(self.n_vars),
            (Family::Eq4, _) => AlgebraContext::q_line(),
            (Family::Eq7, _) => AlgebraContext::quantum_plane(),
            (Family::HyperplaneAnnihilation, _) => {
                AlgebraContext::quantum_hyperplane(self.n_vars).expect("validated spec")
            }
        }
    }
}

impl fmt::Display for IdentitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={}", self.family, self.n)?;
        if matches!(self.family, Family::Eq3 | Family::HyperplaneAnnihilation) {
            write!(f, " vars={}", self.n_vars)?;
        }
        if self.grassmann {
            write!(f, " grassmann")?;
        }
        Ok(())
    }
}

/// The three generators of an sl2-type triple.
#[derive(Debug, Clone)]
pub struct OperatorTriple {
    pub plus: OperatorExpr,
    pub zero: OperatorExpr,
    pub minus: OperatorExpr,
}

fn word_expr(ctx: AlgebraContext, w: Word) -> OperatorExpr {
    OperatorExpr::word(ctx, w).expect("builder words are valid in their context")
}

/// `x1 (sum_m x_m P_m - shift)` in the given context; the common shape of
/// every raising operator in the five families.
fn raising_from_shift(ctx: AlgebraContext, shift: impl Into<ScalarQuotient>) -> OperatorExpr {
    let mut sum = OperatorExpr::scalar(ctx, shift.into()).neg();
    for m in 1..=ctx.n_boson() as u32 {
        let w = vec![Generator::BosonVar(m), ctx.boson_deriv(m)];
        sum = sum.add(&word_expr(ctx, w)).expect("same context");
    }
    for g in 1..=ctx.n_grassmann() as u32 {
        let w = vec![Generator::GrassmannVar(g), Generator::GrassmannDeriv(g)];
        sum = sum.add(&word_expr(ctx, w)).expect("same context");
    }
    word_expr(ctx, vec![Generator::BosonVar(1)])
        .mul(&sum)
        .expect("same context")
}

/// The classical sl2 triple on the line:
/// `J+ = x^2 P - n x`, `J0 = x P - n/2`, `J- = P`.
pub fn build_sl2(n: u32) -> OperatorTriple {
    let ctx = AlgebraContext::classical(1);
    let x = Generator::BosonVar(1);
    let p = Generator::ClassicalDeriv(1);
    OperatorTriple {
        plus: build_slk_raising(n, 1),
        zero: word_expr(ctx, vec![x, p])
            .sub(&OperatorExpr::scalar(ctx, Scalar::from_rational(rational(n as i64, 2))))
            .expect("same context")
            .normalize(),
        minus: word_expr(ctx, vec![p]).normalize(),
    }
}

/// `x1 (sum_{m=1..n_vars} x_m P_m - n)`; collapses to `x^2 P - n x` for one
/// variable and to the two-variable raising operator for two.
pub fn build_slk_raising(n: u32, n_vars: usize) -> OperatorExpr {
    let ctx = AlgebraContext::classical(n_vars);
    raising_from_shift(ctx, Scalar::from_int(n as i64)).normalize()
}

/// The Grassmann variant of the two-variable raising operator:
/// `x^2 Px + x theta Ptheta - n x`.
pub fn build_grassmann_raising(n: u32) -> OperatorExpr {
    let ctx = AlgebraContext::classical_grassmann(1, 1);
    raising_from_shift(ctx, Scalar::from_int(n as i64)).normalize()
}

/// The q-deformed sl2 triple on the q-line:
/// `J+ = x^2 D - {n} x`, `J0 = x D - n̂`, `J- = D`.
pub fn build_q_sl2(n: u32) -> OperatorTriple {
    let ctx = AlgebraContext::q_line();
    let x = Generator::BosonVar(1);
    let d = Generator::JacksonDeriv(1);
    OperatorTriple {
        plus: raising_from_shift(ctx, q_number(n)).normalize(),
        zero: word_expr(ctx, vec![x, d])
            .sub(&OperatorExpr::scalar(ctx, n_hat(n)))
            .expect("same context")
            .normalize(),
        minus: word_expr(ctx, vec![d]).normalize(),
    }
}

/// `x^2 Dx + x y Dy - {n} x` on the quantum plane.
pub fn build_qplane_raising(n: u32) -> OperatorExpr {
    raising_from_shift(AlgebraContext::quantum_plane(), q_number(n)).normalize()
}

/// `x1 (sum_m x_m D_m - {n})` on the quantum hyperplane.
pub fn build_hyperplane_raising(n: u32, n_vars: usize) -> Result<OperatorExpr, IdentityError> {
    let ctx = AlgebraContext::quantum_hyperplane(n_vars)
        .map_err(|e| IdentityError::InvalidSpec(e.to_string()))?;
    Ok(raising_from_shift(ctx, q_number(n)).normalize())
}

/// The raising operator whose `(n+1)`-th power the family is about.
pub fn raising_operator(spec: &IdentitySpec) -> Result<OperatorExpr, IdentityError> {
    spec.validate()?;
    Ok(match (spec.family, spec.grassmann) {
        (Family::Eq1, _) => build_slk_raising(spec.n, 1),
        (Family::Eq2, false) => build_slk_raising(spec.n, 2),
        (Family::Eq2, true) => build_grassmann_raising(spec.n),
        (Family::Eq3, _) => build_slk_raising(spec.n, spec.n_vars),
        (Family::Eq4, _) => build_q_sl2(spec.n).plus,
        (Family::Eq7, _) => build_qplane_raising(spec.n),
        (Family::HyperplaneAnnihilation, _) => build_hyperplane_raising(spec.n, spec.n_vars)?,
    })
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// The closed normal form of the right-hand side, built verbatim.
pub fn rhs_closed_form(spec: &IdentitySpec) -> Result<OperatorExpr, IdentityError> {
    spec.validate()?;
    let ctx = spec.context();
    let n = spec.n;
    let terms: Vec<(NormalMonomial, ScalarQuotient)> = match (spec.family, spec.grassmann) {
        (Family::Eq1, _) => vec![(
            NormalMonomial::from_parts(&ctx, vec![2 * n + 2], vec![], vec![n + 1], vec![])
                .expect("dimensions match"),
            ScalarQuotient::one(),
        )],
        (Family::Eq2, false) => (0..=n + 1)
            .map(|k| {
                let coeff = multinomial(n + 1, &[n + 1 - k, k]).expect("parts sum to total");
                let m = NormalMonomial::from_parts(
                    &ctx,
                    vec![2 * n + 2 - k, k],
                    vec![],
                    vec![n + 1 - k, k],
                    vec![],
                )
                .expect("dimensions match");
                (m, ScalarQuotient::from(coeff))
            })
            .collect(),
        (Family::Eq2, true) => (0..=(n + 1).min(1))
            .map(|k| {
                let coeff = multinomial(n + 1, &[n + 1 - k, k]).expect("parts sum to total");
                let m = NormalMonomial::from_parts(
                    &ctx,
                    vec![2 * n + 2 - k],
                    vec![k == 1],
                    vec![n + 1 - k],
                    vec![k == 1],
                )
                .expect("dimensions match");
                (m, ScalarQuotient::from(coeff))
            })
            .collect(),
        (Family::Eq3, _) => compositions(n + 1, spec.n_vars)
            .into_iter()
            .map(|js| {
                let coeff = multinomial(n + 1, &js).expect("parts sum to total");
                let mut var_exp = js.clone();
                var_exp[0] += n + 1;
                let m = NormalMonomial::from_parts(&ctx, var_exp, vec![], js, vec![])
                    .expect("dimensions match");
                (m, ScalarQuotient::from(coeff))
            })
            .collect(),
        (Family::Eq4, _) => vec![(
            NormalMonomial::from_parts(&ctx, vec![2 * n + 2], vec![], vec![n + 1], vec![])
                .expect("dimensions match"),
            ScalarQuotient::from(Scalar::q_pow(2 * n as i64 * (n as i64 + 1))),
        )],
        (Family::Eq7, _) => (0..=n + 1)
            .map(|k| {
                let (ni, ki) = (n as i64, k as i64);
                let prefactor = Scalar::q_pow(2 * ni * ni - ni * (ki - 2) + ki * (ki - 1));
                let coeff = &prefactor * &q_binomial(n + 1, k).expect("k <= n + 1");
                let m = NormalMonomial::from_parts(
                    &ctx,
                    vec![2 * n + 2 - k, k],
                    vec![],
                    vec![n + 1 - k, k],
                    vec![],
                )
                .expect("dimensions match");
                (m, ScalarQuotient::from(coeff))
            })
            .collect(),
        (Family::HyperplaneAnnihilation, _) => return Err(IdentityError::UnsupportedFamily),
    };
    Ok(OperatorExpr::from_terms(ctx, terms))
}

/// A differing term between two normal forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub monomial: NormalMonomial,
    pub lhs_coeff: ScalarQuotient,
    pub rhs_coeff: ScalarQuotient,
}

/// Outcome of one identity verification.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub spec: IdentitySpec,
    pub lhs_normal: OperatorExpr,
    /// `None` for the annihilation-only family.
    pub rhs_normal: Option<OperatorExpr>,
    pub equal: bool,
    pub elapsed: Duration,
    pub term_count: usize,
    /// First differing term (in canonical term order) when `equal` is false.
    pub witness: Option<Witness>,
}

fn first_difference(lhs: &OperatorExpr, rhs: &OperatorExpr) -> Option<Witness> {
    let mut monomials: Vec<&NormalMonomial> = lhs.terms().map(|(m, _)| m).collect();
    monomials.extend(rhs.terms().map(|(m, _)| m));
    monomials.sort();
    monomials.dedup();
    for m in monomials {
        let a = lhs.coefficient(m);
        let b = rhs.coefficient(m);
        if a != b {
            return Some(Witness {
                monomial: m.clone(),
                lhs_coeff: a,
                rhs_coeff: b,
            });
        }
    }
    None
}

/// Normalize `raising^{n+1}` and compare against the closed form (or, for
/// the hyperplane family, check annihilation of `P_n`).
pub fn verify_identity(spec: &IdentitySpec) -> Result<VerificationReport, IdentityError> {
    spec.validate()?;
    let start = Instant::now();
    let lhs = raising_operator(spec)?.pow(spec.n + 1);
    let (rhs, equal, witness) = match spec.family {
        Family::HyperplaneAnnihilation => {
            let ok = polyrep::annihilates(&lhs, spec.n);
            (None, ok, None)
        }
        _ => {
            let rhs = rhs_closed_form(spec)?;
            let mut equal = lhs == rhs;
            if spec.grassmann && rhs.term_count() != 2 {
                equal = false;
            }
            let witness = if equal {
                None
            } else {
                first_difference(&lhs, &rhs)
            };
            (Some(rhs), equal, witness)
        }
    };
    let term_count = lhs.term_count();
    Ok(VerificationReport {
        spec: *spec,
        lhs_normal: lhs,
        rhs_normal: rhs,
        equal,
        elapsed: start.elapsed(),
        term_count,
        witness,
    })
}

/// Multiplicative factors attaching the abstract generators of the
/// commutation relations to the concrete q-line triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitFactors {
    pub plus: ScalarQuotient,
    pub zero: ScalarQuotient,
    pub minus: ScalarQuotient,
}

/// Result of fitting the three q-deformed sl2 relations.
#[derive(Debug, Clone)]
pub struct ScalarFit {
    pub n: u32,
    pub relations_hold: bool,
    /// The solved factors (gauge: the minus factor is 1), when consistent.
    pub factors: Option<FitFactors>,
    /// Proportionality scalars of each bracket combination to its target
    /// generator (`J-`, `J0`, `J+`), when proportional.
    pub proportionality: [Option<ScalarQuotient>; 3],
    /// The three raw bracket combinations, for reporting.
    pub residuals: Vec<OperatorExpr>,
}

fn proportionality(e: &OperatorExpr, target: &OperatorExpr) -> Option<ScalarQuotient> {
    if e.is_zero() {
        return Some(ScalarQuotient::zero());
    }
    let (m0, c0) = target.terms().next()?;
    let lambda = &e.coefficient(m0) * &c0.invert()?;
    (e == &target.scalar_mul(&lambda)).then_some(lambda)
}

fn bracket(
    c1: Scalar,
    a: &OperatorExpr,
    b: &OperatorExpr,
    c2: Scalar,
    c: &OperatorExpr,
    d: &OperatorExpr,
) -> OperatorExpr {
    let left = a.mul(b).expect("same context").scalar_mul(&c1.into());
    let right = c.mul(d).expect("same context").scalar_mul(&c2.into());
    left.sub(&right).expect("same context").normalize()
}

/// Fit multiplicative factors `j = alpha J` so that the q-deformed sl2
/// relations hold:
///
/// ```text
/// q^2 j0 j- -      j- j0 = -j-
/// q^4 j+ j- -      j- j+ = -(q^2 + 1) j0
///     j0 j+ - q^2  j+ j0 = j+
/// ```
///
/// A no-solution outcome is a valid report, not an error; the bracket
/// combinations and proportionality scalars are always recorded.
pub fn fit_relations5(n: u32) -> ScalarFit {
    let triple = build_q_sl2(n);
    let (jp, j0, jm) = (&triple.plus, &triple.zero, &triple.minus);
    let one = Scalar::one;
    let q2 = || Scalar::q_pow(2);
    let q4 = || Scalar::q_pow(4);

    // bracket combinations with the raw (unscaled) generators
    let combo_a = bracket(q2(), j0, jm, one(), jm, j0);
    let combo_b = bracket(q4(), jp, jm, one(), jm, jp);
    let combo_c = bracket(one(), j0, jp, q2(), jp, j0);

    let lambda_a = proportionality(&combo_a, jm);
    let lambda_b = proportionality(&combo_b, j0);
    let lambda_c = proportionality(&combo_c, jp);
    let proportionality = [lambda_a.clone(), lambda_b.clone(), lambda_c.clone()];
    let residuals = vec![combo_a, combo_b, combo_c];

    // scaling j = alpha J multiplies the combinations by products of the
    // alphas, so the relations become scalar equations:
    //   a0 am la = -am        => a0 = -1/la
    //   ap am lb = -(q^2+1) a0 => ap am = -(q^2+1) a0 / lb
    //   a0 ap lc = ap          => a0 = 1/lc   (consistency: lc = -la)
    let solved = (|| {
        let la = lambda_a?;
        let lb = lambda_b?;
        let lc = lambda_c?;
        let a0 = -&la.invert()?;
        if a0 != lc.invert()? {
            return None;
        }
        let q2p1 = ScalarQuotient::from(&Scalar::q_pow(2) + &Scalar::one());
        let ap = -&(&(&q2p1 * &a0) * &lb.invert()?);
        Some(FitFactors {
            plus: ap,
            zero: a0,
            minus: ScalarQuotient::one(),
        })
    })();

    let relations_hold = match &solved {
        None => false,
        Some(f) => {
            let sp = jp.scalar_mul(&f.plus);
            let s0 = j0.scalar_mul(&f.zero);
            let sm = jm.scalar_mul(&f.minus);
            let q2p1 = ScalarQuotient::from(&Scalar::q_pow(2) + &Scalar::one());
            let r1 = bracket(q2(), &s0, &sm, one(), &sm, &s0)
                .add(&sm)
                .expect("same context")
                .normalize();
            let r2 = bracket(q4(), &sp, &sm, one(), &sm, &sp)
                .add(&s0.scalar_mul(&q2p1))
                .expect("same context")
                .normalize();
            let r3 = bracket(one(), &s0, &sp, q2(), &sp, &s0)
                .sub(&sp)
                .expect("same context")
                .normalize();
            r1.is_zero() && r2.is_zero() && r3.is_zero()
        }
    };

    ScalarFit {
        n,
        relations_hold,
        factors: solved,
        proportionality,
        residuals,
    }
}
