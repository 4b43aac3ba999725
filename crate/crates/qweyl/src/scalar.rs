//! Exact coefficient arithmetic: arbitrary-precision rationals, Laurent
//! polynomials in the formal parameter `q`, and the q-combinatorics built on
//! top of them (q-numbers, q-factorials, Gaussian binomials, the shift `n̂`).
//!
//! All q-machinery works in base `q^2`: the q-number is
//! `{n} = (1 - q^{2n})/(1 - q^2) = 1 + q^2 + ... + q^{2(n-1)}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Exact rational number. Kept reduced with a positive denominator by
/// `num-rational`, which matches the invariants we rely on.
pub type Rational = num_rational::BigRational;

/// Errors from scalar arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    /// Exact division was requested but the divisor does not divide the
    /// dividend in the Laurent ring. Signals a misderived identity.
    #[error("not divisible: remainder is nonzero")]
    NotDivisible,
    /// Evaluation point is a pole of the value (q = 0 with negative powers
    /// present, or a vanishing denominator).
    #[error("evaluation point is a pole")]
    ZeroAtPole,
    /// `q_binomial(n, k)` with `k > n`.
    #[error("q-binomial out of range: k = {k} exceeds n = {n}")]
    OutOfRange { n: u32, k: u32 },
    /// Multinomial parts do not sum to the stated total.
    #[error("multinomial parts sum to {sum}, expected {total}")]
    PartsMismatch { total: u32, sum: u32 },
}

pub fn rational_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

fn rational_pow(base: &Rational, exp: i64) -> Result<Rational, ScalarError> {
    if exp == 0 {
        return Ok(Rational::one());
    }
    if base.is_zero() && exp < 0 {
        return Err(ScalarError::ZeroAtPole);
    }
    let mag = exp.unsigned_abs() as u32;
    let p = Rational::new(base.numer().pow(mag), base.denom().pow(mag));
    Ok(if exp < 0 { p.recip() } else { p })
}

/// Laurent polynomial in `q` with exact rational coefficients.
///
/// Stored as a map from integer exponent (possibly negative) to a nonzero
/// coefficient; the zero scalar has an empty map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scalar {
    terms: BTreeMap<i64, Rational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(rational_int(n))
    }

    pub fn from_rational(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        Scalar { terms }
    }

    /// The formal variable `q`.
    pub fn q() -> Self {
        Scalar::q_pow(1)
    }

    /// `q^e`, with `e` possibly negative.
    pub fn q_pow(e: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(e, Rational::one());
        Scalar { terms }
    }

    /// `c * q^e`.
    pub fn term(c: Rational, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Scalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Coefficient of `q^e` (zero if absent).
    pub fn coeff(&self, e: i64) -> Rational {
        self.terms.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Iterate `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// Smallest exponent with a nonzero coefficient. `None` for zero.
    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Largest exponent with a nonzero coefficient. `None` for zero.
    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    fn insert_add(&mut self, e: i64, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: i64) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Scalar {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    pub fn pow(&self, mut n: u32) -> Scalar {
        let mut acc = Scalar::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Substitute `q := q0` exactly.
    ///
    /// Fails with [`ScalarError::ZeroAtPole`] when `q0 = 0` and negative
    /// exponents are present.
    pub fn eval_at(&self, q0: &Rational) -> Result<Rational, ScalarError> {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            acc += c * rational_pow(q0, *e)?;
        }
        Ok(acc)
    }

    /// Exact division in the Laurent ring.
    pub fn exact_div(&self, b: &Scalar) -> Result<Scalar, ScalarError> {
        if b.is_zero() {
            return Err(ScalarError::NotDivisible);
        }
        if self.is_zero() {
            return Ok(Scalar::zero());
        }
        let sa = self.min_exp().unwrap();
        let sb = b.min_exp().unwrap();
        let (quot, rem) = poly_divrem(&self.shift(-sa), &b.shift(-sb));
        if rem.is_zero() {
            Ok(quot.shift(sa - sb))
        } else {
            Err(ScalarError::NotDivisible)
        }
    }
}

/// Long division of ordinary polynomials in `q` (nonnegative exponents,
/// rational coefficients): returns `(quotient, remainder)`.
fn poly_divrem(a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
    debug_assert!(!b.is_zero());
    let db = b.max_exp().unwrap();
    let lead_b = b.coeff(db);
    let mut rem = a.clone();
    let mut quot = Scalar::zero();
    while !rem.is_zero() {
        let dr = rem.max_exp().unwrap();
        if dr < db {
            break;
        }
        let factor = Scalar::term(rem.coeff(dr) / &lead_b, dr - db);
        rem = &rem - &(&factor * b);
        quot = &quot + &factor;
    }
    (quot, rem)
}

/// Monic gcd of two ordinary polynomials in `q`.
fn poly_gcd(a: &Scalar, b: &Scalar) -> Scalar {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_zero() {
        let (_, r) = poly_divrem(&x, &y);
        x = y;
        y = r;
    }
    if x.is_zero() {
        return x;
    }
    let lead = x.coeff(x.max_exp().unwrap());
    x.scale(&lead.recip())
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(*e, c);
        }
        out
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(*e, &-c.clone());
        }
        out
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.insert_add(ea + eb, &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn fmt_power(e: i64) -> String {
    match e {
        1 => "q".to_string(),
        _ => format!("q^{e}"),
    }
}

impl fmt::Display for Scalar {
    /// Canonical text form: terms in increasing q-exponent,
    /// e.g. `1 + 2*q^2 - q^4`.
    ///
    /// A leading negative unit coefficient on a q-power prints as `-1*q^e`:
    /// in the surface grammar unary minus binds before `^`, so `-q^e` would
    /// read back as `(-q)^e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            let leading_power_of_negative_unit = i == 0 && neg && mag.is_one() && *e != 0 && *e != 1;
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if *e == 0 {
                write!(f, "{mag}")?;
            } else if leading_power_of_negative_unit {
                write!(f, "1*{}", fmt_power(*e))?;
            } else if mag.is_one() {
                write!(f, "{}", fmt_power(*e))?;
            } else {
                write!(f, "{}*{}", mag, fmt_power(*e))?;
            }
        }
        Ok(())
    }
}

/// Reduced quotient of two Laurent polynomials in `q`.
///
/// The denominator is canonical: an ordinary polynomial with constant term 1,
/// coprime to the (shifted) numerator. Plain scalars embed with denominator 1,
/// and arithmetic takes a fast path in that case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarQuotient {
    num: Scalar,
    den: Scalar,
}

impl ScalarQuotient {
    /// Build `num / den` in canonical reduced form.
    ///
    /// Panics when `den` is zero; quotients are only ever formed from nonzero
    /// q-numbers.
    pub fn new(num: Scalar, den: Scalar) -> Self {
        assert!(!den.is_zero(), "zero denominator in scalar quotient");
        if num.is_zero() {
            return ScalarQuotient {
                num: Scalar::zero(),
                den: Scalar::one(),
            };
        }
        if den.is_one() {
            return ScalarQuotient {
                num,
                den: Scalar::one(),
            };
        }
        let sa = num.min_exp().unwrap();
        let sb = den.min_exp().unwrap();
        let a = num.shift(-sa);
        let b = den.shift(-sb);
        let g = poly_gcd(&a, &b);
        let a = a.exact_div(&g).expect("gcd divides numerator");
        let b = b.exact_div(&g).expect("gcd divides denominator");
        let unit = b.coeff(0).recip();
        ScalarQuotient {
            num: a.scale(&unit).shift(sa - sb),
            den: b.scale(&unit),
        }
    }

    pub fn zero() -> Self {
        Scalar::zero().into()
    }

    pub fn one() -> Self {
        Scalar::one().into()
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_int(n).into()
    }

    pub fn numerator(&self) -> &Scalar {
        &self.num
    }

    pub fn denominator(&self) -> &Scalar {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Whether this is a plain Laurent polynomial (denominator 1).
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// The underlying scalar when the denominator is 1.
    pub fn as_scalar(&self) -> Option<&Scalar> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn invert(&self) -> Option<ScalarQuotient> {
        if self.is_zero() {
            return None;
        }
        Some(ScalarQuotient::new(self.den.clone(), self.num.clone()))
    }

    pub fn eval_at(&self, q0: &Rational) -> Result<Rational, ScalarError> {
        let d = self.den.eval_at(q0)?;
        if d.is_zero() {
            return Err(ScalarError::ZeroAtPole);
        }
        Ok(self.num.eval_at(q0)? / d)
    }
}

impl From<Scalar> for ScalarQuotient {
    fn from(num: Scalar) -> Self {
        ScalarQuotient {
            num,
            den: Scalar::one(),
        }
    }
}

impl From<Rational> for ScalarQuotient {
    fn from(c: Rational) -> Self {
        Scalar::from_rational(c).into()
    }
}

impl Add for &ScalarQuotient {
    type Output = ScalarQuotient;
    fn add(self, rhs: &ScalarQuotient) -> ScalarQuotient {
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return num.into();
            }
            return ScalarQuotient::new(num, self.den.clone());
        }
        ScalarQuotient::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &ScalarQuotient {
    type Output = ScalarQuotient;
    fn sub(self, rhs: &ScalarQuotient) -> ScalarQuotient {
        self + &-rhs
    }
}

impl Mul for &ScalarQuotient {
    type Output = ScalarQuotient;
    fn mul(self, rhs: &ScalarQuotient) -> ScalarQuotient {
        let num = &self.num * &rhs.num;
        if self.den.is_one() && rhs.den.is_one() {
            return num.into();
        }
        ScalarQuotient::new(num, &self.den * &rhs.den)
    }
}

impl Neg for &ScalarQuotient {
    type Output = ScalarQuotient;
    fn neg(self) -> ScalarQuotient {
        ScalarQuotient {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for ScalarQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.term_count() > 1 {
            write!(f, "({})/({})", self.num, self.den)
        } else {
            write!(f, "{}/({})", self.num, self.den)
        }
    }
}

/// The q-number `{n} = 1 + q^2 + ... + q^{2(n-1)}`; `{0} = 0`.
pub fn q_number(n: u32) -> Scalar {
    let mut out = Scalar::zero();
    for i in 0..n {
        out.insert_add(2 * i as i64, &Rational::one());
    }
    out
}

/// The q-factorial `{n}! = {1}{2}...{n}`, with `{0}! = 1`.
pub fn q_factorial(n: u32) -> Scalar {
    let mut out = Scalar::one();
    for m in 1..=n {
        out = &out * &q_number(m);
    }
    out
}

/// Gaussian binomial `{n}! / ({k}! {n-k}!)`, a polynomial in `q`.
///
/// Computed by exact division; it satisfies the Pascal-type recurrence
/// `qbinom(n, k) = qbinom(n-1, k-1) + q^{2k} * qbinom(n-1, k)`.
pub fn q_binomial(n: u32, k: u32) -> Result<Scalar, ScalarError> {
    if k > n {
        return Err(ScalarError::OutOfRange { n, k });
    }
    let den = &q_factorial(k) * &q_factorial(n - k);
    Ok(q_factorial(n)
        .exact_div(&den)
        .expect("Gaussian binomial division is exact"))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Multinomial coefficient `total! / (parts[0]! parts[1]! ...)`.
pub fn multinomial(total: u32, parts: &[u32]) -> Result<Rational, ScalarError> {
    let sum: u32 = parts.iter().sum();
    if sum != total {
        return Err(ScalarError::PartsMismatch { total, sum });
    }
    let mut den = BigInt::one();
    for p in parts {
        den *= factorial(*p);
    }
    Ok(Rational::new(factorial(total), den))
}

/// The scalar shift `n̂ = {n}{n+1} / {2n+2}`, kept as an exact reduced
/// quotient ({2n+2} does not divide {n}{n+1} in general).
pub fn n_hat(n: u32) -> ScalarQuotient {
    ScalarQuotient::new(&q_number(n) * &q_number(n + 1), q_number(2 * n + 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        // small builder for tests: sum of (coeff, exp) pairs is clearer
        // than parsing here, so accept "c,e;c,e" pairs
        let mut out = Scalar::zero();
        for part in text.split(';').filter(|p| !p.is_empty()) {
            let (c, e) = part.split_once(',').unwrap();
            out = &out + &Scalar::term(rational_int(c.parse().unwrap()), e.parse().unwrap());
        }
        out
    }

    #[test]
    fn add_examples() {
        // q^2 + 1
        let sum = &Scalar::q_pow(2) + &Scalar::one();
        assert_eq!(sum, s("1,0;1,2"));
        assert_eq!(sum.to_string(), "1 + q^2");
    }

    #[test]
    fn mul_difference_of_squares() {
        let a = s("1,0;1,2"); // 1 + q^2
        let b = s("1,0;-1,2"); // 1 - q^2
        assert_eq!(&a * &b, s("1,0;-1,4"));
    }

    #[test]
    fn exact_div_q_number() {
        // (1 - q^4) / (1 - q^2) = 1 + q^2 = {2}
        let a = s("1,0;-1,4");
        let b = s("1,0;-1,2");
        assert_eq!(a.exact_div(&b).unwrap(), q_number(2));
    }

    #[test]
    fn exact_div_rejects_nondivisor() {
        let a = s("1,0;1,2"); // 1 + q^2
        let b = s("1,0;-1,2"); // 1 - q^2
        assert_eq!(a.exact_div(&b), Err(ScalarError::NotDivisible));
        assert_eq!(a.exact_div(&Scalar::zero()), Err(ScalarError::NotDivisible));
    }

    #[test]
    fn exact_div_roundtrip_with_laurent_shift() {
        let a = &s("1,-2;2,0;1,3") * &s("3,-1;1,2");
        let b = s("3,-1;1,2");
        assert_eq!(&a.exact_div(&b).unwrap() * &b, a);
    }

    #[test]
    fn eval_examples() {
        let one = rational_int(1);
        assert_eq!(s("1,0;1,2").eval_at(&one).unwrap(), rational_int(2));
        assert_eq!(
            Scalar::q_pow(-1).eval_at(&rational_int(2)).unwrap(),
            rational(1, 2)
        );
        // q-number at q = 1 equals n: expand (1 - q^6)/(1 - q^2), substitute
        let three = s("1,0;-1,6").exact_div(&s("1,0;-1,2")).unwrap();
        assert_eq!(three, q_number(3));
        assert_eq!(three.eval_at(&one).unwrap(), rational_int(3));
    }

    #[test]
    fn eval_zero_at_pole() {
        assert_eq!(
            Scalar::q_pow(-1).eval_at(&rational_int(0)),
            Err(ScalarError::ZeroAtPole)
        );
        // nonnegative exponents evaluate fine at 0
        assert_eq!(s("1,0;5,3").eval_at(&rational_int(0)).unwrap(), rational_int(1));
    }

    #[test]
    fn q_number_small() {
        assert!(q_number(0).is_zero());
        assert!(q_number(1).is_one());
        assert_eq!(q_number(2), s("1,0;1,2"));
        assert_eq!(q_number(2).to_string(), "1 + q^2");
    }

    #[test]
    fn q_factorial_three() {
        let expected = &q_number(2) * &q_number(3);
        assert_eq!(q_factorial(3), expected);
    }

    #[test]
    fn q_binomial_examples() {
        for n in 0..8 {
            assert!(q_binomial(n, 0).unwrap().is_one());
        }
        assert_eq!(q_binomial(2, 1).unwrap(), q_number(2));
        assert_eq!(
            q_binomial(1, 2),
            Err(ScalarError::OutOfRange { n: 1, k: 2 })
        );
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(2, &[1, 1]).unwrap(), rational_int(2));
        assert_eq!(multinomial(3, &[3, 0]).unwrap(), rational_int(1));
        assert_eq!(multinomial(4, &[2, 1, 1]).unwrap(), rational_int(12));
        assert_eq!(
            multinomial(3, &[1, 1]),
            Err(ScalarError::PartsMismatch { total: 3, sum: 2 })
        );
    }

    #[test]
    fn n_hat_examples() {
        assert!(n_hat(0).is_zero());
        assert_eq!(n_hat(1).eval_at(&rational_int(1)).unwrap(), rational(1, 2));
        // {1}{2}/{4} as a fraction; reduction cancels the common 1 + q^2
        let raw = ScalarQuotient::new(&q_number(1) * &q_number(2), q_number(4));
        assert_eq!(n_hat(1), raw);
        assert_eq!(n_hat(1).to_string(), "1/(1 + q^4)");
    }

    #[test]
    fn n_hat_collapses_to_single_denominator() {
        // {n+1}/{2n+2} = 1/(1 + q^{2n+2}), so n̂ = {n}/(1 + q^{2n+2})
        for n in 0..=20u32 {
            let expected = ScalarQuotient::new(
                q_number(n),
                &Scalar::one() + &Scalar::q_pow(2 * n as i64 + 2),
            );
            assert_eq!(n_hat(n), expected);
        }
    }

    #[test]
    fn quotient_arithmetic_reduces() {
        let a = n_hat(1);
        let b = &a + &a;
        assert_eq!(
            b,
            ScalarQuotient::new(Scalar::from_int(2), &Scalar::one() + &Scalar::q_pow(4))
        );
        let prod = &a * &a.invert().unwrap();
        assert!(prod.is_one());
        let diff = &a - &a;
        assert!(diff.is_zero());
        assert!(diff.is_polynomial());
    }

    #[test]
    fn display_canonical() {
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!(s("1,0;2,2;-1,4").to_string(), "1 + 2*q^2 - q^4");
        assert_eq!(s("-1,0;1,2").to_string(), "-1 + q^2");
        assert_eq!(s("1,-2").to_string(), "q^-2");
        assert_eq!(Scalar::q().to_string(), "q");
        assert_eq!(Scalar::term(rational(3, 2), 1).to_string(), "3/2*q");
        // a leading -q^e must carry an explicit 1 to survive reparsing
        assert_eq!(s("-1,4").to_string(), "-1*q^4");
        assert_eq!(s("-1,1").to_string(), "-q");
        assert_eq!(s("-1,4;1,6").to_string(), "-1*q^4 + q^6");
        assert_eq!(s("1,0;-1,4").to_string(), "1 - q^4");
    }
}
