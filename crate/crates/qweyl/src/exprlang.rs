//! Surface syntax for scalars and operator expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := atom ('^' exponent)?
//! exponent := '-'? uint            -- negative only on the atom 'q'
//! atom     := uint | rational | 'q' | 'qnum(' uint ')'
//!           | 'qbinom(' uint ',' uint ')' | generator | '(' expr ')' | '-' atom
//! ```
//!
//! `*` is noncommutative concatenation in source order; `^` binds tighter
//! than `*`, which binds tighter than `+`/`-`. Generators are named `x1..xk`
//! (aliases `x`, `y`), classical derivatives `P1..Pk` (aliases `Px`, `Py`),
//! Jackson derivatives `D1..Dk` (aliases `Dx`, `Dy`), Grassmann variables
//! `theta1..` (alias `theta`) and Grassmann derivatives `Ptheta1..` (alias
//! `Ptheta`). The printer emits the aliased names whenever the context has
//! at most two bosonic variables, and its output parses back to the same
//! normal form whenever all coefficients are Laurent polynomials (the `n̂`
//! shift prints as a quotient, which has no surface syntax).

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::opalg::{AlgebraContext, Generator, NormalMonomial, OperatorExpr};
use crate::scalar::{q_binomial, q_number, Rational, Scalar, ScalarQuotient};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown generator `{name}` at {line}:{col}")]
    UnknownGenerator { name: String, line: usize, col: usize },
    #[error("generator index out of range: `{name}` at {line}:{col}")]
    IndexOutOfRange { name: String, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ratio(BigInt, BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn digits(&mut self) -> String {
        let mut out = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }

    fn run(&mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(&ch) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            if ch.is_whitespace() {
                self.bump();
                continue;
            }
            let tok = if ch.is_ascii_digit() {
                let numer: BigInt = self.digits().parse().expect("digit run");
                // '/' directly followed by digits continues a rational literal
                let mut probe = self.chars.clone();
                if probe.next() == Some('/') && probe.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                    let denom: BigInt = self.digits().parse().expect("digit run");
                    if denom.is_zero() {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: "rational literal with zero denominator".into(),
                        });
                    }
                    Tok::Ratio(numer, denom)
                } else {
                    Tok::Int(numer)
                }
            } else if ch.is_ascii_alphabetic() {
                let mut name = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() {
                        name.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(name)
            } else {
                self.bump();
                match ch {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    _ => {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: format!("unexpected character `{ch}`"),
                        })
                    }
                }
            };
            out.push(Spanned { tok, line, col });
        }
        out.push(Spanned {
            tok: Tok::Eof,
            line: self.line,
            col: self.col,
        });
        Ok(out)
    }
}

/// Abstract syntax. Generator names are resolved and validated against the
/// context while the tree is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceExpr {
    Integer(BigInt),
    Rational(Rational),
    Q,
    QNum(u32),
    QBinom(u32, u32),
    Gen(Generator),
    Neg(Box<SourceExpr>),
    Add(Box<SourceExpr>, Box<SourceExpr>),
    Sub(Box<SourceExpr>, Box<SourceExpr>),
    Mul(Box<SourceExpr>, Box<SourceExpr>),
    Pow(Box<SourceExpr>, i64),
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    ctx: &'a AlgebraContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, at: &Spanned, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: at.line,
            col: at.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok != tok {
            return self.syntax(&t, format!("expected {what}"));
        }
        Ok(())
    }

    fn uint(&mut self, what: &str) -> Result<u32, ParseError> {
        let t = self.next();
        if let Tok::Int(n) = &t.tok {
            if let Ok(v) = u32::try_from(n.clone()) {
                return Ok(v);
            }
            return self.syntax(&t, format!("{what} too large"));
        }
        self.syntax(&t, format!("expected {what}"))
    }

    fn expr(&mut self) -> Result<SourceExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc = SourceExpr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    acc = SourceExpr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SourceExpr, ParseError> {
        let mut acc = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.next();
            acc = SourceExpr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<SourceExpr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let caret = self.next();
        let negative = if self.peek().tok == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let mag = self.uint("exponent")? as i64;
        if negative && base != SourceExpr::Q {
            return self.syntax(&caret, "negative exponents are only allowed on q");
        }
        Ok(SourceExpr::Pow(
            Box::new(base),
            if negative { -mag } else { mag },
        ))
    }

    fn atom(&mut self) -> Result<SourceExpr, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => Ok(SourceExpr::Integer(n.clone())),
            Tok::Ratio(n, d) => Ok(SourceExpr::Rational(Rational::new(n.clone(), d.clone()))),
            Tok::Minus => Ok(SourceExpr::Neg(Box::new(self.atom()?))),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "q" => Ok(SourceExpr::Q),
                "qnum" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let n = self.uint("q-number argument")?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(SourceExpr::QNum(n))
                }
                "qbinom" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let n = self.uint("q-binomial argument")?;
                    self.expect(Tok::Comma, "`,`")?;
                    let k = self.uint("q-binomial argument")?;
                    self.expect(Tok::RParen, "`)`")?;
                    if k > n {
                        return self.syntax(&t, format!("qbinom({n}, {k}) is out of range"));
                    }
                    Ok(SourceExpr::QBinom(n, k))
                }
                _ => self.generator(&t, name),
            },
            Tok::Eof => self.syntax(&t, "unexpected end of input"),
            _ => self.syntax(&t, "expected an atom"),
        }
    }

    fn generator(&self, at: &Spanned, name: &str) -> Result<SourceExpr, ParseError> {
        let Some(g) = parse_generator_name(name) else {
            return Err(ParseError::UnknownGenerator {
                name: name.to_string(),
                line: at.line,
                col: at.col,
            });
        };
        // distinguish "wrong kind for this rule set" from "index out of range"
        let (kind_ok, index, bound) = match g {
            Generator::BosonVar(i) => (true, i, self.ctx.n_boson()),
            Generator::ClassicalDeriv(i) => {
                (!self.ctx.rule_set().is_q_deformed(), i, self.ctx.n_boson())
            }
            Generator::JacksonDeriv(i) => {
                (self.ctx.rule_set().is_q_deformed(), i, self.ctx.n_boson())
            }
            Generator::GrassmannVar(i) | Generator::GrassmannDeriv(i) => {
                (true, i, self.ctx.n_grassmann())
            }
        };
        if !kind_ok {
            return Err(ParseError::UnknownGenerator {
                name: name.to_string(),
                line: at.line,
                col: at.col,
            });
        }
        if index == 0 || index as usize > bound {
            return Err(ParseError::IndexOutOfRange {
                name: name.to_string(),
                line: at.line,
                col: at.col,
            });
        }
        Ok(SourceExpr::Gen(g))
    }
}

/// Resolve a generator name to kind and 1-based index, context-free.
/// `None` means the name is not generator-shaped at all.
fn parse_generator_name(name: &str) -> Option<Generator> {
    fn index_of(suffix: &str) -> Option<u32> {
        match suffix {
            "" => Some(1),
            "x" => Some(1),
            "y" => Some(2),
            _ => suffix.parse().ok().filter(|&i| i > 0),
        }
    }
    if let Some(rest) = name.strip_prefix("Ptheta") {
        return index_of(rest).map(Generator::GrassmannDeriv);
    }
    if let Some(rest) = name.strip_prefix("theta") {
        return index_of(rest).map(Generator::GrassmannVar);
    }
    if let Some(rest) = name.strip_prefix('P') {
        if rest.is_empty() {
            return None;
        }
        return index_of(rest).map(Generator::ClassicalDeriv);
    }
    if let Some(rest) = name.strip_prefix('D') {
        if rest.is_empty() {
            return None;
        }
        return index_of(rest).map(Generator::JacksonDeriv);
    }
    match name {
        "x" => Some(Generator::BosonVar(1)),
        "y" => Some(Generator::BosonVar(2)),
        _ => name
            .strip_prefix('x')
            .and_then(|rest| rest.parse().ok())
            .filter(|&i| i > 0)
            .map(Generator::BosonVar),
    }
}

fn lower(ast: &SourceExpr, ctx: &AlgebraContext) -> OperatorExpr {
    match ast {
        SourceExpr::Integer(n) => OperatorExpr::scalar(
            *ctx,
            Scalar::from_rational(Rational::from_integer(n.clone())),
        ),
        SourceExpr::Rational(r) => OperatorExpr::scalar(*ctx, Scalar::from_rational(r.clone())),
        SourceExpr::Q => OperatorExpr::scalar(*ctx, Scalar::q()),
        SourceExpr::QNum(n) => OperatorExpr::scalar(*ctx, q_number(*n)),
        SourceExpr::QBinom(n, k) => {
            OperatorExpr::scalar(*ctx, q_binomial(*n, *k).expect("validated by the parser"))
        }
        SourceExpr::Gen(g) => OperatorExpr::generator(*ctx, *g).expect("validated by the parser"),
        SourceExpr::Neg(a) => lower(a, ctx).neg(),
        SourceExpr::Add(a, b) => lower(a, ctx).add(&lower(b, ctx)).expect("same context"),
        SourceExpr::Sub(a, b) => lower(a, ctx).sub(&lower(b, ctx)).expect("same context"),
        SourceExpr::Mul(a, b) => lower(a, ctx).mul(&lower(b, ctx)).expect("same context"),
        SourceExpr::Pow(a, e) => {
            if *e < 0 {
                // only reachable for the q atom
                OperatorExpr::scalar(*ctx, Scalar::q_pow(*e))
            } else {
                lower(a, ctx).pow(*e as u32)
            }
        }
    }
}

/// Parse `text` into an (unnormalized) operator expression over `ctx`.
pub fn parse(text: &str, ctx: &AlgebraContext) -> Result<OperatorExpr, ParseError> {
    let toks = Lexer::new(text).run()?;
    let mut p = Parser { toks, pos: 0, ctx };
    let ast = p.expr()?;
    let eof = p.next();
    if eof.tok != Tok::Eof {
        return Err(ParseError::Syntax {
            line: eof.line,
            col: eof.col,
            msg: "trailing input after expression".into(),
        });
    }
    Ok(lower(&ast, ctx))
}

fn var_name(ctx: &AlgebraContext, i: usize) -> String {
    match (ctx.n_boson(), i) {
        (1, 1) | (2, 1) => "x".into(),
        (2, 2) => "y".into(),
        _ => format!("x{i}"),
    }
}

fn deriv_name(ctx: &AlgebraContext, i: usize) -> String {
    let prefix = if ctx.rule_set().is_q_deformed() { "D" } else { "P" };
    match (ctx.n_boson(), i) {
        (1, 1) | (2, 1) => format!("{prefix}x"),
        (2, 2) => format!("{prefix}y"),
        _ => format!("{prefix}{i}"),
    }
}

fn grass_name(ctx: &AlgebraContext, i: usize) -> String {
    if ctx.n_grassmann() == 1 {
        "theta".into()
    } else {
        format!("theta{i}")
    }
}

fn grass_deriv_name(ctx: &AlgebraContext, i: usize) -> String {
    if ctx.n_grassmann() == 1 {
        "Ptheta".into()
    } else {
        format!("Ptheta{i}")
    }
}

fn monomial_text(ctx: &AlgebraContext, m: &NormalMonomial) -> Option<String> {
    let mut parts: Vec<String> = Vec::new();
    {
        let mut push_powers = |exps: &[u32], name: &dyn Fn(usize) -> String| {
            for (i, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(name(i + 1)),
                    _ => parts.push(format!("{}^{}", name(i + 1), e)),
                }
            }
        };
        push_powers(m.var_exp(), &|i| var_name(ctx, i));
    }
    for (i, &f) in m.grass_var().iter().enumerate() {
        if f {
            parts.push(grass_name(ctx, i + 1));
        }
    }
    for (i, &e) in m.deriv_exp().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(deriv_name(ctx, i + 1)),
            _ => parts.push(format!("{}^{}", deriv_name(ctx, i + 1), e)),
        }
    }
    for (i, &f) in m.grass_deriv().iter().enumerate() {
        if f {
            parts.push(grass_deriv_name(ctx, i + 1));
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join("*"))
    }
}

fn coeff_text(c: &ScalarQuotient) -> String {
    let rendered = c.to_string();
    let simple = c.as_scalar().is_some_and(|s| s.term_count() == 1);
    if simple || !c.is_polynomial() {
        rendered
    } else {
        format!("({rendered})")
    }
}

fn term_text(ctx: &AlgebraContext, m: &NormalMonomial, c: &ScalarQuotient) -> String {
    match monomial_text(ctx, m) {
        None => c.to_string(),
        Some(mono) => {
            if c.is_one() {
                mono
            } else if (-c).is_one() {
                format!("-{mono}")
            } else {
                format!("{}*{}", coeff_text(c), mono)
            }
        }
    }
}

/// Canonical text of a normalized expression: terms in the order of
/// [`NormalMonomial`]'s `Ord`, scalars in canonical form. Deterministic;
/// equal normal forms print byte-identically.
pub fn print(e: &OperatorExpr) -> String {
    debug_assert!(e.is_normalized(), "printing requires a normal form");
    if e.term_count() == 0 {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in e.terms().enumerate() {
        let t = term_text(e.context(), m, c);
        if i == 0 {
            match t.strip_prefix('-') {
                // a leading `-` may not precede a powered factor: the grammar
                // reads `-x^2` as `(-x)^2`
                Some(rest) if t[1..].split('*').next().unwrap_or("").contains('^') => {
                    out.push_str("-1*");
                    out.push_str(rest);
                }
                _ => out.push_str(&t),
            }
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_int;

    #[test]
    fn parse_product_rule() {
        let ctx = AlgebraContext::classical(1);
        let e = parse("Px*x", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "1 + x*Px");
    }

    #[test]
    fn parse_eq4_lhs() {
        let ctx = AlgebraContext::q_line();
        let e = parse("(x^2*Dx - qnum(2)*x)^3", &ctx).unwrap();
        let direct = {
            let x = Generator::BosonVar(1);
            let d = Generator::JacksonDeriv(1);
            let x2d = OperatorExpr::word(ctx, vec![x, x, d]).unwrap();
            let shift = OperatorExpr::generator(ctx, x)
                .unwrap()
                .scalar_mul(&ScalarQuotient::from(q_number(2)));
            x2d.sub(&shift).unwrap().pow(3)
        };
        assert_eq!(e.normalize(), direct);
    }

    #[test]
    fn plane_relation_normalizes_to_zero() {
        let ctx = AlgebraContext::quantum_plane();
        let e = parse("x*y - q*y*x", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "0");
    }

    #[test]
    fn empty_input_is_syntax_error() {
        let ctx = AlgebraContext::classical(1);
        assert!(matches!(parse("", &ctx), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn unknown_and_out_of_range_generators() {
        let ctx = AlgebraContext::classical(1);
        assert!(matches!(
            parse("Dx", &ctx),
            Err(ParseError::UnknownGenerator { .. })
        ));
        assert!(matches!(
            parse("z", &ctx),
            Err(ParseError::UnknownGenerator { .. })
        ));
        assert!(matches!(
            parse("x2", &ctx),
            Err(ParseError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            parse("theta", &ctx),
            Err(ParseError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn negative_exponent_only_on_q() {
        let ctx = AlgebraContext::q_line();
        let e = parse("q^-2*x", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "q^-2*x");
        assert!(matches!(parse("x^-2", &ctx), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn rational_literals() {
        let ctx = AlgebraContext::classical(1);
        let e = parse("3/2*x - 1/2*x", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "x");
        assert!(matches!(parse("1/0", &ctx), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn print_eq1_result() {
        let ctx = AlgebraContext::classical(1);
        let e = parse("(x^2*Px - x)^2", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "x^4*Px^2");
    }

    #[test]
    fn print_plane_product_rule() {
        let ctx = AlgebraContext::quantum_plane();
        let e = parse("Dx*x", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "1 + q^2*x*Dx + (-1 + q^2)*y*Dy");
    }

    #[test]
    fn roundtrip_preserves_normal_form() {
        let ctx = AlgebraContext::quantum_plane();
        let e = parse("(x^2*Dx + x*y*Dy - qnum(3)*x)^2", &ctx)
            .unwrap()
            .normalize();
        let back = parse(&print(&e), &ctx).unwrap().normalize();
        assert_eq!(e, back);
    }

    #[test]
    fn grassmann_names_roundtrip() {
        let ctx = AlgebraContext::classical_grassmann(1, 1);
        let e = parse("x*theta*Ptheta - 2*Px", &ctx).unwrap().normalize();
        let back = parse(&print(&e), &ctx).unwrap().normalize();
        assert_eq!(e, back);
        assert!(print(&e).contains("theta"));
    }

    #[test]
    fn scalar_constant_prints_plainly() {
        let ctx = AlgebraContext::classical(1);
        let e = parse("2 + q^2 - 1", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "1 + q^2");
        let r = parse("1 + q^2", &ctx).unwrap().normalize();
        assert_eq!(e, r);
        assert_eq!(
            e.coefficient(&NormalMonomial::identity(&ctx))
                .eval_at(&rational_int(1))
                .unwrap(),
            rational_int(2)
        );
    }

    #[test]
    fn grammar_quirk_minus_binds_before_power() {
        // per the grammar, -x^2 parses as (-x)^2
        let ctx = AlgebraContext::classical(1);
        let a = parse("-x^2", &ctx).unwrap().normalize();
        let b = parse("x^2", &ctx).unwrap().normalize();
        assert_eq!(a, b);
    }

    #[test]
    fn leading_negative_powers_roundtrip() {
        // the printer may not emit a bare `-` before a powered factor
        let ctx = AlgebraContext::classical(1);
        for text in ["0 - x^2", "0 - q^4*x", "0 - q^2*x^2 - x"] {
            let e = parse(text, &ctx).unwrap().normalize();
            let back = parse(&print(&e), &ctx).unwrap().normalize();
            assert_eq!(e, back, "failed on {text}, printed {}", print(&e));
        }
        let e = parse("0 - x^2", &ctx).unwrap().normalize();
        assert_eq!(print(&e), "-1*x^2");
    }
}
