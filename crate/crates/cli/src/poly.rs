//! Expression grammar shared by coefficients and observables.
//!
//! Accepted forms: integers, exact rationals written `p/q`, names, and
//! the operations `+ - * ^` with parentheses.  One syntax tree, two
//! evaluators: coefficients become scalars over a declared parameter
//! set, observables become elements of a polyvector algebra with names
//! resolving to generators.

use std::collections::BTreeSet;

use bvq_core::{Element, PolyvectorAlgebra, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(Rational),
    Name(String),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(Rational),
    Name(String),
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

fn lex(input: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let numer: String = chars[start..i].iter().collect();
                // a '/' glued to the digits makes the literal rational
                let mut literal = numer;
                if i < chars.len() && chars[i] == '/' {
                    let dstart = i + 1;
                    let mut j = dstart;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == dstart {
                        return Err("expected digits after '/' in a rational literal".into());
                    }
                    let denom: String = chars[dstart..j].iter().collect();
                    if denom.chars().all(|c| c == '0') {
                        return Err(format!("zero denominator in '{literal}/{denom}'"));
                    }
                    literal.push('/');
                    literal.push_str(&denom);
                    i = j;
                }
                let value: Rational = literal
                    .parse()
                    .map_err(|_| format!("cannot parse number '{literal}'"))?;
                out.push(Token::Num(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                out.push(Token::Name(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character '{other}'")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Ast, String> {
        let mut node = if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            Ast::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    node = Ast::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.bump();
                    node = Ast::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<Ast, String> {
        let mut node = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.bump();
            node = Ast::Mul(Box::new(node), Box::new(self.factor()?));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<Ast, String> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            let exponent = match self.bump() {
                Some(Token::Num(r)) => {
                    use num_traits::ToPrimitive;
                    if !r.is_integer() {
                        return Err(format!("exponent must be a nonnegative integer, got {r}"));
                    }
                    r.to_integer()
                        .to_u32()
                        .ok_or_else(|| format!("exponent out of range: {r}"))?
                }
                other => return Err(format!("expected an integer after '^', got {other:?}")),
            };
            return Ok(Ast::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, String> {
        match self.bump() {
            Some(Token::Num(r)) => Ok(Ast::Num(r)),
            Some(Token::Name(n)) => Ok(Ast::Name(n)),
            Some(Token::Open) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err("missing closing parenthesis".into()),
                }
            }
            other => Err(format!("expected a number, name, or '(', got {other:?}")),
        }
    }
}

pub fn parse(input: &str) -> Result<Ast, String> {
    let tokens = lex(input)?;
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { tokens, pos: 0 };
    let ast = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input after position {}", p.pos));
    }
    Ok(ast)
}

/// Coefficient evaluation: names must come from the declared parameter set.
pub fn eval_scalar(ast: &Ast, declared: &BTreeSet<String>) -> Result<Scalar, String> {
    match ast {
        Ast::Num(r) => Ok(Scalar::from_rational(r.clone())),
        Ast::Name(n) => {
            if declared.contains(n) {
                Ok(Scalar::param(n))
            } else {
                Err(format!("undeclared parameter '{n}'"))
            }
        }
        Ast::Neg(a) => Ok(Scalar::from_int(-1) * eval_scalar(a, declared)?),
        Ast::Add(a, b) => Ok(eval_scalar(a, declared)? + eval_scalar(b, declared)?),
        Ast::Sub(a, b) => Ok(eval_scalar(a, declared)? - eval_scalar(b, declared)?),
        Ast::Mul(a, b) => Ok(eval_scalar(a, declared)? * eval_scalar(b, declared)?),
        Ast::Pow(a, k) => {
            let base = eval_scalar(a, declared)?;
            let mut acc = Scalar::one();
            for _ in 0..*k {
                acc = acc * base.clone();
            }
            Ok(acc)
        }
    }
}

/// Observable evaluation: names resolve to generators of the algebra.
/// The algebra's cutoff must dominate [`weight_bound`] of the tree or
/// products would silently truncate.
pub fn eval_element(ast: &Ast, pv: &PolyvectorAlgebra) -> Result<Element, String> {
    match ast {
        Ast::Num(r) => Ok(Element::one().scale(&Scalar::from_rational(r.clone()))),
        Ast::Name(n) => {
            let id = pv
                .space()
                .id(n)
                .map_err(|_| format!("unknown generator '{n}'"))?;
            Ok(Element::generator(id))
        }
        Ast::Neg(a) => Ok(eval_element(a, pv)?.scale(&Scalar::from_int(-1))),
        Ast::Add(a, b) => Ok(eval_element(a, pv)?.plus(&eval_element(b, pv)?)),
        Ast::Sub(a, b) => Ok(eval_element(a, pv)?.minus(&eval_element(b, pv)?)),
        Ast::Mul(a, b) => Ok(pv
            .algebra
            .mul(&eval_element(a, pv)?, &eval_element(b, pv)?)),
        Ast::Pow(a, k) => {
            let base = eval_element(a, pv)?;
            let mut acc = Element::one();
            for _ in 0..*k {
                acc = pv.algebra.mul(&acc, &base);
            }
            Ok(acc)
        }
    }
}

/// Upper bound on the weight of any term produced while evaluating the
/// tree.  Sums take the maximum, products add, powers multiply; no
/// operation in the grammar can exceed this.
pub fn weight_bound(ast: &Ast) -> u32 {
    match ast {
        Ast::Num(_) => 0,
        Ast::Name(_) => 1,
        Ast::Neg(a) => weight_bound(a),
        Ast::Add(a, b) | Ast::Sub(a, b) => weight_bound(a).max(weight_bound(b)),
        Ast::Mul(a, b) => weight_bound(a) + weight_bound(b),
        Ast::Pow(a, k) => weight_bound(a).saturating_mul(*k),
    }
}

/// A closed rational value: the expression must not mention any name.
pub fn parse_rational(input: &str) -> Result<Rational, String> {
    let ast = parse(input)?;
    let s = eval_scalar(&ast, &BTreeSet::new())?;
    s.as_rational()
        .cloned()
        .ok_or_else(|| "expected a closed rational value".into())
}
