//! Structural recognition of the families `c·v^q·e^{λv}·(log v)^r`.
//!
//! [`canonicalize`] expands a tree into an exact sum of such terms (after
//! constant folding and collecting like terms) and reports a family only
//! when a single term survives. The leading-term analyses back the exact
//! tier of the convergence decisions: `∫^∞ ds/f` converges iff it does for
//! the leading term of `f` at infinity, and likewise near zero.

use std::cmp::Ordering;
use std::fmt;

use super::{BinOp, Func, Node};

const MAX_TERMS: usize = 32;

/// One term `c·v^q·e^{λv}·(log v)^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub c: f64,
    pub q: f64,
    pub lambda: f64,
    pub r: f64,
}

impl Term {
    pub fn constant(c: f64) -> Term {
        Term {
            c,
            q: 0.0,
            lambda: 0.0,
            r: 0.0,
        }
    }

    fn same_shape(&self, other: &Term) -> bool {
        self.q == other.q && self.lambda == other.lambda && self.r == other.r
    }

    fn mul(&self, other: &Term) -> Term {
        Term {
            c: self.c * other.c,
            q: self.q + other.q,
            lambda: self.lambda + other.lambda,
            r: self.r + other.r,
        }
    }

    fn powf(&self, p: f64) -> Option<Term> {
        let c = if p.fract() == 0.0 {
            if self.c == 0.0 && p < 0.0 {
                return None;
            }
            self.c.powi(p as i32)
        } else if self.c > 0.0 {
            self.c.powf(p)
        } else {
            return None;
        };
        Some(Term {
            c,
            q: self.q * p,
            lambda: self.lambda * p,
            r: self.r * p,
        })
    }

    fn negate(&self) -> Term {
        Term { c: -self.c, ..*self }
    }

    pub fn eval(&self, v: f64) -> f64 {
        let mut out = self.c;
        if self.q != 0.0 {
            out *= v.powf(self.q);
        }
        if self.lambda != 0.0 {
            out *= (self.lambda * v).exp();
        }
        if self.r != 0.0 {
            out *= v.ln().powf(self.r);
        }
        out
    }

    fn to_form(self) -> CanonicalForm {
        let Term { c, q, lambda, r } = self;
        if c == 0.0 {
            return CanonicalForm::Constant { c: 0.0 };
        }
        match (q != 0.0, lambda != 0.0, r != 0.0) {
            (false, false, false) => CanonicalForm::Constant { c },
            (_, false, false) => CanonicalForm::PowerLaw { c, q },
            (false, true, false) => CanonicalForm::ExpLaw { c, lambda },
            (_, false, true) => CanonicalForm::PowerLogLaw { c, q, r },
            _ => CanonicalForm::General,
        }
    }
}

/// Recognized parametric family of an expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalForm {
    Constant { c: f64 },
    /// `c·v^q`
    PowerLaw { c: f64, q: f64 },
    /// `c·e^{λv}`
    ExpLaw { c: f64, lambda: f64 },
    /// `c·v^q·(log v)^r`
    PowerLogLaw { c: f64, q: f64, r: f64 },
    General,
}

impl CanonicalForm {
    pub fn is_general(&self) -> bool {
        matches!(self, CanonicalForm::General)
    }

    pub fn term(&self) -> Option<Term> {
        match *self {
            CanonicalForm::Constant { c } => Some(Term::constant(c)),
            CanonicalForm::PowerLaw { c, q } => Some(Term {
                c,
                q,
                lambda: 0.0,
                r: 0.0,
            }),
            CanonicalForm::ExpLaw { c, lambda } => Some(Term {
                c,
                q: 0.0,
                lambda,
                r: 0.0,
            }),
            CanonicalForm::PowerLogLaw { c, q, r } => Some(Term { c, q, lambda: 0.0, r }),
            CanonicalForm::General => None,
        }
    }

    /// Evaluates the closed form; `None` for `General`.
    pub fn eval(&self, v: f64) -> Option<f64> {
        self.term().map(|t| t.eval(v))
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalForm::Constant { c } => write!(f, "Constant({c})"),
            CanonicalForm::PowerLaw { c, q } => write!(f, "PowerLaw({c}, {q})"),
            CanonicalForm::ExpLaw { c, lambda } => write!(f, "ExpLaw({c}, {lambda})"),
            CanonicalForm::PowerLogLaw { c, q, r } => write!(f, "PowerLogLaw({c}, {q}, {r})"),
            CanonicalForm::General => f.write_str("General"),
        }
    }
}

fn combine(mut terms: Vec<Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms.drain(..) {
        if let Some(slot) = out.iter_mut().find(|o| o.same_shape(&t)) {
            slot.c += t.c;
        } else {
            out.push(t);
        }
    }
    out.retain(|t| t.c != 0.0);
    out
}

fn product(a: &[Term], b: &[Term]) -> Option<Vec<Term>> {
    if a.len() * b.len() > MAX_TERMS {
        return None;
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.mul(y));
        }
    }
    Some(combine(out))
}

/// Exact expansion into a sum of family terms. An empty vector is the zero
/// function.
fn expand(node: &Node) -> Option<Vec<Term>> {
    match node {
        Node::Const(c) => Some(combine(vec![Term::constant(*c)])),
        Node::Var(_) => Some(vec![Term {
            c: 1.0,
            q: 1.0,
            lambda: 0.0,
            r: 0.0,
        }]),
        Node::Neg(a) => Some(expand(a)?.iter().map(Term::negate).collect()),
        Node::Binary(op, a, b) => {
            let ea = expand(a)?;
            let eb = expand(b)?;
            match op {
                BinOp::Add | BinOp::Sub => {
                    let mut all = ea;
                    if *op == BinOp::Add {
                        all.extend(eb);
                    } else {
                        all.extend(eb.iter().map(Term::negate));
                    }
                    if all.len() > MAX_TERMS {
                        return None;
                    }
                    Some(combine(all))
                }
                BinOp::Mul => product(&ea, &eb),
                BinOp::Div => {
                    if eb.len() != 1 {
                        return None;
                    }
                    let inv = eb[0].powf(-1.0)?;
                    product(&ea, &[inv])
                }
            }
        }
        Node::Pow(a, p) => expand_pow(expand(a)?, *p),
        Node::Call(Func::Sqrt, a) => expand_pow(expand(a)?, 0.5),
        // Oscillatory: outside every family.
        Node::Call(Func::Cos, _) => None,
        Node::Call(Func::Exp, a) => {
            let ea = expand(a)?;
            let mut shift = 0.0;
            let mut rate = 0.0;
            for t in &ea {
                if t.lambda != 0.0 || t.r != 0.0 {
                    return None;
                }
                if t.q == 0.0 {
                    shift += t.c;
                } else if t.q == 1.0 {
                    rate += t.c;
                } else {
                    return None;
                }
            }
            Some(vec![Term {
                c: shift.exp(),
                q: 0.0,
                lambda: rate,
                r: 0.0,
            }])
        }
        Node::Call(Func::Log, a) => {
            let ea = expand(a)?;
            if ea.len() != 1 {
                return None;
            }
            let t = ea[0];
            if t.c <= 0.0 || t.r != 0.0 || (t.q != 0.0 && t.lambda != 0.0) {
                return None;
            }
            let mut out = vec![Term::constant(t.c.ln())];
            if t.q != 0.0 {
                out.push(Term {
                    c: t.q,
                    q: 0.0,
                    lambda: 0.0,
                    r: 1.0,
                });
            }
            if t.lambda != 0.0 {
                out.push(Term {
                    c: t.lambda,
                    q: 1.0,
                    lambda: 0.0,
                    r: 0.0,
                });
            }
            Some(combine(out))
        }
    }
}

fn expand_pow(base: Vec<Term>, p: f64) -> Option<Vec<Term>> {
    if base.is_empty() {
        return match p.partial_cmp(&0.0)? {
            Ordering::Greater => Some(Vec::new()),
            Ordering::Equal => Some(vec![Term::constant(1.0)]),
            Ordering::Less => None,
        };
    }
    if base.len() == 1 {
        return Some(combine(vec![base[0].powf(p)?]));
    }
    if p.fract() == 0.0 && (0.0..=8.0).contains(&p) {
        let mut acc = vec![Term::constant(1.0)];
        for _ in 0..p as usize {
            acc = product(&acc, &base)?;
        }
        return Some(acc);
    }
    None
}

pub(super) fn canonicalize(node: &Node) -> CanonicalForm {
    match expand(node) {
        Some(terms) if terms.is_empty() => CanonicalForm::Constant { c: 0.0 },
        Some(terms) if terms.len() == 1 => terms[0].to_form(),
        _ => CanonicalForm::General,
    }
}

#[derive(Clone, Copy)]
enum Limit {
    Infinity,
    Zero,
}

impl Limit {
    /// Ordering of growth: `Greater` means `a` dominates `b` at the limit.
    fn dominance(self, a: &Term, b: &Term) -> Ordering {
        match self {
            Limit::Infinity => a
                .lambda
                .total_cmp(&b.lambda)
                .then(a.q.total_cmp(&b.q))
                .then(a.r.total_cmp(&b.r)),
            Limit::Zero => b.q.total_cmp(&a.q),
        }
    }

    /// Normalizes a term to what matters at this limit. Near zero the
    /// exponential factor tends to one and log factors are not tracked.
    fn normalize(self, t: Term) -> Option<Term> {
        match self {
            Limit::Infinity => Some(t),
            Limit::Zero => {
                if t.r != 0.0 {
                    None
                } else {
                    Some(Term {
                        lambda: 0.0,
                        ..t
                    })
                }
            }
        }
    }
}

fn dominant(limit: Limit, terms: &[Term]) -> Option<Term> {
    if terms.is_empty() {
        return Some(Term::constant(0.0));
    }
    let normalized: Option<Vec<Term>> = terms.iter().map(|t| limit.normalize(*t)).collect();
    let normalized = normalized?;
    let mut best = normalized[0];
    let mut tie_sum = best.c;
    for t in &normalized[1..] {
        match limit.dominance(t, &best) {
            Ordering::Greater => {
                best = *t;
                tie_sum = t.c;
            }
            Ordering::Equal => {
                tie_sum += t.c;
            }
            Ordering::Less => {}
        }
    }
    if tie_sum == 0.0 {
        return None;
    }
    Some(Term { c: tie_sum, ..best })
}

fn leading(limit: Limit, node: &Node) -> Option<Term> {
    if let Some(terms) = expand(node) {
        return dominant(limit, &terms);
    }
    match node {
        Node::Const(c) => Some(Term::constant(*c)),
        Node::Var(_) => Some(Term {
            c: 1.0,
            q: 1.0,
            lambda: 0.0,
            r: 0.0,
        }),
        Node::Neg(a) => Some(leading(limit, a)?.negate()),
        Node::Binary(op, a, b) => {
            let la = leading(limit, a)?;
            let mut lb = leading(limit, b)?;
            match op {
                BinOp::Add | BinOp::Sub => {
                    if *op == BinOp::Sub {
                        lb = lb.negate();
                    }
                    if la.c == 0.0 {
                        return Some(lb);
                    }
                    if lb.c == 0.0 {
                        return Some(la);
                    }
                    match limit.dominance(&la, &lb) {
                        Ordering::Greater => Some(la),
                        Ordering::Less => Some(lb),
                        Ordering::Equal => {
                            let c = la.c + lb.c;
                            (c != 0.0).then_some(Term { c, ..la })
                        }
                    }
                }
                BinOp::Mul => Some(la.mul(&lb)),
                BinOp::Div => {
                    if lb.c == 0.0 {
                        return None;
                    }
                    Some(la.mul(&lb.powf(-1.0)?))
                }
            }
        }
        Node::Pow(a, p) => leading_pow(leading(limit, a)?, *p),
        Node::Call(Func::Sqrt, a) => leading_pow(leading(limit, a)?, 0.5),
        Node::Call(Func::Cos, _) => None,
        Node::Call(Func::Exp, a) => {
            let la = leading(limit, a)?;
            match limit {
                // Non-affine exponents cannot be represented at infinity.
                Limit::Infinity => None,
                Limit::Zero => {
                    if la.q > 0.0 || la.c == 0.0 {
                        Some(Term::constant(1.0))
                    } else if la.q == 0.0 {
                        Some(Term::constant(la.c.exp()))
                    } else {
                        None
                    }
                }
            }
        }
        Node::Call(Func::Log, a) => {
            let la = leading(limit, a)?;
            if la.c <= 0.0 {
                return None;
            }
            match limit {
                Limit::Infinity => {
                    if la.lambda != 0.0 {
                        Some(Term {
                            c: la.lambda,
                            q: 1.0,
                            lambda: 0.0,
                            r: 0.0,
                        })
                    } else if la.q != 0.0 {
                        Some(Term {
                            c: la.q,
                            q: 0.0,
                            lambda: 0.0,
                            r: 1.0,
                        })
                    } else if la.r == 0.0 && la.c != 1.0 {
                        Some(Term::constant(la.c.ln()))
                    } else {
                        None
                    }
                }
                Limit::Zero => {
                    if la.q == 0.0 && la.c != 1.0 {
                        Some(Term::constant(la.c.ln()))
                    } else {
                        None
                    }
                }
            }
        }
    }
    .and_then(|t| limit.normalize(t))
}

fn leading_pow(base: Term, p: f64) -> Option<Term> {
    if base.c == 0.0 {
        return (p > 0.0).then_some(Term::constant(0.0));
    }
    base.powf(p)
}

pub(super) fn leading_at_infinity(node: &Node) -> Option<Term> {
    leading(Limit::Infinity, node)
}

pub(super) fn leading_at_zero(node: &Node) -> Option<Term> {
    leading(Limit::Zero, node)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn canon(s: &str) -> CanonicalForm {
        parse(s).unwrap().canonicalize()
    }

    #[test]
    fn recognizes_families() {
        assert_eq!(canon("3/s^2"), CanonicalForm::PowerLaw { c: 3.0, q: -2.0 });
        assert_eq!(canon("exp(2*t)"), CanonicalForm::ExpLaw { c: 1.0, lambda: 2.0 });
        assert_eq!(canon("s*exp(s)"), CanonicalForm::General);
        assert_eq!(canon("2 + 3"), CanonicalForm::Constant { c: 5.0 });
        assert_eq!(canon("s - s"), CanonicalForm::Constant { c: 0.0 });
        assert_eq!(canon("sqrt(s)"), CanonicalForm::PowerLaw { c: 1.0, q: 0.5 });
        assert_eq!(
            canon("s*log(s)^2"),
            CanonicalForm::PowerLogLaw { c: 1.0, q: 1.0, r: 2.0 }
        );
        assert_eq!(canon("exp(1 - t)"), CanonicalForm::ExpLaw { c: 1f64.exp(), lambda: -1.0 });
        assert_eq!(canon("s - s^2"), CanonicalForm::General);
        assert_eq!(canon("(2*s)^2/4"), CanonicalForm::PowerLaw { c: 1.0, q: 2.0 });
        assert_eq!(canon("1/(1+t)"), CanonicalForm::General);
    }

    #[test]
    fn leading_terms() {
        let lead = |s: &str| parse(s).unwrap().leading_at_infinity();
        let l = lead("1/(1+t)").unwrap();
        assert_eq!((l.c, l.q, l.lambda), (1.0, -1.0, 0.0));
        let l = lead("1/(1+t)^2").unwrap();
        assert_eq!(l.q, -2.0);
        let l = lead("s^2 + exp(s)").unwrap();
        assert_eq!((l.q, l.lambda), (0.0, 1.0));
        let l = lead("log(1+s)").unwrap();
        assert_eq!((l.q, l.r), (0.0, 1.0));
        assert!(lead("(t+1) - t - 1").is_some());
        assert!(lead("sqrt(1+t) - sqrt(t)").is_none());

        let zero = |s: &str| parse(s).unwrap().leading_at_zero();
        let l = zero("s - s^2").unwrap();
        assert_eq!((l.c, l.q), (1.0, 1.0));
        let l = zero("s^2*exp(s)").unwrap();
        assert_eq!((l.c, l.q), (1.0, 2.0));
        assert!(zero("exp(s) - 1").is_none());
        let l = zero("sqrt(s + s^3)").unwrap();
        assert_eq!(l.q, 0.5);
    }
}
