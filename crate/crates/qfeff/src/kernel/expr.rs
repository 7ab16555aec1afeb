use super::atom::{AtomId, Symbols};
use super::coeff::Coeff;
use super::normal::{Direction, Factor, NormalForm, Word};

/// User-facing expression tree.  Closed under the four frame derivatives and
/// conjugation; lowered to a [`NormalForm`] by `Algebra::normalize`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Num(Coeff),
    Atom(AtomId),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Deriv(Direction, Box<Expr>),
    Conj(Box<Expr>),
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(Coeff::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Num(Coeff::from_ratio(n, d))
    }

    pub fn i() -> Expr {
        Expr::Num(Coeff::i())
    }

    pub fn atom(id: AtomId) -> Expr {
        Expr::Atom(id)
    }

    pub fn add(parts: Vec<Expr>) -> Expr {
        Expr::Add(parts)
    }

    pub fn mul(parts: Vec<Expr>) -> Expr {
        Expr::Mul(parts)
    }

    pub fn pow(self, k: i32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn log(self) -> Expr {
        Expr::Log(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn deriv(self, d: Direction) -> Expr {
        Expr::Deriv(d, Box::new(self))
    }

    pub fn conj(self) -> Expr {
        Expr::Conj(Box::new(self))
    }

    pub fn neg(self) -> Expr {
        Expr::Mul(vec![Expr::num(-1), self])
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs.neg()])
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_zero())
    }

    /// Render with symbol names, primarily for diagnostics and reports.
    pub fn show(&self, sym: &Symbols) -> String {
        match self {
            Expr::Num(c) => c.to_string(),
            Expr::Atom(id) => sym.name(*id).to_string(),
            Expr::Add(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.show(sym)).collect();
                format!("({})", inner.join(" + "))
            }
            Expr::Mul(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.show(sym)).collect();
                inner.join("*")
            }
            Expr::Pow(b, k) => format!("{}^{}", b.show(sym), k),
            Expr::Exp(a) => format!("exp({})", a.show(sym)),
            Expr::Log(a) => format!("log({})", a.show(sym)),
            Expr::Sin(a) => format!("sin({})", a.show(sym)),
            Expr::Cos(a) => format!("cos({})", a.show(sym)),
            Expr::Deriv(d, a) => format!("{}({})", d.name(), a.show(sym)),
            Expr::Conj(a) => format!("conj({})", a.show(sym)),
        }
    }
}

/// Lift a normal form back into an expression tree (used by the LaTeX dump
/// and by `differentiate`, whose contract returns an expression).
pub fn to_expr(nf: &NormalForm) -> Expr {
    if nf.is_zero() {
        return Expr::num(0);
    }
    let mut terms = Vec::with_capacity(nf.0.len());
    for m in &nf.0 {
        let mut parts = Vec::with_capacity(m.factors.len() + 1);
        if !m.coeff.is_one() || m.factors.is_empty() {
            parts.push(Expr::Num(m.coeff.clone()));
        }
        for (f, p) in &m.factors {
            let base = match f {
                Factor::Atom(w, id) => word_expr(*w, *id),
                Factor::Exp(u) => to_expr(u).exp(),
                Factor::Sin(u) => to_expr(u).sin(),
                Factor::Cos(u) => to_expr(u).cos(),
                Factor::SumInv(s) => to_expr(s),
            };
            let powered = match (f, *p) {
                (Factor::SumInv(_), p) => base.pow(p),
                (_, 1) => base,
                (_, p) => base.pow(p),
            };
            parts.push(powered);
        }
        terms.push(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Mul(parts) });
    }
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Add(terms)
    }
}

fn word_expr(w: Word, id: AtomId) -> Expr {
    let mut e = Expr::Atom(id);
    // Innermost letters wrap first.
    for d in Direction::ALL.iter().rev() {
        for _ in 0..w.0[d.index()] {
            e = e.deriv(*d);
        }
    }
    e
}
