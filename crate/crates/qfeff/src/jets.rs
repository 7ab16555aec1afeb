//! Truncated Taylor expansions (jets) in three real variables with complex
//! coefficients.
//!
//! Jets carry the numeric side of the library: coordinate data is expanded
//! at a base point, frame vector fields act as derivations on jets, and the
//! constant term of the result is the value that seeds a point sample.
//! Every operation is degree-triangular, so coefficients of degree <= d of
//! any result depend only on coefficients of degree <= d of the inputs;
//! applying k derivatives leaves degrees <= order - k trustworthy.

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{AtomId, Coeff, Expr, Symbols};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    n: usize,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn zero(order: usize) -> Jet {
        let n = order + 1;
        Jet { order, n, coeffs: vec![Complex64::new(0.0, 0.0); n * n * n] }
    }

    pub fn constant(order: usize, v: Complex64) -> Jet {
        let mut j = Jet::zero(order);
        j.set([0, 0, 0], v);
        j
    }

    /// The i-th coordinate as a jet centered at `base`: base + delta_i.
    pub fn variable(order: usize, i: usize, base: f64) -> Jet {
        assert!(i < 3);
        let mut j = Jet::constant(order, Complex64::new(base, 0.0));
        let mut m = [0usize; 3];
        m[i] = 1;
        if order >= 1 {
            j.set(m, Complex64::new(1.0, 0.0));
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn idx(&self, m: [usize; 3]) -> usize {
        (m[0] * self.n + m[1]) * self.n + m[2]
    }

    pub fn coeff(&self, m: [usize; 3]) -> Complex64 {
        if m[0] + m[1] + m[2] > self.order {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[self.idx(m)]
    }

    pub fn set(&mut self, m: [usize; 3], v: Complex64) {
        assert!(m[0] + m[1] + m[2] <= self.order, "multi-index beyond jet order");
        let i = self.idx(m);
        self.coeffs[i] = v;
    }

    /// Value at the base point.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    fn for_each_index(order: usize, mut f: impl FnMut([usize; 3])) {
        for a in 0..=order {
            for b in 0..=(order - a) {
                for c in 0..=(order - a - b) {
                    f([a, b, c]);
                }
            }
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet::zero(order);
        Self::for_each_index(order, |m| out.set(m, self.coeff(m) + other.coeff(m)));
        out
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, k: Complex64) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= k;
        }
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet::zero(order);
        Self::for_each_index(order, |ma| {
            let ca = self.coeff(ma);
            if ca.norm_sqr() == 0.0 {
                return;
            }
            let rem = order - ma[0] - ma[1] - ma[2];
            Self::for_each_index(rem, |mb| {
                let cb = other.coeff(mb);
                if cb.norm_sqr() == 0.0 {
                    return;
                }
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]];
                let i = out.idx(m);
                out.coeffs[i] += ca * cb;
            });
        });
        out
    }

    pub fn pow(&self, k: i32) -> Result<Jet> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        let mut acc = Jet::constant(self.order, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Partial derivative along coordinate i.  The result's top-degree
    /// coefficients need data beyond this jet's order, so its order drops.
    pub fn derivative(&self, i: usize) -> Jet {
        assert!(i < 3);
        assert!(self.order >= 1, "jet order exhausted by derivatives");
        let mut out = Jet::zero(self.order - 1);
        Self::for_each_index(self.order - 1, |m| {
            let mut up = m;
            up[i] += 1;
            out.set(m, self.coeff(up) * (up[i] as f64));
        });
        out
    }

    /// Multiplicative inverse; requires a nonzero value at the base point.
    pub fn inverse(&self) -> Result<Jet> {
        let f0 = self.value();
        if f0.norm() < 1e-140 {
            return Err(Error::DivisionByZero);
        }
        // f = f0 (1 + u) with u of positive valuation:
        // 1/f = (1/f0) sum (-u)^k.
        let u = self.scale(1.0 / f0).sub(&Jet::constant(self.order, Complex64::new(1.0, 0.0)));
        let mut acc = Jet::constant(self.order, Complex64::new(1.0, 0.0));
        let mut upow = Jet::constant(self.order, Complex64::new(1.0, 0.0));
        for k in 1..=self.order {
            upow = upow.mul(&u);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc = acc.add(&upow.scale(Complex64::new(sign, 0.0)));
        }
        Ok(acc.scale(1.0 / f0))
    }

    pub fn exp(&self) -> Jet {
        // exp(g) = exp(g0) * sum ghat^k / k! with ghat the positive-valuation
        // part.
        let g0 = self.value();
        let ghat = self.sub(&Jet::constant(self.order, g0));
        let mut acc = Jet::constant(self.order, Complex64::new(1.0, 0.0));
        let mut term = Jet::constant(self.order, Complex64::new(1.0, 0.0));
        for k in 1..=self.order {
            term = term.mul(&ghat).scale(Complex64::new(1.0 / k as f64, 0.0));
            acc = acc.add(&term);
        }
        acc.scale(g0.exp())
    }

    /// Principal-branch logarithm at the base point, extended by the Taylor
    /// series.  Newton iteration on exp(g) = f doubles the correct valuation
    /// each step.
    pub fn ln(&self) -> Result<Jet> {
        let f0 = self.value();
        if f0.norm() < 1e-140 {
            return Err(Error::Domain("logarithm of a jet vanishing at the base point".into()));
        }
        let mut g = Jet::constant(self.order, f0.ln());
        let one = Jet::constant(self.order, Complex64::new(1.0, 0.0));
        let mut steps = 0usize;
        let mut correct = 1usize;
        while correct <= self.order {
            g = g.add(&self.mul(&g.neg().exp()).sub(&one));
            correct *= 2;
            steps += 1;
            assert!(steps < 32);
        }
        Ok(g)
    }

    pub fn sin(&self) -> Jet {
        let i = Complex64::new(0.0, 1.0);
        let e1 = self.scale(i).exp();
        let e2 = self.scale(-i).exp();
        e1.sub(&e2).scale(1.0 / (2.0 * i))
    }

    pub fn cos(&self) -> Jet {
        let i = Complex64::new(0.0, 1.0);
        let e1 = self.scale(i).exp();
        let e2 = self.scale(-i).exp();
        e1.add(&e2).scale(Complex64::new(0.5, 0.0))
    }

    /// Coefficient-wise conjugate.  Valid because the underlying variables
    /// are real coordinates.
    pub fn conj(&self) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.conj();
        }
        out
    }

    /// Evaluate the truncated polynomial at an offset from the base point.
    pub fn eval_at(&self, delta: [f64; 3]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        Self::for_each_index(self.order, |m| {
            let mono = delta[0].powi(m[0] as i32)
                * delta[1].powi(m[1] as i32)
                * delta[2].powi(m[2] as i32);
            acc += self.coeff(m) * mono;
        });
        acc
    }
}

impl std::ops::Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        Jet::mul(self, rhs)
    }
}

fn coeff_to_c64(c: &Coeff) -> Complex64 {
    c.to_c64()
}

/// Environment for expanding coordinate expressions into jets: the three
/// coordinate atoms become variable jets at `base`; anything else must be
/// supplied explicitly.
pub struct JetEnv<'a> {
    pub order: usize,
    pub base: [f64; 3],
    pub symbols: &'a Symbols,
    pub coords: [AtomId; 3],
    pub extra: std::collections::BTreeMap<AtomId, Jet>,
}

impl<'a> JetEnv<'a> {
    pub fn new(order: usize, base: [f64; 3], symbols: &'a Symbols, coords: [AtomId; 3]) -> Self {
        JetEnv { order, base, symbols, coords, extra: std::collections::BTreeMap::new() }
    }

    fn atom(&self, id: AtomId) -> Result<Jet> {
        for (i, x) in self.coords.iter().enumerate() {
            if *x == id {
                return Ok(Jet::variable(self.order, i, self.base[i]));
            }
        }
        if let Some(j) = self.extra.get(&id) {
            return Ok(j.clone());
        }
        Err(Error::UnknownSymbol(format!(
            "{} has no jet assignment at the base point",
            self.symbols.name(id)
        )))
    }

    pub fn expand(&self, e: &Expr) -> Result<Jet> {
        match e {
            Expr::Num(c) => Ok(Jet::constant(self.order, coeff_to_c64(c))),
            Expr::Atom(id) => self.atom(*id),
            Expr::Add(parts) => {
                let mut acc = Jet::zero(self.order);
                for p in parts {
                    acc = acc.add(&self.expand(p)?);
                }
                Ok(acc)
            }
            Expr::Mul(parts) => {
                let mut acc = Jet::constant(self.order, Complex64::new(1.0, 0.0));
                for p in parts {
                    acc = acc.mul(&self.expand(p)?);
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => self.expand(b)?.pow(*k),
            Expr::Exp(a) => Ok(self.expand(a)?.exp()),
            Expr::Log(a) => self.expand(a)?.ln(),
            Expr::Sin(a) => Ok(self.expand(a)?.sin()),
            Expr::Cos(a) => Ok(self.expand(a)?.cos()),
            Expr::Conj(a) => Ok(self.expand(a)?.conj()),
            Expr::Deriv(..) => Err(Error::Domain(
                "frame derivatives are not defined for coordinate expressions".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Algebra;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn derivative_matches_exponential() {
        // f = exp(x + 2y): d/dx f = f.
        let order = 5;
        let x = Jet::variable(order, 0, 0.0);
        let y = Jet::variable(order, 1, 0.0);
        let f = x.add(&y.scale(c(2.0, 0.0))).exp();
        let fx = f.derivative(0);
        Jet::for_each_index(order - 1, |m| {
            assert!((fx.coeff(m) - f.coeff(m)).norm() < 1e-12, "mismatch at {m:?}");
        });
    }

    #[test]
    fn inverse_and_log_round_trip() {
        let order = 6;
        let x = Jet::variable(order, 0, 0.2);
        let z = Jet::variable(order, 2, -0.4);
        let g = Jet::constant(order, c(0.3, 0.1))
            .add(&x)
            .add(&z.mul(&z).scale(c(-0.5, 0.0)));
        let f = g.exp();
        let back = f.ln().unwrap();
        Jet::for_each_index(order, |m| {
            assert!((back.coeff(m) - g.coeff(m)).norm() < 1e-10, "log mismatch at {m:?}");
        });
        let inv = f.inverse().unwrap();
        let prod = f.mul(&inv);
        Jet::for_each_index(order, |m| {
            let want = if m == [0, 0, 0] { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert!((prod.coeff(m) - want).norm() < 1e-10, "inverse mismatch at {m:?}");
        });
    }

    #[test]
    fn trig_identity() {
        let order = 5;
        let x = Jet::variable(order, 0, 0.7);
        let y = Jet::variable(order, 1, -0.3);
        let u = x.add(&y.scale(c(0.0, 1.0)));
        let s = u.sin();
        let co = u.cos();
        let ident = s.mul(&s).add(&co.mul(&co));
        Jet::for_each_index(order, |m| {
            let want = if m == [0, 0, 0] { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert!((ident.coeff(m) - want).norm() < 1e-10);
        });
    }

    #[test]
    fn expression_expansion_matches_direct_evaluation() {
        let alg = Algebra::generic();
        let e = alg.parse("x1^2*exp(I*x2) - conj(x1 + I*x3)").unwrap();
        let base = [0.4, -0.9, 0.25];
        let env = JetEnv::new(4, base, &alg.symbols, [alg.std.x1, alg.std.x2, alg.std.x3]);
        let j = env.expand(&e).unwrap();
        let delta = [0.013, -0.021, 0.017];
        let got = j.eval_at(delta);
        let p = [base[0] + delta[0], base[1] + delta[1], base[2] + delta[2]];
        let want = c(p[0] * p[0], 0.0) * c(0.0, p[1]).exp() - c(p[0], p[2]).conj();
        assert!((got - want).norm() < 1e-8, "got {got}, want {want}");
        // Taylor derivative check: d/dx1 at base.
        let dx = j.derivative(0).value();
        let want_dx = c(2.0 * base[0], 0.0) * c(0.0, base[1]).exp() - c(1.0, 0.0);
        assert!((dx - want_dx).norm() < 1e-12);
    }
}
