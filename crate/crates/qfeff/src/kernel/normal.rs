use super::atom::AtomId;
use super::coeff::Coeff;
use crate::error::{Error, Result};

/// The four frame derivations, in canonical order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Direction {
    D1 = 0,
    D2 = 1,
    D0 = 2,
    Dr = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::D1, Direction::D2, Direction::D0, Direction::Dr];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::D1 => "D1",
            Direction::D2 => "D2",
            Direction::D0 => "D0",
            Direction::Dr => "Dr",
        }
    }
}

/// A derivative word in canonical order: exponents of D1, D2, D0, Dr with
/// D1 outermost and Dr innermost.  Out-of-order words are not representable;
/// the rewriting that enforces this lives in the `deriv` module.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word(pub [u16; 4]);

impl Word {
    pub fn empty() -> Self {
        Word([0; 4])
    }

    pub fn single(d: Direction) -> Self {
        Word::empty().bump(d)
    }

    pub fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn bump(mut self, d: Direction) -> Self {
        self.0[d.index()] += 1;
        self
    }

    pub fn drop_one(mut self, d: Direction) -> Self {
        assert!(self.0[d.index()] > 0);
        self.0[d.index()] -= 1;
        self
    }

    /// Innermost (rightmost) letter of the word.
    pub fn innermost(&self) -> Option<Direction> {
        Direction::ALL.iter().rev().copied().find(|d| self.0[d.index()] > 0)
    }

    /// Swap the D1 and D2 exponents; the shape conjugation takes a word to.
    pub fn mirror(mut self) -> Self {
        self.0.swap(0, 1);
        self
    }
}

/// A multiplicative factor of a monomial.  `Exp` always carries power one
/// (arguments merge additively); `SumInv` carries only negative powers and
/// its argument has at least two monomials with leading coefficient one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Factor {
    Atom(Word, AtomId),
    Exp(NormalForm),
    Sin(NormalForm),
    Cos(NormalForm),
    SumInv(NormalForm),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    pub factors: Vec<(Factor, i32)>,
    pub coeff: Coeff,
}

impl Monomial {
    pub fn constant(c: Coeff) -> Self {
        Monomial { factors: Vec::new(), coeff: c }
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Sum of monomials, sorted by symbolic part, with no two monomials sharing
/// a symbolic part and no zero coefficients.  The empty sum is zero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct NormalForm(pub Vec<Monomial>);

impl NormalForm {
    pub fn zero() -> Self {
        NormalForm(Vec::new())
    }

    pub fn constant(c: Coeff) -> Self {
        if c.is_zero() {
            NormalForm::zero()
        } else {
            NormalForm(vec![Monomial::constant(c)])
        }
    }

    pub fn one() -> Self {
        NormalForm::constant(Coeff::one())
    }

    pub fn int(n: i64) -> Self {
        NormalForm::constant(Coeff::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        NormalForm::constant(Coeff::from_ratio(n, d))
    }

    pub fn i() -> Self {
        NormalForm::constant(Coeff::i())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_constant(&self) -> Option<&Coeff> {
        match self.0.as_slice() {
            [m] if m.is_constant() => Some(&m.coeff),
            [] => None, // zero: callers usually test is_zero first
            _ => None,
        }
    }

    /// A single atom with no derivatives applied.  Only valid for atoms
    /// without substitutions; the algebra-aware constructor lives in `deriv`.
    pub fn plain_atom(id: AtomId) -> Self {
        NormalForm::raw_atom(Word::empty(), id)
    }

    pub(crate) fn raw_atom(w: Word, id: AtomId) -> Self {
        NormalForm(vec![Monomial { factors: vec![(Factor::Atom(w, id), 1)], coeff: Coeff::one() }])
    }

    /// Sign of the coefficient of the first monomial, used to canonicalize
    /// arguments of even/odd nodes.
    fn leading_negative(&self) -> bool {
        self.0.first().map_or(false, |m| m.coeff.leading_negative())
    }

    /// Multiplying every coefficient by the inverse of the leading one makes
    /// the representative of a sum unique up to the scalar; used by `SumInv`.
    fn leading_coeff(&self) -> Coeff {
        self.0.first().map_or_else(Coeff::one, |m| m.coeff.clone())
    }
}

/// Rebuild the sorted/merged invariant from an arbitrary bag of monomials.
pub fn from_monomials(mut ms: Vec<Monomial>) -> NormalForm {
    ms.sort_by(|a, b| a.factors.cmp(&b.factors));
    let mut out: Vec<Monomial> = Vec::with_capacity(ms.len());
    for m in ms {
        if m.coeff.is_zero() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.factors == m.factors => last.coeff += &m.coeff,
            _ => out.push(m),
        }
    }
    out.retain(|m| !m.coeff.is_zero());
    NormalForm(out)
}

pub fn nf_add(a: &NormalForm, b: &NormalForm) -> NormalForm {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    // Both sides are sorted; merge instead of re-sorting.
    let mut out = Vec::with_capacity(a.0.len() + b.0.len());
    let (mut i, mut j) = (0, 0);
    while i < a.0.len() && j < b.0.len() {
        match a.0[i].factors.cmp(&b.0[j].factors) {
            std::cmp::Ordering::Less => {
                out.push(a.0[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b.0[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let c = &a.0[i].coeff + &b.0[j].coeff;
                if !c.is_zero() {
                    out.push(Monomial { factors: a.0[i].factors.clone(), coeff: c });
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a.0[i..]);
    out.extend_from_slice(&b.0[j..]);
    NormalForm(out)
}

pub fn nf_neg(a: &NormalForm) -> NormalForm {
    NormalForm(
        a.0.iter()
            .map(|m| Monomial { factors: m.factors.clone(), coeff: -&m.coeff })
            .collect(),
    )
}

pub fn nf_sub(a: &NormalForm, b: &NormalForm) -> NormalForm {
    nf_add(a, &nf_neg(b))
}

pub fn nf_scale(a: &NormalForm, c: &Coeff) -> NormalForm {
    if c.is_zero() {
        return NormalForm::zero();
    }
    NormalForm(
        a.0.iter()
            .map(|m| Monomial { factors: m.factors.clone(), coeff: &m.coeff * c })
            .collect(),
    )
}

/// Multiply two monomials.  Always yields a single monomial: exponentials
/// merge additively, equal factors merge by adding powers, zero powers drop.
fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let coeff = &a.coeff * &b.coeff;
    // Exponential factors merge by argument addition, outside the sorted
    // merge below (their arguments differ as sort keys but not as factors).
    let mut exp_arg = NormalForm::zero();
    let mut rest_a: Vec<&(Factor, i32)> = Vec::with_capacity(a.factors.len());
    let mut rest_b: Vec<&(Factor, i32)> = Vec::with_capacity(b.factors.len());
    for (list, rest) in [(&a.factors, &mut rest_a), (&b.factors, &mut rest_b)] {
        for fp in list {
            if let (Factor::Exp(u), _) = fp {
                exp_arg = nf_add(&exp_arg, u);
            } else {
                rest.push(fp);
            }
        }
    }
    let mut factors: Vec<(Factor, i32)> = Vec::with_capacity(rest_a.len() + rest_b.len() + 1);
    let (mut i, mut j) = (0, 0);
    while i < rest_a.len() && j < rest_b.len() {
        match rest_a[i].0.cmp(&rest_b[j].0) {
            std::cmp::Ordering::Less => {
                factors.push(rest_a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                factors.push(rest_b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let p = rest_a[i].1 + rest_b[j].1;
                if p != 0 {
                    factors.push((rest_a[i].0.clone(), p));
                }
                i += 1;
                j += 1;
            }
        }
    }
    factors.extend(rest_a[i..].iter().map(|fp| (*fp).clone()));
    factors.extend(rest_b[j..].iter().map(|fp| (*fp).clone()));
    if !exp_arg.is_zero() {
        let f = (Factor::Exp(exp_arg), 1);
        let pos = factors.partition_point(|g| g.0 < f.0);
        factors.insert(pos, f);
    }
    Monomial { factors, coeff }
}

pub fn nf_mul(a: &NormalForm, b: &NormalForm) -> NormalForm {
    if a.is_zero() || b.is_zero() {
        return NormalForm::zero();
    }
    let mut ms = Vec::with_capacity(a.0.len() * b.0.len());
    for ma in &a.0 {
        for mb in &b.0 {
            ms.push(mul_monomials(ma, mb));
        }
    }
    from_monomials(ms)
}

pub fn nf_mul_all(parts: &[&NormalForm]) -> NormalForm {
    let mut acc = NormalForm::one();
    for p in parts {
        acc = nf_mul(&acc, p);
    }
    acc
}

/// Invert a normal form.  Single monomials invert factor by factor; genuine
/// sums become a `SumInv` factor with the leading coefficient split off so
/// scalar multiples share a representative.
pub fn nf_inv(a: &NormalForm) -> Result<NormalForm> {
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if a.0.len() == 1 {
        let m = &a.0[0];
        let mut acc =
            NormalForm(vec![Monomial { factors: Vec::new(), coeff: m.coeff.inverse() }]);
        for (f, p) in &m.factors {
            let part = match f {
                Factor::Exp(u) => {
                    NormalForm(vec![Monomial {
                        factors: vec![(Factor::Exp(nf_neg(u)), 1)],
                        coeff: Coeff::one(),
                    }])
                }
                Factor::SumInv(s) => {
                    // Inverse of an inverse power: a genuinely positive power
                    // of the sum, expanded back out.
                    nf_pow(s, -p)?
                }
                other => NormalForm(vec![Monomial {
                    factors: vec![(other.clone(), -p)],
                    coeff: Coeff::one(),
                }]),
            };
            acc = nf_mul(&acc, &part);
        }
        return Ok(acc);
    }
    let lead = a.leading_coeff();
    let scaled = nf_scale(a, &lead.inverse());
    Ok(NormalForm(vec![Monomial {
        factors: vec![(Factor::SumInv(scaled), -1)],
        coeff: lead.inverse(),
    }]))
}

pub fn nf_pow(a: &NormalForm, k: i32) -> Result<NormalForm> {
    if k == 0 {
        return Ok(NormalForm::one());
    }
    let base = if k < 0 { nf_inv(a)? } else { a.clone() };
    let mut acc = NormalForm::one();
    let mut sq = base;
    let mut n = k.unsigned_abs();
    loop {
        if n & 1 == 1 {
            acc = nf_mul(&acc, &sq);
        }
        n >>= 1;
        if n == 0 {
            break;
        }
        sq = nf_mul(&sq, &sq);
    }
    Ok(acc)
}

pub fn nf_exp(arg: &NormalForm) -> NormalForm {
    if arg.is_zero() {
        return NormalForm::one();
    }
    NormalForm(vec![Monomial {
        factors: vec![(Factor::Exp(arg.clone()), 1)],
        coeff: Coeff::one(),
    }])
}

pub fn nf_sin(arg: &NormalForm) -> NormalForm {
    nf_sin_pow(arg, 1).expect("positive power")
}

pub fn nf_cos(arg: &NormalForm) -> NormalForm {
    nf_cos_pow(arg, 1).expect("positive power")
}

/// sin(arg)^k with the argument sign canonicalized: sin(-u)^k = (-1)^k sin(u)^k.
pub fn nf_sin_pow(arg: &NormalForm, k: i32) -> Result<NormalForm> {
    assert!(k != 0);
    if arg.is_zero() {
        return if k > 0 { Ok(NormalForm::zero()) } else { Err(Error::DivisionByZero) };
    }
    let (u, sign) = if arg.leading_negative() {
        (nf_neg(arg), if k.rem_euclid(2) == 1 { -&Coeff::one() } else { Coeff::one() })
    } else {
        (arg.clone(), Coeff::one())
    };
    Ok(NormalForm(vec![Monomial { factors: vec![(Factor::Sin(u), k)], coeff: sign }]))
}

/// cos(arg)^k with the argument sign canonicalized: cos is even.
pub fn nf_cos_pow(arg: &NormalForm, k: i32) -> Result<NormalForm> {
    assert!(k != 0);
    if arg.is_zero() {
        return Ok(NormalForm::one());
    }
    let u = if arg.leading_negative() { nf_neg(arg) } else { arg.clone() };
    Ok(NormalForm(vec![Monomial { factors: vec![(Factor::Cos(u), k)], coeff: Coeff::one() }]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(n: u32) -> NormalForm {
        NormalForm::plain_atom(AtomId(n))
    }

    #[test]
    fn add_merges_like_terms() {
        let x = atom(0);
        let two_x = nf_add(&x, &x);
        assert_eq!(two_x, nf_scale(&x, &Coeff::from_int(2)));
        assert!(nf_sub(&two_x, &nf_scale(&x, &Coeff::from_int(2))).is_zero());
    }

    #[test]
    fn inverse_exponentials_cancel() {
        let r = atom(1);
        let ir = nf_scale(&r, &Coeff::i());
        let e_plus = nf_exp(&ir);
        let e_minus = nf_exp(&nf_neg(&ir));
        assert_eq!(nf_mul(&e_plus, &e_minus), NormalForm::one());
    }

    #[test]
    fn powers_merge_and_drop() {
        let x = atom(0);
        let x2 = nf_pow(&x, 2).unwrap();
        let xm2 = nf_pow(&x, -2).unwrap();
        assert_eq!(nf_mul(&x2, &xm2), NormalForm::one());
        assert_eq!(nf_mul(&x, &x), x2);
    }

    #[test]
    fn sum_inverse_canonicalizes_scalar_multiples() {
        let x = atom(0);
        let y = atom(2);
        let s = nf_add(&x, &y);
        let s2 = nf_scale(&s, &Coeff::from_int(2));
        let inv_s = nf_inv(&s).unwrap();
        let inv_s2 = nf_inv(&s2).unwrap();
        assert_eq!(nf_scale(&inv_s, &Coeff::from_ratio(1, 2)), inv_s2);
        // (x+y)^{-1} inverted again expands back to x+y.
        assert_eq!(nf_inv(&inv_s).unwrap(), s);
    }

    #[test]
    fn trig_canonical_signs() {
        let x = atom(0);
        let neg_x = nf_neg(&x);
        assert_eq!(nf_sin(&neg_x), nf_neg(&nf_sin(&x)));
        assert_eq!(nf_cos(&neg_x), nf_cos(&x));
        assert_eq!(nf_sin_pow(&neg_x, 2).unwrap(), nf_sin_pow(&x, 2).unwrap());
        assert_eq!(nf_sin_pow(&neg_x, -1).unwrap(), nf_neg(&nf_sin_pow(&x, -1).unwrap()));
        assert!(nf_sin(&NormalForm::zero()).is_zero());
        assert_eq!(nf_cos(&NormalForm::zero()), NormalForm::one());
    }

    #[test]
    fn pow_zero_of_zero_is_one() {
        assert_eq!(nf_pow(&NormalForm::zero(), 0).unwrap(), NormalForm::one());
        assert!(matches!(nf_inv(&NormalForm::zero()), Err(Error::DivisionByZero)));
    }
}
