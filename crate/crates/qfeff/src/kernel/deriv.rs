//! Formal frame differentiation and conjugation on normal forms.
//!
//! Words are stored in the canonical letter order (D1, D2, D0, Dr).  A
//! derivative prepended out of order is rewritten with the commutation rules
//!
//!   D2 D1 = D1 D2 + i D0
//!   D0 D1 = D1 D0 + k_a D1 + k_bb D2 + k_c D0
//!   D0 D2 = D2 D0 + k_b D1 + k_ab D2 + k_cb D0
//!
//! where the k coefficients are the algebra's commutator data and Dr
//! commutes with everything.  Each rewrite either lowers the total degree of
//! the word being fixed or moves a letter strictly closer to its canonical
//! slot, so the recursion terminates.

use super::atom::AtomId;
use super::coeff::Coeff;
use super::normal::{
    from_monomials, nf_add, nf_cos_pow, nf_exp, nf_inv, nf_mul, nf_pow, nf_scale, nf_sin_pow,
    Direction, Factor, Monomial, NormalForm, Word,
};
use super::Algebra;

/// Atom constructor honoring the algebra's substitutions, defined
/// derivatives, and fiber-independence flags.  Every atom factor that enters
/// a normal form is built here.
pub fn nf_atom(alg: &Algebra, w: Word, id: AtomId) -> NormalForm {
    if let Some(sub) = alg.substitution(id) {
        let sub = sub.clone();
        return nf_apply_word(alg, &sub, w);
    }
    if let Some(defs) = alg.defined(id) {
        if w.is_empty() {
            return NormalForm::raw_atom(w, id);
        }
        let inner = w.innermost().expect("nonempty word");
        let base = defs[inner.index()].clone();
        return nf_apply_word(alg, &base, w.drop_one(inner));
    }
    if w.0[Direction::Dr.index()] > 0 && !alg.symbols.r_dependent(id) {
        return NormalForm::zero();
    }
    NormalForm::raw_atom(w, id)
}

/// Prepend one derivative letter to a canonical word on an atom.
fn prepend(alg: &Algebra, dir: Direction, w: Word, id: AtomId) -> NormalForm {
    match dir {
        // D1 is leftmost in the canonical order; Dr commutes all the way in.
        Direction::D1 => nf_atom(alg, w.bump(Direction::D1), id),
        Direction::Dr => nf_atom(alg, w.bump(Direction::Dr), id),
        Direction::D2 => {
            if w.0[0] == 0 {
                return nf_atom(alg, w.bump(Direction::D2), id);
            }
            // D2 D1 X = D1 (D2 X) + i (D0 X) with X the word minus one D1.
            let w1 = w.drop_one(Direction::D1);
            let d2x = prepend(alg, Direction::D2, w1, id);
            nf_add(
                &nf_deriv(alg, &d2x, Direction::D1),
                &nf_scale(&prepend(alg, Direction::D0, w1, id), &Coeff::i()),
            )
        }
        Direction::D0 => {
            if w.0[0] > 0 {
                // D0 D1 X = D1 (D0 X) + k_a (D1 X) + k_bb (D2 X) + k_c (D0 X).
                let w1 = w.drop_one(Direction::D1);
                let d0x = prepend(alg, Direction::D0, w1, id);
                let mut acc = nf_deriv(alg, &d0x, Direction::D1);
                acc = nf_add(&acc, &nf_mul(&alg.comm.k_a, &nf_atom(alg, w, id)));
                acc = nf_add(&acc, &nf_mul(&alg.comm.k_bb, &prepend(alg, Direction::D2, w1, id)));
                acc = nf_add(&acc, &nf_mul(&alg.comm.k_c, &d0x));
                acc
            } else if w.0[1] > 0 {
                // D0 D2 X = D2 (D0 X) + k_b (D1 X) + k_ab (D2 X) + k_cb (D0 X).
                let w1 = w.drop_one(Direction::D2);
                let d0x = prepend(alg, Direction::D0, w1, id);
                let mut acc = nf_deriv(alg, &d0x, Direction::D2);
                acc = nf_add(
                    &acc,
                    &nf_mul(&alg.comm.k_b, &nf_atom(alg, w1.bump(Direction::D1), id)),
                );
                acc = nf_add(&acc, &nf_mul(&alg.comm.k_ab, &nf_atom(alg, w, id)));
                acc = nf_add(&acc, &nf_mul(&alg.comm.k_cb, &d0x));
                acc
            } else {
                nf_atom(alg, w.bump(Direction::D0), id)
            }
        }
    }
}

/// d(f^p) for a single powered factor.
fn factor_pow_deriv(alg: &Algebra, f: &Factor, p: i32, dir: Direction) -> NormalForm {
    match f {
        Factor::Atom(w, id) => {
            let base = prepend(alg, dir, *w, *id);
            if p == 1 {
                base
            } else {
                let lowered = NormalForm(vec![Monomial {
                    factors: vec![(f.clone(), p - 1)],
                    coeff: Coeff::from_int(p as i64),
                }]);
                nf_mul(&lowered, &base)
            }
        }
        Factor::Exp(u) => {
            debug_assert_eq!(p, 1);
            nf_mul(&nf_exp(u), &nf_deriv(alg, u, dir))
        }
        Factor::Sin(u) => {
            // d sin^p = p sin^{p-1} cos * du
            let mut acc = nf_scale(&nf_cos_pow(u, 1).expect("pow 1"), &Coeff::from_int(p as i64));
            if p != 1 {
                acc = nf_mul(&acc, &nf_sin_pow(u, p - 1).expect("nonzero"));
            }
            nf_mul(&acc, &nf_deriv(alg, u, dir))
        }
        Factor::Cos(u) => {
            // d cos^p = -p cos^{p-1} sin * du
            let mut acc = nf_scale(&nf_sin_pow(u, 1).expect("pow 1"), &Coeff::from_int(-p as i64));
            if p != 1 {
                acc = nf_mul(&acc, &nf_cos_pow(u, p - 1).expect("nonzero"));
            }
            nf_mul(&acc, &nf_deriv(alg, u, dir))
        }
        Factor::SumInv(s) => {
            // d(S^p) = p S^{p-1} dS; p <= -1 so p-1 stays an inverse power.
            let lowered = NormalForm(vec![Monomial {
                factors: vec![(Factor::SumInv(s.clone()), p - 1)],
                coeff: Coeff::from_int(p as i64),
            }]);
            nf_mul(&lowered, &nf_deriv(alg, s, dir))
        }
    }
}

pub fn nf_deriv(alg: &Algebra, nf: &NormalForm, dir: Direction) -> NormalForm {
    let mut acc = NormalForm::zero();
    for m in &nf.0 {
        for i in 0..m.factors.len() {
            let (f, p) = &m.factors[i];
            let dpart = factor_pow_deriv(alg, f, *p, dir);
            if dpart.is_zero() {
                continue;
            }
            let mut rest = m.clone();
            rest.factors.remove(i);
            let rest_nf = from_monomials(vec![rest]);
            acc = nf_add(&acc, &nf_mul(&rest_nf, &dpart));
        }
    }
    acc
}

/// Apply a canonical word to an already-normalized value, innermost letter
/// first.
pub fn nf_apply_word(alg: &Algebra, base: &NormalForm, w: Word) -> NormalForm {
    let mut acc = base.clone();
    for d in Direction::ALL.iter().rev() {
        for _ in 0..w.0[d.index()] {
            acc = nf_deriv(alg, &acc, *d);
        }
    }
    acc
}

/// Conjugate a normal form.  On atoms this swaps the paired symbol and
/// re-applies the mirrored derivative word letter by letter, so the
/// commutator corrections of the reordering are reintroduced exactly.
pub fn nf_conj(alg: &Algebra, nf: &NormalForm) -> NormalForm {
    let mut acc = NormalForm::zero();
    for m in &nf.0 {
        let mut prod = NormalForm::constant(m.coeff.conj());
        for (f, p) in &m.factors {
            let part = match f {
                Factor::Atom(w, id) => {
                    let base = conj_word_atom(alg, *w, *id);
                    nf_pow(&base, *p).expect("conjugate of invertible factor")
                }
                Factor::Exp(u) => nf_exp(&nf_conj(alg, u)),
                Factor::Sin(u) => nf_sin_pow(&nf_conj(alg, u), *p).expect("nonzero argument"),
                Factor::Cos(u) => nf_cos_pow(&nf_conj(alg, u), *p).expect("nonzero argument"),
                Factor::SumInv(s) => {
                    let cs = nf_conj(alg, s);
                    nf_pow(&cs, *p).expect("conjugate of invertible sum")
                }
            };
            prod = nf_mul(&prod, &part);
        }
        acc = nf_add(&acc, &prod);
    }
    acc
}

/// Conjugate of a derivative word applied to an atom: the string
/// D1^a D2^b D0^c Dr^d conjugates to D2^a D1^b D0^c Dr^d acting on the
/// paired atom, rebuilt by repeated differentiation (innermost first).
pub fn conj_word_atom(alg: &Algebra, w: Word, id: AtomId) -> NormalForm {
    let cid = alg.symbols.conj(id);
    let mut acc = nf_atom(alg, Word::empty(), cid);
    let [a, b, c, d] = w.0;
    for _ in 0..d {
        acc = nf_deriv(alg, &acc, Direction::Dr);
    }
    for _ in 0..c {
        acc = nf_deriv(alg, &acc, Direction::D0);
    }
    for _ in 0..b {
        acc = nf_deriv(alg, &acc, Direction::D1);
    }
    for _ in 0..a {
        acc = nf_deriv(alg, &acc, Direction::D2);
    }
    acc
}

/// Division helper used throughout the geometry layers: a/b.
pub fn nf_div(a: &NormalForm, b: &NormalForm) -> crate::error::Result<NormalForm> {
    Ok(nf_mul(a, &nf_inv(b)?))
}
