//! Exterior forms with symbolic coefficients over a coframe of up to four
//! generators.
//!
//! A [`Form`] stores one normal-form coefficient per wedge monomial, keyed
//! by a bitmask over generator indices (bit i set = generator i present,
//! generators wedged in ascending index order).  A [`FrameContext`] supplies
//! what the exterior derivative needs: the derivation dual to each
//! generator and the derivative of each generator as a 2-form, plus the
//! index permutation induced by conjugation.

use std::collections::BTreeMap;

use crate::kernel::{
    nf_add, nf_conj, nf_deriv, nf_mul, nf_neg, nf_scale, nf_sub, Algebra, Coeff, Direction,
    NormalForm,
};

pub const GENERATORS: usize = 4;

/// Sign of sorting the concatenation of two disjoint ascending bit sets:
/// (-1)^inversions, where an inversion is a pair (x in a, y in b, x > y).
pub fn wedge_sign(a: u8, b: u8) -> i32 {
    debug_assert_eq!(a & b, 0, "wedge of overlapping masks");
    let mut inv = 0u32;
    for y in 0..8 {
        if b & (1 << y) != 0 {
            inv += (a >> (y + 1)).count_ones();
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn bits(mask: u8) -> impl Iterator<Item = usize> {
    (0..8).filter(move |i| mask & (1 << i) != 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Form {
    comps: BTreeMap<u8, NormalForm>,
}

impl Form {
    pub fn zero() -> Form {
        Form { comps: BTreeMap::new() }
    }

    /// Degree-zero form.
    pub fn scalar(nf: NormalForm) -> Form {
        let mut f = Form::zero();
        f.insert(0, nf);
        f
    }

    /// The i-th generator as a 1-form.
    pub fn basis(i: usize) -> Form {
        assert!(i < GENERATORS);
        Form::basis_mask(1 << i)
    }

    /// The wedge monomial for a mask, with coefficient one.
    pub fn basis_mask(mask: u8) -> Form {
        let mut f = Form::zero();
        f.insert(mask, NormalForm::one());
        f
    }

    pub fn one_form(coeffs: [NormalForm; GENERATORS]) -> Form {
        let mut f = Form::zero();
        for (i, c) in coeffs.into_iter().enumerate() {
            f.insert(1 << i, c);
        }
        f
    }

    /// Add `nf` into the component at `mask`, dropping it if the sum dies.
    pub fn insert(&mut self, mask: u8, nf: NormalForm) {
        if nf.is_zero() {
            return;
        }
        let entry = self.comps.entry(mask).or_insert_with(NormalForm::zero);
        *entry = nf_add(entry, &nf);
        if entry.is_zero() {
            self.comps.remove(&mask);
        }
    }

    pub fn coeff(&self, mask: u8) -> NormalForm {
        self.comps.get(&mask).cloned().unwrap_or_else(NormalForm::zero)
    }

    pub fn comps(&self) -> impl Iterator<Item = (u8, &NormalForm)> {
        self.comps.iter().map(|(m, nf)| (*m, nf))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Common degree of all components, if homogeneous (None for zero or
    /// mixed forms).
    pub fn degree(&self) -> Option<u32> {
        let mut deg = None;
        for mask in self.comps.keys() {
            let d = mask.count_ones();
            match deg {
                None => deg = Some(d),
                Some(k) if k == d => {}
                Some(_) => return None,
            }
        }
        deg
    }

    pub fn add(&self, other: &Form) -> Form {
        let mut out = self.clone();
        for (m, nf) in &other.comps {
            out.insert(*m, nf.clone());
        }
        out
    }

    pub fn neg(&self) -> Form {
        self.map(nf_neg)
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn scale(&self, nf: &NormalForm) -> Form {
        self.map(|c| nf_mul(c, nf))
    }

    pub fn scale_coeff(&self, k: &Coeff) -> Form {
        self.map(|c| nf_scale(c, k))
    }

    pub fn map(&self, f: impl Fn(&NormalForm) -> NormalForm) -> Form {
        let mut out = Form::zero();
        for (m, nf) in &self.comps {
            out.insert(*m, f(nf));
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero();
        for (ma, ca) in &self.comps {
            for (mb, cb) in &other.comps {
                if ma & mb != 0 {
                    continue;
                }
                let sign = wedge_sign(*ma, *mb);
                let mut c = nf_mul(ca, cb);
                if sign < 0 {
                    c = nf_neg(&c);
                }
                out.insert(ma | mb, c);
            }
        }
        out
    }

    /// Rewrite in a new coframe: `images[i]` is generator i expressed in the
    /// target basis.  Works on forms of any degree by expanding each wedge
    /// monomial.
    pub fn change_basis(&self, images: &[Form; GENERATORS]) -> Form {
        let mut out = Form::zero();
        for (m, c) in &self.comps {
            let mut term = Form::scalar(c.clone());
            for i in bits(*m) {
                term = term.wedge(&images[i]);
            }
            out = out.add(&term);
        }
        out
    }
}

/// A frame vector expressed through the kernel derivations:
/// X(f) = sum of coeff * D_dir f.
#[derive(Clone, Debug)]
pub struct FrameVector {
    pub terms: Vec<(NormalForm, Direction)>,
}

impl FrameVector {
    pub fn dir(d: Direction) -> FrameVector {
        FrameVector { terms: vec![(NormalForm::one(), d)] }
    }

    pub fn apply(&self, alg: &Algebra, nf: &NormalForm) -> NormalForm {
        let mut acc = NormalForm::zero();
        for (coeff, d) in &self.terms {
            acc = nf_add(&acc, &nf_mul(coeff, &nf_deriv(alg, nf, *d)));
        }
        acc
    }
}

/// Everything the exterior derivative needs about a coframe.
#[derive(Clone, Debug)]
pub struct FrameContext {
    /// Derivation dual to each generator.
    pub dual: [FrameVector; GENERATORS],
    /// Exterior derivative of each generator, in the same coframe.
    pub d_basis: [Form; GENERATORS],
    /// Index permutation induced by conjugation of the generators.
    pub conj_perm: [usize; GENERATORS],
}

impl FrameContext {
    /// The tautological coframe of a CR structure with a fiber coordinate:
    /// generators (mu, mubar, lambda, dr), dual frame (D1, D2, D0, Dr),
    /// structure equations
    ///
    ///   d mu     = alpha mu^lambda + beta mubar^lambda
    ///   d lambda = i mu^mubar + c mu^lambda + cbar mubar^lambda
    ///   d dr     = 0.
    pub fn mu_basis(alg: &Algebra) -> FrameContext {
        let s = alg.std;
        let mu_l: u8 = 0b101;
        let mub_l: u8 = 0b110;
        let mu_mub: u8 = 0b011;

        let mut d_mu = Form::zero();
        d_mu.insert(mu_l, alg.atom(s.alpha));
        d_mu.insert(mub_l, alg.atom(s.beta));

        let mut d_mub = Form::zero();
        d_mub.insert(mub_l, alg.atom(s.alphabar));
        d_mub.insert(mu_l, alg.atom(s.betabar));

        let mut d_lam = Form::zero();
        d_lam.insert(mu_mub, NormalForm::i());
        d_lam.insert(mu_l, alg.atom(s.c));
        d_lam.insert(mub_l, alg.atom(s.cbar));

        FrameContext {
            dual: [
                FrameVector::dir(Direction::D1),
                FrameVector::dir(Direction::D2),
                FrameVector::dir(Direction::D0),
                FrameVector::dir(Direction::Dr),
            ],
            d_basis: [d_mu, d_mub, d_lam, Form::zero()],
            conj_perm: [1, 0, 2, 3],
        }
    }

    /// Differential of a function as a 1-form in this coframe.
    pub fn d_scalar(&self, alg: &Algebra, nf: &NormalForm) -> Form {
        let mut out = Form::zero();
        for (i, x) in self.dual.iter().enumerate() {
            out.insert(1 << i, x.apply(alg, nf));
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self, alg: &Algebra, form: &Form) -> Form {
        let mut out = Form::zero();
        for (mask, c) in form.comps() {
            out = out.add(&self.d_scalar(alg, c).wedge(&Form::basis_mask(mask)));
            for (pos, j) in bits(mask).enumerate() {
                let rest = Form::basis_mask(mask & !(1 << j));
                let mut term = self.d_basis[j].wedge(&rest).scale(c);
                if pos % 2 == 1 {
                    term = term.neg();
                }
                out = out.add(&term);
            }
        }
        out
    }

    /// Conjugate of a form: conjugate coefficients, permute generators,
    /// restore ascending order with the sorting sign.
    pub fn conj(&self, alg: &Algebra, form: &Form) -> Form {
        let mut out = Form::zero();
        for (mask, c) in form.comps() {
            let seq: Vec<usize> = bits(mask).map(|i| self.conj_perm[i]).collect();
            let mut inv = 0usize;
            for a in 0..seq.len() {
                for b in (a + 1)..seq.len() {
                    if seq[a] > seq[b] {
                        inv += 1;
                    }
                }
            }
            let mut new_mask = 0u8;
            for i in &seq {
                new_mask |= 1 << i;
            }
            let mut cc = nf_conj(alg, c);
            if inv % 2 == 1 {
                cc = nf_neg(&cc);
            }
            out.insert(new_mask, cc);
        }
        out
    }
}

/// Residual of the pair-consistency check d(d(.)) on a scalar; vanishes
/// exactly when the derivation algebra is integrable.
pub fn d_squared_scalar(ctx: &FrameContext, alg: &Algebra, nf: &NormalForm) -> Form {
    ctx.d(alg, &ctx.d_scalar(alg, nf))
}

#[allow(unused)]
fn _exercise_sub(a: &Form, b: &Form) -> NormalForm {
    nf_sub(&a.coeff(0), &b.coeff(0))
}
