use std::collections::BTreeMap;

use num::complex::Complex64;

use super::atom::AtomId;
use super::deriv::nf_apply_word;
use super::normal::{Factor, NormalForm, Word};
use super::Algebra;
use crate::error::{Error, Result};

/// A point assignment: base coordinates, fiber coordinate, and complex
/// values for derivative words of atoms.  Atoms may instead carry a binding
/// (an expression in other atoms) which is differentiated on demand, so a
/// sample built for generic symbols serves concrete profiles too.
#[derive(Clone, Debug, Default)]
pub struct PointSample {
    pub coords: [f64; 3],
    pub r: f64,
    pub words: BTreeMap<(AtomId, Word), Complex64>,
    pub bindings: BTreeMap<AtomId, NormalForm>,
}

impl PointSample {
    pub fn new(coords: [f64; 3], r: f64) -> Self {
        PointSample { coords, r, words: BTreeMap::new(), bindings: BTreeMap::new() }
    }

    pub fn set(&mut self, id: AtomId, w: Word, v: Complex64) {
        self.words.insert((id, w), v);
    }

    pub fn set_plain(&mut self, id: AtomId, v: Complex64) {
        self.set(id, Word::empty(), v);
    }

    /// Bind an atom to an expression in other atoms; derivative words on the
    /// atom are then resolved by differentiating the expression.
    pub fn bind(&mut self, id: AtomId, nf: NormalForm) {
        self.bindings.insert(id, nf);
    }

    pub fn get(&self, id: AtomId, w: Word) -> Option<Complex64> {
        self.words.get(&(id, w)).copied()
    }
}

fn word_display(alg: &Algebra, id: AtomId, w: Word) -> String {
    let mut s = String::new();
    for (d, &e) in super::normal::Direction::ALL.iter().zip(w.0.iter()) {
        for _ in 0..e {
            s.push_str(d.name());
        }
    }
    if s.is_empty() {
        alg.symbols.name(id).to_string()
    } else {
        format!("{}({})", s, alg.symbols.name(id))
    }
}

fn atom_value(alg: &Algebra, sample: &PointSample, id: AtomId, w: Word) -> Result<Complex64> {
    if let Some(v) = sample.get(id, w) {
        return Ok(v);
    }
    if let Some(binding) = sample.bindings.get(&id) {
        let expanded = nf_apply_word(alg, binding, w);
        return evaluate_nf(alg, &expanded, sample);
    }
    Err(Error::MissingAssignment(word_display(alg, id, w)))
}

fn powi(v: Complex64, p: i32) -> Complex64 {
    v.powi(p)
}

/// Evaluate a normal form at a sample.
pub fn evaluate_nf(alg: &Algebra, nf: &NormalForm, sample: &PointSample) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for m in &nf.0 {
        let mut prod = m.coeff.to_c64();
        for (f, p) in &m.factors {
            let v = match f {
                Factor::Atom(w, id) => atom_value(alg, sample, *id, *w)?,
                Factor::Exp(u) => evaluate_nf(alg, u, sample)?.exp(),
                Factor::Sin(u) => evaluate_nf(alg, u, sample)?.sin(),
                Factor::Cos(u) => evaluate_nf(alg, u, sample)?.cos(),
                Factor::SumInv(s) => {
                    let v = evaluate_nf(alg, s, sample)?;
                    if v.norm() == 0.0 {
                        return Err(Error::DivisionByZero);
                    }
                    v
                }
            };
            if matches!(f, Factor::Atom(..) | Factor::SumInv(_)) && *p < 0 && v.norm() < 1e-140 {
                return Err(Error::DivisionByZero);
            }
            prod *= powi(v, *p);
        }
        total += prod;
    }
    Ok(total)
}

/// Collect every (atom, word) pair a normal form mentions, including inside
/// transcendental arguments.  Used by samplers to know what to assign.
pub fn collect_words(nf: &NormalForm, out: &mut std::collections::BTreeSet<(AtomId, Word)>) {
    for m in &nf.0 {
        for (f, _) in &m.factors {
            match f {
                Factor::Atom(w, id) => {
                    out.insert((*id, *w));
                }
                Factor::Exp(u) | Factor::Sin(u) | Factor::Cos(u) | Factor::SumInv(u) => {
                    collect_words(u, out)
                }
            }
        }
    }
}
