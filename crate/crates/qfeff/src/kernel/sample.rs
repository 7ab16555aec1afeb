//! Random point samples that respect conjugate-consistency.
//!
//! A complex pair (f, fbar) has one free side: every canonical word on the
//! atom with the smaller id gets an independent random value, and words on
//! the partner are derived through the conjugation engine, corrections
//! included.  A real atom is its own partner: a word strictly below its
//! mirror (D1/D2 exponents swapped) is free, the mirrored word is derived,
//! and a self-mirrored word has a free real part while its imaginary part is
//! pinned by the conjugation constraint.  Every derived value only needs
//! values of strictly smaller derivative degree, so the recursion grounds
//! out.

use std::collections::BTreeSet;

use num::complex::Complex64;
use rand::Rng;

use super::atom::AtomId;
use super::deriv::{conj_word_atom, nf_atom};
use super::eval::{collect_words, evaluate_nf, PointSample};
use super::normal::{nf_sub, NormalForm, Word};
use super::Algebra;
use crate::error::{Error, Result};

/// Magnitudes are kept inside [0.3, 1.2] so that the usual denominators
/// (powers of conformal factors, cosine profiles on |r+s| < 2.4) stay away
/// from zero without biasing signs.
fn draw_part(rng: &mut impl Rng) -> f64 {
    let mag = rng.gen_range(0.3..1.2);
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn draw_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(draw_part(rng), draw_part(rng))
}

fn ensure_words(
    alg: &Algebra,
    sample: &mut PointSample,
    nf: &NormalForm,
    rng: &mut impl Rng,
    depth: u32,
) -> Result<()> {
    let mut needed = BTreeSet::new();
    collect_words(nf, &mut needed);
    for (id, w) in needed {
        ensure_value(alg, sample, id, w, rng, depth)?;
    }
    Ok(())
}

fn ensure_value(
    alg: &Algebra,
    sample: &mut PointSample,
    id: AtomId,
    w: Word,
    rng: &mut impl Rng,
    depth: u32,
) -> Result<()> {
    if depth > 64 {
        return Err(Error::Domain("sampler recursion too deep".into()));
    }
    if sample.get(id, w).is_some() || sample.bindings.contains_key(&id) {
        return Ok(());
    }
    let cid = alg.symbols.conj(id);
    if id != cid {
        if id < cid {
            sample.set(id, w, draw_complex(rng));
        } else {
            // Derived side: value = conj of the conjugated word's value.
            let nfc = conj_word_atom(alg, w, id);
            ensure_words(alg, sample, &nfc, rng, depth + 1)?;
            let v = evaluate_nf(alg, &nfc, sample)?;
            sample.set(id, w, v.conj());
        }
        return Ok(());
    }
    // Real atom.
    let m = w.mirror();
    if w < m {
        sample.set(id, w, draw_complex(rng));
    } else if w > m {
        let nfc = conj_word_atom(alg, w, id);
        ensure_words(alg, sample, &nfc, rng, depth + 1)?;
        let v = evaluate_nf(alg, &nfc, sample)?;
        sample.set(id, w, v.conj());
    } else {
        // Self-mirrored word: conj(v) = v + C with C of lower degree, so
        // Im(v) is determined and Re(v) is free.
        let nfc = conj_word_atom(alg, w, id);
        let corrections = nf_sub(&nfc, &nf_atom(alg, w, id));
        ensure_words(alg, sample, &corrections, rng, depth + 1)?;
        let c_val = evaluate_nf(alg, &corrections, sample)?;
        let y = Complex64::new(0.0, 0.5) * c_val;
        if y.im.abs() > 1e-7 * (1.0 + c_val.norm()) {
            return Err(Error::Domain(format!(
                "inconsistent conjugation constraint for {}: residual {:.3e}",
                alg.symbols.name(id),
                y.im.abs()
            )));
        }
        sample.set(id, w, Complex64::new(draw_part(rng), y.re));
    }
    Ok(())
}

/// Build a random sample assigning every listed word (and whatever the
/// conjugation constraints pull in).  Bound atoms are not sampled; instead
/// the words the evaluation will request from their expansions are ensured
/// up front.
pub fn random_sample_with(
    alg: &Algebra,
    needed: &BTreeSet<(AtomId, Word)>,
    bindings: &[(AtomId, NormalForm)],
    rng: &mut impl Rng,
) -> Result<PointSample> {
    let coords = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let r = rng.gen_range(-1.2..1.2);
    let mut sample = PointSample::new(coords, r);
    sample.set(alg.std.r, Word::empty(), Complex64::new(r, 0.0));
    for (k, id) in [alg.std.x1, alg.std.x2, alg.std.x3].into_iter().enumerate() {
        sample.set(id, Word::empty(), Complex64::new(coords[k], 0.0));
    }
    for (id, nf) in bindings {
        sample.bind(*id, nf.clone());
    }
    for (id, w) in needed {
        if let Some(binding) = sample.bindings.get(id).cloned() {
            let expanded = super::deriv::nf_apply_word(alg, &binding, *w);
            ensure_words(alg, &mut sample, &expanded, rng, 0)?;
        } else {
            ensure_value(alg, &mut sample, *id, *w, rng, 0)?;
        }
    }
    Ok(sample)
}

pub fn random_sample(
    alg: &Algebra,
    needed: &BTreeSet<(AtomId, Word)>,
    rng: &mut impl Rng,
) -> Result<PointSample> {
    random_sample_with(alg, needed, &[], rng)
}

/// Random sample covering all words mentioned by the given normal forms.
pub fn sample_for(
    alg: &Algebra,
    nfs: &[&NormalForm],
    rng: &mut impl Rng,
) -> Result<PointSample> {
    let mut needed = BTreeSet::new();
    for nf in nfs {
        collect_words(nf, &mut needed);
    }
    random_sample(alg, &needed, rng)
}
