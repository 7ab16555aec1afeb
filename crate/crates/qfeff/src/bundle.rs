//! Lorentzian metrics on the circle bundle over a CR structure.
//!
//! The family considered here is
//!
//!   g = 2 P^2 [ mu mubar + lambda (dr + W mu + Wbar mubar + H lambda) ]
//!
//! with P nonvanishing and real, H real, and the twist coefficient tied to
//! the CR data by W = i x e^{-i r} - (i/3) c for a function x on the base.
//! The adapted coframe is theta^1 = P mu, theta^2 = P mubar,
//! theta^3 = P lambda, theta^4 = P (dr + W mu + Wbar mubar + H lambda), in
//! which g = 2 theta^1 theta^2 + 2 theta^3 theta^4.

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::{Form, FrameContext, FrameVector};
use crate::kernel::{
    nf_add, nf_conj, nf_deriv, nf_exp, nf_mul, nf_neg, nf_pow, nf_scale, nf_sub, Algebra, Coeff,
    Direction, NormalForm,
};

/// Gram matrix of the null coframe: g(e_i, e_j).
pub const GRAM: [[i64; 4]; 4] = [
    [0, 1, 0, 0],
    [1, 0, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
];

/// Index permutation that raises or lowers a single frame index (the Gram
/// matrix is its own inverse and a permutation).
pub const GRAM_SWAP: [usize; 4] = [1, 0, 3, 2];

#[derive(Clone, Debug)]
pub struct BundleMetric {
    /// theta^i in the (mu, mubar, lambda, dr) coframe.
    pub theta: [Form; 4],
    /// Frame vectors e_i dual to theta^i, through the kernel derivations.
    pub frame: [FrameVector; 4],
    pub p: NormalForm,
    pub w: NormalForm,
    pub h: NormalForm,
}

/// The twist coefficient W = i x e^{-i r} - (i/3) c for given x.
pub fn twist_from(alg: &Algebra, x: &NormalForm) -> NormalForm {
    let s = alg.std;
    let phase = nf_exp(&nf_scale(&alg.atom(s.r), &-&Coeff::i()));
    nf_sub(
        &nf_scale(&nf_mul(x, &phase), &Coeff::i()),
        &nf_scale(&alg.atom(s.c), &Coeff::complex_ratio(0, 1, 1, 3)),
    )
}

/// Assemble the coframe and frame for data (P, W, H).
pub fn metric_from_data(
    alg: &Algebra,
    p: &NormalForm,
    w: &NormalForm,
    h: &NormalForm,
) -> Result<BundleMetric> {
    if p.is_zero() {
        return Err(Error::Degenerate("the fiber profile P must be nonvanishing".into()));
    }
    let pinv = nf_pow(p, -1)?;
    let wbar = nf_conj(alg, w);

    let mut theta4 = Form::basis(3);
    theta4.insert(0b0001, w.clone());
    theta4.insert(0b0010, wbar.clone());
    theta4.insert(0b0100, h.clone());

    let theta = [
        Form::basis(0).scale(p),
        Form::basis(1).scale(p),
        Form::basis(2).scale(p),
        theta4.scale(p),
    ];

    let coeff = |v: &NormalForm| nf_neg(&nf_mul(&pinv, v));
    let frame = [
        FrameVector { terms: vec![(pinv.clone(), Direction::D1), (coeff(w), Direction::Dr)] },
        FrameVector { terms: vec![(pinv.clone(), Direction::D2), (coeff(&wbar), Direction::Dr)] },
        FrameVector { terms: vec![(pinv.clone(), Direction::D0), (coeff(h), Direction::Dr)] },
        FrameVector { terms: vec![(pinv.clone(), Direction::Dr)] },
    ];

    Ok(BundleMetric { theta, frame, p: p.clone(), w: w.clone(), h: h.clone() })
}

/// The generic member: P, x, H as free symbols.
pub fn build_quasi_fefferman(alg: &Algebra) -> BundleMetric {
    let s = alg.std;
    let p = alg.atom(s.p);
    let w = twist_from(alg, &alg.atom(s.x));
    let h = alg.atom(s.hh);
    metric_from_data(alg, &p, &w, &h).expect("symbolic P is nonzero")
}

/// The fiber coefficient of the distinguished member: picked so the metric
/// reproduces the canonical circle-bundle metric of the CR structure.
pub fn fefferman_h(alg: &Algebra) -> NormalForm {
    let s = alg.std;
    let dc = nf_add(
        &nf_deriv(alg, &alg.atom(s.cbar), Direction::D1),
        &nf_deriv(alg, &alg.atom(s.c), Direction::D2),
    );
    let asym = nf_sub(&alg.atom(s.alpha), &alg.atom(s.alphabar));
    nf_add(
        &nf_scale(&dc, &Coeff::from_ratio(-1, 12)),
        &nf_scale(&asym, &Coeff::complex_ratio(0, 1, 1, 4)),
    )
}

/// An algebra in which the fiber profile is covariantly constant, as the
/// distinguished member requires (its value 1/sqrt(2) is bound numerically
/// at evaluation time).
pub fn fefferman_algebra() -> Algebra {
    let mut alg = Algebra::generic();
    alg.install_constant(alg.std.p);
    alg
}

/// The distinguished member: x = 0, constant profile, H forced by the CR
/// data.  Expects an algebra where P is constant, see [`fefferman_algebra`].
pub fn build_fefferman(alg: &Algebra) -> BundleMetric {
    let s = alg.std;
    debug_assert!(
        alg.defined(s.p).is_some_and(|t| t.iter().all(NormalForm::is_zero)),
        "the distinguished member needs a constant fiber profile"
    );
    let p = alg.atom(s.p);
    let w = twist_from(alg, &NormalForm::zero());
    metric_from_data(alg, &p, &w, &fefferman_h(alg)).expect("symbolic P is nonzero")
}

/// The metric as a symmetric matrix over the (mu, mubar, lambda, dr)
/// coframe, with the convention g = sum G_ij theta^i (x) theta^j.
pub fn metric_matrix(m: &BundleMetric) -> [[NormalForm; 4]; 4] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut acc = NormalForm::zero();
            for (i, row) in GRAM.iter().enumerate() {
                for (j, &g) in row.iter().enumerate() {
                    if g == 0 {
                        continue;
                    }
                    let term = nf_mul(&m.theta[i].coeff(1 << a), &m.theta[j].coeff(1 << b));
                    acc = nf_add(&acc, &nf_scale(&term, &Coeff::from_int(g)));
                }
            }
            acc
        })
    })
}

/// The (mu, mubar, lambda, dr) generators written in the theta coframe.
pub fn mu_basis_in_theta(alg: &Algebra, m: &BundleMetric) -> Result<[Form; 4]> {
    let pinv = nf_pow(&m.p, -1)?;
    let wbar = nf_conj(alg, &m.w);
    let mut dr = Form::basis(3).scale(&pinv);
    dr.insert(0b0001, nf_neg(&nf_mul(&m.w, &pinv)));
    dr.insert(0b0010, nf_neg(&nf_mul(&wbar, &pinv)));
    dr.insert(0b0100, nf_neg(&nf_mul(&m.h, &pinv)));
    Ok([
        Form::basis(0).scale(&pinv),
        Form::basis(1).scale(&pinv),
        Form::basis(2).scale(&pinv),
        dr,
    ])
}

/// Structure constants [e_i, e_j] = C^k_{ij} e_k, antisymmetric in (i, j).
#[derive(Clone, Debug)]
pub struct StructureConstants {
    pub c: [[[NormalForm; 4]; 4]; 4],
    /// d theta^k expressed in the theta coframe.
    pub d_theta: [Form; 4],
}

impl StructureConstants {
    pub fn get(&self, k: usize, i: usize, j: usize) -> &NormalForm {
        &self.c[k][i][j]
    }
}

pub fn structure_constants(alg: &Algebra, m: &BundleMetric) -> Result<StructureConstants> {
    let mu_ctx = FrameContext::mu_basis(alg);
    let images = mu_basis_in_theta(alg, m)?;
    let mut c: [[[NormalForm; 4]; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| NormalForm::zero())));
    let mut d_theta: [Form; 4] = std::array::from_fn(|_| Form::zero());
    for k in 0..4 {
        let d_mu = mu_ctx.d(alg, &m.theta[k]);
        let d_th = d_mu.change_basis(&images);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let comp = d_th.coeff((1 << i) | (1 << j));
                c[k][i][j] = nf_neg(&comp);
                c[k][j][i] = comp;
            }
        }
        d_theta[k] = d_th;
    }
    Ok(StructureConstants { c, d_theta })
}

/// Frame context of the theta coframe (for exterior calculus downstream of
/// the structure constants).
pub fn theta_context(m: &BundleMetric, sc: &StructureConstants) -> FrameContext {
    FrameContext {
        dual: m.frame.clone(),
        d_basis: sc.d_theta.clone(),
        conj_perm: [1, 0, 2, 3],
    }
}

/// The two 4-form obstructions to shear-freeness of the fiber congruence:
/// the top components of d theta^3 ^ theta^1 ^ theta^3 and
/// d theta^1 ^ theta^1 ^ theta^3.  Both vanish for the family built here.
pub fn shear_free_residual(alg: &Algebra, theta: &[Form; 4]) -> (NormalForm, NormalForm) {
    let ctx = FrameContext::mu_basis(alg);
    let top = 0b1111;
    let r1 = ctx.d(alg, &theta[2]).wedge(&theta[0]).wedge(&theta[2]).coeff(top);
    let r2 = ctx.d(alg, &theta[0]).wedge(&theta[0]).wedge(&theta[2]).coeff(top);
    (r1, r2)
}

/// Transformation of the metric data under the gauge
/// mu' = e^{tau+i theta}(mu + h lambda), lambda' = e^{2 tau} lambda,
/// expressed through the tau/theta atoms: the primed data describing the
/// same metric over the rescaled coframe, and the fiber shift.
#[derive(Clone, Debug)]
pub struct ParameterTransform {
    pub p: NormalForm,
    pub x: NormalForm,
    pub h: NormalForm,
    pub w: NormalForm,
    pub c: NormalForm,
    /// r' = r - (2/3) theta.
    pub r_offset: NormalForm,
}

pub fn transform_parameters(alg: &Algebra) -> ParameterTransform {
    let s = alg.std;
    let laws = crate::cr::gauge_laws(alg);
    let tau = alg.atom(s.tau);
    let theta = alg.atom(s.theta);

    let p = nf_mul(&nf_exp(&nf_neg(&tau)), &alg.atom(s.p));
    // x' = e^{-tau - (5/3) i theta} x.
    let x_arg = nf_add(&nf_neg(&tau), &nf_scale(&theta, &Coeff::complex_ratio(0, 1, -5, 3)));
    let x = nf_mul(&nf_exp(&x_arg), &alg.atom(s.x));

    // W' = i x' e^{-i r'} - (i/3) c' with r' = r - (2/3) theta.
    let rp_phase = nf_exp(&nf_add(
        &nf_scale(&alg.atom(s.r), &-&Coeff::i()),
        &nf_scale(&theta, &Coeff::complex_ratio(0, 1, 2, 3)),
    ));
    let w = nf_sub(
        &nf_scale(&nf_mul(&x, &rp_phase), &Coeff::i()),
        &nf_scale(&laws.c, &Coeff::complex_ratio(0, 1, 1, 3)),
    );

    // H' = e^{-2 tau} (H - |h|^2 - f h W' - conj(f h W') + (2/3) D0 theta)
    // with f = e^{tau + i theta}.
    let f = nf_exp(&nf_add(&tau, &nf_scale(&theta, &Coeff::i())));
    let fhw = nf_mul(&nf_mul(&f, &laws.h), &w);
    let inner = nf_add(
        &nf_sub(
            &nf_sub(&alg.atom(s.hh), &nf_mul(&laws.h, &laws.hbar)),
            &nf_add(&fhw, &nf_conj(alg, &fhw)),
        ),
        &nf_scale(&nf_deriv(alg, &theta, Direction::D0), &Coeff::from_ratio(2, 3)),
    );
    let h = nf_mul(&nf_exp(&nf_scale(&tau, &Coeff::from_int(-2))), &inner);

    let r_offset = nf_scale(&theta, &Coeff::from_ratio(-2, 3));
    ParameterTransform { p, x, h, w, c: laws.c, r_offset }
}

/// A numeric null frame adapted to a metric matrix: k the given null
/// vector, l null with g(l, k) = 1, and a complex spacelike leg e1 with
/// g(e1, conj e1) = 1, all orthogonality residuals within `tol`.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    pub k: [Complex64; 4],
    pub l: [Complex64; 4],
    pub e1: [Complex64; 4],
    pub gram_residual: f64,
}

fn pair(g: &[[f64; 4]; 4], x: &[Complex64; 4], y: &[Complex64; 4]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..4 {
        for b in 0..4 {
            acc += g[a][b] * x[a] * y[b];
        }
    }
    acc
}

/// Convert the metric matrix over the complex (mu, mubar, lambda, dr)
/// coframe into the real symmetric matrix over (Re, Im, lambda, dr)
/// directions: a real tangent vector a v1 + conj(a) v2 + t v3 + s v4 is
/// parametrized by (Re a, Im a, t, s).
pub fn complex_frame_to_real(g: &[[Complex64; 4]; 4], tol: f64) -> Result<[[f64; 4]; 4]> {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // Columns: the complex frame coefficients of the four real directions.
    let s = [
        [one, one, zero, zero],
        [i, -i, zero, zero],
        [zero, zero, one, zero],
        [zero, zero, zero, one],
    ];
    let mut out = [[0.0f64; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = zero;
            for c in 0..4 {
                for d in 0..4 {
                    acc += s[a][c] * g[c][d] * s[b][d];
                }
            }
            if acc.im.abs() > tol {
                return Err(Error::Degenerate(format!(
                    "real metric entry ({a},{b}) has imaginary part {}",
                    acc.im
                )));
            }
            out[a][b] = acc.re;
        }
    }
    Ok(out)
}

pub fn adapt_frame(g: &[[f64; 4]; 4], k: &[f64; 4], tol: f64) -> Result<AdaptedFrame> {
    let kc: [Complex64; 4] = std::array::from_fn(|a| Complex64::new(k[a], 0.0));
    let kk = pair(g, &kc, &kc);
    if kk.norm() > tol {
        return Err(Error::NotNull(kk.norm()));
    }

    // Deterministic transversal: the standard basis vector with the largest
    // pairing against k.
    let mut best = 0;
    let mut best_val = 0.0;
    for a in 0..4 {
        let mut e = [Complex64::new(0.0, 0.0); 4];
        e[a] = Complex64::new(1.0, 0.0);
        let v = pair(g, &kc, &e).norm();
        if v > best_val {
            best_val = v;
            best = a;
        }
    }
    if best_val < tol {
        return Err(Error::Degenerate("the null vector pairs with nothing; metric degenerate".into()));
    }
    let mut v = [Complex64::new(0.0, 0.0); 4];
    v[best] = Complex64::new(1.0, 0.0);
    let gkv = pair(g, &kc, &v);
    let v: [Complex64; 4] = std::array::from_fn(|a| v[a] / gkv);
    let vv = pair(g, &v, &v);
    let l: [Complex64; 4] = std::array::from_fn(|a| v[a] - 0.5 * vv * kc[a]);

    // Project the standard basis onto the orthogonal complement of (k, l);
    // the complement is spacelike, but single projected legs may still be
    // null, so pairwise sums and differences join the candidate pool.
    let mut legs: Vec<[Complex64; 4]> = Vec::new();
    for a in 0..4 {
        let mut e = [Complex64::new(0.0, 0.0); 4];
        e[a] = Complex64::new(1.0, 0.0);
        let ek = pair(g, &e, &kc);
        let el = pair(g, &e, &l);
        // Subtract the null-plane part: components along k and l.
        let proj: [Complex64; 4] = std::array::from_fn(|b| e[b] - el * kc[b] - ek * l[b]);
        if proj.iter().any(|z| z.norm() > 1e-9) {
            legs.push(proj);
        }
    }
    let mut candidates = legs.clone();
    for a in 0..legs.len() {
        for b in (a + 1)..legs.len() {
            candidates.push(std::array::from_fn(|i| legs[a][i] + legs[b][i]));
            candidates.push(std::array::from_fn(|i| legs[a][i] - legs[b][i]));
        }
    }
    let mut eps1: Option<[Complex64; 4]> = None;
    let mut eps2: Option<[Complex64; 4]> = None;
    for cand in &candidates {
        let cand = match &eps1 {
            None => *cand,
            Some(e1) => {
                let d = pair(g, cand, e1);
                std::array::from_fn(|b| cand[b] - d * e1[b])
            }
        };
        let n2 = pair(g, &cand, &cand);
        if n2.re > 1e-8 {
            let unit: [Complex64; 4] = std::array::from_fn(|b| cand[b] / n2.re.sqrt());
            if eps1.is_none() {
                eps1 = Some(unit);
            } else {
                eps2 = Some(unit);
                break;
            }
        }
    }
    let eps1 = eps1.ok_or_else(|| Error::Degenerate("could not span the spacelike complement".into()))?;
    let eps2: [Complex64; 4] =
        eps2.ok_or_else(|| Error::Degenerate("spacelike complement is degenerate".into()))?;

    let inv_sqrt2 = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
    let i = Complex64::new(0.0, 1.0);
    let e1: [Complex64; 4] = std::array::from_fn(|b| inv_sqrt2 * (eps1[b] - i * eps2[b]));
    let e2: [Complex64; 4] = std::array::from_fn(|b| e1[b].conj());

    // Residuals of the defining relations.
    let mut res: f64 = 0.0;
    let checks = [
        (pair(g, &l, &l), Complex64::new(0.0, 0.0)),
        (pair(g, &l, &kc), Complex64::new(1.0, 0.0)),
        (pair(g, &kc, &kc), Complex64::new(0.0, 0.0)),
        (pair(g, &e1, &e2), Complex64::new(1.0, 0.0)),
        (pair(g, &e1, &e1), Complex64::new(0.0, 0.0)),
        (pair(g, &e1, &kc), Complex64::new(0.0, 0.0)),
        (pair(g, &e1, &l), Complex64::new(0.0, 0.0)),
    ];
    for (got, want) in checks {
        res = res.max((got - want).norm());
    }
    Ok(AdaptedFrame { k: kc, l, e1, gram_residual: res })
}
