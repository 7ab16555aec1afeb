//! Coordinate CR structures and their admissible coframes.
//!
//! A structure is given by two coordinate 1-forms on a 3-manifold chart:
//! a complex form mu spanning the holomorphic cotangent directions and a
//! real contact form lambda, normalized so that
//!
//!   d lambda = i mu^mubar + c mu^lambda + cbar mubar^lambda,
//!   d mu     = alpha mu^lambda + beta mubar^lambda.
//!
//! The functions c, alpha, beta are the structure functions; this module
//! extracts them (and their frame-derivative words) numerically through
//! jets, validates coframes, applies gauge rescalings, and carries the
//! symbolic transformation laws of the structure functions.

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetEnv};
use crate::kernel::{
    nf_add, nf_conj, nf_deriv, nf_exp, nf_inv, nf_mul, nf_neg, nf_scale, nf_sub, Algebra, AtomId,
    Coeff, Direction, Expr, NormalForm, PointSample, Word,
};

#[derive(Clone, Debug)]
pub struct CoordinateCRStructure {
    pub name: String,
    /// Components of mu in (dx1, dx2, dx3).
    pub mu: [Expr; 3],
    /// Components of lambda in (dx1, dx2, dx3); must be real-valued.
    pub lambda: [Expr; 3],
}

fn eadd(parts: Vec<Expr>) -> Expr {
    let parts: Vec<Expr> = parts.into_iter().filter(|p| !p.is_zero_literal()).collect();
    match parts.len() {
        0 => Expr::num(0),
        1 => parts.into_iter().next().unwrap(),
        _ => Expr::add(parts),
    }
}

fn emul(parts: Vec<Expr>) -> Expr {
    if parts.iter().any(|p| p.is_zero_literal()) {
        return Expr::num(0);
    }
    match parts.len() {
        0 => Expr::num(1),
        1 => parts.into_iter().next().unwrap(),
        _ => Expr::mul(parts),
    }
}

impl CoordinateCRStructure {
    pub fn from_components(name: &str, mu: [Expr; 3], lambda: [Expr; 3]) -> Self {
        CoordinateCRStructure { name: name.to_string(), mu, lambda }
    }

    /// Parse componentwise expression strings in the coordinates x1, x2, x3.
    pub fn parse(alg: &Algebra, name: &str, mu: [&str; 3], lambda: [&str; 3]) -> Result<Self> {
        let p = |s: &str| alg.parse(s);
        Ok(CoordinateCRStructure {
            name: name.to_string(),
            mu: [p(mu[0])?, p(mu[1])?, p(mu[2])?],
            lambda: [p(lambda[0])?, p(lambda[1])?, p(lambda[2])?],
        })
    }

    /// The flat model: mu = dz, lambda = du/2 + (i/2)(z dzbar - zbar dz)
    /// with z = x1 + i x2, u = x3.  All structure functions vanish.
    pub fn heisenberg(alg: &Algebra) -> Self {
        Self::parse(alg, "heisenberg", ["1", "I", "0"], ["-x2", "x1", "0.5"])
            .expect("builtin coframe parses")
    }

    /// The flat model rewritten through a non-holomorphic gauge, so that
    /// all three structure functions are nonzero while the underlying CR
    /// geometry stays flat.
    pub fn heisenberg_gauged(alg: &Algebra) -> Self {
        let base = Self::heisenberg(alg);
        let gauge = GaugeTransform {
            tau: alg.parse("0.25*x1 + 0.1*x2*x3").expect("builtin gauge parses"),
            theta: alg.parse("0.2*x2 - 0.15*x1*x3").expect("builtin gauge parses"),
        };
        let mut st = apply_gauge(alg, &base, &gauge).expect("builtin gauge applies");
        st.name = "heisenberg-gauged".to_string();
        st
    }

    pub fn builtin(alg: &Algebra, name: &str) -> Option<Self> {
        match name {
            "heisenberg" => Some(Self::heisenberg(alg)),
            "heisenberg-gauged" => Some(Self::heisenberg_gauged(alg)),
            _ => None,
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["heisenberg", "heisenberg-gauged"]
    }
}

/// Partial derivative of a coordinate expression with respect to x_{i+1}.
/// Conjugation commutes with these derivatives because the coordinates are
/// real.
fn coord_partial(alg: &Algebra, e: &Expr, i: usize) -> Result<Expr> {
    let coords = [alg.std.x1, alg.std.x2, alg.std.x3];
    let rec = |a: &Expr| coord_partial(alg, a, i);
    Ok(match e {
        Expr::Num(_) => Expr::num(0),
        Expr::Atom(id) => {
            if *id == coords[i] {
                Expr::num(1)
            } else if coords.contains(id) {
                Expr::num(0)
            } else {
                return Err(Error::Domain(format!(
                    "{} is not a coordinate; cannot differentiate it in a chart",
                    alg.symbols.name(*id)
                )));
            }
        }
        Expr::Add(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.push(rec(p)?);
            }
            eadd(out)
        }
        Expr::Mul(parts) => {
            let mut out = Vec::new();
            for (k, _) in parts.iter().enumerate() {
                let mut term = Vec::new();
                for (j, p) in parts.iter().enumerate() {
                    if j == k {
                        term.push(rec(p)?);
                    } else {
                        term.push(p.clone());
                    }
                }
                out.push(emul(term));
            }
            eadd(out)
        }
        Expr::Pow(b, k) => {
            if *k == 0 {
                Expr::num(0)
            } else {
                emul(vec![
                    Expr::num(*k as i64),
                    Expr::pow(b.as_ref().clone(), k - 1),
                    rec(b)?,
                ])
            }
        }
        Expr::Exp(a) => emul(vec![Expr::exp(a.as_ref().clone()), rec(a)?]),
        Expr::Log(a) => emul(vec![Expr::pow(a.as_ref().clone(), -1), rec(a)?]),
        Expr::Sin(a) => emul(vec![Expr::cos(a.as_ref().clone()), rec(a)?]),
        Expr::Cos(a) => emul(vec![Expr::num(-1), Expr::sin(a.as_ref().clone()), rec(a)?]),
        Expr::Conj(a) => Expr::conj(rec(a)?),
        Expr::Deriv(..) => {
            return Err(Error::Domain(
                "frame derivatives cannot appear in coordinate expressions".into(),
            ))
        }
    })
}

fn det2(m: [[&Expr; 2]; 2]) -> Expr {
    eadd(vec![
        emul(vec![m[0][0].clone(), m[1][1].clone()]),
        emul(vec![Expr::num(-1), m[0][1].clone(), m[1][0].clone()]),
    ])
}

fn cofactor(m: &[[Expr; 3]; 3], r: usize, c: usize) -> Expr {
    let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
    let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
    let minor = det2([
        [&m[rows[0]][cols[0]], &m[rows[0]][cols[1]]],
        [&m[rows[1]][cols[0]], &m[rows[1]][cols[1]]],
    ]);
    if (r + c) % 2 == 0 {
        minor
    } else {
        emul(vec![Expr::num(-1), minor])
    }
}

fn det3(m: &[[Expr; 3]; 3]) -> Expr {
    eadd((0..3).map(|c| emul(vec![m[0][c].clone(), cofactor(m, 0, c)])).collect())
}

/// Coframe component matrix with rows (mu, mubar, lambda).
fn coframe_matrix(st: &CoordinateCRStructure) -> [[Expr; 3]; 3] {
    [
        st.mu.clone(),
        [
            Expr::conj(st.mu[0].clone()),
            Expr::conj(st.mu[1].clone()),
            Expr::conj(st.mu[2].clone()),
        ],
        st.lambda.clone(),
    ]
}

/// Components of the frame vector dual to coframe row `k`, as coordinate
/// expressions: column k of the inverse coframe matrix.
fn frame_vector_exprs(st: &CoordinateCRStructure, k: usize) -> [Expr; 3] {
    let m = coframe_matrix(st);
    let det = det3(&m);
    let dinv = Expr::pow(det, -1);
    std::array::from_fn(|i| emul(vec![cofactor(&m, k, i), dinv.clone()]))
}

#[derive(Clone, Debug)]
pub struct GaugeTransform {
    pub tau: Expr,
    pub theta: Expr,
}

impl GaugeTransform {
    pub fn parse(alg: &Algebra, tau: &str, theta: &str) -> Result<GaugeTransform> {
        Ok(GaugeTransform { tau: alg.parse(tau)?, theta: alg.parse(theta)? })
    }
}

/// Rescale the coframe by mu' = e^{tau+i theta}(mu + h lambda),
/// lambda' = e^{2 tau} lambda, with h = -i D2(tau + i theta) chosen so the
/// normalization of d lambda' survives.  The shift h is computed in the
/// chart through the dual frame of the original coframe.
pub fn apply_gauge(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    g: &GaugeTransform,
) -> Result<CoordinateCRStructure> {
    let u = eadd(vec![g.tau.clone(), emul(vec![Expr::i(), g.theta.clone()])]);
    let dbar = frame_vector_exprs(st, 1);
    let mut dbar_u = Vec::new();
    for i in 0..3 {
        dbar_u.push(emul(vec![dbar[i].clone(), coord_partial(alg, &u, i)?]));
    }
    let h = emul(vec![Expr::i().neg(), eadd(dbar_u)]);
    let scale = Expr::exp(u);
    let lscale = Expr::exp(emul(vec![Expr::num(2), g.tau.clone()]));
    let mu = std::array::from_fn(|i| {
        emul(vec![
            scale.clone(),
            eadd(vec![st.mu[i].clone(), emul(vec![h.clone(), st.lambda[i].clone()])]),
        ])
    });
    let lambda = std::array::from_fn(|i| emul(vec![lscale.clone(), st.lambda[i].clone()]));
    Ok(CoordinateCRStructure { name: format!("{}-gauged", st.name), mu, lambda })
}

/// Residual of the tangential CR equation for a candidate CR function:
/// the value of D2(f) at the point.  Vanishes for CR functions.
pub fn cr_residual(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    f: &Expr,
    point: [f64; 3],
) -> Result<Complex64> {
    let cf = CoframeJets::at(alg, st, point, 2)?;
    let fj = cf.env().expand(f)?;
    Ok(cf.frame_apply(1, &fj).value())
}

/// Jet-level view of a coframe at a point: component matrix, inverse, and
/// the derived 2-form data.
struct CoframeJets<'a> {
    alg: &'a Algebra,
    point: [f64; 3],
    order: usize,
    a: [[Jet; 3]; 3],
    e: [[Jet; 3]; 3],
}

impl<'a> CoframeJets<'a> {
    fn at(
        alg: &'a Algebra,
        st: &CoordinateCRStructure,
        point: [f64; 3],
        order: usize,
    ) -> Result<CoframeJets<'a>> {
        let env = JetEnv::new(order, point, &alg.symbols, [alg.std.x1, alg.std.x2, alg.std.x3]);
        let mu: [Jet; 3] = [
            env.expand(&st.mu[0])?,
            env.expand(&st.mu[1])?,
            env.expand(&st.mu[2])?,
        ];
        let lam: [Jet; 3] = [
            env.expand(&st.lambda[0])?,
            env.expand(&st.lambda[1])?,
            env.expand(&st.lambda[2])?,
        ];
        let mub: [Jet; 3] = [mu[0].conj(), mu[1].conj(), mu[2].conj()];
        let a = [mu, mub, lam];
        // Cofactor inverse of the 3x3 component matrix.
        let minor = |r: usize, c: usize| -> Jet {
            let rs: Vec<usize> = (0..3).filter(|&i| i != r).collect();
            let cs: Vec<usize> = (0..3).filter(|&j| j != c).collect();
            let m = a[rs[0]][cs[0]]
                .mul(&a[rs[1]][cs[1]])
                .sub(&a[rs[0]][cs[1]].mul(&a[rs[1]][cs[0]]));
            if (r + c) % 2 == 0 {
                m
            } else {
                m.neg()
            }
        };
        let mut det = Jet::zero(order);
        for c in 0..3 {
            det = det.add(&a[0][c].mul(&minor(0, c)));
        }
        if det.value().norm() < 1e-9 {
            return Err(Error::SingularCoframe(det.value().norm()));
        }
        let dinv = det.inverse()?;
        let e: [[Jet; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|k| minor(k, i).mul(&dinv)));
        Ok(CoframeJets { alg, point, order, a, e })
    }

    fn env(&self) -> JetEnv<'a> {
        JetEnv::new(
            self.order,
            self.point,
            &self.alg.symbols,
            [self.alg.std.x1, self.alg.std.x2, self.alg.std.x3],
        )
    }

    /// Exterior derivative of coframe row `row` as the triple of
    /// (dx1^dx2, dx1^dx3, dx2^dx3) components.
    fn row_d(&self, row: usize) -> [Jet; 3] {
        let w = &self.a[row];
        [
            w[1].derivative(0).sub(&w[0].derivative(1)),
            w[2].derivative(0).sub(&w[0].derivative(2)),
            w[2].derivative(1).sub(&w[1].derivative(2)),
        ]
    }

    /// Pair a 2-form (component triple) with frame vectors k and l.
    fn pair2(&self, d: &[Jet; 3], k: usize, l: usize) -> Jet {
        let x = |i: usize| &self.e[i][k];
        let y = |i: usize| &self.e[i][l];
        let term = |i: usize, j: usize, c: &Jet| c.mul(&x(i).mul(y(j)).sub(&x(j).mul(y(i))));
        term(0, 1, &d[0]).add(&term(0, 2, &d[1])).add(&term(1, 2, &d[2]))
    }

    /// Apply frame vector `k` (0 = D1, 1 = D2, 2 = D0) to a jet.
    fn frame_apply(&self, k: usize, g: &Jet) -> Jet {
        let mut acc = self.e[0][k].mul(&g.derivative(0));
        acc = acc.add(&self.e[1][k].mul(&g.derivative(1)));
        acc.add(&self.e[2][k].mul(&g.derivative(2)))
    }
}

/// Check a coframe at sample points: lambda real, component matrix
/// invertible, d lambda carrying the exact i mu^mubar normalization, and
/// d mu free of a mu^mubar component.
pub fn validate_coframe(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    points: &[[f64; 3]],
    tol: f64,
) -> Result<()> {
    for &p in points {
        let cf = CoframeJets::at(alg, st, p, 2)?;
        for i in 0..3 {
            let v = cf.a[2][i].value();
            if v.im.abs() > tol {
                return Err(Error::Domain(format!(
                    "contact form has a non-real component at {p:?}: {v}"
                )));
            }
        }
        let dlam = cf.row_d(2);
        let norm = cf.pair2(&dlam, 0, 1).value() - Complex64::new(0.0, 1.0);
        if norm.norm() > tol {
            return Err(Error::Degenerate(format!(
                "d lambda normalization residual {:.3e} at {p:?}; rescale the coframe",
                norm.norm()
            )));
        }
        let dmu = cf.row_d(0);
        let adm = cf.pair2(&dmu, 0, 1).value();
        if adm.norm() > tol {
            return Err(Error::Degenerate(format!(
                "d mu has a mu^mubar component ({:.3e}) at {p:?}",
                adm.norm()
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct StructureFunctions {
    pub sample: PointSample,
    pub c: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub normalization_residual: f64,
    pub admissibility_residual: f64,
}

/// Extract structure functions and their frame-derivative words at a point,
/// to the given word degree, optionally together with user-supplied
/// coordinate functions bound to kernel atoms.
pub fn extract_structure_functions(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    point: [f64; 3],
    r: f64,
    max_degree: usize,
) -> Result<StructureFunctions> {
    extract_with_functions(alg, st, point, r, max_degree, &[])
}

pub fn extract_with_functions(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    point: [f64; 3],
    r: f64,
    max_degree: usize,
    funcs: &[(AtomId, Expr)],
) -> Result<StructureFunctions> {
    let order = max_degree + 1;
    let cf = CoframeJets::at(alg, st, point, order)?;
    let dmu = cf.row_d(0);
    let dlam = cf.row_d(2);

    let c = cf.pair2(&dlam, 0, 2);
    let alpha = cf.pair2(&dmu, 0, 2);
    let beta = cf.pair2(&dmu, 1, 2);
    let norm_res = (cf.pair2(&dlam, 0, 1).value() - Complex64::new(0.0, 1.0)).norm();
    let adm_res = cf.pair2(&dmu, 0, 1).value().norm();
    if norm_res > 1e-7 {
        return Err(Error::Degenerate(format!(
            "d lambda normalization residual {norm_res:.3e}; the coframe is not admissible"
        )));
    }
    if adm_res > 1e-7 {
        return Err(Error::Degenerate(format!(
            "d mu mu^mubar residual {adm_res:.3e}; the coframe is not admissible"
        )));
    }

    let mut sample = PointSample::new(point, r);
    sample.set_plain(alg.std.r, Complex64::new(r, 0.0));
    sample.set_plain(alg.std.x1, Complex64::new(point[0], 0.0));
    sample.set_plain(alg.std.x2, Complex64::new(point[1], 0.0));
    sample.set_plain(alg.std.x3, Complex64::new(point[2], 0.0));

    let s = alg.std;
    let mut table: Vec<(AtomId, Jet)> = vec![
        (s.c, c.clone()),
        (s.cbar, c.conj()),
        (s.alpha, alpha.clone()),
        (s.alphabar, alpha.conj()),
        (s.beta, beta.clone()),
        (s.betabar, beta.conj()),
    ];
    let env = cf.env();
    for (id, e) in funcs {
        let j = env.expand(e)?;
        table.push((*id, j.clone()));
        let cid = alg.symbols.conj(*id);
        if cid != *id {
            table.push((cid, j.conj()));
        }
    }

    for (id, jet) in &table {
        // Canonical words D1^a D2^b D0^k act innermost-first: D0s, then D2s,
        // then D1s.
        let mut j0 = jet.clone();
        for k in 0..=max_degree {
            let mut j2 = j0.clone();
            for b in 0..=(max_degree - k) {
                let mut j1 = j2.clone();
                for a in 0..=(max_degree - k - b) {
                    sample.set(*id, Word([a as u16, b as u16, k as u16, 0]), j1.value());
                    if a < max_degree - k - b {
                        j1 = cf.frame_apply(0, &j1);
                    }
                }
                if b < max_degree - k {
                    j2 = cf.frame_apply(1, &j2);
                }
            }
            if k < max_degree {
                j0 = cf.frame_apply(2, &j0);
            }
        }
    }

    Ok(StructureFunctions {
        sample,
        c: c.value(),
        alpha: alpha.value(),
        beta: beta.value(),
        normalization_residual: norm_res,
        admissibility_residual: adm_res,
    })
}

/// Symbolic transformation laws of the structure functions under the gauge
/// mu' = e^{tau+i theta}(mu + h lambda), lambda' = e^{2 tau} lambda, with
/// h = -i D2(tau + i theta).  Expressed through the tau/theta atoms of the
/// algebra.
#[derive(Clone, Debug)]
pub struct GaugeLaws {
    pub h: NormalForm,
    pub hbar: NormalForm,
    pub c: NormalForm,
    pub alpha: NormalForm,
    pub beta: NormalForm,
}

pub fn gauge_laws(alg: &Algebra) -> GaugeLaws {
    let s = alg.std;
    let u = nf_add(&alg.atom(s.tau), &nf_scale(&alg.atom(s.theta), &Coeff::i()));
    let h = nf_scale(&nf_deriv(alg, &u, Direction::D2), &-&Coeff::i());
    let hbar = nf_conj(alg, &h);
    let exp_mu = nf_exp(&nf_neg(&u));
    let exp_lam = nf_exp(&nf_scale(&alg.atom(s.tau), &Coeff::from_int(-2)));

    // c' = e^{-tau-i theta} (c - 2i hbar + D1 u)
    let c_inner = nf_add(
        &nf_add(&alg.atom(s.c), &nf_scale(&hbar, &Coeff::complex_ratio(0, 1, -2, 1))),
        &nf_deriv(alg, &u, Direction::D1),
    );
    let c = nf_mul(&exp_mu, &c_inner);

    // alpha' = e^{-2 tau} (alpha - D0 u + h D1 u + D1 h + h c)
    let a_inner = nf_add(
        &nf_sub(&alg.atom(s.alpha), &nf_deriv(alg, &u, Direction::D0)),
        &nf_add(
            &nf_mul(&h, &nf_deriv(alg, &u, Direction::D1)),
            &nf_add(&nf_deriv(alg, &h, Direction::D1), &nf_mul(&h, &alg.atom(s.c))),
        ),
    );
    let alpha = nf_mul(&exp_lam, &a_inner);

    // beta' = e^{-2 tau + 2i theta} (beta + h D2 u + D2 h + h cbar)
    let b_inner = nf_add(
        &nf_add(&alg.atom(s.beta), &nf_mul(&h, &nf_deriv(alg, &u, Direction::D2))),
        &nf_add(&nf_deriv(alg, &h, Direction::D2), &nf_mul(&h, &alg.atom(s.cbar))),
    );
    let exp_beta = nf_exp(&nf_add(
        &nf_scale(&alg.atom(s.tau), &Coeff::from_int(-2)),
        &nf_scale(&alg.atom(s.theta), &Coeff::complex_ratio(0, 1, 2, 1)),
    ));
    let beta = nf_mul(&exp_beta, &b_inner);

    GaugeLaws { h, hbar, c, alpha, beta }
}

/// Residual of the defining equation of a canonical section: for psi a CR
/// density, D2(psi) * psi^{-1} + cbar must vanish.
pub fn canonical_section_residual(alg: &Algebra, psi: &NormalForm) -> Result<NormalForm> {
    if psi.is_zero() {
        return Err(Error::Domain("a canonical section must be nonvanishing".into()));
    }
    let d = nf_deriv(alg, psi, Direction::D2);
    Ok(nf_add(&nf_mul(&d, &nf_inv(psi)?), &alg.atom(alg.std.cbar)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Vec<[f64; 3]> {
        vec![[0.0, 0.0, 0.0], [0.3, -0.2, 0.5], [-0.7, 0.4, -0.1], [0.15, 0.65, 0.9]]
    }

    #[test]
    fn heisenberg_is_admissible_and_flat() {
        let alg = Algebra::generic();
        let st = CoordinateCRStructure::heisenberg(&alg);
        validate_coframe(&alg, &st, &pts(), 1e-9).unwrap();
        for p in pts() {
            let sf = extract_structure_functions(&alg, &st, p, 0.0, 2).unwrap();
            assert!(sf.c.norm() < 1e-10, "c = {}", sf.c);
            assert!(sf.alpha.norm() < 1e-10);
            assert!(sf.beta.norm() < 1e-10);
            // First derivative words vanish too.
            let w = Word([1, 0, 0, 0]);
            assert!(sf.sample.get(alg.std.c, w).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn heisenberg_cr_functions() {
        let alg = Algebra::generic();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let z = alg.parse("x1 + I*x2").unwrap();
        let w = alg.parse("x3 + I*(x1^2 + x2^2)").unwrap();
        let zbar = alg.parse("x1 - I*x2").unwrap();
        for p in pts() {
            assert!(cr_residual(&alg, &st, &z, p).unwrap().norm() < 1e-10);
            assert!(cr_residual(&alg, &st, &w, p).unwrap().norm() < 1e-10);
        }
        let res = cr_residual(&alg, &st, &zbar, [0.3, 0.1, 0.2]).unwrap();
        assert!((res - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn gauged_coframe_stays_admissible() {
        let alg = Algebra::generic();
        let st = CoordinateCRStructure::heisenberg_gauged(&alg);
        validate_coframe(&alg, &st, &pts(), 1e-8).unwrap();
        // The gauge was chosen non-holomorphic, so the structure functions
        // must actually show up.
        let sf = extract_structure_functions(&alg, &st, [0.3, -0.2, 0.5], 0.0, 2).unwrap();
        assert!(sf.c.norm() > 1e-3, "expected nonzero c, got {}", sf.c);
    }

    #[test]
    fn transformation_laws_match_numeric_extraction() {
        let alg = Algebra::generic();
        let base = CoordinateCRStructure::heisenberg(&alg);
        let gauge = GaugeTransform::parse(&alg, "0.25*x1 + 0.1*x2*x3", "0.2*x2 - 0.15*x1*x3")
            .unwrap();
        let gauged = apply_gauge(&alg, &base, &gauge).unwrap();
        let laws = gauge_laws(&alg);
        for p in pts() {
            let funcs = vec![(alg.std.tau, gauge.tau.clone()), (alg.std.theta, gauge.theta.clone())];
            let un = extract_with_functions(&alg, &base, p, 0.0, 3, &funcs).unwrap();
            let pr = extract_structure_functions(&alg, &gauged, p, 0.0, 1).unwrap();
            let c_pred = crate::kernel::evaluate_nf(&alg, &laws.c, &un.sample).unwrap();
            let a_pred = crate::kernel::evaluate_nf(&alg, &laws.alpha, &un.sample).unwrap();
            let b_pred = crate::kernel::evaluate_nf(&alg, &laws.beta, &un.sample).unwrap();
            assert!((c_pred - pr.c).norm() < 1e-8, "c mismatch at {p:?}: {c_pred} vs {}", pr.c);
            assert!(
                (a_pred - pr.alpha).norm() < 1e-8,
                "alpha mismatch at {p:?}: {a_pred} vs {}",
                pr.alpha
            );
            assert!((b_pred - pr.beta).norm() < 1e-8, "beta mismatch at {p:?}");
        }
    }

    #[test]
    fn gauge_composition_in_sequence_matches_sum() {
        // Constant gauges compose additively; h vanishes for them.
        let alg = Algebra::generic();
        let base = CoordinateCRStructure::heisenberg_gauged(&alg);
        let g1 = GaugeTransform::parse(&alg, "0.3", "0.7").unwrap();
        let g2 = GaugeTransform::parse(&alg, "-0.1", "0.4").unwrap();
        let g12 = GaugeTransform::parse(&alg, "0.2", "1.1").unwrap();
        let st1 = apply_gauge(&alg, &apply_gauge(&alg, &base, &g1).unwrap(), &g2).unwrap();
        let st2 = apply_gauge(&alg, &base, &g12).unwrap();
        for p in pts() {
            let a = extract_structure_functions(&alg, &st1, p, 0.0, 1).unwrap();
            let b = extract_structure_functions(&alg, &st2, p, 0.0, 1).unwrap();
            assert!((a.c - b.c).norm() < 1e-9);
            assert!((a.alpha - b.alpha).norm() < 1e-9);
            assert!((a.beta - b.beta).norm() < 1e-9);
        }
    }

    #[test]
    fn canonical_section_residual_shapes() {
        let alg = Algebra::generic();
        let one = NormalForm::one();
        let res = canonical_section_residual(&alg, &one).unwrap();
        assert_eq!(res, alg.atom(alg.std.cbar));
        assert!(canonical_section_residual(&alg, &NormalForm::zero()).is_err());
    }

    #[test]
    fn misnormalized_coframe_is_rejected() {
        let alg = Algebra::generic();
        // Doubling lambda breaks the d lambda = i mu^mubar normalization.
        let st = CoordinateCRStructure::parse(
            &alg,
            "bad",
            ["1", "I", "0"],
            ["-2*x2", "2*x1", "1"],
        )
        .unwrap();
        let err = validate_coframe(&alg, &st, &[[0.1, 0.2, 0.3]], 1e-9);
        assert!(err.is_err());
        // A complex lambda is rejected as well.
        let st2 = CoordinateCRStructure::parse(
            &alg,
            "complex-lambda",
            ["1", "I", "0"],
            ["-x2", "x1 + 0.2*I", "0.5"],
        )
        .unwrap();
        assert!(validate_coframe(&alg, &st2, &[[0.1, 0.2, 0.3]], 1e-9).is_err());
    }

    #[test]
    fn degenerate_coframe_reports_singularity() {
        let alg = Algebra::generic();
        let st = CoordinateCRStructure::parse(&alg, "sing", ["1", "I", "0"], ["0", "0", "x1"])
            .unwrap();
        match validate_coframe(&alg, &st, &[[0.0, 0.5, 0.2]], 1e-9) {
            Err(Error::SingularCoframe(_)) => {}
            other => panic!("expected singular coframe, got {other:?}"),
        }
    }
}
