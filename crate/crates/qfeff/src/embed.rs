//! Embeddability checks built on the bundle curvature: the radial profile
//! of the conformal factor, the section condition tying the twist to the
//! profile data, the coframe invariant t and its PDE, the distinguished
//! connection coefficients, the exact-coframe replacement form, and the
//! converse construction that assembles metric data from a closed section
//! of the canonical bundle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::complex::Complex64;
use serde::Serialize;

use crate::bundle::{
    build_quasi_fefferman, shear_free_residual, structure_constants, BundleMetric,
};
use crate::cr::{canonical_section_residual, extract_with_functions, CoordinateCRStructure};
use crate::curvature::{alpha_plane_ricci, curvature, levi_civita, Connection};
use crate::error::{Error, Result};
use crate::forms::{Form, FrameContext};
use crate::kernel::{
    collect_words, evaluate_nf, nf_add, nf_conj, nf_cos_pow, nf_deriv, nf_exp, nf_mul, nf_neg,
    nf_pow, nf_scale, nf_sub, Algebra, AtomId, Coeff, Direction, Expr, NormalForm, PointSample,
};

/// Word degree the point extractor fills: the curvature reaches three frame
/// derivatives into the metric data, and the twist binding nests one more
/// derivative of the profile functions inside.
pub const EXTRACTION_DEGREE: usize = 4;

/// The radial profile P = a / cos((r + s)/2) over the amplitude and phase
/// atoms.
pub fn p_profile(alg: &Algebra) -> Result<NormalForm> {
    let sa = alg.std;
    let half = Coeff::from_ratio(1, 2);
    let arg = nf_scale(&nf_add(&alg.atom(sa.r), &alg.atom(sa.s)), &half);
    Ok(nf_mul(&alg.atom(sa.a), &nf_cos_pow(&arg, -1)?))
}

/// Left side of the fiber ODE the profile solves:
/// -4 P P_rr + 8 P_r^2 + P^2.
pub fn radial_equation_residual(alg: &Algebra, p: &NormalForm) -> NormalForm {
    let pr = nf_deriv(alg, p, Direction::Dr);
    let prr = nf_deriv(alg, &pr, Direction::Dr);
    nf_add(
        &nf_add(
            &nf_scale(&nf_mul(p, &prr), &Coeff::from_int(-4)),
            &nf_scale(&nf_mul(&pr, &pr), &Coeff::from_int(8)),
        ),
        &nf_mul(p, p),
    )
}

/// Evaluate the profile and its ODE residual at numbers.  Errors when r + s
/// falls within 1e-6 of an odd multiple of pi, where the profile has a pole.
pub fn p_profile_at(alg: &Algebra, a: f64, s: f64, r: f64) -> Result<(f64, f64)> {
    let u = r + s;
    let k = ((u / PI - 1.0) / 2.0).round();
    let dist = (u - (2.0 * k + 1.0) * PI).abs();
    if dist < 1e-6 {
        return Err(Error::Domain(format!(
            "profile pole: r + s = {u} lies within 1e-6 of an odd multiple of pi"
        )));
    }
    let profile = p_profile(alg)?;
    let residual = radial_equation_residual(alg, &profile);
    let mut sample = PointSample::new([0.0; 3], r);
    sample.set_plain(alg.std.a, a.into());
    sample.set_plain(alg.std.s, s.into());
    sample.set_plain(alg.std.r, r.into());
    let pv = evaluate_nf(alg, &profile, &sample)?;
    let rv = evaluate_nf(alg, &residual, &sample)?;
    Ok((pv.re, rv.re))
}

/// Residual of the section condition:
/// D1 loga2 + i D1 s - 2 x e^{i s} + (2/3) c.
pub fn condition_sec_residual(alg: &Algebra) -> NormalForm {
    let sa = alg.std;
    let dla = nf_deriv(alg, &alg.atom(sa.loga2), Direction::D1);
    let ds = nf_deriv(alg, &alg.atom(sa.s), Direction::D1);
    let phase = nf_exp(&nf_scale(&alg.atom(sa.s), &Coeff::i()));
    let xterm = nf_scale(&nf_mul(&alg.atom(sa.x), &phase), &Coeff::from_int(2));
    nf_add(
        &nf_sub(&nf_add(&dla, &nf_scale(&ds, &Coeff::i())), &xterm),
        &nf_scale(&alg.atom(sa.c), &Coeff::from_ratio(2, 3)),
    )
}

/// The twist value solving the section condition:
/// x = e^{-i s} (D1 loga2 + i D1 s + (2/3) c) / 2.
pub fn section_condition_solution(alg: &Algebra) -> NormalForm {
    let sa = alg.std;
    let dla = nf_deriv(alg, &alg.atom(sa.loga2), Direction::D1);
    let ds = nf_deriv(alg, &alg.atom(sa.s), Direction::D1);
    let inner = nf_add(
        &nf_add(&dla, &nf_scale(&ds, &Coeff::i())),
        &nf_scale(&alg.atom(sa.c), &Coeff::from_ratio(2, 3)),
    );
    let phase = nf_exp(&nf_scale(&alg.atom(sa.s), &-&Coeff::i()));
    nf_scale(&nf_mul(&phase, &inner), &Coeff::from_ratio(1, 2))
}

/// The coframe invariant t = c + D1 loga2 - x e^{i s}, together with its
/// value for the rescaled coframe, expressed through the gauge atoms.
#[derive(Clone, Debug)]
pub struct TInvariant {
    pub t: NormalForm,
    /// e^{-tau - i theta} (t - i hbar), hbar the conjugated gauge shift.
    pub transformed: NormalForm,
}

pub fn t_invariant(alg: &Algebra) -> TInvariant {
    let sa = alg.std;
    let phase = nf_exp(&nf_scale(&alg.atom(sa.s), &Coeff::i()));
    let t = nf_sub(
        &nf_add(&alg.atom(sa.c), &nf_deriv(alg, &alg.atom(sa.loga2), Direction::D1)),
        &nf_mul(&alg.atom(sa.x), &phase),
    );
    let laws = crate::cr::gauge_laws(alg);
    let pre = nf_exp(&nf_neg(&nf_add(
        &alg.atom(sa.tau),
        &nf_scale(&alg.atom(sa.theta), &Coeff::i()),
    )));
    let transformed = nf_mul(&pre, &nf_sub(&t, &nf_scale(&laws.hbar, &Coeff::i())));
    TInvariant { t, transformed }
}

/// PDE residual D1 t + t (c - t) whose vanishing controls the remaining
/// curvature component on the degenerate plane.
pub fn t_equation_residual(alg: &Algebra, t: &NormalForm) -> NormalForm {
    nf_add(&nf_deriv(alg, t, Direction::D1), &nf_mul(t, &nf_sub(&alg.atom(alg.std.c), t)))
}

/// The two nonzero coefficients (sigma, rho_coef) of the mixing form
/// Gamma^1_4 = sigma theta^1 + rho_coef theta^3, read off the solved
/// connection.  (rho alone would collide with other uses of the letter.)
pub fn gamma24_coefficients(conn: &Connection) -> (NormalForm, NormalForm) {
    (conn.gamma[0][3][0].clone(), conn.gamma[0][3][2].clone())
}

/// Closed-form displays of the same coefficients:
/// sigma = i/(2P) + P_r/P^2,
/// rho_coef = -D2(P)/P^2 + Wbar P_r/P^2 - cbar/(2P) + Dr(Wbar)/(2P).
pub fn gamma24_displays(alg: &Algebra, m: &BundleMetric) -> (NormalForm, NormalForm) {
    let p = &m.p;
    let pinv = nf_pow(p, -1).expect("P is a nonzero symbol");
    let pinv2 = nf_mul(&pinv, &pinv);
    let pr = nf_deriv(alg, p, Direction::Dr);
    let sigma = nf_add(
        &nf_scale(&pinv, &Coeff::complex_ratio(0, 1, 1, 2)),
        &nf_mul(&pr, &pinv2),
    );
    let wbar = nf_conj(alg, &m.w);
    let half = Coeff::from_ratio(1, 2);
    let rho = nf_add(
        &nf_add(
            &nf_neg(&nf_mul(&nf_deriv(alg, p, Direction::D2), &pinv2)),
            &nf_mul(&nf_mul(&wbar, &pr), &pinv2),
        ),
        &nf_add(
            &nf_neg(&nf_scale(&nf_mul(&alg.atom(alg.std.cbar), &pinv), &half)),
            &nf_scale(&nf_mul(&nf_deriv(alg, &wbar, Direction::Dr), &pinv), &half),
        ),
    );
    (sigma, rho)
}

/// sigma - conj(sigma).  Equals i/P, so sigma never vanishes while P stays
/// finite, real, and nonzero.
pub fn sigma_imaginary_witness(alg: &Algebra, sigma: &NormalForm) -> NormalForm {
    nf_sub(sigma, &nf_conj(alg, sigma))
}

/// The exact-coframe replacement candidate phi = mu + i conj(t) lambda, its
/// integrability residual, and the nondegeneracy pairing phi ^ conj(phi).
#[derive(Clone, Debug)]
pub struct PhiForm {
    pub phi: Form,
    /// Coefficient of mu ^ mubar ^ lambda in d phi ^ phi; equal to
    /// i (D2 conj(t) + conj(t)(cbar - conj(t))).
    pub residual: NormalForm,
    /// phi ^ conj(phi) = mu ^ mubar - i t mu ^ lambda - i conj(t) mubar ^ lambda.
    pub pairing: Form,
}

pub fn phi_integrability(alg: &Algebra, t: &NormalForm) -> PhiForm {
    let ctx = FrameContext::mu_basis(alg);
    let tbar = nf_conj(alg, t);
    let phi = Form::basis(0).add(&Form::basis(2).scale(&nf_scale(&tbar, &Coeff::i())));
    let residual = ctx.d(alg, &phi).wedge(&phi).coeff(0b0111);
    let pairing = phi.wedge(&ctx.conj(alg, &phi));
    PhiForm { phi, residual, pairing }
}

/// Metric data over a coordinate structure, in evaluation-ready form:
/// sample bindings for the metric atoms (P, x, H) and coordinate functions
/// whose frame-derivative words the extractor fills through jets.
#[derive(Clone, Debug, Default)]
pub struct QuasiFeffermanData {
    pub bindings: Vec<(AtomId, NormalForm)>,
    pub functions: Vec<(AtomId, Expr)>,
    pub warnings: Vec<String>,
}

impl QuasiFeffermanData {
    /// Install the bindings (and their conjugates) on a sample.
    pub fn apply(&self, alg: &Algebra, sample: &mut PointSample) {
        for (id, nf) in &self.bindings {
            sample.bind(*id, nf.clone());
            let cid = alg.symbols.conj(*id);
            if cid != *id {
                sample.bind(cid, nf_conj(alg, nf));
            }
        }
    }

    /// Data from raw coordinate expressions for P, x, H.  The profile
    /// functions default to zero words so the invariant t stays evaluable.
    pub fn from_parameters(alg: &Algebra, p: &str, x: &str, h: &str) -> Result<Self> {
        let sa = alg.std;
        let pn = alg.parse_nf(p)?;
        if pn.is_zero() {
            return Err(Error::Degenerate("the conformal factor P must be nonzero".into()));
        }
        let xn = alg.parse_nf(x)?;
        let hn = alg.parse_nf(h)?;
        let mut functions = vec![(sa.loga2, Expr::num(0)), (sa.s, Expr::num(0))];
        push_coordinate_functions(alg, &[&pn, &xn, &hn], &mut functions);
        Ok(QuasiFeffermanData {
            bindings: vec![(sa.p, pn), (sa.x, xn), (sa.hh, hn)],
            functions,
            warnings: Vec::new(),
        })
    }

    /// Data whose P is the radial profile over amplitude and phase given as
    /// coordinate expressions, with direct twist and fiber datum.
    pub fn from_profile(alg: &Algebra, a: &str, s: &str, x: &str, h: &str) -> Result<Self> {
        let sa = alg.std;
        let a_expr = alg.parse(a)?;
        let s_expr = alg.parse(s)?;
        let xn = alg.parse_nf(x)?;
        let hn = alg.parse_nf(h)?;
        let loga2 = Expr::mul(vec![Expr::num(2), a_expr.clone().log()]);
        let mut functions = vec![(sa.a, a_expr), (sa.loga2, loga2), (sa.s, s_expr)];
        push_coordinate_functions(alg, &[&xn, &hn], &mut functions);
        Ok(QuasiFeffermanData {
            bindings: vec![(sa.p, p_profile(alg)?), (sa.x, xn), (sa.hh, hn)],
            functions,
            warnings: Vec::new(),
        })
    }
}

/// Register every base coordinate an expression mentions as a jet function,
/// so its frame-derivative words are available at evaluation time.
fn push_coordinate_functions(
    alg: &Algebra,
    nfs: &[&NormalForm],
    functions: &mut Vec<(AtomId, Expr)>,
) {
    let mut words = std::collections::BTreeSet::new();
    for nf in nfs {
        collect_words(nf, &mut words);
    }
    for coord in [alg.std.x1, alg.std.x2, alg.std.x3] {
        let used = words.iter().any(|(id, _)| *id == coord);
        let present = functions.iter().any(|(id, _)| *id == coord);
        if used && !present {
            functions.push((coord, Expr::atom(coord)));
        }
    }
}

/// Profile binding for P expressed through the stored profile functions:
/// exp(loga2/2) / cos((r + s)/2).
pub fn profile_binding(alg: &Algebra) -> Result<NormalForm> {
    let sa = alg.std;
    let half = Coeff::from_ratio(1, 2);
    let amp = nf_exp(&nf_scale(&alg.atom(sa.loga2), &half));
    let arg = nf_scale(&nf_add(&alg.atom(sa.r), &alg.atom(sa.s)), &half);
    Ok(nf_mul(&amp, &nf_cos_pow(&arg, -1)?))
}

/// Twist binding from the closed-section data:
/// x = e^{-i s} (c + D1 loga2).
pub fn section_x_binding(alg: &Algebra) -> NormalForm {
    let sa = alg.std;
    let phase = nf_exp(&nf_scale(&alg.atom(sa.s), &-&Coeff::i()));
    nf_mul(&phase, &nf_add(&alg.atom(sa.c), &nf_deriv(alg, &alg.atom(sa.loga2), Direction::D1)))
}

/// Assemble metric data from a candidate closed section psi over a
/// coordinate structure: amplitude and phase from the principal branch of
/// log psi, the twist from the section condition, the radial profile for P,
/// and a caller-chosen real H.  The section is probed at the given base
/// points: a vanishing value is an error, a closed-section residual above
/// 1e-8 or a sample near the branch cut becomes a warning on the output.
pub fn build_embeddable_metric(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    psi: &Expr,
    h: &Expr,
    probes: &[[f64; 3]],
) -> Result<QuasiFeffermanData> {
    let sa = alg.std;
    let log_psi = psi.clone().log();
    let loga2_expr = Expr::mul(vec![
        Expr::ratio(2, 3),
        Expr::add(vec![log_psi.clone(), log_psi.clone().conj()]),
    ]);
    let s_expr = Expr::mul(vec![
        Expr::Num(Coeff::complex_ratio(0, 1, -2, 3)),
        Expr::add(vec![log_psi.clone(), log_psi.conj().neg()]),
    ]);
    let hn = alg.normalize(h)?;

    let mut functions =
        vec![(sa.loga2, loga2_expr), (sa.s, s_expr), (sa.psi, psi.clone())];
    push_coordinate_functions(alg, &[&hn], &mut functions);

    let mut warnings = Vec::new();
    let section_residual = canonical_section_residual(alg, &alg.atom(sa.psi))?;
    for probe in probes {
        let sf = extract_with_functions(alg, st, *probe, 0.0, 1, &functions)?;
        let v = sf
            .sample
            .get(sa.psi, crate::kernel::Word::empty())
            .expect("the extractor assigns the section value");
        if v.norm() < 1e-12 {
            return Err(Error::Domain(format!(
                "the section vanishes at base point {probe:?}"
            )));
        }
        if PI - v.arg().abs() < 1e-3 {
            warnings.push(format!(
                "principal branch: the section at {probe:?} is close to the branch cut"
            ));
        }
        let res = evaluate_nf(alg, &section_residual, &sf.sample)?;
        if res.norm() > 1e-8 {
            warnings.push(format!(
                "closed-section residual {:.3e} at base point {:?}",
                res.norm(),
                probe
            ));
        }
    }

    Ok(QuasiFeffermanData {
        bindings: vec![
            (sa.p, profile_binding(alg)?),
            (sa.x, section_x_binding(alg)),
            (sa.hh, hn),
        ],
        functions,
        warnings,
    })
}

/// Case split of the invariant t over the sample set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    TZero,
    TNonzero,
}

/// Residual magnitudes of one named check at one sample point.
#[derive(Clone, Debug, Serialize)]
pub struct SampleResidual {
    pub point: [f64; 3],
    pub r: f64,
    pub residuals: Vec<f64>,
    pub pass: bool,
}

/// One named check over the whole sample set.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub labels: Vec<&'static str>,
    pub samples: Vec<SampleResidual>,
    pub verdict: bool,
}

/// Full embeddability report: per-check residuals, the sigma and t values,
/// the branch of the case split, and the overall verdict, which holds
/// exactly when the complexified Ricci residuals on the degenerate plane
/// stay within tolerance at every sample.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddabilityReport {
    pub branch: Branch,
    pub checks: Vec<CheckOutcome>,
    pub sigma_values: Vec<[f64; 2]>,
    pub sigma_nonvanishing: bool,
    pub t_values: Vec<[f64; 2]>,
    /// Lambda coefficient of the replacement form phi, rendered, when the
    /// case split lands in the second branch.
    pub phi_lambda_coefficient: Option<String>,
    pub parameters: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub tolerance: f64,
    pub criterion_satisfied: bool,
}

struct CheckSpec {
    name: &'static str,
    labels: Vec<&'static str>,
    nfs: Vec<NormalForm>,
    /// true: pass when every magnitude is at most tol (residual mode);
    /// false: pass when every magnitude exceeds tol (nonvanishing mode).
    below: bool,
}

/// Run every check on a coordinate structure with the given metric data at
/// the given (base point, fiber value) samples.
pub fn check_embeddability(
    st: &CoordinateCRStructure,
    data: &QuasiFeffermanData,
    points: &[([f64; 3], f64)],
    tol: f64,
) -> Result<EmbeddabilityReport> {
    let alg = Algebra::mu_exact();
    let sa = alg.std;
    for required in [sa.p, sa.x, sa.hh] {
        if !data.bindings.iter().any(|(id, _)| *id == required) {
            return Err(Error::Domain(format!(
                "metric data misses a binding for {}",
                alg.symbols.name(required)
            )));
        }
    }

    let m = build_quasi_fefferman(&alg);
    let sc = structure_constants(&alg, &m)?;
    let conn = levi_civita(&alg, &sc)?;
    let cur = curvature(&alg, &m, &sc, &conn);

    let (shear_a, shear_b) = shear_free_residual(&alg, &m.theta);
    let [r22, r24, r44] = alpha_plane_ricci(&cur);
    let psi0 = cur.psi0();
    let psi1 = cur.psi1();
    let (sigma, _rho) = gamma24_coefficients(&conn);
    let ti = t_invariant(&alg);
    let tres = t_equation_residual(&alg, &ti.t);
    let phi = phi_integrability(&alg, &ti.t);
    let section = nf_exp(&nf_scale(
        &nf_add(&alg.atom(sa.loga2), &nf_scale(&alg.atom(sa.s), &Coeff::i())),
        &Coeff::from_ratio(3, 4),
    ));
    let section_res = canonical_section_residual(&alg, &section)?;

    let specs = vec![
        CheckSpec {
            name: "shear_free",
            labels: vec!["d_theta3_wedge", "d_theta1_wedge"],
            nfs: vec![shear_a, shear_b],
            below: true,
        },
        CheckSpec {
            name: "alpha_plane_ricci",
            labels: vec!["R_22", "R_24", "R_44"],
            nfs: vec![r22, r24, r44],
            below: true,
        },
        CheckSpec {
            name: "weyl_alignment",
            labels: vec!["Psi_0", "Psi_1"],
            nfs: vec![psi0, psi1],
            below: true,
        },
        CheckSpec {
            name: "sigma_nonzero",
            labels: vec!["abs_sigma"],
            nfs: vec![sigma.clone()],
            below: false,
        },
        CheckSpec {
            name: "t_equation",
            labels: vec!["dt_plus_t_c_minus_t"],
            nfs: vec![tres],
            below: true,
        },
        CheckSpec {
            name: "phi_integrability",
            labels: vec!["dphi_wedge_phi"],
            nfs: vec![phi.residual.clone()],
            below: true,
        },
        CheckSpec {
            name: "canonical_section",
            labels: vec!["d2_log_section_plus_cbar"],
            nfs: vec![section_res],
            below: true,
        },
    ];

    let mut samples = Vec::with_capacity(points.len());
    let mut exactness = Vec::with_capacity(points.len());
    for (point, r) in points {
        let sf = extract_with_functions(&alg, st, *point, *r, EXTRACTION_DEGREE, &data.functions)?;
        exactness.push((sf.alpha.norm(), sf.beta.norm()));
        let mut sample = sf.sample;
        data.apply(&alg, &mut sample);
        samples.push(sample);
    }

    let mut checks = Vec::with_capacity(specs.len() + 1);
    let mut coframe_check = CheckOutcome {
        name: "exact_coframe",
        labels: vec!["alpha", "beta"],
        samples: Vec::with_capacity(points.len()),
        verdict: true,
    };
    for ((point, r), (na, nb)) in points.iter().zip(&exactness) {
        let pass = *na <= tol && *nb <= tol;
        coframe_check.verdict &= pass;
        coframe_check.samples.push(SampleResidual {
            point: *point,
            r: *r,
            residuals: vec![*na, *nb],
            pass,
        });
    }
    checks.push(coframe_check);

    for spec in specs {
        let mut outcome = CheckOutcome {
            name: spec.name,
            labels: spec.labels,
            samples: Vec::with_capacity(points.len()),
            verdict: true,
        };
        for ((point, r), sample) in points.iter().zip(&samples) {
            let mut residuals = Vec::with_capacity(spec.nfs.len());
            for nf in &spec.nfs {
                residuals.push(evaluate_nf(&alg, nf, sample)?.norm());
            }
            let pass = if spec.below {
                residuals.iter().all(|v| *v <= tol)
            } else {
                residuals.iter().all(|v| *v > tol)
            };
            outcome.verdict &= pass;
            outcome.samples.push(SampleResidual { point: *point, r: *r, residuals, pass });
        }
        checks.push(outcome);
    }

    let mut sigma_values = Vec::with_capacity(samples.len());
    let mut t_values = Vec::with_capacity(samples.len());
    for sample in &samples {
        let sv = evaluate_nf(&alg, &sigma, sample)?;
        sigma_values.push([sv.re, sv.im]);
        let tv = evaluate_nf(&alg, &ti.t, sample)?;
        t_values.push([tv.re, tv.im]);
    }
    let sigma_nonvanishing =
        sigma_values.iter().all(|[re, im]| Complex64::new(*re, *im).norm() > tol);
    let branch = if t_values.iter().all(|[re, im]| Complex64::new(*re, *im).norm() <= tol) {
        Branch::TZero
    } else {
        Branch::TNonzero
    };
    let phi_lambda_coefficient = match branch {
        Branch::TZero => None,
        Branch::TNonzero => Some(alg.show(&phi.phi.coeff(0b0100))),
    };

    let mut parameters = BTreeMap::new();
    for (id, nf) in &data.bindings {
        parameters.insert(alg.symbols.name(*id).to_string(), alg.show(nf));
    }
    for (id, e) in &data.functions {
        parameters.insert(alg.symbols.name(*id).to_string(), e.show(&alg.symbols));
    }

    let criterion_satisfied = checks
        .iter()
        .find(|c| c.name == "alpha_plane_ricci")
        .map(|c| c.verdict)
        .unwrap_or(false);

    Ok(EmbeddabilityReport {
        branch,
        checks,
        sigma_values,
        sigma_nonvanishing,
        t_values,
        phi_lambda_coefficient,
        parameters,
        warnings: data.warnings.clone(),
        tolerance: tol,
        criterion_satisfied,
    })
}
