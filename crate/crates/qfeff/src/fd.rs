//! Coordinate-space curvature by central finite differences.
//!
//! An independent cross-check of the frame pipeline: the metric matrix is
//! assembled in the chart (x1, x2, x3, r) from the coframe and the metric
//! data, then Christoffel symbols, the Riemann tensor, and the Ricci tensor
//! are produced purely by numeric differentiation, with no use of the
//! symbolic connection solver or the structure equations.

use std::f64::consts::FRAC_1_SQRT_2;

use num::complex::Complex64;

use crate::bundle::{
    build_fefferman, build_quasi_fefferman, fefferman_algebra, transform_parameters, BundleMetric,
    GRAM,
};
use crate::cr::{apply_gauge, extract_with_functions, CoordinateCRStructure, GaugeTransform};
use crate::curvature::Curvature;
use crate::embed::QuasiFeffermanData;
use crate::error::{Error, Result};
use crate::jets::JetEnv;
use crate::kernel::{evaluate_nf, Algebra};

/// Central-difference step used throughout.
pub const FD_STEP: f64 = 1e-4;

/// Word degree the metric evaluator asks of the extractor: the bindings
/// reach one frame derivative into the profile functions, nothing deeper.
const VALUE_DEGREE: usize = 2;

/// Tolerance on imaginary residue when a matrix that must be real is
/// assembled from complex frame data.
const IMAG_TOL: f64 = 1e-8;

/// A bundle metric pinned to a coordinate structure and metric data,
/// evaluable as a plain matrix at chart points.
pub struct CoordinateMetric<'a> {
    alg: &'a Algebra,
    st: &'a CoordinateCRStructure,
    data: &'a QuasiFeffermanData,
    m: BundleMetric,
}

impl<'a> CoordinateMetric<'a> {
    pub fn new(alg: &'a Algebra, st: &'a CoordinateCRStructure, data: &'a QuasiFeffermanData) -> Self {
        let m = build_quasi_fefferman(alg);
        CoordinateMetric { alg, st, data, m }
    }

    /// Coframe matrix theta^i_a at q = (x1, x2, x3, r): rows are the four
    /// coframe covectors, columns the chart components.
    pub fn coframe(&self, q: [f64; 4]) -> Result<[[Complex64; 4]; 4]> {
        let base = [q[0], q[1], q[2]];
        let sf = extract_with_functions(self.alg, self.st, base, q[3], VALUE_DEGREE, &self.data.functions)?;
        let mut sample = sf.sample;
        self.data.apply(self.alg, &mut sample);

        let vp = evaluate_nf(self.alg, &self.m.p, &sample)?;
        let vw = evaluate_nf(self.alg, &self.m.w, &sample)?;
        let vh = evaluate_nf(self.alg, &self.m.h, &sample)?;
        let basis = chart_basis(self.alg, self.st, base, [Complex64::new(0.0, 0.0); 3])?;
        Ok(rows_from_values(vp, vw, vh, &basis))
    }

    /// Metric matrix g_ab at q.
    pub fn metric(&self, q: [f64; 4]) -> Result<[[f64; 4]; 4]> {
        gram_metric(&self.coframe(q)?)
    }
}

/// Chart components of (mu, mubar, lambda, fiber) for a coordinate
/// structure at a base point.  `fiber_grad` tilts the fiber row: when the
/// fiber coordinate is offset by a base function, its chart gradient enters
/// the fiber covector.
fn chart_basis(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    base: [f64; 3],
    fiber_grad: [Complex64; 3],
) -> Result<[[Complex64; 4]; 4]> {
    let s = alg.std;
    let env = JetEnv::new(1, base, &alg.symbols, [s.x1, s.x2, s.x3]);
    let zero = Complex64::new(0.0, 0.0);
    let mut basis = [[zero; 4]; 4];
    for k in 0..3 {
        basis[0][k] = env.expand(&st.mu[k])?.value();
        basis[1][k] = basis[0][k].conj();
        basis[2][k] = env.expand(&st.lambda[k])?.value();
        basis[3][k] = fiber_grad[k];
    }
    basis[3][3] = Complex64::new(1.0, 0.0);
    Ok(basis)
}

/// Coframe rows from data values over a (mu, mubar, lambda, fiber) basis:
/// theta^1 = P mu, theta^2 = P mubar, theta^3 = P lambda,
/// theta^4 = P (fiber + W mu + conj(W) mubar + H lambda).
fn rows_from_values(
    vp: Complex64,
    vw: Complex64,
    vh: Complex64,
    basis: &[[Complex64; 4]; 4],
) -> [[Complex64; 4]; 4] {
    let zero = Complex64::new(0.0, 0.0);
    let mut th = [[zero; 4]; 4];
    for a in 0..4 {
        th[0][a] = vp * basis[0][a];
        th[1][a] = vp * basis[1][a];
        th[2][a] = vp * basis[2][a];
        th[3][a] = vp * (basis[3][a] + vw * basis[0][a] + vw.conj() * basis[1][a] + vh * basis[2][a]);
    }
    th
}

/// Contract coframe rows against the Gram matrix: g_ab = G_ij theta^i_a theta^j_b.
fn gram_metric(th: &[[Complex64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            if GRAM[i][j] == 0 {
                continue;
            }
            let w = f64::from(GRAM[i][j] as i32);
            for a in 0..4 {
                for b in 0..4 {
                    g[a][b] += w * th[i][a] * th[j][b];
                }
            }
        }
    }
    real_matrix(&g, "metric")
}

/// Frame-derivative depth the transformed data reaches into the gauge
/// functions: two, through the shifted rotation coefficient.
const GAUGE_DEGREE: usize = 2;

/// Chart gradient of the fiber offset -(2/3) theta induced by a gauge.
fn gauge_fiber_grad(alg: &Algebra, gauge: &GaugeTransform, base: [f64; 3]) -> Result<[Complex64; 3]> {
    let s = alg.std;
    let env = JetEnv::new(1, base, &alg.symbols, [s.x1, s.x2, s.x3]);
    let tj = env.expand(&gauge.theta)?;
    let mut grad = [Complex64::new(0.0, 0.0); 3];
    for (i, g) in grad.iter_mut().enumerate() {
        let mut m = [0usize; 3];
        m[i] = 1;
        *g = tj.coeff(m) * (-2.0 / 3.0);
    }
    Ok(grad)
}

/// Metric assembled from gauge-transformed data over the gauged coframe,
/// expressed in the original chart, at q.  The gauge rescales the coframe,
/// maps (P, x, H) by the transformation law, and offsets the fiber origin
/// by (2/3) theta; the offset's gradient enters the fiber covector.  The
/// invariance of the family says this matrix equals the original metric at
/// every chart point.
pub fn gauged_metric(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    data: &QuasiFeffermanData,
    gauge: &GaugeTransform,
    q: [f64; 4],
) -> Result<[[f64; 4]; 4]> {
    let s = alg.std;
    let base = [q[0], q[1], q[2]];
    let mut funcs = data.functions.clone();
    funcs.push((s.tau, gauge.tau.clone()));
    funcs.push((s.theta, gauge.theta.clone()));
    let sf = extract_with_functions(alg, st, base, q[3], GAUGE_DEGREE, &funcs)?;
    let mut sample = sf.sample;
    data.apply(alg, &mut sample);

    // Transformed data, written in the original frame, so the one sample
    // covers every evaluation.
    let tr = transform_parameters(alg);
    let vp = evaluate_nf(alg, &tr.p, &sample)?;
    let vw = evaluate_nf(alg, &tr.w, &sample)?;
    let vh = evaluate_nf(alg, &tr.h, &sample)?;

    let stp = apply_gauge(alg, st, gauge)?;
    let basis = chart_basis(alg, &stp, base, gauge_fiber_grad(alg, gauge, base)?)?;
    gram_metric(&rows_from_values(vp, vw, vh, &basis))
}

/// Largest entrywise gap at q between the metric of (st, data) and the
/// gauge-transformed one.
pub fn gauge_deviation(
    alg: &Algebra,
    st: &CoordinateCRStructure,
    data: &QuasiFeffermanData,
    gauge: &GaugeTransform,
    q: [f64; 4],
) -> Result<f64> {
    let a = CoordinateMetric::new(alg, st, data).metric(q)?;
    let b = gauged_metric(alg, st, data, gauge, q)?;
    let mut dev: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            dev = dev.max((a[r][c] - b[r][c]).abs());
        }
    }
    Ok(dev)
}

/// Least-squares conformal comparison of the distinguished member of the
/// family before and after a gauge.
#[derive(Clone, Copy, Debug)]
pub struct ConformalFit {
    /// Fitted scalar between the two matrices.
    pub scale: f64,
    /// The factor the rescaling law predicts: e^{2 tau} at the point.
    pub expected: f64,
    /// Largest entrywise gap after scaling.
    pub residual: f64,
}

/// Fit the gauged distinguished-member metric against the original one at
/// q.  Both sides carry the constant profile value 1/sqrt(2) and the
/// H forced by their own structure functions, so the gauged side is built
/// from the gauged structure alone; the rescaling law predicts a conformal
/// factor of e^{2 tau}.
pub fn fefferman_gauge_fit(
    st: &CoordinateCRStructure,
    gauge: &GaugeTransform,
    q: [f64; 4],
) -> Result<ConformalFit> {
    let alg = fefferman_algebra();
    let s = alg.std;
    let base = [q[0], q[1], q[2]];
    let m = build_fefferman(&alg);
    let vp = Complex64::new(FRAC_1_SQRT_2, 0.0);

    let sf = extract_with_functions(&alg, st, base, q[3], GAUGE_DEGREE, &[])?;
    let vw_a = evaluate_nf(&alg, &m.w, &sf.sample)?;
    let vh_a = evaluate_nf(&alg, &m.h, &sf.sample)?;
    let zero = Complex64::new(0.0, 0.0);
    let a = gram_metric(&rows_from_values(vp, vw_a, vh_a, &chart_basis(&alg, st, base, [zero; 3])?))?;

    let stp = apply_gauge(&alg, st, gauge)?;
    let sfp = extract_with_functions(&alg, &stp, base, q[3], GAUGE_DEGREE, &[])?;
    let vw_b = evaluate_nf(&alg, &m.w, &sfp.sample)?;
    let vh_b = evaluate_nf(&alg, &m.h, &sfp.sample)?;
    let basis = chart_basis(&alg, &stp, base, gauge_fiber_grad(&alg, gauge, base)?)?;
    let b = gram_metric(&rows_from_values(vp, vw_b, vh_b, &basis))?;

    let mut num = 0.0;
    let mut den = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            num += b[r][c] * a[r][c];
            den += a[r][c] * a[r][c];
        }
    }
    if den == 0.0 {
        return Err(Error::Degenerate("the reference metric vanishes".into()));
    }
    let scale = num / den;
    let env = JetEnv::new(0, base, &alg.symbols, [s.x1, s.x2, s.x3]);
    let expected = (2.0 * env.expand(&gauge.tau)?.value().re).exp();
    let mut residual: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            residual = residual.max((b[r][c] - scale * a[r][c]).abs());
        }
    }
    Ok(ConformalFit { scale, expected, residual })
}

fn real_matrix(g: &[[Complex64; 4]; 4], what: &str) -> Result<[[f64; 4]; 4]> {
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            if g[a][b].im.abs() > IMAG_TOL {
                return Err(Error::Domain(format!(
                    "{what} entry ({a},{b}) has imaginary residue {:.3e}",
                    g[a][b].im
                )));
            }
            out[a][b] = g[a][b].re;
        }
    }
    Ok(out)
}

/// Invert a 4x4 matrix by Gauss-Jordan elimination with partial pivoting.
pub fn inv4(g: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut a = *g;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let mut piv = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-12 {
            return Err(Error::Degenerate("the metric matrix is singular".into()));
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let f = a[row][col];
            if f == 0.0 {
                continue;
            }
            for k in 0..4 {
                a[row][k] -= f * a[col][k];
                inv[row][k] -= f * inv[col][k];
            }
        }
    }
    Ok(inv)
}

fn shifted(q: [f64; 4], dir: usize, h: f64) -> [f64; 4] {
    let mut out = q;
    out[dir] += h;
    out
}

/// Christoffel symbols Gamma^a_{bc} at q by central differences of the
/// metric matrix.
pub fn christoffels(cm: &CoordinateMetric, q: [f64; 4], h: f64) -> Result<[[[f64; 4]; 4]; 4]> {
    let g = cm.metric(q)?;
    let ginv = inv4(&g)?;
    let mut dg = [[[0.0; 4]; 4]; 4];
    for (b, slot) in dg.iter_mut().enumerate() {
        let gp = cm.metric(shifted(q, b, h))?;
        let gm = cm.metric(shifted(q, b, -h))?;
        for c in 0..4 {
            for d in 0..4 {
                slot[c][d] = (gp[c][d] - gm[c][d]) / (2.0 * h);
            }
        }
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    s += ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                }
                gamma[a][b][c] = 0.5 * s;
            }
        }
    }
    Ok(gamma)
}

/// Ricci tensor at q by central differences of the Christoffel symbols:
/// Ric_bd = d_a Gamma^a_{db} - d_d Gamma^a_{ab}
///        + Gamma^a_{ae} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{ab}.
pub fn fd_ricci(cm: &CoordinateMetric, q: [f64; 4], h: f64) -> Result<[[f64; 4]; 4]> {
    let g0 = christoffels(cm, q, h)?;
    let mut dg = [[[[0.0; 4]; 4]; 4]; 4];
    for (c, slot) in dg.iter_mut().enumerate() {
        let gp = christoffels(cm, shifted(q, c, h), h)?;
        let gm = christoffels(cm, shifted(q, c, -h), h)?;
        for a in 0..4 {
            for b in 0..4 {
                for d in 0..4 {
                    slot[a][b][d] = (gp[a][b][d] - gm[a][b][d]) / (2.0 * h);
                }
            }
        }
    }
    let mut ric = [[0.0; 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                s += dg[a][a][b][d] - dg[d][a][b][a];
                for e in 0..4 {
                    s += g0[a][a][e] * g0[e][b][d] - g0[a][d][e] * g0[e][b][a];
                }
            }
            ric[b][d] = s;
        }
    }
    Ok(ric)
}

/// The symbolic frame Ricci pushed into chart components at q:
/// Ric_ab = theta^i_a theta^j_b R_ij.
pub fn frame_ricci(
    cm: &CoordinateMetric,
    cur: &Curvature,
    degree: usize,
    q: [f64; 4],
) -> Result<[[f64; 4]; 4]> {
    let base = [q[0], q[1], q[2]];
    let sf = extract_with_functions(cm.alg, cm.st, base, q[3], degree, &cm.data.functions)?;
    let mut sample = sf.sample;
    cm.data.apply(cm.alg, &mut sample);

    let zero = Complex64::new(0.0, 0.0);
    let mut rf = [[zero; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            rf[i][j] = evaluate_nf(cm.alg, &cur.ricci[i][j], &sample)?;
        }
    }
    let th = cm.coframe(q)?;
    let mut out = [[zero; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    out[a][b] += th[i][a] * th[j][b] * rf[i][j];
                }
            }
        }
    }
    real_matrix(&out, "frame Ricci")
}

/// Side-by-side Ricci tensors and their largest entrywise gap.
pub struct RicciComparison {
    pub fd: [[f64; 4]; 4],
    pub frame: [[f64; 4]; 4],
    pub max_abs_diff: f64,
}

pub fn compare_ricci(
    cm: &CoordinateMetric,
    cur: &Curvature,
    degree: usize,
    q: [f64; 4],
    h: f64,
) -> Result<RicciComparison> {
    let fd = fd_ricci(cm, q, h)?;
    let frame = frame_ricci(cm, cur, degree, q)?;
    let mut max_abs_diff: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            max_abs_diff = max_abs_diff.max((fd[a][b] - frame[a][b]).abs());
        }
    }
    Ok(RicciComparison { fd, frame, max_abs_diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::structure_constants;
    use crate::curvature::{curvature, levi_civita};
    use crate::embed::EXTRACTION_DEGREE;

    fn symbolic_curvature(alg: &Algebra) -> Curvature {
        let m = build_quasi_fefferman(alg);
        let sc = structure_constants(alg, &m).unwrap();
        let conn = levi_civita(alg, &sc).unwrap();
        curvature(alg, &m, &sc, &conn)
    }

    #[test]
    fn inverse_recovers_identity() {
        let g = [
            [2.0, 1.0, 0.0, 0.5],
            [1.0, 3.0, -1.0, 0.0],
            [0.0, -1.0, 4.0, 1.5],
            [0.5, 0.0, 1.5, -2.0],
        ];
        let inv = inv4(&g).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += g[a][k] * inv[k][b];
                }
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12, "entry ({a},{b}) = {s}");
            }
        }
        let singular = [[1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0], [0.0; 4], [0.0; 4]];
        assert!(inv4(&singular).is_err());
    }

    #[test]
    fn fd_matches_frame_for_the_flat_model_profile() {
        // a = 1, s = 0, x = 0, H = 0 on the flat structure: the constant
        // unit section's data. Full Ricci, coordinates vs frame.
        let alg = Algebra::mu_exact();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let one = alg.parse("1").unwrap();
        let zero = alg.parse("0").unwrap();
        let data =
            crate::embed::build_embeddable_metric(&alg, &st, &one, &zero, &[[0.1, -0.2, 0.3]])
                .unwrap();
        let cm = CoordinateMetric::new(&alg, &st, &data);
        let cur = symbolic_curvature(&alg);
        for q in [[0.1, -0.2, 0.3, 0.0], [-0.3, 0.25, 0.1, 0.4]] {
            let cmp = compare_ricci(&cm, &cur, EXTRACTION_DEGREE, q, FD_STEP).unwrap();
            assert!(
                cmp.max_abs_diff <= 1e-6,
                "Ricci mismatch {} at {q:?}\nfd = {:?}\nframe = {:?}",
                cmp.max_abs_diff,
                cmp.fd,
                cmp.frame
            );
        }
    }

    #[test]
    fn fd_matches_frame_for_a_nonconstant_section() {
        let alg = Algebra::mu_exact();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let psi = alg.parse("exp(x1 + I*x2)").unwrap();
        let zero = alg.parse("0").unwrap();
        let data =
            crate::embed::build_embeddable_metric(&alg, &st, &psi, &zero, &[[0.1, -0.2, 0.3]])
                .unwrap();
        let cm = CoordinateMetric::new(&alg, &st, &data);
        let cur = symbolic_curvature(&alg);
        let q = [0.15, -0.1, 0.2, 0.3];
        let cmp = compare_ricci(&cm, &cur, EXTRACTION_DEGREE, q, FD_STEP).unwrap();
        assert!(cmp.max_abs_diff <= 1e-6, "Ricci mismatch {}", cmp.max_abs_diff);
    }

    #[test]
    fn identity_gauge_deviation_is_exactly_zero() {
        let alg = Algebra::mu_exact();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let data =
            QuasiFeffermanData::from_parameters(&alg, "1", "0.3 + 0.2*I", "0.1").unwrap();
        let gauge = GaugeTransform::parse(&alg, "0", "0").unwrap();
        let dev = gauge_deviation(&alg, &st, &data, &gauge, [0.2, -0.1, 0.3, 0.5]).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn constant_gauges_preserve_the_metric() {
        let alg = Algebra::mu_exact();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let data =
            QuasiFeffermanData::from_parameters(&alg, "2 + 0.1*r", "0.3 + 0.2*I", "0.4").unwrap();
        let gauges = [("0.3", "-0.2"), ("-0.15", "0.45"), ("0.5", "0.1")];
        for (t, th) in gauges {
            let gauge = GaugeTransform::parse(&alg, t, th).unwrap();
            for q in [[0.2, -0.1, 0.3, 0.4], [-0.3, 0.2, 0.1, -0.5]] {
                let dev = gauge_deviation(&alg, &st, &data, &gauge, q).unwrap();
                assert!(dev <= 1e-9, "gauge ({t}, {th}) deviates by {dev} at {q:?}");
            }
        }
    }

    #[test]
    fn expression_gauges_preserve_the_metric() {
        // Nonconstant gauges switch on the shift h, the theta gradient in
        // the fiber covector, and the derivative terms of the transformed H.
        let alg = Algebra::mu_exact();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let data =
            QuasiFeffermanData::from_parameters(&alg, "1 + 0.1*r", "0.2 + 0.1*I", "0.3").unwrap();
        let pairs = [("0.2*x1", "0.3*x2"), ("0.1*x2*x3", "0.25*x1 - 0.1*x3")];
        for (t, th) in pairs {
            let gauge = GaugeTransform::parse(&alg, t, th).unwrap();
            let dev = gauge_deviation(&alg, &st, &data, &gauge, [0.15, -0.2, 0.3, 0.4]).unwrap();
            assert!(dev <= 1e-9, "gauge ({t}, {th}) deviates by {dev}");
        }
        // A structure with nonzero rotation coefficient exercises the
        // c-dependent pieces of the transformed twist and fiber datum.
        let stg = CoordinateCRStructure::heisenberg_gauged(&alg);
        let gauge = GaugeTransform::parse(&alg, "0.1*x1", "0.2*x3").unwrap();
        let dev = gauge_deviation(&alg, &stg, &data, &gauge, [0.1, 0.2, -0.15, 0.3]).unwrap();
        assert!(dev <= 1e-9, "gauged structure deviates by {dev}");
    }

    #[test]
    fn distinguished_member_rescales_conformally() {
        let alg = Algebra::mu_exact();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let q = [0.2, -0.1, 0.3, 0.4];

        let fit =
            fefferman_gauge_fit(&st, &GaugeTransform::parse(&alg, "0.3", "-0.2").unwrap(), q)
                .unwrap();
        assert!((fit.scale - 0.6f64.exp()).abs() <= 1e-9, "scale {}", fit.scale);
        assert!((fit.scale - fit.expected).abs() <= 1e-9);
        assert!(fit.residual <= 1e-9, "residual {}", fit.residual);

        let fit2 =
            fefferman_gauge_fit(&st, &GaugeTransform::parse(&alg, "0.2*x1", "0.1*x2").unwrap(), q)
                .unwrap();
        assert!(
            (fit2.scale - fit2.expected).abs() <= 1e-9,
            "scale {} vs predicted {}",
            fit2.scale,
            fit2.expected
        );
        assert!(fit2.residual <= 1e-9, "residual {}", fit2.residual);
    }

    #[test]
    fn fd_detects_curvature_off_the_profile() {
        // P = 1 keeps the degenerate-plane components at zero except the
        // fiber one, which the ODE residual pins at 1/2; the coordinate
        // Ricci must be visibly nonzero and still match the frame values.
        let alg = Algebra::mu_exact();
        let st = CoordinateCRStructure::heisenberg(&alg);
        let data = QuasiFeffermanData::from_parameters(&alg, "1", "0", "0").unwrap();
        let cm = CoordinateMetric::new(&alg, &st, &data);
        let cur = symbolic_curvature(&alg);
        let q = [0.1, 0.2, -0.3, 0.25];
        let cmp = compare_ricci(&cm, &cur, EXTRACTION_DEGREE, q, FD_STEP).unwrap();
        assert!(cmp.max_abs_diff <= 1e-6, "Ricci mismatch {}", cmp.max_abs_diff);
        let mut max_entry: f64 = 0.0;
        for row in &cmp.fd {
            for v in row {
                max_entry = max_entry.max(v.abs());
            }
        }
        assert!(max_entry > 0.1, "oracle sees no curvature: {max_entry}");
    }
}
