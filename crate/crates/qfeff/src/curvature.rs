//! Levi-Civita connection and curvature of the bundle metrics, computed in
//! the adapted null coframe.
//!
//! Conventions: connection forms Gamma^i_j = Gamma^i_{jn} theta^n with
//! d theta^i + Gamma^i_j ^ theta^j = 0 and the lowered coefficients
//! antisymmetric in the first pair; curvature forms
//! R^i_j = d Gamma^i_j + Gamma^i_k ^ Gamma^k_j with components R^i_{jkl}
//! read off against theta^k ^ theta^l for k < l (no 1/2);
//! Ricci R_{jl} = R^k_{jkl}.

use crate::bundle::{BundleMetric, StructureConstants, GRAM, GRAM_SWAP};
use crate::error::{Error, Result};
use crate::forms::Form;
use crate::kernel::{nf_add, nf_neg, nf_scale, nf_sub, Algebra, Coeff, NormalForm};

/// Levi-Civita connection coefficients in the null coframe.
#[derive(Clone, Debug)]
pub struct Connection {
    /// gamma[i][j][n] = Gamma^i_{jn}, the theta^n coefficient of Gamma^i_j.
    pub gamma: [[[NormalForm; 4]; 4]; 4],
}

impl Connection {
    /// The connection form Gamma^i_j.
    pub fn form(&self, i: usize, j: usize) -> Form {
        Form::one_form(self.gamma[i][j].clone())
    }

    /// Lowered coefficient Gamma_{ijn} = g_ik Gamma^k_{jn}.
    pub fn lowered(&self, i: usize, j: usize, n: usize) -> &NormalForm {
        &self.gamma[GRAM_SWAP[i]][j][n]
    }
}

fn pair_index(a: usize, b: usize) -> usize {
    // Pairs (a, b) with a < b in lexicographic order.
    debug_assert!(a < b);
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => unreachable!(),
    }
}

/// Signed column lookup for the lowered unknown Gamma_{abn}, stored for
/// a < b only.
fn column(a: usize, b: usize, n: usize) -> Option<(usize, i64)> {
    use std::cmp::Ordering::*;
    match a.cmp(&b) {
        Less => Some((pair_index(a, b) * 4 + n, 1)),
        Greater => Some((pair_index(b, a) * 4 + n, -1)),
        Equal => None,
    }
}

/// Solve the torsion-free, metric-compatible system exactly: unknowns are
/// the 24 independent lowered coefficients (antisymmetric first pair), and
/// each torsion component Gamma^i_{mn} - Gamma^i_{nm} = -C^i_{mn} is one
/// equation.  The 24 x 24 system is eliminated over exact rationals.
pub fn levi_civita(_alg: &Algebra, sc: &StructureConstants) -> Result<Connection> {
    const N: usize = 24;
    let mut a = vec![vec![Coeff::zero(); N]; N];
    let mut rhs: Vec<NormalForm> = vec![NormalForm::zero(); N];
    let mut row = 0;
    for i in 0..4 {
        let low = GRAM_SWAP[i];
        for m in 0..4 {
            for n in (m + 1)..4 {
                if let Some((col, s)) = column(low, m, n) {
                    a[row][col] = &a[row][col] + &Coeff::from_int(s);
                }
                if let Some((col, s)) = column(low, n, m) {
                    a[row][col] = &a[row][col] - &Coeff::from_int(s);
                }
                rhs[row] = nf_neg(sc.get(i, m, n));
                row += 1;
            }
        }
    }
    debug_assert_eq!(row, N);

    // Gaussian elimination with exact pivots.
    for col in 0..N {
        let piv = (col..N)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Degenerate("connection system is singular".into()))?;
        a.swap(col, piv);
        rhs.swap(col, piv);
        let inv = a[col][col].inverse();
        for c in col..N {
            a[col][c] = &a[col][c] * &inv;
        }
        rhs[col] = nf_scale(&rhs[col], &inv);
        for r in 0..N {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..N {
                let t = &a[col][c] * &f;
                a[r][c] = &a[r][c] - &t;
            }
            let t = nf_scale(&rhs[col], &f);
            rhs[r] = nf_sub(&rhs[r], &t);
        }
    }

    // Unpack: Gamma^i_{jn} = Gamma_{sigma(i) j n}.
    let lowered = |k: usize, j: usize, n: usize| -> NormalForm {
        match column(k, j, n) {
            None => NormalForm::zero(),
            Some((col, 1)) => rhs[col].clone(),
            Some((col, _)) => nf_neg(&rhs[col]),
        }
    };
    let gamma: [[[NormalForm; 4]; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|n| lowered(GRAM_SWAP[i], j, n)))
    });
    Ok(Connection { gamma })
}

/// Curvature data of a connection in the theta coframe.
#[derive(Clone, Debug)]
pub struct Curvature {
    /// Curvature 2-forms R^i_j.
    pub forms: [[Form; 4]; 4],
    /// Ricci tensor R_{jl} = R^k_{jkl}.
    pub ricci: [[NormalForm; 4]; 4],
    /// Scalar curvature g^{jl} R_{jl}.
    pub scalar: NormalForm,
}

fn gram(i: usize, j: usize) -> i64 {
    GRAM[i][j]
}

impl Curvature {
    /// Component R^i_{jkl}, antisymmetric in (k, l).
    pub fn riem_up(&self, i: usize, j: usize, k: usize, l: usize) -> NormalForm {
        use std::cmp::Ordering::*;
        match k.cmp(&l) {
            Equal => NormalForm::zero(),
            Less => self.forms[i][j].coeff((1 << k) | (1 << l)),
            Greater => nf_neg(&self.forms[i][j].coeff((1 << l) | (1 << k))),
        }
    }

    /// Lowered component R_{ijkl} = g_im R^m_{jkl}.
    pub fn riem(&self, i: usize, j: usize, k: usize, l: usize) -> NormalForm {
        self.riem_up(GRAM_SWAP[i], j, k, l)
    }

    /// Weyl tensor component
    /// C_{ijkl} = R_{ijkl} + R/6 (g_ik g_lj - g_il g_kj)
    ///          + 1/2 (g_il R_kj - g_ik R_lj + g_jk R_li - g_jl R_ki).
    pub fn weyl(&self, i: usize, j: usize, k: usize, l: usize) -> NormalForm {
        let mut acc = self.riem(i, j, k, l);
        let gpart = gram(i, k) * gram(l, j) - gram(i, l) * gram(k, j);
        if gpart != 0 {
            acc = nf_add(&acc, &nf_scale(&self.scalar, &Coeff::from_ratio(gpart, 6)));
        }
        let half = |s: i64, r: &NormalForm| nf_scale(r, &Coeff::from_ratio(s, 2));
        if gram(i, l) != 0 {
            acc = nf_add(&acc, &half(gram(i, l), &self.ricci[k][j]));
        }
        if gram(i, k) != 0 {
            acc = nf_add(&acc, &half(-gram(i, k), &self.ricci[l][j]));
        }
        if gram(j, k) != 0 {
            acc = nf_add(&acc, &half(gram(j, k), &self.ricci[l][i]));
        }
        if gram(j, l) != 0 {
            acc = nf_add(&acc, &half(-gram(j, l), &self.ricci[k][i]));
        }
        acc
    }

    /// The two curvature scalars tied to the fiber congruence:
    /// Psi0 = C_{4141} and Psi1 = C_{4341} (one-based labels).
    pub fn psi0(&self) -> NormalForm {
        self.weyl(3, 0, 3, 0)
    }

    pub fn psi1(&self) -> NormalForm {
        self.weyl(3, 2, 3, 0)
    }
}

/// Curvature forms, Ricci tensor, and scalar curvature of the connection.
pub fn curvature(
    alg: &Algebra,
    m: &BundleMetric,
    sc: &StructureConstants,
    conn: &Connection,
) -> Curvature {
    let ctx = crate::bundle::theta_context(m, sc);
    let forms: [[Form; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut r = ctx.d(alg, &conn.form(i, j));
            for k in 0..4 {
                r = r.add(&conn.form(i, k).wedge(&conn.form(k, j)));
            }
            r
        })
    });
    let riem_up = |i: usize, j: usize, k: usize, l: usize| -> NormalForm {
        use std::cmp::Ordering::*;
        match k.cmp(&l) {
            Equal => NormalForm::zero(),
            Less => forms[i][j].coeff((1 << k) | (1 << l)),
            Greater => nf_neg(&forms[i][j].coeff((1 << l) | (1 << k))),
        }
    };
    let ricci: [[NormalForm; 4]; 4] = std::array::from_fn(|j| {
        std::array::from_fn(|l| {
            let mut acc = NormalForm::zero();
            for k in 0..4 {
                acc = nf_add(&acc, &riem_up(k, j, k, l));
            }
            acc
        })
    });
    let mut scalar = NormalForm::zero();
    for j in 0..4 {
        for l in 0..4 {
            if gram(j, l) != 0 {
                scalar = nf_add(&scalar, &nf_scale(&ricci[j][l], &Coeff::from_int(gram(j, l))));
            }
        }
    }
    Curvature { forms, ricci, scalar }
}

/// The Ricci components that control curvature alignment along the fiber
/// congruence: (R_22, R_24, R_44) in one-based frame labels.
pub fn alpha_plane_ricci(cur: &Curvature) -> [NormalForm; 3] {
    [cur.ricci[1][1].clone(), cur.ricci[1][3].clone(), cur.ricci[3][3].clone()]
}

/// Residuals for the shear-free repeated-direction statement: if the three
/// alignment Ricci components vanish, the congruence direction is doubly
/// degenerate for the Weyl tensor.
#[derive(Clone, Debug)]
pub struct GoldbergSachsReport {
    /// (label, residual): R_22, R_24, R_44.
    pub hypotheses: Vec<(&'static str, NormalForm)>,
    /// (label, residual): Psi0, Psi1, and the five curvature components
    /// whose vanishing expresses the degeneracy.
    pub conclusions: Vec<(&'static str, NormalForm)>,
}

pub fn goldberg_sachs_check(cur: &Curvature) -> GoldbergSachsReport {
    let [r22, r24, r44] = alpha_plane_ricci(cur);
    let hypotheses = vec![("R_22", r22), ("R_24", r24), ("R_44", r44)];
    let conclusions = vec![
        ("Psi0", cur.psi0()),
        ("Psi1", cur.psi1()),
        ("R_2412", cur.riem(1, 3, 0, 1)),
        ("R_2424", cur.riem(1, 3, 1, 3)),
        ("R_2414", cur.riem(1, 3, 0, 3)),
        ("R_2423", cur.riem(1, 3, 1, 2)),
        ("R_2434", cur.riem(1, 3, 2, 3)),
    ];
    GoldbergSachsReport { hypotheses, conclusions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{build_quasi_fefferman, structure_constants};
    use crate::kernel::{nf_deriv, nf_mul, nf_pow, Direction};

    fn setup(alg: &Algebra) -> (BundleMetric, StructureConstants, Connection) {
        let m = build_quasi_fefferman(alg);
        let sc = structure_constants(alg, &m).unwrap();
        let conn = levi_civita(alg, &sc).unwrap();
        (m, sc, conn)
    }

    /// Direct formula for the lowered coefficients,
    /// Gamma_{jmn} = 1/2 (c_{jnm} - c_{nmj} + c_{mjn}), as an independent
    /// oracle for the linear solver (c_{ijk} lowers the first label).
    fn koszul(sc: &StructureConstants, j: usize, m: usize, n: usize) -> NormalForm {
        let low = |i: usize, a: usize, b: usize| sc.get(GRAM_SWAP[i], a, b).clone();
        let t = nf_add(
            &nf_sub(&low(j, n, m), &low(n, m, j)),
            &low(m, j, n),
        );
        nf_scale(&t, &Coeff::from_ratio(1, 2))
    }

    #[test]
    fn solver_matches_direct_formula() {
        let alg = Algebra::generic();
        let (_, sc, conn) = setup(&alg);
        for j in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    let want = koszul(&sc, j, m, n);
                    let got = conn.lowered(j, m, n);
                    let diff = nf_sub(got, &want);
                    assert!(
                        alg.is_zero(&diff).unwrap(),
                        "lowered coefficient ({j},{m},{n}) differs from the direct formula"
                    );
                }
            }
        }
    }

    #[test]
    fn connection_satisfies_both_defining_equations() {
        let alg = Algebra::generic();
        let (_, sc, conn) = setup(&alg);
        // Torsion: Gamma^i_{mn} - Gamma^i_{nm} = -C^i_{mn}.
        for i in 0..4 {
            for m in 0..4 {
                for n in (m + 1)..4 {
                    let lhs = nf_sub(&conn.gamma[i][m][n], &conn.gamma[i][n][m]);
                    let diff = nf_add(&lhs, sc.get(i, m, n));
                    assert!(alg.is_zero(&diff).unwrap(), "torsion fails at ({i},{m},{n})");
                }
            }
        }
        // Metric compatibility: lowered coefficients antisymmetric.
        for i in 0..4 {
            for j in 0..4 {
                for n in 0..4 {
                    let diff = nf_add(conn.lowered(i, j, n), conn.lowered(j, i, n));
                    assert!(diff.is_zero(), "compatibility fails at ({i},{j},{n})");
                }
            }
        }
    }

    #[test]
    fn two_connection_forms_vanish() {
        // Gamma^1_2 and Gamma^3_4 are zero for this family.
        let alg = Algebra::generic();
        let (_, _, conn) = setup(&alg);
        for n in 0..4 {
            assert!(
                alg.is_zero(&conn.gamma[0][1][n]).unwrap(),
                "Gamma^1_2 component {n} should vanish"
            );
            assert!(
                alg.is_zero(&conn.gamma[2][3][n]).unwrap(),
                "Gamma^3_4 component {n} should vanish"
            );
        }
    }

    #[test]
    fn mixing_form_display() {
        // Gamma^1_4 = (i/(2P) + C^1_{14}) theta^1 + 1/2 (C^3_{23} + C^4_{24}) theta^3.
        let alg = Algebra::generic();
        let (m, sc, conn) = setup(&alg);
        let half_i_over_p =
            nf_scale(&nf_pow(&m.p, -1).unwrap(), &Coeff::complex_ratio(0, 1, 1, 2));
        let c1 = nf_add(&half_i_over_p, sc.get(0, 0, 3));
        let c3 = nf_scale(&nf_add(sc.get(2, 1, 2), sc.get(3, 1, 3)), &Coeff::from_ratio(1, 2));
        let want = [c1, NormalForm::zero(), c3, NormalForm::zero()];
        for n in 0..4 {
            let diff = nf_sub(&conn.gamma[0][3][n], &want[n]);
            assert!(alg.is_zero(&diff).unwrap(), "Gamma^1_4 component {n} differs");
        }
    }

    #[test]
    fn fiber_profile_curvature_component() {
        // The theta^1 ^ theta^4 part of R^1_4 reduces to a pure radial
        // expression: (-4 P P_rr + 8 P_r^2 + P^2) / (4 P^4).
        let alg = Algebra::generic();
        let (m, sc, conn) = setup(&alg);
        let cur = curvature(&alg, &m, &sc, &conn);
        let got = cur.riem_up(0, 3, 0, 3);
        let p = m.p.clone();
        let pr = nf_deriv(&alg, &p, Direction::Dr);
        let prr = nf_deriv(&alg, &pr, Direction::Dr);
        let poly = nf_add(
            &nf_add(
                &nf_scale(&nf_mul(&p, &prr), &Coeff::from_int(-4)),
                &nf_scale(&nf_mul(&pr, &pr), &Coeff::from_int(8)),
            ),
            &nf_mul(&p, &p),
        );
        let want = nf_scale(&nf_mul(&poly, &nf_pow(&p, -4).unwrap()), &Coeff::from_ratio(1, 4));
        let diff = nf_sub(&got, &want);
        assert!(
            alg.is_zero(&diff).unwrap(),
            "radial curvature component differs: {}",
            alg.show(&diff)
        );
    }

    #[test]
    fn curvature_identities_on_integrable_reduction() {
        // With vanishing base structure functions the frame algebra is
        // honestly integrable, so the classical symmetries must hold.
        let alg = Algebra::cr_trivial();
        let (m, sc, conn) = setup(&alg);
        let cur = curvature(&alg, &m, &sc, &conn);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in (k + 1)..4 {
                        // First-pair antisymmetry.
                        let d = nf_add(&cur.riem(i, j, k, l), &cur.riem(j, i, k, l));
                        assert!(alg.is_zero(&d).unwrap(), "antisymmetry ({i},{j},{k},{l})");
                        // Pair interchange.
                        let d = nf_sub(&cur.riem(i, j, k, l), &cur.riem(k, l, i, j));
                        assert!(alg.is_zero(&d).unwrap(), "pair symmetry ({i},{j},{k},{l})");
                    }
                }
            }
        }
        // First Bianchi identity: R^i_{[jkl]} = 0.
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let s = nf_add(
                            &nf_add(&cur.riem_up(i, j, k, l), &cur.riem_up(i, k, l, j)),
                            &cur.riem_up(i, l, j, k),
                        );
                        assert!(alg.is_zero(&s).unwrap(), "Bianchi ({i},{j},{k},{l})");
                    }
                }
            }
        }
    }

    #[test]
    fn ricci_contraction_identities() {
        // On the integrable reduction the alignment components of Ricci
        // contract to single curvature components:
        // R_44 = 2 R_2414, R_22 = 2 R_2423, R_24 = R_2412 - R_2434.
        let alg = Algebra::cr_trivial();
        let (m, sc, conn) = setup(&alg);
        let cur = curvature(&alg, &m, &sc, &conn);
        let two = Coeff::from_int(2);
        let d = nf_sub(&cur.ricci[3][3], &nf_scale(&cur.riem(1, 3, 0, 3), &two));
        assert!(alg.is_zero(&d).unwrap(), "R_44 contraction");
        let d = nf_sub(&cur.ricci[1][1], &nf_scale(&cur.riem(1, 3, 1, 2), &two));
        assert!(alg.is_zero(&d).unwrap(), "R_22 contraction");
        let d = nf_sub(
            &cur.ricci[1][3],
            &nf_sub(&cur.riem(1, 3, 0, 1), &cur.riem(1, 3, 2, 3)),
        );
        assert!(alg.is_zero(&d).unwrap(), "R_24 contraction");
    }

    #[test]
    fn shear_free_degeneracy_components_vanish() {
        // Two curvature components vanish identically for the family,
        // before any field equations are imposed: R_2424 and the combination
        // R_2434 + R_2412.
        let alg = Algebra::cr_trivial();
        let (m, sc, conn) = setup(&alg);
        let cur = curvature(&alg, &m, &sc, &conn);
        assert!(alg.is_zero(&cur.riem(1, 3, 1, 3)).unwrap(), "R_2424 should vanish");
        let d = nf_add(&cur.riem(1, 3, 2, 3), &cur.riem(1, 3, 0, 1));
        assert!(alg.is_zero(&d).unwrap(), "R_2434 + R_2412 should vanish");
    }

    #[test]
    fn weyl_reality_pairing() {
        // C_4242 is the conjugate of C_4141: conjugation swaps labels 1 and 2.
        let alg = Algebra::cr_trivial();
        let (m, sc, conn) = setup(&alg);
        let cur = curvature(&alg, &m, &sc, &conn);
        let lhs = cur.weyl(3, 1, 3, 1);
        let rhs = crate::kernel::nf_conj(&alg, &cur.weyl(3, 0, 3, 0));
        assert!(alg.is_zero(&nf_sub(&lhs, &rhs)).unwrap(), "Weyl reality pairing fails");
    }

    #[test]
    fn scalar_curvature_is_real() {
        let alg = Algebra::cr_trivial();
        let (m, sc, conn) = setup(&alg);
        let cur = curvature(&alg, &m, &sc, &conn);
        let d = nf_sub(&cur.scalar, &crate::kernel::nf_conj(&alg, &cur.scalar));
        assert!(alg.is_zero(&d).unwrap(), "scalar curvature must be real");
    }

    #[test]
    fn report_collects_the_right_components() {
        let alg = Algebra::cr_trivial();
        let (m, sc, conn) = setup(&alg);
        let cur = curvature(&alg, &m, &sc, &conn);
        let rep = goldberg_sachs_check(&cur);
        assert_eq!(rep.hypotheses.len(), 3);
        assert_eq!(rep.conclusions.len(), 7);
        assert_eq!(rep.conclusions[2].1, cur.riem(1, 3, 0, 1));
    }
}
