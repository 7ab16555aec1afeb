//! LaTeX rendering of symbolic output in the index notation of the adapted
//! coframe: theta^i for coframe covectors, Gamma^i_j for connection forms,
//! R_{ij} for Ricci components, Psi_0 and Psi_1 for the alignment scalars.

use num::{BigRational, One, Signed, Zero};

use crate::curvature::{Connection, Curvature};
use crate::kernel::{nf_scale, Algebra, Coeff, Direction, Factor, NormalForm, Word};

fn latex_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else if q.is_negative() {
        format!("-\\tfrac{{{}}}{{{}}}", -q.numer(), q.denom())
    } else {
        format!("\\tfrac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

pub fn latex_coeff(c: &Coeff) -> String {
    if c.im.is_zero() {
        latex_rational(&c.re)
    } else if c.re.is_zero() {
        if c.im.is_one() {
            "i".to_string()
        } else if (-&c.im).is_one() {
            "-i".to_string()
        } else {
            format!("{} i", latex_rational(&c.im))
        }
    } else {
        let im = if c.im.is_negative() {
            format!(" - {} i", latex_rational(&-&c.im))
        } else {
            format!(" + {} i", latex_rational(&c.im))
        };
        format!("({}{})", latex_rational(&c.re), im)
    }
}

fn latex_atom_name(name: &str) -> String {
    match name {
        "alpha" => "\\alpha".into(),
        "alphabar" => "\\bar{\\alpha}".into(),
        "beta" => "\\beta".into(),
        "betabar" => "\\bar{\\beta}".into(),
        "cbar" => "\\bar{c}".into(),
        "xbar" => "\\bar{x}".into(),
        "psi" => "\\psi".into(),
        "psibar" => "\\bar{\\psi}".into(),
        "tau" => "\\tau".into(),
        "theta" => "\\theta".into(),
        "loga2" => "\\log a^{2}".into(),
        "x1" => "x_{1}".into(),
        "x2" => "x_{2}".into(),
        "x3" => "x_{3}".into(),
        other => other.into(),
    }
}

fn latex_word(w: Word) -> String {
    let ops = ["\\partial", "\\bar{\\partial}", "\\partial_{0}", "\\partial_{r}"];
    let mut out = String::new();
    for (op, &e) in ops.iter().zip(w.0.iter()) {
        match e {
            0 => {}
            1 => {
                out.push_str(op);
                out.push(' ');
            }
            k => {
                out.push_str(&format!("{op}^{{{k}}} "));
            }
        }
    }
    out
}

/// true when the rendered body is safe to exponentiate without parentheses.
fn simple_body(body: &str) -> bool {
    body.chars().count() == 1 || (body.starts_with('\\') && !body.contains(' '))
}

pub fn latex_nf(alg: &Algebra, nf: &NormalForm) -> String {
    if nf.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, m) in nf.0.iter().enumerate() {
        let mut coeff = m.coeff.clone();
        // Pull a leading sign out of purely real or purely imaginary
        // coefficients so sums read naturally.
        let negative = (coeff.im.is_zero() && coeff.re.is_negative())
            || (coeff.re.is_zero() && coeff.im.is_negative());
        if negative {
            coeff = -&coeff;
        }
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mut parts: Vec<String> = Vec::new();
        if !coeff.is_one() || m.factors.is_empty() {
            parts.push(latex_coeff(&coeff));
        }
        for (f, p) in &m.factors {
            let body = match f {
                Factor::Atom(w, id) => {
                    format!("{}{}", latex_word(*w), latex_atom_name(alg.symbols.name(*id)))
                }
                Factor::Exp(u) => {
                    let arg = if *p == 1 {
                        u.clone()
                    } else {
                        nf_scale(u, &Coeff::from_int(i64::from(*p)))
                    };
                    parts.push(format!("e^{{{}}}", latex_nf(alg, &arg)));
                    continue;
                }
                Factor::Sin(u) => {
                    let pw = if *p == 1 { String::new() } else { format!("^{{{p}}}") };
                    parts.push(format!("\\sin{pw}\\!\\left({}\\right)", latex_nf(alg, u)));
                    continue;
                }
                Factor::Cos(u) => {
                    let pw = if *p == 1 { String::new() } else { format!("^{{{p}}}") };
                    parts.push(format!("\\cos{pw}\\!\\left({}\\right)", latex_nf(alg, u)));
                    continue;
                }
                Factor::SumInv(s) => format!("\\left({}\\right)", latex_nf(alg, s)),
            };
            if *p == 1 {
                parts.push(body);
            } else if simple_body(&body) {
                parts.push(format!("{body}^{{{p}}}"));
            } else {
                parts.push(format!("\\left({body}\\right)^{{{p}}}"));
            }
        }
        out.push_str(&parts.join("\\, "));
    }
    out
}

/// One-form over the theta coframe: coefficients paired with theta^{n+1}.
pub fn latex_one_form(alg: &Algebra, coeffs: &[NormalForm; 4]) -> String {
    let mut terms = Vec::new();
    for (n, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let body = latex_nf(alg, c);
        let wrapped = if c.0.len() > 1 { format!("\\left({body}\\right)") } else { body };
        terms.push(format!("{wrapped}\\, \\theta^{{{}}}", n + 1));
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// All sixteen connection forms as an align* block, zeros elided.
pub fn latex_connection(alg: &Algebra, conn: &Connection) -> String {
    let mut lines = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let row = &conn.gamma[i][j];
            if row.iter().all(NormalForm::is_zero) {
                continue;
            }
            lines.push(format!(
                "\\Gamma^{{{}}}_{{{}}} &= {} \\\\",
                i + 1,
                j + 1,
                latex_one_form(alg, row)
            ));
        }
    }
    format!("\\begin{{align*}}\n{}\n\\end{{align*}}\n", lines.join("\n"))
}

/// Ricci components (upper triangle), scalar curvature, and the two
/// alignment scalars as an align* block.
pub fn latex_curvature(alg: &Algebra, cur: &Curvature) -> String {
    let mut lines = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            if cur.ricci[i][j].is_zero() {
                continue;
            }
            lines.push(format!(
                "R_{{{}{}}} &= {} \\\\",
                i + 1,
                j + 1,
                latex_nf(alg, &cur.ricci[i][j])
            ));
        }
    }
    lines.push(format!("R &= {} \\\\", latex_nf(alg, &cur.scalar)));
    lines.push(format!("\\Psi_0 &= {} \\\\", latex_nf(alg, &cur.psi0())));
    lines.push(format!("\\Psi_1 &= {} \\\\", latex_nf(alg, &cur.psi1())));
    format!("\\begin{{align*}}\n{}\n\\end{{align*}}\n", lines.join("\n"))
}

/// Plain-text rendering of a one-form over the theta coframe, for terminal
/// output: `coeff*theta^1 + ...`.
pub fn text_one_form(alg: &Algebra, coeffs: &[NormalForm; 4]) -> String {
    let mut terms = Vec::new();
    for (n, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        terms.push(format!("({})*theta^{}", alg.show(c), n + 1));
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// Keep the derivative-direction names available to rendering callers.
pub fn direction_ops() -> [(&'static str, Direction); 4] {
    [
        ("\\partial", Direction::D1),
        ("\\bar{\\partial}", Direction::D2),
        ("\\partial_{0}", Direction::D0),
        ("\\partial_{r}", Direction::Dr),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{build_quasi_fefferman, structure_constants};
    use crate::curvature::levi_civita;
    use crate::kernel::{nf_add, nf_cos_pow, nf_exp, nf_pow, Expr};

    #[test]
    fn coefficients_render_exactly() {
        assert_eq!(latex_coeff(&Coeff::from_int(3)), "3");
        assert_eq!(latex_coeff(&Coeff::from_ratio(-1, 2)), "-\\tfrac{1}{2}");
        assert_eq!(latex_coeff(&Coeff::i()), "i");
        assert_eq!(latex_coeff(&-&Coeff::i()), "-i");
        assert_eq!(latex_coeff(&Coeff::complex_ratio(1, 1, -1, 3)), "(1 - \\tfrac{1}{3} i)");
    }

    #[test]
    fn normal_forms_render_with_words_and_functions() {
        let alg = Algebra::mu_exact();
        let sa = alg.std;
        let e = Expr::mul(vec![
            Expr::num(2),
            Expr::atom(sa.c).deriv(Direction::D1),
            Expr::pow(Expr::atom(sa.p), -2),
        ]);
        let nf = alg.normalize(&e).unwrap();
        assert_eq!(latex_nf(&alg, &nf), "2\\, P^{-2}\\, \\partial c");

        let half = Coeff::from_ratio(1, 2);
        let arg = nf_scale(&nf_add(&alg.atom(sa.r), &alg.atom(sa.s)), &half);
        let sec = nf_cos_pow(&arg, -1).unwrap();
        let s = latex_nf(&alg, &sec);
        assert_eq!(s, "\\cos^{-1}\\!\\left(\\tfrac{1}{2}\\, s + \\tfrac{1}{2}\\, r\\right)");

        let ex = nf_pow(&nf_exp(&alg.atom(sa.s)), 2).unwrap();
        assert_eq!(latex_nf(&alg, &ex), "e^{2\\, s}");

        assert_eq!(latex_nf(&alg, &NormalForm::zero()), "0");
    }

    #[test]
    fn sums_pull_leading_signs() {
        let alg = Algebra::mu_exact();
        let sa = alg.std;
        let e = Expr::add(vec![
            Expr::atom(sa.a),
            Expr::mul(vec![Expr::num(-2), Expr::atom(sa.s)]),
        ]);
        let nf = alg.normalize(&e).unwrap();
        assert_eq!(latex_nf(&alg, &nf), "a - 2\\, s");
    }

    #[test]
    fn trivial_connection_dump_shows_the_mixing_form() {
        // P = 1, x = 0, H = 0, flat base data: Gamma^1_4 = (i/2) theta^1.
        let mut alg = Algebra::mu_exact();
        let sa = alg.std;
        for id in [sa.c, sa.x, sa.hh, sa.loga2, sa.s] {
            alg.install_substitution(id, NormalForm::zero());
        }
        alg.install_substitution(sa.p, NormalForm::one());
        let m = build_quasi_fefferman(&alg);
        let sc = structure_constants(&alg, &m).unwrap();
        let conn = levi_civita(&alg, &sc).unwrap();
        let dump = latex_connection(&alg, &conn);
        assert!(
            dump.contains("\\Gamma^{1}_{4} &= \\tfrac{1}{2} i\\, \\theta^{1}"),
            "dump:\n{dump}"
        );
        let text = text_one_form(&alg, &conn.gamma[0][3]);
        assert_eq!(text, "(1/2*I)*theta^1");
    }
}
