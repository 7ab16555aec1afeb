//! Report assembly and rendering for the subcommands.  JSON output is
//! deterministic: struct fields serialize in declaration order and the
//! parameter map is sorted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use qfeff::curvature::{Connection, Curvature};
use qfeff::embed::EmbeddabilityReport;
use qfeff::kernel::{Algebra, NormalForm};
use qfeff::latex::{latex_connection, latex_curvature, text_one_form};

#[derive(Serialize)]
pub struct Entry {
    pub name: String,
    pub value: String,
}

#[derive(Serialize)]
pub struct CurvatureReport {
    pub structure: String,
    pub parameters: BTreeMap<String, String>,
    pub connection: Vec<Entry>,
    pub ricci: Vec<Entry>,
    pub scalar: String,
    pub psi0: String,
    pub psi1: String,
}

impl CurvatureReport {
    pub fn build(
        alg: &Algebra,
        structure: String,
        parameters: BTreeMap<String, String>,
        conn: &Connection,
        cur: &Curvature,
    ) -> Self {
        let mut connection = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                let row = &conn.gamma[i][j];
                if row.iter().all(NormalForm::is_zero) {
                    continue;
                }
                connection.push(Entry {
                    name: format!("Gamma^{}_{}", i + 1, j + 1),
                    value: text_one_form(alg, row),
                });
            }
        }
        let mut ricci = Vec::new();
        for i in 0..4 {
            for j in i..4 {
                if cur.ricci[i][j].is_zero() {
                    continue;
                }
                ricci.push(Entry {
                    name: format!("R_{}{}", i + 1, j + 1),
                    value: alg.show(&cur.ricci[i][j]),
                });
            }
        }
        CurvatureReport {
            structure,
            parameters,
            connection,
            ricci,
            scalar: alg.show(&cur.scalar),
            psi0: alg.show(&cur.psi0()),
            psi1: alg.show(&cur.psi1()),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "structure: {}", self.structure);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "connection forms (zero ones omitted):");
        for e in &self.connection {
            let _ = writeln!(out, "{} = {}", e.name, e.value);
        }
        let _ = writeln!(out, "Ricci components (zero ones omitted):");
        for e in &self.ricci {
            let _ = writeln!(out, "{} = {}", e.name, e.value);
        }
        let _ = writeln!(out, "scalar = {}", self.scalar);
        let _ = writeln!(out, "Psi0 = {}", self.psi0);
        let _ = writeln!(out, "Psi1 = {}", self.psi1);
        out
    }
}

pub fn curvature_latex(alg: &Algebra, conn: &Connection, cur: &Curvature) -> String {
    format!("{}{}", latex_connection(alg, conn), latex_curvature(alg, cur))
}

#[derive(Serialize)]
pub struct InvarianceSample {
    pub point: [f64; 3],
    pub r: f64,
    /// Quasi-Fefferman mode: largest metric entry gap.  Distinguished-member
    /// mode: the worse of the fit residual and the scale error.
    pub deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_scale: Option<f64>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct InvarianceReport {
    pub structure: String,
    pub mode: &'static str,
    pub gauge_tau: String,
    pub gauge_theta: String,
    pub parameters: BTreeMap<String, String>,
    pub samples: Vec<InvarianceSample>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub verdict: bool,
}

impl InvarianceReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "structure: {}", self.structure);
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(out, "gauge: tau = {}, theta = {}", self.gauge_tau, self.gauge_theta);
        for s in &self.samples {
            let tag = if s.pass { "pass" } else { "FAIL" };
            match s.scale {
                Some(k) => {
                    let _ = writeln!(
                        out,
                        "({:+.4}, {:+.4}, {:+.4}; r = {:+.4}): scale {:.12} expected {:.12} deviation {:.3e} {tag}",
                        s.point[0],
                        s.point[1],
                        s.point[2],
                        s.r,
                        k,
                        s.expected_scale.unwrap_or(f64::NAN),
                        s.deviation,
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "({:+.4}, {:+.4}, {:+.4}; r = {:+.4}): deviation {:.3e} {tag}",
                        s.point[0], s.point[1], s.point[2], s.r, s.deviation,
                    );
                }
            }
        }
        let _ = writeln!(out, "max deviation: {:.3e}", self.max_deviation);
        let _ = writeln!(out, "tolerance: {:.3e}", self.tolerance);
        let _ = writeln!(out, "verdict: {}", if self.verdict { "satisfied" } else { "failed" });
        out
    }

    pub fn latex(&self) -> String {
        let mut rows = String::new();
        for s in &self.samples {
            let _ = writeln!(
                rows,
                "({:+.3}, {:+.3}, {:+.3}) & {:+.3} & {:.3e} & {} \\\\",
                s.point[0],
                s.point[1],
                s.point[2],
                s.r,
                s.deviation,
                if s.pass { "pass" } else { "fail" }
            );
        }
        format!(
            "\\begin{{tabular}}{{llll}}\npoint & $r$ & deviation & verdict \\\\\n\\hline\n{rows}\\end{{tabular}}\n"
        )
    }
}

pub fn check_text(rep: &EmbeddabilityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "branch: {}", branch_name(rep));
    for (k, v) in &rep.parameters {
        let _ = writeln!(out, "{k} = {v}");
    }
    for w in &rep.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for check in &rep.checks {
        let _ =
            writeln!(out, "check {}: {}", check.name, if check.verdict { "pass" } else { "FAIL" });
        for s in &check.samples {
            let worst = s.residuals.iter().cloned().fold(0.0_f64, f64::max);
            let _ = writeln!(
                out,
                "  ({:+.4}, {:+.4}, {:+.4}; r = {:+.4}): worst residual {:.3e} {}",
                s.point[0],
                s.point[1],
                s.point[2],
                s.r,
                worst,
                if s.pass { "pass" } else { "FAIL" },
            );
        }
    }
    if let Some(phi) = &rep.phi_lambda_coefficient {
        let _ = writeln!(out, "phi lambda-coefficient: {phi}");
    }
    let _ = writeln!(out, "tolerance: {:.3e}", rep.tolerance);
    let _ = writeln!(
        out,
        "verdict: {}",
        if rep.criterion_satisfied { "satisfied" } else { "failed" }
    );
    out
}

pub fn check_latex(rep: &EmbeddabilityReport) -> String {
    let mut rows = String::new();
    for check in &rep.checks {
        let worst = check
            .samples
            .iter()
            .flat_map(|s| s.residuals.iter().cloned())
            .fold(0.0_f64, f64::max);
        let _ = writeln!(
            rows,
            "\\texttt{{{}}} & {:.3e} & {} \\\\",
            check.name.replace('_', "\\_"),
            worst,
            if check.verdict { "pass" } else { "fail" }
        );
    }
    format!(
        "\\begin{{tabular}}{{lll}}\ncheck & worst residual & verdict \\\\\n\\hline\n{rows}\\end{{tabular}}\n"
    )
}

fn branch_name(rep: &EmbeddabilityReport) -> &'static str {
    match rep.branch {
        qfeff::embed::Branch::TZero => "t_zero",
        qfeff::embed::Branch::TNonzero => "t_nonzero",
    }
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}
