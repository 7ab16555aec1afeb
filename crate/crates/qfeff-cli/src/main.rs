//! Command line front end for the metric family: symbolic curvature dumps,
//! numeric embeddability checks, and gauge-invariance verification.
//!
//! Exit codes: 0 when the requested criterion holds, 1 when a check ran and
//! failed, 2 for usage or configuration errors.

mod config;
mod report;

use std::collections::BTreeMap;
use std::fs;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use qfeff::bundle::{build_quasi_fefferman, structure_constants};
use qfeff::cr::GaugeTransform;
use qfeff::curvature::{curvature, levi_civita};
use qfeff::embed::{build_embeddable_metric, check_embeddability, p_profile, QuasiFeffermanData};
use qfeff::fd::{fefferman_gauge_fit, gauge_deviation};
use qfeff::kernel::Algebra;

use config::{load_structure, CommonArgs, OutputFormat, RunConfig};
use report::{InvarianceReport, InvarianceSample};

#[derive(Parser)]
#[command(name = "qfeff", version, about = "Curvature and embeddability tools for a family of Lorentzian metrics over three-dimensional CR structures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the connection forms and curvature of the metric family.
    Curvature(CommonArgs),
    /// Test whether the supplied data satisfies the embeddability criterion.
    Check(CommonArgs),
    /// Verify numerically that a gauge change preserves the metric family.
    Invariance(CommonArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qfeff: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Curvature(args) => cmd_curvature(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::Invariance(args) => cmd_invariance(args),
    }
}

/// Reject flag combinations that over-determine the metric data.
fn check_conflicts(cfg: &RunConfig) -> Result<()> {
    let has_profile = cfg.a.is_some() || cfg.s.is_some();
    if cfg.psi.is_some() && (cfg.p.is_some() || has_profile || cfg.x.is_some()) {
        bail!("--psi already determines the amplitude, phase, and twist; drop --P/--a/--s/--x");
    }
    if cfg.p.is_some() && has_profile {
        bail!("--P conflicts with --a/--s: the profile determines P");
    }
    Ok(())
}

fn cmd_curvature(args: CommonArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args)?;
    check_conflicts(&cfg)?;

    // The flat model has a closed contact form and vanishing c; encode both
    // so its dumps collapse to the constants.  Anything else keeps the
    // general structure functions symbolic.
    let mut alg =
        if cfg.structure == "heisenberg" { Algebra::mu_exact() } else { Algebra::generic() };
    if cfg.structure == "heisenberg" {
        let zero = alg.parse_nf("0")?;
        let c_id = alg.std.c;
        alg.install_substitution(c_id, zero);
    }
    let st = load_structure(&alg, &cfg.structure)?;

    let mut parameters = BTreeMap::new();
    if let Some(psi) = &cfg.psi {
        let h_text = cfg.h.clone().unwrap_or_else(|| "0".to_string());
        let data = build_embeddable_metric(
            &alg,
            &st,
            &alg.parse(psi)?,
            &alg.parse(&h_text)?,
            &[],
        )?;
        for w in &data.warnings {
            eprintln!("qfeff: warning: {w}");
        }
        for (id, nf) in &data.bindings {
            parameters.insert(alg.symbols.name(*id).to_string(), alg.show(nf));
        }
        for (id, e) in &data.functions {
            parameters.insert(alg.symbols.name(*id).to_string(), e.show(&alg.symbols));
        }
        parameters.insert("psi".to_string(), psi.clone());
        for (id, nf) in data.bindings {
            alg.install_substitution(id, nf);
        }
    } else {
        if let Some(p) = &cfg.p {
            let nf = alg.parse_nf(p)?;
            if alg.is_zero(&nf)? {
                bail!("P must be nonvanishing");
            }
            parameters.insert("P".to_string(), p.clone());
            let id = alg.std.p;
            alg.install_substitution(id, nf);
        } else if cfg.a.is_some() || cfg.s.is_some() {
            let a_text = cfg.a.clone().unwrap_or_else(|| "1".to_string());
            let s_text = cfg.s.clone().unwrap_or_else(|| "0".to_string());
            let a_nf = alg.parse_nf(&a_text)?;
            if alg.is_zero(&a_nf)? {
                bail!("the amplitude a must be nonvanishing");
            }
            let s_nf = alg.parse_nf(&s_text)?;
            parameters.insert("a".to_string(), a_text);
            parameters.insert("s".to_string(), s_text);
            let (a_id, s_id, p_id) = (alg.std.a, alg.std.s, alg.std.p);
            alg.install_substitution(a_id, a_nf);
            alg.install_substitution(s_id, s_nf);
            let profile = p_profile(&alg)?;
            alg.install_substitution(p_id, profile);
        }
        if let Some(x) = &cfg.x {
            let nf = alg.parse_nf(x)?;
            parameters.insert("x".to_string(), x.clone());
            let id = alg.std.x;
            alg.install_substitution(id, nf);
        }
        if let Some(h) = &cfg.h {
            let nf = alg.parse_nf(h)?;
            parameters.insert("H".to_string(), h.clone());
            let id = alg.std.hh;
            alg.install_substitution(id, nf);
        }
    }

    let m = build_quasi_fefferman(&alg);
    let sc = structure_constants(&alg, &m)?;
    let conn = levi_civita(&alg, &sc)?;
    let cur = curvature(&alg, &m, &sc, &conn);

    let rep = report::CurvatureReport::build(&alg, st.name.clone(), parameters, &conn, &cur);
    let rendered = match cfg.format {
        OutputFormat::Text => rep.text(),
        OutputFormat::Json => report::to_json(&rep)?,
        OutputFormat::Latex => report::curvature_latex(&alg, &conn, &cur),
    };
    emit(&cfg, &rendered)?;
    Ok(0)
}

/// Assemble metric data from the command line parameters, defaulting the
/// section to the flat unit one.
fn resolve_data(
    alg: &Algebra,
    cfg: &RunConfig,
    st: &qfeff::cr::CoordinateCRStructure,
    probes: &[[f64; 3]],
) -> Result<QuasiFeffermanData> {
    check_conflicts(cfg)?;
    let or = |opt: &Option<String>, default: &str| -> String {
        opt.clone().unwrap_or_else(|| default.to_string())
    };
    if let Some(psi) = &cfg.psi {
        let data = build_embeddable_metric(
            alg,
            st,
            &alg.parse(psi)?,
            &alg.parse(&or(&cfg.h, "0"))?,
            probes,
        )?;
        for w in &data.warnings {
            eprintln!("qfeff: warning: {w}");
        }
        Ok(data)
    } else if cfg.a.is_some() || cfg.s.is_some() {
        QuasiFeffermanData::from_profile(
            alg,
            &or(&cfg.a, "1"),
            &or(&cfg.s, "0"),
            &or(&cfg.x, "0"),
            &or(&cfg.h, "0"),
        )
        .map_err(Into::into)
    } else {
        QuasiFeffermanData::from_parameters(alg, &or(&cfg.p, "1"), &or(&cfg.x, "0"), &or(&cfg.h, "0"))
            .map_err(Into::into)
    }
}

fn cmd_check(args: CommonArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args)?;
    let alg = Algebra::mu_exact();
    let st = load_structure(&alg, &cfg.structure)?;
    let points = cfg.sample_points();
    let samples: Vec<([f64; 3], f64)> =
        points.iter().map(|q| ([q[0], q[1], q[2]], q[3])).collect();
    let probes: Vec<[f64; 3]> = samples.iter().map(|(b, _)| *b).collect();

    let data = resolve_data(&alg, &cfg, &st, &probes)?;
    let mut rep = check_embeddability(&st, &data, &samples, cfg.tolerance)?;
    rep.parameters.insert("structure".to_string(), st.name.clone());
    if let Some(psi) = &cfg.psi {
        rep.parameters.insert("psi".to_string(), psi.clone());
    }

    let rendered = match cfg.format {
        OutputFormat::Text => report::check_text(&rep),
        OutputFormat::Json => report::to_json(&rep)?,
        OutputFormat::Latex => report::check_latex(&rep),
    };
    emit(&cfg, &rendered)?;
    Ok(if rep.criterion_satisfied { 0 } else { 1 })
}

fn cmd_invariance(args: CommonArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args)?;
    let Some((tau_text, theta_text)) = cfg.gauge.clone() else {
        bail!("invariance needs a gauge: pass --gauge-tau/--gauge-theta or a [gauge] config block");
    };
    let alg = Algebra::mu_exact();
    let st = load_structure(&alg, &cfg.structure)?;
    let gauge = GaugeTransform::parse(&alg, &tau_text, &theta_text)?;
    let points = cfg.sample_points();

    let mut samples = Vec::new();
    let mut max_dev: f64 = 0.0;
    let mut parameters = BTreeMap::new();

    if cfg.fefferman {
        for q in &points {
            let fit = fefferman_gauge_fit(&st, &gauge, *q)?;
            let dev = fit.residual.max((fit.scale - fit.expected).abs());
            max_dev = max_dev.max(dev);
            samples.push(InvarianceSample {
                point: [q[0], q[1], q[2]],
                r: q[3],
                deviation: dev,
                scale: Some(fit.scale),
                expected_scale: Some(fit.expected),
                pass: dev <= cfg.tolerance,
            });
        }
    } else {
        let data = resolve_data(&alg, &cfg, &st, &[])?;
        for (id, nf) in &data.bindings {
            parameters.insert(alg.symbols.name(*id).to_string(), alg.show(nf));
        }
        for (id, e) in &data.functions {
            parameters.insert(alg.symbols.name(*id).to_string(), e.show(&alg.symbols));
        }
        for q in &points {
            let dev = gauge_deviation(&alg, &st, &data, &gauge, *q)?;
            max_dev = max_dev.max(dev);
            samples.push(InvarianceSample {
                point: [q[0], q[1], q[2]],
                r: q[3],
                deviation: dev,
                scale: None,
                expected_scale: None,
                pass: dev <= cfg.tolerance,
            });
        }
    }

    let rep = InvarianceReport {
        structure: st.name.clone(),
        mode: if cfg.fefferman { "fefferman" } else { "quasi_fefferman" },
        gauge_tau: tau_text,
        gauge_theta: theta_text,
        parameters,
        samples,
        max_deviation: max_dev,
        tolerance: cfg.tolerance,
        verdict: max_dev <= cfg.tolerance,
    };

    let rendered = match cfg.format {
        OutputFormat::Text => rep.text(),
        OutputFormat::Json => report::to_json(&rep)?,
        OutputFormat::Latex => rep.latex(),
    };
    emit(&cfg, &rendered)?;
    Ok(if rep.verdict { 0 } else { 1 })
}

fn emit(cfg: &RunConfig, rendered: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, rendered)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(())
}
