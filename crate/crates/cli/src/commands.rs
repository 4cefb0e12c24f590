use std::path::{Path, PathBuf};

use qmn::hammerstein::{cone_ball_sampler, K1Report, QEstimate, RadiusSolution};
use qmn::noncompactness::{AxiomSuiteConfig, EnsembleGenerator, NonMonotoneStub, Quasimeasure, SuiteReport};
use qmn::sampling::substream;
use qmn::{
    axiom_suite_with, certify, cone_check, ensemble_iterate, estimate_q, picard_solve_with, quasimeasure, Certificate,
    CertifyOptions, DarboTrace64, EnsembleIteration, SampledFunction64,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, GeneratorConfig};
use crate::ensemble_csv::read_ensemble;
use crate::error::{exit, is_numerical, CliError};
use crate::output::{fmt_f64, Envelope, OutputDir, SCHEMA_VERSION};

/// Result of a command that ran to the point of writing its outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: u8,
    pub files: Vec<PathBuf>,
    /// Human-readable lines for the terminal.
    pub messages: Vec<String>,
}

fn envelope<'a, B>(command: &'static str, config: &'a ExperimentConfig, body: B) -> Envelope<'a, B> {
    Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        config,
        body,
    }
}

#[derive(Debug, Serialize)]
struct OmegaRow {
    delta: f64,
    omega: f64,
}

#[derive(Debug, Serialize)]
struct ChiRow {
    level: usize,
    half_width: f64,
    eps: f64,
    chi: f64,
}

#[derive(Debug, Serialize)]
struct MeasureBody {
    members: usize,
    codomain_dim: usize,
    eta: f64,
    omega0: f64,
    chi0: f64,
    omega_total: f64,
    k_budget: usize,
    level_half_widths: Vec<f64>,
    omega_table: Vec<OmegaRow>,
    chi_table: Vec<ChiRow>,
}

/// Quasimeasure of the ensemble stored at `ensemble`.
pub fn cmd_measure(
    config: &ExperimentConfig,
    ensemble: &Path,
    out: &Path,
    format: Format,
) -> Result<Outcome, CliError> {
    let config = config.clone().resolve()?;
    let grid = config.build_grid()?;
    let params = config.quasimeasure_params(&grid)?;
    let f = read_ensemble(ensemble, &grid)?;
    let report = quasimeasure(&f, &params)?;

    let body = MeasureBody {
        members: f.len(),
        codomain_dim: f.codomain_dim(),
        eta: report.eta_value,
        omega0: report.omega0_value,
        chi0: report.chi0_value,
        omega_total: report.omega_total,
        k_budget: report.k_budget,
        level_half_widths: report.level_half_widths.clone(),
        omega_table: report
            .omega_table
            .iter()
            .map(|e| OmegaRow {
                delta: e.delta,
                omega: e.value,
            })
            .collect(),
        chi_table: report
            .chi_table
            .iter()
            .map(|e| ChiRow {
                level: e.level,
                half_width: e.half_width,
                eps: e.eps,
                chi: e.value,
            })
            .collect(),
    };
    let mut dir = OutputDir::create(out)?;
    if format.json() {
        dir.json("measure.json", &envelope("measure", &config, &body))?;
    }
    if format.csv() {
        dir.csv(
            "omega_table.csv",
            &["delta", "omega"],
            body.omega_table.iter().map(|r| [fmt_f64(r.delta), fmt_f64(r.omega)]),
        )?;
        dir.csv(
            "chi_table.csv",
            &["level", "half_width", "eps", "chi"],
            body.chi_table.iter().map(|r| {
                [
                    r.level.to_string(),
                    fmt_f64(r.half_width),
                    fmt_f64(r.eps),
                    fmt_f64(r.chi),
                ]
            }),
        )?;
    }
    Ok(Outcome {
        exit_code: exit::SUCCESS,
        files: dir.into_written(),
        messages: vec![format!(
            "eta = {}, omega0 = {}, chi0 = {}, Omega = {}",
            body.eta, body.omega0, body.chi0, body.omega_total
        )],
    })
}

#[derive(Debug, Serialize)]
struct CheckRow {
    check: &'static str,
    passed: usize,
    failed: usize,
}

#[derive(Debug, Serialize)]
struct FailureRow {
    trial: usize,
    check: &'static str,
    detail: String,
}

#[derive(Debug, Serialize)]
struct AxiomsBody {
    functional: String,
    adversarial: bool,
    trials: usize,
    all_passed: bool,
    checks: Vec<CheckRow>,
    failures: Vec<FailureRow>,
}

/// Randomized axiom suite; with `adversarial` the suite runs against a
/// deliberately broken functional and is expected to fail.
pub fn cmd_axioms(
    config: &ExperimentConfig,
    adversarial: bool,
    out: &Path,
    format: Format,
) -> Result<Outcome, CliError> {
    let config = config.clone().resolve()?;
    let grid = config.build_grid()?;
    let params = config.quasimeasure_params(&grid)?;
    let suite = AxiomSuiteConfig {
        trials: config.suite.trials,
        seed: config.suite.seed,
        generator: match config.suite.generator {
            GeneratorConfig::Random => EnsembleGenerator::Random,
            GeneratorConfig::Constants => EnsembleGenerator::Constants,
        },
        max_members: config.suite.max_members,
        mix_count: config.suite.mix_count,
    };
    let report: SuiteReport = if adversarial {
        axiom_suite_with(&NonMonotoneStub, &params, &suite)
    } else {
        axiom_suite_with(&Quasimeasure, &params, &suite)
    };
    let body = AxiomsBody {
        functional: report.functional.clone(),
        adversarial,
        trials: report.trials,
        all_passed: report.all_passed(),
        checks: report
            .summaries
            .iter()
            .map(|s| CheckRow {
                check: s.check.label(),
                passed: s.passed,
                failed: s.failed,
            })
            .collect(),
        failures: report
            .failures
            .iter()
            .map(|f| FailureRow {
                trial: f.trial,
                check: f.check.label(),
                detail: f.detail.clone(),
            })
            .collect(),
    };
    let mut dir = OutputDir::create(out)?;
    if format.json() {
        dir.json("axioms.json", &envelope("axioms", &config, &body))?;
    }
    if format.csv() {
        dir.csv(
            "axioms.csv",
            &["check", "passed", "failed"],
            body.checks
                .iter()
                .map(|c| [c.check.to_string(), c.passed.to_string(), c.failed.to_string()]),
        )?;
        dir.csv(
            "axiom_failures.csv",
            &["trial", "check", "detail"],
            body.failures
                .iter()
                .map(|f| [f.trial.to_string(), f.check.to_string(), f.detail.clone()]),
        )?;
    }
    let messages = body
        .checks
        .iter()
        .map(|c| format!("{:<24} passed {:>4}  failed {:>4}", c.check, c.passed, c.failed))
        .collect();
    Ok(Outcome {
        exit_code: if body.all_passed {
            exit::SUCCESS
        } else {
            exit::CERTIFIED_FAILURE
        },
        files: dir.into_written(),
        messages,
    })
}

#[derive(Debug, Serialize)]
struct K1Summary {
    passed: bool,
    worst_margin: f64,
    failing_nodes: Vec<usize>,
}

impl From<&K1Report<f64>> for K1Summary {
    fn from(r: &K1Report<f64>) -> Self {
        K1Summary {
            passed: r.passed(),
            worst_margin: r.worst_margin,
            failing_nodes: r.failing.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct RadiusSummary {
    source: &'static str,
    radius: f64,
    residual: f64,
    bracket: Option<[f64; 2]>,
    g_bracket: Option<[f64; 2]>,
    bisections: Option<usize>,
}

#[derive(Debug, Serialize)]
struct QRow {
    trial: usize,
    chi0_input: f64,
    chi0_image: f64,
    ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct QSummary {
    q_hat: f64,
    flagged: bool,
    degenerate_trials: usize,
    trials: Vec<QRow>,
}

impl From<&QEstimate<f64>> for QSummary {
    fn from(q: &QEstimate<f64>) -> Self {
        QSummary {
            q_hat: q.q_hat,
            flagged: q.flagged,
            degenerate_trials: q.degenerate(),
            trials: q
                .trials
                .iter()
                .map(|t| QRow {
                    trial: t.trial,
                    chi0_input: t.chi0_input,
                    chi0_image: t.chi0_image,
                    ratio: t.ratio,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
struct PicardSummary {
    converged: bool,
    iterations: usize,
    final_residual: f64,
    bound: f64,
    declared_q: Option<f64>,
    peak: f64,
    min_cone_margin: f64,
    cone_margins: Vec<f64>,
    residuals: Vec<f64>,
    solution: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Status {
    exit_code: u8,
    reasons: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
struct HypothesesBody {
    car4_norm: Option<f64>,
    declared_q: Option<f64>,
    k1: Option<K1Summary>,
    radius: Option<RadiusSummary>,
    contraction: Option<QSummary>,
    picard: Option<PicardSummary>,
    error: Option<String>,
    status: Option<Status>,
}

#[derive(Debug, Serialize)]
struct TraceRow {
    index: usize,
    eta: f64,
    omega0: f64,
    chi0: f64,
    omega_total: f64,
    kappa: f64,
    residual: f64,
    hausdorff_to_final: f64,
}

#[derive(Debug, Serialize)]
struct StepRow {
    from: usize,
    omega_lhs: f64,
    omega_rhs: f64,
    omega_pass: bool,
    kappa_lhs: f64,
    kappa_rhs: f64,
    kappa_pass: bool,
}

#[derive(Debug, Serialize)]
struct LipschitzRow {
    index: usize,
    lhs: f64,
    rhs: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct CertificateSummary {
    passed: bool,
    phi_d_slope: f64,
    phi_e_slope: f64,
    slack: f64,
    kappa_informational: bool,
    omega_violations: usize,
    kappa_violations: usize,
    lipschitz_violations: usize,
    first_omega_violation: Option<usize>,
    steps: Vec<StepRow>,
    lipschitz: Vec<LipschitzRow>,
}

impl CertificateSummary {
    fn new(c: &Certificate<f64>, config: &ExperimentConfig) -> Self {
        CertificateSummary {
            passed: c.passed(),
            phi_d_slope: config.darbo.phi_d_slope,
            phi_e_slope: config.darbo.phi_e_slope,
            slack: c.slack,
            kappa_informational: c.kappa_informational,
            omega_violations: c.omega_violations(),
            kappa_violations: c.kappa_violations(),
            lipschitz_violations: c.lipschitz_violations(),
            first_omega_violation: c.first_omega_violation(),
            steps: c
                .steps
                .iter()
                .map(|s| StepRow {
                    from: s.from,
                    omega_lhs: s.omega_lhs,
                    omega_rhs: s.omega_rhs,
                    omega_pass: s.omega_pass,
                    kappa_lhs: s.kappa_lhs,
                    kappa_rhs: s.kappa_rhs,
                    kappa_pass: s.kappa_pass,
                })
                .collect(),
            lipschitz: c
                .lipschitz
                .iter()
                .map(|l| LipschitzRow {
                    index: l.index,
                    lhs: l.lhs,
                    rhs: l.rhs,
                    pass: l.pass,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
struct CertificateBody {
    measured_contraction: Option<f64>,
    probe_nodes: Vec<usize>,
    trace: Vec<TraceRow>,
    certificate: Option<CertificateSummary>,
    error: Option<String>,
}

fn trace_rows(trace: &DarboTrace64) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            index: r.index,
            eta: r.eta,
            omega0: r.omega0,
            chi0: r.chi0,
            omega_total: r.omega_total,
            kappa: r.kappa,
            residual: r.residual,
            hausdorff_to_final: r.hausdorff_to_final,
        })
        .collect()
}

/// Stream index of the start ensemble of the ensemble iteration, disjoint
/// from the contraction-estimate trials.
const START_STREAM: u64 = 1 << 32;

/// Writes whatever has been computed so far; runs on every exit path.
struct HammersteinRun<'a> {
    config: &'a ExperimentConfig,
    format: Format,
    dir: OutputDir,
    hypotheses: HypothesesBody,
    certificate: Option<CertificateBody>,
    reasons: Vec<String>,
    numerical: bool,
    messages: Vec<String>,
}

impl HammersteinRun<'_> {
    fn fail_numerically(&mut self, e: &qmn::Error) {
        self.numerical = true;
        self.reasons.push(e.to_string());
    }

    fn finish(mut self) -> Result<Outcome, CliError> {
        let exit_code = if self.numerical {
            exit::NUMERICAL
        } else if !self.reasons.is_empty() {
            exit::CERTIFIED_FAILURE
        } else {
            exit::SUCCESS
        };
        self.hypotheses.status = Some(Status {
            exit_code,
            reasons: self.reasons.clone(),
        });
        let grid = self.config.build_grid()?;
        if self.format.json() {
            self.dir.json(
                "hypotheses.json",
                &envelope("hammerstein", self.config, &self.hypotheses),
            )?;
            if let Some(cert) = &self.certificate {
                self.dir
                    .json("certificate.json", &envelope("hammerstein", self.config, cert))?;
            }
        }
        if self.format.csv() {
            if let Some(p) = &self.hypotheses.picard {
                let dim = grid.dim();
                let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
                header.push("f_star".into());
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                self.dir.csv(
                    "solution.csv",
                    &header,
                    grid.nodes()
                        .zip(&p.solution)
                        .map(|(x, &v)| x.iter().map(|&c| fmt_f64(c)).chain([fmt_f64(v)]).collect::<Vec<_>>()),
                )?;
                self.dir.csv(
                    "picard.csv",
                    &["iteration", "residual", "cone_margin"],
                    p.residuals
                        .iter()
                        .zip(&p.cone_margins)
                        .enumerate()
                        .map(|(i, (&r, &m))| [(i + 1).to_string(), fmt_f64(r), fmt_f64(m)]),
                )?;
            }
            if let Some(q) = &self.hypotheses.contraction {
                self.dir.csv(
                    "q_table.csv",
                    &["trial", "chi0_input", "chi0_image", "ratio"],
                    q.trials.iter().map(|t| {
                        [
                            t.trial.to_string(),
                            fmt_f64(t.chi0_input),
                            fmt_f64(t.chi0_image),
                            t.ratio.map(fmt_f64).unwrap_or_default(),
                        ]
                    }),
                )?;
            }
            if let Some(cert) = &self.certificate {
                self.dir.csv(
                    "trace.csv",
                    &[
                        "index",
                        "eta",
                        "omega0",
                        "chi0",
                        "omega_total",
                        "kappa",
                        "residual",
                        "hausdorff_to_final",
                    ],
                    cert.trace.iter().map(|r| {
                        [
                            r.index.to_string(),
                            fmt_f64(r.eta),
                            fmt_f64(r.omega0),
                            fmt_f64(r.chi0),
                            fmt_f64(r.omega_total),
                            fmt_f64(r.kappa),
                            fmt_f64(r.residual),
                            fmt_f64(r.hausdorff_to_final),
                        ]
                    }),
                )?;
            }
        }
        let mut messages = self.messages;
        messages.extend(self.reasons.iter().map(|r| format!("failure: {r}")));
        Ok(Outcome {
            exit_code,
            files: self.dir.into_written(),
            messages,
        })
    }
}

/// Hypothesis checks, fixed-point solve and certified ensemble iteration.
///
/// Numerical failures (no radius bracket, divergence, no usable contraction
/// trial) stop the run with exit code 3; everything computed before is still
/// written.
pub fn cmd_hammerstein(config: &ExperimentConfig, out: &Path, format: Format) -> Result<Outcome, CliError> {
    let config = config.clone().resolve()?;
    let grid = config.build_grid()?;
    let params = config.quasimeasure_params(&grid)?;
    let problem = config.build_problem(&grid)?;
    let seed = config.suite.seed;
    let mut run = HammersteinRun {
        config: &config,
        format,
        dir: OutputDir::create(out)?,
        hypotheses: HypothesesBody::default(),
        certificate: None,
        reasons: Vec::new(),
        numerical: false,
        messages: Vec::new(),
    };

    let car4 = problem.car4_norm();
    run.hypotheses.car4_norm = Some(car4);
    run.hypotheses.declared_q = problem.nonlinearity().lipschitz().map(|l| l * car4);
    run.messages.push(format!("car4 norm = {car4}"));

    let k1 = problem.k1_check_all()?;
    if !k1.passed() {
        run.reasons.push(format!(
            "K1 fails at {} nodes (worst margin {})",
            k1.failing.len(),
            k1.worst_margin
        ));
    }
    run.hypotheses.k1 = Some(K1Summary::from(&k1));

    let problem = match config.solver.radius {
        Some(r) => {
            let p = problem.with_radius(r)?;
            run.hypotheses.radius = Some(RadiusSummary {
                source: "config",
                radius: r,
                residual: p.radius_residual(r),
                bracket: None,
                g_bracket: None,
                bisections: None,
            });
            p
        }
        None => match problem.with_solved_radius() {
            Ok((p, sol)) => {
                let RadiusSolution {
                    radius,
                    residual,
                    bracket,
                    g_bracket,
                    bisections,
                } = sol;
                run.hypotheses.radius = Some(RadiusSummary {
                    source: "solved",
                    radius,
                    residual,
                    bracket: Some([bracket.0, bracket.1]),
                    g_bracket: Some([g_bracket.0, g_bracket.1]),
                    bisections: Some(bisections),
                });
                p
            }
            Err(e) if is_numerical(&e) => {
                run.hypotheses.error = Some(format!("radius: {e}"));
                run.fail_numerically(&e);
                return run.finish();
            }
            Err(e) => return Err(e.into()),
        },
    };
    let radius = problem.radius().expect("radius set above");
    run.messages.push(format!("radius R = {radius}"));

    match estimate_q(&problem, &params, config.darbo.q_trials, config.darbo.members, seed) {
        Ok(q) => {
            if q.flagged {
                run.reasons
                    .push(format!("estimated chi0 contraction q = {} is not below 1", q.q_hat));
            }
            run.messages.push(format!("estimated q = {}", q.q_hat));
            run.hypotheses.contraction = Some(QSummary::from(&q));
        }
        Err(e) if is_numerical(&e) => {
            run.hypotheses.error = Some(format!("contraction estimate: {e}"));
            run.fail_numerically(&e);
            return run.finish();
        }
        Err(e) => return Err(e.into()),
    }

    let f0 = SampledFunction64::constant(&grid, &[0.0])?;
    let mut cone_margins = Vec::new();
    let mut cone_error = None;
    let picard = picard_solve_with(
        &problem,
        &f0,
        config.solver.tol,
        config.solver.max_iter,
        |_, f, _| match cone_check(f, problem.cone()) {
            Ok(c) => cone_margins.push(c.margin),
            Err(e) => {
                cone_margins.push(f64::NAN);
                cone_error.get_or_insert(e);
            }
        },
    );
    match picard {
        Ok(p) => {
            if let Some(e) = cone_error {
                return Err(e.into());
            }
            let min_cone_margin = cone_margins.iter().copied().fold(f64::INFINITY, f64::min);
            if !p.converged {
                run.numerical = true;
                run.reasons.push(format!(
                    "Picard iteration did not reach tol {} in {} steps (last residual {})",
                    config.solver.tol,
                    config.solver.max_iter,
                    p.residuals.last().copied().unwrap_or(f64::NAN)
                ));
            }
            if min_cone_margin < -config.darbo.slack {
                run.reasons
                    .push(format!("a Picard iterate leaves the cone (margin {min_cone_margin})"));
            }
            let peak = p.f_star.sup_norm();
            run.messages.push(format!(
                "Picard: converged = {}, {} iterations, peak = {peak}",
                p.converged,
                p.iterations()
            ));
            run.hypotheses.picard = Some(PicardSummary {
                converged: p.converged,
                iterations: p.iterations(),
                final_residual: p.final_residual,
                bound: p.bound,
                declared_q: p.declared_q,
                peak,
                min_cone_margin,
                cone_margins,
                residuals: p.residuals.clone(),
                solution: p.f_star.values().to_vec(),
            });
        }
        Err(e) if is_numerical(&e) => {
            run.hypotheses.error = Some(format!("Picard: {e}"));
            run.fail_numerically(&e);
            return run.finish();
        }
        Err(e) => return Err(e.into()),
    }

    let spread = params.smallest_eps() / 1.5;
    let c1 = cone_ball_sampler(&problem, config.darbo.members, spread)?(&mut substream(seed, START_STREAM))?;
    let setup = EnsembleIteration {
        iters: config.darbo.iters,
        params: params.clone(),
        probe_nodes: config.darbo.probes.clone().expect("resolved"),
        kappa_budget: config.darbo.kappa_budget,
        seed,
    };
    let trace = match ensemble_iterate(&problem, &c1, &setup) {
        Ok(trace) => trace,
        Err(aborted) => {
            let rows = aborted.partial.as_ref().map(trace_rows).unwrap_or_default();
            run.certificate = Some(CertificateBody {
                measured_contraction: aborted.partial.as_ref().and_then(|t| t.measured_contraction()),
                probe_nodes: setup.probe_nodes.clone(),
                trace: rows,
                certificate: None,
                error: Some(aborted.error.to_string()),
            });
            if is_numerical(&aborted.error) {
                run.fail_numerically(&aborted.error);
                return run.finish();
            }
            return Err(aborted.error.into());
        }
    };
    let options = CertifyOptions {
        slack: config.darbo.slack,
        kappa_informational: config.darbo.kappa_informational,
    };
    let cert = certify(&trace, &config.phi_d()?, &config.phi_e()?, &options)?;
    if !cert.passed() {
        run.reasons.push(format!(
            "certificate fails: {} Omega, {} kappa, {} Lipschitz violations",
            cert.omega_violations(),
            cert.kappa_violations(),
            cert.lipschitz_violations()
        ));
    }
    let measured = trace.measured_contraction();
    run.messages.push(format!(
        "certificate passed = {}, measured Omega contraction = {}",
        cert.passed(),
        measured.map_or("n/a".to_string(), |q| q.to_string())
    ));
    run.certificate = Some(CertificateBody {
        measured_contraction: measured,
        probe_nodes: trace.probe_nodes.clone(),
        trace: trace_rows(&trace),
        certificate: Some(CertificateSummary::new(&cert, &config)),
        error: None,
    });
    run.finish()
}
