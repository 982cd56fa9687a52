//! Executes configured studies and writes machine-readable reports.
//!
//! Every JSON report carries a provenance header (library version, config
//! hash, seed); file contents are byte-identical across runs with the same
//! configuration, independent of worker count.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use crate::config::{CommandKind, ExperimentConfig, OutputFormat};
use crate::example::{ExampleParams, PerturbationSample};
use crate::geometry::DomainSpec;
use crate::moments::{
    self, moment_monte_carlo, moment_oracle, taylor_moment_approximation, Quantity, StudyTarget,
};
use crate::report::{format_float, to_csv, ConvergenceReport, ResidualReport};
use crate::verify;
use crate::{Error, Result};

/// Stable mapping from report identifiers to the equation labels used in
/// the derivation notes accompanying this library.
pub fn equation_label(report_id: &str) -> &'static str {
    const TABLE: &[(&str, &str)] = &[
        ("sd-interior-momentum-with-load-rate", "eq.dom.S+load"),
        ("sd-interior-momentum", "eq.dom.S"),
        ("sd-interior-helmholtz", "eq.dom.F"),
        ("sd-constitutive", "eq.sig.dom"),
        ("sd-dirichlet-", "eq.bc.u"),
        ("sd-interface-traction-", "eq.bc.sig.prime"),
        ("sd-interface-flux-", "eq.sd.bc2+data"),
        ("sd-reference-", "sec5.step1"),
        ("sh-interior-momentum", "eq.dom.S.h"),
        ("sh-interior-helmholtz", "eq.dom.F.h"),
        ("sh-constitutive", "eq.sig.dom.h"),
        ("sh-dirichlet-", "eq.bc.u.h"),
        ("sh-reference-", "sec5.step2"),
        ("sh-interface-data-", "def.Hi"),
        ("hadamard-", "lem.shape.iv-v"),
        ("material-derivative-", "def.app.sd"),
        ("mean-", "thm.main.mean"),
        ("variance-", "thm.main.var"),
        ("taylor-remainder-", "stoc.tay"),
        ("bilinear-", "def.adb"),
        ("amplitude-", "cov_rho1"),
        ("mc-consistency-", "thm.main"),
    ];
    for (prefix, label) in TABLE {
        if report_id.starts_with(prefix) {
            return label;
        }
    }
    "unmapped"
}

#[derive(Debug, Clone, Serialize)]
struct Header {
    library_version: &'static str,
    config_hash: String,
    seed: u64,
}

fn header(config: &ExperimentConfig) -> Header {
    Header {
        library_version: env!("CARGO_PKG_VERSION"),
        config_hash: config.content_hash(),
        seed: config.seed,
    }
}

/// Outcome of a run: written files plus the overall pass flag.
#[derive(Debug)]
pub struct RunOutcome {
    pub all_passed: bool,
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

struct Writer<'c> {
    config: &'c ExperimentConfig,
    files: Vec<PathBuf>,
}

impl<'c> Writer<'c> {
    fn new(config: &'c ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(&config.out_dir)?;
        Ok(Writer {
            config,
            files: Vec::new(),
        })
    }

    fn write_json(&mut self, name: &str, payload: serde_json::Value) -> Result<()> {
        let body = json!({
            "header": header(self.config),
            "report": payload,
        });
        let path = self.config.out_dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(&body)? + "\n")?;
        self.files.push(path);
        Ok(())
    }

    fn write_csv(&mut self, name: &str, header_row: &[&str], rows: &[Vec<String>]) -> Result<()> {
        if self.config.format != OutputFormat::Csv {
            return Ok(());
        }
        let path = self.config.out_dir.join(name);
        fs::write(&path, to_csv(header_row, rows))?;
        self.files.push(path);
        Ok(())
    }
}

fn residual_summary(reports: &[ResidualReport]) -> Vec<serde_json::Value> {
    reports
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "equation": equation_label(&r.id),
                "norm_max": r.norm_max,
                "norm_rms": r.norm_rms,
                "tolerance": r.tolerance,
                "pass": r.pass,
                "n_points": r.n_points,
            })
        })
        .collect()
}

fn convergence_summary(reports: &[ConvergenceReport]) -> Vec<serde_json::Value> {
    reports
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "equation": equation_label(&r.id),
                "eps_list": r.eps_list,
                "errors": r.errors,
                "slope": r.slope,
                "intercept": r.intercept,
                "pairwise_slopes": r.pairwise_slopes,
                "target_slope": r.target_slope,
                "pass": r.pass,
            })
        })
        .collect()
}

fn apply_tolerance_scale(reports: &mut [ResidualReport], scale: f64) {
    if scale == 1.0 {
        return;
    }
    for r in reports.iter_mut() {
        r.tolerance *= scale;
        r.pass = r.norm_max <= r.tolerance;
    }
}

fn collect_failures(failures: &mut Vec<String>, residuals: &[ResidualReport]) {
    for r in residuals {
        if !r.pass {
            failures.push(format!(
                "{} (max {:.3e} > {:.1e})",
                r.id, r.norm_max, r.tolerance
            ));
        }
    }
}

fn collect_convergence_failures(failures: &mut Vec<String>, reports: &[ConvergenceReport]) {
    for r in reports {
        if !r.pass {
            failures.push(format!(
                "{} (slope {:.3} < {:.2})",
                r.id, r.slope, r.target_slope
            ));
        }
    }
}

fn convergence_plot_rows(r: &ConvergenceReport) -> Vec<Vec<String>> {
    r.plot_table()
        .iter()
        .map(|(le, lerr, lref)| vec![format_float(*le), format_float(*lerr), format_float(*lref)])
        .collect()
}

fn sample_from(config: &ExperimentConfig) -> Result<PerturbationSample> {
    PerturbationSample::with_second(config.epsilon, config.amplitude, config.amplitude_b)
}

/// Runs the configured command and writes its reports.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let params = ExampleParams::default();
    let mut writer = Writer::new(config)?;
    let mut failures = Vec::new();

    let wants = |c: CommandKind| config.command == c || config.command == CommandKind::All;

    if wants(CommandKind::VerifyDerivative) {
        let sample = sample_from(config)?;
        let mut reports =
            verify::verify_shape_derivative_interior(&params, &sample, config.interior_points);
        reports.extend(verify::verify_shape_derivative_boundary(
            &params,
            &sample,
            config.nodes_per_segment,
        ));
        apply_tolerance_scale(&mut reports, config.tolerance_scale);
        collect_failures(&mut failures, &reports);
        writer.write_json("verify_derivative.json", json!(residual_summary(&reports)))?;
        writer.write_csv(
            "verify_derivative.csv",
            &[
                "id",
                "norm_max",
                "norm_rms",
                "tolerance",
                "pass",
                "n_points",
            ],
            &reports
                .iter()
                .map(|r| {
                    vec![
                        r.id.clone(),
                        format_float(r.norm_max),
                        format_float(r.norm_rms),
                        format_float(r.tolerance),
                        r.pass.to_string(),
                        r.n_points.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }

    if wants(CommandKind::VerifyHessian) {
        let sample = sample_from(config)?;
        let mut reports = verify::verify_shape_hessian(
            &params,
            &sample,
            config.interior_points,
            config.nodes_per_segment,
        );
        apply_tolerance_scale(&mut reports, config.tolerance_scale);
        collect_failures(&mut failures, &reports);
        writer.write_json("verify_hessian.json", json!(residual_summary(&reports)))?;
        writer.write_csv(
            "verify_hessian.csv",
            &[
                "id",
                "norm_max",
                "norm_rms",
                "tolerance",
                "pass",
                "n_points",
            ],
            &reports
                .iter()
                .map(|r| {
                    vec![
                        r.id.clone(),
                        format_float(r.norm_max),
                        format_float(r.norm_rms),
                        format_float(r.tolerance),
                        r.pass.to_string(),
                        r.n_points.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }

    if wants(CommandKind::BilinearForms) {
        let mut reports = bilinear_study(&params, config)?;
        apply_tolerance_scale(&mut reports, config.tolerance_scale);
        collect_failures(&mut failures, &reports);
        writer.write_json("bilinear_forms.json", json!(residual_summary(&reports)))?;
    }

    if wants(CommandKind::Hadamard) {
        let dom = DomainSpec {
            cells_per_unit: config.grid,
            points_per_cell: config.quad_degree,
            ..DomainSpec::default()
        };
        let reports = verify::standard_hadamard_suite_on(
            &dom,
            &params,
            &verify::HADAMARD_EPS_LIST,
            config.nodes_per_segment.min(64),
        )?;
        collect_convergence_failures(&mut failures, &reports);
        writer.write_json("hadamard.json", json!(convergence_summary(&reports)))?;
        for r in &reports {
            writer.write_csv(
                &format!("plot_{}.csv", r.id),
                &["log10_eps", "log10_error", "reference_slope_line"],
                &convergence_plot_rows(r),
            )?;
        }
    }

    if wants(CommandKind::Moments) {
        let (mut reports, rows) = moments_study(&params, config)?;
        apply_tolerance_scale(&mut reports, config.tolerance_scale);
        collect_failures(&mut failures, &reports);
        writer.write_json(
            "moments.json",
            json!({
                "checks": residual_summary(&reports),
                "estimates": rows.iter().map(|r| {
                    json!({
                        "point_x": r.0, "point_y": r.1, "eps": r.2,
                        "value": r.3, "stderr": r.4, "n": r.5, "method": r.6,
                    })
                }).collect::<Vec<_>>(),
            }),
        )?;
        writer.write_csv(
            "moments.csv",
            &[
                "point_x", "point_y", "eps", "value", "stderr", "n", "method",
            ],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        format_float(r.0),
                        format_float(r.1),
                        format_float(r.2),
                        format_float(r.3),
                        format_float(r.4),
                        r.5.to_string(),
                        r.6.clone(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
    }

    if wants(CommandKind::Convergence) {
        let reports: Vec<ConvergenceReport> = if config.command == CommandKind::All {
            moments::standard_convergence_suite(
                &params,
                &config.eps_list,
                moments::ORACLE_QUADRATURE_ORDER,
            )?
        } else {
            target_convergence_suite(&params, config)?
        };
        collect_convergence_failures(&mut failures, &reports);
        writer.write_json("convergence.json", json!(convergence_summary(&reports)))?;
        for r in &reports {
            writer.write_csv(
                &format!("plot_{}.csv", r.id.replace(['(', ')', ','], "_")),
                &["log10_eps", "log10_error", "reference_slope_line"],
                &convergence_plot_rows(r),
            )?;
        }
    }

    // summary with the equation mapping and the overall flag
    let all_passed = failures.is_empty();
    let summary = json!({
        "all_passed": all_passed,
        "failures": failures,
        "config": config.semantic_key_values(),
    });
    writer.write_json("summary.json", summary)?;

    Ok(RunOutcome {
        all_passed,
        files: writer.files,
        failures,
    })
}

fn bilinear_study(
    params: &ExampleParams,
    config: &ExperimentConfig,
) -> Result<Vec<ResidualReport>> {
    use crate::example;
    use crate::tensor::Matrix;

    let mut asm = verify::BilinearAssembler::new(*params);
    asm.dom = DomainSpec {
        cells_per_unit: config.grid,
        points_per_cell: config.quad_degree,
        ..DomainSpec::default()
    };
    let p = example::pressure();
    let sigma = example::stress();
    let f = example::body_force(params);

    let d2 = asm.d2(&p, &p);
    let a2 = asm.a2(&p, &p);
    let mut skew_vals = Vec::new();
    for k in 0..20 {
        let c = 0.5 + k as f64;
        let s =
            crate::fields::TensorField::constant(2, Matrix::from_rows(&[&[0.0, c], &[-c, 0.0]]));
        skew_vals.push(asm.b(&sigma, &s));
    }
    let r =
        crate::fields::TensorField::constant(2, Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]));
    let combined = asm.combined(&sigma, &p, &r, &sigma, &p, &r);
    let by_parts = asm.saddle(&sigma, &p, &r, &sigma, &p, &r)
        - (1.0 + params.mu2) * asm.mass_coupling(&sigma, &p, &r, &sigma, &p, &r);
    // the load functional participates via its defining quadrature
    let load = asm.load(&f, &sigma);

    Ok(vec![
        ResidualReport::from_residuals("bilinear-d2-mass", &[d2 - 1.0 / 3.0], 1e-8),
        ResidualReport::from_residuals(
            "bilinear-a2-stiffness",
            &[a2 - 2.0 * std::f64::consts::PI.powi(2)],
            1e-6,
        ),
        ResidualReport::from_residuals("bilinear-weak-symmetry", &skew_vals, 1e-8),
        ResidualReport::from_residuals(
            "bilinear-combined-consistency",
            &[combined - by_parts],
            1e-8,
        ),
        ResidualReport::from_residuals(
            "bilinear-load-finite",
            &[if load.is_finite() { 0.0 } else { 1.0 }],
            0.5,
        ),
    ])
}

type MomentRow = (f64, f64, f64, f64, f64, usize, String);

fn moments_study(
    params: &ExampleParams,
    config: &ExperimentConfig,
) -> Result<(Vec<ResidualReport>, Vec<MomentRow>)> {
    let mut rows: Vec<MomentRow> = Vec::new();
    let mut consistency = Vec::new();

    // 20 (point, eps) pairs: fluid pressure points and solid displacement
    // points against the two largest sweep sizes
    let eps_pair = [
        config.eps_list[0],
        config.eps_list[config.eps_list.len() / 2],
    ];
    let mut pairs: Vec<([f64; 2], Quantity, f64)> = Vec::new();
    for &eps in &eps_pair {
        for pt in moments::fluid_window_points() {
            pairs.push((pt, Quantity::Pressure, eps));
        }
        for pt in moments::solid_window_points() {
            pairs.push((pt, Quantity::Displacement(0), eps));
        }
    }

    for (pt, q, eps) in &pairs {
        let oracle = moment_oracle(params, pt, *eps, *q, moments::ORACLE_QUADRATURE_ORDER)?;
        let mc = moment_monte_carlo(params, pt, *eps, *q, config.samples, config.seed)?;
        let (t_mean, t_var) = taylor_moment_approximation(pt, *eps, *q);
        rows.push((
            pt[0],
            pt[1],
            *eps,
            oracle.mean,
            0.0,
            oracle.n_samples,
            format!("oracle-mean-{}", q.name()),
        ));
        rows.push((
            pt[0],
            pt[1],
            *eps,
            oracle.variance,
            0.0,
            oracle.n_samples,
            format!("oracle-variance-{}", q.name()),
        ));
        rows.push((
            pt[0],
            pt[1],
            *eps,
            mc.mean,
            mc.stderr_mean,
            mc.n_samples,
            format!("mc-mean-{}", q.name()),
        ));
        rows.push((
            pt[0],
            pt[1],
            *eps,
            mc.variance,
            mc.stderr_variance,
            mc.n_samples,
            format!("mc-variance-{}", q.name()),
        ));
        rows.push((
            pt[0],
            pt[1],
            *eps,
            t_mean,
            0.0,
            0,
            format!("taylor-mean-{}", q.name()),
        ));
        rows.push((
            pt[0],
            pt[1],
            *eps,
            t_var,
            0.0,
            0,
            format!("taylor-variance-{}", q.name()),
        ));
        // consistency residuals: excess beyond three standard errors
        consistency.push(((mc.mean - oracle.mean).abs() - 3.0 * mc.stderr_mean).max(0.0));
        consistency
            .push(((mc.variance - oracle.variance).abs() - 3.0 * mc.stderr_variance).max(0.0));
    }

    // amplitude moments by quadrature and Monte Carlo
    let check = moments::amplitude_moment_check(config.samples, config.seed);
    let amp_reports = vec![
        ResidualReport::from_residuals(
            "amplitude-quadrature-mean",
            &[check.quadrature_mean],
            1e-12,
        ),
        ResidualReport::from_residuals(
            "amplitude-quadrature-second-moment",
            &[check.quadrature_second - 1.0 / 3.0],
            1e-12,
        ),
        ResidualReport::from_residuals(
            "amplitude-mc-mean",
            &[(check.mc_mean.abs() - 3.0 * check.mc_mean_se).max(0.0)],
            0.0,
        ),
        ResidualReport::from_residuals(
            "amplitude-mc-second-moment",
            &[((check.mc_second - 1.0 / 3.0).abs() - 3.0 * check.mc_second_se).max(0.0)],
            0.0,
        ),
    ];

    let mut reports = vec![ResidualReport::from_residuals(
        "mc-consistency-3sigma",
        &consistency,
        0.0,
    )];
    reports.extend(amp_reports);
    Ok((reports, rows))
}

fn target_convergence_suite(
    params: &ExampleParams,
    config: &ExperimentConfig,
) -> Result<Vec<ConvergenceReport>> {
    let mut out = Vec::new();
    match config.target {
        StudyTarget::Mean => {
            for pt in moments::fluid_window_points() {
                out.push(moments::convergence_study(
                    params,
                    &pt,
                    Quantity::Pressure,
                    StudyTarget::Mean,
                    &config.eps_list,
                    moments::ORACLE_QUADRATURE_ORDER,
                )?);
            }
        }
        StudyTarget::Variance => {
            for pt in moments::fluid_window_points() {
                out.push(moments::convergence_study(
                    params,
                    &pt,
                    Quantity::Pressure,
                    StudyTarget::Variance,
                    &config.eps_list,
                    moments::ORACLE_QUADRATURE_ORDER,
                )?);
            }
            for pt in moments::solid_window_points() {
                out.push(moments::convergence_study(
                    params,
                    &pt,
                    Quantity::Displacement(0),
                    StudyTarget::Variance,
                    &config.eps_list,
                    moments::ORACLE_QUADRATURE_ORDER,
                )?);
            }
        }
        StudyTarget::TaylorRemainder => {
            out.push(moments::convergence_study(
                params,
                &moments::fluid_window_points()[0],
                Quantity::Pressure,
                StudyTarget::TaylorRemainder,
                &config.eps_list,
                moments::ORACLE_QUADRATURE_ORDER,
            )?);
        }
    }
    Ok(out)
}

/// Exit code for a finished or failed run: 0 pass, 1 verification failure,
/// 2 configuration error, 3 numerical failure.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(outcome) if outcome.all_passed => 0,
        Ok(_) => 1,
        Err(Error::InvalidConfig(_)) | Err(Error::TooFewEpsilons(_)) => 2,
        Err(Error::EpsilonTooLarge { .. }) => 2,
        Err(_) => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_map_outcomes_and_errors() {
        let pass = Ok(RunOutcome {
            all_passed: true,
            files: vec![],
            failures: vec![],
        });
        assert_eq!(exit_code(&pass), 0);
        let fail = Ok(RunOutcome {
            all_passed: false,
            files: vec![],
            failures: vec!["x".into()],
        });
        assert_eq!(exit_code(&fail), 1);
        assert_eq!(exit_code(&Err(Error::InvalidConfig("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::TooFewEpsilons(1))), 2);
        assert_eq!(
            exit_code(&Err(Error::DegenerateJacobian {
                point: vec![0.0],
                eps: 0.2,
                det: -1.0
            })),
            3
        );
    }

    #[test]
    fn equation_labels_cover_all_report_families() {
        assert_eq!(equation_label("sd-interior-momentum"), "eq.dom.S");
        assert_eq!(
            equation_label("sd-interior-momentum-with-load-rate"),
            "eq.dom.S+load"
        );
        assert_eq!(equation_label("sd-dirichlet-gamma1"), "eq.bc.u");
        assert_eq!(equation_label("sh-reference-sigma3"), "sec5.step2");
        assert_eq!(
            equation_label("hadamard-volume-translation"),
            "lem.shape.iv-v"
        );
        assert_eq!(equation_label("mean-pressure-(0.10,0.15)"), "thm.main.mean");
        assert_eq!(equation_label("nonsense"), "unmapped");
    }
}
