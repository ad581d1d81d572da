//! Building a problem from a config and running the solvers on it.

use std::time::Instant;

use anyhow::{Context, Result};
use log::info;
use nalgebra::DVector;

use morozov::apps::{
    build_cauchy, build_heat_da, build_laplace_da, make_projector_pm0, synth_noise_pointwise,
    synth_noise_structured, AppKind, Application, ExactSolution, HeatConfig, HeatPerp, MorleyPerp, ProjectorSpec,
    SolutionErrors, SolutionId,
};
use morozov::fem2d::{generate_mesh, OmegaSpec};
use morozov::regcore::{
    check_admissible, demeestere_iterate, minimize_dual, morozov_find_epsilon, residual_norm, AdmissibilityReport,
    DemeestereOptions, DualBranch, DualOptions, ExactRangePerp, NoisyData, Projector, ProjectorPart,
    RangeCompatibility, RangePerpBackend,
};

use crate::config::{AppName, ExperimentConfig, NoiseMode, PerpChoice, SolutionName, SolverChoice};

/// Tolerance of the Newton discrepancy solve.
const NEWTON_TOL: f64 = 1e-10;

pub struct Problem {
    pub app: Application,
    pub exact: ExactSolution,
    pub data: NoisyData,
    pub backend: Box<dyn RangePerpBackend>,
    pub projector: Projector,
    pub report: AdmissibilityReport,
}

pub fn build_app(cfg: &ExperimentConfig) -> Result<Application> {
    Ok(match cfg.application {
        AppName::Laplace => {
            let spec = OmegaSpec::from_name(cfg.omega.as_str(), cfg.omega_area)?;
            build_laplace_da(generate_mesh(cfg.mesh_n, &spec)?)?
        }
        AppName::Cauchy => build_cauchy(cfg.mesh_n, cfg.gamma_fraction)?,
        AppName::Heat => build_heat_da(&HeatConfig {
            spatial_dim: 1,
            n_x: cfg.mesh_n,
            n_t: cfg.n_t,
            t_final: cfg.t_final,
            omega: cfg.omega_interval,
        })?,
    })
}

pub fn backend_for(app: &Application, choice: PerpChoice) -> Result<Box<dyn RangePerpBackend>> {
    Ok(match (choice, app.kind) {
        (PerpChoice::Native, AppKind::LaplaceDa) => Box::new(MorleyPerp::new(app)?),
        (PerpChoice::Native, AppKind::Heat) => Box::new(HeatPerp::new(app)?),
        _ => Box::new(ExactRangePerp),
    })
}

fn solution_id(s: SolutionName) -> SolutionId {
    match s {
        SolutionName::Poly => SolutionId::Poly,
        SolutionName::ExpSin => SolutionId::ExpSin,
        SolutionName::CoshCos => SolutionId::CoshCos,
        SolutionName::Caloric => SolutionId::Caloric,
    }
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let app = build_app(cfg).context("building the application")?;
    let exact = ExactSolution::new(solution_id(cfg.solution), &app.mesh)?;
    let backend = backend_for(&app, cfg.perp_backend)?;
    let mut data = match cfg.noise {
        NoiseMode::Pointwise => synth_noise_pointwise(&app, &exact, cfg.delta_r, cfg.seed)?,
        NoiseMode::Structured => synth_noise_structured(&app, &exact, cfg.delta, backend.as_ref())?.data,
        NoiseMode::Exact => NoisyData::observation(&app.op, app.observe(|x, y| exact.value(x, y)), cfg.delta)?,
    };
    let report = check_admissible(&app.op, &mut data, backend.as_ref())?;
    let projector = cfg.projector_spec()?.build(&app).context("building the projector")?;
    Ok(Problem { app, exact, data, backend, projector, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn ok(&self) -> bool {
        self.value <= self.limit
    }
}

/// Outcome of one solve; every norm is recomputed from the final vectors.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub g_norm: f64,
    pub perp_norm: f64,
    pub delta: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub epsilon: Option<f64>,
    pub discrepancy: f64,
    pub errors: SolutionErrors,
    pub branch: &'static str,
    pub iterations: usize,
    pub checks: Vec<Check>,
    pub seconds: f64,
    pub u: DVector<f64>,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }

    pub const COLUMNS: [&'static str; 19] = [
        "g_norm",
        "perp_norm",
        "delta",
        "lower_margin",
        "upper_margin",
        "epsilon",
        "discrepancy",
        "h1_error",
        "h1_relative",
        "l2_omega_error",
        "l2_omega_relative",
        "int_u_omega",
        "int_f_omega",
        "pm_bu_norm",
        "branch",
        "iterations",
        "postconditions",
        "worst_check",
        "worst_check_value",
    ];

    pub fn fields(&self) -> Vec<String> {
        use crate::output::fmt;
        let opt = |x: Option<f64>| x.map_or(String::new(), fmt);
        let worst = self
            .checks
            .iter()
            .max_by(|a, b| (a.value / a.limit).total_cmp(&(b.value / b.limit)));
        vec![
            fmt(self.g_norm),
            fmt(self.perp_norm),
            fmt(self.delta),
            fmt(self.lower_margin),
            fmt(self.upper_margin),
            opt(self.epsilon),
            fmt(self.discrepancy),
            fmt(self.errors.h1.absolute),
            fmt(self.errors.h1.relative),
            fmt(self.errors.l2_omega.absolute),
            fmt(self.errors.l2_omega.relative),
            fmt(self.errors.int_u_omega),
            fmt(self.errors.int_f_omega),
            opt(self.errors.pm_bu),
            self.branch.to_string(),
            self.iterations.to_string(),
            if self.ok() { "ok" } else { "failed" }.to_string(),
            worst.map_or(String::new(), |c| c.name.to_string()),
            worst.map_or(String::new(), |c| fmt(c.value)),
        ]
    }
}

/// The M part used for the `||P_M B u||` column: the configured one, or
/// `P_M^0` with five eigenfunctions for an unprojected Laplace run.
fn probe_part(cfg: &ExperimentConfig, pb: &Problem) -> Result<Option<ProjectorPart>> {
    if pb.projector.m.rank() > 0 {
        return Ok(Some(pb.projector.m.clone()));
    }
    if pb.app.kind == AppKind::LaplaceDa {
        let n = match cfg.projector_spec()? {
            ProjectorSpec::P0 { n } | ProjectorSpec::P { n } => n,
            _ => 4,
        };
        return Ok(Some(make_projector_pm0(&pb.app, n)?));
    }
    Ok(None)
}

pub fn solve(cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let pb = build_problem(cfg)?;
    solve_problem(cfg, &pb, start)
}

pub fn solve_problem(cfg: &ExperimentConfig, pb: &Problem, start: Instant) -> Result<RunReport> {
    let op = &pb.app.op;
    let data = &pb.data;
    let delta = data.delta;
    let mut checks = Vec::new();
    let (u, epsilon, branch, iterations) = match cfg.solver {
        SolverChoice::NewtonMorozov => {
            let r = morozov_find_epsilon(op, data, NEWTON_TOL)?;
            (r.solution.u, Some(r.epsilon), "smooth", r.iterations)
        }
        SolverChoice::Demeestere => {
            let r = demeestere_iterate(op, data, DemeestereOptions::default())?;
            let n = r.eps_trace.len() - 1;
            (r.u, Some(r.epsilon), "smooth", n)
        }
        SolverChoice::DualGradient => {
            let r = minimize_dual(op, data, &pb.projector, DualOptions::default())?;
            checks.push(Check { name: "duality_identity", value: r.identity_residual, limit: 1e-8 });
            let branch = match r.branch {
                DualBranch::Smooth => "smooth",
                DualBranch::Nonsmooth => "nonsmooth",
            };
            (r.u, r.epsilon, branch, r.iterations)
        }
    };
    let g = data.g();
    let discrepancy = residual_norm(op, &u, &g)?;
    if branch == "smooth" {
        let tol = match cfg.solver {
            SolverChoice::Demeestere => 1e-6,
            _ => 1e-8,
        };
        checks.push(Check { name: "discrepancy", value: (discrepancy - delta).abs() / delta, limit: tol });
    } else {
        checks.push(Check { name: "discrepancy", value: (discrepancy - delta).max(0.0) / delta, limit: 1e-12 });
    }
    if pb.projector.compatibility != RangeCompatibility::Violated && !pb.projector.is_zero() {
        let residual = op.apply(&u)?.sub(&g);
        let c = op.h_norm(&pb.projector.apply(&residual)) / data.g_norm(op);
        checks.push(Check { name: "constraint", value: c, limit: 1e-8 });
    }
    let pm = probe_part(cfg, pb)?;
    let errors = SolutionErrors::compute(&pb.app, &pb.exact, &u, data, pm.as_ref())?;
    let seconds = start.elapsed().as_secs_f64();
    info!("solve finished in {seconds:.2} s");
    Ok(RunReport {
        g_norm: pb.report.g_norm,
        perp_norm: pb.report.perp_norm,
        delta,
        lower_margin: pb.report.lower_margin,
        upper_margin: pb.report.upper_margin,
        epsilon,
        discrepancy,
        errors,
        branch,
        iterations,
        checks,
        seconds,
        u,
    })
}
