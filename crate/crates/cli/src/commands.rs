//! The subcommands. Each writes its CSV files and returns whether every
//! postcondition held.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use log::{info, warn};
use rayon::prelude::*;

use morozov::apps::SolutionErrors;
use morozov::regcore::{discrepancy_curve, log_grid, morozov_find_epsilon, solve_mixed_with, MixedRoute};

use crate::config::ExperimentConfig;
use crate::output::{fmt, CsvTable};
use crate::run::{build_app, build_problem, solve, solve_problem, Problem};

fn admissibility_meta(t: &mut CsvTable, pb: &Problem) {
    t.meta_f64("g_norm", pb.report.g_norm);
    t.meta_f64("perp_norm", pb.report.perp_norm);
    t.meta_f64("delta", pb.report.delta);
    t.meta("perp_backend", pb.backend.name());
    t.meta("admissible", pb.report.admissible());
    if let Some(v) = pb.report.violation() {
        t.meta("violation", v);
    }
}

/// `(eps, ||A u_eps - g||)` over the configured log grid.
pub fn curve(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let pb = build_problem(cfg)?;
    let mut t = CsvTable::new("curve", cfg, &["epsilon", "discrepancy"]);
    admissibility_meta(&mut t, &pb);
    let grid = log_grid(cfg.eps_min, cfg.eps_max, cfg.eps_points);
    for (e, d) in discrepancy_curve(&pb.app.op, &pb.data, &grid, MixedRoute::Spectral)? {
        t.row(vec![fmt(e), fmt(d)]);
    }
    let path = t.write(out, "curve.csv")?;
    println!("{}", path.display());
    if !pb.report.admissible() {
        warn!("data is not admissible: {}", pb.report.violation().map(|v| v.to_string()).unwrap_or_default());
    }
    Ok(pb.report.admissible())
}

/// Report row plus a vertex dump of `u^delta` and `u - u^delta`.
pub fn solve_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let start = Instant::now();
    let pb = build_problem(cfg)?;
    let mut t = CsvTable::new("solve", cfg, &crate::run::RunReport::COLUMNS);
    admissibility_meta(&mut t, &pb);
    let r = solve_problem(cfg, &pb, start).context("solving")?;
    for c in &r.checks {
        t.meta(&format!("check {}", c.name), format!("{} (limit {})", fmt(c.value), fmt(c.limit)));
    }
    t.row(r.fields());
    let path = t.write(out, "report.csv")?;
    println!("{}", path.display());

    let mut d = CsvTable::new("solve", cfg, &["x", "y", "u_delta", "error"]);
    let verts = pb.app.v_vertices(&r.u);
    for (v, &[x, y]) in pb.app.mesh.vertices.iter().enumerate() {
        let uv = verts[v];
        d.row(vec![fmt(x), fmt(y), fmt(uv), fmt(pb.exact.value(x, y) - uv)]);
    }
    let path = d.write(out, "solution.csv")?;
    println!("{}", path.display());
    eprintln!("wall-clock {:.3} s", r.seconds);
    for c in r.checks.iter().filter(|c| !c.ok()) {
        warn!("postcondition {} failed: {:.3e} > {:.3e}", c.name, c.value, c.limit);
    }
    Ok(r.ok())
}

/// One report row per sweep value; rows run in parallel and failures are
/// recorded in the row.
pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let param = cfg.sweep_param.context("sweep needs sweep_param and sweep_values in the config")?;
    let mut columns = vec!["value"];
    columns.extend(crate::run::RunReport::COLUMNS);
    columns.push("error");
    let rows: Vec<(Vec<String>, bool)> = cfg
        .sweep_values
        .par_iter()
        .map(|v| {
            let row_cfg = cfg.with_sweep_value(param, v);
            let res = row_cfg.and_then(|c| solve(&c));
            let n = crate::run::RunReport::COLUMNS.len();
            match res {
                Ok(r) => {
                    eprintln!("sweep value {v}: wall-clock {:.3} s", r.seconds);
                    let mut f = vec![v.clone()];
                    f.extend(r.fields());
                    f.push(String::new());
                    (f, r.ok())
                }
                Err(e) => {
                    let mut f = vec![v.clone()];
                    f.extend(std::iter::repeat_n(String::new(), n));
                    f.push(format!("\"{}\"", format!("{e:#}").replace('"', "'")));
                    (f, false)
                }
            }
        })
        .collect();
    let mut t = CsvTable::new("sweep", cfg, &columns);
    let mut ok = true;
    for (r, good) in rows {
        ok &= good;
        t.row(r);
    }
    let path = t.write(out, "sweep.csv")?;
    println!("{}", path.display());
    Ok(ok)
}

/// `(eps, ||u_eps - u||_{H^1})` with the discrepancy-principle `eps` in the header.
pub fn error_vs_eps(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let pb = build_problem(cfg)?;
    let mut t = CsvTable::new("error-vs-eps", cfg, &["epsilon", "h1_error", "h1_relative"]);
    admissibility_meta(&mut t, &pb);
    let ok = match morozov_find_epsilon(&pb.app.op, &pb.data, 1e-10) {
        Ok(m) => {
            t.meta_f64("morozov_epsilon", m.epsilon);
            true
        }
        Err(e) => {
            t.meta("morozov_epsilon", format!("unavailable ({e})"));
            false
        }
    };
    for eps in log_grid(cfg.eps_min, cfg.eps_max, cfg.eps_points) {
        let s = solve_mixed_with(&pb.app.op, &pb.data, eps, MixedRoute::Spectral)?;
        let e = SolutionErrors::compute(&pb.app, &pb.exact, &s.u, &pb.data, None)?;
        t.row(vec![fmt(eps), fmt(e.h1.absolute), fmt(e.h1.relative)]);
    }
    let path = t.write(out, "error_vs_eps.csv")?;
    println!("{}", path.display());
    Ok(ok)
}

/// Vertices and triangles of the configured mesh.
pub fn mesh_dump(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let app = build_app(cfg)?;
    let mesh = &app.mesh;
    let boundary = mesh.boundary_vertices();
    let mut v = CsvTable::new("mesh-dump", cfg, &["vertex", "x", "y", "boundary"]);
    for (i, p) in mesh.vertices.iter().enumerate() {
        v.row(vec![i.to_string(), fmt(p[0]), fmt(p[1]), u8::from(boundary[i]).to_string()]);
    }
    let mut t = CsvTable::new("mesh-dump", cfg, &["triangle", "v0", "v1", "v2", "in_omega"]);
    t.meta_f64("omega_area", mesh.omega_area());
    t.meta_f64("h", mesh.h());
    for (i, tri) in mesh.triangles.iter().enumerate() {
        t.row(vec![
            i.to_string(),
            tri[0].to_string(),
            tri[1].to_string(),
            tri[2].to_string(),
            u8::from(mesh.in_omega[i]).to_string(),
        ]);
    }
    println!("{}", v.write(out, "vertices.csv")?.display());
    println!("{}", t.write(out, "triangles.csv")?.display());
    Ok(true)
}

/// Range-complement projection of the configured data on its own.
pub fn project(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let pb = build_problem(cfg)?;
    let op = &pb.app.op;
    let comp = pb.backend.project(op, &pb.data.g())?;
    let (lhs, rhs) = comp.native_identity.unwrap_or_else(|| {
        (op.h_inner(&comp.perp, &comp.perp), op.h_inner(&pb.data.g(), &comp.perp))
    });
    let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    let mut t = CsvTable::new(
        "project",
        cfg,
        &["g_norm", "perp_norm", "lambda_perp_norm", "f_perp_norm", "identity_lhs", "identity_rhs", "identity_relative"],
    );
    t.meta("perp_backend", pb.backend.name());
    t.row(vec![
        fmt(pb.data.g_norm(op)),
        fmt(lhs.max(0.0).sqrt()),
        fmt(op.m_norm(&comp.perp.m)),
        fmt(op.o_norm(&comp.perp.o)),
        fmt(lhs),
        fmt(rhs),
        fmt(rel),
    ]);
    println!("{}", t.write(out, "project.csv")?.display());
    let ok = rel <= 1e-8;
    if !ok {
        warn!("projection identity off by {rel:.3e}");
    }
    info!("perp norm {:.6e} with backend {}", lhs.max(0.0).sqrt(), pb.backend.name());
    Ok(ok)
}
