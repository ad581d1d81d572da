//! Error norms of a reconstruction against the exact solution.

use nalgebra::DVector;

use super::exact::ExactSolution;
use super::Application;
use crate::fem2d::assemble::p1_error_squared;
use crate::regcore::{NoisyData, ProjectorPart};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub absolute: f64,
    pub relative: f64,
}

impl ErrorNorms {
    fn new(err_sq: f64, ref_sq: f64) -> Self {
        let absolute = err_sq.sqrt();
        let relative = if ref_sq > 0.0 { absolute / ref_sq.sqrt() } else { f64::NAN };
        ErrorNorms { absolute, relative }
    }
}

/// The quantities reported for a reconstruction `u^delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionErrors {
    /// `||u - u^delta||_{H^1(Omega)}`.
    pub h1: ErrorNorms,
    /// `||u - u^delta||_{L^2(omega)}`.
    pub l2_omega: ErrorNorms,
    pub int_u_omega: f64,
    pub int_f_omega: f64,
    /// `||P_M B u^delta||_M`, when a projector part is given.
    pub pm_bu: Option<f64>,
}

impl SolutionErrors {
    pub fn compute(
        app: &Application,
        exact: &ExactSolution,
        u: &DVector<f64>,
        data: &NoisyData,
        pm: Option<&ProjectorPart>,
    ) -> crate::error::Result<Self> {
        let verts = app.v_vertices(u);
        let zero = vec![0.0; verts.len()];
        let val = |x: f64, y: f64| exact.value(x, y);
        let grad = |x: f64, y: f64| exact.grad(x, y);
        let (l2, semi) = p1_error_squared(&app.mesh, &verts, val, grad, false);
        let (rl2, rsemi) = p1_error_squared(&app.mesh, &zero, val, grad, false);
        let (l2w, _) = p1_error_squared(&app.mesh, &verts, val, grad, true);
        let (rl2w, _) = p1_error_squared(&app.mesh, &zero, val, grad, true);
        let pm_bu = match pm {
            Some(p) => {
                let bu = app.op.apply(u)?.m;
                Some(app.op.m_norm(&p.apply(&bu)))
            }
            None => None,
        };
        Ok(SolutionErrors {
            h1: ErrorNorms::new(l2 + semi, rl2 + rsemi),
            l2_omega: ErrorNorms::new(l2w, rl2w),
            int_u_omega: app.v_integral_omega(u),
            int_f_omega: app.o_integral(&data.f),
            pm_bu,
        })
    }
}
