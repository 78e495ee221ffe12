//! The degenerate weight field `w`: vanishes on the vacuum faces
//! `x3 in {0, 1}` like the distance function, positive inside. Profiles are
//! prescribed in closed form and every derivative comes from the symbolic
//! closure, never from differencing the samples.

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::grid::{GridSpec, ScalarField, VectorField};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum WeightProfile {
    Parabolic,
    Expression { expr: String },
}

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile::Parabolic
    }
}

/// Highest derivative order served by [`WeightField::derivative_field`].
pub const MAX_DERIVATIVE_ORDER: usize = 12;

#[derive(Clone, Debug)]
pub struct WeightField {
    pub grid: GridSpec,
    /// Samples of `w` on the grid.
    pub w: ScalarField,
    /// Analytic first derivatives sampled on the grid.
    pub grad: VectorField,
    /// Comparability constants: `c_lower d(x) <= w <= c_upper d(x)` with
    /// `d = min(x3, 1 - x3)`.
    pub c_lower: f64,
    pub c_upper: f64,
    expr: Expr,
    validated: bool,
}

pub fn make_weight(profile: &WeightProfile, grid: GridSpec) -> Result<WeightField> {
    let expr = match profile {
        WeightProfile::Parabolic => Expr::parse("x3*(1-x3)")?,
        WeightProfile::Expression { expr } => Expr::parse(expr)?,
    };
    WeightField::from_expr(expr, grid)
}

impl WeightField {
    fn from_expr(expr: Expr, grid: GridSpec) -> Result<WeightField> {
        if expr.uses_var(Var::T) {
            return Err(Error::InvalidWeight("weight profile must not depend on t".into()));
        }
        let w = ScalarField::from_fn(grid, |x| expr.eval(x, 0.0));
        let d1 = expr.diff(Var::X1)?;
        let d2 = expr.diff(Var::X2)?;
        let d3 = expr.diff(Var::X3)?;
        let grad = VectorField::from_fn(grid, |x| {
            [d1.eval(x, 0.0), d2.eval(x, 0.0), d3.eval(x, 0.0)]
        });

        let n3 = grid.shape[2];
        let mut c_lower = f64::INFINITY;
        let mut c_upper = 0.0f64;

        // tangential columns: nodewise checks plus a fine x3 probe per column
        let probe = if grid.shape[0] * grid.shape[1] > 16 { 256 } else { 4096 };
        for i in 0..grid.shape[0] {
            for j in 0..grid.shape[1] {
                let [x1, x2, _] = grid.coords(i, j, 0);
                // boundary values and inward derivative limits
                for (x3, sign) in [(0.0, 1.0), (1.0, -1.0)] {
                    let wb = expr.eval([x1, x2, x3], 0.0);
                    if !wb.is_finite() || wb.abs() > 1e-12 {
                        return Err(Error::InvalidWeight(format!(
                            "w({x1:.3}, {x2:.3}, {x3}) = {wb:.3e}, must vanish on the boundary"
                        )));
                    }
                    let slope = sign * d3.eval([x1, x2, x3], 0.0);
                    if !slope.is_finite() || slope <= 1e-12 {
                        return Err(Error::InvalidWeight(format!(
                            "w/d -> {slope:.3e} approaching x3 = {x3}; \
                             the profile must vanish like the distance function"
                        )));
                    }
                    c_lower = c_lower.min(slope);
                    c_upper = c_upper.max(slope);
                }
                // interior ratio w/d on grid nodes and probe points
                for k in 1..n3 - 1 {
                    let x3 = grid.coords(i, j, k)[2];
                    let v = expr.eval([x1, x2, x3], 0.0);
                    if !(v > 0.0) {
                        return Err(Error::InvalidWeight(format!(
                            "w({x1:.3}, {x2:.3}, {x3:.4}) = {v:.3e}, must be positive inside"
                        )));
                    }
                    let ratio = v / x3.min(1.0 - x3);
                    c_lower = c_lower.min(ratio);
                    c_upper = c_upper.max(ratio);
                }
                for p in 1..probe {
                    let x3 = p as f64 / probe as f64;
                    let v = expr.eval([x1, x2, x3], 0.0);
                    if !(v > 0.0) {
                        return Err(Error::InvalidWeight(format!(
                            "w({x1:.3}, {x2:.3}, {x3:.4}) = {v:.3e}, must be positive inside"
                        )));
                    }
                    let ratio = v / x3.min(1.0 - x3);
                    c_lower = c_lower.min(ratio);
                    c_upper = c_upper.max(ratio);
                }
            }
        }

        let field = WeightField { grid, w, grad, c_lower, c_upper, expr, validated: true };
        field.check_comparability()?;
        Ok(field)
    }

    /// Nodewise verification of `c_lower d <= w <= c_upper d`.
    fn check_comparability(&self) -> Result<()> {
        let n3 = self.grid.shape[2];
        let mut ok = true;
        self.grid.for_each_node(|idx, [i, j, k]| {
            if k == 0 || k == n3 - 1 {
                return;
            }
            let x3 = self.grid.coords(i, j, k)[2];
            let d = x3.min(1.0 - x3);
            let w = self.w.data[idx];
            if w < self.c_lower * d * (1.0 - 1e-12) || w > self.c_upper * d * (1.0 + 1e-12) {
                ok = false;
            }
        });
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidWeight("comparability bracket violated on the grid".into()))
        }
    }

    /// Diagnostic constructor bypassing validation (uniform `w`, including
    /// the degenerate `w = 0` double used in tests).
    pub fn constant_unchecked(grid: GridSpec, value: f64) -> WeightField {
        WeightField {
            grid,
            w: ScalarField::from_fn(grid, |_| value),
            grad: VectorField::zeros(grid),
            c_lower: 0.0,
            c_upper: f64::INFINITY,
            expr: Expr::Const(value),
            validated: false,
        }
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Samples of the analytic mixed derivative `d1^m1 d2^m2 d3^n w`.
    pub fn derivative_field(&self, m1: usize, m2: usize, n: usize) -> Result<ScalarField> {
        if m1 + m2 + n > MAX_DERIVATIVE_ORDER {
            return Err(Error::InvalidInput(format!(
                "weight derivative order {} exceeds the available order {}",
                m1 + m2 + n,
                MAX_DERIVATIVE_ORDER
            )));
        }
        let mut e = self.expr.clone();
        for _ in 0..m1 {
            e = e.diff(Var::X1)?;
        }
        for _ in 0..m2 {
            e = e.diff(Var::X2)?;
        }
        for _ in 0..n {
            e = e.diff(Var::X3)?;
        }
        Ok(ScalarField::from_fn(self.grid, |x| e.eval(x, 0.0)))
    }
}

/// The weight regularity functionals
/// `F_M = sum_{|m|+n <= M} int w^(alpha+n+1) |d_tau^m d3^n w|^2 dx` and the
/// variant with one extra full gradient. Trapezoid quadrature on the grid.
pub fn weight_norms(w: &WeightField, m_order: usize, alpha: f64) -> Result<(f64, f64)> {
    if m_order + 1 > MAX_DERIVATIVE_ORDER {
        return Err(Error::InvalidInput(format!(
            "weight norms of order {m_order} need derivatives beyond the available order"
        )));
    }
    let grid = w.grid;
    let mut f_m = 0.0;
    let mut f_m_grad = 0.0;
    for total in 0..=m_order {
        for n in 0..=total {
            let m_tang = total - n;
            for m1 in 0..=m_tang {
                let m2 = m_tang - m1;
                let dw = w.derivative_field(m1, m2, n)?;
                let grads = [
                    w.derivative_field(m1 + 1, m2, n)?,
                    w.derivative_field(m1, m2 + 1, n)?,
                    w.derivative_field(m1, m2, n + 1)?,
                ];
                let power = alpha + n as f64 + 1.0;
                let mut plain = ScalarField::zeros(grid);
                let mut with_grad = ScalarField::zeros(grid);
                for idx in 0..grid.len() {
                    let wp = w.w.data[idx].max(0.0).powf(power);
                    plain.data[idx] = wp * dw.data[idx] * dw.data[idx];
                    let g2 = grads[0].data[idx] * grads[0].data[idx]
                        + grads[1].data[idx] * grads[1].data[idx]
                        + grads[2].data[idx] * grads[2].data[idx];
                    with_grad.data[idx] = wp * g2;
                }
                f_m += plain.integrate_trapezoid();
                f_m_grad += with_grad.integrate_trapezoid();
            }
        }
    }
    Ok((f_m, f_m_grad))
}
