//! Manufactured planar solutions: `eta = (x1, x2, x3 + a(t) x3 (1 - x3))`
//! with a forcing term assembled in closed form so the chosen map solves the
//! forced system exactly. Everything here is analytic; no stencil enters, so
//! solver errors measured against this family are pure discretization error.

use crate::eos::ThermoParams;
use crate::error::Result;
use crate::grid::{GridSpec, VectorField};
use crate::kinematics::FlowState;
use crate::weight::WeightField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    /// `a(t) = amplitude sin t`
    Sin,
    /// `a(t) = amplitude t^2`
    Quadratic,
}

#[derive(Clone, Copy, Debug)]
pub struct PlanarMmsCase {
    pub amplitude: f64,
    pub profile: TimeProfile,
    pub params: ThermoParams,
}

impl PlanarMmsCase {
    pub fn new(amplitude: f64, profile: TimeProfile, params: ThermoParams) -> Self {
        PlanarMmsCase { amplitude, profile, params }
    }

    fn a(&self, t: f64) -> (f64, f64, f64) {
        match self.profile {
            TimeProfile::Sin => {
                (self.amplitude * t.sin(), self.amplitude * t.cos(), -self.amplitude * t.sin())
            }
            TimeProfile::Quadratic => {
                (self.amplitude * t * t, 2.0 * self.amplitude * t, 2.0 * self.amplitude)
            }
        }
    }

    pub fn eta3(&self, t: f64, x3: f64) -> f64 {
        x3 + self.a(t).0 * phi(x3)
    }

    /// Exact state at time `t`, second time derivative included.
    pub fn exact_state(&self, grid: GridSpec, t: f64) -> FlowState {
        let (a, adot, addot) = self.a(t);
        let eta = VectorField::from_fn(grid, |x| [x[0], x[1], x[2] + a * phi(x[2])]);
        let eta_t = VectorField::from_fn(grid, |x| [0.0, 0.0, adot * phi(x[2])]);
        let eta_tt = VectorField::from_fn(grid, |x| [0.0, 0.0, addot * phi(x[2])]);
        FlowState { eta, eta_t, eta_tt: Some(eta_tt), time: t }
    }

    /// Initial velocity as an expression string (the map itself is the
    /// identity at t = 0 for both time profiles).
    pub fn eta1_expression(&self) -> [String; 3] {
        let adot0 = self.a(0.0).1;
        ["0".into(), "0".into(), format!("{adot0:.17e}*x3*(1-x3)")]
    }

    /// Forcing value `f3(t, x3)` given the weight and its slope there; the
    /// manufactured map then satisfies
    /// `w^a B dtt(eta) + w^(1+a) C d(dt eta) + d(w^(1+a) A J^(-1/a)) = w^a f`.
    pub fn forcing_value(&self, t: f64, x3: f64, w: f64, wp: f64) -> f64 {
        let p = &self.params;
        let alpha = p.alpha;
        let e2 = p.eps * p.eps;
        let (a, adot, addot) = self.a(t);
        let (ph, php, phpp) = (phi(x3), 1.0 - 2.0 * x3, -2.0);
        let jac = 1.0 + a * php;
        let v = adot * ph;
        let gamma_l = if p.eps == 0.0 { 1.0 } else { 1.0 / (1.0 - e2 * v * v).sqrt() };
        let h = (1.0 + alpha) * w * (gamma_l * jac).powf(-1.0 / alpha);
        let b33 = ((1.0 + e2 * h)
            + (1.0 + (1.0 - 1.0 / alpha) * e2 * h) * e2 * gamma_l * gamma_l * v * v)
            * gamma_l.powf(2.0 + 1.0 / alpha);
        let c333 = -2.0 * (1.0 + 1.0 / alpha) * e2 * gamma_l * gamma_l
            * jac.powf(-1.0 / alpha)
            * v
            / jac;
        let pressure_term = (1.0 + alpha) * wp * jac.powf(-1.0 - 1.0 / alpha)
            - (1.0 + 1.0 / alpha) * w * jac.powf(-2.0 - 1.0 / alpha) * a * phpp;
        b33 * addot * ph + w * c333 * adot * php + pressure_term
    }

    pub fn forcing_field(&self, weight: &WeightField, t: f64) -> VectorField {
        let grid = weight.grid;
        let mut out = VectorField::zeros(grid);
        grid.for_each_node(|idx, [i, j, k]| {
            let x3 = grid.coords(i, j, k)[2];
            out.comp[2][idx] =
                self.forcing_value(t, x3, weight.w.data[idx], weight.grad.comp[2][idx]);
        });
        out
    }

    /// Max-node error of a computed state against the exact map.
    pub fn max_error(&self, state: &FlowState) -> f64 {
        let grid = state.grid();
        let mut err = 0.0f64;
        grid.for_each_node(|idx, [i, j, k]| {
            let x3 = grid.coords(i, j, k)[2];
            err = err.max((state.eta.comp[2][idx] - self.eta3(state.time, x3)).abs());
        });
        err
    }
}

#[inline]
fn phi(x3: f64) -> f64 {
    x3 * (1.0 - x3)
}

/// Least-squares slope of `ln err` against `ln h`: the measured convergence
/// order of a refinement study.
pub fn fit_order(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(h, e)| *h > 0.0 && *e > 1e-300)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Residual-based check helper: `w^alpha * f` on the grid, the quantity the
/// assembled system residual should match for the manufactured map.
pub fn scaled_forcing_field(case: &PlanarMmsCase, weight: &WeightField, t: f64) -> Result<VectorField> {
    let grid = weight.grid;
    let mut out = case.forcing_field(weight, t);
    let alpha = case.params.alpha;
    for idx in 0..grid.len() {
        let wa = weight.w.data[idx].max(0.0).powf(alpha);
        for c in 0..3 {
            out.comp[c][idx] *= wa;
        }
    }
    Ok(out)
}
