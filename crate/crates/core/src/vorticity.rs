//! The relativistic curl structure: the symmetric matrix `S = I + eps^2
//! Gamma^2 v (x) v`, its inverse U, the antisymmetric acceleration matrix R,
//! and the history matrix X accumulated from the vorticity transport law.
//!
//! Matrices are stored row-first; every antisymmetric object is assembled as
//! a difference of transposes, so antisymmetry is exact in floating point.

use crate::dynamics::{chi_time_derivative, CoefficientData};
use crate::eos::ThermoParams;
use crate::error::{Error, Result};
use crate::grid::{grad_vector, TensorField};
use crate::kinematics::{
    compute_deformation, lie_grad_node, lie_gradient, DeformationData, FlowState,
};
use crate::linalg::{self};
use crate::weight::WeightField;

#[derive(Clone, Debug)]
pub struct CurlStructure {
    pub s: TensorField,
    /// `S^{-1}` by the rank-1 (Sherman-Morrison) closed form.
    pub u: TensorField,
    /// Antisymmetric matrix built from `eta_tt`; absent when the state
    /// carries no second time derivative.
    pub r: Option<TensorField>,
    /// History matrix; absent without accumulated trajectory integrals.
    pub x: Option<TensorField>,
}

/// Trapezoid accumulators for the two time integrals entering X, updated once
/// per accepted step.
#[derive(Clone, Debug)]
pub struct CurlHistory {
    pub time: f64,
    pub curl_chi0: TensorField,
    pub commutator_integral: TensorField,
    pub gamma_integral: TensorField,
    last_commutator: TensorField,
    last_gamma: TensorField,
}

/// `[d_t, Curl_eta] chi` and `Gamma^{-1} [Curl_eta, Gamma] d_t chi` on the
/// grid. `d_t A` comes from the rate identity, `grad Gamma` from the analytic
/// closure; only spatial stencils introduce error.
fn commutator_integrands(
    state: &FlowState,
    defo: &DeformationData,
    coeffs: &CoefficientData,
    params: &ThermoParams,
) -> Result<(TensorField, TensorField)> {
    let grid = state.grid();
    let n = grid.len();
    let e2 = params.eps * params.eps;
    let dv = grad_vector(&state.eta_t);
    let dchi = grad_vector(&coeffs.chi);
    let dtchi = chi_time_derivative(state, defo, coeffs, params)?;

    let mut commutator = TensorField::zeros(grid);
    let mut gamma_part = TensorField::zeros(grid);

    for idx in 0..n {
        let a = defo.a.get(idx);
        let dv_n = dv.get(idx);
        // d_t A = -A (grad eta_t) A
        let mut dta = linalg::matmul(&linalg::matmul(&a, &dv_n), &a);
        for row in dta.iter_mut() {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        // [d_t, Curl_eta] chi = P - P^T with P[i][j] = dtA^s_j chi^i,_s
        let p = linalg::matmul(&dchi.get(idx), &dta);
        commutator.set(idx, linalg::sub(&p, &linalg::transpose(&p)));

        if params.eps > 0.0 {
            let g = coeffs.gamma_l.data[idx];
            let v = state.eta_t.get(idx);
            // grad Gamma = eps^2 Gamma^3 (v . d_s v)
            let mut grad_g = [0.0; 3];
            for s in 0..3 {
                let mut d = 0.0;
                for m in 0..3 {
                    d += v[m] * dv_n[m][s];
                }
                grad_g[s] = e2 * g * g * g * d;
            }
            // gl_j = A^s_j Gamma,_s
            let mut gl = [0.0; 3];
            for j in 0..3 {
                for s in 0..3 {
                    gl[j] += a[s][j] * grad_g[s];
                }
            }
            let dc = dtchi.get(idx);
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = (gl[j] * dc[i] - gl[i] * dc[j]) / g;
                }
            }
            gamma_part.set(idx, m);
        }
    }
    Ok((commutator, gamma_part))
}

impl CurlHistory {
    /// Rebuild the accumulators from a stored trajectory (coarser trapezoid
    /// than the per-step accumulation the solver maintains, but independent
    /// of it).
    pub fn from_path(
        states: &[FlowState],
        weight: &WeightField,
        params: &ThermoParams,
    ) -> Result<CurlHistory> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidInput("history needs at least one state".into()))?;
        let grid = first.grid();
        let defo = compute_deformation(&first.eta, grid)?;
        let coeffs = crate::dynamics::assemble_coefficients(first, &defo, weight, params)?;
        let mut hist = CurlHistory::start(first, &defo, &coeffs, params)?;
        for state in &states[1..] {
            let defo = compute_deformation(&state.eta, grid)?;
            let coeffs = crate::dynamics::assemble_coefficients(state, &defo, weight, params)?;
            hist.advance(state, &defo, &coeffs, params)?;
        }
        Ok(hist)
    }

    /// Start the accumulators at the state's own time, with the initial
    /// `Curl_eta chi` term captured.
    pub fn start(
        state: &FlowState,
        defo: &DeformationData,
        coeffs: &CoefficientData,
        params: &ThermoParams,
    ) -> Result<CurlHistory> {
        let grid = state.grid();
        let curl_chi0 = lie_gradient(&coeffs.chi, defo)?.curl_mat;
        let (commutator, gamma_part) = commutator_integrands(state, defo, coeffs, params)?;
        Ok(CurlHistory {
            time: state.time,
            curl_chi0,
            commutator_integral: TensorField::zeros(grid),
            gamma_integral: TensorField::zeros(grid),
            last_commutator: commutator,
            last_gamma: gamma_part,
        })
    }

    /// Trapezoid step of both integrals up to the new state's time.
    pub fn advance(
        &mut self,
        state: &FlowState,
        defo: &DeformationData,
        coeffs: &CoefficientData,
        params: &ThermoParams,
    ) -> Result<()> {
        let dt = state.time - self.time;
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!(
                "history must advance forward in time (dt = {dt:.3e})"
            )));
        }
        let (commutator, gamma_part) = commutator_integrands(state, defo, coeffs, params)?;
        let half = 0.5 * dt;
        for i in 0..self.commutator_integral.data.len() {
            self.commutator_integral.data[i] +=
                half * (self.last_commutator.data[i] + commutator.data[i]);
            self.gamma_integral.data[i] += half * (self.last_gamma.data[i] + gamma_part.data[i]);
        }
        self.last_commutator = commutator;
        self.last_gamma = gamma_part;
        self.time = state.time;
        Ok(())
    }
}

/// Assemble S, U, R (when `eta_tt` is present) and X (when a history of the
/// trajectory integrals is supplied).
pub fn assemble_curl_structure(
    state: &FlowState,
    _defo: &DeformationData,
    coeffs: &CoefficientData,
    params: &ThermoParams,
    history: Option<&CurlHistory>,
) -> Result<CurlStructure> {
    let grid = state.grid();
    let e2 = params.eps * params.eps;
    let n = grid.len();

    let mut s = TensorField::zeros(grid);
    let mut u = TensorField::zeros(grid);
    for idx in 0..n {
        let v = state.eta_t.get(idx);
        let g = coeffs.gamma_l.data[idx];
        let c = e2 * g * g;
        let mut sm = linalg::IDENTITY;
        let mut um = linalg::IDENTITY;
        if c != 0.0 {
            let v2 = linalg::norm_sq(&v);
            let uc = c / (1.0 + c * v2);
            for i in 0..3 {
                for j in 0..3 {
                    sm[i][j] += c * v[i] * v[j];
                    um[i][j] -= uc * v[i] * v[j];
                }
            }
        }
        s.set(idx, sm);
        u.set(idx, um);
    }

    let r = match &state.eta_tt {
        Some(acc) => {
            let mut r = TensorField::zeros(grid);
            for idx in 0..n {
                let v = state.eta_t.get(idx);
                let a = acc.get(idx);
                let g = coeffs.gamma_l.data[idx];
                let c = e2 * g * g;
                let mut rm = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        rm[i][j] = c * (a[i] * v[j] - a[j] * v[i]);
                    }
                }
                r.set(idx, rm);
            }
            Some(r)
        }
        None => None,
    };

    let x = match history {
        Some(hist) => {
            if (hist.time - state.time).abs() > 1e-10 * state.time.abs().max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "history time {:.6e} does not match state time {:.6e}",
                    hist.time, state.time
                )));
            }
            let mut x = TensorField::zeros(grid);
            for idx in 0..n {
                let psi = (1.0 + e2 * coeffs.h.data[idx]) * coeffs.gamma_l.data[idx];
                let base = 9 * idx;
                for c in 0..9 {
                    x.data[base + c] = (hist.curl_chi0.data[base + c]
                        + hist.commutator_integral.data[base + c]
                        - hist.gamma_integral.data[base + c])
                        / psi;
                }
            }
            Some(x)
        }
        None => None,
    };

    Ok(CurlStructure { s, u, r, x })
}

/// Residual of the integrated curl equation in the U-weighted form
/// `G U - U G^T + U R U - U X U` with `G = D_eta(eta_t)`. Zero along exact
/// solutions; antisymmetric by construction.
pub fn curl_residual(
    state: &FlowState,
    defo: &DeformationData,
    cs: &CurlStructure,
    params: &ThermoParams,
) -> Result<TensorField> {
    let grid = state.grid();
    let acc = state.eta_tt()?;
    let x = cs
        .x
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("curl residual needs the history matrix X".into()))?;
    let e2 = params.eps * params.eps;
    let dv = grad_vector(&state.eta_t);
    let mut out = TensorField::zeros(grid);

    for idx in 0..grid.len() {
        let a = defo.a.get(idx);
        let u = cs.u.get(idx);
        let g = lie_grad_node(&dv.get(idx), &a);
        // G U - (G U)^T
        let gu = linalg::matmul(&g, &u);
        let mut res = linalg::sub(&gu, &linalg::transpose(&gu));

        // U R U = eps^2 Gamma^2 ((U a)(U v)^T - (U v)(U a)^T)
        if e2 > 0.0 {
            let v = state.eta_t.get(idx);
            let av = acc.get(idx);
            let gamma_sq = {
                let v2 = linalg::norm_sq(&v);
                1.0 / (1.0 - e2 * v2)
            };
            let p = linalg::matvec(&u, &av);
            let q = linalg::matvec(&u, &v);
            for i in 0..3 {
                for j in 0..3 {
                    res[i][j] += e2 * gamma_sq * (p[i] * q[j] - q[i] * p[j]);
                }
            }
        }

        // U X U, antisymmetrized
        let w = linalg::matmul(&linalg::matmul(&u, &x.get(idx)), &u);
        for i in 0..3 {
            for j in 0..3 {
                res[i][j] -= 0.5 * (w[i][j] - w[j][i]);
            }
        }
        out.set(idx, res);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct TransportReport {
    /// Max defect of the calculus identity
    /// `Curl chi(t) = Curl chi(0) + int (Curl dt chi + [dt, Curl] chi)`,
    /// which holds along any smooth path; measures time-quadrature error.
    pub max_defect_identity: f64,
    /// Max defect of the transport law
    /// `Curl chi(t) = Curl chi(0) + int [dt, Curl] chi
    ///   - int Gamma^{-1} [Curl, Gamma] dt chi`,
    /// which holds along solutions of the flow.
    pub max_defect_transport: f64,
    /// `|Curl_eta chi|` at the final state.
    pub final_curl_chi: f64,
}

/// Verify the integrated vorticity transport along a uniformly sampled
/// trajectory whose states carry `eta_tt`.
pub fn vorticity_transport_check(
    path: &[FlowState],
    weight: &WeightField,
    params: &ThermoParams,
) -> Result<TransportReport> {
    if path.len() < 2 {
        return Err(Error::InvalidInput("transport check needs >= 2 states".into()));
    }
    let grid = path[0].grid();
    let dt = path[1].time - path[0].time;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput("time stamps must be strictly increasing".into()));
    }
    for w in path.windows(2) {
        if ((w[1].time - w[0].time) - dt).abs() > 1e-10 * dt {
            return Err(Error::InvalidInput("transport check needs uniform time sampling".into()));
        }
    }

    let mut curl0: Option<TensorField> = None;
    let mut int_identity = TensorField::zeros(grid);
    let mut int_transport = TensorField::zeros(grid);
    let mut prev_identity: Option<TensorField> = None;
    let mut prev_transport: Option<TensorField> = None;

    let mut max_identity = 0.0f64;
    let mut max_transport = 0.0f64;
    let mut final_curl = 0.0f64;

    for state in path {
        let defo = compute_deformation(&state.eta, grid)?;
        let coeffs = crate::dynamics::assemble_coefficients(state, &defo, weight, params)?;
        let curl_chi = lie_gradient(&coeffs.chi, &defo)?.curl_mat;
        let (commutator, gamma_part) = commutator_integrands(state, &defo, &coeffs, params)?;
        let dtchi = chi_time_derivative(state, &defo, &coeffs, params)?;
        let curl_dtchi = lie_gradient(&dtchi, &defo)?.curl_mat;

        let mut identity_rate = commutator.clone();
        for i in 0..identity_rate.data.len() {
            identity_rate.data[i] += curl_dtchi.data[i];
        }
        let mut transport_rate = commutator;
        for i in 0..transport_rate.data.len() {
            transport_rate.data[i] -= gamma_part.data[i];
        }

        match &curl0 {
            None => {
                curl0 = Some(curl_chi.clone());
            }
            Some(c0) => {
                let pi = prev_identity.as_ref().unwrap();
                let pt = prev_transport.as_ref().unwrap();
                for i in 0..int_identity.data.len() {
                    int_identity.data[i] += 0.5 * dt * (pi.data[i] + identity_rate.data[i]);
                    int_transport.data[i] += 0.5 * dt * (pt.data[i] + transport_rate.data[i]);
                }
                for i in 0..int_identity.data.len() {
                    max_identity = max_identity
                        .max((curl_chi.data[i] - c0.data[i] - int_identity.data[i]).abs());
                    max_transport = max_transport
                        .max((curl_chi.data[i] - c0.data[i] - int_transport.data[i]).abs());
                }
            }
        }
        prev_identity = Some(identity_rate);
        prev_transport = Some(transport_rate);
        final_curl = curl_chi.max_abs();
    }

    Ok(TransportReport {
        max_defect_identity: max_identity,
        max_defect_transport: max_transport,
        final_curl_chi: final_curl,
    })
}
