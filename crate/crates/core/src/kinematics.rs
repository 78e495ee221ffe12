//! Deformation-tensor calculus on the grid: the gradient of the flow map,
//! its inverse A, the Jacobian J, the cofactor JA, and the Lie derivatives
//! along the flow map.
//!
//! The flow map is differenced through its displacement `u = eta - x`, so the
//! identity part of the gradient is carried exactly. On planar grids
//! (`n1 = n2 = 1`) this encodes the symmetric ansatz
//! `eta = (x1, x2, eta3(t, x3))` without tangential resolution.

use crate::error::{Error, Result};
use crate::grid::{deriv_scalar, grad_vector, GridSpec, ScalarField, TensorField, VectorField};
use crate::linalg::{self, Mat3};

#[derive(Clone, Debug)]
pub struct FlowState {
    pub eta: VectorField,
    pub eta_t: VectorField,
    pub eta_tt: Option<VectorField>,
    pub time: f64,
}

impl FlowState {
    pub fn new(eta: VectorField, eta_t: VectorField, time: f64) -> Self {
        FlowState { eta, eta_t, eta_tt: None, time }
    }

    pub fn rest(grid: GridSpec) -> Self {
        FlowState::new(VectorField::coordinates(grid), VectorField::zeros(grid), 0.0)
    }

    pub fn grid(&self) -> GridSpec {
        self.eta.grid
    }

    /// `eta - x`; the quantity the stencils actually see.
    pub fn displacement(&self) -> VectorField {
        self.eta.sub(&VectorField::coordinates(self.eta.grid))
    }

    pub fn eta_tt(&self) -> Result<&VectorField> {
        self.eta_tt
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("state carries no second time derivative".into()))
    }

    /// Largest `eps |eta_t|` over the grid.
    pub fn max_eps_speed(&self, eps: f64) -> f64 {
        if eps == 0.0 {
            return 0.0;
        }
        eps * self.eta_t.max_norm()
    }
}

#[derive(Clone, Debug)]
pub struct DeformationData {
    /// Gradient of the flow map, `[i][s] = d_s eta^i`.
    pub d_eta: TensorField,
    /// Inverse of `d_eta`.
    pub a: TensorField,
    /// `det(d_eta)`.
    pub jac: ScalarField,
    /// Cofactor `J A`.
    pub cof: TensorField,
}

/// Assemble the deformation tensors for a flow map. Errors on the first node
/// where the map fails to be orientation-preserving.
pub fn compute_deformation(eta: &VectorField, grid: GridSpec) -> Result<DeformationData> {
    if eta.grid != grid {
        return Err(Error::InvalidInput("flow map sampled on a different grid".into()));
    }
    let disp = eta.sub(&VectorField::coordinates(grid));
    let du = grad_vector(&disp);

    let n = grid.len();
    let mut d_eta = TensorField::zeros(grid);
    let mut a = TensorField::zeros(grid);
    let mut jac = ScalarField::zeros(grid);
    let mut cof = TensorField::zeros(grid);

    for idx in 0..n {
        let mut m = du.get(idx);
        for d in 0..3 {
            m[d][d] += 1.0;
        }
        let det = linalg::det3(&m);
        if !(det > 0.0) {
            return Err(Error::DegenerateMap { node: grid.node(idx), jacobian: det });
        }
        let inv = linalg::inv3(&m, det);
        let mut cf = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                cf[r][c] = det * inv[r][c];
            }
        }
        d_eta.set(idx, m);
        a.set(idx, inv);
        jac.data[idx] = det;
        cof.set(idx, cf);
    }
    Ok(DeformationData { d_eta, a, jac, cof })
}

#[derive(Clone, Debug)]
pub struct LieDerivatives {
    /// `[D_eta F]^i_r = A^s_r F^i,_s`
    pub grad: TensorField,
    /// `div_eta F = A^s_r F^r,_s`
    pub div: ScalarField,
    /// `[curl_eta F]^i = eps_{ijk} A^s_j F^k,_s`
    pub curl: VectorField,
    /// `[Curl_eta F]^i_j = A^s_j F^i,_s - A^s_i F^j,_s`, antisymmetric by
    /// construction.
    pub curl_mat: TensorField,
}

/// Lie derivatives of a vector field along the flow map described by `defo`.
pub fn lie_gradient(field: &VectorField, defo: &DeformationData) -> Result<LieDerivatives> {
    let grid = field.grid;
    if grid != defo.a.grid {
        return Err(Error::InvalidInput("field and deformation grids differ".into()));
    }
    let df = grad_vector(field);
    let n = grid.len();
    let mut grad = TensorField::zeros(grid);
    let mut div = ScalarField::zeros(grid);
    let mut curl = VectorField::zeros(grid);
    let mut curl_mat = TensorField::zeros(grid);

    for idx in 0..n {
        let g = lie_grad_node(&df.get(idx), &defo.a.get(idx));
        grad.set(idx, g);
        div.data[idx] = linalg::trace(&g);
        curl.set(idx, [g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]]);
        curl_mat.set(idx, linalg::sub(&g, &linalg::transpose(&g)));
    }
    Ok(LieDerivatives { grad, div, curl, curl_mat })
}

/// `(DF . A)[i][r] = A^s_r F^i,_s` at one node.
#[inline]
pub fn lie_grad_node(df: &Mat3, a: &Mat3) -> Mat3 {
    linalg::matmul(df, a)
}

/// Nodewise divergence of the cofactor: `res_i = d_k (J A^k_i)`, differencing
/// the cofactor field itself. Identically zero in the continuum.
pub fn piola_residual(defo: &DeformationData) -> VectorField {
    let grid = defo.cof.grid;
    let mut out = VectorField::zeros(grid);
    for i in 0..3 {
        let mut acc = ScalarField::zeros(grid);
        for k in 0..3 {
            let comp = defo.cof.component(k, i);
            let d = deriv_scalar(&comp, k);
            for idx in 0..grid.len() {
                acc.data[idx] += d.data[idx];
            }
        }
        out.comp[i] = acc.data;
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct RateIdentityReport {
    /// max-node residual of `d_t A = -A (grad eta_t) A`
    pub max_da_residual: f64,
    /// max-node residual of `d_t J = J A^s_r (eta_t)^r,_s`
    pub max_dj_residual: f64,
    pub states_used: usize,
}

/// Check the rate identities for A and J along a uniformly sampled path,
/// with centered time differences at the interior snapshots.
pub fn verify_rate_identities(states: &[FlowState], grid: GridSpec) -> Result<RateIdentityReport> {
    if states.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "rate identities need >= 3 states, got {}",
            states.len()
        )));
    }
    let dt = states[1].time - states[0].time;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput("time stamps must be strictly increasing".into()));
    }
    for w in states.windows(2) {
        let step = w[1].time - w[0].time;
        if (step - dt).abs() > 1e-10 * dt.abs() {
            return Err(Error::InvalidInput("rate identities need uniform time sampling".into()));
        }
    }

    let defos: Vec<DeformationData> =
        states.iter().map(|s| compute_deformation(&s.eta, grid)).collect::<Result<_>>()?;

    let mut max_da = 0.0f64;
    let mut max_dj = 0.0f64;
    for m in 1..states.len() - 1 {
        let dv = grad_vector(&states[m].eta_t);
        for idx in 0..grid.len() {
            let a_prev = defos[m - 1].a.get(idx);
            let a_next = defos[m + 1].a.get(idx);
            let a_mid = defos[m].a.get(idx);
            let dv_node = dv.get(idx);
            // -A (d_t grad eta) A
            let rhs = linalg::matmul(&linalg::matmul(&a_mid, &dv_node), &a_mid);
            for r in 0..3 {
                for c in 0..3 {
                    let dadt = (a_next[r][c] - a_prev[r][c]) / (2.0 * dt);
                    max_da = max_da.max((dadt + rhs[r][c]).abs());
                }
            }
            let djdt = (defos[m + 1].jac.data[idx] - defos[m - 1].jac.data[idx]) / (2.0 * dt);
            let rhs_j =
                defos[m].jac.data[idx] * linalg::trace(&linalg::matmul(&dv_node, &a_mid));
            max_dj = max_dj.max((djdt - rhs_j).abs());
        }
    }
    Ok(RateIdentityReport {
        max_da_residual: max_da,
        max_dj_residual: max_dj,
        states_used: states.len(),
    })
}
