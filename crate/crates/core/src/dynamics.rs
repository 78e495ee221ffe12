//! Assembly of the quasi-linear second-order system in Lagrangian
//! coordinates: the symmetric coefficient matrix B, the symmetric tensor C,
//! the modified velocity chi, the pointwise system residual in conservative
//! form, and the gradient-of-divergence structure identity.

use crate::eos::{lorentz_factor_from_speed_sq, ThermoParams};
use crate::error::{Error, Result};
use crate::grid::{deriv_scalar, grad_vector, GridSpec, ScalarField, TensorField, VectorField};
use crate::kinematics::{DeformationData, FlowState};
use crate::linalg::{self, Mat3, Vec3};
use crate::weight::WeightField;

/// 3-indexed tensor samples `T^k_{ij}`, 27 components per node.
#[derive(Clone, Debug)]
pub struct Tensor3Field {
    pub grid: GridSpec,
    pub data: Vec<f64>,
}

impl Tensor3Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Tensor3Field { grid, data: vec![0.0; 27 * grid.len()] }
    }

    #[inline]
    pub fn get(&self, idx: usize, k: usize, i: usize, j: usize) -> f64 {
        self.data[27 * idx + 9 * k + 3 * i + j]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, k: usize, i: usize, j: usize, v: f64) {
        self.data[27 * idx + 9 * k + 3 * i + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for &v in &self.data {
            m = m.max(v.abs());
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct CoefficientData {
    /// Symmetric positive definite acceleration matrix.
    pub b: TensorField,
    /// `C^k_{ij}`, symmetric in `(i, j)`; identically zero when `eps = 0`.
    pub c: Tensor3Field,
    /// Modified velocity `chi = (1 + eps^2 h) Gamma eta_t`.
    pub chi: VectorField,
    /// Enthalpy `h = (1 + alpha) w (Gamma J)^(-1/alpha)`.
    pub h: ScalarField,
    /// Lorentz factor per node.
    pub gamma_l: ScalarField,
    /// `J^(-1/alpha)` per node.
    pub j_pow: ScalarField,
}

#[inline]
fn jpow_neg_inv_alpha(j: f64, alpha: f64) -> f64 {
    (-j.ln() / alpha).exp()
}

/// Assemble B, C, chi, h on the grid. Errors on the first superluminal node.
pub fn assemble_coefficients(
    state: &FlowState,
    defo: &DeformationData,
    weight: &WeightField,
    params: &ThermoParams,
) -> Result<CoefficientData> {
    let grid = state.grid();
    let alpha = params.alpha;
    let e2 = params.eps * params.eps;
    let n = grid.len();

    let mut b = TensorField::zeros(grid);
    let mut c = Tensor3Field::zeros(grid);
    let mut chi = VectorField::zeros(grid);
    let mut h_field = ScalarField::zeros(grid);
    let mut gamma_field = ScalarField::zeros(grid);
    let mut jp_field = ScalarField::zeros(grid);

    for idx in 0..n {
        let v = state.eta_t.get(idx);
        let v2 = linalg::norm_sq(&v);
        let gamma_l = lorentz_factor_from_speed_sq(v2, params, Some(grid.node(idx)))?;
        let jac = defo.jac.data[idx];
        let j_pow = jpow_neg_inv_alpha(jac, alpha);
        let h = (1.0 + alpha) * weight.w.data[idx] * jpow_neg_inv_alpha(gamma_l * jac, alpha);

        gamma_field.data[idx] = gamma_l;
        jp_field.data[idx] = j_pow;
        h_field.data[idx] = h;

        if params.eps == 0.0 {
            b.set(idx, linalg::IDENTITY);
            chi.set(idx, v);
            continue;
        }

        let gpow = gamma_l.powf(2.0 + 1.0 / alpha);
        let diag = (1.0 + e2 * h) * gpow;
        let rank1 = (1.0 + (1.0 - 1.0 / alpha) * e2 * h) * e2 * gamma_l * gamma_l * gpow;
        let mut bm = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                bm[i][j] = rank1 * v[i] * v[j];
            }
            bm[i][i] += diag;
        }
        b.set(idx, bm);

        let a = defo.a.get(idx);
        let cf = -(1.0 + 1.0 / alpha) * e2 * gamma_l * gamma_l * j_pow;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    c.set(idx, k, i, j, cf * (a[k][i] * v[j] + a[k][j] * v[i]));
                }
            }
        }

        let psi = (1.0 + e2 * h) * gamma_l;
        chi.set(idx, [psi * v[0], psi * v[1], psi * v[2]]);
    }

    Ok(CoefficientData { b, c, chi, h: h_field, gamma_l: gamma_field, j_pow: jp_field })
}

/// Contraction `(C : grad eta_t)_j = C^k_{ij} d_k (eta_t)^i` at a node.
#[inline]
fn c_contraction(c: &Tensor3Field, idx: usize, dv: &Mat3) -> Vec3 {
    let mut out = [0.0; 3];
    for j in 0..3 {
        let mut s = 0.0;
        for k in 0..3 {
            for i in 0..3 {
                s += c.get(idx, k, i, j) * dv[i][k];
            }
        }
        out[j] = s;
    }
    out
}

/// Pointwise residual of the second-order system,
/// `R_j = w^a B^j_i dtt(eta)^i + w^(1+a) C^k_{ij} d_k dt(eta)^i
///        + d_k ( w^(1+a) A^k_j J^(-1/a) )`,
/// with the pressure term differenced as a whole (conservative form).
pub fn system_residual(
    state: &FlowState,
    defo: &DeformationData,
    coeffs: &CoefficientData,
    weight: &WeightField,
    params: &ThermoParams,
) -> Result<VectorField> {
    let grid = state.grid();
    let acc = state.eta_tt()?;
    let alpha = params.alpha;
    let dv = grad_vector(&state.eta_t);
    let n = grid.len();

    let mut out = VectorField::zeros(grid);

    // conservative pressure-gradient term
    for j in 0..3 {
        let mut flux = [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)];
        for idx in 0..n {
            let w1a = weight.w.data[idx].max(0.0).powf(1.0 + alpha);
            let a = defo.a.get(idx);
            let jp = coeffs.j_pow.data[idx];
            for (k, f) in flux.iter_mut().enumerate() {
                f.data[idx] = w1a * a[k][j] * jp;
            }
        }
        for (k, f) in flux.iter().enumerate() {
            let d = deriv_scalar(f, k);
            for idx in 0..n {
                out.comp[j][idx] += d.data[idx];
            }
        }
    }

    for idx in 0..n {
        let w = weight.w.data[idx].max(0.0);
        let wa = w.powf(alpha);
        let w1a = w.powf(1.0 + alpha);
        let bm = coeffs.b.get(idx);
        let ba = linalg::matvec(&bm, &acc.get(idx));
        let cc = c_contraction(&coeffs.c, idx, &dv.get(idx));
        for j in 0..3 {
            out.comp[j][idx] += wa * ba[j] + w1a * cc[j];
        }
    }
    Ok(out)
}

/// Acceleration solve used by the time integrator: the system divided by
/// `w^alpha` with the degenerate factor cancelled analytically, so boundary
/// nodes never see a division by the vanishing weight:
/// `B a = f - w (C : grad eta_t) - (1+alpha)(grad w) A J^(-1/alpha)
///        - w d_k(A^k_j J^(-1/alpha))`.
pub fn acceleration(
    state: &FlowState,
    defo: &DeformationData,
    coeffs: &CoefficientData,
    weight: &WeightField,
    params: &ThermoParams,
    forcing: Option<&VectorField>,
) -> Result<VectorField> {
    let grid = state.grid();
    let alpha = params.alpha;
    let n = grid.len();
    let dv = grad_vector(&state.eta_t);

    // divergence of A^k_j J^(-1/alpha) along k, per j
    let mut div_aj = VectorField::zeros(grid);
    for j in 0..3 {
        for k in 0..3 {
            let mut f = ScalarField::zeros(grid);
            for idx in 0..n {
                f.data[idx] = defo.a.get(idx)[k][j] * coeffs.j_pow.data[idx];
            }
            let d = deriv_scalar(&f, k);
            for idx in 0..n {
                div_aj.comp[j][idx] += d.data[idx];
            }
        }
    }

    let mut out = VectorField::zeros(grid);
    for idx in 0..n {
        let w = weight.w.data[idx];
        let gw = weight.grad.get(idx);
        let a = defo.a.get(idx);
        let jp = coeffs.j_pow.data[idx];
        let cc = c_contraction(&coeffs.c, idx, &dv.get(idx));
        let mut rhs = [0.0; 3];
        for j in 0..3 {
            let mut press = 0.0;
            for k in 0..3 {
                press += gw[k] * a[k][j];
            }
            rhs[j] = -w * cc[j] - (1.0 + alpha) * press * jp - w * div_aj.comp[j][idx];
            if let Some(f) = forcing {
                rhs[j] += f.comp[j][idx];
            }
        }
        let acc = if params.eps == 0.0 {
            rhs
        } else {
            linalg::solve3(&coeffs.b.get(idx), &rhs)
        };
        if !acc.iter().all(|x| x.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite acceleration at node {:?}",
                grid.node(idx)
            )));
        }
        out.set(idx, acc);
    }
    Ok(out)
}

/// Analytic time derivative of the modified velocity (needs `eta_tt`):
/// `dt chi^j = (1 + eps^2 h) Gamma a^j
///   + (1 + (1 - 1/alpha) eps^2 h) eps^2 Gamma^3 (v . a) v^j
///   - (1/alpha) eps^2 h Gamma v^j tr(grad(eta_t) A)`.
pub fn chi_time_derivative(
    state: &FlowState,
    defo: &DeformationData,
    coeffs: &CoefficientData,
    params: &ThermoParams,
) -> Result<VectorField> {
    let grid = state.grid();
    let acc = state.eta_tt()?;
    if params.eps == 0.0 {
        return Ok(acc.clone());
    }
    let alpha = params.alpha;
    let e2 = params.eps * params.eps;
    let dv = grad_vector(&state.eta_t);
    let mut out = VectorField::zeros(grid);
    for idx in 0..grid.len() {
        let v = state.eta_t.get(idx);
        let a = acc.get(idx);
        let g = coeffs.gamma_l.data[idx];
        let h = coeffs.h.data[idx];
        let va = linalg::dot(&v, &a);
        let dt_log_j = linalg::trace(&linalg::matmul(&dv.get(idx), &defo.a.get(idx)));
        let c1 = (1.0 + e2 * h) * g;
        let c2 = (1.0 + (1.0 - 1.0 / alpha) * e2 * h) * e2 * g * g * g * va;
        let c3 = -(1.0 / alpha) * e2 * h * g * dt_log_j;
        out.set(idx, [
            c1 * a[0] + (c2 + c3) * v[0],
            c1 * a[1] + (c2 + c3) * v[1],
            c1 * a[2] + (c2 + c3) * v[2],
        ]);
    }
    Ok(out)
}

/// Residual of `Gamma dt chi^j + A^k_j d_k h = 0`, the first-order form that
/// trades spatial derivatives of the enthalpy for time derivatives of chi.
pub fn chi_h_residual(
    state: &FlowState,
    defo: &DeformationData,
    coeffs: &CoefficientData,
    params: &ThermoParams,
) -> Result<VectorField> {
    let grid = state.grid();
    let dchi = chi_time_derivative(state, defo, coeffs, params)?;
    let dh = [
        deriv_scalar(&coeffs.h, 0),
        deriv_scalar(&coeffs.h, 1),
        deriv_scalar(&coeffs.h, 2),
    ];
    let mut out = VectorField::zeros(grid);
    for idx in 0..grid.len() {
        let g = coeffs.gamma_l.data[idx];
        let a = defo.a.get(idx);
        for j in 0..3 {
            let mut grad_h = 0.0;
            for k in 0..3 {
                grad_h += a[k][j] * dh[k].data[idx];
            }
            out.comp[j][idx] = g * dchi.comp[j][idx] + grad_h;
        }
    }
    Ok(out)
}

/// Residual of the gradient-of-divergence structure identity in direction
/// `l`:
/// `d_l(A^k_i J^(-1/a)) = -(1 + 1/a) J^(-1/a) A^k_i div_eta(d_l eta)
///    + J^(-1/a) [A^k_i A^s_r - A^k_r A^s_i] (d_l eta)^r,_s`,
/// left side differenced, right side assembled.
pub fn structure_identity_residual(
    defo: &DeformationData,
    l: usize,
    params: &ThermoParams,
) -> Result<TensorField> {
    if l > 2 {
        return Err(Error::InvalidInput(format!("derivative direction {l} out of range")));
    }
    let grid = defo.a.grid;
    let alpha = params.alpha;
    let n = grid.len();

    let mut jp = ScalarField::zeros(grid);
    for idx in 0..n {
        jp.data[idx] = jpow_neg_inv_alpha(defo.jac.data[idx], alpha);
    }

    // left side: difference the product field
    let mut lhs = TensorField::zeros(grid);
    for k in 0..3 {
        for i in 0..3 {
            let mut f = ScalarField::zeros(grid);
            for idx in 0..n {
                f.data[idx] = defo.a.get(idx)[k][i] * jp.data[idx];
            }
            let d = deriv_scalar(&f, l);
            for idx in 0..n {
                lhs.data[9 * idx + 3 * k + i] = d.data[idx];
            }
        }
    }

    // d_l eta as a vector field, then its gradient (second derivatives of eta)
    let mut dl_eta = VectorField::zeros(grid);
    for r in 0..3 {
        for idx in 0..n {
            dl_eta.comp[r][idx] = defo.d_eta.get(idx)[r][l];
        }
    }
    let x = grad_vector(&dl_eta); // x[r][s] = (d_l eta)^r,_s

    let mut out = TensorField::zeros(grid);
    for idx in 0..n {
        let a = defo.a.get(idx);
        let xm = x.get(idx);
        let jpv = jp.data[idx];
        // div_eta(d_l eta) = A^s_r X^r_s
        let mut div = 0.0;
        for r in 0..3 {
            for s in 0..3 {
                div += a[s][r] * xm[r][s];
            }
        }
        let lh = lhs.get(idx);
        let mut res = [[0.0; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                let mut commut = 0.0;
                for r in 0..3 {
                    for s in 0..3 {
                        commut += (a[k][i] * a[s][r] - a[k][r] * a[s][i]) * xm[r][s];
                    }
                }
                let rhs = -(1.0 + 1.0 / alpha) * jpv * a[k][i] * div + jpv * commut;
                res[k][i] = lh[k][i] - rhs;
            }
        }
        out.set(idx, res);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::compute_deformation;
    use crate::mms::{scaled_forcing_field, PlanarMmsCase, TimeProfile};
    use crate::weight::{make_weight, WeightProfile};

    fn params(gamma: f64, eps: f64) -> ThermoParams {
        ThermoParams::new(gamma, eps).unwrap()
    }

    fn random_planar_state(grid: GridSpec, seed: u64) -> FlowState {
        let mut rng = seed;
        let mut rand01 = move || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        let a = 0.05 + 0.1 * rand01();
        let b = 0.2 * rand01();
        let eta = VectorField::from_fn(grid, |x| [x[0], x[1], x[2] + a * x[2] * (1.0 - x[2])]);
        let eta_t = VectorField::from_fn(grid, |x| [0.0, 0.0, b * (1.0 - x[2] * x[2])]);
        FlowState::new(eta, eta_t, 0.0)
    }

    #[test]
    fn classical_branch_is_exactly_trivial() {
        let grid = GridSpec::planar(17).unwrap();
        let p = params(2.0, 0.0);
        let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
        let state = random_planar_state(grid, 7);
        let defo = compute_deformation(&state.eta, grid).unwrap();
        let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
        for idx in 0..grid.len() {
            assert_eq!(coeffs.b.get(idx), linalg::IDENTITY);
            assert_eq!(coeffs.chi.get(idx), state.eta_t.get(idx));
        }
        assert!(coeffs.c.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rest_state_with_unit_weight_gives_scaled_identity() {
        // eta = x, eta_t = 0, eps = 1, alpha = 1 (gamma = 2), w = J = 1:
        // h = 2, B = (1 + 2) I, C = 0
        let grid = GridSpec::planar(9).unwrap();
        let p = params(2.0, 1.0);
        let w = WeightField::constant_unchecked(grid, 1.0);
        let state = FlowState::rest(grid);
        let defo = compute_deformation(&state.eta, grid).unwrap();
        let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
        for idx in 0..grid.len() {
            assert_eq!(coeffs.h.data[idx], 2.0);
            let b = coeffs.b.get(idx);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(b[i][j], if i == j { 3.0 } else { 0.0 });
                }
            }
        }
        assert!(coeffs.c.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn b_is_symmetric_positive_definite_on_admissible_states() {
        let grid = GridSpec::planar(17).unwrap();
        let p = params(1.5, 0.8);
        let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
        for seed in 1..6u64 {
            let state = random_planar_state(grid, seed);
            let defo = compute_deformation(&state.eta, grid).unwrap();
            let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
            for idx in 0..grid.len() {
                let b = coeffs.b.get(idx);
                for i in 0..3 {
                    for j in 0..3 {
                        assert_eq!(b[i][j], b[j][i]);
                    }
                }
                let eigs = linalg::sym_eigenvalues(&b);
                assert!(eigs[0] > 0.0, "min eigenvalue {} at {idx}", eigs[0]);
            }
        }
    }

    #[test]
    fn superluminal_nodes_are_rejected_with_location() {
        let grid = GridSpec::planar(9).unwrap();
        let p = params(2.0, 1.0);
        let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
        let eta = VectorField::coordinates(grid);
        let eta_t = VectorField::from_fn(grid, |x| [0.0, 0.0, 1.1 * x[2]]);
        let state = FlowState::new(eta, eta_t, 0.0);
        let defo = compute_deformation(&state.eta, grid).unwrap();
        match assemble_coefficients(&state, &defo, &w, &p) {
            Err(Error::Superluminal { node, .. }) => assert!(node[2] > 0),
            other => panic!("expected superluminal error, got {other:?}"),
        }
    }

    #[test]
    fn static_residual_matches_weight_gradient() {
        // eta = x at rest: R_j = d_k(w^(1+a) delta^k_j) = (1+a) w^a d_j w
        let exact_err = |n3: usize| {
            let grid = GridSpec::planar(n3).unwrap();
            let p = params(2.0, 0.0);
            let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
            let mut state = FlowState::rest(grid);
            state.eta_tt = Some(VectorField::zeros(grid));
            let defo = compute_deformation(&state.eta, grid).unwrap();
            let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
            let res = system_residual(&state, &defo, &coeffs, &w, &p).unwrap();
            let mut err = 0.0f64;
            grid.for_each_node(|idx, [_, _, k]| {
                let x3 = grid.coords(0, 0, k)[2];
                let analytic = 2.0 * (x3 * (1.0 - x3)) * (1.0 - 2.0 * x3);
                err = err.max((res.comp[2][idx] - analytic).abs());
            });
            err
        };
        let (e1, e2) = (exact_err(65), exact_err(129));
        assert!(e1 < 2e-3, "e1 = {e1:.3e}");
        let order = (e1 / e2).log2();
        assert!(order > 1.6 && order < 2.4, "order {order}");
    }

    #[test]
    fn manufactured_residual_converges_to_forcing() {
        for eps in [0.0, 0.2] {
            let p = params(2.0, eps);
            let case = PlanarMmsCase::new(0.01, TimeProfile::Quadratic, p);
            let errs: Vec<(f64, f64)> = [33usize, 65, 129]
                .iter()
                .map(|&n3| {
                    let grid = GridSpec::planar(n3).unwrap();
                    let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
                    let state = case.exact_state(grid, 0.5);
                    let defo = compute_deformation(&state.eta, grid).unwrap();
                    let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
                    let res = system_residual(&state, &defo, &coeffs, &w, &p).unwrap();
                    let want = scaled_forcing_field(&case, &w, 0.5).unwrap();
                    (grid.spacing()[2], res.sub(&want).max_abs())
                })
                .collect();
            let order = crate::mms::fit_order(&errs);
            assert!(order > 1.6 && order < 2.4, "eps {eps}: order {order}, errs {errs:?}");
        }
    }

    #[test]
    fn acceleration_is_division_free_at_the_boundary() {
        // finite acceleration with the correct outward sign at t = 0
        let grid = GridSpec::planar(65).unwrap();
        let p = params(2.0, 0.0);
        let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
        let state = FlowState::rest(grid);
        let defo = compute_deformation(&state.eta, grid).unwrap();
        let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
        let acc = acceleration(&state, &defo, &coeffs, &w, &p, None).unwrap();
        grid.for_each_node(|idx, [_, _, k]| {
            let x3 = grid.coords(0, 0, k)[2];
            let a3 = acc.comp[2][idx];
            assert!(a3.is_finite());
            // sign(eta_tt3) = -sign(d3 w^(1+a)) = -sign(w')
            let wp = 1.0 - 2.0 * x3;
            if wp.abs() > 1e-9 {
                assert!(
                    a3 * wp < 0.0,
                    "k = {k}: acceleration {a3:.3e} does not oppose w' = {wp:.3e}"
                );
            }
            // analytic value: -(1+alpha) w' at the identity state
            assert!((a3 + 2.0 * wp).abs() < 1e-10, "k = {k}: a3 = {a3}");
        });
    }

    #[test]
    fn conservative_pressure_term_telescopes() {
        // with eta_t = eta_tt = 0 the residual is the conservative pressure
        // term alone; its integral over the slab is a discrete divergence
        // with no boundary flux (w^(1+a) vanishes on the faces), so it
        // telescopes to quadrature accuracy
        let p = params(2.0, 0.0);
        let total_at = |n3: usize| -> f64 {
            let grid = GridSpec::planar(n3).unwrap();
            let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
            let eta =
                VectorField::from_fn(grid, |x| [x[0], x[1], x[2] + 0.1 * x[2] * (1.0 - x[2])]);
            let mut state = FlowState::new(eta, VectorField::zeros(grid), 0.0);
            state.eta_tt = Some(VectorField::zeros(grid));
            let defo = compute_deformation(&state.eta, grid).unwrap();
            let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
            let res = system_residual(&state, &defo, &coeffs, &w, &p).unwrap();
            res.scalar_component(2).integrate_trapezoid().abs()
        };
        let (t1, t2) = (total_at(33), total_at(65));
        assert!(t1 < 1e-3, "integral {t1:.3e}");
        assert!(t2 < t1 / 3.0, "t1 {t1:.3e}, t2 {t2:.3e}");
    }

    #[test]
    fn chi_h_residual_vanishes_for_uniform_enthalpy() {
        let grid = GridSpec::planar(17).unwrap();
        let p = params(2.0, 0.5);
        let w = WeightField::constant_unchecked(grid, 1.0);
        let mut state = FlowState::rest(grid);
        state.eta_tt = Some(VectorField::zeros(grid));
        let defo = compute_deformation(&state.eta, grid).unwrap();
        let coeffs = assemble_coefficients(&state, &defo, &w, &p).unwrap();
        let res = chi_h_residual(&state, &defo, &coeffs, &p).unwrap();
        assert_eq!(res.max_abs(), 0.0);
    }

    #[test]
    fn chi_expansion_matches_centered_time_difference() {
        let p = params(2.0, 0.3);
        let case = PlanarMmsCase::new(0.05, TimeProfile::Sin, p);
        let grid = GridSpec::planar(33).unwrap();
        let w = make_weight(&WeightProfile::Parabolic, grid).unwrap();
        let t0 = 0.4;

        let chi_at = |t: f64| -> VectorField {
            let s = case.exact_state(grid, t);
            let defo = compute_deformation(&s.eta, grid).unwrap();
            assemble_coefficients(&s, &defo, &w, &p).unwrap().chi
        };
        let defect_at = |dt: f64| -> f64 {
            let s = case.exact_state(grid, t0);
            let defo = compute_deformation(&s.eta, grid).unwrap();
            let coeffs = assemble_coefficients(&s, &defo, &w, &p).unwrap();
            let analytic = chi_time_derivative(&s, &defo, &coeffs, &p).unwrap();
            let plus = chi_at(t0 + dt);
            let minus = chi_at(t0 - dt);
            let mut err = 0.0f64;
            for idx in 0..grid.len() {
                for c in 0..3 {
                    let fd = (plus.comp[c][idx] - minus.comp[c][idx]) / (2.0 * dt);
                    err = err.max((fd - analytic.comp[c][idx]).abs());
                }
            }
            err
        };
        let ratio = defect_at(0.02) / defect_at(0.01);
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }

    #[test]
    fn structure_identity_is_exact_for_affine_maps_and_second_order_generally() {
        let p = params(2.0, 0.0);
        // identity and affine: both sides vanish
        for stretch in [1.0, 2.0] {
            let grid = GridSpec::planar(17).unwrap();
            let eta = VectorField::from_fn(grid, |x| [x[0], x[1], stretch * x[2]]);
            let defo = compute_deformation(&eta, grid).unwrap();
            let res = structure_identity_residual(&defo, 2, &p).unwrap();
            assert!(res.max_abs() < 1e-12, "stretch {stretch}: {}", res.max_abs());
        }
        // smooth cross-coupled perturbation: residual second order under
        // refinement (a separable map would leave nothing to measure)
        let errs: Vec<(f64, f64)> = [17usize, 33, 65]
            .iter()
            .map(|&n3| {
                let grid = GridSpec::new(n3 - 1, n3 - 1, n3).unwrap();
                let eta = VectorField::from_fn(grid, |x| {
                    let bump = x[2] * (1.0 - x[2]);
                    [
                        x[0] + 0.04 * (2.0 * std::f64::consts::PI * x[1]).sin() * (1.0 + bump),
                        x[1],
                        x[2] + 0.04 * bump * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * x[1]).cos()),
                    ]
                });
                let defo = compute_deformation(&eta, grid).unwrap();
                let res = structure_identity_residual(&defo, 1, &p).unwrap();
                (grid.spacing()[2], res.max_abs())
            })
            .collect();
        let order = crate::mms::fit_order(&errs);
        assert!(order > 1.5 && order < 2.5, "order {order}, errs {errs:?}");
    }
}
