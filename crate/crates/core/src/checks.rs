//! The verification suite: every acceptance criterion as a named check with
//! its tolerance pinned in code, plus a few fast invariant checks. The CLI
//! `verify` subcommand and the acceptance test target both drive these.

use crate::dynamics::assemble_coefficients;
use crate::energy::{energy_functionals, hardy_check, monitor_energy_inequality};
use crate::eos::{
    energy_density_from_number_density, number_density_from_energy_density, ThermoParams,
};
use crate::error::Result;
use crate::expr::Expr;
use crate::grid::{GridSpec, VectorField};
use crate::kinematics::{
    compute_deformation, lie_gradient, piola_residual, verify_rate_identities, FlowState,
};
use crate::linalg;
use crate::mms::fit_order;
use crate::solver::{
    conserved_monitor, limit_sweep, mms_convergence, run, SolverConfig, Trajectory,
};
use crate::vorticity::assemble_curl_structure;
use crate::weight::{make_weight, weight_norms, WeightField, WeightProfile};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {:<38} {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn guard<F: FnOnce() -> Result<CheckResult>>(name: &'static str, f: F) -> CheckResult {
    match f() {
        Ok(r) => r,
        Err(e) => CheckResult::new(name, false, format!("errored: {e}")),
    }
}

fn perturbed_map(grid: GridSpec) -> VectorField {
    VectorField::from_fn(grid, |x| {
        [
            x[0] + 0.05 * (2.0 * PI * x[0]).sin(),
            x[1] + 0.05 * (2.0 * PI * x[1]).sin(),
            x[2] + 0.05 * x[2] * (1.0 - x[2]),
        ]
    })
}

/// Perturbed identity with cross-coupled components; the separable variant
/// above has an identically-zero discrete Piola residual, so order
/// measurements use this one.
fn coupled_map(grid: GridSpec) -> VectorField {
    VectorField::from_fn(grid, |x| {
        let bump = x[2] * (1.0 - x[2]);
        [
            x[0] + 0.05 * (2.0 * PI * x[0]).sin() * (1.0 + bump),
            x[1] + 0.05 * (2.0 * PI * x[1]).sin() * bump,
            x[2] + 0.05 * bump * (1.0 + 0.5 * (2.0 * PI * x[0]).sin()),
        ]
    })
}

/// Criterion 1: Piola identity residual converges at second order on the
/// cross-coupled perturbed-identity map, and vanishes identically on the
/// separable one.
pub fn criterion_piola() -> CheckResult {
    const NAME: &str = "piola-identity-order";
    guard(NAME, || {
        let start = Instant::now();
        let mut samples = Vec::new();
        for n3 in [32usize, 64, 128, 256] {
            let grid = GridSpec::new((n3 / 4).max(8), (n3 / 4).max(8), n3)?;
            let defo = compute_deformation(&coupled_map(grid), grid)?;
            samples.push((grid.spacing()[2], piola_residual(&defo).max_abs()));
        }
        let order = fit_order(&samples);
        let grid = GridSpec::new(16, 16, 33)?;
        let separable =
            piola_residual(&compute_deformation(&perturbed_map(grid), grid)?).max_abs();
        let secs = start.elapsed().as_secs_f64();
        let passed = (1.7..=2.3).contains(&order) && separable < 1e-12 && secs < 10.0;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!("order {order:.3} in [1.7, 2.3]; separable map exact ({separable:.1e}); {secs:.1}s"),
        ))
    })
}

/// Criterion 2: curl matrix/vector norm identity and the vanishing curl of a
/// Lagrangian gradient.
pub fn criterion_curl_identities() -> CheckResult {
    const NAME: &str = "curl-identities";
    guard(NAME, || {
        let grid = GridSpec::new(16, 16, 17)?;
        let defo = compute_deformation(&perturbed_map(grid), grid)?;
        let f = VectorField::from_fn(grid, |x| {
            [
                (2.0 * PI * x[1]).cos() * x[2],
                (2.0 * PI * x[0]).sin() + x[2] * x[2],
                x[2] * (1.0 - x[2]) * (2.0 * PI * x[0]).cos(),
            ]
        });
        let lie = lie_gradient(&f, &defo)?;
        let mut worst = 0.0f64;
        for idx in 0..grid.len() {
            let lhs = linalg::frobenius_sq(&lie.curl_mat.get(idx));
            let rhs = 2.0 * linalg::norm_sq(&lie.curl.get(idx));
            worst = worst.max((lhs - rhs).abs() / lhs.max(1.0));
        }

        let mut samples = Vec::new();
        for n in [16usize, 32, 64] {
            let grid = GridSpec::new(n, n, 2 * n + 1)?;
            let eta = perturbed_map(grid);
            let defo = compute_deformation(&eta, grid)?;
            let mut omega = VectorField::zeros(grid);
            grid.for_each_node(|idx, [i, j, k]| {
                let x = grid.coords(i, j, k);
                // gradient of f = sin(2 pi x1) x3, pulled back by A^T
                let gradf =
                    [2.0 * PI * (2.0 * PI * x[0]).cos() * x[2], 0.0, (2.0 * PI * x[0]).sin()];
                let a = defo.a.get(idx);
                let mut w = [0.0; 3];
                for kk in 0..3 {
                    for r in 0..3 {
                        w[kk] += a[r][kk] * gradf[r];
                    }
                }
                omega.set(idx, w);
            });
            let lie = lie_gradient(&omega, &defo)?;
            samples.push((grid.spacing()[2], lie.curl.max_abs()));
        }
        let order = fit_order(&samples);
        let passed = worst <= 1e-12 && order >= 1.7;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!("norm identity defect {worst:.2e} <= 1e-12, gradient-curl order {order:.2} >= 1.7"),
        ))
    })
}

/// Criterion 3: classical and rest-state degenerations are exact.
pub fn criterion_degenerations() -> CheckResult {
    const NAME: &str = "coefficient-degenerations";
    guard(NAME, || {
        let grid = GridSpec::planar(33)?;
        let w = make_weight(&WeightProfile::Parabolic, grid)?;

        // eps = 0 on a moving state: B bitwise identity, C bitwise zero
        let p0 = ThermoParams::new(1.7, 0.0)?;
        let eta = VectorField::from_fn(grid, |x| [x[0], x[1], x[2] + 0.08 * x[2] * (1.0 - x[2])]);
        let eta_t = VectorField::from_fn(grid, |x| [0.0, 0.0, 0.4 * (1.0 - x[2])]);
        let state = FlowState::new(eta, eta_t, 0.0);
        let defo = compute_deformation(&state.eta, grid)?;
        let coeffs = assemble_coefficients(&state, &defo, &w, &p0)?;
        let mut classical_exact = true;
        for idx in 0..grid.len() {
            if coeffs.b.get(idx) != linalg::IDENTITY {
                classical_exact = false;
            }
        }
        classical_exact &= coeffs.c.data.iter().all(|&v| v.to_bits() == 0);

        // rest state at eps > 0: C = 0, S = U = I, R = 0 exactly
        let p1 = ThermoParams::new(2.0, 0.7)?;
        let mut rest = FlowState::rest(grid);
        rest.eta_tt = Some(VectorField::zeros(grid));
        let defo_r = compute_deformation(&rest.eta, grid)?;
        let coeffs_r = assemble_coefficients(&rest, &defo_r, &w, &p1)?;
        let cs = assemble_curl_structure(&rest, &defo_r, &coeffs_r, &p1, None)?;
        let mut rest_exact = coeffs_r.c.data.iter().all(|&v| v == 0.0);
        for idx in 0..grid.len() {
            rest_exact &= cs.s.get(idx) == linalg::IDENTITY && cs.u.get(idx) == linalg::IDENTITY;
        }
        rest_exact &= cs.r.as_ref().map_or(false, |r| r.data.iter().all(|&v| v == 0.0));

        let passed = classical_exact && rest_exact;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!("eps=0 exact: {classical_exact}, rest state exact: {rest_exact}"),
        ))
    })
}

/// Criterion 4: `det S = Gamma^2` and the rank-1 inverse, on 10^4 random
/// admissible samples.
pub fn criterion_det_s() -> CheckResult {
    const NAME: &str = "det-s-gamma-squared";
    guard(NAME, || {
        let mut rng = StdRng::seed_from_u64(0x52454c56);
        let mut worst_det = 0.0f64;
        let mut worst_inv = 0.0f64;
        let grid = GridSpec::planar(1002)?;
        let w = WeightField::constant_unchecked(grid, 1.0);
        for _ in 0..10 {
            let eps = rng.random_range(0.05..2.0);
            let p = ThermoParams::new(2.0, eps)?;
            let eta = VectorField::coordinates(grid);
            let mut eta_t = VectorField::zeros(grid);
            for idx in 0..grid.len() {
                let speed = rng.random_range(0.0..0.95) / eps;
                let theta = rng.random_range(0.0..PI);
                let phi = rng.random_range(0.0..2.0 * PI);
                eta_t.set(idx, [
                    speed * theta.sin() * phi.cos(),
                    speed * theta.sin() * phi.sin(),
                    speed * theta.cos(),
                ]);
            }
            let mut state = FlowState::new(eta, eta_t, 0.0);
            state.eta_tt = Some(VectorField::zeros(grid));
            let defo = compute_deformation(&state.eta, grid)?;
            let coeffs = assemble_coefficients(&state, &defo, &w, &p)?;
            let cs = assemble_curl_structure(&state, &defo, &coeffs, &p, None)?;
            for idx in 0..grid.len() {
                let s = cs.s.get(idx);
                let u = cs.u.get(idx);
                let g2 = coeffs.gamma_l.data[idx] * coeffs.gamma_l.data[idx];
                worst_det = worst_det.max((linalg::det3(&s) - g2).abs() / g2);
                let prod = linalg::matmul(&u, &s);
                worst_inv =
                    worst_inv.max(linalg::max_abs(&linalg::sub(&prod, &linalg::IDENTITY)));
            }
        }
        let passed = worst_det <= 1e-12 && worst_inv <= 1e-12;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!("10020 samples: |det S - G^2|/G^2 {worst_det:.2e}, |US - I| {worst_inv:.2e}"),
        ))
    })
}

/// Criterion 5: energy functional values at the identity state.
pub fn criterion_identity_energies() -> CheckResult {
    const NAME: &str = "identity-energy-values";
    guard(NAME, || {
        let grid = GridSpec::planar(256)?;
        let p = ThermoParams::new(2.0, 0.0)?;
        let w = make_weight(&WeightProfile::Parabolic, grid)?;
        let mut state = FlowState::rest(grid);
        state.eta_tt = Some(VectorField::zeros(grid));
        let defo = compute_deformation(&state.eta, grid)?;
        let coeffs = assemble_coefficients(&state, &defo, &w, &p)?;
        let cs = assemble_curl_structure(&state, &defo, &coeffs, &p, None)?;
        let rep = energy_functionals(&state, &defo, &coeffs, &cs, &w, 1.0, 0)?;
        let e2 = rep.e2_entries[0].value;
        let e3 = rep.e3_entries[0].value;
        let passed = (e2 - 0.3).abs() <= 1e-4 && (e3 - 0.1).abs() <= 1e-4;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!("E2_00 = {e2:.8} (want 0.3), E3_00 = {e3:.8} (want 0.1), tol 1e-4"),
        ))
    })
}

/// Criterion 6: Hardy checks, exact oracles and the uniform family bound.
pub fn criterion_hardy() -> CheckResult {
    const NAME: &str = "hardy-inequality";
    guard(NAME, || {
        let n = 4097;
        let s: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let one = hardy_check(&vec![1.0; n], &vec![0.0; n], 2.0)?;
        let exact_ok = (one.lhs - 1.0).abs() <= 1e-10 && (one.rhs - 1.0 / 3.0).abs() <= 1e-10;

        let family: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![1.0; n], vec![0.0; n]),
            (s.clone(), vec![1.0; n]),
            (s.iter().map(|&x| x * x).collect(), s.iter().map(|&x| 2.0 * x).collect()),
            (
                s.iter().map(|&x| (PI * x).sin()).collect(),
                s.iter().map(|&x| PI * (PI * x).cos()).collect(),
            ),
        ];
        let mut worst = 0.0f64;
        let mut finite = true;
        for (g, gp) in &family {
            let r = hardy_check(g, gp, 2.0)?;
            finite &= r.ratio.is_finite();
            worst = worst.max(r.ratio);
        }
        let passed = exact_ok && finite && worst <= 10.0;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!(
                "g=1: lhs {:.2e} rhs {:.6} (exact to 1e-10: {exact_ok}); family bound {worst:.3} <= 10",
                (one.lhs - 1.0).abs(),
                one.rhs
            ),
        ))
    })
}

/// The criterion-7 configuration; its trajectory feeds criteria 9, 11, 12.
pub fn reference_classical_run() -> Result<Trajectory> {
    let params = ThermoParams::new(2.0, 0.0)?;
    let grid = GridSpec::planar(512)?;
    let mut cfg = SolverConfig::new(params, grid, 0.5)?;
    cfg.cfl = 0.4;
    cfg.cadence_dt = 0.05;
    cfg.diag_order = Some(4);
    run(&cfg)
}

/// Criterion 7: classical planar energy conservation.
pub fn criterion_classical_conservation(traj: &Trajectory) -> CheckResult {
    const NAME: &str = "classical-energy-conservation";
    let mut worst = 0.0f64;
    for r in &traj.reports {
        worst = worst.max(r.energy_drift);
    }
    let passed = worst < 1e-6;
    CheckResult::new(
        NAME,
        passed,
        format!("max relative drift {worst:.3e} < 1e-6 over t in [0, 0.5], n3 = 512"),
    )
}

/// Criterion 8: manufactured-solution convergence orders for both regimes.
pub fn criterion_mms() -> CheckResult {
    const NAME: &str = "mms-convergence";
    guard(NAME, || {
        let start = Instant::now();
        let resolutions = [64usize, 128, 256, 512];
        // amplitude chosen so the fine-grid error stays far above roundoff
        let classical = mms_convergence(ThermoParams::new(2.0, 0.0)?, &resolutions, 0.25, 1.0, 0.4)?;
        let relativistic =
            mms_convergence(ThermoParams::new(2.0, 0.2)?, &resolutions, 0.25, 1.0, 0.4)?;
        let secs = start.elapsed().as_secs_f64();
        let in_range = |o: f64| (1.7..=2.3).contains(&o);
        let passed = in_range(classical.order) && in_range(relativistic.order) && secs < 300.0;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!(
                "orders: eps=0 {:.3}, eps=0.2 {:.3} (want [1.7, 2.3]), {secs:.0}s",
                classical.order, relativistic.order
            ),
        ))
    })
}

/// Criterion 9: number-density conservation and the RK4 signature of the
/// relativistic energy under step halving.
pub fn criterion_conservation_rk4(classical: &Trajectory) -> CheckResult {
    const NAME: &str = "g0-conservation-rk4";
    guard(NAME, || {
        let d0 = classical.reports.first().unwrap().g0_defect;
        let d_end = classical.reports.last().unwrap().g0_defect;

        // relativistic run for a non-vacuous defect and the step-halving study
        let params = ThermoParams::new(2.0, 0.2)?;
        let grid = GridSpec::planar(65)?;
        let energy_at = |cfl: f64| -> Result<(f64, f64)> {
            let mut cfg = SolverConfig::new(params, grid, 0.25)?;
            cfg.cfl = cfl;
            cfg.cadence_dt = 0.25;
            cfg.diag_order = Some(0);
            cfg.eta1 = [
                Expr::parse("0")?,
                Expr::parse("0")?,
                Expr::parse("0.2*x3*(1-x3)")?,
            ];
            let traj = run(&cfg)?;
            let rows = conserved_monitor(&traj)?;
            Ok((rows.last().unwrap().energy, traj.reports.last().unwrap().g0_defect))
        };
        let (e_ref, defect_rel) = energy_at(0.05)?;
        let (e1, _) = energy_at(0.8)?;
        let (e2, _) = energy_at(0.4)?;
        let (e3, _) = energy_at(0.2)?;
        let d1 = (e1 - e_ref).abs();
        let d2 = (e2 - e_ref).abs();
        let d3 = (e3 - e_ref).abs();
        let r1 = d1 / d2.max(1e-300);
        let r2 = d2 / d3.max(1e-300);

        let passed = d0 <= 1e-10 && d_end <= 1e-7 && defect_rel <= 1e-7 && r1 >= 8.0 && r2 >= 8.0;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!(
                "defect t=0 {d0:.2e} <= 1e-10, t=0.5 {d_end:.2e} <= 1e-7 (eps=0.2: {defect_rel:.2e}); \
                 energy step-halving ratios {r1:.1}, {r2:.1} >= 8"
            ),
        ))
    })
}

/// Criterion 10: the non-relativistic limit sweep.
pub fn criterion_limit_sweep() -> CheckResult {
    const NAME: &str = "limit-sweep";
    guard(NAME, || {
        let params = ThermoParams::new(2.0, 0.4)?;
        let grid = GridSpec::planar(129)?;
        let mut base = SolverConfig::new(params, grid, 0.25)?;
        base.cadence_dt = 0.05;
        base.diag_order = Some(0);
        base.eta1 = [Expr::parse("0")?, Expr::parse("0")?, Expr::parse("0.2*x3*(1-x3)")?];
        let eps_list = [0.4, 0.2, 0.1, 0.05];
        let table = limit_sweep(&base, &eps_list)?;
        if table.rows.iter().any(|r| r.aborted.is_some()) {
            return Ok(CheckResult::new(NAME, false, "a sweep member aborted".into()));
        }
        let diffs: Vec<f64> = table.rows.iter().map(|r| r.sup_diff).collect();
        let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);

        // fit |B - I| ~ c eps^2 on the larger eps, test the smallest
        let (mut num, mut den) = (0.0, 0.0);
        for row in &table.rows[..3] {
            num += row.max_b_dev * row.eps * row.eps;
            den += row.eps.powi(4);
        }
        let c = num / den;
        let predicted = c * 0.05 * 0.05;
        let b_small = table.rows[3].max_b_dev;
        let within = b_small <= 2.0 * predicted;
        let passed = decreasing && within;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!(
                "sup diffs {diffs:?} strictly decreasing: {decreasing}; \
                 |B-I|(0.05) = {b_small:.3e} <= 2 * {predicted:.3e}: {within}"
            ),
        ))
    })
}

/// Criterion 11: irrotational planar data keeps the modified-velocity curl
/// at zero along the run.
pub fn criterion_planar_vorticity(traj: &Trajectory) -> CheckResult {
    const NAME: &str = "planar-vorticity";
    guard(NAME, || {
        let weight = make_weight(&traj.config.weight, traj.config.grid)?;
        let mut worst = 0.0f64;
        for state in &traj.states {
            let defo = compute_deformation(&state.eta, traj.config.grid)?;
            let coeffs = assemble_coefficients(state, &defo, &weight, &traj.config.params)?;
            let curl = lie_gradient(&coeffs.chi, &defo)?.curl_mat.max_abs();
            worst = worst.max(curl);
        }
        let passed = worst <= 1e-8;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!("max |Curl chi| = {worst:.2e} <= 1e-8 over the run"),
        ))
    })
}

/// Criterion 12: the energy-inequality monitor logs no events on the smooth
/// classical run.
pub fn criterion_energy_monitor(traj: &Trajectory) -> CheckResult {
    const NAME: &str = "energy-inequality-monitor";
    let outcome = monitor_energy_inequality(&traj.reports, traj.config.params.alpha, 2);
    let passed = outcome.events.is_empty() && traj.events.is_empty();
    CheckResult::new(
        NAME,
        passed,
        format!(
            "majorant c0 {:.3e} (1+E)^{:.2}; monitor events {}, run events {}",
            outcome.c0,
            outcome.c1,
            outcome.events.len(),
            traj.events.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// supplementary invariant checks for the verify table

pub fn check_eos_round_trip() -> CheckResult {
    const NAME: &str = "eos-round-trip";
    guard(NAME, || {
        let mut worst = 0.0f64;
        for &gamma in &[1.3, 1.5, 2.0] {
            for &eps in &[0.0, 0.5, 1.0] {
                let p = ThermoParams::new(gamma, eps)?;
                let mut n = 1e-6;
                while n <= 1e3 {
                    let rho = energy_density_from_number_density(n, &p);
                    let back = number_density_from_energy_density(rho, &p)?;
                    worst = worst.max((back - n).abs() / n.max(1.0));
                    n *= 10.0;
                }
            }
        }
        let passed = worst <= 1e-10;
        Ok(CheckResult::new(NAME, passed, format!("worst relative defect {worst:.2e} <= 1e-10")))
    })
}

pub fn check_rate_identities() -> CheckResult {
    const NAME: &str = "deformation-rate-identities";
    guard(NAME, || {
        let grid = GridSpec::planar(9)?;
        let path = |dt: f64| -> Vec<FlowState> {
            (0..5)
                .map(|m| {
                    let t = m as f64 * dt;
                    let c = (1.0 + 0.1 * t).powi(3);
                    let cdot = 0.3 * (1.0 + 0.1 * t).powi(2);
                    let eta = VectorField::from_fn(grid, |x| [x[0], x[1], x[2] * c]);
                    let eta_t = VectorField::from_fn(grid, |x| [0.0, 0.0, x[2] * cdot]);
                    FlowState { eta, eta_t, eta_tt: None, time: t }
                })
                .collect()
        };
        let r1 = verify_rate_identities(&path(0.2), grid)?;
        let r2 = verify_rate_identities(&path(0.1), grid)?;
        let ratio = r1.max_dj_residual / r2.max_dj_residual;
        let passed = ratio > 3.0 && ratio < 5.0;
        Ok(CheckResult::new(NAME, passed, format!("dt-halving ratio {ratio:.2} (want ~4)")))
    })
}

pub fn check_structure_identity() -> CheckResult {
    const NAME: &str = "structure-identity-order";
    guard(NAME, || {
        let p = ThermoParams::new(2.0, 0.0)?;
        let mut samples = Vec::new();
        for n3 in [17usize, 33, 65] {
            let grid = GridSpec::new(n3 - 1, n3 - 1, n3)?;
            let eta = perturbed_map(grid);
            let defo = compute_deformation(&eta, grid)?;
            let res = crate::dynamics::structure_identity_residual(&defo, 2, &p)?;
            samples.push((grid.spacing()[2], res.max_abs()));
        }
        let order = fit_order(&samples);
        let passed = order > 1.5 && order < 2.5;
        Ok(CheckResult::new(NAME, passed, format!("refinement order {order:.2} (want ~2)")))
    })
}

pub fn check_weight_norms() -> CheckResult {
    const NAME: &str = "weight-regularity-norm";
    guard(NAME, || {
        let exact = 1.0 / 630.0;
        let at = |n3: usize| -> Result<f64> {
            let grid = GridSpec::planar(n3)?;
            let w = make_weight(&WeightProfile::Parabolic, grid)?;
            Ok(weight_norms(&w, 0, 1.0)?.0)
        };
        // the boundary derivatives of w^4 vanish through third order, so the
        // trapezoid rule beats its generic second order here; require
        // at-least-second-order shrinkage plus tight absolute accuracy
        let e1 = (at(33)? - exact).abs();
        let e2 = (at(65)? - exact).abs();
        let passed = e1 < 1e-9 && e2 < e1 / 3.5;
        Ok(CheckResult::new(
            NAME,
            passed,
            format!("F_0 defect {e1:.2e} -> {e2:.2e} under refinement (exact 1/630)"),
        ))
    })
}

// ---------------------------------------------------------------------------
// suites

/// Fast suite: criteria 1-6 plus the supplementary invariants. Seconds.
pub fn quick_suite() -> Vec<CheckResult> {
    vec![
        criterion_piola(),
        criterion_curl_identities(),
        criterion_degenerations(),
        criterion_det_s(),
        criterion_identity_energies(),
        criterion_hardy(),
        check_eos_round_trip(),
        check_rate_identities(),
        check_structure_identity(),
        check_weight_norms(),
    ]
}

/// Full suite: everything, sharing the reference classical run across the
/// criteria that monitor it.
pub fn full_suite() -> Vec<CheckResult> {
    let mut results = quick_suite();
    let start = Instant::now();
    match reference_classical_run() {
        Ok(traj) => {
            let secs = start.elapsed().as_secs_f64();
            let mut c7 = criterion_classical_conservation(&traj);
            if secs >= 60.0 {
                c7.passed = false;
            }
            c7.detail.push_str(&format!(", {secs:.1}s (< 60s)"));
            results.push(c7);
            results.push(criterion_mms());
            results.push(criterion_conservation_rk4(&traj));
            results.push(criterion_limit_sweep());
            results.push(criterion_planar_vorticity(&traj));
            results.push(criterion_energy_monitor(&traj));
        }
        Err(e) => {
            results.push(CheckResult::new(
                "classical-energy-conservation",
                false,
                format!("reference run failed: {e}"),
            ));
        }
    }
    results
}
