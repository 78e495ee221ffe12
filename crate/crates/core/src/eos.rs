//! Power-law equation of state `p = N^gamma` with energy density
//! `rho = N + eps^2 N^gamma`, relativistic kinematic factors, and the
//! conserved energy pair with its convexity structure.
//!
//! All functions are pure; `eps = 0` short-circuits the classical branch so
//! no 0/0 paths are ever taken.

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Vec3};
use crate::quadrature::integrate;
use serde::{Deserialize, Serialize};

pub const QUAD_REL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThermoParams {
    /// Adiabatic exponent, in (1, 3].
    pub gamma: f64,
    /// Inverse light speed; 0 selects the non-relativistic branch.
    pub eps: f64,
    /// 1/(gamma - 1), derived.
    pub alpha: f64,
}

impl ThermoParams {
    pub fn new(gamma: f64, eps: f64) -> Result<Self> {
        if !gamma.is_finite() || !eps.is_finite() {
            return Err(Error::InvalidInput("non-finite thermodynamic parameter".into()));
        }
        if gamma <= 1.0 || gamma > 3.0 {
            return Err(Error::InvalidInput(format!(
                "gamma must lie in (1, 3], got {gamma}"
            )));
        }
        if eps < 0.0 {
            return Err(Error::InvalidInput(format!("eps must be >= 0, got {eps}")));
        }
        Ok(ThermoParams { gamma, eps, alpha: 1.0 / (gamma - 1.0) })
    }

    pub fn is_relativistic(&self) -> bool {
        self.eps > 0.0
    }

    /// The analysis assumes gamma in (1, 2); values up to 3 are accepted but
    /// flagged so drivers can warn.
    pub fn outside_standard_range(&self) -> bool {
        self.gamma >= 2.0
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ThermoPoint {
    pub n: f64,
    pub rho: f64,
    pub p: f64,
    pub h: f64,
    pub csq: f64,
}

pub fn pressure(n: f64, params: &ThermoParams) -> f64 {
    n.powf(params.gamma)
}

pub fn energy_density_from_number_density(n: f64, params: &ThermoParams) -> f64 {
    n + params.eps * params.eps * pressure(n, params)
}

/// Specific enthalpy `(1 + alpha) N^(1/alpha)`, i.e. `gamma/(gamma-1) N^(gamma-1)`.
pub fn enthalpy(n: f64, params: &ThermoParams) -> f64 {
    (1.0 + params.alpha) * n.powf(1.0 / params.alpha)
}

pub fn thermo_point(n: f64, params: &ThermoParams) -> Result<ThermoPoint> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("number density must be positive, got {n}")));
    }
    Ok(ThermoPoint {
        n,
        rho: energy_density_from_number_density(n, params),
        p: pressure(n, params),
        h: enthalpy(n, params),
        csq: sound_speed_sq(n, params)?,
    })
}

/// Invert `rho = N + eps^2 N^gamma` for N. Newton from `N0 = rho` with a
/// bisection safeguard on `[0, rho]`; the map is monotone so the bracket is
/// guaranteed.
pub fn number_density_from_energy_density(rho: f64, params: &ThermoParams) -> Result<f64> {
    if !rho.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite energy density {rho}")));
    }
    if rho < 0.0 {
        return Err(Error::Domain(format!("energy density must be >= 0, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let e2 = params.eps * params.eps;
    if e2 == 0.0 {
        return Ok(rho);
    }
    let g = params.gamma;
    let f = |n: f64| n + e2 * n.powf(g) - rho;
    let tol = 1e-13 * rho.max(1.0);
    let (mut lo, mut hi) = (0.0f64, rho);
    let mut n = rho;
    for _ in 0..200 {
        let fx = f(n);
        if fx.abs() <= tol {
            return Ok(n);
        }
        if fx > 0.0 {
            hi = n;
        } else {
            lo = n;
        }
        let deriv = 1.0 + e2 * g * n.powf(g - 1.0);
        let mut next = n - fx / deriv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - n).abs() <= f64::EPSILON * n.abs() {
            return Ok(next);
        }
        n = next;
    }
    Ok(n)
}

/// Squared sound speed `gamma N^(gamma-1) / (1 + eps^2 gamma N^(gamma-1))`;
/// strictly below `1/eps^2` for finite N.
pub fn sound_speed_sq(n: f64, params: &ThermoParams) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!(
            "sound speed undefined at vacuum (N = {n})"
        )));
    }
    let gk = params.gamma * n.powf(params.gamma - 1.0);
    Ok(gk / (1.0 + params.eps * params.eps * gk))
}

pub fn lorentz_factor(v: Vec3, params: &ThermoParams) -> Result<f64> {
    lorentz_factor_from_speed_sq(norm_sq(&v), params, None)
}

/// Hot-path variant taking `|v|^2` directly; `node` feeds the error report.
pub fn lorentz_factor_from_speed_sq(
    v2: f64,
    params: &ThermoParams,
    node: Option<[usize; 3]>,
) -> Result<f64> {
    if params.eps == 0.0 {
        return Ok(1.0);
    }
    let s = params.eps * params.eps * v2;
    if s >= 1.0 {
        return Err(Error::Superluminal {
            node: node.unwrap_or([0, 0, 0]),
            value: s.sqrt(),
        });
    }
    Ok(1.0 / (1.0 - s).sqrt())
}

/// Modified density `(rho + eps^2 p) / (1 - eps^2 |v|^2)`.
pub fn modified_density(rho: f64, v: Vec3, params: &ThermoParams) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::Domain(format!("energy density must be >= 0, got {rho}")));
    }
    if params.eps == 0.0 {
        return Ok(rho);
    }
    let gamma_l = lorentz_factor(v, params)?;
    let n = number_density_from_energy_density(rho, params)?;
    let p = pressure(n, params);
    Ok((rho + params.eps * params.eps * p) * gamma_l * gamma_l)
}

/// `p(s)/s^gamma` as a function of the energy density s, extended by 1 at
/// vacuum. Smooth in `s^(gamma-1)`, which is what the substitution below
/// exploits.
fn pressure_density_ratio(s: f64, params: &ThermoParams) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    let n = match number_density_from_energy_density(s, params) {
        Ok(n) => n,
        Err(_) => return 1.0,
    };
    // N/s = 1 - eps^2 N^gamma / s, exactly, avoiding cancellation near 0
    let ratio = 1.0 - params.eps * params.eps * n.powf(params.gamma) / s;
    ratio.powf(params.gamma)
}

/// `int_0^rho p(s)/s^2 ds`. The substitution `s = tau^alpha` removes the
/// endpoint behaviour `s^(gamma-2)` exactly, leaving a smooth integrand for
/// every gamma in (1, 3].
pub fn pressure_integral(rho: f64, params: &ThermoParams) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let alpha = params.alpha;
    let tau_hi = rho.powf(1.0 / alpha);
    alpha
        * integrate(
            |tau| pressure_density_ratio(tau.powf(alpha), params),
            0.0,
            tau_hi,
            QUAD_REL_TOL,
        )
}

/// `kappa = int_0^1 p(s)/s^2 ds`.
pub fn kappa(params: &ThermoParams) -> f64 {
    pressure_integral(1.0, params)
}

/// The auxiliary density `exp(int_1^rho ds / (s + eps^2 p(s)))` entering the
/// energy pair. Distinct from the equation-of-state inversion; see
/// [`eos_density_probe`].
pub fn n_energy(rho: f64, params: &ThermoParams) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("energy density must be positive, got {rho}")));
    }
    let e2 = params.eps * params.eps;
    let integral = integrate(
        |s| {
            let n = number_density_from_energy_density(s, params).unwrap_or(s);
            1.0 / (s + e2 * n.powf(params.gamma))
        },
        1.0,
        rho,
        QUAD_REL_TOL,
    );
    Ok(integral.exp())
}

/// Ratio of the exp-integral density to the equation-of-state inversion at
/// the same energy density. The two coincide only in the classical limit;
/// this probe reports how far apart they sit.
pub fn eos_density_probe(rho: f64, params: &ThermoParams) -> Result<f64> {
    let ne = n_energy(rho, params)?;
    let n = number_density_from_energy_density(rho, params)?;
    Ok(ne / n)
}

#[derive(Clone, Copy, Debug)]
pub struct EnergyPair {
    pub v: f64,
    pub h: Vec3,
}

/// Below this the relativistic expression loses too many digits to
/// cancellation; the classical limit form is accurate to O(eps^2) < 1e-10
/// there, matching the quadrature tolerance.
const EPS_LIMIT_FORM: f64 = 1e-5;

/// Conserved energy pair (V, H). For `eps = 0` (and tiny eps) this is the
/// classical `V = rho |u|^2 / 2 + rho int_0^rho p(s)/s^2 ds`,
/// `H = u (V + p)`.
pub fn energy_pair(rho: f64, v: Vec3, params: &ThermoParams) -> Result<EnergyPair> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("energy density must be positive, got {rho}")));
    }
    let _ = lorentz_factor(v, params)?;
    if params.eps <= EPS_LIMIT_FORM {
        let p = pressure(number_density_from_energy_density(rho, params)?, params);
        let value = 0.5 * rho * norm_sq(&v) + rho * pressure_integral(rho, params);
        let flux = [v[0] * (value + p), v[1] * (value + p), v[2] * (value + p)];
        return Ok(EnergyPair { v: value, h: flux });
    }
    let e2 = params.eps * params.eps;
    let kap = kappa(params);
    let n = number_density_from_energy_density(rho, params)?;
    let p = pressure(n, params);
    let gamma_l = lorentz_factor(v, params)?;
    let rho_t = (rho + e2 * p) * gamma_l * gamma_l;
    let ne = n_energy(rho, params)?;
    let value = ((1.0 + kap * e2) * (rho_t - e2 * p) - ne * gamma_l) / e2;
    let hcoef = ((1.0 + kap * e2) * rho_t - ne * gamma_l) / e2;
    Ok(EnergyPair { v: value, h: [v[0] * hcoef, v[1] * hcoef, v[2] * hcoef] })
}

/// V as a function of the conservative variables `(rho, rho u)`; the Hessian
/// of this map is the convexity object of interest.
pub fn energy_v_conservative(omega: [f64; 4], params: &ThermoParams) -> Result<f64> {
    let rho = omega[0];
    if !(rho > 0.0) {
        return Err(Error::Domain("conservative density must be positive".into()));
    }
    let u = [omega[1] / rho, omega[2] / rho, omega[3] / rho];
    Ok(energy_pair(rho, u, params)?.v)
}

#[cfg(test)]
mod tests {
    use super::*;

    // -- independent oracles ------------------------------------------------

    /// Pure bisection inversion of rho = N + eps^2 N^gamma.
    fn bisect_density(rho: f64, params: &ThermoParams) -> f64 {
        let e2 = params.eps * params.eps;
        let f = |n: f64| n + e2 * n.powf(params.gamma) - rho;
        let (mut lo, mut hi) = (0.0f64, rho.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Adaptive Simpson, independent of the Gauss-Kronrod path.
    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
        let right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
        }
    }

    /// Symmetric Jacobi eigenvalue sweep for small matrices.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    fn params(gamma: f64, eps: f64) -> ThermoParams {
        ThermoParams::new(gamma, eps).unwrap()
    }

    // -- inversion -----------------------------------------------------------

    #[test]
    fn classical_inversion_is_identity() {
        let p = params(1.7, 0.0);
        assert_eq!(number_density_from_energy_density(0.7, &p).unwrap(), 0.7);
    }

    #[test]
    fn inversion_solves_quadratic_case() {
        // N + N^2 = 2 has the positive root N = 1
        let p = params(2.0, 1.0);
        let n = number_density_from_energy_density(2.0, &p).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inversion_matches_bisection_oracle() {
        let p = params(1.5, 1.0);
        let n = number_density_from_energy_density(1.3, &p).unwrap();
        let oracle = bisect_density(1.3, &p);
        assert!((n - oracle).abs() < 1e-12, "impl {n} oracle {oracle}");
        // frozen from the oracle: root of N + N^1.5 = 1.3
        assert!((n - 0.70635033128609015).abs() < 1e-10);
    }

    #[test]
    fn inversion_round_trip() {
        for &gamma in &[1.3, 1.5, 2.0, 2.7] {
            for &eps in &[0.0, 0.3, 1.0] {
                let p = params(gamma, eps);
                let mut n = 1e-6;
                while n <= 1e3 {
                    let rho = energy_density_from_number_density(n, &p);
                    let back = number_density_from_energy_density(rho, &p).unwrap();
                    assert!(
                        (back - n).abs() <= 1e-10 * n.max(1.0),
                        "gamma {gamma} eps {eps} n {n} back {back}"
                    );
                    n *= 10.0;
                }
            }
        }
    }

    #[test]
    fn inversion_rejects_bad_input() {
        let p = params(2.0, 1.0);
        assert!(number_density_from_energy_density(f64::NAN, &p).is_err());
        assert!(number_density_from_energy_density(-1.0, &p).is_err());
        assert_eq!(number_density_from_energy_density(0.0, &p).unwrap(), 0.0);
    }

    // -- sound speed ----------------------------------------------------------

    #[test]
    fn classical_sound_speed() {
        let p = params(2.0, 0.0);
        assert!((sound_speed_sq(1.0, &p).unwrap() - 2.0).abs() < 1e-15);
        assert!(sound_speed_sq(0.0, &p).is_err());
        assert!(sound_speed_sq(-1.0, &p).is_err());
    }

    #[test]
    fn sound_speed_approaches_light_speed() {
        let p = params(2.0, 1.0);
        let c = sound_speed_sq(1e6, &p).unwrap();
        assert!((c - 1.0).abs() < 1e-5);
        // below the bound on a log-spaced sweep
        let mut n = 1e-8;
        while n < 1e8 {
            assert!(sound_speed_sq(n, &p).unwrap() < 1.0);
            n *= 10.0;
        }
    }

    #[test]
    fn sound_speed_matches_pressure_derivative() {
        // c^2 = dp/drho through the N <-> rho map
        let p = params(1.5, 0.5);
        let n0 = 0.8;
        let rho0 = energy_density_from_number_density(n0, &p);
        let d = 1e-5;
        let p_at = |rho: f64| {
            pressure(number_density_from_energy_density(rho, &p).unwrap(), &p)
        };
        let fd = (p_at(rho0 + d) - p_at(rho0 - d)) / (2.0 * d);
        let c = sound_speed_sq(n0, &p).unwrap();
        assert!((fd - c).abs() < 1e-6, "fd {fd} csq {c}");
    }

    // -- kinematic factors ------------------------------------------------------

    #[test]
    fn lorentz_factor_basics() {
        let p = params(2.0, 1.0);
        assert_eq!(lorentz_factor([0.0; 3], &p).unwrap(), 1.0);
        let g = lorentz_factor([0.5f64.sqrt(), 0.0, 0.0], &p).unwrap();
        assert!((g - 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            lorentz_factor([1.0, 0.0, 0.0], &p),
            Err(Error::Superluminal { .. })
        ));
        let p0 = params(2.0, 0.0);
        assert_eq!(lorentz_factor([5.0, 0.0, 0.0], &p0).unwrap(), 1.0);
    }

    #[test]
    fn modified_density_examples() {
        let p0 = params(2.0, 0.0);
        assert_eq!(modified_density(1.0, [0.0; 3], &p0).unwrap(), 1.0);
        let p1 = params(2.0, 1.0);
        // rho = 2 => N = 1, p = 1: (2 + 1)/1 = 3 at rest
        assert!((modified_density(2.0, [0.0; 3], &p1).unwrap() - 3.0).abs() < 1e-11);
        // |v|^2 = 0.5: (2 + 1)/0.5 = 6, cross-checked by direct evaluation
        let v = [0.5f64.sqrt(), 0.0, 0.0];
        let got = modified_density(2.0, v, &p1).unwrap();
        assert!((got - 6.0).abs() < 1e-10);
        let n = number_density_from_energy_density(2.0, &p1).unwrap();
        let direct = (2.0 + pressure(n, &p1)) / (1.0 - 0.5);
        assert!((got - direct).abs() < 1e-12);
    }

    // -- energy pair ---------------------------------------------------------

    #[test]
    fn kappa_is_one_for_quadratic_pressure() {
        // gamma = 2, eps = 0: p(s) = s^2, kappa = int_0^1 1 ds = 1
        let p = params(2.0, 0.0);
        assert!((kappa(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_matches_simpson_oracle() {
        let p = params(1.5, 1.0);
        let k = kappa(&p);
        // oracle: integrate p(s)/s^2 with the s = tau^alpha substitution via
        // a separate adaptive-Simpson path
        let alpha = p.alpha;
        let oracle = alpha
            * simpson(
                |tau| pressure_density_ratio(tau.powf(alpha), &p),
                0.0,
                1.0,
                1e-12,
                40,
            );
        assert!((k - oracle).abs() < 1e-9, "kappa {k} oracle {oracle}");
        // frozen from the oracle
        assert!((k - 1.25703773693582432).abs() < 1e-8);
    }

    #[test]
    fn energy_pair_reaches_classical_limit() {
        // V at small eps within O(eps^2) of the classical expression
        let gamma = 2.0;
        let rho = 1.0;
        let v = [0.3, 0.0, 0.0];
        let p_small = params(gamma, 1e-3);
        let rel = energy_pair(rho, v, &p_small).unwrap();
        let p0 = params(gamma, 0.0);
        // oracle: p(s)/s^2 = s^(gamma-2), which is identically 1 for gamma = 2
        let internal = simpson(
            |s| if s <= 0.0 { 1.0 } else { pressure(s, &p0) / (s * s) },
            0.0,
            rho,
            1e-12,
            40,
        );
        let classical = 0.5 * rho * norm_sq(&v) + rho * internal;
        assert!((classical - (0.045 + 1.0)).abs() < 1e-10);
        assert!((rel.v - classical).abs() < 1e-5, "V {} classical {classical}", rel.v);
    }

    #[test]
    fn energy_pair_rejects_vacuum() {
        let p = params(2.0, 0.5);
        assert!(energy_pair(0.0, [0.0; 3], &p).is_err());
        assert!(energy_pair(-1.0, [0.0; 3], &p).is_err());
    }

    #[test]
    fn energy_hessian_positive_definite() {
        // central-difference Hessian of V in omega = (rho, rho u), step 1e-4
        let hess_min_eig = |rho: f64, u: [f64; 3], p: &ThermoParams| {
            let omega0 = [rho, rho * u[0], rho * u[1], rho * u[2]];
            let step = 1e-4;
            let mut h = vec![vec![0.0; 4]; 4];
            let v_at = |om: [f64; 4]| energy_v_conservative(om, p).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let mut opp = omega0;
                    let mut opm = omega0;
                    let mut omp = omega0;
                    let mut omm = omega0;
                    opp[i] += step;
                    opp[j] += step;
                    opm[i] += step;
                    opm[j] -= step;
                    omp[i] -= step;
                    omp[j] += step;
                    omm[i] -= step;
                    omm[j] -= step;
                    h[i][j] = (v_at(opp) - v_at(opm) - v_at(omp) + v_at(omm))
                        / (4.0 * step * step);
                }
            }
            // symmetrize roundoff before the eigen solve
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let m = 0.5 * (h[i][j] + h[j][i]);
                    h[i][j] = m;
                    h[j][i] = m;
                }
            }
            let eigs = jacobi_eigenvalues(h);
            eigs.into_iter().fold(f64::INFINITY, f64::min)
        };

        let p = params(2.0, 0.5);
        assert!(hess_min_eig(1.0, [0.0; 3], &p) > 0.0);

        // compact sample away from vacuum, eps |v| <= 0.9
        for &rho in &[0.1, 1.0, 10.0] {
            for &s in &[0.0, 0.5, 0.9] {
                let speed = s / p.eps;
                let u = [speed / 3f64.sqrt(); 3];
                let min_eig = hess_min_eig(rho, u, &p);
                assert!(min_eig > 0.0, "rho {rho} s {s}: min eig {min_eig}");
            }
        }
    }

    #[test]
    fn enthalpy_matches_weighted_form() {
        // h(N) = (1 + alpha) w (Gamma J)^(-1/alpha) whenever w^alpha = N Gamma J
        let mut rng = 0x12345u64;
        let mut rand01 = move || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for &gamma in &[1.5, 2.0, 2.5] {
            let p = params(gamma, 0.7);
            for _ in 0..50 {
                let n = 0.01 + 3.0 * rand01();
                let g = 1.0 + rand01();
                let j = 0.5 + rand01();
                let w = (n * g * j).powf(1.0 / p.alpha);
                let lhs = enthalpy(n, &p);
                let rhs = (1.0 + p.alpha) * w * (g * j).powf(-1.0 / p.alpha);
                assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn density_probe_is_unity_in_classical_limit() {
        let p = params(2.0, 0.0);
        for &rho in &[0.3, 1.0, 2.5] {
            assert!((eos_density_probe(rho, &p).unwrap() - 1.0).abs() < 1e-10);
        }
        // relativistic: the two densities genuinely differ
        let p1 = params(1.5, 1.0);
        let ratio = eos_density_probe(2.0, &p1).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0 && (ratio - 1.0).abs() > 1e-3);
    }

    #[test]
    fn params_validation() {
        assert!(ThermoParams::new(1.0, 0.0).is_err());
        assert!(ThermoParams::new(3.5, 0.0).is_err());
        assert!(ThermoParams::new(2.0, -0.1).is_err());
        let p = ThermoParams::new(2.0, 0.0).unwrap();
        assert_eq!(p.alpha, 1.0);
        // the open interval (1, 2) is the assumed range; gamma = 2 is flagged
        assert!(p.outside_standard_range());
        assert!(!ThermoParams::new(1.7, 0.0).unwrap().outside_standard_range());
        assert!(ThermoParams::new(2.5, 0.0).unwrap().outside_standard_range());
    }
}
