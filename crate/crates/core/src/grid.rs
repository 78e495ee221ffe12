//! Structured grid on the reference slab `T^2 x (0,1)`: axes 1 and 2 are
//! periodic on `[0,1)`, axis 3 is bounded with nodes on both vacuum faces.
//! Planar symmetry is the degenerate case `n1 = n2 = 1`, where tangential
//! derivatives vanish identically.
//!
//! All stencils are second order: centered 3-point in the interior and
//! one-sided 3-point on the `x3` faces (boundary nodes carry the degenerate
//! weight and must not reach for ghost data). Reductions run in fixed index
//! order so results are bit-reproducible.

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub shape: [usize; 3],
}

impl GridSpec {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        for (axis, n) in [(1, n1), (2, n2)] {
            if n != 1 && n < 3 {
                return Err(Error::InvalidInput(format!(
                    "periodic axis {axis} needs 1 (planar) or >= 3 nodes, got {n}"
                )));
            }
        }
        if n3 < 3 {
            return Err(Error::InvalidInput(format!("axis 3 needs >= 3 nodes, got {n3}")));
        }
        Ok(GridSpec { shape: [n1, n2, n3] })
    }

    pub fn planar(n3: usize) -> Result<Self> {
        GridSpec::new(1, 1, n3)
    }

    pub fn is_planar(&self) -> bool {
        self.shape[0] == 1 && self.shape[1] == 1
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis node spacing. Singleton axes report 1.0 (their stencils and
    /// quadrature weights never use it).
    pub fn spacing(&self) -> [f64; 3] {
        let [n1, n2, n3] = self.shape;
        [
            if n1 == 1 { 1.0 } else { 1.0 / n1 as f64 },
            if n2 == 1 { 1.0 } else { 1.0 / n2 as f64 },
            1.0 / (n3 - 1) as f64,
        ]
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    #[inline]
    pub fn node(&self, idx: usize) -> [usize; 3] {
        let n3 = self.shape[2];
        let n2 = self.shape[1];
        let k = idx % n3;
        let j = (idx / n3) % n2;
        let i = idx / (n3 * n2);
        [i, j, k]
    }

    pub fn coords(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        let x1 = if self.shape[0] == 1 { 0.0 } else { i as f64 * h[0] };
        let x2 = if self.shape[1] == 1 { 0.0 } else { j as f64 * h[1] };
        [x1, x2, k as f64 * h[2]]
    }

    pub fn for_each_node(&self, mut f: impl FnMut(usize, [usize; 3])) {
        let [n1, n2, n3] = self.shape;
        let mut idx = 0;
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n3 {
                    f(idx, [i, j, k]);
                    idx += 1;
                }
            }
        }
    }

    /// Trapezoid quadrature weight of a node (periodic axes are uniform,
    /// which is the trapezoid rule on a circle).
    pub fn trapezoid_weight(&self, node: [usize; 3]) -> f64 {
        let h = self.spacing();
        let mut w = 1.0;
        for axis in 0..2 {
            if self.shape[axis] > 1 {
                w *= h[axis];
            }
        }
        let k = node[2];
        let edge = k == 0 || k == self.shape[2] - 1;
        w * h[2] * if edge { 0.5 } else { 1.0 }
    }
}

/// Composite-Simpson weights for a bounded axis with `n` nodes (3/8 rule on
/// the last cell when the interval count is odd). Used for the conserved
/// quantity logs, where trapezoid convergence error would masquerade as
/// drift.
fn simpson_axis_weights(n: usize, h: f64) -> Vec<f64> {
    let m = n - 1;
    let mut w = vec![0.0; n];
    if m == 1 {
        return vec![0.5 * h; 2];
    }
    let simpson_end = if m % 2 == 0 { m } else { m - 3 };
    let mut cell = 0;
    while cell + 2 <= simpson_end {
        w[cell] += h / 3.0;
        w[cell + 1] += 4.0 * h / 3.0;
        w[cell + 2] += h / 3.0;
        cell += 2;
    }
    if m % 2 == 1 {
        if m == 1 {
            unreachable!()
        }
        let base = m - 3;
        let c = 3.0 * h / 8.0;
        w[base] += c;
        w[base + 1] += 3.0 * c;
        w[base + 2] += 3.0 * c;
        w[base + 3] += c;
    }
    w
}

// ---------------------------------------------------------------------------
// fields

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let mut data = vec![0.0; grid.len()];
        grid.for_each_node(|idx, [i, j, k]| data[idx] = f(grid.coords(i, j, k)));
        ScalarField { grid, data }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for &v in &self.data {
            m = m.max(v.abs());
        }
        m
    }

    pub fn min(&self) -> f64 {
        let mut m = f64::INFINITY;
        for &v in &self.data {
            m = m.min(v);
        }
        m
    }

    /// Trapezoid quadrature over the slab.
    pub fn integrate_trapezoid(&self) -> f64 {
        let mut sum = 0.0;
        self.grid.for_each_node(|idx, node| {
            sum += self.grid.trapezoid_weight(node) * self.data[idx];
        });
        sum
    }

    /// Composite-Simpson quadrature over the slab.
    pub fn integrate_simpson(&self) -> f64 {
        let g = self.grid;
        let h = g.spacing();
        let w3 = simpson_axis_weights(g.shape[2], h[2]);
        let mut tang = 1.0;
        for axis in 0..2 {
            if g.shape[axis] > 1 {
                tang *= h[axis];
            }
        }
        let mut sum = 0.0;
        g.for_each_node(|idx, node| {
            sum += tang * w3[node[2]] * self.data[idx];
        });
        sum
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub comp: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        VectorField { grid, comp: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = VectorField::zeros(grid);
        grid.for_each_node(|idx, [i, j, k]| {
            let v = f(grid.coords(i, j, k));
            for c in 0..3 {
                out.comp[c][idx] = v[c];
            }
        });
        out
    }

    /// The coordinate field `x` itself.
    pub fn coordinates(grid: GridSpec) -> Self {
        VectorField::from_fn(grid, |x| x)
    }

    #[inline]
    pub fn get(&self, idx: usize) -> [f64; 3] {
        [self.comp[0][idx], self.comp[1][idx], self.comp[2][idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [f64; 3]) {
        for c in 0..3 {
            self.comp[c][idx] = v[c];
        }
    }

    pub fn scalar_component(&self, c: usize) -> ScalarField {
        ScalarField { grid: self.grid, data: self.comp[c].clone() }
    }

    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for idx in 0..self.grid.len() {
            let v = self.get(idx);
            m = m.max(crate::linalg::norm_sq(&v).sqrt());
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for c in 0..3 {
            for &v in &self.comp[c] {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.comp[c].iter_mut().zip(&other.comp[c]) {
                *a -= b;
            }
        }
        out
    }
}

/// 3x3 tensor samples, stored as row-major 9-component blocks per node.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub grid: GridSpec,
    pub data: Vec<f64>,
}

impl TensorField {
    pub fn zeros(grid: GridSpec) -> Self {
        TensorField { grid, data: vec![0.0; 9 * grid.len()] }
    }

    #[inline]
    pub fn get(&self, idx: usize) -> Mat3 {
        let b = 9 * idx;
        let d = &self.data[b..b + 9];
        [[d[0], d[1], d[2]], [d[3], d[4], d[5]], [d[6], d[7], d[8]]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, m: Mat3) {
        let b = 9 * idx;
        for r in 0..3 {
            for c in 0..3 {
                self.data[b + 3 * r + c] = m[r][c];
            }
        }
    }

    /// The scalar field of one component `(r, c)`.
    pub fn component(&self, r: usize, c: usize) -> ScalarField {
        let n = self.grid.len();
        let mut data = vec![0.0; n];
        let off = 3 * r + c;
        for idx in 0..n {
            data[idx] = self.data[9 * idx + off];
        }
        ScalarField { grid: self.grid, data }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for &v in &self.data {
            m = m.max(v.abs());
        }
        m
    }
}

// ---------------------------------------------------------------------------
// stencils

/// Second-order first derivative of a scalar field along `axis`.
/// Periodic axes wrap; singleton axes return zeros; the bounded axis uses
/// one-sided 3-point stencils on the faces.
pub fn deriv_scalar(f: &ScalarField, axis: usize) -> ScalarField {
    let g = f.grid;
    let [n1, n2, n3] = g.shape;
    let n_axis = g.shape[axis];
    let mut out = ScalarField::zeros(g);
    if n_axis == 1 {
        return out;
    }
    let h = g.spacing()[axis];
    let inv2h = 1.0 / (2.0 * h);

    let stride = match axis {
        0 => n2 * n3,
        1 => n3,
        _ => 1,
    };

    if axis < 2 {
        g.for_each_node(|idx, node| {
            let i = node[axis];
            let up = if i + 1 == n_axis { idx + stride - n_axis * stride } else { idx + stride };
            let dn = if i == 0 { idx + (n_axis - 1) * stride } else { idx - stride };
            out.data[idx] = (f.data[up] - f.data[dn]) * inv2h;
        });
    } else {
        g.for_each_node(|idx, node| {
            let k = node[2];
            out.data[idx] = if k == 0 {
                (-3.0 * f.data[idx] + 4.0 * f.data[idx + 1] - f.data[idx + 2]) * inv2h
            } else if k == n3 - 1 {
                (3.0 * f.data[idx] - 4.0 * f.data[idx - 1] + f.data[idx - 2]) * inv2h
            } else {
                (f.data[idx + 1] - f.data[idx - 1]) * inv2h
            };
        });
    }
    let _ = n1;
    out
}

/// Repeated application of the first-derivative stencils:
/// `d1^m1 d2^m2 d3^n f`. Accuracy degrades with total order; callers report
/// per-order results.
pub fn deriv_multi(f: &ScalarField, m1: usize, m2: usize, n: usize) -> ScalarField {
    let mut cur = f.clone();
    for _ in 0..m1 {
        cur = deriv_scalar(&cur, 0);
    }
    for _ in 0..m2 {
        cur = deriv_scalar(&cur, 1);
    }
    for _ in 0..n {
        cur = deriv_scalar(&cur, 2);
    }
    cur
}

/// Full gradient of a vector field: `out[i][s] = d_s v^i`.
pub fn grad_vector(v: &VectorField) -> TensorField {
    let g = v.grid;
    let mut out = TensorField::zeros(g);
    for i in 0..3 {
        let comp = ScalarField { grid: g, data: v.comp[i].clone() };
        for s in 0..3 {
            let d = deriv_scalar(&comp, s);
            for idx in 0..g.len() {
                out.data[9 * idx + 3 * i + s] = d.data[idx];
            }
        }
    }
    out
}

/// Derivative of every tensor component along `axis`.
pub fn deriv_tensor(t: &TensorField, axis: usize) -> TensorField {
    let g = t.grid;
    let mut out = TensorField::zeros(g);
    for r in 0..3 {
        for c in 0..3 {
            let comp = t.component(r, c);
            let d = deriv_scalar(&comp, axis);
            for idx in 0..g.len() {
                out.data[9 * idx + 3 * r + c] = d.data[idx];
            }
        }
    }
    out
}

pub fn deriv_multi_tensor(t: &TensorField, m1: usize, m2: usize, n: usize) -> TensorField {
    let mut cur = t.clone();
    for _ in 0..m1 {
        cur = deriv_tensor(&cur, 0);
    }
    for _ in 0..m2 {
        cur = deriv_tensor(&cur, 1);
    }
    for _ in 0..n {
        cur = deriv_tensor(&cur, 2);
    }
    cur
}

pub fn deriv_multi_vector(v: &VectorField, m1: usize, m2: usize, n: usize) -> VectorField {
    let g = v.grid;
    let mut out = VectorField::zeros(g);
    for c in 0..3 {
        let comp = ScalarField { grid: g, data: v.comp[c].clone() };
        out.comp[c] = deriv_multi(&comp, m1, m2, n).data;
    }
    out
}
