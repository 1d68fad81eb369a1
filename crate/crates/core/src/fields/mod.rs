//! Piecewise cubic vector fields with exact divergence evaluation, the basis
//! fields of the local constructions, and the interpolation algorithms built
//! from them.

pub mod basis;
pub mod interp;
pub mod poly;
pub mod verify;

use crate::error::{Error, Result};
use crate::geometry::slot_of;
use crate::mesh::{MeshTopology, Point};
use poly::{Cubic, Quad};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use basis::{basis_chi, basis_chi_sum, basis_kappa, basis_w, basis_xi, kappa_scalar};
pub use interp::{
    boundary_interpolant, edge_transfer, local_interpolant, path_interpolant, BoundaryInterpolant, EdgeTransfer,
    WTarget,
};
pub use verify::{verify_field, Check, FieldReport, FieldSpec};

/// Per-triangle cubic coefficients `[x, y]` in the triangle's barycentric
/// monomial basis (local slot order of `mesh.triangles[t]`).
pub type TriangleCoeffs = [Cubic; 2];

/// A continuous piecewise cubic vector field, stored on the triangles where it
/// may be nonzero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PatchField {
    pub coeffs: BTreeMap<usize, TriangleCoeffs>,
}

impl PatchField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    /// `scalar * direction` on triangle `t`.
    pub fn add_scalar_times(&mut self, t: usize, scalar: &Cubic, direction: Point) {
        let entry = self.coeffs.entry(t).or_insert([[0.0; 10]; 2]);
        for i in 0..10 {
            entry[0][i] += scalar[i] * direction.x;
            entry[1][i] += scalar[i] * direction.y;
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &PatchField) {
        if alpha == 0.0 {
            return;
        }
        for (&t, c) in &other.coeffs {
            let entry = self.coeffs.entry(t).or_insert([[0.0; 10]; 2]);
            for d in 0..2 {
                for i in 0..10 {
                    entry[d][i] += alpha * c[d][i];
                }
            }
        }
    }

    pub fn scaled(&self, alpha: f64) -> PatchField {
        let mut out = PatchField::zero();
        out.axpy(alpha, self);
        out
    }

    pub fn plus(&self, other: &PatchField) -> PatchField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn minus(&self, other: &PatchField) -> PatchField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().flat_map(|c| c.iter().flatten()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at barycentric point `l` of triangle `t` (zero off the support).
    pub fn value(&self, t: usize, l: &[f64; 3]) -> Point {
        match self.coeffs.get(&t) {
            Some(c) => Point::new(poly::eval_cubic(&c[0], l), poly::eval_cubic(&c[1], l)),
            None => Point::zeros(),
        }
    }
}

/// The divergence on triangle `t` as a quadratic in barycentric monomials.
pub fn divergence_poly(topo: &MeshTopology, c: &TriangleCoeffs, t: usize) -> Quad {
    let grads = topo.geoms[t].hat_gradients();
    let mut q = [0.0; 6];
    for k in 0..3 {
        let dx = poly::derivative(&c[0], k);
        let dy = poly::derivative(&c[1], k);
        for i in 0..6 {
            q[i] += dx[i] * grads[k].x + dy[i] * grads[k].y;
        }
    }
    q
}

/// Gradient matrix `[[du/dx, du/dy], [dv/dx, dv/dy]]` at a barycentric point.
pub fn gradient_at(topo: &MeshTopology, f: &PatchField, t: usize, l: &[f64; 3]) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    if let Some(c) = f.coeffs.get(&t) {
        let grads = topo.geoms[t].hat_gradients();
        for d in 0..2 {
            for k in 0..3 {
                let dk = poly::eval_quad(&poly::derivative(&c[d], k), l);
                g[d][0] += dk * grads[k].x;
                g[d][1] += dk * grads[k].y;
            }
        }
    }
    g
}

/// `(div f)|_T(v)`, exact from the coefficients. Zero for triangles off the
/// support.
pub fn divergence_at(topo: &MeshTopology, f: &PatchField, t: usize, v: usize) -> f64 {
    match f.coeffs.get(&t) {
        Some(c) => poly::quad_at_vertex(&divergence_poly(topo, c, t), slot_of(&topo.mesh.triangles[t], v)),
        None => 0.0,
    }
}

/// `(div f)|_T(v)` for a triangle in the support.
pub fn eval_divergence_at_vertex(topo: &MeshTopology, f: &PatchField, t: usize, v: usize) -> Result<f64> {
    if !topo.mesh.triangles.get(t).is_some_and(|tri| tri.contains(&v)) {
        return Err(Error::InvalidParams(format!("vertex {v} is not a vertex of triangle {t}")));
    }
    if !f.coeffs.contains_key(&t) {
        return Err(Error::InvalidParams(format!("triangle {t} is outside the field's support")));
    }
    Ok(divergence_at(topo, f, t, v))
}

/// `(1/|T|) int_T div f`, by the degree-6 rule.
pub fn triangle_mean_divergence(topo: &MeshTopology, f: &PatchField, t: usize) -> f64 {
    match f.coeffs.get(&t) {
        Some(c) => {
            let q = divergence_poly(topo, c, t);
            poly::integrate(1.0, |l| poly::eval_quad(&q, l))
        }
        None => 0.0,
    }
}

/// `int_T div f`, by the degree-6 rule.
pub fn triangle_divergence_integral(topo: &MeshTopology, f: &PatchField, t: usize) -> f64 {
    topo.geoms[t].area * triangle_mean_divergence(topo, f, t)
}

/// Per-triangle vertex divergence values at `z`, in the order of `z`'s patch.
pub fn vertex_divergences(topo: &MeshTopology, f: &PatchField, z: usize) -> Result<Vec<f64>> {
    let patch = topo.patch(z)?;
    Ok(patch.triangles.iter().map(|&t| divergence_at(topo, f, t, z)).collect())
}

/// Largest `|grad f|` (Frobenius) sampled on a barycentric grid of each
/// support triangle.
pub fn max_gradient(topo: &MeshTopology, f: &PatchField, samples: usize) -> f64 {
    let mut m: f64 = 0.0;
    for t in f.support() {
        for i in 0..=samples {
            for j in 0..=samples - i {
                let l = [i as f64 / samples as f64, j as f64 / samples as f64, (samples - i - j) as f64 / samples as f64];
                let g = gradient_at(topo, f, t, &l);
                m = m.max((g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2)).sqrt());
            }
        }
    }
    m
}
