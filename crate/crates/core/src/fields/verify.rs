//! Mechanical checks of the properties claimed for a constructed field.

use super::{divergence_at, poly, triangle_mean_divergence, PatchField};
use crate::geometry::slot_of;
use crate::mesh::MeshTopology;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Relative tolerance for prescribed nonzero divergence values.
pub const TOL_VALUE: f64 = 1e-9;
/// Relative tolerance for quantities whose target is exactly zero.
pub const TOL_ZERO: f64 = 1e-10;

/// What a field is expected to satisfy.
#[derive(Clone, Debug, Default)]
pub struct FieldSpec {
    /// Expected `(div f)|_T(v)` keyed by `(T, v)`. Every other vertex value on
    /// the support must vanish unless the vertex is free.
    pub vertex_div: BTreeMap<(usize, usize), f64>,
    /// Vertices whose divergence values are not checked.
    pub free_vertices: BTreeSet<usize>,
    /// Whether every triangle mean of the divergence must vanish.
    pub mean_zero: bool,
    /// Allowed support; `None` means unrestricted.
    pub support: Option<BTreeSet<usize>>,
}

impl FieldSpec {
    /// Expect `values[j]` on the `j`-th triangle of `z`'s patch.
    pub fn expect_at(&mut self, topo: &MeshTopology, z: usize, values: &[f64]) {
        let patch = topo.patch(z).expect("valid vertex");
        for (&t, &v) in patch.triangles.iter().zip(values) {
            self.vertex_div.insert((t, z), v);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    /// Divergence scale: largest coefficient times largest hat gradient.
    pub scale: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl FieldReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn divergence_scale(topo: &MeshTopology, f: &PatchField) -> f64 {
    let mut s: f64 = 0.0;
    for (&t, c) in &f.coeffs {
        let m = c.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let g = topo.geoms[t].hat_gradients().iter().fold(0.0f64, |m, v| m.max(v.norm()));
        s = s.max(m * g);
    }
    s
}

/// Largest trace jump across the edges of the support, counting the outside
/// of the support (and of the domain) as zero.
pub fn continuity_defect(topo: &MeshTopology, f: &PatchField) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in f.coeffs.keys() {
        let tri = topo.mesh.triangles[t];
        for k in 0..3 {
            let (va, vb) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let edge = &topo.edges[topo.tri_edges[t][k]];
            let other = edge.triangles.iter().copied().find(|&u| u != t);
            for s in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
                let mine = f.value(t, &poly::edge_point((k + 1) % 3, (k + 2) % 3, s));
                let theirs = match other {
                    Some(u) => {
                        let ot = topo.mesh.triangles[u];
                        f.value(u, &poly::edge_point(slot_of(&ot, va), slot_of(&ot, vb), s))
                    }
                    None => Default::default(),
                };
                worst = worst.max((mine - theirs).norm());
            }
        }
    }
    worst
}

pub fn verify_field(topo: &MeshTopology, f: &PatchField, spec: &FieldSpec) -> FieldReport {
    let scale = divergence_scale(topo, f).max(f64::MIN_POSITIVE);
    let coeff_scale = f.max_coeff().max(f64::MIN_POSITIVE);
    let mut checks = Vec::new();
    let mut push = |name: &str, dev: f64, tol: f64| {
        checks.push(Check { name: name.into(), max_dev: dev, tol, pass: dev <= tol });
    };

    push("continuity", continuity_defect(topo, f), TOL_ZERO * coeff_scale);

    if let Some(allowed) = &spec.support {
        let outside = f
            .coeffs
            .iter()
            .filter(|(t, _)| !allowed.contains(t))
            .flat_map(|(_, c)| c.iter().flatten())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        push("support", outside, TOL_ZERO * coeff_scale);
    }

    let mut value_dev: f64 = 0.0;
    let mut zero_dev: f64 = 0.0;
    let mut expected_scale: f64 = 0.0;
    let mut seen = BTreeSet::new();
    for &t in f.coeffs.keys() {
        for &v in &topo.mesh.triangles[t] {
            seen.insert((t, v));
            if spec.free_vertices.contains(&v) {
                continue;
            }
            let got = divergence_at(topo, f, t, v);
            match spec.vertex_div.get(&(t, v)) {
                Some(&want) if want != 0.0 => {
                    value_dev = value_dev.max((got - want).abs());
                    expected_scale = expected_scale.max(want.abs());
                }
                _ => zero_dev = zero_dev.max(got.abs()),
            }
        }
    }
    // expected values on triangles outside the support must be zero
    for (&(t, v), &want) in &spec.vertex_div {
        if !seen.contains(&(t, v)) && !spec.free_vertices.contains(&v) {
            value_dev = value_dev.max(want.abs());
            expected_scale = expected_scale.max(want.abs());
        }
    }
    let value_scale = scale.max(expected_scale);
    push("vertex_divergence", value_dev, TOL_VALUE * value_scale);
    push("vertex_divergence_zero", zero_dev, TOL_ZERO * value_scale);

    if spec.mean_zero {
        let dev = f.coeffs.keys().map(|&t| triangle_mean_divergence(topo, f, t).abs()).fold(0.0, f64::max);
        push("triangle_means", dev, TOL_ZERO * value_scale);
    }

    let pass = checks.iter().all(|c| c.pass);
    FieldReport { scale, checks, pass }
}
