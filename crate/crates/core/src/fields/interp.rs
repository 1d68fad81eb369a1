//! Interpolation of per-triangle vertex divergence targets: the local
//! constructions at singular, odd and even vertices, the boundary
//! construction, and transfer along edges and paths.

use super::basis::{basis_w, basis_xi, basis_xi0, kappa_field};
use super::{divergence_at, PatchField};
use crate::classify::{alternating_sum, classify_vertex, compute_dcoefficients, LhStatus, Tolerances};
use crate::error::{Error, Result};
use crate::geometry::slot_of;
use crate::mesh::{MeshTopology, VertexPatch};
use serde::{Deserialize, Serialize};

/// Per-triangle divergence targets at a vertex, in patch order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WTarget {
    pub vertex: usize,
    pub values: Vec<f64>,
}

impl WTarget {
    pub fn new(vertex: usize, values: Vec<f64>) -> Self {
        Self { vertex, values }
    }

    /// Residual of the alternating constraint, relative to `max |a_j|`.
    pub fn alternating_residual(&self) -> f64 {
        let m = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            0.0
        } else {
            alternating_sum(&self.values).abs() / m
        }
    }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// `w` fields of the patch, built on demand.
struct WCache<'a> {
    topo: &'a MeshTopology,
    patch: &'a VertexPatch,
    fields: Vec<Option<PatchField>>,
}

impl<'a> WCache<'a> {
    fn new(topo: &'a MeshTopology, patch: &'a VertexPatch) -> Self {
        Self { topo, patch, fields: vec![None; patch.valence() + 1] }
    }

    fn get(&mut self, k: usize) -> Result<&PatchField> {
        let k = if self.patch.interior { k % self.patch.valence() } else { k };
        if self.fields[k].is_none() {
            self.fields[k] = Some(basis_w(self.topo, self.patch, k)?);
        }
        Ok(self.fields[k].as_ref().unwrap())
    }
}

/// The spoke shared by adjacent patch triangles `a` and `b`.
fn crossing(n: usize, a: usize, b: usize) -> usize {
    if b == (a + 1) % n {
        b
    } else {
        a
    }
}

/// Visit order of the fan starting at `p`: cyclic in direction `dir` for
/// interior patches, outward on both sides for boundary patches. Each entry
/// is `(position, predecessor)`.
fn fan_order(patch: &VertexPatch, p: usize, forward: bool) -> Vec<(usize, usize)> {
    let n = patch.valence();
    let mut order = Vec::with_capacity(n);
    if patch.interior {
        let mut cur = p;
        for _ in 1..n {
            let next = if forward { (cur + 1) % n } else { (cur + n - 1) % n };
            order.push((next, cur));
            cur = next;
        }
    } else {
        for j in p + 1..n {
            order.push((j, j - 1));
        }
        for j in (0..p).rev() {
            order.push((j, j + 1));
        }
    }
    order
}

/// Number of fan steps from `p` to `j`; its parity gives the sign pattern of
/// the seed's side effects.
fn fan_distance(patch: &VertexPatch, p: usize, j: usize, forward: bool) -> usize {
    let n = patch.valence();
    if patch.interior {
        if forward {
            (j + n - p) % n
        } else {
            (p + n - j) % n
        }
    } else {
        p.abs_diff(j)
    }
}

/// Kronecker fields `v_j` with `div v_j|_{T_i}(z) = delta_ij`, propagated
/// from a seed with the Kronecker property at position `p`.
fn kronecker_fields(
    w: &mut WCache,
    seed: PatchField,
    p: usize,
    forward: bool,
) -> Result<Vec<PatchField>> {
    let n = w.patch.valence();
    let mut out: Vec<Option<PatchField>> = vec![None; n];
    out[p] = Some(seed);
    for (j, prev) in fan_order(w.patch, p, forward) {
        let k = crossing(n, prev, j);
        let next = w.get(k)?.minus(out[prev].as_ref().unwrap());
        out[j] = Some(next);
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

fn combine(fields: &[PatchField], a: &[f64]) -> PatchField {
    let mut v = PatchField::zero();
    for (f, &c) in fields.iter().zip(a) {
        v.axpy(c, f);
    }
    v
}

fn check_len(patch: &VertexPatch, a: &[f64]) -> Result<()> {
    if a.len() != patch.valence() {
        return Err(Error::LengthMismatch { expected: patch.valence(), got: a.len() });
    }
    Ok(())
}

/// A field supported on the patch of `z` whose vertex divergence at `z`
/// matches the target, vanishing at every other vertex and with zero triangle
/// means. Dispatches on the classification of `z`.
pub fn local_interpolant(topo: &MeshTopology, target: &WTarget, tol: &Tolerances) -> Result<PatchField> {
    let patch = topo.patch(target.vertex)?;
    let report = classify_vertex(&patch, tol);
    local_interpolant_with(topo, &patch, report.status, target, 1e-10)
}

/// As [`local_interpolant`] with a precomputed status and an explicit
/// relative tolerance for the alternating constraint.
pub(crate) fn local_interpolant_with(
    topo: &MeshTopology,
    patch: &VertexPatch,
    status: LhStatus,
    target: &WTarget,
    admissible_tol: f64,
) -> Result<PatchField> {
    let a = &target.values;
    check_len(patch, a)?;
    let n = patch.valence();
    let mut w = WCache::new(topo, patch);
    match status {
        LhStatus::SingularLI => {
            let r = target.alternating_residual();
            if r > admissible_tol {
                return Err(Error::Inadmissible { vertex: patch.center, residual: r });
            }
            let mut v = PatchField::zero();
            let mut b = 0.0;
            for j in 1..n {
                b = a[j - 1] - b;
                v.axpy(b, w.get(j)?);
            }
            Ok(v)
        }
        LhStatus::OddLI => {
            let mut seed = PatchField::zero();
            for j in 1..=n {
                let sign = if j % 2 == 1 { 0.5 } else { -0.5 };
                seed.axpy(sign, w.get(j)?);
            }
            Ok(combine(&kronecker_fields(&mut w, seed, 0, true)?, a))
        }
        LhStatus::EvenLI { index, .. } => {
            let dc = compute_dcoefficients(patch)?;
            let d = dc.column(index);
            let xi = if index == 0 { basis_xi0(topo, patch)? } else { basis_xi(topo, patch, index)?.1 };
            let mut seed = xi;
            let mut s = 0.0;
            for j in 2..=n {
                s = d[j - 1] - s;
                seed.axpy(-s, w.get(j)?);
            }
            let seed = seed.scaled(-1.0 / dc.big_d[index]);
            Ok(combine(&kronecker_fields(&mut w, seed, 0, true)?, a))
        }
        LhStatus::NotLI | LhStatus::BoundaryNonSingular => Err(Error::NotLocalInterpolating(patch.center)),
    }
}

/// Result of the boundary construction.
#[derive(Clone, Debug)]
pub struct BoundaryInterpolant {
    pub field: PatchField,
    /// Spoke index of the pivot edge `e_s`.
    pub pivot: usize,
    /// Endpoint `y_s` of the pivot edge, where the side effect lands.
    pub spill_vertex: usize,
    /// Whether `y_s` is a boundary vertex (then the side effect pollutes the
    /// boundary).
    pub spill_on_boundary: bool,
}

/// Pivot `s` for the boundary construction: the largest `|sin(th_s + th_{s+1})|`
/// among pairs whose shared spoke ends at an interior vertex; the overall
/// largest when no such pair is usable. Returns the patch position of `T_s`.
pub fn boundary_pivot(topo: &MeshTopology, patch: &VertexPatch, tol: &Tolerances) -> Option<usize> {
    let n = patch.valence();
    let sin = |p: usize| (patch.theta[p] + patch.theta[p + 1]).sin().abs();
    let argmax = |it: &mut dyn Iterator<Item = usize>| {
        let mut best: Option<usize> = None;
        for p in it {
            if best.is_none_or(|b| sin(p) > sin(b)) {
                best = Some(p);
            }
        }
        best
    };
    let interior = argmax(&mut (0..n.saturating_sub(1)).filter(|&p| !topo.is_boundary(patch.spokes[p + 1])));
    match interior {
        Some(p) if sin(p) > tol.singular => Some(p),
        _ => argmax(&mut (0..n.saturating_sub(1))),
    }
}

/// A field on the patch of a non-singular boundary vertex `z` with
/// `div v|_T(z) = p_T`, zero triangle means, and zero divergence at every
/// other boundary vertex (when the pivot endpoint is interior).
pub fn boundary_interpolant(topo: &MeshTopology, z: usize, p: &[f64], tol: &Tolerances) -> Result<BoundaryInterpolant> {
    let patch = topo.patch(z)?;
    if patch.interior {
        return Err(Error::InvalidParams(format!("vertex {z} is interior")));
    }
    check_len(&patch, p)?;
    if crate::classify::theta(&patch) <= tol.singular {
        return Err(Error::SingularBoundary(z));
    }
    let s = boundary_pivot(topo, &patch, tol).ok_or(Error::SingularBoundary(z))?;
    let (th1, th2) = (patch.theta[s], patch.theta[s + 1]);
    let k = s + 1;
    let scale = 2.0 * patch.spoke_len[k] * th1.sin() / (th1 + th2).sin();
    let seed = kappa_field(topo, &patch, k, scale, patch.tangents[k + 1]);
    let mut w = WCache::new(topo, &patch);
    let field = combine(&kronecker_fields(&mut w, seed, s, true)?, p);
    let y = patch.spokes[k];
    Ok(BoundaryInterpolant { field, pivot: k, spill_vertex: y, spill_on_boundary: topo.is_boundary(y) })
}

/// Result of the transfer across one edge `{z, y}`.
#[derive(Clone, Debug)]
pub struct EdgeTransfer {
    pub field: PatchField,
    /// The two triangles sharing the edge; the first is where the seed has
    /// its unit divergence.
    pub triangles: [usize; 2],
    /// Alternating sum of the target, counted from the first triangle.
    pub s_a: f64,
    /// `M_e^z`.
    pub weight: f64,
    /// `div v|_{K_i}(y)` read off the polynomial.
    pub spill: [f64; 2],
    /// `-s(a) cot(th_1) / M` and `s(a) cot(th_2) / M`, with `th_i` the angles
    /// at `y`.
    pub predicted: [f64; 2],
}

/// Transfers the target `a` at `z` across the edge `{z, y}`: the divergence
/// at `z` matches `a`, vanishes at every vertex other than `z` and `y`, and the
/// side effect at `y` sits on the two triangles sharing the edge.
pub fn edge_transfer(topo: &MeshTopology, z: usize, y: usize, a: &[f64], tol: &Tolerances) -> Result<EdgeTransfer> {
    edge_transfer_oriented(topo, z, y, a, tol, true)
}

/// `forward` seeds at the triangle before the spoke (counter-clockwise) and
/// propagates counter-clockwise; otherwise the mirror image.
pub(crate) fn edge_transfer_oriented(
    topo: &MeshTopology,
    z: usize,
    y: usize,
    a: &[f64],
    tol: &Tolerances,
    forward: bool,
) -> Result<EdgeTransfer> {
    let patch = topo.patch(z)?;
    check_len(&patch, a)?;
    let k = patch.spoke_to(y).ok_or(Error::NoSuchEdge(z, y))?;
    if !patch.spoke_is_interior(k) {
        return Err(Error::BoundaryEdge(z, y));
    }
    let (before, after) = patch.spoke_triangles(k);
    let (first, second, normal) =
        if forward { (before, after, patch.normals[k]) } else { (after, before, -patch.normals[k]) };
    let weight = cot(patch.theta[first]) + cot(patch.theta[second]);
    if weight.abs() <= tol.accept {
        return Err(Error::Unacceptable { from: z, to: y, weight });
    }
    let mut w = WCache::new(topo, &patch);
    let mut seed = kappa_field(topo, &patch, k, 2.0 * patch.spoke_len[k], normal);
    seed.axpy(cot(patch.theta[second]), w.get(k)?);
    let seed = seed.scaled(1.0 / weight);
    let field = combine(&kronecker_fields(&mut w, seed, first, forward)?, a);

    let s_a: f64 = a
        .iter()
        .enumerate()
        .map(|(j, v)| if fan_distance(&patch, first, j, forward) % 2 == 0 { *v } else { -*v })
        .sum();
    let tris = [patch.triangles[first], patch.triangles[second]];
    let angle_at_y = |t: usize| topo.geoms[t].angles[slot_of(&topo.mesh.triangles[t], y)];
    let predicted = [-s_a * cot(angle_at_y(tris[0])) / weight, s_a * cot(angle_at_y(tris[1])) / weight];
    let spill = [divergence_at(topo, &field, tris[0], y), divergence_at(topo, &field, tris[1], y)];
    Ok(EdgeTransfer { field, triangles: tris, s_a, weight, spill, predicted })
}

/// Result of the transfer along a path `y_0, ..., y_L`.
#[derive(Clone, Debug)]
pub struct PathInterpolant {
    pub field: PatchField,
    /// Alternating sum of the target at `y_0`, counted from the first seed
    /// triangle.
    pub s_a: f64,
    /// The two triangles `K_1, K_2` sharing the last edge.
    pub end_triangles: [usize; 2],
    /// `div v|_{K_i}(y_L)`.
    pub spill: [f64; 2],
}

/// Chains [`edge_transfer`] along an acceptable path so that the divergence
/// at `y_0` matches `a` and vanishes at every vertex except `y_0` and `y_L`.
pub fn path_interpolant(topo: &MeshTopology, path: &[usize], a: &[f64], tol: &Tolerances) -> Result<PathInterpolant> {
    if path.len() < 2 {
        return Err(Error::NotAPath("a path needs at least one edge".into()));
    }
    for (i, v) in path.iter().enumerate() {
        if path[..i].contains(v) {
            return Err(Error::NotAPath(format!("vertex {v} repeats")));
        }
    }
    let mut field = PatchField::zero();
    let mut target = a.to_vec();
    let mut s_a = 0.0;
    let mut last = None;
    for l in 0..path.len() - 1 {
        let (z, y) = (path[l], path[l + 1]);
        let forward = if l == 0 {
            true
        } else {
            // keep the two triangles carrying the incoming side effect on
            // opposite parities of the fan
            let patch = topo.patch(z)?;
            let n = patch.valence();
            let out = patch.spoke_to(y).ok_or(Error::NoSuchEdge(z, y))?;
            let inc = patch.spoke_to(path[l - 1]).unwrap();
            !(patch.interior && n % 2 == 1 && inc == (out + n - 1) % n)
        };
        let t = edge_transfer_oriented(topo, z, y, &target, tol, forward)?;
        if l == 0 {
            s_a = t.s_a;
        }
        field.axpy(1.0, &t.field);
        let next = topo.patch(y)?;
        target = next.triangles.iter().map(|&u| -divergence_at(topo, &t.field, u, y)).collect();
        last = Some(t);
    }
    let t = last.unwrap();
    Ok(PathInterpolant { field, s_a, end_triangles: t.triangles, spill: t.spill })
}
