//! The building blocks `eta`, `w`, `chi`, `xi`, `kappa` of the local
//! constructions.

use super::poly::{self, Cubic};
use super::PatchField;
use crate::classify::compute_dcoefficients;
use crate::error::{Error, Result};
use crate::geometry::slot_of;
use crate::mesh::{MeshTopology, Point, VertexPatch};

/// `psi_z^2 psi_y` on triangle `t`.
pub fn eta_scalar(topo: &MeshTopology, t: usize, z: usize, y: usize) -> Cubic {
    let tri = &topo.mesh.triangles[t];
    let (sz, sy) = (slot_of(tri, z), slot_of(tri, y));
    poly::monomial(&[sz, sz, sy])
}

/// `kappa_e^z = psi_z^2 psi_y - psi_z psi_y / 2` on triangle `t`.
pub fn kappa_scalar(topo: &MeshTopology, t: usize, z: usize, y: usize) -> Cubic {
    let tri = &topo.mesh.triangles[t];
    let (sz, sy) = (slot_of(tri, z), slot_of(tri, y));
    let a = poly::monomial(&[sz, sz, sy]);
    let b = poly::monomial(&[sz, sy]);
    std::array::from_fn(|i| a[i] - 0.5 * b[i])
}

/// `kappa_e^z` for the interior edge `{z, y}`, as `(triangle, scalar cubic)`
/// pairs on the two triangles sharing the edge.
pub fn basis_kappa(topo: &MeshTopology, z: usize, y: usize) -> Result<Vec<(usize, Cubic)>> {
    let e = topo.edge_between(z, y).ok_or(Error::NoSuchEdge(z, y))?;
    let edge = &topo.edges[e];
    if !edge.is_interior() {
        return Err(Error::BoundaryEdge(z, y));
    }
    Ok(edge.triangles.iter().map(|&t| (t, kappa_scalar(topo, t, z, y))).collect())
}

/// `scale * direction * kappa_e^z` for spoke `k` of the patch.
pub(crate) fn kappa_field(topo: &MeshTopology, patch: &VertexPatch, k: usize, scale: f64, direction: Point) -> PatchField {
    let (a, b) = patch.spoke_triangles(k);
    let y = patch.spokes[k];
    let mut f = PatchField::zero();
    for p in [a, b] {
        let t = patch.triangles[p];
        let s = kappa_scalar(topo, t, patch.center, y).map(|c| c * scale);
        f.add_scalar_times(t, &s, direction);
    }
    f
}

fn eta_field(topo: &MeshTopology, patch: &VertexPatch, k: usize, direction: Point) -> PatchField {
    let (a, b) = patch.spoke_triangles(k);
    let y = patch.spokes[k];
    let mut f = PatchField::zero();
    for p in [a, b] {
        let t = patch.triangles[p];
        f.add_scalar_times(t, &eta_scalar(topo, t, patch.center, y), direction);
    }
    f
}

fn check_interior_spoke(patch: &VertexPatch, k: usize) -> Result<()> {
    if k > patch.valence() || !patch.spoke_is_interior(k) {
        let y = patch.spokes.get(k).copied().unwrap_or(usize::MAX);
        return Err(Error::BoundaryEdge(patch.center, y));
    }
    Ok(())
}

/// `w_e^z = |e| t_e^z eta_e^z` for spoke `k`.
pub fn basis_w(topo: &MeshTopology, patch: &VertexPatch, k: usize) -> Result<PatchField> {
    check_interior_spoke(patch, k)?;
    Ok(eta_field(topo, patch, k, patch.tangents[k] * patch.spoke_len[k]))
}

/// `chi_k = (12 / |e_k|) eta n_k`, with `n_k` pointing out of triangle `k - 1`.
pub fn basis_chi(topo: &MeshTopology, patch: &VertexPatch, k: usize) -> Result<PatchField> {
    if !patch.interior {
        return Err(Error::BoundaryVertex(patch.center));
    }
    check_interior_spoke(patch, k)?;
    Ok(eta_field(topo, patch, k, patch.normals[k] * (12.0 / patch.spoke_len[k])))
}

/// `chi = chi_1 + ... + chi_N`.
pub fn basis_chi_sum(topo: &MeshTopology, patch: &VertexPatch) -> Result<PatchField> {
    let mut f = PatchField::zero();
    for k in 1..=patch.valence() {
        f.axpy(1.0, &basis_chi(topo, patch, k)?);
    }
    Ok(f)
}

/// `(xi~_i, xi_i)` for `i` in `{1, 2}`: `xi~_i = psi_z^2 E_i` and the
/// mean-free correction `xi_i = xi~_i - sum_{j<N} c_{ji} chi_j`.
pub fn basis_xi(topo: &MeshTopology, patch: &VertexPatch, i: usize) -> Result<(PatchField, PatchField)> {
    if !(1..=2).contains(&i) {
        return Err(Error::InvalidParams(format!("xi index must be 1 or 2, got {i}")));
    }
    let dc = compute_dcoefficients(patch)?;
    let dir = if i == 1 { Point::new(1.0, 0.0) } else { Point::new(0.0, 1.0) };
    let mut tilde = PatchField::zero();
    for &t in &patch.triangles {
        let sz = slot_of(&topo.mesh.triangles[t], patch.center);
        tilde.add_scalar_times(t, &poly::monomial(&[sz, sz]), dir);
    }
    let mut xi = tilde.clone();
    for j in 1..patch.valence() {
        xi.axpy(-dc.c[j][i - 1], &basis_chi(topo, patch, j)?);
    }
    Ok((tilde, xi))
}

/// `xi_0 = chi / 12`, whose vertex divergences are `d_{j0}`.
pub fn basis_xi0(topo: &MeshTopology, patch: &VertexPatch) -> Result<PatchField> {
    Ok(basis_chi_sum(topo, patch)?.scaled(1.0 / 12.0))
}
