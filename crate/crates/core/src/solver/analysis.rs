use super::{
    assemble_divergence, assemble_pressure_mass, assemble_velocity_norm, number_dofs, pressure_basis, pressure_dof,
    strang_dimensions, SplineDimensions, VelocityNorm,
};
use crate::classify::MeshClassification;
use crate::error::{Error, Result};
use crate::fields::poly;
use crate::geometry::slot_of;
use crate::mesh::MeshTopology;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Required ratio between the smallest accepted and largest rejected
/// singular value.
pub const MIN_GAP: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    pub rank: usize,
    pub nullity: usize,
    /// `6T - 1 - sigma`.
    pub expected: usize,
    pub k: i64,
    pub sigma_max: f64,
    /// Smallest accepted over largest rejected singular value (infinite when
    /// nothing is rejected).
    pub gap: f64,
    pub indeterminate: bool,
}

fn rank_with_gap(sv: &[f64], rel_tol: f64) -> (usize, f64, f64) {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let thr = rel_tol * smax;
    let rank = sv.iter().filter(|&&s| s > thr).count();
    let accepted = sv.iter().cloned().filter(|&s| s > thr).fold(f64::INFINITY, f64::min);
    let rejected = sv.iter().cloned().filter(|&s| s <= thr).fold(0.0, f64::max);
    let gap = if rank == sv.len() || rejected == 0.0 { f64::INFINITY } else { accepted / rejected };
    (rank, smax, gap)
}

/// Rank of the divergence pairing by singular values above `rel_tol * sigma_max`.
pub fn divergence_rank(b: &DMatrix<f64>, topo: &MeshTopology, sigma: usize, rel_tol: f64) -> RankInfo {
    let sv = b.singular_values();
    let (rank, sigma_max, gap) = rank_with_gap(sv.as_slice(), rel_tol);
    let expected = (6 * topo.counts.t).saturating_sub(1 + sigma);
    RankInfo {
        rank,
        nullity: b.ncols() - rank,
        expected,
        k: expected as i64 - rank as i64,
        sigma_max,
        gap,
        indeterminate: gap < MIN_GAP,
    }
}

/// Rows of the linear constraints cutting the pressure space down: the mean
/// first, then the alternating functional at each singular vertex.
pub fn pressure_constraints(topo: &MeshTopology, classes: &MeshClassification) -> Result<DMatrix<f64>> {
    let singular: Vec<usize> = classes.singular_vertices().collect();
    let mut c = DMatrix::zeros(1 + singular.len(), 6 * topo.counts.t);
    let pbasis = pressure_basis();
    for t in 0..topo.counts.t {
        for (a, q) in pbasis.iter().enumerate() {
            c[(0, pressure_dof(t, a))] = poly::integral_quad(q, topo.geoms[t].area);
        }
    }
    for (row, &z) in singular.iter().enumerate() {
        let patch = topo.patch(z)?;
        for (j, &t) in patch.triangles.iter().enumerate() {
            let s = slot_of(&topo.mesh.triangles[t], z);
            c[(row + 1, pressure_dof(t, s))] = if j % 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    Ok(c)
}

/// An M-orthonormal basis (as columns) of the kernel of the constraint rows.
pub fn constrained_basis(c: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = c.ncols();
    let k = c.nrows();
    let qr = c.transpose().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-12 * scale) {
        return Err(Error::InvalidParams("pressure constraints are linearly dependent".into()));
    }
    let mut qt = DMatrix::identity(n, n);
    qr.q_tr_mul(&mut qt);
    let null = qt.rows(k, n - k).transpose();
    let gram = null.transpose() * m * &null;
    let chol = gram.cholesky().ok_or_else(|| Error::NotSpd("pressure mass on the constrained space".into()))?;
    // Z = N L^{-T}, so that Z^T M Z = I
    let zt = chol
        .l()
        .solve_lower_triangular(&null.transpose())
        .ok_or_else(|| Error::NotSpd("pressure mass on the constrained space".into()))?;
    Ok(zt.transpose())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfSup {
    /// Smallest singular value of the pairing above the spurious threshold.
    pub beta: f64,
    /// Smallest singular value over the whole constrained space.
    pub beta_all: f64,
    pub sigma_max: f64,
    pub spurious: usize,
    /// Smallest accepted over largest spurious singular value.
    pub gap: f64,
    pub norm: VelocityNorm,
    /// Ascending.
    pub singular_values: Vec<f64>,
}

/// Generalized singular values of the pairing `q^T B v / (|q|_M |v|_A)` over
/// the constrained pressure space spanned by the M-orthonormal columns of `z`,
/// with right singular vectors mapped back to pressure coefficients.
pub fn pairing_svd(a: &DMatrix<f64>, b: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = a.clone().cholesky().ok_or_else(|| Error::NotSpd("velocity Gram matrix".into()))?;
    let btz = b.transpose() * z;
    let x = chol.l().solve_lower_triangular(&btz).ok_or_else(|| Error::NotSpd("velocity Gram matrix".into()))?;
    let (nv, nq) = x.shape();
    // pad to a tall matrix so that the SVD returns every right singular vector
    let tall = if nv >= nq { x } else { x.insert_rows(nv, nq - nv, 0.0) };
    let svd = tall.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..nq).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut modes = DMatrix::zeros(z.nrows(), nq);
    for (col, &i) in order.iter().enumerate() {
        modes.set_column(col, &(z * vt.row(i).transpose()));
    }
    Ok((values, modes))
}

pub fn infsup_constant(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    z: &DMatrix<f64>,
    rel_tol: f64,
    norm: VelocityNorm,
) -> Result<InfSup> {
    let (values, _) = pairing_svd(a, b, z)?;
    Ok(infsup_from_values(values, rel_tol, norm))
}

fn infsup_from_values(values: Vec<f64>, rel_tol: f64, norm: VelocityNorm) -> InfSup {
    let (rank, sigma_max, gap) = rank_with_gap(&values, rel_tol);
    let spurious = values.len() - rank;
    InfSup {
        beta: values.get(spurious).copied().unwrap_or(0.0),
        beta_all: values.first().copied().unwrap_or(0.0),
        sigma_max,
        spurious,
        gap,
        norm,
        singular_values: values,
    }
}

/// M-orthonormal pressure coefficient vectors in the constrained space whose
/// pairing with every velocity is below `rel_tol` of the largest.
pub fn spurious_modes(a: &DMatrix<f64>, b: &DMatrix<f64>, z: &DMatrix<f64>, rel_tol: f64) -> Result<Vec<DVector<f64>>> {
    let (values, modes) = pairing_svd(a, b, z)?;
    let smax = values.last().copied().unwrap_or(0.0);
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel_tol * smax)
        .map(|(i, _)| modes.column(i).into_owned())
        .collect())
}

/// Largest violation of the pressure constraints by the divergence of any
/// velocity basis function, relative to the largest divergence coefficient.
pub fn range_inclusion_defect(b: &DMatrix<f64>, m: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<f64> {
    let minv = m.clone().cholesky().ok_or_else(|| Error::NotSpd("pressure mass".into()))?;
    let coeffs = minv.solve(b);
    let scale = coeffs.amax().max(f64::MIN_POSITIVE);
    let mut c = c.clone();
    let total: f64 = c.row(0).sum();
    c.row_mut(0).scale_mut(1.0 / total);
    Ok((c * &coeffs).amax() / scale)
}

/// Per-triangle vertex values `q|_T(z)` around `z`, in patch order.
pub fn vertex_values(topo: &MeshTopology, q: &[f64], z: usize) -> Result<Vec<f64>> {
    let patch = topo.patch(z)?;
    Ok(patch.triangles.iter().map(|&t| q[pressure_dof(t, slot_of(&topo.mesh.triangles[t], z))]).collect())
}

/// Whether the vertex values of `q` alternate in sign around every interior
/// vertex: neighbouring values never share a strict sign, values below
/// `rel_tol` of the largest count as zero, and at least one is nonzero.
pub fn alternates_around_interior_vertices(topo: &MeshTopology, q: &[f64], rel_tol: f64) -> Result<bool> {
    let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(false);
    }
    let sign = |v: f64| if v.abs() <= rel_tol * scale { 0 } else if v > 0.0 { 1 } else { -1 };
    let mut nonzero = false;
    for z in (0..topo.num_vertices()).filter(|&z| !topo.is_boundary(z)) {
        let vals = vertex_values(topo, q, z)?;
        let n = vals.len();
        for j in 0..n {
            let (a, b) = (sign(vals[j]), sign(vals[(j + 1) % n]));
            nonzero |= a != 0;
            if a * b > 0 {
                return Ok(false);
            }
        }
    }
    Ok(nonzero)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub rank_tol: f64,
    pub norm: VelocityNorm,
    pub max_velocity_dofs: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rank_tol: 1e-9, norm: VelocityNorm::H1Full, max_velocity_dofs: 4000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceAnalysis {
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub rank: RankInfo,
    pub infsup: InfSup,
    /// Pressure coefficient vectors, 6 per triangle.
    pub spurious_modes: Vec<Vec<f64>>,
    pub range_defect: f64,
    pub spline: Option<SplineDimensions>,
    /// `nullity == max(0, 2E0 - E + 3V0 + sigma + K)`.
    pub nullity_matches: bool,
}

pub fn analyze_divergence(
    topo: &MeshTopology,
    classes: &MeshClassification,
    opts: &SolverOptions,
) -> Result<DivergenceAnalysis> {
    let dofs = number_dofs(topo);
    if dofs.velocity_dofs() > opts.max_velocity_dofs {
        return Err(Error::InvalidParams(format!(
            "{} velocity unknowns exceed the dense limit of {}",
            dofs.velocity_dofs(),
            opts.max_velocity_dofs
        )));
    }
    let s = &classes.summary;
    let b = assemble_divergence(topo, &dofs);
    let a = assemble_velocity_norm(topo, &dofs, opts.norm);
    let m = assemble_pressure_mass(topo);
    let rank = divergence_rank(&b, topo, s.sigma, opts.rank_tol);
    let c = pressure_constraints(topo, classes)?;
    let range_defect = range_inclusion_defect(&b, &m, &c)?;
    let z = constrained_basis(&c, &m)?;
    let (values, modes) = pairing_svd(&a, &b, &z)?;
    let infsup = infsup_from_values(values, opts.rank_tol, opts.norm);
    let spurious_modes = (0..infsup.spurious).map(|i| modes.column(i).iter().copied().collect()).collect();
    let spline = if topo.counts.simply_connected() && rank.k >= 0 {
        Some(strang_dimensions(&topo.counts, s.sigma_i, s.sigma_b, rank.k as usize)?)
    } else {
        None
    };
    let c = &topo.counts;
    let formula = (2 * c.e0 as i64 - c.e as i64 + 3 * c.v0 as i64 + s.sigma as i64 + rank.k).max(0);
    Ok(DivergenceAnalysis {
        velocity_dofs: dofs.velocity_dofs(),
        pressure_dofs: dofs.pressure_dofs(),
        nullity_matches: rank.nullity as i64 == formula,
        rank,
        infsup,
        spurious_modes,
        range_defect,
        spline,
    })
}

/// `nullity(B) = max(0, 2E0 - E + 3V0 + sigma + K)`, as an error when it fails.
pub fn nullity_crosscheck(analysis: &DivergenceAnalysis) -> Result<()> {
    if analysis.rank.indeterminate {
        return Err(Error::RankIndeterminate { gap: analysis.rank.gap });
    }
    if !analysis.nullity_matches {
        return Err(Error::InvalidParams(format!(
            "nullity {} disagrees with the dimension formula (K = {})",
            analysis.rank.nullity, analysis.rank.k
        )));
    }
    Ok(())
}
