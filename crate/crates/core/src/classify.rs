//! Vertex-level criteria: singularity, the alternating functional, the
//! corrector coefficients `b, c, d` and determinants `D_0, D_1, D_2`, edge
//! weights `M_e^z`, and the resulting local-interpolation taxonomy.

use crate::error::{Error, Result};
use crate::geometry::edge_pair_geometry;
use crate::mesh::{MeshTopology, Point, VertexPatch};
use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by the whole pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// A vertex is singular when `Theta(z) <= singular`.
    pub singular: f64,
    /// An even vertex is local interpolating when `|D_i| h_z^s > decision`.
    pub decision: f64,
    /// An edge is traversable when `|M_e^z| > accept`.
    pub accept: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { singular: 1e-10, decision: 1e-8, accept: 1e-8, rank: 1e-9 }
    }
}

/// `Theta(z)`: the largest `|sin|` of consecutive angle pairs. Cyclic for
/// interior vertices; `N - 1` pairs on the boundary (an empty max is 0).
pub fn theta(patch: &VertexPatch) -> f64 {
    let th = &patch.theta;
    let n = th.len();
    let pairs = if patch.interior { n } else { n.saturating_sub(1) };
    (0..pairs).map(|k| (th[k] + th[(k + 1) % n]).sin().abs()).fold(0.0, f64::max)
}

pub fn is_singular(patch: &VertexPatch, tol: f64) -> bool {
    theta(patch) <= tol
}

/// `A_h^z(q) = sum_j (-1)^{j-1} q|_{T_j}(z)` for values in patch order.
pub fn alternating_functional(patch: &VertexPatch, q: &[f64]) -> Result<f64> {
    if q.len() != patch.valence() {
        return Err(Error::LengthMismatch { expected: patch.valence(), got: q.len() });
    }
    Ok(alternating_sum(q))
}

/// `sum_j (-1)^{j-1} a_j` with `j` 1-based.
pub fn alternating_sum(a: &[f64]) -> f64 {
    a.iter().enumerate().map(|(k, v)| if k % 2 == 0 { *v } else { -*v }).sum()
}

/// Corrector coefficients of an interior patch, indexed by 0-based triangle
/// position `k` (the 1-based `j = k + 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DCoefficients {
    /// `b[k][i-1] = int_{T_j} div xi~_i`.
    pub b: Vec<[f64; 2]>,
    /// Prefix sums `c[j] = b_1 + ... + b_j` for `j = 0..=N`; the ends are
    /// exactly zero.
    pub c: Vec<[f64; 2]>,
    /// Vertex divergence of `chi / 12` on each triangle.
    pub d0: Vec<f64>,
    /// Vertex divergence of `xi_1`, `xi_2` on each triangle.
    pub d: Vec<[f64; 2]>,
    /// `D_i = sum_j (-1)^j d_{ji}` for `i = 0, 1, 2`.
    pub big_d: [f64; 3],
}

impl DCoefficients {
    /// `d_{ji}` for `i` in `0..3`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        match i {
            0 => self.d0.clone(),
            _ => self.d.iter().map(|d| d[i - 1]).collect(),
        }
    }
}

fn alt_sign(k: usize) -> f64 {
    // (-1)^j with j = k + 1
    if k % 2 == 0 { -1.0 } else { 1.0 }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

pub fn compute_dcoefficients(patch: &VertexPatch) -> Result<DCoefficients> {
    if !patch.interior {
        return Err(Error::BoundaryVertex(patch.center));
    }
    let n = patch.valence();
    let len2: Vec<f64> = patch.spoke_len.iter().map(|l| l * l).collect();
    let b: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let m = patch.opp_normals[k] * (-patch.opp_len[k] / 3.0);
            [m.x, m.y]
        })
        .collect();
    let mut c = vec![[0.0; 2]; n + 1];
    for k in 0..n {
        c[k + 1] = [c[k][0] + b[k][0], c[k][1] + b[k][1]];
    }
    c[n] = [0.0; 2];

    let mut d0 = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for k in 0..n {
        let ct = cot(patch.theta[k]);
        d0.push(ct * (1.0 / len2[k + 1] - 1.0 / len2[k]));
        d.push(std::array::from_fn(|i| {
            3.0 * b[k][i] / patch.areas[k] - 12.0 * ct * (c[k + 1][i] / len2[k + 1] - c[k][i] / len2[k])
        }));
    }
    let mut big_d = [0.0; 3];
    for k in 0..n {
        let s = alt_sign(k);
        big_d[0] += s * d0[k];
        big_d[1] += s * d[k][0];
        big_d[2] += s * d[k][1];
    }
    Ok(DCoefficients { b, c, d0, d, big_d })
}

/// `D_0` from the telescoped form `sum_j (-1)^j (cot th_j + cot th_{j+1}) / |e_j|^2`.
/// Equal to the direct sum only for even `N`.
pub fn d0_simplified(patch: &VertexPatch) -> f64 {
    let n = patch.valence();
    (0..n)
        .map(|k| {
            let t = cot(patch.theta[k]) + cot(patch.theta[(k + 1) % n]);
            alt_sign(k) * t / patch.spoke_len[k + 1].powi(2)
        })
        .sum()
}

/// `D_1, D_2` from the closed form in terms of the spoke endpoints (taken
/// relative to `z`). Valid for even `N`.
pub fn d_closed_form(patch: &VertexPatch) -> [f64; 2] {
    let n = patch.valence();
    let d0 = d0_simplified(patch);
    let perps = [Point::new(0.0, 1.0), Point::new(-1.0, 0.0)];
    let yn = patch.y[n] - patch.z;
    std::array::from_fn(|i| {
        let ep = perps[i];
        let mut s = 0.0;
        for k in 0..n {
            let next = (k + 1) % n;
            let t = cot(patch.theta[k]) + cot(patch.theta[next]);
            let w = 4.0 * t / patch.spoke_len[k + 1].powi(2) - (1.0 / patch.areas[k] + 1.0 / patch.areas[next]);
            s += alt_sign(k) * w * (patch.y[k + 1] - patch.z).dot(&ep);
        }
        s - 4.0 * d0 * yn.dot(&ep)
    })
}

/// `M_e^z = cot(phi_1) + cot(phi_2)` for the interior edge `{z, y}`.
pub fn edge_weight(topo: &MeshTopology, z: usize, y: usize) -> Result<f64> {
    let g = edge_pair_geometry(topo, z, y)?;
    Ok(cot(g.phi[0]) + cot(g.phi[1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum LhStatus {
    SingularLI,
    OddLI,
    /// `index` is the chosen `i`, `decision` the value `|D_i| h_z^s`.
    EvenLI { index: usize, decision: f64 },
    NotLI,
    BoundaryNonSingular,
}

impl LhStatus {
    pub fn is_local_interpolating(&self) -> bool {
        matches!(self, LhStatus::SingularLI | LhStatus::OddLI | LhStatus::EvenLI { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LhStatus::SingularLI => "SingularLI",
            LhStatus::OddLI => "OddLI",
            LhStatus::EvenLI { .. } => "EvenLI",
            LhStatus::NotLI => "NotLI",
            LhStatus::BoundaryNonSingular => "BoundaryNonSingular",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexReport {
    pub vertex: usize,
    pub boundary: bool,
    pub theta: f64,
    pub singular: bool,
    pub valence: usize,
    pub even: bool,
    pub status: LhStatus,
    /// `|D_i| h_z^s` for `i = 0, 1, 2`; interior even vertices only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decisions: Option<[f64; 3]>,
    /// Growth factor `1 + 1 / (|D_i| h_z^s)` of the even construction, 1 for
    /// the singular and odd constructions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<f64>,
}

/// `|D_i| h_z^s` with `s = 2` for `i = 0` and `s = 1` otherwise.
pub fn decision_values(dc: &DCoefficients, h_z: f64) -> [f64; 3] {
    [dc.big_d[0].abs() * h_z * h_z, dc.big_d[1].abs() * h_z, dc.big_d[2].abs() * h_z]
}

/// Index maximizing the decision value; the smallest index wins ties.
pub fn best_index(decisions: &[f64; 3]) -> usize {
    let mut best = 0;
    for i in 1..3 {
        if decisions[i] > decisions[best] {
            best = i;
        }
    }
    best
}

pub fn classify_vertex(patch: &VertexPatch, tol: &Tolerances) -> VertexReport {
    let th = theta(patch);
    let singular = th <= tol.singular;
    let n = patch.valence();
    let mut report = VertexReport {
        vertex: patch.center,
        boundary: !patch.interior,
        theta: th,
        singular,
        valence: n,
        even: n % 2 == 0,
        status: LhStatus::NotLI,
        decisions: None,
        conditioning: None,
    };
    if singular {
        report.status = LhStatus::SingularLI;
        report.conditioning = Some(1.0);
    } else if !patch.interior {
        report.status = LhStatus::BoundaryNonSingular;
    } else if n % 2 == 1 {
        report.status = LhStatus::OddLI;
        report.conditioning = Some(1.0);
    } else {
        let dc = compute_dcoefficients(patch).expect("interior patch");
        let dv = decision_values(&dc, patch.h_z);
        let i = best_index(&dv);
        report.decisions = Some(dv);
        if dv[i] > tol.decision {
            report.status = LhStatus::EvenLI { index: i, decision: dv[i] };
            report.conditioning = Some(1.0 + 1.0 / dv[i]);
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub singular_li: usize,
    pub odd_li: usize,
    pub even_li: usize,
    pub not_li: usize,
    pub boundary_nonsingular: usize,
    pub sigma: usize,
    pub sigma_i: usize,
    pub sigma_b: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshClassification {
    pub reports: Vec<VertexReport>,
    pub summary: ClassSummary,
}

impl MeshClassification {
    pub fn singular_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.reports.iter().filter(|r| r.singular).map(|r| r.vertex)
    }
}

pub fn classify_mesh(topo: &MeshTopology, tol: &Tolerances) -> Result<MeshClassification> {
    let mut reports = Vec::with_capacity(topo.num_vertices());
    let mut s = ClassSummary::default();
    for z in 0..topo.num_vertices() {
        let r = classify_vertex(&topo.patch(z)?, tol);
        match r.status {
            LhStatus::SingularLI => s.singular_li += 1,
            LhStatus::OddLI => s.odd_li += 1,
            LhStatus::EvenLI { .. } => s.even_li += 1,
            LhStatus::NotLI => s.not_li += 1,
            LhStatus::BoundaryNonSingular => s.boundary_nonsingular += 1,
        }
        if r.singular {
            if r.boundary {
                s.sigma_b += 1;
            } else {
                s.sigma_i += 1;
            }
        }
        reports.push(r);
    }
    s.sigma = s.sigma_i + s.sigma_b;
    Ok(MeshClassification { reports, summary: s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{boundary_fan, crossed, ngon_patch, type1_diagonal};
    use std::f64::consts::PI;

    fn topo(m: crate::mesh::Triangulation) -> MeshTopology {
        MeshTopology::new(m).unwrap()
    }

    #[test]
    fn theta_examples() {
        let t = topo(crossed(1, 1.0).unwrap());
        assert!(theta(&t.patch(4).unwrap()) < 1e-15);
        let t = topo(ngon_patch(6, 1.0, None, None).unwrap());
        assert!((theta(&t.patch(0).unwrap()) - 3f64.sqrt() / 2.0).abs() < 1e-14);
        let t = topo(boundary_fan(&[0.0, PI / 3.0, 2.0 * PI / 3.0], &[1.0; 3]).unwrap());
        let p = t.patch(0).unwrap();
        assert_eq!(p.valence(), 2);
        assert!((theta(&p) - 3f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_triangle_boundary_vertex_is_singular() {
        let t = topo(boundary_fan(&[0.0, 1.0], &[1.0, 1.0]).unwrap());
        let p = t.patch(0).unwrap();
        assert_eq!(theta(&p), 0.0);
        assert!(is_singular(&p, 1e-10));
    }

    #[test]
    fn alternating_examples() {
        let p = topo(crossed(1, 1.0).unwrap()).patch(4).unwrap();
        assert_eq!(alternating_functional(&p, &[1., 1., 1., 1.]).unwrap(), 0.0);
        assert_eq!(alternating_functional(&p, &[1., 0., 0., 0.]).unwrap(), 1.0);
        assert_eq!(alternating_functional(&p, &[2., 5., 4., 1.]).unwrap(), 0.0);
        assert!(alternating_functional(&p, &[1.0]).is_err());
    }

    #[test]
    fn edge_weight_examples() {
        // crossed cell: corner-to-center edge has two pi/4 angles at the corner
        let t = topo(crossed(1, 1.0).unwrap());
        assert!((edge_weight(&t, 0, 4).unwrap() - 2.0).abs() < 1e-14);
        // seen from the center the two angles are right angles
        assert!(edge_weight(&t, 4, 0).unwrap().abs() < 1e-14);
        assert!(edge_weight(&t, 0, 1).is_err());
    }

    #[test]
    fn supplementary_angles_give_zero_weight() {
        let a = [0.0, 1.0, 1.0 + PI / 3.0, 1.0 + PI, 1.0 + 4.0 * PI / 3.0];
        let t = topo(ngon_patch(5, 1.0, None, Some(&a)).unwrap());
        // spoke at direction 1.0 sees angles (pi/3)... find the ring vertex at angle 1 + pi/3
        let w = edge_weight(&t, 0, 3).unwrap();
        let p = t.patch(0).unwrap();
        let k = p.spoke_to(3).unwrap();
        let (a1, a2) = p.spoke_triangles(k);
        let expect = 1.0 / p.theta[a1].tan() + 1.0 / p.theta[a2].tan();
        assert!((w - expect).abs() < 1e-12);
        // pi/3 + 2pi/3: the edge towards vertex 4 sits between pi/3 and 2pi/3 wedges
        assert!(edge_weight(&t, 0, 3).unwrap().abs() < 1e-12 || edge_weight(&t, 0, 4).unwrap().abs() < 1e-12);
    }

    #[test]
    fn type1_d0_pattern() {
        let t = topo(type1_diagonal(2, 1.0).unwrap());
        let p = t.patch(4).unwrap();
        let dc = compute_dcoefficients(&p).unwrap();
        let a = 0.5;
        for v in &dc.d0 {
            assert!(v.abs() < 1e-14 || (v.abs() - a).abs() < 1e-14, "{v}");
        }
        assert!(dc.big_d.iter().all(|d| d.abs() < 1e-13));
    }

    #[test]
    fn crossed_octagon_d0() {
        for l in [1.0, 0.3, 2.5] {
            let t = topo(crossed(2, l).unwrap());
            let p = t.patch(4).unwrap();
            assert_eq!(p.valence(), 8);
            let dc = compute_dcoefficients(&p).unwrap();
            assert!((dc.big_d[0].abs() - 4.0 / (l * l)).abs() < 1e-10 / (l * l));
        }
    }

    #[test]
    fn sum_b_vanishes_and_c_closes() {
        let t = topo(crossed(2, 1.0).unwrap());
        let p = t.patch(4).unwrap();
        let dc = compute_dcoefficients(&p).unwrap();
        for i in 0..2 {
            let s: f64 = dc.b.iter().map(|b| b[i]).sum();
            assert!(s.abs() < 1e-14);
        }
        assert_eq!(dc.c[0], [0.0; 2]);
        assert_eq!(dc.c[8], [0.0; 2]);
    }

    #[test]
    fn classification_examples() {
        let tol = Tolerances::default();
        let t = topo(crossed(2, 1.0).unwrap());
        let c = classify_mesh(&t, &tol).unwrap();
        assert!(matches!(c.reports[4].status, LhStatus::EvenLI { index: 0, .. }));
        assert_eq!(c.summary.sigma_i, 4);
        let t = topo(ngon_patch(6, 1.0, None, None).unwrap());
        assert_eq!(classify_vertex(&t.patch(0).unwrap(), &tol).status, LhStatus::NotLI);
        let t = topo(ngon_patch(5, 1.0, None, None).unwrap());
        assert_eq!(classify_vertex(&t.patch(0).unwrap(), &tol).status, LhStatus::OddLI);
        assert!(compute_dcoefficients(&t.patch(1).unwrap()).is_err());
    }

    #[test]
    fn two_triangle_square_sigma() {
        let v = vec![Point::new(0., 0.), Point::new(1., 0.), Point::new(1., 1.), Point::new(0., 1.)];
        let m = crate::mesh::Triangulation::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let c = classify_mesh(&topo(m), &Tolerances::default()).unwrap();
        assert_eq!((c.summary.sigma, c.summary.sigma_b, c.summary.sigma_i), (2, 2, 0));
    }
}

