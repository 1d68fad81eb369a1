//! Acceptable paths, tree covers rooted at local interpolating vertices, the
//! hypothesis checks of the stability theorems, and the tree interpolant.

use crate::classify::{alternating_sum, edge_weight, LhStatus, MeshClassification, Tolerances};
use crate::error::{Error, Result};
use crate::fields::interp::local_interpolant_with;
use crate::fields::interp::boundary_pivot;
use crate::fields::{boundary_interpolant, divergence_at, path_interpolant, PatchField, WTarget};
use crate::geometry::slot_of;
use crate::mesh::MeshTopology;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Statistics of a path `y_0, ..., y_L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<usize>,
    /// `M_{e_i}^{y_{i-1}}` for `i = 1..=L`.
    pub weight_from: Vec<f64>,
    /// `M_{e_i}^{y_i}` for `i = 1..=L`.
    pub weight_to: Vec<f64>,
    /// `rho~_{z, y_j}` for `j = 0..=L`.
    pub rho_tilde: Vec<f64>,
    /// `rho_{z, y_j}` for `j = 1..=L`.
    pub rho: Vec<f64>,
    /// `max_j |rho_{z, y_j}|`; 1 for the trivial path.
    pub rho_max: f64,
    pub acceptable: bool,
}

impl Path {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn path_stats(topo: &MeshTopology, vertices: &[usize], tol: &Tolerances) -> Result<Path> {
    if vertices.is_empty() {
        return Err(Error::NotAPath("empty vertex list".into()));
    }
    for (i, v) in vertices.iter().enumerate() {
        if *v >= topo.num_vertices() {
            return Err(Error::NotAPath(format!("vertex {v} out of range")));
        }
        if vertices[..i].contains(v) {
            return Err(Error::NotAPath(format!("vertex {v} repeats")));
        }
    }
    let mut weight_from = Vec::new();
    let mut weight_to = Vec::new();
    for w in vertices.windows(2) {
        let e = topo.edge_between(w[0], w[1]).ok_or_else(|| Error::NotAPath(format!("no edge {{{}, {}}}", w[0], w[1])))?;
        if !topo.edges[e].is_interior() {
            return Err(Error::BoundaryEdge(w[0], w[1]));
        }
        weight_from.push(edge_weight(topo, w[0], w[1])?);
        weight_to.push(edge_weight(topo, w[1], w[0])?);
    }
    let mut rho_tilde = vec![1.0];
    let mut rho = Vec::new();
    for i in 0..weight_from.len() {
        rho.push(rho_tilde[i] / weight_from[i]);
        rho_tilde.push(rho_tilde[i] * weight_to[i] / weight_from[i]);
    }
    let rho_max = if rho.is_empty() { 1.0 } else { rho.iter().fold(0.0f64, |m, r| m.max(r.abs())) };
    let acceptable = weight_from.iter().all(|m| m.abs() > tol.accept);
    Ok(Path { vertices: vertices.to_vec(), weight_from, weight_to, rho_tilde, rho, rho_max, acceptable })
}

/// A tree rooted at a local interpolating vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub root: usize,
    /// `levels[0] == [root]`.
    pub levels: Vec<Vec<usize>>,
    /// Parent of every non-root vertex.
    pub parent: BTreeMap<usize, usize>,
    /// `max_z rho(P_z)` over the tree (1 for a singleton).
    pub rho: f64,
    /// `Upsilon`, with `Upsilon^2 = max_z sum_{y in A(z)} |D(y)|`.
    pub upsilon: f64,
    pub depth: usize,
    pub size: usize,
}

impl Tree {
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.levels.iter().flatten().copied()
    }

    /// The unique path from `z` up to the root.
    pub fn path_to_root(&self, z: usize) -> Vec<usize> {
        let mut p = vec![z];
        let mut cur = z;
        while let Some(&up) = self.parent.get(&cur) {
            p.push(up);
            cur = up;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub rho: f64,
    pub upsilon: f64,
    pub depth: usize,
    pub sizes: Vec<usize>,
}

/// `(rho, Upsilon, depth, level sizes)` recomputed from the tree's structure.
pub fn tree_stats(topo: &MeshTopology, tree: &Tree, tol: &Tolerances) -> Result<TreeStats> {
    let mut rho: f64 = 1.0;
    for z in tree.vertices() {
        rho = rho.max(path_stats(topo, &tree.path_to_root(z), tol)?.rho_max);
    }
    Ok(TreeStats {
        rho,
        upsilon: upsilon(tree),
        depth: tree.levels.len() - 1,
        sizes: tree.levels.iter().map(Vec::len).collect(),
    })
}

fn upsilon(tree: &Tree) -> f64 {
    let mut descendants: BTreeMap<usize, usize> = BTreeMap::new();
    for level in tree.levels.iter().rev() {
        for &z in level {
            let own = descendants.get(&z).copied().unwrap_or(0);
            if let Some(&p) = tree.parent.get(&z) {
                *descendants.entry(p).or_insert(0) += own + 1;
            }
        }
    }
    let mut best = 0usize;
    for z in tree.vertices() {
        let path = tree.path_to_root(z);
        let s: usize = path[1..].iter().map(|y| descendants.get(y).copied().unwrap_or(0)).sum();
        best = best.max(s);
    }
    (best as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeCover {
    pub trees: Vec<Tree>,
    /// Tree index of each vertex.
    pub assignment: Vec<Option<usize>>,
    pub uncovered: Vec<usize>,
}

impl TreeCover {
    pub fn complete(&self) -> bool {
        self.uncovered.is_empty()
    }

    pub fn rho_bar(&self) -> f64 {
        self.trees.iter().map(|t| t.rho).fold(1.0, f64::max)
    }

    pub fn upsilon_bar(&self) -> f64 {
        self.trees.iter().map(|t| t.upsilon).fold(0.0, f64::max)
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(|t| t.depth).max().unwrap_or(0)
    }
}

/// Relative difference below which two candidate `rho` values count as equal,
/// so that rounding does not decide between symmetric parents.
const RHO_TIE: f64 = 1e-9;

fn root_rank(status: LhStatus) -> u8 {
    match status {
        LhStatus::SingularLI | LhStatus::OddLI => 0,
        _ => 1,
    }
}

/// Level-synchronous multi-source BFS from every local interpolating vertex.
/// A vertex joins through an edge whose weight on its own side exceeds the
/// acceptance tolerance; among candidate parents it takes the smallest
/// resulting `rho`, then a singular or odd root, then the smaller root index,
/// then the smaller parent index.
/// With `rho_cap`, candidates whose path `rho` exceeds the cap are refused.
pub fn build_tree_cover(
    topo: &MeshTopology,
    classes: &MeshClassification,
    tol: &Tolerances,
    rho_cap: Option<f64>,
) -> Result<TreeCover> {
    let nv = topo.num_vertices();
    let mut tree_of: Vec<Option<usize>> = vec![None; nv];
    let mut parent: Vec<Option<usize>> = vec![None; nv];
    let mut path_rho: Vec<f64> = vec![1.0; nv];
    let mut roots = Vec::new();
    for r in &classes.reports {
        if r.status.is_local_interpolating() {
            tree_of[r.vertex] = Some(roots.len());
            roots.push(r.vertex);
        }
    }
    let mut levels_per_tree: Vec<Vec<Vec<usize>>> = roots.iter().map(|&r| vec![vec![r]]).collect();
    let mut frontier = roots.clone();
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        // candidate -> best (rho, root rank, root, parent)
        let mut best: BTreeMap<usize, (f64, u8, usize, usize)> = BTreeMap::new();
        for &p in &frontier {
            let ti = tree_of[p].unwrap();
            let root = roots[ti];
            for e in topo.interior_edges_at(p) {
                let c = topo.edges[e].other(p);
                if tree_of[c].is_some() {
                    continue;
                }
                let m = edge_weight(topo, c, p)?;
                if m.abs() <= tol.accept {
                    continue;
                }
                let mut path = vec![c, p];
                let mut cur = p;
                while let Some(up) = parent[cur] {
                    path.push(up);
                    cur = up;
                }
                let rho = path_stats(topo, &path, tol)?.rho_max;
                if rho_cap.is_some_and(|cap| rho > cap) {
                    continue;
                }
                let key = (rho, root_rank(classes.reports[root].status), root, p);
                let better = match best.get(&c) {
                    None => true,
                    Some(old) if (key.0 - old.0).abs() > RHO_TIE * key.0.max(old.0) => key.0 < old.0,
                    Some(old) => (key.1, key.2, key.3) < (old.1, old.2, old.3),
                };
                if better {
                    best.insert(c, key);
                }
            }
        }
        frontier.clear();
        for (c, (rho, _, _, p)) in best {
            let ti = tree_of[p].unwrap();
            tree_of[c] = Some(ti);
            parent[c] = Some(p);
            path_rho[c] = rho;
            let levels = &mut levels_per_tree[ti];
            if levels.len() <= depth {
                levels.resize(depth + 1, Vec::new());
            }
            levels[depth].push(c);
            frontier.push(c);
        }
    }

    let mut trees = Vec::with_capacity(roots.len());
    for (ti, &root) in roots.iter().enumerate() {
        let levels = std::mem::take(&mut levels_per_tree[ti]);
        let mut par = BTreeMap::new();
        for &z in levels.iter().flatten() {
            if let Some(p) = parent[z] {
                par.insert(z, p);
            }
        }
        let rho = levels.iter().flatten().map(|&z| path_rho[z]).fold(1.0, f64::max);
        let size = levels.iter().map(Vec::len).sum();
        let mut tree = Tree { root, depth: levels.len() - 1, levels, parent: par, rho, upsilon: 0.0, size };
        tree.upsilon = upsilon(&tree);
        trees.push(tree);
    }
    let uncovered = (0..nv).filter(|&v| tree_of[v].is_none()).collect();
    Ok(TreeCover { trees, assignment: tree_of, uncovered })
}

/// Vertices with an acceptable path to some local interpolating vertex.
pub fn reachable_from_roots(topo: &MeshTopology, classes: &MeshClassification, tol: &Tolerances) -> Result<Vec<bool>> {
    let nv = topo.num_vertices();
    let mut seen = vec![false; nv];
    let mut queue: std::collections::VecDeque<usize> = classes
        .reports
        .iter()
        .filter(|r| r.status.is_local_interpolating())
        .map(|r| r.vertex)
        .collect();
    for &r in &queue {
        seen[r] = true;
    }
    while let Some(p) = queue.pop_front() {
        for e in topo.interior_edges_at(p) {
            let c = topo.edges[e].other(p);
            if !seen[c] && edge_weight(topo, c, p)?.abs() > tol.accept {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    Ok(seen)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Every interior vertex is local interpolating.
    InteriorLocal,
    /// A complete disjoint cover by acceptable trees exists.
    TreeCover,
    /// Every vertex reaches a root by an acceptable path, but the cover built
    /// here is incomplete.
    MildOnly,
    None,
}

impl Verdict {
    pub fn onto(&self) -> bool {
        !matches!(self, Verdict::None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub verdict: Verdict,
    pub narrative: String,
    pub unreachable: Vec<usize>,
    /// Non-singular boundary vertices whose boundary construction can only
    /// push its side effect onto another boundary vertex.
    pub boundary_blocked: Vec<usize>,
}

/// Non-singular boundary vertices with no usable pivot spoke ending inside.
pub fn boundary_blocked(topo: &MeshTopology, classes: &MeshClassification, tol: &Tolerances) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for r in classes.reports.iter().filter(|r| r.status == LhStatus::BoundaryNonSingular) {
        let patch = topo.patch(r.vertex)?;
        match boundary_pivot(topo, &patch, tol) {
            Some(p) if !topo.is_boundary(patch.spokes[p + 1]) => {}
            _ => out.push(r.vertex),
        }
    }
    Ok(out)
}

pub fn check_hypotheses(
    topo: &MeshTopology,
    classes: &MeshClassification,
    cover: &TreeCover,
    tol: &Tolerances,
) -> Result<Hypotheses> {
    let interior_not_li: Vec<usize> = classes
        .reports
        .iter()
        .filter(|r| !r.boundary && !r.status.is_local_interpolating())
        .map(|r| r.vertex)
        .collect();
    let reach = reachable_from_roots(topo, classes, tol)?;
    let unreachable: Vec<usize> = (0..reach.len()).filter(|&v| !reach[v]).collect();
    let blocked = boundary_blocked(topo, classes, tol)?;
    let (verdict, narrative) = if !blocked.is_empty() {
        (
            Verdict::None,
            format!("{} boundary vertices can only pass their side effect to the boundary", blocked.len()),
        )
    } else if interior_not_li.is_empty() {
        (Verdict::InteriorLocal, "every interior vertex is local interpolating".to_string())
    } else if cover.complete() {
        (
            Verdict::TreeCover,
            format!(
                "{} interior vertices are not local interpolating; {} disjoint acceptable trees cover every vertex",
                interior_not_li.len(),
                cover.trees.len()
            ),
        )
    } else if unreachable.is_empty() {
        (
            Verdict::MildOnly,
            format!(
                "the tree cover misses {} vertices, but each has an acceptable path to a local interpolating vertex",
                cover.uncovered.len()
            ),
        )
    } else {
        (
            Verdict::None,
            format!(
                "{} interior vertices are not local interpolating and {} vertices have no acceptable path to one",
                interior_not_li.len(),
                unreachable.len()
            ),
        )
    };
    Ok(Hypotheses { verdict, narrative, unreachable, boundary_blocked: blocked })
}

/// Discontinuous piecewise quadratic pressure values at triangle vertices,
/// `p[t][slot]` in the local slot order of triangle `t`.
pub type VertexPressure = Vec<[f64; 3]>;

#[derive(Clone, Debug)]
pub struct TreeInterpolation {
    pub field: PatchField,
    /// Largest `|(div v - p)|_T(sigma)|` over all triangles and vertices.
    pub max_residual: f64,
    /// Boundary vertices whose pivot endpoint was itself on the boundary.
    pub boundary_spills: Vec<usize>,
}

fn residual_at(topo: &MeshTopology, field: &PatchField, p: &VertexPressure, z: usize) -> Result<Vec<f64>> {
    let patch = topo.patch(z)?;
    Ok(patch
        .triangles
        .iter()
        .map(|&t| p[t][slot_of(&topo.mesh.triangles[t], z)] - divergence_at(topo, field, t, z))
        .collect())
}

/// Largest vertex mismatch `|(div v - p)|_T(sigma)|` over the mesh.
pub fn max_vertex_residual(topo: &MeshTopology, field: &PatchField, p: &VertexPressure) -> f64 {
    let mut m: f64 = 0.0;
    for (t, tri) in topo.mesh.triangles.iter().enumerate() {
        for (s, &v) in tri.iter().enumerate() {
            m = m.max((p[t][s] - divergence_at(topo, field, t, v)).abs());
        }
    }
    m
}

/// A global field matching `p` at every vertex of every triangle: boundary
/// vertices first, then each covered non-root vertex by a path to its root,
/// then each root by its local construction. Residuals are recomputed before
/// every step.
pub fn tree_interpolant(
    topo: &MeshTopology,
    classes: &MeshClassification,
    cover: &TreeCover,
    p: &VertexPressure,
    tol: &Tolerances,
) -> Result<TreeInterpolation> {
    if p.len() != topo.counts.t {
        return Err(Error::LengthMismatch { expected: topo.counts.t, got: p.len() });
    }
    if !cover.complete() {
        return Err(Error::IncompleteCover(cover.uncovered.clone()));
    }
    let mut field = PatchField::zero();
    let mut boundary_spills = Vec::new();
    for r in &classes.reports {
        if r.status == LhStatus::BoundaryNonSingular {
            let res = residual_at(topo, &field, p, r.vertex)?;
            let b = boundary_interpolant(topo, r.vertex, &res, tol)?;
            if b.spill_on_boundary {
                boundary_spills.push(r.vertex);
            }
            field.axpy(1.0, &b.field);
        }
    }
    for tree in &cover.trees {
        for z in tree.vertices().filter(|&z| z != tree.root) {
            let res = residual_at(topo, &field, p, z)?;
            if res.iter().all(|v| *v == 0.0) {
                continue;
            }
            let path = tree.path_to_root(z);
            let v = path_interpolant(topo, &path, &res, tol)?;
            field.axpy(1.0, &v.field);
        }
    }
    for tree in &cover.trees {
        let r = tree.root;
        let res = residual_at(topo, &field, p, r)?;
        let report = &classes.reports[r];
        if report.singular {
            let patch = topo.patch(r)?;
            let scale = patch
                .triangles
                .iter()
                .map(|&t| {
                    let s = slot_of(&topo.mesh.triangles[t], r);
                    p[t][s].abs().max(divergence_at(topo, &field, t, r).abs())
                })
                .fold(0.0f64, f64::max);
            let defect = alternating_sum(&res).abs();
            if defect > 1e-9 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Inadmissible { vertex: r, residual: defect / scale.max(f64::MIN_POSITIVE) });
            }
        }
        let patch = topo.patch(r)?;
        let v = local_interpolant_with(topo, &patch, report.status, &WTarget::new(r, res), f64::INFINITY)?;
        field.axpy(1.0, &v);
    }
    let max_residual = max_vertex_residual(topo, &field, p);
    Ok(TreeInterpolation { field, max_residual, boundary_spills })
}
