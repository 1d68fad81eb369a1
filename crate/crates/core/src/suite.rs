//! Randomized property suites over every field construction on a mesh.
//! Deterministic for a fixed seed.

use crate::classify::{alternating_sum, compute_dcoefficients, LhStatus, MeshClassification, Tolerances};
use crate::error::Result;
use crate::fields::poly;
use crate::fields::verify::{Check, TOL_VALUE, TOL_ZERO};
use crate::fields::{
    basis_chi, basis_chi_sum, basis_kappa, basis_w, basis_xi, boundary_interpolant, divergence_at, edge_transfer,
    local_interpolant, triangle_divergence_integral, verify_field, FieldSpec, PatchField, WTarget,
};
use crate::geometry::slot_of;
use crate::mesh::{MeshTopology, Point, VertexPatch};
use crate::solver::{number_dofs, velocity_field};
use crate::trees::{boundary_blocked, build_tree_cover, max_vertex_residual, tree_interpolant, VertexPressure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
    /// Perturb every constructed field before checking it. Only useful to
    /// confirm that the checks can fail.
    #[serde(default)]
    pub corrupt: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { samples: 20, seed: 0, corrupt: false }
    }
}

/// Tally of one suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failed: usize,
    /// Largest `max_dev / tol` seen; below 1 means every case passed.
    pub worst_ratio: f64,
    /// First few failures as `vertex: check`.
    pub examples: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self { name: name.into(), cases: 0, failed: 0, worst_ratio: 0.0, examples: Vec::new() }
    }

    fn record(&mut self, label: &str, checks: &[Check]) {
        self.cases += 1;
        let mut bad = false;
        for c in checks {
            let ratio = if c.tol > 0.0 { c.max_dev / c.tol } else if c.max_dev > 0.0 { f64::MAX } else { 0.0 };
            self.worst_ratio = self.worst_ratio.max(ratio);
            if !c.pass {
                bad = true;
                if self.examples.len() < 5 {
                    self.examples.push(format!("{label}: {} ({:.3e} > {:.3e})", c.name, c.max_dev, c.tol));
                }
            }
        }
        if bad {
            self.failed += 1;
        }
    }

    fn error(&mut self, label: &str, e: impl std::fmt::Display) {
        self.cases += 1;
        self.failed += 1;
        if self.examples.len() < 5 {
            self.examples.push(format!("{label}: {e}"));
        }
    }

    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub samples: usize,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

fn check(name: &str, dev: f64, tol: f64) -> Check {
    Check { name: name.into(), max_dev: dev, tol, pass: dev <= tol }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn corrupt(f: &mut PatchField) {
    let scale = f.max_coeff().max(1.0);
    if let Some(c) = f.coeffs.values_mut().next() {
        c[0][0] += 1e-3 * scale;
    }
}

fn verify_with(topo: &MeshTopology, f: &PatchField, spec: &FieldSpec, bad: bool) -> (PatchField, Vec<Check>) {
    let mut f = f.clone();
    if bad {
        corrupt(&mut f);
    }
    let r = verify_field(topo, &f, spec);
    (f, r.checks)
}

/// Every conclusion of the basis lemmas at the interior vertex `z`: the `w`
/// fields, `chi_i`, `chi`, `xi~_i`, `xi_i` and `kappa` on each spoke.
/// Expected values are computed from the patch geometry, not from the
/// field construction.
pub fn basis_lemma_checks(topo: &MeshTopology, z: usize, bad: bool) -> Result<Vec<(String, Vec<Check>)>> {
    let patch = topo.patch(z)?;
    let n = patch.valence();
    let mut out = Vec::new();
    let tri = |k: usize| patch.triangles[k];

    for k in patch.interior_spokes() {
        let (a, b) = patch.spoke_triangles(k);
        let mut spec = FieldSpec { mean_zero: true, ..Default::default() };
        spec.vertex_div.insert((tri(a), z), 1.0);
        spec.vertex_div.insert((tri(b), z), 1.0);
        spec.support = Some([tri(a), tri(b)].into_iter().collect());
        let (_, checks) = verify_with(topo, &basis_w(topo, &patch, k)?, &spec, bad);
        out.push((format!("w[{k}]"), checks));
    }
    if !patch.interior {
        return Ok(out);
    }

    for k in 1..=n {
        let (a, b) = patch.spoke_triangles(k);
        let len2 = patch.spoke_len[k] * patch.spoke_len[k];
        let mut spec = FieldSpec::default();
        spec.vertex_div.insert((tri(a), z), 12.0 * cot(patch.theta[a]) / len2);
        spec.vertex_div.insert((tri(b), z), -12.0 * cot(patch.theta[b]) / len2);
        spec.support = Some([tri(a), tri(b)].into_iter().collect());
        let (f, mut checks) = verify_with(topo, &basis_chi(topo, &patch, k)?, &spec, bad);
        let dev = (triangle_divergence_integral(topo, &f, tri(a)) - 1.0)
            .abs()
            .max((triangle_divergence_integral(topo, &f, tri(b)) + 1.0).abs());
        checks.push(check("integrals", dev, TOL_VALUE));
        out.push((format!("chi[{k}]"), checks));
    }

    let mut spec = FieldSpec { mean_zero: true, ..Default::default() };
    for j in 0..n {
        let v = 12.0 * cot(patch.theta[j]) * (1.0 / patch.spoke_len[j + 1].powi(2) - 1.0 / patch.spoke_len[j].powi(2));
        spec.vertex_div.insert((tri(j), z), v);
    }
    spec.support = Some(patch.triangles.iter().copied().collect());
    let (_, checks) = verify_with(topo, &basis_chi_sum(topo, &patch)?, &spec, bad);
    out.push(("chi".into(), checks));

    let dc = compute_dcoefficients(&patch)?;
    for i in 1..=2 {
        let (tilde, xi) = basis_xi(topo, &patch, i)?;
        // b_ji = -|f_j| m_j . E_i / 3 with m_j the outward normal of the far
        // edge; for a counter-clockwise fan that is +(y_{j+1} - y_j)^perp / 3
        let b: Vec<f64> = (0..n)
            .map(|j| {
                let f = patch.y[j + 1] - patch.y[j];
                let perp = Point::new(-f.y, f.x);
                (if i == 1 { perp.x } else { perp.y }) / 3.0
            })
            .collect();
        let mut spec = FieldSpec::default();
        for j in 0..n {
            spec.vertex_div.insert((tri(j), z), 3.0 * b[j] / patch.areas[j]);
        }
        spec.support = Some(patch.triangles.iter().copied().collect());
        let (f, mut checks) = verify_with(topo, &tilde, &spec, bad);
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let dev = (0..n).map(|j| (triangle_divergence_integral(topo, &f, tri(j)) - b[j]).abs()).fold(0.0, f64::max);
        checks.push(check("integrals", dev, TOL_VALUE * scale));
        out.push((format!("xi_tilde[{i}]"), checks));

        let mut spec = FieldSpec { mean_zero: true, ..Default::default() };
        for j in 0..n {
            spec.vertex_div.insert((tri(j), z), dc.d[j][i - 1]);
        }
        spec.support = Some(patch.triangles.iter().copied().collect());
        let (_, checks) = verify_with(topo, &xi, &spec, bad);
        out.push((format!("xi[{i}]"), checks));
    }

    for k in 1..=n {
        out.push((format!("kappa[{k}]"), kappa_checks(topo, &patch, k, bad)?));
    }
    Ok(out)
}

fn kappa_checks(topo: &MeshTopology, patch: &VertexPatch, k: usize, bad: bool) -> Result<Vec<Check>> {
    let (z, y) = (patch.center, patch.spokes[k]);
    let mut pieces = basis_kappa(topo, z, y)?;
    if bad {
        pieces[0].1[0] += 1e-3;
    }
    let allowed: BTreeSet<usize> = {
        let (a, b) = patch.spoke_triangles(k);
        [patch.triangles[a], patch.triangles[b]].into_iter().collect()
    };
    let mut checks = Vec::new();
    let outside = pieces.iter().filter(|(t, _)| !allowed.contains(t)).count();
    checks.push(check("support", outside as f64, 0.0));
    let (mut edge_mean, mut grad_other, mut grad_z, mut grad_y): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut gscale: f64 = 0.0;
    for (t, c) in &pieces {
        let verts = topo.mesh.triangles[*t];
        let (sz, sy) = (slot_of(&verts, z), slot_of(&verts, y));
        let integral: f64 =
            poly::GAUSS5.iter().map(|(s, w)| w * poly::eval_cubic(c, &poly::edge_point(sz, sy, *s))).sum();
        edge_mean = edge_mean.max(integral.abs());
        let g = topo.geoms[*t].hat_gradients();
        gscale = gscale.max(g.iter().fold(0.0f64, |m, v| m.max(v.norm())));
        let grad_at = |slot: usize| {
            let mut l = [0.0; 3];
            l[slot] = 1.0;
            (0..3).fold(Point::zeros(), |acc, i| acc + g[i] * poly::eval_quad(&poly::derivative(c, i), &l))
        };
        grad_z = grad_z.max((grad_at(sz) - g[sy] * 0.5).norm());
        grad_y = grad_y.max((grad_at(sy) + g[sz] * 0.5).norm());
        grad_other = grad_other.max(grad_at(3 - sz - sy).norm());
    }
    checks.push(check("edge_mean", edge_mean, TOL_ZERO));
    checks.push(check("gradient_elsewhere", grad_other, TOL_ZERO * gscale));
    checks.push(check("gradient_at_z", grad_z, TOL_VALUE * gscale));
    checks.push(check("gradient_at_y", grad_y, TOL_VALUE * gscale));
    Ok(checks)
}

fn random_target(rng: &mut ChaCha8Rng, n: usize, singular: bool) -> Vec<f64> {
    let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    if singular {
        // project onto the alternating-sum-zero hyperplane
        let s = alternating_sum(&a) / n as f64;
        for (k, v) in a.iter_mut().enumerate() {
            *v -= if k % 2 == 0 { s } else { -s };
        }
    }
    a
}

/// Runs the basis-lemma suite at every interior vertex and the interpolant
/// suites on `samples` random targets each: local constructions at every
/// local interpolating vertex, the boundary construction, edge transfers on
/// random acceptable edges, and the global tree construction when the cover
/// is complete.
pub fn run_field_suites(
    topo: &MeshTopology,
    classes: &MeshClassification,
    tol: &Tolerances,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let bad = opts.corrupt;

    let mut basis = SuiteResult::new("basis");
    for z in 0..topo.num_vertices() {
        for (name, checks) in basis_lemma_checks(topo, z, bad)? {
            basis.record(&format!("{z} {name}"), &checks);
        }
    }

    let mut local = SuiteResult::new("local_interpolant");
    let mut boundary = SuiteResult::new("boundary_interpolant");
    for r in &classes.reports {
        let patch = topo.patch(r.vertex)?;
        let n = patch.valence();
        for _ in 0..opts.samples {
            let a = random_target(&mut rng, n, r.singular);
            let mut spec = FieldSpec { mean_zero: true, ..Default::default() };
            spec.expect_at(topo, r.vertex, &a);
            let label = format!("{}", r.vertex);
            if r.status.is_local_interpolating() {
                spec.support = Some(patch.triangles.iter().copied().collect());
                match local_interpolant(topo, &WTarget::new(r.vertex, a), tol) {
                    Ok(f) => local.record(&label, &verify_with(topo, &f, &spec, bad).1),
                    Err(e) => local.error(&label, e),
                }
            } else if r.status == LhStatus::BoundaryNonSingular {
                match boundary_interpolant(topo, r.vertex, &a, tol) {
                    Ok(b) => {
                        spec.free_vertices.insert(b.spill_vertex);
                        boundary.record(&label, &verify_with(topo, &b.field, &spec, bad).1);
                    }
                    Err(e) => boundary.error(&label, e),
                }
            }
        }
    }

    let mut transfer = SuiteResult::new("edge_transfer");
    let mut directed = Vec::new();
    for e in topo.edges.iter().filter(|e| e.is_interior()) {
        let [u, v] = e.vertices;
        for (z, y) in [(u, v), (v, u)] {
            let patch = topo.patch(z)?;
            let k = patch.spoke_to(y).expect("edge endpoint");
            let (a, b) = patch.spoke_triangles(k);
            if (cot(patch.theta[a]) + cot(patch.theta[b])).abs() > tol.accept {
                directed.push((z, y));
            }
        }
    }
    if !directed.is_empty() {
        for _ in 0..opts.samples {
            let (z, y) = directed[rng.random_range(0..directed.len())];
            let n = topo.patch(z)?.valence();
            let a = random_target(&mut rng, n, false);
            let label = format!("{z}->{y}");
            match edge_transfer(topo, z, y, &a, tol) {
                Ok(t) => {
                    let mut spec = FieldSpec { mean_zero: true, ..Default::default() };
                    spec.expect_at(topo, z, &a);
                    spec.free_vertices.insert(y);
                    let (f, mut checks) = verify_with(topo, &t.field, &spec, bad);
                    let spill = [divergence_at(topo, &f, t.triangles[0], y), divergence_at(topo, &f, t.triangles[1], y)];
                    let scale = t.predicted[0].abs().max(t.predicted[1].abs()).max(1.0);
                    let dev = (spill[0] - t.predicted[0]).abs().max((spill[1] - t.predicted[1]).abs());
                    checks.push(check("spill", dev, TOL_VALUE * scale));
                    transfer.record(&label, &checks);
                }
                Err(e) => transfer.error(&label, e),
            }
        }
    }

    let mut suites = vec![basis, local, boundary, transfer];
    let cover = build_tree_cover(topo, classes, tol, None)?;
    if cover.complete() && boundary_blocked(topo, classes, tol)?.is_empty() {
        let mut tree = SuiteResult::new("tree_interpolant");
        let dofs = number_dofs(topo);
        for s in 0..opts.samples.min(5) {
            // vertex values of the divergence of a random field are admissible
            let x: Vec<f64> = (0..dofs.velocity_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = velocity_field(topo, &dofs, &x);
            let p: VertexPressure = (0..topo.counts.t)
                .map(|t| std::array::from_fn(|k| divergence_at(topo, &v, t, topo.mesh.triangles[t][k])))
                .collect();
            let scale = p.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            let label = format!("sample {s}");
            match tree_interpolant(topo, classes, &cover, &p, tol) {
                Ok(mut r) => {
                    if bad {
                        corrupt(&mut r.field);
                    }
                    let dev = max_vertex_residual(topo, &r.field, &p);
                    tree.record(&label, &[check("vertex_residual", dev, TOL_VALUE * scale)]);
                }
                Err(e) => tree.error(&label, e),
            }
        }
        suites.push(tree);
    }
    let pass = suites.iter().all(|s| s.pass());
    Ok(SuiteReport { samples: opts.samples, seed: opts.seed, suites, pass })
}
