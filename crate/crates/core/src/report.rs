//! The analysis report: one serializable record of a full pipeline run.

use crate::classify::{classify_mesh, ClassSummary, MeshClassification, Tolerances, VertexReport};
use crate::error::Result;
use crate::mesh::{Counts, MeshTopology};
use crate::solver::{analyze_divergence, DivergenceAnalysis, SolverOptions, SplineDimensions, VelocityNorm};
use crate::trees::{build_tree_cover, check_hypotheses, TreeCover, Verdict};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative bound on the range-inclusion defect before it counts as a bug.
pub const RANGE_DEFECT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSection {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<String>,
    pub counts: Counts,
    pub euler: i64,
    pub simply_connected: bool,
    pub diameter: f64,
    /// Largest over smallest triangle diameter.
    pub quasi_uniformity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSection {
    pub summary: ClassSummary,
    pub reports: Vec<VertexReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub root: usize,
    pub root_status: String,
    pub vertices: Vec<usize>,
    pub rho: f64,
    pub upsilon: f64,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSection {
    pub verdict: Verdict,
    pub narrative: String,
    pub complete: bool,
    pub uncovered: Vec<usize>,
    pub unreachable: Vec<usize>,
    pub boundary_blocked: Vec<usize>,
    pub rho_bar: f64,
    pub upsilon_bar: f64,
    pub max_depth: usize,
    pub trees: Vec<TreeSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpuriousMode {
    /// Pressure values at the three corners of each triangle, in the slot
    /// order of the mesh file. Scaled to unit L2 norm, first clear value
    /// positive.
    pub vertex_values: Vec<[f64; 3]>,
    pub alternating: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSection {
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub norm: VelocityNorm,
    pub rank: usize,
    pub nullity: usize,
    /// `6T - 1 - sigma`.
    pub expected_rank: usize,
    pub k: i64,
    pub sigma_max: f64,
    /// `None` when no singular value falls below the threshold.
    pub rank_gap: Option<f64>,
    pub rank_indeterminate: bool,
    pub beta: f64,
    pub beta_all: f64,
    pub infsup_gap: Option<f64>,
    pub spurious_count: usize,
    pub spurious_modes: Vec<SpuriousMode>,
    pub range_defect: f64,
    pub nullity_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub tolerances: Tolerances,
    pub skip_solver: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub mesh: MeshSection,
    pub vertices: VertexSection,
    pub trees: TreeSection,
    pub divergence: Option<DivergenceSection>,
    pub spline: Option<SplineDimensions>,
    pub meta: Meta,
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub tol: Tolerances,
    pub skip_solver: bool,
    pub norm: VelocityNorm,
    pub max_velocity_dofs: usize,
    pub family: Option<String>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            skip_solver: false,
            norm: VelocityNorm::H1Full,
            max_velocity_dofs: SolverOptions::default().max_velocity_dofs,
            family: None,
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn normalize_mode(q: &[f64], t: usize) -> Vec<[f64; 3]> {
    let mut v: Vec<[f64; 3]> = (0..t).map(|k| [q[6 * k], q[6 * k + 1], q[6 * k + 2]]).collect();
    let norm = v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let first = v.iter().flatten().copied().find(|x| x.abs() > 1e-8 * norm).unwrap_or(1.0);
    let s = if norm > 0.0 { first.signum() / norm } else { 1.0 };
    for row in &mut v {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    v
}

pub fn divergence_section(topo: &MeshTopology, d: &DivergenceAnalysis) -> Result<DivergenceSection> {
    let mut modes = Vec::with_capacity(d.spurious_modes.len());
    for q in &d.spurious_modes {
        modes.push(SpuriousMode {
            vertex_values: normalize_mode(q, topo.counts.t),
            alternating: crate::solver::alternates_around_interior_vertices(topo, q, 1e-6)?,
        });
    }
    Ok(DivergenceSection {
        velocity_dofs: d.velocity_dofs,
        pressure_dofs: d.pressure_dofs,
        norm: d.infsup.norm,
        rank: d.rank.rank,
        nullity: d.rank.nullity,
        expected_rank: d.rank.expected,
        k: d.rank.k,
        sigma_max: d.rank.sigma_max,
        rank_gap: finite(d.rank.gap),
        rank_indeterminate: d.rank.indeterminate,
        beta: d.infsup.beta,
        beta_all: d.infsup.beta_all,
        infsup_gap: finite(d.infsup.gap),
        spurious_count: d.infsup.spurious,
        spurious_modes: modes,
        range_defect: d.range_defect,
        nullity_matches: d.nullity_matches,
    })
}

pub fn tree_section(
    topo: &MeshTopology,
    classes: &MeshClassification,
    cover: &TreeCover,
    tol: &Tolerances,
) -> Result<TreeSection> {
    let h = check_hypotheses(topo, classes, cover, tol)?;
    Ok(TreeSection {
        verdict: h.verdict,
        narrative: h.narrative,
        complete: cover.complete(),
        uncovered: cover.uncovered.clone(),
        unreachable: h.unreachable,
        boundary_blocked: h.boundary_blocked,
        rho_bar: cover.rho_bar(),
        upsilon_bar: cover.upsilon_bar(),
        max_depth: cover.max_depth(),
        trees: cover
            .trees
            .iter()
            .map(|t| TreeSummary {
                root: t.root,
                root_status: classes.reports[t.root].status.name().to_string(),
                vertices: t.vertices().collect(),
                rho: t.rho,
                upsilon: t.upsilon,
                depth: t.depth,
            })
            .collect(),
    })
}

/// Classification, tree cover and (unless skipped) the divergence analysis.
pub fn build_report(topo: &MeshTopology, opts: &ReportOptions) -> Result<AnalysisReport> {
    let classes = classify_mesh(topo, &opts.tol)?;
    let cover = build_tree_cover(topo, &classes, &opts.tol, None)?;
    let trees = tree_section(topo, &classes, &cover, &opts.tol)?;
    let (divergence, spline) = if opts.skip_solver {
        (None, None)
    } else {
        let sopts = SolverOptions { rank_tol: opts.tol.rank, norm: opts.norm, max_velocity_dofs: opts.max_velocity_dofs };
        let d = analyze_divergence(topo, &classes, &sopts)?;
        (Some(divergence_section(topo, &d)?), d.spline)
    };
    Ok(AnalysisReport {
        mesh: MeshSection {
            family: opts.family.clone(),
            counts: topo.counts,
            euler: topo.counts.euler(),
            simply_connected: topo.counts.simply_connected(),
            diameter: topo.mesh.diameter(),
            quasi_uniformity: topo.quasi_uniformity(),
        },
        vertices: VertexSection { summary: classes.summary, reports: classes.reports },
        trees,
        divergence,
        spline,
        meta: Meta { version: VERSION.to_string(), tolerances: opts.tol, skip_solver: opts.skip_solver },
    })
}

impl AnalysisReport {
    /// Internal consistency failures. An empty list means the toolkit agrees
    /// with itself; a positive `K` is a finding, not a failure.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(d) = &self.divergence {
            if !d.rank_indeterminate && !d.nullity_matches {
                v.push(format!("nullity {} disagrees with the dimension formula at K = {}", d.nullity, d.k));
            }
            if d.k < 0 && !d.rank_indeterminate {
                v.push(format!("rank {} exceeds the pressure space dimension {}", d.rank, d.expected_rank));
            }
            if d.range_defect > RANGE_DEFECT_TOL {
                v.push(format!("divergence range leaves the constrained pressure space ({:.3e})", d.range_defect));
            }
            if self.trees.verdict.onto() && d.k != 0 && !d.rank_indeterminate {
                v.push(format!("verdict {:?} predicts onto but K = {}", self.trees.verdict, d.k));
            }
        }
        v
    }

    pub fn rank_indeterminate(&self) -> bool {
        self.divergence.as_ref().is_some_and(|d| d.rank_indeterminate)
    }
}
