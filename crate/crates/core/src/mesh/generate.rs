//! Generators for the mesh families used in the analysis.

use super::{Point, Triangulation};
use crate::error::{Error, Result};
use crate::geometry::signed_area;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Preset {
    /// One interior vertex of valence `n` surrounded by a fan.
    NgonPatch {
        n: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radii: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angles: Option<Vec<f64>>,
    },
    /// Hexagon of equilateral triangles with `n` rings around the center.
    ThreeLines { n: usize },
    /// `n x n` squares, each split by both diagonals. `l` is the half-diagonal.
    Crossed { n: usize, l: f64 },
    /// `n x n` squares of side `l`, each split by the lower-left to
    /// upper-right diagonal.
    Type1Diagonal { n: usize, l: f64 },
    /// Unit square, `n x n` cells with a random diagonal each and interior
    /// vertices jittered by up to `amplitude` cell widths per coordinate.
    PerturbedGrid { n: usize, seed: u64, amplitude: f64 },
}

impl Preset {
    pub fn family(&self) -> &'static str {
        match self {
            Preset::NgonPatch { .. } => "ngon_patch",
            Preset::ThreeLines { .. } => "three_lines",
            Preset::Crossed { .. } => "crossed",
            Preset::Type1Diagonal { .. } => "type1_diagonal",
            Preset::PerturbedGrid { .. } => "perturbed_grid",
        }
    }
}

pub fn generate(preset: &Preset) -> Result<Triangulation> {
    match preset {
        Preset::NgonPatch { n, radius, radii, angles } => {
            ngon_patch(*n, *radius, radii.as_deref(), angles.as_deref())
        }
        Preset::ThreeLines { n } => three_lines(*n),
        Preset::Crossed { n, l } => crossed(*n, *l),
        Preset::Type1Diagonal { n, l } => type1_diagonal(*n, *l),
        Preset::PerturbedGrid { n, seed, amplitude } => perturbed_grid(*n, *seed, *amplitude),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    Ok(())
}

fn check_len(name: &str, l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParams(format!("{name} must be positive, got {l}")));
    }
    Ok(())
}

/// Builds the mesh after confirming every triangle is counter-clockwise as
/// generated; a clockwise triangle means the parameters folded the mesh.
fn assemble(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Triangulation> {
    for (t, tri) in triangles.iter().enumerate() {
        let [a, b, c] = tri.map(|i| vertices[i]);
        if signed_area(&a, &b, &c) <= 0.0 {
            return Err(Error::InvalidParams(format!("triangle {t} is inverted")));
        }
    }
    Triangulation::new(vertices, triangles)
}

/// Vertex 0 at the origin, ring vertices `1..=n` at the given directions and
/// distances. Directions default to the regular `2 pi k / n`.
pub fn ngon_patch(n: usize, radius: f64, radii: Option<&[f64]>, angles: Option<&[f64]>) -> Result<Triangulation> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("ngon needs n >= 3, got {n}")));
    }
    check_len("radius", radius)?;
    let dirs: Vec<f64> = match angles {
        Some(a) if a.len() != n => return Err(Error::InvalidParams("angles length must equal n".into())),
        Some(a) => a.to_vec(),
        None => (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
    };
    let lens: Vec<f64> = match radii {
        Some(r) if r.len() != n => return Err(Error::InvalidParams("radii length must equal n".into())),
        Some(r) => r.to_vec(),
        None => vec![radius; n],
    };
    for k in 0..n {
        check_len("spoke length", lens[k])?;
        let next = if k + 1 < n { dirs[k + 1] } else { dirs[0] + 2.0 * PI };
        let gap = next - dirs[k];
        if !(gap > 0.0 && gap < PI) {
            return Err(Error::InvalidParams(format!("spoke gap {k} is {gap}, must lie in (0, pi)")));
        }
    }
    let mut vertices = vec![Point::zeros()];
    vertices.extend(dirs.iter().zip(&lens).map(|(a, r)| Point::new(r * a.cos(), r * a.sin())));
    let triangles = (0..n).map(|k| [0, k + 1, (k + 1) % n + 1]).collect();
    assemble(vertices, triangles)
}

/// A shape-regular star around the origin with `n` spokes: directions
/// jittered by up to 35% of the regular gap (20% for `n = 3`), lengths drawn
/// from `[0.6, 1.4]`.
pub fn random_ngon(n: usize, seed: u64) -> Result<Triangulation> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("ngon needs n >= 3, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = 2.0 * PI / n as f64;
    let jitter = if n == 3 { 0.2 } else { 0.35 };
    let offset = rng.random_range(0.0..gap);
    let angles: Vec<f64> = (0..n).map(|k| offset + gap * (k as f64 + rng.random_range(-jitter..jitter))).collect();
    let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..1.4)).collect();
    ngon_patch(n, 1.0, Some(&radii), Some(&angles))
}

/// A boundary fan with `n` triangles spanning a random opening angle in
/// `[0.5 pi, 1.5 pi]`, gaps jittered, lengths drawn from `[0.6, 1.4]`.
pub fn random_boundary_fan(n: usize, seed: u64) -> Result<Triangulation> {
    if n < 1 {
        return Err(Error::InvalidParams("a fan needs at least one triangle".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = rng.random_range(0.5..1.5) * PI;
    let span = span.min(0.7 * PI * n as f64);
    let gap = span / n as f64;
    let mut angles = vec![0.0];
    for k in 0..n {
        angles.push(angles[k] + gap * rng.random_range(0.7..1.3));
    }
    let radii: Vec<f64> = (0..=n).map(|_| rng.random_range(0.6..1.4)).collect();
    boundary_fan(&angles, &radii)
}

/// A fan with vertex 0 on the boundary: spokes at the given directions
/// (`n + 1` of them, increasing) and lengths, one triangle per gap.
pub fn boundary_fan(angles: &[f64], radii: &[f64]) -> Result<Triangulation> {
    if angles.len() < 2 || angles.len() != radii.len() {
        return Err(Error::InvalidParams("need at least two spokes with matching radii".into()));
    }
    if angles.last().unwrap() - angles[0] >= 2.0 * PI {
        return Err(Error::InvalidParams("boundary fan must span less than a full turn".into()));
    }
    for w in angles.windows(2) {
        if !(w[1] > w[0] && w[1] - w[0] < PI) {
            return Err(Error::InvalidParams("spoke gaps must lie in (0, pi)".into()));
        }
    }
    for &r in radii {
        check_len("spoke length", r)?;
    }
    let mut vertices = vec![Point::zeros()];
    vertices.extend(angles.iter().zip(radii).map(|(a, r)| Point::new(r * a.cos(), r * a.sin())));
    let triangles = (1..angles.len()).map(|k| [0, k, k + 1]).collect();
    assemble(vertices, triangles)
}

pub fn three_lines(n: usize) -> Result<Triangulation> {
    check_n(n)?;
    let n = n as i64;
    let h = 3f64.sqrt() / 2.0;
    let inside = |q: i64, r: i64| q.abs() <= n && r.abs() <= n && (q + r).abs() <= n;
    let mut index = HashMap::new();
    let mut vertices = Vec::new();
    for r in -n..=n {
        for q in -n..=n {
            if inside(q, r) {
                index.insert((q, r), vertices.len());
                vertices.push(Point::new(q as f64 + 0.5 * r as f64, h * r as f64));
            }
        }
    }
    let mut triangles = Vec::new();
    for r in -n..=n {
        for q in -n..=n {
            for tri in [[(q, r), (q + 1, r), (q, r + 1)], [(q + 1, r), (q + 1, r + 1), (q, r + 1)]] {
                if tri.iter().all(|&(a, b)| inside(a, b)) {
                    triangles.push(tri.map(|k| index[&k]));
                }
            }
        }
    }
    assemble(vertices, triangles)
}

fn grid_vertices(n: usize, side: f64) -> Vec<Point> {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(Point::new(i as f64 * side, j as f64 * side));
        }
    }
    v
}

pub fn crossed(n: usize, l: f64) -> Result<Triangulation> {
    check_n(n)?;
    check_len("L", l)?;
    let side = 2f64.sqrt() * l;
    let mut vertices = grid_vertices(n, side);
    let at = |i: usize, j: usize| i + j * (n + 1);
    let mut triangles = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let c = vertices.len();
            vertices.push(Point::new((i as f64 + 0.5) * side, (j as f64 + 0.5) * side));
            let (v00, v10, v11, v01) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            triangles.extend([[v00, v10, c], [v10, v11, c], [v11, v01, c], [v01, v00, c]]);
        }
    }
    assemble(vertices, triangles)
}

pub fn type1_diagonal(n: usize, l: f64) -> Result<Triangulation> {
    check_n(n)?;
    check_len("L", l)?;
    let vertices = grid_vertices(n, l);
    let at = |i: usize, j: usize| i + j * (n + 1);
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            triangles.extend([[v00, v10, v11], [v00, v11, v01]]);
        }
    }
    assemble(vertices, triangles)
}

pub fn perturbed_grid(n: usize, seed: u64, amplitude: f64) -> Result<Triangulation> {
    check_n(n)?;
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidParams(format!("amplitude must be non-negative, got {amplitude}")));
    }
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = grid_vertices(n, h);
    for j in 1..n {
        for i in 1..n {
            let dx = rng.random_range(-1.0..=1.0) * amplitude * h;
            let dy = rng.random_range(-1.0..=1.0) * amplitude * h;
            vertices[i + j * (n + 1)] += Point::new(dx, dy);
        }
    }
    let at = |i: usize, j: usize| i + j * (n + 1);
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            if rng.random_bool(0.5) {
                triangles.extend([[v00, v10, v11], [v00, v11, v01]]);
            } else {
                triangles.extend([[v00, v10, v01], [v10, v11, v01]]);
            }
        }
    }
    assemble(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MeshTopology;

    fn topo(m: Triangulation) -> MeshTopology {
        MeshTopology::new(m).unwrap()
    }

    #[test]
    fn crossed_one() {
        let t = topo(crossed(1, 1.0).unwrap());
        assert_eq!(t.counts.t, 4);
        assert_eq!(t.counts.v0, 1);
        assert!(!t.is_boundary(4));
    }

    #[test]
    fn crossed_counts() {
        for n in 1..5 {
            let t = topo(crossed(n, 0.7).unwrap());
            assert_eq!(t.counts.t, 4 * n * n);
            // cell centers plus the interior grid vertices
            assert_eq!(t.counts.v0, n * n + (n - 1) * (n - 1));
            assert!(t.counts.simply_connected());
        }
    }

    #[test]
    fn type1_two() {
        let t = topo(type1_diagonal(2, 1.0).unwrap());
        assert_eq!(t.counts.t, 8);
        assert_eq!(t.counts.v0, 1);
        assert_eq!(t.patch(4).unwrap().valence(), 6);
    }

    #[test]
    fn hexagon() {
        let m = ngon_patch(6, 1.0, None, None).unwrap();
        assert_eq!(m.num_triangles(), 6);
        let t = topo(three_lines(1).unwrap());
        assert_eq!((t.counts.t, t.counts.v, t.counts.v0), (6, 7, 1));
        let t = topo(three_lines(3).unwrap());
        // 6 n^2 triangles, 3 n (n + 1) + 1 vertices
        assert_eq!((t.counts.t, t.counts.v), (54, 37));
        assert_eq!(t.counts.v0, 19);
    }

    #[test]
    fn invalid_params() {
        assert!(ngon_patch(2, 1.0, None, None).is_err());
        assert!(crossed(0, 1.0).is_err());
        assert!(type1_diagonal(2, -1.0).is_err());
        assert!(perturbed_grid(4, 1, 5.0).is_err());
        assert!(ngon_patch(4, 1.0, None, Some(&[0.0, 0.1, 0.2, 0.3])).is_err());
    }

    #[test]
    fn perturbed_grid_is_deterministic_and_has_odd_valence() {
        let a = perturbed_grid(6, 3, 0.2).unwrap();
        assert_eq!(a, perturbed_grid(6, 3, 0.2).unwrap());
        let t = topo(a);
        let odd = (0..t.counts.v)
            .filter(|&v| !t.is_boundary(v))
            .any(|v| t.patch(v).unwrap().valence() % 2 == 1);
        assert!(odd);
    }

    #[test]
    fn preset_round_trips_through_json() {
        let p = Preset::Crossed { n: 2, l: 1.0 };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Preset>(&s).unwrap(), p);
        assert!(s.contains("\"family\":\"crossed\""));
    }
}
