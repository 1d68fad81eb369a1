//! Acceptance criteria. Runs without the test harness so that every
//! criterion prints one line, and exits nonzero if any fails.

use nalgebra::Rotation2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use svstokes::classify::*;
use svstokes::fields::{divergence_at, local_interpolant, path_interpolant, verify_field, FieldSpec, WTarget};
use svstokes::geometry::slot_of;
use svstokes::mesh::*;
use svstokes::solver::*;
use svstokes::suite::basis_lemma_checks;
use svstokes::trees::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn topo(m: Triangulation) -> MeshTopology {
    MeshTopology::new(m).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn timed(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed > limit {
        return Err(format!("took {:.2?}, limit {:.0?}", elapsed, limit));
    }
    Ok(())
}

fn field_lemmas() -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for seed in 0..100u64 {
        let n = 3 + (seed as usize % 8);
        let t = topo(random_ngon(n, 1000 + seed).unwrap());
        for (name, cs) in basis_lemma_checks(&t, 0, false).map_err(|e| e.to_string())? {
            for c in cs {
                ensure!(c.pass, "seed {seed} N={n} {name} {}: {:.3e} > {:.3e}", c.name, c.max_dev, c.tol);
                checks += 1;
            }
        }
    }
    timed(Duration::from_secs(10), start.elapsed())?;
    Ok(format!("{checks} checks on 100 patches in {:.2?}", start.elapsed()))
}

fn local_interpolants() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut cases: Vec<(String, MeshTopology, usize, &str)> = vec![("crossed N=4".into(), topo(crossed(1, 1.0).unwrap()), 4, "SingularLI")];
    for n in [3, 5, 7] {
        cases.push((format!("odd N={n}"), topo(random_ngon(n, 7 * n as u64).unwrap()), 0, "OddLI"));
    }
    cases.push(("crossed N=8".into(), topo(crossed(2, 1.0).unwrap()), 4, "EvenLI"));
    for (label, t, z, class) in &cases {
        let p = t.patch(*z).unwrap();
        let r = classify_vertex(&p, &tol);
        ensure!(r.status.name() == *class, "{label}: classified {}", r.status.name());
        for s in 0..50 {
            let mut a: Vec<f64> = (0..p.valence()).map(|_| rng.random_range(-1.0..1.0)).collect();
            if r.singular {
                let d = alternating_sum(&a) / a.len() as f64;
                for (k, v) in a.iter_mut().enumerate() {
                    *v -= if k % 2 == 0 { d } else { -d };
                }
            }
            let f = local_interpolant(t, &WTarget::new(*z, a.clone()), &tol).map_err(|e| format!("{label}: {e}"))?;
            let mut spec = FieldSpec { mean_zero: true, ..Default::default() };
            spec.expect_at(t, *z, &a);
            spec.support = Some(p.triangles.iter().copied().collect());
            let rep = verify_field(t, &f, &spec);
            ensure!(rep.pass, "{label} sample {s}: {:?}", rep.failures());
        }
    }
    Ok(format!("{} patches x 50 targets", cases.len()))
}

fn d_regression() -> Outcome {
    let mut flat = vec![("hexagon", topo(ngon_patch(6, 1.0, None, None).unwrap()))];
    flat.push(("three_lines", topo(three_lines(2).unwrap())));
    flat.push(("type1", topo(type1_diagonal(3, 1.0).unwrap())));
    let mut count = 0;
    for (label, t) in &flat {
        for z in (0..t.num_vertices()).filter(|&z| !t.is_boundary(z)) {
            let p = t.patch(z).unwrap();
            let dv = decision_values(&compute_dcoefficients(&p).unwrap(), p.h_z);
            ensure!(dv.iter().all(|v| *v < 1e-10), "{label} vertex {z}: {dv:?}");
            count += 1;
        }
    }
    for l in [1.0, 0.5, 2.0] {
        let t = topo(crossed(2, l).unwrap());
        let p = t.patch(4).unwrap();
        ensure!(p.valence() == 8, "crossed center has valence {}", p.valence());
        let d0 = compute_dcoefficients(&p).unwrap().big_d[0];
        ensure!(rel(d0.abs(), 4.0 / (l * l)) < 1e-10, "L={l}: |D0| = {d0}");
        ensure!(rel(d0, d0_simplified(&p)) < 1e-10, "L={l}: telescoped form {}", d0_simplified(&p));
    }
    Ok(format!("{count} flat vertices below 1e-10, crossed |D0| = 4/L^2"))
}

fn dual_formula() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..1000u64 {
        let n = [4, 6, 8, 10][seed as usize % 4];
        let t = topo(random_ngon(n, 50_000 + seed).unwrap());
        let p = t.patch(0).unwrap();
        let dc = compute_dcoefficients(&p).unwrap();
        let closed = d_closed_form(&p);
        let pairs = [(dc.big_d[0], d0_simplified(&p)), (dc.big_d[1], closed[0]), (dc.big_d[2], closed[1])];
        for (i, (a, b)) in pairs.into_iter().enumerate() {
            // relative to the size of the summands, not of their alternating sum
            let col = dc.column(i);
            let scale = col.iter().map(|v| v.abs()).sum::<f64>().max(a.abs());
            let r = (a - b).abs() / scale;
            worst = worst.max(r);
            ensure!(r < 1e-10, "seed {seed} N={n} D{i}: {a} vs {b}");
        }
    }
    timed(Duration::from_secs(5), start.elapsed())?;
    Ok(format!("1000 patches, worst {worst:.1e}, {:.2?}", start.elapsed()))
}

fn onto_oracle() -> Outcome {
    let tol = Tolerances::default();
    let mut notes = Vec::new();
    for n in 1..=3 {
        let start = Instant::now();
        let t = topo(crossed(n, 1.0).unwrap());
        let cl = classify_mesh(&t, &tol).unwrap();
        let a = analyze_divergence(&t, &cl, &SolverOptions::default()).map_err(|e| e.to_string())?;
        timed(Duration::from_secs(60), start.elapsed())?;
        ensure!(a.velocity_dofs <= 3000, "crossed({n}) has {} velocity unknowns", a.velocity_dofs);
        ensure!(a.rank.k == 0, "crossed({n}): K = {}", a.rank.k);
        ensure!(a.infsup.beta > 0.0 && a.infsup.spurious == 0, "crossed({n}): beta {}", a.infsup.beta);
        ensure!(a.rank.gap > 10.0, "crossed({n}): rank gap {}", a.rank.gap);
        notes.push(format!("crossed({n}) beta={:.3}", a.infsup.beta));
    }
    for n in 2..=3 {
        let t = topo(type1_diagonal(n, 1.0).unwrap());
        let cl = classify_mesh(&t, &tol).unwrap();
        let a = analyze_divergence(&t, &cl, &SolverOptions::default()).map_err(|e| e.to_string())?;
        ensure!(a.rank.k >= 1, "type1({n}): K = {}", a.rank.k);
        ensure!(!a.spurious_modes.is_empty(), "type1({n}): no spurious mode");
        let alt = alternates_around_interior_vertices(&t, &a.spurious_modes[0], 1e-6).map_err(|e| e.to_string())?;
        ensure!(alt, "type1({n}): mode does not alternate");
        notes.push(format!("type1({n}) K={}", a.rank.k));
    }
    Ok(notes.join(", "))
}

fn dimension_identities() -> Outcome {
    let tol = Tolerances::default();
    let meshes = vec![
        crossed(1, 1.0).unwrap(),
        crossed(2, 1.0).unwrap(),
        crossed(3, 0.5).unwrap(),
        type1_diagonal(1, 1.0).unwrap(),
        type1_diagonal(2, 1.0).unwrap(),
        type1_diagonal(3, 1.0).unwrap(),
        three_lines(1).unwrap(),
        three_lines(2).unwrap(),
        ngon_patch(5, 1.0, None, None).unwrap(),
        ngon_patch(6, 1.0, None, None).unwrap(),
        perturbed_grid(3, 1, 0.1).unwrap(),
        perturbed_grid(4, 2, 0.2).unwrap(),
    ];
    let (mut identities, total) = (0, meshes.len());
    for (i, m) in meshes.into_iter().enumerate() {
        let t = topo(m);
        let cl = classify_mesh(&t, &tol).unwrap();
        let a = analyze_divergence(&t, &cl, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let c = t.counts;
        let s = cl.summary.sigma as i64;
        let want = (2 * c.e0 as i64 - c.e as i64 + 3 * c.v0 as i64 + s + a.rank.k).max(0);
        ensure!(a.rank.nullity as i64 == want, "mesh {i}: nullity {} vs {want}", a.rank.nullity);
        let sp = a.spline.ok_or(format!("mesh {i}: no spline dimensions"))?;
        if a.rank.k == 0 && sp.hypothesis {
            let strang = (c.e + 4 * c.v - c.v0 + cl.summary.sigma_i) as i64;
            ensure!(sp.dim_s + 6 * (c.e - c.e0) as i64 - cl.summary.sigma_b as i64 == strang, "mesh {i}: {sp:?}");
            identities += 1;
        }
    }
    // two triangles: the raw count is negative without a rank deficiency
    let t = topo(type1_diagonal(1, 1.0).unwrap());
    let d = strang_dimensions(&t.counts, 0, 2, 0).map_err(|e| e.to_string())?;
    ensure!(d.raw < 0 && d.dim_s == 0, "clamp: {d:?}");
    Ok(format!("nullity formula on {total} meshes, Strang identity on {identities}, clamp to 0"))
}

fn cot_weight(t: &MeshTopology, y: usize, x: usize) -> f64 {
    let e = t.edge_between(y, x).unwrap();
    t.edges[e].triangles.iter().map(|&k| 1.0 / t.geoms[k].angles[slot_of(&t.mesh.triangles[k], y)].tan()).sum()
}

/// A random simple path of three interior edges, acceptable in its direction.
fn random_path(t: &MeshTopology, rng: &mut ChaCha8Rng, tol: &Tolerances) -> Option<[usize; 4]> {
    let interior: Vec<usize> = (0..t.num_vertices()).filter(|&v| !t.is_boundary(v)).collect();
    let mut p = vec![interior[rng.random_range(0..interior.len())]];
    while p.len() < 4 {
        let z = *p.last().unwrap();
        let next: Vec<usize> = t.vertex_edges[z]
            .iter()
            .filter(|&&e| t.edges[e].is_interior())
            .map(|&e| t.edges[e].other(z))
            .filter(|y| !p.contains(y))
            .collect();
        if next.is_empty() {
            return None;
        }
        p.push(next[rng.random_range(0..next.len())]);
    }
    let path = [p[0], p[1], p[2], p[3]];
    path_stats(t, &path, tol).ok().filter(|s| s.acceptable).map(|_| path)
}

fn tree_machinery() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut paths = 0;
    for seed in 0..5u64 {
        let t = topo(perturbed_grid(6, seed, 0.2).unwrap());
        let mut tries = 0;
        let mut found = 0;
        while found < 6 && tries < 1000 {
            tries += 1;
            let Some(path) = random_path(&t, &mut rng, &tol) else { continue };
            found += 1;
            let n = t.patch(path[0]).unwrap().valence();
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = path_interpolant(&t, &path, &a, &tol).map_err(|e| format!("{path:?}: {e}"))?;
            let stats = path_stats(&t, &path, &tol).unwrap();
            let y = path[3];
            let m = cot_weight(&t, path[2], y);
            for (i, &k) in v.end_triangles.iter().enumerate() {
                let cot = 1.0 / t.geoms[k].angles[slot_of(&t.mesh.triangles[k], y)].tan();
                let want = v.s_a * stats.rho_tilde[2] * cot / m;
                ensure!(
                    (v.spill[i].abs() - want.abs()).abs() <= 1e-9 * (1.0 + want.abs()),
                    "{path:?}: spill {} vs {want}",
                    v.spill[i]
                );
            }
        }
        ensure!(found == 6, "seed {seed}: only {found} acceptable paths");
        paths += found;
    }

    let mut round_trips = 0;
    for (i, m) in [crossed(2, 1.0).unwrap(), perturbed_grid(4, 2, 0.2).unwrap(), perturbed_grid(5, 8, 0.15).unwrap()]
        .into_iter()
        .enumerate()
    {
        let t = topo(m);
        let cl = classify_mesh(&t, &tol).unwrap();
        let cover = build_tree_cover(&t, &cl, &tol, None).unwrap();
        let h = check_hypotheses(&t, &cl, &cover, &tol).unwrap();
        let a = analyze_divergence(&t, &cl, &SolverOptions::default()).map_err(|e| e.to_string())?;
        if cover.complete() && h.boundary_blocked.is_empty() {
            ensure!(a.rank.k == 0, "mesh {i}: complete cover but K = {}", a.rank.k);
            let d = number_dofs(&t);
            let x: Vec<f64> = (0..d.velocity_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = velocity_field(&t, &d, &x);
            let p: VertexPressure = (0..t.counts.t).map(|k| t.mesh.triangles[k].map(|v| divergence_at(&t, &f, k, v))).collect();
            let scale = p.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let r = tree_interpolant(&t, &cl, &cover, &p, &tol).map_err(|e| e.to_string())?;
            ensure!(r.max_residual <= 1e-9 * scale, "mesh {i}: residual {:.3e}", r.max_residual / scale);
            round_trips += 1;
        }
    }
    ensure!(round_trips > 0, "no mesh with a complete cover");
    Ok(format!("{paths} random 3-hop paths, {round_trips} round trips"))
}

struct Snapshot {
    statuses: Vec<&'static str>,
    d0: Vec<f64>,
    d12: Vec<f64>,
    weights: Vec<f64>,
    acceptable: Vec<bool>,
    assignment: Vec<Option<usize>>,
    rho: f64,
    upsilon: f64,
    k: i64,
    beta: f64,
}

fn snapshot(m: &Triangulation) -> Snapshot {
    let tol = Tolerances::default();
    let t = topo(m.clone());
    let cl = classify_mesh(&t, &tol).unwrap();
    let cover = build_tree_cover(&t, &cl, &tol, None).unwrap();
    let opts = SolverOptions { norm: VelocityNorm::H1Seminorm, ..Default::default() };
    let a = analyze_divergence(&t, &cl, &opts).unwrap();
    let mut weights = Vec::new();
    let mut acceptable = Vec::new();
    for e in t.edges.iter().filter(|e| e.is_interior()) {
        for (z, y) in [(e.vertices[0], e.vertices[1]), (e.vertices[1], e.vertices[0])] {
            let p = path_stats(&t, &[z, y], &tol).unwrap();
            weights.push(p.weight_from[0]);
            acceptable.push(p.acceptable);
        }
    }
    let (mut d0, mut d12) = (Vec::new(), Vec::new());
    for r in &cl.reports {
        if let Some(d) = r.decisions {
            d0.push(d[0]);
            d12.push(d[1].hypot(d[2]));
        }
    }
    Snapshot {
        statuses: cl.reports.iter().map(|r| r.status.name()).collect(),
        d0,
        d12,
        weights,
        acceptable,
        assignment: cover.assignment.clone(),
        rho: cover.rho_bar(),
        upsilon: cover.upsilon_bar(),
        k: a.rank.k,
        beta: a.infsup.beta,
    }
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let meshes = [
        crossed(2, 1.0).unwrap(),
        type1_diagonal(2, 1.0).unwrap(),
        perturbed_grid(4, 9, 0.2).unwrap(),
        perturbed_grid(3, 4, 0.25).unwrap(),
    ];
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0);
    let mut count = 0;
    for (i, m) in meshes.iter().enumerate() {
        let base = snapshot(m);
        for _ in 0..3 {
            let rot = Rotation2::new(rng.random_range(0.0..std::f64::consts::TAU));
            let lambda = rng.random_range(0.2..5.0);
            let shift = Point::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
            let moved = snapshot(&m.map_points(|p| rot * p * lambda + shift).unwrap());
            ensure!(base.statuses == moved.statuses, "mesh {i}: classification changed");
            ensure!(base.acceptable == moved.acceptable, "mesh {i}: acceptability changed");
            ensure!(base.assignment == moved.assignment, "mesh {i}: tree cover changed");
            ensure!(base.k == moved.k, "mesh {i}: K {} vs {}", base.k, moved.k);
            let pairs = base.d0.iter().zip(&moved.d0).chain(base.d12.iter().zip(&moved.d12)).chain(base.weights.iter().zip(&moved.weights));
            for (a, b) in pairs {
                ensure!(close(*a, *b), "mesh {i}: {a} vs {b}");
            }
            ensure!(close(base.rho, moved.rho) && close(base.upsilon, moved.upsilon), "mesh {i}: rho/upsilon");
            ensure!(rel(base.beta, moved.beta) <= 1e-8, "mesh {i}: beta {} vs {}", base.beta, moved.beta);
            count += 1;
        }
    }
    Ok(format!("{count} transformed meshes"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("field lemmas", field_lemmas),
        ("local interpolants", local_interpolants),
        ("D regression", d_regression),
        ("dual formula", dual_formula),
        ("onto-ness", onto_oracle),
        ("dimension identities", dimension_identities),
        ("tree machinery", tree_machinery),
        ("invariance", invariance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(f) {
            Ok(Ok(note)) => println!("acceptance {} {name}: PASS ({note})", i + 1),
            Ok(Err(why)) => {
                failed += 1;
                println!("acceptance {} {name}: FAIL ({why})", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("acceptance {} {name}: FAIL (panicked)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
