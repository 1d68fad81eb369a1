//! Homogeneous polynomials in the barycentric coordinates of a triangle, and
//! the quadrature rules used to integrate them.
//!
//! A cubic is stored as 10 coefficients of the monomials
//! `l0^a l1^b l2^c` with `a + b + c = 3`; a quadratic as 6. Lower-degree
//! terms are homogenized by multiplying with `l0 + l1 + l2 = 1`.

pub type Cubic = [f64; 10];
pub type Quad = [f64; 6];

/// Exponents of the cubic monomials, in storage order.
pub const CUBIC_EXPONENTS: [[u8; 3]; 10] = [
    [3, 0, 0],
    [0, 3, 0],
    [0, 0, 3],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [0, 2, 1],
    [1, 0, 2],
    [0, 1, 2],
    [1, 1, 1],
];

/// Exponents of the quadratic monomials, in storage order.
pub const QUAD_EXPONENTS: [[u8; 3]; 6] = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];

pub fn cubic_index(e: [u8; 3]) -> usize {
    CUBIC_EXPONENTS.iter().position(|x| *x == e).expect("cubic exponent")
}

pub fn quad_index(e: [u8; 3]) -> usize {
    QUAD_EXPONENTS.iter().position(|x| *x == e).expect("quadratic exponent")
}

fn exponent(slots: &[usize]) -> [u8; 3] {
    let mut e = [0u8; 3];
    for &s in slots {
        e[s] += 1;
    }
    e
}

/// The monomial `prod l_s` over the given slots (repeats allowed), lifted to
/// degree 3.
pub fn monomial(slots: &[usize]) -> Cubic {
    let mut c = [0.0; 10];
    match slots.len() {
        3 => c[cubic_index(exponent(slots))] = 1.0,
        2 => {
            for k in 0..3 {
                let mut s = slots.to_vec();
                s.push(k);
                c[cubic_index(exponent(&s))] += 1.0;
            }
        }
        _ => panic!("monomial degree must be 2 or 3"),
    }
    c
}

fn pow(x: f64, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * x)
}

pub fn eval_cubic(c: &Cubic, l: &[f64; 3]) -> f64 {
    CUBIC_EXPONENTS.iter().zip(c).map(|(e, v)| v * pow(l[0], e[0]) * pow(l[1], e[1]) * pow(l[2], e[2])).sum()
}

pub fn eval_quad(q: &Quad, l: &[f64; 3]) -> f64 {
    QUAD_EXPONENTS.iter().zip(q).map(|(e, v)| v * pow(l[0], e[0]) * pow(l[1], e[1]) * pow(l[2], e[2])).sum()
}

/// Partial derivative with respect to `l_k`.
pub fn derivative(c: &Cubic, k: usize) -> Quad {
    let mut q = [0.0; 6];
    for (e, v) in CUBIC_EXPONENTS.iter().zip(c) {
        if e[k] > 0 {
            let mut f = *e;
            f[k] -= 1;
            q[quad_index(f)] += v * e[k] as f64;
        }
    }
    q
}

/// Value of a quadratic at vertex `slot`: the coefficient of `l_slot^2`.
pub fn quad_at_vertex(q: &Quad, slot: usize) -> f64 {
    let mut e = [0u8; 3];
    e[slot] = 2;
    q[quad_index(e)]
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// `int_T l^a = 2 |T| a! / (|a| + 2)!`.
pub fn monomial_integral(e: [u8; 3], area: f64) -> f64 {
    let deg = e[0] + e[1] + e[2];
    2.0 * area * factorial(e[0]) * factorial(e[1]) * factorial(e[2]) / factorial(deg + 2)
}

/// Exact integral of a quadratic over a triangle of the given area.
pub fn integral_quad(q: &Quad, area: f64) -> f64 {
    QUAD_EXPONENTS.iter().zip(q).map(|(e, v)| v * monomial_integral(*e, area)).sum()
}

/// Symmetric 12-point rule, exact for degree 6. Weights sum to one.
pub fn triangle_rule() -> &'static [([f64; 3], f64)] {
    static RULE: std::sync::OnceLock<Vec<([f64; 3], f64)>> = std::sync::OnceLock::new();
    RULE.get_or_init(|| {
        let mut pts = Vec::with_capacity(12);
        for (a, b, w) in [
            (0.501426509658179, 0.249286745170910, 0.116786275726379),
            (0.873821971016996, 0.063089014491502, 0.050844906370207),
        ] {
            pts.push(([a, b, b], w));
            pts.push(([b, a, b], w));
            pts.push(([b, b, a], w));
        }
        let (a, b, c, w) = (0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            pts.push((p, w));
        }
        pts
    })
}

/// 5-point Gauss-Legendre rule on `[0, 1]`.
pub const GAUSS5: [(f64, f64); 5] = [
    (0.046910077030668004, 0.11846344252809454),
    (0.23076534494715845, 0.23931433524968324),
    (0.5, 0.28444444444444444),
    (0.7692346550528415, 0.23931433524968324),
    (0.953089922969332, 0.11846344252809454),
];

/// Integral of `f` (a function of barycentric coordinates) over a triangle.
pub fn integrate(area: f64, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    area * triangle_rule().iter().map(|(p, w)| w * f(p)).sum::<f64>()
}

/// Barycentric point at parameter `s` along the edge from slot `a` to slot `b`.
pub fn edge_point(a: usize, b: usize, s: f64) -> [f64; 3] {
    let mut l = [0.0; 3];
    l[a] = 1.0 - s;
    l[b] = s;
    l
}

/// Product of three linear forms `sum_k a_k l_k`.
pub fn product3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Cubic {
    let mut out = [0.0; 10];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let v = a[i] * b[j] * c[k];
                if v != 0.0 {
                    out[cubic_index(exponent(&[i, j, k]))] += v;
                }
            }
        }
    }
    out
}

fn unit(i: usize) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[i] = 1.0;
    e
}

/// Local Lagrange node `n` of the cubic element in barycentric coordinates:
/// vertices `0..3`, then two nodes per edge (edge opposite slot `k` gives
/// nodes `3 + 2k` near slot `(k+1) % 3` and `4 + 2k` near slot `(k+2) % 3`),
/// then the centroid.
pub fn lagrange_node(n: usize) -> [f64; 3] {
    match n {
        0..=2 => unit(n),
        3..=8 => {
            let k = (n - 3) / 2;
            let (a, b) = ((k + 1) % 3, (k + 2) % 3);
            let (near, far) = if (n - 3) % 2 == 0 { (a, b) } else { (b, a) };
            let mut l = [0.0; 3];
            l[near] = 2.0 / 3.0;
            l[far] = 1.0 / 3.0;
            l
        }
        9 => [1.0 / 3.0; 3],
        _ => panic!("cubic element has 10 nodes"),
    }
}

/// The 10 cubic Lagrange shape functions, in the node order of
/// [`lagrange_node`].
pub fn lagrange_basis() -> [Cubic; 10] {
    let one = [1.0; 3];
    let lin = |a: [f64; 3], s: f64, b: [f64; 3]| -> [f64; 3] { std::array::from_fn(|i| a[i] * s - b[i]) };
    std::array::from_fn(|n| {
        if n < 3 {
            let e = unit(n);
            product3(e, lin(e, 3.0, one), lin(e, 3.0, one.map(|x| 2.0 * x))).map(|c| 0.5 * c)
        } else if n < 9 {
            let k = (n - 3) / 2;
            let (a, b) = ((k + 1) % 3, (k + 2) % 3);
            let (near, far) = if (n - 3) % 2 == 0 { (a, b) } else { (b, a) };
            product3(unit(near), unit(far), lin(unit(near), 3.0, one)).map(|c| 4.5 * c)
        } else {
            product3(unit(0), unit(1), unit(2)).map(|c| 27.0 * c)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rule_is_exact_to_degree_six() {
        for a in 0..=6u8 {
            for b in 0..=6 - a {
                for c in 0..=6 - a - b {
                    let q = integrate(0.7, |l| pow(l[0], a) * pow(l[1], b) * pow(l[2], c));
                    let exact = monomial_integral([a, b, c], 0.7);
                    assert!((q - exact).abs() < 1e-14, "{a}{b}{c}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn gauss_rule_is_exact_to_degree_nine() {
        for k in 0..=9 {
            let q: f64 = GAUSS5.iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "{k}");
        }
    }

    #[test]
    fn homogenized_quadratic_evaluates_correctly() {
        let c = monomial(&[0, 1]);
        let l = [0.2, 0.3, 0.5];
        assert!((eval_cubic(&c, &l) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c: Cubic = std::array::from_fn(|i| (i as f64 * 0.37).sin());
        let l = [0.3, 0.45, 0.25];
        for k in 0..3 {
            let h = 1e-6;
            let mut lp = l;
            lp[k] += h;
            let mut lm = l;
            lm[k] -= h;
            let fd = (eval_cubic(&c, &lp) - eval_cubic(&c, &lm)) / (2.0 * h);
            assert!((eval_quad(&derivative(&c, k), &l) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn lagrange_basis_is_nodal() {
        let basis = lagrange_basis();
        for (i, b) in basis.iter().enumerate() {
            for j in 0..10 {
                let v = eval_cubic(b, &lagrange_node(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-14, "{i} at {j}: {v}");
            }
        }
    }

    #[test]
    fn vertex_value_is_leading_coefficient() {
        let q: Quad = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(quad_at_vertex(&q, 1), eval_quad(&q, &[0.0, 1.0, 0.0]));
        assert!((integral_quad(&q, 1.0) - integrate(1.0, |l| eval_quad(&q, l))).abs() < 1e-13);
    }
}
