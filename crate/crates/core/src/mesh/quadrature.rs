use serde::{Deserialize, Serialize};

/// Quadrature on the reference k-simplex. Points are full barycentric tuples
/// (λ₀, …, λ_k); weights sum to the reference volume 1/k!.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub dim: usize,
    pub order: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre01(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(m);
    let mut ws = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs.push(0.5 * (1.0 - x));
        ws.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}

impl QuadratureRule {
    /// Degree-4 rule on triangles, degree-3 on tetrahedra, 3-point Gauss on
    /// segments, collapsed Gauss otherwise.
    pub fn default_for(dim: usize) -> QuadratureRule {
        match dim {
            1 => QuadratureRule::segment_gauss(3),
            2 => QuadratureRule::triangle_degree4(),
            3 => QuadratureRule::tet_degree3(),
            _ => QuadratureRule::collapsed_gauss(dim, 4),
        }
    }

    pub fn segment_gauss(m: usize) -> QuadratureRule {
        let (xs, ws) = gauss_legendre01(m);
        QuadratureRule {
            dim: 1,
            order: 2 * m - 1,
            points: xs.iter().map(|&x| vec![1.0 - x, x]).collect(),
            weights: ws,
        }
    }

    pub fn triangle_degree4() -> QuadratureRule {
        let (a1, b1, w1) = (0.108103018168070, 0.445948490915965, 0.223381589678011);
        let (a2, b2, w2) = (0.816847572980459, 0.091576213509771, 0.109951743655322);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
            points.push(vec![a, b, b]);
            points.push(vec![b, a, b]);
            points.push(vec![b, b, a]);
            weights.extend([w / 2.0; 3]);
        }
        QuadratureRule { dim: 2, order: 4, points, weights }
    }

    pub fn tet_degree3() -> QuadratureRule {
        let mut points = vec![vec![0.25; 4]];
        let mut weights = vec![-4.0 / 5.0 / 6.0];
        for i in 0..4 {
            let mut p = vec![1.0 / 6.0; 4];
            p[i] = 0.5;
            points.push(p);
            weights.push(9.0 / 20.0 / 6.0);
        }
        QuadratureRule { dim: 3, order: 3, points, weights }
    }

    /// Conical product of Gauss–Legendre rules with m nodes per direction:
    /// λ₁ = u₁, λ₂ = (1 − u₁)u₂, … with Jacobian Π (1 − u_i)^{dim−1−i}.
    pub fn collapsed_gauss(dim: usize, m: usize) -> QuadratureRule {
        let (xs, ws) = gauss_legendre01(m);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for idx in 0..m.pow(dim as u32) {
            let mut rem = idx;
            let mut lam = vec![0.0; dim + 1];
            let mut left = 1.0;
            let mut w = 1.0;
            for i in 0..dim {
                let j = rem % m;
                rem /= m;
                lam[i + 1] = left * xs[j];
                w *= ws[j] * (1.0 - xs[j]).powi((dim - 1 - i) as i32);
                left *= 1.0 - xs[j];
            }
            lam[0] = 1.0 - lam[1..].iter().sum::<f64>();
            points.push(lam);
            weights.push(w);
        }
        QuadratureRule { dim, order: 2 * m - dim, points, weights }
    }

    pub fn volume(&self) -> f64 {
        1.0 / factorial(self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ λ^α over the reference simplex = α! k! / (|α| + k)! × 1/k!.
    fn exact_monomial(alpha: &[usize]) -> f64 {
        let k = alpha.len() - 1;
        let s: usize = alpha.iter().sum();
        alpha.iter().map(|&a| factorial(a)).product::<f64>() / factorial(s + k)
    }

    fn check_exactness(rule: &QuadratureRule, order: usize) {
        let k = rule.dim;
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - rule.volume()).abs() < 1e-14, "weights sum {sum}");
        // all multi-indices on λ_1..λ_k with total degree ≤ order
        let mut alpha = vec![0usize; k + 1];
        fn rec(i: usize, left: usize, alpha: &mut Vec<usize>, rule: &QuadratureRule) {
            if i == alpha.len() {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p.iter().zip(alpha.iter()).map(|(x, &a)| x.powi(a as i32)).product::<f64>())
                    .sum();
                let e = exact_monomial(alpha);
                assert!((q - e).abs() < 1e-12, "α = {alpha:?}: {q} vs {e}");
                return;
            }
            for a in 0..=left {
                alpha[i] = a;
                rec(i + 1, left - a, alpha, rule);
            }
            alpha[i] = 0;
        }
        rec(0, order, &mut alpha, rule);
    }

    #[test]
    fn default_rules_are_exact_to_their_order() {
        for dim in 1..=4 {
            let r = QuadratureRule::default_for(dim);
            check_exactness(&r, r.order);
        }
    }

    #[test]
    fn triangle_rule_has_order_four() {
        check_exactness(&QuadratureRule::triangle_degree4(), 4);
    }

    #[test]
    fn tet_rule_has_order_three() {
        check_exactness(&QuadratureRule::tet_degree3(), 3);
    }

    #[test]
    fn collapsed_gauss_high_order() {
        check_exactness(&QuadratureRule::collapsed_gauss(3, 4), 5);
        check_exactness(&QuadratureRule::collapsed_gauss(2, 5), 8);
    }
}
