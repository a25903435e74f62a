//! Minimization of smooth convex functions over the probability simplex.

/// Euclidean projection onto `{p ≥ 0, Σ p = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    let mut p: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    // Large steps leave `theta` with absolute rounding error; restore the sum.
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    /// Frank–Wolfe gap `⟨∇f, p⟩ − min_x ∂_x f`, an upper bound on `f(p) − f*`.
    pub gap: f64,
    pub iterations: usize,
}

fn fw_gap(p: &[f64], g: &[f64]) -> f64 {
    let lin: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
    let m = g.iter().copied().fold(f64::INFINITY, f64::min);
    (lin - m).max(0.0)
}

/// Projected gradient descent with Barzilai–Borwein steps and a monotone
/// backtracking safeguard. Stops when the Frank–Wolfe gap drops below
/// `rel_gap_tol · |f(p)|`.
pub fn minimize(
    f: impl Fn(&[f64]) -> (f64, Vec<f64>),
    start: Vec<f64>,
    rel_gap_tol: f64,
    max_iterations: usize,
) -> SimplexResult {
    let mut p = project_to_simplex(&start);
    let (mut val, mut g) = f(&p);
    let mut step = 1.0;
    for it in 0..max_iterations {
        let gap = fw_gap(&p, &g);
        if gap <= rel_gap_tol * val.abs() {
            return SimplexResult {
                point: p,
                value: val,
                gap,
                iterations: it,
            };
        }
        let mut t = step;
        let mut accepted = None;
        while t > 1e-20 {
            let cand: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let cand = project_to_simplex(&cand);
            let (cv, cg) = f(&cand);
            let decrease: f64 = g.iter().zip(cand.iter().zip(&p)).map(|(gi, (c, pi))| gi * (c - pi)).sum();
            let dist2: f64 = cand.iter().zip(&p).map(|(c, pi)| (c - pi).powi(2)).sum();
            if cv <= val + 0.5 * decrease.min(0.0) || (dist2 == 0.0 && cv <= val) {
                accepted = Some((cand, cv, cg, dist2));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cv, cg, dist2)) = accepted else {
            break;
        };
        // Barzilai–Borwein length for the next trial step.
        let sy: f64 = cand
            .iter()
            .zip(&p)
            .zip(cg.iter().zip(&g))
            .map(|((c, pi), (cgi, gi))| (c - pi) * (cgi - gi))
            .sum();
        step = if sy > 0.0 && dist2 > 0.0 { (dist2 / sy).clamp(1e-12, 1e12) } else { t * 2.0 };
        let stalled = dist2 == 0.0;
        p = cand;
        val = cv;
        g = cg;
        if stalled {
            break;
        }
    }
    let gap = fw_gap(&p, &g);
    SimplexResult {
        point: p,
        value: val,
        gap,
        iterations: max_iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_to_simplex(&[2.0, 0.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_to_simplex(&[0.5, 0.5, 0.5]);
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_minimum() {
        // min ‖p − c‖² with c outside the simplex: the projection of c.
        let c = [0.9, 0.6, -0.3];
        let f = |p: &[f64]| {
            let v = p.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum();
            let g = p.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect();
            (v, g)
        };
        let r = minimize(f, vec![1.0 / 3.0; 3], 1e-14, 10_000);
        let want = project_to_simplex(&c);
        for (a, b) in r.point.iter().zip(&want) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}
