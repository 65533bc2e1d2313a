//! Polynomial weights θ(x) = (1 + |x|)^{−p} and their lattice sums.
//!
//! On the box the weight uses periodic distance to its center; the pure-ℝ²
//! weight is used only by the inequality check and the lattice sums.

use crate::field::VectorField;
use crate::grid::Grid;

/// Weight θ_{x₀}(x) = (1 + dist_per(x, x₀))^{−p} on the periodic box.
#[derive(Debug, Clone, Copy)]
pub struct Weight {
    center: (f64, f64),
    p: f64,
    grid: Grid,
}

impl Weight {
    /// `p` must exceed 2 so that θ is summable on ℝ²; default is 3.
    pub fn new(grid: Grid, center: (f64, f64), p: f64) -> Self {
        assert!(p > 2.0, "weight exponent must exceed 2, got {p}");
        Weight { center, p, grid }
    }

    pub fn centered(grid: Grid, center: (f64, f64)) -> Self {
        Weight::new(grid, center, 3.0)
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// θ_{x₀}(x) with periodic distance; always in (0, 1].
    pub fn eval(&self, x: (f64, f64)) -> f64 {
        let r = self.grid.periodic_distance(x, self.center);
        (1.0 + r).powf(-self.p)
    }
}

/// Non-periodic weight θ(z) = (1 + |z|)^{−p} on ℝ².
pub fn theta_r2(z: (f64, f64), p: f64) -> f64 {
    (1.0 + z.0.hypot(z.1)).powf(-p)
}

/// Weighted L² norm (Σ |u(x)|² θ(x) (d/n)²)^{1/2}.
pub fn weighted_norm(u: &VectorField, w: &Weight) -> f64 {
    let grid = u.grid();
    let n = grid.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let th = w.eval(grid.point(i, j));
            s += (u.u1()[(i, j)].norm_sqr() + u.u2()[(i, j)].norm_sqr()) * th;
        }
    }
    (s * grid.cell_area()).sqrt()
}

/// Check θ(x)θ(y) ≤ 4 θ(x−y)(θ(x) + θ(y)) with the ℝ² weight at p = 3.
pub fn weight_inequality_check(x: (f64, f64), y: (f64, f64)) -> bool {
    let p = 3.0;
    let tx = theta_r2(x, p);
    let ty = theta_r2(y, p);
    let txy = theta_r2((x.0 - y.0, x.1 - y.1), p);
    tx * ty <= 4.0 * txy * (tx + ty)
}

/// Truncated lattice sums of the ℝ² weight over Lℤ², p = 3.
///
/// Returns (sum_all, sum_nonzero) where sum_all = max over x in a sampled
/// fundamental cell of Σ_{|m|∞ ≤ R} θ(x − Lm) and
/// sum_nonzero = Σ_{0 < |m|∞ ≤ R} θ(Lm).
pub fn lattice_weight_sum(l: f64, cutoff_radius: i64) -> (f64, f64) {
    assert!(l > 0.0);
    assert!(cutoff_radius >= 8, "lattice truncation radius below 8");
    let p = 3.0;
    let r = cutoff_radius;
    let mut sum_nonzero = 0.0;
    for mi in -r..=r {
        for mj in -r..=r {
            if mi != 0 || mj != 0 {
                sum_nonzero += theta_r2((l * mi as f64, l * mj as f64), p);
            }
        }
    }
    // maximize Σ_m θ(x − Lm) over a sampled fundamental cell [0, L)²
    let samples = 33;
    let mut sum_all: f64 = 0.0;
    for si in 0..samples {
        for sj in 0..samples {
            let x = (
                l * si as f64 / samples as f64,
                l * sj as f64 / samples as f64,
            );
            let mut s = 0.0;
            for mi in -r..=r {
                for mj in -r..=r {
                    s += theta_r2((x.0 - l * mi as f64, x.1 - l * mj as f64), p);
                }
            }
            sum_all = sum_all.max(s);
        }
    }
    (sum_all, sum_nonzero)
}

/// Least-squares slope of log(sum_nonzero) against log L.
pub fn lattice_sum_slope(ls: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ls
        .iter()
        .map(|&l| (l.ln(), lattice_weight_sum(l, 32).1.ln()))
        .collect();
    let m = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn weight_range_and_peak() {
        let g = Grid::new(32, 16.0).unwrap();
        let w = Weight::centered(g, (8.0, 8.0));
        assert!((w.eval((8.0, 8.0)) - 1.0).abs() < 1e-15);
        assert!(w.eval((0.0, 0.0)) < 1.0);
        assert!(w.eval((0.0, 0.0)) > 0.0);
    }

    #[test]
    fn weighted_norm_monotone_in_p() {
        let g = Grid::new(32, 16.0).unwrap();
        let u = VectorField::from_fns(g, |_, _| 1.0, |_, _| 0.0);
        let n3 = weighted_norm(&u, &Weight::new(g, (8.0, 8.0), 3.0));
        let n4 = weighted_norm(&u, &Weight::new(g, (8.0, 8.0), 4.0));
        assert!(n4 < n3);
    }

    #[test]
    fn bump_at_center_outweighs_far_bump() {
        let g = Grid::new(64, 16.0).unwrap();
        let bump = |cx: f64, cy: f64| {
            VectorField::from_fns(
                g,
                move |x, y| {
                    let r = g.periodic_distance((x, y), (cx, cy));
                    if r < 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                },
                |_, _| 0.0,
            )
        };
        let w = Weight::centered(g, (4.0, 4.0));
        let near = weighted_norm(&bump(4.0, 4.0), &w);
        let far = weighted_norm(&bump(12.0, 12.0), &w);
        assert!(near > far);
    }

    #[test]
    fn inequality_basics() {
        assert!(weight_inequality_check((0.0, 0.0), (0.0, 0.0)));
        assert!(weight_inequality_check((50.0, 0.0), (-50.0, 0.0)));
    }

    #[test]
    fn lattice_limits() {
        let (all, nz) = lattice_weight_sum(1e6, 8);
        assert!(nz < 1e-6);
        assert!((all - 1.0).abs() < 1e-3);
        for l in [8.0, 16.0, 32.0] {
            let (all, _) = lattice_weight_sum(l, 16);
            assert!(all <= 1.5, "sum_all = {all} at L = {l}");
        }
    }

    #[test]
    fn lattice_sum_slope_approaches_cubic() {
        // The 1 + |x| offset keeps the finite-L slope slightly above −3:
        // about −2.88 over L ∈ {8,16,32}, tightening toward −3 for larger L.
        let s8 = lattice_sum_slope(&[8.0, 16.0, 32.0]);
        assert!(s8 > -3.0 && s8 < -2.8, "slope {s8}");
        let s64 = lattice_sum_slope(&[64.0, 128.0, 256.0]);
        assert!((s64 + 3.0).abs() < 0.05, "slope {s64}");
        assert!(s64 < s8);
    }
}
