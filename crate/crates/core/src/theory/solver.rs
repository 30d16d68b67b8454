//! Self-consistent (R̃, Δ) for the stationary population.

use serde::{Deserialize, Serialize};

use super::amplitude::Shape;
use super::contributions::contributions_eff;
use crate::model::{CouplingSet, ModelParams, C64};

/// Solver settings. The scan covers R̃ ∈ (0, 1.5√λ] and Δ ∈ [−span, span]
/// with Δ nodes packed densely around 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub grid_r: usize,
    pub grid_delta: usize,
    pub delta_span: f64,
    /// Candidates refined by Newton after the scan.
    pub candidates: usize,
    /// Largest |F| / R̃ accepted as a non-converged nontrivial estimate.
    pub accept_relative: f64,
    /// Roots with R̃ below `min_r_scale / √N` are treated as incoherent: at
    /// that level a handful of oscillators can lock onto their own
    /// contribution, which has no counterpart in a large population.
    pub min_r_scale: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 60,
            grid_r: 20,
            grid_delta: 61,
            delta_span: 2.0,
            candidates: 6,
            accept_relative: 1e-2,
            min_r_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistentSolution {
    #[serde(rename = "R_tilde")]
    pub r_tilde: f64,
    /// NaN on the incoherent branch, where Ω is undefined.
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub converged: bool,
    /// |R̃_l + R̃_d − R̃| at the returned point.
    pub residual: f64,
    pub branch_note: String,
}

impl SelfConsistentSolution {
    pub fn is_incoherent(&self) -> bool {
        self.r_tilde == 0.0
    }
}

/// Complex residual `F = R̃_l + R̃_d − R̃`.
pub fn self_consistency_residual(r_tilde: f64, delta: f64, params: &ModelParams, couplings: &CouplingSet) -> C64 {
    let c = contributions_eff(&Shape::new(params), r_tilde, delta, couplings);
    c.locked + c.drift - r_tilde
}

struct Problem<'a> {
    shape: Shape,
    couplings: &'a CouplingSet,
}

impl Problem<'_> {
    /// `F / R̃`, which removes the trivial root at R̃ = 0.
    fn g(&self, r: f64, d: f64) -> [f64; 2] {
        let c = contributions_eff(&self.shape, r, d, self.couplings);
        let g = (c.locked + c.drift) / r - 1.0;
        [g.re, g.im]
    }

    fn norm(g: [f64; 2]) -> f64 {
        g[0].hypot(g[1])
    }

    /// Damped Newton with a central-difference Jacobian. Returns the best
    /// point visited and its |G|.
    fn newton(&self, mut r: f64, mut d: f64, opts: &SolverOptions) -> (f64, f64, f64) {
        let mut g = self.g(r, d);
        let mut gn = Self::norm(g);
        for _ in 0..opts.max_iter {
            if gn * r < opts.tol {
                break;
            }
            let hr = 1e-7 * r.max(1e-3);
            let hd = 1e-8;
            let gr_p = self.g(r + hr, d);
            let gr_m = self.g((r - hr).max(1e-300), d);
            let gd_p = self.g(r, d + hd);
            let gd_m = self.g(r, d - hd);
            let j = [
                [(gr_p[0] - gr_m[0]) / (2.0 * hr), (gd_p[0] - gd_m[0]) / (2.0 * hd)],
                [(gr_p[1] - gr_m[1]) / (2.0 * hr), (gd_p[1] - gd_m[1]) / (2.0 * hd)],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !det.is_finite() || det == 0.0 {
                break;
            }
            let step_r = -(j[1][1] * g[0] - j[0][1] * g[1]) / det;
            let step_d = -(-j[1][0] * g[0] + j[0][0] * g[1]) / det;
            let mut t = 1.0;
            // Keep R̃ positive, then backtrack until |G| decreases.
            while r + t * step_r <= 0.0 {
                t *= 0.5;
            }
            let mut improved = false;
            for _ in 0..40 {
                let (nr, nd) = (r + t * step_r, d + t * step_d);
                let ng = self.g(nr, nd);
                let nn = Self::norm(ng);
                if nn < gn {
                    r = nr;
                    d = nd;
                    g = ng;
                    gn = nn;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (r, d, gn)
    }
}

/// Δ nodes `span · sinh(c x) / sinh(c)` for x evenly spaced on [−1, 1].
fn delta_nodes(n: usize, span: f64) -> Vec<f64> {
    let c = 8.0f64;
    (0..n)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / (n - 1).max(1) as f64;
            span * (c * x).sinh() / c.sinh()
        })
        .collect()
}

/// Solves `R̃_l + R̃_d = R̃` for (R̃, Δ). Newton starts from `init` when
/// given; otherwise (or if that fails) a grid scan seeds several Newton runs
/// and the converged root with the largest R̃ wins. Without any nontrivial
/// root the incoherent branch R̃ = 0 is returned.
pub fn solve_self_consistency(
    params: &ModelParams,
    couplings: &CouplingSet,
    init: Option<(f64, f64)>,
    opts: &SolverOptions,
) -> SelfConsistentSolution {
    let problem = Problem {
        shape: Shape::new(params),
        couplings,
    };
    let finish = |r: f64, d: f64, note: &str| {
        let residual = self_consistency_residual(r, d, params, couplings).norm();
        SelfConsistentSolution {
            r_tilde: r,
            delta: d,
            converged: residual < opts.tol,
            residual,
            branch_note: note.to_string(),
        }
    };

    let r_floor = opts.min_r_scale / (couplings.len() as f64).sqrt();
    if let Some((r0, d0)) = init {
        if r0 > 0.0 && r0.is_finite() && d0.is_finite() {
            let (r, d, _) = problem.newton(r0, d0, opts);
            let sol = finish(r, d, "newton from initial guess");
            if sol.converged && r >= r_floor {
                return sol;
            }
        }
    }

    let r_max = 1.5 * params.lambda.sqrt();
    let rs: Vec<f64> = (1..=opts.grid_r).map(|i| r_max * i as f64 / opts.grid_r as f64).collect();
    let ds = delta_nodes(opts.grid_delta, opts.delta_span);
    let grid: Vec<Vec<f64>> = rs
        .iter()
        .map(|&r| ds.iter().map(|&d| Problem::norm(problem.g(r, d))).collect())
        .collect();
    let mut minima = Vec::new();
    for i in 0..rs.len() {
        for j in 0..ds.len() {
            let v = grid[i][j];
            let neighbours = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ];
            let is_min = neighbours
                .iter()
                .filter_map(|&(a, b)| grid.get(a).and_then(|row| row.get(b)))
                .all(|&w| v <= w);
            if is_min && v.is_finite() {
                minima.push((v, i, j));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.truncate(opts.candidates);

    let mut converged: Option<(f64, f64)> = None;
    let mut best: Option<(f64, f64, f64)> = None;
    for &(_, i, j) in &minima {
        let (r, d, gn) = problem.newton(rs[i], ds[j], opts);
        if r < r_floor {
            continue;
        }
        if gn * r < opts.tol {
            if converged.is_none_or(|c| r > c.0) {
                converged = Some((r, d));
            }
        } else if best.is_none_or(|b| gn < b.2) {
            best = Some((r, d, gn));
        }
    }
    if let Some((r, d)) = converged {
        return finish(r, d, "grid scan + newton");
    }
    if let Some((r, d, gn)) = best {
        if gn < opts.accept_relative {
            return finish(r, d, "best residual; membership jumps prevent exact convergence");
        }
    }
    SelfConsistentSolution {
        r_tilde: 0.0,
        delta: f64::NAN,
        converged: true,
        residual: 0.0,
        branch_note: "incoherent branch".into(),
    }
}
