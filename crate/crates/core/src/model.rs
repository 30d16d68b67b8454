//! Model parameters, state containers and right-hand sides.
//!
//! The mean-field model evolves each oscillator as
//!
//! ```text
//! dz_j/dt = (λ − |z_j|² + iω) z_j + (S K_j / N) Σ_k (z_k e^{−iβ} − z_j d₀ e^{−iα})
//! ```
//!
//! and the full-network model replaces the all-to-all sum by the adjacency
//! `A_jk` with prefactor `S / N`. Both are evaluated in Cartesian form; the
//! polar form is provided for cross-checking only because it divides by `r_j`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

pub type C64 = Complex64;

/// Amplitude below which the polar form is declared singular.
pub const R_FLOOR: f64 = 1e-9;

/// Scalar model constants shared by every oscillator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Bifurcation parameter λ; the uncoupled limit-cycle radius is √λ.
    pub lambda: f64,
    /// Intrinsic angular frequency ω.
    pub omega: f64,
    /// Global coupling scale S.
    #[serde(rename = "S", alias = "coupling_scale")]
    pub coupling_scale: f64,
    /// Angle of the constant self term d₀e^{−iα}, in [0, π).
    pub alpha: f64,
    /// Phase delay of the source term, in [0, π/2).
    pub beta: f64,
    /// Magnitude of the constant self term.
    pub d0: f64,
    /// Number of oscillators.
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            omega: PI,
            coupling_scale: 1.0,
            alpha: 0.0,
            beta: 0.0,
            d0: 1.0,
            n: 1000,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", format!("{} must be > 0", self.lambda)));
        }
        if !self.omega.is_finite() {
            return Err(Error::param("omega", "must be finite"));
        }
        if !(self.coupling_scale > 0.0 && self.coupling_scale.is_finite()) {
            return Err(Error::param(
                "S",
                format!("{} must be > 0", self.coupling_scale),
            ));
        }
        if !(0.0..PI).contains(&self.alpha) {
            return Err(Error::param("alpha", format!("{} not in [0, π)", self.alpha)));
        }
        if !(0.0..PI / 2.0).contains(&self.beta) {
            return Err(Error::param("beta", format!("{} not in [0, π/2)", self.beta)));
        }
        if !self.d0.is_finite() {
            return Err(Error::param("d0", "must be finite"));
        }
        if self.n == 0 {
            return Err(Error::param("N", "must be at least 1"));
        }
        Ok(())
    }

    /// Copy with a different coupling-function shape.
    pub fn with_shape(&self, alpha: f64, beta: f64, d0: f64) -> Self {
        Self {
            alpha,
            beta,
            d0,
            ..self.clone()
        }
    }

    /// `d₀ sin α`, the frequency shift contributed by the self term per unit K.
    pub fn d0_sin_alpha(&self) -> f64 {
        self.d0 * self.alpha.sin()
    }

    /// `d₀ cos α`, the amplitude damping contributed by the self term per unit K.
    pub fn d0_cos_alpha(&self) -> f64 {
        self.d0 * self.alpha.cos()
    }
}

/// Per-oscillator coupling strengths with their summary statistics.
///
/// The statistics are always recomputed from the stored values, so the set
/// cannot drift out of sync with them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CouplingSet {
    values: Vec<f64>,
    k_min: f64,
    k_max: f64,
    k_mean: f64,
    sigma_k: f64,
}

impl CouplingSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("K", "coupling set is empty"));
        }
        if let Some((j, k)) = values
            .iter()
            .enumerate()
            .find(|(_, k)| !(**k > 0.0 && k.is_finite()))
        {
            return Err(Error::param("K", format!("K[{j}] = {k} is not a positive number")));
        }
        let n = values.len() as f64;
        let k_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let k_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k_mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|k| (k - k_mean).powi(2)).sum::<f64>() / n;
        Ok(Self {
            values,
            k_min,
            k_max,
            k_mean,
            sigma_k: var.sqrt(),
        })
    }

    pub fn homogeneous(k: f64, n: usize) -> Result<Self> {
        Self::new(vec![k; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn k_mean(&self) -> f64 {
        self.k_mean
    }

    /// Population standard deviation.
    pub fn sigma_k(&self) -> f64 {
        self.sigma_k
    }

    /// All couplings multiplied by `factor` (used to fold S into K).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|k| k * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for CouplingSet {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<CouplingSet> for Vec<f64> {
    fn from(set: CouplingSet) -> Self {
        set.values
    }
}

/// Positions of all oscillators in the complex plane at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub z: Vec<C64>,
    pub t: f64,
}

impl EnsembleState {
    pub fn new(z: Vec<C64>, t: f64) -> Self {
        Self { z, t }
    }

    pub fn from_polar(theta: &[f64], r: &[f64], t: f64) -> Result<Self> {
        check_len("r", theta.len(), r.len())?;
        let z = theta
            .iter()
            .zip(r)
            .map(|(&th, &r)| C64::from_polar(r, th))
            .collect();
        Ok(Self { z, t })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.z.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn phases(&self) -> Vec<f64> {
        self.z.iter().map(|z| z.arg()).collect()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.z.iter().map(|z| z.norm()).collect()
    }
}

/// Unweighted graph stored as compressed in-neighbour lists.
///
/// `neighbors(j)` lists every `k` with `A_jk = 1`, i.e. every oscillator that
/// drives `j`; `degree(j)` is the matching row sum.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGraph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl NetworkGraph {
    /// Builds a graph from per-node in-neighbour lists. Lists are sorted and
    /// must not contain duplicates, self-loops or out-of-range indices.
    pub fn from_in_neighbors(mut lists: Vec<Vec<usize>>) -> Result<Self> {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for (j, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            for (i, &k) in list.iter().enumerate() {
                if k >= n {
                    return Err(Error::param("adjacency", format!("node {j} lists neighbour {k} >= N = {n}")));
                }
                if k == j {
                    return Err(Error::param("adjacency", format!("self-loop at node {j}")));
                }
                if i > 0 && list[i - 1] == k {
                    return Err(Error::param("adjacency", format!("duplicate edge {k} -> {j}")));
                }
            }
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Ok(Self { offsets, neighbors })
    }

    /// Undirected graph from an edge list; each pair becomes `A_uv = A_vu = 1`.
    pub fn from_undirected_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param("edges", format!("edge ({u}, {v}) out of range for N = {n}")));
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        Self::from_in_neighbors(lists)
    }

    pub fn complete(n: usize) -> Self {
        let lists = (0..n)
            .map(|j| (0..n).filter(|&k| k != j).collect())
            .collect();
        Self::from_in_neighbors(lists).expect("complete graph is simple")
    }

    pub fn empty(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[self.offsets[j]..self.offsets[j + 1]]
    }

    pub fn degree(&self, j: usize) -> usize {
        self.offsets[j + 1] - self.offsets[j]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|j| self.degree(j)).collect()
    }

    /// Number of nonzero adjacency entries (twice the undirected edge count).
    pub fn nnz(&self) -> usize {
        self.neighbors.len()
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.neighbors(j).binary_search(&k).is_ok()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n()).all(|j| self.neighbors(j).iter().all(|&k| self.has_edge(k, j)))
    }

    /// Directed pairs `(src, dst)` with `A_dst,src = 1`.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.nnz());
        for j in 0..self.n() {
            for &k in self.neighbors(j) {
                edges.push((k, j));
            }
        }
        edges.sort_unstable();
        edges
    }
}

/// A vector field on ℂᴺ that the integrator can step.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    /// Writes dz/dt at `z` into `out`. Both slices have length `dim()`.
    fn eval(&self, z: &[C64], out: &mut [C64]);
}

/// Precomputed mean-field right-hand side.
///
/// Folding the constants gives `dz_j = (g_j − |z_j|²) z_j + c_j Z` with
/// `g_j = λ + iω − S K_j d₀ e^{−iα}`, `c_j = S K_j e^{−iβ}` and `Z` the
/// population mean, so one evaluation costs O(N).
#[derive(Clone, Debug)]
pub struct MeanFieldSystem {
    gain: Vec<C64>,
    drive: Vec<C64>,
}

impl MeanFieldSystem {
    pub fn new(params: &ModelParams, couplings: &CouplingSet) -> Result<Self> {
        params.validate()?;
        let self_term = C64::from_polar(params.d0, -params.alpha);
        let delay = C64::from_polar(1.0, -params.beta);
        let base = C64::new(params.lambda, params.omega);
        let (gain, drive) = couplings
            .values()
            .iter()
            .map(|&k| {
                let sk = params.coupling_scale * k;
                (base - self_term * sk, delay * sk)
            })
            .unzip();
        Ok(Self { gain, drive })
    }
}

impl VectorField for MeanFieldSystem {
    fn dim(&self) -> usize {
        self.gain.len()
    }

    fn eval(&self, z: &[C64], out: &mut [C64]) {
        let n = self.gain.len();
        let mean = z.iter().fold(C64::new(0.0, 0.0), |acc, &w| acc + w) / n as f64;
        for (((o, &w), &g), &c) in out.iter_mut().zip(z).zip(&self.gain).zip(&self.drive) {
            let g = C64::new(g.re - w.norm_sqr(), g.im);
            *o = g * w + c * mean;
        }
    }
}

/// Precomputed full-network right-hand side; one evaluation costs O(N + nnz).
#[derive(Clone, Debug)]
pub struct NetworkSystem<'a> {
    graph: &'a NetworkGraph,
    gain: Vec<C64>,
    drive: C64,
}

impl<'a> NetworkSystem<'a> {
    pub fn new(params: &ModelParams, graph: &'a NetworkGraph) -> Result<Self> {
        params.validate()?;
        check_len("network", params.n, graph.n())?;
        let n = graph.n() as f64;
        let scale = params.coupling_scale / n;
        let self_term = C64::from_polar(params.d0, -params.alpha);
        let base = C64::new(params.lambda, params.omega);
        let gain = (0..graph.n())
            .map(|j| base - self_term * (scale * graph.degree(j) as f64))
            .collect();
        Ok(Self {
            graph,
            gain,
            drive: C64::from_polar(scale, -params.beta),
        })
    }
}

impl VectorField for NetworkSystem<'_> {
    fn dim(&self) -> usize {
        self.gain.len()
    }

    fn eval(&self, z: &[C64], out: &mut [C64]) {
        for (j, (o, &g)) in out.iter_mut().zip(&self.gain).enumerate() {
            let w = z[j];
            let local = self
                .graph
                .neighbors(j)
                .iter()
                .fold(C64::new(0.0, 0.0), |acc, &k| acc + z[k]);
            let g = C64::new(g.re - w.norm_sqr(), g.im);
            *o = g * w + self.drive * local;
        }
    }
}

/// Mean-field derivative for one state.
pub fn mean_field_rhs(
    state: &EnsembleState,
    params: &ModelParams,
    couplings: &CouplingSet,
) -> Result<Vec<C64>> {
    check_len("couplings", state.len(), couplings.len())?;
    check_len("state", params.n, state.len())?;
    let system = MeanFieldSystem::new(params, couplings)?;
    let mut out = vec![C64::new(0.0, 0.0); state.len()];
    system.eval(&state.z, &mut out);
    Ok(out)
}

/// Polar-coordinate derivatives `(dθ/dt, dr/dt)` of the mean-field model,
/// written term by term from the pairwise sums. O(N²); for checks only.
pub fn polar_rhs(
    state: &EnsembleState,
    params: &ModelParams,
    couplings: &CouplingSet,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len("couplings", state.len(), couplings.len())?;
    check_len("state", params.n, state.len())?;
    params.validate()?;
    let r = state.amplitudes();
    let theta = state.phases();
    if let Some((index, &amplitude)) = r.iter().enumerate().find(|(_, &r)| r <= R_FLOOR) {
        return Err(Error::PolarSingularity { index, amplitude });
    }
    let n = state.len();
    let nf = n as f64;
    let (sin_a, cos_a) = params.alpha.sin_cos();
    let mut dtheta = Vec::with_capacity(n);
    let mut dr = Vec::with_capacity(n);
    for j in 0..n {
        let pref = params.coupling_scale * couplings.values()[j] / nf;
        let mut phase_sum = 0.0;
        let mut amp_sum = 0.0;
        for k in 0..n {
            let x = theta[k] - theta[j] - params.beta;
            phase_sum += r[k] / r[j] * x.sin() + params.d0 * sin_a;
            amp_sum += r[k] * x.cos() - r[j] * params.d0 * cos_a;
        }
        dtheta.push(params.omega + pref * phase_sum);
        dr.push((params.lambda - r[j] * r[j]) * r[j] + pref * amp_sum);
    }
    Ok((dtheta, dr))
}

/// Full-network derivative for one state.
pub fn full_network_rhs(
    state: &EnsembleState,
    params: &ModelParams,
    network: &NetworkGraph,
) -> Result<Vec<C64>> {
    check_len("state", network.n(), state.len())?;
    let system = NetworkSystem::new(params, network)?;
    let mut out = vec![C64::new(0.0, 0.0); state.len()];
    system.eval(&state.z, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize) -> ModelParams {
        ModelParams {
            n,
            ..ModelParams::default()
        }
    }

    fn random_state(n: usize, seed: u64) -> EnsembleState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = (0..n)
            .map(|_| C64::from_polar(rng.random_range(0.1..2.0), rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        EnsembleState::new(z, 0.0)
    }

    #[test]
    fn single_oscillator_on_limit_cycle() {
        let p = params(1);
        let k = CouplingSet::new(vec![0.37]).unwrap();
        let state = EnsembleState::new(vec![C64::new(1.0, 0.0)], 0.0);
        let d = mean_field_rhs(&state, &p, &k).unwrap();
        assert!((d[0] - C64::new(0.0, PI)).norm() < 1e-15);
    }

    #[test]
    fn origin_is_fixed() {
        let p = params(4).with_shape(0.3, 0.2, 1.5);
        let k = CouplingSet::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let state = EnsembleState::new(vec![C64::new(0.0, 0.0); 4], 0.0);
        let d = mean_field_rhs(&state, &p, &k).unwrap();
        assert!(d.iter().all(|d| d.norm() == 0.0));
    }

    #[test]
    fn cartesian_matches_polar() {
        let p = ModelParams {
            n: 3,
            coupling_scale: 2.0,
            ..params(3).with_shape(0.7, 0.4, -1.3)
        };
        let k = CouplingSet::new(vec![0.3, 0.05, 0.9]).unwrap();
        for seed in 0..20 {
            let state = random_state(3, seed);
            let d = mean_field_rhs(&state, &p, &k).unwrap();
            let (dth, dr) = polar_rhs(&state, &p, &k).unwrap();
            for j in 0..3 {
                let (r, th) = state.z[j].to_polar();
                // ż = (ṙ + i r θ̇) e^{iθ}
                let expected = C64::new(dr[j], r * dth[j]) * C64::from_polar(1.0, th);
                let scale = expected.norm().max(1.0);
                assert!((d[j] - expected).norm() / scale < 1e-12, "seed {seed} osc {j}");
            }
        }
    }

    #[test]
    fn polar_in_phase_homogeneous() {
        let n = 5;
        let r = 0.8;
        let state = EnsembleState::new(vec![C64::from_polar(r, 0.4); n], 0.0);
        let k = CouplingSet::homogeneous(0.02, n).unwrap();
        let (dth, dr) = polar_rhs(&state, &params(n), &k).unwrap();
        for j in 0..n {
            assert!((dth[j] - PI).abs() < 1e-14);
            assert!((dr[j] - (1.0 - r * r) * r).abs() < 1e-14);
        }
        // α = π/2: the self term only shifts frequency, the source term adds S K r.
        let p = params(n).with_shape(0.5 * PI, 0.0, 1.0);
        let (_, dr) = polar_rhs(&state, &p, &k).unwrap();
        for v in dr {
            assert!((v - ((1.0 - r * r) * r + 0.02 * r)).abs() < 1e-14);
        }
    }

    #[test]
    fn polar_rejects_zero_amplitude() {
        let state = EnsembleState::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 0.0);
        let k = CouplingSet::homogeneous(0.1, 2).unwrap();
        let err = polar_rhs(&state, &params(2), &k).unwrap_err();
        assert!(matches!(err, Error::PolarSingularity { index: 1, .. }));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let state = random_state(3, 1);
        let k = CouplingSet::homogeneous(0.1, 4).unwrap();
        assert!(matches!(
            mean_field_rhs(&state, &params(3), &k),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(full_network_rhs(&state, &params(3), &NetworkGraph::empty(4)).is_err());
    }

    #[test]
    fn complete_graph_close_to_mean_field() {
        let n = 200;
        let p = params(n).with_shape(0.6, 0.3, 1.2);
        let state = random_state(n, 9);
        let graph = NetworkGraph::complete(n);
        let full = full_network_rhs(&state, &p, &graph).unwrap();
        let k = CouplingSet::homogeneous((n - 1) as f64 / n as f64, n).unwrap();
        let mf = mean_field_rhs(&state, &p, &k).unwrap();
        let delay = C64::from_polar(1.0, -p.beta);
        let self_term = C64::from_polar(p.d0, -p.alpha);
        let total: C64 = state.z.iter().sum();
        for j in 0..n {
            // Σ_k A_jk H_jk − (k_j / N) Σ_k H_jk, scaled by S / N.
            let h = |k: usize| state.z[k] * delay - state.z[j] * self_term;
            let exact: C64 = (0..n).filter(|&k| k != j).map(h).sum();
            let reduced = (total * delay - state.z[j] * self_term * n as f64) * ((n - 1) as f64 / n as f64);
            let bound = ((exact - reduced) / n as f64).norm();
            assert!((full[j] - mf[j]).norm() <= bound * (1.0 + 1e-9) + 1e-13);
            assert!(bound < 5.0 / n as f64);
        }
    }

    #[test]
    fn empty_graph_is_uncoupled() {
        let n = 6;
        let p = params(n).with_shape(1.0, 0.5, 2.0);
        let state = random_state(n, 3);
        let d = full_network_rhs(&state, &p, &NetworkGraph::empty(n)).unwrap();
        for (dz, z) in d.iter().zip(&state.z) {
            let expected = C64::new(p.lambda - z.norm_sqr(), p.omega) * z;
            assert!((dz - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn single_edge_is_local() {
        let n = 3;
        let p = params(n).with_shape(0.2, 0.1, 1.0);
        let state = random_state(n, 4);
        let g = NetworkGraph::from_undirected_edges(n, &[(0, 1)]).unwrap();
        let d = full_network_rhs(&state, &p, &g).unwrap();
        let z = state.z[2];
        let uncoupled = C64::new(p.lambda - z.norm_sqr(), p.omega) * z;
        assert_eq!(d[2], uncoupled);
        let d0 = full_network_rhs(&state, &p, &NetworkGraph::empty(n)).unwrap();
        assert_ne!(d[0], d0[0]);
    }

    #[test]
    fn deterministic() {
        let n = 50;
        let p = params(n).with_shape(0.9, 0.4, 0.7);
        let k = CouplingSet::new((0..n).map(|j| 0.01 + j as f64 * 1e-3).collect()).unwrap();
        let state = random_state(n, 11);
        let a = mean_field_rhs(&state, &p, &k).unwrap();
        let b = mean_field_rhs(&state, &p, &k).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    #[test]
    fn coupling_set_stats() {
        let k = CouplingSet::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(k.k_min(), 1.0);
        assert_eq!(k.k_max(), 4.0);
        assert_eq!(k.k_mean(), 2.5);
        assert!((k.sigma_k() - 1.25f64.sqrt()).abs() < 1e-15);
        assert!(CouplingSet::new(vec![1.0, 0.0]).is_err());
        assert!(CouplingSet::new(vec![]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().validate().is_ok());
        assert!(params(3).with_shape(PI, 0.0, 1.0).validate().is_err());
        assert!(params(3).with_shape(0.0, PI / 2.0, 1.0).validate().is_err());
        assert!(ModelParams { lambda: 0.0, ..params(3) }.validate().is_err());
        assert!(ModelParams { n: 0, ..params(3) }.validate().is_err());
    }

    #[test]
    fn graph_rejects_self_loops() {
        assert!(NetworkGraph::from_in_neighbors(vec![vec![0]]).is_err());
        assert!(NetworkGraph::from_in_neighbors(vec![vec![1, 1], vec![0]]).is_err());
        let g = NetworkGraph::from_undirected_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        assert!(g.is_symmetric());
    }
}
