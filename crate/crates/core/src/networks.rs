//! Coupling-set sampling, degree-sequence graphs and adjacency loading.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CouplingSet, NetworkGraph};

/// K_max / K_min used when power-law bounds are not supplied.
pub const POWERLAW_BOUND_RATIO: f64 = 20.0;
const MAX_RESTARTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Gaussian,
    Powerlaw,
    File,
}

/// How to obtain a coupling set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    pub mean: f64,
    pub sd: f64,
    pub gamma0: f64,
    pub k_bounds: Option<(f64, f64)>,
    pub path: Option<std::path::PathBuf>,
    pub seed: u64,
}

impl Default for DistributionSpec {
    fn default() -> Self {
        Self {
            kind: DistributionKind::Gaussian,
            mean: 0.02,
            sd: 0.0045,
            gamma0: 2.0,
            k_bounds: None,
            path: None,
            seed: 0,
        }
    }
}

impl DistributionSpec {
    pub fn gaussian(mean: f64, sd: f64, seed: u64) -> Self {
        Self {
            kind: DistributionKind::Gaussian,
            mean,
            sd,
            seed,
            ..Self::default()
        }
    }

    pub fn powerlaw(mean: f64, gamma0: f64, seed: u64) -> Self {
        Self {
            kind: DistributionKind::Powerlaw,
            mean,
            gamma0,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DistributionKind::Gaussian => {
                if !(self.mean > 0.0) {
                    return Err(Error::param("mean", format!("{} must be > 0", self.mean)));
                }
                if !(self.sd > 0.0) {
                    return Err(Error::param("sd", format!("{} must be > 0", self.sd)));
                }
            }
            DistributionKind::Powerlaw => {
                if !(self.gamma0 > 1.0) {
                    return Err(Error::param("gamma0", format!("{} must be > 1", self.gamma0)));
                }
                if let Some((a, b)) = self.k_bounds {
                    if !(a > 0.0 && b > a && b.is_finite()) {
                        return Err(Error::param("k_bounds", format!("[{a}, {b}] is not a finite positive interval")));
                    }
                } else if !(self.mean > 0.0) {
                    return Err(Error::param("mean", format!("{} must be > 0", self.mean)));
                }
            }
            DistributionKind::File => {
                if self.path.is_none() {
                    return Err(Error::param("path", "file distribution needs a path"));
                }
            }
        }
        Ok(())
    }
}

/// Builds the coupling set described by `spec`.
pub fn sample_couplings(spec: &DistributionSpec, n: usize) -> Result<CouplingSet> {
    match spec.kind {
        DistributionKind::Gaussian => sample_gaussian_couplings(spec, n),
        DistributionKind::Powerlaw => sample_powerlaw_couplings(spec, n),
        DistributionKind::File => load_couplings(spec.path.as_ref().expect("validated")),
    }
}

fn positive_normal(rng: &mut ChaCha8Rng, normal: &Normal<f64>) -> f64 {
    loop {
        let x = normal.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

/// `n` Gaussian draws, redrawing non-positive ones.
pub fn sample_gaussian_couplings(spec: &DistributionSpec, n: usize) -> Result<CouplingSet> {
    if spec.kind != DistributionKind::Gaussian {
        return Err(Error::param("kind", "expected a gaussian spec"));
    }
    spec.validate()?;
    let normal = Normal::new(spec.mean, spec.sd).map_err(|e| Error::param("sd", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    CouplingSet::new((0..n).map(|_| positive_normal(&mut rng, &normal)).collect())
}

/// Mean of the density ∝ x^{−γ} truncated to [a, b].
pub fn truncated_powerlaw_mean(gamma: f64, a: f64, b: f64) -> f64 {
    let e1 = 1.0 - gamma;
    let e2 = 2.0 - gamma;
    let norm = if e1.abs() < 1e-12 { (b / a).ln() } else { (b.powf(e1) - a.powf(e1)) / e1 };
    let first = if e2.abs() < 1e-12 { (b / a).ln() } else { (b.powf(e2) - a.powf(e2)) / e2 };
    first / norm
}

/// CDF of the density ∝ x^{−γ} truncated to [a, b].
pub fn truncated_powerlaw_cdf(gamma: f64, a: f64, b: f64, x: f64) -> f64 {
    if x <= a {
        return 0.0;
    }
    if x >= b {
        return 1.0;
    }
    let e = 1.0 - gamma;
    if e.abs() < 1e-12 {
        (x / a).ln() / (b / a).ln()
    } else {
        (x.powf(e) - a.powf(e)) / (b.powf(e) - a.powf(e))
    }
}

fn truncated_powerlaw_quantile(gamma: f64, a: f64, b: f64, u: f64) -> f64 {
    let e = 1.0 - gamma;
    if e.abs() < 1e-12 {
        a * (b / a).powf(u)
    } else {
        (a.powf(e) + u * (b.powf(e) - a.powf(e))).powf(1.0 / e)
    }
}

/// Truncation bounds used for a power-law spec. Without explicit bounds,
/// `K_max = 20 K_min` and `K_min` is chosen so the truncated mean equals
/// `spec.mean`.
pub fn powerlaw_bounds(spec: &DistributionSpec) -> Result<(f64, f64)> {
    if let Some((a, b)) = spec.k_bounds {
        if spec.mean > 0.0 && !(a < spec.mean && spec.mean < b) {
            return Err(Error::Config(format!(
                "power-law mean {} is not inside the bounds [{a}, {b}]",
                spec.mean
            )));
        }
        return Ok((a, b));
    }
    // The mean of a truncated power law scales linearly when both bounds
    // scale together, so K_min follows from the unit-interval mean.
    let unit = truncated_powerlaw_mean(spec.gamma0, 1.0, POWERLAW_BOUND_RATIO);
    let a = spec.mean / unit;
    Ok((a, a * POWERLAW_BOUND_RATIO))
}

/// `n` inverse-CDF draws from the truncated power law.
pub fn sample_powerlaw_couplings(spec: &DistributionSpec, n: usize) -> Result<CouplingSet> {
    if spec.kind != DistributionKind::Powerlaw {
        return Err(Error::param("kind", "expected a powerlaw spec"));
    }
    spec.validate()?;
    let (a, b) = powerlaw_bounds(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    CouplingSet::new(
        (0..n)
            .map(|_| truncated_powerlaw_quantile(spec.gamma0, a, b, rng.random::<f64>()))
            .collect(),
    )
}

/// Integer degrees from positive Gaussian draws, rounded and clamped to
/// `[round(K_min N), round(K_max N)]` of the Gaussian coupling set.
pub fn gaussian_degrees(spec: &DistributionSpec, n: usize) -> Result<Vec<usize>> {
    let couplings = sample_gaussian_couplings(spec, n)?;
    let nf = n as f64;
    let lo = ((couplings.k_min() * nf).round() as usize).max(1);
    let hi = ((couplings.k_max() * nf).round() as usize).min(n.saturating_sub(1));
    Ok(degrees_from_couplings(&couplings, lo, hi))
}

/// `round(K_j N)` clamped to `[lo, hi]`.
pub fn degrees_from_couplings(couplings: &CouplingSet, lo: usize, hi: usize) -> Vec<usize> {
    let nf = couplings.len() as f64;
    couplings
        .values()
        .iter()
        .map(|k| ((k * nf).round() as usize).clamp(lo, hi))
        .collect()
}

/// Erdős–Gallai test for a simple undirected graph.
pub fn is_graphical(degrees: &[usize]) -> bool {
    let n = degrees.len();
    let mut d: Vec<usize> = degrees.to_vec();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let total: usize = d.iter().sum();
    if total % 2 == 1 || d.first().is_some_and(|&m| m >= n) {
        return false;
    }
    let mut lhs = 0usize;
    for k in 1..=n {
        lhs += d[k - 1];
        let rhs = k * (k - 1) + d[k..].iter().map(|&x| x.min(k)).sum::<usize>();
        if lhs > rhs {
            return false;
        }
    }
    true
}

fn describe_sequence(degrees: &[usize]) -> String {
    if degrees.len() <= 12 {
        format!("{degrees:?}")
    } else {
        let sum: usize = degrees.iter().sum();
        format!(
            "[{}, ... ] (N = {}, sum = {sum}, max = {})",
            degrees[..8].iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", "),
            degrees.len(),
            degrees.iter().max().unwrap_or(&0)
        )
    }
}

struct EdgeSet {
    adj: Vec<HashSet<usize>>,
}

impl EdgeSet {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![HashSet::new(); n],
        }
    }

    fn can_add(&self, u: usize, v: usize) -> bool {
        u != v && !self.adj[u].contains(&v)
    }

    fn add(&mut self, u: usize, v: usize) {
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    fn remove(&mut self, u: usize, v: usize) {
        self.adj[u].remove(&v);
        self.adj[v].remove(&u);
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        e.sort_unstable();
        e
    }
}

/// One randomized stub-matching pass. Each stub is paired with a random
/// remaining stub, skipping partners that would form a loop or multi-edge.
/// Returns the edges and the stubs left unmatched.
fn stub_matching(degrees: &[usize], rng: &mut ChaCha8Rng) -> (EdgeSet, Vec<usize>) {
    let mut stubs: Vec<usize> = degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect();
    stubs.shuffle(rng);
    let mut edges = EdgeSet::new(degrees.len());
    let mut leftover = Vec::new();
    while let Some(u) = stubs.pop() {
        let mut matched = false;
        for _ in 0..stubs.len().min(50) {
            let i = rng.random_range(0..stubs.len());
            let v = stubs[i];
            if edges.can_add(u, v) {
                stubs.swap_remove(i);
                edges.add(u, v);
                matched = true;
                break;
            }
        }
        if !matched {
            leftover.push(u);
        }
    }
    (edges, leftover)
}

/// Places the leftover stubs by double-edge swaps: for a pending pair (u, v)
/// a random edge (x, y) is replaced with (u, x) and (v, y).
fn repair(edges: &mut EdgeSet, mut leftover: Vec<usize>, rng: &mut ChaCha8Rng) -> bool {
    let n = edges.adj.len();
    let mut budget = 1000 * (leftover.len() + 1) * n.max(1);
    while leftover.len() >= 2 {
        let u = leftover.pop().expect("len >= 2");
        let v = leftover.pop().expect("len >= 2");
        if edges.can_add(u, v) {
            edges.add(u, v);
            continue;
        }
        let mut done = false;
        while budget > 0 {
            budget -= 1;
            let x = rng.random_range(0..n);
            if edges.adj[x].is_empty() {
                continue;
            }
            let nbrs: Vec<usize> = edges.adj[x].iter().copied().collect();
            let y = nbrs[rng.random_range(0..nbrs.len())];
            let (x, y) = if rng.random::<bool>() { (x, y) } else { (y, x) };
            if x == u || x == v || y == u || y == v {
                continue;
            }
            if edges.can_add(u, x) && edges.can_add(v, y) {
                edges.remove(x, y);
                edges.add(u, x);
                edges.add(v, y);
                done = true;
                break;
            }
        }
        if !done {
            return false;
        }
    }
    leftover.is_empty()
}

/// Random simple undirected graph realizing `degrees` exactly.
///
/// An odd degree sum is made even by incrementing one random node first.
pub fn generate_graph_from_degrees(degrees: &[usize], seed: u64) -> Result<NetworkGraph> {
    let n = degrees.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degrees = degrees.to_vec();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let candidates: Vec<usize> = (0..n).filter(|&j| degrees[j] + 1 < n).collect();
        let Some(&j) = candidates.as_slice().choose(&mut rng) else {
            return Err(Error::GraphGeneration {
                sequence: describe_sequence(&degrees),
                reason: "odd degree sum and no node can be padded".into(),
            });
        };
        warn!("odd degree sum; padding node {j} from {} to {}", degrees[j], degrees[j] + 1);
        degrees[j] += 1;
    }
    if let Some(&m) = degrees.iter().max() {
        if m >= n {
            return Err(Error::GraphGeneration {
                sequence: describe_sequence(&degrees),
                reason: format!("max degree {m} must be below N = {n}"),
            });
        }
    }
    if !is_graphical(&degrees) {
        return Err(Error::GraphGeneration {
            sequence: describe_sequence(&degrees),
            reason: "sequence is not graphical (Erdős–Gallai)".into(),
        });
    }

    let mut best: Option<(EdgeSet, Vec<usize>)> = None;
    for _ in 0..MAX_RESTARTS {
        let (edges, leftover) = stub_matching(&degrees, &mut rng);
        if leftover.is_empty() {
            return NetworkGraph::from_undirected_edges(n, &edges.edges());
        }
        if best.as_ref().is_none_or(|b| leftover.len() < b.1.len()) {
            best = Some((edges, leftover));
        }
    }
    let (mut edges, leftover) = best.expect("at least one attempt");
    if repair(&mut edges, leftover, &mut rng) {
        return NetworkGraph::from_undirected_edges(n, &edges.edges());
    }
    Err(Error::GraphGeneration {
        sequence: describe_sequence(&degrees),
        reason: format!("stub matching failed after {MAX_RESTARTS} restarts and edge-swap repair"),
    })
}

/// `K_j = k_j / N`; every node must have at least one neighbour.
pub fn degrees_to_couplings(network: &NetworkGraph) -> Result<CouplingSet> {
    let n = network.n();
    if let Some(j) = (0..n).find(|&j| network.degree(j) == 0) {
        return Err(Error::param("network", format!("node {j} has zero degree; remove it first")));
    }
    CouplingSet::new((0..n).map(|j| network.degree(j) as f64 / n as f64).collect())
}

/// Result of reading an adjacency file.
#[derive(Clone, Debug)]
pub struct LoadedNetwork {
    pub graph: NetworkGraph,
    /// Original indices of the retained nodes, in their new order.
    pub kept: Vec<usize>,
    pub original_n: usize,
}

fn parse_err(path: &Path, row: usize, column: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        reason: reason.into(),
    }
}

/// Reads a dense 0/1 CSV matrix or a `src,dst` edge list (detected by its
/// header). Entry `(i, j)` of the file means node i drives node j, so a
/// column sum is an in-degree. Diagonal entries are dropped; nodes with zero
/// in-degree are removed repeatedly until none remain.
pub fn load_adjacency(path: &Path, symmetrize: bool) -> Result<LoadedNetwork> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if rows.is_empty() {
        return Err(parse_err(path, 0, 0, "file is empty"));
    }
    let header: Vec<String> = rows[0].1.split(',').map(|s| s.trim().to_ascii_lowercase()).collect();
    let is_edge_list = header == ["src", "dst"];

    // in_lists[j] = sources that drive j
    let (n, mut pairs) = if is_edge_list {
        let mut pairs = Vec::new();
        let mut n = 0;
        for &(line, l) in &rows[1..] {
            let cols: Vec<&str> = l.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(parse_err(path, line, cols.len(), "edge list rows need exactly two columns"));
            }
            let mut ends = [0usize; 2];
            for (c, s) in cols.iter().enumerate() {
                ends[c] = s
                    .parse()
                    .map_err(|_| parse_err(path, line, c + 1, format!("`{s}` is not a node index")))?;
            }
            n = n.max(ends[0] + 1).max(ends[1] + 1);
            pairs.push((ends[0], ends[1], line));
        }
        (n, pairs)
    } else {
        let n = rows.len();
        let mut pairs = Vec::new();
        for (i, &(line, l)) in rows.iter().enumerate() {
            let cols: Vec<&str> = l.split(',').map(str::trim).collect();
            if cols.len() != n {
                return Err(parse_err(
                    path,
                    line,
                    cols.len(),
                    format!("matrix is not square: row has {} entries, expected {n}", cols.len()),
                ));
            }
            for (j, s) in cols.iter().enumerate() {
                match s.parse::<f64>() {
                    Ok(0.0) => {}
                    Ok(1.0) => pairs.push((i, j, line)),
                    _ => return Err(parse_err(path, line, j + 1, format!("entry `{s}` is not 0 or 1"))),
                }
            }
        }
        (n, pairs)
    };

    let loops = pairs.iter().filter(|p| p.0 == p.1).count();
    if loops > 0 {
        warn!("{}: dropping {loops} self-loop entries", path.display());
        pairs.retain(|p| p.0 != p.1);
    }
    let mut in_sets = vec![HashSet::new(); n];
    for &(src, dst, _) in &pairs {
        in_sets[dst].insert(src);
        if symmetrize {
            in_sets[src].insert(dst);
        }
    }

    let mut alive = vec![true; n];
    loop {
        let dead: Vec<usize> = (0..n)
            .filter(|&j| alive[j] && !in_sets[j].iter().any(|&k| alive[k]))
            .collect();
        if dead.is_empty() {
            break;
        }
        for j in dead {
            alive[j] = false;
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&j| alive[j]).collect();
    let mut new_index = vec![usize::MAX; n];
    for (new, &old) in kept.iter().enumerate() {
        new_index[old] = new;
    }
    let lists = kept
        .iter()
        .map(|&j| {
            in_sets[j]
                .iter()
                .filter(|&&k| alive[k])
                .map(|&k| new_index[k])
                .collect()
        })
        .collect();
    let graph = NetworkGraph::from_in_neighbors(lists)?;
    if kept.len() < n {
        log::info!("{}: removed {} zero in-degree nodes, N = {}", path.display(), n - kept.len(), kept.len());
    }
    Ok(LoadedNetwork {
        graph,
        kept,
        original_n: n,
    })
}

/// One K per line.
pub fn load_couplings(path: &Path) -> Result<CouplingSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') || (values.is_empty() && l.eq_ignore_ascii_case("k")) {
            continue;
        }
        let v: f64 = l
            .parse()
            .map_err(|_| parse_err(path, i + 1, 1, format!("`{l}` is not a number")))?;
        values.push(v);
    }
    CouplingSet::new(values)
}

pub fn write_couplings(path: &Path, couplings: &CouplingSet) -> Result<()> {
    let mut out = String::with_capacity(couplings.len() * 24);
    for k in couplings.values() {
        out.push_str(&format!("{k}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Edge list with a `src,dst` header and both directions of every edge.
pub fn write_edge_list(path: &Path, graph: &NetworkGraph) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::from("src,dst\n");
    for (src, dst) in graph.directed_edges() {
        out.push_str(&format!("{src},{dst}\n"));
    }
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn gaussian_paper_statistics() {
        let k = sample_gaussian_couplings(&DistributionSpec::gaussian(0.02, 0.0045, 7), 1000).unwrap();
        assert!((0.019..=0.021).contains(&k.k_mean()), "{}", k.k_mean());
        assert!((0.0040..=0.0048).contains(&k.sigma_k()), "{}", k.sigma_k());
        let again = sample_gaussian_couplings(&DistributionSpec::gaussian(0.02, 0.0045, 7), 1000).unwrap();
        assert_eq!(k, again);
    }

    #[test]
    fn gaussian_degenerate() {
        let k = sample_gaussian_couplings(&DistributionSpec::gaussian(0.02, 1e-12, 1), 100).unwrap();
        assert!(k.values().iter().all(|v| (v - 0.02).abs() < 1e-10));
    }

    #[test]
    fn powerlaw_bounds_and_spread() {
        let spec = DistributionSpec::powerlaw(0.02, 2.0, 3);
        let (a, b) = powerlaw_bounds(&spec).unwrap();
        assert!((truncated_powerlaw_mean(2.0, a, b) - 0.02).abs() < 1e-15);
        assert!((b / a - 20.0).abs() < 1e-12);
        assert!(a > 3e-3 && a < 1.2e-2 && b > 6e-2 && b < 0.24);
        let k = sample_powerlaw_couplings(&spec, 1000).unwrap();
        let ratio = k.sigma_k() / k.k_mean();
        assert!((0.7..=1.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn powerlaw_ks_statistic() {
        let spec = DistributionSpec::powerlaw(0.02, 2.0, 11);
        let (a, b) = powerlaw_bounds(&spec).unwrap();
        let k = sample_powerlaw_couplings(&spec, 1000).unwrap();
        let mut v = k.values().to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let d = v
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = truncated_powerlaw_cdf(2.0, a, b, x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.05, "KS = {d}");
    }

    #[test]
    fn powerlaw_infeasible_mean() {
        let spec = DistributionSpec {
            k_bounds: Some((0.03, 0.1)),
            ..DistributionSpec::powerlaw(0.02, 2.0, 0)
        };
        assert!(matches!(sample_powerlaw_couplings(&spec, 10), Err(Error::Config(_))));
    }

    #[test]
    fn forced_graphs() {
        let g = generate_graph_from_degrees(&[1, 1], 0).unwrap();
        assert_eq!(g.directed_edges(), vec![(0, 1), (1, 0)]);
        let g = generate_graph_from_degrees(&[2, 2, 2], 0).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && g.has_edge(0, 2));
    }

    #[test]
    fn non_graphical_rejected() {
        let err = generate_graph_from_degrees(&[3, 3, 1, 1], 0).unwrap_err();
        assert!(matches!(err, Error::GraphGeneration { .. }));
        assert!(err.to_string().contains("[3, 3, 1, 1]"));
        assert!(!is_graphical(&[3, 3, 1, 1]));
        assert!(is_graphical(&[3, 3, 2, 2, 2]));
        assert!(generate_graph_from_degrees(&[2, 2], 0).is_err());
    }

    #[test]
    fn gaussian_degree_graph_exact() {
        let spec = DistributionSpec::gaussian(0.02, 0.0045, 5);
        let mut deg = degrees_from_couplings(&sample_gaussian_couplings(&spec, 1000).unwrap(), 8, 34);
        if deg.iter().sum::<usize>() % 2 == 1 {
            let j = deg.iter().position(|&d| d < 34).unwrap();
            deg[j] += 1;
        }
        let g = generate_graph_from_degrees(&deg, 1).unwrap();
        assert_eq!(g.degrees(), deg);
        assert!(g.is_symmetric());
        assert!((0..g.n()).all(|j| !g.has_edge(j, j)));
        assert!(deg.iter().all(|&d| (8..=34).contains(&d)));
    }

    #[test]
    fn odd_sum_padded() {
        let g = generate_graph_from_degrees(&[1, 1, 1, 2, 2], 4).unwrap();
        let extra: usize = g.degrees().iter().sum::<usize>() - 7;
        assert_eq!(extra, 1);
    }

    #[test]
    fn couplings_from_degrees() {
        let g = NetworkGraph::from_in_neighbors(vec![vec![1, 2], vec![0, 2, 3], vec![0, 1], vec![1]]).unwrap();
        let k = degrees_to_couplings(&g).unwrap();
        assert_eq!(k.values(), &[0.5, 0.75, 0.5, 0.25]);
        let k = degrees_to_couplings(&NetworkGraph::complete(5)).unwrap();
        assert!(k.values().iter().all(|&v| v == 0.8));
        assert!(degrees_to_couplings(&NetworkGraph::empty(3)).is_err());
    }

    #[test]
    fn dense_adjacency() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "0,1,1\n1,0,1\n1,1,0\n");
        let net = load_adjacency(&p, false).unwrap();
        assert_eq!(net.graph.degrees(), vec![2, 2, 2]);

        let p = write(&dir, "b.csv", "0,1,0\n1,0,0\n1,1,0\n");
        let net = load_adjacency(&p, false).unwrap();
        assert_eq!(net.graph.n(), 2);
        assert_eq!(net.kept, vec![0, 1]);
        assert_eq!(net.original_n, 3);
    }

    #[test]
    fn adjacency_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "0,1\n1,0,1\n");
        assert!(matches!(load_adjacency(&p, false), Err(Error::Parse { row: 2, .. })));
        let p = write(&dir, "b.csv", "0,1,0\n1,0,2\n0,1,0\n");
        match load_adjacency(&p, false) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn edge_list_and_symmetrize() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "e.csv", "src,dst\n0,1\n1,2\n2,0\n1,1\n");
        let net = load_adjacency(&p, false).unwrap();
        assert_eq!(net.graph.degrees(), vec![1, 1, 1]);
        assert!(!net.graph.is_symmetric());
        let net = load_adjacency(&p, true).unwrap();
        assert_eq!(net.graph.degrees(), vec![2, 2, 2]);
        assert!(net.graph.is_symmetric());
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate_graph_from_degrees(&[3, 2, 2, 2, 1], 2).unwrap();
        let p = dir.path().join("g.csv");
        write_edge_list(&p, &g).unwrap();
        let back = load_adjacency(&p, false).unwrap();
        assert_eq!(back.graph, g);
    }

    #[test]
    fn coupling_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let k = sample_gaussian_couplings(&DistributionSpec::gaussian(0.02, 0.0045, 1), 50).unwrap();
        let p = dir.path().join("k.csv");
        write_couplings(&p, &k).unwrap();
        assert_eq!(load_couplings(&p).unwrap(), k);
    }
}
