//! Inconsistency graphs of committed views and the cut-and-choose audit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use petgraph::algo::matching::maximum_matching;
use petgraph::graph::UnGraph;
use rand::RngCore;
use serde::Serialize;

use crate::bits::Bits;
use crate::error::{param, protocol, Error, Result};
use crate::extcom::{sc_drive_audit, sc_drive_openings, sc_drive_to_challenge, Framing, ScCommitter, ScReceiver, StrongParams};
use crate::harness::{count_trials, trial_rng, ExperimentConfig};
use crate::transport::transcript::Transcript;
use crate::vss::vss_bytes_consistent;

/// Largest graph whose minimum vertex cover is computed exactly.
pub const EXACT_COVER_MAX: usize = 30;

/// Largest graph for exact subset-miss probabilities.
pub const EXACT_MISS_MAX: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InconsistencyGraph {
    pub n: usize,
    /// Inconsistent pairs (i, j), i < j, 0-based.
    pub edges: Vec<(usize, usize)>,
    /// Minimum vertex cover size: equal bounds when exact, otherwise
    /// [matching, 2·matching].
    pub cover: (usize, usize),
    pub matching: usize,
}

impl InconsistencyGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut es = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return param(format!("edge ({a}, {b}) is not a pair of distinct vertices below {n}"));
            }
            es.push((a.min(b), a.max(b)));
        }
        es.sort_unstable();
        es.dedup();
        let matching = max_matching(n, &es);
        let cover = if n <= EXACT_COVER_MAX {
            let c = min_vertex_cover(&adjacency(n, &es));
            (c, c)
        } else {
            (matching, (2 * matching).min(n))
        };
        Ok(InconsistencyGraph { n, edges: es, cover, matching })
    }

    pub fn cover_exact(&self) -> Option<usize> {
        (self.cover.0 == self.cover.1).then_some(self.cover.0)
    }

    /// True iff no edge has both endpoints in `set`.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut inside = vec![false; self.n];
        for &v in set {
            inside[v] = true;
        }
        self.edges.iter().all(|&(a, b)| !(inside[a] && inside[b]))
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<u64> {
    let mut adj = vec![0u64; n];
    for &(a, b) in edges {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    adj
}

fn max_matching(n: usize, edges: &[(usize, usize)]) -> usize {
    let g: UnGraph<(), ()> = UnGraph::from_edges(edges.iter().map(|&(a, b)| (a as u32, b as u32)));
    let mut g = g;
    while g.node_count() < n {
        g.add_node(());
    }
    maximum_matching(&g).len()
}

/// Size of a greedy maximal matching among `alive`: a lower bound on any
/// cover of what remains.
fn greedy_matching(adj: &[u64], mut alive: u64) -> usize {
    let mut m = 0;
    while alive != 0 {
        let v = alive.trailing_zeros() as usize;
        alive &= !(1 << v);
        let nb = adj[v] & alive;
        if nb != 0 {
            alive &= !(1 << nb.trailing_zeros());
            m += 1;
        }
    }
    m
}

/// Exact minimum vertex cover by branch and bound: the vertex of largest
/// degree is either in the cover or all of its neighbours are.
fn min_vertex_cover(adj: &[u64]) -> usize {
    fn go(adj: &[u64], alive: u64, size: usize, best: &mut usize) {
        if size >= *best {
            return;
        }
        let mut pick = None;
        let mut max_deg = 0;
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (adj[v] & alive).count_ones();
            if d > max_deg {
                max_deg = d;
                pick = Some(v);
            }
        }
        let Some(v) = pick else {
            *best = size;
            return;
        };
        if size + greedy_matching(adj, alive) >= *best {
            return;
        }
        let nb = adj[v] & alive;
        go(adj, alive & !(1 << v), size + 1, best);
        go(adj, alive & !nb & !(1 << v), size + nb.count_ones() as usize, best);
    }
    let n = adj.len();
    let alive = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best = n;
    go(adj, alive, 0, &mut best);
    best
}

/// The graph whose edges are the pairs `consistent` rejects.
pub fn graph_analyze<V>(views: &[V], consistent: impl Fn(&V, &V) -> bool) -> InconsistencyGraph {
    let n = views.len();
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| !consistent(&views[a], &views[b])).collect();
    InconsistencyGraph::from_edges(n, &edges).expect("edges come from the vertex range")
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of size-t independent sets.
fn count_independent(adj: &[u64], t: usize) -> u128 {
    let n = adj.len();
    fn go(adj: &[u64], i: usize, need: usize, allowed: u64) -> u128 {
        if need == 0 {
            return 1;
        }
        let cand = if i >= 64 { 0 } else { allowed & (u64::MAX << i) };
        let avail = cand.count_ones() as usize;
        if avail < need {
            return 0;
        }
        let mut rest = cand;
        let mut free = true;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if adj[v] & cand != 0 {
                free = false;
                break;
            }
        }
        if free {
            return binomial(avail, need);
        }
        let v = cand.trailing_zeros() as usize;
        go(adj, v + 1, need, allowed) + go(adj, v + 1, need - 1, allowed & !adj[v])
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    go(adj, 0, t, all)
}

/// Probability that a uniform size-t subset contains no edge, exactly.
pub fn subset_miss_probability(graph: &InconsistencyGraph, t: usize) -> Result<BigRational> {
    let n = graph.n;
    if t > n {
        return param(format!("subset size {t} exceeds {n}"));
    }
    if n > EXACT_MISS_MAX {
        return Err(Error::Capability(format!("exact miss probability needs n ≤ {EXACT_MISS_MAX}")));
    }
    let hits = count_independent(&adjacency(n, &graph.edges), t);
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(binomial(n, t))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub n: usize,
    pub t: usize,
    pub trials: usize,
    pub accepts: usize,
    pub empirical: f64,
    pub exact: f64,
    pub exact_fraction: String,
    /// Binomial standard deviation of the empirical rate at the exact value.
    pub sigma: f64,
    pub within_3_sigma: bool,
    pub graph: InconsistencyGraph,
}

/// Strong commitments to the given view strings against an honest receiver.
/// The audit accepts iff the opened subset is independent in the views'
/// inconsistency graph, so the acceptance rate is compared with the exact
/// miss probability.
///
/// The commitments and their openings are run once; each trial then runs
/// the coin flip and the subset audit from a copy of that state with fresh
/// receiver randomness.
pub fn soundness_experiment(views: Vec<Bits>, params: &StrongParams, config: &ExperimentConfig) -> Result<SoundnessReport> {
    config.validate()?;
    let graph = graph_analyze(&views, |a, b| vss_bytes_consistent(a.as_bytes(), b.as_bytes()));
    let exact_q = subset_miss_probability(&graph, params.t)?;
    let exact = exact_q.to_f64().unwrap_or(f64::NAN);
    let mut rng = trial_rng(config.seed, u64::MAX);
    let mut cs = vec![ScCommitter::from_view_bits(views, params, &mut rng)?];
    let mut rs = vec![ScReceiver::new(params, &mut rng)];
    let mut off = Transcript::disabled();
    sc_drive_to_challenge(&mut cs, &mut rs, &mut off, Framing::Single)
        .and_then(|()| sc_drive_openings(&mut cs, &mut rs, &mut off, Framing::Single))
        .map_err(|o| Error::Protocol(format!("commitments were not accepted: {}", o.reason.unwrap_or_default())))?;
    let accepts = count_trials(config.seed, config.trials, |_, rng| {
        let (mut c, mut r) = (cs.clone(), rs.clone());
        r[0].reseed(rng.next_u64());
        Ok(sc_drive_audit(&mut c, &mut r, &mut Transcript::disabled(), Framing::Single).accept)
    })?;
    let trials = config.trials;
    let empirical = accepts as f64 / trials as f64;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    if !sigma.is_finite() {
        return protocol("miss probability is not a number");
    }
    // A deterministic audit (exact 0 or 1) must match exactly.
    let within_3_sigma = (empirical - exact).abs() <= 3.0 * sigma;
    Ok(SoundnessReport { n: params.n, t: params.t, trials, accepts, empirical, exact, exact_fraction: exact_q.to_string(), sigma, within_3_sigma, graph })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::suite::views_with_inconsistent_pairs;
    use crate::prg::PrgSpec;
    use proptest::prelude::*;

    fn brute_cover(n: usize, edges: &[(usize, usize)]) -> usize {
        (0u64..1 << n)
            .filter(|s| edges.iter().all(|&(a, b)| s >> a & 1 == 1 || s >> b & 1 == 1))
            .map(|s| s.count_ones() as usize)
            .min()
            .unwrap()
    }

    fn brute_miss(n: usize, t: usize, g: &InconsistencyGraph) -> (usize, usize) {
        let subsets: Vec<Vec<usize>> = (0u64..1 << n).filter(|s| s.count_ones() as usize == t).map(|s| (0..n).filter(|&i| s >> i & 1 == 1).collect()).collect();
        (subsets.iter().filter(|s| g.is_independent(s)).count(), subsets.len())
    }

    #[test]
    fn graph_examples() {
        let empty = graph_analyze(&[1, 1, 1, 1], |a, b| a == b);
        assert_eq!((empty.edges.len(), empty.cover, empty.matching), (0, (0, 0), 0));
        let star = InconsistencyGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!((star.cover_exact(), star.matching), (Some(1), 1));
        let pm = InconsistencyGraph::from_edges(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        assert_eq!((pm.cover_exact(), pm.matching), (Some(3), 3));
        assert!(InconsistencyGraph::from_edges(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn large_graphs_report_cover_bounds() {
        let edges: Vec<(usize, usize)> = (0..20).map(|i| (2 * i, 2 * i + 1)).collect();
        let g = InconsistencyGraph::from_edges(40, &edges).unwrap();
        assert_eq!((g.cover, g.matching), ((20, 40), 20));
        assert_eq!(g.cover_exact(), None);
    }

    #[test]
    fn miss_probability_examples() {
        let empty = InconsistencyGraph::from_edges(10, &[]).unwrap();
        assert_eq!(subset_miss_probability(&empty, 3).unwrap(), BigRational::from_integer(1.into()));
        let edge = InconsistencyGraph::from_edges(10, &[(2, 7)]).unwrap();
        let (good, all) = brute_miss(10, 3, &edge);
        assert_eq!(all, 120);
        let q = subset_miss_probability(&edge, 3).unwrap();
        assert_eq!(q, BigRational::new((good as i64).into(), 120.into()));
        assert_eq!(q, BigRational::new(14.into(), 15.into()));
    }

    #[test]
    fn matching_miss_probability_is_hypergeometric_and_monotone() {
        // m disjoint edges: choose j edges contributing one endpoint each
        // (2 ways), the rest from the n − 2m isolated vertices.
        let (n, m) = (30usize, 5usize);
        let edges: Vec<(usize, usize)> = (0..m).map(|i| (2 * i, 2 * i + 1)).collect();
        let g = InconsistencyGraph::from_edges(n, &edges).unwrap();
        let mut prev = 2.0;
        for t in [4usize, 6, 8, 10] {
            let count: u128 = (0..=m.min(t)).map(|j| binomial(m, j) * (1u128 << j) * binomial(n - 2 * m, t - j)).sum();
            let q = subset_miss_probability(&g, t).unwrap();
            assert_eq!(q, BigRational::new(BigInt::from(count), BigInt::from(binomial(n, t))));
            let f = q.to_f64().unwrap();
            assert!(f < prev);
            prev = f;
        }
    }

    proptest! {
        #[test]
        fn exact_cover_and_miss_agree_with_brute_force(n in 2usize..10, raw in proptest::collection::vec((0usize..10, 0usize..10), 0..14), t in 1usize..5) {
            let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
            let g = InconsistencyGraph::from_edges(n, &edges).unwrap();
            prop_assert_eq!(g.cover_exact(), Some(brute_cover(n, &g.edges)));
            prop_assert!(2 * g.matching >= g.cover.0 && g.matching <= g.cover.0);
            if t <= n {
                let (good, all) = brute_miss(n, t, &g);
                prop_assert_eq!(subset_miss_probability(&g, t).unwrap(), BigRational::new((good as i64).into(), (all as i64).into()));
            }
        }
    }

    #[test]
    fn corrupted_view_star_matches_exact_probability() {
        // View 3 corrupted against everyone, n = 10, t = 3: accept iff the
        // audit misses it, probability C(9,3)/C(10,3) = 0.7. The coin must be
        // long enough for the audit subset to be close to uniform.
        let params = StrongParams::with_options(10, 3, 2, 8, PrgSpec::toy(4).unwrap(), 64, 257).unwrap();
        let mut rng = trial_rng(9, 0);
        let pairs: Vec<(usize, usize)> = (0..10).filter(|&j| j != 2).map(|j| (2, j)).collect();
        let views = views_with_inconsistent_pairs(&Bits::zeros(8), &params, &pairs, &mut rng).unwrap();
        let cfg = ExperimentConfig::default().with_trials(2000).with_seed(3);
        let rep = soundness_experiment(views, &params, &cfg).unwrap();
        assert_eq!(rep.exact_fraction, "7/10");
        assert_eq!(rep.graph.cover_exact(), Some(1));
        assert!(rep.within_3_sigma, "{rep:?}");
    }
}
