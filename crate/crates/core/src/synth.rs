//! Synthetic network generators: the kernel-and-crown "spike" construction,
//! generative draws from the fitted blockmodel, and a power-law benchmark
//! generator with planted communities and a tunable mixing parameter.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::LabelVector;
use crate::model::{logit_inv, ModelParams};
use crate::random::RngHandle;

/// Spike-network specification: community 1 is a complete kernel `K_{n1}`
/// with an `n1` crown; community 2 is `K_{r*n1}` with an `r*n1` crown.
#[derive(Debug, Clone, Copy)]
pub struct SpikeSpec {
    pub n1: usize,
    pub r: usize,
}

impl SpikeSpec {
    pub fn new(n1: usize, r: usize) -> Result<Self> {
        if n1 < 3 {
            return Err(Error::invalid("spike requires n1 >= 3"));
        }
        if r < 1 {
            return Err(Error::invalid("spike requires r >= 1"));
        }
        Ok(SpikeSpec { n1, r })
    }

    pub fn total_nodes(&self) -> usize {
        2 * self.n1 + 2 * self.r * self.n1
    }
}

/// Deterministic spike network and its reference partition.
///
/// Layout: community-1 kernel, community-1 crown, community-2 kernel,
/// community-2 crown. Crown node `i` attaches only to kernel node `i` of its
/// community; kernel node `i` of community 1 connects to the `r` kernel nodes
/// `(i-1)r+1 ..= i*r` of community 2 (disjoint blocks).
pub fn gen_spike(spec: &SpikeSpec) -> (Graph, LabelVector) {
    let n1 = spec.n1;
    let r = spec.r;
    let k1 = 0..n1; // kernel 1
    let c1 = n1..2 * n1; // crown 1
    let k2_start = 2 * n1;
    let k2 = k2_start..k2_start + r * n1; // kernel 2
    let c2_start = k2_start + r * n1;
    let n = spec.total_nodes();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in k1.clone() {
        for j in i + 1..n1 {
            edges.push((i as u32, j as u32));
        }
    }
    for (kern, crown) in k1.clone().zip(c1) {
        edges.push((kern as u32, crown as u32));
    }
    for i in k2.clone() {
        for j in i + 1..k2_start + r * n1 {
            edges.push((i as u32, j as u32));
        }
    }
    for (offset, kern) in k2.enumerate() {
        edges.push((kern as u32, (c2_start + offset) as u32));
    }
    // between edges: kernel-1 node i to its disjoint block of r kernel-2 nodes
    for i in 0..n1 {
        for t in 0..r {
            edges.push((i as u32, (k2_start + i * r + t) as u32));
        }
    }
    let graph = Graph::from_edges(n, &edges).expect("spike construction is simple by design");
    let mut labels = vec![1u32; 2 * n1];
    labels.extend(std::iter::repeat(2).take(2 * r * n1));
    let reference = LabelVector::new(labels, 2).expect("two communities");
    (graph, reference)
}

/// Generative draw from the blockmodel: independent Bernoulli edges with
/// success probability `logit^{-1}(gamma_{sigma_i sigma_j} + eta_i + eta_j)`.
pub fn gen_sbm(sigma: &LabelVector, params: &ModelParams, rng: &mut RngHandle) -> Result<Graph> {
    let n = sigma.len();
    params.validate(sigma.k(), n)?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let s = params.gamma_between(sigma.label(i), sigma.label(j), sigma.k())
                + params.eta[i]
                + params.eta[j];
            if rng.random::<f64>() < logit_inv(s) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Benchmark-graph specification: power-law degrees (exponent `a`) and
/// community sizes (exponent `b`), mean degree `avg_degree`, and mixing
/// parameter `mu` (the fraction of each node's edges that cross communities).
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub min_community: usize,
    pub max_community: usize,
}

impl BenchmarkSpec {
    /// Defaults for the caps: `max_degree = n/4`, community sizes in `[5, n/2]`.
    pub fn new(n: usize, a: f64, b: f64, mu: f64, avg_degree: f64) -> Result<Self> {
        let spec = BenchmarkSpec {
            n,
            a,
            b,
            mu,
            avg_degree,
            max_degree: (n / 4).max(2),
            min_community: 5,
            max_community: (n / 2).max(5),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::invalid("mu must lie strictly between 0 and 1"));
        }
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(Error::invalid("power-law exponents must be positive"));
        }
        if !(self.avg_degree >= 1.0 && self.avg_degree < self.n as f64) {
            return Err(Error::invalid("avg_degree must lie in [1, n)"));
        }
        if self.min_community < 3 || self.min_community > self.max_community {
            return Err(Error::invalid("community size bounds are inconsistent"));
        }
        if self.max_degree < 2 {
            return Err(Error::invalid("max_degree must be at least 2"));
        }
        if self.n < 2 * self.min_community {
            return Err(Error::invalid("n too small for two communities"));
        }
        Ok(())
    }
}

/// Continuous truncated power law with density `~ x^{-exp}` on `[lo, hi]`.
fn trunc_power_law(exp: f64, lo: f64, hi: f64, rng: &mut RngHandle) -> f64 {
    let u: f64 = rng.random();
    if (exp - 1.0).abs() < 1e-12 {
        lo * (hi / lo).powf(u)
    } else {
        let one_m = 1.0 - exp;
        (lo.powf(one_m) + u * (hi.powf(one_m) - lo.powf(one_m))).powf(1.0 / one_m)
    }
}

/// Largest-remainder rounding of non-negative reals to integers whose total
/// is the rounded total, forced to the nearest even number.
fn round_to_even_total(values: &[f64]) -> Vec<usize> {
    let raw_total: f64 = values.iter().sum();
    let mut target = raw_total.round() as i64;
    if target % 2 != 0 {
        target += 1;
    }
    let mut floors: Vec<usize> = values.iter().map(|v| v.floor() as usize).collect();
    let floor_total: i64 = floors.iter().map(|&f| f as i64).sum();
    let mut remaining = (target - floor_total).max(0) as usize;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = values[i] - values[i].floor();
        let fj = values[j] - values[j].floor();
        fj.partial_cmp(&fi).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().cycle().take(values.len().max(remaining)) {
        if remaining == 0 {
            break;
        }
        floors[i] += 1;
        remaining -= 1;
    }
    floors
}

fn draw_community_sizes(spec: &BenchmarkSpec, rng: &mut RngHandle) -> Result<Vec<usize>> {
    'outer: for _ in 0..1000 {
        let mut sizes: Vec<usize> = Vec::new();
        let mut total = 0usize;
        loop {
            let s = trunc_power_law(
                spec.b,
                spec.min_community as f64,
                spec.max_community as f64,
                rng,
            )
            .round() as usize;
            let s = s.clamp(spec.min_community, spec.max_community);
            if total + s > spec.n {
                let rest = spec.n - total;
                if rest >= spec.min_community && rest <= spec.max_community {
                    sizes.push(rest);
                    total = spec.n;
                } else {
                    continue 'outer; // resample the whole size sequence
                }
            } else {
                sizes.push(s);
                total += s;
            }
            if total == spec.n {
                if sizes.len() >= 2 {
                    return Ok(sizes);
                }
                continue 'outer;
            }
        }
    }
    Err(Error::invalid(
        "could not partition n into community sizes under the caps",
    ))
}

fn draw_degrees(spec: &BenchmarkSpec, rng: &mut RngHandle) -> Vec<usize> {
    let mut raw: Vec<f64> = (0..spec.n)
        .map(|_| trunc_power_law(spec.a, 1.0, spec.max_degree as f64, rng))
        .collect();
    // rescale to the requested mean; clamping pulls the mean back down, so
    // iterate to the fixed point where the post-clamp mean hits the target
    for _ in 0..6 {
        let mean = raw.iter().sum::<f64>() / spec.n as f64;
        let scale = spec.avg_degree / mean;
        for v in raw.iter_mut() {
            *v = (*v * scale).clamp(1.0, spec.max_degree as f64);
        }
    }
    round_to_even_total(&raw)
        .into_iter()
        .map(|d| d.clamp(1, spec.max_degree))
        .collect()
}

/// Match stubs into edges: shuffle, pair consecutively, reject invalid pairs
/// (self-loops, duplicates), and rewire the residual stubs for up to 100
/// passes. Residue that plain re-shuffling cannot place (near-clique
/// communities) is resolved by double-edge swaps against already-placed
/// edges from the same call.
fn match_stubs(
    stubs: &mut Vec<u32>,
    seen: &mut std::collections::HashSet<(u32, u32)>,
    edges: &mut Vec<(u32, u32)>,
    rng: &mut RngHandle,
) {
    let mut local: Vec<(u32, u32)> = Vec::new();
    for _pass in 0..100 {
        if stubs.len() < 2 {
            break;
        }
        stubs.shuffle(rng);
        let mut leftovers = Vec::new();
        let mut i = 0;
        while i + 1 < stubs.len() {
            let (a, b) = (stubs[i], stubs[i + 1]);
            i += 2;
            let key = if a < b { (a, b) } else { (b, a) };
            if a != b && !seen.contains(&key) {
                seen.insert(key);
                local.push(key);
            } else {
                leftovers.push(a);
                leftovers.push(b);
            }
        }
        if i < stubs.len() {
            leftovers.push(stubs[i]);
        }
        if leftovers.len() == stubs.len() {
            break; // plain re-shuffling stalled
        }
        *stubs = leftovers;
    }

    // swap repair: place a stuck pair (a, b) by breaking an existing edge
    // (u, v) into (a, u) and (b, v) when both are new
    let mut tries = 0usize;
    while stubs.len() >= 2 && !local.is_empty() && tries < 1000 + 50 * stubs.len() {
        tries += 1;
        let ia = rng.random_range(0..stubs.len());
        let a = stubs.swap_remove(ia);
        let ib = rng.random_range(0..stubs.len());
        let b = stubs.swap_remove(ib);
        let key = if a < b { (a, b) } else { (b, a) };
        if a != b && !seen.contains(&key) {
            seen.insert(key);
            local.push(key);
            continue;
        }
        let ei = rng.random_range(0..local.len());
        let (u, v) = local[ei];
        let k1 = if a < u { (a, u) } else { (u, a) };
        let k2 = if b < v { (b, v) } else { (v, b) };
        let distinct = a != u && b != v && a != b;
        if distinct && !seen.contains(&k1) && !seen.contains(&k2) {
            local.swap_remove(ei);
            seen.remove(&(u, v));
            seen.insert(k1);
            seen.insert(k2);
            local.push(k1);
            local.push(k2);
        } else {
            stubs.push(a);
            stubs.push(b);
        }
    }
    edges.extend(local);
}

/// Pair cross-community stubs, always drawing from the two communities with
/// the most remaining stubs so that no community's surplus strands the rest.
fn match_between_stubs(
    per_comm: &mut [Vec<u32>],
    seen: &mut std::collections::HashSet<(u32, u32)>,
    edges: &mut Vec<(u32, u32)>,
    rng: &mut RngHandle,
) {
    let mut consecutive_failures = 0usize;
    loop {
        let mut first: Option<usize> = None;
        let mut second: Option<usize> = None;
        for (c, l) in per_comm.iter().enumerate() {
            if l.is_empty() {
                continue;
            }
            if first.map_or(true, |f| l.len() > per_comm[f].len()) {
                second = first;
                first = Some(c);
            } else if second.map_or(true, |s| l.len() > per_comm[s].len()) {
                second = Some(c);
            }
        }
        let (Some(a), Some(b)) = (first, second) else {
            break;
        };
        let ia = rng.random_range(0..per_comm[a].len());
        let ib = rng.random_range(0..per_comm[b].len());
        let x = per_comm[a].swap_remove(ia);
        let y = per_comm[b].swap_remove(ib);
        let key = if x < y { (x, y) } else { (y, x) };
        if seen.insert(key) {
            edges.push(key);
            consecutive_failures = 0;
        } else if consecutive_failures < 100 {
            consecutive_failures += 1;
            per_comm[a].push(x);
            per_comm[b].push(y);
        } else {
            consecutive_failures = 0; // duplicates saturated; drop the pair
        }
    }
}

/// Planted-partition benchmark draw: power-law degrees and community sizes,
/// per-node between/within stub split by `mu`, and uniform stub matching with
/// rewiring. Residual stubs that cannot be placed are dropped, so realized
/// degrees can fall slightly short of their targets.
pub fn gen_benchmark(spec: &BenchmarkSpec, rng: &mut RngHandle) -> Result<(Graph, LabelVector)> {
    spec.validate()?;
    'attempt: for _ in 0..50 {
        let sizes = draw_community_sizes(spec, rng)?;
        let degrees = draw_degrees(spec, rng);
        // randomized rounding keeps the between-stub total unbiased at mu
        // (plain rounding inflates it whenever mu*d lands on .5)
        let mut between: Vec<usize> = degrees
            .iter()
            .map(|&d| {
                let t = spec.mu * d as f64;
                let fl = t.floor();
                let bump = (rng.random::<f64>() < t - fl) as usize;
                ((fl as usize + bump) as usize).min(d)
            })
            .collect();
        let mut within: Vec<usize> = degrees
            .iter()
            .zip(&between)
            .map(|(&d, &b)| d - b)
            .collect();

        // assign nodes to communities: hardest (largest within-degree) first.
        // A community is feasible if it has a free slot, enough members to
        // host the node's within-degree, and spare within-stub capacity
        // (a size-s community can absorb at most s(s-1) within-stub ends).
        // Among feasible communities pick with probability proportional to
        // remaining capacity, which spreads degree mass and keeps any single
        // community from hoarding between stubs.
        let mut capacity: Vec<usize> = sizes.clone();
        let mut within_load = vec![0usize; sizes.len()];
        let mut community_of = vec![u32::MAX; spec.n];
        let mut order: Vec<usize> = (0..spec.n).collect();
        order.sort_by(|&i, &j| within[j].cmp(&within[i]).then(i.cmp(&j)));
        for &node in &order {
            let feasible: Vec<usize> = (0..sizes.len())
                .filter(|&c| {
                    capacity[c] > 0
                        && sizes[c] > within[node]
                        && within_load[c] + within[node] <= sizes[c] * (sizes[c] - 1)
                })
                .collect();
            if feasible.is_empty() {
                continue 'attempt;
            }
            let total_cap: usize = feasible.iter().map(|&c| capacity[c]).sum();
            let mut pick = rng.random_range(0..total_cap);
            let mut chosen = feasible[0];
            for &c in &feasible {
                if pick < capacity[c] {
                    chosen = c;
                    break;
                }
                pick -= capacity[c];
            }
            community_of[node] = chosen as u32;
            capacity[chosen] -= 1;
            within_load[chosen] += within[node];
        }

        // feasibility: no community may hold more than half of all between
        // stubs, or the cross-community matching strands the surplus. Flip
        // surplus stubs to within on the heaviest nodes; degrees are kept.
        loop {
            let total: usize = between.iter().sum();
            let mut loads = vec![0usize; sizes.len()];
            for i in 0..spec.n {
                loads[community_of[i] as usize] += between[i];
            }
            let (cmax, &lmax) = loads
                .iter()
                .enumerate()
                .max_by_key(|&(_, l)| *l)
                .expect("at least one community");
            if 2 * lmax <= total {
                break;
            }
            let node = (0..spec.n)
                .filter(|&i| {
                    community_of[i] == cmax as u32
                        && between[i] > 0
                        && within[i] + 1 < sizes[cmax]
                })
                .max_by_key(|&i| between[i]);
            match node {
                Some(i) => {
                    between[i] -= 1;
                    within[i] += 1;
                }
                None => break,
            }
        }

        // parity repairs: total between-stub count must be even, then each
        // community's within-stub count must be even. Each community repair
        // moves one stub within -> between; odd communities come in pairs, so
        // the global between parity survives.
        let flip_to_between = |node: usize, within: &mut Vec<usize>, between: &mut Vec<usize>| {
            within[node] -= 1;
            between[node] += 1;
        };
        if between.iter().sum::<usize>() % 2 != 0 {
            // move one stub between -> within on the node with most between
            let node = (0..spec.n)
                .filter(|&i| between[i] > 0)
                .max_by_key(|&i| between[i])
                .ok_or_else(|| Error::invalid("no between stubs to repair parity"))?;
            between[node] -= 1;
            within[node] += 1;
        }
        for c in 0..sizes.len() {
            let sum: usize = (0..spec.n)
                .filter(|&i| community_of[i] == c as u32)
                .map(|i| within[i])
                .sum();
            if sum % 2 != 0 {
                let node = (0..spec.n)
                    .filter(|&i| community_of[i] == c as u32 && within[i] > 0)
                    .max_by_key(|&i| within[i])
                    .expect("odd within total implies a positive entry");
                flip_to_between(node, &mut within, &mut between);
            }
        }

        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for c in 0..sizes.len() {
            let mut stubs: Vec<u32> = Vec::new();
            for i in 0..spec.n {
                if community_of[i] == c as u32 {
                    stubs.extend(std::iter::repeat(i as u32).take(within[i]));
                }
            }
            match_stubs(&mut stubs, &mut seen, &mut edges, rng);
        }
        let mut per_comm: Vec<Vec<u32>> = vec![Vec::new(); sizes.len()];
        for i in 0..spec.n {
            per_comm[community_of[i] as usize]
                .extend(std::iter::repeat(i as u32).take(between[i]));
        }
        match_between_stubs(&mut per_comm, &mut seen, &mut edges, rng);

        if edges.is_empty() {
            continue 'attempt;
        }
        let graph = Graph::from_edges(spec.n, &edges)?;
        let labels: Vec<u32> = community_of.iter().map(|&c| c + 1).collect();
        let reference = LabelVector::new(labels, sizes.len() as u32)?;
        return Ok((graph, reference));
    }
    Err(Error::invalid(
        "benchmark generation failed: spec appears infeasible",
    ))
}

/// Fraction of edges whose endpoints lie in different communities.
pub fn between_edge_fraction(graph: &Graph, labels: &LabelVector) -> f64 {
    let between = graph
        .edges()
        .iter()
        .filter(|&&(a, b)| labels.label(a as usize) != labels.label(b as usize))
        .count();
    between as f64 / graph.num_edges() as f64
}

/// Within- and between-community edge densities for a two-way split.
pub fn block_densities(graph: &Graph, labels: &LabelVector) -> (f64, f64) {
    let n = graph.n();
    let mut within_pairs = 0u64;
    let mut between_pairs = 0u64;
    let mut within_edges = 0u64;
    let mut between_edges = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let same = labels.label(i) == labels.label(j);
            let adj = graph.adjacency(i, j);
            if same {
                within_pairs += 1;
                within_edges += adj as u64;
            } else {
                between_pairs += 1;
                between_edges += adj as u64;
            }
        }
    }
    (
        within_edges as f64 / within_pairs.max(1) as f64,
        between_edges as f64 / between_pairs.max(1) as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_counts_match_construction() {
        let spec = SpikeSpec::new(10, 5).unwrap();
        let (g, reference) = gen_spike(&spec);
        assert_eq!(g.n(), 120);
        // C(10,2) + 10 + C(50,2) + 50 + 10*5
        assert_eq!(g.num_edges(), 45 + 10 + 1225 + 50 + 50);
        assert_eq!(reference.sizes(), &[20, 100]);
        // kernel node of community 1: (n1-1) within-kernel + 1 crown + r between
        assert_eq!(g.degree(0), 9 + 1 + 5);
        // crown node degree 1
        assert_eq!(g.degree(10), 1);
    }

    #[test]
    fn spike_is_deterministic_and_assortative() {
        for n1 in 3..=6 {
            for r in 1..=3 {
                let spec = SpikeSpec::new(n1, r).unwrap();
                let (g1, l1) = gen_spike(&spec);
                let (g2, _) = gen_spike(&spec);
                assert_eq!(g1.edges(), g2.edges());
                let (within, between) = block_densities(&g1, &l1);
                assert!(
                    within > between,
                    "density violated at n1={n1}, r={r}: {within} <= {between}"
                );
            }
        }
    }

    #[test]
    fn spike_small_case_cross_edges() {
        let (g, l) = gen_spike(&SpikeSpec::new(3, 1).unwrap());
        assert_eq!(g.n(), 12);
        let cross = g
            .edges()
            .iter()
            .filter(|&&(a, b)| l.label(a as usize) != l.label(b as usize))
            .count();
        assert_eq!(cross, 3);
    }

    #[test]
    fn spike_rejects_bad_specs() {
        assert!(SpikeSpec::new(2, 1).is_err());
        assert!(SpikeSpec::new(3, 0).is_err());
    }

    #[test]
    fn sbm_limit_cases() {
        let mut rng = RngHandle::new(0, 0);
        let sigma = LabelVector::new(vec![1, 1, 2, 2], 2).unwrap();
        // gamma -> -inf: no between edges
        let params = ModelParams {
            gamma: vec![-50.0],
            eta: vec![0.0; 4],
            pi: vec![0.5, 0.5],
        };
        for _ in 0..20 {
            let g = gen_sbm(&sigma, &params, &mut rng).unwrap();
            assert!(g
                .edges()
                .iter()
                .all(|&(a, b)| sigma.label(a as usize) == sigma.label(b as usize)));
        }
        // strongly negative eta: near-empty graph
        let params = ModelParams {
            gamma: vec![-0.0],
            eta: vec![-10.0; 4],
            pi: vec![0.5, 0.5],
        };
        let mut total = 0;
        for _ in 0..50 {
            total += gen_sbm(&sigma, &params, &mut rng).map(|g| g.num_edges()).unwrap_or(0);
        }
        assert!(total <= 2, "expected near-empty graphs, got {total} edges");
    }

    #[test]
    fn sbm_densities_within_binomial_bands() {
        let mut rng = RngHandle::new(1, 0);
        let n = 200;
        let sigma = LabelVector::new(
            (0..n).map(|i| if i < n / 2 { 1 } else { 2 }).collect(),
            2,
        )
        .unwrap();
        let params = ModelParams {
            gamma: vec![-2.0],
            eta: vec![0.0; n],
            pi: vec![0.5, 0.5],
        };
        let g = gen_sbm(&sigma, &params, &mut rng).unwrap();
        let (within, between) = block_densities(&g, &sigma);
        // 3-sigma binomial bands around the model probabilities
        let within_pairs = 2.0 * (100.0 * 99.0 / 2.0);
        let between_pairs = 100.0 * 100.0;
        let p_within = logit_inv(0.0);
        let p_between = logit_inv(-2.0);
        let sd_w = (p_within * (1.0 - p_within) / within_pairs).sqrt();
        let sd_b = (p_between * (1.0 - p_between) / between_pairs).sqrt();
        assert!(
            (within - p_within).abs() < 3.0 * sd_w,
            "within density {within} vs {p_within} (sd {sd_w})"
        );
        assert!(
            (between - p_between).abs() < 3.0 * sd_b,
            "between density {between} vs {p_between} (sd {sd_b})"
        );
    }

    #[test]
    fn benchmark_respects_mu_and_mean_degree() {
        let spec = BenchmarkSpec::new(100, 2.0, 1.0, 0.4, 10.0).unwrap();
        let mut rng = RngHandle::new(2, 0);
        let mut frac = 0.0;
        let mut mean_deg = 0.0;
        let reps = 20;
        for _ in 0..reps {
            let (g, l) = gen_benchmark(&spec, &mut rng).unwrap();
            frac += between_edge_fraction(&g, &l) / reps as f64;
            mean_deg +=
                g.degrees().iter().map(|&d| d as f64).sum::<f64>() / g.n() as f64 / reps as f64;
        }
        assert!((frac - 0.4).abs() < 0.03, "between fraction {frac}");
        assert!((mean_deg - 10.0).abs() < 1.0, "mean degree {mean_deg}");
    }

    #[test]
    fn benchmark_small_mu_nearly_disconnects_communities() {
        let mut spec = BenchmarkSpec::new(60, 2.0, 1.0, 0.02, 6.0).unwrap();
        spec.min_community = 20;
        spec.max_community = 40;
        let mut rng = RngHandle::new(3, 0);
        let (g, l) = gen_benchmark(&spec, &mut rng).unwrap();
        assert!(between_edge_fraction(&g, &l) < 0.1);
    }

    #[test]
    fn benchmark_rejects_bad_specs() {
        assert!(BenchmarkSpec::new(100, 2.0, 1.0, 0.0, 10.0).is_err());
        assert!(BenchmarkSpec::new(100, 2.0, 1.0, 0.4, 200.0).is_err());
        assert!(BenchmarkSpec::new(8, 2.0, 1.0, 0.4, 2.0).is_err());
    }

    #[test]
    fn even_total_rounding() {
        let vals = vec![1.4, 2.7, 3.3, 0.9];
        let r = round_to_even_total(&vals);
        let total: usize = r.iter().sum();
        assert_eq!(total % 2, 0);
        assert!((total as f64 - vals.iter().sum::<f64>()).abs() <= 2.0);
    }
}
