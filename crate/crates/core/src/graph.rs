//! Retweet interaction graph, modularity, and Louvain community detection.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Undirected weighted graph over user identifiers.
///
/// Node indices follow the lexicographic order of user ids. Edges are stored
/// once per unordered pair with `u < v`; there are no self-loops.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionGraph {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: BTreeMap<(usize, usize), f64>,
}

impl InteractionGraph {
    /// Builds the graph from (source, target) interactions. Repeats add to the
    /// pair's weight in either direction; self-interactions only register the
    /// node.
    pub fn build<I, S>(interactions: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let pairs: Vec<(String, String)> = interactions
            .into_iter()
            .map(|(a, b)| (String::from(a.as_ref()), String::from(b.as_ref())))
            .collect();
        let mut index = BTreeMap::new();
        for (a, b) in &pairs {
            index.entry(a.clone()).or_insert(0);
            index.entry(b.clone()).or_insert(0);
        }
        let nodes: Vec<String> = index.keys().cloned().collect();
        for (i, v) in index.values_mut().enumerate() {
            *v = i;
        }
        let mut graph = InteractionGraph {
            nodes,
            index,
            edges: BTreeMap::new(),
        };
        for (a, b) in &pairs {
            let (u, v) = (graph.index[a], graph.index[b]);
            graph.add_weight(u, v, 1.0);
        }
        graph
    }

    /// Builds from explicit weighted edges; non-positive weights are skipped.
    pub fn from_weighted_edges<S: AsRef<str>>(edges: &[(S, S, f64)]) -> Self {
        let endpoints = edges
            .iter()
            .flat_map(|(a, b, _)| [(a.as_ref(), a.as_ref()), (b.as_ref(), b.as_ref())]);
        let mut graph = InteractionGraph::build(endpoints);
        for (a, b, w) in edges {
            if *w > 0.0 {
                let (u, v) = (graph.index[a.as_ref()], graph.index[b.as_ref()]);
                graph.add_weight(u, v, *w);
            }
        }
        graph
    }

    fn add_weight(&mut self, u: usize, v: usize, w: f64) {
        if u == v {
            return;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        *self.edges.entry(key).or_insert(0.0) += w;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, user: &str) -> Option<usize> {
        self.index.get(user).copied()
    }

    /// Edges as `(u, v, weight)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        let (u, v) = (self.node_index(a)?, self.node_index(b)?);
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.get(&key).copied()
    }

    /// Sum of edge weights (m).
    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut k = vec![0.0; self.nodes.len()];
        for (u, v, w) in self.edges() {
            k[u] += w;
            k[v] += w;
        }
        k
    }

    /// Same topology with every weight set to one.
    pub fn binarized(&self) -> Self {
        let mut g = self.clone();
        for w in g.edges.values_mut() {
            *w = 1.0;
        }
        g
    }
}

/// Assignment of every graph node to a cluster.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Partition {
    assignment: BTreeMap<String, usize>,
}

impl Partition {
    /// Compacts arbitrary per-node labels so clusters are numbered `0..k` in
    /// order of first appearance along the node order.
    pub fn from_labels(graph: &InteractionGraph, labels: &[usize]) -> Self {
        let compact = compact_labels(labels);
        let assignment = graph.nodes.iter().cloned().zip(compact).collect();
        Partition { assignment }
    }

    /// Wraps an explicit assignment, compacting cluster ids.
    pub fn from_assignment(assignment: BTreeMap<String, usize>) -> Self {
        let labels: Vec<usize> = assignment.values().copied().collect();
        let compact = compact_labels(&labels);
        let assignment = assignment.into_keys().zip(compact).collect();
        Partition { assignment }
    }

    pub fn singletons(graph: &InteractionGraph) -> Self {
        let labels: Vec<usize> = (0..graph.node_count()).collect();
        Partition::from_labels(graph, &labels)
    }

    pub fn cluster_of(&self, user: &str) -> Option<usize> {
        self.assignment.get(user).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.assignment.values().max().map_or(0, |&c| c + 1)
    }

    /// Members of each cluster, by cluster id.
    pub fn clusters(&self) -> BTreeMap<usize, Vec<String>> {
        let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (user, &c) in &self.assignment {
            out.entry(c).or_default().push(user.clone());
        }
        out
    }

    /// Per-node labels in the graph's index order.
    pub fn labels_for(&self, graph: &InteractionGraph) -> Result<Vec<usize>> {
        graph
            .nodes
            .iter()
            .map(|n| self.cluster_of(n).ok_or_else(|| Error::UncoveredNode(n.clone())))
            .collect()
    }
}

fn compact_labels(labels: &[usize]) -> Vec<usize> {
    let mut remap = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = remap.len();
            *remap.entry(*l).or_insert(next)
        })
        .collect()
}

/// Weighted Newman–Girvan modularity at resolution 1.
pub fn modularity(graph: &InteractionGraph, partition: &Partition) -> Result<f64> {
    modularity_with_resolution(graph, partition, 1.0)
}

pub fn modularity_with_resolution(graph: &InteractionGraph, partition: &Partition, resolution: f64) -> Result<f64> {
    let labels = partition.labels_for(graph)?;
    modularity_of_labels(graph, &labels, resolution)
}

fn modularity_of_labels(graph: &InteractionGraph, labels: &[usize], resolution: f64) -> Result<f64> {
    let m = graph.total_weight();
    if graph.edge_count() == 0 || m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let clusters = labels.iter().copied().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0; clusters];
    let mut degree = vec![0.0; clusters];
    for (u, v, w) in graph.edges() {
        degree[labels[u]] += w;
        degree[labels[v]] += w;
        if labels[u] == labels[v] {
            internal[labels[u]] += w;
        }
    }
    let q = internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - resolution * (d / (2.0 * m)) * (d / (2.0 * m)))
        .sum();
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LouvainConfig {
    pub seed: u64,
    pub resolution: f64,
    /// Use interaction counts as weights; otherwise every edge weighs one.
    pub weighted: bool,
    pub max_levels: usize,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            seed: 0,
            resolution: 1.0,
            weighted: true,
            max_levels: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainOutcome {
    pub partition: Partition,
    /// Modularity of the flattened partition on the input graph: first the
    /// singleton start, then one entry per completed local-move phase.
    pub phase_modularity: Vec<f64>,
}

impl LouvainOutcome {
    pub fn modularity(&self) -> f64 {
        self.phase_modularity.last().copied().unwrap_or(0.0)
    }
}

/// Louvain with default settings and the given shuffle seed.
pub fn louvain(graph: &InteractionGraph, seed: u64) -> Partition {
    louvain_with(
        graph,
        &LouvainConfig {
            seed,
            ..LouvainConfig::default()
        },
    )
    .partition
}

pub fn louvain_with(graph: &InteractionGraph, config: &LouvainConfig) -> LouvainOutcome {
    let binary;
    let graph = if config.weighted {
        graph
    } else {
        binary = graph.binarized();
        &binary
    };
    let n = graph.node_count();
    let mut membership: Vec<usize> = (0..n).collect();
    if graph.edge_count() == 0 {
        return LouvainOutcome {
            partition: Partition::from_labels(graph, &membership),
            phase_modularity: Vec::new(),
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut level = Level::from_graph(graph);
    let mut trace = vec![modularity_of_labels(graph, &membership, config.resolution).unwrap_or(0.0)];

    for _ in 0..config.max_levels {
        let (communities, moved) = level.local_moves(config.resolution, &mut rng);
        if !moved {
            break;
        }
        let (compact, count) = renumber(&communities);
        for m in membership.iter_mut() {
            *m = compact[*m];
        }
        trace.push(modularity_of_labels(graph, &membership, config.resolution).unwrap_or(0.0));
        if count == level.size() || count == 1 {
            break;
        }
        level = level.aggregate(&compact, count);
    }

    LouvainOutcome {
        partition: Partition::from_labels(graph, &membership),
        phase_modularity: trace,
    }
}

fn renumber(labels: &[usize]) -> (Vec<usize>, usize) {
    let compact = compact_labels(labels);
    let count = compact.iter().copied().max().map_or(0, |c| c + 1);
    (compact, count)
}

/// One level of the Louvain hierarchy: a (possibly aggregated) graph where
/// each node may carry a self-loop holding its internal weight.
struct Level {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    total_weight: f64,
}

impl Level {
    fn from_graph(graph: &InteractionGraph) -> Self {
        let n = graph.node_count();
        let mut adjacency = vec![Vec::new(); n];
        for (u, v, w) in graph.edges() {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        Level {
            adjacency,
            self_loops: vec![0.0; n],
            total_weight: graph.total_weight(),
        }
    }

    fn size(&self) -> usize {
        self.adjacency.len()
    }

    fn degree(&self, i: usize) -> f64 {
        self.adjacency[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[i]
    }

    /// Greedy moves until a full sweep changes nothing. Returns the
    /// community of every node and whether any node moved.
    fn local_moves(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.size();
        let two_m = 2.0 * self.total_weight;
        let degree: Vec<f64> = (0..n).map(|i| self.degree(i)).collect();
        let mut community: Vec<usize> = (0..n).collect();
        let mut totals = degree.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut links: BTreeMap<usize, f64> = BTreeMap::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let current = community[i];
                links.clear();
                for &(j, w) in &self.adjacency[i] {
                    *links.entry(community[j]).or_insert(0.0) += w;
                }
                totals[current] -= degree[i];
                let gain = |c: usize, w_in: f64| w_in - resolution * totals[c] * degree[i] / two_m;
                let mut best = current;
                let mut best_gain = gain(current, links.get(&current).copied().unwrap_or(0.0));
                for (&c, &w_in) in &links {
                    let g = gain(c, w_in);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                    }
                }
                totals[best] += degree[i];
                if best != current {
                    community[i] = best;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (community, moved_any)
    }

    fn aggregate(&self, community: &[usize], count: usize) -> Level {
        let mut self_loops = vec![0.0; count];
        let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, neighbours) in self.adjacency.iter().enumerate() {
            let ci = community[i];
            self_loops[ci] += self.self_loops[i];
            for &(j, w) in neighbours {
                // each undirected edge appears twice in the adjacency lists
                if j < i {
                    continue;
                }
                let cj = community[j];
                if ci == cj {
                    self_loops[ci] += w;
                } else {
                    let key = if ci < cj { (ci, cj) } else { (cj, ci) };
                    *between.entry(key).or_insert(0.0) += w;
                }
            }
        }
        let mut adjacency = vec![Vec::new(); count];
        for ((a, b), w) in between {
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        Level {
            adjacency,
            self_loops,
            total_weight: self.total_weight,
        }
    }
}

/// The `k` largest clusters as `(cluster id, size)`, largest first, ties by id.
pub fn top_clusters(partition: &Partition, k: usize) -> Vec<(usize, usize)> {
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in partition.assignment.values() {
        *sizes.entry(c).or_insert(0) += 1;
    }
    let mut ranked: Vec<(usize, usize)> = sizes.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> InteractionGraph {
        InteractionGraph::build([
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("d", "e"),
            ("e", "f"),
            ("d", "f"),
            ("c", "d"),
        ])
    }

    #[test]
    fn build_accumulates_and_drops_self_loops() {
        let g = InteractionGraph::build([("A", "B"), ("B", "A"), ("A", "C")]);
        assert_eq!(g.weight("A", "B"), Some(2.0));
        assert_eq!(g.weight("A", "C"), Some(1.0));
        assert_eq!(g.edge_count(), 2);

        let g = InteractionGraph::build([("A", "A")]);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);

        let g = InteractionGraph::build(Vec::<(&str, &str)>::new());
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn one_cluster_has_zero_modularity() {
        let g = two_triangles();
        let p = Partition::from_labels(&g, &[0; 6]);
        assert!(modularity(&g, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bridged_triangles_by_hand() {
        let g = two_triangles();
        let p = Partition::from_labels(&g, &[0, 0, 0, 1, 1, 1]);
        let expected = 2.0 * (3.0 / 7.0 - 0.25);
        assert!((modularity(&g, &p).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_modularity_undefined() {
        let g = InteractionGraph::build([("a", "a")]);
        let p = Partition::singletons(&g);
        assert_eq!(modularity(&g, &p), Err(Error::EmptyGraph));
    }

    #[test]
    fn uncovered_node_is_an_error() {
        let g = two_triangles();
        let p = Partition::from_assignment([(String::from("a"), 0)].into_iter().collect());
        assert!(matches!(modularity(&g, &p), Err(Error::UncoveredNode(_))));
    }

    #[test]
    fn louvain_separates_disjoint_cliques() {
        let mut edges = Vec::new();
        for group in [["a", "b", "c", "d"], ["w", "x", "y", "z"]] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((group[i], group[j]));
                }
            }
        }
        let g = InteractionGraph::build(edges);
        for seed in 0..5 {
            let p = louvain(&g, seed);
            assert_eq!(p.cluster_count(), 2);
            assert_eq!(p.cluster_of("a"), p.cluster_of("d"));
            assert_eq!(p.cluster_of("w"), p.cluster_of("z"));
            assert_ne!(p.cluster_of("a"), p.cluster_of("w"));
        }
    }

    #[test]
    fn louvain_recovers_triangles() {
        let g = two_triangles();
        let out = louvain_with(&g, &LouvainConfig::default());
        assert!((out.modularity() - 0.357142857).abs() < 1e-4);
        let p = &out.partition;
        assert_eq!(p.cluster_of("a"), p.cluster_of("c"));
        assert_eq!(p.cluster_of("d"), p.cluster_of("f"));
        assert_ne!(p.cluster_of("a"), p.cluster_of("d"));
    }

    #[test]
    fn louvain_is_seed_deterministic() {
        let g = two_triangles();
        assert_eq!(louvain(&g, 42), louvain(&g, 42));
    }

    #[test]
    fn binary_weighting_ignores_multiplicity() {
        let g = InteractionGraph::build([("a", "b"), ("a", "b"), ("a", "b"), ("b", "c")]);
        let b = g.binarized();
        assert_eq!(b.weight("a", "b"), Some(1.0));
        let out = louvain_with(
            &g,
            &LouvainConfig {
                weighted: false,
                ..Default::default()
            },
        );
        assert_eq!(out.partition.len(), 3);
    }

    #[test]
    fn top_clusters_order_and_ties() {
        let mut assignment = BTreeMap::new();
        let sizes = [5usize, 2, 9];
        let mut n = 0;
        for (c, &size) in sizes.iter().enumerate() {
            for _ in 0..size {
                assignment.insert(alloc::format!("u{n:03}"), c);
                n += 1;
            }
        }
        let p = Partition::from_assignment(assignment);
        assert_eq!(top_clusters(&p, 2), vec![(2, 9), (0, 5)]);
        assert_eq!(top_clusters(&p, 10).len(), 3);

        let p = Partition::from_assignment(
            [("a", 1), ("b", 0), ("c", 1), ("d", 0)]
                .into_iter()
                .map(|(u, c)| (String::from(u), c))
                .collect(),
        );
        assert_eq!(top_clusters(&p, 2), vec![(0, 2), (1, 2)]);
    }
}
