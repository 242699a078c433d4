//! Base-station deployment parsing and backhaul graph construction.
//!
//! Stations closer than a link threshold are wired directly; the resulting
//! components are then merged into a single connected graph by repeatedly
//! joining the largest and second-largest components at their closest pair of
//! nodes. All-pairs hop distances are precomputed by BFS from every node.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A base station: graph node with planar Cartesian coordinates in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    /// 0-based index, stable across the run.
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

impl BaseStation {
    pub fn distance_to(&self, other: &BaseStation) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn distance_to_point(&self, x: f64, y: f64) -> f64 {
        ((self.x - x).powi(2) + (self.y - y).powi(2)).sqrt()
    }
}

/// Which whitespace-separated fields of a deployment line hold the x and y
/// coordinates. The deployment log format is not standardized, so this is
/// configurable; the default takes the first two fields that parse as numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnLayout {
    /// First two numeric fields on the line are x and y.
    #[default]
    FirstTwoNumeric,
    /// Explicit 0-based field indices for x and y.
    Indices { x: usize, y: usize },
}

/// Parses a line-oriented base-station deployment file. Lines starting with
/// `#` and blank lines are ignored; ids are assigned 0..B-1 in file order.
pub fn parse_bs_deployment<R: BufRead>(input: R, columns: ColumnLayout) -> Result<Vec<BaseStation>> {
    let mut stations = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let (x, y) = match columns {
            ColumnLayout::Indices { x, y } => {
                let need = x.max(y) + 1;
                if fields.len() < need {
                    return Err(Error::parse(
                        line_no,
                        format!("expected at least {need} fields, found {}", fields.len()),
                    ));
                }
                (parse_coord(fields[x], line_no)?, parse_coord(fields[y], line_no)?)
            }
            ColumnLayout::FirstTwoNumeric => {
                let mut nums = fields.iter().filter_map(|f| f.parse::<f64>().ok());
                match (nums.next(), nums.next()) {
                    (Some(x), Some(y)) if x.is_finite() && y.is_finite() => (x, y),
                    _ => {
                        return Err(Error::parse(
                            line_no,
                            "fewer than two finite numeric fields".to_string(),
                        ))
                    }
                }
            }
        };
        stations.push(BaseStation {
            id: stations.len() as u32,
            x,
            y,
        });
    }
    if stations.is_empty() {
        return Err(Error::invalid("no base stations"));
    }
    Ok(stations)
}

fn parse_coord(field: &str, line_no: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line_no, format!("cannot parse '{field}' as a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line_no, format!("non-finite coordinate '{field}'")));
    }
    Ok(v)
}

/// Connects every pair of stations at Euclidean distance strictly below
/// `threshold` and reports the number of connected components that result.
pub fn build_proximity_edges(
    stations: &[BaseStation],
    threshold: f64,
) -> Result<(Vec<(u32, u32)>, usize)> {
    build_proximity_edges_with(stations, threshold, true)
}

/// Variant with an explicit strictness switch for the threshold comparison
/// (`strict` links pairs with d < threshold, otherwise d <= threshold).
pub fn build_proximity_edges_with(
    stations: &[BaseStation],
    threshold: f64,
    strict: bool,
) -> Result<(Vec<(u32, u32)>, usize)> {
    if threshold <= 0.0 {
        return Err(Error::invalid(format!("link threshold {threshold} must be > 0")));
    }
    let mut edges = Vec::new();
    for i in 0..stations.len() {
        for j in (i + 1)..stations.len() {
            let d = stations[i].distance_to(&stations[j]);
            let linked = if strict { d < threshold } else { d <= threshold };
            if linked {
                edges.push((i as u32, j as u32));
            }
        }
    }
    let components = count_components(stations.len(), &edges);
    Ok((edges, components))
}

fn count_components(n: usize, edges: &[(u32, u32)]) -> usize {
    let mut uf = UnionFind::new(n);
    for &(u, v) in edges {
        uf.union(u as usize, v as usize);
    }
    uf.component_count()
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    /// Lowest member id per root, used for deterministic component ranking.
    min_id: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            min_id: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.min_id[big] = self.min_id[big].min(self.min_id[small]);
    }

    fn component_count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// The connected backhaul graph with precomputed all-pairs hop distances.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    stations: Vec<BaseStation>,
    /// Undirected edges, each stored once as (u, v) with u < v, sorted.
    edges: Vec<(u32, u32)>,
    hop_dist: HopMatrix,
}

impl NetworkGraph {
    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn hop_matrix(&self) -> &HopMatrix {
        &self.hop_dist
    }

    pub fn hops(&self, i: u32, j: u32) -> u32 {
        self.hop_dist.get(i, j)
    }

    /// Adjacency lists, neighbor ids ascending.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        adjacency_from_edges(self.stations.len(), &self.edges)
    }

    /// Writes the edge list as "u v" lines, u < v, for external inspection.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

fn adjacency_from_edges(n: usize, edges: &[(u32, u32)]) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Merges the proximity components into a single connected graph.
///
/// While more than one component remains, the largest and second-largest
/// components are joined by an edge between their closest pair of nodes.
/// Component ranking ties break toward the lower minimum station id; pair
/// distance ties break toward the lexicographically smallest (u, v).
pub fn connect_components(
    stations: Vec<BaseStation>,
    edges: Vec<(u32, u32)>,
) -> Result<NetworkGraph> {
    if stations.is_empty() {
        return Err(Error::invalid("no base stations"));
    }
    let n = stations.len();
    let mut edge_set: BTreeSet<(u32, u32)> = edges
        .into_iter()
        .map(|(u, v)| if u < v { (u, v) } else { (v, u) })
        .collect();

    let mut uf = UnionFind::new(n);
    for &(u, v) in &edge_set {
        uf.union(u as usize, v as usize);
    }

    while uf.component_count() > 1 {
        // Rank components by (size desc, min id asc); pick the top two.
        let mut members: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for i in 0..n {
            let root = uf.find(i);
            members.entry(root).or_default().push(i as u32);
        }
        let mut ranked: Vec<(usize, usize, usize)> = members
            .keys()
            .map(|&root| (root, uf.size[root], uf.min_id[root]))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        let largest = &members[&ranked[0].0];
        let second = &members[&ranked[1].0];

        let mut best: Option<(f64, u32, u32)> = None;
        for &u in largest {
            for &v in second {
                let d = stations[u as usize].distance_to(&stations[v as usize]);
                let better = match best {
                    None => true,
                    Some((bd, bu, bv)) => d < bd || (d == bd && (u, v) < (bu, bv)),
                };
                if better {
                    best = Some((d, u, v));
                }
            }
        }
        let (_, u, v) = best.expect("two nonempty components");
        edge_set.insert(if u < v { (u, v) } else { (v, u) });
        uf.union(u as usize, v as usize);
    }

    let edges: Vec<(u32, u32)> = edge_set.into_iter().collect();
    let hop_dist = all_pairs_hop_distances(n, &edges)?;
    Ok(NetworkGraph {
        stations,
        edges,
        hop_dist,
    })
}

/// Dense symmetric matrix of minimum hop counts between stations.
#[derive(Debug, Clone)]
pub struct HopMatrix {
    n: usize,
    dist: Vec<u16>,
}

impl HopMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: u32, j: u32) -> u32 {
        self.dist[i as usize * self.n + j as usize] as u32
    }

    /// Largest hop distance in the matrix.
    pub fn max_hops(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0) as u32
    }

    /// Mean over all ordered pairs (i, j) with i != j.
    pub fn mean_pairwise(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let sum: u64 = self.dist.iter().map(|&d| d as u64).sum();
        sum as f64 / (self.n * (self.n - 1)) as f64
    }
}

/// Computes minimum hop counts between every pair of nodes by running an
/// unweighted BFS from each node. The graph must be connected; a disconnected
/// input is an error rather than a matrix with unreachable markers.
pub fn all_pairs_hop_distances(n: usize, edges: &[(u32, u32)]) -> Result<HopMatrix> {
    if n == 0 {
        return Err(Error::invalid("hop distances of empty graph"));
    }
    let adj = adjacency_from_edges(n, edges);
    let mut dist = vec![0u16; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for src in 0..n {
        let row = &mut dist[src * n..(src + 1) * n];
        const UNSEEN: u16 = u16::MAX;
        row.fill(UNSEEN);
        row[src] = 0;
        queue.clear();
        queue.push_back(src as u32);
        while let Some(u) = queue.pop_front() {
            let du = row[u as usize];
            for &v in &adj[u as usize] {
                if row[v as usize] == UNSEEN {
                    row[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        if let Some(unreached) = row.iter().position(|&d| d == UNSEEN) {
            return Err(Error::invalid(format!(
                "graph is disconnected: node {unreached} unreachable from node {src}"
            )));
        }
    }
    Ok(HopMatrix { n, dist })
}

/// Histogram of hop distances over unordered pairs i < j.
pub fn hop_histogram(matrix: &HopMatrix) -> BTreeMap<u32, u64> {
    let mut hist = BTreeMap::new();
    for i in 0..matrix.n {
        for j in (i + 1)..matrix.n {
            *hist.entry(matrix.get(i as u32, j as u32)).or_insert(0) += 1;
        }
    }
    hist
}
