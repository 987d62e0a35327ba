//! The fixed parameter-space graph on which cascades run.
//!
//! A Barabási–Albert preferential-attachment graph is built once per run
//! over the N flattened parameters (node i = flattened parameter i) and
//! reused for every batch. The construction is fully deterministic: growth
//! starts from a complete clique on `attach_m + 1` nodes and each new node
//! attaches to `attach_m` distinct existing nodes sampled proportionally to
//! their degree by the repeated-node-list (urn) method, with duplicates
//! rejected within one attachment step. The urn reflects degrees at the
//! start of the step. All draws come from a ChaCha8 stream seeded with
//! `build_seed`, so identical `(n_nodes, attach_m, build_seed)` yield a
//! bit-identical graph on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

/// Magic header of the optional graph cache file.
pub const GRAPH_MAGIC: &[u8; 7] = b"TDUGRPH";
/// Current graph cache format version.
pub const GRAPH_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph needs at least attach_m + 1 = {min} nodes, got {got}")]
    InvalidSize { min: usize, got: usize },
    #[error("attach_m must be at least 1")]
    InvalidAttachment,
    #[error("graph too large: {0} nodes exceeds the u32 node-index space")]
    TooManyNodes(usize),
    #[error("graph cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph cache: bad magic, not a TDUGRPH file")]
    BadMagic,
    #[error("graph cache: unsupported version {0}")]
    BadVersion(u8),
    #[error("graph cache: {0}")]
    Corrupt(&'static str),
}

/// Immutable scale-free graph over the N flattened parameters, stored in
/// compressed sparse row form with each adjacency list sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamGraph {
    n_nodes: usize,
    attach_m: usize,
    build_seed: u64,
    /// Cumulative degree index, length `n_nodes + 1`.
    offsets: Vec<usize>,
    /// Flat neighbor lists; `neighbors[offsets[i]..offsets[i+1]]` sorted.
    neighbors: Vec<u32>,
}

impl ParamGraph {
    /// Grow a Barabási–Albert graph on `n_nodes` nodes with `attach_m`
    /// edges per new node, deterministically from `build_seed`.
    pub fn build_ba(n_nodes: usize, attach_m: usize, build_seed: u64) -> Result<Self, GraphError> {
        if attach_m < 1 {
            return Err(GraphError::InvalidAttachment);
        }
        let m0 = attach_m + 1;
        if n_nodes < m0 {
            return Err(GraphError::InvalidSize { min: m0, got: n_nodes });
        }
        if n_nodes > u32::MAX as usize {
            return Err(GraphError::TooManyNodes(n_nodes));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(build_seed);
        let n_edges = m0 * (m0 - 1) / 2 + (n_nodes - m0) * attach_m;
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(n_edges);
        // One urn entry per edge endpoint: node i appears degree(i) times.
        let mut urn: Vec<u32> = Vec::with_capacity(2 * n_edges);

        for i in 0..m0 as u32 {
            for j in (i + 1)..m0 as u32 {
                edges.push((i, j));
                urn.push(i);
                urn.push(j);
            }
        }

        let mut picked: Vec<u32> = Vec::with_capacity(attach_m);
        for t in m0..n_nodes {
            picked.clear();
            while picked.len() < attach_m {
                let cand = urn[rng.gen_range(0..urn.len())];
                if !picked.contains(&cand) {
                    picked.push(cand);
                }
            }
            // Append to the urn only after the whole step so attachment
            // probabilities within one step use pre-step degrees.
            for &dst in &picked {
                edges.push((t as u32, dst));
                urn.push(t as u32);
                urn.push(dst);
            }
        }

        Ok(Self::from_edge_list(n_nodes, attach_m, build_seed, &edges))
    }

    /// Assemble the CSR form from an undirected edge list.
    fn from_edge_list(
        n_nodes: usize,
        attach_m: usize,
        build_seed: u64,
        edges: &[(u32, u32)],
    ) -> Self {
        let mut degrees = vec![0usize; n_nodes];
        for &(a, b) in edges {
            degrees[a as usize] += 1;
            degrees[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n_nodes + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for &d in &degrees {
            acc += d;
            offsets.push(acc);
        }
        let mut neighbors = vec![0u32; acc];
        let mut cursor = offsets[..n_nodes].to_vec();
        for &(a, b) in edges {
            neighbors[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            neighbors[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        // Canonical order: each adjacency list sorted ascending.
        for i in 0..n_nodes {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self { n_nodes, attach_m, build_seed, offsets, neighbors }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn attach_m(&self) -> usize {
        self.attach_m
    }

    pub fn build_seed(&self) -> u64 {
        self.build_seed
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    /// Deterministic 64-bit digest over the identity triple and the canonical
    /// edge representation. FNV-1a, stable across processes and platforms.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.n_nodes as u64);
        h.write_u64(self.attach_m as u64);
        h.write_u64(self.build_seed);
        for &o in &self.offsets {
            h.write_u64(o as u64);
        }
        for &v in &self.neighbors {
            h.write_u64(v as u64);
        }
        h.finish()
    }

    /// Write the graph cache file: magic, version byte, then little-endian
    /// 64-bit n_nodes, attach_m, build_seed, offsets and neighbors.
    pub fn write_cache(&self, path: &Path) -> Result<(), GraphError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(GRAPH_MAGIC)?;
        w.write_all(&[GRAPH_VERSION])?;
        w.write_all(&(self.n_nodes as u64).to_le_bytes())?;
        w.write_all(&(self.attach_m as u64).to_le_bytes())?;
        w.write_all(&self.build_seed.to_le_bytes())?;
        for &o in &self.offsets {
            w.write_all(&(o as u64).to_le_bytes())?;
        }
        for &v in &self.neighbors {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a graph cache file written by [`ParamGraph::write_cache`].
    pub fn read_cache(path: &Path) -> Result<Self, GraphError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 7];
        r.read_exact(&mut magic).map_err(|_| GraphError::BadMagic)?;
        if &magic != GRAPH_MAGIC {
            return Err(GraphError::BadMagic);
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version).map_err(|_| GraphError::Corrupt("missing version"))?;
        if version[0] != GRAPH_VERSION {
            return Err(GraphError::BadVersion(version[0]));
        }
        let n_nodes = read_u64(&mut r)? as usize;
        let attach_m = read_u64(&mut r)? as usize;
        let build_seed = read_u64(&mut r)?;
        let mut offsets = Vec::with_capacity(n_nodes + 1);
        for _ in 0..=n_nodes {
            offsets.push(read_u64(&mut r)? as usize);
        }
        if offsets.first() != Some(&0) {
            return Err(GraphError::Corrupt("offsets must start at 0"));
        }
        if offsets.windows(2).any(|w| w[1] < w[0]) {
            return Err(GraphError::Corrupt("offsets must be nondecreasing"));
        }
        let total = *offsets.last().unwrap();
        let mut neighbors = Vec::with_capacity(total);
        for _ in 0..total {
            let v = read_u64(&mut r)?;
            if v >= n_nodes as u64 {
                return Err(GraphError::Corrupt("neighbor index out of range"));
            }
            neighbors.push(v as u32);
        }
        Ok(Self { n_nodes, attach_m, build_seed, offsets, neighbors })
    }

    /// Test-support constructor from an explicit edge list; not part of the
    /// deterministic BA contract.
    #[doc(hidden)]
    pub fn from_edges_for_test(n_nodes: usize, edges: &[(u32, u32)]) -> Self {
        Self::from_edge_list(n_nodes, 0, 0, edges)
    }
}

fn read_u64(r: &mut impl Read) -> Result<u64, GraphError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|_| GraphError::Corrupt("truncated payload"))?;
    Ok(u64::from_le_bytes(buf))
}

/// Minimal FNV-1a 64-bit hasher; pinned here so digests never depend on
/// std's unspecified default hasher.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write_u64(&mut self, v: u64) {
        for byte in v.to_le_bytes() {
            self.0 ^= byte as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}
