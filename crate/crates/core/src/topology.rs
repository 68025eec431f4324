//! 0-dimensional sublevel-set persistence of a landscape grid.
//!
//! Vertices are processed in ascending total order `(value, linear index)`.
//! A vertex with no lower-ordered neighbor births a component (a minimum); a
//! vertex uniting two or more components is a saddle, and the elder rule
//! kills every merging component whose minimum is younger. The survivors'
//! chain, one essential component per connected grid, is closed off by a
//! root node at `f_max`.

use crate::error::{Error, Result};
use crate::sampler::LandscapeGrid;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};

/// Grid connectivity. `Axis` links the 2n orthogonal neighbors; `Full` links
/// all 3^n - 1 surrounding cells. Saddle values depend on this choice, so
/// results report which one was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Adjacency {
    #[default]
    Axis,
    Full,
}

/// Neighbor structure over a grid. No wraparound: boundary points simply
/// have fewer neighbors, and the relation is symmetric.
pub struct GridComplex<'a> {
    pub grid: &'a LandscapeGrid,
    pub adjacency: Adjacency,
    shape: Vec<usize>,
    strides: Vec<usize>,
}

impl<'a> GridComplex<'a> {
    pub fn new(grid: &'a LandscapeGrid, adjacency: Adjacency) -> Self {
        GridComplex {
            shape: grid.shape().to_vec(),
            strides: grid.strides(),
            grid,
            adjacency,
        }
    }

    /// Visit every neighbor of the vertex at `linear`.
    pub fn neighbors(&self, linear: usize, mut visit: impl FnMut(usize)) {
        let n = self.shape.len();
        let mut multi = vec![0usize; n];
        let mut rem = linear;
        for (m, stride) in multi.iter_mut().zip(&self.strides) {
            *m = rem / stride;
            rem %= stride;
        }
        match self.adjacency {
            Adjacency::Axis => {
                for (ax, &m) in multi.iter().enumerate() {
                    if m > 0 {
                        visit(linear - self.strides[ax]);
                    }
                    if m + 1 < self.shape[ax] {
                        visit(linear + self.strides[ax]);
                    }
                }
            }
            Adjacency::Full => {
                // Odometer over {-1, 0, 1}^n, skipping the all-zero offset.
                let mut offset = vec![-1i64; n];
                'outer: loop {
                    if offset.iter().any(|&o| o != 0) {
                        let mut ok = true;
                        let mut lin = 0usize;
                        for ax in 0..n {
                            let idx = multi[ax] as i64 + offset[ax];
                            if idx < 0 || idx >= self.shape[ax] as i64 {
                                ok = false;
                                break;
                            }
                            lin += idx as usize * self.strides[ax];
                        }
                        if ok {
                            visit(lin);
                        }
                    }
                    for ax in (0..n).rev() {
                        offset[ax] += 1;
                        if offset[ax] <= 1 {
                            continue 'outer;
                        }
                        offset[ax] = -1;
                    }
                    break;
                }
            }
        }
    }
}

/// Ascending `(value, linear index)` permutation and its inverse ranks.
fn total_order(values: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; values.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    (order, rank)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Attach root `b` under root `a` (the caller decides which survives).
    fn union_into(&mut self, a: usize, b: usize) {
        self.parent[b] = a;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Minimum,
    Saddle,
    Root,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeNode {
    pub id: usize,
    /// Linear index into the grid this node came from.
    pub grid_index: usize,
    pub value: f64,
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Critical-point tree: leaves are minima, interior nodes are saddles, and a
/// single root sits at `f_max`. Edge weights are value differences.
#[derive(Debug, Clone)]
pub struct MergeTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    /// Node ids of the minima, in birth (total) order.
    pub minima: Vec<usize>,
    pub adjacency: Adjacency,
    pub grid_digest: u64,
}

impl MergeTree {
    /// `(parent, child, persistence)` triples.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut edges = Vec::with_capacity(self.nodes.len().saturating_sub(1));
        for node in &self.nodes {
            if let Some(p) = node.parent {
                edges.push((p, node.id, (self.nodes[p].value - node.value).abs()));
            }
        }
        edges
    }

    pub fn node_by_grid_index(&self, grid_index: usize, kind: NodeKind) -> Option<&TreeNode> {
        self.nodes
            .iter()
            .find(|n| n.grid_index == grid_index && n.kind == kind)
    }
}

impl Serialize for MergeTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct EdgeJson {
            parent: usize,
            child: usize,
            persistence: f64,
        }
        let edges: Vec<EdgeJson> = self
            .edges()
            .into_iter()
            .map(|(parent, child, persistence)| EdgeJson { parent, child, persistence })
            .collect();
        let mut s = serializer.serialize_struct("MergeTree", 6)?;
        s.serialize_field("nodes", &self.nodes)?;
        s.serialize_field("edges", &edges)?;
        s.serialize_field("root", &self.root)?;
        s.serialize_field("minima", &self.minima)?;
        s.serialize_field("adjacency", &self.adjacency)?;
        s.serialize_field("grid_digest", &format!("{:016x}", self.grid_digest))?;
        s.end()
    }
}

/// One birth-death pair. `saddle_index` is absent for the essential pair,
/// whose death is assigned `f_max`. `merged_into` names the elder minimum
/// that absorbed this one, which drives simplification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub minimum_index: usize,
    pub saddle_index: Option<usize>,
    pub birth: f64,
    pub death: f64,
    pub persistence: f64,
    pub essential: bool,
    pub merged_into: Option<usize>,
}

/// All pairs for a grid: one per minimum, finite pairs in ascending saddle
/// order followed by the single essential pair.
#[derive(Debug, Clone, Serialize)]
pub struct Barcode {
    pub pairs: Vec<PersistencePair>,
    pub adjacency: Adjacency,
    #[serde(serialize_with = "hex_digest")]
    pub grid_digest: u64,
}

fn hex_digest<S: Serializer>(d: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{d:016x}"))
}

impl Barcode {
    pub fn finite_pairs(&self) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(|p| !p.essential)
    }

    pub fn essential(&self) -> &PersistencePair {
        self.pairs
            .iter()
            .find(|p| p.essential)
            .expect("every connected grid has one essential pair")
    }
}

/// Assignment of every grid point to the minimum its steepest-descent path
/// terminates at, plus the resulting basin sizes.
#[derive(Debug, Clone, Serialize)]
pub struct StableManifolds {
    /// Grid linear index -> grid linear index of the owning minimum.
    pub assignment: Vec<usize>,
    /// Minimum grid index -> number of points in its stable manifold.
    pub sizes: BTreeMap<usize, usize>,
    pub adjacency: Adjacency,
    #[serde(serialize_with = "hex_digest")]
    pub grid_digest: u64,
}

impl StableManifolds {
    pub fn size_of(&self, minimum_index: usize) -> usize {
        self.sizes.get(&minimum_index).copied().unwrap_or(0)
    }
}

/// Sweep the sublevel filtration and record the merge tree and barcode.
pub fn build_merge_tree(grid: &LandscapeGrid, adjacency: Adjacency) -> Result<(MergeTree, Barcode)> {
    if grid.is_empty() {
        return Err(Error::usage("cannot build a merge tree over an empty grid"));
    }
    let values = grid.values();
    let n = values.len();
    let complex = GridComplex::new(grid, adjacency);
    let (order, rank) = total_order(values);

    let mut uf = UnionFind::new(n);
    // Valid only at union-find roots.
    let mut comp_min = vec![usize::MAX; n];
    let mut comp_top = vec![usize::MAX; n];

    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut minima: Vec<usize> = Vec::new();
    let mut pairs: Vec<PersistencePair> = Vec::new();
    let mut roots_buf: Vec<usize> = Vec::new();

    for &v in &order {
        roots_buf.clear();
        complex.neighbors(v, |u| {
            if rank[u] < rank[v] {
                roots_buf.push(u);
            }
        });
        for r in roots_buf.iter_mut() {
            *r = uf.find(*r);
        }
        roots_buf.sort_unstable();
        roots_buf.dedup();

        match roots_buf.len() {
            0 => {
                let id = nodes.len();
                nodes.push(TreeNode {
                    id,
                    grid_index: v,
                    value: values[v],
                    kind: NodeKind::Minimum,
                    parent: None,
                    children: Vec::new(),
                });
                minima.push(id);
                comp_min[v] = v;
                comp_top[v] = id;
            }
            1 => {
                let r = roots_buf[0];
                uf.union_into(r, v);
            }
            _ => {
                // Elder first: order merging components by their minima.
                roots_buf.sort_by(|&a, &b| {
                    rank[comp_min[a]].cmp(&rank[comp_min[b]])
                });
                let elder = roots_buf[0];
                let elder_min = comp_min[elder];
                let saddle_id = nodes.len();
                nodes.push(TreeNode {
                    id: saddle_id,
                    grid_index: v,
                    value: values[v],
                    kind: NodeKind::Saddle,
                    parent: None,
                    children: Vec::new(),
                });
                for &r in roots_buf.iter() {
                    let top = comp_top[r];
                    nodes[top].parent = Some(saddle_id);
                    nodes[saddle_id].children.push(top);
                    if r != elder {
                        let m = comp_min[r];
                        pairs.push(PersistencePair {
                            minimum_index: m,
                            saddle_index: Some(v),
                            birth: values[m],
                            death: values[v],
                            persistence: values[v] - values[m],
                            essential: false,
                            merged_into: Some(elder_min),
                        });
                    }
                }
                for &r in roots_buf.iter().skip(1) {
                    uf.union_into(elder, r);
                }
                uf.union_into(elder, v);
                comp_min[elder] = elder_min;
                comp_top[elder] = saddle_id;
            }
        }
    }

    let survivor = uf.find(order[0]);
    let essential_min = comp_min[survivor];
    let max_vertex = order[n - 1];
    let f_max = values[max_vertex];
    let root_id = nodes.len();
    nodes.push(TreeNode {
        id: root_id,
        grid_index: max_vertex,
        value: f_max,
        kind: NodeKind::Root,
        parent: None,
        children: vec![comp_top[survivor]],
    });
    let top = comp_top[survivor];
    nodes[top].parent = Some(root_id);
    pairs.push(PersistencePair {
        minimum_index: essential_min,
        saddle_index: None,
        birth: values[essential_min],
        death: f_max,
        persistence: f_max - values[essential_min],
        essential: true,
        merged_into: None,
    });

    let digest = grid.digest();
    Ok((
        MergeTree { nodes, root: root_id, minima, adjacency, grid_digest: digest },
        Barcode { pairs, adjacency, grid_digest: digest },
    ))
}

/// Discrete steepest descent from every grid point: repeatedly step to the
/// neighbor with the smallest value (ties to the smaller linear index) until
/// no neighbor is lower in the total order. One ascending pass memoizes the
/// paths, since each step strictly descends the total order.
pub fn stable_manifolds(grid: &LandscapeGrid, adjacency: Adjacency) -> Result<StableManifolds> {
    if grid.is_empty() {
        return Err(Error::usage("cannot compute stable manifolds of an empty grid"));
    }
    let values = grid.values();
    let n = values.len();
    let complex = GridComplex::new(grid, adjacency);
    let (order, rank) = total_order(values);

    let mut assignment = vec![usize::MAX; n];
    for &v in &order {
        let mut best: Option<usize> = None;
        complex.neighbors(v, |u| {
            best = Some(match best {
                None => u,
                Some(b) => {
                    if rank[u] < rank[b] {
                        u
                    } else {
                        b
                    }
                }
            });
        });
        assignment[v] = match best {
            Some(b) if rank[b] < rank[v] => assignment[b],
            _ => v,
        };
    }
    let mut sizes = BTreeMap::new();
    for &m in &assignment {
        *sizes.entry(m).or_insert(0) += 1;
    }
    Ok(StableManifolds { assignment, sizes, adjacency, grid_digest: grid.digest() })
}

/// Cancel finite pairs with persistence below `tau`, in ascending persistence
/// order; each cancelled minimum's branch collapses into the elder branch it
/// merged with, and its stable-manifold points follow. `tau = 0` is the
/// identity and the essential pair is never cancelled.
pub fn simplify(
    tree: &MergeTree,
    barcode: &Barcode,
    manifolds: &StableManifolds,
    tau: f64,
) -> Result<(MergeTree, Barcode, StableManifolds)> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::usage(format!("simplification threshold must be >= 0, got {tau}")));
    }
    if tree.grid_digest != barcode.grid_digest || tree.grid_digest != manifolds.grid_digest {
        return Err(Error::Provenance(
            "merge tree, barcode, and manifolds come from different grids".to_string(),
        ));
    }

    let mut cancelled: Vec<&PersistencePair> = barcode
        .finite_pairs()
        .filter(|p| p.persistence < tau)
        .collect();
    // Persistence ties resolve by saddle order, which guarantees every
    // branch hanging below a pair's saddle is gone by the pair's turn.
    cancelled.sort_by(|a, b| {
        a.persistence
            .total_cmp(&b.persistence)
            .then(a.death.total_cmp(&b.death))
            .then(a.saddle_index.cmp(&b.saddle_index))
            .then(a.minimum_index.cmp(&b.minimum_index))
    });

    let mut nodes = tree.nodes.clone();
    let mut removed = vec![false; nodes.len()];
    let min_node: HashMap<usize, usize> = tree
        .minima
        .iter()
        .map(|&id| (nodes[id].grid_index, id))
        .collect();
    let mut remap: HashMap<usize, usize> = HashMap::new();

    for pair in &cancelled {
        let m = min_node[&pair.minimum_index];
        debug_assert!(nodes[m].children.is_empty());
        let s = nodes[m].parent.expect("finite pair minima always have a parent saddle");
        nodes[s].children.retain(|&c| c != m);
        removed[m] = true;
        remap.insert(pair.minimum_index, pair.merged_into.expect("finite pairs record their absorber"));

        if nodes[s].children.len() == 1 && nodes[s].kind == NodeKind::Saddle {
            let only = nodes[s].children[0];
            let grand = nodes[s].parent.expect("saddles always have a parent");
            nodes[only].parent = Some(grand);
            let slot = nodes[grand]
                .children
                .iter()
                .position(|&c| c == s)
                .expect("child link must be present");
            nodes[grand].children[slot] = only;
            removed[s] = true;
        }
    }

    // Compact ids.
    let mut new_id = vec![usize::MAX; nodes.len()];
    let mut next = 0;
    for (i, &gone) in removed.iter().enumerate() {
        if !gone {
            new_id[i] = next;
            next += 1;
        }
    }
    let mut out_nodes: Vec<TreeNode> = Vec::with_capacity(next);
    for (i, node) in nodes.iter().enumerate() {
        if removed[i] {
            continue;
        }
        out_nodes.push(TreeNode {
            id: new_id[i],
            grid_index: node.grid_index,
            value: node.value,
            kind: node.kind,
            parent: node.parent.map(|p| new_id[p]),
            children: node.children.iter().map(|&c| new_id[c]).collect(),
        });
    }
    let out_minima: Vec<usize> = tree
        .minima
        .iter()
        .filter(|&&id| !removed[id])
        .map(|&id| new_id[id])
        .collect();

    let out_tree = MergeTree {
        nodes: out_nodes,
        root: new_id[tree.root],
        minima: out_minima,
        adjacency: tree.adjacency,
        grid_digest: tree.grid_digest,
    };

    let out_barcode = Barcode {
        pairs: barcode
            .pairs
            .iter()
            .filter(|p| p.essential || p.persistence >= tau)
            .cloned()
            .collect(),
        adjacency: barcode.adjacency,
        grid_digest: barcode.grid_digest,
    };

    // Chase absorber chains so cascaded cancellations land on a live minimum.
    let mut resolved: HashMap<usize, usize> = HashMap::new();
    let mut resolve = |mut m: usize| -> usize {
        if let Some(&r) = resolved.get(&m) {
            return r;
        }
        let start = m;
        while let Some(&next) = remap.get(&m) {
            m = next;
        }
        resolved.insert(start, m);
        m
    };
    let assignment: Vec<usize> = manifolds.assignment.iter().map(|&m| resolve(m)).collect();
    let mut sizes = BTreeMap::new();
    for &m in &assignment {
        *sizes.entry(m).or_insert(0) += 1;
    }
    let out_manifolds = StableManifolds {
        assignment,
        sizes,
        adjacency: manifolds.adjacency,
        grid_digest: manifolds.grid_digest,
    };

    Ok((out_tree, out_barcode, out_manifolds))
}
