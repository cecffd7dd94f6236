//! Pre-trees: reflexive-transitive frames whose clusters of mutually
//! accessible worlds form a rooted tree. Construction, detection,
//! uniformization (duplicating worlds and subtrees) and enumeration up to
//! isomorphism.

use std::collections::{BTreeMap, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kripke::KripkeModel;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PreTreeWire", into = "PreTreeWire")]
pub struct PreTree {
    clusters: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    #[serde(skip)]
    cluster_of: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PreTreeWire {
    clusters: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

impl TryFrom<PreTreeWire> for PreTree {
    type Error = Error;

    fn try_from(w: PreTreeWire) -> Result<Self> {
        PreTree::new(w.clusters, w.parent)
    }
}

impl From<PreTree> for PreTreeWire {
    fn from(t: PreTree) -> Self {
        PreTreeWire {
            clusters: t.clusters,
            parent: t.parent,
        }
    }
}

impl PreTree {
    /// Cluster 0 is the root; `parent[c]` is the cluster immediately below `c`.
    pub fn new(clusters: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidTree(m.to_string()));
        if clusters.is_empty() {
            return bad("no clusters");
        }
        if parent.len() != clusters.len() {
            return bad("parent list length differs from cluster count");
        }
        if parent[0].is_some() {
            return bad("cluster 0 must be the root");
        }
        let n: usize = clusters.iter().map(Vec::len).sum();
        let mut cluster_of = vec![usize::MAX; n];
        for (c, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return bad("empty cluster");
            }
            for &w in members {
                if w >= n || cluster_of[w] != usize::MAX {
                    return bad("cluster membership does not partition the worlds");
                }
                cluster_of[w] = c;
            }
        }
        for c in 1..clusters.len() {
            // every non-root cluster must reach the root through parents
            let mut cur = c;
            let mut steps = 0;
            loop {
                match parent[cur] {
                    None if cur == 0 => break,
                    None => return bad("second root"),
                    Some(p) if p >= clusters.len() => return bad("parent out of range"),
                    Some(p) => cur = p,
                }
                steps += 1;
                if steps > clusters.len() {
                    return bad("parent cycle");
                }
            }
        }
        Ok(PreTree {
            clusters,
            parent,
            cluster_of,
        })
    }

    /// The complete pre-tree with `levels` levels of clusters, every
    /// non-leaf cluster having `branch` children and every cluster
    /// `cluster_size` worlds. Worlds are numbered cluster by cluster in
    /// breadth-first order.
    pub fn complete(levels: usize, branch: usize, cluster_size: usize) -> Result<Self> {
        if levels == 0 || cluster_size == 0 {
            return Err(Error::InvalidTree("levels and cluster size must be positive".into()));
        }
        let mut parent = vec![None];
        let mut frontier = vec![0];
        for _ in 1..levels {
            let mut next = Vec::new();
            for &c in &frontier {
                for _ in 0..branch {
                    parent.push(Some(c));
                    next.push(parent.len() - 1);
                }
            }
            frontier = next;
        }
        Self::with_sizes(parent, |_| cluster_size)
    }

    fn with_sizes(parent: Vec<Option<usize>>, size: impl Fn(usize) -> usize) -> Result<Self> {
        let mut next = 0;
        let clusters = (0..parent.len())
            .map(|c| {
                let members = (next..next + size(c)).collect_vec();
                next += size(c);
                members
            })
            .collect();
        PreTree::new(clusters, parent)
    }

    /// Recognizes a pre-tree in a reflexive-transitive frame; `None` when the
    /// cluster order is not a rooted tree. Clusters are numbered
    /// breadth-first from the root, siblings by least member.
    pub fn from_preorder(m: &KripkeModel) -> Option<PreTree> {
        let n = m.world_count();
        let acc = |a: usize, b: usize| m.accessible(a, b);
        let mut cluster_id = vec![usize::MAX; n];
        let mut reps: Vec<Vec<usize>> = Vec::new();
        for w in 0..n {
            if cluster_id[w] != usize::MAX {
                continue;
            }
            let members = (w..n).filter(|&u| acc(w, u) && acc(u, w)).collect_vec();
            for &u in &members {
                cluster_id[u] = reps.len();
            }
            reps.push(members);
        }
        let k = reps.len();
        let below = |a: usize, b: usize| a != b && acc(reps[a][0], reps[b][0]);
        let roots = (0..k).filter(|&c| (0..k).all(|d| d == c || below(c, d))).collect_vec();
        if roots.len() != 1 {
            return None;
        }
        let mut parent_old = vec![None; k];
        for c in 0..k {
            let preds = (0..k).filter(|&d| below(d, c)).collect_vec();
            for (&x, &y) in preds.iter().tuple_combinations() {
                if !below(x, y) && !below(y, x) {
                    return None;
                }
            }
            parent_old[c] = preds
                .iter()
                .copied()
                .find(|&d| preds.iter().all(|&e| e == d || below(e, d)));
        }
        // breadth-first renumbering
        let mut order = vec![roots[0]];
        let mut i = 0;
        while i < order.len() {
            let c = order[i];
            order.extend((0..k).filter(|&d| parent_old[d] == Some(c)));
            i += 1;
        }
        let new_id: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let clusters = order.iter().map(|&c| reps[c].clone()).collect();
        let parent = order.iter().map(|&c| parent_old[c].map(|p| new_id[&p])).collect();
        PreTree::new(clusters, parent).ok()
    }

    pub fn world_count(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn parent(&self, c: usize) -> Option<usize> {
        self.parent[c]
    }

    pub fn children(&self, c: usize) -> Vec<usize> {
        (0..self.clusters.len())
            .filter(|&d| self.parent[d] == Some(c))
            .collect()
    }

    pub fn cluster_of(&self, w: usize) -> usize {
        self.cluster_of[w]
    }

    pub fn root_cluster(&self) -> &[usize] {
        &self.clusters[0]
    }

    /// Number of cluster levels (a single cluster has depth 1).
    pub fn depth(&self) -> usize {
        (0..self.clusters.len()).map(|c| self.level(c) + 1).max().unwrap_or(1)
    }

    /// Distance of cluster `c` from the root.
    pub fn level(&self, c: usize) -> usize {
        let mut d = 0;
        let mut cur = c;
        while let Some(p) = self.parent[cur] {
            d += 1;
            cur = p;
        }
        d
    }

    pub fn max_branching(&self) -> usize {
        (0..self.clusters.len())
            .map(|c| self.children(c).len())
            .max()
            .unwrap_or(0)
    }

    pub fn max_cluster_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Cluster `a` is `b` or lies below it.
    pub fn cluster_leq(&self, a: usize, b: usize) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            match self.parent[cur] {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// World order of the induced frame.
    pub fn leq(&self, w: usize, u: usize) -> bool {
        self.cluster_leq(self.cluster_of[w], self.cluster_of[u])
    }

    pub fn is_uniform(&self, cluster_size: usize, branch: usize) -> bool {
        (0..self.clusters.len()).all(|c| {
            let kids = self.children(c).len();
            self.clusters[c].len() == cluster_size && (kids == 0 || kids == branch)
        })
    }

    /// The induced frame (no valuation).
    pub fn frame(&self) -> KripkeModel {
        let n = self.world_count();
        KripkeModel::from_edges(
            n,
            (0..n).flat_map(|w| (0..n).filter(move |&u| self.leq(w, u)).map(move |u| (w, u))),
        )
        .expect("worlds are in range")
    }
}

/// A pre-tree together with a valuation on its worlds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreTreeModel {
    tree: PreTree,
    model: KripkeModel,
}

impl PreTreeModel {
    pub fn new(tree: PreTree, model: KripkeModel) -> Result<Self> {
        if model.world_count() != tree.world_count() {
            return Err(Error::InvalidModel("world count differs from the pre-tree".into()));
        }
        let frame = tree.frame();
        if model.edges().ne(frame.edges()) {
            return Err(Error::InvalidModel("relation is not the pre-tree order".into()));
        }
        Ok(PreTreeModel { tree, model })
    }

    /// Recognizes a pre-tree model; `None` when the frame is not a pre-tree.
    pub fn from_model(model: KripkeModel) -> Option<Self> {
        let tree = model.frame_class_of().pretree?;
        Some(PreTreeModel { tree, model })
    }

    pub fn tree(&self) -> &PreTree {
        &self.tree
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    /// Exchanges the valuations of two worlds of the same cluster (a frame
    /// automorphism, so modal truth moves with the valuation).
    pub fn swap_in_cluster(&mut self, a: usize, b: usize) -> Result<()> {
        if self.tree.cluster_of(a) != self.tree.cluster_of(b) {
            return Err(Error::Precondition(format!(
                "worlds {a} and {b} lie in different clusters"
            )));
        }
        let vars: Vec<String> = self.model.valuation().keys().cloned().collect();
        for v in vars {
            let (ta, tb) = (self.model.var_true(&v, a), self.model.var_true(&v, b));
            self.model.set_var(&v, a, tb)?;
            self.model.set_var(&v, b, ta)?;
        }
        Ok(())
    }

    /// Duplicates worlds and whole subtrees so that every cluster has exactly
    /// `cluster_size` worlds and every non-leaf cluster exactly `branch`
    /// children. Returns the new model and, for each new world, the old world
    /// it copies; each new world is bisimilar to its origin.
    pub fn uniformize(&self, cluster_size: usize, branch: usize) -> Result<(PreTreeModel, Vec<usize>)> {
        let t = &self.tree;
        if cluster_size < t.max_cluster_size() {
            return Err(Error::Bounds(format!(
                "cluster size {cluster_size} < existing maximum {}",
                t.max_cluster_size()
            )));
        }
        if branch < t.max_branching() {
            return Err(Error::Bounds(format!(
                "branch degree {branch} < existing maximum {}",
                t.max_branching()
            )));
        }
        let mut clusters = Vec::new();
        let mut parent = Vec::new();
        let mut origin = Vec::new();
        let mut queue = VecDeque::from([(0usize, None)]);
        while let Some((old, new_parent)) = queue.pop_front() {
            let id = clusters.len();
            let members = &t.clusters[old];
            let new_members = (0..cluster_size)
                .map(|i| {
                    origin.push(members[i % members.len()]);
                    origin.len() - 1
                })
                .collect_vec();
            clusters.push(new_members);
            parent.push(new_parent);
            let kids = t.children(old);
            if !kids.is_empty() {
                for j in 0..branch {
                    queue.push_back((kids[j % kids.len()], Some(id)));
                }
            }
        }
        let tree = PreTree::new(clusters, parent)?;
        let mut model = tree.frame();
        for (var, set) in self.model.valuation() {
            model.declare_var(var);
            for (new, old) in origin.iter().enumerate() {
                if set.contains(old) {
                    model.set_var(var, new, true)?;
                }
            }
        }
        Ok((PreTreeModel { tree, model }, origin))
    }
}

#[derive(Debug, Clone)]
struct Shape {
    size: usize,
    /// indices into the shared arena
    children: Vec<usize>,
}

/// All pre-trees with at most `max_depth` cluster levels, at most
/// `max_branch` children per cluster and at most `max_cluster` worlds per
/// cluster, one per isomorphism class.
///
/// A class is a cluster size plus a multiset of child classes; generating
/// children as non-decreasing index sequences over the canonical list of
/// shallower classes yields each class exactly once.
pub fn enumerate_pretrees(max_depth: usize, max_branch: usize, max_cluster: usize) -> impl Iterator<Item = PreTree> {
    let mut arena: Vec<Shape> = Vec::new();
    // canonical classes of depth <= d, for the current d
    let mut level: Vec<usize> = Vec::new();
    for d in 1..max_depth {
        let mut next = Vec::new();
        for size in 1..=max_cluster {
            let b = if d >= 2 { max_branch } else { 0 };
            for count in 0..=b {
                for ms in level.iter().copied().combinations_with_replacement(count) {
                    arena.push(Shape { size, children: ms });
                    next.push(arena.len() - 1);
                }
            }
        }
        level = next;
    }
    let arena = std::rc::Rc::new(arena);
    let level = std::rc::Rc::new(level);
    let top_branch = if max_depth >= 2 { max_branch } else { 0 };
    let sizes = if max_depth == 0 { 0 } else { max_cluster };
    (1..=sizes).flat_map(move |size| {
        let arena = arena.clone();
        let level = level.clone();
        (0..=top_branch).flat_map(move |count| {
            let arena = arena.clone();
            level
                .iter()
                .copied()
                .collect_vec()
                .into_iter()
                .combinations_with_replacement(count)
                .map(move |children| shape_to_tree(&arena, &Shape { size, children }))
        })
    })
}

fn shape_to_tree(arena: &[Shape], top: &Shape) -> PreTree {
    let mut parent = vec![None];
    let mut sizes = vec![top.size];
    let mut queue: VecDeque<(usize, Vec<usize>)> = VecDeque::from([(0, top.children.clone())]);
    while let Some((id, kids)) = queue.pop_front() {
        for k in kids {
            parent.push(Some(id));
            sizes.push(arena[k].size);
            queue.push_back((parent.len() - 1, arena[k].children.clone()));
        }
    }
    PreTree::with_sizes(parent, |c| sizes[c]).expect("shape builds a valid tree")
}
