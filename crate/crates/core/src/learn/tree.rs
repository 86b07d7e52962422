//! CART trees: classification (gini / entropy) and least-squares regression.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all, in column order.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

/// Node-local sufficient statistics for one split criterion.
trait SplitStats: Copy {
    /// Adds row `i` with multiplicity `w`.
    fn add(&mut self, i: usize, w: u32);
    fn sub(&mut self, i: usize, w: u32);
    fn count(&self) -> usize;
    /// Impurity weighted by the sample count.
    fn weighted_impurity(&self) -> f64;
    fn leaf_value(&self) -> f64;
}

#[derive(Clone, Copy)]
struct ClassStats<'a> {
    y: &'a [bool],
    pos: usize,
    n: usize,
    criterion: Criterion,
}

impl<'a> ClassStats<'a> {
    fn new(y: &'a [bool], criterion: Criterion) -> Self {
        ClassStats {
            y,
            pos: 0,
            n: 0,
            criterion,
        }
    }
}

impl SplitStats for ClassStats<'_> {
    fn add(&mut self, i: usize, w: u32) {
        self.n += w as usize;
        if self.y[i] {
            self.pos += w as usize;
        }
    }

    fn sub(&mut self, i: usize, w: u32) {
        self.n -= w as usize;
        if self.y[i] {
            self.pos -= w as usize;
        }
    }

    fn count(&self) -> usize {
        self.n
    }

    fn weighted_impurity(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        let p = self.pos as f64 / n;
        let q = 1.0 - p;
        let imp = match self.criterion {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy => {
                let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
                h(p) + h(q)
            }
        };
        imp * n
    }

    fn leaf_value(&self) -> f64 {
        if self.n == 0 {
            0.5
        } else {
            self.pos as f64 / self.n as f64
        }
    }
}

#[derive(Clone, Copy)]
struct RegStats<'a> {
    y: &'a [f64],
    sum: f64,
    sum_sq: f64,
    n: usize,
}

impl SplitStats for RegStats<'_> {
    fn add(&mut self, i: usize, w: u32) {
        let v = self.y[i];
        let wf = f64::from(w);
        self.n += w as usize;
        self.sum += wf * v;
        self.sum_sq += wf * v * v;
    }

    fn sub(&mut self, i: usize, w: u32) {
        let v = self.y[i];
        let wf = f64::from(w);
        self.n -= w as usize;
        self.sum -= wf * v;
        self.sum_sq -= wf * v * v;
    }

    fn count(&self) -> usize {
        self.n
    }

    fn weighted_impurity(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.sum_sq - self.sum * self.sum / self.n as f64).max(0.0)
    }

    fn leaf_value(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

/// Row indices of each column sorted by (value, row). Computed once per
/// matrix and shared by every tree grown on it.
#[derive(Debug, Clone)]
pub struct Presorted {
    order: Vec<Vec<usize>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Presorted {
        let order = (0..x.cols())
            .map(|f| {
                let mut idx: Vec<usize> = (0..x.rows()).collect();
                idx.sort_unstable_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
                idx
            })
            .collect();
        Presorted { order }
    }

    /// Multiplicity of every row in the multiset `indices`, and the distinct
    /// rows sorted by each column.
    fn restrict(&self, rows: usize, indices: &[usize]) -> (Vec<u32>, Vec<Vec<usize>>) {
        let mut mult = vec![0u32; rows];
        for &i in indices {
            mult[i] += 1;
        }
        let cols = self
            .order
            .iter()
            .map(|col| col.iter().copied().filter(|&i| mult[i] > 0).collect())
            .collect();
        (mult, cols)
    }
}

/// Grows a tree over `cols[f][lo..hi]`, the node's samples sorted by column
/// `f`. Splitting stably partitions every column's segment, so each node
/// scans its samples in (value, row) order without re-sorting.
struct Builder<'a, S, R> {
    x: &'a Matrix,
    params: TreeParams,
    fresh: S,
    rng: &'a mut R,
    nodes: Vec<Node>,
    weight: Vec<u32>,
    cols: Vec<Vec<usize>>,
    goes_left: Vec<bool>,
    buf: Vec<usize>,
}

const MIN_DECREASE: f64 = 1e-12;

impl<S: SplitStats, R: Rng> Builder<'_, S, R> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x.cols();
        match self.params.max_features {
            Some(k) if k < d => sample(self.rng, d, k.max(1)).into_vec(),
            _ => (0..d).collect(),
        }
    }

    /// Returns the node index.
    fn grow(&mut self, lo: usize, hi: usize, depth: usize) -> usize {
        let mut parent = self.fresh;
        if let Some(col) = self.cols.first() {
            for &i in &col[lo..hi] {
                parent.add(i, self.weight[i]);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: parent.leaf_value(),
        });
        let n = hi - lo;
        let samples = parent.count();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let depth_ok = self.params.max_depth.map_or(true, |m| depth < m);
        let parent_imp = parent.weighted_impurity();
        if !depth_ok || samples < 2 * min_leaf || parent_imp <= MIN_DECREASE {
            return id;
        }

        let mut best: Option<(f64, usize, f64)> = None;
        for f in self.candidate_features() {
            let seg = &self.cols[f][lo..hi];
            let mut left = self.fresh;
            let mut right = parent;
            let mut v_prev = self.x.get(seg[0], f);
            for k in 1..n {
                let i_prev = seg[k - 1];
                let w = self.weight[i_prev];
                left.add(i_prev, w);
                right.sub(i_prev, w);
                let v = self.x.get(seg[k], f);
                let prev = v_prev;
                v_prev = v;
                if v == prev || left.count() < min_leaf || right.count() < min_leaf {
                    continue;
                }
                let score = left.weighted_impurity() + right.weighted_impurity();
                if best.map_or(true, |(b, _, _)| score < b) {
                    let mut thr = prev + (v - prev) / 2.0;
                    if !(thr < v) {
                        thr = prev;
                    }
                    best = Some((score, f, thr));
                }
            }
        }

        let Some((score, feature, threshold)) = best else {
            return id;
        };
        if parent_imp - score <= MIN_DECREASE {
            return id;
        }
        for &i in &self.cols[feature][lo..hi] {
            self.goes_left[i] = self.x.get(i, feature) <= threshold;
        }
        // children at the depth limit only read their samples from column 0
        let last_level = self.params.max_depth.is_some_and(|m| depth + 1 >= m);
        let partitioned = if last_level { 1 } else { self.cols.len() };
        let mut split = lo;
        for col in &mut self.cols[..partitioned] {
            self.buf.clear();
            let mut w = lo;
            for k in lo..hi {
                let i = col[k];
                if self.goes_left[i] {
                    col[w] = i;
                    w += 1;
                } else {
                    self.buf.push(i);
                }
            }
            col[w..hi].copy_from_slice(&self.buf);
            split = w;
        }
        let left = self.grow(lo, split, depth + 1);
        let right = self.grow(split, hi, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn run(mut self) -> Tree {
        let len = self.cols.first().map_or(0, Vec::len);
        if len > 0 {
            self.grow(0, len, 0);
        } else {
            self.nodes.push(Node::Leaf {
                value: self.fresh.leaf_value(),
            });
        }
        Tree { nodes: self.nodes }
    }
}

impl Tree {
    /// Classification tree on the rows in `indices` (repeats act as weights).
    /// Leaves hold the positive-class fraction.
    pub fn fit_classifier<R: Rng>(
        x: &Matrix,
        y: &[bool],
        indices: &[usize],
        criterion: Criterion,
        params: TreeParams,
        rng: &mut R,
    ) -> Tree {
        Tree::fit_classifier_presorted(x, &Presorted::new(x), y, indices, criterion, params, rng)
    }

    pub fn fit_classifier_presorted<R: Rng>(
        x: &Matrix,
        presorted: &Presorted,
        y: &[bool],
        indices: &[usize],
        criterion: Criterion,
        params: TreeParams,
        rng: &mut R,
    ) -> Tree {
        let (weight, cols) = presorted.restrict(x.rows(), indices);
        Builder {
            x,
            params,
            fresh: ClassStats::new(y, criterion),
            rng,
            nodes: Vec::new(),
            weight,
            cols,
            goes_left: vec![false; x.rows()],
            buf: Vec::with_capacity(indices.len()),
        }
        .run()
    }

    /// Least-squares regression tree; leaves hold the target mean.
    pub fn fit_regressor<R: Rng>(
        x: &Matrix,
        y: &[f64],
        indices: &[usize],
        params: TreeParams,
        rng: &mut R,
    ) -> Tree {
        Tree::fit_regressor_presorted(x, &Presorted::new(x), y, indices, params, rng)
    }

    pub fn fit_regressor_presorted<R: Rng>(
        x: &Matrix,
        presorted: &Presorted,
        y: &[f64],
        indices: &[usize],
        params: TreeParams,
        rng: &mut R,
    ) -> Tree {
        let (weight, cols) = presorted.restrict(x.rows(), indices);
        Builder {
            x,
            params,
            fresh: RegStats {
                y,
                sum: 0.0,
                sum_sq: 0.0,
                n: 0,
            },
            rng,
            nodes: Vec::new(),
            weight,
            cols,
            goes_left: vec![false; x.rows()],
            buf: Vec::with_capacity(indices.len()),
        }
        .run()
    }

    /// Index of the leaf reached by `row`.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn set_leaf_value(&mut self, leaf: usize, v: f64) {
        if let Node::Leaf { value } = &mut self.nodes[leaf] {
            *value = v;
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
