//! CART classification trees grown on Gini impurity.
//!
//! A split on feature `j` at threshold `s` sends `x[j] < s` left and
//! `x[j] >= s` right. Thresholds sit at midpoints between consecutive
//! distinct sorted values. Among equally good splits the lowest feature
//! index wins, then the lowest threshold.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::rng::Rng;

/// Splits must lower the size-weighted impurity by more than this.
const MIN_DECREASE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class counts of the training points that reached the leaf;
    /// `counts[k - 1]` is class `k`.
    Leaf { counts: Vec<u32> },
}

/// A tree stored as an arena; the root is `nodes[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_counts(&self, x: &[f64]) -> &[u32] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] < *threshold { *left } else { *right },
                TreeNode::Leaf { counts } => return counts,
            }
        }
    }

    /// Majority class of the leaf reached by `x`, ties to the lowest class.
    pub fn vote(&self, x: &[f64]) -> u32 {
        argmax_lowest(self.leaf_counts(x)) as u32 + 1
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        let mut depth = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            depth = depth.max(d);
            if let TreeNode::Split { left, right, .. } = self.nodes[i] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        depth
    }
}

pub(crate) fn argmax_lowest<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Outcome of the best split search on one region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Gini impurity of the region before splitting.
    pub parent_impurity: f64,
    /// Size-weighted mean Gini impurity of the two child regions.
    pub child_impurity: f64,
}

impl Split {
    pub fn decrease(&self) -> f64 {
        self.parent_impurity - self.child_impurity
    }
}

/// Gini impurity `sum_k p_k (1 - p_k)` of a region with class counts `counts`.
pub fn gini(counts: &[u32]) -> f64 {
    let n: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if n == 0 {
        return 0.0;
    }
    let sq: u64 = counts.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
    1.0 - sq as f64 / (n * n) as f64
}

/// Region impurity from integer sufficient statistics: `n * gini`.
fn scaled_gini(n: u64, sum_sq: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 - sum_sq as f64 / n as f64
    }
}

struct Scratch {
    sorted: Vec<(f64, u32)>,
    left: Vec<u32>,
    right: Vec<u32>,
}

impl Scratch {
    fn new(n_classes: usize) -> Self {
        Self {
            sorted: Vec::new(),
            left: vec![0; n_classes],
            right: vec![0; n_classes],
        }
    }
}

fn best_split(
    data: &FeatureMatrix,
    labels: &[u32],
    rows: &[usize],
    candidates: &[usize],
    counts: &[u32],
    scratch: &mut Scratch,
) -> Option<Split> {
    let n = rows.len() as u64;
    if n < 2 {
        return None;
    }
    let total_sq: u64 = counts.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
    let parent = scaled_gini(n, total_sq);
    let mut best: Option<(f64, usize, f64)> = None;
    let mut best_score = parent - MIN_DECREASE * n as f64;

    for &j in candidates {
        scratch.sorted.clear();
        scratch.sorted.extend(rows.iter().map(|&i| (data.get(i, j), labels[i] - 1)));
        scratch.sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        scratch.left.iter_mut().for_each(|c| *c = 0);
        scratch.right.copy_from_slice(counts);
        let (mut sq_left, mut sq_right) = (0u64, total_sq);
        for i in 0..rows.len() - 1 {
            let (value, class) = scratch.sorted[i];
            let k = class as usize;
            sq_left += 2 * u64::from(scratch.left[k]) + 1;
            sq_right -= 2 * u64::from(scratch.right[k]) - 1;
            scratch.left[k] += 1;
            scratch.right[k] -= 1;
            let next = scratch.sorted[i + 1].0;
            if next <= value {
                continue;
            }
            let n_left = i as u64 + 1;
            let score = scaled_gini(n_left, sq_left) + scaled_gini(n - n_left, sq_right);
            if score < best_score {
                best_score = score;
                let mut threshold = 0.5 * (value + next);
                if threshold <= value {
                    threshold = next;
                }
                best = Some((score, j, threshold));
            }
        }
    }
    best.map(|(score, feature, threshold)| Split {
        feature,
        threshold,
        parent_impurity: parent / n as f64,
        child_impurity: score / n as f64,
    })
}

fn class_counts(labels: &[u32], rows: &[usize], n_classes: usize) -> Vec<u32> {
    let mut counts = vec![0u32; n_classes];
    for &i in rows {
        counts[labels[i] as usize - 1] += 1;
    }
    counts
}

/// Best Gini split of the region `rows` over `candidates`, or `None` when
/// no split lowers the impurity (pure or unsplittable regions).
///
/// `data` must be labeled and free of missing values.
pub fn gini_split(data: &FeatureMatrix, rows: &[usize], candidates: &[usize]) -> Option<Split> {
    let labels = data.labels().expect("gini_split needs labels");
    let n_classes = data.n_classes();
    let counts = class_counts(labels, rows, n_classes);
    let mut sorted: Vec<usize> = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    best_split(data, labels, rows, &sorted, &counts, &mut Scratch::new(n_classes))
}

/// Grows a tree on the multiset of training rows `rows` (repeats allowed,
/// as produced by bootstrapping), drawing a fresh random subset of `mtry`
/// candidate features at every branching. Returns the tree and the
/// per-feature impurity decrease, weighted by the share of `rows` reaching
/// each split.
pub fn grow_tree_on(data: &FeatureMatrix, rows: Vec<usize>, mtry: usize, rng: &mut Rng) -> (Tree, Vec<f64>) {
    let labels = data.labels().expect("grow_tree needs labels");
    let p = data.n_cols();
    let n_classes = data.n_classes();
    let mtry = mtry.clamp(1, p.max(1));
    let total = rows.len() as f64;
    let mut rows = rows;
    let mut importance = vec![0.0; p];
    let mut nodes = vec![TreeNode::Leaf { counts: Vec::new() }];
    let mut scratch = Scratch::new(n_classes);
    let mut stack = vec![(0usize, 0usize, rows.len())];
    let mut candidates = Vec::with_capacity(mtry);

    while let Some((node, lo, hi)) = stack.pop() {
        let region = &rows[lo..hi];
        let counts = class_counts(labels, region, n_classes);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let split = if pure || region.len() < 2 {
            None
        } else {
            candidates.clear();
            if mtry >= p {
                candidates.extend(0..p);
            } else {
                candidates.extend(rand::seq::index::sample(rng, p, mtry));
                candidates.sort_unstable();
            }
            best_split(data, labels, region, &candidates, &counts, &mut scratch)
        };
        let Some(split) = split else {
            nodes[node] = TreeNode::Leaf { counts };
            continue;
        };
        importance[split.feature] += region.len() as f64 / total * split.decrease();

        let slice = &mut rows[lo..hi];
        let mut mid = 0;
        for i in 0..slice.len() {
            if data.get(slice[i], split.feature) < split.threshold {
                slice.swap(i, mid);
                mid += 1;
            }
        }
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(TreeNode::Leaf { counts: Vec::new() });
        nodes.push(TreeNode::Leaf { counts: Vec::new() });
        nodes[node] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        stack.push((right, lo + mid, hi));
        stack.push((left, lo, lo + mid));
    }
    (Tree { nodes }, importance)
}

/// Grows a tree on every row of `data`.
pub fn grow_tree(data: &FeatureMatrix, mtry: usize, rng: &mut Rng) -> Tree {
    grow_tree_on(data, (0..data.n_rows()).collect(), mtry, rng).0
}

/// Draws a uniform random subset of `rows` with replacement, same size.
pub(crate) fn bootstrap(n: usize, rng: &mut Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn labeled(rows: &[&[f64]], labels: &[u32]) -> FeatureMatrix {
        FeatureMatrix::from_labeled_rows(rows.iter().map(|r| r.to_vec()).collect(), labels.to_vec()).unwrap()
    }

    #[test]
    fn one_dimensional_split_at_midpoint() {
        let m = labeled(&[&[1.0], &[2.0], &[10.0]], &[1, 1, 2]);
        let s = gini_split(&m, &[0, 1, 2], &[0]).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 6.0);
        assert_eq!(s.child_impurity, 0.0);
        assert!((s.parent_impurity - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn pure_and_unsplittable_regions() {
        let pure = labeled(&[&[1.0], &[5.0]], &[2, 2]);
        assert_eq!(gini_split(&pure, &[0, 1], &[0]), None);
        let twins = labeled(&[&[3.0, 3.0], &[3.0, 3.0]], &[1, 2]);
        assert_eq!(gini_split(&twins, &[0, 1], &[0, 1]), None);
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // Both features separate the classes perfectly.
        let m = labeled(&[&[0.0, 0.0], &[1.0, 1.0]], &[1, 2]);
        assert_eq!(gini_split(&m, &[0, 1], &[1, 0]).unwrap().feature, 0);
    }

    #[test]
    fn single_point_tree_is_leaf() {
        let m = labeled(&[&[4.0, 2.0]], &[2]);
        let tree = grow_tree(&m, 2, &mut rng::seeded(1));
        assert_eq!(tree.nodes, vec![TreeNode::Leaf { counts: vec![0, 1] }]);
        assert_eq!(tree.vote(&[0.0, 0.0]), 2);
    }

    #[test]
    fn separable_data_gives_stump() {
        let m = labeled(&[&[0.0, 5.0], &[1.0, 3.0], &[2.0, 9.0], &[7.0, 1.0], &[8.0, 4.0]], &[1, 1, 1, 2, 2]);
        let tree = grow_tree(&m, 2, &mut rng::seeded(1));
        assert_eq!(tree.depth(), 1);
        for (i, r) in m.rows().enumerate() {
            assert_eq!(tree.vote(r), m.labels().unwrap()[i]);
        }
    }

    #[test]
    fn full_feature_trees_are_deterministic() {
        let m = labeled(&[&[0.0, 5.0], &[1.0, 3.0], &[2.0, 9.0], &[7.0, 1.0], &[8.0, 4.0], &[3.0, 3.0]], &[1, 2, 1, 2, 1, 2]);
        let a = grow_tree(&m, 2, &mut rng::seeded(1));
        let b = grow_tree(&m, 2, &mut rng::seeded(99));
        assert_eq!(a, b);
        for (i, r) in m.rows().enumerate() {
            assert_eq!(a.vote(r), m.labels().unwrap()[i]);
        }
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 0]), 0.0);
        assert_eq!(gini(&[1, 1]), 0.5);
        assert!((gini(&[1, 1, 1]) - 2.0 / 3.0).abs() < 1e-15);
    }
}
