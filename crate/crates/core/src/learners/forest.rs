//! Random forest of fully grown Gini trees on bootstrap samples.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Fraction of genuine samples that reached this leaf.
        gen_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn gen_fraction(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { gen_fraction } => return *gen_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> Label {
        if self.gen_fraction(row) > 0.5 {
            Label::Gen
        } else {
            Label::Imp
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn gini(n_gen: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = n_gen as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    is_gen: Vec<bool>,
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    /// Best split on `feature` as (weighted child impurity, threshold).
    fn best_split_on(&self, samples: &[usize], feature: usize) -> Option<(f64, f64)> {
        let mut sorted: Vec<(f64, bool)> = samples
            .iter()
            .map(|&i| (self.x[i][feature], self.is_gen[i]))
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = sorted.len();
        let total_gen = sorted.iter().filter(|s| s.1).count();
        let mut left_gen = 0;
        let mut best: Option<(f64, f64)> = None;
        for k in 1..n {
            if sorted[k - 1].1 {
                left_gen += 1;
            }
            let (lo, hi) = (sorted[k - 1].0, sorted[k].0);
            if lo == hi {
                continue;
            }
            let impurity = (k as f64 * gini(left_gen, k)
                + (n - k) as f64 * gini(total_gen - left_gen, n - k))
                / n as f64;
            if best.is_none_or(|(b, _)| impurity < b) {
                let mut threshold = 0.5 * (lo + hi);
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some((impurity, threshold));
            }
        }
        best
    }

    fn grow(&mut self, samples: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let n_gen = samples.iter().filter(|&&i| self.is_gen[i]).count();
        self.nodes.push(Node::Leaf {
            gen_fraction: n_gen as f64 / samples.len() as f64,
        });
        if n_gen == 0 || n_gen == samples.len() || samples.len() < 2 {
            return id;
        }
        let d = self.x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);
        // Draw max_features candidates; keep drawing while none splits.
        let mut best: Option<(f64, usize, f64)> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.max_features && best.is_some() {
                break;
            }
            if let Some((imp, thr)) = self.best_split_on(&samples, f) {
                if best.is_none_or(|(b, _, _)| imp < b) {
                    best = Some((imp, f, thr));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let l = self.grow(left);
        let r = self.grow(right);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left: l,
            right: r,
        };
        id
    }
}

pub fn grow_tree(x: &[Vec<f64>], y: &[Label], samples: Vec<usize>, max_features: usize, seed: u64) -> Tree {
    let mut g = Grower {
        x,
        is_gen: y.iter().map(|l| *l == Label::Gen).collect(),
        max_features: max_features.max(1),
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: Vec::new(),
    };
    g.grow(samples);
    Tree { nodes: g.nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// `max_features = 0` means `floor(sqrt(d))`.
    pub fn fit(x: &[Vec<f64>], y: &[Label], n_trees: usize, max_features: usize, seed: u64) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let m = if max_features == 0 {
            ((d as f64).sqrt().floor() as usize).max(1)
        } else {
            max_features
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees = (0..n_trees)
            .map(|_| {
                let tree_seed: u64 = rng.random();
                let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grow_tree(x, y, samples, m, tree_seed)
            })
            .collect();
        Self { trees }
    }

    /// Genuine votes minus impostor votes.
    pub fn score(&self, row: &[f64]) -> f64 {
        self.trees
            .iter()
            .map(|t| if t.predict(row) == Label::Gen { 1.0 } else { -1.0 })
            .sum()
    }
}
