use alloc::vec;
use alloc::vec::Vec;

use crate::nn::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        class: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART classification tree grown with the Gini criterion.
///
/// The best split maximizes the weighted impurity decrease; equal decreases
/// keep the lowest feature, then the lowest threshold. Split quality depends
/// only on class counts on either side, so the fitted tree does not depend on
/// the order of the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    importances: Vec<f64>,
}

const MIN_DECREASE: f64 = 1e-12;

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n) * (c as f64 / n)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    counts.iter().enumerate().fold(0, |b, (i, &c)| if c > counts[b] { i } else { b })
}

struct Best {
    decrease: f64,
    feature: usize,
    threshold: f64,
}

impl DecisionTree {
    pub fn fit(x: &Matrix, y: &[usize], classes: usize, max_depth: usize) -> Result<Self> {
        let n = x.rows();
        if n == 0 || y.len() != n {
            return Err(Error::shape("tree labels", n, y.len()));
        }
        if classes == 0 || y.iter().any(|&c| c >= classes) {
            return Err(Error::invalid("tree labels must lie in 0..classes"));
        }
        if !x.is_finite() {
            return Err(Error::invalid("tree features must be finite"));
        }
        let mut tree = Self {
            nodes: Vec::new(),
            importances: vec![0.0; x.cols()],
        };
        tree.grow(x, y, classes, max_depth, (0..n).collect(), 0, n);
        Ok(tree)
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &mut self,
        x: &Matrix,
        y: &[usize],
        classes: usize,
        max_depth: usize,
        rows: Vec<usize>,
        depth: usize,
        total: usize,
    ) -> usize {
        let mut counts = vec![0usize; classes];
        for &r in &rows {
            counts[y[r]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let impurity = gini(&counts, rows.len());
        if depth >= max_depth || rows.len() < 2 || impurity == 0.0 {
            return id;
        }
        let Some(best) = self.best_split(x, y, classes, &rows, &counts, impurity, total) else {
            return id;
        };
        self.importances[best.feature] += best.decrease;
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| x.get(r, best.feature) <= best.threshold);
        drop(rows);
        let l = self.grow(x, y, classes, max_depth, left, depth + 1, total);
        let r = self.grow(x, y, classes, max_depth, right, depth + 1, total);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    #[allow(clippy::too_many_arguments)]
    fn best_split(
        &self,
        x: &Matrix,
        y: &[usize],
        classes: usize,
        rows: &[usize],
        counts: &[usize],
        impurity: f64,
        total: usize,
    ) -> Option<Best> {
        let n = rows.len();
        let weight = n as f64 / total as f64;
        let mut best: Option<Best> = None;
        let mut sorted = rows.to_vec();
        for feature in 0..x.cols() {
            sorted.sort_by(|&a, &b| x.get(a, feature).total_cmp(&x.get(b, feature)));
            let mut left = vec![0usize; classes];
            for i in 0..n - 1 {
                left[y[sorted[i]]] += 1;
                let (v, next) = (x.get(sorted[i], feature), x.get(sorted[i + 1], feature));
                if v == next {
                    continue;
                }
                let nl = i + 1;
                let right: Vec<usize> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
                let child = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
                let decrease = weight * (impurity - child);
                if decrease > MIN_DECREASE && best.as_ref().is_none_or(|b| decrease > b.decrease) {
                    let mid = v + (next - v) / 2.0;
                    best = Some(Best {
                        decrease,
                        feature,
                        threshold: if mid < next { mid } else { v },
                    });
                }
            }
        }
        best
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Summed impurity decrease per feature, each weighted by the share of
    /// training rows reaching the split.
    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn leaf_impurity(tree: &DecisionTree, x: &Matrix, y: &[usize], classes: usize) -> f64 {
        let mut leaves: alloc::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (r, row) in x.iter_rows().enumerate() {
            let mut id = 0;
            while let Node::Split {
                feature,
                threshold,
                left,
                right,
            } = tree.nodes[id]
            {
                id = if row[feature] <= threshold { left } else { right };
            }
            leaves.entry(id).or_default().push(y[r]);
        }
        leaves
            .values()
            .map(|labels| {
                let mut c = vec![0; classes];
                labels.iter().for_each(|&l| c[l] += 1);
                labels.len() as f64 / y.len() as f64 * gini(&c, labels.len())
            })
            .sum()
    }

    fn noisy(n: usize, seed: u64) -> (Matrix, Vec<usize>) {
        let mut r = rng::seeded(seed);
        let x = Matrix::from_vec(n, 3, (0..3 * n).map(|_| r.random_range(0..8) as f64).collect()).unwrap();
        let y = (0..n).map(|i| ((x.get(i, 0) as usize) + r.random_range(0..2)) % 3).collect();
        (x, y)
    }

    #[test]
    fn importance_sums_to_total_decrease() {
        let (x, y) = noisy(300, 1);
        let tree = DecisionTree::fit(&x, &y, 3, 8).unwrap();
        let mut root = vec![0; 3];
        y.iter().for_each(|&l| root[l] += 1);
        let total = gini(&root, y.len()) - leaf_impurity(&tree, &x, &y, 3);
        let sum: f64 = tree.importances().iter().sum();
        assert!((sum - total).abs() < 1e-9, "{sum} vs {total}");
        assert!(tree.depth() <= 8);
    }

    #[test]
    fn row_order_does_not_change_tree() {
        let (x, y) = noisy(200, 4);
        let tree = DecisionTree::fit(&x, &y, 3, 5).unwrap();
        let mut perm: Vec<usize> = (0..200).collect();
        perm.shuffle(&mut rng::seeded(9));
        let xp = x.select_rows(&perm);
        let yp: Vec<usize> = perm.iter().map(|&i| y[i]).collect();
        let tp = DecisionTree::fit(&xp, &yp, 3, 5).unwrap();
        assert_eq!(tree.nodes, tp.nodes);
        assert_eq!(tree.importances, tp.importances);
    }

    #[test]
    fn separable_feature_gets_all_importance() {
        let x = Matrix::from_vec(6, 2, vec![0.0, 5.0, 1.0, 3.0, 2.0, 5.0, 10.0, 3.0, 11.0, 5.0, 12.0, 3.0]).unwrap();
        let y = [0, 0, 0, 1, 1, 1];
        let tree = DecisionTree::fit(&x, &y, 2, 8).unwrap();
        assert_eq!(tree.importances()[1], 0.0);
        assert!((tree.importances()[0] - 0.5).abs() < 1e-15);
        assert_eq!(tree.predict(&[6.0, 0.0]), 0);
        assert_eq!(tree.predict(&[6.5, 0.0]), 1);
    }
}
