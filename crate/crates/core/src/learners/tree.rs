use rand::seq::SliceRandom;

use super::ForestParams;
use crate::data::{FeatureMatrix, Label, TaskKind};
use crate::seed::Rng;

#[derive(Debug, Clone, PartialEq)]
enum Node {
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

/// CART tree over numeric attributes. Splits test `attribute <= threshold`
/// with thresholds at midpoints between consecutive distinct values.
/// Classification leaves hold the positive fraction, regression leaves the
/// mean target.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    task: TaskKind,
    nodes: Vec<Node>,
    /// Total weighted impurity decrease per attribute.
    gains: Vec<f64>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

// n-weighted impurity: 2·s·(n−s)/n is n·gini for 0/1 targets, q − s²/n is the
// sum of squared deviations for real targets.
fn weighted_impurity(task: TaskKind, n: f64, s: f64, q: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    match task {
        TaskKind::Classification => 2.0 * s * (n - s) / n,
        TaskKind::Regression => (q - s * s / n).max(0.0),
    }
}

impl DecisionTree {
    /// Grows a tree on `rows` (indices into `x`, repeats allowed). `y` holds
    /// one numeric target per row of `x`: 1/0 for classification.
    pub(crate) fn fit(
        task: TaskKind,
        x: &FeatureMatrix,
        y: &[f64],
        mut rows: Vec<usize>,
        params: &ForestParams,
        rng: &mut Rng,
    ) -> DecisionTree {
        let n_features = x.n_cols();
        let mtry = params.features_per_split.resolve(n_features);
        let mut tree = DecisionTree {
            task,
            nodes: vec![Node::Leaf { value: 0.0 }],
            gains: vec![0.0; n_features],
        };
        let mut features: Vec<usize> = (0..n_features).collect();
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(rows.len());
        let mut stack = vec![(0usize, 0usize, rows.len(), 0usize)];

        while let Some((node, start, end, depth)) = stack.pop() {
            let slice = &mut rows[start..end];
            let n = slice.len() as f64;
            let (mut s, mut q) = (0.0, 0.0);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &r in slice.iter() {
                s += y[r];
                q += y[r] * y[r];
                lo = lo.min(y[r]);
                hi = hi.max(y[r]);
            }
            tree.nodes[node] = Node::Leaf { value: s / n };
            let stop =
                slice.len() < params.min_samples_split || params.max_depth.is_some_and(|d| depth >= d) || lo == hi;
            if stop {
                continue;
            }

            let parent = weighted_impurity(task, n, s, q);
            features.shuffle(rng);
            let mut best: Option<Candidate> = None;
            let mut usable = 0;
            for &f in &features {
                if usable >= mtry && best.is_some() {
                    break;
                }
                pairs.clear();
                pairs.extend(slice.iter().map(|&r| (x.get(r, f), y[r])));
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                if pairs[0].0 == pairs[pairs.len() - 1].0 {
                    continue;
                }
                usable += 1;
                let (mut ls, mut lq) = (0.0, 0.0);
                for i in 1..pairs.len() {
                    let (xv, yv) = pairs[i - 1];
                    ls += yv;
                    lq += yv * yv;
                    let next = pairs[i].0;
                    if xv == next {
                        continue;
                    }
                    let ln = i as f64;
                    let gain =
                        parent - weighted_impurity(task, ln, ls, lq) - weighted_impurity(task, n - ln, s - ls, q - lq);
                    if best.as_ref().is_none_or(|b| gain > b.gain) {
                        let mut threshold = xv / 2.0 + next / 2.0;
                        if threshold >= next || threshold < xv {
                            threshold = xv;
                        }
                        best = Some(Candidate {
                            feature: f,
                            threshold,
                            gain,
                        });
                    }
                }
            }
            let Some(split) = best else { continue };

            let mut mid = 0;
            for i in 0..slice.len() {
                if x.get(slice[i], split.feature) <= split.threshold {
                    slice.swap(i, mid);
                    mid += 1;
                }
            }
            let left = tree.nodes.len();
            tree.nodes.push(Node::Leaf { value: 0.0 });
            tree.nodes.push(Node::Leaf { value: 0.0 });
            tree.nodes[node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right: left + 1,
            };
            tree.gains[split.feature] += split.gain.max(0.0);
            stack.push((left + 1, start + mid, end, depth + 1));
            stack.push((left, start, start + mid, depth + 1));
        }
        tree
    }

    /// Raw leaf value: positive fraction or regression mean.
    pub fn predict_value(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Majority label at the leaf; an exact tie is negative.
    pub fn predict_label(&self, row: &[f64]) -> Label {
        if self.predict_value(row) > 0.5 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub(crate) fn gains(&self) -> &[f64] {
        &self.gains
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::FeaturesPerSplit;
    use crate::seed::rng_for;

    fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        let n = rows[0].len();
        FeatureMatrix::new((0..n).map(|i| format!("f{i}")).collect(), rows).unwrap()
    }

    fn params() -> ForestParams {
        ForestParams {
            features_per_split: FeaturesPerSplit::All,
            ..Default::default()
        }
    }

    #[test]
    fn separable_threshold_at_midpoint() {
        let x = matrix(vec![vec![-2.0], vec![-1.0], vec![1.0], vec![3.0]]);
        let y = [0.0, 0.0, 1.0, 1.0];
        let t = DecisionTree::fit(
            TaskKind::Classification,
            &x,
            &y,
            (0..4).collect(),
            &params(),
            &mut rng_for(0),
        );
        assert_eq!(t.n_splits(), 1);
        assert_eq!(t.predict_label(&[-0.01]), Label::Negative);
        assert_eq!(t.predict_label(&[0.0]), Label::Negative);
        assert_eq!(t.predict_label(&[0.01]), Label::Positive);
        // gini gain: 4·0.5 − 0 − 0
        assert!((t.gains()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn xor_needs_zero_gain_first_split() {
        let x = matrix(vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        let y = [0.0, 1.0, 1.0, 0.0];
        let t = DecisionTree::fit(
            TaskKind::Classification,
            &x,
            &y,
            (0..4).collect(),
            &params(),
            &mut rng_for(3),
        );
        for (r, want) in x.rows().zip(y) {
            assert_eq!(t.predict_value(r), want);
        }
    }

    #[test]
    fn regression_means_and_depth_limit() {
        let x = matrix(vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let y = [1.0, 1.0, 5.0, 7.0];
        let p = ForestParams {
            max_depth: Some(1),
            ..params()
        };
        let t = DecisionTree::fit(TaskKind::Regression, &x, &y, (0..4).collect(), &p, &mut rng_for(0));
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict_value(&[1.5]), 1.0);
        assert_eq!(t.predict_value(&[3.5]), 6.0);
    }

    #[test]
    fn constant_target_is_a_leaf() {
        let x = matrix(vec![vec![1.0], vec![2.0], vec![3.0]]);
        let t = DecisionTree::fit(
            TaskKind::Regression,
            &x,
            &[4.0; 3],
            vec![0, 1, 2],
            &params(),
            &mut rng_for(0),
        );
        assert_eq!(t.n_splits(), 0);
        assert_eq!(t.predict_value(&[100.0]), 4.0);
    }

    #[test]
    fn adjacent_floats_split_correctly() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = matrix(vec![vec![a], vec![b]]);
        let t = DecisionTree::fit(
            TaskKind::Classification,
            &x,
            &[0.0, 1.0],
            vec![0, 1],
            &params(),
            &mut rng_for(0),
        );
        assert_eq!(t.predict_label(&[a]), Label::Negative);
        assert_eq!(t.predict_label(&[b]), Label::Positive);
    }
}
