use serde::{Deserialize, Serialize};

/// Binary decision tree. Rows with `row[feature] <= threshold` go left.
///
/// Forest trees carry a class distribution at each leaf; boosted trees a
/// real-valued weight. `gain` on a split is the criterion improvement that
/// justified it (Gini decrease or boosting loss reduction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode<L> {
    Leaf {
        value: L,
    },
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: Box<TreeNode<L>>,
        right: Box<TreeNode<L>>,
    },
}

impl<L> TreeNode<L> {
    pub fn leaf(value: L) -> Self {
        TreeNode::Leaf { value }
    }

    pub fn split(feature: usize, threshold: f64, gain: f64, left: Self, right: Self) -> Self {
        TreeNode::Split {
            feature,
            threshold,
            gain,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn evaluate(&self, row: &[f64]) -> &L {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    /// `(feature, gain)` of every split, in preorder.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.visit_splits(&mut out);
        out
    }

    fn visit_splits(&self, out: &mut Vec<(usize, f64)>) {
        if let TreeNode::Split {
            feature,
            gain,
            left,
            right,
            ..
        } = self
        {
            out.push((*feature, *gain));
            left.visit_splits(out);
            right.visit_splits(out);
        }
    }

    /// Largest feature index referenced by a split, if any.
    pub(crate) fn max_feature(&self) -> Option<usize> {
        self.splits().into_iter().map(|(f, _)| f).max()
    }
}

/// Candidate thresholds for one feature: midpoints between consecutive
/// distinct sorted values, paired with the split position in `sorted`.
pub(crate) fn midpoints<'a>(sorted: &'a [(f64, usize)]) -> impl Iterator<Item = (usize, f64)> + 'a {
    (1..sorted.len()).filter_map(move |pos| {
        let (lo, hi) = (sorted[pos - 1].0, sorted[pos].0);
        (hi > lo).then(|| (pos, lo + (hi - lo) / 2.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_shape() {
        let t = TreeNode::split(
            0,
            0.5,
            1.0,
            TreeNode::leaf(1.0),
            TreeNode::split(1, 2.0, 0.5, TreeNode::leaf(2.0), TreeNode::leaf(3.0)),
        );
        assert_eq!(*t.evaluate(&[0.5, 9.0]), 1.0);
        assert_eq!(*t.evaluate(&[0.6, 2.0]), 2.0);
        assert_eq!(*t.evaluate(&[0.6, 2.1]), 3.0);
        assert_eq!(t.depth(), 2);
        assert_eq!(t.n_leaves(), 3);
        assert_eq!(t.splits(), vec![(0, 1.0), (1, 0.5)]);
    }

    #[test]
    fn midpoints_skip_duplicates() {
        let sorted = [(1.0, 0), (1.0, 1), (2.0, 2), (4.0, 3)];
        let m: Vec<_> = midpoints(&sorted).collect();
        assert_eq!(m, vec![(2, 1.5), (3, 3.0)]);
    }
}
