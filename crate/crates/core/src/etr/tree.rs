//! CART-style classification tree over binary attributes, split by Gini
//! impurity decrease.

use super::instances::{Features, InstanceSet};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(usize),
    Split {
        attribute: usize,
        absent: Box<Node>,
        present: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: Node,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

/// Most frequent label; ties go to the smallest label index.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct Builder<'a> {
    set: &'a InstanceSet,
    max_depth: Option<usize>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.set.labels.len()];
        for &r in rows {
            c[self.set.instances[r].label] += 1;
        }
        c
    }

    fn grow(&self, rows: Vec<usize>, depth: usize) -> Node {
        let counts = self.counts(&rows);
        let leaf = Node::Leaf(majority(&counts));
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || self.max_depth.is_some_and(|d| depth >= d) {
            return leaf;
        }
        let Some(attribute) = self.best_split(&rows, &counts) else {
            return leaf;
        };
        let (present, absent): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.set.instances[r].features.get(attribute));
        Node::Split {
            attribute,
            absent: Box::new(self.grow(absent, depth + 1)),
            present: Box::new(self.grow(present, depth + 1)),
        }
    }

    /// Attribute with the largest Gini decrease among those that separate
    /// the rows into two non-empty sides; ties go to the lowest index. A
    /// separating split never increases weighted Gini, so zero-gain splits
    /// are admissible (needed for XOR-like structure).
    fn best_split(&self, rows: &[usize], counts: &[usize]) -> Option<usize> {
        let n = rows.len();
        let parent = gini(counts, n);
        let mut best: Option<(usize, f64)> = None;
        let mut present_counts = vec![0usize; counts.len()];
        for a in 0..self.set.attributes.len() {
            present_counts.iter_mut().for_each(|c| *c = 0);
            let mut n_present = 0;
            for &r in rows {
                let inst = &self.set.instances[r];
                if inst.features.get(a) {
                    present_counts[inst.label] += 1;
                    n_present += 1;
                }
            }
            if n_present == 0 || n_present == n {
                continue;
            }
            let absent_counts: Vec<usize> = counts.iter().zip(&present_counts).map(|(t, p)| t - p).collect();
            let n_absent = n - n_present;
            let weighted = (n_present as f64 * gini(&present_counts, n_present)
                + n_absent as f64 * gini(&absent_counts, n_absent))
                / n as f64;
            let gain = parent - weighted;
            // small tolerance so float noise does not reorder equal gains
            if best.is_none_or(|(_, g)| gain > g + 1e-12) {
                best = Some((a, gain));
            }
        }
        best.map(|(a, _)| a)
    }
}

impl DecisionTree {
    /// Trains on all instances of `set`. `max_depth = None` grows until
    /// leaves are pure or inseparable.
    pub fn fit(set: &InstanceSet, max_depth: Option<usize>) -> Self {
        let rows: Vec<usize> = (0..set.len()).collect();
        Self::fit_rows(set, &rows, max_depth)
    }

    pub fn fit_rows(set: &InstanceSet, rows: &[usize], max_depth: Option<usize>) -> Self {
        assert!(!rows.is_empty(), "training set must not be empty");
        let builder = Builder { set, max_depth };
        DecisionTree {
            root: builder.grow(rows.to_vec(), 0),
        }
    }

    pub fn predict(&self, x: &Features) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(l) => return *l,
                Node::Split {
                    attribute,
                    absent,
                    present,
                } => node = if x.get(*attribute) { present } else { absent },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { absent, present, .. } => 1 + d(absent).max(d(present)),
            }
        }
        d(&self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("a{i}")).collect()
    }

    fn training_accuracy(set: &InstanceSet, tree: &DecisionTree) -> f64 {
        let ok = set
            .instances
            .iter()
            .filter(|i| tree.predict(&i.features) == i.label)
            .count();
        ok as f64 / set.len() as f64
    }

    #[test]
    fn separable_unique_properties() {
        let set = InstanceSet::from_rows(
            attrs(3),
            vec![
                (vec![true, false, false], "A"),
                (vec![false, true, false], "B"),
                (vec![false, false, true], "C"),
            ],
        )
        .unwrap();
        let tree = DecisionTree::fit(&set, None);
        assert_eq!(training_accuracy(&set, &tree), 1.0);
    }

    #[test]
    fn identical_vectors_tie_goes_to_smaller_label() {
        let set = InstanceSet::from_rows(
            attrs(2),
            vec![(vec![true, false], "zeta"), (vec![true, false], "alpha")],
        )
        .unwrap();
        let tree = DecisionTree::fit(&set, None);
        assert_eq!(
            set.label_name(tree.predict(&Features::from_bools(&[true, false]))),
            "alpha"
        );
    }

    #[test]
    fn xor_depth_two() {
        let set = InstanceSet::from_rows(
            attrs(2),
            vec![
                (vec![false, false], "a"),
                (vec![false, true], "b"),
                (vec![true, false], "b"),
                (vec![true, true], "a"),
            ],
        )
        .unwrap();
        let tree = DecisionTree::fit(&set, Some(2));
        assert_eq!(training_accuracy(&set, &tree), 1.0);
        assert_eq!(tree.depth(), 2);
        let stump = DecisionTree::fit(&set, Some(1));
        assert_eq!(training_accuracy(&set, &stump), 0.5);
    }

    #[test]
    fn split_ties_prefer_lowest_attribute() {
        // attributes 0 and 1 are duplicates; both split perfectly
        let set = InstanceSet::from_rows(attrs(2), vec![(vec![true, true], "a"), (vec![false, false], "b")]).unwrap();
        let tree = DecisionTree::fit(&set, None);
        match &tree.root {
            Node::Split { attribute, .. } => assert_eq!(*attribute, 0),
            n => panic!("expected split, got {n:?}"),
        }
    }

    #[test]
    fn depth_zero_is_majority_leaf() {
        let set = InstanceSet::from_rows(
            attrs(1),
            vec![(vec![true], "b"), (vec![false], "b"), (vec![false], "a")],
        )
        .unwrap();
        let tree = DecisionTree::fit(&set, Some(0));
        assert_eq!(tree.depth(), 0);
        assert_eq!(set.label_name(tree.predict(&Features::from_bools(&[false]))), "b");
    }
}
