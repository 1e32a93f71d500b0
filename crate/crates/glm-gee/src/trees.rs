//! Unlabeled rooted trees up to order 8 with their classical statistics.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_TREE_ORDER: usize = 8;

/// A rooted tree stored canonically: children are indices into the
/// enclosing [`Forest`], kept in nondecreasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    pub children: Vec<usize>,
    pub order: usize,
    /// Size of the automorphism group.
    pub symmetry: u64,
    /// Density γ(τ) = ρ(τ)·∏ γ(children).
    pub density: u64,
    /// Number of monotonic labelings, ρ!/(σ·γ).
    pub alpha: u64,
}

/// All trees up to some order, each tree's children referring to earlier entries.
#[derive(Clone, Debug)]
pub struct Forest {
    pub trees: Vec<RootedTree>,
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl Forest {
    fn build(max_order: usize) -> Forest {
        let mut trees: Vec<RootedTree> = Vec::new();
        let mut by_order: Vec<Vec<usize>> = vec![Vec::new(); max_order + 1];
        for n in 1..=max_order {
            let mut sets = Vec::new();
            multisets(&trees, &by_order, n - 1, 0, &mut Vec::new(), &mut sets);
            for children in sets {
                let idx = trees.len();
                trees.push(make_tree(&trees, children));
                by_order[n].push(idx);
            }
        }
        Forest { trees }
    }

    /// The shared forest up to [`MAX_TREE_ORDER`].
    pub fn global() -> &'static Forest {
        static F: OnceLock<Forest> = OnceLock::new();
        F.get_or_init(|| Forest::build(MAX_TREE_ORDER))
    }

    /// Number of trees of order at most `n` (a prefix of `trees`).
    pub fn count_up_to(&self, n: usize) -> usize {
        self.trees.iter().take_while(|t| t.order <= n).count()
    }

    /// Bracket notation: `[]` is the single node, `[[],[]]` the bushy order-3 tree.
    pub fn notation(&self, idx: usize) -> String {
        let kids: Vec<String> = self.trees[idx].children.iter().map(|&c| self.notation(c)).collect();
        format!("[{}]", kids.join(","))
    }

    pub fn display(&self, idx: usize) -> TreeDisplay<'_> {
        TreeDisplay { forest: self, idx }
    }
}

pub struct TreeDisplay<'a> {
    forest: &'a Forest,
    idx: usize,
}

impl fmt::Display for TreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.forest.notation(self.idx))
    }
}

// Nondecreasing index sequences whose tree orders sum to `remaining`.
fn multisets(
    trees: &[RootedTree],
    by_order: &[Vec<usize>],
    remaining: usize,
    min_idx: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if remaining == 0 {
        out.push(cur.clone());
        return;
    }
    for (o, ids) in by_order.iter().enumerate().take(remaining + 1).skip(1) {
        for &i in ids {
            if i < min_idx {
                continue;
            }
            debug_assert_eq!(trees[i].order, o);
            cur.push(i);
            multisets(trees, by_order, remaining - o, i, cur, out);
            cur.pop();
        }
    }
}

fn make_tree(trees: &[RootedTree], children: Vec<usize>) -> RootedTree {
    let order = 1 + children.iter().map(|&c| trees[c].order).sum::<usize>();
    let density = order as u64 * children.iter().map(|&c| trees[c].density).product::<u64>();
    let mut symmetry = 1u64;
    let mut i = 0;
    while i < children.len() {
        let mut k = 1;
        while i + k < children.len() && children[i + k] == children[i] {
            k += 1;
        }
        symmetry *= trees[children[i]].symmetry.pow(k as u32) * factorial(k);
        i += k;
    }
    let alpha = factorial(order) / (symmetry * density);
    RootedTree { children, order, symmetry, density, alpha }
}

/// All trees of order `1..=max_order`, sorted by order.
pub fn enumerate_trees(max_order: usize) -> Result<Vec<RootedTree>> {
    if max_order > MAX_TREE_ORDER {
        return Err(Error::TreeCeiling { requested: max_order, ceiling: MAX_TREE_ORDER });
    }
    let f = Forest::global();
    Ok(f.trees[..f.count_up_to(max_order)].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_per_order() {
        let f = Forest::global();
        let counts: Vec<usize> =
            (1..=8).map(|n| f.trees.iter().filter(|t| t.order == n).count()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20, 48, 115]);
    }

    #[test]
    fn single_node_statistics() {
        let t = &enumerate_trees(1).unwrap()[0];
        assert_eq!((t.order, t.symmetry, t.density, t.alpha), (1, 1, 1, 1));
    }

    #[test]
    fn tall_order_three_density() {
        let f = Forest::global();
        let tall = (0..f.trees.len()).find(|&i| f.notation(i) == "[[[]]]").unwrap();
        assert_eq!(f.trees[tall].density, 6);
    }

    #[test]
    fn order_four_alphas() {
        let f = Forest::global();
        let find = |n: &[&str]| (0..f.trees.len()).find(|&i| n.contains(&f.notation(i).as_str())).unwrap();
        assert_eq!(f.trees[find(&["[[[],[]]]"])].alpha, 1);
        assert_eq!(f.trees[find(&["[[],[[]]]", "[[[]],[]]"])].alpha, 3);
    }

    #[test]
    fn ceiling_is_enforced() {
        assert!(matches!(enumerate_trees(9), Err(Error::TreeCeiling { .. })));
    }

    #[test]
    fn labelings_identity_holds_everywhere() {
        for t in enumerate_trees(8).unwrap() {
            assert_eq!(t.alpha * t.symmetry * t.density, factorial(t.order));
        }
    }

    #[test]
    fn notations_are_unique() {
        let f = Forest::global();
        let mut seen: Vec<String> = (0..f.trees.len()).map(|i| f.notation(i)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), f.trees.len());
    }
}
