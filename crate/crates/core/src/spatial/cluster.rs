//! Average-linkage (UPGMA) leaf ordering for clustermaps.

use super::ColocMatrix;

/// Distance assigned to pairs whose colocalization is undefined.
const UNDEFINED_DISTANCE: f64 = 2.0;

enum Tree {
    Leaf(usize),
    Join(Box<Tree>, Box<Tree>),
}

impl Tree {
    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Tree::Leaf(i) => out.push(*i),
            Tree::Join(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }
}

struct Cluster<'a> {
    /// Member indices, sorted by cell-type name.
    members: Vec<usize>,
    first_name: &'a str,
    tree: Tree,
}

/// Leaf order of an average-linkage dendrogram over distance `1 - r`.
///
/// The closest pair of clusters is merged first; equal distances are broken
/// by comparing the clusters' lexicographically smallest cell-type names,
/// and the cluster with the smaller name is placed on the left. The result
/// therefore does not depend on the input order of the cell types.
pub fn upgma_order(m: &ColocMatrix) -> Vec<usize> {
    let names = &m.cell_types;
    let dist = |a: usize, b: usize| match m.get(a, b) {
        Some(r) => 1.0 - r,
        None => UNDEFINED_DISTANCE,
    };
    let mut leaves: Vec<usize> = (0..names.len()).collect();
    leaves.sort_by(|&a, &b| names[a].cmp(&names[b]));
    let mut clusters: Vec<Cluster> = leaves
        .into_iter()
        .map(|i| Cluster {
            members: vec![i],
            first_name: &names[i],
            tree: Tree::Leaf(i),
        })
        .collect();

    let linkage = |a: &Cluster, b: &Cluster| -> f64 {
        let mut sum = 0.0;
        for &i in &a.members {
            for &j in &b.members {
                sum += dist(i, j);
            }
        }
        sum / (a.members.len() * b.members.len()) as f64
    };

    while clusters.len() > 1 {
        // clusters stay sorted by first_name, so i < j already orders ties
        let mut best = (f64::INFINITY, 0, 1);
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = linkage(&clusters[i], &clusters[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        let (_, i, j) = best;
        let right = clusters.remove(j);
        let left = clusters.remove(i);
        let mut members: Vec<usize> = left.members.iter().chain(&right.members).copied().collect();
        members.sort_by(|&a, &b| names[a].cmp(&names[b]));
        let merged = Cluster {
            members,
            first_name: left.first_name,
            tree: Tree::Join(Box::new(left.tree), Box::new(right.tree)),
        };
        let pos = clusters
            .iter()
            .position(|c| c.first_name > merged.first_name)
            .unwrap_or(clusters.len());
        clusters.insert(pos, merged);
    }

    let mut order = Vec::with_capacity(names.len());
    if let Some(root) = clusters.pop() {
        root.tree.leaves(&mut order);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn matrix(names: &[&str], r: Array2<f64>) -> ColocMatrix {
        ColocMatrix::new(names.iter().map(|s| s.to_string()).collect(), "t", r).unwrap()
    }

    #[test]
    fn two_types_in_name_order() {
        let m = matrix(&["zeta", "alpha"], array![[1.0, 0.3], [0.3, 1.0]]);
        assert_eq!(upgma_order(&m), vec![1, 0]);
    }

    #[test]
    fn similar_rows_end_up_adjacent() {
        // a and c identical, b far from both
        let m = matrix(
            &["a", "b", "c"],
            array![[1.0, -0.8, 0.9], [-0.8, 1.0, -0.8], [0.9, -0.8, 1.0]],
        );
        let order = upgma_order(&m);
        let pa = order.iter().position(|&i| i == 0).unwrap();
        let pc = order.iter().position(|&i| i == 2).unwrap();
        assert_eq!(pa.abs_diff(pc), 1, "{order:?}");
    }

    #[test]
    fn undefined_entries_are_far() {
        let m = matrix(
            &["a", "b", "c"],
            array![[0.5, f64::NAN, 0.2], [f64::NAN, f64::NAN, f64::NAN], [0.2, f64::NAN, 0.5]],
        );
        assert_eq!(upgma_order(&m), vec![0, 2, 1]);
    }
}
