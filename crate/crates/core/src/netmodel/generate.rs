use rand::seq::index;

use super::SubNetworkGraph;
use crate::error::{Error, Result};
use crate::seeds::rng_from_seed;

const MAX_REJECTIONS: usize = 10_000;

/// Maps a linear index in `0..n(n-1)/2` to the pair `(u, v)`, `u < v`, in
/// row-major order of the strict upper triangle.
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut u = 0;
    let mut row = n - 1;
    while k >= row {
        k -= row;
        u += 1;
        row -= 1;
    }
    (u, u + 1 + k)
}

/// Uniform `G(n, m)` conditioned on connectedness by rejection. Deterministic
/// in `seed`; the gateway is the graph center.
pub fn generate_random_subnetwork(
    node_count: usize,
    edge_count: usize,
    seed: u64,
) -> Result<SubNetworkGraph> {
    let infeasible = Error::InfeasibleGraph {
        nodes: node_count,
        edges: edge_count,
    };
    if node_count == 0 {
        return Err(infeasible);
    }
    let max_edges = node_count * (node_count - 1) / 2;
    if edge_count + 1 < node_count || edge_count > max_edges || (node_count > 1 && edge_count == 0) {
        return Err(infeasible);
    }
    let id = format!("g{node_count}_{edge_count}_{seed}");
    let mut rng = rng_from_seed(seed);
    for _ in 0..MAX_REJECTIONS {
        let mut picks = index::sample(&mut rng, max_edges, edge_count).into_vec();
        picks.sort_unstable();
        let edges = picks
            .into_iter()
            .map(|k| pair_from_index(node_count, k))
            .collect();
        match SubNetworkGraph::new(id.clone(), node_count, edges, None) {
            Ok(g) => return Ok(g),
            Err(Error::InvalidGraph(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ResampleLimitExceeded(MAX_REJECTIONS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_enumerates_upper_triangle() {
        let n = 5;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|k| pair_from_index(n, k)).collect();
        let mut expected = vec![];
        for u in 0..n {
            for v in u + 1..n {
                expected.push((u, v));
            }
        }
        assert_eq!(pairs, expected);
    }

    #[test]
    fn small_unique_graphs() {
        let tri = generate_random_subnetwork(3, 3, 99).unwrap();
        assert_eq!(tri.edges(), &[(0, 1), (0, 2), (1, 2)]);
        let edge = generate_random_subnetwork(2, 1, 5).unwrap();
        assert_eq!(edge.edges(), &[(0, 1)]);
        assert_eq!(generate_random_subnetwork(1, 0, 5).unwrap().edge_count(), 0);
    }

    #[test]
    fn infeasible_sizes() {
        assert!(matches!(
            generate_random_subnetwork(3, 1, 1),
            Err(Error::InfeasibleGraph { .. })
        ));
        assert!(matches!(
            generate_random_subnetwork(3, 4, 1),
            Err(Error::InfeasibleGraph { .. })
        ));
        assert!(generate_random_subnetwork(0, 0, 1).is_err());
    }

    #[test]
    fn sparse_trees_hit_the_rejection_limit() {
        // a uniformly drawn 59-edge graph on 60 nodes is almost never a tree
        assert_eq!(
            generate_random_subnetwork(60, 59, 3),
            Err(Error::ResampleLimitExceeded(MAX_REJECTIONS))
        );
    }
}
