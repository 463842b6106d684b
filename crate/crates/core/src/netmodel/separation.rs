use serde::Serialize;

use super::SubNetworkGraph;
use crate::error::{Error, Result};

/// Default factor by which inter-network distances must exceed intra-network
/// ones.
pub const DEFAULT_SEPARATION_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub ok: bool,
    /// Mean inter-network distance divided by the largest intra-network mean.
    pub ratio: f64,
    pub intra_means: Vec<f64>,
    pub inter_mean: f64,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Checks that sub-networks are geographically localised: every mean
/// intra-network pairwise distance must be at most `inter_mean / threshold`
/// (boundary inclusive).
pub fn validate_separation(networks: &[SubNetworkGraph], threshold: f64) -> Result<SeparationReport> {
    if networks.len() < 2 {
        return Err(Error::Unsupported("separation needs at least two networks".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::OutOfRange {
            name: "separation threshold",
            value: threshold,
            range: "> 0",
        });
    }
    let coords = networks
        .iter()
        .map(|g| g.coords().ok_or_else(|| Error::MissingCoordinates(g.id().to_string())))
        .collect::<Result<Vec<_>>>()?;

    let intra_means: Vec<f64> = coords
        .iter()
        .map(|pts| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    sum += dist(pts[i], pts[j]);
                    count += 1;
                }
            }
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        })
        .collect();

    let mut sum = 0.0;
    let mut count = 0usize;
    for a in 0..coords.len() {
        for b in a + 1..coords.len() {
            for &p in coords[a] {
                for &q in coords[b] {
                    sum += dist(p, q);
                    count += 1;
                }
            }
        }
    }
    let inter_mean = sum / count as f64;
    let worst_intra = intra_means.iter().cloned().fold(0.0, f64::max);
    let ok = worst_intra * threshold <= inter_mean;
    let ratio = if worst_intra == 0.0 {
        f64::INFINITY
    } else {
        inter_mean / worst_intra
    };
    Ok(SeparationReport {
        ok,
        ratio,
        intra_means,
        inter_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_at(id: &str, x: f64, spread: f64) -> SubNetworkGraph {
        SubNetworkGraph::new(id, 2, vec![(0, 1)], None)
            .unwrap()
            .with_coords(vec![[x, 0.0], [x, spread]])
            .unwrap()
    }

    #[test]
    fn distant_clusters_are_separated() {
        let r = validate_separation(&[pair_at("a", 0.0, 1.0), pair_at("b", 1000.0, 1.0)], 10.0).unwrap();
        assert!(r.ok);
        assert!((r.ratio - 1000.0).abs() < 1.0, "ratio {}", r.ratio);
    }

    #[test]
    fn overlapping_clusters_are_not() {
        let r = validate_separation(&[pair_at("a", 0.0, 5.0), pair_at("b", 1.0, 5.0)], 10.0).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn boundary_is_inclusive() {
        // intra means are exactly 1, cross distances 10, 11, 9, 10
        let line = |id: &str, x: f64| {
            SubNetworkGraph::new(id, 2, vec![(0, 1)], None)
                .unwrap()
                .with_coords(vec![[x, 0.0], [x + 1.0, 0.0]])
                .unwrap()
        };
        let nets = [line("a", 0.0), line("b", 10.0)];
        let r = validate_separation(&nets, 10.0).unwrap();
        assert_eq!(r.inter_mean, 10.0);
        assert_eq!(r.ratio, 10.0);
        assert!(r.ok);
        assert!(!validate_separation(&nets, 10.000001).unwrap().ok);
    }

    #[test]
    fn missing_coordinates() {
        let a = SubNetworkGraph::new("a", 2, vec![(0, 1)], None).unwrap();
        assert_eq!(
            validate_separation(&[a, pair_at("b", 0.0, 1.0)], 10.0),
            Err(Error::MissingCoordinates("a".into()))
        );
    }
}
