use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CorrelationMatrix, ExtractError};

/// Between-cluster distance update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    /// Minimum-variance merging on `1 - rho` dissimilarities.
    #[default]
    Ward,
    /// Unweighted pair-group mean (UPGMA).
    Average,
}

/// One agglomeration step. Leaves are ids `0..n`; step `s` creates id `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub linkage: Linkage,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Tab-separated merge table with a header row.
    pub fn to_table(&self) -> String {
        let mut out = String::from("step\ta\tb\theight\tsize\n");
        for (s, m) in self.merges.iter().enumerate() {
            let _ = writeln!(out, "{s}\t{}\t{}\t{}\t{}", m.a, m.b, m.height, m.size);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dendrogram serializes")
    }
}

struct Active {
    id: usize,
    size: usize,
}

/// Agglomerative clustering of features on `1 - rho`.
///
/// Lance-Williams updates; Ward works on squared dissimilarities and
/// reports the square root as merge height. The closest pair merges first;
/// equal distances go to the lexicographically smallest pair of cluster ids.
pub fn cluster_features(
    corr: &CorrelationMatrix,
    linkage: Linkage,
) -> Result<Dendrogram, ExtractError> {
    let n = corr.n_features();
    if n < 2 {
        return Err(ExtractError::TooFewFeatures {
            needed: 2,
            found: n,
        });
    }
    let base = |i: usize, j: usize| {
        let d = (1.0 - corr.get(i, j)).max(0.0);
        match linkage {
            Linkage::Ward => d * d,
            Linkage::Average => d,
        }
    };
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| base(i, j)).collect())
        .collect();
    let mut slots: Vec<Option<Active>> = (0..n).map(|id| Some(Active { id, size: 1 })).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut last_height = 0.0f64;

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for p in 0..n {
            let Some(sp) = &slots[p] else { continue };
            for q in (p + 1)..n {
                let Some(sq) = &slots[q] else { continue };
                let key = (sp.id.min(sq.id), sp.id.max(sq.id));
                let dpq = dist[p][q];
                let better = match best {
                    None => true,
                    Some((bd, bk, _, _)) => dpq < bd || (dpq == bd && key < bk),
                };
                if better {
                    best = Some((dpq, key, p, q));
                }
            }
        }
        let (dpq, (a, b), p, q) = best.expect("two active clusters remain");
        let na = slots[p].as_ref().unwrap().size as f64;
        let nb = slots[q].as_ref().unwrap().size as f64;
        for k in 0..n {
            if k == p || k == q {
                continue;
            }
            let Some(sk) = &slots[k] else { continue };
            let nk = sk.size as f64;
            let updated = match linkage {
                Linkage::Ward => {
                    ((na + nk) * dist[p][k] + (nb + nk) * dist[q][k] - nk * dpq) / (na + nb + nk)
                }
                Linkage::Average => (na * dist[p][k] + nb * dist[q][k]) / (na + nb),
            };
            dist[p][k] = updated;
            dist[k][p] = updated;
        }
        let raw = match linkage {
            Linkage::Ward => dpq.max(0.0).sqrt(),
            Linkage::Average => dpq,
        };
        // Guard against rounding producing a hair-thin inversion.
        let height = raw.max(last_height);
        last_height = height;
        let size = (na + nb) as usize;
        merges.push(Merge { a, b, height, size });
        slots[p] = Some(Active { id: n + step, size });
        slots[q] = None;
    }
    Ok(Dendrogram {
        n_leaves: n,
        linkage,
        merges,
    })
}

pub fn ward_cluster(corr: &CorrelationMatrix) -> Result<Dendrogram, ExtractError> {
    cluster_features(corr, Linkage::Ward)
}

/// Cut at `height` (merges strictly below it are applied) and keep the
/// lowest-index feature of each resulting cluster, in ascending order.
pub fn cut_and_select(dendrogram: &Dendrogram, height: f64) -> Result<Vec<usize>, ExtractError> {
    if !(height >= 0.0) {
        return Err(ExtractError::InvalidHeight(height));
    }
    let n = dendrogram.n_leaves;
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut alive: Vec<bool> = vec![true; n];
    for m in &dendrogram.merges {
        if m.height >= height {
            break;
        }
        let mut joined = std::mem::take(&mut members[m.a]);
        joined.append(&mut std::mem::take(&mut members[m.b]));
        alive[m.a] = false;
        alive[m.b] = false;
        members.push(joined);
        alive.push(true);
    }
    let mut reps: Vec<usize> = members
        .iter()
        .zip(&alive)
        .filter(|(_, &live)| live)
        .map(|(m, _)| *m.iter().min().expect("clusters are non-empty"))
        .collect();
    reps.sort_unstable();
    Ok(reps)
}
