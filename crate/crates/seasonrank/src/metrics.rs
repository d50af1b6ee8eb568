//! Ranking evaluation metrics: precision@k / average precision, Spearman's
//! rank correlation, and NDCG with the n..1 relevance assignment.
//!
//! All functions operate on ordered team lists (rank 1 first). Predicted and
//! actual lists must contain the same team set.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::ranker::Standings;

/// Map team id -> integer relevance, first place gets n, last place gets 1.
#[derive(Debug, Clone)]
pub struct RelevanceAssignment {
    relevance: HashMap<String, u32>,
}

impl RelevanceAssignment {
    pub fn get(&self, team: &str) -> Option<u32> {
        self.relevance.get(team).copied()
    }

    pub fn len(&self) -> usize {
        self.relevance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relevance.is_empty()
    }
}

/// Relevance n..1 by actual finish: rank r maps to n - r + 1.
pub fn assign_relevance(actual: &Standings) -> RelevanceAssignment {
    let n = actual.len() as u32;
    let relevance = actual
        .teams()
        .enumerate()
        .map(|(i, team)| (team.to_string(), n - i as u32))
        .collect();
    RelevanceAssignment { relevance }
}

fn check_same_teams(predicted: &Standings, actual: &Standings) -> Result<()> {
    let p: HashSet<&str> = predicted.teams().collect();
    let a: HashSet<&str> = actual.teams().collect();
    if p != a {
        return Err(Error::validation(
            "predicted and actual standings rank different team sets",
        ));
    }
    Ok(())
}

/// Top-k set-intersection precision: |top-k(predicted) ∩ top-k(actual)| / k.
pub fn precision_at_k(predicted: &Standings, actual: &Standings, k: usize) -> Result<f64> {
    check_same_teams(predicted, actual)?;
    let n = predicted.len();
    if k == 0 || k > n {
        return Err(Error::validation(format!("k={k} out of range 1..={n}")));
    }
    let top_actual: HashSet<&str> = actual.teams().take(k).collect();
    let hits = predicted
        .teams()
        .take(k)
        .filter(|t| top_actual.contains(t))
        .count();
    Ok(hits as f64 / k as f64)
}

/// Mean of precision@k for k = 1..=K.
pub fn average_precision(predicted: &Standings, actual: &Standings, cap: usize) -> Result<f64> {
    let n = predicted.len();
    if cap == 0 || cap > n {
        return Err(Error::validation(format!("K={cap} out of range 1..={n}")));
    }
    let mut sum = 0.0;
    for k in 1..=cap {
        sum += precision_at_k(predicted, actual, k)?;
    }
    Ok(sum / cap as f64)
}

/// Arithmetic mean of the two conference APs. Rugby reports its single-pool
/// AP directly without this averaging step.
pub fn mean_average_precision(east_ap: f64, west_ap: f64) -> f64 {
    (east_ap + west_ap) / 2.0
}

/// Spearman's rank correlation: 1 - 6 Σd² / (n(n²-1)).
///
/// Requires tie-free permutation rankings of the same team set.
pub fn spearman_rs(predicted: &Standings, actual: &Standings) -> Result<f64> {
    check_same_teams(predicted, actual)?;
    let n = predicted.len();
    if n < 2 {
        // a single team has no rank variance; perfect association by convention
        return Ok(1.0);
    }
    let actual_rank: HashMap<&str, usize> = actual
        .teams()
        .enumerate()
        .map(|(i, t)| (t, i + 1))
        .collect();
    let mut d2_sum = 0.0;
    for (i, team) in predicted.teams().enumerate() {
        let pred_rank = (i + 1) as f64;
        let act_rank = actual_rank[team] as f64;
        let d = act_rank - pred_rank;
        d2_sum += d * d;
    }
    let n = n as f64;
    Ok(1.0 - 6.0 * d2_sum / (n * (n * n - 1.0)))
}

/// DCG over the first p entries of an ordered relevance sequence.
fn dcg(rels: impl Iterator<Item = u32>, p: usize) -> f64 {
    rels.take(p)
        .enumerate()
        .map(|(i, rel)| (2f64.powi(rel as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum()
}

/// NDCG@p of the predicted order against relevance scores.
///
/// DCG uses gain (2^rel - 1) and log2(i+1) discounts; IDCG is the DCG of the
/// descending-relevance order.
pub fn ndcg(predicted: &Standings, relevance: &RelevanceAssignment, p: usize) -> Result<f64> {
    let n = predicted.len();
    if p == 0 || p > n {
        return Err(Error::validation(format!("p={p} out of range 1..={n}")));
    }
    let mut pred_rels = Vec::with_capacity(n);
    for team in predicted.teams() {
        let rel = relevance
            .get(team)
            .ok_or_else(|| Error::validation(format!("no relevance score for team {team}")))?;
        pred_rels.push(rel);
    }
    let mut ideal = pred_rels.clone();
    ideal.sort_unstable_by(|a, b| b.cmp(a));

    let dcg_p = dcg(pred_rels.into_iter(), p);
    let idcg_p = dcg(ideal.into_iter(), p);
    Ok(dcg_p / idcg_p)
}

/// NDCG of predicted vs actual standings at cutoff p, assigning relevance
/// n..1 from the actual finish.
pub fn ndcg_vs_actual(predicted: &Standings, actual: &Standings, p: usize) -> Result<f64> {
    check_same_teams(predicted, actual)?;
    ndcg(predicted, &assign_relevance(actual), p)
}
