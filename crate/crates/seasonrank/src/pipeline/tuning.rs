//! Grid-search hyperparameter tuning over the 3-fold season rotation.
//! Selection score is the mean validation NDCG of the tally-ranked table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbm::BoostConfig;
use crate::ingest::{cv_folds, normalize, NormalizationParams, SeasonDataset, TeamSeasonStats};
use crate::pipeline::config::ModelKind;
use crate::pipeline::{evaluate_standings, fit_model, score_season};
use crate::ranker::{standings_from_results, standings_from_tally, tally_rank, TallyMode};
use crate::siamese::TrainConfig;

/// One grid cell: siamese margin plus the boosted-ranker knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub margin: f64,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub rounds: usize,
}

/// The default search grid. Models without a siamese stage ignore the margin,
/// so only one margin value is enumerated for them.
pub fn default_grid(kind: ModelKind) -> Vec<GridPoint> {
    let margins: &[f64] = if kind.loss_kind().is_some() {
        &[0.5, 1.0, 2.0]
    } else {
        &[1.0]
    };
    let mut grid = Vec::new();
    for &margin in margins {
        for &max_depth in &[2usize, 3] {
            for &learning_rate in &[0.05, 0.1] {
                for &rounds in &[50usize, 100] {
                    grid.push(GridPoint {
                        margin,
                        max_depth,
                        learning_rate,
                        rounds,
                    });
                }
            }
        }
    }
    grid
}

fn apply_point(
    point: &GridPoint,
    train_config: &TrainConfig,
    boost_config: &BoostConfig,
) -> (TrainConfig, BoostConfig) {
    let mut t = train_config.clone();
    t.margin = point.margin;
    let mut b = boost_config.clone();
    b.max_depth = point.max_depth;
    b.learning_rate = point.learning_rate;
    b.rounds = point.rounds;
    (t, b)
}

fn fold_ndcg(
    kind: ModelKind,
    fold_train: &[&SeasonDataset],
    fold_val: &SeasonDataset,
    train_config: &TrainConfig,
    boost_config: &BoostConfig,
) -> Result<f64> {
    let train_stats: Vec<TeamSeasonStats> = fold_train
        .iter()
        .flat_map(|s| s.stats.iter().cloned())
        .collect();
    let norm = NormalizationParams::fit(&train_stats)?;
    let normalized = |s: &SeasonDataset| -> Result<SeasonDataset> {
        Ok(SeasonDataset {
            league: s.league.clone(),
            season_id: s.season_id,
            stats: normalize(&s.stats, &norm)?,
            games: s.games.clone(),
        })
    };
    let train_seasons: Vec<SeasonDataset> = fold_train
        .iter()
        .map(|s| normalized(s))
        .collect::<Result<_>>()?;
    let val_season = normalized(fold_val)?;

    let model = fit_model(kind, &train_seasons, norm, train_config, boost_config)?;
    let scores = score_season(&model, &val_season)?;
    let board = tally_rank(
        &val_season.games,
        &scores,
        val_season.teams(),
        TallyMode::Predicted,
    )?;
    let predicted = standings_from_tally("tuning", &board)?;
    let actual = standings_from_results("actual", &fold_val.games)?;
    let (triple, _) = evaluate_standings(&predicted, &actual, &val_season)?;
    Ok(triple.ndcg)
}

/// Search the grid; returns the winning point and its mean validation NDCG.
/// Ties keep the earliest grid entry, so the result is deterministic.
pub fn tune_hyperparameters(
    kind: ModelKind,
    train_seasons: &[SeasonDataset],
    train_config: &TrainConfig,
    boost_config: &BoostConfig,
    grid: &[GridPoint],
) -> Result<(GridPoint, f64)> {
    if grid.is_empty() {
        return Err(Error::validation("tuning grid is empty"));
    }
    let folds = cv_folds(train_seasons)?;
    let mut best: Option<(GridPoint, f64)> = None;
    for point in grid {
        let (t, b) = apply_point(point, train_config, boost_config);
        let mut total = 0.0;
        for (fold_train, fold_val) in &folds {
            total += fold_ndcg(kind, fold_train, fold_val, &t, &b)?;
        }
        let mean = total / folds.len() as f64;
        let better = match &best {
            None => true,
            Some((_, score)) => mean > *score,
        };
        if better {
            best = Some((*point, mean));
        }
    }
    Ok(best.expect("grid is non-empty"))
}
