//! Experiment orchestration: configuration, the six-model matrix,
//! cross-validation tuning, synthetic-league generation, and report emission.

pub mod config;
pub mod report;
pub mod synth;
pub mod tuning;

pub use config::{ExperimentConfig, ModelKind};
pub use report::{emit_report, Report, ReportFormat, ReportRow};
pub use synth::{generate_synthetic_league, SyntheticLeagueSpec};
pub use tuning::{tune_hyperparameters, GridPoint};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gbm::{boost_fit, BoostConfig, BoostData, BoostedEnsemble, QueryGroup};
use crate::ingest::{
    build_pairs, build_triplets, normalize, NormalizationParams, SeasonDataset, Sport,
    TeamSeasonStats,
};
use crate::metrics;
use crate::ranker::{
    conference_split, naive_baseline, randomized_baseline, standings_from_results,
    standings_from_tally, tally_rank, Standings,
};
use crate::siamese::{
    embed_vec, score_game, train, EmbeddingTap, GameScore, LossKind, SiameseParams, TrainConfig,
    TrainData, TrainOutcome,
};

/// Per-game feature row for the boosted ranker: home vector, away vector,
/// and the elementwise absolute difference.
pub fn game_feature_row(home: &[f64], away: &[f64]) -> Vec<f64> {
    let mut row = Vec::with_capacity(home.len() * 3);
    row.extend_from_slice(home);
    row.extend_from_slice(away);
    row.extend(home.iter().zip(away).map(|(h, a)| (h - a).abs()));
    row
}

fn stats_map(stats: &[TeamSeasonStats]) -> BTreeMap<(i32, String), &TeamSeasonStats> {
    stats
        .iter()
        .map(|s| ((s.season_id, s.team_id.clone()), s))
        .collect()
}

/// A trained model: optional siamese embedder plus the boosted ranker.
pub struct FittedModel {
    pub kind: ModelKind,
    pub siamese: Option<TrainOutcome>,
    pub ensemble: BoostedEnsemble,
    pub norm: NormalizationParams,
    pub tap: EmbeddingTap,
}

fn team_vector<'a>(
    lookup: &'a BTreeMap<(i32, String), &TeamSeasonStats>,
    season: i32,
    team: &str,
) -> Result<&'a TeamSeasonStats> {
    lookup
        .get(&(season, team.to_string()))
        .copied()
        .ok_or_else(|| Error::validation(format!("missing stats for {team} in season {season}")))
}

/// Build one ranking query group per season: items are games, relevance is
/// the binary home-win outcome, feature rows are built from the configured
/// team representation (raw normalized stats or siamese embeddings).
fn season_group(
    season: &SeasonDataset,
    lookup: &BTreeMap<(i32, String), &TeamSeasonStats>,
    siamese: Option<(&SiameseParams, EmbeddingTap)>,
) -> Result<QueryGroup> {
    let mut rows = Vec::with_capacity(season.games.len());
    let mut labels = Vec::with_capacity(season.games.len());
    for g in &season.games {
        let home = team_vector(lookup, g.season_id, &g.home_team)?;
        let away = team_vector(lookup, g.season_id, &g.away_team)?;
        let (hv, av) = match siamese {
            Some((params, tap)) => (
                embed_vec(params, &home.features, tap)?,
                embed_vec(params, &away.features, tap)?,
            ),
            None => (home.features.clone(), away.features.clone()),
        };
        rows.push(game_feature_row(&hv, &av));
        labels.push(if g.home_won { 1.0 } else { 0.0 });
    }
    Ok(QueryGroup {
        key: season.season_id,
        rows,
        labels,
    })
}

/// Train one model of the matrix on the given training seasons. The seasons
/// must already be normalized.
pub fn fit_model(
    kind: ModelKind,
    train_seasons: &[SeasonDataset],
    norm: NormalizationParams,
    train_config: &TrainConfig,
    boost_config: &BoostConfig,
) -> Result<FittedModel> {
    let siamese_outcome = match kind.loss_kind() {
        None => None,
        Some(loss) => {
            let mut config = train_config.clone();
            config.loss = loss;
            let mut data_pairs = Vec::new();
            let mut data_triplets = Vec::new();
            for (i, season) in train_seasons.iter().enumerate() {
                match loss {
                    LossKind::Contrastive => data_pairs.extend(build_pairs(season)?),
                    LossKind::Triplet => data_triplets.extend(build_triplets(
                        season,
                        config.rng_seed.wrapping_add(i as u64),
                    )?),
                }
            }
            let data = match loss {
                LossKind::Contrastive => TrainData::Pairs(data_pairs),
                LossKind::Triplet => TrainData::Triplets(data_triplets),
            };
            let width = train_seasons
                .first()
                .and_then(|s| s.stats.first())
                .map(|s| s.features.len())
                .ok_or_else(|| Error::validation("no training stats"))?;
            Some(train(&data, width, &config).map_err(|e| e.in_stage("siamese"))?)
        }
    };

    let all_stats: Vec<TeamSeasonStats> = train_seasons
        .iter()
        .flat_map(|s| s.stats.iter().cloned())
        .collect();
    let lookup = stats_map(&all_stats);
    let siamese_ref = siamese_outcome
        .as_ref()
        .map(|o| (&o.params, train_config.embedding_tap));
    let groups: Vec<QueryGroup> = train_seasons
        .iter()
        .map(|s| season_group(s, &lookup, siamese_ref))
        .collect::<Result<_>>()?;
    let mut boost = boost_config.clone();
    boost.objective = kind.objective();
    let ensemble =
        boost_fit(&BoostData::Groups(groups), &boost).map_err(|e| e.in_stage("gbm"))?;
    Ok(FittedModel {
        kind,
        siamese: siamese_outcome,
        ensemble,
        norm,
        tap: train_config.embedding_tap,
    })
}

/// Score every game of a season with a fitted model. The game score is the
/// ranker output centered on F0, so the sign carries the predicted winner
/// and the magnitude feeds the tally.
pub fn score_season(model: &FittedModel, season: &SeasonDataset) -> Result<Vec<GameScore>> {
    let lookup = stats_map(&season.stats);
    let mut scores = Vec::with_capacity(season.games.len());
    for g in &season.games {
        let home = team_vector(&lookup, g.season_id, &g.home_team)?;
        let away = team_vector(&lookup, g.season_id, &g.away_team)?;
        let (hv, av) = match &model.siamese {
            Some(outcome) => (
                embed_vec(&outcome.params, &home.features, model.tap)?,
                embed_vec(&outcome.params, &away.features, model.tap)?,
            ),
            None => (home.features.clone(), away.features.clone()),
        };
        let raw = model.ensemble.predict_row(&game_feature_row(&hv, &av))?;
        let score = raw - model.ensemble.f0;
        scores.push(GameScore {
            game_index: g.game_index,
            score,
            predicted_home_win: score >= 0.0,
        });
    }
    Ok(scores)
}

/// Score a season with the siamese network alone (no boosted ranker):
/// antisymmetric final-scalar difference per game.
pub fn score_season_siamese(
    params: &SiameseParams,
    season: &SeasonDataset,
) -> Result<Vec<GameScore>> {
    let lookup = stats_map(&season.stats);
    season
        .games
        .iter()
        .map(|g| {
            let home = team_vector(&lookup, g.season_id, &g.home_team)?;
            let away = team_vector(&lookup, g.season_id, &g.away_team)?;
            score_game(params, g.game_index, &home.features, &away.features)
        })
        .collect()
}

/// Metric values of one predicted table against the actual one.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MetricTriple {
    pub ap_or_map: f64,
    pub spearman: f64,
    pub ndcg: f64,
}

/// Evaluate predicted vs actual standings per the league's conference
/// structure: rugby on the single pool, basketball per conference with AP
/// and NDCG averaged (mAP convention) and Spearman on the merged list.
pub fn evaluate_standings(
    predicted: &Standings,
    actual: &Standings,
    season: &SeasonDataset,
) -> Result<(MetricTriple, usize)> {
    let k = season.league.metric_cutoff_k.min(predicted.len());
    match season.league.sport {
        Sport::Rugby => {
            let ap = metrics::average_precision(predicted, actual, k)?;
            let rs = metrics::spearman_rs(predicted, actual)?;
            let nd = metrics::ndcg_vs_actual(predicted, actual, k)?;
            let playoff = playoff_overlap(predicted, actual, season.league.playoff_cutoff);
            Ok((
                MetricTriple {
                    ap_or_map: ap,
                    spearman: rs,
                    ndcg: nd,
                },
                playoff,
            ))
        }
        Sport::Basketball => {
            let (pe, pw) = conference_split(predicted, &season.league)?;
            let (ae, aw) = conference_split(actual, &season.league)?;
            let ke = k.min(pe.len());
            let kw = k.min(pw.len());
            let map = metrics::mean_average_precision(
                metrics::average_precision(&pe, &ae, ke)?,
                metrics::average_precision(&pw, &aw, kw)?,
            );
            let nd = (metrics::ndcg_vs_actual(&pe, &ae, ke)?
                + metrics::ndcg_vs_actual(&pw, &aw, kw)?)
                / 2.0;
            let rs = metrics::spearman_rs(predicted, actual)?;
            let playoff = playoff_overlap(&pe, &ae, season.league.playoff_cutoff)
                + playoff_overlap(&pw, &aw, season.league.playoff_cutoff);
            Ok((
                MetricTriple {
                    ap_or_map: map,
                    spearman: rs,
                    ndcg: nd,
                },
                playoff,
            ))
        }
    }
}

fn playoff_overlap(predicted: &Standings, actual: &Standings, cutoff: usize) -> usize {
    let top_actual: std::collections::HashSet<&str> =
        actual.teams().take(cutoff).collect();
    predicted
        .teams()
        .take(cutoff)
        .filter(|t| top_actual.contains(t))
        .count()
}

/// Full experiment: ingest -> normalize -> per-model train/score/tally ->
/// standings -> metrics vs actual -> report.
pub fn run_experiment(config: &ExperimentConfig, seasons: Vec<SeasonDataset>) -> Result<Report> {
    for s in &seasons {
        s.validate().map_err(|e| e.in_stage("ingest"))?;
    }
    let (train_raw, test_raw) =
        crate::ingest::temporal_split(seasons).map_err(|e| e.in_stage("ingest"))?;

    // normalization parameters fit on training seasons only
    let train_stats: Vec<TeamSeasonStats> = train_raw
        .iter()
        .flat_map(|s| s.stats.iter().cloned())
        .collect();
    let norm = NormalizationParams::fit(&train_stats).map_err(|e| e.in_stage("normalize"))?;
    let normalize_season = |s: &SeasonDataset| -> Result<SeasonDataset> {
        Ok(SeasonDataset {
            league: s.league.clone(),
            season_id: s.season_id,
            stats: normalize(&s.stats, &norm)?,
            games: s.games.clone(),
        })
    };
    let train_seasons: Vec<SeasonDataset> = train_raw
        .iter()
        .map(normalize_season)
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("normalize"))?;
    let test_season = normalize_season(&test_raw).map_err(|e| e.in_stage("normalize"))?;

    let actual = standings_from_results("actual", &test_raw.games)
        .map_err(|e| e.in_stage("evaluate"))?;
    let prior_actual = standings_from_results(
        "prior",
        &train_raw.last().expect("three train seasons").games,
    )
    .map_err(|e| e.in_stage("baseline"))?;

    let mut report = Report::new(config.sport, test_raw.season_id);
    report.actual_standings = Some(actual.clone());

    // model rows
    for (index, kind) in config.models.iter().enumerate() {
        let mut train_config = config.train.clone();
        train_config.rng_seed = config
            .rng_seed
            .wrapping_mul(1000)
            .wrapping_add(index as u64);
        let mut boost_config = config.boost.clone();
        boost_config.rng_seed = train_config.rng_seed;
        let model = fit_model(*kind, &train_seasons, norm.clone(), &train_config, &boost_config)?;
        let scores = score_season(&model, &test_season).map_err(|e| e.in_stage("score"))?;
        let board = tally_rank(
            &test_season.games,
            &scores,
            test_season.teams(),
            config.tally_mode,
        )
        .map_err(|e| e.in_stage("rank"))?;
        let standings = standings_from_tally(&kind.to_string(), &board)
            .map_err(|e| e.in_stage("rank"))?;
        let (triple, playoff) = evaluate_standings(&standings, &actual, &test_season)
            .map_err(|e| e.in_stage("evaluate"))?;
        report.rows.push(ReportRow {
            model: kind.to_string(),
            metrics: triple,
            std: None,
            playoff_correct: Some(playoff),
        });
        report.standings.push(standings);
        report.tally_totals.push(board.total());
    }

    // naive baseline
    let naive = naive_baseline(&prior_actual, &test_raw.teams())
        .map_err(|e| e.in_stage("baseline"))?;
    let (naive_triple, naive_playoff) =
        evaluate_standings(&naive, &actual, &test_season).map_err(|e| e.in_stage("evaluate"))?;
    report.rows.push(ReportRow {
        model: "naive".to_string(),
        metrics: naive_triple,
        std: None,
        playoff_correct: Some(naive_playoff),
    });
    report.standings.push(naive);

    // randomized baseline: 30 trials, mean ± std
    let trials = randomized_baseline(&test_raw.teams(), 30, config.rng_seed);
    let mut triples = Vec::with_capacity(trials.len());
    for t in &trials {
        let (triple, _) =
            evaluate_standings(t, &actual, &test_season).map_err(|e| e.in_stage("evaluate"))?;
        triples.push(triple);
    }
    let (mean, std) = mean_std(&triples);
    report.rows.push(ReportRow {
        model: "randomized".to_string(),
        metrics: mean,
        std: Some(std),
        playoff_correct: None,
    });
    report.randomized_trials = trials.len();
    Ok(report)
}

fn mean_std(triples: &[MetricTriple]) -> (MetricTriple, MetricTriple) {
    let n = triples.len() as f64;
    let mean = MetricTriple {
        ap_or_map: triples.iter().map(|t| t.ap_or_map).sum::<f64>() / n,
        spearman: triples.iter().map(|t| t.spearman).sum::<f64>() / n,
        ndcg: triples.iter().map(|t| t.ndcg).sum::<f64>() / n,
    };
    let var = |f: fn(&MetricTriple) -> f64, m: f64| -> f64 {
        (triples.iter().map(|t| (f(t) - m).powi(2)).sum::<f64>() / n).sqrt()
    };
    let std = MetricTriple {
        ap_or_map: var(|t| t.ap_or_map, mean.ap_or_map),
        spearman: var(|t| t.spearman, mean.spearman),
        ndcg: var(|t| t.ndcg, mean.ndcg),
    };
    (mean, std)
}

/// Evaluate the naive baseline from the two actual standings alone.
pub fn naive_metrics_standalone(
    prior: &Standings,
    actual: &Standings,
    season: &SeasonDataset,
) -> Result<MetricTriple> {
    let naive = naive_baseline(prior, &actual.teams().map(|t| t.to_string()).collect::<Vec<_>>())?;
    Ok(evaluate_standings(&naive, actual, season)?.0)
}
