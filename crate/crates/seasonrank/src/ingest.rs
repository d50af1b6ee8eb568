//! Dataset parsing, validation, min-max normalization, temporal splitting,
//! and construction of training pairs / triplets for the siamese trainer.
//!
//! File formats (UTF-8 CSV with header row):
//! - rugby stats: `season,team,<37 feature columns>` (see [`RUGBY_FEATURES`])
//! - game results: `season,game_index,home_team,away_team,home_won`
//! - nba box scores: one row per team per game,
//!   `season,game_index,team,won,<14 feature columns>`
//!   (see [`NBA_FEATURES`], whose first column `home_away` marks the side);
//!   seasonal stats are the per-team means.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 37 numeric rugby features; the team name column is an identifier,
/// not a feature.
pub const RUGBY_FEATURES: [&str; 37] = [
    "total_tries_scored",
    "home_tries_scored",
    "away_tries_scored",
    "tries_scored_first_half",
    "tries_scored_second_half",
    "total_matches_played",
    "tries_conceded",
    "tries_conceded_at_home",
    "tries_conceded_away",
    "four_try_bonus_point",
    "four_try_bonus_point_home",
    "four_try_bonus_point_away",
    "lost_within_seven_points",
    "lost_within_seven_points_home",
    "lost_within_seven_points_away",
    "opponent_four_try_bonus_point",
    "opponent_four_try_bonus_point_home",
    "opponent_four_try_bonus_point_away",
    "opponent_lost_within_seven_points",
    "opponent_lost_within_seven_points_home",
    "opponent_lost_within_seven_points_away",
    "yellow_cards",
    "yellow_to_red_cards",
    "red_cards",
    "halftime_wins",
    "halftime_wins_to_fulltime_wins",
    "halftime_draws",
    "halftime_draws_to_fulltime_wins",
    "halftime_losses",
    "halftime_losses_to_fulltime_wins",
    "conversions",
    "penalties",
    "tackles",
    "penalties_conceded",
    "lineouts",
    "rucks",
    "scrums",
];

/// The 14 per-team basketball features. `home_away` is the side indicator
/// (1 = home row) and participates as a feature column like the rest.
pub const NBA_FEATURES: [&str; 14] = [
    "home_away",
    "field_goals",
    "field_goals_attempted",
    "three_point_shots",
    "three_point_shots_attempted",
    "free_throws",
    "free_throws_attempted",
    "offensive_rebounds",
    "defensive_rebounds",
    "assists",
    "steals",
    "blocks",
    "turnovers",
    "total_fouls",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sport {
    Basketball,
    Rugby,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conference {
    East,
    West,
    None,
}

/// League shape: sport, conference assignments, and the evaluation cutoffs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeagueConfig {
    pub sport: Sport,
    pub conferences: BTreeMap<String, Conference>,
    pub metric_cutoff_k: usize,
    pub playoff_cutoff: usize,
}

impl LeagueConfig {
    pub fn rugby() -> Self {
        LeagueConfig {
            sport: Sport::Rugby,
            conferences: BTreeMap::new(),
            metric_cutoff_k: 15,
            playoff_cutoff: 8,
        }
    }

    pub fn basketball(conferences: BTreeMap<String, Conference>) -> Self {
        LeagueConfig {
            sport: Sport::Basketball,
            conferences,
            metric_cutoff_k: 15,
            playoff_cutoff: 8,
        }
    }

    pub fn conference_of(&self, team: &str) -> Option<Conference> {
        match self.sport {
            Sport::Rugby => Some(Conference::None),
            Sport::Basketball => self.conferences.get(team).copied(),
        }
    }

    /// Enforce the real-league shapes: basketball has exactly two conferences
    /// of 15 teams each; rugby a single 15-team pool.
    pub fn validate_roster(&self, teams: &BTreeSet<String>) -> Result<()> {
        match self.sport {
            Sport::Rugby => {
                if teams.len() != 15 {
                    return Err(Error::validation(format!(
                        "rugby pool must have 15 teams, found {}",
                        teams.len()
                    )));
                }
            }
            Sport::Basketball => {
                let east = teams
                    .iter()
                    .filter(|t| self.conference_of(t) == Some(Conference::East))
                    .count();
                let west = teams
                    .iter()
                    .filter(|t| self.conference_of(t) == Some(Conference::West))
                    .count();
                if east != 15 || west != 15 {
                    return Err(Error::validation(format!(
                        "basketball needs two 15-team conferences, found east={east} west={west}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One team's numeric feature vector for one season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSeasonStats {
    pub team_id: String,
    pub season_id: i32,
    pub features: Vec<f64>,
    pub feature_names: Vec<String>,
}

/// One fixture. Rugby draws are stored as home wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub season_id: i32,
    pub game_index: u32,
    pub home_team: String,
    pub away_team: String,
    pub home_won: bool,
}

/// All records of a single season.
#[derive(Debug, Clone)]
pub struct SeasonDataset {
    pub league: LeagueConfig,
    pub season_id: i32,
    pub stats: Vec<TeamSeasonStats>,
    pub games: Vec<GameRecord>,
}

impl SeasonDataset {
    pub fn teams(&self) -> Vec<String> {
        self.stats.iter().map(|s| s.team_id.clone()).collect()
    }

    /// Every team referenced by a game must have a stats record.
    pub fn validate(&self) -> Result<()> {
        let known: BTreeSet<&str> = self.stats.iter().map(|s| s.team_id.as_str()).collect();
        for g in &self.games {
            if g.season_id != self.season_id {
                return Err(Error::validation(format!(
                    "game {} belongs to season {}, dataset is {}",
                    g.game_index, g.season_id, self.season_id
                )));
            }
            if g.home_team == g.away_team {
                return Err(Error::validation(format!(
                    "game {}: a team cannot play itself",
                    g.game_index
                )));
            }
            for t in [&g.home_team, &g.away_team] {
                if !known.contains(t.as_str()) {
                    return Err(Error::validation(format!(
                        "game {} references team {t} with no stats record",
                        g.game_index
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    RugbyStats,
    RugbyGames,
    NbaGames,
}

/// A parsed file: stats records and/or game records spanning any seasons.
#[derive(Debug, Clone, Default)]
pub struct DatasetFragment {
    pub stats: Vec<TeamSeasonStats>,
    pub games: Vec<GameRecord>,
}

fn parse_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        row,
        message: message.into(),
    }
}

fn parse_number(path: &Path, row: usize, field: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| parse_err(path, row, format!("non-numeric cell in column {field}: {raw:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, row, format!("non-finite value in column {field}")));
    }
    Ok(v)
}

fn parse_bool(path: &Path, row: usize, field: &str, raw: &str) -> Result<bool> {
    match raw.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(parse_err(
            path,
            row,
            format!("column {field} must be 0/1/true/false, got {other:?}"),
        )),
    }
}

/// Parse one CSV file against a schema. The header must match the schema's
/// column names exactly.
pub fn parse_dataset(path: &Path, schema: Schema) -> Result<DatasetFragment> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, 0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(parse_err(path, 0, "empty file"));
    }

    match schema {
        Schema::RugbyStats => parse_stats_rows(path, &mut reader, &headers, "team", &RUGBY_FEATURES),
        Schema::RugbyGames => parse_game_rows(path, &mut reader, &headers),
        Schema::NbaGames => parse_nba_rows(path, &mut reader, &headers),
    }
}

fn expect_headers(path: &Path, headers: &[String], expected: &[&str]) -> Result<()> {
    if headers.len() != expected.len() {
        return Err(parse_err(
            path,
            0,
            format!(
                "header has {} columns, schema expects {}",
                headers.len(),
                expected.len()
            ),
        ));
    }
    for (h, e) in headers.iter().zip(expected) {
        if h != e {
            return Err(parse_err(path, 0, format!("missing column {e:?}, found {h:?}")));
        }
    }
    Ok(())
}

fn parse_stats_rows(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
    headers: &[String],
    id_col: &str,
    features: &[&str],
) -> Result<DatasetFragment> {
    let mut expected = vec!["season", id_col];
    expected.extend_from_slice(features);
    expect_headers(path, headers, &expected)?;

    let feature_names: Vec<String> = features.iter().map(|s| s.to_string()).collect();
    let mut fragment = DatasetFragment::default();
    let mut seen: BTreeSet<(i32, String)> = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after header
        let record = record.map_err(|e| parse_err(path, row, e.to_string()))?;
        let season_id = parse_number(path, row, "season", &record[0])? as i32;
        let team_id = record[1].trim().to_string();
        if team_id.is_empty() {
            return Err(parse_err(path, row, "empty team id"));
        }
        if !seen.insert((season_id, team_id.clone())) {
            return Err(parse_err(
                path,
                row,
                format!("duplicate stats row for ({season_id}, {team_id})"),
            ));
        }
        let mut values = Vec::with_capacity(features.len());
        for (j, name) in features.iter().enumerate() {
            values.push(parse_number(path, row, name, &record[j + 2])?);
        }
        fragment.stats.push(TeamSeasonStats {
            team_id,
            season_id,
            features: values,
            feature_names: feature_names.clone(),
        });
    }
    Ok(fragment)
}

fn parse_game_rows(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
    headers: &[String],
) -> Result<DatasetFragment> {
    expect_headers(
        path,
        headers,
        &["season", "game_index", "home_team", "away_team", "home_won"],
    )?;
    let mut fragment = DatasetFragment::default();
    let mut seen: BTreeSet<(i32, u32)> = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| parse_err(path, row, e.to_string()))?;
        let season_id = parse_number(path, row, "season", &record[0])? as i32;
        let game_index = parse_number(path, row, "game_index", &record[1])? as u32;
        if !seen.insert((season_id, game_index)) {
            return Err(parse_err(
                path,
                row,
                format!("duplicate game ({season_id}, {game_index})"),
            ));
        }
        let home_team = record[2].trim().to_string();
        let away_team = record[3].trim().to_string();
        if home_team == away_team {
            return Err(parse_err(path, row, "home and away team are identical"));
        }
        let home_won = parse_bool(path, row, "home_won", &record[4])?;
        fragment.games.push(GameRecord {
            season_id,
            game_index,
            home_team,
            away_team,
            home_won,
        });
    }
    Ok(fragment)
}

fn parse_nba_rows(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
    headers: &[String],
) -> Result<DatasetFragment> {
    let mut expected = vec!["season", "game_index", "team", "won"];
    expected.extend_from_slice(&NBA_FEATURES);
    expect_headers(path, headers, &expected)?;

    struct SideRow {
        team: String,
        won: bool,
        features: Vec<f64>,
        row: usize,
    }
    // (season, game_index) -> (home side, away side)
    let mut games: BTreeMap<(i32, u32), (Option<SideRow>, Option<SideRow>)> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| parse_err(path, row, e.to_string()))?;
        let season_id = parse_number(path, row, "season", &record[0])? as i32;
        let game_index = parse_number(path, row, "game_index", &record[1])? as u32;
        let team = record[2].trim().to_string();
        let won = parse_bool(path, row, "won", &record[3])?;
        let mut features = Vec::with_capacity(NBA_FEATURES.len());
        for (j, name) in NBA_FEATURES.iter().enumerate() {
            features.push(parse_number(path, row, name, &record[j + 4])?);
        }
        let home = match features[0] {
            v if v == 1.0 => true,
            v if v == 0.0 => false,
            _ => {
                return Err(parse_err(
                    path,
                    row,
                    "column home_away must be exactly 0 or 1",
                ))
            }
        };
        let slot = games.entry((season_id, game_index)).or_insert((None, None));
        let side = if home { &mut slot.0 } else { &mut slot.1 };
        if side.is_some() {
            return Err(parse_err(
                path,
                row,
                format!("duplicate ({season_id}, {game_index}) {} row", if home { "home" } else { "away" }),
            ));
        }
        *side = Some(SideRow { team, won, features, row });
    }

    let feature_names: Vec<String> = NBA_FEATURES.iter().map(|s| s.to_string()).collect();
    let mut fragment = DatasetFragment::default();
    // accumulate per (season, team) feature sums for seasonal means
    let mut sums: BTreeMap<(i32, String), (Vec<f64>, usize)> = BTreeMap::new();
    for ((season_id, game_index), (home, away)) in games {
        let home = home.ok_or_else(|| {
            parse_err(path, 0, format!("game ({season_id}, {game_index}) has no home row"))
        })?;
        let away = away.ok_or_else(|| {
            parse_err(path, 0, format!("game ({season_id}, {game_index}) has no away row"))
        })?;
        if home.won == away.won {
            return Err(parse_err(
                path,
                home.row.max(away.row),
                format!("game ({season_id}, {game_index}) must have exactly one winner"),
            ));
        }
        if home.team == away.team {
            return Err(parse_err(path, home.row, "home and away team are identical"));
        }
        for (team, feats) in [(&home.team, &home.features), (&away.team, &away.features)] {
            let entry = sums
                .entry((season_id, team.clone()))
                .or_insert_with(|| (vec![0.0; NBA_FEATURES.len()], 0));
            for (s, v) in entry.0.iter_mut().zip(feats) {
                *s += v;
            }
            entry.1 += 1;
        }
        fragment.games.push(GameRecord {
            season_id,
            game_index,
            home_team: home.team,
            away_team: away.team,
            home_won: home.won,
        });
    }
    for ((season_id, team_id), (sum, count)) in sums {
        fragment.stats.push(TeamSeasonStats {
            team_id,
            season_id,
            features: sum.iter().map(|s| s / count as f64).collect(),
            feature_names: feature_names.clone(),
        });
    }
    Ok(fragment)
}

/// Write stats records in the rugby-stats schema.
pub fn write_stats_csv(stats: &[TeamSeasonStats]) -> Result<String> {
    let names = match stats.first() {
        Some(s) => &s.feature_names,
        None => return Err(Error::validation("no stats records to write")),
    };
    let mut out = String::from("season,team");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for s in stats {
        out.push_str(&format!("{},{}", s.season_id, s.team_id));
        for v in &s.features {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Write game records in the games schema.
pub fn write_games_csv(games: &[GameRecord]) -> String {
    let mut out = String::from("season,game_index,home_team,away_team,home_won\n");
    for g in games {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g.season_id,
            g.game_index,
            g.home_team,
            g.away_team,
            if g.home_won { 1 } else { 0 }
        ));
    }
    out
}

/// Per-feature (min, max) fit on training seasons only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ranges: Vec<(f64, f64)>,
}

impl NormalizationParams {
    pub fn fit(stats: &[TeamSeasonStats]) -> Result<Self> {
        let first = stats
            .first()
            .ok_or_else(|| Error::validation("cannot fit normalization on zero records"))?;
        let width = first.features.len();
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); width];
        for s in stats {
            if s.features.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: s.features.len(),
                });
            }
            for (r, v) in ranges.iter_mut().zip(&s.features) {
                r.0 = r.0.min(*v);
                r.1 = r.1.max(*v);
            }
        }
        Ok(NormalizationParams { ranges })
    }

    pub fn apply_vec(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.ranges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.ranges.len(),
                got: features.len(),
            });
        }
        Ok(features
            .iter()
            .zip(&self.ranges)
            .map(|(v, (min, max))| {
                if max == min {
                    0.0
                } else {
                    (v - min) / (max - min)
                }
            })
            .collect())
    }
}

/// v' = (v - min) / (max - min); constant features map to 0. Values from
/// outside the fitted range are not clamped.
pub fn normalize(
    stats: &[TeamSeasonStats],
    params: &NormalizationParams,
) -> Result<Vec<TeamSeasonStats>> {
    stats
        .iter()
        .map(|s| {
            Ok(TeamSeasonStats {
                team_id: s.team_id.clone(),
                season_id: s.season_id,
                features: params.apply_vec(&s.features)?,
                feature_names: s.feature_names.clone(),
            })
        })
        .collect()
}

/// First three seasons train, fourth tests. Seasons must be exactly four and
/// strictly increasing.
pub fn temporal_split(
    seasons: Vec<SeasonDataset>,
) -> Result<(Vec<SeasonDataset>, SeasonDataset)> {
    if seasons.len() != 4 {
        return Err(Error::validation(format!(
            "temporal split needs exactly 4 seasons, got {}",
            seasons.len()
        )));
    }
    for pair in seasons.windows(2) {
        if pair[1].season_id <= pair[0].season_id {
            return Err(Error::validation(
                "seasons must be in strictly increasing order",
            ));
        }
    }
    let mut seasons = seasons;
    let test = seasons.pop().expect("length checked");
    Ok((seasons, test))
}

/// Three-fold rotation: validate on the third, then the second, then the
/// first training season.
pub fn cv_folds(
    train: &[SeasonDataset],
) -> Result<Vec<(Vec<&SeasonDataset>, &SeasonDataset)>> {
    if train.len() != 3 {
        return Err(Error::validation(format!(
            "cross-validation needs exactly 3 training seasons, got {}",
            train.len()
        )));
    }
    Ok(vec![
        (vec![&train[0], &train[1]], &train[2]),
        (vec![&train[0], &train[2]], &train[1]),
        (vec![&train[1], &train[2]], &train[0]),
    ])
}

/// (home features, away features, label): label 0 for a home win, 1 for a
/// home loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub home: Vec<f64>,
    pub away: Vec<f64>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTriplet {
    pub anchor: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

fn stats_lookup(dataset: &SeasonDataset) -> HashMap<&str, &TeamSeasonStats> {
    dataset
        .stats
        .iter()
        .map(|s| (s.team_id.as_str(), s))
        .collect()
}

/// One pair per game, home-oriented.
pub fn build_pairs(dataset: &SeasonDataset) -> Result<Vec<TrainingPair>> {
    let lookup = stats_lookup(dataset);
    dataset
        .games
        .iter()
        .map(|g| {
            let home = lookup.get(g.home_team.as_str()).ok_or_else(|| {
                Error::validation(format!("missing stats record for {}", g.home_team))
            })?;
            let away = lookup.get(g.away_team.as_str()).ok_or_else(|| {
                Error::validation(format!("missing stats record for {}", g.away_team))
            })?;
            Ok(TrainingPair {
                home: home.features.clone(),
                away: away.features.clone(),
                label: if g.home_won { 0 } else { 1 },
            })
        })
        .collect()
}

/// One triplet per game: anchor is the home-team vector; positive sampled
/// uniformly from home vectors of same-outcome games; negative from the
/// opposite class.
pub fn build_triplets(dataset: &SeasonDataset, rng_seed: u64) -> Result<Vec<TrainingTriplet>> {
    let lookup = stats_lookup(dataset);
    let mut wins: Vec<Vec<f64>> = Vec::new();
    let mut losses: Vec<Vec<f64>> = Vec::new();
    let mut anchors: Vec<(Vec<f64>, bool)> = Vec::new();
    for g in &dataset.games {
        let home = lookup.get(g.home_team.as_str()).ok_or_else(|| {
            Error::validation(format!("missing stats record for {}", g.home_team))
        })?;
        let vec = home.features.clone();
        if g.home_won {
            wins.push(vec.clone());
        } else {
            losses.push(vec.clone());
        }
        anchors.push((vec, g.home_won));
    }
    if wins.is_empty() || losses.is_empty() {
        return Err(Error::validation(
            "cannot form triplets: all games share one outcome class",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok(anchors
        .into_iter()
        .map(|(anchor, home_won)| {
            let (same, other) = if home_won {
                (&wins, &losses)
            } else {
                (&losses, &wins)
            };
            let positive = same[rng.gen_range(0..same.len())].clone();
            let negative = other[rng.gen_range(0..other.len())].clone();
            TrainingTriplet {
                anchor,
                positive,
                negative,
            }
        })
        .collect())
}
