//! Experiment configuration and dataset loading.
//!
//! Config files are TOML key-value text whose keys mirror
//! [`ExperimentConfig`]. Environment variables are never consulted.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbm::{BoostConfig, Objective};
use crate::ingest::{
    parse_dataset, Conference, LeagueConfig, Schema, SeasonDataset, Sport,
};
use crate::ranker::TallyMode;
use crate::siamese::{LossKind, TrainConfig};

/// The six-model experiment matrix: two ranking objectives, each alone or
/// fed by a contrastive- or triplet-loss siamese embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelKind {
    GbmNdcg,
    GbmPairwise,
    GbmNdcgSiameseContrastive,
    GbmNdcgSiameseTriplet,
    GbmPairwiseSiameseContrastive,
    GbmPairwiseSiameseTriplet,
}

impl ModelKind {
    pub fn six_model_matrix() -> Vec<ModelKind> {
        vec![
            ModelKind::GbmNdcg,
            ModelKind::GbmPairwise,
            ModelKind::GbmNdcgSiameseContrastive,
            ModelKind::GbmNdcgSiameseTriplet,
            ModelKind::GbmPairwiseSiameseContrastive,
            ModelKind::GbmPairwiseSiameseTriplet,
        ]
    }

    pub fn objective(&self) -> Objective {
        match self {
            ModelKind::GbmNdcg
            | ModelKind::GbmNdcgSiameseContrastive
            | ModelKind::GbmNdcgSiameseTriplet => Objective::NdcgScaledPairwise,
            _ => Objective::PairwiseLogistic,
        }
    }

    pub fn loss_kind(&self) -> Option<LossKind> {
        match self {
            ModelKind::GbmNdcg | ModelKind::GbmPairwise => None,
            ModelKind::GbmNdcgSiameseContrastive | ModelKind::GbmPairwiseSiameseContrastive => {
                Some(LossKind::Contrastive)
            }
            ModelKind::GbmNdcgSiameseTriplet | ModelKind::GbmPairwiseSiameseTriplet => {
                Some(LossKind::Triplet)
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::GbmNdcg => "gbm_ndcg",
            ModelKind::GbmPairwise => "gbm_pairwise",
            ModelKind::GbmNdcgSiameseContrastive => "gbm_ndcg+siamese_contrastive",
            ModelKind::GbmNdcgSiameseTriplet => "gbm_ndcg+siamese_triplet",
            ModelKind::GbmPairwiseSiameseContrastive => "gbm_pairwise+siamese_contrastive",
            ModelKind::GbmPairwiseSiameseTriplet => "gbm_pairwise+siamese_triplet",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gbm_ndcg" => Ok(ModelKind::GbmNdcg),
            "gbm_pairwise" => Ok(ModelKind::GbmPairwise),
            "gbm_ndcg+siamese_contrastive" => Ok(ModelKind::GbmNdcgSiameseContrastive),
            "gbm_ndcg+siamese_triplet" => Ok(ModelKind::GbmNdcgSiameseTriplet),
            "gbm_pairwise+siamese_contrastive" => Ok(ModelKind::GbmPairwiseSiameseContrastive),
            "gbm_pairwise+siamese_triplet" => Ok(ModelKind::GbmPairwiseSiameseTriplet),
            other => Err(Error::validation(format!("unknown model kind: {other}"))),
        }
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sport: Sport,
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "ModelKind::six_model_matrix")]
    pub models: Vec<ModelKind>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub boost: BoostConfig,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_tally_mode")]
    pub tally_mode: TallyMode,
}

fn default_tally_mode() -> TallyMode {
    TallyMode::Predicted
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }
}

fn sport_prefix(sport: Sport) -> &'static str {
    match sport {
        Sport::Basketball => "basketball",
        Sport::Rugby => "rugby",
    }
}

/// Load every season of a sport from a data directory.
///
/// Rugby expects `rugby_<season>.csv` (seasonal stats) plus
/// `rugby_<season>_games.csv`; basketball expects `basketball_<season>.csv`
/// in the per-team box-score schema, plus `basketball_conferences.csv`
/// with rows `team,conference` (east/west).
pub fn load_seasons(sport: Sport, dir: &Path) -> Result<Vec<SeasonDataset>> {
    let prefix = sport_prefix(sport);
    let mut season_ids = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(rest) = name.strip_prefix(&format!("{prefix}_")) {
            if let Some(season) = rest.strip_suffix(".csv") {
                if let Ok(id) = season.parse::<i32>() {
                    season_ids.push(id);
                }
            }
        }
    }
    if season_ids.is_empty() {
        return Err(Error::validation(format!(
            "no {prefix}_<season>.csv files found in {}",
            dir.display()
        )));
    }
    season_ids.sort_unstable();

    let league = match sport {
        Sport::Rugby => LeagueConfig::rugby(),
        Sport::Basketball => LeagueConfig::basketball(load_conferences(
            &dir.join("basketball_conferences.csv"),
        )?),
    };

    let mut seasons = Vec::with_capacity(season_ids.len());
    for id in season_ids {
        let main = dir.join(format!("{prefix}_{id}.csv"));
        let dataset = match sport {
            Sport::Rugby => {
                let stats = parse_dataset(&main, Schema::RugbyStats)?;
                let games_path = dir.join(format!("{prefix}_{id}_games.csv"));
                let games = parse_dataset(&games_path, Schema::RugbyGames)?;
                SeasonDataset {
                    league: league.clone(),
                    season_id: id,
                    stats: stats.stats,
                    games: games.games,
                }
            }
            Sport::Basketball => {
                let fragment = parse_dataset(&main, Schema::NbaGames)?;
                SeasonDataset {
                    league: league.clone(),
                    season_id: id,
                    stats: fragment.stats,
                    games: fragment.games,
                }
            }
        };
        dataset.validate()?;
        seasons.push(dataset);
    }
    Ok(seasons)
}

fn load_conferences(path: &Path) -> Result<BTreeMap<String, Conference>> {
    let text = std::fs::read_to_string(path)
        .map_err(|_| Error::validation(format!("missing conference file {}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "team,conference" {
                return Err(Error::validation("conference file header must be team,conference"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (team, conf) = line
            .split_once(',')
            .ok_or_else(|| Error::validation(format!("bad conference row: {line}")))?;
        let conference = match conf.trim().to_lowercase().as_str() {
            "east" => Conference::East,
            "west" => Conference::West,
            other => {
                return Err(Error::validation(format!("unknown conference: {other}")))
            }
        };
        out.insert(team.trim().to_string(), conference);
    }
    Ok(out)
}
