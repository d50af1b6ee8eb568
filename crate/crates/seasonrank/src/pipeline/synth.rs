//! Seeded synthetic league generation: latent team strengths, stats
//! features correlated with strength, and Bradley-Terry game outcomes.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    write_games_csv, write_stats_csv, Conference, GameRecord, LeagueConfig, SeasonDataset,
    Sport, TeamSeasonStats, NBA_FEATURES, RUGBY_FEATURES,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticLeagueSpec {
    pub sport: Sport,
    pub team_count: usize,
    pub seasons: usize,
    pub start_season: i32,
    /// how many times the full home/away double round-robin is played
    pub round_robin_repeats: usize,
    pub feature_count: usize,
    /// per-feature observation noise on the strength signal
    pub feature_noise: f64,
    /// temperature of the win-probability logistic; 0 means the stronger
    /// team always wins (home wins ties)
    pub outcome_temperature: f64,
    /// multiplier on the latent strength spread; 0 makes all teams equal
    #[serde(default = "default_strength_scale")]
    pub strength_scale: f64,
    pub rng_seed: u64,
}

fn default_strength_scale() -> f64 {
    1.0
}

impl Default for SyntheticLeagueSpec {
    fn default() -> Self {
        SyntheticLeagueSpec {
            sport: Sport::Rugby,
            team_count: 15,
            seasons: 4,
            start_season: 2017,
            round_robin_repeats: 1,
            feature_count: 8,
            feature_noise: 0.2,
            outcome_temperature: 0.5,
            strength_scale: 1.0,
            rng_seed: 0,
        }
    }
}

impl SyntheticLeagueSpec {
    pub fn validate(&self) -> Result<()> {
        if self.team_count < 2 {
            return Err(Error::validation("team count must be >= 2"));
        }
        if self.seasons < 2 {
            return Err(Error::validation("need at least 2 seasons"));
        }
        if self.feature_count == 0 || self.round_robin_repeats == 0 {
            return Err(Error::validation("feature count and repeats must be >= 1"));
        }
        if self.feature_noise < 0.0 || self.outcome_temperature < 0.0 || self.strength_scale < 0.0
        {
            return Err(Error::validation("noise values must be >= 0"));
        }
        Ok(())
    }

    pub fn team_name(&self, i: usize) -> String {
        format!("T{i:02}")
    }

    fn league(&self) -> LeagueConfig {
        match self.sport {
            Sport::Rugby => LeagueConfig::rugby(),
            Sport::Basketball => {
                let mut conferences = BTreeMap::new();
                for i in 0..self.team_count {
                    let c = if i < self.team_count / 2 {
                        Conference::East
                    } else {
                        Conference::West
                    };
                    conferences.insert(self.team_name(i), c);
                }
                LeagueConfig::basketball(conferences)
            }
        }
    }

    /// Latent strengths, evenly spread and seeded-shuffled across teams so
    /// the true order is nondegenerate and recoverable.
    pub fn strengths(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let n = self.team_count;
        let mut values: Vec<f64> = (0..n)
            .map(|i| self.strength_scale * (2.0 * (i as f64 / (n - 1).max(1) as f64) - 1.0))
            .collect();
        use rand::seq::SliceRandom;
        values.shuffle(&mut rng);
        values
    }

    /// Teams in descending true-strength order.
    pub fn true_order(&self) -> Vec<String> {
        let strengths = self.strengths();
        let mut idx: Vec<usize> = (0..self.team_count).collect();
        idx.sort_by(|&a, &b| {
            strengths[b]
                .partial_cmp(&strengths[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        idx.into_iter().map(|i| self.team_name(i)).collect()
    }
}

/// Generate the seeded synthetic seasons. Deterministic for a fixed spec.
pub fn generate_synthetic_league(spec: &SyntheticLeagueSpec) -> Result<Vec<SeasonDataset>> {
    spec.validate()?;
    let league = spec.league();
    let strengths = spec.strengths();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed.wrapping_add(1));
    let normal = Normal::new(0.0, 1.0).expect("valid normal");

    // per-feature loading on the strength signal, fixed across seasons
    let loadings: Vec<f64> = (0..spec.feature_count)
        .map(|_| rng.gen_range(0.5..1.5))
        .collect();
    // use the real schema column names when the width matches, so emitted
    // files parse as ingest-schema data
    let schema_names: &[&str] = match spec.sport {
        Sport::Rugby => &RUGBY_FEATURES,
        Sport::Basketball => &NBA_FEATURES,
    };
    let feature_names: Vec<String> = if spec.feature_count == schema_names.len() {
        schema_names.iter().map(|s| s.to_string()).collect()
    } else {
        (0..spec.feature_count).map(|i| format!("f{i:02}")).collect()
    };

    let mut seasons = Vec::with_capacity(spec.seasons);
    for s in 0..spec.seasons {
        let season_id = spec.start_season + s as i32;
        let mut stats = Vec::with_capacity(spec.team_count);
        for (i, &strength) in strengths.iter().enumerate() {
            let features: Vec<f64> = loadings
                .iter()
                .map(|w| w * strength + spec.feature_noise * normal.sample(&mut rng))
                .collect();
            stats.push(TeamSeasonStats {
                team_id: spec.team_name(i),
                season_id,
                features,
                feature_names: feature_names.clone(),
            });
        }
        let mut games = Vec::new();
        let mut game_index = 0u32;
        for _ in 0..spec.round_robin_repeats {
            for home in 0..spec.team_count {
                for away in 0..spec.team_count {
                    if home == away {
                        continue;
                    }
                    let diff = strengths[home] - strengths[away];
                    let home_won = if spec.outcome_temperature == 0.0 {
                        diff >= 0.0
                    } else {
                        let p = 1.0 / (1.0 + (-diff / spec.outcome_temperature).exp());
                        rng.gen_range(0.0..1.0) < p
                    };
                    games.push(GameRecord {
                        season_id,
                        game_index,
                        home_team: spec.team_name(home),
                        away_team: spec.team_name(away),
                        home_won,
                    });
                    game_index += 1;
                }
            }
        }
        seasons.push(SeasonDataset {
            league: league.clone(),
            season_id,
            stats,
            games,
        });
    }
    Ok(seasons)
}

/// Emit the generated league as ingest-schema CSV files. The league spec's feature
/// count must match the sport's schema width (37 rugby / 14 basketball) so
/// the files parse back through the regular loaders.
pub fn write_synthetic_files(spec: &SyntheticLeagueSpec, dir: &Path) -> Result<Vec<SeasonDataset>> {
    let schema_width = match spec.sport {
        Sport::Rugby => RUGBY_FEATURES.len(),
        Sport::Basketball => NBA_FEATURES.len(),
    };
    if spec.feature_count != schema_width {
        return Err(Error::validation(format!(
            "emitting {:?} files requires feature_count = {schema_width}, got {}",
            spec.sport, spec.feature_count
        )));
    }
    let seasons = generate_synthetic_league(spec)?;
    std::fs::create_dir_all(dir)?;
    match spec.sport {
        Sport::Rugby => {
            for season in &seasons {
                std::fs::write(
                    dir.join(format!("rugby_{}.csv", season.season_id)),
                    write_stats_csv(&season.stats)?,
                )?;
                std::fs::write(
                    dir.join(format!("rugby_{}_games.csv", season.season_id)),
                    write_games_csv(&season.games),
                )?;
            }
        }
        Sport::Basketball => {
            for season in &seasons {
                std::fs::write(
                    dir.join(format!("basketball_{}.csv", season.season_id)),
                    basketball_box_scores_csv(season)?,
                )?;
            }
            let mut text = String::from("team,conference\n");
            for (team, conf) in &seasons[0].league.conferences {
                let c = match conf {
                    Conference::East => "east",
                    Conference::West => "west",
                    Conference::None => continue,
                };
                text.push_str(&format!("{team},{c}\n"));
            }
            std::fs::write(dir.join("basketball_conferences.csv"), text)?;
        }
    }
    Ok(seasons)
}

/// Render a synthetic basketball season in the per-team box-score schema:
/// two rows per game, the `home_away` column marking the side and the other
/// columns carrying the team's seasonal feature values.
fn basketball_box_scores_csv(season: &SeasonDataset) -> Result<String> {
    let lookup: BTreeMap<&str, &TeamSeasonStats> = season
        .stats
        .iter()
        .map(|s| (s.team_id.as_str(), s))
        .collect();
    let mut out = String::from("season,game_index,team,won");
    for name in NBA_FEATURES {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let mut push_row = |g: &GameRecord, team: &str, won: bool, home: bool| -> Result<()> {
        let stats = lookup
            .get(team)
            .ok_or_else(|| Error::validation(format!("missing stats record for {team}")))?;
        out.push_str(&format!(
            "{},{},{team},{}",
            g.season_id,
            g.game_index,
            if won { 1 } else { 0 }
        ));
        out.push_str(&format!(",{}", if home { 1 } else { 0 }));
        for v in &stats.features[1..] {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        Ok(())
    };
    for g in &season.games {
        push_row(g, &g.home_team, g.home_won, true)?;
        push_row(g, &g.away_team, !g.home_won, false)?;
    }
    Ok(out)
}
