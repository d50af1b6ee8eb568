//! Standings construction: tally rank over per-game scores, conference
//! splitting, and the naive / randomized baselines.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Conference, GameRecord, LeagueConfig, Sport};
use crate::siamese::GameScore;

/// Which outcome drives the tally: the model's predicted winner (forecasting
/// semantics, the default) or the recorded actual winner (diagnostic only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TallyMode {
    Predicted,
    Actual,
}

/// Cumulative per-team tally. Every team of the season is present from
/// construction, including teams whose games have not been scored yet.
#[derive(Debug, Clone)]
pub struct TallyBoard {
    tallies: BTreeMap<String, f64>,
}

impl TallyBoard {
    pub fn new(teams: impl IntoIterator<Item = String>) -> Self {
        TallyBoard {
            tallies: teams.into_iter().map(|t| (t, 0.0)).collect(),
        }
    }

    pub fn get(&self, team: &str) -> Option<f64> {
        self.tallies.get(team).copied()
    }

    pub fn total(&self) -> f64 {
        self.tallies.values().sum()
    }

    pub fn len(&self) -> usize {
        self.tallies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tallies.is_empty()
    }

    fn add(&mut self, team: &str, amount: f64) -> Result<()> {
        match self.tallies.get_mut(team) {
            Some(t) => {
                *t += amount;
                Ok(())
            }
            None => Err(Error::validation(format!("unknown team in game: {team}"))),
        }
    }
}

/// Apply the tally rule: the winner of each game gains +|score| and the
/// loser gains -|score|.
pub fn tally_rank(
    games: &[GameRecord],
    scores: &[GameScore],
    teams: impl IntoIterator<Item = String>,
    mode: TallyMode,
) -> Result<TallyBoard> {
    if games.len() != scores.len() {
        return Err(Error::validation(format!(
            "misaligned lists: {} games vs {} scores",
            games.len(),
            scores.len()
        )));
    }
    let mut board = TallyBoard::new(teams);
    for (game, score) in games.iter().zip(scores) {
        let home_wins = match mode {
            TallyMode::Predicted => score.predicted_home_win,
            TallyMode::Actual => game.home_won,
        };
        let magnitude = score.score.abs();
        let (winner, loser) = if home_wins {
            (&game.home_team, &game.away_team)
        } else {
            (&game.away_team, &game.home_team)
        };
        board.add(winner, magnitude)?;
        board.add(loser, -magnitude)?;
    }
    Ok(board)
}

/// An ordered league table: rank 1 first, non-increasing tally, ties broken
/// by ascending team id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standings {
    pub label: String,
    entries: Vec<(String, f64)>,
}

impl Standings {
    pub fn from_order(label: &str, order: impl IntoIterator<Item = (String, f64)>) -> Self {
        Standings {
            label: label.to_string(),
            entries: order.into_iter().collect(),
        }
    }

    pub fn teams(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &str, f64)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, (t, v))| (i + 1, t.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top_k(&self, k: usize) -> Vec<&str> {
        self.teams().take(k).collect()
    }

    /// CSV serialization: `rank,team,tally` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,team,tally\n");
        for (rank, team, tally) in self.entries() {
            out.push_str(&format!("{rank},{team},{tally}\n"));
        }
        out
    }

    pub fn from_csv(label: &str, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != "rank,team,tally" {
                    return Err(Error::validation(format!(
                        "bad standings header: {line}"
                    )));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.splitn(3, ',').collect();
            if parts.len() != 3 {
                return Err(Error::validation(format!("bad standings row: {line}")));
            }
            let tally: f64 = parts[2]
                .parse()
                .map_err(|_| Error::validation(format!("bad tally in row: {line}")))?;
            entries.push((parts[1].to_string(), tally));
        }
        if entries.is_empty() {
            return Err(Error::validation("empty standings file"));
        }
        Ok(Standings {
            label: label.to_string(),
            entries,
        })
    }
}

/// Sort a tally board into final standings: tally descending, ties broken by
/// ascending team id.
pub fn standings_from_tally(label: &str, board: &TallyBoard) -> Result<Standings> {
    if board.is_empty() {
        return Err(Error::validation("empty tally board"));
    }
    let mut entries: Vec<(String, f64)> = board
        .tallies
        .iter()
        .map(|(t, v)| (t.clone(), *v))
        .collect();
    entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    Ok(Standings {
        label: label.to_string(),
        entries,
    })
}

/// Standings by actual win count, one point per win. Used to derive the
/// "actual" table of a season from its game results.
pub fn standings_from_results(label: &str, games: &[GameRecord]) -> Result<Standings> {
    let mut teams: Vec<String> = Vec::new();
    for g in games {
        if !teams.contains(&g.home_team) {
            teams.push(g.home_team.clone());
        }
        if !teams.contains(&g.away_team) {
            teams.push(g.away_team.clone());
        }
    }
    let mut board = TallyBoard::new(teams);
    for g in games {
        let winner = if g.home_won { &g.home_team } else { &g.away_team };
        board.add(winner, 1.0)?;
    }
    standings_from_tally(label, &board)
}

/// Split merged basketball standings into East and West tables, preserving
/// relative order and renumbering ranks 1..n within each conference.
pub fn conference_split(
    standings: &Standings,
    league: &LeagueConfig,
) -> Result<(Standings, Standings)> {
    if league.sport != Sport::Basketball {
        return Err(Error::validation(
            "conference_split requires a basketball league (rugby is a single pool)",
        ));
    }
    let mut east = Vec::new();
    let mut west = Vec::new();
    for (team, tally) in &standings.entries {
        match league.conference_of(team) {
            Some(Conference::East) => east.push((team.clone(), *tally)),
            Some(Conference::West) => west.push((team.clone(), *tally)),
            _ => {
                return Err(Error::validation(format!(
                    "team {team} has no conference assignment"
                )))
            }
        }
    }
    Ok((
        Standings {
            label: format!("{}_east", standings.label),
            entries: east,
        },
        Standings {
            label: format!("{}_west", standings.label),
            entries: west,
        },
    ))
}

/// The previous season's actual table, used verbatim as the prediction.
pub fn naive_baseline(
    previous_season_actual: &Standings,
    test_season_teams: &[String],
) -> Result<Standings> {
    let mut prior: Vec<&str> = previous_season_actual.teams().collect();
    prior.sort_unstable();
    let mut current: Vec<&str> = test_season_teams.iter().map(|s| s.as_str()).collect();
    current.sort_unstable();
    current.dedup();
    if prior != current {
        return Err(Error::validation(
            "naive baseline roster mismatch between prior and test season",
        ));
    }
    Ok(Standings {
        label: "naive".to_string(),
        entries: previous_season_actual.entries.clone(),
    })
}

/// Seeded uniform random permutations of the team list, one Standings per
/// trial. Metrics over these are reported as mean ± standard deviation.
pub fn randomized_baseline(teams: &[String], trials: usize, rng_seed: u64) -> Vec<Standings> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..trials)
        .map(|trial| {
            let mut order: Vec<String> = teams.to_vec();
            order.shuffle(&mut rng);
            Standings {
                label: format!("randomized_{trial}"),
                entries: order.into_iter().map(|t| (t, 0.0)).collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siamese::GameScore;

    fn game(idx: u32, home: &str, away: &str, home_won: bool) -> GameRecord {
        GameRecord {
            season_id: 2020,
            game_index: idx,
            home_team: home.to_string(),
            away_team: away.to_string(),
            home_won,
        }
    }

    fn score(idx: u32, s: f64) -> GameScore {
        GameScore {
            game_index: idx,
            score: s,
            predicted_home_win: s >= 0.0,
        }
    }

    fn teams(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tally_single_game() {
        let games = vec![game(0, "H", "A", true)];
        let scores = vec![score(0, 0.8)];
        let board =
            tally_rank(&games, &scores, teams(&["H", "A"]), TallyMode::Predicted).unwrap();
        assert_eq!(board.get("H"), Some(0.8));
        assert_eq!(board.get("A"), Some(-0.8));
    }

    #[test]
    fn tally_mirrored_games_cancel() {
        let games = vec![game(0, "H", "A", true), game(1, "A", "H", true)];
        let scores = vec![score(0, 0.5), score(1, 0.5)];
        let board =
            tally_rank(&games, &scores, teams(&["H", "A"]), TallyMode::Predicted).unwrap();
        assert_eq!(board.get("H"), Some(0.0));
        assert_eq!(board.get("A"), Some(0.0));
    }

    #[test]
    fn tally_conserved() {
        let games = vec![
            game(0, "A", "B", true),
            game(1, "B", "C", false),
            game(2, "C", "A", true),
        ];
        let scores = vec![score(0, 0.3), score(1, -1.2), score(2, 0.7)];
        let board =
            tally_rank(&games, &scores, teams(&["A", "B", "C"]), TallyMode::Predicted).unwrap();
        assert!(board.total().abs() < 1e-12);
    }

    #[test]
    fn tally_misaligned_lists() {
        let games = vec![game(0, "A", "B", true)];
        assert!(tally_rank(&games, &[], teams(&["A", "B"]), TallyMode::Predicted).is_err());
    }

    #[test]
    fn tally_actual_mode_uses_recorded_winner() {
        // predicted away win, actual home win
        let games = vec![game(0, "H", "A", true)];
        let scores = vec![score(0, -0.4)];
        let board = tally_rank(&games, &scores, teams(&["H", "A"]), TallyMode::Actual).unwrap();
        assert_eq!(board.get("H"), Some(0.4));
    }

    #[test]
    fn standings_sorting_and_ties() {
        let mut board = TallyBoard::new(teams(&["A", "B"]));
        board.add("A", 2.0).unwrap();
        board.add("B", 1.0).unwrap();
        let s = standings_from_tally("t", &board).unwrap();
        assert_eq!(s.teams().collect::<Vec<_>>(), vec!["A", "B"]);

        let tied = TallyBoard::new(teams(&["B", "A"]));
        let s = standings_from_tally("t", &tied).unwrap();
        assert_eq!(s.teams().collect::<Vec<_>>(), vec!["A", "B"]);
    }

    #[test]
    fn standings_ranks_are_contiguous() {
        let board = TallyBoard::new((0..15).map(|i| format!("T{i:02}")));
        let s = standings_from_tally("t", &board).unwrap();
        let ranks: Vec<usize> = s.entries().map(|(r, _, _)| r).collect();
        assert_eq!(ranks, (1..=15).collect::<Vec<usize>>());
    }

    #[test]
    fn standings_csv_round_trip() {
        let board = TallyBoard::new(teams(&["A", "B", "C"]));
        let s = standings_from_tally("t", &board).unwrap();
        let csv = s.to_csv();
        let back = Standings::from_csv("t", &csv).unwrap();
        assert_eq!(s.entries, back.entries);
    }

    #[test]
    fn naive_baseline_verbatim_and_roster_check() {
        let prior = Standings::from_order(
            "prior",
            teams(&["A", "B", "C"]).into_iter().map(|t| (t, 0.0)),
        );
        let naive = naive_baseline(&prior, &teams(&["C", "A", "B"])).unwrap();
        assert_eq!(naive.teams().collect::<Vec<_>>(), vec!["A", "B", "C"]);
        // idempotent
        let again = naive_baseline(&naive, &teams(&["A", "B", "C"])).unwrap();
        assert_eq!(
            naive.teams().collect::<Vec<_>>(),
            again.teams().collect::<Vec<_>>()
        );
        assert!(naive_baseline(&prior, &teams(&["A", "B", "D"])).is_err());
    }

    #[test]
    fn randomized_baseline_contract() {
        let ts = teams(&["A", "B", "C", "D", "E"]);
        let runs = randomized_baseline(&ts, 30, 42);
        assert_eq!(runs.len(), 30);
        let rerun = randomized_baseline(&ts, 30, 42);
        for (a, b) in runs.iter().zip(&rerun) {
            assert_eq!(a.entries, b.entries);
        }
        for s in &runs {
            let mut sorted: Vec<&str> = s.teams().collect();
            sorted.sort_unstable();
            assert_eq!(sorted, vec!["A", "B", "C", "D", "E"]);
        }
    }

    #[test]
    fn scaling_scores_preserves_order() {
        let games = vec![
            game(0, "A", "B", true),
            game(1, "B", "C", true),
            game(2, "C", "A", false),
        ];
        let base = vec![score(0, 0.3), score(1, 0.9), score(2, -0.2)];
        let scaled: Vec<GameScore> = base
            .iter()
            .map(|s| GameScore {
                game_index: s.game_index,
                score: s.score * 7.5,
                predicted_home_win: s.predicted_home_win,
            })
            .collect();
        let t = teams(&["A", "B", "C"]);
        let s1 = standings_from_tally(
            "a",
            &tally_rank(&games, &base, t.clone(), TallyMode::Predicted).unwrap(),
        )
        .unwrap();
        let s2 = standings_from_tally(
            "b",
            &tally_rank(&games, &scaled, t, TallyMode::Predicted).unwrap(),
        )
        .unwrap();
        assert_eq!(
            s1.teams().collect::<Vec<_>>(),
            s2.teams().collect::<Vec<_>>()
        );
    }
}
