//! Command-line front end for the season-ranking pipeline.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 runtime
//! failure inside a pipeline stage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use seasonrank::error::{Error, Result};
use seasonrank::ingest::{
    write_games_csv, write_stats_csv, NormalizationParams, SeasonDataset, Sport,
};
use seasonrank::pipeline::config::load_seasons;
use seasonrank::pipeline::synth::write_synthetic_files;
use seasonrank::pipeline::{
    emit_report, evaluate_standings, fit_model, score_season, ExperimentConfig, FittedModel,
    ModelKind, Report, ReportFormat, SyntheticLeagueSpec,
};
use seasonrank::ranker::{
    naive_baseline, randomized_baseline, standings_from_tally, tally_rank, Standings,
};
use seasonrank::siamese::{EmbeddingTap, SiameseParams, TrainOutcome};

#[derive(Parser)]
#[command(name = "seasonrank", version, about = "Season ranking pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate raw season files and write canonical copies
    Ingest {
        #[arg(long)]
        sport: String,
        /// directory holding the per-season CSV files
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the configured model matrix and write models plus a report
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Score the test season with a saved model and print the standings
    Rank {
        /// model bundle produced by `train`
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare a predicted standings CSV against the actual one
    Evaluate {
        #[arg(long)]
        predicted: PathBuf,
        #[arg(long)]
        actual: PathBuf,
        /// rugby or basketball
        #[arg(long)]
        league: String,
        /// team,conference file (required for basketball)
        #[arg(long)]
        conferences: Option<PathBuf>,
    },
    /// Produce a baseline standings table
    Baseline {
        /// naive or randomized
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// prior-season standings CSV (order and team list source)
        #[arg(long)]
        prior: PathBuf,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        /// output directory for the standings CSV(s); stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic league from a TOML spec
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-emit a JSON report in another format
    Report {
        /// csv, json, or text-table
        #[arg(long)]
        format: String,
        /// report.json produced by `train`
        #[arg(long)]
        input: PathBuf,
        /// output directory; text-table prints to stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Everything needed to score with a fitted model, as one JSON file.
#[derive(Serialize, Deserialize)]
struct ModelBundle {
    kind: String,
    tap: EmbeddingTap,
    norm: NormalizationParams,
    siamese: Option<String>,
    gbm: String,
}

impl ModelBundle {
    fn from_model(model: &FittedModel, seed: u64) -> Self {
        ModelBundle {
            kind: model.kind.to_string(),
            tap: model.tap,
            norm: model.norm.clone(),
            siamese: model
                .siamese
                .as_ref()
                .map(|o| o.params.to_text(seed, &model.kind.to_string())),
            gbm: model.ensemble.to_text(),
        }
    }

    fn into_model(self) -> Result<FittedModel> {
        let kind: ModelKind = self.kind.parse()?;
        let siamese = match self.siamese {
            Some(text) => Some(TrainOutcome {
                params: SiameseParams::from_text(&text)?,
                epoch_losses: Vec::new(),
            }),
            None => None,
        };
        let ensemble = seasonrank::gbm::BoostedEnsemble::from_text(&self.gbm)?;
        Ok(FittedModel {
            kind,
            siamese,
            ensemble,
            norm: self.norm,
            tap: self.tap,
        })
    }

    fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::validation(format!("cannot serialize model: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("bad model file {}: {e}", path.display())))
    }
}

fn parse_sport(s: &str) -> Result<Sport> {
    match s {
        "rugby" => Ok(Sport::Rugby),
        "basketball" => Ok(Sport::Basketball),
        other => Err(Error::validation(format!("unknown sport: {other}"))),
    }
}

fn cmd_ingest(sport: &str, input: &Path, out: &Path) -> Result<()> {
    let sport = parse_sport(sport)?;
    let seasons = load_seasons(sport, input)?;
    std::fs::create_dir_all(out)?;
    let prefix = match sport {
        Sport::Rugby => "rugby",
        Sport::Basketball => "basketball",
    };
    for season in &seasons {
        std::fs::write(
            out.join(format!("{prefix}_{}.csv", season.season_id)),
            write_stats_csv(&season.stats)?,
        )?;
        std::fs::write(
            out.join(format!("{prefix}_{}_games.csv", season.season_id)),
            write_games_csv(&season.games),
        )?;
        println!(
            "season {}: {} teams, {} games",
            season.season_id,
            season.stats.len(),
            season.games.len()
        );
    }
    Ok(())
}

fn cmd_train(config_path: &Path) -> Result<()> {
    let config = ExperimentConfig::load(config_path)?;
    let seasons = load_seasons(config.sport, &config.data_dir)?;
    let models_dir = config.output_dir.join("models");
    std::fs::create_dir_all(&models_dir)?;

    // per-model bundles for `rank`
    let (train_raw, _) = seasonrank::ingest::temporal_split(seasons.clone())?;
    let train_stats: Vec<_> = train_raw
        .iter()
        .flat_map(|s| s.stats.iter().cloned())
        .collect();
    let norm = NormalizationParams::fit(&train_stats)?;
    let train_seasons: Vec<SeasonDataset> = train_raw
        .iter()
        .map(|s| {
            Ok(SeasonDataset {
                league: s.league.clone(),
                season_id: s.season_id,
                stats: seasonrank::ingest::normalize(&s.stats, &norm)?,
                games: s.games.clone(),
            })
        })
        .collect::<Result<_>>()?;
    for (index, kind) in config.models.iter().enumerate() {
        let mut train_config = config.train.clone();
        train_config.rng_seed = config
            .rng_seed
            .wrapping_mul(1000)
            .wrapping_add(index as u64);
        let mut boost_config = config.boost.clone();
        boost_config.rng_seed = train_config.rng_seed;
        let model = fit_model(*kind, &train_seasons, norm.clone(), &train_config, &boost_config)?;
        let file = models_dir.join(format!("{}.model.json", slug(&kind.to_string())));
        ModelBundle::from_model(&model, train_config.rng_seed).save(&file)?;
        println!("trained {kind} -> {}", file.display());
    }

    // full experiment report over the same matrix
    let report = seasonrank::pipeline::run_experiment(&config, seasons)?;
    let path = emit_report(&report, ReportFormat::Json, &config.output_dir)?;
    println!("report -> {}", path.display());
    Ok(())
}

fn cmd_rank(model_path: &Path, config_path: &Path) -> Result<()> {
    let config = ExperimentConfig::load(config_path)?;
    let model = ModelBundle::load(model_path)?.into_model()?;
    let seasons = load_seasons(config.sport, &config.data_dir)?;
    let (_, test_raw) = seasonrank::ingest::temporal_split(seasons)?;
    let test_season = SeasonDataset {
        league: test_raw.league.clone(),
        season_id: test_raw.season_id,
        stats: seasonrank::ingest::normalize(&test_raw.stats, &model.norm)?,
        games: test_raw.games.clone(),
    };
    let scores = score_season(&model, &test_season)?;
    let board = tally_rank(
        &test_season.games,
        &scores,
        test_season.teams(),
        config.tally_mode,
    )?;
    let standings = standings_from_tally(&model.kind.to_string(), &board)?;
    std::fs::create_dir_all(&config.output_dir)?;
    let out = config
        .output_dir
        .join(format!("standings_{}.csv", slug(&model.kind.to_string())));
    std::fs::write(&out, standings.to_csv())?;
    print!("{}", standings.to_csv());
    println!("written -> {}", out.display());
    Ok(())
}

fn cmd_evaluate(
    predicted: &Path,
    actual: &Path,
    league: &str,
    conferences: Option<&Path>,
) -> Result<()> {
    let sport = parse_sport(league)?;
    let league_config = match sport {
        Sport::Rugby => seasonrank::ingest::LeagueConfig::rugby(),
        Sport::Basketball => {
            let path = conferences.ok_or_else(|| {
                Error::validation("basketball evaluation needs --conferences")
            })?;
            let text = std::fs::read_to_string(path)?;
            let mut map = std::collections::BTreeMap::new();
            for (i, line) in text.lines().enumerate() {
                if i == 0 || line.trim().is_empty() {
                    continue;
                }
                let (team, conf) = line
                    .split_once(',')
                    .ok_or_else(|| Error::validation(format!("bad conference row: {line}")))?;
                let c = match conf.trim() {
                    "east" => seasonrank::ingest::Conference::East,
                    "west" => seasonrank::ingest::Conference::West,
                    other => {
                        return Err(Error::validation(format!("unknown conference: {other}")))
                    }
                };
                map.insert(team.trim().to_string(), c);
            }
            seasonrank::ingest::LeagueConfig::basketball(map)
        }
    };
    let predicted = Standings::from_csv("predicted", &std::fs::read_to_string(predicted)?)?;
    let actual = Standings::from_csv("actual", &std::fs::read_to_string(actual)?)?;
    // metrics only consult the league shape, so an empty season carrier works
    let season = SeasonDataset {
        league: league_config,
        season_id: 0,
        stats: Vec::new(),
        games: Vec::new(),
    };
    let (triple, playoff) = evaluate_standings(&predicted, &actual, &season)?;
    let ap_name = match sport {
        Sport::Rugby => "ap",
        Sport::Basketball => "map",
    };
    println!("{ap_name} {}", triple.ap_or_map);
    println!("spearman {}", triple.spearman);
    println!("ndcg {}", triple.ndcg);
    println!("playoff_correct {playoff}");
    Ok(())
}

fn cmd_baseline(kind: &str, seed: u64, prior: &Path, trials: usize, out: Option<&Path>) -> Result<()> {
    let prior = Standings::from_csv("prior", &std::fs::read_to_string(prior)?)?;
    let teams: Vec<String> = prior.teams().map(|t| t.to_string()).collect();
    let mut outputs: Vec<Standings> = Vec::new();
    match kind {
        "naive" => outputs.push(naive_baseline(&prior, &teams)?),
        "randomized" => outputs.extend(randomized_baseline(&teams, trials, seed)),
        other => return Err(Error::validation(format!("unknown baseline kind: {other}"))),
    }
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for s in &outputs {
                let path = dir.join(format!("standings_{}.csv", slug(&s.label)));
                std::fs::write(&path, s.to_csv())?;
            }
            println!("{} table(s) -> {}", outputs.len(), dir.display());
        }
        None => {
            for s in &outputs {
                println!("# {}", s.label);
                print!("{}", s.to_csv());
            }
        }
    }
    Ok(())
}

fn cmd_synth(spec_path: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(spec_path)?;
    let spec: SyntheticLeagueSpec =
        toml::from_str(&text).map_err(|e| Error::validation(format!("bad synth spec: {e}")))?;
    let seasons = write_synthetic_files(&spec, out)?;
    println!(
        "{} seasons of {} teams -> {}",
        seasons.len(),
        spec.team_count,
        out.display()
    );
    Ok(())
}

fn cmd_report(format: &str, input: &Path, out: Option<&Path>) -> Result<()> {
    let format: ReportFormat = format.parse()?;
    let report = Report::from_json(&std::fs::read_to_string(input)?)?;
    match out {
        Some(dir) => {
            let path = emit_report(&report, format, dir)?;
            println!("report -> {}", path.display());
        }
        None => match format {
            ReportFormat::Csv => print!("{}", report.to_csv()),
            ReportFormat::Json => println!("{}", report.to_json()?),
            ReportFormat::TextTable => print!("{}", report.to_text_table()),
        },
    }
    Ok(())
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest { sport, input, out } => cmd_ingest(sport, input, out),
        Command::Train { config } => cmd_train(config),
        Command::Rank { model, config } => cmd_rank(model, config),
        Command::Evaluate {
            predicted,
            actual,
            league,
            conferences,
        } => cmd_evaluate(predicted, actual, league, conferences.as_deref()),
        Command::Baseline {
            kind,
            seed,
            prior,
            trials,
            out,
        } => cmd_baseline(kind, *seed, prior, *trials, out.as_deref()),
        Command::Synth { spec, out } => cmd_synth(spec, out),
        Command::Report { format, input, out } => cmd_report(format, input, out.as_deref()),
    }
}

fn main() -> ExitCode {
    // die quietly when a downstream pager/head closes the pipe
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
