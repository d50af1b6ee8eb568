//! Acceptance gate: one test per numbered criterion. Each test prints a
//! single `criterion NN PASS` line on success (visible with --nocapture).

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seasonrank::gbm::{boost_fit, BoostConfig, BoostData, Objective, QueryGroup};
use seasonrank::ingest::{SeasonDataset, Sport, TrainingPair, TrainingTriplet};
use seasonrank::metrics;
use seasonrank::pipeline::synth::{generate_synthetic_league, SyntheticLeagueSpec};
use seasonrank::pipeline::{
    emit_report, run_experiment, ExperimentConfig, MetricTriple, ModelKind, Report, ReportFormat,
    ReportRow,
};
use seasonrank::ranker::{naive_baseline, randomized_baseline, Standings, TallyMode};
use seasonrank::siamese::{
    contrastive_loss, euclidean_distance, forward, loss_gradients, triplet_loss, SiameseParams,
    TrainData,
};

fn standings_of(teams: &[String]) -> Standings {
    let n = teams.len();
    Standings::from_order(
        "t",
        teams
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), (n - i) as f64)),
    )
}

fn team_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("T{i:02}")).collect()
}

// ---------- criterion 1: brute-force metric oracles ----------

fn brute_ap(pred: &[String], act: &[String], cap: usize) -> f64 {
    let mut sum = 0.0;
    for k in 1..=cap {
        let top_a: Vec<&String> = act.iter().take(k).collect();
        let hits = pred
            .iter()
            .take(k)
            .filter(|t| top_a.contains(t))
            .count();
        sum += hits as f64 / k as f64;
    }
    sum / cap as f64
}

fn brute_spearman(pred: &[String], act: &[String]) -> f64 {
    let n = pred.len();
    let rank_act: HashMap<&String, usize> =
        act.iter().enumerate().map(|(i, t)| (t, i + 1)).collect();
    let d2: f64 = pred
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let d = (i + 1) as f64 - rank_act[t] as f64;
            d * d
        })
        .sum();
    1.0 - 6.0 * d2 / (n as f64 * ((n * n - 1) as f64))
}

fn brute_ndcg(pred: &[String], act: &[String], p: usize) -> f64 {
    let n = act.len() as u32;
    let rel: HashMap<&String, u32> =
        act.iter().enumerate().map(|(i, t)| (t, n - i as u32)).collect();
    let dcg: f64 = pred
        .iter()
        .take(p)
        .enumerate()
        .map(|(i, t)| ((2f64).powi(rel[t] as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum();
    let mut ideal: Vec<u32> = act.iter().map(|t| rel[t]).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(p)
        .enumerate()
        .map(|(i, r)| ((2f64).powi(*r as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum();
    dcg / idcg
}

#[test]
fn criterion_01_metric_oracle_equivalence() {
    let start = Instant::now();
    let teams = team_names(15);
    let actual_order = teams.clone();
    let actual = standings_of(&actual_order);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_diff: f64 = 0.0;
    for _ in 0..1000 {
        let mut perm = teams.clone();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng);
        let predicted = standings_of(&perm);

        let ap = metrics::average_precision(&predicted, &actual, 15).unwrap();
        let rs = metrics::spearman_rs(&predicted, &actual).unwrap();
        let nd = metrics::ndcg_vs_actual(&predicted, &actual, 15).unwrap();

        max_diff = max_diff
            .max((ap - brute_ap(&perm, &actual_order, 15)).abs())
            .max((rs - brute_spearman(&perm, &actual_order)).abs())
            .max((nd - brute_ndcg(&perm, &actual_order, 15)).abs());
    }
    assert!(max_diff <= 1e-12, "max diff {max_diff}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 01 PASS - metric oracle equivalence, max abs diff {max_diff:.2e} over 1000 permutations in {elapsed:?}"
    );
}

// ---------- criterion 2: hand values ----------

#[test]
fn criterion_02_hand_values() {
    let order = |names: &[&str]| {
        standings_of(&names.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    };
    let rs = metrics::spearman_rs(&order(&["A", "C", "B"]), &order(&["A", "B", "C"])).unwrap();
    assert!((rs - 0.5).abs() <= 1e-15, "spearman {rs}");

    // top-two swap over relevances (3,2,1)
    let nd = metrics::ndcg_vs_actual(&order(&["B", "A", "C"]), &order(&["A", "B", "C"]), 3)
        .unwrap();
    assert!((nd - 0.84283).abs() <= 1e-5, "ndcg {nd}");

    let ap = metrics::average_precision(&order(&["C", "B", "A"]), &order(&["A", "B", "C"]), 3)
        .unwrap();
    assert!((ap - 0.5).abs() <= 1e-12, "ap {ap}");
    println!("criterion 02 PASS - hand values rs=0.5, ndcg~0.84283, reversed AP=0.5");
}

// ---------- criterion 3: finite-difference gradient check ----------

const IN_WIDTH: usize = 37;
const FD_H: f64 = 1e-5;
const KINK_EPS: f64 = 1e-8;

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn batch_loss(params: &SiameseParams, data: &TrainData, margin: f64) -> f64 {
    let n = data.len() as f64;
    let total: f64 = match data {
        TrainData::Pairs(pairs) => pairs
            .iter()
            .map(|p| {
                let a = forward(params, &p.home).unwrap();
                let b = forward(params, &p.away).unwrap();
                let d = euclidean_distance(a.output(), b.output()).unwrap();
                contrastive_loss(p.label, d, margin).unwrap()
            })
            .sum(),
        TrainData::Triplets(ts) => ts
            .iter()
            .map(|t| {
                let a = forward(params, &t.anchor).unwrap();
                let p = forward(params, &t.positive).unwrap();
                let n_ = forward(params, &t.negative).unwrap();
                let d_ap = euclidean_distance(a.output(), p.output()).unwrap();
                let d_an = euclidean_distance(a.output(), n_.output()).unwrap();
                triplet_loss(d_ap, d_an, margin).unwrap()
            })
            .sum(),
    };
    total / n
}

/// A draw is rejected when any pre-activation or hinge boundary sits within
/// KINK_EPS of a kink, where a finite-difference probe is ill-posed.
fn near_kink(params: &SiameseParams, data: &TrainData, margin: f64) -> bool {
    let pre_near = |x: &[f64]| -> bool {
        let acts = forward(params, x).unwrap();
        // hidden layers only; the output layer is linear
        acts.pre[..acts.pre.len() - 1]
            .iter()
            .any(|layer| layer.iter().any(|z| z.abs() < KINK_EPS))
    };
    match data {
        TrainData::Pairs(pairs) => pairs.iter().any(|p| {
            if pre_near(&p.home) || pre_near(&p.away) {
                return true;
            }
            let a = forward(params, &p.home).unwrap();
            let b = forward(params, &p.away).unwrap();
            let d = euclidean_distance(a.output(), b.output()).unwrap();
            d < KINK_EPS || (p.label == 1 && (margin - d).abs() < KINK_EPS)
        }),
        TrainData::Triplets(ts) => ts.iter().any(|t| {
            if pre_near(&t.anchor) || pre_near(&t.positive) || pre_near(&t.negative) {
                return true;
            }
            let a = forward(params, &t.anchor).unwrap();
            let p = forward(params, &t.positive).unwrap();
            let n_ = forward(params, &t.negative).unwrap();
            let d_ap = euclidean_distance(a.output(), p.output()).unwrap();
            let d_an = euclidean_distance(a.output(), n_.output()).unwrap();
            d_ap < KINK_EPS || d_an < KINK_EPS || (d_ap - d_an + margin).abs() < KINK_EPS
        }),
    }
}

fn fd_max_rel_err(params: &SiameseParams, data: &TrainData, margin: f64) -> f64 {
    let (_, grads) = loss_gradients(params, data, margin).unwrap();
    let analytic = grads.to_flat();
    let flat = params.to_flat();
    let shape = params.shape.clone();
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut plus = flat.clone();
        plus[i] += FD_H;
        let mut minus = flat.clone();
        minus[i] -= FD_H;
        let lp = batch_loss(&SiameseParams::from_flat(&shape, &plus).unwrap(), data, margin);
        let lm = batch_loss(&SiameseParams::from_flat(&shape, &minus).unwrap(), data, margin);
        let numeric = (lp - lm) / (2.0 * FD_H);
        let a = analytic[i];
        if a.abs() < 1e-8 && numeric.abs() < 1e-8 {
            continue;
        }
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
    }
    worst
}

#[test]
fn criterion_03_gradient_finite_differences() {
    let shape = SiameseParams::default_shape(IN_WIDTH);
    let margin = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for draw in 0..100u64 {
        // alternate the two losses across the 100 draws
        let contrastive = draw % 2 == 0;
        let mut attempts = 0;
        loop {
            let params = SiameseParams::init(&shape, rng.gen());
            let data = if contrastive {
                TrainData::Pairs(vec![
                    TrainingPair {
                        home: rand_vec(&mut rng, IN_WIDTH),
                        away: rand_vec(&mut rng, IN_WIDTH),
                        label: 0,
                    },
                    TrainingPair {
                        home: rand_vec(&mut rng, IN_WIDTH),
                        away: rand_vec(&mut rng, IN_WIDTH),
                        label: 1,
                    },
                ])
            } else {
                TrainData::Triplets(vec![TrainingTriplet {
                    anchor: rand_vec(&mut rng, IN_WIDTH),
                    positive: rand_vec(&mut rng, IN_WIDTH),
                    negative: rand_vec(&mut rng, IN_WIDTH),
                }])
            };
            if near_kink(&params, &data, margin) {
                attempts += 1;
                assert!(attempts < 50, "could not draw away from kinks");
                continue;
            }
            worst = worst.max(fd_max_rel_err(&params, &data, margin));
            break;
        }
    }
    assert!(worst <= 1e-4, "max relative error {worst}");
    println!("criterion 03 PASS - gradient check max relative error {worst:.2e} over 100 draws");
}

// ---------- criterion 4: boosting soundness ----------

#[test]
fn criterion_04_boosting_soundness() {
    let start = Instant::now();
    // depth-2 interaction fixture: main effects plus a product term no
    // single split can express
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let rows: Vec<Vec<f64>> = (0..300).map(|_| rand_vec(&mut rng, 4)).collect();
    let labels: Vec<f64> = rows
        .iter()
        .map(|r| r[0] + r[1] + 2.0 * r[0] * r[1])
        .collect();
    let config = BoostConfig {
        rounds: 100,
        max_depth: 2,
        learning_rate: 0.1,
        objective: Objective::SquaredError,
        ..Default::default()
    };
    let ensemble = boost_fit(
        &BoostData::Rows {
            rows: rows.clone(),
            labels: labels.clone(),
        },
        &config,
    )
    .unwrap();

    for w in ensemble.round_objectives.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "loss increased: {} -> {}", w[0], w[1]);
    }
    let mse: f64 = rows
        .iter()
        .zip(&labels)
        .map(|(r, y)| {
            let p = ensemble.predict_row(r).unwrap();
            (p - y) * (p - y)
        })
        .sum::<f64>()
        / rows.len() as f64;
    assert!(mse <= 0.05, "final MSE {mse}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("criterion 04 PASS - monotone squared loss, final MSE {mse:.4} in {elapsed:?}");
}

// ---------- criterion 5: ranking objective soundness ----------

fn group_ndcg_at(scores: &[f64], labels: &[f64], p: usize) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // score descending, ties by original index for determinism
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let dcg: f64 = order
        .iter()
        .take(p)
        .enumerate()
        .map(|(i, &idx)| (labels[idx].exp2() - 1.0) / ((i + 2) as f64).log2())
        .sum();
    let mut ideal = labels.to_vec();
    ideal.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let idcg: f64 = ideal
        .iter()
        .take(p)
        .enumerate()
        .map(|(i, l)| (l.exp2() - 1.0) / ((i + 2) as f64).log2())
        .sum();
    dcg / idcg
}

#[test]
fn criterion_05_ranking_objective_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut groups = Vec::new();
    for key in 0..20 {
        let rows: Vec<Vec<f64>> = (0..10).map(|_| rand_vec(&mut rng, 4)).collect();
        // label = noiseless monotone function of feature 0 (its rank)
        let mut order: Vec<usize> = (0..10).collect();
        order.sort_by(|&a, &b| rows[a][0].partial_cmp(&rows[b][0]).unwrap());
        let mut labels = vec![0.0; 10];
        for (rank, &idx) in order.iter().enumerate() {
            labels[idx] = (rank + 1) as f64;
        }
        groups.push(QueryGroup { key, rows, labels });
    }
    let config = BoostConfig {
        rounds: 50,
        objective: Objective::NdcgScaledPairwise,
        ..Default::default()
    };
    let ensemble = boost_fit(&BoostData::Groups(groups.clone()), &config).unwrap();

    let mean_ndcg_at_round = |round: usize| -> f64 {
        groups
            .iter()
            .map(|g| {
                let scores: Vec<f64> = g
                    .rows
                    .iter()
                    .map(|r| ensemble.predict_row_prefix(r, round).unwrap())
                    .collect();
                group_ndcg_at(&scores, &g.labels, 10)
            })
            .sum::<f64>()
            / groups.len() as f64
    };

    let baseline = mean_ndcg_at_round(0);
    let mut reached = None;
    for round in 1..=50 {
        let nd = mean_ndcg_at_round(round);
        assert!(
            nd >= baseline - 1e-12,
            "round {round} NDCG {nd} fell below F0 baseline {baseline}"
        );
        if reached.is_none() && nd >= 0.9 {
            reached = Some((round, nd));
        }
    }
    let (round, nd) = reached.expect("NDCG@10 never reached 0.9 within 50 rounds");
    println!(
        "criterion 05 PASS - NDCG@10 {nd:.4} at round {round} (F0 baseline {baseline:.4}), never below baseline"
    );
}

// ---------- criterion 6: end-to-end synthetic league ----------

/// Bradley-Terry strength fit by gradient ascent on the game log-likelihood;
/// the calibration oracle for the end-to-end thresholds.
fn bt_oracle_order(seasons: &[SeasonDataset], teams: &[String]) -> Vec<String> {
    let index: HashMap<&String, usize> = teams.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut s = vec![0.0f64; teams.len()];
    for _ in 0..500 {
        let mut grad = vec![0.0f64; teams.len()];
        for season in seasons {
            for g in &season.games {
                let h = index[&g.home_team];
                let a = index[&g.away_team];
                let p = 1.0 / (1.0 + (-(s[h] - s[a])).exp());
                let y = if g.home_won { 1.0 } else { 0.0 };
                grad[h] += y - p;
                grad[a] -= y - p;
            }
        }
        for (si, gi) in s.iter_mut().zip(&grad) {
            *si += 0.05 * gi;
        }
    }
    let mut order: Vec<usize> = (0..teams.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap().then(teams[a].cmp(&teams[b])));
    order.into_iter().map(|i| teams[i].clone()).collect()
}

#[test]
fn criterion_06_end_to_end_synthetic_league() {
    let start = Instant::now();
    let mut pipe_rs = 0.0;
    let mut pipe_nd = 0.0;
    let mut oracle_rs = 0.0;
    let mut oracle_nd = 0.0;
    let n_seeds = 10;
    for seed in 0..n_seeds {
        let spec = SyntheticLeagueSpec {
            rng_seed: 600 + seed,
            outcome_temperature: 0.3,
            ..Default::default()
        };
        let seasons = generate_synthetic_league(&spec).unwrap();
        let truth = standings_of(&spec.true_order());

        let config = ExperimentConfig {
            sport: Sport::Rugby,
            data_dir: "unused".into(),
            output_dir: "unused".into(),
            models: vec![ModelKind::GbmNdcgSiameseTriplet],
            train: Default::default(),
            boost: Default::default(),
            rng_seed: seed,
            tally_mode: TallyMode::Predicted,
        };
        let report = run_experiment(&config, seasons.clone()).unwrap();
        let predicted = &report.standings[0];
        pipe_rs += metrics::spearman_rs(predicted, &truth).unwrap();
        pipe_nd += metrics::ndcg_vs_actual(predicted, &truth, 15).unwrap();

        let teams = spec.true_order();
        let oracle = standings_of(&bt_oracle_order(&seasons[..3], &teams));
        oracle_rs += metrics::spearman_rs(&oracle, &truth).unwrap();
        oracle_nd += metrics::ndcg_vs_actual(&oracle, &truth, 15).unwrap();
    }
    let n = n_seeds as f64;
    let (pipe_rs, pipe_nd) = (pipe_rs / n, pipe_nd / n);
    let (oracle_rs, oracle_nd) = (oracle_rs / n, oracle_nd / n);

    // the gates sit at least 0.05 below the calibration oracle's means
    assert!(oracle_rs - 0.05 >= 0.7, "oracle spearman {oracle_rs}");
    assert!(oracle_nd - 0.05 >= 0.9, "oracle ndcg {oracle_nd}");
    assert!(pipe_rs >= 0.7, "pipeline mean spearman {pipe_rs}");
    assert!(pipe_nd >= 0.9, "pipeline mean ndcg {pipe_nd}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "criterion 06 PASS - pipeline rs {pipe_rs:.3} / ndcg {pipe_nd:.3} vs oracle rs {oracle_rs:.3} / ndcg {oracle_nd:.3} over {n_seeds} seeds in {elapsed:?}"
    );
}

// ---------- criterion 7: published-number reproduction declaration ----------

#[test]
fn criterion_07_external_data_declaration() {
    // the four-season NBA / Super Rugby datasets are proprietary and not
    // shipped; reproduction of the published tables is a data-dependent
    // diagnostic, not a desk check. Here we verify the report formats that
    // the diagnostic would populate.
    let mut basketball = Report::new(Sport::Basketball, 2018);
    basketball.rows.push(ReportRow {
        model: ModelKind::GbmNdcgSiameseTriplet.to_string(),
        metrics: MetricTriple {
            ap_or_map: 0.867,
            spearman: 0.83,
            ndcg: 0.980,
        },
        std: None,
        playoff_correct: Some(8),
    });
    assert!(basketball.to_text_table().contains("Model | mAP | r_s | NDCG"));

    let mut rugby = Report::new(Sport::Rugby, 2019);
    rugby.rows.push(ReportRow {
        model: ModelKind::GbmNdcgSiameseTriplet.to_string(),
        metrics: MetricTriple {
            ap_or_map: 0.921,
            spearman: 0.793,
            ndcg: 0.982,
        },
        std: None,
        playoff_correct: Some(7),
    });
    assert!(rugby.to_text_table().contains("Model | AP | r_s | NDCG"));

    println!(
        "criterion 07 PASS - declared NOT desk-reproducible (external four-season datasets); \
         table formats verified, run the ignored diagnostic with real data to compare against \
         published values within ±0.05"
    );
}

/// Data-dependent diagnostic, excluded from CI: point SEASONRANK_DATA_DIR at
/// a directory holding the documented rugby schema files and run with
/// `cargo test -- --ignored criterion_07_published_targets`.
#[test]
#[ignore]
fn criterion_07_published_targets_with_external_data() {
    let dir = std::env::var("SEASONRANK_DATA_DIR").expect("set SEASONRANK_DATA_DIR");
    let config = ExperimentConfig {
        sport: Sport::Rugby,
        data_dir: dir.clone().into(),
        output_dir: "unused".into(),
        models: vec![ModelKind::GbmNdcgSiameseTriplet],
        train: Default::default(),
        boost: Default::default(),
        rng_seed: 0,
        tally_mode: TallyMode::Predicted,
    };
    let seasons =
        seasonrank::pipeline::config::load_seasons(Sport::Rugby, std::path::Path::new(&dir))
            .unwrap();
    let report = run_experiment(&config, seasons).unwrap();
    let row = &report.rows[0];
    assert!((row.metrics.ap_or_map - 0.921).abs() <= 0.05, "AP {}", row.metrics.ap_or_map);
    assert!((row.metrics.spearman - 0.793).abs() <= 0.05, "rs {}", row.metrics.spearman);
    assert!((row.metrics.ndcg - 0.982).abs() <= 0.05, "NDCG {}", row.metrics.ndcg);
}

// ---------- criterion 8: baseline contract ----------

#[test]
fn criterion_08_baseline_contract() {
    let teams = team_names(15);
    let prior = standings_of(&teams);

    let naive = naive_baseline(&prior, &teams).unwrap();
    let naive_order: Vec<&str> = naive.teams().collect();
    let prior_order: Vec<&str> = prior.teams().collect();
    assert_eq!(naive_order, prior_order, "naive must equal the prior season verbatim");

    let a = randomized_baseline(&teams, 30, 808);
    let b = randomized_baseline(&teams, 30, 808);
    assert_eq!(a.len(), 30);
    for (x, y) in a.iter().zip(&b) {
        let xo: Vec<&str> = x.teams().collect();
        let yo: Vec<&str> = y.teams().collect();
        assert_eq!(xo, yo, "same seed must reproduce every permutation");
        let mut sorted = xo.clone();
        sorted.sort_unstable();
        let mut expect: Vec<&str> = teams.iter().map(|t| t.as_str()).collect();
        expect.sort_unstable();
        assert_eq!(sorted, expect, "each trial must be a permutation of the league");
    }
    let c = randomized_baseline(&teams, 30, 809);
    assert!(
        a.iter().zip(&c).any(|(x, y)| {
            x.teams().collect::<Vec<_>>() != y.teams().collect::<Vec<_>>()
        }),
        "different seeds should differ"
    );

    // the randomized report row carries mean ± std
    let mut report = Report::new(Sport::Rugby, 2020);
    report.rows.push(ReportRow {
        model: "randomized".into(),
        metrics: MetricTriple {
            ap_or_map: 0.55,
            spearman: 0.0,
            ndcg: 0.8,
        },
        std: Some(MetricTriple {
            ap_or_map: 0.04,
            spearman: 0.22,
            ndcg: 0.02,
        }),
        playoff_correct: None,
    });
    assert!(report.to_text_table().contains("±"));
    println!("criterion 08 PASS - naive verbatim, 30 seeded permutations reproducible, std reported");
}

// ---------- criteria 9 & 10: determinism and tally conservation ----------

fn six_model_config(seed: u64) -> ExperimentConfig {
    let mut boost = BoostConfig::default();
    boost.rounds = 40;
    ExperimentConfig {
        sport: Sport::Rugby,
        data_dir: "unused".into(),
        output_dir: "unused".into(),
        models: ModelKind::six_model_matrix(),
        train: Default::default(),
        boost,
        rng_seed: seed,
        tally_mode: TallyMode::Predicted,
    }
}

fn dir_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().to_string(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_09_determinism() {
    let spec = SyntheticLeagueSpec {
        rng_seed: 909,
        ..Default::default()
    };
    let seasons = generate_synthetic_league(&spec).unwrap();
    let config = six_model_config(9);

    let r1 = run_experiment(&config, seasons.clone()).unwrap();
    let r2 = run_experiment(&config, seasons).unwrap();

    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for fmt in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::TextTable] {
        emit_report(&r1, fmt, d1.path()).unwrap();
        emit_report(&r2, fmt, d2.path()).unwrap();
    }
    let f1 = dir_bytes(d1.path());
    let f2 = dir_bytes(d2.path());
    assert_eq!(f1.len(), f2.len());
    for ((n1, b1), (n2, b2)) in f1.iter().zip(&f2) {
        assert_eq!(n1, n2);
        assert_eq!(b1, b2, "file {n1} differs between identical runs");
    }
    assert_eq!(r1.rows.len(), 8, "six model rows plus two baseline rows");
    println!(
        "criterion 09 PASS - six-model experiment byte-identical across runs ({} files compared)",
        f1.len()
    );
}

#[test]
fn criterion_10_tally_conservation() {
    let spec = SyntheticLeagueSpec {
        rng_seed: 1010,
        ..Default::default()
    };
    let seasons = generate_synthetic_league(&spec).unwrap();
    let mut config = six_model_config(10);
    config.models = vec![ModelKind::GbmNdcg, ModelKind::GbmPairwiseSiameseTriplet];
    let report = run_experiment(&config, seasons).unwrap();
    assert_eq!(report.tally_totals.len(), 2);
    for (row, total) in report.rows.iter().zip(&report.tally_totals) {
        assert!(
            total.abs() <= 1e-9,
            "model {} tally sum {total} exceeds the accumulation bound",
            row.model
        );
    }
    println!(
        "criterion 10 PASS - tally sums {:?} all within 1e-9 of zero",
        report.tally_totals
    );
}
