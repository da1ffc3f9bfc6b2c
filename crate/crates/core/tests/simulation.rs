mod common;

use common::{constant, forced};
use courtvec_core::lineup_opt::{rank_fifth_man, FifthManQuery};
use courtvec_core::outcome::{outcome_points, OUTCOME_COUNT, TURNOVER};
use courtvec_core::rng::substream;
use courtvec_core::sim::{simulate_series, Lineup, Matchup, Side};
use courtvec_core::synth::{plant_generator, LEAGUE_OUTCOME_RATES, SynthConfig};
use courtvec_core::Error;
use proptest::prelude::*;

fn lineups() -> (Lineup, Lineup) {
    (Lineup::new(&[0, 1, 2, 3, 4]).unwrap(), Lineup::new(&[5, 6, 7, 8, 9]).unwrap())
}

fn league_logits() -> [f64; OUTCOME_COUNT] {
    LEAGUE_OUTCOME_RATES.map(f64::ln)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scores_are_the_sum_of_sampled_points(seed in any::<u64>(), possessions in 1usize..150) {
        let g = plant_generator(&SynthConfig::new(20, 4, 8, seed % 1000)).unwrap();
        let (a, b) = lineups();
        let m = Matchup::new(&g.truth, a, b).unwrap();
        let mut tally = (0u32, 0u32);
        let mut rng = substream(seed, &[1]);
        let game = m
            .play_game_observed(possessions, &mut rng, |side, y| {
                let p = outcome_points(y).unwrap();
                match side {
                    Side::A => tally.0 += p,
                    Side::B => tally.1 += p,
                }
            })
            .unwrap();
        prop_assert_eq!((game.points_a, game.points_b), tally);
        prop_assert_ne!(game.points_a, game.points_b);
    }

    #[test]
    fn series_invariants(seed in any::<u64>()) {
        let g = plant_generator(&SynthConfig::new(20, 4, 8, 3)).unwrap();
        let (a, b) = lineups();
        let r = simulate_series(&g.truth, &a, &b, 40, 30, seed).unwrap();
        prop_assert_eq!(r.series_length_counts.iter().sum::<u64>(), 40);
        prop_assert!((r.team_a_series_win_fraction + r.team_b_series_win_fraction - 1.0).abs() < 1e-12);
        prop_assert!(r.mean_series_score[0] <= 4.0 && r.mean_series_score[1] <= 4.0);
        prop_assert!(r.mean_series_score[0] + r.mean_series_score[1] <= 7.0);
        prop_assert!((4.0..=7.0).contains(&r.mean_games_per_series));
    }
}

#[test]
fn identical_distributions_give_an_even_series() {
    let model = constant(10, &league_logits());
    let (a, b) = lineups();
    let r = simulate_series(&model, &a, &b, 10_000, 100, 17).unwrap();
    let se = (0.25f64 / 10_000.0).sqrt();
    assert!((r.team_a_series_win_fraction - 0.5).abs() < 3.0 * se, "{}", r.team_a_series_win_fraction);
}

#[test]
fn parallel_and_sequential_aggregation_agree() {
    let g = plant_generator(&SynthConfig::new(20, 4, 8, 3)).unwrap();
    let (a, b) = lineups();
    let m = Matchup::new(&g.truth, a, b).unwrap();
    let all = m.simulate_series(64, 50, 8).unwrap();
    let one_by_one: Vec<_> = (0..64).map(|s| m.play_series(50, 8, s).unwrap()).collect();
    assert_eq!(all, courtvec_core::sim::SeriesResult::aggregate(&one_by_one));
}

#[test]
fn all_turnovers_exhausts_overtime() {
    let (a, b) = lineups();
    let err = simulate_series(&forced(10, TURNOVER), &a, &b, 1, 100, 1).unwrap_err();
    assert!(matches!(err, Error::DegenerateModel { overtimes: 100 }));
}

#[test]
fn strong_lineup_beats_weak_lineup() {
    let mut config = SynthConfig::new(40, 8, 32, 21);
    let made_shots = [0, 2, 3, 4, 6, 7, 17, 19, 20];
    for p in 0..5 {
        config = config.with_bias(p, &made_shots, 0.5);
    }
    let g = plant_generator(&config).unwrap();
    let (a, b) = lineups();
    let r = simulate_series(&g.truth, &a, &b, 1000, 100, 4).unwrap();
    assert!(r.game_win_fraction_a > 0.6, "{}", r.game_win_fraction_a);
}

/// Player 20 becomes an unbiased twin of player 7: same embedding row minus
/// the style coordinate.
fn shooter_and_twin(seed: u64) -> courtvec_core::EmbeddingModel {
    let g = plant_generator(&SynthConfig::new(30, 8, 32, seed).with_bias(7, &[17, 19], 1.0)).unwrap();
    let mut model = g.truth;
    let mut row = model.embedding(7).to_vec();
    *row.last_mut().unwrap() -= 1.0;
    model.embedding_mut(20).copy_from_slice(&row);
    model
}

#[test]
fn three_point_shooter_beats_its_unbiased_twin() {
    for seed in 1..=3 {
        let query = FifthManQuery {
            fixed_four: vec![0, 1, 2, 3],
            opponent: vec![10, 11, 12, 13, 14],
            candidates: vec![20, 7],
            sims: 300,
            possessions: 100,
            seed,
        };
        let rows = rank_fifth_man(&shooter_and_twin(seed), &query).unwrap();
        assert_eq!(rows[0].candidate, 7, "seed {seed}: {rows:?}");
        assert!(rows[0].mean_margin > rows[1].mean_margin);
    }
}
