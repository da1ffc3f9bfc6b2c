//! Browser bindings over a planted synthetic model. Everything runs
//! client-side and single-threaded; results match the native library for the
//! same seeds.

use courtvec_core::lineup_opt::{rank_fifth_man, FifthManQuery};
use courtvec_core::outcome::{outcome_points, OUTCOME_COUNT, OUTCOME_LABELS};
use courtvec_core::sim::{simulate_series, Lineup};
use courtvec_core::synth::{plant_generator, LineupSampling, SynthConfig, PlantedGenerator};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Made three-pointer classes boosted for the "shooter" player.
pub const SHOOTER_CLASSES: [usize; 2] = [17, 19];

#[derive(Serialize)]
struct Outcome {
    class: usize,
    label: &'static str,
    points: u32,
    probability: f64,
}

#[derive(Serialize)]
struct PlayerRow<'a> {
    id: u32,
    name: &'a str,
    position: String,
}

#[wasm_bindgen]
pub struct Demo {
    generator: PlantedGenerator,
    shooter: Option<u32>,
}

fn json(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("serializable")
}

impl Demo {
    pub fn build(players: usize, seed: u64, shooter: Option<u32>, bias: f64) -> Result<Demo, String> {
        let mut config = SynthConfig::new(players, 8, 32, seed).with_sampling(LineupSampling::zipf());
        if let Some(p) = shooter {
            config = config.with_bias(p, &SHOOTER_CLASSES, bias);
        }
        let generator = plant_generator(&config).map_err(|e| e.to_string())?;
        Ok(Demo { generator, shooter })
    }

    pub fn players_json(&self) -> String {
        let rows: Vec<PlayerRow> = self
            .generator
            .roster
            .players()
            .iter()
            .map(|p| PlayerRow { id: p.id, name: &p.name, position: p.position.to_string() })
            .collect();
        json(&rows)
    }

    pub fn predict_json(&self, offense: &[u32], defense: &[u32]) -> Result<String, String> {
        let q = self.generator.truth.forward(offense, defense).map_err(|e| e.to_string())?;
        let rows: Vec<Outcome> = (0..OUTCOME_COUNT)
            .map(|k| Outcome {
                class: k,
                label: OUTCOME_LABELS[k],
                points: outcome_points(k).unwrap(),
                probability: q[k],
            })
            .collect();
        Ok(json(&rows))
    }

    pub fn simulate_json(&self, a: &[u32], b: &[u32], sims: usize, seed: u64) -> Result<String, String> {
        let a = Lineup::new(a).map_err(|e| e.to_string())?;
        let b = Lineup::new(b).map_err(|e| e.to_string())?;
        simulate_series(&self.generator.truth, &a, &b, sims, 100, seed)
            .map(|r| json(&r))
            .map_err(|e| e.to_string())
    }

    pub fn rank_fifth_json(
        &self,
        fixed_four: &[u32],
        opponent: &[u32],
        candidates: &[u32],
        sims: usize,
        seed: u64,
    ) -> Result<String, String> {
        let query = FifthManQuery {
            fixed_four: fixed_four.to_vec(),
            opponent: opponent.to_vec(),
            candidates: candidates.to_vec(),
            sims,
            possessions: 100,
            seed,
        };
        rank_fifth_man(&self.generator.truth, &query).map(|r| json(&r)).map_err(|e| e.to_string())
    }
}

#[wasm_bindgen]
impl Demo {
    /// A planted model over `players` synthetic players; `shooter` (or a
    /// negative number for none) gets `bias` added to made-three logits.
    #[wasm_bindgen(constructor)]
    pub fn new(players: usize, seed: u32, shooter: i32, bias: f64) -> Result<Demo, JsError> {
        let shooter = u32::try_from(shooter).ok();
        Demo::build(players, seed.into(), shooter, bias).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(getter)]
    pub fn shooter(&self) -> Option<u32> {
        self.shooter
    }

    pub fn players(&self) -> String {
        self.players_json()
    }

    pub fn predict(&self, offense: &[u32], defense: &[u32]) -> Result<String, JsError> {
        self.predict_json(offense, defense).map_err(|e| JsError::new(&e))
    }

    pub fn simulate(&self, a: &[u32], b: &[u32], sims: usize, seed: u32) -> Result<String, JsError> {
        self.simulate_json(a, b, sims, seed.into()).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = rankFifth)]
    pub fn rank_fifth(
        &self,
        fixed_four: &[u32],
        opponent: &[u32],
        candidates: &[u32],
        sims: usize,
        seed: u32,
    ) -> Result<String, JsError> {
        self.rank_fifth_json(fixed_four, opponent, candidates, sims, seed.into())
            .map_err(|e| JsError::new(&e))
    }
}
