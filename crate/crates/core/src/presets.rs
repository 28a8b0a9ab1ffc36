//! Bundled parameter sets and their reference initial states.
//!
//! All presets use `lambda = 1`, `r = 1000` (raw arrival rate 1000).

use crate::model::{CtmcState, ModelParams};

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub json: &'static str,
    pub inits: &'static [CtmcState],
}

impl Preset {
    pub fn params(&self) -> ModelParams {
        ModelParams::from_json(self.json).expect("bundled preset parses")
    }
}

const fn s(x: i64, y: i64, z: i64) -> CtmcState {
    CtmcState::new(x, y, z)
}

pub const PRESETS: &[Preset] = &[
    Preset { name: "ex1", json: include_str!("../presets/ex1.json"), inits: &[s(0, 0, 0), s(0, -1000, 0)] },
    Preset { name: "ex2", json: include_str!("../presets/ex2.json"), inits: &[s(2000, 0, 1000), s(0, 2000, 0)] },
    Preset { name: "ex3a", json: include_str!("../presets/ex3a.json"), inits: &[s(0, 1000, 500)] },
    Preset { name: "ex3b", json: include_str!("../presets/ex3b.json"), inits: &[s(0, 1000, 500)] },
    Preset { name: "ex3c", json: include_str!("../presets/ex3c.json"), inits: &[s(0, 1000, 500)] },
    Preset { name: "ex3d", json: include_str!("../presets/ex3d.json"), inits: &[s(0, 1000, 500)] },
    Preset { name: "ex4", json: include_str!("../presets/ex4.json"), inits: &[s(0, 1000, 500), s(0, -1000, 0)] },
    Preset { name: "ex5a", json: include_str!("../presets/ex5a.json"), inits: &[s(500, 1000, 500)] },
    Preset { name: "ex5b", json: include_str!("../presets/ex5b.json"), inits: &[s(500, 1000, 500)] },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
