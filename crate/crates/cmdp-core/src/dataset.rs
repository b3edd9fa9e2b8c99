use crate::CoreError;
use serde::{Deserialize, Serialize};

/// Which of the four benchmark processes (or the tabular test process)
/// generated a dataset. The scenario fixes the optional-field shape of
/// every transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    EmotionalPendulum,
    WindyPendulum,
    EmotionalPendulumStar,
    WindyPendulumStar,
    Tabular,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::EmotionalPendulum => "EmotionalPendulum",
            Scenario::WindyPendulum => "WindyPendulum",
            Scenario::EmotionalPendulumStar => "EmotionalPendulumStar",
            Scenario::WindyPendulumStar => "WindyPendulumStar",
            Scenario::Tabular => "Tabular",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "EmotionalPendulum" => Scenario::EmotionalPendulum,
            "WindyPendulum" => Scenario::WindyPendulum,
            "EmotionalPendulumStar" => Scenario::EmotionalPendulumStar,
            "WindyPendulumStar" => Scenario::WindyPendulumStar,
            "Tabular" => Scenario::Tabular,
            _ => return None,
        })
    }

    /// Star scenarios record the confounder subset u instead of the
    /// executed action m.
    pub fn is_star(&self) -> bool {
        matches!(
            self,
            Scenario::EmotionalPendulumStar | Scenario::WindyPendulumStar
        )
    }

    pub fn is_windy(&self) -> bool {
        matches!(self, Scenario::WindyPendulum | Scenario::WindyPendulumStar)
    }
}

/// Observed state: jittered sensor coordinates of the pendulum tip plus
/// the angular velocity. Tabular instances store the state code in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVec {
    pub x: f64,
    pub y: f64,
    pub v: f64,
}

impl StateVec {
    pub fn new(x: f64, y: f64, v: f64) -> Self {
        StateVec { x, y, v }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.v]
    }
}

/// One offline sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: StateVec,
    /// Intended action index.
    pub a: usize,
    /// Executed action index; present in non-Star scenarios.
    pub m: Option<usize>,
    /// Observed confounder-subset code; present in Star scenarios.
    pub u: Option<i64>,
    pub s_next: StateVec,
    pub r: f64,
    pub done: bool,
}

/// An ordered collection of transitions plus generation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineDataset {
    pub transitions: Vec<Transition>,
    pub scenario: Scenario,
    pub generator_config_digest: String,
    pub seed: u64,
}

impl OfflineDataset {
    pub fn new(
        transitions: Vec<Transition>,
        scenario: Scenario,
        generator_config_digest: String,
        seed: u64,
    ) -> Result<Self, CoreError> {
        let d = OfflineDataset {
            transitions,
            scenario,
            generator_config_digest,
            seed,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Checks the dataset invariants: nonempty, finite rewards, and a
    /// field shape consistent with the scenario tag.
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.transitions.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        for (row, t) in self.transitions.iter().enumerate() {
            if !t.r.is_finite() {
                return Err(CoreError::NonFiniteReward(row));
            }
            match self.scenario {
                Scenario::Tabular => {
                    // tabular instances may carry either field, but the
                    // shape must be uniform across rows
                    let first = &self.transitions[0];
                    if t.m.is_some() != first.m.is_some() || t.u.is_some() != first.u.is_some() {
                        return Err(CoreError::ShapeMismatch {
                            scenario: self.scenario,
                            expect: "a uniform optional-field shape",
                            row,
                        });
                    }
                }
                s if s.is_star() => {
                    if t.u.is_none() || t.m.is_some() {
                        return Err(CoreError::ShapeMismatch {
                            scenario: self.scenario,
                            expect: "u present and m absent",
                            row,
                        });
                    }
                }
                _ => {
                    if t.m.is_none() || t.u.is_some() {
                        return Err(CoreError::ShapeMismatch {
                            scenario: self.scenario,
                            expect: "m present and u absent",
                            row,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}
