//! The black-box objective: S21 for one-hot designs, a linear penalty in the
//! violation count otherwise. Smaller is better.

use serde::{Deserialize, Serialize};

use crate::circuit::{evaluate_s21, CircuitParams, MaterialParams};
use crate::encoding::{one_hot_violation, Board, DecodeOutcome, DesignVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyParams {
    pub y_base: f64,
    pub lambda: f64,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            y_base: -60.0,
            lambda: 10.0,
        }
    }
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.y_base.is_finite()) {
            return Err(Error::InvalidConfig("penalty lambda must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    S21,
    Penalty,
}

/// One evaluated design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub seq: usize,
    pub x: DesignVector,
    pub y: f64,
    pub branch: Branch,
    pub z: u32,
}

impl Observation {
    pub fn is_feasible(&self) -> bool {
        self.branch == Branch::S21
    }
}

pub fn penalty(z: u32, p: &PenaltyParams) -> f64 {
    p.y_base + p.lambda * z as f64
}

/// Anything the optimizer can query.
pub trait BlackBox: Sync {
    /// Evaluates `x`; `seq` is assigned by the caller.
    fn evaluate(&self, x: &DesignVector, seq: usize) -> Result<Observation>;
}

/// Filter-design objective: board geometry plus the physical model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterObjective {
    pub board: Board,
    pub material: MaterialParams,
    pub circuit: CircuitParams,
    pub penalty: PenaltyParams,
}

impl FilterObjective {
    pub fn validate(&self) -> Result<()> {
        self.board.validate()?;
        self.material.validate()?;
        self.circuit.validate()?;
        self.penalty.validate()
    }

    /// S21 in dB for a one-hot design, `None` when the element bits violate one-hot.
    pub fn s21_db(&self, x: &DesignVector) -> Result<Option<f64>> {
        match self.board.decode(x) {
            DecodeOutcome::OneHotViolation(_) => Ok(None),
            DecodeOutcome::Feasible(g) => {
                evaluate_s21(&g, &self.board.grid, &self.material, &self.circuit).map(Some)
            }
        }
    }
}

impl BlackBox for FilterObjective {
    fn evaluate(&self, x: &DesignVector, seq: usize) -> Result<Observation> {
        let z = one_hot_violation(x);
        if z != 0 {
            return Ok(Observation {
                seq,
                x: *x,
                y: penalty(z, &self.penalty),
                branch: Branch::Penalty,
                z,
            });
        }
        let y = self
            .s21_db(x)?
            .expect("one-hot design always decodes to geometry");
        Ok(Observation {
            seq,
            x: *x,
            y,
            branch: Branch::S21,
            z,
        })
    }
}
