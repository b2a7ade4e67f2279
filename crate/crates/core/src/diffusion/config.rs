use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::MAX_DEGREE;
use crate::operators::DEFAULT_ALPHA_CAP;
use crate::solver::DEFAULT_TOLERANCE;

/// One level of the schedule: expansion degree and iteration budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub n_max: usize,
    pub i_max: usize,
}

impl Stage {
    pub fn new(n_max: usize, i_max: usize) -> Self {
        Self { n_max, i_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionConfig {
    pub stages: Vec<Stage>,
    /// Anisotropy strength; 0 selects isotropic diffusion.
    pub gamma: f64,
    /// Constant `c` in `Δt = c·h̄²`.
    pub dt_scale: f64,
    /// A stage stops once the standard deviation of the area density has
    /// dropped by less than this fraction of its stage-initial value over
    /// the last five iterations.
    pub std_tolerance: f64,
    /// Shift of the open rim into the domain, radians.
    pub eps_eta: f64,
    pub alpha_cap: f64,
    pub max_halvings: usize,
    pub solver_tolerance: f64,
}

/// Calibrated on the bumpy-spheroid benchmarks: the implicit step damps
/// every mode, so steps far above the explicit limit stay flip-free.
pub const DEFAULT_DT_SCALE: f64 = 40.0;

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            stages: vec![Stage::new(30, 50)],
            gamma: 0.0,
            dt_scale: DEFAULT_DT_SCALE,
            std_tolerance: 1e-6,
            eps_eta: 1e-3,
            alpha_cap: DEFAULT_ALPHA_CAP,
            max_halvings: 20,
            solver_tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl DiffusionConfig {
    pub fn with_stages(stages: Vec<Stage>) -> Self {
        Self {
            stages,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.stages.is_empty() {
            return bad("at least one stage is required".into());
        }
        for (k, s) in self.stages.iter().enumerate() {
            if s.i_max == 0 {
                return bad(format!("stage {k} has zero iterations"));
            }
            if s.n_max > MAX_DEGREE {
                return Err(Error::Guard {
                    what: "expansion degree",
                    value: s.n_max,
                    limit: MAX_DEGREE,
                });
            }
        }
        if self.stages.windows(2).any(|w| w[1].n_max <= w[0].n_max) {
            return bad("stage degrees must be strictly increasing".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be finite and non-negative, got {}", self.gamma));
        }
        if !(self.dt_scale > 0.0 && self.dt_scale.is_finite()) {
            return bad(format!("dt_scale must be positive, got {}", self.dt_scale));
        }
        if !(self.eps_eta > 0.0 && self.eps_eta < 0.5) {
            return bad(format!("eps_eta must lie in (0, 0.5), got {}", self.eps_eta));
        }
        if !(self.alpha_cap >= 1.0) {
            return bad(format!("alpha_cap must be at least 1, got {}", self.alpha_cap));
        }
        if !(self.std_tolerance >= 0.0) || !(self.solver_tolerance > 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }

    pub fn is_anisotropic(&self) -> bool {
        self.gamma > 0.0
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub stage: usize,
    pub n_max: usize,
    pub dt: f64,
    pub std_u: f64,
    pub mean_u: f64,
    /// Flipped faces seen in rejected attempts of this iteration.
    pub flip_count: usize,
    pub halvings: usize,
    /// Reconstructed rim length (open surfaces).
    pub boundary_length: Option<f64>,
    /// Cumulative basis terms evaluated so far.
    pub basis_evaluations: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiffusionTrace {
    pub initial_std_u: f64,
    pub initial_mean_u: f64,
    pub initial_boundary_length: Option<f64>,
    pub records: Vec<IterationRecord>,
    /// Index of the first record of each stage.
    pub stage_starts: Vec<usize>,
    pub basis_evaluations: u64,
}

impl DiffusionTrace {
    pub fn final_std_u(&self) -> f64 {
        self.records.last().map_or(self.initial_std_u, |r| r.std_u)
    }

    pub fn final_mean_u(&self) -> f64 {
        self.records.last().map_or(self.initial_mean_u, |r| r.mean_u)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r).map_err(Error::csv)?;
        }
        out.flush().map_err(|e| Error::io("<trace>", e))
    }
}
