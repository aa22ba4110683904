//! Benchmark objectives. Both are minimization problems; the optimizers
//! maximize the reward `-f(theta)`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PgpeError, Result};

/// Amplitude of the cosine term in the Rastrigin function.
pub const RASTRIGIN_AMPLITUDE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// `sum theta_i^2`
    Sphere,
    /// `10 d + sum (theta_i^2 - 10 cos(2 pi theta_i))`
    Rastrigin,
}

impl Objective {
    pub fn value(self, theta: &[f64]) -> f64 {
        match self {
            Objective::Sphere => sphere(theta),
            Objective::Rastrigin => rastrigin(theta),
        }
    }

    pub fn reward(self, theta: &[f64]) -> f64 {
        -self.value(theta)
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Sphere => "sphere",
            Objective::Rastrigin => "rastrigin",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = PgpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Objective::Sphere),
            "rastrigin" => Ok(Objective::Rastrigin),
            other => Err(PgpeError::Config {
                key: "objective".into(),
                message: format!("unknown objective `{other}` (expected sphere or rastrigin)"),
            }),
        }
    }
}

pub fn sphere(theta: &[f64]) -> f64 {
    theta.iter().map(|x| x * x).sum()
}

pub fn rastrigin(theta: &[f64]) -> f64 {
    RASTRIGIN_AMPLITUDE * theta.len() as f64
        + theta
            .iter()
            .map(|&x| x * x - RASTRIGIN_AMPLITUDE * (2.0 * PI * x).cos())
            .sum::<f64>()
}

/// An objective of fixed dimension that counts its evaluations.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    objective: Objective,
    dim: usize,
    evaluations: u64,
}

impl ObjectiveSpec {
    pub fn new(objective: Objective, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(PgpeError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self {
            objective,
            dim,
            evaluations: 0,
        })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of point evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Evaluates `-f(theta)` and bumps the counter.
    pub fn reward(&mut self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.dim);
        self.evaluations += 1;
        self.objective.reward(theta)
    }
}

/// One node of a 2-D surface grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub f: f64,
}

/// Row-major grid of objective values over `[-range, range]^2`.
///
/// Rows run along `y`, columns along `x`.
pub fn emit_surface_grid(spec: &ObjectiveSpec, range: f64, resolution: usize) -> Result<Vec<SurfacePoint>> {
    if spec.dim() != 2 {
        return Err(PgpeError::Unsupported(format!(
            "surface grids need a 2-dimensional objective, got dimension {}",
            spec.dim()
        )));
    }
    if resolution < 2 {
        return Err(PgpeError::Config {
            key: "resolution".into(),
            message: format!("must be at least 2, got {resolution}"),
        });
    }
    if !(range.is_finite() && range >= 0.0) {
        return Err(PgpeError::Config {
            key: "range".into(),
            message: format!("must be finite and non-negative, got {range}"),
        });
    }
    let step = 2.0 * range / (resolution - 1) as f64;
    let coord = |k: usize| -range + step * k as f64;
    let mut points = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        let y = coord(row);
        for col in 0..resolution {
            let x = coord(col);
            points.push(SurfacePoint {
                x,
                y,
                f: spec.objective().value(&[x, y]),
            });
        }
    }
    Ok(points)
}

/// Writes a surface grid as CSV with header `x,y,f`.
pub fn write_surface_csv<W: Write>(mut out: W, points: &[SurfacePoint]) -> io::Result<()> {
    writeln!(out, "x,y,f")?;
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            crate::format::sig17(p.x),
            crate::format::sig17(p.y),
            crate::format::sig17(p.f)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_values() {
        assert_eq!(sphere(&[0.0; 7]), 0.0);
        assert_eq!(sphere(&[3.0, 4.0]), 25.0);
        assert_eq!(sphere(&[1.0; 100]), 100.0);
    }

    #[test]
    fn rastrigin_values() {
        assert_eq!(rastrigin(&[0.0; 5]), 0.0);
        assert!((rastrigin(&[1.0; 10]) - 10.0).abs() < 1e-12);
        // 20 + (0.25 - 10 cos(pi)) + (0 - 10 cos 0) = 20 + 10.25 - 10
        assert!((rastrigin(&[0.5, 0.0]) - 20.25).abs() < 1e-12);
    }

    #[test]
    fn reward_is_negated_and_counted() {
        let mut spec = ObjectiveSpec::new(Objective::Sphere, 2).unwrap();
        assert_eq!(spec.reward(&[3.0, 4.0]), -25.0);
        assert_eq!(spec.reward(&[0.0, 0.0]), 0.0);
        assert_eq!(spec.evaluations(), 2);
    }

    #[test]
    fn surface_corners() {
        let sphere = ObjectiveSpec::new(Objective::Sphere, 2).unwrap();
        let grid = emit_surface_grid(&sphere, 1.0, 3).unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0], SurfacePoint { x: -1.0, y: -1.0, f: 2.0 });
        assert_eq!(grid[8].f, 2.0);
        assert_eq!(grid[4].f, 0.0);
        // row-major: second entry advances x
        assert_eq!((grid[1].x, grid[1].y), (0.0, -1.0));

        let rast = ObjectiveSpec::new(Objective::Rastrigin, 2).unwrap();
        let grid = emit_surface_grid(&rast, 1.0, 3).unwrap();
        assert!((grid[8].f - 2.0).abs() < 1e-12);
        let flat = emit_surface_grid(&rast, 0.0, 4).unwrap();
        assert!(flat.iter().all(|p| p.f == 0.0));
    }

    #[test]
    fn surface_rejects_bad_input() {
        let spec = ObjectiveSpec::new(Objective::Sphere, 3).unwrap();
        assert!(matches!(emit_surface_grid(&spec, 1.0, 3), Err(PgpeError::Unsupported(_))));
        let spec = ObjectiveSpec::new(Objective::Sphere, 2).unwrap();
        assert!(emit_surface_grid(&spec, 1.0, 1).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("sphere".parse::<Objective>().unwrap(), Objective::Sphere);
        assert!("Rastrigin".parse::<Objective>().is_err());
    }
}
