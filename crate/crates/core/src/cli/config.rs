use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, UnitSystem};

/// Finite-difference steps in lattice units: `h` in `2π/L`, `dr` in `L/N`,
/// `dt` in `L/(Nc)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Steps {
    pub h: f64,
    /// Coarsest step of refinement studies (commutator, similarity, converge).
    pub h_study: f64,
    pub dr: f64,
    pub dt: f64,
}

impl Default for Steps {
    fn default() -> Self {
        Steps {
            h: 1e-3,
            h_study: 1e-2,
            dr: 0.1,
            dt: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub polarization: f64,
    pub eigen: f64,
    /// Allowed `|p − 2|` for observed convergence orders.
    pub order: f64,
    /// Pryce floor must exceed the full-operator floor by this factor.
    pub pryce_ratio: f64,
    /// Largest accepted `C` in `residual ≤ C h²` (h in units of `2π/L`).
    pub adjoint_c: f64,
    pub similarity_c: f64,
    pub biorthonormality: f64,
    pub completeness: f64,
    pub parseval: f64,
    pub density_floor: f64,
    pub transversality: f64,
    pub two_photon: f64,
    pub factorization: f64,
    pub fock_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            polarization: 1e-14,
            eigen: 1e-5,
            order: 0.3,
            pryce_ratio: 10.0,
            adjoint_c: 1.0,
            similarity_c: 10.0,
            biorthonormality: 1e-12,
            completeness: 1e-12,
            parseval: 1e-12,
            density_floor: 1e-15,
            transversality: 1e-14,
            two_photon: 1e-13,
            factorization: 1e-12,
            fock_norm: 1e-14,
        }
    }
}

impl Tolerances {
    /// Every tolerance set to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            polarization: tol,
            eigen: tol,
            order: tol,
            pryce_ratio: tol,
            adjoint_c: tol,
            similarity_c: tol,
            biorthonormality: tol,
            completeness: tol,
            parseval: tol,
            density_floor: tol,
            transversality: tol,
            two_photon: tol,
            factorization: tol,
            fock_norm: tol,
        }
    }

    fn values(&self) -> [(&'static str, f64); 14] {
        [
            ("polarization", self.polarization),
            ("eigen", self.eigen),
            ("order", self.order),
            ("pryce_ratio", self.pryce_ratio),
            ("adjoint_c", self.adjoint_c),
            ("similarity_c", self.similarity_c),
            ("biorthonormality", self.biorthonormality),
            ("completeness", self.completeness),
            ("parseval", self.parseval),
            ("density_floor", self.density_floor),
            ("transversality", self.transversality),
            ("two_photon", self.two_photon),
            ("factorization", self.factorization),
            ("fock_norm", self.fock_norm),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub units: UnitSystem,
    pub lattice: LatticeSpec,
    pub gauge_m: i32,
    /// Exponents exercised by sweeps; each must be −1/2, 0 or 1/2.
    pub alphas: Vec<f64>,
    pub steps: Steps,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Run the Pryce operator as an expected-fail control in the operator suite.
    pub pryce_control: bool,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            units: UnitSystem::default(),
            lattice: LatticeSpec::new(std::f64::consts::TAU, 4),
            gauge_m: 0,
            alphas: vec![-0.5, 0.0, 0.5],
            steps: Steps::default(),
            tolerances: Tolerances::default(),
            seed: 1,
            pryce_control: true,
            output: Output::default(),
        }
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if [-0.5, 0.0, 0.5].contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha must be one of -0.5, 0, 0.5, got {alpha}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.units.validate()?;
        self.lattice.validate()?;
        if self.alphas.is_empty() {
            return Err(Error::Config("alphas must not be empty".into()));
        }
        for a in &self.alphas {
            check_alpha(*a)?;
        }
        let s = self.steps;
        for (name, v) in [("h", s.h), ("h_study", s.h_study), ("dr", s.dr), ("dt", s.dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("steps.{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in self.tolerances.values() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerances.{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.steps.h * self.lattice.dk()
    }

    pub fn dr(&self) -> f64 {
        self.steps.dr * self.lattice.dr()
    }

    pub fn dt(&self) -> f64 {
        self.steps.dt * self.lattice.dr() / self.units.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("seed = 9\n[lattice]\nbox_l = 3.0\nn = 6\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.lattice.n, 6);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml("alphas = [0.25]").is_err());
        assert!(RunConfig::from_toml("[tolerances]\neigen = 0.0").is_err());
        assert!(RunConfig::from_toml("[steps]\nh = -1.0").is_err());
        assert!(RunConfig::from_toml("colour = 1").is_err());
        assert!(RunConfig::from_toml("[lattice]\nbox_l = 1.0\nn = 3").is_err());
    }
}
