//! Periodic box, its discrete wave-vector modes, and the conjugate
//! position grid.
//!
//! Modes are `k = (2π/L) n` with every component of `n` in `[-N/2, N/2)`.
//! The zero mode is never included. Positions are `r = (L/N) m` with
//! `m` in `[0, N)^3`, so `Σ_r exp(i k·r)` vanishes for every nonzero
//! lattice `k` and plane waves are exactly periodic on the grid.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::RVec3;

/// Physical constants. Natural units (all ones) by default.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
    pub eps0: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            eps0: 1.0,
        }
    }
}

impl UnitSystem {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("c", self.c), ("eps0", self.eps0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Field prefactor `sqrt(hbar / (c eps0))`.
    pub fn field_constant(&self) -> f64 {
        (self.hbar / (self.c * self.eps0)).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Box edge length.
    pub box_l: f64,
    /// Modes per axis; even and at least 2.
    pub n: usize,
    #[serde(default)]
    pub exclude_z_axis: bool,
}

impl LatticeSpec {
    pub fn new(box_l: f64, n: usize) -> Self {
        Self {
            box_l,
            n,
            exclude_z_axis: false,
        }
    }

    pub fn excluding_z_axis(mut self) -> Self {
        self.exclude_z_axis = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::Config(format!("N must be even and >= 2, got {}", self.n)));
        }
        if !(self.box_l.is_finite() && self.box_l > 0.0) {
            return Err(Error::Config(format!("L must be finite and > 0, got {}", self.box_l)));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.box_l.powi(3)
    }

    /// Spacing of the wave-vector lattice, `2π/L`.
    pub fn dk(&self) -> f64 {
        TAU / self.box_l
    }

    /// Spacing of the position grid, `L/N`.
    pub fn dr(&self) -> f64 {
        self.box_l / self.n as f64
    }

    pub fn point_count(&self) -> usize {
        self.n.pow(3)
    }

    /// Quadrature weight `V/N³` of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.point_count() as f64
    }

    pub fn contains(&self, n: [i32; 3]) -> bool {
        let half = (self.n / 2) as i32;
        let in_range = n.iter().all(|&c| (-half..half).contains(&c));
        let zero = n == [0, 0, 0];
        let z_axis = self.exclude_z_axis && n[0] == 0 && n[1] == 0;
        in_range && !zero && !z_axis
    }

    pub fn mode(&self, n: [i32; 3]) -> Result<KMode> {
        if !self.contains(n) {
            return Err(Error::ModeNotOnLattice {
                n,
                lattice_n: self.n,
                context: "outside [-N/2, N/2)^3 or excluded".into(),
            });
        }
        Ok(KMode::new(n, self.dk()))
    }
}

/// One lattice wave vector together with its spherical angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KMode {
    pub n: [i32; 3],
    pub k_vec: RVec3,
    pub k: f64,
    pub theta: f64,
    pub phi: f64,
}

impl KMode {
    pub fn new(n: [i32; 3], dk: f64) -> Self {
        let k_vec = RVec3::new(n[0] as f64, n[1] as f64, n[2] as f64) * dk;
        let (k, theta, phi) = spherical_angles(&k_vec);
        Self {
            n,
            k_vec,
            k,
            theta,
            phi,
        }
    }

    pub fn k_hat(&self) -> RVec3 {
        self.k_vec / self.k
    }

    /// True when `k` lies on the z-axis, where `φ` is set to 0 by convention.
    pub fn on_pole(&self) -> bool {
        self.n[0] == 0 && self.n[1] == 0
    }

    /// Rebuilds `k_vec` from `(k, θ, φ)`.
    pub fn from_angles(&self) -> RVec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        RVec3::new(st * cp, st * sp, ct) * self.k
    }
}

/// `(|k|, θ, φ)` with `θ ∈ [0, π]`, `φ ∈ [0, 2π)`, and `φ = 0` on the z-axis.
pub fn spherical_angles(k: &RVec3) -> (f64, f64, f64) {
    let rho = k[0].hypot(k[1]);
    let kk = rho.hypot(k[2]);
    let theta = rho.atan2(k[2]);
    let phi = if rho == 0.0 {
        0.0
    } else {
        let p = k[1].atan2(k[0]);
        if p < 0.0 {
            p + 2.0 * PI
        } else {
            p
        }
    };
    (kk, theta, phi)
}

/// All modes of the lattice in lexicographic order of `n`.
pub fn build_k_lattice(spec: &LatticeSpec) -> Result<Vec<KMode>> {
    spec.validate()?;
    let half = (spec.n / 2) as i32;
    let dk = spec.dk();
    let mut modes = Vec::with_capacity(spec.point_count() - 1);
    for nx in -half..half {
        for ny in -half..half {
            for nz in -half..half {
                let n = [nx, ny, nz];
                if spec.contains(n) {
                    modes.push(KMode::new(n, dk));
                }
            }
        }
    }
    Ok(modes)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RPoint {
    pub m: [usize; 3],
    pub r: RVec3,
}

#[derive(Clone, Debug)]
pub struct RGrid {
    pub points: Vec<RPoint>,
    pub cell_volume: f64,
}

impl RGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The `N³` position points conjugate to the mode lattice.
pub fn conjugate_r_grid(spec: &LatticeSpec) -> Result<RGrid> {
    spec.validate()?;
    let dr = spec.dr();
    let mut points = Vec::with_capacity(spec.point_count());
    for mx in 0..spec.n {
        for my in 0..spec.n {
            for mz in 0..spec.n {
                let m = [mx, my, mz];
                let r = RVec3::new(mx as f64, my as f64, mz as f64) * dr;
                points.push(RPoint { m, r });
            }
        }
    }
    Ok(RGrid {
        points,
        cell_volume: spec.cell_volume(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::pairwise_sum;
    use num_complex::Complex64;

    #[test]
    fn mode_counts() {
        let spec = LatticeSpec::new(1.0, 2);
        assert_eq!(build_k_lattice(&spec).unwrap().len(), 7);
        let modes = build_k_lattice(&spec.excluding_z_axis()).unwrap();
        assert_eq!(modes.len(), 6);
        assert!(modes.iter().all(|m| m.n != [0, 0, -1]));

        for n in [2usize, 4, 6, 8] {
            let spec = LatticeSpec::new(3.0, n);
            assert_eq!(build_k_lattice(&spec).unwrap().len(), n.pow(3) - 1);
            let ex = build_k_lattice(&spec.excluding_z_axis()).unwrap();
            assert_eq!(ex.len(), n.pow(3) - n);
        }
    }

    #[test]
    fn unit_mode_on_x_axis() {
        let spec = LatticeSpec::new(TAU, 4);
        let m = spec.mode([1, 0, 0]).unwrap();
        assert!((m.k_vec - RVec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((m.k - 1.0).abs() < 1e-15);
        assert!((m.theta - PI / 2.0).abs() < 1e-15);
        assert_eq!(m.phi, 0.0);
    }

    #[test]
    fn ordering_is_lexicographic() {
        let modes = build_k_lattice(&LatticeSpec::new(1.0, 4)).unwrap();
        assert!(modes.windows(2).all(|w| w[0].n < w[1].n));
    }

    #[test]
    fn angles_round_trip() {
        for spec in [LatticeSpec::new(1.0, 4), LatticeSpec::new(7.5, 8)] {
            for m in build_k_lattice(&spec).unwrap() {
                let err = (m.from_angles() - m.k_vec).norm() / m.k;
                assert!(err < 1e-14, "{:?}: {err}", m.n);
                assert!((0.0..=PI).contains(&m.theta));
                assert!((0.0..TAU).contains(&m.phi));
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(build_k_lattice(&LatticeSpec::new(1.0, 3)).is_err());
        assert!(build_k_lattice(&LatticeSpec::new(1.0, 0)).is_err());
        assert!(build_k_lattice(&LatticeSpec::new(0.0, 4)).is_err());
        assert!(build_k_lattice(&LatticeSpec::new(f64::NAN, 4)).is_err());
        assert!(LatticeSpec::new(1.0, 4).mode([2, 0, 0]).is_err());
        assert!(LatticeSpec::new(1.0, 4).mode([0, 0, 0]).is_err());
    }

    #[test]
    fn r_grid_spacing() {
        let grid = conjugate_r_grid(&LatticeSpec::new(2.0, 2)).unwrap();
        assert_eq!(grid.len(), 8);
        assert_eq!(grid.cell_volume, 1.0);
        assert_eq!(grid.points[7].r, RVec3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn discrete_orthogonality() {
        // Direct summation over the grid for every lattice mode.
        for spec in [LatticeSpec::new(2.0, 2), LatticeSpec::new(1.3, 4), LatticeSpec::new(5.0, 6)] {
            let grid = conjugate_r_grid(&spec).unwrap();
            let total: f64 = grid.points.iter().map(|_| grid.cell_volume).sum();
            assert!((total - spec.volume()).abs() < 1e-12 * spec.volume());
            let modes = build_k_lattice(&spec).unwrap();
            let n3 = spec.point_count() as f64;
            for a in &modes {
                let terms: Vec<Complex64> = grid
                    .points
                    .iter()
                    .map(|p| Complex64::from_polar(1.0, a.k_vec.dot(&p.r)))
                    .collect();
                assert!(pairwise_sum(&terms).norm() < 1e-12 * n3);
            }
            // Differences of two modes also vanish.
            for (a, b) in modes.iter().zip(modes.iter().skip(3)) {
                let s: Complex64 = grid
                    .points
                    .iter()
                    .map(|p| Complex64::from_polar(1.0, (a.k_vec - b.k_vec).dot(&p.r)))
                    .sum();
                assert!(s.norm() < 1e-12 * n3);
            }
        }
    }

    #[test]
    fn units_default_natural() {
        let u = UnitSystem::default();
        assert_eq!(u.field_constant(), 1.0);
        assert!(UnitSystem { hbar: -1.0, ..u }.validate().is_err());
    }
}
