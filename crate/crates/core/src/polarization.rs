//! Spin-1 generators, the frame rotation `D(θ, φ, χ)`, and transverse
//! helicity polarization vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{spherical_angles, KMode};
use crate::numeric::{c, complexify, cross_rc, CMat3, CVec3, RVec3, I};

/// Photon helicity `λ = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Helicity {
    Minus,
    Plus,
}

impl Helicity {
    pub const BOTH: [Helicity; 2] = [Helicity::Plus, Helicity::Minus];

    pub fn value(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Helicity::Plus => 1,
            Helicity::Minus => -1,
        }
    }

    pub fn from_i64(v: i64) -> Option<Self> {
        match v {
            1 => Some(Helicity::Plus),
            -1 => Some(Helicity::Minus),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Helicity::Plus => Helicity::Minus,
            Helicity::Minus => Helicity::Plus,
        }
    }
}

impl fmt::Display for Helicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

impl Serialize for Helicity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Helicity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Helicity::from_i64(v)
            .ok_or_else(|| serde::de::Error::custom(format!("helicity must be +1 or -1, got {v}")))
    }
}

/// The three spin-1 matrices `(S_j)_{ab} = -i ε_{jab}`.
#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub s: [CMat3; 3],
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

impl SpinMatrices {
    pub fn new() -> Self {
        let s = std::array::from_fn(|j| {
            CMat3::from_fn(|a, b| c(0.0, -levi_civita(j, a, b)))
        });
        Self { s }
    }

    /// `S·n` for a real vector `n`.
    pub fn dot(&self, n: &RVec3) -> CMat3 {
        self.s[0] * c(n[0], 0.0) + self.s[1] * c(n[1], 0.0) + self.s[2] * c(n[2], 0.0)
    }

    /// `S² = S1² + S2² + S3²`.
    pub fn casimir(&self) -> CMat3 {
        self.s.iter().map(|m| m * m).sum()
    }
}

impl Default for SpinMatrices {
    fn default() -> Self {
        Self::new()
    }
}

/// `exp(-i β S·n)` for a unit axis `n`, in closed form.
pub fn spin1_exp(axis: &RVec3, beta: f64) -> CMat3 {
    let sn = SpinMatrices::new().dot(axis);
    let (sb, cb) = beta.sin_cos();
    CMat3::identity() - sn * c(0.0, sb) - sn * sn * c(1.0 - cb, 0.0)
}

/// `D = exp(-i S·k̂ χ) exp(-i S3 φ) exp(-i S2 θ)`.
pub fn rotation_d(theta: f64, phi: f64, chi: f64) -> CMat3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let k_hat = RVec3::new(st * cp, st * sp, ct);
    spin1_exp(&k_hat, chi) * spin1_exp(&RVec3::z(), phi) * spin1_exp(&RVec3::y(), theta)
}

/// Frame rotation angle about `k` of the form `χ = m φ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiGauge {
    pub m: i32,
}

impl ChiGauge {
    pub fn new(m: i32) -> Self {
        Self { m }
    }

    pub fn chi(&self, _theta: f64, phi: f64) -> f64 {
        self.m as f64 * phi
    }

    /// `∇χ = m φ̂ / (k sinθ) = m (-k_y, k_x, 0) / (k_x² + k_y²)`.
    pub fn grad_chi(&self, k: &RVec3) -> RVec3 {
        let rho2 = k[0] * k[0] + k[1] * k[1];
        RVec3::new(-k[1], k[0], 0.0) * (self.m as f64 / rho2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoleConvention {
    /// Refuse to build a frame on the z-axis.
    Strict,
    /// Take `φ = 0` on the z-axis and continue the frame along that meridian.
    Continuity,
}

/// Transverse helicity frame at one wave vector.
#[derive(Clone, Debug)]
pub struct PolarizationFrame {
    pub k_hat: RVec3,
    pub theta_hat: RVec3,
    pub phi_hat: RVec3,
    pub e_plus: CVec3,
    pub e_minus: CVec3,
}

impl PolarizationFrame {
    pub fn at(k: &RVec3, gauge: ChiGauge, convention: PoleConvention) -> Result<Self> {
        let (kk, theta, phi) = spherical_angles(k);
        if kk == 0.0 {
            return Err(Error::SingularPoint(k[0], k[1], k[2], "k = 0 has no direction"));
        }
        if convention == PoleConvention::Strict && k[0] == 0.0 && k[1] == 0.0 {
            return Err(Error::SingularPoint(k[0], k[1], k[2], "frame undefined on the z-axis"));
        }
        Ok(Self::from_angles(theta, phi, gauge))
    }

    pub fn for_mode(mode: &KMode, gauge: ChiGauge) -> Self {
        Self::from_angles(mode.theta, mode.phi, gauge)
    }

    pub fn from_angles(theta: f64, phi: f64, gauge: ChiGauge) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let k_hat = RVec3::new(st * cp, st * sp, ct);
        let theta_hat = RVec3::new(ct * cp, ct * sp, -st);
        let phi_hat = RVec3::new(-sp, cp, 0.0);
        let chi = gauge.chi(theta, phi);
        let th = complexify(&theta_hat);
        let ph = complexify(&phi_hat);
        let e = |lambda: f64| {
            let phase = num_complex::Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -lambda * chi);
            (th + ph * c(0.0, lambda)) * phase
        };
        Self {
            k_hat,
            theta_hat,
            phi_hat,
            e_plus: e(1.0),
            e_minus: e(-1.0),
        }
    }

    pub fn e(&self, lambda: Helicity) -> &CVec3 {
        match lambda {
            Helicity::Plus => &self.e_plus,
            Helicity::Minus => &self.e_minus,
        }
    }
}

/// `e_{k,λ}^(χ) = exp(-iλχ)(θ̂ + iλφ̂)/√2` for a lattice mode (poles use `φ = 0`).
pub fn polarization_vector(mode: &KMode, lambda: Helicity, gauge: ChiGauge) -> CVec3 {
    *PolarizationFrame::for_mode(mode, gauge).e(lambda)
}

/// Polarization vector at an arbitrary nonzero wave vector.
pub fn polarization_at(
    k: &RVec3,
    lambda: Helicity,
    gauge: ChiGauge,
    convention: PoleConvention,
) -> Result<CVec3> {
    Ok(*PolarizationFrame::at(k, gauge, convention)?.e(lambda))
}

/// `(k̂·S) v`, which equals `i k̂ × v`.
pub fn helicity_apply(mode: &KMode, v: &CVec3) -> CVec3 {
    cross_rc(&mode.k_hat(), v) * I
}

/// `Σ_λ e_λ e_λ†`.
pub fn transverse_projector(mode: &KMode) -> CMat3 {
    let frame = PolarizationFrame::for_mode(mode, ChiGauge::default());
    frame.e_plus * frame.e_plus.adjoint() + frame.e_minus * frame.e_minus.adjoint()
}
