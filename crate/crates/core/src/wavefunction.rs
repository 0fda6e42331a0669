//! Projection of a state onto position eigenkets.
//!
//! The one-photon wave function is
//!
//! ```text
//! Ψ_j^(α)(r, t) = Σ_{k,λ} c_{kλ} e*_{kλ,j} k^α exp(ik·r − ikct) / √V
//! ```
//!
//! with `α = 0` the Landau-Peierls function and `α = ∓1/2` the pair tied
//! to the vector potential `A⁺ = 𝒞Ψ^(−1/2)` and the field
//! `E⁺ = ic𝒞Ψ^(1/2)`. `B⁺` is built mode by mode as `ik × A⁺`.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{fock_expand, oracle_labels, ModeKey, PhotonState};
use crate::lattice::{build_k_lattice, conjugate_r_grid, KMode, LatticeSpec, RGrid, RPoint, UnitSystem};
use crate::numeric::{c, cross_rc, dotc, max_abs, ordered_map, pairwise_sum, pairwise_sum_vec, CMat3, CVec3, RVec3, I};
use crate::polarization::{polarization_vector, transverse_projector, ChiGauge, Helicity};
use crate::position_operator::Residual;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    WaveFunction,
    VectorPotential,
    Electric,
    Magnetic,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::WaveFunction => "psi",
            FieldKind::VectorPotential => "A_plus",
            FieldKind::Electric => "E_plus",
            FieldKind::Magnetic => "B_plus",
        })
    }
}

/// Complex 3-vector field on the conjugate grid.
#[derive(Clone, Debug)]
pub struct VectorFieldSample {
    pub grid: RGrid,
    pub values: Vec<CVec3>,
    pub kind: FieldKind,
    pub alpha: f64,
    pub gauge: ChiGauge,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DensityKind {
    /// `Σ_j |Ψ_j^(0)|²`
    LandauPeierls,
    /// `Re{Ψ^(1/2)* · Ψ^(−1/2)}`
    Biorthonormal,
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DensityKind::LandauPeierls => "lp",
            DensityKind::Biorthonormal => "biorthonormal",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DensityProfile {
    pub grid: RGrid,
    pub values: Vec<f64>,
    pub kind: DensityKind,
    pub gauge: ChiGauge,
    pub t: f64,
}

impl DensityProfile {
    /// Riemann sum with weight `V/N³`.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell_volume
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Plane-wave sum `Σ_k a_k exp(ik·r − ikct)` with precomputed amplitudes.
#[derive(Clone, Debug)]
pub struct PlaneWaveSum {
    terms: Vec<(RVec3, f64, CVec3)>,
    c_light: f64,
}

impl PlaneWaveSum {
    pub fn eval(&self, r: &RVec3, t: f64) -> CVec3 {
        let parts: Vec<CVec3> = self
            .terms
            .iter()
            .map(|(k_vec, k, a)| a * Complex64::from_polar(1.0, k_vec.dot(r) - k * self.c_light * t))
            .collect();
        pairwise_sum_vec(&parts)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn modes(&self) -> impl Iterator<Item = &(RVec3, f64, CVec3)> {
        self.terms.iter()
    }

    fn sample(&self, grid: &RGrid, t: f64) -> Vec<CVec3> {
        ordered_map(&grid.points, |p: &RPoint| self.eval(&p.r, t))
    }
}

fn require_one_photon(state: &PhotonState) -> Result<()> {
    if state.has_one_photon() {
        Ok(())
    } else {
        Err(Error::MissingSector(1))
    }
}

/// Expansion of `Ψ^(α)` with every mode amplitude multiplied by `weight(mode)`.
fn expansion<W>(state: &PhotonState, alpha: f64, gauge: ChiGauge, weight: W) -> Result<PlaneWaveSum>
where
    W: Fn(&KMode, &CVec3) -> CVec3,
{
    let inv_sqrt_v = state.lattice.volume().sqrt().recip();
    // Group helicities of the same wave vector into one term.
    let mut terms: Vec<(RVec3, f64, CVec3)> = Vec::new();
    let mut last: Option<[i32; 3]> = None;
    for (key, coeff) in state.one_photon() {
        let mode = state.mode(key)?;
        let e = polarization_vector(&mode, key.helicity, gauge).map(|z| z.conj());
        let amp = weight(&mode, &(e * (coeff * mode.k.powf(alpha) * inv_sqrt_v)));
        if last == Some(key.n) {
            terms.last_mut().expect("previous term").2 += amp;
        } else {
            terms.push((mode.k_vec, mode.k, amp));
            last = Some(key.n);
        }
    }
    Ok(PlaneWaveSum {
        terms,
        c_light: state.units.c,
    })
}

pub fn wavefunction_expansion(state: &PhotonState, alpha: f64, gauge: ChiGauge) -> Result<PlaneWaveSum> {
    require_one_photon(state)?;
    expansion(state, alpha, gauge, |_, a| *a)
}

/// `A⁺ = 𝒞 Ψ^(−1/2)`.
pub fn vector_potential_expansion(state: &PhotonState, gauge: ChiGauge) -> Result<PlaneWaveSum> {
    require_one_photon(state)?;
    let cc = state.units.field_constant();
    expansion(state, -0.5, gauge, |_, a| a * c(cc, 0.0))
}

/// `E⁺ = ic𝒞 Ψ^(1/2)`.
pub fn electric_expansion(state: &PhotonState, gauge: ChiGauge) -> Result<PlaneWaveSum> {
    require_one_photon(state)?;
    let factor = c(0.0, state.units.c * state.units.field_constant());
    expansion(state, 0.5, gauge, |_, a| a * factor)
}

/// `B⁺ = ∇ × A⁺`, taken per mode as `ik × A⁺_k`.
pub fn magnetic_expansion(state: &PhotonState, gauge: ChiGauge) -> Result<PlaneWaveSum> {
    require_one_photon(state)?;
    let cc = state.units.field_constant();
    expansion(state, -0.5, gauge, |m, a| cross_rc(&m.k_vec, &(a * c(cc, 0.0))) * I)
}

fn sample_field(state: &PhotonState, sum: PlaneWaveSum, kind: FieldKind, alpha: f64, gauge: ChiGauge, t: f64) -> Result<VectorFieldSample> {
    let grid = conjugate_r_grid(&state.lattice)?;
    let values = sum.sample(&grid, t);
    Ok(VectorFieldSample {
        grid,
        values,
        kind,
        alpha,
        gauge,
        t,
    })
}

/// `Ψ^(α)(r, t)` on the conjugate grid.
pub fn one_photon_wavefunction(state: &PhotonState, alpha: f64, gauge: ChiGauge, t: f64) -> Result<VectorFieldSample> {
    let sum = wavefunction_expansion(state, alpha, gauge)?;
    sample_field(state, sum, FieldKind::WaveFunction, alpha, gauge, t)
}

pub fn field_a_plus(state: &PhotonState, gauge: ChiGauge, t: f64) -> Result<VectorFieldSample> {
    let sum = vector_potential_expansion(state, gauge)?;
    sample_field(state, sum, FieldKind::VectorPotential, -0.5, gauge, t)
}

pub fn field_e_plus(state: &PhotonState, gauge: ChiGauge, t: f64) -> Result<VectorFieldSample> {
    let sum = electric_expansion(state, gauge)?;
    sample_field(state, sum, FieldKind::Electric, 0.5, gauge, t)
}

pub fn field_b_plus(state: &PhotonState, gauge: ChiGauge, t: f64) -> Result<VectorFieldSample> {
    let sum = magnetic_expansion(state, gauge)?;
    sample_field(state, sum, FieldKind::Magnetic, -0.5, gauge, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxwellResidual {
    pub div_e: f64,
    pub div_b: f64,
    pub faraday: f64,
    pub ampere: f64,
    pub sample_count: usize,
}

impl MaxwellResidual {
    pub fn as_array(&self) -> [(&'static str, f64); 4] {
        [
            ("div_E", self.div_e),
            ("div_B", self.div_b),
            ("curl_E_plus_dB_dt", self.faraday),
            ("curl_B_minus_dE_dt_over_c2", self.ampere),
        ]
    }
}

fn fd_gradient(f: &PlaneWaveSum, r: &RVec3, t: f64, dr: f64) -> [CVec3; 3] {
    std::array::from_fn(|j| {
        let mut d = RVec3::zeros();
        d[j] = dr;
        (f.eval(&(r + d), t) - f.eval(&(r - d), t)) / c(2.0 * dr, 0.0)
    })
}

fn fd_div(g: &[CVec3; 3]) -> Complex64 {
    g[0][0] + g[1][1] + g[2][2]
}

fn fd_curl(g: &[CVec3; 3]) -> CVec3 {
    // g[j][a] = ∂_j F_a
    CVec3::new(g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0])
}

fn fd_dt(f: &PlaneWaveSum, r: &RVec3, t: f64, dt: f64) -> CVec3 {
    (f.eval(r, t + dt) - f.eval(r, t - dt)) / c(2.0 * dt, 0.0)
}

/// Central-difference residuals of the four Maxwell equations for `E⁺, B⁺`
/// at the conjugate grid points.
pub fn maxwell_residual(state: &PhotonState, gauge: ChiGauge, t: f64, dr: f64, dt: f64) -> Result<MaxwellResidual> {
    if !(dr > 0.0 && dt > 0.0) {
        return Err(Error::Config(format!("dr and dt must be > 0, got {dr}, {dt}")));
    }
    let e = electric_expansion(state, gauge)?;
    let b = magnetic_expansion(state, gauge)?;
    let inv_c2 = state.units.c.powi(-2);
    let grid = conjugate_r_grid(&state.lattice)?;
    let rows = ordered_map(&grid.points, |p| {
        let ge = fd_gradient(&e, &p.r, t, dr);
        let gb = fd_gradient(&b, &p.r, t, dr);
        let faraday = fd_curl(&ge) + fd_dt(&b, &p.r, t, dt);
        let ampere = fd_curl(&gb) - fd_dt(&e, &p.r, t, dt) * c(inv_c2, 0.0);
        [
            fd_div(&ge).norm(),
            fd_div(&gb).norm(),
            crate::numeric::norm(&faraday),
            crate::numeric::norm(&ampere),
        ]
    });
    let sup = |i: usize| rows.iter().map(|r| r[i]).fold(0.0, f64::max);
    Ok(MaxwellResidual {
        div_e: sup(0),
        div_b: sup(1),
        faraday: sup(2),
        ampere: sup(3),
        sample_count: rows.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarProduct {
    pub value: f64,
    pub imag_residue: f64,
}

/// `Σ_j ∫ d³r Ψ_j^(−α)* Ψ_j^(α)` by the `V/N³` Riemann sum.
pub fn scalar_product_local(state: &PhotonState, alpha: f64, gauge: ChiGauge, t: f64) -> Result<ScalarProduct> {
    let left = one_photon_wavefunction(state, -alpha, gauge, t)?;
    let right = one_photon_wavefunction(state, alpha, gauge, t)?;
    let terms: Vec<Complex64> = left.values.iter().zip(&right.values).map(|(a, b)| dotc(a, b)).collect();
    let total = pairwise_sum(&terms) * left.grid.cell_volume;
    Ok(ScalarProduct {
        value: total.re,
        imag_residue: total.im,
    })
}

pub fn density_lp(state: &PhotonState, gauge: ChiGauge, t: f64) -> Result<DensityProfile> {
    let psi = one_photon_wavefunction(state, 0.0, gauge, t)?;
    let values = psi.values.iter().map(|v| v.norm_squared()).collect();
    Ok(DensityProfile {
        grid: psi.grid,
        values,
        kind: DensityKind::LandauPeierls,
        gauge,
        t,
    })
}

pub fn density_biorthonormal(state: &PhotonState, gauge: ChiGauge, t: f64) -> Result<DensityProfile> {
    let up = one_photon_wavefunction(state, 0.5, gauge, t)?;
    let down = one_photon_wavefunction(state, -0.5, gauge, t)?;
    let values = up.values.iter().zip(&down.values).map(|(a, b)| dotc(a, b).re).collect();
    Ok(DensityProfile {
        grid: up.grid,
        values,
        kind: DensityKind::Biorthonormal,
        gauge,
        t,
    })
}

/// `Re{i ε₀ E⁻ · A⁺ / ħ}` from the sampled fields.
pub fn density_from_fields(state: &PhotonState, gauge: ChiGauge, t: f64) -> Result<DensityProfile> {
    let e = field_e_plus(state, gauge, t)?;
    let a = field_a_plus(state, gauge, t)?;
    let UnitSystem { hbar, eps0, .. } = state.units;
    let values = e
        .values
        .iter()
        .zip(&a.values)
        .map(|(ev, av)| (I * dotc(ev, av) * (eps0 / hbar)).re)
        .collect();
    Ok(DensityProfile {
        grid: e.grid,
        values,
        kind: DensityKind::Biorthonormal,
        gauge,
        t,
    })
}

pub fn density(state: &PhotonState, kind: DensityKind, gauge: ChiGauge, t: f64) -> Result<DensityProfile> {
    match kind {
        DensityKind::LandauPeierls => density_lp(state, gauge, t),
        DensityKind::Biorthonormal => density_biorthonormal(state, gauge, t),
    }
}

fn require_parallel(k1: &KMode, k2: &KMode) -> Result<()> {
    let cross = k1.k_vec.cross(&k2.k_vec).norm();
    if cross > 1e-12 * k1.k * k2.k || k1.k_vec.dot(&k2.k_vec) <= 0.0 {
        return Err(Error::NotApplicable(format!(
            "modes {:?} and {:?} are not parallel; the cross term then carries a polarization overlap e1*·e2 ≠ 1",
            k1.n, k2.n
        )));
    }
    Ok(())
}

/// `(1/2V){2 + (√(k₁/k₂) + √(k₂/k₁)) cos[(k₁−k₂)·r − (k₁−k₂)ct]}` for
/// parallel `k₁, k₂` with equal helicity and coefficients `1/√2`.
pub fn two_mode_closed_form(k1: &KMode, k2: &KMode, r: &RVec3, t: f64, c_light: f64, volume: f64) -> Result<f64> {
    require_parallel(k1, k2)?;
    let phase = (k1.k_vec - k2.k_vec).dot(r) - (k1.k - k2.k) * c_light * t;
    Ok((2.0 + two_mode_amplitude_factor(k1, k2) * phase.cos()) / (2.0 * volume))
}

/// `√(k₁/k₂) + √(k₂/k₁)`.
pub fn two_mode_amplitude_factor(k1: &KMode, k2: &KMode) -> f64 {
    (k1.k / k2.k).sqrt() + (k2.k / k1.k).sqrt()
}

/// The state with `c_{k₁λ} = c_{k₂λ} = 1/√2` (coefficients add when `k₁ = k₂`).
pub fn two_mode_state(units: UnitSystem, lattice: LatticeSpec, n1: [i32; 3], n2: [i32; 3], lambda: Helicity) -> Result<PhotonState> {
    let mut s = PhotonState::new(units, lattice);
    let amp = c(FRAC_1_SQRT_2, 0.0);
    let k1 = ModeKey::new(n1, lambda);
    let k2 = ModeKey::new(n2, lambda);
    s.set_one(k1, amp)?;
    s.set_one(k2, s.one(&k2) + amp)?;
    Ok(s)
}

/// Two-photon state built from one-photon states `a, b`: `c_pq = a_p b_q + a_q b_p`
/// for distinct labels and `c_pp = √2 a_p b_p`, i.e. `Σ_pq a_p b_q a†_p a†_q |0⟩`.
/// Its amplitude is `Ψ_a(r)Ψ_b(r′) + Ψ_b(r)Ψ_a(r′)`.
pub fn symmetrized_product_state(a: &PhotonState, b: &PhotonState) -> Result<PhotonState> {
    if a.lattice != b.lattice || a.units != b.units {
        return Err(Error::Config("symmetrized product needs states on the same lattice and units".into()));
    }
    let mut s = PhotonState::new(a.units, a.lattice);
    for (p, ap) in a.one_photon() {
        for (q, bq) in b.one_photon() {
            let weight = if p == q { 2f64.sqrt() } else { 1.0 };
            let prev = s.two(p, q);
            s.set_two(*p, *q, prev + ap * bq * weight)?;
        }
    }
    Ok(s)
}

/// Amplitude `A_{r,i,t}(p) = k_p^α e*_{p,i} exp(ik_p·r − ik_p ct)/√V`.
#[allow(clippy::too_many_arguments)]
fn projection_factor(mode: &KMode, key: &ModeKey, alpha: f64, gauge: ChiGauge, r: &RVec3, t: f64, i: usize, units: &UnitSystem, volume: f64) -> Complex64 {
    let e = polarization_vector(mode, key.helicity, gauge);
    e[i].conj() * Complex64::from_polar(mode.k.powf(alpha) / volume.sqrt(), mode.k_vec.dot(r) - mode.k * units.c * t)
}

fn two_photon_labels(state: &PhotonState) -> Vec<ModeKey> {
    let set: BTreeSet<ModeKey> = state.two_photon().flat_map(|((a, b), _)| [*a, *b]).collect();
    set.into_iter().collect()
}

/// Two-photon correlation amplitude `Ψ_{i,j}^(α)(r, r′, t, t′)`.
#[allow(clippy::too_many_arguments)]
pub fn two_photon_amplitude(
    state: &PhotonState,
    alpha: f64,
    gauge: ChiGauge,
    r: &RVec3,
    r2: &RVec3,
    t: f64,
    t2: f64,
    i: usize,
    j: usize,
) -> Result<Complex64> {
    if !state.has_two_photon() {
        return Err(Error::MissingSector(2));
    }
    let volume = state.lattice.volume();
    let labels = two_photon_labels(state);
    let modes: Vec<KMode> = labels.iter().map(|k| state.mode(k)).collect::<Result<_>>()?;
    let f = |idx: usize, pos: &RVec3, time: f64, comp: usize| {
        projection_factor(&modes[idx], &labels[idx], alpha, gauge, pos, time, comp, &state.units, 1.0)
    };
    let mut terms = Vec::with_capacity(labels.len() * labels.len());
    for (p, kp) in labels.iter().enumerate() {
        for (q, kq) in labels.iter().enumerate() {
            let coeff = state.two(kp, kq);
            if coeff == Complex64::default() {
                continue;
            }
            let sqrt_n = if p == q { 2f64.sqrt() } else { 1.0 };
            let direct = f(p, r, t, i) * f(q, r2, t2, j);
            let exchanged = f(q, r, t, i) * f(p, r2, t2, j);
            terms.push(coeff * sqrt_n * (direct + exchanged));
        }
    }
    Ok(pairwise_sum(&terms) / (2.0 * volume))
}

/// Sampled `Ψ_{i,j}(r, r′, t, t′)` over a grid of position pairs (row-major in `r`).
#[derive(Clone, Debug)]
pub struct TwoPhotonAmplitude {
    pub r_points: Vec<RVec3>,
    pub r2_points: Vec<RVec3>,
    pub i: usize,
    pub j: usize,
    pub t: f64,
    pub t2: f64,
    pub values: Vec<Complex64>,
}

impl TwoPhotonAmplitude {
    pub fn at(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.r2_points.len() + b]
    }
}

#[allow(clippy::too_many_arguments)]
pub fn two_photon_amplitude_grid(
    state: &PhotonState,
    alpha: f64,
    gauge: ChiGauge,
    r_points: &[RVec3],
    r2_points: &[RVec3],
    t: f64,
    t2: f64,
    i: usize,
    j: usize,
) -> Result<TwoPhotonAmplitude> {
    let pairs: Vec<(usize, usize)> = (0..r_points.len())
        .flat_map(|a| (0..r2_points.len()).map(move |b| (a, b)))
        .collect();
    let values = ordered_map(&pairs, |&(a, b)| two_photon_amplitude(state, alpha, gauge, &r_points[a], &r2_points[b], t, t2, i, j));
    Ok(TwoPhotonAmplitude {
        r_points: r_points.to_vec(),
        r2_points: r2_points.to_vec(),
        i,
        j,
        t,
        t2,
        values: values.into_iter().collect::<Result<_>>()?,
    })
}

/// Occupation-basis projection oracle: applies the adjoint position-ket
/// operators (sums of annihilators, both helicities) to `|Ψ⟩` and reads the
/// vacuum amplitude. Independent of the closed double sum above.
#[allow(clippy::too_many_arguments)]
pub fn two_photon_amplitude_oracle(
    state: &PhotonState,
    alpha: f64,
    gauge: ChiGauge,
    r: &RVec3,
    r2: &RVec3,
    t: f64,
    t2: f64,
    i: usize,
    j: usize,
) -> Result<Complex64> {
    let labels = oracle_labels([state])?;
    let psi = fock_expand(state, &labels)?;
    let volume = state.lattice.volume();
    let apply = |v: &crate::fock::FockVector, pos: &RVec3, time: f64, comp: usize| -> Result<crate::fock::FockVector> {
        let mut out = crate::fock::FockVector::zero(labels.len());
        for (idx, key) in labels.iter().enumerate() {
            let mode = state.mode(key)?;
            let a = projection_factor(&mode, key, alpha, gauge, pos, time, comp, &state.units, volume);
            out.add_scaled(&v.annihilate(idx), a);
        }
        Ok(out)
    };
    let once = apply(&psi, r, t, i)?;
    Ok(apply(&once, r2, t2, j)?.vacuum_amplitude())
}

/// One-photon analogue of the oracle: `Σ_λ ⟨ψ_{r,λ,j}|Ψ⟩` by ladder operators.
pub fn one_photon_oracle(state: &PhotonState, alpha: f64, gauge: ChiGauge, r: &RVec3, t: f64, j: usize) -> Result<Complex64> {
    let labels = oracle_labels([state])?;
    let psi = fock_expand(state, &labels)?;
    let volume = state.lattice.volume();
    let mut out = crate::fock::FockVector::zero(labels.len());
    for (idx, key) in labels.iter().enumerate() {
        let mode = state.mode(key)?;
        let a = projection_factor(&mode, key, alpha, gauge, r, t, j, &state.units, volume);
        out.add_scaled(&psi.annihilate(idx), a);
    }
    Ok(out.vacuum_amplitude())
}

/// `Σ_j ⟨ψ^(−α)_{r₂,λ₂,j}(t) | ψ^(α)_{r₁,λ₁,j}(t)⟩` over the lattice modes.
#[allow(clippy::too_many_arguments)]
pub fn biorthonormal_overlap(
    modes: &[KMode],
    volume: f64,
    alpha: f64,
    gauge: ChiGauge,
    r1: &RVec3,
    lambda1: Helicity,
    r2: &RVec3,
    lambda2: Helicity,
    t: f64,
) -> Complex64 {
    let terms: Vec<Complex64> = modes
        .iter()
        .map(|m| {
            // ψ^(α)_{r,λ}(k, t) = k^α e exp(−ik·r + ikct)/√V, with c = 1 time units
            let ket = polarization_vector(m, lambda1, gauge) * Complex64::from_polar(m.k.powf(alpha), -m.k_vec.dot(r1) + m.k * t);
            let bra = polarization_vector(m, lambda2, gauge) * Complex64::from_polar(m.k.powf(-alpha), -m.k_vec.dot(r2) + m.k * t);
            dotc(&bra, &ket)
        })
        .collect();
    pairwise_sum(&terms) / volume
}

/// Expected lattice value: `(N³ δ_{r₁r₂} − 1)/V · δ_{λ₁λ₂}`.
pub fn biorthonormal_expected(spec: &LatticeSpec, same_point: bool, same_helicity: bool) -> f64 {
    if !same_helicity {
        return 0.0;
    }
    let n3 = spec.point_count() as f64;
    (if same_point { n3 } else { 0.0 } - 1.0) / spec.volume()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiorthonormalityReport {
    /// Worst `|S − S_exact| / max(|S_exact|, 1/V)` with `S_exact` one of the three cases.
    pub worst_relative: f64,
    pub diagonal: f64,
    pub off_diagonal: f64,
    pub cross_helicity: f64,
    pub pairs: usize,
}

/// Checks the discrete biorthonormality sums for every pair of grid points
/// and helicities (lattice must include every nonzero mode).
pub fn biorthonormality_check(spec: &LatticeSpec, alpha: f64, gauge: ChiGauge, t: f64) -> Result<BiorthonormalityReport> {
    let full = LatticeSpec {
        exclude_z_axis: false,
        ..*spec
    };
    let modes = build_k_lattice(&full)?;
    let grid = conjugate_r_grid(&full)?;
    let volume = full.volume();
    let scale = volume.recip();
    let rows = ordered_map(&grid.points, |p1| {
        let mut worst = [0.0f64; 4];
        let mut sample = [0.0f64; 3];
        for p2 in &grid.points {
            for l1 in Helicity::BOTH {
                for l2 in Helicity::BOTH {
                    let s = biorthonormal_overlap(&modes, volume, alpha, gauge, &p1.r, l1, &p2.r, l2, t);
                    let same_point = p1.m == p2.m;
                    let exact = biorthonormal_expected(&full, same_point, l1 == l2);
                    let rel = (s - c(exact, 0.0)).norm() / exact.abs().max(scale);
                    worst[0] = worst[0].max(rel);
                    let slot = match (l1 == l2, same_point) {
                        (true, true) => 0,
                        (true, false) => 1,
                        (false, _) => 2,
                    };
                    if worst[slot + 1] <= rel {
                        worst[slot + 1] = rel;
                        sample[slot] = s.re;
                    }
                }
            }
        }
        (worst, sample)
    });
    let mut report = BiorthonormalityReport {
        worst_relative: 0.0,
        diagonal: 0.0,
        off_diagonal: 0.0,
        cross_helicity: 0.0,
        pairs: grid.len() * grid.len() * 4,
    };
    let mut worst_slot = [-1.0f64; 3];
    for (w, s) in rows {
        report.worst_relative = report.worst_relative.max(w[0]);
        for slot in 0..3 {
            if w[slot + 1] > worst_slot[slot] {
                worst_slot[slot] = w[slot + 1];
                match slot {
                    0 => report.diagonal = s[0],
                    1 => report.off_diagonal = s[1],
                    _ => report.cross_helicity = s[2],
                }
            }
        }
    }
    Ok(report)
}

/// `M_ij = Σ_λ Σ_r ψ^(α)_{r,λ,i}(k) ψ^(−α)*_{r,λ,j}(k′) V/N³`.
pub fn completeness_matrix(spec: &LatticeSpec, grid: &RGrid, alpha: f64, gauge: ChiGauge, k: &KMode, k2: &KMode, t: f64) -> CMat3 {
    let volume = spec.volume();
    let mut total = CMat3::zeros();
    for lambda in Helicity::BOTH {
        let e1 = polarization_vector(k, lambda, gauge);
        let e2 = polarization_vector(k2, lambda, gauge);
        let phases: Vec<Complex64> = grid
            .points
            .iter()
            .map(|p| {
                let a = Complex64::from_polar(1.0, -k.k_vec.dot(&p.r) + k.k * t);
                let b = Complex64::from_polar(1.0, -k2.k_vec.dot(&p.r) + k2.k * t);
                a * b.conj()
            })
            .collect();
        let s = pairwise_sum(&phases) * (k.k.powf(alpha) * k2.k.powf(-alpha) * grid.cell_volume / volume);
        total += e1 * e2.adjoint() * s;
    }
    total
}

/// Worst deviation of the completeness matrix from `δ_{kk′}(I − k̂k̂ᵀ)` over
/// all pairs of lattice modes.
pub fn completeness_check(spec: &LatticeSpec, alpha: f64, gauge: ChiGauge, t: f64) -> Result<Residual> {
    let modes = build_k_lattice(spec)?;
    let grid = conjugate_r_grid(spec)?;
    let rows = ordered_map(&modes, |k| {
        let mut worst = 0.0f64;
        for k2 in &modes {
            let m = completeness_matrix(spec, &grid, alpha, gauge, k, k2, t);
            let expected = if k.n == k2.n { transverse_projector(k) } else { CMat3::zeros() };
            worst = worst.max(max_abs(&(m - expected)));
        }
        (worst, Some(*k))
    });
    let mut out = Residual::scalar(0.0, modes.len() * modes.len());
    for (w, k) in rows {
        if w > out.sup_norm {
            out.sup_norm = w;
            out.worst_mode = k;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{norm_components, random_one_photon, random_state};
    use crate::numeric::{complexify, dotu, norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn spec() -> LatticeSpec {
        LatticeSpec::new(TAU, 4)
    }

    fn single(n: [i32; 3], lambda: Helicity) -> PhotonState {
        let mut s = PhotonState::new(UnitSystem::default(), spec());
        s.set_one(ModeKey::new(n, lambda), c(1.0, 0.0)).unwrap();
        s
    }

    #[test]
    fn single_mode_is_uniform() {
        let s = single([1, -1, 0], Helicity::Plus);
        let v = spec().volume();
        for t in [0.0, 0.7] {
            let psi = one_photon_wavefunction(&s, 0.0, ChiGauge::default(), t).unwrap();
            assert!(psi.values.iter().all(|x| (x.norm_squared() - 1.0 / v).abs() < 1e-15));
            let up = one_photon_wavefunction(&s, 0.5, ChiGauge::default(), t).unwrap();
            let k = 2f64.sqrt();
            for (a, b) in psi.values.iter().zip(&up.values) {
                assert!(norm(&(a * c(k.sqrt(), 0.0) - b)) < 1e-15);
            }
        }
        for kind in [DensityKind::LandauPeierls, DensityKind::Biorthonormal] {
            let d = density(&s, kind, ChiGauge::new(1), 0.3).unwrap();
            assert!(d.values.iter().all(|x| (x - 1.0 / v).abs() < 1e-15));
        }
    }

    #[test]
    fn empty_sectors_rejected() {
        let s = PhotonState::vacuum(UnitSystem::default(), spec());
        assert!(matches!(one_photon_wavefunction(&s, 0.0, ChiGauge::default(), 0.0), Err(Error::MissingSector(1))));
        assert!(matches!(
            two_photon_amplitude(&s, 0.0, ChiGauge::default(), &RVec3::zeros(), &RVec3::zeros(), 0.0, 0.0, 0, 0),
            Err(Error::MissingSector(2))
        ));
    }

    #[test]
    fn fields_follow_wavefunction() {
        let units = UnitSystem {
            hbar: 2.0,
            c: 3.0,
            eps0: 0.5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_one_photon(&mut rng, units, spec(), 5).unwrap();
        let g = ChiGauge::new(1);
        let cc = units.field_constant();
        let e = field_e_plus(&s, g, 0.4).unwrap();
        let a = field_a_plus(&s, g, 0.4).unwrap();
        let up = one_photon_wavefunction(&s, 0.5, g, 0.4).unwrap();
        let down = one_photon_wavefunction(&s, -0.5, g, 0.4).unwrap();
        for idx in 0..e.values.len() {
            assert!(norm(&(e.values[idx] - up.values[idx] * c(0.0, units.c * cc))) < 1e-14);
            assert!(norm(&(a.values[idx] - down.values[idx] * c(cc, 0.0))) < 1e-14);
        }
        let from_fields = density_from_fields(&s, g, 0.4).unwrap();
        let direct = density_biorthonormal(&s, g, 0.4).unwrap();
        for (x, y) in from_fields.values.iter().zip(&direct.values) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn magnetic_field_mode_relation() {
        // For one helicity-λ mode with e* amplitudes, k̂ × e* = iλ e*, so B = iλ E / c.
        for lambda in Helicity::BOTH {
            let s = single([1, 1, -1], lambda);
            let e = field_e_plus(&s, ChiGauge::default(), 0.2).unwrap();
            let b = field_b_plus(&s, ChiGauge::default(), 0.2).unwrap();
            for (ev, bv) in e.values.iter().zip(&b.values) {
                assert!(norm(&(bv - ev * c(0.0, lambda.value()))) < 1e-14);
            }
        }
    }

    #[test]
    fn time_derivative_of_a_gives_minus_e() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_one_photon(&mut rng, UnitSystem::default(), spec(), 4).unwrap();
        let a = vector_potential_expansion(&s, ChiGauge::default()).unwrap();
        let e = electric_expansion(&s, ChiGauge::default()).unwrap();
        let r = RVec3::new(0.3, 1.1, -0.4);
        let errs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&dt| norm(&(fd_dt(&a, &r, 0.5, dt) + e.eval(&r, 0.5))))
            .collect();
        assert!((3.9..4.1).contains(&(errs[0] / errs[1])));
    }

    #[test]
    fn transversality_per_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_one_photon(&mut rng, UnitSystem::default(), spec(), 10).unwrap();
        let e = electric_expansion(&s, ChiGauge::default()).unwrap();
        for (k_vec, _, amp) in e.modes() {
            assert!(dotu(&complexify(k_vec), amp).norm() < 1e-14);
        }
    }

    #[test]
    fn maxwell_residual_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_one_photon(&mut rng, UnitSystem::default(), spec(), 6).unwrap();
        let coarse = maxwell_residual(&s, ChiGauge::default(), 0.1, 0.1, 0.1).unwrap();
        let fine = maxwell_residual(&s, ChiGauge::default(), 0.1, 0.05, 0.05).unwrap();
        for ((_, a), (_, b)) in coarse.as_array().iter().zip(fine.as_array()) {
            assert!((3.5..4.5).contains(&(a / b)), "{a} {b}");
        }
    }

    #[test]
    fn single_mode_maxwell_residual_is_homogeneous() {
        let s = single([1, 1, 0], Helicity::Plus);
        let e = electric_expansion(&s, ChiGauge::default()).unwrap();
        let b = magnetic_expansion(&s, ChiGauge::default()).unwrap();
        let grid = conjugate_r_grid(&spec()).unwrap();
        let vals: Vec<f64> = grid
            .points
            .iter()
            .map(|p| norm(&(fd_curl(&fd_gradient(&e, &p.r, 0.0, 0.1)) + fd_dt(&b, &p.r, 0.0, 0.1))))
            .collect();
        assert!(vals[0] > 0.0);
        assert!(vals.iter().all(|v| (v - vals[0]).abs() < 1e-12 * vals[0].max(1.0)));
    }

    #[test]
    fn scalar_product_is_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = random_one_photon(&mut rng, UnitSystem::default(), spec(), 5).unwrap();
        let target = norm_components(&s).one;
        let p0 = scalar_product_local(&s, 0.0, ChiGauge::default(), 0.0).unwrap();
        let p1 = scalar_product_local(&s, 0.5, ChiGauge::default(), 0.0).unwrap();
        assert!((p0.value - target).abs() < 1e-12);
        assert!((p1.value - p0.value).abs() < 1e-12);
        assert!(p1.imag_residue.abs() < 1e-12);
        let half = s.scaled(c(0.5, 0.0));
        let p = scalar_product_local(&half, 0.5, ChiGauge::default(), 1.0).unwrap();
        assert!((p.value - 0.25 * target).abs() < 1e-12);
        let single = scalar_product_local(&single([0, 0, 1], Helicity::Minus), -0.5, ChiGauge::default(), 0.0).unwrap();
        assert!((single.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_density_positive_and_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let s = random_one_photon(&mut rng, UnitSystem::default(), spec(), 7).unwrap();
            let t = rng.gen_range(0.0..5.0);
            let d = density_lp(&s, ChiGauge::default(), t).unwrap();
            assert!(d.min() >= -1e-15);
            assert!((d.integral() - 1.0).abs() < 1e-12);
            let b = density_biorthonormal(&s, ChiGauge::default(), t).unwrap();
            assert!((b.integral() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn definite_k_densities_agree() {
        let mut s = PhotonState::new(UnitSystem::default(), spec());
        for (i, n) in [[1, 0, 0], [0, -1, 0], [0, 0, 1], [-1, 0, 0]].into_iter().enumerate() {
            s.set_one(ModeKey::new(n, Helicity::Plus), c(0.3 + 0.1 * i as f64, 0.2)).unwrap();
            s.set_one(ModeKey::new(n, Helicity::Minus), c(-0.1, 0.05 * i as f64)).unwrap();
        }
        let lp = density_lp(&s, ChiGauge::new(2), 0.9).unwrap();
        let bi = density_biorthonormal(&s, ChiGauge::new(2), 0.9).unwrap();
        for (a, b) in lp.values.iter().zip(&bi.values) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn two_mode_closed_form_and_refusal() {
        let spec = spec();
        let k1 = spec.mode([-1, 0, 0]).unwrap();
        let k2 = spec.mode([-2, 0, 0]).unwrap();
        assert!((two_mode_amplitude_factor(&k1, &k2) - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        let s = two_mode_state(UnitSystem::default(), spec, k1.n, k2.n, Helicity::Plus).unwrap();
        let v = spec.volume();
        let mut min = f64::INFINITY;
        for t in [0.0, 0.25, 1.3] {
            let d = density_biorthonormal(&s, ChiGauge::default(), t).unwrap();
            for (p, val) in d.grid.points.iter().zip(&d.values) {
                let cf = two_mode_closed_form(&k1, &k2, &p.r, t, 1.0, v).unwrap();
                assert!((cf - val).abs() <= 1e-12 / v);
                min = min.min(*val);
            }
            assert!((d.integral() - 1.0).abs() < 1e-12);
        }
        assert!(min < 0.0);
        let other = spec.mode([0, 1, 0]).unwrap();
        assert!(matches!(two_mode_closed_form(&k1, &other, &RVec3::zeros(), 0.0, 1.0, v), Err(Error::NotApplicable(_))));
        let anti = spec.mode([1, 0, 0]).unwrap();
        assert!(two_mode_closed_form(&k1, &anti, &RVec3::zeros(), 0.0, 1.0, v).is_err());
    }

    #[test]
    fn degenerate_two_mode_state() {
        let spec = spec();
        let k1 = spec.mode([1, 1, 0]).unwrap();
        let s = two_mode_state(UnitSystem::default(), spec, k1.n, k1.n, Helicity::Minus).unwrap();
        let d = density_biorthonormal(&s, ChiGauge::default(), 0.0).unwrap();
        let v = spec.volume();
        for (p, val) in d.grid.points.iter().zip(&d.values) {
            let cf = two_mode_closed_form(&k1, &k1, &p.r, 0.0, 1.0, v).unwrap();
            assert!((cf - 2.0 / v).abs() < 1e-15);
            assert!((val - cf).abs() < 1e-12 / v);
        }
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<RVec3> {
        (0..n).map(|_| RVec3::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU))).collect()
    }

    #[test]
    fn two_photon_matches_oracle_and_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let modes = [[1, 0, 0], [0, 1, -1]];
        for _ in 0..10 {
            let s = random_state(&mut rng, UnitSystem::default(), spec(), &modes).unwrap();
            let pts = random_points(&mut rng, 3);
            let (t, t2) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            for alpha in [-0.5, 0.0, 0.5] {
                for i in 0..3 {
                    for j in 0..3 {
                        let g = ChiGauge::new(1);
                        let a = two_photon_amplitude(&s, alpha, g, &pts[0], &pts[1], t, t2, i, j).unwrap();
                        let b = two_photon_amplitude_oracle(&s, alpha, g, &pts[0], &pts[1], t, t2, i, j).unwrap();
                        assert!((a - b).norm() < 1e-13, "{a} {b}");
                        let swapped = two_photon_amplitude(&s, alpha, g, &pts[1], &pts[0], t2, t, j, i).unwrap();
                        assert_eq!(a, swapped);
                    }
                }
            }
        }
    }

    #[test]
    fn one_photon_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let s = random_state(&mut rng, UnitSystem::default(), spec(), &[[1, 0, 0], [-1, 1, 1], [0, 0, -2]]).unwrap();
        let pts = random_points(&mut rng, 4);
        let sum = wavefunction_expansion(&s, 0.5, ChiGauge::new(-1)).unwrap();
        for p in &pts {
            let v = sum.eval(p, 0.3);
            for j in 0..3 {
                let o = one_photon_oracle(&s, 0.5, ChiGauge::new(-1), p, 0.3, j).unwrap();
                assert!((v[j] - o).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn symmetrized_product_factorizes() {
        let spec = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        // shared modes exercise the doubly occupied branch
        let modes = [[1, 0, 0], [0, 1, -1]];
        let a = random_state(&mut rng, UnitSystem::default(), spec, &modes).unwrap();
        let b = random_state(&mut rng, UnitSystem::default(), spec, &modes).unwrap();
        let s = symmetrized_product_state(&a, &b).unwrap();
        let g = ChiGauge::default();
        let pa = wavefunction_expansion(&a, 0.5, g).unwrap();
        let pb = wavefunction_expansion(&b, 0.5, g).unwrap();
        let pts = random_points(&mut rng, 2);
        for i in 0..3 {
            for j in 0..3 {
                let amp = two_photon_amplitude(&s, 0.5, g, &pts[0], &pts[1], 0.2, 0.2, i, j).unwrap();
                let expect = pa.eval(&pts[0], 0.2)[i] * pb.eval(&pts[1], 0.2)[j] + pb.eval(&pts[0], 0.2)[i] * pa.eval(&pts[1], 0.2)[j];
                assert!((amp - expect).norm() < 1e-12, "{amp} {expect}");
            }
        }
    }

    #[test]
    fn biorthonormality_closed_forms() {
        for alpha in [0.5, -0.5, 0.0] {
            for m in [0, 1] {
                let r = biorthonormality_check(&LatticeSpec::new(3.0, 4), alpha, ChiGauge::new(m), 0.7).unwrap();
                assert!(r.worst_relative < 1e-12, "{r:?}");
            }
        }
        let spec = LatticeSpec::new(3.0, 4);
        assert!((biorthonormal_expected(&spec, true, true) - 63.0 / 27.0).abs() < 1e-15);
        assert!((biorthonormal_expected(&spec, false, true) + 1.0 / 27.0).abs() < 1e-15);
        assert_eq!(biorthonormal_expected(&spec, false, false), 0.0);
    }

    #[test]
    fn completeness_reproduces_projector() {
        for alpha in [0.5, -0.5] {
            let r = completeness_check(&spec(), alpha, ChiGauge::new(1), 0.4).unwrap();
            assert!(r.sup_norm < 1e-12, "{}", r.sup_norm);
        }
        let spec = spec();
        let grid = conjugate_r_grid(&spec).unwrap();
        let k = spec.mode([1, -1, 1]).unwrap();
        let m = completeness_matrix(&spec, &grid, 0.5, ChiGauge::default(), &k, &k, 0.0);
        assert!(norm(&(m * complexify(&k.k_hat()))) < 1e-14);
    }

    #[test]
    fn two_photon_grid_indexing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_state(&mut rng, UnitSystem::default(), spec(), &[[1, 0, 0]]).unwrap();
        let pts = random_points(&mut rng, 3);
        let grid = two_photon_amplitude_grid(&s, 0.0, ChiGauge::default(), &pts, &pts[..2], 0.0, 0.0, 0, 1).unwrap();
        assert_eq!(grid.values.len(), 6);
        let direct = two_photon_amplitude(&s, 0.0, ChiGauge::default(), &pts[2], &pts[1], 0.0, 0.0, 0, 1).unwrap();
        assert_eq!(grid.at(2, 1), direct);
    }
}
