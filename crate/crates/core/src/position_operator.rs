//! The k-space photon position operator
//!
//! ```text
//! r̂^(α,χ) = i∇ − iα k/k² + k×S/k² − (k·S/k²)(φ̂ cotθ + k∇χ)
//! ```
//!
//! applied to vector fields of continuous `k`. The gradient is taken by
//! central differences with step `h`; every other term is evaluated exactly.
//! This operator equals `D k^α i∇ k^(−α) D⁻¹` with
//! `D = exp(−iS·k̂χ) exp(−iS₃φ) exp(−iS₂θ)`, so its components commute away
//! from the z-axis and `e_{k,λ}^(χ) k^α exp(−ik·r₁)` is an eigenvector with
//! eigenvalue `r₁`.
//!
//! The residual sweeps run as ordered parallel maps followed by a
//! sequential reduction, so results do not depend on the worker count.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{build_k_lattice, KMode, LatticeSpec};
use crate::numeric::{c, complexify, cross_rc, dotc, dotu, norm, ordered_map, pairwise_sum, CVec3, RVec3, I};
use crate::polarization::{polarization_at, ChiGauge, Helicity, PoleConvention};

/// A vector field of continuous wave vector.
pub trait TestField: Sync {
    fn eval(&self, k: &RVec3) -> CVec3;
}

impl<F> TestField for F
where
    F: Fn(&RVec3) -> CVec3 + Sync,
{
    fn eval(&self, k: &RVec3) -> CVec3 {
        self(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorVariant {
    /// All four terms.
    Full,
    /// First three terms only; components do not commute.
    Pryce,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorParams {
    pub alpha: f64,
    pub gauge: ChiGauge,
    /// Central-difference step, in absolute wave-vector units.
    pub h: f64,
    pub variant: OperatorVariant,
}

impl OperatorParams {
    pub fn new(alpha: f64, gauge: ChiGauge, h: f64) -> Self {
        Self {
            alpha,
            gauge,
            h,
            variant: OperatorVariant::Full,
        }
    }

    /// Step given as a fraction of the lattice spacing `2π/L`.
    pub fn on_lattice(spec: &LatticeSpec, alpha: f64, gauge: ChiGauge, h_rel: f64) -> Self {
        Self::new(alpha, gauge, h_rel * spec.dk())
    }

    pub fn pryce(mut self) -> Self {
        self.variant = OperatorVariant::Pryce;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Config(format!("finite-difference step must be > 0, got {}", self.h)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Config("alpha must be finite".into()));
        }
        Ok(())
    }
}

/// Sup-norm diagnostic of an operator identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub sup_norm: f64,
    pub sample_count: usize,
    pub worst_mode: Option<KMode>,
}

impl Residual {
    fn from_samples(samples: &[(f64, Option<KMode>)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut best = (f64::NEG_INFINITY, None);
        for &(v, m) in samples {
            // NaN propagates as a failure rather than being skipped
            if v.is_nan() || v > best.0 {
                best = (v, m);
                if v.is_nan() {
                    break;
                }
            }
        }
        Ok(Self {
            sup_norm: best.0,
            sample_count: samples.len(),
            worst_mode: best.1,
        })
    }

    pub fn scalar(value: f64, sample_count: usize) -> Self {
        Self {
            sup_norm: value,
            sample_count,
            worst_mode: None,
        }
    }
}

fn check_regular(k: &RVec3, margin: f64) -> Result<()> {
    if k.norm() <= margin {
        return Err(Error::SingularPoint(k[0], k[1], k[2], "k = 0"));
    }
    if k[0].hypot(k[1]) <= margin {
        return Err(Error::SingularPoint(k[0], k[1], k[2], "on the z-axis"));
    }
    Ok(())
}

/// Coefficient vector `φ̂ cotθ + k∇χ = (k_z + m k)(−k_y, k_x, 0)/ρ²`.
fn gauge_term_direction(k: &RVec3, gauge: ChiGauge) -> RVec3 {
    let rho2 = k[0] * k[0] + k[1] * k[1];
    RVec3::new(-k[1], k[0], 0.0) * ((k[2] + gauge.m as f64 * k.norm()) / rho2)
}

/// Non-derivative part of component `j` applied to `v`.
fn multiplicative_part(params: &OperatorParams, k: &RVec3, j: usize, v: &CVec3) -> CVec3 {
    let k2 = k.norm_squared();
    let kc = complexify(k);
    // −iα k_j/k² v
    let mut out = v * c(0.0, -params.alpha * k[j] / k2);
    // (k×S)_j v = −i e_j (k·v) + i k v_j
    let mut cross = kc * (I * v[j]);
    cross[j] -= I * dotu(&kc, v);
    out += cross / c(k2, 0.0);
    if params.variant == OperatorVariant::Full {
        // (k·S) v = i k × v
        let w = gauge_term_direction(k, params.gauge);
        out -= cross_rc(k, v) * (I * w[j] / k2);
    }
    out
}

fn central_difference<F: TestField + ?Sized>(f: &F, k: &RVec3, j: usize, h: f64) -> CVec3 {
    let mut dk = RVec3::zeros();
    dk[j] = h;
    (f.eval(&(k + dk)) - f.eval(&(k - dk))) / c(2.0 * h, 0.0)
}

/// Component `j` of `r̂ f` at `k`, without singular-point checks.
pub fn apply_component<F: TestField + ?Sized>(params: &OperatorParams, f: &F, k: &RVec3, j: usize) -> CVec3 {
    let grad = central_difference(f, k, j, params.h);
    grad * I + multiplicative_part(params, k, j, &f.eval(k))
}

/// `(r̂_x f, r̂_y f, r̂_z f)` at `k`.
pub fn apply_position_operator<F: TestField + ?Sized>(
    params: &OperatorParams,
    f: &F,
    k: &RVec3,
) -> Result<[CVec3; 3]> {
    params.validate()?;
    check_regular(k, params.h)?;
    let fk = f.eval(k);
    Ok(std::array::from_fn(|j| {
        central_difference(f, k, j, params.h) * I + multiplicative_part(params, k, j, &fk)
    }))
}

/// Eigenvector `ψ^(α)_{r₁,λ}(k, t) = k^α e_{k,λ}^(χ) exp(−ik·r₁ + ikct)/√V`.
#[derive(Clone, Copy, Debug)]
pub struct PositionEigenvector {
    pub alpha: f64,
    pub gauge: ChiGauge,
    pub helicity: Helicity,
    pub r1: RVec3,
    pub t: f64,
    pub c_light: f64,
    pub volume: f64,
}

impl PositionEigenvector {
    pub fn new(alpha: f64, gauge: ChiGauge, helicity: Helicity, r1: RVec3, volume: f64) -> Self {
        Self {
            alpha,
            gauge,
            helicity,
            r1,
            t: 0.0,
            c_light: 1.0,
            volume,
        }
    }
}

impl TestField for PositionEigenvector {
    fn eval(&self, k: &RVec3) -> CVec3 {
        let kk = k.norm();
        let e = polarization_at(k, self.helicity, self.gauge, PoleConvention::Continuity)
            .unwrap_or_else(|_| CVec3::from_element(c(f64::NAN, f64::NAN)));
        let phase = Complex64::from_polar(
            kk.powf(self.alpha) / self.volume.sqrt(),
            -k.dot(&self.r1) + kk * self.c_light * self.t,
        );
        e * phase
    }
}

/// Gaussian envelope times a helicity superposition with `χ = 0` frames.
#[derive(Clone, Copy, Debug)]
pub struct GaussianTransverse {
    pub center: RVec3,
    pub width: f64,
    pub amp_plus: Complex64,
    pub amp_minus: Complex64,
}

impl TestField for GaussianTransverse {
    fn eval(&self, k: &RVec3) -> CVec3 {
        let env = (-(k - self.center).norm_squared() / (2.0 * self.width * self.width)).exp();
        let g = ChiGauge::default();
        let ep = polarization_at(k, Helicity::Plus, g, PoleConvention::Continuity);
        let em = polarization_at(k, Helicity::Minus, g, PoleConvention::Continuity);
        match (ep, em) {
            (Ok(ep), Ok(em)) => (ep * self.amp_plus + em * self.amp_minus) * c(env, 0.0),
            _ => CVec3::zeros(),
        }
    }
}

/// Gaussian envelope times a fixed (generally non-transverse) vector.
#[derive(Clone, Copy, Debug)]
pub struct GaussianVector {
    pub center: RVec3,
    pub width: f64,
    pub polarization: CVec3,
}

impl TestField for GaussianVector {
    fn eval(&self, k: &RVec3) -> CVec3 {
        let env = (-(k - self.center).norm_squared() / (2.0 * self.width * self.width)).exp();
        self.polarization * c(env, 0.0)
    }
}

/// Lattice modes with `|cosθ| ≤ max_abs_cos` (poles always dropped).
pub fn off_axis_modes(spec: &LatticeSpec, max_abs_cos: f64) -> Result<Vec<KMode>> {
    Ok(build_k_lattice(spec)?
        .into_iter()
        .filter(|m| !m.on_pole() && m.theta.cos().abs() <= max_abs_cos)
        .collect())
}

fn check_samples(modes: &[KMode], margin: f64) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::EmptySamples);
    }
    for m in modes {
        check_regular(&m.k_vec, margin)?;
    }
    Ok(())
}

fn triple_norm(v: &[CVec3; 3]) -> f64 {
    v.iter().map(|x| norm(x).powi(2)).sum::<f64>().sqrt()
}

/// `sup |r̂ψ − r₁ψ| / |ψ|` over `modes` for the matching eigenvector at `t = 0`.
pub fn eigen_residual(
    params: &OperatorParams,
    r1: RVec3,
    lambda: Helicity,
    modes: &[KMode],
    volume: f64,
) -> Result<Residual> {
    let psi = PositionEigenvector::new(params.alpha, params.gauge, lambda, r1, volume);
    eigen_residual_of(params, &psi, r1, modes)
}

/// Eigenvalue defect of an arbitrary field against the expected eigenvalue `r1`.
pub fn eigen_residual_of<F: TestField>(
    params: &OperatorParams,
    psi: &F,
    r1: RVec3,
    modes: &[KMode],
) -> Result<Residual> {
    params.validate()?;
    check_samples(modes, params.h)?;
    let samples = ordered_map(modes, |m| {
        let out = apply_position_operator(params, psi, &m.k_vec).expect("checked regular");
        let v = psi.eval(&m.k_vec);
        let diff: [CVec3; 3] = std::array::from_fn(|j| out[j] - v * c(r1[j], 0.0));
        (triple_norm(&diff) / norm(&v), Some(*m))
    });
    Residual::from_samples(&samples)
}

/// `sup |r̂_i(r̂_j f) − r̂_j(r̂_i f)|` by nested central differences.
pub fn commutator_residual<F: TestField>(
    params: &OperatorParams,
    i: usize,
    j: usize,
    f: &F,
    modes: &[KMode],
) -> Result<Residual> {
    params.validate()?;
    if i == j || i > 2 || j > 2 {
        return Err(Error::Config(format!("commutator needs distinct components, got ({i}, {j})")));
    }
    check_samples(modes, 2.0 * params.h)?;
    let rj_f = |k: &RVec3| apply_component(params, f, k, j);
    let ri_f = |k: &RVec3| apply_component(params, f, k, i);
    let samples = ordered_map(modes, |m| {
        let a = apply_component(params, &rj_f, &m.k_vec, i);
        let b = apply_component(params, &ri_f, &m.k_vec, j);
        (norm(&(a - b)), Some(*m))
    });
    Residual::from_samples(&samples)
}

/// Largest commutator residual over the three component pairs.
pub fn max_commutator_residual<F: TestField>(params: &OperatorParams, f: &F, modes: &[KMode]) -> Result<Residual> {
    let mut worst: Option<Residual> = None;
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let r = commutator_residual(params, i, j, f, modes)?;
        if worst.is_none_or(|w| r.sup_norm > w.sup_norm) {
            worst = Some(r);
        }
    }
    Ok(worst.expect("three pairs"))
}

/// Plain lattice inner product `Σ_modes f*·g`.
pub fn lattice_inner<F: TestField, G: TestField>(f: &F, g: &G, modes: &[KMode]) -> Complex64 {
    let terms = ordered_map(modes, |m| dotc(&f.eval(&m.k_vec), &g.eval(&m.k_vec)));
    pairwise_sum(&terms)
}

/// Per-component defect `⟨f, r̂^(α) g⟩ − ⟨r̂^(−α) f, g⟩` with the plain lattice sum.
pub fn adjoint_defect<F: TestField, G: TestField>(
    params: &OperatorParams,
    f: &F,
    g: &G,
    modes: &[KMode],
) -> Result<[Complex64; 3]> {
    params.validate()?;
    check_samples(modes, params.h)?;
    let adj = params.with_alpha(-params.alpha);
    let terms = ordered_map(modes, |m| {
        let k = &m.k_vec;
        let rg = apply_position_operator(params, g, k).expect("checked regular");
        let rf = apply_position_operator(&adj, f, k).expect("checked regular");
        let (fk, gk) = (f.eval(k), g.eval(k));
        let d: [Complex64; 3] = std::array::from_fn(|j| dotc(&fk, &rg[j]) - dotc(&rf[j], &gk));
        d
    });
    Ok(std::array::from_fn(|j| {
        let col: Vec<Complex64> = terms.iter().map(|t| t[j]).collect();
        pairwise_sum(&col)
    }))
}

/// `max_j |⟨f, r̂^(α)_j g⟩ − ⟨r̂^(−α)_j f, g⟩| / (‖f‖ ‖g‖)`.
pub fn adjoint_residual<F: TestField, G: TestField>(
    params: &OperatorParams,
    f: &F,
    g: &G,
    modes: &[KMode],
) -> Result<Residual> {
    let d = adjoint_defect(params, f, g, modes)?;
    let scale = (lattice_inner(f, f, modes).re * lattice_inner(g, g, modes).re).sqrt();
    let sup = d.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    Ok(Residual::scalar(sup, modes.len()))
}

/// `sup |r̂^(α) f − k^α r̂^(0)(k^(−α) f)| / |f|`.
pub fn similarity_residual<F: TestField>(params: &OperatorParams, f: &F, modes: &[KMode]) -> Result<Residual> {
    params.validate()?;
    check_samples(modes, params.h)?;
    let alpha = params.alpha;
    let base = params.with_alpha(0.0);
    let scaled = |k: &RVec3| f.eval(k) * c(k.norm().powf(-alpha), 0.0);
    let samples = ordered_map(modes, |m| {
        let k = &m.k_vec;
        let direct = apply_position_operator(params, f, k).expect("checked regular");
        let conj = apply_position_operator(&base, &scaled, k).expect("checked regular");
        let w = c(m.k.powf(alpha), 0.0);
        let diff: [CVec3; 3] = std::array::from_fn(|j| direct[j] - conj[j] * w);
        (triple_norm(&diff) / norm(&f.eval(k)), Some(*m))
    });
    Residual::from_samples(&samples)
}

/// `sup |k r̂^(−α)(k⁻¹ f) − r̂^(α) f| / |f|` for the metric `η = k` (use `α = 1/2`).
pub fn metric_residual<F: TestField>(params: &OperatorParams, f: &F, modes: &[KMode]) -> Result<Residual> {
    params.validate()?;
    check_samples(modes, params.h)?;
    let adj = params.with_alpha(-params.alpha);
    let power = -2.0 * params.alpha;
    let scaled = |k: &RVec3| f.eval(k) * c(k.norm().powf(power), 0.0);
    let samples = ordered_map(modes, |m| {
        let k = &m.k_vec;
        let direct = apply_position_operator(params, f, k).expect("checked regular");
        let via = apply_position_operator(&adj, &scaled, k).expect("checked regular");
        let w = c(m.k.powf(-power), 0.0);
        let diff: [CVec3; 3] = std::array::from_fn(|j| via[j] * w - direct[j]);
        (triple_norm(&diff) / norm(&f.eval(k)), Some(*m))
    });
    Residual::from_samples(&samples)
}

/// `J_z f = −i(k × ∇_k)_z f + S_z f` in units of ħ.
pub fn jz_apply<F: TestField + ?Sized>(f: &F, k: &RVec3, h: f64) -> Result<CVec3> {
    check_regular(k, h)?;
    Ok(jz_unchecked(f, k, h))
}

fn jz_unchecked<F: TestField + ?Sized>(f: &F, k: &RVec3, h: f64) -> CVec3 {
    let dx = central_difference(f, k, 0, h);
    let dy = central_difference(f, k, 1, h);
    let orbital = (dy * c(k[0], 0.0) - dx * c(k[1], 0.0)) * (-I);
    let spin = cross_rc(&RVec3::z(), &f.eval(k)) * I;
    orbital + spin
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JzProbe {
    pub gauge_m: i32,
    pub helicity: i8,
    /// Least-squares eigenvalue estimate (real part).
    pub mu: f64,
    pub mu_imag: f64,
    /// `sup |J_z ψ − μ ψ| / |ψ|`.
    pub fit_residual: f64,
    pub nearest_integer: i64,
}

impl JzProbe {
    pub fn integer_defect(&self) -> f64 {
        (self.mu - self.nearest_integer as f64).abs()
    }
}

/// Fits `J_z ψ ≈ μ ψ` for `ψ = ψ^(α)_{0,λ}` with `χ = mφ`.
pub fn jz_eigen_probe(gauge: ChiGauge, lambda: Helicity, alpha: f64, h: f64, modes: &[KMode], volume: f64) -> Result<JzProbe> {
    check_samples(modes, h)?;
    let psi = PositionEigenvector::new(alpha, gauge, lambda, RVec3::zeros(), volume);
    let pairs = ordered_map(modes, |m| (psi.eval(&m.k_vec), jz_unchecked(&psi, &m.k_vec, h)));
    let num: Vec<Complex64> = pairs.iter().map(|(v, jv)| dotc(v, jv)).collect();
    let den: Vec<f64> = pairs.iter().map(|(v, _)| norm(v).powi(2)).collect();
    let mu = pairwise_sum(&num) / pairwise_sum(&den);
    let fit_residual = pairs
        .iter()
        .map(|(v, jv)| norm(&(jv - v * mu)) / norm(v))
        .fold(0.0, f64::max);
    Ok(JzProbe {
        gauge_m: gauge.m,
        helicity: lambda.as_i8(),
        mu: mu.re,
        mu_imag: mu.im,
        fit_residual,
        nearest_integer: mu.re.round() as i64,
    })
}

/// `sup |r̂_j(J_z f) − J_z(r̂_j f)|`.
pub fn jz_commutator_residual<F: TestField>(
    params: &OperatorParams,
    j: usize,
    f: &F,
    modes: &[KMode],
) -> Result<Residual> {
    params.validate()?;
    check_samples(modes, 2.0 * params.h)?;
    let h = params.h;
    let jz_f = |k: &RVec3| jz_unchecked(f, k, h);
    let rj_f = |k: &RVec3| apply_component(params, f, k, j);
    let samples = ordered_map(modes, |m| {
        let a = apply_component(params, &jz_f, &m.k_vec, j);
        let b = jz_unchecked(&rj_f, &m.k_vec, h);
        (norm(&(a - b)), Some(*m))
    });
    Residual::from_samples(&samples)
}
