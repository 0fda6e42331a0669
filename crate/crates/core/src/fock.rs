//! Coefficient model of a state truncated at two photons,
//!
//! ```text
//! |Ψ⟩ = c₀|0⟩ + Σ_p c_p a†_p|0⟩ + (1/2!) Σ_{p,q} √N_pq c_pq a†_p a†_q |0⟩,
//! N_pq = 1 + δ_pq,
//! ```
//!
//! where `p = (k, λ)`. Two-photon coefficients are symmetric and stored once
//! per unordered pair with the smaller key first.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{KMode, LatticeSpec, UnitSystem};
use crate::polarization::Helicity;

/// Single-photon label `(n, λ)`; ordered by `n` then helicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeKey {
    pub n: [i32; 3],
    pub helicity: Helicity,
}

impl ModeKey {
    pub fn new(n: [i32; 3], helicity: Helicity) -> Self {
        Self { n, helicity }
    }
}

fn canonical_pair(a: ModeKey, b: ModeKey) -> (ModeKey, ModeKey) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhotonState {
    pub units: UnitSystem,
    pub lattice: LatticeSpec,
    pub c0: Complex64,
    c1: BTreeMap<ModeKey, Complex64>,
    c2: BTreeMap<(ModeKey, ModeKey), Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormComponents {
    pub vacuum: f64,
    pub one: f64,
    pub two: f64,
}

impl NormComponents {
    pub fn total(&self) -> f64 {
        self.vacuum + self.one + self.two
    }
}

impl PhotonState {
    pub fn new(units: UnitSystem, lattice: LatticeSpec) -> Self {
        Self {
            units,
            lattice,
            c0: Complex64::new(0.0, 0.0),
            c1: BTreeMap::new(),
            c2: BTreeMap::new(),
        }
    }

    pub fn vacuum(units: UnitSystem, lattice: LatticeSpec) -> Self {
        let mut s = Self::new(units, lattice);
        s.c0 = Complex64::new(1.0, 0.0);
        s
    }

    fn check_key(&self, key: &ModeKey, location: &str) -> Result<()> {
        if self.lattice.contains(key.n) {
            Ok(())
        } else {
            Err(Error::ModeNotOnLattice {
                n: key.n,
                lattice_n: self.lattice.n,
                context: location.to_string(),
            })
        }
    }

    /// Sets `c_{k,λ}`, replacing any previous value.
    pub fn set_one(&mut self, key: ModeKey, value: Complex64) -> Result<()> {
        self.check_key(&key, "one-photon coefficient")?;
        self.c1.insert(key, value);
        Ok(())
    }

    /// Sets `c_{p;q} = c_{q;p}`, replacing any previous value.
    pub fn set_two(&mut self, a: ModeKey, b: ModeKey, value: Complex64) -> Result<()> {
        self.check_key(&a, "two-photon coefficient")?;
        self.check_key(&b, "two-photon coefficient")?;
        self.c2.insert(canonical_pair(a, b), value);
        Ok(())
    }

    pub fn one(&self, key: &ModeKey) -> Complex64 {
        self.c1.get(key).copied().unwrap_or_default()
    }

    pub fn two(&self, a: &ModeKey, b: &ModeKey) -> Complex64 {
        self.c2.get(&canonical_pair(*a, *b)).copied().unwrap_or_default()
    }

    pub fn one_photon(&self) -> impl Iterator<Item = (&ModeKey, &Complex64)> {
        self.c1.iter()
    }

    /// Unordered pairs, smaller key first.
    pub fn two_photon(&self) -> impl Iterator<Item = (&(ModeKey, ModeKey), &Complex64)> {
        self.c2.iter()
    }

    pub fn has_one_photon(&self) -> bool {
        !self.c1.is_empty()
    }

    pub fn has_two_photon(&self) -> bool {
        !self.c2.is_empty()
    }

    pub fn mode(&self, key: &ModeKey) -> Result<KMode> {
        self.lattice.mode(key.n)
    }

    /// Every distinct wave vector referenced by the state.
    pub fn referenced_modes(&self) -> BTreeSet<[i32; 3]> {
        let mut out: BTreeSet<[i32; 3]> = self.c1.keys().map(|k| k.n).collect();
        for (a, b) in self.c2.keys() {
            out.insert(a.n);
            out.insert(b.n);
        }
        out
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.c0 *= s;
        out.c1.values_mut().for_each(|v| *v *= s);
        out.c2.values_mut().for_each(|v| *v *= s);
        out
    }
}

/// `(|c₀|², Σ|c_p|², Σ_{p≤q}|c_pq|²)`.
///
/// The `√N_pq` and `1/2!` factors combine so that every unordered pair,
/// doubly occupied or not, contributes `|c_pq|²` to `⟨Ψ|Ψ⟩`.
pub fn norm_components(state: &PhotonState) -> NormComponents {
    NormComponents {
        vacuum: state.c0.norm_sqr(),
        one: state.c1.values().map(|z| z.norm_sqr()).sum(),
        two: state.c2.values().map(|z| z.norm_sqr()).sum(),
    }
}

/// Vector in the occupation-number basis of a finite label set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FockVector {
    amps: BTreeMap<Vec<u8>, Complex64>,
    labels: usize,
}

impl FockVector {
    pub fn vacuum(labels: usize) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(vec![0u8; labels], Complex64::new(1.0, 0.0));
        Self { amps, labels }
    }

    pub fn zero(labels: usize) -> Self {
        Self {
            amps: BTreeMap::new(),
            labels,
        }
    }

    /// `a†_label` with `a†|n⟩ = √(n+1)|n+1⟩`.
    pub fn create(&self, label: usize) -> Self {
        let mut out = Self::zero(self.labels);
        for (occ, amp) in &self.amps {
            let mut next = occ.clone();
            next[label] += 1;
            let factor = f64::from(next[label]).sqrt();
            *out.amps.entry(next).or_default() += amp * factor;
        }
        out
    }

    /// `a_label` with `a|n⟩ = √n|n−1⟩`.
    pub fn annihilate(&self, label: usize) -> Self {
        let mut out = Self::zero(self.labels);
        for (occ, amp) in &self.amps {
            if occ[label] == 0 {
                continue;
            }
            let factor = f64::from(occ[label]).sqrt();
            let mut next = occ.clone();
            next[label] -= 1;
            *out.amps.entry(next).or_default() += amp * factor;
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, s: Complex64) {
        for (occ, amp) in &other.amps {
            *self.amps.entry(occ.clone()).or_default() += amp * s;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .filter_map(|(occ, a)| other.amps.get(occ).map(|b| a.conj() * b))
            .sum()
    }

    pub fn vacuum_amplitude(&self) -> Complex64 {
        self.amps.get(&vec![0u8; self.labels]).copied().unwrap_or_default()
    }
}

/// Largest number of distinct wave vectors the brute-force oracle accepts.
pub const ORACLE_MAX_MODES: usize = 3;

/// Label set `(n, λ)` over the referenced wave vectors, both helicities.
pub fn oracle_labels<'a, I>(states: I) -> Result<Vec<ModeKey>>
where
    I: IntoIterator<Item = &'a PhotonState>,
{
    let mut modes = BTreeSet::new();
    for s in states {
        modes.extend(s.referenced_modes());
    }
    if modes.len() > ORACLE_MAX_MODES {
        return Err(Error::OracleTooLarge(format!(
            "{} distinct modes referenced, limit is {ORACLE_MAX_MODES}",
            modes.len()
        )));
    }
    Ok(modes
        .into_iter()
        .flat_map(|n| [ModeKey::new(n, Helicity::Minus), ModeKey::new(n, Helicity::Plus)])
        .collect())
}

/// Builds `|Ψ⟩` by applying creation operators term by term.
pub fn fock_expand(state: &PhotonState, labels: &[ModeKey]) -> Result<FockVector> {
    let index = |k: &ModeKey| {
        labels.iter().position(|l| l == k).ok_or_else(|| Error::ModeNotOnLattice {
            n: k.n,
            lattice_n: state.lattice.n,
            context: "label missing from oracle basis".into(),
        })
    };
    let vac = FockVector::vacuum(labels.len());
    let mut out = FockVector::zero(labels.len());
    out.add_scaled(&vac, state.c0);
    for (k, c) in state.one_photon() {
        out.add_scaled(&vac.create(index(k)?), *c);
    }
    // Ordered double sum over all label pairs with the symmetric coefficient.
    for p in labels {
        for q in labels {
            let c = state.two(p, q);
            if c == Complex64::default() {
                continue;
            }
            let weight = if p == q { 2f64.sqrt() } else { 1.0 } / 2.0;
            let (ip, iq) = (index(p)?, index(q)?);
            out.add_scaled(&vac.create(iq).create(ip), c * weight);
        }
    }
    Ok(out)
}

/// Exact `⟨A|B⟩` in the occupation-number basis; refuses more than
/// [`ORACLE_MAX_MODES`] distinct wave vectors.
pub fn brute_force_inner_product(a: &PhotonState, b: &PhotonState) -> Result<Complex64> {
    let labels = oracle_labels([a, b])?;
    Ok(fock_expand(a, &labels)?.inner(&fock_expand(b, &labels)?))
}

/// Random state with all sectors populated on the given wave vectors.
pub fn random_state<R: Rng>(rng: &mut R, units: UnitSystem, lattice: LatticeSpec, modes: &[[i32; 3]]) -> Result<PhotonState> {
    let draw = |rng: &mut R| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut s = PhotonState::new(units, lattice);
    s.c0 = draw(rng);
    let keys: Vec<ModeKey> = modes
        .iter()
        .flat_map(|&n| Helicity::BOTH.map(|h| ModeKey::new(n, h)))
        .collect();
    for k in &keys {
        if rng.gen_bool(0.8) {
            s.set_one(*k, draw(rng))?;
        }
    }
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i..] {
            if rng.gen_bool(0.6) {
                s.set_two(*a, *b, draw(rng))?;
            }
        }
    }
    Ok(s)
}

/// Random one-photon state on `count` distinct lattice modes with `Σ|c|² = 1`.
pub fn random_one_photon<R: Rng>(rng: &mut R, units: UnitSystem, lattice: LatticeSpec, count: usize) -> Result<PhotonState> {
    let modes = crate::lattice::build_k_lattice(&lattice)?;
    if count == 0 || count > modes.len() {
        return Err(Error::Config(format!("cannot pick {count} of {} modes", modes.len())));
    }
    let picks = rand::seq::index::sample(rng, modes.len(), count);
    let mut s = PhotonState::new(units, lattice);
    let mut total = 0.0;
    let mut entries = Vec::new();
    for i in picks.into_iter() {
        let lambda = if rng.gen_bool(0.5) { Helicity::Plus } else { Helicity::Minus };
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        total += z.norm_sqr();
        entries.push((ModeKey::new(modes[i].n, lambda), z));
    }
    let scale = total.sqrt().recip();
    for (k, z) in entries {
        s.set_one(k, z * scale)?;
    }
    Ok(s)
}

// ----------------------------------------------------------------------------
// State files

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OneEntry {
    n: [i32; 3],
    helicity: Helicity,
    c: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoEntry {
    a: ModeKey,
    b: ModeKey,
    c: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    units: UnitSystem,
    lattice: LatticeSpec,
    c0: [f64; 2],
    one_photon: Vec<OneEntry>,
    two_photon: Vec<TwoEntry>,
}

fn to_complex(v: [f64; 2], location: &str) -> Result<Complex64> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(Complex64::new(v[0], v[1]))
    } else {
        Err(Error::InvalidEntry {
            location: location.into(),
            message: "non-finite coefficient".into(),
        })
    }
}

fn entry_error(location: String, e: Error) -> Error {
    Error::InvalidEntry {
        location,
        message: e.to_string(),
    }
}

impl PhotonState {
    /// Parses the structured-text state document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        file.units.validate()?;
        file.lattice.validate()?;
        let mut s = PhotonState::new(file.units, file.lattice);
        s.c0 = to_complex(file.c0, "c0")?;
        for (i, e) in file.one_photon.iter().enumerate() {
            let loc = format!("one_photon[{i}]");
            let key = ModeKey::new(e.n, e.helicity);
            if s.c1.contains_key(&key) {
                return Err(Error::InvalidEntry {
                    location: loc,
                    message: format!("duplicate entry for n = {:?}, helicity {}", e.n, e.helicity),
                });
            }
            let value = to_complex(e.c, &loc)?;
            s.set_one(key, value).map_err(|err| entry_error(loc, err))?;
        }
        for (i, e) in file.two_photon.iter().enumerate() {
            let loc = format!("two_photon[{i}]");
            if s.c2.contains_key(&canonical_pair(e.a, e.b)) {
                return Err(Error::InvalidEntry {
                    location: loc,
                    message: format!(
                        "duplicate pair {{({:?}, {}), ({:?}, {})}}",
                        e.a.n, e.a.helicity, e.b.n, e.b.helicity
                    ),
                });
            }
            let value = to_complex(e.c, &loc)?;
            s.set_two(e.a, e.b, value).map_err(|err| entry_error(loc, err))?;
        }
        Ok(s)
    }

    /// Canonical pretty-printed form: fixed key order, entries sorted,
    /// shortest round-trip decimal for every float.
    pub fn to_json(&self) -> String {
        let file = StateFile {
            units: self.units,
            lattice: self.lattice,
            c0: [self.c0.re, self.c0.im],
            one_photon: self
                .c1
                .iter()
                .map(|(k, c)| OneEntry {
                    n: k.n,
                    helicity: k.helicity,
                    c: [c.re, c.im],
                })
                .collect(),
            two_photon: self
                .c2
                .iter()
                .map(|((a, b), c)| TwoEntry {
                    a: *a,
                    b: *b,
                    c: [c.re, c.im],
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("state serializes");
        text.push('\n');
        text
    }
}

pub fn load_state(path: &Path) -> Result<PhotonState> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::StateFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    PhotonState::from_json(&text).map_err(|e| Error::StateFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn save_state(state: &PhotonState, path: &Path) -> Result<()> {
    std::fs::write(path, state.to_json())?;
    Ok(())
}
