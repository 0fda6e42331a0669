//! C ABI over `photonloc`.
//!
//! Handles are opaque and owned by the caller; every `*_new`/`*_load` has a
//! matching `*_free`. Functions return a [`PlStatus`]; on failure the message
//! is kept per thread and read with [`pl_last_error_message`]. Array outputs
//! go into caller buffers whose length is checked before writing.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use photonloc::fock::{norm_components, ModeKey, PhotonState};
use photonloc::lattice::{build_k_lattice, conjugate_r_grid, LatticeSpec, UnitSystem};
use photonloc::numeric::RVec3;
use photonloc::polarization::{ChiGauge, Helicity};
use photonloc::wavefunction::{density, one_photon_wavefunction, two_mode_closed_form, two_photon_amplitude, DensityKind};
use photonloc::Error;

/// Result code of every fallible call; `PL_STATUS_OK` is zero.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    SingularPoint = 4,
    ModeNotOnLattice = 5,
    MissingSector = 6,
    NotApplicable = 7,
    StateFile = 8,
    Io = 9,
    Parse = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlDensityKind {
    LandauPeierls = 0,
    Biorthonormal = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlNormComponents {
    pub vacuum: f64,
    pub one: f64,
    pub two: f64,
}

/// Opaque lattice handle.
pub struct PlLattice {
    spec: LatticeSpec,
}

/// Opaque state handle.
pub struct PlState {
    state: PhotonState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> PlStatus {
    match e {
        Error::Config(_) | Error::EmptySamples | Error::OracleTooLarge(_) => PlStatus::Config,
        Error::SingularPoint(..) => PlStatus::SingularPoint,
        Error::ModeNotOnLattice { .. } => PlStatus::ModeNotOnLattice,
        Error::MissingSector(_) => PlStatus::MissingSector,
        Error::NotApplicable(_) => PlStatus::NotApplicable,
        Error::StateFile { .. } | Error::InvalidEntry { .. } => PlStatus::StateFile,
        Error::Io(_) => PlStatus::Io,
        Error::Json(_) => PlStatus::Parse,
    }
}

struct Fail(PlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type Step<T> = std::result::Result<T, Fail>;

fn guard<F: FnOnce() -> Step<()>>(f: F) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PlStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Step<&'a T> {
    // SAFETY: caller guarantees a non-null pointer refers to a live object.
    unsafe { p.as_ref() }.ok_or_else(|| Fail(PlStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Step<&'a mut T> {
    // SAFETY: as above, with exclusive access.
    unsafe { p.as_mut() }.ok_or_else(|| Fail(PlStatus::NullPointer, format!("{what} is null")))
}

fn out_slice<'a>(out: *mut f64, len: usize, needed: usize) -> Step<&'a mut [f64]> {
    if out.is_null() {
        return Err(Fail(PlStatus::NullPointer, "output buffer is null".into()));
    }
    if len < needed {
        return Err(Fail(PlStatus::BufferTooSmall, format!("buffer holds {len} doubles, {needed} needed")));
    }
    // SAFETY: caller guarantees `out` points to `len` writable doubles.
    Ok(unsafe { std::slice::from_raw_parts_mut(out, needed) })
}

fn c_str<'a>(s: *const c_char, what: &str) -> Step<&'a str> {
    if s.is_null() {
        return Err(Fail(PlStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|e| Fail(PlStatus::InvalidArgument, format!("{what} is not UTF-8: {e}")))
}

fn helicity(v: i32) -> Step<Helicity> {
    Helicity::from_i64(v as i64).ok_or_else(|| Fail(PlStatus::InvalidArgument, format!("helicity must be +1 or -1, got {v}")))
}

fn mode3(n: *const i32, what: &str) -> Step<[i32; 3]> {
    if n.is_null() {
        return Err(Fail(PlStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller passes three ints.
    let s = unsafe { std::slice::from_raw_parts(n, 3) };
    Ok([s[0], s[1], s[2]])
}

fn vec3(r: *const f64, what: &str) -> Step<RVec3> {
    if r.is_null() {
        return Err(Fail(PlStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller passes three doubles.
    let s = unsafe { std::slice::from_raw_parts(r, 3) };
    Ok(RVec3::new(s[0], s[1], s[2]))
}

fn store<T>(out: *mut *mut T, value: T) -> Step<()> {
    let slot = non_null_mut(out, "output handle")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to `len`) and returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn pl_lattice_new(box_l: f64, n: usize, exclude_z_axis: bool, out: *mut *mut PlLattice) -> PlStatus {
    guard(|| {
        let spec = LatticeSpec {
            box_l,
            n,
            exclude_z_axis,
        };
        spec.validate()?;
        store(out, PlLattice { spec })
    })
}

/// # Safety
/// `lattice` must be null or a handle from `pl_lattice_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pl_lattice_free(lattice: *mut PlLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Number of nonzero wave vectors.
///
/// # Safety
/// `lattice` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_lattice_mode_count(lattice: *const PlLattice, out: *mut usize) -> PlStatus {
    guard(|| {
        let l = non_null(lattice, "lattice")?;
        *non_null_mut(out, "out")? = build_k_lattice(&l.spec)?.len();
        Ok(())
    })
}

/// Volume `L³` and number of conjugate grid points `N³`.
///
/// # Safety
/// `lattice` must be a live handle; outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pl_lattice_geometry(lattice: *const PlLattice, volume: *mut f64, points: *mut usize) -> PlStatus {
    guard(|| {
        let l = non_null(lattice, "lattice")?;
        *non_null_mut(volume, "volume")? = l.spec.volume();
        *non_null_mut(points, "points")? = l.spec.point_count();
        Ok(())
    })
}

/// Writes the conjugate grid as `x, y, z` triples (`3·N³` doubles).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_lattice_grid(lattice: *const PlLattice, out: *mut f64, len: usize) -> PlStatus {
    guard(|| {
        let l = non_null(lattice, "lattice")?;
        let grid = conjugate_r_grid(&l.spec)?;
        let buf = out_slice(out, len, 3 * grid.len())?;
        for (chunk, p) in buf.chunks_exact_mut(3).zip(&grid.points) {
            chunk.copy_from_slice(p.r.as_slice());
        }
        Ok(())
    })
}

/// Empty state (all coefficients zero) on a copy of `lattice`.
///
/// # Safety
/// `lattice` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_state_new(lattice: *const PlLattice, hbar: f64, c: f64, eps0: f64, out: *mut *mut PlState) -> PlStatus {
    guard(|| {
        let l = non_null(lattice, "lattice")?;
        let units = UnitSystem { hbar, c, eps0 };
        units.validate()?;
        store(out, PlState {
            state: PhotonState::new(units, l.spec),
        })
    })
}

/// Parses a state document.
///
/// # Safety
/// `json` must be NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_state_from_json(json: *const c_char, out: *mut *mut PlState) -> PlStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        store(out, PlState {
            state: PhotonState::from_json(text)?,
        })
    })
}

/// Loads a state file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_state_load(path: *const c_char, out: *mut *mut PlState) -> PlStatus {
    guard(|| {
        let p = c_str(path, "path")?;
        store(out, PlState {
            state: photonloc::fock::load_state(Path::new(p))?,
        })
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pl_state_free(state: *mut PlState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Canonical JSON of the state. Writes at most `len` bytes including the
/// terminator and stores the full length (without terminator) in `needed`;
/// returns `BufferTooSmall` when truncated.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes; `needed` valid.
#[no_mangle]
pub unsafe extern "C" fn pl_state_to_json(state: *const PlState, buf: *mut c_char, len: usize, needed: *mut usize) -> PlStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        let text = s.state.to_json();
        *non_null_mut(needed, "needed")? = text.len();
        if buf.is_null() || len <= text.len() {
            return Err(Fail(PlStatus::BufferTooSmall, format!("buffer holds {len} bytes, {} needed", text.len() + 1)));
        }
        ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, buf, text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// Sets `c_{n,λ}`.
///
/// # Safety
/// `state` must be a live handle; `n` points to three ints.
#[no_mangle]
pub unsafe extern "C" fn pl_state_set_one(state: *mut PlState, n: *const i32, helicity_value: i32, re: f64, im: f64) -> PlStatus {
    guard(|| {
        let s = non_null_mut(state, "state")?;
        let key = ModeKey::new(mode3(n, "n")?, helicity(helicity_value)?);
        s.state.set_one(key, photonloc::numeric::c(re, im))?;
        Ok(())
    })
}

/// Sets the two-photon coefficient of the unordered pair `{(a, λa), (b, λb)}`.
///
/// # Safety
/// `state` must be a live handle; `a` and `b` point to three ints each.
#[no_mangle]
pub unsafe extern "C" fn pl_state_set_two(
    state: *mut PlState,
    a: *const i32,
    helicity_a: i32,
    b: *const i32,
    helicity_b: i32,
    re: f64,
    im: f64,
) -> PlStatus {
    guard(|| {
        let s = non_null_mut(state, "state")?;
        let ka = ModeKey::new(mode3(a, "a")?, helicity(helicity_a)?);
        let kb = ModeKey::new(mode3(b, "b")?, helicity(helicity_b)?);
        s.state.set_two(ka, kb, photonloc::numeric::c(re, im))?;
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_state_norm_components(state: *const PlState, out: *mut PlNormComponents) -> PlStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        let n = norm_components(&s.state);
        *non_null_mut(out, "out")? = PlNormComponents {
            vacuum: n.vacuum,
            one: n.one,
            two: n.two,
        };
        Ok(())
    })
}

/// `Ψ^(α)(r, t)` on the conjugate grid: per point `re_x, im_x, re_y, im_y,
/// re_z, im_z` (`6·N³` doubles, grid order of `pl_lattice_grid`).
///
/// # Safety
/// `state` must be a live handle; `out` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_wavefunction(state: *const PlState, alpha: f64, gauge_m: i32, t: f64, out: *mut f64, len: usize) -> PlStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        let sample = one_photon_wavefunction(&s.state, alpha, ChiGauge::new(gauge_m), t)?;
        let buf = out_slice(out, len, 6 * sample.values.len())?;
        for (chunk, v) in buf.chunks_exact_mut(6).zip(&sample.values) {
            for (j, z) in v.iter().enumerate() {
                chunk[2 * j] = z.re;
                chunk[2 * j + 1] = z.im;
            }
        }
        Ok(())
    })
}

/// Density on the conjugate grid (`N³` doubles).
///
/// # Safety
/// `state` must be a live handle; `out` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_density(state: *const PlState, kind: PlDensityKind, gauge_m: i32, t: f64, out: *mut f64, len: usize) -> PlStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        let kind = match kind {
            PlDensityKind::LandauPeierls => DensityKind::LandauPeierls,
            PlDensityKind::Biorthonormal => DensityKind::Biorthonormal,
        };
        let profile = density(&s.state, kind, ChiGauge::new(gauge_m), t)?;
        out_slice(out, len, profile.values.len())?.copy_from_slice(&profile.values);
        Ok(())
    })
}

/// Closed-form two-mode density for parallel lattice modes `n1`, `n2`.
///
/// # Safety
/// `lattice` must be a live handle; `n1`, `n2` point to three ints, `r` to
/// three doubles; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pl_two_mode_closed_form(
    lattice: *const PlLattice,
    n1: *const i32,
    n2: *const i32,
    r: *const f64,
    t: f64,
    c: f64,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let l = non_null(lattice, "lattice")?;
        let k1 = l.spec.mode(mode3(n1, "n1")?)?;
        let k2 = l.spec.mode(mode3(n2, "n2")?)?;
        *non_null_mut(out, "out")? = two_mode_closed_form(&k1, &k2, &vec3(r, "r")?, t, c, l.spec.volume())?;
        Ok(())
    })
}

/// `Ψ_{i,j}^(α)(r, r′, t, t′)` as `(re, im)`.
///
/// # Safety
/// `state` must be a live handle; `r`, `r2` point to three doubles; `out`
/// to two writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_two_photon_amplitude(
    state: *const PlState,
    alpha: f64,
    gauge_m: i32,
    r: *const f64,
    r2: *const f64,
    t: f64,
    t2: f64,
    i: usize,
    j: usize,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let s = non_null(state, "state")?;
        if i > 2 || j > 2 {
            return Err(Fail(PlStatus::InvalidArgument, format!("component indices must be 0..=2, got ({i}, {j})")));
        }
        let z = two_photon_amplitude(&s.state, alpha, ChiGauge::new(gauge_m), &vec3(r, "r")?, &vec3(r2, "r2")?, t, t2, i, j)?;
        out_slice(out, 2, 2)?.copy_from_slice(&[z.re, z.im]);
        Ok(())
    })
}
