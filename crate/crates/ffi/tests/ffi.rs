use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use photonloc::fock::{ModeKey, PhotonState};
use photonloc::lattice::{LatticeSpec, UnitSystem};
use photonloc::numeric::{c, RVec3};
use photonloc::polarization::{ChiGauge, Helicity};
use photonloc::wavefunction::two_photon_amplitude;
use photonloc_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        pl_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

struct Handles {
    lattice: *mut PlLattice,
    state: *mut PlState,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            pl_state_free(self.state);
            pl_lattice_free(self.lattice);
        }
    }
}

fn handles(box_l: f64, n: usize) -> Handles {
    let mut lattice = ptr::null_mut();
    let mut state = ptr::null_mut();
    unsafe {
        assert_eq!(pl_lattice_new(box_l, n, false, &mut lattice), PlStatus::Ok);
        assert_eq!(pl_state_new(lattice, 1.0, 1.0, 1.0, &mut state), PlStatus::Ok);
    }
    Handles { lattice, state }
}

#[test]
fn invalid_lattice_reports_config_error() {
    let mut lattice = ptr::null_mut();
    let status = unsafe { pl_lattice_new(1.0, 3, false, &mut lattice) };
    assert_eq!(status, PlStatus::Config);
    assert!(lattice.is_null());
    assert!(last_error().contains("N must be even"));
    let status = unsafe { pl_lattice_new(1.0, 4, false, ptr::null_mut()) };
    assert_eq!(status, PlStatus::NullPointer);
}

#[test]
fn error_message_truncates_and_reports_length() {
    unsafe { pl_lattice_new(-1.0, 4, false, &mut ptr::null_mut()) };
    let full = last_error();
    let mut small = [0 as std::ffi::c_char; 8];
    let len = unsafe { pl_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(len, full.len());
    let short = unsafe { CStr::from_ptr(small.as_ptr()) }.to_str().unwrap();
    assert_eq!(short, &full[..7]);
    assert_eq!(unsafe { pl_last_error_message(ptr::null_mut(), 0) }, full.len());
}

#[test]
fn lattice_geometry_and_grid() {
    let h = handles(2.0, 4);
    let (mut volume, mut points, mut modes) = (0.0, 0usize, 0usize);
    unsafe {
        assert_eq!(pl_lattice_geometry(h.lattice, &mut volume, &mut points), PlStatus::Ok);
        assert_eq!(pl_lattice_mode_count(h.lattice, &mut modes), PlStatus::Ok);
    }
    assert_eq!((volume, points, modes), (8.0, 64, 63));
    let mut grid = vec![0.0; 3 * 64];
    assert_eq!(unsafe { pl_lattice_grid(h.lattice, grid.as_mut_ptr(), 10) }, PlStatus::BufferTooSmall);
    assert_eq!(unsafe { pl_lattice_grid(h.lattice, grid.as_mut_ptr(), grid.len()) }, PlStatus::Ok);
    assert_eq!(&grid[..6], &[0.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
}

#[test]
fn single_mode_density_and_norm() {
    let h = handles(std::f64::consts::TAU, 4);
    let n = [1, -1, 0];
    unsafe {
        assert_eq!(pl_state_set_one(h.state, n.as_ptr(), -1, 0.6, 0.8), PlStatus::Ok);
        assert_eq!(pl_state_set_one(h.state, [5, 0, 0].as_ptr(), 1, 1.0, 0.0), PlStatus::ModeNotOnLattice);
        assert_eq!(pl_state_set_one(h.state, n.as_ptr(), 0, 1.0, 0.0), PlStatus::InvalidArgument);
        assert_eq!(pl_state_set_two(h.state, n.as_ptr(), 1, n.as_ptr(), 1, 0.5, 0.0), PlStatus::Ok);
    }
    let mut norm = PlNormComponents::default();
    assert_eq!(unsafe { pl_state_norm_components(h.state, &mut norm) }, PlStatus::Ok);
    assert!((norm.one - 1.0).abs() < 1e-15 && (norm.two - 0.25).abs() < 1e-15 && norm.vacuum == 0.0);
    let v = std::f64::consts::TAU.powi(3);
    for kind in [PlDensityKind::LandauPeierls, PlDensityKind::Biorthonormal] {
        let mut d = vec![0.0; 64];
        assert_eq!(unsafe { pl_density(h.state, kind, 1, 0.4, d.as_mut_ptr(), d.len()) }, PlStatus::Ok);
        assert!(d.iter().all(|x| (x - 1.0 / v).abs() < 1e-15));
    }
    let mut psi = vec![0.0; 6 * 64];
    assert_eq!(unsafe { pl_wavefunction(h.state, 0.0, 0, 0.0, psi.as_mut_ptr(), psi.len()) }, PlStatus::Ok);
    let first: f64 = psi[..6].iter().map(|x| x * x).sum();
    assert!((first - 1.0 / v).abs() < 1e-15);
}

#[test]
fn missing_sector_is_reported() {
    let h = handles(1.0, 2);
    let mut d = vec![0.0; 8];
    let status = unsafe { pl_density(h.state, PlDensityKind::LandauPeierls, 0, 0.0, d.as_mut_ptr(), d.len()) };
    assert_eq!(status, PlStatus::MissingSector);
    assert!(last_error().contains("1-photon"));
}

#[test]
fn two_mode_closed_form_refuses_non_parallel() {
    let h = handles(std::f64::consts::TAU, 4);
    let r = [0.3, 0.0, 0.0];
    let mut out = 0.0;
    let status = unsafe { pl_two_mode_closed_form(h.lattice, [-1, 0, 0].as_ptr(), [-2, 0, 0].as_ptr(), r.as_ptr(), 0.0, 1.0, &mut out) };
    assert_eq!(status, PlStatus::Ok);
    let v = std::f64::consts::TAU.powi(3);
    let expected = (2.0 + 3.0 / 2f64.sqrt() * (-0.3f64).cos()) / (2.0 * v);
    assert!((out - expected).abs() < 1e-15);
    let status = unsafe { pl_two_mode_closed_form(h.lattice, [-1, 0, 0].as_ptr(), [0, 1, 0].as_ptr(), r.as_ptr(), 0.0, 1.0, &mut out) };
    assert_eq!(status, PlStatus::NotApplicable);
}

#[test]
fn json_round_trip_and_two_photon_amplitude() {
    let mut s = PhotonState::new(UnitSystem::default(), LatticeSpec::new(3.0, 4));
    let a = ModeKey::new([1, 0, 0], Helicity::Plus);
    let b = ModeKey::new([0, 1, -1], Helicity::Minus);
    s.set_two(a, b, c(0.3, -0.2)).unwrap();
    s.set_two(a, a, c(-0.1, 0.4)).unwrap();
    let json = CString::new(s.to_json()).unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { pl_state_from_json(json.as_ptr(), &mut handle) }, PlStatus::Ok);

    let mut needed = 0usize;
    let mut tiny = [0 as std::ffi::c_char; 4];
    assert_eq!(unsafe { pl_state_to_json(handle, tiny.as_mut_ptr(), tiny.len(), &mut needed) }, PlStatus::BufferTooSmall);
    let mut buf = vec![0 as std::ffi::c_char; needed + 1];
    assert_eq!(unsafe { pl_state_to_json(handle, buf.as_mut_ptr(), buf.len(), &mut needed) }, PlStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), s.to_json());

    let (r, r2) = ([0.2, 0.5, 1.0], [1.5, 0.1, 2.2]);
    let mut out = [0.0; 2];
    let status = unsafe { pl_two_photon_amplitude(handle, 0.5, 1, r.as_ptr(), r2.as_ptr(), 0.3, 0.7, 2, 0, out.as_mut_ptr()) };
    assert_eq!(status, PlStatus::Ok);
    let direct = two_photon_amplitude(&s, 0.5, ChiGauge::new(1), &RVec3::from(r), &RVec3::from(r2), 0.3, 0.7, 2, 0).unwrap();
    assert_eq!(out, [direct.re, direct.im]);
    let status = unsafe { pl_two_photon_amplitude(handle, 0.5, 1, r.as_ptr(), r2.as_ptr(), 0.3, 0.7, 3, 0, out.as_mut_ptr()) };
    assert_eq!(status, PlStatus::InvalidArgument);
    unsafe { pl_state_free(handle) };
}

#[test]
fn malformed_json_and_missing_file() {
    let bad = CString::new("{\"units\": 1}").unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { pl_state_from_json(bad.as_ptr(), &mut handle) }, PlStatus::Parse);
    let path = CString::new("/nonexistent/state.json").unwrap();
    assert_eq!(unsafe { pl_state_load(path.as_ptr(), &mut handle) }, PlStatus::StateFile);
    assert!(handle.is_null());
    assert_eq!(unsafe { pl_state_from_json(ptr::null(), &mut handle) }, PlStatus::NullPointer);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(pl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles `tests/c/smoke.c` against the generated header and static library.
#[test]
fn c_program_links_against_static_library() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test binaries live in <target>/<profile>/deps.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libphotonloc_ffi.a");
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&compiler).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler ({compiler})");
        return;
    }
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let bin = out_dir.path().join("smoke");
    let status = Command::new(&compiler)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout), format!("ok {} 64\n", env!("CARGO_PKG_VERSION")));
}
