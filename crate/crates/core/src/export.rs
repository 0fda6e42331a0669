//! CSV export of sampled fields and densities.
//!
//! Every file starts with one `#` metadata line naming the quantity, α,
//! gauge `m`, lattice `N` and `L`, then a column header. Floats use the
//! shortest round-trip scientific form, so identical inputs give identical
//! bytes.

use std::io::{self, Write};

use crate::lattice::LatticeSpec;
use crate::wavefunction::{DensityProfile, VectorFieldSample};

#[derive(Clone, Debug)]
pub struct CsvMeta {
    pub quantity: String,
    pub alpha: Option<f64>,
    pub gauge_m: i32,
    pub lattice: LatticeSpec,
}

impl CsvMeta {
    pub fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write!(out, "# quantity={}", self.quantity)?;
        if let Some(a) = self.alpha {
            write!(out, " alpha={a}")?;
        }
        writeln!(out, " gauge_m={} N={} L={:e}", self.gauge_m, self.lattice.n, self.lattice.box_l)
    }
}

pub fn write_vector_field<W: Write>(mut out: W, meta: &CsvMeta, sample: &VectorFieldSample) -> io::Result<()> {
    meta.write(&mut out)?;
    writeln!(out, "x,y,z,t,re_x,im_x,re_y,im_y,re_z,im_z")?;
    for (p, v) in sample.grid.points.iter().zip(&sample.values) {
        write!(out, "{:e},{:e},{:e},{:e}", p.r[0], p.r[1], p.r[2], sample.t)?;
        for z in v.iter() {
            write!(out, ",{:e},{:e}", z.re, z.im)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_density<W: Write>(mut out: W, meta: &CsvMeta, profile: &DensityProfile) -> io::Result<()> {
    meta.write(&mut out)?;
    writeln!(out, "x,y,z,t,n")?;
    for (p, v) in profile.grid.points.iter().zip(&profile.values) {
        writeln!(out, "{:e},{:e},{:e},{:e},{:e}", p.r[0], p.r[1], p.r[2], profile.t, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ModeKey, PhotonState};
    use crate::lattice::UnitSystem;
    use crate::numeric::c;
    use crate::polarization::{ChiGauge, Helicity};
    use crate::wavefunction::{density_lp, one_photon_wavefunction};

    fn state() -> PhotonState {
        let mut s = PhotonState::new(UnitSystem::default(), LatticeSpec::new(4.0, 2));
        s.set_one(ModeKey::new([-1, 0, 0], Helicity::Plus), c(1.0, 0.0)).unwrap();
        s
    }

    #[test]
    fn density_layout() {
        let s = state();
        let d = density_lp(&s, ChiGauge::default(), 0.5).unwrap();
        let meta = CsvMeta {
            quantity: "density_lp".into(),
            alpha: None,
            gauge_m: 0,
            lattice: s.lattice,
        };
        let mut buf = Vec::new();
        write_density(&mut buf, &meta, &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# quantity=density_lp gauge_m=0 N=2 L=4e0");
        assert_eq!(lines[1], "x,y,z,t,n");
        assert_eq!(lines.len(), 2 + 8);
        assert!(lines[2].starts_with("0e0,0e0,0e0,5e-1,"));
        let n: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert!((n - 1.0 / 64.0).abs() < 1e-16);
    }

    #[test]
    fn vector_layout() {
        let s = state();
        let psi = one_photon_wavefunction(&s, 0.0, ChiGauge::default(), 0.0).unwrap();
        let meta = CsvMeta {
            quantity: "psi".into(),
            alpha: Some(0.0),
            gauge_m: 0,
            lattice: s.lattice,
        };
        let mut buf = Vec::new();
        write_vector_field(&mut buf, &meta, &psi).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# quantity=psi alpha=0 gauge_m=0 N=2 L=4e0\n"));
        assert!(text.lines().skip(2).all(|l| l.split(',').count() == 10));
    }
}
