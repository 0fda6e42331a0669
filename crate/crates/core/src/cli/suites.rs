//! Verification suites run by `photonloc verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::report::{Bound, Report};
use crate::convergence::refinement_study;
use crate::error::Result;
use crate::fock::{brute_force_inner_product, norm_components, random_one_photon, random_state, ModeKey};
use crate::lattice::{build_k_lattice, conjugate_r_grid, KMode, LatticeSpec};
use crate::numeric::{c, complexify, dotc, dotu, max_abs, norm, RVec3};
use crate::polarization::{helicity_apply, polarization_vector, transverse_projector, ChiGauge, Helicity};
use crate::position_operator::{
    adjoint_residual, eigen_residual, jz_eigen_probe, max_commutator_residual, off_axis_modes, similarity_residual,
    GaussianTransverse, OperatorParams,
};
use crate::wavefunction::{
    biorthonormality_check, completeness_check, density_biorthonormal, density_lp, maxwell_residual, scalar_product_local,
    symmetrized_product_state, two_photon_amplitude, two_photon_amplitude_oracle, wavefunction_expansion,
};

pub const SUITES: [&str; 7] = [
    "polarization",
    "operator",
    "biorthonormality",
    "completeness",
    "parseval",
    "maxwell",
    "two-photon-oracle",
];

const PARSEVAL_STATES: usize = 20;
const PARSEVAL_TIMES: usize = 5;
const TWO_PHOTON_STATES: usize = 20;
const FOCK_STATES: usize = 100;
/// Modes per axis of the quadrature lattice used by the adjoint check.
const ADJOINT_N: usize = 32;

/// Runs the named suites (all when `only` is empty) in the fixed order of [`SUITES`].
pub fn run(cfg: &RunConfig, only: &[String]) -> Result<Report> {
    let mut report = Report::new(cfg.seed);
    for (idx, name) in SUITES.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|s| s == name) {
            continue;
        }
        // Each suite owns an independent stream so subsets reproduce full-run values.
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(idx as u64);
        match *name {
            "polarization" => polarization(cfg, &mut report)?,
            "operator" => operator(cfg, &mut report)?,
            "biorthonormality" => biorthonormality(cfg, &mut report)?,
            "completeness" => completeness(cfg, &mut report)?,
            "parseval" => parseval(cfg, &mut rng, &mut report)?,
            "maxwell" => maxwell(cfg, &mut rng, &mut report)?,
            _ => two_photon(cfg, &mut rng, &mut report)?,
        }
    }
    Ok(report)
}

fn gauges(cfg: &RunConfig) -> Vec<ChiGauge> {
    let mut ms = vec![0, cfg.gauge_m];
    ms.dedup();
    ms.into_iter().map(ChiGauge::new).collect()
}

fn nonzero_alphas(cfg: &RunConfig) -> Vec<f64> {
    let mut a: Vec<f64> = cfg.alphas.iter().copied().filter(|a| *a != 0.0).collect();
    if a.is_empty() {
        a = vec![0.5, -0.5];
    }
    a
}

fn polarization(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    const S: &str = "polarization";
    let modes = build_k_lattice(&cfg.lattice)?;
    let (mut transverse, mut ortho, mut helicity, mut projector) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for g in gauges(cfg) {
        for m in &modes {
            let k_hat = complexify(&m.k_hat());
            for l1 in Helicity::BOTH {
                let e1 = polarization_vector(m, l1, g);
                transverse = transverse.max(dotu(&k_hat, &e1).norm());
                helicity = helicity.max(norm(&(helicity_apply(m, &e1) - e1 * c(l1.value(), 0.0))));
                for l2 in Helicity::BOTH {
                    let target = if l1 == l2 { 1.0 } else { 0.0 };
                    ortho = ortho.max((dotc(&polarization_vector(m, l2, g), &e1) - c(target, 0.0)).norm());
                }
            }
            let sum = Helicity::BOTH
                .iter()
                .map(|&l| {
                    let e = polarization_vector(m, l, g);
                    e * e.adjoint()
                })
                .fold(crate::numeric::CMat3::zeros(), |a, b| a + b);
            projector = projector.max(max_abs(&(sum - transverse_projector(m))));
        }
    }
    let tol = cfg.tolerances.polarization;
    report.check(S, "transversality", transverse, Bound::AtMost(tol));
    report.check(S, "orthonormality", ortho, Bound::AtMost(tol));
    report.check(S, "helicity_eigenvalue", helicity, Bound::AtMost(tol));
    report.check(S, "gauge_independent_projector", projector, Bound::AtMost(tol));
    Ok(())
}

/// Smooth transverse probe field centered off the axes, scaled to the lattice.
pub(crate) fn scaled_gaussian(dk: f64) -> GaussianTransverse {
    GaussianTransverse {
        center: RVec3::new(1.1, 0.6, 0.4) * dk,
        width: 0.8 * dk,
        amp_plus: c(0.8, 0.3),
        amp_minus: c(-0.2, 0.5),
    }
}

fn operator(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    const S: &str = "operator";
    let spec = &cfg.lattice;
    let dk = spec.dk();
    let modes = off_axis_modes(spec, 0.99)?;
    let volume = spec.volume();
    let order_window = Bound::Within(2.0 - cfg.tolerances.order, 2.0 + cfg.tolerances.order);
    let ratio_window = Bound::Within(2f64.powf(2.0 - cfg.tolerances.order), 2f64.powf(2.0 + cfg.tolerances.order));

    // Eigenvalue equation at r₁ = 0 and an off-origin point.
    let r_off = RVec3::new(0.1, -0.2, 0.3) * (spec.box_l / std::f64::consts::TAU);
    let (mut worst, mut worst_ratio_dev, mut ratio_at_worst) = (0.0f64, -1.0f64, 4.0);
    for &alpha in &cfg.alphas {
        for m in -1..=1 {
            for lambda in Helicity::BOTH {
                for r1 in [RVec3::zeros(), r_off] {
                    let params = OperatorParams::new(alpha, ChiGauge::new(m), cfg.h());
                    let coarse = eigen_residual(&params, r1, lambda, &modes, volume)?.sup_norm;
                    worst = worst.max(coarse);
                    if r1 != RVec3::zeros() {
                        let fine = eigen_residual(&params.with_h(cfg.h() / 2.0), r1, lambda, &modes, volume)?.sup_norm;
                        let ratio = coarse / fine;
                        let dev = (ratio.log2() - 2.0).abs();
                        if dev.is_nan() || dev > worst_ratio_dev {
                            worst_ratio_dev = dev;
                            ratio_at_worst = ratio;
                        }
                    }
                }
            }
        }
    }
    report.check(S, "eigen_residual", worst, Bound::AtMost(cfg.tolerances.eigen));
    report.check(S, "eigen_halving_ratio", ratio_at_worst, ratio_window);

    // Commuting components and the Pryce control.
    let f = scaled_gaussian(dk);
    let alpha = cfg.alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let base = OperatorParams::new(alpha, ChiGauge::new(cfg.gauge_m), cfg.steps.h_study * dk);
    let rows = refinement_study(base.h, 2.0, 3, |h| {
        max_commutator_residual(&base.with_h(h), &f, &modes).map_or(f64::NAN, |r| r.sup_norm)
    });
    for (i, row) in rows.iter().enumerate().skip(1) {
        report.check(S, &format!("commutator_order_level{i}"), row.observed_order.unwrap_or(f64::NAN), order_window);
    }
    let floor = rows.last().expect("three levels").residual;
    report.record(S, "commutator_floor", floor);
    if cfg.pryce_control {
        let pryce = max_commutator_residual(&base.pryce().with_h(rows[2].h), &f, &modes)?.sup_norm;
        report.record(S, "pryce_commutator_floor", pryce);
        report.check(S, "pryce_negative_control", pryce / floor, Bound::AtLeast(cfg.tolerances.pryce_ratio));
    }

    // Adjoint pairing on a fine quadrature lattice; similarity by refinement.
    let quad = LatticeSpec::new(spec.box_l, ADJOINT_N).excluding_z_axis();
    let quad_modes = build_k_lattice(&quad)?;
    let fa = GaussianTransverse {
        center: RVec3::new(6.0, 6.0, 4.0) * dk,
        width: 1.6 * dk,
        amp_plus: c(0.7, 0.1),
        amp_minus: c(0.2, -0.4),
    };
    let ga = GaussianTransverse {
        center: RVec3::new(5.5, 6.5, 4.5) * dk,
        width: 1.7 * dk,
        amp_plus: c(-0.3, 0.6),
        amp_minus: c(0.5, 0.5),
    };
    let h_rel = cfg.steps.h;
    for alpha in [0.5, 0.0] {
        let params = OperatorParams::new(alpha, ChiGauge::new(cfg.gauge_m), h_rel * dk);
        let r = adjoint_residual(&params, &fa, &ga, &quad_modes)?.sup_norm * dk;
        report.record(S, &format!("adjoint_residual_alpha{alpha}"), r);
        report.check(S, &format!("adjoint_c_alpha{alpha}"), r / (h_rel * h_rel), Bound::AtMost(cfg.tolerances.adjoint_c));
    }
    let sim = OperatorParams::new(0.5, ChiGauge::new(cfg.gauge_m), cfg.steps.h_study * dk);
    let coarse = similarity_residual(&sim, &f, &modes)?.sup_norm * dk;
    let fine = similarity_residual(&sim.with_h(sim.h / 2.0), &f, &modes)?.sup_norm * dk;
    report.check(S, "similarity_halving_ratio", coarse / fine, ratio_window);
    let hf = cfg.steps.h_study / 2.0;
    report.check(S, "similarity_c", fine / (hf * hf), Bound::AtMost(cfg.tolerances.similarity_c));

    // J_z eigenvalues on the origin eigenvector: recorded, integrality checked.
    let mut defect = 0.0f64;
    for m in -2..=2 {
        for lambda in Helicity::BOTH {
            let p = jz_eigen_probe(ChiGauge::new(m), lambda, 0.5, cfg.h(), &modes, volume)?;
            report.record(S, &format!("jz_m{m}_lambda{lambda}"), p.nearest_integer as f64);
            defect = defect.max(p.integer_defect() - p.fit_residual);
        }
    }
    report.check(S, "jz_integer_within_fit", defect, Bound::AtMost(0.0));
    Ok(())
}

fn biorthonormality(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    for alpha in nonzero_alphas(cfg) {
        for g in gauges(cfg) {
            let r = biorthonormality_check(&cfg.lattice, alpha, g, 0.0)?;
            report.check(
                "biorthonormality",
                &format!("alpha{alpha}_m{}", g.m),
                r.worst_relative,
                Bound::AtMost(cfg.tolerances.biorthonormality),
            );
        }
    }
    Ok(())
}

fn completeness(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    for alpha in nonzero_alphas(cfg) {
        let r = completeness_check(&cfg.lattice, alpha, ChiGauge::new(cfg.gauge_m), 0.0)?;
        report.check(
            "completeness",
            &format!("alpha{alpha}"),
            r.sup_norm,
            Bound::AtMost(cfg.tolerances.completeness),
        );
    }
    Ok(())
}

fn random_times(rng: &mut ChaCha8Rng, cfg: &RunConfig, count: usize) -> Vec<f64> {
    let period = cfg.lattice.box_l / cfg.units.c;
    (0..count).map(|_| rng.gen_range(0.0..period)).collect()
}

fn parseval(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    const S: &str = "parseval";
    let g = ChiGauge::new(cfg.gauge_m);
    let modes = build_k_lattice(&cfg.lattice)?.len();
    let (mut parseval, mut alpha_gap, mut imag) = (0.0f64, 0.0f64, 0.0f64);
    let (mut lp_min, mut integral_gap) = (f64::INFINITY, 0.0f64);
    for _ in 0..PARSEVAL_STATES {
        let count = rng.gen_range(1..=modes.min(8));
        let s = random_one_photon(rng, cfg.units, cfg.lattice, count)?;
        let s = s.scaled(c(rng.gen_range(0.5..1.5), 0.0));
        let target = norm_components(&s).one;
        for t in random_times(rng, cfg, PARSEVAL_TIMES) {
            let p0 = scalar_product_local(&s, 0.0, g, t)?;
            let p1 = scalar_product_local(&s, 0.5, g, t)?;
            parseval = parseval.max((p0.value - target).abs()).max((p1.value - target).abs());
            alpha_gap = alpha_gap.max((p0.value - p1.value).abs());
            imag = imag.max(p0.imag_residue.abs()).max(p1.imag_residue.abs());
            lp_min = lp_min.min(density_lp(&s, g, t)?.min());
            integral_gap = integral_gap.max((density_biorthonormal(&s, g, t)?.integral() - target).abs());
        }
    }
    let tol = cfg.tolerances.parseval;
    report.check(S, "scalar_product_vs_sum_c2", parseval, Bound::AtMost(tol));
    report.check(S, "alpha0_vs_alpha_half", alpha_gap, Bound::AtMost(tol));
    report.check(S, "imaginary_residue", imag, Bound::AtMost(tol));
    report.check(S, "lp_density_negated_min", -lp_min, Bound::AtMost(cfg.tolerances.density_floor));
    report.check(S, "biorthonormal_integral_vs_sum_c2", integral_gap, Bound::AtMost(tol));
    Ok(())
}

fn maxwell(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    const S: &str = "maxwell";
    let g = ChiGauge::new(cfg.gauge_m);
    let modes = build_k_lattice(&cfg.lattice)?;
    let s = random_one_photon(rng, cfg.units, cfg.lattice, modes.len().min(6))?;
    let t = random_times(rng, cfg, 1)[0];
    let levels: Vec<_> = (0..3)
        .map(|i| {
            let f = 0.5f64.powi(i);
            maxwell_residual(&s, g, t, cfg.dr() * f, cfg.dt() * f)
        })
        .collect::<Result<_>>()?;
    let window = Bound::Within(2.0 - cfg.tolerances.order, 2.0 + cfg.tolerances.order);
    for q in 0..4 {
        let name = levels[0].as_array()[q].0;
        let mut worst = 2.0;
        for w in levels.windows(2) {
            let p = crate::numeric::observed_order(w[0].as_array()[q].1, w[1].as_array()[q].1, 2.0);
            if p.is_nan() || (p - 2.0).abs() > (worst - 2.0f64).abs() {
                worst = p;
            }
        }
        report.check(S, &format!("order_{name}"), worst, window);
    }
    let mut transverse = 0.0f64;
    let expansion = wavefunction_expansion(&s, 0.5, g)?;
    for (k_vec, k, amp) in expansion.modes() {
        transverse = transverse.max(dotu(&complexify(k_vec), amp).norm() / (k * norm(amp)));
    }
    for m in &modes {
        for l in Helicity::BOTH {
            transverse = transverse.max(dotu(&complexify(&m.k_vec), &polarization_vector(m, l, g)).norm() / m.k);
        }
    }
    report.check(S, "per_mode_transversality", transverse, Bound::AtMost(cfg.tolerances.transversality));
    Ok(())
}

fn pick_modes(rng: &mut ChaCha8Rng, modes: &[KMode]) -> [[i32; 3]; 2] {
    let picks = rand::seq::index::sample(rng, modes.len(), 2);
    [modes[picks.index(0)].n, modes[picks.index(1)].n]
}

fn two_photon(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut Report) -> Result<()> {
    const S: &str = "two-photon-oracle";
    let modes = build_k_lattice(&cfg.lattice)?;
    let grid = conjugate_r_grid(&cfg.lattice)?;
    let g = ChiGauge::new(cfg.gauge_m);
    let (mut symmetry, mut oracle, mut factor) = (0.0f64, 0.0f64, 0.0f64);
    for idx in 0..TWO_PHOTON_STATES {
        let pair = pick_modes(rng, &modes);
        // Alternate between distinct-mode and single-mode (doubly occupied) content.
        let used: &[[i32; 3]] = if idx % 2 == 0 { &pair } else { &pair[..1] };
        let mut s = random_state(rng, cfg.units, cfg.lattice, used)?;
        let key = ModeKey::new(used[0], Helicity::Plus);
        s.set_two(key, key, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))?;
        let r = grid.points[rng.gen_range(0..grid.len())].r;
        let r2 = grid.points[rng.gen_range(0..grid.len())].r;
        let [t, t2] = [0, 1].map(|_| random_times(rng, cfg, 1)[0]);
        for &alpha in &cfg.alphas {
            for i in 0..3 {
                for j in 0..3 {
                    let a = two_photon_amplitude(&s, alpha, g, &r, &r2, t, t2, i, j)?;
                    let swapped = two_photon_amplitude(&s, alpha, g, &r2, &r, t2, t, j, i)?;
                    let o = two_photon_amplitude_oracle(&s, alpha, g, &r, &r2, t, t2, i, j)?;
                    symmetry = symmetry.max((a - swapped).norm());
                    oracle = oracle.max((a - o).norm());
                }
            }
        }
        let a = random_state(rng, cfg.units, cfg.lattice, &pair)?;
        let b = random_state(rng, cfg.units, cfg.lattice, &pair)?;
        let prod = symmetrized_product_state(&a, &b)?;
        let pa = wavefunction_expansion(&a, 0.5, g)?;
        let pb = wavefunction_expansion(&b, 0.5, g)?;
        for i in 0..3 {
            for j in 0..3 {
                let amp = two_photon_amplitude(&prod, 0.5, g, &r, &r2, t, t2, i, j)?;
                let expect = pa.eval(&r, t)[i] * pb.eval(&r2, t2)[j] + pb.eval(&r, t)[i] * pa.eval(&r2, t2)[j];
                factor = factor.max((amp - expect).norm());
            }
        }
    }
    report.check(S, "swap_symmetry", symmetry, Bound::AtMost(0.0));
    report.check(S, "oracle_equivalence", oracle, Bound::AtMost(cfg.tolerances.two_photon));
    report.check(S, "symmetrized_product_factorization", factor, Bound::AtMost(cfg.tolerances.factorization));

    let mut fock = 0.0f64;
    for _ in 0..FOCK_STATES {
        let count = rng.gen_range(1..=3usize.min(modes.len()));
        let picks = rand::seq::index::sample(rng, modes.len(), count);
        let used: Vec<[i32; 3]> = picks.iter().map(|i| modes[i].n).collect();
        let s = random_state(rng, cfg.units, cfg.lattice, &used)?;
        let bf = brute_force_inner_product(&s, &s)?;
        fock = fock.max((bf.re - norm_components(&s).total()).abs()).max(bf.im.abs());
    }
    report.check(S, "fock_norm_vs_oracle", fock, Bound::AtMost(cfg.tolerances.fock_norm));
    Ok(())
}
