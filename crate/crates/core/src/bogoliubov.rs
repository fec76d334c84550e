//! Generalized HFB-BdG eigenproblem for two species and the analytic
//! branches of the balanced mixture.
//!
//! Dimensionless conventions for the balanced case: `ε_k = ħ²k²/(2 m g n_c)`
//! and `ω̃ = ħω/(g n_c)`. The general matrix acts on `(U1, V1, U2, V2)` and
//! its eigenvalues are `ħω` in energy units.

use crate::error::{Error, Result};
use crate::model::{ensure_repulsive, reduce_symmetric, BranchLabel, FluctuationSet, MixtureParams, SymmetricParams};
use crate::numerics::eigen::{eigen_4x4, frobenius, Mat4};
use num_complex::Complex64;
use serde::Serialize;

/// Principal square root of a real radicand, imaginary when negative.
fn csqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// Gap factor c̃ of a branch: `1 − λ − λ·f12` on the soft (minus) branch,
/// `1 + λ` on the plus branch. `ω̃ = √(ε(ε + 2c̃))`.
pub fn branch_gap(branch: BranchLabel, lambda: f64, f12: f64) -> f64 {
    match branch {
        BranchLabel::Minus => 1.0 - lambda - lambda * f12,
        BranchLabel::Plus => 1.0 + lambda,
    }
}

/// ω̃− = √(ε(ε + 2(1−λ) − 2λ f12)) with f12 = Ñ12 + M̃12.
pub fn dispersion_minus(eps: f64, lambda: f64, f12: f64) -> Complex64 {
    csqrt(eps * (eps + 2.0 * branch_gap(BranchLabel::Minus, lambda, f12)))
}

/// ω̃+ = √(ε(ε + 2(1+λ))); independent of the interspecies fluctuations.
pub fn dispersion_plus(eps: f64, lambda: f64) -> Complex64 {
    csqrt(eps * (eps + 2.0 * branch_gap(BranchLabel::Plus, lambda, 0.0)))
}

pub fn dispersion(branch: BranchLabel, eps: f64, lambda: f64, f12: f64) -> Complex64 {
    match branch {
        BranchLabel::Minus => dispersion_minus(eps, lambda, f12),
        BranchLabel::Plus => dispersion_plus(eps, lambda),
    }
}

/// ω̃−(ε, −λ, f12) − ω̃+(ε, λ). Vanishes identically when f12 = 0.
pub fn symmetry_breaking_gap(eps: f64, lambda: f64, f12: f64) -> Complex64 {
    dispersion_minus(eps, -lambda, f12) - dispersion_plus(eps, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub eps: f64,
    pub omega_tilde: Complex64,
}

/// Quasiparticle amplitudes `(u, v)` of a balanced branch, normalized to
/// `u² − v² = 1`, with `u, v > 0` so that `u·v = c̃/(2ω̃) > 0`.
pub fn amplitudes_symmetric(eps: f64, branch: BranchLabel, lambda: f64, f12: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("amplitudes need eps > 0, got {eps}")));
    }
    let gap = branch_gap(branch, lambda, f12);
    let omega = dispersion(branch, eps, lambda, f12);
    if omega.im != 0.0 || !(omega.re > 0.0) {
        return Err(Error::DynamicallyUnstable { omega_im: omega.im });
    }
    let omega = omega.re;
    let u2 = (eps + gap) / (2.0 * omega) + 0.5;
    // v² written without the cancellation of (ε+c̃)/(2ω̃) − ½ at large ε
    let v2 = gap * gap / (2.0 * omega * (eps + gap + omega));
    Ok((u2.sqrt(), v2.sqrt()))
}

/// Generalized BdG matrix on `(U1, V1, U2, V2)`; eigenvalues are `ħω`.
pub fn bdg_matrix(k: f64, params: &MixtureParams, fl: &FluctuationSet) -> Result<Mat4> {
    ensure_repulsive(params)?;
    if !fl.is_finite() {
        return Err(Error::Domain("fluctuations must be finite".into()));
    }
    let p = params;
    let kin = |m: f64| p.hbar * p.hbar * k * k / (2.0 * m);
    let f12 = fl.f12();
    let lambda1 = p.g12 / p.g11;
    let lambda2 = p.g12 / p.g22;
    let e1 = kin(p.m1) + p.g11 * p.nc1 * (1.0 - fl.mt11 - lambda1 * (p.nc2 / p.nc1) * f12);
    let e2 = kin(p.m2) + p.g22 * p.nc2 * (1.0 - fl.mt22 - lambda2 * (p.nc1 / p.nc2) * f12);
    let kappa11 = p.nc1 * (1.0 + fl.mt11);
    let kappa22 = p.nc2 * (1.0 + fl.mt22);
    let root = (p.nc1 * p.nc2).sqrt();
    let eta12 = root * (1.0 + fl.nt12);
    let kappa12 = root * (1.0 + fl.mt12);
    let (a11, a22) = (p.g11 * kappa11, p.g22 * kappa22);
    let (d12, o12) = (p.g12 * eta12, p.g12 * kappa12);
    Ok([
        [e1, -a11, d12, -o12],
        [a11, -e1, o12, -d12],
        [d12, -o12, e2, -a22],
        [o12, -d12, a22, -e2],
    ])
}

/// Branch assignment of a computed mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeBranch {
    Minus,
    Plus,
    General,
}

impl From<BranchLabel> for ModeBranch {
    fn from(b: BranchLabel) -> Self {
        match b {
            BranchLabel::Minus => ModeBranch::Minus,
            BranchLabel::Plus => ModeBranch::Plus,
        }
    }
}

/// One eigenmode at wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BdgMode {
    pub k: f64,
    /// Angular frequency (energy / ħ).
    pub omega: Complex64,
    pub u1: f64,
    pub v1: f64,
    pub u2: f64,
    pub v2: f64,
    /// Σᵢ(uᵢ² − vᵢ²); +1 for physical modes.
    pub norm: f64,
    pub branch: ModeBranch,
    /// Set when ω has a nonzero imaginary part; amplitudes are then the real
    /// parts of the phase-fixed, unnormalized eigenvector.
    pub unstable: bool,
}

impl BdgMode {
    pub fn amplitudes(&self) -> [f64; 4] {
        [self.u1, self.v1, self.u2, self.v2]
    }
}

fn swap_species(x: &[Complex64; 4]) -> [Complex64; 4] {
    [x[2], x[3], x[0], x[1]]
}

fn vnorm(x: &[Complex64; 4]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn combine(x: &[Complex64; 4], sign: f64) -> [Complex64; 4] {
    let p = swap_species(x);
    [0, 1, 2, 3].map(|i| x[i] + p[i] * sign)
}

/// Rotates a complex vector so its largest component is real and positive.
fn fix_phase(x: &[Complex64; 4]) -> [Complex64; 4] {
    let big = x
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = if big.norm() > 0.0 {
        big.conj() / big.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    x.map(|c| c * phase)
}

fn classify(a: &[f64; 4], balanced: bool) -> ModeBranch {
    if !balanced {
        return ModeBranch::General;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let anti = ((a[2] + a[0]).powi(2) + (a[3] + a[1]).powi(2)).sqrt();
    let sym = ((a[2] - a[0]).powi(2) + (a[3] - a[1]).powi(2)).sqrt();
    if anti <= 1e-6 * scale {
        ModeBranch::Minus
    } else if sym <= 1e-6 * scale {
        ModeBranch::Plus
    } else {
        ModeBranch::General
    }
}

/// Solves the BdG problem at `k` and returns the physical modes.
///
/// Positive-norm eigenvectors are normalized to `Σ(u²−v²) = 1` and kept;
/// their negative-norm partners are discarded. Complex-frequency pairs are
/// reported once (positive imaginary part) with `unstable = true`. The
/// phase is fixed so that `u1 > 0` (or `u2 > 0` when species 1 is absent
/// from the mode). For balanced inputs, degenerate modes are rotated onto
/// the species-exchange eigenbasis so that each mode carries a branch label.
pub fn solve_bdg(k: f64, params: &MixtureParams, fl: &FluctuationSet) -> Result<Vec<BdgMode>> {
    let a = bdg_matrix(k, params, fl)?;
    let balanced = reduce_symmetric(params).is_ok() && fl.is_symmetric();
    let scale = frobenius(&a).max(f64::MIN_POSITIVE);
    let mut pairs = eigen_4x4(&a);

    if balanced {
        let mut i = 0;
        while i < pairs.len() {
            let mut j = i + 1;
            while j < pairs.len() && (pairs[j].value - pairs[i].value).norm() <= 1e-9 * scale {
                j += 1;
            }
            if j - i == 2 {
                let (x, y) = (pairs[i].vector, pairs[i + 1].vector);
                let pick = |sign: f64| {
                    let cx = combine(&x, sign);
                    let cy = combine(&y, sign);
                    if vnorm(&cx) >= vnorm(&cy) {
                        cx
                    } else {
                        cy
                    }
                };
                let sym = pick(1.0);
                let anti = pick(-1.0);
                if vnorm(&sym) > 1e-8 && vnorm(&anti) > 1e-8 {
                    pairs[i].vector = sym.map(|c| c / vnorm(&sym));
                    pairs[i + 1].vector = anti.map(|c| c / vnorm(&anti));
                }
            }
            i = j;
        }
    }

    let imag_tol = 1e-12 * scale;
    let mut modes = Vec::new();
    for pair in &pairs {
        let omega = pair.value / params.hbar;
        let x = fix_phase(&pair.vector);
        if pair.value.im.abs() > imag_tol {
            if pair.value.im < 0.0 {
                continue;
            }
            let r = x.map(|c| c.re);
            let norm = x[0].norm_sqr() - x[1].norm_sqr() + x[2].norm_sqr() - x[3].norm_sqr();
            modes.push(BdgMode {
                k,
                omega,
                u1: r[0],
                v1: r[1],
                u2: r[2],
                v2: r[3],
                norm,
                branch: classify(&r, balanced),
                unstable: true,
            });
            continue;
        }
        let r = x.map(|c| c.re);
        let norm = r[0] * r[0] - r[1] * r[1] + r[2] * r[2] - r[3] * r[3];
        if !(norm > 1e-12) {
            continue;
        }
        let s = norm.sqrt();
        let mut r = r.map(|c| c / s);
        let lead = if r[0].abs() > 1e-12 { r[0] } else { r[2] };
        if lead < 0.0 {
            r = r.map(|c| -c);
        }
        let norm = r[0] * r[0] - r[1] * r[1] + r[2] * r[2] - r[3] * r[3];
        modes.push(BdgMode {
            k,
            omega: Complex64::new(omega.re, 0.0),
            u1: r[0],
            v1: r[1],
            u2: r[2],
            v2: r[3],
            norm,
            branch: classify(&r, balanced),
            unstable: false,
        });
    }
    modes.sort_by(|a, b| {
        a.omega
            .re
            .total_cmp(&b.omega.re)
            .then(a.omega.im.total_cmp(&b.omega.im))
    });
    Ok(modes)
}

/// Analytic branch values next to the matrix eigenvalues at one ε_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchComparison {
    pub eps: f64,
    pub analytic_minus: Complex64,
    pub analytic_plus: Complex64,
    pub matrix_minus: Option<Complex64>,
    pub matrix_plus: Option<Complex64>,
}

impl BranchComparison {
    /// Largest relative deviation between analytic and matrix branches.
    pub fn max_rel_deviation(&self) -> f64 {
        let dev = |a: Complex64, m: Option<Complex64>| match m {
            Some(m) => (a - m).norm() / a.norm().max(f64::MIN_POSITIVE),
            None => f64::INFINITY,
        };
        dev(self.analytic_minus, self.matrix_minus).max(dev(self.analytic_plus, self.matrix_plus))
    }
}

/// Compares the analytic balanced branches with the general 4×4 solver.
///
/// With nonzero M̃ or Ñ12 the general matrix keeps terms the analytic
/// branches drop, so the two differ; this reports by how much.
pub fn compare_branches(eps: f64, sym: &SymmetricParams, fl: &FluctuationSet) -> Result<BranchComparison> {
    let k = sym.k_of_eps(eps);
    let modes = solve_bdg(k, &sym.to_mixture(), fl)?;
    let unit = sym.energy_unit() / sym.hbar;
    let find = |b: ModeBranch| modes.iter().find(|m| m.branch == b).map(|m| m.omega / unit);
    Ok(BranchComparison {
        eps,
        analytic_minus: dispersion_minus(eps, sym.lambda, fl.f12()),
        analytic_plus: dispersion_plus(eps, sym.lambda),
        matrix_minus: find(ModeBranch::Minus),
        matrix_plus: find(ModeBranch::Plus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::residual;
    use proptest::prelude::*;

    fn balanced(lambda: f64) -> SymmetricParams {
        SymmetricParams::new(1.0, 1.0, lambda, 1.0, 1.0)
    }

    #[test]
    fn dispersion_examples() {
        assert!((dispersion_minus(1.0, 0.5, 0.0).re - 2f64.sqrt()).abs() < 1e-15);
        assert!((dispersion_minus(1.0, 0.5, -0.3).re - 2.3f64.sqrt()).abs() < 1e-15);
        assert!((dispersion_minus(1.0, 0.5, -0.3).re - 1.516575).abs() < 1e-6);
        assert_eq!(dispersion_minus(1.0, 0.0, 0.7), dispersion_plus(1.0, 0.0));
        assert!((dispersion_plus(1.0, 0.5).re - 2.0).abs() < 1e-15);
        assert!((dispersion_plus(1.0, -1.0).re - 1.0).abs() < 1e-15);
        let eps: f64 = 1e-8;
        let phonon = (2.0 * 1.5 * eps).sqrt();
        assert!((dispersion_plus(eps, 0.5).re - phonon).abs() / phonon < 1e-8);
    }

    #[test]
    fn negative_radicand_is_imaginary() {
        let w = dispersion_plus(0.1, -1.5);
        assert_eq!(w.re, 0.0);
        assert!((w.im - (0.1f64 * 0.9).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn symmetry_breaking_examples() {
        assert_eq!(symmetry_breaking_gap(1.0, 0.5, 0.0).norm(), 0.0);
        let gap = symmetry_breaking_gap(1.0, 0.5, -0.3);
        assert!((gap.re - (3.7f64.sqrt() - 2.0)).abs() < 1e-15);
        assert_eq!(symmetry_breaking_gap(0.0, 0.5, -0.3).norm(), 0.0);
    }

    #[test]
    fn amplitude_examples() {
        let (u, v) = amplitudes_symmetric(1.0, BranchLabel::Minus, 0.0, 0.0).unwrap();
        let w = 3f64.sqrt();
        assert!((u - (1.0 / w + 0.5).sqrt()).abs() < 1e-14);
        assert!((v - (1.0 / w - 0.5).sqrt()).abs() < 1e-14);
        assert!((u - 1.037955).abs() < 1e-6 && (v - 0.278119).abs() < 1e-6);
        let (u, v) = amplitudes_symmetric(1e8, BranchLabel::Plus, 0.3, 0.0).unwrap();
        assert!((u - 1.0).abs() < 1e-12 && v < 1e-8);
        assert!(matches!(
            amplitudes_symmetric(0.1, BranchLabel::Plus, -1.5, 0.0),
            Err(Error::DynamicallyUnstable { .. })
        ));
    }

    #[test]
    fn matrix_reproduces_branches() {
        let s = balanced(0.5);
        let k = s.k_of_eps(1.0);
        let modes = solve_bdg(k, &s.to_mixture(), &FluctuationSet::zero()).unwrap();
        assert_eq!(modes.len(), 2);
        assert!((modes[0].omega.re - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(modes[0].branch, ModeBranch::Minus);
        assert!((modes[1].omega.re - 2.0).abs() < 1e-12);
        assert_eq!(modes[1].branch, ModeBranch::Plus);
        for m in &modes {
            assert!((m.norm - 1.0).abs() < 1e-12);
            assert!(m.u1 > 0.0 && m.v1 > 0.0);
        }
        let (m, p) = (&modes[0], &modes[1]);
        assert!((m.u2 + m.u1).abs() < 1e-12 && (m.v2 + m.v1).abs() < 1e-12);
        assert!((p.u2 - p.u1).abs() < 1e-12 && (p.v2 - p.v1).abs() < 1e-12);
    }

    #[test]
    fn matrix_amplitudes_match_closed_form() {
        let s = balanced(0.3);
        for branch in [BranchLabel::Minus, BranchLabel::Plus] {
            let (u, v) = amplitudes_symmetric(0.7, branch, 0.3, 0.0).unwrap();
            let modes = solve_bdg(s.k_of_eps(0.7), &s.to_mixture(), &FluctuationSet::zero()).unwrap();
            let m = modes.iter().find(|m| m.branch == ModeBranch::from(branch)).unwrap();
            let r = std::f64::consts::FRAC_1_SQRT_2;
            assert!((m.u1 - u * r).abs() < 1e-12, "{branch}");
            assert!((m.v1 - v * r).abs() < 1e-12, "{branch}");
        }
    }

    #[test]
    fn soft_branch_with_interspecies_fluctuations() {
        // M̃ = Ñ12 = 0 makes the general matrix agree with ω̃− exactly
        let s = balanced(0.5);
        let fl = FluctuationSet::symmetric(0.01, 0.0, 0.0, -0.3);
        let modes = solve_bdg(s.k_of_eps(1.0), &s.to_mixture(), &fl).unwrap();
        let m = modes.iter().find(|m| m.branch == ModeBranch::Minus).unwrap();
        assert!((m.omega.re - 2.3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn decoupled_species_give_block_diagonal_matrix() {
        let p = MixtureParams {
            g12: 0.0,
            g22: 2.0,
            m2: 3.0,
            ..MixtureParams::default()
        };
        let a = bdg_matrix(0.8, &p, &FluctuationSet::zero()).unwrap();
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(a[i][j], 0.0);
                assert_eq!(a[j][i], 0.0);
            }
        }
        let modes = solve_bdg(0.8, &p, &FluctuationSet::zero()).unwrap();
        assert_eq!(modes.len(), 2);
        let single = |m: f64, g: f64| {
            let kin = 0.64 / (2.0 * m);
            (kin * (kin + 2.0 * g)).sqrt()
        };
        let mut expected = [single(1.0, 1.0), single(3.0, 2.0)];
        expected.sort_by(f64::total_cmp);
        for (m, e) in modes.iter().zip(expected) {
            assert!((m.omega.re - e).abs() < 1e-12);
            assert_eq!(m.branch, ModeBranch::General);
        }
    }

    #[test]
    fn degenerate_branches_get_distinct_labels() {
        let s = balanced(0.0);
        let modes = solve_bdg(s.k_of_eps(2.0), &s.to_mixture(), &FluctuationSet::zero()).unwrap();
        assert_eq!(modes.len(), 2);
        let labels: Vec<_> = modes.iter().map(|m| m.branch).collect();
        assert!(labels.contains(&ModeBranch::Minus) && labels.contains(&ModeBranch::Plus));
        for m in &modes {
            assert!((m.norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn beyond_collapse_line_is_dynamically_unstable() {
        let s = balanced(-1.2);
        let modes = solve_bdg(s.k_of_eps(0.1), &s.to_mixture(), &FluctuationSet::zero()).unwrap();
        let bad: Vec<_> = modes.iter().filter(|m| m.unstable).collect();
        assert_eq!(bad.len(), 1);
        let expected = dispersion_plus(0.1, -1.2);
        assert!((bad[0].omega.im - expected.im).abs() < 1e-12);
        assert_eq!(bad[0].branch, ModeBranch::Plus);
    }

    #[test]
    fn comparison_reports_truncation_difference() {
        let s = balanced(0.5);
        let fl = FluctuationSet::symmetric(0.006, -0.0177, 0.006, -0.0177);
        let c = compare_branches(1.0, &s, &fl).unwrap();
        assert!(c.max_rel_deviation() > 1e-4);
        let c0 = compare_branches(1.0, &s, &FluctuationSet::zero()).unwrap();
        assert!(c0.max_rel_deviation() < 1e-12);
    }

    #[test]
    fn attractive_intraspecies_is_rejected() {
        let p = MixtureParams {
            g11: -1.0,
            ..MixtureParams::default()
        };
        assert!(bdg_matrix(1.0, &p, &FluctuationSet::zero()).is_err());
    }

    proptest! {
        #[test]
        fn eigenvalues_pair_up(
            k in 0.01f64..10.0, g11 in 0.1f64..3.0, g22 in 0.1f64..3.0, g12 in -2.0f64..2.0,
            m2 in 0.3f64..3.0, nc2 in 0.2f64..2.0,
            nt12 in -0.05f64..0.05, mt11 in -0.05f64..0.05, mt12 in -0.05f64..0.05,
        ) {
            let p = MixtureParams { g11, g22, g12, m2, n2: 2.0, nc2, ..MixtureParams::default() };
            let fl = FluctuationSet { mt11, mt22: mt11, nt12, mt12, ..FluctuationSet::zero() };
            let a = bdg_matrix(k, &p, &fl).unwrap();
            let pairs = eigen_4x4(&a);
            let scale = frobenius(&a);
            for pair in &pairs {
                prop_assert!(residual(&a, pair) <= 1e-10 * scale);
                let partner = pairs.iter().map(|q| (q.value + pair.value).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(partner <= 1e-9 * scale);
            }
        }

        #[test]
        fn plus_branch_ignores_interspecies(eps in 0.0f64..100.0, lambda in -0.99f64..0.99) {
            prop_assert_eq!(dispersion_plus(eps, lambda), dispersion(BranchLabel::Plus, eps, lambda, 0.37));
        }

        #[test]
        fn phonon_slope(lambda in -0.8f64..0.8, f12 in -0.2f64..0.2) {
            let eps = 1e-10;
            let slope_m = dispersion_minus(eps, lambda, f12).re / eps.sqrt();
            let slope_p = dispersion_plus(eps, lambda).re / eps.sqrt();
            let exp_m = (2.0 * (1.0 - lambda) - 2.0 * lambda * f12).sqrt();
            let exp_p = (2.0 * (1.0 + lambda)).sqrt();
            prop_assert!((slope_m - exp_m).abs() <= 1e-4 * exp_m);
            prop_assert!((slope_p - exp_p).abs() <= 1e-4 * exp_p);
        }

        #[test]
        fn amplitudes_are_normalized(eps in 1e-4f64..1e4, lambda in -0.8f64..0.8, f12 in -0.1f64..0.1) {
            for branch in [BranchLabel::Minus, BranchLabel::Plus] {
                let (u, v) = amplitudes_symmetric(eps, branch, lambda, f12).unwrap();
                prop_assert!((u * u - v * v - 1.0).abs() <= 1e-12 * u * u);
                let gap = branch_gap(branch, lambda, f12);
                let w = dispersion(branch, eps, lambda, f12).re;
                prop_assert!((2.0 * u * v * w - gap).abs() <= 1e-12 * gap.abs().max(1.0));
            }
        }
    }
}
