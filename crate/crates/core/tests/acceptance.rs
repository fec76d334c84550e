//! Acceptance gate: nine criteria, one PASS/FAIL line each.
//!
//! Oracles are written out here independently of the library code paths
//! they check. Every tolerance and runtime budget is pinned below.

use mixstab_core::bogoliubov::{solve_bdg, symmetry_breaking_gap, ModeBranch};
use mixstab_core::droplet::{
    energy_full, energy_terms, equilibrium, figure_curve, DensityGrid, DropletConfig, DropletForm, LhyCoefficient,
};
use mixstab_core::fluctuations::{closed_form_intraspecies, ir_safe_sum, FluctuationQuadratureSettings};
use mixstab_core::numerics::{fd_gradient_hessian, integrate_semi_infinite, QuadratureSettings};
use mixstab_core::stability::{chemical_potentials, generalized_couplings, stability_check, Verdict};
use mixstab_core::{BranchLabel, FluctuationSet, MixtureParams, SymmetricParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

const TOL_LHY: f64 = 1e-6;
const TOL_QUAD: f64 = 1e-9;
const TOL_BDG_OMEGA: f64 = 1e-10;
const TOL_BDG_NORM: f64 = 1e-9;
const TOL_FD_MU: f64 = 1e-8;
const TOL_FD_G: f64 = 1e-6;
const TOL_RATIO_N: f64 = 1e-9;
const TOL_RATIO_E: f64 = 1e-8;
const TOL_FIG_N: f64 = 1e-3;
const TOL_FIG_DEPTH: f64 = 1e-2;
const TOL_GAP: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

fn run(id: usize, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let ok = out.passed && in_time;
    println!(
        "criterion {id} {:<4} {title}: {} [{:.3}s of {:.3}s]",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    ok
}

fn lhy_sum_coefficient() -> Outcome {
    let a_n = (1.0 - (1.0 + SQRT_2).ln() / SQRT_2) / (2.0 * PI);
    let a_m = SQRT_2 / 8.0;
    let (nt, mt) = closed_form_intraspecies(BranchLabel::Minus, 0.0, 1.0).unwrap();
    let sum = nt + mt;
    let passed = (sum + 0.116812).abs() <= TOL_LHY && (sum - (a_n - a_m)).abs() <= 1e-15;
    Outcome {
        passed,
        detail: format!("(N+M)/gamma = {sum:.9}, oracle {:.9}", a_n - a_m),
    }
}

fn quadrature_oracle() -> Outcome {
    // (1/π)(v² − uv) at m = ħ = g = n_c = 1, ε = k²/2, c = 1; antiderivative
    // (1/2π)(√(k²+4) − k) gives −1/π
    let integrand = |k: f64| {
        let eps = 0.5 * k * k;
        let w = (eps * (eps + 2.0)).sqrt();
        let v2 = 1.0 / (2.0 * w * (eps + 1.0 + w));
        let uv = 1.0 / (2.0 * w);
        (v2 - uv) / PI
    };
    let antiderivative = |k: f64| ((k * k + 4.0).sqrt() - k) / (2.0 * PI);
    let oracle = -antiderivative(0.0);
    let settings = QuadratureSettings {
        k_min: 1e-3,
        ..QuadratureSettings::default()
    };
    let tail = integrate_semi_infinite(integrand, &settings).unwrap().value;
    let head = antiderivative(1e-3) - antiderivative(0.0);
    let engine = integrate_semi_infinite(
        |k| -(1.0 / ((k * k + 4.0).sqrt() * (k + (k * k + 4.0).sqrt()))) * 2.0 / PI,
        &QuadratureSettings::default(),
    )
    .unwrap()
    .value;
    let sym = SymmetricParams::new(1.0, 1.0, 0.0, 1.0, 1.0);
    let (lib, _) = ir_safe_sum(&sym, BranchLabel::Minus, 0.0, &FluctuationQuadratureSettings::default()).unwrap();
    let dev = (engine - oracle)
        .abs()
        .max((lib - oracle).abs())
        .max((tail + head - oracle).abs());
    Outcome {
        passed: dev <= TOL_QUAD,
        detail: format!("sum = {lib:.12}, oracle {oracle:.12}, dev {dev:.1e}"),
    }
}

fn bdg_vs_analytic() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut missing = 0;
    for lambda in [-0.99, -0.5, 0.0, 0.5, 0.99] {
        let sym = SymmetricParams::new(1.0, 1.0, lambda, 1.0, 1.0);
        for i in 0..200 {
            let eps = 10f64.powf(-4.0 + 8.0 * i as f64 / 199.0);
            let k = (2.0 * eps).sqrt();
            let minus = (eps * (eps + 2.0 * (1.0 - lambda))).sqrt();
            let plus = (eps * (eps + 2.0 * (1.0 + lambda))).sqrt();
            let modes = solve_bdg(k, &sym.to_mixture(), &FluctuationSet::zero()).unwrap();
            for (branch, exact) in [(ModeBranch::Minus, minus), (ModeBranch::Plus, plus)] {
                match modes.iter().find(|m| m.branch == branch) {
                    Some(m) => {
                        worst = worst.max((m.omega.re - exact).abs() / exact);
                        worst_norm = worst_norm.max((m.norm - 1.0).abs());
                    }
                    None => missing += 1,
                }
            }
        }
    }
    Outcome {
        passed: worst <= TOL_BDG_OMEGA && worst_norm <= TOL_BDG_NORM && missing == 0,
        detail: format!("max rel dev {worst:.2e}, max norm dev {worst_norm:.2e}, unmatched {missing}"),
    }
}

/// Energy density as a function of `(nc1, nc2)` with unreduced fluctuations
/// and `n_i − nc_i` held fixed.
fn oracle_energy(p: &MixtureParams, fl: &FluctuationSet) -> impl Fn([f64; 2]) -> f64 {
    let (p, fl) = (*p, *fl);
    let s = (p.nc1 * p.nc2).sqrt();
    let (a11, b11) = (fl.nt11 * p.nc1, fl.mt11 * p.nc1);
    let (a22, b22) = (fl.nt22 * p.nc2, fl.mt22 * p.nc2);
    let (a12, b12) = (fl.nt12 * s, fl.mt12 * s);
    move |x: [f64; 2]| {
        let (c1, c2) = (x[0], x[1]);
        let n1 = p.n1 - p.nc1 + c1;
        let n2 = p.n2 - p.nc2 + c2;
        let r = (c1 * c2).sqrt();
        0.5 * p.g11 * n1 * n1
            + 0.5 * p.g22 * n2 * n2
            + p.g12 * n1 * n2
            + 0.5 * p.g11 * (2.0 * c1 * (a11 + b11) + a11 * a11 + b11 * b11)
            + 0.5 * p.g22 * (2.0 * c2 * (a22 + b22) + a22 * a22 + b22 * b22)
            + p.g12 * (2.0 * r * (a12 + b12) + a12 * a12 + b12 * b12)
    }
}

fn rel(reference: &[f64], other: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    reference
        .iter()
        .zip(other)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

fn fd_thermodynamics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let (mut worst_mu, mut worst_g) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n1 = rng.random_range(0.2..3.0);
        let n2 = rng.random_range(0.2..3.0);
        let p = MixtureParams {
            m1: rng.random_range(0.5..2.0),
            m2: rng.random_range(0.5..2.0),
            g11: rng.random_range(0.1..3.0),
            g22: rng.random_range(0.1..3.0),
            g12: rng.random_range(-2.0..2.0),
            n1,
            n2,
            nc1: n1 * rng.random_range(0.5..1.0),
            nc2: n2 * rng.random_range(0.5..1.0),
            hbar: 1.0,
        };
        let fl = FluctuationSet::from_array([(); 6].map(|_| rng.random_range(-0.1..0.1)));
        let h = [1e-4 * p.nc1, 1e-4 * p.nc2];
        let fd = fd_gradient_hessian(oracle_energy(&p, &fl), [p.nc1, p.nc2], Some(h));
        let (mu1, mu2) = chemical_potentials(&p, &fl).unwrap();
        let (g1, g2, g12) = generalized_couplings(&p, &fl).unwrap();
        worst_mu = worst_mu.max(rel(&[mu1, mu2], &fd.gradient));
        let hf = fd.hessian;
        worst_g = worst_g.max(rel(&[g1, g12, g12, g2], &[hf[0][0], hf[0][1], hf[1][0], hf[1][1]]));
        // the library's own check must agree as well
        let lib = stability_check(&p, &fl, true).unwrap().hessian_fd.unwrap();
        worst_mu = worst_mu.max(lib.gradient_rel_dev);
        worst_g = worst_g.max(lib.hessian_rel_dev);
    }
    Outcome {
        passed: worst_mu <= TOL_FD_MU && worst_g <= TOL_FD_G,
        detail: format!("mu dev {worst_mu:.2e}, G dev {worst_g:.2e}"),
    }
}

fn classic_limit() -> Outcome {
    let mut disagreements = 0;
    for i in 0..101 {
        let ratio = -1.5 + 3.0 * i as f64 / 100.0;
        for j in 0..101 {
            let g = 2.0 * (j + 1) as f64 / 101.0;
            let g12 = ratio * g;
            let p = MixtureParams {
                g11: g,
                g22: g,
                g12,
                ..MixtureParams::default()
            };
            let classic = g > 0.0 && g * g - g12 * g12 > 0.0;
            let v = stability_check(&p, &FluctuationSet::zero(), false).unwrap().verdict;
            if (v == Verdict::Stable) != classic {
                disagreements += 1;
            }
        }
    }
    Outcome {
        passed: disagreements == 0,
        detail: format!("{disagreements} disagreements on 101x101"),
    }
}

fn droplet_ratios() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut worst_n, mut worst_e) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let g: f64 = rng.random_range(0.1..10.0);
        let cfg = DropletConfig {
            m: rng.random_range(0.1..10.0),
            hbar: rng.random_range(0.1..10.0),
            ..DropletConfig::new(g, g * rng.random_range(1e-4..0.1), BranchLabel::Minus)
        };
        let (nc, ec) = equilibrium(&cfg, None).unwrap().minimum().unwrap();
        let (nu, eu) = equilibrium(&cfg.with_correlated(false), None)
            .unwrap()
            .minimum()
            .unwrap();
        worst_n = worst_n.max((nc / nu - 4.0).abs());
        worst_e = worst_e.max((ec / eu - 16.0).abs());
    }
    Outcome {
        passed: worst_n <= TOL_RATIO_N && worst_e <= TOL_RATIO_E,
        detail: format!("max |n ratio - 4| {worst_n:.2e}, max |E ratio - 16| {worst_e:.2e}"),
    }
}

fn figure_regeneration() -> Outcome {
    let gamma = 0.234;
    let (g, dg) = (1.0, 0.01);
    let n_closed = 4.5 * gamma * gamma * g * g * g / (dg * dg);
    let cfg = DropletConfig {
        lhy_coeff_mode: LhyCoefficient::PaperRounded,
        ..DropletConfig::new(g, dg, BranchLabel::Minus)
    };
    let fig2 = figure_curve(
        &cfg,
        &DensityGrid {
            lo: 1.0,
            hi: 6000.0,
            points: 600,
            log: false,
        },
    )
    .unwrap();
    let n_star = fig2.minimum_correlated.map_or(f64::NAN, |m| m.n);
    let fig1 = figure_curve(
        &DropletConfig {
            branch: BranchLabel::Plus,
            ..cfg
        },
        &DensityGrid {
            lo: 1e-6,
            hi: 10.0,
            points: 400,
            log: true,
        },
    )
    .unwrap();
    let depth = match (fig1.minimum_correlated, fig1.minimum_uncorrelated) {
        (Some(c), Some(u)) => c.e / u.e,
        _ => f64::NAN,
    };
    let dev_n = ((n_star - 2464.0) / 2464.0)
        .abs()
        .max(((n_star - n_closed) / n_closed).abs());
    let dev_depth = ((depth - 1e-8) / 1e-8).abs();
    Outcome {
        passed: dev_n <= TOL_FIG_N && dev_depth <= TOL_FIG_DEPTH,
        detail: format!("n* = {n_star:.4} (closed form {n_closed:.4}), plus depth ratio {depth:.6e}"),
    }
}

fn symmetry_breaking() -> Outcome {
    let direct = |eps: f64, lambda: f64, f12: f64| {
        (eps * (eps + 2.0 * (1.0 + lambda) + 2.0 * lambda * f12)).sqrt() - (eps * (eps + 2.0 * (1.0 + lambda))).sqrt()
    };
    let (mut zero_dev, mut broken_dev) = (0.0f64, 0.0f64);
    let mut all_nonzero = true;
    for i in 0..60 {
        let eps = 10f64.powf(-4.0 + 8.0 * i as f64 / 59.0);
        for j in 0..41 {
            let lambda = -0.95 + 1.9 * j as f64 / 40.0;
            zero_dev = zero_dev.max(symmetry_breaking_gap(eps, lambda, 0.0).norm());
            if lambda.abs() > 1e-9 {
                let gap = symmetry_breaking_gap(eps, lambda, -0.3);
                let d = direct(eps, lambda, -0.3);
                broken_dev = broken_dev.max((gap.re - d).abs() / d.abs().max(1e-300));
                all_nonzero &= gap.norm() > 0.0;
            }
        }
    }
    let example = symmetry_breaking_gap(1.0, 0.5, -0.3).re;
    let ex_dev = (example - (3.7f64.sqrt() - 2.0)).abs();
    Outcome {
        passed: zero_dev <= TOL_GAP && broken_dev <= 1e-9 && ex_dev <= TOL_GAP && all_nonzero,
        detail: format!("f12=0 max |gap| {zero_dev:.1e}; gap(1,0.5,-0.3) = {example:.9}; rel dev {broken_dev:.1e}"),
    }
}

fn branch_cancellation() -> Outcome {
    let plus = DropletConfig {
        form: DropletForm::Full,
        ..DropletConfig::new(1.0, 0.0, BranchLabel::Plus)
    };
    let minus = DropletConfig {
        branch: BranchLabel::Minus,
        ..plus
    };
    let mut nonzero = 0;
    let mut not_doubled = 0;
    for k in 0..100 {
        let n = 10f64.powf(-4.0 + 10.0 * k as f64 / 99.0);
        if energy_full(n, &plus).unwrap() != 0.0 {
            nonzero += 1;
        }
        let c = energy_terms(n, &minus).unwrap().lhy;
        let u = energy_terms(n, &minus.with_correlated(false)).unwrap().lhy;
        if c != 2.0 * u || u >= 0.0 {
            not_doubled += 1;
        }
    }
    Outcome {
        passed: nonzero == 0 && not_doubled == 0,
        detail: format!("nonzero plus energies {nonzero}, non-doubled minus LHY {not_doubled} of 100"),
    }
}

fn main() {
    let ms = Duration::from_millis;
    let results = [
        run(1, "LHY sum coefficient", ms(1), lhy_sum_coefficient),
        run(2, "quadrature oracle", ms(100), quadrature_oracle),
        run(3, "BdG vs analytic branches", ms(1000), bdg_vs_analytic),
        run(4, "FD vs analytic thermodynamics", ms(5000), fd_thermodynamics),
        run(5, "classic-limit reduction", ms(1000), classic_limit),
        run(6, "droplet ratios", ms(2000), droplet_ratios),
        run(7, "figure regeneration", ms(2000), figure_regeneration),
        run(8, "symmetry breaking", ms(500), symmetry_breaking),
        run(9, "branch cancellation", ms(500), branch_cancellation),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
