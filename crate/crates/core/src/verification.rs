//! The acceptance suite: twelve oracle and property checks over seeded
//! ensembles, shared by the `acceptance` test target and `verify-all`.
//!
//! `quick` shrinks ensembles and grids for smoke runs; only the full suite
//! checks the stated sizes and time limits.

use std::time::{Duration, Instant};

use num_complex::Complex;

use crate::error::Result;
use crate::eta_zeta::{
    additivity_check, relative_eta_function, relative_eta_invariant, EtaConfig, FitConfig, FitMode, TailMode,
};
use crate::flow_shift::{
    decay_check, krein_check, sf_eta_identity, variation_coefficient, FlowConfig, ShiftNormalization,
    SpectralShift, TestFunction,
};
use crate::gluing::{build_theta_bvp, gluing_check, mod2z_check, multiset_distance, theta_xi_scan, Mod2Report};
use crate::lattice::{
    build_aps_halfline, build_dirac_1d, build_dirac_2d, make_pair, DerivativeScheme, DiracOperator, Grid,
    OperatorPair, OperatorPath, Potential, Side, Topology,
};
use crate::random::{hermitian_with_spectrum, random_gapped_triple, random_operator_pair, random_path, seeded};
use crate::spectrum::{eigensolve, eigensolve_matrix, kernel_dim, SpectralPair, Spectrum};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    pub quick: bool,
}

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    /// Short machine-friendly name.
    pub name: &'static str,
    /// The identity or property being checked, named in failure rows.
    pub identity: &'static str,
    pub passed: bool,
    /// Headline measured quantity (a residual, ratio or count).
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionReport {
    /// `PASS [n] name: detail` or `FAIL [n] name (identity): detail`.
    pub fn line(&self) -> String {
        if self.passed {
            format!("PASS [{:>2}] {}: {}", self.id, self.name, self.detail)
        } else {
            format!("FAIL [{:>2}] {} ({}): {}", self.id, self.name, self.identity, self.detail)
        }
    }
}

struct Outcome {
    passed: bool,
    metric: f64,
    tolerance: f64,
    detail: String,
}

struct Criterion {
    id: u8,
    name: &'static str,
    identity: &'static str,
    run: fn(SuiteOptions) -> Result<Outcome>,
}

const CRITERIA: [Criterion; 12] = [
    Criterion {
        id: 1,
        name: "signature-oracle",
        identity: "eta finite part equals the signature difference",
        run: signature_oracle,
    },
    Criterion {
        id: 2,
        name: "sf-identity",
        identity: "reduced eta equals spectral flow",
        run: sf_identity,
    },
    Criterion {
        id: 3,
        name: "example-2d",
        identity: "eta = 2 sf - dim ker A1 + dim ker A0 with vanishing even variation coefficients",
        run: example_2d,
    },
    Criterion {
        id: 4,
        name: "krein",
        identity: "Krein trace formula",
        run: krein,
    },
    Criterion {
        id: 5,
        name: "ssf-near-zero",
        identity: "spectral shift equals dim ker A0 - dim ker A1 on (0, delta)",
        run: ssf_near_zero,
    },
    Criterion {
        id: 6,
        name: "large-time-decay",
        identity: "relative weighted heat trace decays at rate delta^2/2",
        run: large_time_decay,
    },
    Criterion {
        id: 7,
        name: "additivity-antisymmetry",
        identity: "eta(A2,A1) + eta(A1,A0) = eta(A2,A0) and eta(A1,A0) = -eta(A0,A1)",
        run: additivity_antisymmetry,
    },
    Criterion {
        id: 8,
        name: "theta-endpoints",
        identity: "theta = pi/4 is transmission and theta = 0 is APS plus dual APS",
        run: theta_endpoints,
    },
    Criterion {
        id: 9,
        name: "theta-constancy",
        identity: "reduced eta mod Z is independent of theta",
        run: theta_constancy,
    },
    Criterion {
        id: 10,
        name: "gluing-mod-z",
        identity: "xi(A1,A0) = xi(A1') - xi(A0') mod Z",
        run: gluing_mod_z,
    },
    Criterion {
        id: 11,
        name: "mod-2z",
        identity: "eta(A1,A0) = 2 sf - dim ker A1 + dim ker A0 mod 2Z",
        run: mod_2z,
    },
    Criterion {
        id: 12,
        name: "residue",
        identity: "eta(s) is regular at s = 0",
        run: residue,
    },
];

pub const CRITERION_COUNT: usize = CRITERIA.len();

/// Runs criterion `id` (1-based). Errors inside the check become a failing
/// report naming the error.
pub fn run_criterion(id: u8, opts: SuiteOptions) -> Option<CriterionReport> {
    let c = CRITERIA.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let outcome = (c.run)(opts);
    let elapsed = start.elapsed();
    Some(match outcome {
        Ok(o) => CriterionReport {
            id: c.id,
            name: c.name,
            identity: c.identity,
            passed: o.passed,
            metric: o.metric,
            tolerance: o.tolerance,
            detail: o.detail,
            elapsed,
        },
        Err(e) => CriterionReport {
            id: c.id,
            name: c.name,
            identity: c.identity,
            passed: false,
            metric: f64::NAN,
            tolerance: f64::NAN,
            detail: format!("error: {e}"),
            elapsed,
        },
    })
}

pub fn run_all(opts: SuiteOptions) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .filter_map(|c| run_criterion(c.id, opts))
        .collect()
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn c64(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn random_pair_spectra(seed: u64, dim: usize, block: usize, scale: f64) -> Result<SpectralPair<f64>> {
    SpectralPair::from_pair(&random_operator_pair::<f64>(&mut seeded(seed), dim, block, scale)?)
}

fn signature_oracle(opts: SuiteOptions) -> Result<Outcome> {
    let start = Instant::now();
    let count = if opts.quick { 10 } else { 50 };
    let closed = EtaConfig::default();
    let quad = EtaConfig::default().with_tail(TailMode::Quadrature);
    let (mut worst_closed, mut worst_quad) = (0f64, 0f64);
    for seed in 0..count {
        let dim = 40 + 40 * (seed as usize % 4);
        let pair = random_pair_spectra(1000 + seed, dim, 8, 1.5)?;
        let want = pair.signature_difference() as f64;
        worst_closed = worst_closed.max((relative_eta_invariant(&pair, 1, &closed)?.finite_part - want).abs());
        worst_quad = worst_quad.max((relative_eta_invariant(&pair, 1, &quad)?.finite_part - want).abs());
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: worst_closed < 1e-8 && worst_quad < 1e-4 && within(elapsed, 60),
        metric: worst_closed,
        tolerance: 1e-8,
        detail: format!(
            "{count} pairs, max residual {worst_closed:.3e} closed-form, {worst_quad:.3e} quadrature, {:.1} s",
            elapsed.as_secs_f64()
        ),
    })
}

fn sf_identity(opts: SuiteOptions) -> Result<Outcome> {
    let start = Instant::now();
    let count = if opts.quick { 5 } else { 20 };
    let grid = crate::flow_shift::chebyshev_grid(5);
    let (mut matched, mut tried, mut worst, mut seed) = (0, 0, 0f64, 2000u64);
    while tried < count {
        seed += 1;
        let path = random_path::<f64>(&mut seeded(seed), 40, 8, 2.0)?;
        let ends = [eigensolve_matrix(path.start(), false)?, eigensolve_matrix(path.end(), false)?];
        if ends.iter().any(|s| kernel_dim(s) > 0) {
            continue;
        }
        tried += 1;
        let rep = sf_eta_identity(
            &path,
            &grid,
            &EtaConfig::default(),
            &FitConfig::default(),
            &FlowConfig::default(),
        )?;
        worst = worst.max(rep.residual);
        if rep.integer_match(1e-8) {
            matched += 1;
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: matched == count && within(elapsed, 30),
        metric: worst,
        tolerance: 1e-8,
        detail: format!(
            "{matched}/{count} paths match sf, max |xi - sf| {worst:.3e}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    })
}

/// The two-dimensional example: `f₀ = |x|` and a compactly supported bump
/// patch `f`, on an `n × n` grid of spacing `h`.
pub fn example_pair_2d(n: usize, h: f64, amplitude: f64) -> Result<OperatorPair<f64>> {
    let g = Grid::centered(2, n, h, Topology::TruncatedLine)?;
    let f0 = g.sample(|x: &[f64]| x[0].hypot(x[1]));
    let a0 = build_dirac_2d(&g, &f0, DerivativeScheme::CentralDifference)?;
    let bump = g.sample(|x: &[f64]| {
        let r2 = (x[0] * x[0] + x[1] * x[1]) / 4.0;
        if r2 < 1.0 {
            amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    });
    make_pair(&a0, &Potential::sigma3(&bump)?)
}

fn example_size(opts: SuiteOptions) -> usize {
    if opts.quick {
        12
    } else {
        32
    }
}

fn example_mod2(opts: SuiteOptions) -> Result<(OperatorPath<f64>, Mod2Report<f64>)> {
    let path = example_pair_2d(example_size(opts), 0.5, -3.0)?.linear_path()?;
    let rep = mod2z_check(&path, &EtaConfig::default(), &FlowConfig::default())?;
    Ok((path, rep))
}

fn example_2d(opts: SuiteOptions) -> Result<Outcome> {
    let start = Instant::now();
    let (path, rep) = example_mod2(opts)?;
    let fit_cfg = FitConfig::least_squares();
    let mut worst_ratio = 0f64;
    let mut leading_odd = 0f64;
    for r in [0.0, 0.5, 1.0] {
        let fit = variation_coefficient(&path, r, &fit_cfg)?;
        worst_ratio = worst_ratio.max(fit.even_to_odd_ratio());
        leading_odd = leading_odd.max(fit.max_parity(false));
    }
    let elapsed = start.elapsed();
    let n = example_size(opts);
    Ok(Outcome {
        passed: rep.exact_residual < 1e-6 && worst_ratio < 1e-2 && within(elapsed, 600),
        metric: worst_ratio,
        tolerance: 1e-2,
        detail: format!(
            "{n}x{n} grid, sf {}, kernels {:?}, eta residual {:.3e}, even/odd coefficient ratio {worst_ratio:.3e} \
             (leading odd {leading_odd:.3e}), {:.1} s",
            rep.sf,
            rep.kernel_dims,
            rep.exact_residual,
            elapsed.as_secs_f64()
        ),
    })
}

fn krein(opts: SuiteOptions) -> Result<Outcome> {
    let start = Instant::now();
    let count = if opts.quick { 4 } else { 10 };
    let mut worst = 0f64;
    for seed in 0..count {
        let pair = random_pair_spectra(3000 + seed, 40, 8, 1.5)?;
        let r = pair.spectral_radius() + 1.0;
        let c = 0.1 * seed as f64 - 0.4;
        for phi in [
            TestFunction::bump(c, r + 1.0),
            TestFunction::gaussian_bump(c, 0.7, r + 1.0),
            TestFunction::polynomial_bump(c, r + 1.0),
        ] {
            worst = worst.max(krein_check(&pair, &phi)?);
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: worst < 1e-10 && within(elapsed, 5),
        metric: worst,
        tolerance: 1e-10,
        detail: format!(
            "{count} pairs x 3 test functions, max residual {worst:.3e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    })
}

/// Spectrum with `kernel` exact zeros and `dim − kernel` eigenvalues of
/// random sign, `|λ| ∈ [0.1, 2]`.
fn engineered_spectrum(seed: u64, dim: usize, kernel: usize) -> Result<Spectrum<f64>> {
    use rand::Rng;
    let mut rng = seeded(seed);
    let eigs: Vec<f64> = (0..dim)
        .map(|i| {
            if i < kernel {
                0.0
            } else {
                let mag = rng.random_range(0.1..2.0);
                if rng.random_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            }
        })
        .collect();
    eigensolve_matrix(&hermitian_with_spectrum(&mut rng, &eigs)?, false)
}

fn ssf_near_zero(opts: SuiteOptions) -> Result<Outcome> {
    let count = if opts.quick { 4 } else { 10 };
    let mut ok = 0;
    let mut cases = Vec::new();
    for j in 0..count as u64 {
        let (k0, k1) = (1 + (j % 3) as usize, (j % 2) as usize + (j % 4 == 3) as usize * 2);
        let pair = SpectralPair::new(
            engineered_spectrum(4000 + 2 * j, 24, k0)?,
            engineered_spectrum(4001 + 2 * j, 24, k1)?,
        );
        let (d0, d1) = pair.kernel_dims();
        let shift = SpectralShift::new(&pair, ShiftNormalization::PinnedAtZero);
        let want = d0 as i64 - d1 as i64;
        // δ bounds every nonzero |λ| of both operators.
        let delta = pair
            .s0
            .nonzero()
            .chain(pair.s1.nonzero())
            .fold(f64::INFINITY, |m, l| m.min(l.abs()));
        let below = shift.value(-0.5 * delta);
        if (d0, d1) == (k0, k1) && shift.near_zero_value() == want && below == 0 {
            ok += 1;
        }
        cases.push(format!("({d0},{d1})->{}", shift.near_zero_value()));
    }
    Ok(Outcome {
        passed: ok == count,
        metric: (count - ok) as f64,
        tolerance: 0.0,
        detail: format!("{ok}/{count} engineered pairs exact: {}", cases.join(" ")),
    })
}

fn large_time_decay(opts: SuiteOptions) -> Result<Outcome> {
    let count = if opts.quick { 4 } else { 10 };
    let mut ok = 0;
    let mut worst = f64::INFINITY;
    for seed in 0..count {
        let pair = random_pair_spectra(5000 + seed, 40, 8, 1.5)?;
        let d = decay_check(&pair, None, 40)?;
        worst = worst.min(d.rate / d.matrix_rate);
        if d.meets_bound() && d.meets_matrix_rate(0.9) {
            ok += 1;
        }
    }
    Ok(Outcome {
        passed: ok == count,
        metric: worst,
        tolerance: 0.9,
        detail: format!("{ok}/{count} pairs meet both bounds, min rate/delta^2 {worst:.4}"),
    })
}

fn additivity_antisymmetry(opts: SuiteOptions) -> Result<Outcome> {
    let count = if opts.quick { 3 } else { 10 };
    let cfg = EtaConfig::default();
    let samples = [c64(0.0, 0.0), c64(2.0, 0.0), c64(4.0, 0.5)];
    let (mut add, mut anti) = (0f64, 0f64);
    for seed in 0..count {
        let [s0, s1, s2] = random_gapped_triple::<f64>(&mut seeded(6000 + seed), 40, 8, 0.1)?;
        add = add.max(additivity_check(&s0, &s1, &s2, 1, &samples, &cfg)?);
        let pair = SpectralPair::new(s0, s1);
        let swapped = pair.swapped();
        anti = anti.max(
            (relative_eta_invariant(&pair, 1, &cfg)?.finite_part
                + relative_eta_invariant(&swapped, 1, &cfg)?.finite_part)
                .abs(),
        );
        for &s in &samples[1..] {
            let a = relative_eta_function(&pair, 1, s, &cfg)?;
            let b = relative_eta_function(&swapped, 1, s, &cfg)?;
            anti = anti.max((a + b).norm());
        }
    }
    let worst = add.max(anti);
    Ok(Outcome {
        passed: worst < 1e-8,
        metric: worst,
        tolerance: 1e-8,
        detail: format!("{count} triples, additivity {add:.3e}, antisymmetry {anti:.3e}"),
    })
}

/// One-dimensional model on `[−L/2, L/2]` with `N` nodes: σ₃-potential
/// `1 + ½max(|x| − 2, 0)`, constant near the central cut.
pub fn line_model(n: usize, length: f64) -> Result<DiracOperator<f64>> {
    let g = Grid::centered_on_length(1, n, length, Topology::TruncatedLine)?;
    let v = g.sample(|x: &[f64]| 1.0 + 0.5 * (x[0].abs() - 2.0).max(0.0));
    build_dirac_1d(&g, &Potential::sigma3(&v)?, DerivativeScheme::CentralDifference)
}

/// `line_model` paired with a scalar well on `x ∈ (−6, −3)`, left of the cut.
/// A scalar potential breaks the chiral symmetry of the σ₃ model.
pub fn line_pair(n: usize, length: f64, depth: f64) -> Result<OperatorPair<f64>> {
    let a0 = line_model(n, length)?;
    let g = a0.grid().expect("lattice model").clone();
    let w = g.sample(|x: &[f64]| {
        let y = (x[0] + 4.5) / 1.5;
        if y.abs() < 1.0 {
            -depth * (1.0 - 1.0 / (1.0 - y * y)).exp()
        } else {
            0.0
        }
    });
    make_pair(&a0, &Potential::scalar(&w, 2)?)
}

const LINE_LENGTH: f64 = 16.0;

fn theta_endpoints(opts: SuiteOptions) -> Result<Outcome> {
    let sizes: &[usize] = if opts.quick { &[64] } else { &[128, 256] };
    let mut worst = 0f64;
    for &n in sizes {
        let a = line_model(n, LINE_LENGTH)?;
        let cut = n / 2;
        let uncut = eigensolve(&a, false)?;
        let t = build_theta_bvp(&a, cut, std::f64::consts::FRAC_PI_4)?;
        worst = worst.max(multiset_distance(
            eigensolve(&t.operator, false)?.eigenvalues(),
            uncut.eigenvalues(),
        ));
        let aps = build_theta_bvp(&a, cut, 0.0)?;
        let mut halves = eigensolve(&build_aps_halfline(&a, cut, Side::Right, false)?, false)?
            .eigenvalues()
            .to_vec();
        halves.extend_from_slice(eigensolve(&build_aps_halfline(&a, cut, Side::Left, true)?, false)?.eigenvalues());
        worst = worst.max(multiset_distance(eigensolve(&aps.operator, false)?.eigenvalues(), &halves));
    }
    Ok(Outcome {
        passed: worst < 1e-10,
        metric: worst,
        tolerance: 1e-10,
        detail: format!("N in {sizes:?}, max multiset distance {worst:.3e}"),
    })
}

/// Nine angles in `(−π/2, π/2)` including `0` and `π/4`.
pub fn theta_grid() -> Vec<f64> {
    (0..9)
        .map(|j| -std::f64::consts::FRAC_PI_4 + std::f64::consts::PI / 12.0 * j as f64)
        .collect()
}

const NOISE_FLOOR: f64 = 1e-3;

fn theta_constancy(opts: SuiteOptions) -> Result<Outcome> {
    let sizes: &[usize] = if opts.quick { &[64, 128] } else { &[128, 256, 512, 1024] };
    let cfg = EtaConfig::default();
    let mut curve = Vec::new();
    for &n in sizes {
        let pair = line_pair(n, LINE_LENGTH, 2.5)?;
        curve.push(theta_xi_scan(&pair, n / 2, &theta_grid(), &cfg)?.sup_variation);
    }
    let monotone = curve.windows(2).all(|w| w[1] <= w[0] || w[1] < NOISE_FLOOR);
    let points: Vec<String> = sizes.iter().zip(&curve).map(|(n, v)| format!("N={n}: {v:.3e}")).collect();
    Ok(Outcome {
        passed: monotone,
        metric: *curve.last().unwrap_or(&f64::NAN),
        tolerance: NOISE_FLOOR,
        detail: format!("sup-variation {}", points.join(", ")),
    })
}

fn gluing_mod_z(opts: SuiteOptions) -> Result<Outcome> {
    let start = Instant::now();
    let (coarse, fine) = if opts.quick { (128, 256) } else { (512, 1024) };
    let cfg = EtaConfig::default();
    let mut res = Vec::new();
    for n in [coarse, fine] {
        res.push(gluing_check(&line_pair(n, LINE_LENGTH, 2.5)?, n / 2, &cfg)?.residual);
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: res[0] < 0.05 && res[1] < res[0] && within(elapsed, 300),
        metric: res[1],
        tolerance: res[0],
        detail: format!(
            "residual N={coarse}: {:.3e}, N={fine}: {:.3e}, {:.1} s",
            res[0],
            res[1],
            elapsed.as_secs_f64()
        ),
    })
}

fn mod_2z(opts: SuiteOptions) -> Result<Outcome> {
    let count = if opts.quick { 5 } else { 20 };
    let (_, example) = example_mod2(opts)?;
    let mut worst = example.residual;
    for seed in 0..count {
        let path = random_path::<f64>(&mut seeded(7000 + seed), 40, 8, 2.0)?;
        worst = worst.max(mod2z_check(&path, &EtaConfig::default(), &FlowConfig::default())?.residual);
    }
    Ok(Outcome {
        passed: worst < 1e-8,
        metric: worst,
        tolerance: 1e-8,
        detail: format!(
            "example (sf {}) and {count} random paths, max distance to 2Z {worst:.3e}",
            example.sf
        ),
    })
}

fn residue(opts: SuiteOptions) -> Result<Outcome> {
    let count = if opts.quick { 4 } else { 10 };
    let exact = EtaConfig::default();
    let ls = EtaConfig::default().with_fit_mode(FitMode::LeastSquares);
    let (mut worst_exact, mut worst_ls) = (0f64, 0f64);
    for seed in 0..count {
        let pair = random_pair_spectra(8000 + seed, 40, 8, 1.5)?;
        worst_exact = worst_exact.max(relative_eta_invariant(&pair, 1, &exact)?.residue.abs());
        worst_ls = worst_ls.max(relative_eta_invariant(&pair, 1, &ls)?.residue.abs());
    }
    Ok(Outcome {
        passed: worst_exact == 0.0 && worst_ls < 1e-3,
        metric: worst_ls,
        tolerance: 1e-3,
        detail: format!("{count} pairs, exact-taylor residue {worst_exact:.3e}, least-squares {worst_ls:.3e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion_is_none() {
        assert!(run_criterion(0, SuiteOptions::default()).is_none());
        assert!(run_criterion(13, SuiteOptions::default()).is_none());
    }

    #[test]
    fn ids_are_sequential() {
        for (i, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.id as usize, i + 1);
        }
    }

    #[test]
    fn theta_grid_contains_anchors() {
        let g = theta_grid();
        assert_eq!(g.len(), 9);
        assert!(g.iter().any(|t| t.abs() < 1e-15));
        assert!(g.iter().any(|t| (t - std::f64::consts::FRAC_PI_4).abs() < 1e-15));
        assert!(g.iter().all(|t| t.abs() < std::f64::consts::FRAC_PI_2));
    }

    #[test]
    fn failing_line_names_identity() {
        let r = CriterionReport {
            id: 4,
            name: "krein",
            identity: "Krein trace formula",
            passed: false,
            metric: 1.0,
            tolerance: 1e-10,
            detail: "x".into(),
            elapsed: Duration::ZERO,
        };
        assert!(r.line().starts_with("FAIL [ 4] krein (Krein trace formula)"));
    }

    #[test]
    fn quick_krein_passes() {
        let r = run_criterion(4, SuiteOptions { quick: true }).unwrap();
        assert!(r.passed, "{}", r.line());
    }
}
