//! Spectral flow by sorted-eigenvalue tracking with a Weyl-bound certificate.
//!
//! Sorted eigenvalues of a Hermitian family are continuous in `r`, and along
//! `A_r = base + ρ(r)·P` each one moves by at most `‖P‖·Lip(ρ)·|Δr|`. An
//! interval `[a, b]` is settled once no sorted slot can reach zero inside it;
//! otherwise it is bisected, down to `min_width`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::OperatorPath;
use crate::scalar::Real;
use crate::spectrum::eigensolve;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig<T> {
    /// Uniform samples before adaptive refinement.
    pub initial_steps: usize,
    /// Intervals narrower than this are not split further; crossings are
    /// located to this width.
    pub min_width: T,
    /// Eigensolve budget; exceeding it raises `TrackingFailed`.
    pub max_evaluations: usize,
    /// Relative kernel tolerance for the sign classification.
    pub kernel_tol: T,
}

impl<T: Real> Default for FlowConfig<T> {
    fn default() -> Self {
        Self {
            initial_steps: 16,
            min_width: T::lit(1e-3),
            max_evaluations: 20_000,
            kernel_tol: T::default_kernel_tol(),
        }
    }
}

/// Sorted spectrum of the path at one parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample<T> {
    pub r: T,
    pub eigenvalues: Vec<T>,
    /// Kernel threshold used to classify signs at this sample.
    pub threshold: T,
}

impl<T: Real> FlowSample<T> {
    fn negative(&self, i: usize) -> bool {
        self.eigenvalues[i] <= -self.threshold
    }

    pub fn negative_count(&self) -> usize {
        (0..self.eigenvalues.len()).filter(|&i| self.negative(i)).count()
    }

    fn min_abs(&self) -> T {
        self.eigenvalues.iter().fold(T::infinity(), |m, v| m.min(v.abs()))
    }

    fn min_spacing(&self) -> T {
        self.eigenvalues
            .windows(2)
            .fold(T::infinity(), |m, w| m.min(w[1] - w[0]))
    }
}

/// A zero crossing: `+1` for negative → nonnegative, `−1` for the reverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing<T> {
    pub r: T,
    pub direction: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult<T> {
    pub sf: i64,
    pub crossings: Vec<Crossing<T>>,
    /// Eigensolves performed.
    pub steps_used: usize,
    /// Smallest spacing between neighbouring eigenvalues over all samples.
    pub min_matching_gap: T,
    /// Every sample in increasing `r`, for eigenvalue-flow plots.
    pub samples: Vec<FlowSample<T>>,
}

fn sample<T: Real>(path: &OperatorPath<T>, r: T, kernel_tol: T) -> Result<FlowSample<T>> {
    let s = eigensolve(&path.evaluate(r), false)?.with_kernel_tol(kernel_tol);
    Ok(FlowSample {
        r,
        threshold: s.kernel_threshold(),
        eigenvalues: s.eigenvalues().to_vec(),
    })
}

/// Whether some sorted slot could touch zero on `[a, b]` given the drift bound.
fn ambiguous<T: Real>(a: &FlowSample<T>, b: &FlowSample<T>, drift: T) -> bool {
    let reach = drift + a.threshold.max(b.threshold);
    a.eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .any(|(x, y)| x.abs() <= reach && y.abs() <= reach)
}

/// Spectral flow of `path` over `[0, 1]`, with the kernel counted on the
/// nonnegative side so that `sf = n₋(A_0) − n₋(A_1)`.
pub fn spectral_flow<T: Real>(path: &OperatorPath<T>, cfg: &FlowConfig<T>) -> Result<FlowResult<T>> {
    let steps = cfg.initial_steps.max(1);
    let grid: Vec<T> = (0..=steps)
        .map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(steps))
        .collect();
    let initial: Vec<FlowSample<T>> = grid
        .par_iter()
        .map(|&r| sample(path, r, cfg.kernel_tol))
        .collect::<Result<_>>()?;
    let speed = path.patch_norm() * path.schedule().lipschitz();
    let mut evaluations = initial.len();
    let mut settled: Vec<FlowSample<T>> = vec![initial[0].clone()];
    let mut crossings = Vec::new();
    // Depth-first over the initial intervals, keeping samples in order.
    for pair in initial.windows(2) {
        let mut stack = vec![(pair[0].clone(), pair[1].clone())];
        while let Some((a, b)) = stack.pop() {
            let width = b.r - a.r;
            if ambiguous(&a, &b, speed * width) && width > cfg.min_width {
                if evaluations >= cfg.max_evaluations {
                    return Err(Error::TrackingFailed { r: a.r.to_f64_lossy() });
                }
                let mid = sample(path, (a.r + b.r) * T::lit(0.5), cfg.kernel_tol)?;
                evaluations += 1;
                stack.push((mid.clone(), b));
                stack.push((a, mid));
                continue;
            }
            let at = (a.r + b.r) * T::lit(0.5);
            for i in 0..a.eigenvalues.len() {
                match (a.negative(i), b.negative(i)) {
                    (true, false) => crossings.push(Crossing { r: at, direction: 1 }),
                    (false, true) => crossings.push(Crossing { r: at, direction: -1 }),
                    _ => {}
                }
            }
            settled.push(b);
        }
    }
    let sf: i64 = crossings.iter().map(|c| c.direction as i64).sum();
    let ends = settled[0].negative_count() as i64 - settled[settled.len() - 1].negative_count() as i64;
    debug_assert_eq!(sf, ends);
    let min_matching_gap = settled.iter().fold(T::infinity(), |m, s| m.min(s.min_spacing()));
    Ok(FlowResult {
        sf,
        crossings,
        steps_used: evaluations,
        min_matching_gap,
        samples: settled,
    })
}

/// `n₋(A_0) − n₋(A_1)` from the two endpoint eigensolves alone.
pub fn endpoint_flow<T: Real>(path: &OperatorPath<T>, kernel_tol: T) -> Result<i64> {
    let a = sample(path, T::zero(), kernel_tol)?;
    let b = sample(path, T::one(), kernel_tol)?;
    Ok(a.negative_count() as i64 - b.negative_count() as i64)
}

/// Smallest `|λ|` over the samples of a flow, a quick invertibility gauge.
pub fn min_abs_along<T: Real>(flow: &FlowResult<T>) -> T {
    flow.samples.iter().fold(T::infinity(), |m, s| m.min(s.min_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DiracOperator, Potential, Schedule};
    use crate::matrix::Matrix;
    use crate::random::{random_path, seeded};
    use proptest::prelude::*;

    fn scalar_path(start: f64, slope: f64) -> OperatorPath<f64> {
        let base = DiracOperator::from_matrix(Matrix::from_real_diagonal(&[start]), 1, 0).unwrap();
        let patch = Potential::scalar(&[slope], 1).unwrap();
        OperatorPath::new(base, patch, Schedule::Linear).unwrap()
    }

    #[test]
    fn single_crossing_at_one_half() {
        let f = spectral_flow(&scalar_path(-0.5, 1.0), &FlowConfig::default()).unwrap();
        assert_eq!(f.sf, 1);
        assert_eq!(f.crossings.len(), 1);
        assert_eq!(f.crossings[0].direction, 1);
        assert!((f.crossings[0].r - 0.5).abs() <= 1e-3);
    }

    #[test]
    fn downward_crossing_is_negative() {
        let f = spectral_flow(&scalar_path(0.25, -1.0), &FlowConfig::default()).unwrap();
        assert_eq!(f.sf, -1);
        assert!((f.crossings[0].r - 0.25).abs() <= 1e-3);
    }

    #[test]
    fn constant_path_has_no_flow() {
        let f = spectral_flow(&scalar_path(0.3, 0.0), &FlowConfig::default()).unwrap();
        assert_eq!(f.sf, 0);
        assert!(f.crossings.is_empty());
        assert_eq!(f.steps_used, 17);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = FlowConfig {
            max_evaluations: 18,
            ..FlowConfig::default()
        };
        let err = spectral_flow(&scalar_path(-0.5, 1.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::TrackingFailed { .. }));
    }

    #[test]
    fn samples_are_ordered() {
        let p = random_path::<f64>(&mut seeded(4), 40, 8, 2.0).unwrap();
        let f = spectral_flow(&p, &FlowConfig::default()).unwrap();
        assert!(f.samples.windows(2).all(|w| w[0].r < w[1].r));
        assert_eq!(f.samples[0].r, 0.0);
        assert_eq!(f.samples.last().unwrap().r, 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn flow_equals_endpoint_counts(seed in 0u64..10_000) {
            let p = random_path::<f64>(&mut seeded(seed), 40, 8, 2.0).unwrap();
            let f = spectral_flow(&p, &FlowConfig::default()).unwrap();
            prop_assert_eq!(f.sf, endpoint_flow(&p, 1e-8).unwrap());
        }

        #[test]
        fn flow_is_additive(seed in 0u64..10_000) {
            let p = random_path::<f64>(&mut seeded(seed), 30, 6, 2.0).unwrap();
            let cfg = FlowConfig::default();
            let whole = spectral_flow(&p, &cfg).unwrap().sf;
            let left = spectral_flow(&p.with_schedule(Schedule::Affine(0.0, 0.5)).unwrap(), &cfg).unwrap().sf;
            let right = spectral_flow(&p.with_schedule(Schedule::Affine(0.5, 1.0)).unwrap(), &cfg).unwrap().sf;
            prop_assert_eq!(whole, left + right);
        }

        #[test]
        fn flow_is_homotopy_invariant(seed in 0u64..10_000, a in -0.3f64..0.3) {
            let p = random_path::<f64>(&mut seeded(seed), 30, 6, 2.0).unwrap();
            let cfg = FlowConfig::default();
            let base = spectral_flow(&p, &cfg).unwrap().sf;
            for sched in [Schedule::Smoothstep, Schedule::Wiggle(a)] {
                let other = spectral_flow(&p.with_schedule(sched).unwrap(), &cfg).unwrap().sf;
                prop_assert_eq!(base, other);
            }
        }
    }
}
