//! Steepest ascent on the complex Grassmann manifold.
//!
//! The search direction is the Euclidean gradient projected onto the
//! horizontal space at `F`, `Z = (I - F F^*) G`, and every trial point is
//! mapped back onto the manifold by the polar factor of `F + t Z`.

use crate::constrained::objective::Objective;
use crate::linalg;
use crate::scalar::Real;
use crate::CMat;

/// A subspace represented by an orthonormal basis, with its objective value.
#[derive(Debug, Clone)]
pub struct GrassmannPoint<T: Real> {
    pub f: CMat<T>,
    pub value: T,
}

/// How the step length along `Z` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Start every iteration from `initial_step` and halve until the
    /// objective improves.
    Halving,
    /// Armijo doubling/halving: grow the step while doubling it still gives
    /// an increase of at least `t ||Z||^2`, then shrink until the increase
    /// is at least `t ||Z||^2 / 2`. The step carries over between iterations.
    Armijo,
    /// Barzilai-Borwein trial length from the last displacement and gradient
    /// change, halved until the increase is at least `1e-4 t ||Z||^2`.
    BarzilaiBorwein,
}

#[derive(Debug, Clone, Copy)]
pub struct MgmOptions<T: Real> {
    /// Stop once `||Z||_F` falls below this.
    pub tol: T,
    pub max_iters: usize,
    pub initial_step: T,
    pub rule: StepRule,
    /// Give up on an iteration after this many step reductions.
    pub max_halvings: usize,
}

impl<T: Real> Default for MgmOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            max_iters: 500,
            initial_step: T::one(),
            rule: StepRule::BarzilaiBorwein,
            max_halvings: 60,
        }
    }
}

/// Per-iteration record; entry 0 is the initial point. Later values are the
/// initial value plus the accumulated step gains.
#[derive(Debug, Clone)]
pub struct MgmTrace<T: Real> {
    pub values: Vec<T>,
    pub gradient_norms: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct MgmOutcome<T: Real> {
    pub point: GrassmannPoint<T>,
    pub trace: MgmTrace<T>,
    /// Accepted steps.
    pub iterations: usize,
    /// `false` when the iteration cap was hit or no step improved the objective
    /// before the tolerance was met.
    pub converged: bool,
}

fn retract<T: Real>(f: &CMat<T>, z: &CMat<T>, t: T) -> CMat<T> {
    linalg::polar_factor(&(f + linalg::scale(z, t)))
}

/// Maximizes `objective` over the Grassmann manifold starting at `init`
/// (whose columns must be orthonormal).
pub fn mgm_optimize<T: Real, O: Objective<T> + ?Sized>(
    init: &CMat<T>,
    objective: &O,
    options: &MgmOptions<T>,
) -> MgmOutcome<T> {
    let mut f = init.clone();
    let eye = linalg::identity::<T>(f.nrows());
    let mut trace = MgmTrace {
        values: Vec::new(),
        gradient_norms: Vec::new(),
    };
    let mut step = options.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    let (mut value, mut grad) = objective.value_and_gradient(&f);
    let mut previous: Option<(CMat<T>, CMat<T>)> = None;
    loop {
        let z = (&eye - &f * f.adjoint()) * &grad;
        let znorm_sq = linalg::frobenius_sq(&z);
        let znorm = znorm_sq.sqrt();
        trace.values.push(value);
        trace.gradient_norms.push(znorm);
        if znorm < options.tol {
            converged = true;
            break;
        }
        if iterations == options.max_iters {
            break;
        }
        let accepted = match options.rule {
            StepRule::Halving => halving_step(&f, &z, objective, options),
            StepRule::Armijo => armijo_step(&f, &z, znorm_sq, objective, options, &mut step),
            StepRule::BarzilaiBorwein => {
                if let Some((f_old, z_old)) = &previous {
                    step = bb_length(&f, &z, f_old, z_old, &eye).unwrap_or(step);
                }
                backtrack_step(&f, &z, znorm_sq, objective, options, &mut step)
            }
        };
        previous = Some((f.clone(), z));
        let Some((next, gain)) = accepted else {
            break;
        };
        f = next;
        iterations += 1;
        // the trace accumulates the measured gains so it stays monotone even
        // when the gain is below the resolution of the value itself
        value += gain;
        grad = objective.value_and_gradient(&f).1;
    }
    let value = objective.value(&f);
    MgmOutcome {
        point: GrassmannPoint { f, value },
        trace,
        iterations,
        converged,
    }
}

fn halving_step<T: Real, O: Objective<T> + ?Sized>(
    f: &CMat<T>,
    z: &CMat<T>,
    objective: &O,
    options: &MgmOptions<T>,
) -> Option<(CMat<T>, T)> {
    let mut t = options.initial_step;
    for _ in 0..=options.max_halvings {
        let gain = objective.step_gain(f, z, t);
        if gain > T::zero() {
            return Some((retract(f, z, t), gain));
        }
        t *= T::lit(0.5);
    }
    None
}

fn armijo_step<T: Real, O: Objective<T> + ?Sized>(
    f: &CMat<T>,
    z: &CMat<T>,
    znorm_sq: T,
    objective: &O,
    options: &MgmOptions<T>,
    step: &mut T,
) -> Option<(CMat<T>, T)> {
    let two = T::lit(2.0);
    let mut t = *step;
    let mut gain = objective.step_gain(f, z, t);
    for _ in 0..options.max_halvings {
        let wide_gain = objective.step_gain(f, z, two * t);
        if wide_gain < t * znorm_sq {
            break;
        }
        t *= two;
        gain = wide_gain;
    }
    let mut halvings = 0;
    while gain < t * znorm_sq / two {
        if halvings == options.max_halvings {
            return None;
        }
        t /= two;
        gain = objective.step_gain(f, z, t);
        halvings += 1;
    }
    if gain <= T::zero() {
        return None;
    }
    *step = t;
    Some((retract(f, z, t), gain))
}

/// `<s, s> / <s, y>` with `s` the displacement and `y` the change of the
/// descent gradient, both taken in the horizontal space at `f`.
fn bb_length<T: Real>(
    f: &CMat<T>,
    z: &CMat<T>,
    f_old: &CMat<T>,
    z_old: &CMat<T>,
    eye: &CMat<T>,
) -> Option<T> {
    let proj = eye - f * f.adjoint();
    let s = &proj * (f - f_old);
    let y = &proj * (z_old - z);
    let ss = linalg::frobenius_sq(&s);
    let sy = linalg::real_inner(&s, &y);
    let t = ss / sy;
    (sy > T::zero() && t.is_finite()).then_some(t)
}

fn backtrack_step<T: Real, O: Objective<T> + ?Sized>(
    f: &CMat<T>,
    z: &CMat<T>,
    znorm_sq: T,
    objective: &O,
    options: &MgmOptions<T>,
    step: &mut T,
) -> Option<(CMat<T>, T)> {
    let mut t = *step;
    for _ in 0..=options.max_halvings {
        let gain = objective.step_gain(f, z, t);
        if gain > T::zero() && gain >= T::lit(1e-4) * t * znorm_sq {
            *step = t;
            return Some((retract(f, z, t), gain));
        }
        t *= T::lit(0.5);
    }
    None
}
