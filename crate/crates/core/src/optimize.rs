//! Seesaw maximization of `max(|tr ρB|, |tr ρB'|)` over measurement settings.
//!
//! With ρ and all other observables fixed, the Bell expectation is affine in a
//! single slot `A`: `tr ρB = tr(A R) + c`. Its maximum over `-1 ≤ A ≤ 1` is the
//! spectral sign of `R`, so cycling exact best responses over the `2n` slots
//! never decreases the objective.

use rand::Rng;
use serde::Serialize;

use crate::bell::{contract_raw, MeasurementConfig, QubitObservable};
use crate::error::{argument, Result};
use crate::exec::Execution;
use crate::matrix::{expectation, pauli, site_environment, ComplexMatrix, C64, PSD_TOL};
use crate::partition::validate_density;
use crate::states::{random_extremal_config, stream_rng};

/// Below this total scale `R` is treated as zero and the slot is left unchanged.
const FLAT_TOL: f64 = 1e-14;
/// Relative size under which an eigenvalue of `R` counts as zero.
const DEGENERATE_TOL: f64 = 1e-12;

/// Signed Bell expectation being pushed upward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Bell,
    NegBell,
    BellPrime,
    NegBellPrime,
}

impl Target {
    pub const ALL: [Target; 4] = [
        Target::Bell,
        Target::NegBell,
        Target::BellPrime,
        Target::NegBellPrime,
    ];

    /// Value of this target for `z = tr(ρ b)`.
    pub fn value(self, z: C64) -> f64 {
        (self.weight() * z).re
    }

    // tr ρB = Re((1+i) z), tr ρB' = Re((1-i) z).
    fn weight(self) -> C64 {
        match self {
            Target::Bell => C64::new(1.0, 1.0),
            Target::NegBell => C64::new(-1.0, -1.0),
            Target::BellPrime => C64::new(1.0, -1.0),
            Target::NegBellPrime => C64::new(-1.0, 1.0),
        }
    }

    /// Best target for `z`; ties go to the earlier entry of [`Target::ALL`].
    pub fn best(z: C64) -> (Target, f64) {
        Target::ALL.iter().map(|&t| (t, t.value(z))).fold(
            (Target::Bell, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub conv_tol: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 500,
            conv_tol: 1e-9,
            seed: 0,
        }
    }
}

/// One slot's view of the objective: `f(X) = Re(w · tr(E · a(X)))` where `a`
/// contracts `X` with the fixed partner observable.
struct SlotView {
    env: ComplexMatrix,
    partner: ComplexMatrix,
    primed: bool,
}

impl SlotView {
    fn new(rho: &ComplexMatrix, config: &MeasurementConfig, site: usize, primed: bool) -> Self {
        let factors = config.contractions();
        Self {
            env: site_environment(rho, &factors, site),
            partner: config.slot(site, !primed).matrix().clone(),
            primed,
        }
    }

    fn contraction(&self, x: &ComplexMatrix) -> ComplexMatrix {
        if self.primed {
            contract_raw(&self.partner, x)
        } else {
            contract_raw(x, &self.partner)
        }
    }

    fn z(&self, x: &ComplexMatrix) -> C64 {
        expectation(&self.env, &self.contraction(x)).expect("2x2 operands")
    }

    /// `(R, c)` with `target(X) = tr(X R) + c`, probed at `0, 1, σx, σy, σz`.
    fn affine(&self, target: Target) -> (ComplexMatrix, f64) {
        let f = |x: &ComplexMatrix| target.value(self.z(x));
        let c = f(&ComplexMatrix::zeros(2));
        let t = [
            f(&ComplexMatrix::identity(2)) - c,
            f(&pauli::x()) - c,
            f(&pauli::y()) - c,
            f(&pauli::z()) - c,
        ];
        (
            pauli::combine(t[0] / 2.0, t[1] / 2.0, t[2] / 2.0, t[3] / 2.0),
            c,
        )
    }
}

/// Affine decomposition `target = tr(A R) + c` for one observable slot.
pub fn slot_affine(
    rho: &ComplexMatrix,
    config: &MeasurementConfig,
    site: usize,
    primed: bool,
    target: Target,
) -> Result<(ComplexMatrix, f64)> {
    config.check_site(site)?;
    if rho.dim() != 1 << config.n() {
        return Err(argument(format!(
            "{}-dim state for {} sites",
            rho.dim(),
            config.n()
        )));
    }
    Ok(SlotView::new(rho, config, site, primed).affine(target))
}

/// The 2×2 Hermitian `R` with `tr(ρB) = tr(A R) + c` as the slot `(site, primed)` varies.
pub fn effective_operator(
    rho: &ComplexMatrix,
    config: &MeasurementConfig,
    site: usize,
    primed: bool,
) -> Result<ComplexMatrix> {
    slot_affine(rho, config, site, primed, Target::Bell).map(|(r, _)| r)
}

/// Maximizer of `tr(A R)` over `-1 ≤ A ≤ 1`: the spectral sign of `R`.
///
/// A zero eigenvalue takes the sign of `previous` on its eigenvector (`+1` if
/// that is zero too); `R = 0` returns `previous` unchanged.
pub fn best_response(r: &ComplexMatrix, previous: &QubitObservable) -> QubitObservable {
    let r0 = 0.5 * (r[(0, 0)].re + r[(1, 1)].re);
    let rz = 0.5 * (r[(0, 0)].re - r[(1, 1)].re);
    let rx = 0.5 * (r[(0, 1)].re + r[(1, 0)].re);
    let ry = 0.5 * (r[(1, 0)].im - r[(0, 1)].im);
    let radius = (rx * rx + ry * ry + rz * rz).sqrt();
    let scale = r0.abs() + radius;
    if scale <= FLAT_TOL {
        return previous.clone();
    }
    let prev = previous.matrix();
    let sign_on = |projector: &ComplexMatrix, eigenvalue: f64| -> f64 {
        if eigenvalue.abs() > DEGENERATE_TOL * scale {
            eigenvalue.signum()
        } else {
            let overlap = expectation(projector, prev).expect("2x2").re;
            if overlap < -DEGENERATE_TOL {
                -1.0
            } else {
                1.0
            }
        }
    };
    if radius <= DEGENERATE_TOL * scale {
        // R ∝ 1 with nonzero multiple.
        return QubitObservable::new_unchecked(ComplexMatrix::identity(2).scale_real(r0.signum()));
    }
    let (nx, ny, nz) = (rx / radius, ry / radius, rz / radius);
    let p_plus = pauli::combine(0.5, nx / 2.0, ny / 2.0, nz / 2.0);
    let p_minus = pauli::combine(0.5, -nx / 2.0, -ny / 2.0, -nz / 2.0);
    let s_plus = sign_on(&p_plus, r0 + radius);
    let s_minus = sign_on(&p_minus, r0 - radius);
    QubitObservable::new_unchecked(&p_plus.scale_real(s_plus) + &p_minus.scale_real(s_minus))
}

/// Trace of a single seesaw run from fixed initial settings.
#[derive(Clone, Debug, Serialize)]
pub struct RestartTrace {
    pub config: MeasurementConfig,
    pub value: f64,
    pub target: Target,
    /// Objective after each full sweep over the `2n` slots, starting with the initial value.
    pub history: Vec<f64>,
    /// Objective after every single-slot update.
    #[serde(skip)]
    pub steps: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs cyclic best responses from `initial` until a sweep gains less than
/// `conv_tol` or `max_iters` sweeps have run.
pub fn seesaw(
    rho: &ComplexMatrix,
    initial: MeasurementConfig,
    max_iters: usize,
    conv_tol: f64,
) -> RestartTrace {
    let n = initial.n();
    let mut config = initial;
    let z = crate::matrix::product_expectation(rho, &config.contractions());
    let (mut target, mut value) = Target::best(z);
    let mut history = vec![value];
    let mut steps = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let start = value;
        for site in 1..=n {
            for primed in [false, true] {
                let view = SlotView::new(rho, &config, site, primed);
                let (r, _) = view.affine(target);
                let next = best_response(&r, config.slot(site, primed));
                let z = view.z(next.matrix());
                config.set_slot(site, primed, next);
                (target, value) = Target::best(z);
                steps.push(value);
            }
        }
        history.push(value);
        if value - start < conv_tol {
            converged = true;
            break;
        }
    }
    RestartTrace {
        config,
        value,
        target,
        history,
        steps,
        iterations,
        converged,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizeResult {
    pub best_value: f64,
    /// Which signed Bell expectation attains `best_value`.
    pub target: Target,
    pub config: MeasurementConfig,
    pub restarts_used: usize,
    /// Index of the restart that produced the best value.
    pub best_restart: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Per-sweep objective of the best restart.
    pub history: Vec<f64>,
    /// Final objective of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// Best seesaw result over `options.restarts` random extremal starts.
///
/// Restart `r` draws its initial settings from ChaCha8 stream `r` of
/// `options.seed`, so the result does not depend on `exec`.
pub fn maximize_violation(
    rho: &ComplexMatrix,
    options: &SeesawOptions,
    exec: Execution,
) -> Result<OptimizeResult> {
    if options.restarts == 0 || options.max_iters == 0 {
        return Err(argument("restarts and max_iters must be at least 1"));
    }
    let n = validate_density(rho, PSD_TOL)?;
    let traces = exec.try_map(options.restarts, |r| {
        let mut rng = stream_rng(options.seed, r as u64);
        let initial = random_extremal_config(&mut rng, n)?;
        Ok(seesaw(rho, initial, options.max_iters, options.conv_tol))
    })?;
    let restart_values: Vec<f64> = traces.iter().map(|t| t.value).collect();
    let (best_restart, _) =
        restart_values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
                if v > best.1 {
                    (k, v)
                } else {
                    best
                }
            });
    let best = traces
        .into_iter()
        .nth(best_restart)
        .expect("at least one restart");
    Ok(OptimizeResult {
        best_value: best.value,
        target: best.target,
        config: best.config,
        restarts_used: options.restarts,
        best_restart,
        iterations: best.iterations,
        converged: best.converged,
        history: best.history,
        restart_values,
    })
}

/// Random Hermitian 2×2 with coefficients uniform in `[-1, 1)`.
pub fn random_probe<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    pauli::combine(c[0], c[1], c[2], c[3])
}
