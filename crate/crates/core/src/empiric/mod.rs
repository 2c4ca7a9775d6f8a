//! Independent oracle: rediscovers stationary points by multistart
//! Riemannian iteration, without the closed-form enumeration.
//!
//! Two iterations are available. [`DescentMode::Objective`] is projected
//! gradient descent with Armijo backtracking on `δ_A`; it only reaches local
//! minima. [`DescentMode::GradientNorm`] drives the Riemannian gradient to
//! zero with damped Gauss-Newton steps in a retraction chart, so saddles are
//! reachable too; this is the mode used for completeness checks.

use nalgebra::{DMatrix, DVector};

use crate::models::{LocalFrame, ModelHandle};
use crate::stationary::{Label, StationaryPoint};
use crate::{EdError, Mat, Result};

/// Single-linkage threshold, relative to `1 + ‖A‖_F`.
pub const CLUSTER_TOL: f64 = 1e-4;

/// Membership bound for converged iterates, relative to `1 + ‖A‖_F`.
const MEMBERSHIP_TOL: f64 = 1e-8;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentMode {
    /// Backtracking descent on `δ_A`.
    Objective,
    /// Levenberg-Marquardt on `‖grad δ_A‖`.
    GradientNorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentParams {
    pub max_iters: usize,
    /// Initial step; `None` means `0.1 / (1 + ‖A‖_F)`.
    pub step: Option<f64>,
    /// Backtracking (and damping) factor in `(0, 1)`.
    pub shrink: f64,
    /// Convergence threshold on the stationarity residual, relative to
    /// `1 + ‖A‖_F`.
    pub grad_tol: f64,
    pub mode: DescentMode,
}

impl Default for DescentParams {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step: None,
            shrink: 0.5,
            grad_tol: 1e-9,
            mode: DescentMode::GradientNorm,
        }
    }
}

impl DescentParams {
    pub fn objective_descent() -> Self {
        Self {
            mode: DescentMode::Objective,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let step_ok = self.step.is_none_or(|s| s > 0.0 && s.is_finite());
        if self.max_iters == 0
            || !step_ok
            || !(self.shrink > 0.0 && self.shrink < 1.0)
            || !(self.grad_tol > 0.0)
        {
            return Err(EdError::InvalidParameter(format!(
                "invalid descent parameters {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub x: Mat,
    /// Final stationarity residual.
    pub residual: f64,
    pub iterations: usize,
    /// Merit after each accepted iteration, starting at `x0`: the objective
    /// in [`DescentMode::Objective`], the gradient norm otherwise.
    pub merit_trace: Vec<f64>,
}

struct State {
    x: Mat,
    frame: LocalFrame,
    grad: Mat,
}

impl State {
    fn new(model: &ModelHandle, a: &Mat, x: Mat, frame: LocalFrame) -> Self {
        let grad = model.project_with(&frame, &x, &(&x - a));
        Self { x, frame, grad }
    }

    fn residual(&self) -> f64 {
        self.grad.norm()
    }
}

fn retract_state(model: &ModelHandle, a: &Mat, y: &Mat) -> Option<State> {
    let (x, frame) = model.retract(y).ok()?;
    let s = State::new(model, a, x, frame);
    s.residual().is_finite().then_some(s)
}

fn coords(basis: &[Mat], v: &Mat) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|e| e.dot(v)))
}

fn chart_point(x: &Mat, basis: &[Mat], omega: &DVector<f64>) -> Mat {
    let mut y = x.clone();
    for (e, w) in basis.iter().zip(omega.iter()) {
        y += e * *w;
    }
    y
}

/// Runs the iteration from the on-model `x0` until the stationarity residual
/// drops below `grad_tol·(1 + ‖A‖_F)`. Fails with [`EdError::NoConvergence`]
/// when the budget is exhausted or the iteration stalls.
pub fn riemannian_descent(
    model: &ModelHandle,
    a: &Mat,
    x0: &Mat,
    params: &DescentParams,
) -> Result<DescentOutcome> {
    params.validate()?;
    let frame = model.local_frame(x0)?;
    model.check_shape(a)?;
    let residual = model.membership_residual(x0)?;
    let scale = 1.0 + a.norm();
    if !(residual <= MEMBERSHIP_TOL * scale * model.n().max(1) as f64) {
        return Err(EdError::NotOnManifold {
            residual,
            tol: MEMBERSHIP_TOL * scale,
        });
    }
    let state = State::new(model, a, x0.clone(), frame);
    let tol = params.grad_tol * scale;
    match params.mode {
        DescentMode::Objective => objective_descent(model, a, state, params, tol),
        DescentMode::GradientNorm => gradient_norm_descent(model, a, state, params, tol),
    }
}

fn finish(
    state: State,
    iterations: usize,
    merit_trace: Vec<f64>,
    tol: f64,
) -> Result<DescentOutcome> {
    let residual = state.residual();
    if residual <= tol {
        Ok(DescentOutcome {
            x: state.x,
            residual,
            iterations,
            merit_trace,
        })
    } else {
        Err(EdError::NoConvergence { residual })
    }
}

fn objective_descent(
    model: &ModelHandle,
    a: &Mat,
    mut state: State,
    params: &DescentParams,
    tol: f64,
) -> Result<DescentOutcome> {
    let initial = params.step.unwrap_or(0.1 / (1.0 + a.norm()));
    let max_step = initial.max(1.0);
    let mut eta = initial;
    let mut f = 0.5 * (&state.x - a).norm_squared();
    let mut trace = vec![f];
    let mut iterations = 0;
    while iterations < params.max_iters && state.residual() > tol {
        let g2 = state.grad.norm_squared();
        let mut accepted = None;
        // below this the Armijo test only sees round-off
        let resolvable = g2 * max_step > 1e-13 * (1.0 + f);
        while resolvable && eta > 1e-16 * initial {
            let y = &state.x - &state.grad * eta;
            if let Some(next) = retract_state(model, a, &y) {
                // exact difference of the two objectives, free of cancellation
                let mid = (&next.x + &state.x) * 0.5 - a;
                let decrease = (&next.x - &state.x).dot(&mid);
                if decrease <= -1e-4 * eta * g2 {
                    accepted = Some((next, f + decrease));
                    break;
                }
            }
            eta *= params.shrink;
        }
        let Some((next, f_next)) = accepted else {
            // Armijo decrease is below round-off: polish the minimizer reached
            // so far with Gauss-Newton steps, leaving the objective trace as is
            let polish = DescentParams {
                max_iters: params.max_iters - iterations,
                ..*params
            };
            let out = gradient_norm_descent(model, a, state, &polish, tol)?;
            return Ok(DescentOutcome {
                iterations: iterations + out.iterations,
                merit_trace: trace,
                ..out
            });
        };
        state = next;
        f = f_next;
        trace.push(f);
        eta = (eta / params.shrink).min(max_step);
        iterations += 1;
    }
    finish(state, iterations, trace, tol)
}

fn gradient_norm_descent(
    model: &ModelHandle,
    a: &Mat,
    mut state: State,
    params: &DescentParams,
    tol: f64,
) -> Result<DescentOutcome> {
    let mut merit = state.residual();
    let mut trace = vec![merit];
    let mut iterations = 0;
    let mut mu = 1e-4;
    while iterations < params.max_iters && merit > tol {
        let basis = model.tangent_basis(&state.frame, &state.x);
        let d = basis.len();
        let c0 = coords(&basis, &state.grad);
        let h = 1e-7 * (1.0 + state.x.norm());
        let mut jac = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut omega = DVector::zeros(d);
            omega[j] = h;
            let Some(probe) = retract_state(model, a, &chart_point(&state.x, &basis, &omega))
            else {
                return Err(EdError::NoConvergence { residual: merit });
            };
            jac.set_column(j, &((coords(&basis, &probe.grad) - &c0) / h));
        }
        let jtj = jac.tr_mul(&jac);
        let rhs = -jac.tr_mul(&c0);
        let diag_scale = jtj.diagonal().max().max(1e-300);
        let mut accepted = None;
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for i in 0..d {
                damped[(i, i)] += mu * diag_scale;
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => {
                    mu /= params.shrink;
                    continue;
                }
            };
            if let Some(next) = retract_state(model, a, &chart_point(&state.x, &basis, &step)) {
                if next.residual() < merit {
                    accepted = Some(next);
                    break;
                }
            }
            mu /= params.shrink * params.shrink;
        }
        let Some(next) = accepted else {
            break;
        };
        state = next;
        merit = state.residual();
        trace.push(merit);
        mu = (mu * params.shrink * params.shrink).max(1e-12);
        iterations += 1;
    }
    finish(state, iterations, trace, tol)
}

/// Stationary point found by the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Member with the smallest residual.
    pub representative: Mat,
    /// Stationarity residual of the representative, recomputed.
    pub residual: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartOutcome {
    pub clusters: Vec<Cluster>,
    pub n_starts: usize,
    pub n_converged: usize,
    /// Runs dropped for non-convergence or failed re-certification.
    pub n_dropped: usize,
}

/// Seed of start `index` derived from the run seed.
pub fn start_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(GOLDEN)
}

/// Groups points by single linkage: two points share a cluster when joined
/// by a chain of steps no longer than `threshold`. Clusters are ordered by
/// first member.
pub fn single_linkage(points: &[Mat], threshold: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (&points[i] - &points[j]).norm() <= threshold {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// [`multistart_with`] at the default clustering threshold.
pub fn multistart(
    model: &ModelHandle,
    a: &Mat,
    n_starts: usize,
    seed: u64,
    params: &DescentParams,
) -> Result<MultistartOutcome> {
    multistart_with(model, a, n_starts, seed, params, CLUSTER_TOL)
}

/// Runs the iteration from `n_starts` seeded random points and clusters the
/// converged iterates with threshold `cluster_tol·(1 + ‖A‖_F)`.
pub fn multistart_with(
    model: &ModelHandle,
    a: &Mat,
    n_starts: usize,
    seed: u64,
    params: &DescentParams,
    cluster_tol: f64,
) -> Result<MultistartOutcome> {
    if n_starts == 0 {
        return Err(EdError::InvalidParameter(
            "n_starts must be at least 1".into(),
        ));
    }
    params.validate()?;
    model.check_shape(a)?;
    let x0s: Vec<Mat> = (0..n_starts)
        .map(|i| model.random_point(start_seed(seed, i)))
        .collect();
    multistart_from(model, a, &x0s, params, cluster_tol)
}

/// Multistart from explicit initial points.
pub fn multistart_from(
    model: &ModelHandle,
    a: &Mat,
    x0s: &[Mat],
    params: &DescentParams,
    cluster_tol: f64,
) -> Result<MultistartOutcome> {
    let scale = 1.0 + a.norm();
    let tol = params.grad_tol * scale;
    let mut found = Vec::new();
    let mut n_dropped = 0;
    for x0 in x0s {
        match riemannian_descent(model, a, x0, params) {
            Ok(out) => found.push(out),
            Err(EdError::NoConvergence { .. }) => n_dropped += 1,
            Err(e) => return Err(e),
        }
    }
    // re-certify independently of the iteration's own bookkeeping
    let mut certified = Vec::new();
    for out in found {
        let membership = model.membership_residual(&out.x)?;
        let residual = match model.tangent_project(&out.x, &(&out.x - a)) {
            Ok(g) => g.norm(),
            Err(EdError::NotOnManifold { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if membership <= MEMBERSHIP_TOL * scale && residual <= tol {
            certified.push((out.x, residual));
        } else {
            n_dropped += 1;
        }
    }
    let xs: Vec<Mat> = certified.iter().map(|(x, _)| x.clone()).collect();
    let clusters = single_linkage(&xs, cluster_tol * scale)
        .into_iter()
        .map(|members| {
            let best = members
                .iter()
                .copied()
                .min_by(|&i, &j| certified[i].1.total_cmp(&certified[j].1))
                .unwrap();
            Cluster {
                representative: certified[best].0.clone(),
                residual: certified[best].1,
                size: members.len(),
            }
        })
        .collect();
    Ok(MultistartOutcome {
        clusters,
        n_starts: x0s.len(),
        n_converged: certified.len(),
        n_dropped,
    })
}

/// One found cluster paired with an enumerated label.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub cluster: usize,
    pub label: Label,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub n_found_clusters: usize,
    pub n_expected: usize,
    /// Sorted by cluster index.
    pub matched_labels: Vec<MatchedPair>,
    /// `0` when nothing matched.
    pub max_match_distance: f64,
    pub unmatched_clusters: Vec<usize>,
    /// Enumerated labels with no matching cluster, in enumeration order.
    pub missing_labels: Vec<Label>,
}

impl MatchReport {
    /// Every enumerated point and every cluster is matched.
    pub fn is_complete(&self) -> bool {
        self.missing_labels.is_empty() && self.unmatched_clusters.is_empty()
    }
}

/// Greedy nearest-pair matching: pairs are taken by increasing Frobenius
/// distance while both sides are free and the distance is at most
/// `tol·(1 + anchor_norm)`.
pub fn match_points(
    found: &[Mat],
    enumerated: &[StationaryPoint],
    tol: f64,
    anchor_norm: f64,
) -> MatchReport {
    let limit = tol * (1.0 + anchor_norm);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in found.iter().enumerate() {
        for (j, p) in enumerated.iter().enumerate() {
            if x.shape() == p.x.shape() {
                let d = (x - &p.x).norm();
                if d <= limit {
                    pairs.push((d, i, j));
                }
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut cluster_used = vec![false; found.len()];
    let mut label_used = vec![false; enumerated.len()];
    let mut matched = Vec::new();
    for (d, i, j) in pairs {
        if !cluster_used[i] && !label_used[j] {
            cluster_used[i] = true;
            label_used[j] = true;
            matched.push(MatchedPair {
                cluster: i,
                label: enumerated[j].label.clone(),
                distance: d,
            });
        }
    }
    matched.sort_by_key(|m| m.cluster);
    MatchReport {
        n_found_clusters: found.len(),
        n_expected: enumerated.len(),
        max_match_distance: matched.iter().map(|m| m.distance).fold(0.0, f64::max),
        matched_labels: matched,
        unmatched_clusters: (0..found.len()).filter(|&i| !cluster_used[i]).collect(),
        missing_labels: enumerated
            .iter()
            .zip(&label_used)
            .filter(|(_, used)| !**used)
            .map(|(p, _)| p.label.clone())
            .collect(),
    }
}
