"""Filtered-average least squares on trajectory differences.

Given a trajectory a_t, the difference signal u_t = a_{t+1} - a_t has
zero mean on an invariant set, so a good averaging filter c should
annihilate it.  We find c of length 2K+1 minimizing

    || W_T^{1/2} U c ||^2  +  epsilon c^T W_K^{-1} c

subject to sum_k c_k = 1 and the palindromic symmetry
c_{K+k} = c_{K-k}, where U is the block-Hankel matrix of sliding
windows of u, W_T holds bump weights over the T windows, and W_K holds
symmetrized bump weights over the filter taps.  The attained value R^2
(and its scale-free form R_G) is the classification statistic: it
reaches machine precision on circles and islands and stalls on chaos.

The constraints are eliminated exactly: folding c to its K+1 distinct
entries turns the palindromic constraint into a change of basis that
preserves Euclidean norms, and the mean constraint is removed by
parameterizing its affine solution set with an orthonormal null-space
basis (Householder).  With epsilon > 0 the variables are additionally
scaled so the regularization block becomes sqrt(epsilon) I; otherwise
the wildly varying window weights make the stacked system numerically
unsolvable.  Either way the minimizer is identical to the stated
problem's.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .birkhoff import bump_weights
from .errors import ContractViolation
from .maps import Trajectory, sample_trajectory, DEFAULT_ESCAPE_BOUND
from .numerics import least_squares_solve

SQRT2 = math.sqrt(2.0)


def difference_signal(trajectory):
    """u_t = a_{t+1} - a_t as an (N-1, D) array."""
    if trajectory.length < 2:
        raise ContractViolation("difference signal needs at least 2 samples")
    a = trajectory.samples
    return a[1:] - a[:-1]


def symmetrized_tap_weights(k):
    """Bump weights of length 2K+1 symmetrized about the center tap."""
    w = bump_weights(2 * k + 1)
    return 0.5 * (w + w[::-1])


@dataclass
class RreProblem:
    """Assembled least-squares data for one (K, T, epsilon) solve."""

    half_length: int          # K
    window_count: int         # T
    dimension: int            # D
    epsilon: float
    hankel: np.ndarray        # U, (T*D, 2K+1)
    row_weights: np.ndarray   # w_{t,T}, length T
    tap_weights: np.ndarray   # symmetrized w-tilde, length 2K+1


@dataclass
class FilterSolution:
    """Palindromic mean-one filter with its residuals."""

    coefficients: np.ndarray  # length 2K+1
    residual: float           # R
    scale_free_residual: float  # R_G
    signal_scale: float       # G
    half_length: int          # K
    window_count: int         # T
    epsilon: float
    fixed_point: bool = False


def build_problem(u, half_length, window_count, epsilon=0.0):
    """Assemble the block-Hankel system for a difference signal.

    ``u`` must supply at least T + 2K difference vectors, and T*D >= K
    is required for the system to be genuinely overdetermined (without
    it, chaotic trajectories would fit too).
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    k, t = int(half_length), int(window_count)
    if k < 1 or t < 1:
        raise ContractViolation(f"need K >= 1 and T >= 1, got K={k}, T={t}")
    d = u.shape[1]
    needed = t + 2 * k
    if u.shape[0] < needed:
        raise ContractViolation(
            f"difference signal has {u.shape[0]} vectors, need {needed} "
            f"(trajectory of {needed + 1} samples)"
        )
    if t * d < k:
        raise ContractViolation(f"rank requirement T*D >= K fails: {t}*{d} < {k}")
    if epsilon < 0:
        raise ContractViolation(f"epsilon must be >= 0, got {epsilon}")
    width = 2 * k + 1
    hankel = np.empty((t * d, width))
    for row in range(t):
        hankel[row * d:(row + 1) * d, :] = u[row:row + width].T
    return RreProblem(
        half_length=k,
        window_count=t,
        dimension=d,
        epsilon=float(epsilon),
        hankel=hankel,
        row_weights=bump_weights(t),
        tap_weights=symmetrized_tap_weights(k),
    )


def _fold(hankel, k):
    """Fold the Hankel columns onto the K+1 palindromic coordinates.

    The fold d_0 = c_K, d_j = (c_{K+j} + c_{K-j}) / sqrt(2) is an
    isometry on palindromic vectors, so |W^(1/2) U c| = |A d|.
    """
    folded = np.empty((hankel.shape[0], k + 1))
    folded[:, 0] = hankel[:, k]
    folded[:, 1:] = (hankel[:, k + 1:] + hankel[:, k - 1::-1]) / SQRT2
    return folded


def _unfold(d, k):
    c = np.empty(2 * k + 1)
    c[k] = d[0]
    c[k + 1:] = d[1:] / SQRT2
    c[:k] = c[k + 1:][::-1]
    # The null-space reconstruction satisfies the mean constraint only to
    # norm(d) * eps, which matters when the minimizer has large norm.
    # Repair the sum exactly on the smallest-magnitude tap (whose ulp is
    # smallest), mirroring so the palindromic symmetry stays bit-exact.
    defect = 1.0 - math.fsum(c)
    if defect != 0.0:
        j = int(np.argmin(np.abs(c[k:])))
        if j == 0:
            c[k] += defect
        else:
            c[k + j] += 0.5 * defect
            c[k - j] = c[k + j]
    return c


def _null_basis(v):
    """Particular solution of v . d = 1 plus an orthonormal basis of v-perp."""
    n = v.shape[0]
    u = v.astype(float).copy()
    u[0] += math.copysign(np.linalg.norm(v), v[0] if v[0] != 0 else 1.0)
    house = np.eye(n) - (2.0 / (u @ u)) * np.outer(u, u)
    return v / (v @ v), house[:, 1:]


def scale_free_residual(residual, epsilon, signal_scale):
    """R_G = sqrt(R^2 - epsilon) / G, with tiny negatives clamped.

    Returns 0 for a fixed point (G = 0); callers carry the flag.
    """
    if signal_scale == 0.0:
        return 0.0
    return math.sqrt(max(residual * residual - epsilon, 0.0)) / signal_scale


def solve_filter(problem):
    """Solve for the optimal palindromic mean-one filter.

    Returns a FilterSolution whose ``residual`` is the square root of
    the attained objective (data misfit plus regularization), and whose
    ``scale_free_residual`` divides out the weighted energy G of the
    difference signal.
    """
    k, t, d = problem.half_length, problem.window_count, problem.dimension
    eps = problem.epsilon
    sqrt_row = np.repeat(np.sqrt(problem.row_weights), d)
    top = sqrt_row[:, None] * _fold(problem.hankel, k)
    constraint = np.full(k + 1, SQRT2)
    constraint[0] = 1.0
    if eps > 0.0:
        folded_taps = problem.tap_weights[k:]
        scale = np.sqrt(folded_taps)
        stacked = np.vstack([top * scale[None, :], math.sqrt(eps) * np.eye(k + 1)])
        particular, basis = _null_basis(scale * constraint)
        coeffs = least_squares_solve(stacked @ basis, -stacked @ particular)
        scaled = particular + basis @ coeffs
        d_vec = scale * scaled
        r_squared = float(np.sum((top @ d_vec) ** 2)) + eps * float(scaled @ scaled)
    else:
        particular, basis = _null_basis(constraint)
        coeffs = least_squares_solve(top @ basis, -top @ particular)
        d_vec = particular + basis @ coeffs
        r_squared = float(np.sum((top @ d_vec) ** 2))
    # weighted energy of the first T difference vectors (Hankel column 0)
    u_rows = problem.hankel[:, 0].reshape(t, d)
    g_squared = float(problem.row_weights @ (u_rows ** 2).sum(axis=1))
    signal_scale = math.sqrt(g_squared)
    residual = math.sqrt(max(r_squared, 0.0))
    return FilterSolution(
        coefficients=_unfold(d_vec, k),
        residual=residual,
        scale_free_residual=scale_free_residual(residual, eps, signal_scale),
        signal_scale=signal_scale,
        half_length=k,
        window_count=t,
        epsilon=eps,
        fixed_point=(signal_scale == 0.0),
    )


def solve_from_trajectory(trajectory, half_length, window_count, epsilon=0.0):
    """Difference, assemble, and solve in one call."""
    u = difference_signal(trajectory)
    return solve_filter(build_problem(u, half_length, window_count, epsilon))


def window_count_for(half_length, dimension, gamma):
    """Window count T = ceil(gamma K / D) used by the adaptive driver."""
    return max(1, math.ceil(gamma * half_length / dimension))


class TrajectorySource:
    """Orbit cache for one seed: grows monotonically, never resamples.

    ``take(n)`` returns the first n samples, extending the stored orbit
    only if it is shorter than n.  ``samples_drawn`` is the longest
    length seen, so map-evaluation accounting is exact.
    """

    def __init__(self, dynamical_map, observable, x0, escape_bound=DEFAULT_ESCAPE_BOUND):
        self.dynamical_map = dynamical_map
        self.observable = observable
        self.x0 = np.asarray(x0, dtype=float)
        self.escape_bound = escape_bound
        self._samples = None
        self._state = None

    @property
    def samples_drawn(self):
        return 0 if self._samples is None else self._samples.shape[0]

    @property
    def map_evaluations(self):
        return max(0, self.samples_drawn - 1)

    def take(self, n):
        if n < 1:
            raise ContractViolation(f"need n >= 1, got {n}")
        if self._samples is None:
            traj = sample_trajectory(
                self.dynamical_map, self.observable, self.x0, n, self.escape_bound
            )
            self._samples = traj.samples
            self._state = self._replay_state(n)
            return traj
        have = self._samples.shape[0]
        if n > have:
            extra = np.empty((n - have, self._samples.shape[1]))
            point = self._state
            for i in range(n - have):
                point = self.dynamical_map.step(point)
                if not np.all(np.isfinite(point)) or np.max(np.abs(point)) > self.escape_bound:
                    from .errors import OrbitEscape

                    raise OrbitEscape(f"orbit escaped at step {have + i}", step=have + i)
                extra[i] = self.observable.evaluate(point)
            self._samples = np.vstack([self._samples, extra])
            self._state = point
        return Trajectory(self._samples[:n])

    def _replay_state(self, n):
        point = self.x0
        for _ in range(n - 1):
            point = self.dynamical_map.step(point)
        return point


@dataclass
class AdaptiveResult:
    """Outcome of the adaptive filter-length sweep."""

    solution: FilterSolution
    converged: bool
    history: list = field(default_factory=list)  # (K, n_samples, R, R_G)

    @property
    def n_samples(self):
        return self.history[-1][1] if self.history else 0


def adaptive_solve(source, gamma=3.0, epsilon=0.0, delta=1e-10,
                   k_init=50, k_max=600, delta_k=50, gate="scale_free"):
    """Grow the filter length until the residual crosses ``delta``.

    Iterates K = k_init, k_init + delta_k, ... while K <= k_max and the
    gate residual stays above delta, reusing previously sampled orbit
    points (each step extends, never restarts, the trajectory).  The
    gate is the scale-free residual R_G by default; pass
    gate="residual" to gate on R itself.  Returns the last solution
    with the per-step history.
    """
    if k_init > k_max:
        raise ContractViolation(f"k_init {k_init} exceeds k_max {k_max}")
    if delta_k < 1:
        raise ContractViolation(f"need delta_k >= 1, got {delta_k}")
    if gamma < 1:
        raise ContractViolation(f"need gamma >= 1, got {gamma}")
    if gate not in ("scale_free", "residual"):
        raise ContractViolation(f"unknown gate {gate!r}")
    dimension = source.take(1).dimension
    history = []
    solution = None
    k = k_init
    while k <= k_max:
        t = window_count_for(k, dimension, gamma)
        traj = source.take(t + 2 * k + 1)
        solution = solve_filter(build_problem(difference_signal(traj), k, t, epsilon))
        history.append((k, traj.length, solution.residual, solution.scale_free_residual))
        gate_value = (
            solution.scale_free_residual if gate == "scale_free" else solution.residual
        )
        if gate_value <= delta:
            return AdaptiveResult(solution=solution, converged=True, history=history)
        k += delta_k
    return AdaptiveResult(solution=solution, converged=False, history=history)
