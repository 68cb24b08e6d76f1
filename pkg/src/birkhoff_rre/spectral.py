"""Post-processing of a learned filter: roots, mode ranking, rotation.

A converged filter annihilates the signal, so its polynomial roots sit
on the unit circle at e^{2 pi i} times the signal frequencies.  For a
palindromic filter the root-finding reduces to a half-size Chebyshev
problem via x = (z + 1/z)/2, solved with the colleague matrix.  Roots
are ranked by how much of the signal they carry, rational frequencies
reveal island chains (handled by stacking the signal), and the
top-ranked irrational frequency is the rotation number.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .birkhoff import bump_weights
from .errors import ContractViolation, DegreeDeflation, OrbitEscape
from .maps import Trajectory
from .numerics import complex_least_squares_solve, real_eigenvalues
from .rre import (
    TrajectorySource,
    adaptive_solve,
    build_problem,
    difference_signal,
    solve_filter,
)

PALINDROME_TOL = 1e-10
UNIT_CIRCLE_TOL = 1e-7  # about sqrt(machine epsilon)
CRITICAL_X_TOL = 1e-7   # unfolding is sensitive near x = +-1


@dataclass
class RootSet:
    """Filter-polynomial roots with low-confidence tags near z = +-1."""

    roots: np.ndarray
    low_confidence: np.ndarray

    def __len__(self):
        return self.roots.shape[0]


def chebyshev_coefficients(c):
    """Chebyshev coefficients b of the half-size polynomial.

    z^{-K} P(z) = sum_k b_k T_k((z + 1/z)/2) with b_0 = c_K and
    b_k = 2 c_{K+k}; requires a palindromic c.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.shape[0] % 2 != 1:
        raise ContractViolation(f"filter must have odd length, got shape {c.shape}")
    k = (c.shape[0] - 1) // 2
    scale = max(np.abs(c).max(), 1.0)
    if np.abs(c - c[::-1]).max() > PALINDROME_TOL * scale:
        raise ContractViolation("filter is not palindromic")
    b = np.empty(k + 1)
    b[0] = c[k]
    b[1:] = 2.0 * c[k + 1:]
    return b


def colleague_matrix(b):
    """Colleague matrix whose eigenvalues are the roots of sum b_k T_k."""
    k = b.shape[0] - 1
    if k == 1:
        return np.array([[-b[0] / b[1]]])
    mat = np.zeros((k, k))
    mat[0, 1] = 1.0
    for i in range(1, k):
        mat[i, i - 1] = 0.5
        if i + 1 < k:
            mat[i, i + 1] = 0.5
    mat[k - 1, :] -= b[:k] / (2.0 * b[k])
    return mat


def colleague_roots(b):
    """Roots of the Chebyshev-basis polynomial sum_k b_k T_k(x)."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.shape[0] < 2:
        raise ContractViolation(f"need degree >= 1, got shape {b.shape}")
    norm = np.linalg.norm(b)
    if norm == 0.0:
        raise ContractViolation("polynomial is identically zero")
    if abs(b[-1]) < 1e-14 * norm:
        raise DegreeDeflation("leading Chebyshev coefficient is numerically zero")
    return real_eigenvalues(colleague_matrix(b))


def _unfold_root(x):
    """Both solutions z of (z + 1/z)/2 = x, stable branch first."""
    if abs(x.imag) < 1e-14 and abs(x.real) <= 1.0:
        # exact unit modulus for the dominant case
        z = complex(x.real, math.sqrt(max(1.0 - x.real * x.real, 0.0)))
        return z, z.conjugate()
    s = np.sqrt(x * x - 1.0)
    if (np.conj(x) * s).real < 0.0:
        s = -s
    z = x + s
    return complex(z), complex(1.0 / z)


def palindromic_roots(c):
    """All roots of the palindromic polynomial sum_k c_k z^k.

    Reduces to the half-size Chebyshev problem and unfolds each x-root
    into its z pair.  Trailing Chebyshev coefficients that are
    numerically zero are trimmed (lowering the degree) rather than fed
    to the eigensolver.  Roots whose x is within about 1e-7 of +-1 are
    tagged low-confidence: the unfolding square root halves their
    accuracy there.
    """
    b = chebyshev_coefficients(c)
    norm = np.linalg.norm(b)
    if norm == 0.0:
        raise ContractViolation("filter is identically zero")
    while b.shape[0] > 1 and abs(b[-1]) < 1e-14 * norm:
        b = b[:-1]
    if b.shape[0] < 2:
        return RootSet(roots=np.empty(0, dtype=complex),
                       low_confidence=np.empty(0, dtype=bool))
    xs = colleague_roots(b)
    roots = np.empty(2 * xs.shape[0], dtype=complex)
    shaky = np.empty(2 * xs.shape[0], dtype=bool)
    for i, x in enumerate(xs):
        z1, z2 = _unfold_root(x)
        roots[2 * i] = z1
        roots[2 * i + 1] = z2
        near_critical = min(abs(x - 1.0), abs(x + 1.0)) <= CRITICAL_X_TOL
        shaky[2 * i] = shaky[2 * i + 1] = near_critical
    return RootSet(roots=roots, low_confidence=shaky)


def unit_circle_filter(root_set, tol=UNIT_CIRCLE_TOL):
    """Keep roots with | |z| - 1 | <= tol."""
    if tol <= 0:
        raise ContractViolation(f"need tol > 0, got {tol}")
    keep = np.abs(np.abs(root_set.roots) - 1.0) <= tol
    return RootSet(roots=root_set.roots[keep], low_confidence=root_set.low_confidence[keep])


def canonical_frequency(z):
    """arg(z)/2pi folded into [0, 1/2] (conjugation symmetry).

    Computed as |arg(z)| / 2pi so a conjugate pair maps to bitwise
    identical values.
    """
    return float(abs(np.angle(z)) / (2.0 * math.pi))


@dataclass
class ModeEntry:
    root: complex        # representative with nonnegative imaginary part
    frequency: float     # arg(root)/2pi in [0, 1/2]
    prominence: float    # summed over the conjugate pair


@dataclass
class ModeRanking:
    """Modes sorted by descending prominence in the signal."""

    entries: list
    per_root: list = field(default_factory=list)  # (root, prominence) as solved
    rank_deficient: bool = False

    def top(self, n):
        return self.entries[:n]


_CONSTANT_ROOT_TOL = 1e-9


def mode_prominence(root_set, trajectory):
    """Rank roots by their weighted least-squares share of the signal.

    Solves min_V ||W^{1/2} (Phi V - A)|| with Phi_{mj} = root_j^m over
    the whole trajectory and bump weights, then scores each root by the
    Euclidean norm of its row of V.  A constant column (root 1) is
    included so the signal mean has somewhere to go -- the filter
    polynomial cannot have 1 as a root -- unless a supplied root
    already sits there.  Conjugate pairs are merged into single
    entries with their prominences summed, so one real oscillation is
    one mode.
    """
    roots = root_set.roots
    if roots.shape[0] == 0:
        raise ContractViolation("need at least one root to rank")
    n = trajectory.length
    add_constant = bool(np.min(np.abs(roots - 1.0)) > _CONSTANT_ROOT_TOL)
    columns = np.concatenate([[1.0 + 0.0j], roots]) if add_constant else roots
    powers = columns[None, :] ** np.arange(n)[:, None]
    sqrt_w = np.sqrt(bump_weights(n))[:, None]
    weighted = sqrt_w * powers
    v = complex_least_squares_solve(weighted, sqrt_w * trajectory.samples)
    rank = np.linalg.matrix_rank(weighted)
    prominences = np.linalg.norm(np.atleast_2d(v), axis=1)
    if add_constant:
        prominences = prominences[1:]
    per_root = list(zip(roots.tolist(), prominences.tolist()))
    groups = {}
    for z, p in per_root:
        freq = canonical_frequency(z)
        key = round(freq / _CONSTANT_ROOT_TOL)
        rep = z if z.imag >= 0 else np.conj(z)
        if key in groups:
            old = groups[key]
            groups[key] = ModeEntry(root=old.root, frequency=old.frequency,
                                    prominence=old.prominence + p)
        else:
            groups[key] = ModeEntry(root=complex(rep), frequency=freq, prominence=float(p))
    entries = sorted(groups.values(), key=lambda e: -e.prominence)
    return ModeRanking(
        entries=entries,
        per_root=per_root,
        rank_deficient=bool(rank < columns.shape[0]),
    )


def rational_detect(omega, p_max, tol):
    """Smallest-denominator fraction m/p within ``tol`` of omega, or None.

    Walks the Stern-Brocot tree between 0/1 and 1/1; the first node
    inside the window is the simplest fraction in it.  Only fractions
    with 0 <= m < p <= p_max qualify.
    """
    if p_max < 1:
        raise ContractViolation(f"need p_max >= 1, got {p_max}")
    if tol <= 0:
        raise ContractViolation(f"need tol > 0, got {tol}")
    if not 0.0 <= omega < 1.0:
        raise ContractViolation(f"need omega in [0, 1), got {omega}")
    if abs(omega) <= tol:
        return (0, 1)
    lo_n, lo_d = 0, 1
    hi_n, hi_d = 1, 1
    while True:
        med_n, med_d = lo_n + hi_n, lo_d + hi_d
        if med_d > p_max:
            return None
        value = med_n / med_d
        if omega > value + tol:
            lo_n, lo_d = med_n, med_d
        elif omega < value - tol:
            hi_n, hi_d = med_n, med_d
        else:
            return (med_n, med_d)


def continued_fraction_convergents(omega, count):
    """First ``count`` convergents N_j / L_j of omega in (0, 1).

    Each convergent satisfies |omega - N/L| < 1/L^2.  A rational omega
    terminates the expansion early, returning a shorter list.
    """
    if not 0.0 < omega < 1.0:
        raise ContractViolation(f"need omega in (0, 1), got {omega}")
    if count < 1:
        raise ContractViolation(f"need count >= 1, got {count}")
    convergents = []
    h_prev, h_curr = 1, 0   # numerators
    k_prev, k_curr = 0, 1   # denominators
    x = omega
    for _ in range(count):
        recip = 1.0 / x
        if recip > 1e15:
            break
        a = int(math.floor(recip))
        h_prev, h_curr = h_curr, a * h_curr + h_prev
        k_prev, k_curr = k_curr, a * k_curr + k_prev
        if abs(omega - h_curr / k_curr) >= 1.0 / k_curr ** 2:
            break  # floating-point exhausted; drop the degraded tail
        convergents.append((h_curr, k_curr))
        x = recip - a
        if x <= 1e-15:
            break  # rational within double precision; expansion terminates
    return convergents


def stack_signal(trajectory, period):
    """Interleave ``period`` consecutive samples into one wide sample.

    The stacked signal sees the island chain as a single invariant
    circle of the period-composed map: its pure frequencies are the
    rotation-number multiples, with the rational island frequencies
    removed.
    """
    if period < 1:
        raise ContractViolation(f"need period >= 1, got {period}")
    if trajectory.length < period:
        raise ContractViolation("trajectory shorter than the stacking period")
    if period == 1:
        return trajectory
    a = trajectory.samples
    n = (a.shape[0] // period) * period
    stacked = a[:n].reshape(n // period, period * a.shape[1])
    return Trajectory(stacked)


def unstack_signal(trajectory, period):
    """Inverse of stack_signal on the retained prefix."""
    if period == 1:
        return trajectory
    a = trajectory.samples
    return Trajectory(a.reshape(a.shape[0] * period, a.shape[1] // period))


@dataclass
class ClassifyParams:
    """Knobs for the classification pipeline (defaults match the
    standard-map experiments)."""

    epsilon: float = 0.0
    gamma: float = 3.0
    delta_adapt: float = 1e-10
    delta_chaos: float = None       # defaults to delta_adapt
    adapt_gate: str = "scale_free"  # or "residual"
    k_init: int = 50
    k_max: int = 600
    delta_k: int = 50
    eps_rat: float = 1e-8
    p_max: int = 50
    top_modes: int = 10
    unit_circle_tol: float = UNIT_CIRCLE_TOL
    escape_bound: float = 1e6

    def __post_init__(self):
        if self.delta_chaos is None:
            self.delta_chaos = self.delta_adapt


@dataclass
class Classification:
    """Outcome for one seed.

    tag is "chaotic", "integrable", or "indeterminate" (residual below
    the chaos threshold but no unit-circle roots survived -- the
    rotation cannot be extracted, which is surfaced rather than
    guessed).  For integrable results, ``rotation`` lies in [0, 1/2]
    and ``fit_trajectory`` is the (stacked, for islands) signal the
    Fourier stages should consume.
    """

    tag: str
    period: int = None
    rotation: float = None
    solution: object = None
    ranking: object = None
    fit_trajectory: object = None
    diagnostics: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


def _extract_rotation(ranking, zero_tol=_CONSTANT_ROOT_TOL):
    """Top-ranked non-constant frequency, or None."""
    for entry in ranking.entries:
        if entry.frequency > zero_tol:
            return entry.frequency
    return None


def classify_trajectory(dynamical_map, observable, x0, params=None):
    """Full pipeline: adaptive solve, chaos gate, roots, islands, rotation."""
    params = params or ClassifyParams()
    source = TrajectorySource(
        dynamical_map, observable, x0, escape_bound=params.escape_bound
    )
    try:
        result = adaptive_solve(
            source,
            gamma=params.gamma,
            epsilon=params.epsilon,
            delta=params.delta_adapt,
            k_init=params.k_init,
            k_max=params.k_max,
            delta_k=params.delta_k,
            gate=params.adapt_gate,
        )
    except OrbitEscape as exc:
        return Classification(
            tag="chaotic",
            diagnostics={"escape_step": exc.step, "N": source.samples_drawn},
            flags=["escape"],
        )
    solution = result.solution
    diag = {
        "R": solution.residual,
        "R_G": solution.scale_free_residual,
        "G": solution.signal_scale,
        "K": solution.half_length,
        "T": solution.window_count,
        "epsilon": solution.epsilon,
        "N": source.samples_drawn,
        "adaptive_converged": result.converged,
        "history": result.history,
    }
    flags = []
    if solution.fixed_point:
        traj = source.take(solution.window_count + 2 * solution.half_length + 1)
        return Classification(
            tag="integrable", period=1, rotation=0.0, solution=solution,
            ranking=None, fit_trajectory=traj, diagnostics=diag,
            flags=["fixed_point"],
        )
    chaos_value = (
        solution.scale_free_residual
        if params.adapt_gate == "scale_free"
        else solution.residual
    )
    if chaos_value > params.delta_chaos:
        return Classification(tag="chaotic", solution=solution, diagnostics=diag)
    traj = source.take(solution.window_count + 2 * solution.half_length + 1)
    roots = unit_circle_filter(palindromic_roots(solution.coefficients),
                               params.unit_circle_tol)
    diag["n_unit_roots"] = len(roots)
    diag["n_low_confidence_roots"] = int(np.count_nonzero(roots.low_confidence))
    if len(roots) == 0:
        return Classification(
            tag="indeterminate", solution=solution, diagnostics=diag,
            flags=["no_unit_circle_roots"],
        )
    ranking = mode_prominence(roots, traj)
    if ranking.rank_deficient:
        flags.append("rank_deficient_modes")
    period = 1
    for entry in ranking.entries[:params.top_modes]:
        if entry.frequency <= _CONSTANT_ROOT_TOL:
            continue
        verdict = rational_detect(entry.frequency, params.p_max, params.eps_rat)
        if verdict is not None and verdict[1] > period:
            period = verdict[1]
    if period == 1:
        rotation = _extract_rotation(ranking)
        if rotation is None:
            return Classification(
                tag="indeterminate", solution=solution, ranking=ranking,
                diagnostics=diag, flags=flags + ["no_rotation_candidate"],
            )
        return Classification(
            tag="integrable", period=1, rotation=rotation, solution=solution,
            ranking=ranking, fit_trajectory=traj, diagnostics=diag, flags=flags,
        )
    # island chain: stack and redo the solve on the wide signal
    stacked = stack_signal(traj, period)
    k_hat = max(1, solution.half_length // period)
    t_hat = stacked.length - 2 * k_hat - 1
    min_t = max(1, math.ceil(k_hat / stacked.dimension))
    if t_hat < min_t:
        k_hat = max(1, (stacked.length - min_t - 1) // 2)
        t_hat = stacked.length - 2 * k_hat - 1
    stacked_solution = solve_filter(
        build_problem(difference_signal(stacked), k_hat, t_hat, params.epsilon)
    )
    diag["stacked"] = {
        "K": k_hat, "T": t_hat,
        "R": stacked_solution.residual,
        "R_G": stacked_solution.scale_free_residual,
    }
    if stacked_solution.fixed_point:
        # a periodic orbit: each island component is a single point
        return Classification(
            tag="integrable", period=period, rotation=0.0,
            solution=stacked_solution, ranking=ranking, fit_trajectory=stacked,
            diagnostics=diag, flags=flags + ["periodic_orbit"],
        )
    stacked_roots = unit_circle_filter(
        palindromic_roots(stacked_solution.coefficients), params.unit_circle_tol
    )
    if len(stacked_roots) == 0:
        return Classification(
            tag="indeterminate", period=period, solution=stacked_solution,
            ranking=ranking, diagnostics=diag,
            flags=flags + ["no_unit_circle_roots_stacked"],
        )
    stacked_ranking = mode_prominence(stacked_roots, stacked)
    rotation = _extract_rotation(stacked_ranking)
    if rotation is None:
        return Classification(
            tag="indeterminate", period=period, solution=stacked_solution,
            ranking=stacked_ranking, diagnostics=diag,
            flags=flags + ["no_rotation_candidate"],
        )
    # one stacking pass only; a rational frequency surviving here is
    # reported, not recursed on
    residual_rational = rational_detect(rotation, params.p_max, params.eps_rat)
    if residual_rational is not None:
        flags.append(f"stacked_rational:{residual_rational[0]}/{residual_rational[1]}")
    return Classification(
        tag="integrable", period=period, rotation=rotation,
        solution=stacked_solution, ranking=stacked_ranking,
        fit_trajectory=stacked, diagnostics=diag, flags=flags,
    )
