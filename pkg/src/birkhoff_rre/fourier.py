"""Fourier parameterization of classified circles and island chains.

Once the rotation number is known, the circle is recovered by a
weighted projection of the trajectory onto the modes e^{2 pi i l omega t},
|l| <= L.  The truncation L is chosen so a Gershgorin bound keeps the
projection well conditioned.  A fitted chain is validated by measuring
how well one application of the map carries each component onto the
next (and the last onto the rotated first) on a uniform grid.
"""

import math
from dataclasses import dataclass

import numpy as np

from .birkhoff import bump_weights
from .errors import ContractViolation, ValidationFailure
from .numerics import complex_least_squares_solve

DEFAULT_GAMMA_MAX = 0.5
DEFAULT_VALIDATION_GRID = 128
CONDITION_WARNING = 1e8


@dataclass
class FourierCircle:
    """Truncated Fourier model of a period-p chain of circles.

    ``coefficients`` has shape (2L+1, p*D); row l+L holds mode l, and
    the D columns starting at (j-1)*D hold island component j.
    ``reality_defect`` records max |V_{-l} - conj(V_l)|, which is at
    roundoff level for real signals.
    """

    period: int
    rotation: float
    num_modes: int          # L
    coefficients: np.ndarray
    dimension: int          # observable dimension D of one component
    condition_estimate: float = 0.0
    ill_conditioned: bool = False

    @property
    def reality_defect(self):
        v = self.coefficients
        return float(np.abs(v[::-1].conj() - v).max())


def choose_num_modes(window, omega, gamma_max=DEFAULT_GAMMA_MAX):
    """Largest L whose projection stays provably well conditioned.

    The normal matrix of the mode projection is Toeplitz with entries
    eta_n = sum_{t=0}^{window} w_{t,window+1} e^{2 pi i omega n t}, so
    gamma_L = sum_{n=1}^{2L} |eta_n| < gamma_max bounds its condition
    number by sqrt((1+2 gamma_L)/(1-2 gamma_L)).  Returns L >= 0
    (L = 0 is a mean-only fit), capped so 2L+1 never exceeds the
    sample count.
    """
    if not 0.0 < gamma_max <= 0.5:
        raise ContractViolation(f"need gamma_max in (0, 1/2], got {gamma_max}")
    if window < 2:
        raise ContractViolation(f"need window >= 2, got {window}")
    n_samples = window + 1
    w = bump_weights(n_samples)
    t = np.arange(n_samples)
    cap = (window - 1) // 2
    base = np.exp(2j * math.pi * omega * t)
    phase = np.ones(n_samples, dtype=complex)
    best = 0
    acc = 0.0
    for n in range(1, 2 * cap + 1):
        phase = phase * base
        acc += abs(np.dot(w, phase))
        if acc >= gamma_max:
            break
        if n % 2 == 0:
            best = n // 2
    return best


def condition_bound(window, omega, num_modes):
    """Gershgorin bound sqrt((1+2g)/(1-2g)) for the projection at L."""
    n_samples = window + 1
    w = bump_weights(n_samples)
    t = np.arange(n_samples)
    acc = 0.0
    for n in range(1, 2 * num_modes + 1):
        acc += abs(np.dot(w, np.exp(2j * math.pi * omega * n * t)))
    if 2.0 * acc >= 1.0:
        return math.inf
    return math.sqrt((1.0 + 2.0 * acc) / (1.0 - 2.0 * acc))


def project_circle(trajectory, omega, num_modes, period=1):
    """Weighted least-squares Fourier coefficients of the trajectory.

    The basis columns are lambda_n^m with lambda_n = e^{2 pi i omega (n-L)}
    for n = 0..2L, and rows carry the bump weights of the full sample
    length.  For period > 1 the trajectory must already be the stacked
    signal (dimension period * D).
    """
    a = trajectory.samples
    n = a.shape[0]
    l = int(num_modes)
    if l < 0:
        raise ContractViolation(f"need num_modes >= 0, got {l}")
    if 2 * l + 1 > n:
        raise ContractViolation(f"2L+1 = {2 * l + 1} exceeds trajectory length {n}")
    if period < 1 or a.shape[1] % period != 0:
        raise ContractViolation(
            f"dimension {a.shape[1]} is not a multiple of period {period}"
        )
    modes = np.exp(2j * math.pi * omega * (np.arange(2 * l + 1) - l))
    basis = modes[None, :] ** np.arange(n)[:, None]
    sqrt_w = np.sqrt(bump_weights(n))[:, None]
    weighted = sqrt_w * basis
    coeffs = complex_least_squares_solve(weighted, sqrt_w * a)
    coeffs = np.atleast_2d(coeffs)
    cond = float(np.linalg.cond(weighted))
    return FourierCircle(
        period=period,
        rotation=float(omega),
        num_modes=l,
        coefficients=coeffs,
        dimension=a.shape[1] // period,
        condition_estimate=cond,
        ill_conditioned=bool(cond > CONDITION_WARNING),
    )


def eval_circle(circle, component, theta):
    """Real value of island component j at angle theta in [0, 1).

    Components are 1-indexed (1 <= j <= period).  The imaginary residue
    discarded here is bounded by the circle's reality defect.
    """
    if not 1 <= component <= circle.period:
        raise ContractViolation(
            f"component {component} out of range 1..{circle.period}"
        )
    l = circle.num_modes
    d = circle.dimension
    block = circle.coefficients[:, (component - 1) * d:component * d]
    phases = np.exp(2j * math.pi * theta * (np.arange(2 * l + 1) - l))
    return (phases @ block).real


def eval_circle_grid(circle, component, thetas):
    """Vectorized eval_circle over an array of angles."""
    if not 1 <= component <= circle.period:
        raise ContractViolation(
            f"component {component} out of range 1..{circle.period}"
        )
    l = circle.num_modes
    d = circle.dimension
    block = circle.coefficients[:, (component - 1) * d:component * d]
    thetas = np.asarray(thetas, dtype=float)
    phases = np.exp(2j * math.pi * np.outer(thetas, np.arange(2 * l + 1) - l))
    return (phases @ block).real


def make_observable_advance(dynamical_map, observable):
    """One map application expressed in observable space.

    Returns (advance, substituted): ``advance`` sends an observable
    value through observable^{-1}, the map, and the observable again.
    ``substituted`` is True when the observable is a genuine change of
    coordinates rather than the identity, which is flagged in output
    because the conjugacy is then checked in observable space.
    """
    from .maps import IdentityObservable

    def advance(value):
        state = observable.invert(value)
        return np.atleast_1d(
            np.asarray(observable.evaluate(dynamical_map.step(state)), dtype=float)
        )

    return advance, not isinstance(observable, IdentityObservable)


def validation_residual(circle, advance, grid_size=DEFAULT_VALIDATION_GRID):
    """Root-mean-square defect of the chain conjugacy on a uniform grid.

    R_p^2 = (1/(pJ)) sum_j [ |z_1(jh + omega) - F(z_p(jh))|^2
                             + sum_i |z_{i+1}(jh) - F(z_i(jh))|^2 ]
    with h = 1/J.  ``advance`` must apply one step of the map in the
    space the circle lives in (see make_observable_advance).
    """
    if grid_size < 8:
        raise ContractViolation(f"need grid_size >= 8, got {grid_size}")
    p = circle.period
    thetas = np.arange(grid_size) / grid_size
    values = [eval_circle_grid(circle, j + 1, thetas) for j in range(p)]
    shifted_first = eval_circle_grid(circle, 1, (thetas + circle.rotation) % 1.0)
    total = 0.0
    for idx in range(grid_size):
        for i in range(p - 1):
            img = advance(values[i][idx])
            if not np.all(np.isfinite(img)):
                raise ValidationFailure(f"map escaped at grid point {idx}")
            diff = values[i + 1][idx] - img
            total += float(diff @ diff)
        img = advance(values[p - 1][idx])
        if not np.all(np.isfinite(img)):
            raise ValidationFailure(f"map escaped at grid point {idx}")
        diff = shifted_first[idx] - img
        total += float(diff @ diff)
    return math.sqrt(total / (p * grid_size))


def fit_circle(classification, gamma_max=DEFAULT_GAMMA_MAX):
    """Choose L and project the classified trajectory onto its modes."""
    traj = classification.fit_trajectory
    if traj is None:
        raise ContractViolation("classification carries no trajectory to fit")
    num_modes = choose_num_modes(traj.length - 1, classification.rotation, gamma_max)
    return project_circle(
        traj, classification.rotation, num_modes, classification.period
    )
