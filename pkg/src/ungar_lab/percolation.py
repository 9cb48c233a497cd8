"""Last-passage percolation with geometric weights, and its chain coupling.

Running the ideal chain on ``J(P)`` from the full ideal and counting, for
each element ``x``, the number of steps during which ``x`` was maximal
yields independent geometric(p) weights ``G_x``, and the absorption time
equals ``max over maximal chains C of sum_{x in C} G_x`` on every single
run, not merely in distribution.  :func:`coupled_ideal_run` performs the
run, extracts the weights, and asserts that identity; a failure raises
:class:`CouplingViolation` and means the engine is broken.

The passage value is computed by one dynamic-programming sweep in
topological order (chain enumeration would be exponential); the explicit
maximal-chain oracle lives in the tests.

On the grid ``R_{n,m}`` the same chain is the multicorner growth TASEP
seen through complements: the complement of the ideal, rows reversed, is
a Young diagram, and deleting maximal ideal elements is adding external
corners.  :func:`tasep_run` grows the diagram directly, clipped to the
``n x m`` window; growth outside the window never influences the clipped
process, which the tests check by replaying coupled randomness with a
larger window.

Fluctuation constants for the rescaled limit and the upper-tail
asymptotic of the limiting distribution are provided as plain formulas;
the full limiting CDF is out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .engine import GeometricSampler, IdealLattice, _check_p
from .errors import CouplingViolation, DomainError, SeriesTruncationError
from .poset import FinitePoset, GridPoset
from .rng import replica_generator

__all__ = [
    "LppSample",
    "lpp_sample",
    "max_chain_weight",
    "coupled_ideal_run",
    "CoupledIdealRun",
    "tasep_run",
    "tasep_absorption_samples",
    "tasep_trajectory",
    "ideal_complement_rows",
    "lpp_grid_samples",
    "rescaling_constants",
    "tracy_widom_tail",
    "upsilon",
    "zeta_estimate",
    "zeta_liminf_lower_bound",
    "zeta_limsup_estimate",
    "sn_linear_coefficient",
    "tamari_linear_coefficient",
]


# -- last-passage percolation ---------------------------------------------------


@dataclass
class LppSample:
    """Weights, per-element passage values, and the total passage time."""

    poset: FinitePoset
    p: float
    weights: tuple[int, ...]
    passage: tuple[int, ...]
    total: int


def max_chain_weight(poset: FinitePoset, weights: Sequence[int]) -> int:
    """``max over maximal chains C of sum_{x in C} weights[x]`` by DP."""
    passage = _passage_values(poset, weights)
    return max(passage[x] for x in poset.maximal_elements())


def _passage_values(poset: FinitePoset, weights: Sequence[int]) -> list[int]:
    passage = [0] * poset.n
    for x in poset.topo_order():
        best = 0
        for c in poset.covers[x]:
            if passage[c] > best:
                best = passage[c]
        passage[x] = weights[x] + best
    return passage


def lpp_sample(poset: FinitePoset, p: float, rng) -> LppSample:
    """Draw i.i.d. geometric(p) weights and compute the passage time."""
    p = _check_p(p)
    sampler = GeometricSampler(p, rng)
    weights = tuple(sampler.sample() for _ in range(poset.n))
    passage = _passage_values(poset, weights)
    total = max(passage[x] for x in poset.maximal_elements()) if poset.n else 0
    return LppSample(
        poset=poset, p=p, weights=weights, passage=tuple(passage), total=total
    )


@dataclass
class CoupledIdealRun:
    """An ideal-chain run with its coupled per-element maximal-step counts."""

    poset: FinitePoset
    p: float
    absorption: int
    weights: tuple[int, ...]
    masks: tuple[int, ...] | None = None


def coupled_ideal_run(
    poset: FinitePoset, p: float, rnd, *, record_states: bool = False
) -> CoupledIdealRun:
    """Run the ideal chain from the full ideal, extracting coupled weights.

    ``weights[x]`` counts the steps on which ``x`` was a maximal element
    of the current ideal; the absorption time must equal the max-chain
    sum of these counts on this very run.
    """
    p = _check_p(p)
    lattice = IdealLattice(poset)
    mask = poset.full_mask()
    counts = [0] * poset.n
    masks = [mask] if record_states else None
    t = 0
    while mask:
        t += 1
        for x in lattice.pick_sites(mask):
            counts[x] += 1
            if rnd.random() < p:
                mask &= ~(1 << x)
        if record_states:
            masks.append(mask)
    total = max_chain_weight(poset, counts) if poset.n else 0
    if total != t:
        raise CouplingViolation(
            f"absorption {t} != max-chain weight {total}; engine bug"
        )
    return CoupledIdealRun(
        poset=poset,
        p=p,
        absorption=t,
        weights=tuple(counts),
        masks=tuple(masks) if masks is not None else None,
    )


def ideal_complement_rows(grid: GridPoset, mask: int) -> tuple[int, ...]:
    """Complement of a grid ideal as top-down row lengths.

    Row ``i`` of the grid contributes ``#{j : (i,j) not in the ideal}``;
    reading rows from the top (largest ``i``) down gives a weakly
    decreasing sequence, i.e. a Young diagram.  Raises ``ValueError`` if
    the monotonicity fails (the mask was not an ideal).
    """
    rows = []
    for i in range(grid.rows):
        rows.append(
            sum(1 for j in range(grid.cols) if not mask >> grid.index(i, j) & 1)
        )
    shape = tuple(reversed(rows))
    if any(shape[k] < shape[k + 1] for k in range(len(shape) - 1)):
        raise ValueError(f"complement rows {shape} are not weakly decreasing")
    return shape


# -- multicorner growth ------------------------------------------------------------


def tasep_run(
    n: int,
    m: int,
    p: float,
    rnd,
    *,
    bit_fn: Callable[[int, int, int], bool] | None = None,
) -> int:
    """Steps until the window of the growing Young diagram fills ``n x m``.

    The diagram starts empty and each external corner is added with
    independent probability ``p`` per step.  Only the first ``n`` rows and
    ``m`` columns are tracked: a cell ``(i, j)`` with ``j <= m`` is an
    external corner iff ``lambda_i = j - 1 < m`` and ``lambda_{i-1} >= j``,
    which depends only on the clipped state, so growth outside the window
    is never simulated.  ``bit_fn(step, row, col)`` overrides the coin
    flips (used by the window-independence tests).
    """
    p = _check_p(p)
    lam = [0] * n
    t = 0
    while lam[-1] < m:
        t += 1
        old = lam[:]  # corners are tested against the pre-step diagram
        for i in range(n):
            prev = m if i == 0 else old[i - 1]
            if old[i] < m and prev > old[i]:
                if bit_fn is not None:
                    grow = bit_fn(t, i, old[i])
                else:
                    grow = rnd.random() < p
                if grow:
                    lam[i] = old[i] + 1
    return t


def tasep_trajectory(
    n: int,
    m: int,
    p: float,
    rnd,
    *,
    steps: int | None = None,
    bit_fn: Callable[[int, int, int], bool] | None = None,
) -> list[tuple[int, ...]]:
    """Clipped diagram after each step, until full (or ``steps`` moves)."""
    p = _check_p(p)
    lam = [0] * n
    out = [tuple(lam)]
    t = 0
    while lam[-1] < m and (steps is None or t < steps):
        t += 1
        old = lam[:]
        for i in range(n):
            prev = m if i == 0 else old[i - 1]
            if old[i] < m and prev > old[i]:
                if bit_fn is not None:
                    grow = bit_fn(t, i, old[i])
                else:
                    grow = rnd.random() < p
                if grow:
                    lam[i] = old[i] + 1
        out.append(tuple(lam))
    return out


def tasep_absorption_samples(
    n: int, m: int, p: float, reps: int, seed: int
) -> np.ndarray:
    """Vectorized window-fill times across replicas."""
    p = _check_p(p)
    rng = replica_generator(seed, 0)
    lam = np.zeros((reps, n), dtype=np.int32)
    absorbed = np.zeros(reps, dtype=np.int64)
    done = np.zeros(reps, dtype=bool)
    t = 0
    while not done.all():
        t += 1
        prev = np.concatenate(
            [np.full((reps, 1), m, dtype=np.int32), lam[:, :-1]], axis=1
        )
        addable = (lam < m) & (prev > lam)
        grow = addable & (rng.random((reps, n)) < p)
        lam += grow
        now_done = lam[:, -1] >= m
        absorbed[~done & now_done] = t
        done |= now_done
    return absorbed


def lpp_grid_samples(n: int, m: int, p: float, reps: int, seed: int) -> np.ndarray:
    """Passage times on the grid, vectorized across replicas.

    DP recurrence ``L[i,j] = G[i,j] + max(L[i-1,j], L[i,j-1])`` swept cell
    by cell with all replicas in lockstep; equals the ideal-chain
    absorption time on ``R_{n,m}`` in distribution (and per run under the
    coupling, which :func:`coupled_ideal_run` asserts).
    """
    p = _check_p(p)
    rng = replica_generator(seed, 0)
    weights = rng.geometric(p, size=(reps, n, m)).astype(np.int64)
    row = np.zeros((reps, m), dtype=np.int64)
    for i in range(n):
        running = np.zeros(reps, dtype=np.int64)
        for j in range(m):
            running = weights[:, i, j] + np.maximum(running, row[:, j])
            row[:, j] = running
    return row[:, -1]


# -- fluctuation constants -----------------------------------------------------------


def rescaling_constants(p: float, x: float, y: float) -> tuple[float, float]:
    """Centering and scale for the rescaled grid passage time.

    ``Phi_p(x,y) = (x + y + 2 sqrt((1-p) x y)) / p`` and
    ``eta_p(x,y) = ((1-p)^(1/6) / p) (xy)^(-1/6)
    (sqrt(x) + sqrt((1-p) y))^(2/3) (sqrt(y) + sqrt((1-p) x))^(2/3)``.
    """
    p = float(p)
    if not 0 < p < 1:
        raise DomainError(f"p={p} outside (0, 1)")
    if x <= 0 or y <= 0:
        raise DomainError("x and y must be positive")
    qroot = math.sqrt(1 - p)
    phi = (x + y + 2 * qroot * math.sqrt(x * y)) / p
    eta = (
        (1 - p) ** (1 / 6)
        / p
        * (x * y) ** (-1 / 6)
        * (math.sqrt(x) + qroot * math.sqrt(y)) ** (2 / 3)
        * (math.sqrt(y) + qroot * math.sqrt(x)) ** (2 / 3)
    )
    return phi, eta


def tracy_widom_tail(t: float) -> float:
    """Upper-tail asymptotic ``(32 pi t^{3/2})^{-1} exp(-4 t^{3/2} / 3)``.

    This approximates one minus the limiting CDF for large positive ``t``;
    it is an asymptotic, not a distribution function, and is intended for
    tail diagnostics only.
    """
    if t <= 0:
        raise DomainError(f"tail asymptotic needs t > 0, got {t}")
    return math.exp(-4.0 * t**1.5 / 3.0) / (32.0 * math.pi * t**1.5)


# -- uniqueness of the geometric maximum ------------------------------------------------


def upsilon(p: float, x: float, *, tol: float = 1e-12) -> float:
    """Bilateral series ``p x sum_k (1-p)^k exp(-(1-p)^k x)`` (0 at p=1).

    Truncation is certified: the ``k -> +inf`` tail is geometric and the
    ``k -> -inf`` tail is dominated by a geometric series once
    ``y = (1-p)^k x >= 4`` (using ``y e^{-y} <= e^{-y/2}`` there), each
    bounded below ``tol/2``.
    """
    p = float(p)
    if not 0 < p <= 1:
        raise DomainError(f"p={p} outside (0, 1]")
    if x <= 0:
        raise DomainError(f"x must be positive, got {x}")
    if p == 1.0:
        return 0.0
    q = 1.0 - p
    total = 0.0
    # upward: terms p x q^k e^{-q^k x} <= p x q^k; tail after K is <= x q^{K+1}
    k = 0
    while True:
        y = q**k * x
        total += p * y * math.exp(-y)
        if x * q ** (k + 1) <= tol / 2:
            break
        k += 1
        if k > 10**6:
            raise SeriesTruncationError("upward tail would not close")
    # downward: y grows by 1/q per step; once y >= 4 successive terms decay
    # at least geometrically with ratio rho = e^{-y (1/q - 1)} / q
    k = -1
    while True:
        y = q**k * x
        term = p * y * math.exp(-y)
        total += term
        if y >= 4:
            rho = math.exp(-y * (1 / q - 1)) / q
            if rho < 0.5 and term * rho / (1 - rho) <= tol / 2:
                break
        k -= 1
        if k < -(10**6):
            raise SeriesTruncationError("downward tail would not close")
    return total


def zeta_estimate(
    p: float, n: int, trials: int, seed: int, *, batch_rows: int | None = None
) -> tuple[float, float]:
    """Monte Carlo probability that the max of ``n`` geometrics is unique.

    Plain estimator: each trial draws the ``n`` variables outright and
    checks the multiplicity of the maximum.  Returns ``(estimate,
    standard error)``.
    """
    p = _check_p(p)
    if n < 1 or trials < 1:
        raise DomainError("n and trials must be >= 1")
    rng = replica_generator(seed, 0)
    if batch_rows is None:
        batch_rows = max(1, 2_000_000 // n)
    hits = 0
    left = trials
    while left > 0:
        b = min(batch_rows, left)
        left -= b
        draws = rng.geometric(p, size=(b, n))
        mx = draws.max(axis=1)
        hits += int(((draws == mx[:, None]).sum(axis=1) == 1).sum())
    est = hits / trials
    stderr = math.sqrt(max(est * (1 - est), 1e-300) / trials)
    return est, stderr


def zeta_liminf_lower_bound(p: float) -> float:
    """Closed-form lower bound ``p (1-p) e^{p-1}`` for the liminf."""
    p = float(p)
    if not 0 < p < 1:
        raise DomainError(f"p={p} outside (0, 1)")
    return p * (1 - p) * math.exp(p - 1)


def zeta_limsup_estimate(p: float, *, grid: int = 4096) -> float:
    """Max of the bilateral series over one multiplicative period.

    The series is invariant under ``x -> (1-p) x``, so the limsup of the
    uniqueness probability is its maximum over ``x in ((1-p), 1]``,
    located here by a dense geometric grid.
    """
    p = float(p)
    if not 0 < p < 1:
        raise DomainError(f"p={p} outside (0, 1)")
    q = 1.0 - p
    xs = np.exp(np.linspace(math.log(q), 0.0, grid))
    return max(upsilon(p, float(x)) for x in xs)


# -- linear-growth coefficients ---------------------------------------------------------


def sn_linear_coefficient(p: float) -> float:
    """Slope ``(1 + sqrt(1-p)) / p`` of the weak-order absorption bound."""
    p = float(p)
    if not 0 < p < 1:
        raise DomainError(f"p={p} outside (0, 1)")
    return (1 + math.sqrt(1 - p)) / p


def tamari_linear_coefficient(p: float) -> float:
    """Slope ``(2/p)(sqrt(z(1+z)) - z)`` with ``z`` the uniqueness limsup."""
    z = zeta_limsup_estimate(p)
    return 2.0 / p * (math.sqrt(z * (1 + z)) - z)
