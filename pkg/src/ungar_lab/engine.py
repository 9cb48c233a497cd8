"""Generic absorbing-chain engine over lattice backends.

A backend exposes the minimal surface the chain needs: the top and bottom
elements, the currently available move sites of a state (descents,
non-leaf vertices, maximal ideal elements), and the transition that
applies a selected subset of sites (the meet of the state with its picked
covers).  Each step selects every site independently with probability
``p``; the probability of staying put is ``(1-p)^{#sites}`` because every
non-empty selection moves strictly down.

The exact solver uses exactly that structure: states are processed along
any rank function that strictly decreases under transitions, so the
linear system ``E(x) = 1 + sum_y P(x->y) E(y)`` is triangular and solves
by back-substitution; no general solver is needed.

Also here: the per-parameter geometric sampler, the two-sided tail bound
for sums of geometrics, and simple/lazy random-walk hitting-time
utilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DomainError,
    NotReached,
    SingularSystem,
    StateExplosion,
)
from .perms import Permutation, ungar_move
from .poset import DEFAULT_STATE_CAP, FinitePoset
from .rng import replica_generator, replica_random
from .tamari import OrderedForest, SimForest, av_ungar_move

_SUBSET_ENUM_CAP = 22  # 2^22 transition terms per state is already generous


def _check_p(p: float) -> float:
    p = float(p)
    if not 0 < p <= 1:
        raise DomainError(f"p={p} outside (0, 1]; p=0 gives a non-absorbing chain")
    return p


# -- backends -----------------------------------------------------------------


class SnLattice:
    """Weak order on S_n; sites are descent positions."""

    def __init__(self, n: int):
        self.n = n
        self.name = f"sn-{n}"

    def top(self) -> Permutation:
        return Permutation.decreasing(self.n)

    def bottom(self) -> Permutation:
        return Permutation.identity(self.n)

    def pick_sites(self, state: Permutation) -> tuple[int, ...]:
        return tuple(sorted(state.descents()))

    def apply(self, state: Permutation, selected: Sequence[int]) -> Permutation:
        return ungar_move(state, selected)

    def rank(self, state: Permutation) -> int:
        return state.inversions()


class TamariAvLattice:
    """Tamari lattice as 312-avoiding permutations under the weak order."""

    def __init__(self, n: int):
        self.n = n
        self.name = f"tamari-av-{n}"

    def top(self) -> Permutation:
        return Permutation.decreasing(self.n)

    def bottom(self) -> Permutation:
        return Permutation.identity(self.n)

    def pick_sites(self, state: Permutation) -> tuple[int, ...]:
        return tuple(sorted(state.descents()))

    def apply(self, state: Permutation, selected: Sequence[int]) -> Permutation:
        return av_ungar_move(state, selected)

    def rank(self, state: Permutation) -> int:
        return state.inversions()


class TamariForestLattice:
    """Tamari lattice as ordered forests; sites are non-leaf vertices."""

    def __init__(self, n: int):
        self.n = n
        self.name = f"tamari-{n}"

    def top(self) -> OrderedForest:
        return OrderedForest.path(self.n)

    def bottom(self) -> OrderedForest:
        return OrderedForest.antichain(self.n)

    def pick_sites(self, state: OrderedForest) -> tuple[int, ...]:
        return state.non_leaves()

    def apply(self, state: OrderedForest, selected: Sequence[int]) -> OrderedForest:
        return state.ungar(selected)

    def rank(self, state: OrderedForest) -> int:
        return sum(state.descendant_count(v) for v in range(1, self.n + 1))

    def fast_absorption_sample(self, p: float, rnd) -> int:
        """Scalar-loop sampler on the mutable forest; O(1) per operation."""
        sim = SimForest.path(self.n)
        t = 0
        while not sim.absorbed():
            t += 1
            selected = [v for v in sim.non_leaves() if rnd.random() < p]
            for v in selected:
                sim.operate(v)
        return t


class IdealLattice:
    """J(P) for an explicit poset; states are ideal bitmasks.

    The step deletes a randomly selected subset of the maximal elements of
    the ideal.  Maximal-element tuples are cached per mask (the reachable
    masks are exactly the ideals, bounded by the enumeration cap).
    """

    def __init__(self, poset: FinitePoset, name: str | None = None):
        self.poset = poset
        self.n = poset.n
        self.name = name or f"ideal-{poset.n}"
        self._maximal: dict[int, tuple[int, ...]] = {}

    def top(self) -> int:
        return self.poset.full_mask()

    def bottom(self) -> int:
        return 0

    def pick_sites(self, state: int) -> tuple[int, ...]:
        sites = self._maximal.get(state)
        if sites is None:
            sites = self.poset.maximal_of_mask(state)
            self._maximal[state] = sites
        return sites

    def apply(self, state: int, selected: Sequence[int]) -> int:
        for x in selected:
            state &= ~(1 << x)
        return state

    def rank(self, state: int) -> int:
        return state.bit_count()


class ChainLattice:
    """A chain 0 < 1 < ... < length; absorption is a sum of geometrics."""

    def __init__(self, length: int):
        self.length = length
        self.name = f"chain-{length}"

    def top(self) -> int:
        return self.length

    def bottom(self) -> int:
        return 0

    def pick_sites(self, state: int) -> tuple[int, ...]:
        return (state - 1,) if state > 0 else ()

    def apply(self, state: int, selected: Sequence[int]) -> int:
        return state - 1 if selected else state

    def rank(self, state: int) -> int:
        return state


# -- trajectories --------------------------------------------------------------


@dataclass
class ChainRun:
    """One seeded trajectory; states/picks are recorded on request."""

    backend: str
    p: float
    start: object
    absorption: int
    states: tuple | None = None
    picks: tuple | None = None
    seed: int | None = None


def run_chain(
    lattice,
    p: float,
    rnd,
    *,
    start=None,
    record_states: bool = False,
    record_picks: bool = False,
    max_steps: int | None = None,
    seed: int | None = None,
) -> ChainRun:
    """Run one trajectory from ``start`` (default: top) to absorption."""
    p = _check_p(p)
    state = lattice.top() if start is None else start
    bottom = lattice.bottom()
    states = [state] if record_states else None
    picks = [] if record_picks else None
    t = 0
    while state != bottom:
        if max_steps is not None and t >= max_steps:
            raise NotReached(f"no absorption within {max_steps} steps")
        sites = lattice.pick_sites(state)
        selected = [s for s in sites if rnd.random() < p]
        state = lattice.apply(state, selected)
        t += 1
        if record_states:
            states.append(state)
        if record_picks:
            picks.append(tuple(selected))
    return ChainRun(
        backend=lattice.name,
        p=p,
        start=lattice.top() if start is None else start,
        absorption=t,
        states=tuple(states) if states is not None else None,
        picks=tuple(picks) if picks is not None else None,
        seed=seed,
    )


def step(lattice, state, p: float, rnd):
    """One random move: select each site independently, then transition."""
    p = _check_p(p)
    sites = lattice.pick_sites(state)
    return lattice.apply(state, [s for s in sites if rnd.random() < p])


# -- exact expectations ---------------------------------------------------------


def enumerate_states(lattice, *, cap: int = DEFAULT_STATE_CAP) -> list:
    """All states reachable downward from the top (the whole lattice)."""
    top = lattice.top()
    seen = {top}
    stack = [top]
    while stack:
        x = stack.pop()
        for s in lattice.pick_sites(x):
            y = lattice.apply(x, [s])
            if y not in seen:
                if len(seen) >= cap:
                    raise StateExplosion(
                        f"state count of {lattice.name} exceeds cap {cap}"
                    )
                seen.add(y)
                stack.append(y)
    return sorted(seen, key=lattice.rank)


def exact_expected_absorption(
    lattice, p: float, *, cap_states: int = DEFAULT_STATE_CAP
) -> dict:
    """Expected steps to the bottom, for every state, by back-substitution.

    ``E(x) (1 - (1-p)^s) = 1 + sum over nonempty selections T of
    p^|T| (1-p)^(s-|T|) E(apply(x, T))``, processed in increasing rank so
    every right-hand side is already known.  A residual check at 1e-10
    guards the triangularity assumption.
    """
    p = _check_p(p)
    q = 1.0 - p
    states = enumerate_states(lattice, cap=cap_states)
    bottom = lattice.bottom()
    expect: dict = {}
    for x in states:
        if x == bottom:
            expect[x] = 0.0
            continue
        sites = lattice.pick_sites(x)
        s = len(sites)
        if s == 0:
            raise SingularSystem(f"non-bottom state {x!r} has no covers")
        if s > _SUBSET_ENUM_CAP:
            raise StateExplosion(f"state has {s} covers; subset enumeration refused")
        stay = q**s
        if stay >= 1.0:
            raise SingularSystem("staying probability reached 1; p too small")
        acc = 1.0
        for bitsel in range(1, 1 << s):
            selected = [sites[i] for i in range(s) if bitsel >> i & 1]
            w = p ** len(selected) * q ** (s - len(selected))
            acc += w * expect[lattice.apply(x, selected)]
        expect[x] = acc / (1.0 - stay)
    # residual audit on the defining equations
    for x in states[: min(len(states), 64)]:
        if x == bottom:
            continue
        sites = lattice.pick_sites(x)
        s = len(sites)
        rhs = 1.0 + (q**s) * expect[x]
        for bitsel in range(1, 1 << s):
            selected = [sites[i] for i in range(s) if bitsel >> i & 1]
            rhs += p ** len(selected) * q ** (s - len(selected)) * expect[
                lattice.apply(x, selected)
            ]
        if abs(expect[x] - rhs) > 1e-10 * max(1.0, abs(expect[x])):
            raise SingularSystem(f"residual {abs(expect[x] - rhs)} at state {x!r}")
    return expect


def expected_absorption_time(lattice, p: float, **kw) -> float:
    """Expected steps from the top to the bottom."""
    return exact_expected_absorption(lattice, p, **kw)[lattice.top()]


# -- Monte Carlo ----------------------------------------------------------------


@dataclass
class McResult:
    mean: float
    stderr: float
    reps: int
    minimum: int
    maximum: int
    samples: np.ndarray | None = None


def monte_carlo_expectation(
    lattice,
    p: float,
    *,
    reps: int,
    seed: int,
    start=None,
    keep_samples: bool = False,
) -> McResult:
    """Absorption-time mean over independent seeded replicas.

    Replica ``r`` draws from the stream derived with spawn key
    ``(replica, r)``, so results are reproducible given ``(seed, reps)``
    and invariant to execution order.  Backends may provide
    ``fast_absorption_sample`` to shortcut the generic loop from the top.
    """
    p = _check_p(p)
    if reps < 1:
        raise DomainError("reps must be >= 1")
    fast = getattr(lattice, "fast_absorption_sample", None)
    use_fast = fast is not None and start is None
    samples = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        rnd = replica_random(seed, r)
        if use_fast:
            samples[r] = fast(p, rnd)
        else:
            samples[r] = run_chain(lattice, p, rnd, start=start).absorption
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("inf")
    return McResult(
        mean=mean,
        stderr=stderr,
        reps=reps,
        minimum=int(samples.min()),
        maximum=int(samples.max()),
        samples=samples if keep_samples else None,
    )


def empirical_survival(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairs ``(t, P(sample >= t))`` for integer-valued samples."""
    samples = np.asarray(samples)
    ts = np.arange(0, samples.max() + 2)
    surv = np.array([(samples >= t).mean() for t in ts])
    return ts, surv


def sn_absorption_samples(n: int, p: float, reps: int, seed: int) -> np.ndarray:
    """Vectorized S_n sampler (all replicas stepped in lockstep).

    Selected descents are reversed blockwise with an index map: a column
    inside a selected run at positions ``[a, b]`` moves to ``a + b - c``.
    Same chain as the scalar path, used where 1e5 x n is uncomfortable in
    pure Python.
    """
    p = _check_p(p)
    rng = replica_generator(seed, 0)
    word = np.tile(np.arange(n, 0, -1, dtype=np.int64), (reps, 1))
    identity = np.arange(1, n + 1, dtype=np.int64)
    absorbed = np.zeros(reps, dtype=np.int64)
    done = (word == identity).all(axis=1)
    cols = np.arange(n)
    t = 0
    pcols = np.arange(n - 1)
    while not done.all():
        t += 1
        desc = word[:, :-1] > word[:, 1:]
        sel = desc & (rng.random((reps, n - 1)) < p)
        # runs of consecutive selected pairs; distinct runs' column blocks
        # may touch but never overlap, so block membership is per run
        pair_start = sel.copy()
        pair_start[:, 1:] &= ~sel[:, :-1]
        pair_end = sel.copy()
        pair_end[:, :-1] &= ~sel[:, 1:]
        run_start = np.maximum.accumulate(np.where(pair_start, pcols, 0), axis=1)
        run_end = np.minimum.accumulate(
            np.where(pair_end, pcols, n - 2)[:, ::-1], axis=1
        )[:, ::-1]
        inrun = np.zeros((reps, n), dtype=bool)
        inrun[:, :-1] |= sel
        inrun[:, 1:] |= sel
        selpad = np.concatenate([sel, np.zeros((reps, 1), dtype=bool)], axis=1)
        which = np.where(selpad, cols, cols - 1).clip(0, n - 2)
        block_start = np.take_along_axis(run_start, which, axis=1)
        block_end = np.take_along_axis(run_end, which, axis=1) + 1
        dest = np.where(inrun, block_start + block_end - cols, cols)
        word = np.take_along_axis(word, dest, axis=1)
        now_done = (word == identity).all(axis=1)
        absorbed[~done & now_done] = t
        done |= now_done
    return absorbed


# -- geometric variables ---------------------------------------------------------


class GeometricSampler:
    """Geometric(p) on {1, 2, ...}: ``P(X = k) = (1-p)^(k-1) p``."""

    def __init__(self, p: float, rng):
        self.p = _check_p(p)
        self.rng = rng

    def sample(self) -> int:
        if self.p == 1.0:
            return 1
        u = self.rng.random()
        while u <= 0.0:  # guard the measure-zero edge
            u = self.rng.random()
        return int(math.ceil(math.log(u) / math.log1p(-self.p)))

    def sample_array(self, size: int) -> np.ndarray:
        if hasattr(self.rng, "geometric"):
            return self.rng.geometric(self.p, size=size)
        return np.array([self.sample() for _ in range(size)], dtype=np.int64)


def geometric_tail_bound(k: int, p: float, t: float, side: str = "upper") -> float:
    """Tail bounds for a sum of ``k`` independent geometric(p) variables.

    Upper:  P(sum > k/p + t sqrt(k/p^3)) <= exp(-t^2 / (2p + 2t sqrt(p/k)))
    Lower:  P(sum < k/p - t sqrt(k/p^3)) <= exp(-t^2 / (2p - t sqrt(p/k)))

    The lower-tail form requires ``t sqrt(p/k) < 2p``.
    """
    p = _check_p(p)
    if k < 1:
        raise DomainError("k must be >= 1")
    if t <= 0:
        raise DomainError("t must be positive")
    drift = t * math.sqrt(p / k)
    if side == "upper":
        return math.exp(-t * t / (2 * p + 2 * drift))
    if side == "lower":
        denom = 2 * p - drift
        if denom <= 0:
            raise DomainError(f"lower tail needs t*sqrt(p/k) < 2p, got drift {drift}")
        return math.exp(-t * t / denom)
    raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")


# -- random-walk hitting times ----------------------------------------------------


def walk_hitting_time(
    m: int,
    rnd,
    *,
    q: float | None = None,
    max_steps: int | None = None,
) -> int:
    """First time a walk started at 0 reaches ``m``.

    With ``q`` unset the walk is the simple +-1 walk; with ``q`` in
    (0, 1/2) each step is +1 or -1 with probability ``q`` and 0 otherwise
    (the lazy walk).  Raises :class:`NotReached` when ``max_steps`` passes
    without a hit; hitting times have infinite mean, so callers doing bulk
    statistics should always cap.
    """
    if m == 0:
        raise DomainError("m must be a nonzero integer")
    if q is not None and not 0 < q < 0.5:
        raise DomainError(f"lazy parameter q={q} outside (0, 1/2)")
    pos = 0
    t = 0
    while True:
        if max_steps is not None and t >= max_steps:
            raise NotReached(f"walk did not hit {m} within {max_steps} steps")
        t += 1
        u = rnd.random()
        if q is None:
            pos += 1 if u < 0.5 else -1
        elif u < q:
            pos += 1
        elif u < 2 * q:
            pos -= 1
        if pos == m:
            return t


def first_passage_counts(
    m: int, horizon: int, reps: int, seed: int, *, q: float | None = None
) -> np.ndarray:
    """Vectorized histogram: ``out[t]`` counts walks with hitting time t.

    ``out`` has length ``horizon + 1``; index 0 counts walks that had not
    hit ``m`` by the horizon (censored).
    """
    if q is not None and not 0 < q < 0.5:
        raise DomainError(f"lazy parameter q={q} outside (0, 1/2)")
    rng = replica_generator(seed, 0)
    out = np.zeros(horizon + 1, dtype=np.int64)
    chunk = max(1, min(reps, 2_000_000 // max(1, horizon)))
    left = reps
    while left > 0:
        b = min(chunk, left)
        left -= b
        u = rng.random((b, horizon))
        if q is None:
            steps = np.where(u < 0.5, 1, -1).astype(np.int32)
        else:
            steps = np.zeros((b, horizon), dtype=np.int32)
            steps[u < q] = 1
            steps[(u >= q) & (u < 2 * q)] = -1
        walk = steps.cumsum(axis=1)
        hit = walk == m
        any_hit = hit.any(axis=1)
        first = hit.argmax(axis=1) + 1
        np.add.at(out, np.where(any_hit, first, 0), 1)
    return out
