"""Finite posets stored as explicit cover relations.

Elements are dense integer indices ``0..n-1``.  A poset is described by
``covers[x]``, the set of elements covered by ``x`` (drawn directly below
``x`` in the Hasse diagram).  The reflexive-transitive closure of the cover
relation is the order relation; it is cached as bitmasks (one Python int
per element) for posets with at most ``LEQ_CACHE_CAP`` elements and
recomputed on demand above that.

The module also provides order ideals (downward-closed subsets, stored as
bitmasks), the distributive lattice ``J(P)`` of all order ideals of ``P``,
maximal-chain enumeration, meets in small lattices, and the grid poset
``R_{n,m}`` (the product of a chain of length ``n-1`` and one of length
``m-1``).

Exact enumerations are guarded by explicit caps because both ``|J(P)|``
and the number of maximal chains grow exponentially.
"""

from __future__ import annotations

import heapq
import json
from collections.abc import Iterable, Sequence

from .errors import (
    ChainExplosion,
    CycleDetected,
    NotALattice,
    RedundantCover,
    StateExplosion,
)

DEFAULT_STATE_CAP = 10**6
DEFAULT_CHAIN_CAP = 10**6
LEQ_CACHE_CAP = 4096


class FinitePoset:
    """An immutable finite poset on ``0..n-1`` given by its cover relation.

    Construction validates that the cover relation is acyclic and that no
    cover edge is implied by transitivity (an edge ``x lessdot y`` admits
    no ``z`` with ``x < z < y``); redundant edges are rejected rather than
    silently reduced, to surface construction bugs.
    """

    __slots__ = ("n", "covers", "parents", "_topo", "_down")

    def __init__(self, covers: Sequence[Iterable[int]], *, validate: bool = True):
        n = len(covers)
        cov = tuple(frozenset(c) for c in covers)
        for x, cs in enumerate(cov):
            for c in cs:
                if not (0 <= c < n):
                    raise ValueError(f"cover target {c} out of range for n={n}")
                if c == x:
                    raise CycleDetected(f"element {x} covers itself")
        par = [set() for _ in range(n)]
        for x, cs in enumerate(cov):
            for c in cs:
                par[c].add(x)
        self.n = n
        self.covers = cov
        self.parents = tuple(frozenset(s) for s in par)
        self._topo = self._toposort()
        self._down = None
        if validate:
            self._check_irredundant()

    def _toposort(self) -> tuple[int, ...]:
        """Linear extension with covered elements first; detects cycles."""
        n = self.n
        indeg = [len(self.covers[x]) for x in range(n)]
        queue = sorted(x for x in range(n) if indeg[x] == 0)
        order: list[int] = []
        heapq.heapify(queue)
        while queue:
            x = heapq.heappop(queue)
            order.append(x)
            for y in self.parents[x]:
                indeg[y] -= 1
                if indeg[y] == 0:
                    heapq.heappush(queue, y)
        if len(order) != n:
            raise CycleDetected("cover relation contains a cycle")
        return tuple(order)

    def _down_masks(self) -> tuple[int, ...]:
        if self._down is None:
            down = [0] * self.n
            for x in self._topo:
                m = 1 << x
                for c in self.covers[x]:
                    m |= down[c]
                down[x] = m
            if self.n <= LEQ_CACHE_CAP:
                self._down = tuple(down)
            else:
                return tuple(down)
        return self._down

    def _check_irredundant(self) -> None:
        down = self._down_masks()
        for x in range(self.n):
            for c in self.covers[x]:
                for z in self.covers[x]:
                    if z != c and down[z] >> c & 1:
                        raise RedundantCover(
                            f"cover edge ({c}, {x}) is implied via {z}"
                        )

    # -- order queries ----------------------------------------------------

    def leq(self, x: int, y: int) -> bool:
        """True iff ``x <= y``."""
        return bool(self._down_masks()[y] >> x & 1)

    def down_mask(self, y: int) -> int:
        """Bitmask of the principal ideal ``{x : x <= y}``."""
        return self._down_masks()[y]

    def topo_order(self) -> tuple[int, ...]:
        """A linear extension (covered elements before covering ones)."""
        return self._topo

    def minimal_elements(self) -> tuple[int, ...]:
        return tuple(x for x in range(self.n) if not self.covers[x])

    def maximal_elements(self) -> tuple[int, ...]:
        return tuple(x for x in range(self.n) if not self.parents[x])

    # -- ideals as bitmasks ------------------------------------------------

    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def is_down_closed(self, mask: int) -> bool:
        m = mask
        while m:
            x = (m & -m).bit_length() - 1
            for c in self.covers[x]:
                if not mask >> c & 1:
                    return False
            m &= m - 1
        return True

    def maximal_of_mask(self, mask: int) -> tuple[int, ...]:
        """Maximal elements of a downward-closed ``mask``.

        For a downward-closed set these are exactly the members with no
        cover-parent inside the set.
        """
        out = []
        m = mask
        while m:
            x = (m & -m).bit_length() - 1
            if all(not mask >> y & 1 for y in self.parents[x]):
                out.append(x)
            m &= m - 1
        return tuple(out)

    # -- serialization ------------------------------------------------------

    def cover_pairs(self) -> list[tuple[int, int]]:
        """Sorted ``(child, parent)`` pairs."""
        return sorted((c, x) for x in range(self.n) for c in self.covers[x])

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "covers": self.cover_pairs()})

    @classmethod
    def from_json(cls, text: str) -> "FinitePoset":
        data = json.loads(text)
        return build_poset(
            [(int(c), int(p)) for c, p in data["covers"]], n=int(data["n"])
        )

    def to_dot(self, labels: Sequence[str] | None = None) -> str:
        """Hasse diagram in DOT form, parents drawn above children."""
        name = labels if labels is not None else [str(x) for x in range(self.n)]
        lines = ["digraph hasse {", "  rankdir=BT;", "  edge [arrowhead=none];"]
        for x in range(self.n):
            lines.append(f'  {x} [label="{name[x]}"];')
        for c, x in self.cover_pairs():
            lines.append(f"  {c} -> {x};")
        lines.append("}")
        return "\n".join(lines)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FinitePoset)
            and self.n == other.n
            and self.covers == other.covers
        )

    def __hash__(self) -> int:
        return hash((self.n, self.covers))

    def __repr__(self) -> str:
        return f"FinitePoset(n={self.n}, covers={len(self.cover_pairs())} edges)"


class GridPoset(FinitePoset):
    """The grid ``R_{rows,cols}``: pairs ``(i, j)`` ordered componentwise."""

    __slots__ = ("rows", "cols")

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise ValueError("grid dimensions must be positive")
        covers = []
        for i in range(rows):
            for j in range(cols):
                below = []
                if i > 0:
                    below.append((i - 1) * cols + j)
                if j > 0:
                    below.append(i * cols + j - 1)
                covers.append(below)
        # object.__setattr__ not needed: plain slots, set before super() use
        self.rows = rows
        self.cols = cols
        super().__init__(covers, validate=False)

    def index(self, i: int, j: int) -> int:
        return i * self.cols + j

    def coords(self, e: int) -> tuple[int, int]:
        return divmod(e, self.cols)

    def __repr__(self) -> str:
        return f"GridPoset({self.rows}x{self.cols})"


def build_poset(
    pairs: Iterable[tuple[int, int]], n: int | None = None
) -> FinitePoset:
    """Build a validated poset from ``(child, parent)`` cover pairs.

    ``n`` defaults to one more than the largest index mentioned.  Raises
    :class:`CycleDetected` for cyclic input and :class:`RedundantCover`
    when an edge is implied by transitivity.
    """
    pairs = list(pairs)
    if n is None:
        n = max((max(c, p) for c, p in pairs), default=-1) + 1
    covers = [set() for _ in range(n)]
    for c, p in pairs:
        if not (0 <= c < n and 0 <= p < n):
            raise ValueError(f"cover pair ({c}, {p}) out of range for n={n}")
        covers[p].add(c)
    return FinitePoset(covers)


def grid_poset(rows: int, cols: int) -> GridPoset:
    """The product of a chain of length ``rows-1`` and one of ``cols-1``."""
    return GridPoset(rows, cols)


class OrderIdeal:
    """A downward-closed subset of a :class:`FinitePoset`, as a bitmask."""

    __slots__ = ("poset", "mask")

    def __init__(self, poset: FinitePoset, members: int | Iterable[int], *,
                 validate: bool = True):
        if isinstance(members, int):
            mask = members
        else:
            mask = 0
            for x in members:
                mask |= 1 << x
        if validate and not poset.is_down_closed(mask):
            raise ValueError("subset is not downward closed")
        self.poset = poset
        self.mask = mask

    @classmethod
    def full(cls, poset: FinitePoset) -> "OrderIdeal":
        return cls(poset, poset.full_mask(), validate=False)

    @classmethod
    def empty(cls, poset: FinitePoset) -> "OrderIdeal":
        return cls(poset, 0, validate=False)

    def members(self) -> tuple[int, ...]:
        out, m = [], self.mask
        while m:
            out.append((m & -m).bit_length() - 1)
            m &= m - 1
        return tuple(out)

    def maximal(self) -> tuple[int, ...]:
        return self.poset.maximal_of_mask(self.mask)

    def remove(self, elements: Iterable[int]) -> "OrderIdeal":
        """Remove a batch of maximal elements (the ideal-chain move)."""
        drop = 0
        maxima = set(self.maximal())
        for x in elements:
            if x not in maxima:
                raise ValueError(f"{x} is not a maximal element of the ideal")
            drop |= 1 << x
        return OrderIdeal(self.poset, self.mask & ~drop, validate=False)

    def __contains__(self, x: int) -> bool:
        return bool(self.mask >> x & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OrderIdeal)
            and self.poset == other.poset
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.poset, self.mask))

    def __repr__(self) -> str:
        return f"OrderIdeal({sorted(self.members())})"


class IdealLatticePoset(FinitePoset):
    """``J(P)`` as an explicit poset; element ``k`` is ``ideal_masks[k]``."""

    __slots__ = ("base", "ideal_masks")

    def __init__(self, base: FinitePoset, ideal_masks: tuple[int, ...],
                 covers: Sequence[Iterable[int]]):
        self.base = base
        self.ideal_masks = ideal_masks
        super().__init__(covers, validate=False)

    def index_of(self, mask: int) -> int:
        return self.ideal_masks.index(mask)


def enumerate_ideal_masks(
    poset: FinitePoset, *, cap: int = DEFAULT_STATE_CAP
) -> list[int]:
    """All downward-closed bitmasks of ``poset``, smallest-first.

    Found by deleting maximal elements starting from the full ideal; the
    result is sorted by ``(popcount, mask)`` for determinism.  Raises
    :class:`StateExplosion` past ``cap`` states.
    """
    full = poset.full_mask()
    seen = {full}
    stack = [full]
    while stack:
        mask = stack.pop()
        for x in poset.maximal_of_mask(mask):
            sub = mask & ~(1 << x)
            if sub not in seen:
                if len(seen) >= cap:
                    raise StateExplosion(
                        f"|J(P)| exceeds cap {cap} for poset with n={poset.n}"
                    )
                seen.add(sub)
                stack.append(sub)
    return sorted(seen, key=lambda m: (m.bit_count(), m))


def order_ideals(
    poset: FinitePoset, *, cap: int = DEFAULT_STATE_CAP
) -> IdealLatticePoset:
    """The distributive lattice ``J(P)`` of order ideals of ``poset``.

    Ideal ``J`` covers ``I`` exactly when ``I`` is obtained from ``J`` by
    removing a maximal element of ``J``.
    """
    masks = enumerate_ideal_masks(poset, cap=cap)
    index = {m: k for k, m in enumerate(masks)}
    covers = []
    for mask in masks:
        covers.append([index[mask & ~(1 << x)] for x in poset.maximal_of_mask(mask)])
    return IdealLatticePoset(poset, tuple(masks), covers)


def maximal_chains(
    poset: FinitePoset, *, cap: int = DEFAULT_CHAIN_CAP
) -> list[tuple[int, ...]]:
    """All maximal chains of ``poset``, each bottom-to-top.

    A maximal chain runs from a minimal element to a maximal element along
    cover edges, so it cannot be extended at either end or refined in the
    middle.  Raises :class:`ChainExplosion` past ``cap`` chains.
    """
    out: list[tuple[int, ...]] = []
    parents = poset.parents

    def extend(chain: list[int]) -> None:
        ups = sorted(parents[chain[-1]])
        if not ups:
            if len(out) >= cap:
                raise ChainExplosion(f"maximal-chain count exceeds cap {cap}")
            out.append(tuple(chain))
            return
        for y in ups:
            chain.append(y)
            extend(chain)
            chain.pop()

    for x in sorted(poset.minimal_elements()):
        extend([x])
    return out


def meet(poset: FinitePoset, x: int, y: int) -> int:
    """Greatest lower bound of ``x`` and ``y``.

    Raises :class:`NotALattice` when the set of common lower bounds has no
    unique maximum (detected lazily, per element pair).
    """
    common = poset.down_mask(x) & poset.down_mask(y)
    if common == 0:
        raise NotALattice(f"elements {x}, {y} have no common lower bound")
    candidates = []
    m = common
    while m:
        z = (m & -m).bit_length() - 1
        candidates.append(z)
        m &= m - 1
    maxima = [
        z
        for z in candidates
        if all(w == z or not poset.leq(z, w) for w in candidates)
    ]
    if len(maxima) != 1:
        raise NotALattice(
            f"elements {x}, {y} have {len(maxima)} maximal common lower bounds"
        )
    return maxima[0]
