"""Finite presheaves over a context universe, arrows between them, sub-objects.

Presheaves with finite stages are fully tabulated: each stage is a tuple of
elements and each restriction is an index map.  Presheaves of real-valued
functions (the quantity-value objects) are infinite; they are represented by
:class:`ValuePresheaf`, which knows how to restrict and compare values but
never enumerates a stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import linalg
from .contexts import ContextUniverse, characters
from .daseinisation import das_proj_subset
from .errors import InvalidSubObject, SizeLimit
from .tolerance import TolerancePolicy, resolve

DEFAULT_NODE_BUDGET = 10**6


@dataclass(frozen=True, eq=False)
class PresheafTable:
    universe: ContextUniverse
    stages: Mapping[str, tuple]
    maps: Mapping[tuple[str, str], tuple[int, ...]]
    name: str = ""

    def stage(self, key: str) -> tuple:
        return self.stages[key]

    def restrict(self, index: int, upper: str, lower: str) -> int:
        return self.maps[(upper, lower)][index]

    # codomain protocol shared with ValuePresheaf
    def restrict_value(self, value, upper: str, lower: str):
        return self.restrict(value, upper, lower)

    def same(self, a, b) -> bool:
        return a == b

    def functoriality_violations(self) -> list[str]:
        """Identity and composition failures (exact: the maps are integer tables)."""
        bad = []
        u = self.universe
        for key in u.keys:
            if self.maps[(key, key)] != tuple(range(len(self.stages[key]))):
                bad.append(f"identity fails at {key}")
        for top, mid in u.pairs():
            for low in u.down(mid):
                if low == mid:
                    continue
                direct = self.maps[(top, low)]
                composed = tuple(self.maps[(mid, low)][i] for i in self.maps[(top, mid)])
                if direct != composed:
                    bad.append(f"composition fails on {top} > {mid} > {low}")
        return bad

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "stages": {k: [repr(e) for e in self.stages[k]] for k in self.universe.keys},
            "restrictions": [{"upper": up, "lower": lo, "map": list(self.maps[(up, lo)])}
                             for up, lo in self.universe.pairs(strict=False)],
        }


def _table(universe, stages, restrict_fn, name):
    maps = {}
    for upper, lower in universe.pairs(strict=False):
        maps[(upper, lower)] = tuple(restrict_fn(e, upper, lower) for e in stages[upper])
    return PresheafTable(universe, stages, maps, name)


def spectral_presheaf(universe: ContextUniverse) -> PresheafTable:
    """Gel'fand spectra of the contexts, restricted by block containment."""
    stages = {v.key: tuple(characters(v)) for v in universe}
    return _table(universe, stages,
                  lambda ch, up, lo: universe.block_map(up, lo)[ch.block], "spectral")


def _projection_presheaf(universe, direction, tol):
    stages = {v.key: tuple(s for s, _ in v.projections()) for v in universe}
    index = {k: {s: i for i, s in enumerate(st)} for k, st in stages.items()}

    def restrict(subset, upper, lower):
        p = universe[upper].projection(subset)
        return index[lower][das_proj_subset(p, universe[lower], direction, tol)]

    return _table(universe, stages, restrict, direction)


def outer_presheaf(universe: ContextUniverse, tol: TolerancePolicy | None = None) -> PresheafTable:
    """Projections of each context; restriction is outer daseinisation.

    Stage elements are frozensets of block indices of the context.
    """
    return _projection_presheaf(universe, "outer", resolve(tol))


def inner_presheaf(universe: ContextUniverse, tol: TolerancePolicy | None = None) -> PresheafTable:
    return _projection_presheaf(universe, "inner", resolve(tol))


def constant_presheaf(universe: ContextUniverse, elements: Sequence) -> PresheafTable:
    stages = {k: tuple(elements) for k in universe.keys}
    return _table(universe, stages, lambda e, up, lo: elements.index(e), "constant")


class ValuePresheaf:
    """Presheaf of real functions on down-sets: values restrict by truncation."""

    def __init__(self, universe: ContextUniverse, kind: str, tol: TolerancePolicy | None = None):
        if kind not in ("reversing", "preserving", "pair", "k"):
            raise ValueError(kind)
        self.universe = universe
        self.kind = kind
        self.tol = resolve(tol)
        self.name = {"reversing": "R>=", "preserving": "R<=", "pair": "R<->", "k": "k(R>=)"}[kind]

    def restrict_value(self, value, upper: str, lower: str):
        return value.restrict(lower, self.universe.down(lower))

    def same(self, a, b) -> bool:
        return a.close_to(b, self.tol.order_cmp_tol)


@dataclass(frozen=True)
class Violation:
    upper: str
    lower: str
    element: int


@dataclass
class NaturalityReport:
    violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked_squares": self.checked,
                "violations": [{"upper": v.upper, "lower": v.lower, "element": v.element}
                               for v in self.violations]}

    def to_dot(self, universe: ContextUniverse) -> str:
        return universe.to_dot(highlight={(v.upper, v.lower) for v in self.violations})


@dataclass(frozen=True, eq=False)
class ArrowTable:
    """Natural-transformation candidate: one image per domain stage element."""

    domain: PresheafTable
    codomain: Any
    components: Mapping[str, tuple]
    name: str = ""

    @property
    def universe(self) -> ContextUniverse:
        return self.domain.universe

    def __call__(self, key: str, index: int):
        return self.components[key][index]

    def with_component(self, key: str, index: int, value) -> "ArrowTable":
        comps = dict(self.components)
        row = list(comps[key])
        row[index] = value
        comps[key] = tuple(row)
        return ArrowTable(self.domain, self.codomain, comps, self.name)


def check_natural(arrow: ArrowTable) -> NaturalityReport:
    """Verify every naturality square, listing failures by order pair and element."""
    report = NaturalityReport()
    cod = arrow.codomain
    for upper, lower in arrow.universe.pairs():
        for i, image in enumerate(arrow.components[upper]):
            report.checked += 1
            left = cod.restrict_value(image, upper, lower)
            right = arrow.components[lower][arrow.domain.restrict(i, upper, lower)]
            if not cod.same(left, right):
                report.violations.append(Violation(upper, lower, i))
    return report


def identity_arrow(presheaf: PresheafTable) -> ArrowTable:
    comps = {k: tuple(range(len(st))) for k, st in presheaf.stages.items()}
    return ArrowTable(presheaf, presheaf, comps, "id")


def global_elements(presheaf: PresheafTable, budget: int = DEFAULT_NODE_BUDGET) -> list[dict]:
    """All compatible choices of one stage element per context (backtracking).

    Contexts are assigned largest first; each new choice is checked against
    every already-assigned context above or below it.
    """
    u = presheaf.universe
    order = u.keys
    results: list[dict] = []
    nodes = 0
    choice: dict[str, int] = {}

    def consistent(key, idx):
        for other, j in choice.items():
            if u.leq(key, other) and presheaf.restrict(j, other, key) != idx:
                return False
            if u.leq(other, key) and presheaf.restrict(idx, key, other) != j:
                return False
        return True

    def search(pos):
        nonlocal nodes
        if pos == len(order):
            results.append(dict(choice))
            return
        key = order[pos]
        for idx in range(len(presheaf.stages[key])):
            nodes += 1
            if nodes > budget:
                raise SizeLimit(f"global-element search exceeded {budget} partial assignments")
            if consistent(key, idx):
                choice[key] = idx
                search(pos + 1)
                del choice[key]

    search(0)
    return results


# -- sub-objects -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SubObjectTable:
    """Per-context subset (element indices) of a tabulated presheaf."""

    parent: PresheafTable
    members: Mapping[str, frozenset]

    def contains(self, value, key: str) -> bool:
        return value in self.members[key]

    def unstable_pairs(self) -> list[tuple[str, str, int]]:
        bad = []
        for upper, lower in self.parent.universe.pairs():
            for i in self.members[upper]:
                if self.parent.restrict(i, upper, lower) not in self.members[lower]:
                    bad.append((upper, lower, i))
        return bad

    def __and__(self, other: "SubObjectTable") -> "SubObjectTable":
        return SubObjectTable(self.parent, {k: self.members[k] & other.members[k] for k in self.members})

    def __le__(self, other: "SubObjectTable") -> bool:
        return all(self.members[k] <= other.members[k] for k in self.members)

    def __eq__(self, other):
        return isinstance(other, SubObjectTable) and dict(self.members) == dict(other.members)

    def to_json(self) -> dict:
        return {k: sorted(self.members[k]) for k in self.parent.universe.keys}


def whole(presheaf: PresheafTable) -> SubObjectTable:
    return SubObjectTable(presheaf, {k: frozenset(range(len(s))) for k, s in presheaf.stages.items()})


def empty(presheaf: PresheafTable) -> SubObjectTable:
    return SubObjectTable(presheaf, {k: frozenset() for k in presheaf.stages})


@dataclass(frozen=True)
class IntervalSubobject:
    """Functions with ``mu(V') in intervals[V']`` for every ``V'`` of their domain.

    Automatically stable under restriction.  Contexts missing from the map
    are unconstrained.
    """

    intervals: Mapping[str, tuple]

    def contains(self, value, key: str) -> bool:
        for k, x in value.values.items():
            lo, hi = self.intervals.get(k, (-np.inf, np.inf))
            if not lo <= x <= hi:
                return False
        return True

    def __and__(self, other: "IntervalSubobject") -> "IntervalSubobject":
        keys = set(self.intervals) | set(other.intervals)
        full = (-np.inf, np.inf)
        return IntervalSubobject({k: (max(self.intervals.get(k, full)[0], other.intervals.get(k, full)[0]),
                                      min(self.intervals.get(k, full)[1], other.intervals.get(k, full)[1]))
                                  for k in keys})


@dataclass(frozen=True)
class PredicateSubobject:
    """Arbitrary per-stage predicate; stability is verified on the values used."""

    predicate: Callable[[Any, str], bool]

    def contains(self, value, key: str) -> bool:
        return bool(self.predicate(value, key))


def pullback_subobject(arrow: ArrowTable, xi) -> SubObjectTable:
    """Sub-object of the domain whose elements the arrow sends into ``xi``."""
    u = arrow.universe
    cod = arrow.codomain
    if isinstance(xi, SubObjectTable):
        if xi.unstable_pairs():
            raise InvalidSubObject("sub-object is not stable under restriction")
    elif isinstance(xi, PredicateSubobject):
        for upper, lower in u.pairs():
            for image in arrow.components[upper]:
                if xi.contains(image, upper) and not xi.contains(cod.restrict_value(image, upper, lower), lower):
                    raise InvalidSubObject(f"predicate not stable on {upper} -> {lower}")
    members = {k: frozenset(i for i, image in enumerate(arrow.components[k]) if xi.contains(image, k))
               for k in u.keys}
    result = SubObjectTable(arrow.domain, members)
    if result.unstable_pairs():
        raise InvalidSubObject("pullback is not restriction-stable (arrow not natural?)")
    return result


def proposition_subobject(a, interval, universe: ContextUniverse,
                          tol: TolerancePolicy | None = None) -> SubObjectTable:
    """Characters sending the daseinised spectral projection ``E[A in interval]`` to 1."""
    from .daseinisation import spectral_projection

    tol = resolve(tol)
    sigma = spectral_presheaf(universe)
    e = spectral_projection(a, interval, tol)
    members = {}
    for v in universe:
        subset = das_proj_subset(e, v, "outer", tol)
        members[v.key] = frozenset(i for i, ch in enumerate(sigma.stages[v.key]) if ch.block in subset)
    return SubObjectTable(sigma, members)


@dataclass(frozen=True)
class Sieve:
    root: str
    members: frozenset

    def to_json(self) -> dict:
        return {"root": self.root, "members": sorted(self.members)}


def truth_sieve_check(sieve: Sieve, universe: ContextUniverse) -> bool:
    """True iff the members lie in ``↓root`` and are down-closed there."""
    down = set(universe.down(sieve.root))
    if not set(sieve.members) <= down:
        return False
    return all(set(universe.down(m)) <= set(sieve.members) for m in sieve.members)


def outer_global_element(p, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> dict:
    """The global element ``V -> outer-das(P)_V`` of the outer presheaf, as indices."""
    g = outer_presheaf(universe, tol)
    out = {}
    for v in universe:
        subset = das_proj_subset(p, v, "outer", tol)
        out[v.key] = g.stages[v.key].index(subset)
    return out


def is_daseinised_element(element: Mapping[str, int], universe: ContextUniverse,
                          tol: TolerancePolicy | None = None) -> bool:
    """Decide whether a global element of the outer presheaf equals ``outer-das(P)``.

    If it does, ``P <= g_V`` for all ``V`` so ``P <= P* := meet_V g_V``, and by
    monotonicity ``das(P) <= das(P*) <= g``.  Hence it is of that form iff
    ``das(P*) = g``.
    """
    g = outer_presheaf(universe, tol)
    mats = [universe[k].projection(g.stages[k][i]) for k, i in element.items()]
    p_star = linalg.proj_meet(mats, tol)
    return outer_global_element(p_star, universe, tol) == dict(element)
