"""Quantity-value objects: order-reversing/preserving functions, arrows, k-extension.

A value at stage ``V`` is a real function on ``↓V`` (the contexts of the
universe below ``V``).  Outer daseinisation gives order-reversing functions,
inner daseinisation order-preserving ones.  The Grothendieck completion of
the order-reversing monoid is stored through its canonical difference
function, which is exact because the completion embeds into functions of
bounded variation.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .contexts import ContextUniverse
from .daseinisation import groote_table
from .errors import DirectionMismatch, NotEmbedded
from .presheaf import ArrowTable, ValuePresheaf, spectral_presheaf
from .tolerance import TolerancePolicy, resolve

REVERSING = "reversing"
PRESERVING = "preserving"


def _close(a: Mapping, b: Mapping, atol: float) -> bool:
    return a.keys() == b.keys() and all(abs(a[k] - b[k]) <= atol for k in a)


def order_violations(values: Mapping[str, float], universe: ContextUniverse, direction: str,
                     atol: float = 0.0) -> list[tuple[str, str]]:
    """Order pairs ``(upper, lower)`` inside the domain where monotonicity fails."""
    bad = []
    for upper, lower in universe.pairs():
        if upper in values and lower in values:
            diff = values[lower] - values[upper]
            if direction == REVERSING and diff < -atol:
                bad.append((upper, lower))
            elif direction == PRESERVING and diff > atol:
                bad.append((upper, lower))
    return bad


@dataclass(frozen=True)
class PoFunction:
    root: str
    values: Mapping[str, float]
    direction: str = REVERSING

    def __post_init__(self):
        if self.direction not in (REVERSING, PRESERVING):
            raise ValueError(self.direction)

    def __getitem__(self, key: str) -> float:
        return self.values[key]

    def restrict(self, lower: str, keys) -> "PoFunction":
        return PoFunction(lower, {k: self.values[k] for k in keys}, self.direction)

    def close_to(self, other: "PoFunction", atol: float) -> bool:
        return (self.root == other.root and self.direction == other.direction
                and _close(self.values, other.values, atol))

    def is_monotone(self, universe: ContextUniverse, atol: float = 0.0) -> bool:
        return not order_violations(self.values, universe, self.direction, atol)

    def __neg__(self) -> "PoFunction":
        flipped = PRESERVING if self.direction == REVERSING else REVERSING
        return PoFunction(self.root, {k: -x for k, x in self.values.items()}, flipped)

    def to_json(self) -> dict:
        return {"root": self.root, "direction": self.direction, "values": dict(self.values)}


def zero_function(universe: ContextUniverse, root: str, direction: str = REVERSING) -> PoFunction:
    return PoFunction(root, {k: 0.0 for k in universe.down(root)}, direction)


def po_add(mu: PoFunction, nu: PoFunction) -> PoFunction:
    """Pointwise sum; the monoid operation on either presheaf of monotone functions."""
    if mu.direction != nu.direction:
        raise DirectionMismatch(f"cannot add {mu.direction} and {nu.direction} functions")
    if mu.root != nu.root or mu.values.keys() != nu.values.keys():
        raise ValueError("functions live on different down-sets")
    return PoFunction(mu.root, {k: mu.values[k] + nu.values[k] for k in mu.values}, mu.direction)


def po_scale(mu: PoFunction, a: float) -> PoFunction:
    """Multiply by a non-negative scalar (negative scalars would flip the direction)."""
    if a < 0:
        return po_scale(-mu, -a)
    return PoFunction(mu.root, {k: a * x for k, x in mu.values.items()}, mu.direction)


@dataclass(frozen=True)
class PairFunction:
    inner: PoFunction
    outer: PoFunction

    def __post_init__(self):
        if self.inner.direction != PRESERVING or self.outer.direction != REVERSING:
            raise DirectionMismatch("a pair is (order-preserving, order-reversing)")
        if self.inner.root != self.outer.root:
            raise ValueError("pair components have different roots")

    @property
    def root(self) -> str:
        return self.outer.root

    def restrict(self, lower: str, keys) -> "PairFunction":
        return PairFunction(self.inner.restrict(lower, keys), self.outer.restrict(lower, keys))

    def close_to(self, other: "PairFunction", atol: float) -> bool:
        return self.inner.close_to(other.inner, atol) and self.outer.close_to(other.outer, atol)

    def to_json(self) -> dict:
        return {"root": self.root, "inner": dict(self.inner.values), "outer": dict(self.outer.values)}


@dataclass(frozen=True)
class KValue:
    """Element of the k-extension at ``root``, stored as the function ``lambda - kappa``."""

    root: str
    bv: Mapping[str, float]

    def __getitem__(self, key: str) -> float:
        return self.bv[key]

    def __eq__(self, other):
        return isinstance(other, KValue) and self.root == other.root and dict(self.bv) == dict(other.bv)

    def __hash__(self):
        return hash((self.root, tuple(sorted(self.bv.items()))))

    def restrict(self, lower: str, keys) -> "KValue":
        return KValue(lower, {k: self.bv[k] for k in keys})

    def close_to(self, other: "KValue", atol: float) -> bool:
        return self.root == other.root and _close(self.bv, other.bv, atol)

    def to_json(self) -> dict:
        return {"root": self.root, "bv": dict(self.bv)}


def _require_reversing(*fs: PoFunction):
    for f in fs:
        if f.direction != REVERSING:
            raise DirectionMismatch("k-classes are formed from order-reversing functions")


def k_class(lam: PoFunction, kappa: PoFunction) -> KValue:
    _require_reversing(lam, kappa)
    if lam.root != kappa.root or lam.values.keys() != kappa.values.keys():
        raise ValueError("functions live on different down-sets")
    return KValue(lam.root, {k: lam.values[k] - kappa.values[k] for k in lam.values})


def k_add(a: KValue, b: KValue) -> KValue:
    if a.root != b.root or a.bv.keys() != b.bv.keys():
        raise ValueError("k-values live on different down-sets")
    return KValue(a.root, {k: a.bv[k] + b.bv[k] for k in a.bv})


def k_neg(a: KValue) -> KValue:
    return KValue(a.root, {k: -x for k, x in a.bv.items()})


def k_zero(universe: ContextUniverse, root: str) -> KValue:
    return KValue(root, {k: 0.0 for k in universe.down(root)})


def theta(mu: PoFunction) -> KValue:
    """Embed an order-reversing function as the class ``[mu, 0]``."""
    _require_reversing(mu)
    return KValue(mu.root, {k: x - 0.0 for k, x in mu.values.items()})


def variation(f: Mapping[str, float], universe: ContextUniverse, root: str) -> dict[str, float]:
    """Largest total variation of ``f`` along a chain ending at each context.

    Dynamic programming over the poset: contexts are visited smallest first,
    and a proper subcontext always has fewer blocks.
    """
    keys = sorted(universe.down(root), key=lambda k: (universe[k].size, k))
    out: dict[str, float] = {}
    for key in keys:
        best = 0.0
        for lower in universe.down(key):
            if lower != key:
                best = max(best, out[lower] + abs(f[key] - f[lower]))
        out[key] = best
    return out


def bv_decompose(f: Mapping[str, float], universe: ContextUniverse, root: str) -> tuple[PoFunction, PoFunction]:
    """Write ``f`` as ``g - h`` with ``g, h`` order-reversing.

    ``h = -I_f`` and ``g = f - I_f`` where ``I_f`` is the chain variation.
    """
    var = variation(f, universe, root)
    g = PoFunction(root, {k: f[k] - var[k] for k in var}, REVERSING)
    h = PoFunction(root, {k: -var[k] for k in var}, REVERSING)
    return g, h


def k_square_embedded(v: KValue, universe: ContextUniverse) -> KValue:
    """Square of an embedded class ``[lam, 0]``, defined as ``[lam_+^2, -lam_-^2]``.

    Raises :class:`NotEmbedded` unless the representative is order-reversing.
    """
    if order_violations(v.bv, universe, REVERSING):
        raise NotEmbedded("only classes of the form [lam, 0] with lam order-reversing can be squared")
    plus_sq = PoFunction(v.root, {k: max(x, 0.0) ** 2 for k, x in v.bv.items()}, REVERSING)
    minus_sq = PoFunction(v.root, {k: -(min(x, 0.0) ** 2) for k, x in v.bv.items()}, REVERSING)
    return k_class(plus_sq, minus_sq)


def pair_quotient_iso(p: PairFunction) -> KValue:
    """Map the class of ``(mu, nu)`` to ``[nu, -mu]``, i.e. the function ``mu + nu``."""
    return k_class(p.outer, -p.inner)


def pairs_equivalent(p: PairFunction, q: PairFunction, atol: float = 0.0) -> bool:
    return p.root == q.root and _close(
        {k: p.inner[k] + p.outer[k] for k in p.outer.values},
        {k: q.inner[k] + q.outer[k] for k in q.outer.values}, atol)


def pair_from_kvalue(v: KValue, universe: ContextUniverse) -> PairFunction:
    """A preimage of ``v`` under :func:`pair_quotient_iso` (via the variation split)."""
    g, h = bv_decompose(v.bv, universe, v.root)
    return PairFunction(-h, g)


# -- arrows -------------------------------------------------------------------

_KIND = {"outer": REVERSING, "inner": PRESERVING}


def quantity_arrow(a, universe: ContextUniverse, mode: str = "outer",
                   tol: TolerancePolicy | None = None) -> ArrowTable:
    """Arrow from the spectral presheaf sending a character to its value function.

    At stage ``V`` a character on block ``j`` goes to ``V' -> coefficient of
    das(A, V')`` on the block of ``V'`` containing block ``j``.
    """
    tol = resolve(tol)
    if mode not in ("outer", "inner", "pair"):
        raise ValueError(f"mode must be outer, inner or pair, got {mode!r}")
    sigma = spectral_presheaf(universe)
    directions = ("inner", "outer") if mode == "pair" else (mode,)
    tables = {d: groote_table(a, universe, d, tol) for d in directions}

    def function(direction, key, block):
        vals = {}
        for lower in universe.down(key):
            vals[lower] = float(tables[direction][lower].coefficients[universe.block_map(key, lower)[block]])
        return PoFunction(key, vals, _KIND[direction])

    comps = {}
    for v in universe:
        row = []
        for ch in sigma.stages[v.key]:
            if mode == "pair":
                row.append(PairFunction(function("inner", v.key, ch.block), function("outer", v.key, ch.block)))
            else:
                row.append(function(mode, v.key, ch.block))
        comps[v.key] = tuple(row)
    kind = {"outer": "reversing", "inner": "preserving", "pair": "pair"}[mode]
    return ArrowTable(sigma, ValuePresheaf(universe, kind, tol), comps, f"arrow[{mode}]")


def arrow_add(alpha: ArrowTable, beta: ArrowTable) -> ArrowTable:
    if alpha.universe is not beta.universe and alpha.universe != beta.universe:
        raise ValueError("arrows over different universes")
    if alpha.codomain.kind != beta.codomain.kind or alpha.codomain.kind not in ("reversing", "preserving"):
        raise DirectionMismatch("arrow_add needs two arrows into the same monotone-function presheaf")
    comps = {k: tuple(po_add(x, y) for x, y in zip(alpha.components[k], beta.components[k]))
             for k in alpha.components}
    return ArrowTable(alpha.domain, alpha.codomain, comps, f"{alpha.name}+{beta.name}")


def dispersion(a, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> ArrowTable:
    """Intrinsic dispersion: the class of ``das(A^2)`` minus the square of ``das(A)``.

    ``A`` is squared as an operator before daseinisation.
    """
    tol = resolve(tol)
    a = np.asarray(a, dtype=complex)
    first = quantity_arrow(a, universe, "outer", tol)
    second = quantity_arrow(a @ a, universe, "outer", tol)
    comps = {}
    for key in universe.keys:
        comps[key] = tuple(
            k_add(theta(f2), k_neg(k_square_embedded(theta(f1), universe)))
            for f1, f2 in zip(first.components[key], second.components[key]))
    return ArrowTable(first.domain, ValuePresheaf(universe, "k", tol), comps, "dispersion")


def arrows_equal(alpha: ArrowTable, beta: ArrowTable, atol: float) -> bool:
    return all(x.close_to(y, atol)
               for k in alpha.components
               for x, y in zip(alpha.components[k], beta.components[k]))


def arrow_rows(a, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> list[dict]:
    """Long-format tabulation: one row per (stage, character, subcontext)."""
    pair = quantity_arrow(a, universe, "pair", tol)
    rows = []
    for v in universe:
        for i, p in enumerate(pair.components[v.key]):
            for lower in universe.down(v.key):
                rows.append({
                    "stage": v.name, "character": v.block_label(i), "subcontext": universe[lower].name,
                    "inner": p.inner[lower], "outer": p.outer[lower],
                })
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["stage", "character", "subcontext", "inner", "outer"],
                            lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({**r, "inner": repr(float(r["inner"])), "outer": repr(float(r["outer"]))})
    return buf.getvalue()
