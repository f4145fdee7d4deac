"""Abelian contexts as orthogonal block partitions, and finite context posets.

A finite-dimensional unital abelian von Neumann algebra is determined by its
minimal projections, so a :class:`Context` stores exactly those ("blocks").
A subalgebra corresponds to a coarsening of the block partition.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import linalg
from .errors import IntegrityError, InvalidOperator, NotCommuting, NotSubcontext
from .tolerance import TolerancePolicy, resolve

_ROUND = 8


def _block_sort_key(q: np.ndarray):
    r = np.round(q, _ROUND) + 0.0
    flat = tuple(r.real.ravel()) + tuple(r.imag.ravel())
    return (linalg.rank(q), tuple(x + 0.0 for x in flat))


def _diagonal_label(blocks: Sequence[np.ndarray]) -> str | None:
    groups = []
    for q in blocks:
        if np.abs(q - np.diag(np.diag(q))).max() > 1e-9:
            return None
        d = np.diag(q).real
        if np.abs(d - np.round(d)).max() > 1e-9:
            return None
        groups.append([i + 1 for i in np.flatnonzero(np.round(d) == 1)])
    groups.sort(key=lambda g: g[0])
    sep = "" if len(blocks[0]) < 10 else ","
    return "{" + "|".join(sep.join(str(i) for i in g) for g in groups) + "}"


@dataclass(frozen=True, eq=False)
class Context:
    """Unital abelian subalgebra, given by its minimal projections.

    Use :func:`make_context` to construct one; it validates the partition of
    unity, orders the blocks canonically and derives ``key``.
    """

    blocks: tuple
    key: str
    label: str | None = None

    @property
    def dim(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def name(self) -> str:
        return self.label or self.key

    @property
    def is_trivial(self) -> bool:
        return self.size == 1

    def block_label(self, j: int) -> str:
        """Basis indices of a diagonal block (``"23"``), else the block index."""
        if self.label is None:
            return f"#{j}"
        idx = np.flatnonzero(np.round(np.diag(self.blocks[j]).real) == 1) + 1
        return ("" if self.dim < 10 else ",").join(str(i) for i in idx)

    def projection(self, subset: Iterable[int]) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for j in subset:
            out = out + self.blocks[j]
        return out

    def projections(self) -> list[tuple[frozenset, np.ndarray]]:
        """All ``2**size`` projections of the context, keyed by block subset."""
        out = []
        for r in range(self.size + 1):
            for subset in itertools.combinations(range(self.size), r):
                out.append((frozenset(subset), self.projection(subset)))
        return out

    def operator(self, coefficients: Sequence[float]) -> np.ndarray:
        return sum(c * q for c, q in zip(coefficients, self.blocks))

    def evaluate(self, block: int, op: np.ndarray) -> complex:
        """Character value: for ``op`` in the context this is its coefficient on ``block``."""
        q = self.blocks[block]
        return complex(np.trace(q @ op) / np.trace(q).real)

    def contains(self, op, tol: TolerancePolicy | None = None) -> bool:
        tol = resolve(tol)
        op = np.asarray(op, dtype=complex)
        coeffs = [self.evaluate(j, op) for j in range(self.size)]
        return bool(np.linalg.norm(self.operator(coeffs) - op) <= tol.order_cmp_tol * max(1.0, np.abs(op).max()))

    def __eq__(self, other):
        return isinstance(other, Context) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Context({self.name})"


def make_context(blocks: Sequence, tol: TolerancePolicy | None = None) -> Context:
    tol = resolve(tol)
    blocks = [linalg.as_projection(b, tol) for b in blocks]
    if not blocks:
        raise InvalidOperator("a context needs at least one block")
    n = linalg._same_dim(*blocks)
    for b in blocks:
        if np.linalg.norm(b) < 0.5:
            raise InvalidOperator("zero block in context")
    for i, j in itertools.combinations(range(len(blocks)), 2):
        if np.abs(blocks[i] @ blocks[j]).max() > tol.proj_tol:
            raise InvalidOperator("context blocks are not pairwise orthogonal")
    if np.abs(sum(blocks) - np.eye(n)).max() > tol.proj_tol:
        raise InvalidOperator("context blocks do not sum to the identity")
    blocks.sort(key=_block_sort_key)
    digest = hashlib.sha1(repr([_block_sort_key(b) for b in blocks]).encode()).hexdigest()
    key = f"V{len(blocks)}-{digest[:10]}"
    return Context(tuple(blocks), key, _diagonal_label(blocks))


def trivial_context(dim: int) -> Context:
    return make_context([np.eye(dim)])


def context_from_operators(ops: Sequence, tol: TolerancePolicy | None = None) -> Context:
    """Abelian algebra generated by pairwise-commuting Hermitian operators."""
    tol = resolve(tol)
    if isinstance(ops, np.ndarray) and ops.ndim == 2:
        ops = [ops]
    ops = [linalg.as_hermitian(a, tol) for a in ops]
    if not ops:
        raise InvalidOperator("no operators given")
    n = linalg._same_dim(*ops)
    for i, j in itertools.combinations(range(len(ops)), 2):
        a, b = ops[i], ops[j]
        scale = max(1.0, np.abs(a).max() * np.abs(b).max())
        if np.abs(a @ b - b @ a).max() > tol.hermitian_tol * scale:
            raise NotCommuting(f"operators {i} and {j} do not commute", index=(i, j))
    blocks = [np.eye(n, dtype=complex)]
    for a in ops:
        _, eigenprojections = linalg.eigen_clusters(a, tol)
        refined = []
        for q in blocks:
            for e in eigenprojections:
                qe = q @ e
                if np.linalg.norm(qe) > 0.5:
                    refined.append((qe + qe.conj().T) / 2)
        blocks = refined
    return make_context(blocks, tol)


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def subcontexts(v: Context, include_trivial: bool = False, tol: TolerancePolicy | None = None) -> list[Context]:
    """Every unital subalgebra of ``v``, one per partition of its blocks."""
    out = []
    for part in set_partitions(range(v.size)):
        if len(part) == 1 and not include_trivial:
            continue
        out.append(make_context([v.projection(g) for g in part], tol))
    return out


def block_map(upper: Context, lower: Context, tol: TolerancePolicy | None = None) -> tuple[int, ...] | None:
    """Index map ``upper block -> containing lower block`` if ``lower <= upper``.

    ``lower`` is a subalgebra of ``upper`` iff every block of ``lower`` is a sum
    of blocks of ``upper``; returns None otherwise.
    """
    tol = resolve(tol)
    if upper.dim != lower.dim or lower.size > upper.size:
        return None
    mapping = []
    for q in upper.blocks:
        hits = [j for j, ql in enumerate(lower.blocks) if linalg.proj_leq(q, ql, tol)]
        if len(hits) != 1:
            return None
        mapping.append(hits[0])
    for j, ql in enumerate(lower.blocks):
        s = upper.projection(i for i, m in enumerate(mapping) if m == j)
        if np.linalg.norm(s - ql) > tol.order_cmp_tol:
            return None
    return tuple(mapping)


def same_context(a: Context, b: Context, tol: TolerancePolicy | None = None) -> bool:
    return a.size == b.size and block_map(a, b, tol) is not None


@dataclass(frozen=True)
class Character:
    """Gel'fand spectrum point of a context: the block it sends to 1."""

    context_key: str
    block: int


def characters(v: Context) -> list[Character]:
    return [Character(v.key, j) for j in range(v.size)]


def restrict_character(ch: Character, v: Context, vp: Context, tol: TolerancePolicy | None = None) -> Character:
    if ch.context_key != v.key:
        raise ValueError(f"character lives on {ch.context_key}, not {v.key}")
    m = block_map(v, vp, tol)
    if m is None:
        raise NotSubcontext(f"{vp.name} is not a subcontext of {v.name}")
    return Character(vp.key, m[ch.block])


def character_ultrafilter(ch: Character, v: Context) -> list[np.ndarray]:
    """All projections of ``v`` on which the character takes the value 1."""
    return [p for subset, p in v.projections() if ch.block in subset]


def character_from_ultrafilter(projections: Sequence[np.ndarray], v: Context,
                               tol: TolerancePolicy | None = None) -> Character:
    m = linalg.proj_meet(list(projections), tol)
    for j, q in enumerate(v.blocks):
        if linalg.proj_equal(m, q, tol):
            return Character(v.key, j)
    raise ValueError("projection set is not a character ultrafilter of this context")


@dataclass(frozen=True, eq=False)
class PrincipalFilter:
    """Upward-closed set of projections generated by a nonzero projection."""

    generator: np.ndarray

    def __post_init__(self):
        if np.linalg.norm(self.generator) < 0.5:
            raise ValueError("principal filter needs a nonzero generator")

    def contains(self, q: np.ndarray, tol: TolerancePolicy | None = None) -> bool:
        return linalg.proj_leq(self.generator, q, tol)


def cone(filter_base: Sequence[np.ndarray], tol: TolerancePolicy | None = None) -> PrincipalFilter:
    """Smallest filter of P(H) containing a finite filter base."""
    if len(filter_base) == 0:
        raise ValueError("empty filter base")
    return PrincipalFilter(linalg.proj_meet(list(filter_base), tol))


def principal_filter(p: np.ndarray, tol: TolerancePolicy | None = None) -> PrincipalFilter:
    return PrincipalFilter(linalg.as_projection(p, tol))


class ContextUniverse:
    """Finite poset of contexts, ordered by inclusion of subalgebras.

    Contexts are listed largest-first (by number of blocks, then key).  The
    constructor derives the order and the per-pair block maps; it does not
    close the set under subalgebras, use :func:`build_universe` for that.
    """

    def __init__(self, contexts: Iterable[Context], include_trivial: bool = False,
                 tol: TolerancePolicy | None = None, dim: int | None = None):
        self.tol = resolve(tol)
        self.include_trivial = include_trivial
        ctxs = sorted({c.key: c for c in contexts}.values(), key=lambda c: (-c.size, c.key))
        self.contexts: tuple[Context, ...] = tuple(ctxs)
        dims = {c.dim for c in ctxs}
        if len(dims) > 1:
            raise IntegrityError(f"contexts of different dimensions: {sorted(dims)}")
        self.dim = dims.pop() if dims else dim
        self._index = {c.key: i for i, c in enumerate(ctxs)}
        self._maps: dict[tuple[str, str], tuple[int, ...]] = {}
        for upper in ctxs:
            for lower in ctxs:
                m = block_map(upper, lower, self.tol)
                if m is not None:
                    self._maps[(upper.key, lower.key)] = m
        self._down = {c.key: [d.key for d in ctxs if (c.key, d.key) in self._maps] for c in ctxs}
        self._up = {c.key: [d.key for d in ctxs if (d.key, c.key) in self._maps] for c in ctxs}

    # -- container protocol
    def __len__(self):
        return len(self.contexts)

    def __iter__(self):
        return iter(self.contexts)

    def __contains__(self, item):
        key = item.key if isinstance(item, Context) else item
        return key in self._index

    def __getitem__(self, key: str) -> Context:
        return self.contexts[self._index[key]]

    def __eq__(self, other):
        return (isinstance(other, ContextUniverse) and self.keys == other.keys
                and self.hasse_edges == other.hasse_edges)

    def __repr__(self):
        return f"ContextUniverse({len(self)} contexts, dim={self.dim})"

    @property
    def keys(self) -> list[str]:
        return [c.key for c in self.contexts]

    def find(self, context: Context) -> Context | None:
        """Member equal to ``context`` up to tolerance, if any."""
        if context.key in self._index:
            return self[context.key]
        for c in self.contexts:
            if same_context(c, context, self.tol):
                return c
        return None

    def by_label(self, label: str) -> Context:
        for c in self.contexts:
            if c.label == label or c.key == label:
                return c
        raise KeyError(label)

    # -- order
    def leq(self, lower: str, upper: str) -> bool:
        return (upper, lower) in self._maps

    def down(self, key: str) -> list[str]:
        """Keys of ``↓V`` (including ``V``), largest first."""
        return list(self._down[key])

    def up(self, key: str) -> list[str]:
        return list(self._up[key])

    def block_map(self, upper: str, lower: str) -> tuple[int, ...]:
        try:
            return self._maps[(upper, lower)]
        except KeyError:
            raise NotSubcontext(f"{lower} is not below {upper}") from None

    def pairs(self, strict: bool = True) -> list[tuple[str, str]]:
        """All ``(upper, lower)`` order pairs in deterministic order."""
        return [(u.key, l.key) for u in self.contexts for l in self.contexts
                if (u.key, l.key) in self._maps and (not strict or u.key != l.key)]

    @property
    def hasse_edges(self) -> list[tuple[str, str]]:
        """Covering pairs as ``(lower, upper)``."""
        edges = []
        for upper, lower in self.pairs():
            between = any(self.leq(lower, w) and self.leq(w, upper)
                          for w in self.keys if w not in (upper, lower))
            if not between:
                edges.append((lower, upper))
        return edges

    def maximal(self) -> list[str]:
        return [k for k in self.keys if self._up[k] == [k]]

    def minimal(self) -> list[str]:
        return [k for k in self.keys if self._down[k] == [k]]

    def check_down_closed(self) -> list[str]:
        missing = []
        for c in self.contexts:
            for s in subcontexts(c, self.include_trivial, self.tol):
                if self.find(s) is None:
                    missing.append(f"{s.name} below {c.name}")
        return missing

    # -- serialization
    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "include_trivial": self.include_trivial,
            "contexts": [
                {"key": c.key, "label": c.label,
                 "blocks": [linalg.operator_to_json(q) for q in c.blocks]}
                for c in self.contexts
            ],
            "hasse_edges": [list(e) for e in self.hasse_edges],
        }

    @classmethod
    def from_json(cls, data: dict, tol: TolerancePolicy | None = None) -> "ContextUniverse":
        try:
            entries = data["contexts"]
            include_trivial = bool(data.get("include_trivial", False))
            contexts = []
            for entry in entries:
                c = make_context([linalg.operator_from_json(b) for b in entry["blocks"]], tol)
                if c.key != entry["key"]:
                    raise IntegrityError(f"context key {entry['key']} does not match its blocks ({c.key})")
                contexts.append(c)
            edges = [tuple(e) for e in data.get("hasse_edges", [])]
        except (KeyError, TypeError, InvalidOperator) as exc:
            raise IntegrityError(f"malformed universe: {exc}") from exc
        u = cls(contexts, include_trivial, tol, dim=data.get("dim"))
        if len(u) != len(entries):
            raise IntegrityError("duplicate contexts in universe file")
        if "hasse_edges" in data and sorted(edges) != sorted(u.hasse_edges):
            raise IntegrityError("stored Hasse edges disagree with the recomputed order")
        missing = u.check_down_closed()
        if missing:
            raise IntegrityError(f"universe is not down-closed: {missing[0]}")
        return u

    def to_dot(self, highlight: Iterable[tuple[str, str]] = ()) -> str:
        highlight = {tuple(e) for e in highlight}
        lines = ["digraph universe {", "  rankdir=TB;", "  node [shape=box];"]
        for c in self.contexts:
            lines.append(f'  "{c.key}" [label="{c.name}"];')
        for lower, upper in self.hasse_edges:
            attr = ' [color=red, penwidth=2]' if (upper, lower) in highlight else ""
            lines.append(f'  "{upper}" -> "{lower}"{attr};')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_universe(seeds: Sequence, include_trivial: bool = False,
                   tol: TolerancePolicy | None = None, dim: int | None = None) -> ContextUniverse:
    """Down-closed universe generated by seed contexts or commuting operator sets.

    Each seed is a :class:`Context`, a single Hermitian matrix, or a sequence
    of pairwise-commuting Hermitian matrices.
    """
    tol = resolve(tol)
    found: list[Context] = []

    def add(c: Context):
        for existing in found:
            if existing.key == c.key or same_context(existing, c, tol):
                return
        found.append(c)

    for i, seed in enumerate(seeds):
        if isinstance(seed, Context):
            top = seed
        else:
            try:
                top = context_from_operators(seed, tol)
            except NotCommuting as exc:
                raise NotCommuting(f"seed {i}: {exc}", index=i) from exc
        if top.size > 1 or include_trivial:
            add(top)
        for s in subcontexts(top, include_trivial, tol):
            add(s)
    if not found and include_trivial:
        if dim is None:
            raise ValueError("dim is required to build a universe from no seeds")
        found.append(trivial_context(dim))
    return ContextUniverse(found, include_trivial, tol, dim=dim)
