"""Inner and outer daseinisation into abelian contexts.

The production path uses the block-overlap characterisation: a block ``Q`` of
the context "sees" an eigenvalue of ``A`` iff ``Q`` and the corresponding
eigenprojection have nonzero product.  Outer daseinisation takes the largest
seen eigenvalue on each block, inner daseinisation the smallest.  The lattice
definitions live in :mod:`toposqm.oracles` and are used to test this path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg

from . import linalg
from .contexts import Context, ContextUniverse, PrincipalFilter
from .tolerance import TolerancePolicy, resolve

DIRECTIONS = ("outer", "inner")


def _check_direction(direction: str):
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be 'outer' or 'inner', got {direction!r}")


def _overlaps(p: np.ndarray, q: np.ndarray, tol: TolerancePolicy) -> bool:
    return float(np.linalg.norm(p @ q)) > tol.zero_overlap_tol


def das_proj_subset(p, v: Context, direction: str, tol: TolerancePolicy | None = None) -> frozenset:
    """Block indices of ``v`` making up the daseinised projection."""
    tol = resolve(tol)
    _check_direction(direction)
    p = linalg.as_projection(p, tol)
    if direction == "outer":
        return frozenset(j for j, q in enumerate(v.blocks) if _overlaps(q, p, tol))
    comp = np.eye(v.dim) - p
    return frozenset(j for j, q in enumerate(v.blocks) if not _overlaps(q, comp, tol))


def das_proj(p, v: Context, direction: str = "outer", tol: TolerancePolicy | None = None) -> np.ndarray:
    """Smallest projection of ``v`` above ``p`` (outer) or largest below it (inner)."""
    return v.projection(das_proj_subset(p, v, direction, tol))


@dataclass(frozen=True, eq=False)
class DaseinisedValue:
    """Operator ``sum_j c_j Q_j`` in a context, with ``Q_j`` the context blocks."""

    context: Context
    coefficients: tuple
    direction: str = "outer"

    @property
    def context_key(self) -> str:
        return self.context.key

    @property
    def matrix(self) -> np.ndarray:
        return self.context.operator(self.coefficients)

    def coefficient(self, block: int) -> float:
        return self.coefficients[block]

    def to_json(self) -> dict:
        return {
            "context_key": self.context.key,
            "context_label": self.context.label,
            "direction": self.direction,
            "coefficients": {str(j): float(c) for j, c in enumerate(self.coefficients)},
            "matrix": linalg.operator_to_json(self.matrix)["entries"],
        }


def das_from_spectrum(values, projections, v: Context, direction: str,
                      tol: TolerancePolicy | None = None) -> tuple:
    """Per-block max (outer) or min (inner) of the eigenvalues each block overlaps."""
    tol = resolve(tol)
    _check_direction(direction)
    pick = max if direction == "outer" else min
    coeffs = []
    for q in v.blocks:
        seen = [float(lam) for lam, e in zip(values, projections) if _overlaps(e, q, tol)]
        coeffs.append(pick(seen))
    return tuple(coeffs)


def das_sa(a, v: Context, direction: str = "outer", tol: TolerancePolicy | None = None) -> DaseinisedValue:
    """Outer (spectrally smallest dominating) or inner daseinisation of ``a`` into ``v``."""
    values, projections = linalg.eigen_clusters(a, tol)
    return DaseinisedValue(v, das_from_spectrum(values, projections, v, direction, tol), direction)


def _generator(f) -> np.ndarray:
    return f.generator if isinstance(f, PrincipalFilter) else np.asarray(f, dtype=complex)


def observable_fn(a, f, tol: TolerancePolicy | None = None) -> float:
    """``inf{t : E^A_t in F}`` for the principal filter ``F`` generated by ``R``.

    The infimum is attained at the first jump whose cumulative projection
    dominates ``R``.
    """
    tol = resolve(tol)
    r = _generator(f)
    if np.linalg.norm(r) < 0.5:
        raise ValueError("observable function needs a nonzero filter generator")
    family = linalg.spectral_family(a, tol)
    for t, e in family.jumps:
        if linalg.proj_leq(r, e, tol):
            return t
    raise AssertionError("spectral family never reaches the identity")


def antonymous_fn(a, f, tol: TolerancePolicy | None = None) -> float:
    """``sup{t : 1 - E^A_t in F}`` for the principal filter generated by ``R``.

    ``1 - E_t`` stays above ``R`` until the first jump whose cumulative
    projection is no longer orthogonal to ``R``; that jump is the supremum.
    """
    tol = resolve(tol)
    r = _generator(f)
    if np.linalg.norm(r) < 0.5:
        raise ValueError("antonymous function needs a nonzero filter generator")
    family = linalg.spectral_family(a, tol)
    n = family.dim
    for t, e in family.jumps:
        if not linalg.proj_leq(r, np.eye(n) - e, tol):
            return t
    raise AssertionError("spectral family never reaches the identity")


def unitary_phases(u, tol: TolerancePolicy | None = None):
    """Distinct eigenphases in ``[0, 2*pi)`` (ascending) and their eigenprojections."""
    tol = resolve(tol)
    u = linalg.as_unitary(u, tol)
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.mod(np.angle(np.diag(t)), 2 * np.pi)
    phases[phases > 2 * np.pi - tol.eig_cluster_tol * 2 * np.pi] = 0.0
    order = np.argsort(phases, kind="stable")
    phases, z = phases[order], z[:, order]
    scale = max(1.0, float(phases.max()))
    groups = [[0]]
    for i in range(1, len(phases)):
        if phases[i] - phases[i - 1] <= tol.eig_cluster_tol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    values = np.array([phases[g].mean() for g in groups])
    return values, [linalg.range_projection(z[:, g]) for g in groups]


def das_unitary(u, v: Context, direction: str = "outer", tol: TolerancePolicy | None = None) -> np.ndarray:
    """Daseinise the phase spectral family of ``u``; returns ``sum_j exp(i c_j) Q_j``."""
    values, projections = unitary_phases(u, tol)
    coeffs = das_from_spectrum(values, projections, v, direction, tol)
    return v.operator(np.exp(1j * np.array(coeffs)))


def spectral_projection(a, interval, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Sum of the eigenprojections of ``a`` whose eigenvalue lies in ``[lo, hi]``."""
    tol = resolve(tol)
    lo, hi = interval
    values, projections = linalg.eigen_clusters(a, tol)
    n = projections[0].shape[0]
    out = np.zeros((n, n), dtype=complex)
    if lo > hi:
        return out
    atol = tol.order_cmp_tol * max(1.0, float(np.abs(values).max()))
    for lam, e in zip(values, projections):
        if lo - atol <= lam <= hi + atol:
            out = out + e
    return out


def proposition_rep(a, interval, v: Context, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Outer daseinisation of the spectral projection ``E[A in interval]``."""
    return das_proj(spectral_projection(a, interval, tol), v, "outer", tol)


@dataclass(frozen=True, eq=False)
class GlobalElementTable:
    """Daseinised values of one operator at every context of a universe."""

    universe: ContextUniverse
    direction: str
    entries: Mapping[str, DaseinisedValue]

    def __getitem__(self, key: str) -> DaseinisedValue:
        return self.entries[key]

    def incompatibilities(self, tol: TolerancePolicy | None = None) -> list[tuple[str, str, float]]:
        """Pairs where restricting the upper value disagrees with the lower value.

        The de Groote restriction maps are daseinisation in the same direction.
        """
        tol = resolve(tol)
        bad = []
        for upper, lower in self.universe.pairs():
            restricted = das_sa(self.entries[upper].matrix, self.universe[lower], self.direction, tol)
            dev = float(np.abs(restricted.matrix - self.entries[lower].matrix).max())
            if dev > tol.order_cmp_tol:
                bad.append((upper, lower, dev))
        return bad

    def to_json(self) -> dict:
        return {"direction": self.direction,
                "entries": [self.entries[k].to_json() for k in self.universe.keys]}


def groote_table(a, universe: ContextUniverse, direction: str = "outer",
                 tol: TolerancePolicy | None = None) -> GlobalElementTable:
    tol = resolve(tol)
    values, projections = linalg.eigen_clusters(a, tol)
    entries = {}
    for v in universe:
        entries[v.key] = DaseinisedValue(v, das_from_spectrum(values, projections, v, direction, tol), direction)
    return GlobalElementTable(universe, direction, entries)
