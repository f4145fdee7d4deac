"""Brute-force reference implementations used to cross-check the fast paths.

Everything here follows the defining lattice or order-theoretic formula
literally (exhaustive enumeration over the ``2**k`` projections of a
context, over coefficient assignments, or over chains of a poset).  None of
it calls the overlap formulas in :mod:`toposqm.daseinisation`.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import linalg
from .contexts import Context, ContextUniverse
from .tolerance import TolerancePolicy, resolve


def das_proj_lattice(p, v: Context, direction: str, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Meet of the projections of ``v`` above ``p`` (outer) or join of those below (inner)."""
    tol = resolve(tol)
    projections = [q for _, q in v.projections()]
    if direction == "outer":
        return linalg.proj_meet([q for q in projections if linalg.proj_leq(p, q, tol)], tol)
    if direction == "inner":
        return linalg.proj_join([q for q in projections if linalg.proj_leq(q, p, tol)], tol)
    raise ValueError(direction)


def das_sa_lattice(a, v: Context, direction: str, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Daseinise the spectral family of ``a`` jump by jump and reassemble.

    Outer: ``t -> inner-das(E_t)``.  Inner: ``t -> inf_{s>t} outer-das(E_s)``,
    which on a step family equals ``outer-das(E_t)``.
    """
    tol = resolve(tol)
    family = linalg.spectral_family(a, tol)
    proj_direction = {"outer": "inner", "inner": "outer"}[direction]
    steps = [das_proj_lattice(e, v, proj_direction, tol) for _, e in family.jumps]
    return linalg.operator_from_family(linalg.family_from_steps(family.thresholds, steps), tol)


def candidate_operators(a, v: Context, tol: TolerancePolicy | None = None) -> list[np.ndarray]:
    """All ``sum_j c_j Q_j`` with every ``c_j`` drawn from the spectrum of ``a``."""
    values, _ = linalg.eigen_clusters(a, tol)
    return [v.operator(c) for c in itertools.product(values, repeat=v.size)]


def spectral_extremum(candidates, tol: TolerancePolicy | None = None, which: str = "min") -> np.ndarray | None:
    """Element of ``candidates`` that is spectral-order below (or above) all others."""
    for m in candidates:
        if which == "min":
            ok = all(linalg.spectral_leq(m, b, tol) for b in candidates)
        else:
            ok = all(linalg.spectral_leq(b, m, tol) for b in candidates)
        if ok:
            return m
    return None


def das_sa_by_order(a, v: Context, direction: str, tol: TolerancePolicy | None = None) -> np.ndarray | None:
    """Outer: spectral minimum of candidates dominating ``a``; inner: maximum of those below."""
    tol = resolve(tol)
    cands = candidate_operators(a, v, tol)
    if direction == "outer":
        return spectral_extremum([b for b in cands if linalg.spectral_leq(a, b, tol)], tol, "min")
    return spectral_extremum([b for b in cands if linalg.spectral_leq(b, a, tol)], tol, "max")


def chains_ending_at(universe: ContextUniverse, key: str):
    """Every chain ``V_0 < V_1 < ... < V`` of the universe ending at ``key``."""
    yield (key,)
    for lower in universe.down(key):
        if lower == key:
            continue
        for chain in chains_ending_at(universe, lower):
            yield chain + (key,)


def variation_by_chains(f, universe: ContextUniverse, root: str) -> dict:
    """``I_f(V) = sup_C sum |f(V_j) - f(V_{j-1})|`` by enumerating all chains."""
    out = {}
    for key in universe.down(root):
        best = 0.0
        for chain in chains_ending_at(universe, key):
            var = sum(abs(f[b] - f[a]) for a, b in zip(chain, chain[1:]))
            best = max(best, var)
        out[key] = best
    return out


def observable_by_overlap(a, r, tol: TolerancePolicy | None = None) -> float:
    """Largest eigenvalue of ``a`` whose eigenprojection has nonzero product with ``r``."""
    tol = resolve(tol)
    values, projections = linalg.eigen_clusters(a, tol)
    return max(float(lam) for lam, e in zip(values, projections)
               if np.linalg.norm(e @ r) > tol.zero_overlap_tol)
