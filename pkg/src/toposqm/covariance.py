"""Truth values, the expectation sandwich, and unitary covariance.

A unitary ``U`` acts on contexts by conjugating their blocks.  The checks in
this module compare the two sides of each covariance equation numerically
and return small report objects instead of raising.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .contexts import Character, Context, ContextUniverse, make_context, principal_filter
from .daseinisation import antonymous_fn, das_proj, das_sa, observable_fn
from .errors import DimensionMismatch, InvalidOperator, UnknownContext
from .presheaf import Sieve, SubObjectTable, outer_presheaf, truth_sieve_check
from .quantity import quantity_arrow
from .tolerance import TolerancePolicy, resolve


def as_state(psi, tol: TolerancePolicy | None = None) -> np.ndarray:
    tol = resolve(tol)
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidOperator("state must be a non-empty finite vector")
    if abs(np.linalg.norm(v) - 1.0) > tol.unitary_tol:
        raise InvalidOperator(f"state is not normalised (norm {np.linalg.norm(v):.6g})")
    return v


def _expect(op: np.ndarray, psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, op @ psi)))


def _root(v, universe: ContextUniverse) -> str:
    key = v.key if isinstance(v, Context) else v
    if key not in universe:
        found = universe.find(v) if isinstance(v, Context) else None
        if found is None:
            raise UnknownContext(f"context {getattr(v, 'name', v)} is not in the universe")
        key = found.key
    return key


# -- truth --------------------------------------------------------------------

def truth_value(p, psi, v, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> Sieve:
    """Sieve of contexts below ``v`` where the outer daseinised ``P`` has expectation 1."""
    tol = resolve(tol)
    psi = as_state(psi, tol)
    root = _root(v, universe)
    members = frozenset(k for k in universe.down(root)
                        if _expect(das_proj(p, universe[k], "outer", tol), psi) >= 1 - tol.order_cmp_tol)
    sieve = Sieve(root, members)
    if not truth_sieve_check(sieve, universe):
        raise AssertionError("truth value is not down-closed")
    return sieve


def truth_object(psi, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> SubObjectTable:
    """Per context, the projections with expectation 1 in ``psi``."""
    tol = resolve(tol)
    psi = as_state(psi, tol)
    g = outer_presheaf(universe, tol)
    members = {}
    for v in universe:
        members[v.key] = frozenset(i for i, s in enumerate(g.stages[v.key])
                                   if _expect(v.projection(s), psi) >= 1 - tol.order_cmp_tol)
    return SubObjectTable(g, members)


# -- expectation sandwich ---------------------------------------------------------

def sandwich(a, psi, tol: TolerancePolicy | None = None) -> tuple[float, float, float]:
    """Antonymous value, expectation value and observable value at the ray of ``psi``."""
    tol = resolve(tol)
    psi = as_state(psi, tol)
    a = linalg.as_hermitian(a, tol)
    f = principal_filter(np.outer(psi, psi.conj()), tol)
    return antonymous_fn(a, f, tol), _expect(a, psi), observable_fn(a, f, tol)


def is_eigenvector(a, psi, tol: TolerancePolicy | None = None) -> bool:
    tol = resolve(tol)
    a = np.asarray(a, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    residual = a @ psi - _expect(a, psi) * psi
    return float(np.linalg.norm(residual)) <= tol.order_cmp_tol * max(1.0, float(np.abs(a).max()))


def spread(a, v, ch: Character, vp, universe: ContextUniverse,
           tol: TolerancePolicy | None = None) -> tuple[float, float]:
    """Interval ``[inner value, outer value]`` of ``a`` at ``vp`` seen from a character of ``v``."""
    tol = resolve(tol)
    upper, lower = _root(v, universe), _root(vp, universe)
    block = universe.block_map(upper, lower)[ch.block]
    lo = das_sa(a, universe[lower], "inner", tol).coefficients[block]
    hi = das_sa(a, universe[lower], "outer", tol).coefficients[block]
    if lo > hi + tol.order_cmp_tol:
        raise AssertionError(f"inner value {lo} exceeds outer value {hi}")
    return lo, hi


# -- twisting -----------------------------------------------------------------

def twist_context(u, v: Context, tol: TolerancePolicy | None = None) -> Context:
    u = linalg.as_unitary(u, tol)
    if u.shape[0] != v.dim:
        raise DimensionMismatch("unitary and context have different dimensions")
    return make_context([u @ q @ u.conj().T for q in v.blocks], tol)


def twist_map(u, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> dict[str, Context]:
    return {v.key: twist_context(u, v, tol) for v in universe}


def twist_universe(u, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> ContextUniverse:
    return ContextUniverse(twist_map(u, universe, tol).values(), universe.include_trivial,
                           tol, dim=universe.dim)


@dataclass
class Report:
    name: str
    checks: dict = field(default_factory=dict)
    deviation: float = 0.0
    locations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def fail(self, check: str, where):
        self.checks[check] = False
        self.locations.append({"check": check, "where": where})

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "checks": dict(self.checks),
                "max_deviation": f"{self.deviation:.3e}", "locations": self.locations}


def covariance_check(op, u, universe: ContextUniverse, psi=None,
                     tol: TolerancePolicy | None = None) -> Report:
    """Compare both sides of the daseinisation and truth covariance equations.

    ``op`` may be a projection (projection and truth checks run) or any
    Hermitian operator (operator check only).  ``psi`` defaults to the first
    basis vector.
    """
    tol = resolve(tol)
    u = linalg.as_unitary(u, tol)
    op = linalg.as_hermitian(op, tol)
    ud = u.conj().T
    rotated = u @ op @ ud
    twisted = twist_map(u, universe, tol)
    twisted_u = twist_universe(u, universe, tol)
    report = Report("covariance")
    projection = linalg.is_projection(op, tol)
    for name in (["projection"] if projection else []) + ["operator"] + (["truth"] if projection else []):
        report.checks[name] = True
    for v in universe:
        tv = twisted_u[twisted[v.key].key]
        for direction in ("outer", "inner"):
            if projection:
                dev = np.abs(u @ das_proj(op, v, direction, tol) @ ud - das_proj(rotated, tv, direction, tol)).max()
                report.deviation = max(report.deviation, float(dev))
                if dev > tol.order_cmp_tol:
                    report.fail("projection", [v.key, direction])
            dev = np.abs(u @ das_sa(op, v, direction, tol).matrix @ ud
                         - das_sa(rotated, tv, direction, tol).matrix).max()
            report.deviation = max(report.deviation, float(dev))
            if dev > tol.order_cmp_tol * max(1.0, float(np.abs(op).max())):
                report.fail("operator", [v.key, direction])
    if projection:
        if psi is None:
            psi = np.eye(universe.dim, dtype=complex)[0]
        psi = as_state(psi, tol)
        for v in universe:
            left = truth_value(op, psi, v, universe, tol)
            right = truth_value(rotated, u @ psi, twisted[v.key].key, twisted_u, tol)
            if frozenset(twisted[k].key for k in left.members) != right.members:
                report.fail("truth", v.key)
    return report


def iota(u, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> dict[str, tuple[int, ...]]:
    """Components of the spectral isomorphism into the twisted spectral presheaf.

    The character of ``V`` on block ``Q`` goes to the character of the twisted
    context that evaluates ``X`` as ``tr(Q U^-1 X U) / rank(Q)``.  Returned as
    block-index maps ``V block -> twisted block``.
    """
    tol = resolve(tol)
    u = linalg.as_unitary(u, tol)
    ud = u.conj().T
    twisted = twist_map(u, universe, tol)
    comps = {}
    for v in universe:
        tv = twisted[v.key]
        row = []
        for q in v.blocks:
            hits = [j for j, x in enumerate(tv.blocks)
                    if abs(np.trace(q @ ud @ x @ u) / np.trace(q).real - 1) <= tol.proj_tol]
            if len(hits) != 1:
                raise AssertionError("twisted character is not well defined")
            row.append(hits[0])
        comps[v.key] = tuple(row)
    return comps


def twisted_iso_check(u, universe: ContextUniverse, a=None, conjugation: str = "forward",
                      tol: TolerancePolicy | None = None) -> Report:
    """Naturality and bijectivity of the twisted isomorphisms, plus the arrow square.

    The square compares the relabelled value function of ``A`` at a character
    with the value function of a conjugate of ``A`` at the twisted character.
    ``conjugation="forward"`` uses ``U A U^-1`` (the square commutes);
    ``"inverse"`` uses ``U^-1 A U`` and is kept for comparison.
    """
    tol = resolve(tol)
    u = linalg.as_unitary(u, tol)
    ud = u.conj().T
    twisted = twist_map(u, universe, tol)
    tu = twist_universe(u, universe, tol)
    report = Report("twisted_iso", {"iota_bijective": True, "iota_natural": True,
                                    "kappa_bijective": True, "kappa_natural": True})
    comps = iota(u, universe, tol)
    for key, row in comps.items():
        if sorted(row) != list(range(len(row))):
            report.fail("iota_bijective", key)
    for upper, lower in universe.pairs():
        tup, tlow = twisted[upper].key, twisted[lower].key
        for j in range(universe[upper].size):
            via_restrict = comps[lower][universe.block_map(upper, lower)[j]]
            via_twist = tu.block_map(tup, tlow)[comps[upper][j]]
            if via_restrict != via_twist:
                report.fail("iota_natural", [upper, lower, j])
    # kappa relabels the domain of a value function; it is a bijection on keys
    relabel = {k: twisted[k].key for k in universe.keys}
    for key in universe.keys:
        image = [relabel[k] for k in universe.down(key)]
        if sorted(image) != sorted(tu.down(relabel[key])):
            report.fail("kappa_bijective", key)
    for upper, lower in universe.pairs():
        if relabel[lower] not in tu.down(relabel[upper]):
            report.fail("kappa_natural", [upper, lower])
    if a is not None:
        report.checks["square"] = True
        a = linalg.as_hermitian(a, tol)
        b = u @ a @ ud if conjugation == "forward" else ud @ a @ u
        left = quantity_arrow(a, universe, "outer", tol)
        right = quantity_arrow(b, tu, "outer", tol)
        for v in universe:
            for j, mu in enumerate(left.components[v.key]):
                nu = right.components[relabel[v.key]][comps[v.key][j]]
                for k, x in mu.values.items():
                    dev = abs(nu.values[relabel[k]] - x)
                    report.deviation = max(report.deviation, dev)
                    if dev > tol.order_cmp_tol * max(1.0, float(np.abs(a).max())):
                        report.fail("square", [v.key, j, k])
    return report


def iota_composition_check(u1, u2, universe: ContextUniverse, tol: TolerancePolicy | None = None) -> bool:
    """Twisting by ``U1`` then ``U2`` agrees with twisting once by ``U2 U1``."""
    tol = resolve(tol)
    first = iota(u1, universe, tol)
    mid = twist_universe(u1, universe, tol)
    second = iota(u2, mid, tol)
    direct = iota(u2 @ u1, universe, tol)
    t1 = twist_map(u1, universe, tol)
    t12 = twist_map(u2, mid, tol)
    t_direct = twist_map(u2 @ u1, universe, tol)
    for v in universe:
        mid_key = t1[v.key].key
        if t12[mid_key].key != t_direct[v.key].key:
            return False
        if tuple(second[mid_key][j] for j in first[v.key]) != direct[v.key]:
            return False
    return True


# -- separating contexts ------------------------------------------------------

def rank_one_context(vec) -> Context:
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    p = np.outer(vec, vec.conj())
    return make_context([p, np.eye(len(vec)) - p])


def _witnesses(a, b, seed: int, extra: int):
    for m in (a, b, a - b):
        _, vecs = np.linalg.eigh(m)
        yield from vecs.T
    rng = np.random.default_rng(seed)
    n = a.shape[0]
    for _ in range(extra):
        yield rng.normal(size=n) + 1j * rng.normal(size=n)


def separating_context(a, b, tol: TolerancePolicy | None = None, seed: int = 0,
                       extra: int = 64) -> Context | None:
    """A rank-one context where the outer value functions of ``a`` and ``b`` differ.

    Returns ``None`` when ``a`` and ``b`` agree within tolerance.  Candidates
    are eigenvectors of ``a``, ``b`` and ``a - b``, followed by seeded random
    vectors; a hit is only returned after both daseinisations are compared.
    """
    tol = resolve(tol)
    a, b = linalg.as_hermitian(a, tol), linalg.as_hermitian(b, tol)
    linalg._same_dim(a, b)
    scale = max(1.0, float(np.abs(a).max()), float(np.abs(b).max()))
    atol = tol.order_cmp_tol * scale
    if np.abs(a - b).max() <= atol or a.shape[0] < 2:
        return None if np.abs(a - b).max() <= atol else make_context([np.eye(1)])
    for vec in _witnesses(a, b, seed, extra):
        v = rank_one_context(vec)
        ca = np.array(das_sa(a, v, "outer", tol).coefficients)
        cb = np.array(das_sa(b, v, "outer", tol).coefficients)
        if np.abs(ca - cb).max() > atol:
            return v
    raise AssertionError("no separating context found among the witnesses")
