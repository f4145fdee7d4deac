"""Dense operator foundation: spectral calculus, projection lattice, spectral order.

Operators are plain complex ``numpy`` arrays.  The ``as_*`` validators check
the algebraic invariants (Hermitian, idempotent, unitary) within the
configured :class:`~toposqm.tolerance.TolerancePolicy` and return a clean
``complex128`` copy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidFamily, InvalidOperator
from .tolerance import TolerancePolicy, resolve


def _square(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidOperator(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidOperator("operator has non-finite entries")
    return m


def _same_dim(*ops):
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def as_hermitian(a, tol: TolerancePolicy | None = None) -> np.ndarray:
    tol = resolve(tol)
    m = _square(a)
    dev = np.abs(m - m.conj().T).max()
    if dev > tol.hermitian_tol * max(1.0, np.abs(m).max()):
        raise InvalidOperator(f"operator is not Hermitian (deviation {dev:.3e})")
    return (m + m.conj().T) / 2


def as_projection(a, tol: TolerancePolicy | None = None) -> np.ndarray:
    tol = resolve(tol)
    p = as_hermitian(a, tol)
    dev = np.abs(p @ p - p).max()
    if dev > tol.proj_tol:
        raise InvalidOperator(f"operator is not idempotent (deviation {dev:.3e})")
    return p


def as_unitary(a, tol: TolerancePolicy | None = None) -> np.ndarray:
    tol = resolve(tol)
    u = _square(a)
    dev = np.abs(u @ u.conj().T - np.eye(u.shape[0])).max()
    if dev > tol.unitary_tol:
        raise InvalidOperator(f"operator is not unitary (deviation {dev:.3e})")
    return u


def is_projection(a, tol: TolerancePolicy | None = None) -> bool:
    try:
        as_projection(a, tol)
    except InvalidOperator:
        return False
    return True


def range_projection(vectors: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the span of orthonormal columns."""
    if vectors.size == 0:
        n = vectors.shape[0]
        return np.zeros((n, n), dtype=complex)
    return vectors @ vectors.conj().T


def rank(p: np.ndarray) -> int:
    return int(round(np.trace(p).real))


def eigen_clusters(a, tol: TolerancePolicy | None = None):
    """Distinct eigenvalues (ascending) and their eigenprojections.

    Consecutive eigenvalues closer than ``eig_cluster_tol`` (relative to the
    spectral radius, floor 1) are merged; the cluster value is their mean.
    """
    tol = resolve(tol)
    h = as_hermitian(a, tol)
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(w).max()))
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= tol.eig_cluster_tol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    values = np.array([w[g].mean() for g in groups])
    projections = [range_projection(v[:, g]) for g in groups]
    return values, projections


@dataclass(frozen=True, eq=False)
class SpectralFamily:
    """Right-continuous step family of projections, stored as its jumps.

    ``jumps[k] = (t_k, E_k)`` means the family equals ``E_k`` on
    ``[t_k, t_{k+1})``; it is zero below ``t_0`` and the last ``E`` is the
    identity.
    """

    jumps: tuple

    def __post_init__(self):
        if not self.jumps:
            raise InvalidFamily("spectral family needs at least one jump")
        ts = [float(t) for t, _ in self.jumps]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidFamily("thresholds must be strictly increasing")
        dims = {np.shape(e) for _, e in self.jumps}
        if len(dims) != 1:
            raise InvalidFamily("cumulative projections differ in shape")

    @property
    def dim(self) -> int:
        return self.jumps[0][1].shape[0]

    @property
    def thresholds(self) -> list[float]:
        return [float(t) for t, _ in self.jumps]

    def validate(self, tol: TolerancePolicy | None = None) -> "SpectralFamily":
        tol = resolve(tol)
        prev = np.zeros((self.dim, self.dim), dtype=complex)
        for t, e in self.jumps:
            if not is_projection(e, tol):
                raise InvalidFamily(f"value at {t} is not a projection")
            if not proj_leq(prev, e, tol):
                raise InvalidFamily(f"family decreases at {t}")
            prev = e
        if np.abs(prev - np.eye(self.dim)).max() > tol.proj_tol:
            raise InvalidFamily("last cumulative projection is not the identity")
        return self

    def at(self, lam: float, atol: float = 0.0) -> np.ndarray:
        value = np.zeros((self.dim, self.dim), dtype=complex)
        for t, e in self.jumps:
            if t <= lam + atol:
                value = e
            else:
                break
        return value


def spectral_family(a, tol: TolerancePolicy | None = None) -> SpectralFamily:
    """Jump-list spectral family of a Hermitian operator."""
    values, projections = eigen_clusters(a, tol)
    cumulative = np.zeros_like(projections[0])
    jumps = []
    for lam, p in zip(values, projections):
        cumulative = cumulative + p
        jumps.append((float(lam), cumulative))
    return SpectralFamily(tuple(jumps))


def operator_from_family(family: SpectralFamily, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Inverse of :func:`spectral_family`: ``sum_k t_k (E_k - E_{k-1})``."""
    family.validate(tol)
    prev = np.zeros((family.dim, family.dim), dtype=complex)
    out = np.zeros_like(prev)
    for t, e in family.jumps:
        out = out + t * (e - prev)
        prev = e
    return (out + out.conj().T) / 2


def family_from_steps(thresholds: Sequence[float], values: Sequence[np.ndarray]) -> SpectralFamily:
    """Build a family from grid values, dropping steps that do not change."""
    jumps = []
    for t, e in zip(thresholds, values):
        if jumps and np.abs(jumps[-1][1] - e).max() < 1e-12:
            continue
        if not jumps and np.abs(e).max() < 1e-12:
            continue
        jumps.append((float(t), e))
    return SpectralFamily(tuple(jumps))


def proj_leq(p: np.ndarray, q: np.ndarray, tol: TolerancePolicy | None = None) -> bool:
    """Range inclusion ``P <= Q``, i.e. ``QP = P``."""
    tol = resolve(tol)
    _same_dim(p, q)
    return float(np.linalg.norm(q @ p - p)) <= tol.order_cmp_tol


def proj_equal(p: np.ndarray, q: np.ndarray, tol: TolerancePolicy | None = None) -> bool:
    tol = resolve(tol)
    _same_dim(p, q)
    return float(np.linalg.norm(p - q)) <= tol.order_cmp_tol


def proj_meet(ps: Sequence[np.ndarray], tol: TolerancePolicy | None = None) -> np.ndarray:
    """Projection onto the intersection of the ranges."""
    tol = resolve(tol)
    if len(ps) == 0:
        raise ValueError("meet of an empty list")
    n = _same_dim(*ps)
    m = sum(np.eye(n) - p for p in ps)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return range_projection(v[:, w <= tol.proj_tol * len(ps)])


def proj_join(ps: Sequence[np.ndarray], tol: TolerancePolicy | None = None) -> np.ndarray:
    """Projection onto the span of the union of the ranges."""
    tol = resolve(tol)
    if len(ps) == 0:
        raise ValueError("join of an empty list")
    _same_dim(*ps)
    m = sum(ps)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return range_projection(v[:, w > tol.proj_tol * len(ps)])


def _grid(fa: SpectralFamily, fb: SpectralFamily, atol: float) -> list[float]:
    grid: list[float] = []
    for t in sorted(fa.thresholds + fb.thresholds):
        if not grid or t - grid[-1] > atol:
            grid.append(t)
    return grid


def _threshold_atol(fa, fb, tol):
    scale = max([1.0] + [abs(t) for t in fa.thresholds + fb.thresholds])
    return tol.order_cmp_tol * scale


def spectral_leq(a, b, tol: TolerancePolicy | None = None) -> bool:
    """Spectral order ``A <=_s B``: ``E^B_t <= E^A_t`` at every jump."""
    tol = resolve(tol)
    a, b = as_hermitian(a, tol), as_hermitian(b, tol)
    _same_dim(a, b)
    fa, fb = spectral_family(a, tol), spectral_family(b, tol)
    atol = _threshold_atol(fa, fb, tol)
    return all(proj_leq(fb.at(t, atol), fa.at(t, atol), tol) for t in _grid(fa, fb, atol))


def usual_leq(a, b, tol: TolerancePolicy | None = None) -> bool:
    """Usual operator order: ``B - A`` positive semidefinite."""
    tol = resolve(tol)
    a, b = as_hermitian(a, tol), as_hermitian(b, tol)
    _same_dim(a, b)
    return bool(np.linalg.eigvalsh(b - a).min() >= -tol.order_cmp_tol)


def spectral_join(a, b, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Spectral-order supremum; its family is ``t -> E^A_t ^ E^B_t``."""
    tol = resolve(tol)
    a, b = as_hermitian(a, tol), as_hermitian(b, tol)
    _same_dim(a, b)
    fa, fb = spectral_family(a, tol), spectral_family(b, tol)
    atol = _threshold_atol(fa, fb, tol)
    grid = _grid(fa, fb, atol)
    steps = [proj_meet([fa.at(t, atol), fb.at(t, atol)], tol) for t in grid]
    return operator_from_family(family_from_steps(grid, steps), tol)


def spectral_meet(a, b, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Spectral-order infimum; its family is ``t -> inf_{s>t} (E^A_s v E^B_s)``.

    On the finite grid both families are constant on ``[t_i, t_{i+1})``, so the
    infimum over ``s > t_i`` equals the join evaluated at ``t_i`` itself.
    """
    tol = resolve(tol)
    a, b = as_hermitian(a, tol), as_hermitian(b, tol)
    _same_dim(a, b)
    fa, fb = spectral_family(a, tol), spectral_family(b, tol)
    atol = _threshold_atol(fa, fb, tol)
    grid = _grid(fa, fb, atol)
    steps = [proj_join([fa.at(t, atol), fb.at(t, atol)], tol) for t in grid]
    return operator_from_family(family_from_steps(grid, steps), tol)


# -- serialization -----------------------------------------------------------

def operator_to_json(a) -> dict:
    m = np.asarray(a, dtype=complex)
    return {
        "dim": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def _entry(x) -> complex:
    # either a real number or a [re, im] pair
    if isinstance(x, (int, float)):
        return complex(x)
    re, im = x
    return complex(re, im)


def operator_from_json(data: dict) -> np.ndarray:
    try:
        rows = data["entries"]
        dim = int(data.get("dim", len(rows)))
        m = np.array([[_entry(z) for z in row] for row in rows], dtype=complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidOperator(f"malformed operator JSON: {exc}") from exc
    if m.shape != (dim, dim):
        raise InvalidOperator(f"operator JSON declares dim {dim} but entries have shape {m.shape}")
    return m


def state_to_json(psi) -> dict:
    v = np.asarray(psi, dtype=complex)
    return {"dim": int(v.shape[0]), "amplitudes": [[float(z.real), float(z.imag)] for z in v]}


def state_from_json(data: dict) -> np.ndarray:
    try:
        v = np.array([_entry(z) for z in data["amplitudes"]], dtype=complex)
        dim = int(data.get("dim", len(v)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidOperator(f"malformed state JSON: {exc}") from exc
    if v.shape != (dim,):
        raise InvalidOperator(f"state JSON declares dim {dim} but has {v.shape[0]} amplitudes")
    return v
