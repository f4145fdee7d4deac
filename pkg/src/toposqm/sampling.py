"""Seeded random operators and states."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_hermitian(n: int, rng: np.random.Generator, degenerate: bool | None = None) -> np.ndarray:
    """Random Hermitian matrix; with ``degenerate`` some eigenvalues are repeated.

    Eigenvalues are drawn from a small integer grid half of the time so that
    ties between eigenvalues and across operators actually occur.
    """
    if degenerate is None:
        degenerate = bool(rng.integers(2))
    if degenerate:
        vals = rng.integers(-2, 3, size=n).astype(float)
    else:
        vals = rng.normal(scale=2.0, size=n)
    u = random_unitary(n, rng)
    h = u @ np.diag(vals) @ u.conj().T
    return (h + h.conj().T) / 2


def random_projection(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    u = random_unitary(n, rng)
    cols = u[:, :rank]
    return cols @ cols.conj().T


def random_dyadic(rng: np.random.Generator, size, bound: int = 8, denom: int = 64) -> np.ndarray:
    """Values ``k / denom`` with ``|k| <= bound * denom``; sums and differences stay exact."""
    return rng.integers(-bound * denom, bound * denom + 1, size=size) / denom
