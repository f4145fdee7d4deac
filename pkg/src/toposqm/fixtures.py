"""Stock universes and operators used by the checks, tests and demos."""
from __future__ import annotations

import numpy as np

from .contexts import ContextUniverse, build_universe, make_context

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def qubit_z() -> np.ndarray:
    return np.diag([1.0, -1.0]).astype(complex)


def qubit_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=complex)


def qubit_antichain() -> ContextUniverse:
    """The two maximal qubit contexts generated by the z and x Pauli matrices."""
    return build_universe([qubit_z(), qubit_x()])


def qubit_with_trivial() -> ContextUniverse:
    return build_universe([qubit_z(), qubit_x()], include_trivial=True)


def qutrit_b() -> np.ndarray:
    return np.diag([1.0, 2.0, 3.0]).astype(complex)


def qutrit_universe(include_trivial: bool = False) -> ContextUniverse:
    """Diagonal qutrit context and its three two-block coarsenings (plus the trivial one)."""
    return build_universe([qutrit_b()], include_trivial=include_trivial)


def qutrit_two_maximal() -> ContextUniverse:
    """Diagonal context and a context rotated in the 2-3 plane.

    They share the coarsening {1|23}, so the poset is connected.
    """
    c, s = np.cos(0.4), np.sin(0.4)
    rot = np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=complex)
    other = make_context([rot @ np.diag(e).astype(complex) @ rot.conj().T
                          for e in ([1, 0, 0], [0, 1, 0], [0, 0, 1])])
    return build_universe([qutrit_b(), other])


def ququart_universe() -> ContextUniverse:
    return build_universe([np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)])


def all_fixtures() -> dict[str, ContextUniverse]:
    return {
        "qubit_antichain": qubit_antichain(),
        "qubit_trivial": qubit_with_trivial(),
        "qutrit": qutrit_universe(),
        "qutrit_trivial": qutrit_universe(include_trivial=True),
        "qutrit_two_maximal": qutrit_two_maximal(),
        "ququart": ququart_universe(),
    }
