import numpy as np
import pytest

from conftest import block_of, ctx
from toposqm import fixtures
from toposqm.contexts import build_universe, characters
from toposqm.covariance import (as_state, covariance_check, is_eigenvector, iota, iota_composition_check,
                                sandwich, separating_context, spread, truth_object, truth_value,
                                twist_context, twist_universe, twisted_iso_check)
from toposqm.errors import InvalidOperator, UnknownContext
from toposqm.presheaf import truth_sieve_check
from toposqm.sampling import random_hermitian, random_projection, random_state, random_unitary

B = fixtures.qutrit_b()
E = np.eye(3)


def test_truth_value_examples(qutrit, rng):
    top = ctx(qutrit, "{1|2|3}")
    p = np.diag([1.0, 0.0, 0.0])
    s = truth_value(p, E[1], top, qutrit)
    assert {qutrit[k].name for k in s.members} == {"{12|3}"}
    assert truth_value(p, E[0], top, qutrit).members == frozenset(qutrit.down(top.key))
    assert truth_value(np.zeros((3, 3)), random_state(3, rng), top, qutrit).members == frozenset()
    with pytest.raises(UnknownContext):
        truth_value(p, E[0], "nope", qutrit)
    with pytest.raises(InvalidOperator):
        as_state([1.0, 1.0, 0.0])


def test_state_in_range_gives_full_sieve(rng):
    for u in fixtures.all_fixtures().values():
        p = random_projection(u.dim, rng, rank=1)
        psi = p @ random_state(u.dim, rng)
        psi /= np.linalg.norm(psi)
        for v in u:
            s = truth_value(p, psi, v, u)
            assert s.members == frozenset(u.down(v.key)) and truth_sieve_check(s, u)


def test_truth_object_is_stable(rng):
    for u in fixtures.all_fixtures().values():
        t = truth_object(random_state(u.dim, rng), u)
        assert t.unstable_pairs() == []


def test_sandwich_examples():
    assert sandwich(B, np.ones(3) / np.sqrt(3)) == pytest.approx((1, 2, 3))
    assert sandwich(np.diag([3.0, 1.0]), np.ones(2) / np.sqrt(2)) == pytest.approx((1, 2, 3))
    assert sandwich(B, E[1]) == pytest.approx((2, 2, 2))
    assert is_eigenvector(B, E[2]) and not is_eigenvector(B, np.ones(3) / np.sqrt(3))


def test_spread_examples(qutrit):
    top = ctx(qutrit, "{1|2|3}")
    ch = characters(top)[block_of(top, [1, 0, 0])]
    assert spread(B, top, ch, ctx(qutrit, "{13|2}"), qutrit) == (1.0, 3.0)
    assert spread(B, top, ch, top, qutrit) == (1.0, 1.0)


def test_spread_widens_downwards(rng):
    u = fixtures.ququart_universe()
    a = random_hermitian(4, rng)
    for top in u.keys:
        for ch in characters(u[top]):
            for mid in u.down(top):
                for low in u.down(mid):
                    lo1, hi1 = spread(a, top, ch, mid, u)
                    lo2, hi2 = spread(a, top, ch, low, u)
                    assert lo2 <= lo1 and hi1 <= hi2


def test_twist_examples(qubit, rng):
    vz = qubit.by_label("{1|2}")
    vx = next(v for v in qubit if v.label is None)
    assert twist_context(np.eye(2), vz) == vz
    assert twist_context(fixtures.HADAMARD, vz) == vx
    u = random_unitary(3, rng)
    top = fixtures.qutrit_universe().contexts[0]
    assert twist_context(u, twist_context(u.conj().T, top)) == top
    assert twist_universe(fixtures.HADAMARD, qubit) == qubit


def test_twist_preserves_order(rng):
    uni = fixtures.ququart_universe()
    u = random_unitary(4, rng)
    tu = twist_universe(u, uni)
    relabel = {v.key: twist_context(u, v).key for v in uni}
    assert sorted((relabel[a], relabel[b]) for a, b in uni.hasse_edges) == sorted(tu.hasse_edges)


def test_covariance_examples(qubit, qutrit, rng):
    for op in (np.diag([1.0, 0.0]), np.diag([3.0, 1.0])):
        rep = covariance_check(op, np.eye(2), qubit)
        assert rep.ok and rep.deviation == 0.0
    rep = covariance_check(np.diag([1.0, 0.0]), fixtures.HADAMARD, qubit, np.ones(2) / np.sqrt(2))
    assert rep.ok and rep.deviation <= 1e-10 and set(rep.checks) == {"projection", "operator", "truth"}
    rep = covariance_check(B, random_unitary(3, rng), qutrit)
    assert rep.ok and rep.to_json()["checks"] == {"operator": True}


def test_twisted_iso(qubit, qutrit, rng):
    rep = twisted_iso_check(np.eye(3), qutrit, B)
    assert rep.ok and all(row == tuple(range(len(row))) for row in iota(np.eye(3), qutrit).values())
    assert twisted_iso_check(fixtures.HADAMARD, qubit, np.diag([3.0, 1.0])).ok
    u = random_unitary(3, rng)
    assert twisted_iso_check(u, qutrit, B).ok
    assert iota_composition_check(u, random_unitary(3, rng), qutrit)


def test_inverse_conjugation_breaks_the_square(rng):
    failures = 0
    for _ in range(10):
        u = random_unitary(3, rng)
        rep = twisted_iso_check(u, fixtures.qutrit_universe(), B, conjugation="inverse")
        failures += not rep.checks["square"]
    assert failures == 10


def test_separating_context_examples():
    a = np.diag([3.0, 1.0])
    assert separating_context(a, a) is None
    v = separating_context(a, np.diag([1.0, 3.0]))
    assert v is not None and v.size == 2
    assert separating_context(B, B + np.eye(3)) is not None


def test_separating_context_none_iff_equal(rng):
    for i in range(40):
        n = 2 + i % 3
        a = random_hermitian(n, rng)
        b = a if i % 4 == 0 else random_hermitian(n, rng)
        equal = np.abs(a - b).max() <= 1e-8
        assert (separating_context(a, b, seed=i) is None) == equal
    # equal spectra, different eigenvectors
    u = random_unitary(3, rng)
    assert separating_context(B, u @ B @ u.conj().T) is not None


def test_separating_context_universe(rng):
    a, b = random_hermitian(3, rng), random_hermitian(3, rng)
    v = separating_context(a, b)
    assert len(build_universe([v])) == 1
