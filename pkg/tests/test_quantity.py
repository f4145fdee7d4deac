import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import block_of, ctx
from toposqm import fixtures, oracles
from toposqm.contexts import build_universe
from toposqm.covariance import separating_context
from toposqm.errors import DirectionMismatch, NotEmbedded
from toposqm.presheaf import check_natural
from toposqm.quantity import (PRESERVING, REVERSING, KValue, PairFunction, PoFunction, arrow_add, arrow_rows,
                              arrows_equal, bv_decompose, dispersion, k_add, k_class, k_neg,
                              k_square_embedded, k_zero, pair_from_kvalue, pair_quotient_iso,
                              pairs_equivalent, po_add, quantity_arrow, rows_to_csv, theta, variation,
                              zero_function)
from toposqm.sampling import random_dyadic, random_hermitian

B = fixtures.qutrit_b()


@pytest.fixture(scope="module")
def chain():
    """Two-element chain: the z context above the trivial context."""
    u = fixtures.qubit_with_trivial()
    top = u.by_label("{1|2}").key
    return u, top, u.by_label("{12}").key


def labelled(u, fn):
    return {u[k].name: v for k, v in fn.values.items()}


def e11(u):
    top = ctx(u, "{1|2|3}")
    return top.key, block_of(top, [1, 0, 0])


def test_constant_operator_gives_constant_functions(qutrit):
    for mode in ("outer", "inner"):
        arrow = quantity_arrow(2.5 * np.eye(3), qutrit, mode)
        assert {x for row in arrow.components.values() for mu in row for x in mu.values.values()} == {2.5}


def test_qutrit_value_functions(qutrit):
    key, j = e11(qutrit)
    outer = quantity_arrow(B, qutrit, "outer").components[key][j]
    inner = quantity_arrow(B, qutrit, "inner").components[key][j]
    assert labelled(qutrit, outer) == {"{1|2|3}": 1, "{12|3}": 2, "{13|2}": 3, "{1|23}": 1}
    assert labelled(qutrit, inner) == {"{1|2|3}": 1, "{12|3}": 1, "{13|2}": 1, "{1|23}": 1}
    assert outer.direction == REVERSING and outer.is_monotone(qutrit)
    assert inner.direction == PRESERVING and inner.is_monotone(qutrit)


def test_monotonicity_and_pointwise_sandwich(rng):
    for u in fixtures.all_fixtures().values():
        a = random_hermitian(u.dim, rng)
        pair = quantity_arrow(a, u, "pair")
        assert check_natural(pair).ok
        for row in pair.components.values():
            for p in row:
                assert p.outer.is_monotone(u) and p.inner.is_monotone(u)
                assert all(p.inner[k] <= p.outer[k] + 1e-12 for k in p.outer.values)


def test_po_add_examples(qutrit):
    key, j = e11(qutrit)
    mu = quantity_arrow(B, qutrit, "outer").components[key][j]
    nu = quantity_arrow(2 * B, qutrit, "outer").components[key][j]
    assert labelled(qutrit, po_add(mu, nu)) == {"{1|2|3}": 3, "{12|3}": 6, "{13|2}": 9, "{1|23}": 3}
    assert po_add(mu, zero_function(qutrit, key)) == mu
    with pytest.raises(DirectionMismatch):
        po_add(mu, -nu)


def test_arrow_addition(qubit):
    a = np.diag([3.0, 1.0])
    b = fixtures.HADAMARD @ a @ fixtures.HADAMARD
    summed = arrow_add(quantity_arrow(a, qubit, "outer"), quantity_arrow(b, qubit, "outer"))
    assert check_natural(summed).ok
    assert not arrows_equal(summed, quantity_arrow(a + b, qubit, "outer"), 1e-8)
    with pytest.raises(DirectionMismatch):
        arrow_add(quantity_arrow(a, qubit, "outer"), quantity_arrow(a, qubit, "pair"))


def test_monoid_axioms(qutrit, rng):
    key = ctx(qutrit, "{1|2|3}").key
    keys = qutrit.down(key)

    def rand():
        g, _ = bv_decompose(dict(zip(keys, random_dyadic(rng, len(keys)))), qutrit, key)
        return g

    for _ in range(50):
        x, y, z = rand(), rand(), rand()
        assert po_add(po_add(x, y), z) == po_add(x, po_add(y, z))
        assert po_add(x, y) == po_add(y, x)


def test_product_need_not_be_order_reversing(chain):
    u, top, low = chain
    mu = PoFunction(top, {top: -2.0, low: -1.0})
    assert mu.is_monotone(u)
    product = PoFunction(top, {k: mu[k] * mu[k] for k in mu.values})
    assert not product.is_monotone(u)


def test_k_class_examples(chain):
    u, top, low = chain
    mu = PoFunction(top, {top: 1.0, low: 3.0})
    assert k_class(mu, mu) == k_zero(u, top)
    first = k_class(PoFunction(top, {top: 1.0, low: 2.0}), PoFunction(top, {top: 0.0, low: 0.0}))
    second = k_class(PoFunction(top, {top: 2.0, low: 3.0}), PoFunction(top, {top: 1.0, low: 1.0}))
    assert first == second and first.bv == {top: 1.0, low: 2.0}
    assert k_add(theta(mu), k_neg(theta(mu))) == k_zero(u, top)
    with pytest.raises(DirectionMismatch):
        k_class(mu, -mu)


def test_bv_examples(chain, qutrit):
    u, top, low = chain
    f = {top: 1.0, low: -1.0}
    assert variation(f, u, top) == {low: 0.0, top: 2.0}
    g, h = bv_decompose(f, u, top)
    assert g.values == {top: -1.0, low: -1.0} and h.values == {top: -2.0, low: 0.0}
    g, h = bv_decompose({top: 4.0, low: 4.0}, u, top)
    assert g.values == {top: 4.0, low: 4.0} and set(h.values.values()) == {0.0}
    root = ctx(qutrit, "{1|2|3}").key
    vals = {"{1|2|3}": 0.0, "{12|3}": 1.0, "{13|2}": -1.0, "{1|23}": 2.0}
    f = {ctx(qutrit, k).key: v for k, v in vals.items()}
    var = variation(f, qutrit, root)
    assert var == oracles.variation_by_chains(f, qutrit, root)
    assert labelled(qutrit, PoFunction(root, var)) == {"{1|2|3}": 2.0, "{12|3}": 0.0, "{13|2}": 0.0, "{1|23}": 0.0}
    g, h = bv_decompose(f, qutrit, root)
    assert all(g[k] - h[k] == f[k] for k in f)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(fixtures.all_fixtures())))
def test_bv_decompose_property(seed, name):
    rng = np.random.default_rng(seed)
    u = fixtures.all_fixtures()[name]
    root = u.keys[int(rng.integers(len(u)))]
    keys = u.down(root)
    f = dict(zip(keys, random_dyadic(rng, len(keys))))
    g, h = bv_decompose(f, u, root)
    assert g.is_monotone(u) and h.is_monotone(u)
    assert all(g[k] - h[k] == f[k] for k in keys)
    assert variation(f, u, root) == oracles.variation_by_chains(f, u, root)


def test_square_examples(chain):
    u, top, low = chain
    assert k_square_embedded(KValue(top, {top: -2.0, low: -2.0}), u).bv == {top: 4.0, low: 4.0}
    lam = KValue(top, {top: 1.5, low: 2.0})
    assert k_square_embedded(lam, u).bv == {top: 2.25, low: 4.0}
    assert k_square_embedded(KValue(top, {top: -1.0, low: 1.0}), u).bv == {top: 1.0, low: 1.0}
    with pytest.raises(NotEmbedded):
        k_square_embedded(KValue(top, {top: 1.0, low: -1.0}), u)


def test_dispersion_examples(qubit):
    vx = next(v for v in qubit if v.label is None)
    for p in (np.diag([1.0, 0.0]), (np.eye(2) + fixtures.qubit_x()) / 2):
        disp = dispersion(p, qubit)
        assert {x for row in disp.components.values() for kv in row for x in kv.bv.values()} == {0.0}
    disp = dispersion(np.diag([-2.0, 1.0]), qubit)
    assert [kv.bv[vx.key] for kv in disp.components[vx.key]] == [3.0, 3.0]
    assert {x for row in dispersion(1.5 * np.eye(2), qubit).components.values()
            for kv in row for x in kv.bv.values()} == {0.0}


def test_dispersion_non_negative(rng):
    for u in fixtures.all_fixtures().values():
        for _ in range(3):
            disp = dispersion(random_hermitian(u.dim, rng), u)
            assert min(x for row in disp.components.values() for kv in row for x in kv.bv.values()) >= -1e-8


def test_pair_quotient_examples(qutrit, rng):
    key, j = e11(qutrit)
    keys = qutrit.down(key)
    nu = quantity_arrow(B, qutrit, "outer").components[key][j]
    zero = zero_function(qutrit, key, PRESERVING)
    assert pair_quotient_iso(PairFunction(zero, nu)).bv == nu.values
    shift = {k: float(qutrit[k].size) for k in keys}     # order-preserving
    p1 = PairFunction(zero, nu)
    p2 = PairFunction(PoFunction(key, shift, PRESERVING),
                      PoFunction(key, {k: nu[k] - shift[k] for k in keys}, REVERSING))
    assert p2.outer.is_monotone(qutrit) and pairs_equivalent(p1, p2)
    assert pair_quotient_iso(p1) == pair_quotient_iso(p2)
    pair = quantity_arrow(B, qutrit, "pair")
    for v in qutrit:
        for p in pair.components[v.key]:
            assert pair_quotient_iso(p).bv == {k: p.inner[k] + p.outer[k] for k in p.outer.values}
    kv = KValue(key, dict(zip(keys, random_dyadic(rng, len(keys)))))
    assert pair_quotient_iso(pair_from_kvalue(kv, qutrit)) == kv


def test_arrow_map_injective_on_separating_universe(rng):
    for _ in range(20):
        n = int(rng.integers(2, 5))
        a, b = random_hermitian(n, rng), random_hermitian(n, rng)
        v = separating_context(a, b)
        u = build_universe([v])
        assert not arrows_equal(quantity_arrow(a, u, "outer"), quantity_arrow(b, u, "outer"), 1e-8)


def test_rows_and_csv(qutrit):
    rows = arrow_rows(B, qutrit)
    assert {"stage": "{1|2|3}", "character": "1", "subcontext": "{13|2}", "inner": 1.0, "outer": 3.0} in rows
    table = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
    assert len(table) == len(rows) == 3 * 4 + 3 * 2
