import json

import numpy as np
import pytest

from conftest import block_of, ctx
from toposqm import fixtures, linalg
from toposqm.contexts import (ContextUniverse, PrincipalFilter, build_universe, character_from_ultrafilter,
                              character_ultrafilter, characters, cone, context_from_operators,
                              make_context, restrict_character, subcontexts, trivial_context)
from toposqm.errors import IntegrityError, InvalidOperator, NotCommuting, NotSubcontext
from toposqm.sampling import random_unitary

PLUS = np.array([[1, 1], [1, 1]]) / 2


def test_generated_context_examples():
    v = context_from_operators([np.diag([3.0, 1.0])])
    assert v.size == 2 and {tuple(np.diag(q).real) for q in v.blocks} == {(1, 0), (0, 1)}
    assert context_from_operators([np.eye(2)]).is_trivial
    w = context_from_operators([PLUS, np.eye(2) - PLUS])
    assert w.size == 2 and any(np.allclose(q, PLUS) for q in w.blocks)


def test_generated_context_contains_inputs(rng):
    u = random_unitary(4, rng)
    ops = [u @ np.diag(d) @ u.conj().T for d in ([1, 1, 2, 2], [0, 3, 3, 0])]
    v = context_from_operators(ops)
    assert v.size == 4
    assert all(v.contains(op) for op in ops)


def test_non_commuting_seed_reports_index():
    with pytest.raises(NotCommuting) as info:
        build_universe([[np.diag([1.0, 0.0])], [fixtures.qubit_z(), fixtures.qubit_x()]])
    assert info.value.index == 1


def test_bad_blocks_rejected():
    with pytest.raises(InvalidOperator):
        make_context([np.diag([1.0, 0.0]), np.diag([1.0, 1.0])])
    with pytest.raises(InvalidOperator):
        make_context([np.diag([1.0, 0.0])])


@pytest.mark.parametrize("k,count", [(1, 1), (2, 2), (3, 5), (4, 15)])
def test_subcontext_counts_are_bell_numbers(k, count):
    v = context_from_operators([np.diag(np.arange(1.0, k + 1))])
    assert len(subcontexts(v, include_trivial=True)) == count
    assert len(subcontexts(v, include_trivial=False)) == count - 1


def test_universe_examples(qubit):
    assert len(qubit) == 2 and not qubit.hasse_edges
    qutrit = build_universe([np.diag([1.0, 2.0, 3.0])])
    assert len(qutrit) == 4
    assert {c.label for c in qutrit} == {"{1|23}", "{1|2|3}", "{12|3}", "{13|2}"}
    empty = build_universe([], include_trivial=True, dim=3)
    assert len(empty) == 1 and empty.contexts[0].is_trivial


def test_universe_is_idempotent_and_down_closed():
    for u in fixtures.all_fixtures().values():
        assert not u.check_down_closed()
        again = build_universe(list(u), include_trivial=u.include_trivial)
        assert again == u


def test_order_is_block_coarsening():
    u = fixtures.ququart_universe()
    for a in u:
        for b in u:
            coarsening = all(any(np.allclose(q, a.projection(s)) for s, _ in a.projections()) for q in b.blocks)
            assert u.leq(b.key, a.key) == coarsening


def test_tolerant_dedup(rng):
    v = context_from_operators([np.diag([1.0, 2.0, 3.0])])
    c, s = np.cos(1e-9), np.sin(1e-9)
    tiny = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    noisy = make_context([tiny @ q @ tiny.T for q in v.blocks])
    u = build_universe([v, noisy])
    assert len(u) == 4


def test_restrict_character_examples(qutrit_t):
    top = ctx(qutrit_t, "{1|2|3}")
    coarse = ctx(qutrit_t, "{12|3}")
    ch = characters(top)[block_of(top, [1, 0, 0])]
    r = restrict_character(ch, top, coarse)
    assert np.allclose(coarse.blocks[r.block], np.diag([1, 1, 0]))
    assert restrict_character(ch, top, top) == ch
    triv = ctx(qutrit_t, "{123}")
    assert restrict_character(ch, top, triv).block == 0
    with pytest.raises(NotSubcontext):
        restrict_character(r, coarse, ctx(qutrit_t, "{13|2}"))


def test_restriction_is_functorial():
    u = fixtures.ququart_universe()
    for top, mid in u.pairs():
        for low in u.down(mid):
            for ch in characters(u[top]):
                two_step = restrict_character(restrict_character(ch, u[top], u[mid]), u[mid], u[low])
                assert two_step == restrict_character(ch, u[top], u[low])


def test_ultrafilter_examples(qubit, qutrit_t):
    vz = qubit.by_label("{1|2}")
    ch = characters(vz)[block_of(vz, [1, 0])]
    uf = character_ultrafilter(ch, vz)
    assert len(uf) == 2
    assert any(np.allclose(p, np.eye(2)) for p in uf) and any(np.allclose(p, np.diag([1, 0])) for p in uf)
    assert np.allclose(cone(uf).generator, np.diag([1, 0]))
    triv = ctx(qutrit_t, "{123}")
    assert len(character_ultrafilter(characters(triv)[0], triv)) == 1
    top = ctx(qutrit_t, "{1|2|3}")
    assert len(character_ultrafilter(characters(top)[block_of(top, [1, 0, 0])], top)) == 4


def test_ultrafilter_bijection():
    u = fixtures.ququart_universe()
    for v in u:
        seen = set()
        for ch in characters(v):
            uf = character_ultrafilter(ch, v)
            assert character_from_ultrafilter(uf, v) == ch
            seen.add(frozenset(s for s, p in v.projections() if any(np.allclose(p, q) for q in uf)))
        assert len(seen) == v.size


def test_filters_reject_bad_input():
    with pytest.raises(ValueError):
        cone([])
    with pytest.raises(ValueError):
        PrincipalFilter(np.zeros((2, 2)))


def test_json_round_trip_and_integrity():
    u = fixtures.qutrit_two_maximal()
    data = json.loads(json.dumps(u.to_json()))
    assert ContextUniverse.from_json(data) == u
    bad = json.loads(json.dumps(data))
    bad["contexts"][0]["key"] = "V3-0000000000"
    with pytest.raises(IntegrityError):
        ContextUniverse.from_json(bad)
    missing = json.loads(json.dumps(data))
    missing["contexts"] = missing["contexts"][:-1]
    missing.pop("hasse_edges")
    with pytest.raises(IntegrityError):
        ContextUniverse.from_json(missing)


def test_dot_export(qutrit):
    dot = qutrit.to_dot()
    assert dot.startswith("digraph") and dot.count("->") == 3


def test_trivial_context():
    t = trivial_context(3)
    assert t.is_trivial and np.allclose(t.blocks[0], np.eye(3))
    assert linalg.rank(t.blocks[0]) == 3
