## Unitary covariance: conjugating the operator or conjugating the contexts
import numpy as np

from toposqm import covariance_check, truth_value, twist_universe
from toposqm.covariance import separating_context, twisted_iso_check
from toposqm.fixtures import qutrit_b, qutrit_universe
from toposqm.sampling import random_hermitian, random_state, random_unitary

rng = np.random.default_rng(11)
universe = qutrit_universe()
u = random_unitary(3, rng)
a = random_hermitian(3, rng)

twisted = twist_universe(u, universe)
for v, w in zip(universe, twisted):
    print(v.name, "->", w.key)

report = covariance_check(a, u, universe)
print("operator covariance:", report.ok, "max deviation %.2e" % report.deviation)

## Truth values: the sieve of stages where a proposition is certain
psi = random_state(3, rng)
p = np.outer(psi, psi.conj())
for v in universe:
    sieve = truth_value(p, psi, v.key, universe)
    print(v.name, "true at", sorted(universe[k].name for k in sieve.members))

## The commuting square only closes with A conjugated as U A U^-1.
## A generic operator is blind to this (its values are constant per stage),
## so use one that is diagonal in the stock contexts.
b = qutrit_b()
for mode in ("forward", "inverse"):
    rep = twisted_iso_check(u, universe, b, conjugation=mode)
    print(mode, "square holds:", rep.ok)

## Distinct operators are told apart by some context
near = a + 1e-3 * random_hermitian(3, rng)
v = separating_context(a, near)
print("separated by a context with", len(v.blocks), "blocks")
print("equal operators:", separating_context(a, a.copy()))
