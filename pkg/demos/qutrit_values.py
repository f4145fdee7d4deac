## Qutrit: value functions, their restriction along the context poset, and k-values
import numpy as np

from toposqm import check_natural, dispersion, quantity_arrow
from toposqm.fixtures import qutrit_b, qutrit_universe
from toposqm.quantity import arrow_rows, bv_decompose, pair_quotient_iso, theta

universe = qutrit_universe()
for v in universe:
    print(v.name, "->", [universe[k].name for k in universe.down(v.key)])

## An operator with basis vector 1 as an eigenvector, mixing 2 and 3
rng = np.random.default_rng(3)
m = rng.normal(size=(2, 2))
a = np.zeros((3, 3))
a[0, 0] = 0.5
a[1:, 1:] = (m + m.T) / 2
print("spectrum", np.round(np.linalg.eigvalsh(a), 4))

## Each stage and character gets an interval [inner, outer] of possible values
for row in arrow_rows(a, universe):
    if row["stage"] == row["subcontext"]:
        print(row["stage"], row["character"], round(row["inner"], 4), round(row["outer"], 4))

for mode in ("outer", "inner", "pair"):
    report = check_natural(quantity_arrow(a, universe, mode))
    print(mode, "natural:", report.ok, "squares checked:", report.checked)

## Order-reversing outer values embed into the group of formal differences
top = universe.by_label("{1|2|3}").key
## character 1 of the top stage is block 2 (blocks sort by rank, then entries)
outer = quantity_arrow(a, universe, "outer").components[top][2]
print("outer value below character 1:", {universe[k].name: round(x, 4) for k, x in outer.values.items()})
print("as a group element:", {universe[k].name: round(x, 4) for k, x in theta(outer).bv.items()})

## Any function on the down-set is a difference of two reversing ones
f = {k: float(rng.integers(-3, 4)) for k in universe.down(top)}
g, h = bv_decompose(f, universe, top)
print("f =", {universe[k].name: x for k, x in f.items()})
print("g, h reversing:", g.is_monotone(universe), h.is_monotone(universe),
      "g - h == f:", all(g.values[k] - h.values[k] == f[k] for k in f))

## The interval pair and the dispersion as group elements
pair = quantity_arrow(a, universe, "pair").components[top][2]
spread = dispersion(a, universe).components[top][2]
print("pair class:", {universe[k].name: round(x, 4) for k, x in pair_quotient_iso(pair).bv.items()})
print("dispersion:", {universe[k].name: round(x, 4) for k, x in spread.bv.items()})
