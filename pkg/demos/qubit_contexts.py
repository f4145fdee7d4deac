## Qubit: two incompatible contexts and what a projection looks like from each
import numpy as np

from toposqm import das_proj, das_sa, global_elements, spectral_presheaf, outer_presheaf
from toposqm.fixtures import qubit_antichain, qubit_x, qubit_z
from toposqm.presheaf import is_daseinised_element

universe = qubit_antichain()
for v in universe:
    print(v.key, "first block diagonal", np.round(np.diag(v.blocks[0]).real, 3))

## A projection onto a tilted ray is in neither context
theta = np.pi / 5
ray = np.array([np.cos(theta), np.sin(theta)])
p = np.outer(ray, ray)

for v in universe:
    outer = das_proj(p, v, "outer")
    inner = das_proj(p, v, "inner")
    print(v.name, "outer rank", round(np.trace(outer).real), "inner rank", round(np.trace(inner).real))

## Operators: best approximations from above and below in the spectral order.
## sigma_z sits in the diagonal context and is kept exactly there; the other
## context only sees the bounds of its spectrum.
for a in (qubit_z(), 0.7 * qubit_z() + 0.4 * qubit_x()):
    print("spectrum", np.round(np.linalg.eigvalsh(a), 4))
    for v in universe:
        hi = das_sa(a, v, "outer")
        lo = das_sa(a, v, "inner")
        print(" ", v.name, "outer", np.round(hi.coefficients, 4), "inner", np.round(lo.coefficients, 4))

## Global elements: four for the state object, many more for the outer presheaf
sigma = spectral_presheaf(universe)
print("points of the state object:", len(global_elements(sigma)))

outer_ps = outer_presheaf(universe)
elements = global_elements(outer_ps)
hits = sum(is_daseinised_element(g, universe) for g in elements)
print(f"outer presheaf: {len(elements)} global elements, {hits} come from a projection")
