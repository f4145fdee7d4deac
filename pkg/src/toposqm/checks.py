"""Named invariant checks over the stock fixtures.

Every check takes a seed and a tolerance policy and returns a
:class:`CheckResult`.  Each check draws from its own generator seeded with
``(seed, check index)``, so running a subset gives the same numbers as the
full suite.  Exceptions raised by the library are caught and reported as
failures.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fixtures, linalg, oracles
from .contexts import character_ultrafilter, characters, cone
from .covariance import (covariance_check, is_eigenvector, iota_composition_check, sandwich,
                         separating_context, twist_context, twisted_iso_check)
from .daseinisation import (antonymous_fn, das_proj, das_proj_subset, das_sa, das_unitary,
                            observable_fn)
from .errors import ToposError
from .presheaf import (check_natural, global_elements, inner_presheaf, is_daseinised_element,
                       outer_global_element, outer_presheaf, spectral_presheaf)
from .quantity import (REVERSING, KValue, PairFunction, PoFunction, bv_decompose, k_add, k_class,
                       k_neg, k_square_embedded, k_zero, pair_from_kvalue,
                       pair_quotient_iso, po_add, quantity_arrow, theta, variation)
from .sampling import random_dyadic, random_hermitian, random_projection, random_state, random_unitary
from .tolerance import TolerancePolicy, resolve


@dataclass
class CheckResult:
    name: str
    ok: bool = True
    deviation: float = 0.0
    detail: dict = field(default_factory=dict)

    def note(self, dev: float, limit: float, where: str = ""):
        dev = float(dev)
        self.deviation = max(self.deviation, dev)
        if not dev <= limit:
            self.ok = False
            self.detail.setdefault("first_failure", where)

    def require(self, cond: bool, where: str):
        if not cond:
            self.ok = False
            self.detail.setdefault("first_failure", where)

    def to_json(self) -> dict:
        return {"name": self.name, "status": "PASS" if self.ok else "FAIL",
                "deviation": "%.3e" % self.deviation, "detail": self.detail}


def _fixtures_by_dim():
    out: dict[int, list] = {}
    for name, u in fixtures.all_fixtures().items():
        out.setdefault(u.dim, []).append((name, u))
    return out


def _contexts_by_dim():
    """Distinct contexts of all fixtures, grouped by dimension."""
    out: dict[int, dict] = {}
    for _, u in fixtures.all_fixtures().items():
        for v in u:
            out.setdefault(u.dim, {})[v.key] = v
    return {d: list(c.values()) for d, c in out.items()}


def check_daseinisation_oracle(rng, tol) -> CheckResult:
    res = CheckResult("daseinisation_oracle")
    ctx = _contexts_by_dim()
    for i in range(200):
        n = 2 + i % 3
        a = random_hermitian(n, rng)
        for v in ctx[n]:
            for d in ("outer", "inner"):
                dev = np.abs(das_sa(a, v, d, tol).matrix - oracles.das_sa_lattice(a, v, d, tol)).max()
                res.note(dev, 1e-8, f"{v.name} {d}")
    res.detail["operators"] = 200
    return res


def check_order_sandwich(rng, tol) -> CheckResult:
    res = CheckResult("order_sandwich")
    ctx = _contexts_by_dim()
    for i in range(200):
        n = 2 + i % 3
        a = random_hermitian(n, rng)
        spec = np.linalg.eigvalsh(a)
        for v in ctx[n]:
            outer, inner = das_sa(a, v, "outer", tol), das_sa(a, v, "inner", tol)
            res.require(linalg.spectral_leq(inner.matrix, a, tol) and linalg.spectral_leq(a, outer.matrix, tol),
                        f"spectral order at {v.name}")
            for c in outer.coefficients + inner.coefficients:
                res.note(np.abs(spec - c).min(), 1e-8, f"spectrum at {v.name}")
    return res


def _perturbed_negative_control(tol) -> int:
    u = fixtures.qutrit_universe()
    arrow = quantity_arrow(fixtures.qutrit_b(), u, "outer", tol)
    upper = u.maximal()[0]
    lower = next(k for k in u.down(upper) if k != upper)
    mu = arrow.components[upper][0]
    bad = PoFunction(mu.root, {**mu.values, lower: mu.values[lower] + 1.0}, mu.direction)
    return len(check_natural(arrow.with_component(upper, 0, bad)).violations)


def check_naturality(rng, tol) -> CheckResult:
    res = CheckResult("naturality")
    squares = 0
    for name, u in fixtures.all_fixtures().items():
        ops = [random_hermitian(u.dim, rng) for _ in range(4)]
        if name.startswith("qutrit"):
            ops.append(fixtures.qutrit_b())
        for a in ops:
            for mode in ("outer", "inner", "pair"):
                rep = check_natural(quantity_arrow(a, u, mode, tol))
                squares += rep.checked
                res.require(rep.ok, f"{name} {mode}")
        for p in (spectral_presheaf(u), outer_presheaf(u, tol), inner_presheaf(u, tol)):
            res.require(not p.functoriality_violations(), f"{name} functoriality {p.name}")
    violations = _perturbed_negative_control(tol)
    res.require(violations == 1, "negative control")
    res.detail.update(squares=squares, negative_control_violations=violations)
    return res


def check_das_properties(rng, tol) -> CheckResult:
    res = CheckResult("das_properties")
    ctx = _contexts_by_dim()
    for i in range(60):
        n = 2 + i % 3
        a = random_hermitian(n, rng)
        p = random_projection(n, rng)
        scale = max(1.0, float(np.abs(a).max()))
        values, _ = linalg.eigen_clusters(a, tol)
        for v in ctx[n]:
            outer, inner = das_sa(a, v, "outer", tol).matrix, das_sa(a, v, "inner", tol).matrix
            for s in (-2.0, -1.0, 0.5, 3.0):
                want = s * (outer if s > 0 else inner)
                res.note(np.abs(das_sa(s * a, v, "outer", tol).matrix - want).max(), 1e-12 * 3 * scale,
                         f"scaling {s} at {v.name}")
            comp = np.eye(n) - p
            res.require(das_proj_subset(comp, v, "outer", tol)
                        == frozenset(range(v.size)) - das_proj_subset(p, v, "inner", tol),
                        f"complement at {v.name}")
            vals, projs = linalg.eigen_clusters(outer, tol)
            for lam in values:
                above = sum((q for c, q in zip(vals, projs) if c > lam + 1e-9 * scale), np.zeros((n, n)))
                e_above = sum((q for c, q in zip(values, linalg.eigen_clusters(a, tol)[1]) if c > lam),
                              np.zeros((n, n)))
                res.note(np.abs(above - das_proj(e_above, v, "outer", tol)).max(), 1e-8, f"exchange at {v.name}")
    # non-linearity witness on the qubit fixture
    a = np.diag([3.0, 1.0]).astype(complex)
    b = fixtures.HADAMARD @ a @ fixtures.HADAMARD
    u = fixtures.qubit_antichain()
    gaps = [float(np.abs(das_sa(a + b, v, "outer", tol).matrix
                         - das_sa(a, v, "outer", tol).matrix - das_sa(b, v, "outer", tol).matrix).max())
            for v in u]
    res.require(max(gaps) > 1e-3, "non-linearity witness")
    res.detail["nonlinearity_gap"] = "%.3e" % max(gaps)
    return res


def check_filter_functions(rng, tol) -> CheckResult:
    res = CheckResult("filter_functions")
    for name, u in fixtures.all_fixtures().items():
        for a in [random_hermitian(u.dim, rng) for _ in range(5)]:
            for v in u:
                outer, inner = das_sa(a, v, "outer", tol), das_sa(a, v, "inner", tol)
                for ch in characters(v):
                    f = cone(character_ultrafilter(ch, v), tol)
                    res.note(abs(outer.coefficients[ch.block] - observable_fn(a, f, tol)), 1e-10, name)
                    res.note(abs(inner.coefficients[ch.block] - antonymous_fn(a, f, tol)), 1e-10, name)
    return res


def check_sandwich(rng, tol) -> CheckResult:
    res = CheckResult("sandwich")
    eigen_cases = 0
    for i in range(1000):
        n = 2 + i % 3
        a = random_hermitian(n, rng)
        if i % 3 == 0:
            w, vecs = np.linalg.eigh(a)
            j = int(rng.integers(n))
            same = np.abs(w - w[j]) <= 1e-9 * max(1.0, np.abs(w).max())
            coeffs = np.where(same, rng.normal(size=n) + 1j * rng.normal(size=n), 0)
            psi = vecs @ coeffs
            psi = psi / np.linalg.norm(psi)
        else:
            psi = random_state(n, rng)
        g, e, f = sandwich(a, psi, tol)
        res.note(max(g - e, e - f, 0.0), 1e-8, f"inequality {i}")
        collapsed = abs(f - g) <= 1e-8 and abs(e - g) <= 1e-8
        eig = is_eigenvector(a, psi, tol)
        eigen_cases += eig
        res.require(collapsed == eig, f"equality iff eigenvector {i}")
    res.detail["eigenvector_cases"] = eigen_cases
    return res


def _random_reversing(u, root, rng) -> PoFunction:
    g, _ = bv_decompose(dict(zip(u.down(root), random_dyadic(rng, len(u.down(root))))), u, root)
    return g


def check_k_construction(rng, tol) -> CheckResult:
    res = CheckResult("k_construction")
    posets = [(u, root) for u in fixtures.all_fixtures().values() for root in u.keys]
    for i in range(500):
        u, root = posets[i % len(posets)]
        keys = u.down(root)
        f = dict(zip(keys, random_dyadic(rng, len(keys))))
        g, h = bv_decompose(f, u, root)
        res.require(g.is_monotone(u) and h.is_monotone(u), "bv components order-reversing")
        res.require(all(g[k] - h[k] == f[k] for k in keys), "bv difference exact")
        res.require(variation(f, u, root) == oracles.variation_by_chains(f, u, root), "DP equals chains")
        # group axioms and the embedding
        x, y, z = (KValue(root, dict(zip(keys, random_dyadic(rng, len(keys))))) for _ in range(3))
        zero = k_zero(u, root)
        res.require(k_add(k_add(x, y), z) == k_add(x, k_add(y, z)), "associativity")
        res.require(k_add(x, y) == k_add(y, x), "commutativity")
        res.require(k_add(x, zero) == x and k_add(x, k_neg(x)) == zero, "unit and inverse")
        mu, nu = _random_reversing(u, root, rng), _random_reversing(u, root, rng)
        res.require(theta(po_add(mu, nu)) == k_add(theta(mu), theta(nu)), "theta additive")
        res.require((theta(mu) == theta(nu)) == (dict(mu.values) == dict(nu.values)), "theta injective")
        res.require(k_class(mu, nu) == k_add(theta(mu), k_neg(theta(nu))), "class is difference")
    for i in range(200):
        u, root = posets[i % len(posets)]
        lam = _random_reversing(u, root, rng)
        sq = k_square_embedded(theta(lam), u)
        res.require(all(sq[k] == lam[k] ** 2 for k in lam.values), "square is pointwise square")
    return res


def _monotone_functions(u, root, grid, direction):
    keys = sorted(u.down(root), key=lambda k: (u[k].size, k))
    out = []

    def extend(pos, vals):
        if pos == len(keys):
            out.append(dict(vals))
            return
        key = keys[pos]
        for x in grid:
            ok = True
            for lower in u.down(key):
                if lower != key:
                    if direction == REVERSING and x > vals[lower]:
                        ok = False
                    elif direction != REVERSING and x < vals[lower]:
                        ok = False
            if ok:
                vals[key] = x
                extend(pos + 1, vals)
                del vals[key]

    extend(0, {})
    return out


def check_quotient_iso(rng, tol) -> CheckResult:
    res = CheckResult("quotient_iso")
    grid = (0.0, 1.0)
    stages = 0
    for name, u in fixtures.all_fixtures().items():
        for root in u.keys:
            stages += 1
            ups = _monotone_functions(u, root, grid, "preserving")
            downs = _monotone_functions(u, root, grid, REVERSING)
            image: dict[tuple, set] = {}
            for mu, nu in itertools.product(ups, downs):
                p = PairFunction(PoFunction(root, mu, "preserving"), PoFunction(root, nu, REVERSING))
                cls = tuple(sorted((k, mu[k] + nu[k]) for k in mu))
                image.setdefault(cls, set()).add(pair_quotient_iso(p))
            res.require(all(len(s) == 1 for s in image.values()), f"well defined at {name}")
            kvals = [next(iter(s)) for s in image.values()]
            res.require(len(set(kvals)) == len(kvals), f"injective at {name}")
            for _ in range(10):
                keys = u.down(root)
                kv = KValue(root, dict(zip(keys, random_dyadic(rng, len(keys)))))
                res.require(pair_quotient_iso(pair_from_kvalue(kv, u)) == kv, f"surjective at {name}")
    res.detail["stages"] = stages
    return res


def check_covariance(rng, tol) -> CheckResult:
    res = CheckResult("covariance")
    by_dim = _fixtures_by_dim()
    for n in (2, 3, 4):
        for i in range(50):
            u1, u2 = random_unitary(n, rng), random_unitary(n, rng)
            name, uni = by_dim[n][i % len(by_dim[n])]
            p, a, psi = random_projection(n, rng), random_hermitian(n, rng), random_state(n, rng)
            for rep in (covariance_check(p, u1, uni, psi, tol), covariance_check(a, u1, uni, None, tol),
                        twisted_iso_check(u1, uni, a, "forward", tol)):
                res.note(rep.deviation, 1e-8, f"{rep.name} {name}")
                res.require(rep.ok, f"{rep.name} {name}")
            for v in uni:
                res.require(twist_context(u1, twist_context(u2, v, tol), tol).key
                            == twist_context(u1 @ u2, v, tol).key, "group law")
                res.require(twist_context(u1, twist_context(u1.conj().T, v, tol), tol).key == v.key, "inverse")
            res.require(iota_composition_check(u1, u2, uni, tol), "iota composition")
    return res


def check_unitary(rng, tol) -> CheckResult:
    res = CheckResult("unitary")
    ctx = _contexts_by_dim()
    for i in range(60):
        n = 2 + i % 3
        w = rng.uniform(0, 2 * np.pi - 0.1, size=n)
        if i % 2:
            w[0] = w[-1]
        q = random_unitary(n, rng)
        a = q @ np.diag(w) @ q.conj().T
        a = (a + a.conj().T) / 2
        u = q @ np.diag(np.exp(1j * w)) @ q.conj().T
        u2 = random_unitary(n, rng)
        for v in ctx[n]:
            du = das_unitary(u, v, "outer", tol)
            expected = v.operator(np.exp(1j * np.array(das_sa(a, v, "outer", tol).coefficients)))
            res.note(np.abs(du - expected).max(), 1e-8, v.name)
            d2 = das_unitary(u2, v, "outer", tol)
            res.note(np.abs(du @ d2 - d2 @ du).max(), 1e-8, f"commute at {v.name}")
    return res


def check_global_elements(rng, tol) -> CheckResult:
    res = CheckResult("global_elements")
    u = fixtures.qubit_antichain()
    sigma = global_elements(spectral_presheaf(u))
    outer = global_elements(outer_presheaf(u, tol))
    das = [g for g in outer if is_daseinised_element(g, u, tol)]
    sampled = {tuple(sorted(outer_global_element(random_projection(2, rng), u, tol).items())) for _ in range(50)}
    basis = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), (np.eye(2) + fixtures.qubit_x()) / 2,
             (np.eye(2) - fixtures.qubit_x()) / 2]
    sampled |= {tuple(sorted(outer_global_element(p, u, tol).items())) for p in basis}
    das_set = {tuple(sorted(g.items())) for g in das}
    res.require(len(sigma) == 4, "spectral presheaf global elements")
    res.require(len(outer) == 16, "outer presheaf global elements")
    res.require(sampled <= das_set and len(das_set) < len(outer), "strict containment")
    res.detail.update(spectral=len(sigma), outer=len(outer), daseinised=len(das_set))
    return res


def check_injectivity(rng, tol) -> CheckResult:
    res = CheckResult("injectivity")
    forced = 0
    for i in range(200):
        n = 2 + i % 3
        a = random_hermitian(n, rng)
        b = a.copy() if i < 50 else random_hermitian(n, rng)
        if i >= 50 and i % 10 == 0:
            b = a + np.eye(n)
        v = separating_context(a, b, tol, seed=i)
        # degenerate draws can coincide, so equality is decided on the matrices
        equal = float(np.abs(a - b).max()) <= tol.order_cmp_tol
        forced += i < 50
        res.require((v is None) == equal, f"pair {i}")
        if v is not None:
            ca, cb = das_sa(a, v, "outer", tol).coefficients, das_sa(b, v, "outer", tol).coefficients
            res.require(max(abs(x - y) for x, y in zip(ca, cb)) > tol.order_cmp_tol, f"post-verify {i}")
    res.detail["forced_equal"] = forced
    return res


CHECKS: dict[str, Callable] = {
    "daseinisation_oracle": check_daseinisation_oracle,
    "order_sandwich": check_order_sandwich,
    "naturality": check_naturality,
    "das_properties": check_das_properties,
    "filter_functions": check_filter_functions,
    "sandwich": check_sandwich,
    "k_construction": check_k_construction,
    "quotient_iso": check_quotient_iso,
    "covariance": check_covariance,
    "unitary": check_unitary,
    "global_elements": check_global_elements,
    "injectivity": check_injectivity,
}


def run_check(name: str, seed: int = 0, tol: TolerancePolicy | None = None) -> CheckResult:
    tol = resolve(tol)
    index = list(CHECKS).index(name)
    rng = np.random.default_rng([seed, index])
    try:
        with np.errstate(all="ignore"):
            return CHECKS[name](rng, tol)
    except (ToposError, AssertionError, ValueError, np.linalg.LinAlgError) as exc:
        return CheckResult(name, False, float("nan"), {"error": f"{type(exc).__name__}: {exc}"})


def run_suite(seed: int = 0, only=None, tol: TolerancePolicy | None = None) -> dict:
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    results = [run_check(n, seed, tol) for n in names]
    return {"seed": seed, "tolerances": resolve(tol).to_dict(),
            "all_passed": all(r.ok for r in results),
            "checks": [r.to_json() for r in results]}


def suite_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
