"""Acceptance criteria, one test each, with a PASS/FAIL line printed per criterion.

Run ``pytest tests/test_acceptance.py -v`` to see the lines.
"""
import pytest

from toposqm.checks import run_check
from toposqm.cli import main

CRITERIA = [
    (1, "daseinisation_oracle", "overlap formula equals lattice oracle, 200 operators", "1e-8"),
    (2, "order_sandwich", "inner <=s A <=s outer, coefficients in spectrum", "1e-8"),
    (3, "naturality", "value arrows natural; one violation after a single perturbation", "exact"),
    (4, "das_properties", "scaling, complement, spectral-family exchange, non-linearity", "1e-8"),
    (5, "filter_functions", "coefficients equal observable/antonymous functions", "1e-10"),
    (6, "sandwich", "g <= <A> <= f on 1000 pairs, equality iff eigenvector", "1e-8"),
    (7, "k_construction", "group axioms, embedding, bv split, squares", "exact"),
    (8, "quotient_iso", "pair quotient map is a bijection on grid values", "exact"),
    (9, "covariance", "projection, operator, truth covariance; twisting group law", "1e-8"),
    (10, "unitary", "outer das of exp(iA) is exp(i outer das A); stage-wise commuting", "1e-8"),
    (11, "global_elements", "4 spectral points; outer presheaf elements beyond das(P)", "exact"),
    (12, "injectivity", "separating context found iff operators differ, 200 pairs", "1e-8"),
]


def report(capsys, number, ok, text):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:>2}: {text}")


@pytest.mark.parametrize("number,name,text,tol", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(capsys, number, name, text, tol):
    result = run_check(name, seed=0)
    report(capsys, number, result.ok, f"{text} [tol {tol}, max deviation {result.deviation:.3e}] {result.detail}")
    assert result.ok, result.detail


def test_criterion_13_determinism(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    codes = [main(["check", "--seed", "7", "-q", "--out", str(p)]) for p in (first, second)]
    same = first.read_bytes() == second.read_bytes()
    report(capsys, 13, same and codes == [0, 0], f"check reports byte-identical for equal seeds (exit codes {codes})")
    assert same and codes == [0, 0]
