"""Numerical tolerances used by every order and equality test.

Daseinisation is discontinuous in its inputs, so all thresholds are explicit
and overridable, either per call or through a JSON file named by the
``TOPOSQM_TOLERANCES`` environment variable.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass

ENV_VAR = "TOPOSQM_TOLERANCES"


@dataclass(frozen=True)
class TolerancePolicy:
    eig_cluster_tol: float = 1e-9
    proj_tol: float = 1e-8
    hermitian_tol: float = 1e-8
    unitary_tol: float = 1e-8
    zero_overlap_tol: float = 1e-10
    order_cmp_tol: float = 1e-8

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ValueError(f"tolerance {f.name} must be finite and >= 0, got {v!r}")

    def replace(self, **overrides) -> "TolerancePolicy":
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TolerancePolicy":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown tolerance fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def from_json(cls, path) -> "TolerancePolicy":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


DEFAULT = TolerancePolicy()


def default_policy() -> TolerancePolicy:
    """Policy from ``$TOPOSQM_TOLERANCES`` if set, else the built-in defaults."""
    path = os.environ.get(ENV_VAR)
    if path:
        return TolerancePolicy.from_json(path)
    return DEFAULT


def resolve(tol: TolerancePolicy | None) -> TolerancePolicy:
    return DEFAULT if tol is None else tol
