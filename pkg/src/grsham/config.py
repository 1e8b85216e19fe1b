"""Run configuration: TOML ingestion with exact rational values.

Rationals are written as strings ("p/q") so nothing is rounded on the way
in.  Unknown keys are rejected.  The [orbit] table feeds build_orbit; the
optional [params] table feeds Params.make; an optional [superpotential]
table carries explicit terms for `superpotential verify` and
`subsystem integrate`.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - environment specific
    import tomli as tomllib

from .catalog import bbc_orbit, circle_orbit, sphere_orbit, warped_orbit
from .errors import BadParams
from .laurent import parse_laurent
from .orbit_model import ExtVector, OrbitData, build_orbit
from .phase_dynamics import Params
from .superpotential import ExpSum

TOP_KEYS = {"orbit", "params", "superpotential"}
PARAM_KEYS = {"tau", "epsilon", "E", "C"}
SUPER_KEYS = {"terms", "augment"}


def _rat(value) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise BadParams(f"write rationals as strings, got {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class RunConfig:
    orbit: OrbitData
    tau: Fraction = Fraction(1)
    epsilon: Fraction = Fraction(0)
    E: Optional[Fraction] = None
    C: Optional[Fraction] = None
    superpotential: Optional[ExpSum] = None
    augment: Tuple[ExtVector, ...] = ()

    def params(self, E_override: Optional[float] = None,
               epsilon_override: Optional[float] = None) -> Params:
        e_val = E_override if E_override is not None else (
            None if self.E is None else float(self.E))
        c_val = None if (self.C is None or E_override is not None) else float(self.C)
        eps = epsilon_override if epsilon_override is not None \
            else float(self.epsilon)
        if e_val is None and c_val is None:
            e_val = 1.0
        return Params.make(self.orbit, tau=float(self.tau), epsilon=eps,
                           E=e_val, C=c_val)


def parse_config(data: Dict) -> RunConfig:
    unknown = set(data) - TOP_KEYS
    if unknown:
        raise BadParams(f"unknown config keys: {sorted(unknown)}")
    if "orbit" not in data:
        raise BadParams("config must contain an [orbit] table")
    orbit = build_orbit(data["orbit"])

    kwargs = {}
    params = data.get("params", {})
    unknown = set(params) - PARAM_KEYS
    if unknown:
        raise BadParams(f"unknown [params] keys: {sorted(unknown)}")
    for key in PARAM_KEYS & set(params):
        kwargs[key] = _rat(params[key])

    sp = data.get("superpotential", {})
    unknown = set(sp) - SUPER_KEYS
    if unknown:
        raise BadParams(f"unknown [superpotential] keys: {sorted(unknown)}")
    expsum = None
    if "terms" in sp:
        terms = {}
        for row in sp["terms"]:
            extra = set(row) - {"c", "coeff"}
            if extra:
                raise BadParams(f"unknown superpotential term keys: {sorted(extra)}")
            vec = ExtVector.of(row["c"])
            if len(vec) != orbit.r + 1:
                raise BadParams(f"superpotential exponent {vec} has wrong length")
            if vec in terms:
                raise BadParams(f"duplicate superpotential exponent {vec}")
            terms[vec] = parse_laurent(str(row["coeff"]))
        expsum = ExpSum(terms)
    augment = tuple(ExtVector.of(entry) for entry in sp.get("augment", []))

    return RunConfig(orbit=orbit, superpotential=expsum, augment=augment,
                     **{k: v for k, v in kwargs.items()})


def load_config(path: str) -> RunConfig:
    with open(path, "rb") as handle:
        return parse_config(tomllib.load(handle))


_PRESETS = {
    "circle": circle_orbit,
}


def orbit_from_name(name: str) -> OrbitData:
    """Presets: circle, sphere:<n>, warped:<d1>,<d2>, bbc:<m;b;k>[,<m;b;k>...]."""
    if name in _PRESETS:
        return _PRESETS[name]()
    if name.startswith("sphere:"):
        return sphere_orbit(int(name.split(":", 1)[1]))
    if name.startswith("warped:"):
        parts = name.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise BadParams("warped preset takes two dimensions: warped:2,2")
        return warped_orbit(int(parts[0]), int(parts[1]))
    if name.startswith("bbc:"):
        triples = [p.split(";") for p in name.split(":", 1)[1].split(",")]
        if any(len(t) != 3 for t in triples):
            raise BadParams("bbc preset takes m;b;kappa triples: bbc:1;2;2")
        ms = [int(t[0]) for t in triples]
        bs = [int(t[1]) for t in triples]
        ks = [int(t[2]) for t in triples]
        return bbc_orbit(ms, bs, ks)
    raise BadParams(f"unknown orbit preset {name!r}")


def resolve_orbit(spec: str) -> RunConfig:
    """A path to a TOML config, or a preset name."""
    import os

    if os.path.exists(spec):
        return load_config(spec)
    return RunConfig(orbit=orbit_from_name(spec))
