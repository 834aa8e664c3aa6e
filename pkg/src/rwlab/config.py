"""Tagged JSON records for families, and the shipped fixture catalog.

A family record looks like::

    {"kind": "revolution",
     "warping": {"kind": "exponential", "coefficients": [0.2]},
     "zeta1": {"kind": "polynomial", "coefficients": [1, 1, 0.2]},
     "zeta2": {"kind": "polynomial", "coefficients": [0, 0.8]},
     "domain": {"u0": 0, "u1": 1, "v0": 0, "v1": 1.5}}

Profiles are catalog records (or bare numbers for constants); warping
functions use the same ``{kind, coefficients, interval}`` form.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np

from . import families as fam
from . import profiles as pr
from .ambient import WarpingFunction
from .errors import InvalidInputError
from .integrators import DEFAULT_RK4_STEP, DEFAULT_SIMPSON_PANELS
from .surface import Domain, ImmersionPatch

FAMILY_KINDS = {
    "cylinder": "cylinder over a plane curve, phi = (u, x1(u), x2(u), v)",
    "revolution": "rotational surface, phi = (u, zeta1 cos v, zeta1 sin v, zeta2)",
    "spherical": "surface ruled by a spherical curve alpha with curvature kappa",
    "minimal-cylinder": "minimal cylinder from the x1 quadrature in 1/(f sqrt(c3 f^4 + c1^2 + 1))",
    "minimal-revolution": "minimal rotational surface from the zeta1, zeta2 ODE system",
    "spherical-from-revolution": "spherical-family data of a rotational surface (great circle when kappa = 0)",
    "eta-cylinder": "cylinder with parallel eta, x_i = c_i int 1/f",
    "eta-spherical": "spherical family with parallel eta, R = c/f and tau independent of u",
    "helicoid": "helicoid (u, u cos v, u sin v, b v): canonical chart, not class A",
}


def _domain(d) -> Domain:
    if d is None:
        return Domain(0.0, 1.0, 0.0, 1.0)
    try:
        return Domain(float(d["u0"]), float(d["u1"]), float(d["v0"]), float(d["v1"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"domain needs u0, u1, v0, v1: {d!r}") from exc


def _profile(rec, key, default=None):
    if key not in rec:
        if default is None:
            raise InvalidInputError(f"family record is missing profile {key!r}")
        return pr.from_dict(default)
    return pr.from_dict(rec[key])


def _warping(rec) -> WarpingFunction:
    if "warping" not in rec:
        raise InvalidInputError("family record is missing 'warping'")
    w = rec["warping"]
    if not isinstance(w, dict):
        raise InvalidInputError(f"warping must be a record, got {w!r}")
    return WarpingFunction.from_dict(w)


def _float(rec, key, default=None) -> float:
    if key not in rec:
        if default is None:
            raise InvalidInputError(f"family record is missing {key!r}")
        return float(default)
    return float(rec[key])


@dataclass
class BuiltFamily:
    """A constructed patch plus the intermediate family spec."""

    kind: str
    patch: ImmersionPatch
    spec: object
    record: dict

    @property
    def anchor(self) -> str:
        return FAMILY_KINDS[self.kind]


def build_family(record: dict, integrators: dict | None = None) -> BuiltFamily:
    """Construct the patch described by a tagged family record."""
    if not isinstance(record, dict) or "kind" not in record:
        raise InvalidInputError("family record needs a 'kind'")
    kind = record["kind"]
    if kind not in FAMILY_KINDS:
        raise InvalidInputError(f"unknown family kind {kind!r}; expected one of {sorted(FAMILY_KINDS)}")
    integ = dict(integrators or {})
    integ.update(record.get("integrators", {}))
    step = float(integ.get("rk4_step", DEFAULT_RK4_STEP))
    panels = int(integ.get("simpson_panels", DEFAULT_SIMPSON_PANELS))
    dom = _domain(record.get("domain"))

    if kind == "cylinder":
        spec = fam.CylinderFamilySpec(_profile(record, "x1"), _profile(record, "x2", 0.0), _warping(record), dom)
        patch = fam.build_cylinder(spec)
    elif kind == "revolution":
        spec = fam.RevolutionFamilySpec(_profile(record, "zeta1"), _profile(record, "zeta2", 0.0),
                                        _warping(record), dom)
        patch = fam.build_revolution(spec)
    elif kind == "spherical":
        spec = fam.SphericalFamilySpec(
            kappa=_profile(record, "kappa", 0.0), phi1=_profile(record, "phi1", 0.0),
            R=_profile(record, "R"), tau0=_profile(record, "tau0", 0.0), warping=_warping(record),
            domain=dom, psi1_0=_float(record, "psi1_0", 0.0), psi2_0=_float(record, "psi2_0", 0.0),
            alpha0=tuple(record.get("alpha0", (1.0, 0.0, 0.0))),
            dalpha0=tuple(record.get("dalpha0", (0.0, 1.0, 0.0))),
            n0=tuple(record.get("n0", (0.0, 0.0, 1.0))),
            u_anchor=record.get("u_anchor"), rk4_step=step, simpson_panels=panels)
        patch = fam.build_spherical(spec)
    elif kind == "minimal-cylinder":
        spec = fam.solve_minimal_cylinder(_warping(record), _float(record, "c1", 0.0), _float(record, "c2", 0.0),
                                          _float(record, "c3"), _float(record, "u0", dom.u0), dom, panels)
        patch = fam.build_cylinder(spec)
    elif kind == "minimal-revolution":
        spec = fam.solve_minimal_revolution(_warping(record), record.get("initial", ()), dom, step,
                                            record.get("form", "geometric"))
        patch = fam.build_revolution(spec)
    elif kind == "spherical-from-revolution":
        src = build_family(record["source"], integ) if "source" in record else None
        if src is None or not isinstance(src.spec, fam.RevolutionFamilySpec):
            raise InvalidInputError("spherical-from-revolution needs a rotational 'source' record")
        kappa = _profile(record, "kappa", 0.0)
        spec = fam.spherical_from_revolution(src.spec, kappa, step, panels)
        patch = fam.build_spherical(spec)
    elif kind in ("eta-cylinder", "eta-spherical"):
        spec = fam.EtaParallelSpec(
            variant=kind.split("-")[1], warping=_warping(record), domain=dom,
            c1=_float(record, "c1", 0.0), c2=_float(record, "c2", 0.0), c3=_float(record, "c3", 0.0),
            c=_float(record, "c", 0.0), u0=record.get("u0"), kappa=_profile(record, "kappa", 0.0),
            phi1=_profile(record, "phi1", 0.0), tau0=_float(record, "tau0", 0.0),
            A4_0=_float(record, "A4_0", 0.0), A5_0=_float(record, "A5_0", 0.0),
            rk4_step=step, simpson_panels=panels)
        patch = fam.build_eta_parallel(spec)
    else:  # helicoid
        spec = {"pitch": _float(record, "pitch", 0.5)}
        patch = fam.build_helicoid(_warping(record), spec["pitch"], dom)

    if "perturb" in record:
        patch = fam.perturb(patch, float(record["perturb"]))
    patch.name = record.get("name", patch.name)
    return BuiltFamily(kind, patch, spec, copy.deepcopy(record))


def _w(kind, *coeffs):
    return {"kind": kind, "coefficients": list(coeffs)}


def _p(kind, *coeffs):
    return {"kind": kind, "coefficients": list(coeffs)}


UNIT = {"u0": 0.0, "u1": 1.0, "v0": 0.0, "v1": 1.0}

_MIN_REV = {"kind": "minimal-revolution", "warping": _w("exponential", -0.3),
            "initial": [1.0, 0.0, 1.5, 0.3], "domain": {"u0": 0.0, "u1": 1.0, "v0": 0.0, "v1": 1.5}}

_SPHERICAL = {"kind": "spherical", "warping": _w("constant", 1.0), "kappa": 1.0,
              "phi1": _p("polynomial", 0.0, 3.0), "R": _p("sin", 1.0, 1.0, 0.0, 2.0),
              "tau0": _p("polynomial", 0.1, 0.5), "psi1_0": -1.0, "psi2_0": 0.5, "domain": UNIT}

FIXTURES = {
    "cylinder-exp": {"kind": "cylinder", "warping": _w("exponential", 0.3),
                     "x1": _p("polynomial", 0.0, 2.0, 0.3, -0.2), "x2": _p("sin", 0.5, 2.0, 0.0, 0.0),
                     "domain": UNIT},
    "cylinder-const": {"kind": "cylinder", "warping": _w("constant", 1.5),
                       "x1": _p("polynomial", 0.0, 1.0, 0.4), "x2": _p("exp", 0.3, 1.0, 0.0), "domain": UNIT},
    "cylinder-cosh": {"kind": "cylinder", "warping": _w("cosh", 1.0, 0.5),
                      "x1": _p("exp", 1.0, 0.5, 0.0), "x2": _p("polynomial", 0.0, 1.2, -0.3), "domain": UNIT},
    "revolution-exp": {"kind": "revolution", "warping": _w("exponential", 0.2),
                       "zeta1": _p("polynomial", 1.0, 1.0, 0.2), "zeta2": _p("polynomial", 0.0, 0.8),
                       "domain": {"u0": 0.0, "u1": 1.0, "v0": 0.0, "v1": 1.5}},
    "revolution-const": {"kind": "revolution", "warping": _w("constant", 1.0),
                         "zeta1": _p("polynomial", 0.5, 2.0), "zeta2": _p("sin", 1.0, 1.0, 0.0, 0.0),
                         "domain": {"u0": 0.0, "u1": 1.0, "v0": 0.0, "v1": 1.5}},
    "revolution-cosh": {"kind": "revolution", "warping": _w("cosh", 1.0, 0.0),
                        "zeta1": _p("polynomial", 1.0, 1.5), "zeta2": _p("polynomial", 0.0, 0.0, 0.3),
                        "domain": {"u0": 0.0, "u1": 1.0, "v0": 0.0, "v1": 1.5}},
    "spherical": _SPHERICAL,
    "spherical-cosh": dict(_SPHERICAL, warping=_w("cosh", 1.0, 0.0)),
    "minimal-cylinder": {"kind": "minimal-cylinder", "warping": _w("exponential", 1.0),
                         "c1": 0.5, "c2": 0.2, "c3": -math.exp(-5.0), "u0": 0.0, "domain": UNIT},
    "minimal-revolution": _MIN_REV,
    "minimal-spherical": {"kind": "spherical-from-revolution", "kappa": 0.0,
                          "source": dict(_MIN_REV, domain=UNIT)},
    "eta-cylinder": {"kind": "eta-cylinder", "warping": _w("exponential", 1.0), "c1": 2.0, "c2": 0.0,
                     "c3": 0.0, "u0": 0.0, "domain": UNIT},
    "eta-spherical": {"kind": "eta-spherical", "warping": _w("cosh", 1.0, 0.0), "c": 2.0, "kappa": 1.0,
                      "phi1": _p("polynomial", 0.0, 3.0), "A4_0": -1.0, "A5_0": 0.5, "domain": UNIT},
    "helicoid": {"kind": "helicoid", "warping": _w("cosh", 1.0, 1.0), "pitch": 0.5,
                 "domain": {"u0": 0.5, "u1": 1.5, "v0": 0.0, "v1": 1.0}},
    # negative control, off by default: breaks g_c(phi~_u, phi~_v) = 0
    "perturbed-cylinder": None,
}
FIXTURES["perturbed-cylinder"] = dict(FIXTURES["cylinder-exp"], perturb=0.1)


def fixture_record(name: str) -> dict:
    if name not in FIXTURES:
        raise InvalidInputError(f"unknown fixture {name!r}; expected one of {sorted(FIXTURES)}")
    rec = copy.deepcopy(FIXTURES[name])
    rec.setdefault("name", name)
    return rec


def set_dotted(doc: dict, dotted: str, value) -> None:
    """doc['a']['b'] = value for dotted = 'a.b', creating records on the way."""
    keys = dotted.split(".")
    cur = doc
    for k in keys[:-1]:
        nxt = cur.get(k)
        if not isinstance(nxt, dict):
            nxt = {}
            cur[k] = nxt
        cur = nxt
    cur[keys[-1]] = value


def parse_value(text: str):
    """JSON literal if it parses, otherwise the raw string."""
    import json

    try:
        return json.loads(text)
    except ValueError:
        return text


def resolve_family(config: dict) -> dict:
    """The family record named by ``config``: a ``family`` record or a ``fixture`` name."""
    if "family" in config:
        return copy.deepcopy(config["family"])
    if "fixture" in config:
        rec = fixture_record(config["fixture"])
        for k, v in (config.get("fixture_overrides") or {}).items():
            set_dotted(rec, k, v)
        return rec
    raise InvalidInputError("config needs a 'family' record or a 'fixture' name")


def jsonable(x):
    """Recursively convert numpy scalars and arrays for json.dump."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x
