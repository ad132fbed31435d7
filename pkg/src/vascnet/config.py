"""INI-style run configuration.

Sections and keys::

    [model]       mu alpha a b                 (required, positive)
    [boundary]    rho_plus phi_minus           (required; phi_plus = a rho_plus / b)
    [pressure]    kind = quadratic|power, K, gamma (gamma for power only)
    [grid]        L N                          (L defaults to max(40, 20/lambda))
    [scheme]      cfl diffusion_theta well_balanced
    [experiment]  amplitude sigma seed T_end sample_every snapshot_every perturb_phi

Every problem found is reported at once.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

from .errors import ConfigError, InvalidInputError, ParseError
from .grid import HalfLineGrid, SchemeConfig
from .model import BoundaryData, ModelParams, PowerLaw, PressureLaw, Quadratic
from .steady import StationaryFunctions, default_length

__all__ = ["CliConfig", "parse_config", "load_config"]

_POSITIVE = object()
_NONNEG = object()
_ANY = object()

# (section, key) -> (type, constraint, default); default None means required
_SCHEMA = {
    "model": {"mu": (float, _POSITIVE, None), "alpha": (float, _POSITIVE, None),
              "a": (float, _POSITIVE, None), "b": (float, _POSITIVE, None)},
    "boundary": {"rho_plus": (float, _POSITIVE, None), "phi_minus": (float, _ANY, None)},
    "pressure": {"kind": (str, ("quadratic", "power"), "quadratic"),
                 "K": (float, _POSITIVE, None), "gamma": (float, _POSITIVE, 2.0)},
    "grid": {"L": (float, _POSITIVE, "auto"), "N": (int, _POSITIVE, 2000)},
    "scheme": {"cfl": (float, _POSITIVE, 0.45), "diffusion_theta": (float, _POSITIVE, 1.0),
               "well_balanced": (bool, _ANY, True)},
    "experiment": {"amplitude": (float, _NONNEG, 1e-2), "sigma": (float, _POSITIVE, 1.0),
                   "seed": (int, _NONNEG, 0), "T_end": (float, _POSITIVE, 50.0),
                   "sample_every": (float, _NONNEG, 0.5),
                   "snapshot_every": (float, _POSITIVE, 10.0),
                   "perturb_phi": (bool, _ANY, False)},
}
_REQUIRED_SECTIONS = ("model", "boundary", "pressure")
_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


@dataclass(frozen=True)
class CliConfig:
    params: ModelParams
    law: PressureLaw
    bdry: BoundaryData
    grid: HalfLineGrid
    scheme: SchemeConfig
    experiment: dict
    text: str = ""

    def with_grid(self, L: float | None = None, N: int | None = None) -> "CliConfig":
        g = HalfLineGrid(self.grid.L if L is None else L, self.grid.N if N is None else N)
        return replace(self, grid=g)


def _convert(section, key, raw, typ, constraint, problems):
    name = f"[{section}] {key}"
    try:
        if typ is bool:
            v = _BOOL[raw.strip().lower()]
        elif typ is int:
            v = int(raw)
        else:
            v = typ(raw)
    except (ValueError, KeyError):
        problems.append(f"{key}: {name} = {raw!r} is not a valid {typ.__name__}")
        return None
    if typ is float and not math.isfinite(v):
        problems.append(f"{key}: {name} must be finite")
        return None
    if constraint is _POSITIVE and not v > 0:
        problems.append(f"{key}: {name} must be positive, got {v}")
        return None
    if constraint is _NONNEG and not v >= 0:
        problems.append(f"{key}: {name} must be >= 0, got {v}")
        return None
    if isinstance(constraint, tuple) and v not in constraint:
        problems.append(f"{key}: {name} must be one of {', '.join(constraint)}, got {v!r}")
        return None
    return v


def parse_config(text: str) -> CliConfig:
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str  # keys are case-sensitive (K)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("configuration must start with a [section] header", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.ParsingError as exc:
        raise ParseError("expected 'key = value' or a [section] header",
                         exc.errors[0][0]) from None

    problems = []
    for sec in cp.sections():
        if sec not in _SCHEMA:
            problems.append(f"{sec}: unknown section [{sec}]")
            continue
        for key in cp[sec]:
            if key not in _SCHEMA[sec]:
                problems.append(f"{key}: unknown key in [{sec}]")
    for sec in _REQUIRED_SECTIONS:
        if not cp.has_section(sec):
            problems.append(f"{sec}: missing section [{sec}]")

    vals = {}
    for sec, keys in _SCHEMA.items():
        vals[sec] = {}
        have = cp[sec] if cp.has_section(sec) else {}
        for key, (typ, constraint, default) in keys.items():
            if key in have:
                vals[sec][key] = _convert(sec, key, have[key], typ, constraint, problems)
            elif default is None:
                if cp.has_section(sec) or sec not in _REQUIRED_SECTIONS:
                    problems.append(f"{key}: missing required key in [{sec}]")
                vals[sec][key] = None
            else:
                vals[sec][key] = default
    if problems:
        raise ConfigError(problems)

    m, bd, pr, gr, sc = (vals[k] for k in ("model", "boundary", "pressure", "grid", "scheme"))
    try:
        params = ModelParams(m["mu"], m["alpha"], m["a"], m["b"])
        law = Quadratic(pr["K"]) if pr["kind"] == "quadratic" else PowerLaw(pr["K"], pr["gamma"])
        bdry = BoundaryData.from_params(params, bd["rho_plus"], bd["phi_minus"])
        scheme = SchemeConfig(cfl=sc["cfl"], diffusion_theta=sc["diffusion_theta"],
                              well_balanced=sc["well_balanced"])
        L = gr["L"]
        if L == "auto":
            L = default_length(StationaryFunctions(law, params, bdry))
        grid = HalfLineGrid(L, gr["N"])
    except InvalidInputError as exc:
        raise ConfigError([str(exc)]) from None
    return CliConfig(params, law, bdry, grid, scheme, dict(vals["experiment"]), text)


def load_config(path) -> CliConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
