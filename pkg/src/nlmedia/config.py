"""Scenario configuration: versioned TOML schema, validation, model building.

A scenario file declares named media, a geometry, sweep axes, requested
outputs and a list of named verification checks with expectations.  All
quantities are in natural units unless the CLI converts at the boundary.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .response import (
    DrudeLorentzParams,
    HomogeneousKSpace,
    drude_model,
    hydrodynamic_model,
    local_dielectric_model,
    magnetodielectric_homogeneous_model,
    vacuum_model,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version shim
    import tomli as tomllib

SCHEMA_VERSION = 1

GEOMETRY_KINDS = ("bulk", "half_space", "slab", "grid")
MEDIUM_KINDS = ("vacuum", "local", "drude", "hydrodynamic", "magnetodielectric")
CHECK_EXPECTATIONS = ("pass", "fail")


def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(path, message)


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise _fail(f"{path}.{key}", "required field missing")
    return table[key]


def _as_complex(value, path: str) -> complex:
    """Accept a real number or a [re, im] pair."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)):
        return complex(value[0], value[1])
    raise _fail(path, f"expected a number or [re, im] pair, got {value!r}")


def _as_float(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    v = float(value)
    if positive and v <= 0:
        raise _fail(path, f"must be > 0, got {v}")
    return v


def _as_float_list(value, path: str, positive: bool = False) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise _fail(path, "expected a non-empty list of numbers")
    return tuple(_as_float(v, f"{path}[{i}]", positive=positive)
                 for i, v in enumerate(value))


@dataclass(frozen=True)
class MediumSpec:
    """A named medium definition; ``build`` produces the k-space model."""

    name: str
    kind: str
    params: dict

    def build(self) -> HomogeneousKSpace:
        path = f"media.{self.name}"
        p = self.params
        if self.kind == "vacuum":
            return vacuum_model()
        if self.kind == "local":
            eps = _as_complex(_require(p, "epsilon", path), f"{path}.epsilon")
            return local_dielectric_model(eps)
        if self.kind == "drude":
            params = DrudeLorentzParams(
                plasma_frequency=_as_float(
                    _require(p, "plasma_frequency", path),
                    f"{path}.plasma_frequency"),
                damping=_as_float(_require(p, "damping", path),
                                  f"{path}.damping", positive=True),
                resonance=_as_float(p.get("resonance", 0.0), f"{path}.resonance"),
            )
            return drude_model(params)
        if self.kind == "hydrodynamic":
            return hydrodynamic_model(
                _as_float(_require(p, "omega_p", path), f"{path}.omega_p"),
                _as_float(_require(p, "gamma_d", path), f"{path}.gamma_d",
                          positive=True),
                _as_float(_require(p, "beta", path), f"{path}.beta"),
            )
        if self.kind == "magnetodielectric":
            eps = _as_complex(_require(p, "epsilon", path), f"{path}.epsilon")
            kappa = _as_complex(p.get("kappa", 1.0), f"{path}.kappa")
            return magnetodielectric_homogeneous_model(eps, kappa)
        raise _fail(f"{path}.kind", f"unknown medium kind {self.kind!r}")


@dataclass(frozen=True)
class GeometrySpec:
    """Geometry block: bulk | half_space | slab {d} | grid {n}."""

    kind: str
    media: tuple[str, ...]
    d: float | None = None
    n: tuple[int, int, int] | None = None


@dataclass(frozen=True)
class SourceSpec:
    """Dipole source for slab Green-tensor outputs."""

    z: float
    z_field: tuple[float, ...]


@dataclass(frozen=True)
class CheckRequest:
    name: str
    expect: str = "pass"
    seed: int | None = None


@dataclass(frozen=True)
class Scenario:
    """Validated scenario: media, geometry, sweep axes, outputs, checks."""

    name: str
    media: dict[str, MediumSpec]
    geometry: GeometrySpec
    q_values: tuple[float, ...]
    omega_values: tuple[float, ...]
    outputs: tuple[str, ...]
    checks: tuple[CheckRequest, ...]
    source: SourceSpec | None = None
    seed: int = 0
    check_tolerance: float = 1e-8
    extras: dict = field(default_factory=dict)

    def models(self) -> list[HomogeneousKSpace]:
        return [self.media[name].build() for name in self.geometry.media]


def _parse_geometry(table, media: dict[str, MediumSpec]) -> GeometrySpec:
    path = "geometry"
    if not isinstance(table, dict):
        raise _fail(path, "expected a table")
    kind = _require(table, "kind", path)
    if kind not in GEOMETRY_KINDS:
        raise _fail(f"{path}.kind",
                    f"unknown geometry {kind!r}; expected one of {GEOMETRY_KINDS}")
    if kind == "slab":
        names = _require(table, "media", path)
        if not isinstance(names, list) or len(names) != 3:
            raise _fail(f"{path}.media",
                        "slab geometry needs exactly three media "
                        "[below, slab, above]")
        d = _as_float(_require(table, "d", path), f"{path}.d", positive=True)
        n = None
    else:
        names = [_require(table, "medium", path)]
        d = None
        n = None
        if kind == "grid":
            raw = _require(table, "n", path)
            if (not isinstance(raw, list) or len(raw) != 3
                    or any(not isinstance(v, int) or v < 1 for v in raw)):
                raise _fail(f"{path}.n", "expected three positive integers")
            n = tuple(raw)
    for i, name in enumerate(names):
        if name not in media:
            raise _fail(f"{path}.media[{i}]" if kind == "slab" else f"{path}.medium",
                        f"medium {name!r} is not defined under [media]")
    return GeometrySpec(kind=kind, media=tuple(names), d=d, n=n)


def parse_scenario(data: dict, name_hint: str = "scenario") -> Scenario:
    """Validate a parsed TOML document into a Scenario.

    Raises ConfigError naming the offending field path on any violation.
    """
    if not isinstance(data, dict):
        raise _fail("<root>", "expected a TOML table")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise _fail("schema_version",
                    f"expected {SCHEMA_VERSION}, got {version!r}")
    name = data.get("name", name_hint)
    if not isinstance(name, str) or not name:
        raise _fail("name", "expected a non-empty string")

    media_table = _require(data, "media", "<root>")
    if not isinstance(media_table, dict) or not media_table:
        raise _fail("media", "expected a non-empty table of media")
    media: dict[str, MediumSpec] = {}
    for mname, mdef in media_table.items():
        path = f"media.{mname}"
        if not isinstance(mdef, dict):
            raise _fail(path, "expected a table")
        kind = _require(mdef, "kind", path)
        if kind not in MEDIUM_KINDS:
            raise _fail(f"{path}.kind",
                        f"unknown medium kind {kind!r}; expected one of "
                        f"{MEDIUM_KINDS}")
        params = {k: v for k, v in mdef.items() if k != "kind"}
        spec = MediumSpec(name=mname, kind=kind, params=params)
        spec.build()  # validate parameters eagerly
        media[mname] = spec

    geometry = _parse_geometry(_require(data, "geometry", "<root>"), media)

    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise _fail("sweep", "expected a table")
    if geometry.kind == "grid":
        q_values = _as_float_list(sweep["q"], "sweep.q", positive=True) \
            if "q" in sweep else ()
    else:
        q_values = _as_float_list(_require(sweep, "q", "sweep"), "sweep.q",
                                  positive=True)
    omega_values = _as_float_list(_require(sweep, "omega", "sweep"),
                                  "sweep.omega", positive=True)

    outputs_table = data.get("outputs", {})
    if not isinstance(outputs_table, dict):
        raise _fail("outputs", "expected a table of booleans")
    outputs = tuple(k for k, v in sorted(outputs_table.items()) if v is True)

    source = None
    if "source" in data:
        st = data["source"]
        if not isinstance(st, dict):
            raise _fail("source", "expected a table")
        source = SourceSpec(
            z=_as_float(_require(st, "z", "source"), "source.z", positive=True),
            z_field=_as_float_list(_require(st, "z_field", "source"),
                                   "source.z_field", positive=True),
        )
        if geometry.kind != "slab":
            raise _fail("source", "source block requires slab geometry")
        if source.z >= geometry.d or any(z >= geometry.d for z in source.z_field):
            raise _fail("source", "source and field heights must lie inside "
                        f"the slab (0, {geometry.d})")

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise _fail("seed", "expected a non-negative integer")

    tol_table = data.get("tolerances", {})
    if not isinstance(tol_table, dict):
        raise _fail("tolerances", "expected a table")
    check_tol = _as_float(tol_table.get("check", 1e-8), "tolerances.check",
                          positive=True)

    checks = []
    raw_checks = data.get("checks", [])
    if not isinstance(raw_checks, list):
        raise _fail("checks", "expected an array of tables")
    for i, c in enumerate(raw_checks):
        path = f"checks[{i}]"
        if not isinstance(c, dict):
            raise _fail(path, "expected a table")
        cname = _require(c, "name", path)
        expect = c.get("expect", "pass")
        if expect not in CHECK_EXPECTATIONS:
            raise _fail(f"{path}.expect",
                        f"expected one of {CHECK_EXPECTATIONS}, got {expect!r}")
        cseed = c.get("seed")
        if cseed is not None and (not isinstance(cseed, int) or cseed < 0):
            raise _fail(f"{path}.seed", "expected a non-negative integer")
        checks.append(CheckRequest(name=cname, expect=expect, seed=cseed))

    return Scenario(
        name=name,
        media=media,
        geometry=geometry,
        q_values=q_values,
        omega_values=omega_values,
        outputs=outputs,
        checks=tuple(checks),
        source=source,
        seed=seed,
        check_tolerance=check_tol,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario TOML file."""
    p = Path(path)
    try:
        with open(p, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(str(p), "scenario file not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(p), f"invalid TOML: {exc}") from None
    return parse_scenario(data, name_hint=p.stem)
