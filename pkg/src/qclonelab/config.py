"""Line-oriented scenario configuration files.

One scenario per file; ``key = value`` lines with dotted section keys, blank
lines and ``#`` comments ignored.  Unknown keys are rejected with the line
number.  Missing keys take documented defaults; ``kind`` and the overlap
values for conservation scenarios are required.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .tolerances import ASSERT_TOL, RESIDUAL_TOL

KINDS = ("nosignal", "conservation", "gram-equivalence")

DEFAULT_SEED = 7

# key -> (type, default); default None means required.
_COMMON_SCHEMA: dict[str, tuple[type, object]] = {
    "tolerance.assert": (float, ASSERT_TOL),
    "tolerance.residual": (float, RESIDUAL_TOL),
    "format": (str, "table"),
    "seed": (int, DEFAULT_SEED),
}

_BASIS_KEYS: dict[str, tuple[type, object]] = {}
for _b in ("basis1", "basis2"):
    _BASIS_KEYS[f"{_b}.theta"] = (float, None)
    _BASIS_KEYS[f"{_b}.phi"] = (float, None)
    for _part in ("psi", "alpha"):
        _BASIS_KEYS[f"{_b}.{_part}.theta"] = (float, None)
        _BASIS_KEYS[f"{_b}.{_part}.phi"] = (float, None)

_SCHEMAS: dict[str, dict[str, tuple[type, object]]] = {
    "nosignal": {
        **_COMMON_SCHEMA,
        **_BASIS_KEYS,
        "machine.mode": (str, "termwise"),
        "machine.ancilla_dim": (int, 4),
        "machine.cross_outputs": (str, "passthrough"),
    },
    "conservation": {
        **_COMMON_SCHEMA,
        "overlap.a": (float, None),
        "overlap.b": (float, None),
        "overlap.c": (float, None),
        "overlap.a_phase": (float, 0.0),
        "overlap.b_phase": (float, 0.0),
        "overlap.c_phase": (float, 0.0),
        "machine.ancilla_dim": (int, 4),
        "branch.weight": (float, 0.5),
    },
    "gram-equivalence": {
        **_COMMON_SCHEMA,
        "family.dimension": (int, 4),
        "family.size": (int, 3),
        "family.target_dimension": (int, 0),  # 0: same as family.dimension
    },
}

_REQUIRED: dict[str, tuple[str, ...]] = {
    "nosignal": (),
    "conservation": ("overlap.a", "overlap.b", "overlap.c"),
    "gram-equivalence": (),
}

_CHOICES: dict[str, tuple[str, ...]] = {
    "format": ("table", "csv", "json"),
    "machine.mode": ("termwise", "isometry"),
    "machine.cross_outputs": ("passthrough",),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    values: dict[str, object]

    def get(self, key: str):
        return self.values[key]

    def echo(self) -> dict[str, str]:
        """Fully resolved key/value strings, defaults included."""
        out = {"kind": self.kind}
        for k, v in self.values.items():
            out[k] = repr(v) if isinstance(v, float) else str(v)
        return out

    def with_overrides(self, overrides: dict[str, float]) -> "ScenarioConfig":
        schema = _SCHEMAS[self.kind]
        vals = dict(self.values)
        for key, value in overrides.items():
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} for kind {self.kind!r}")
            typ = schema[key][0]
            if typ not in (float, int):
                raise ConfigError(f"key {key!r} is not numeric and cannot be swept")
            vals[key] = typ(value)
        return ScenarioConfig(self.kind, vals)

    def basis_angles(self, which: str) -> tuple[float, float, float, float]:
        """(psi_theta, psi_phi, alpha_theta, alpha_phi), honoring the
        ``basisN.theta``/``basisN.phi`` shorthand that sets both parts."""
        out = []
        for part in ("psi", "alpha"):
            for angle in ("theta", "phi"):
                specific = self.values.get(f"{which}.{part}.{angle}")
                shared = self.values.get(f"{which}.{angle}")
                if specific is not None and shared is not None:
                    raise ConfigError(
                        f"{which}.{part}.{angle} conflicts with shorthand {which}.{angle}"
                    )
                value = specific if specific is not None else shared
                out.append(float(value) if value is not None else 0.0)
        return tuple(out)


def parse_config_text(
    text: str, default_overrides: dict[str, object] | None = None
) -> ScenarioConfig:
    """Parse one scenario config.  ``default_overrides`` replaces schema
    defaults (for environment-supplied tolerances); explicit file keys win."""
    raw: dict[str, str] = {}
    kind = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key == "kind":
            kind = value
            continue
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    if kind is None:
        raise ConfigError("missing required key 'kind'")
    if kind not in KINDS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {KINDS}")
    schema = _SCHEMAS[kind]

    values: dict[str, object] = {}
    for key, value in raw.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for kind {kind!r}")
        typ = schema[key][0]
        try:
            values[key] = typ(value)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: cannot parse {value!r} as {typ.__name__}") from exc
        if key in _CHOICES and values[key] not in _CHOICES[key]:
            raise ConfigError(
                f"key {key!r}: {value!r} is not one of {_CHOICES[key]}"
            )

    for key in _REQUIRED[kind]:
        if key not in values:
            raise ConfigError(f"missing required key {key!r} for kind {kind!r}")

    overrides = default_overrides or {}
    for key, value in overrides.items():
        if key in schema and key not in values:
            values[key] = schema[key][0](value)
    for key, (_typ, default) in schema.items():
        if key not in values and default is not None:
            values[key] = default

    _validate_ranges(kind, values)
    return ScenarioConfig(kind, values)


def _validate_ranges(kind: str, values: dict[str, object]) -> None:
    if kind == "conservation":
        for key in ("overlap.a", "overlap.b", "overlap.c"):
            v = float(values[key])
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"key {key!r}: modulus {v!r} outside [0, 1]")
        w = float(values["branch.weight"])
        if not 0.0 <= w <= 1.0:
            raise ConfigError(f"key 'branch.weight': {w!r} outside [0, 1]")
    if kind == "nosignal":
        for key, value in values.items():
            if key.endswith(".theta") and not 0.0 <= float(value) <= math.pi:
                raise ConfigError(f"key {key!r}: {value!r} outside [0, pi]")
            if key.endswith(".phi") and not 0.0 <= float(value) < 2.0 * math.pi:
                raise ConfigError(f"key {key!r}: {value!r} outside [0, 2*pi)")
    for key, minimum in (("machine.ancilla_dim", 2), ("family.dimension", 2), ("family.size", 1)):
        if key in values and int(values[key]) < minimum:
            raise ConfigError(f"key {key!r}: must be >= {minimum}")


def load_config(
    path: str, default_overrides: dict[str, object] | None = None
) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), default_overrides)


def parse_grid_axis(spec: str) -> tuple[str, list[float]]:
    """Parse ``key=lo:hi:step`` into the axis key and its value list."""
    if "=" not in spec:
        raise ConfigError(f"grid axis {spec!r}: expected key=lo:hi:step")
    key, _, rng = spec.partition("=")
    parts = rng.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid axis {spec!r}: expected lo:hi:step")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"grid axis {spec!r}: non-numeric bound") from exc
    if step <= 0:
        raise ConfigError(f"grid axis {spec!r}: step must be positive")
    if hi < lo:
        raise ConfigError(f"grid axis {spec!r}: hi must be >= lo")
    values = []
    k = 0
    while True:
        v = lo + k * step
        if v > hi + 1e-9:
            break
        values.append(round(v, 12))
        k += 1
    if not values:
        raise ConfigError(f"grid axis {spec!r}: empty grid")
    return key.strip(), values


def grid_points(config: ScenarioConfig, axis_specs) -> list[ScenarioConfig]:
    """Cartesian product of the axes, lexicographic in the given axis order."""
    axes = [parse_grid_axis(spec) for spec in axis_specs]
    if not axes:
        raise ConfigError("sweep needs at least one grid axis")
    points = [config.with_overrides({})]
    for key, values in axes:
        points = [
            p.with_overrides({key: v}) for p in points for v in values
        ]
    return points
