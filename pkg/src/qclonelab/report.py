"""Byte-stable scenario reports.

All numbers render at 12 significant digits with lowercase exponents, so a
report for a given configuration is identical across runs and machines.  The
JSON rendering is the canonical machine format and parses back losslessly;
the CSV rendering is the flat scalar record used for sweeps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def format_scalar(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # collapse -0.0
    return f"{x:.11e}"


def format_complex(z: complex) -> str:
    z = complex(z)
    re = format_scalar(z.real)
    im = format_scalar(z.imag)
    return f"{re}{im}j" if im.startswith("-") else f"{re}+{im}j"


@dataclass(frozen=True)
class Verdict:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation < self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name} deviation={format_scalar(self.deviation)} "
            f"tolerance={format_scalar(self.tolerance)}"
        )


@dataclass(frozen=True)
class ScenarioReport:
    """Echoed configuration plus computed quantities and named verdicts."""

    kind: str
    config: dict[str, str]
    scalars: dict[str, float]
    matrices: dict[str, np.ndarray] = field(default_factory=dict)
    verdicts: tuple[Verdict, ...] = ()

    @property
    def all_pass(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": dict(sorted(self.config.items())),
            "scalars": {k: format_scalar(v) for k, v in self.scalars.items()},
            "matrices": {
                name: [[format_complex(z) for z in row] for row in np.asarray(mat)]
                for name, mat in self.matrices.items()
            },
            "verdicts": [
                {
                    "name": v.name,
                    "passed": v.passed,
                    "deviation": format_scalar(v.deviation),
                    "tolerance": format_scalar(v.tolerance),
                }
                for v in self.verdicts
            ],
        }

    def render(self, fmt: str = "table") -> str:
        if fmt == "json":
            return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            return render_csv([self])
        if fmt == "table":
            return self._render_table()
        raise ValueError(f"unknown report format {fmt!r}")

    def _render_table(self) -> str:
        lines = [f"kind = {self.kind}", "", "[config]"]
        lines += [f"{k} = {v}" for k, v in sorted(self.config.items())]
        lines += ["", "[scalars]"]
        lines += [f"{k} = {format_scalar(v)}" for k, v in self.scalars.items()]
        for name, mat in self.matrices.items():
            lines += ["", f"[matrix {name}]"]
            for row in np.asarray(mat):
                lines.append("  ".join(format_complex(z) for z in row))
        lines += ["", "[verdicts]"]
        lines += [v.line() for v in self.verdicts]
        lines += ["", f"overall = {'PASS' if self.all_pass else 'FAIL'}"]
        return "\n".join(lines) + "\n"

    def csv_row(self) -> tuple[list[str], list[str]]:
        header: list[str] = ["kind"]
        row: list[str] = [self.kind]
        for k, v in sorted(self.config.items()):
            header.append(f"config.{k}")
            row.append(v)
        for k, v in self.scalars.items():
            header.append(k)
            row.append(format_scalar(v))
        for v in self.verdicts:
            header.append(f"verdict.{v.name}")
            row.append("1" if v.passed else "0")
            header.append(f"verdict.{v.name}.deviation")
            row.append(format_scalar(v.deviation))
        return header, row

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScenarioReport):
            return NotImplemented
        return self.render("json") == other.render("json")


def render_csv(reports) -> str:
    reports = list(reports)
    if not reports:
        return "\n"
    header, first_row = reports[0].csv_row()
    lines = [",".join(header), ",".join(first_row)]
    for rep in reports[1:]:
        rep_header, row = rep.csv_row()
        if rep_header != header:
            raise ValueError("reports have mismatched columns")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> ScenarioReport:
    """Parse the JSON rendering back into a report."""
    doc = json.loads(text)
    return ScenarioReport(
        kind=doc["kind"],
        config=dict(doc["config"]),
        scalars={k: float(v) for k, v in doc["scalars"].items()},
        matrices={
            name: np.array([[complex(z) for z in row] for row in rows], dtype=complex)
            for name, rows in doc["matrices"].items()
        },
        verdicts=tuple(
            Verdict(v["name"], float(v["deviation"]), float(v["tolerance"]))
            for v in doc["verdicts"]
        ),
    )
