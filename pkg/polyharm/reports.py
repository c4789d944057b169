"""Report records shared by the verification modules and the CLI.

`ResidualReport` is what every check returns: one entry per distinct
component (with its multiplicity in the full m^ell family), a pass flag, and
free-form details. `RunReport` wraps a command's outcome for the CLI.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from .field_algebra import RadialScalar, is_zero, to_text

if TYPE_CHECKING:
    from .deformation import AdmissibilityRecord, ConstraintPoly, DeformationParameter

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_ERROR = "error"

EXIT_CODES = {STATUS_PASS: 0, STATUS_FAIL: 1, STATUS_ERROR: 2}


@dataclass
class ComponentResidual:
    index: tuple[int, ...]
    multiplicity: int = 1
    exact_zero: bool | None = None
    residual: str | None = None
    magnitude: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "index": list(self.index),
            "multiplicity": self.multiplicity,
        }
        if self.exact_zero is not None:
            out["exact_zero"] = self.exact_zero
        if self.residual is not None:
            out["residual"] = self.residual
        if self.magnitude is not None:
            out["magnitude"] = float(self.magnitude)
        return out


@dataclass
class ResidualReport:
    equation: str
    components: list[ComponentResidual]
    passed: bool
    residual_poly: ConstraintPoly | None = None
    tolerance: float | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def exact(
        cls,
        equation: str,
        entries: Iterable[tuple[tuple[int, ...], RadialScalar, int]],
        **kwargs: Any,
    ) -> ResidualReport:
        """Build a symbolic report from (index, residual field, multiplicity)."""
        components = []
        for index, residual, mult in entries:
            zero = is_zero(residual)
            components.append(
                ComponentResidual(
                    index=tuple(index),
                    multiplicity=mult,
                    exact_zero=zero,
                    residual=None if zero else to_text(residual),
                )
            )
        passed = all(c.exact_zero for c in components)
        return cls(equation=equation, components=components, passed=passed, **kwargs)

    @property
    def failures(self) -> list[ComponentResidual]:
        if self.tolerance is None:
            return [c for c in self.components if not c.exact_zero]
        return [
            c
            for c in self.components
            if c.magnitude is None or c.magnitude > self.tolerance
        ]

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "equation": self.equation,
            "passed": self.passed,
            "components": [c.to_dict() for c in self.components],
        }
        if self.residual_poly is not None:
            out["residual_poly"] = self.residual_poly.to_dict()
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.details:
            out["details"] = self.details
        return out


def combine(equation: str, reports: Iterable[ResidualReport]) -> ResidualReport:
    """One report whose pass flag is the conjunction of the parts."""
    reports = list(reports)
    return ResidualReport(
        equation=equation,
        components=[],
        passed=all(r.passed for r in reports),
        details={"checks": [r.to_dict() for r in reports]},
    )


@dataclass
class RunReport:
    command: str
    parameters: dict[str, Any]
    status: str
    payload: dict[str, Any]
    version: str
    seed: int | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "status": self.status,
            "payload": self.payload,
            "version": self.version,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [
            f"command: {self.command}",
            f"status: {self.status}",
            f"version: {self.version}",
            f"seed: {self.seed}",
        ]
        for key, value in self.parameters.items():
            lines.append(f"parameter.{key}: {value}")
        for key, value in self.payload.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value)
            lines.append(f"{key}: {value}")
        return "\n".join(lines)


CSV_COLUMNS = ("ell", "m", "solvable", "branch", "t_minus", "t_plus", "map_exists")


def _csv_bool(flag: bool) -> str:
    return "true" if flag else "false"


def _csv_t(root: DeformationParameter | None) -> str:
    return "" if root is None else f"{root.value:.12f}"


def admissibility_csv(records: Iterable[AdmissibilityRecord]) -> str:
    """Enumeration table in the fixed column order, one row per (l, m)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(
            [
                rec.ell,
                rec.m,
                _csv_bool(rec.equation_solvable),
                rec.which_branch,
                _csv_t(rec.t_minus),
                _csv_t(rec.t_plus),
                _csv_bool(rec.map_exists),
            ]
        )
    return buf.getvalue()
