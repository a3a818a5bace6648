"""Structured verification reports with canonical, byte-stable serialization.

Canonical form: keys sorted, floats rendered with 17 significant digits,
LF line endings.  Wall time is kept on the object for interactive display
but excluded from the canonical bytes so identical (config, seed) pairs
emit identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import __version__

REPORT_SCHEMA = {
    "tool_version": "str",
    "calibration": {
        "kappa": "float",
        "riemann_sign_branch": "int",
        "schouten_branch": "int",
        "orientation_sign": "int",
        "flat_scalar_normalization": "float",
    },
    "seed": "int",
    "all_passed": "bool",
    "checks": [
        {
            "name": "str",
            "points": "int",
            "max_residual": "float",
            "tolerance": "float",
            "comparison": "str ('<=' or '>=')",
            "passed": "bool",
            "note": "str",
        }
    ],
}


@dataclass
class CheckEntry:
    name: str
    points: int
    max_residual: float
    tolerance: float
    comparison: str = "<="  # ">=" marks lower-bound (must-be-nonzero) checks
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.comparison == "<=":
            return self.max_residual <= self.tolerance
        return self.max_residual >= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "points": self.points,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class Report:
    calibration: dict
    seed: int
    entries: list[CheckEntry] = field(default_factory=list)
    tool_version: str = __version__
    wall_time_s: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "calibration": dict(self.calibration),
            "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": [e.to_dict() for e in self.entries],
        }


def _canon(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g")
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{out}"'
    if isinstance(obj, dict):
        items = ", ".join(f"{_canon(str(k))}: {_canon(v)}" for k, v in sorted(obj.items()))
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_canon(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (_canon(report.to_dict()) + "\n").encode()
    if fmt == "text":
        lines = [
            f"# projlift {report.tool_version}",
            "# calibration: "
            + " ".join(f"{k}={v}" for k, v in sorted(report.calibration.items())),
            f"# seed: {report.seed}",
        ]
        for e in report.entries:
            status = "PASS" if e.passed else "FAIL"
            line = (
                f"{status} {e.name} points={e.points} "
                f"max={e.max_residual:.3e} {e.comparison} tol={e.tolerance:.3e}"
            )
            if e.note:
                line += f"  # {e.note}"
            lines.append(line)
        total = len(report.entries)
        good = sum(e.passed for e in report.entries)
        lines.append(f"# result: {'PASS' if report.all_passed else 'FAIL'} ({good}/{total})")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")


def validate_report_dict(d: dict) -> None:
    """Light structural validation of an emitted report dictionary."""
    required = {"tool_version": str, "calibration": dict, "seed": int, "all_passed": bool, "checks": list}
    for key, typ in required.items():
        if key not in d:
            raise ValueError(f"report missing key {key!r}")
        if not isinstance(d[key], typ):
            raise ValueError(f"report key {key!r} has wrong type")
    for entry in d["checks"]:
        for key, typ in (
            ("name", str),
            ("points", int),
            ("max_residual", (int, float)),
            ("tolerance", (int, float)),
            ("comparison", str),
            ("passed", bool),
            ("note", str),
        ):
            if key not in entry:
                raise ValueError(f"check entry missing key {key!r}")
            if not isinstance(entry[key], typ):
                raise ValueError(f"check entry key {key!r} has wrong type")
        if entry["comparison"] not in ("<=", ">="):
            raise ValueError("comparison must be '<=' or '>='")
