import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__ as VERSION
from . import constants as C
from .color import color
from .logger import check_logger


PASS, FAIL, UNCERTIFIED = "pass", "fail", "uncertified"


def _plain(value: Any) -> Any:
    """Converts numpy scalars and arrays to JSON-ready python values."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.integer, bool, np.bool_)):
        return value.item() if isinstance(value, np.generic) else value
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    return value


@dataclass
class CheckRecord:
    name: str
    measured: Any
    expected: Any
    tol: Optional[float]
    status: str
    note: str = ""

    @classmethod
    def upper_bound(cls, name: str, measured: float, tol: float, note: str = "") -> "CheckRecord":
        status = PASS if np.isfinite(measured) and measured <= tol else FAIL
        return cls(name, float(measured), 0.0, tol, status, note)

    @classmethod
    def equals(
        cls, name: str, measured: Any, expected: Any, certified: bool = True, note: str = ""
    ) -> "CheckRecord":
        if not certified:
            status = UNCERTIFIED
        else:
            status = PASS if _plain(measured) == _plain(expected) else FAIL
        return cls(name, measured, expected, None, status, note)

    @classmethod
    def within(
        cls, name: str, measured: float, expected: float, tol: float, note: str = ""
    ) -> "CheckRecord":
        status = PASS if abs(measured - expected) <= tol else FAIL
        return cls(name, float(measured), expected, tol, status, note)

    @classmethod
    def at_least(
        cls, name: str, measured: float, expected: float, tol: float, note: str = ""
    ) -> "CheckRecord":
        status = PASS if measured >= expected - tol else FAIL
        return cls(name, float(measured), expected, tol, status, note)

    @classmethod
    def holds(cls, name: str, flag: bool, measured: Any = None, note: str = "") -> "CheckRecord":
        return cls(name, measured, True, None, PASS if flag else FAIL, note)

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "name": self.name,
            "measured": _plain(self.measured),
            "expected": _plain(self.expected),
            "tol": self.tol,
            "status": self.status,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class VerificationReport:
    mesh: Optional[Dict[str, Any]] = None
    k: Optional[int] = None
    checks: List[CheckRecord] = field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    elapsed_s: Optional[float] = None
    version: str = VERSION

    @property
    def status(self) -> str:
        statuses = {check.status for check in self.checks}
        if FAIL in statuses:
            return FAIL
        return UNCERTIFIED if UNCERTIFIED in statuses else PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def add(self, record: CheckRecord, section: str = "check") -> CheckRecord:
        check_logger(section).info(
            f"{record.name}: {json.dumps(_plain(record.measured))} "
            f"[{color.status(record.status)}]"
        )
        self.checks.append(record)
        return record

    def merge(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)
        self.tables.update(other.tables)

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "version": self.version,
            "mesh": _plain(self.mesh),
            "k": self.k,
            "status": self.status,
            "checks": [check.to_dict() for check in self.checks],
            "elapsed_s": round(self.elapsed_s, 3) if timing and self.elapsed_s else None,
        }
        if self.tables:
            out["tables"] = _plain(self.tables)
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["name", "measured", "expected", "tol", "status"])
        for check in self.checks:
            row = check.to_dict()
            writer.writerow(
                [
                    row["name"],
                    json.dumps(row["measured"]),
                    json.dumps(row["expected"]),
                    "" if row["tol"] is None else repr(row["tol"]),
                    row["status"],
                ]
            )
        return buffer.getvalue()

    def to_markdown(self) -> str:
        lines = [f"# polyddr {self.version} report", ""]
        if self.mesh:
            lines.append(f"mesh: `{json.dumps(_plain(self.mesh), sort_keys=True)}`  ")
        if self.k is not None:
            lines.append(f"k: {self.k}  ")
        lines += [f"status: **{self.status}**", ""]

        lines += ["| check | measured | expected | tol | status |", "|---|---|---|---|---|"]
        for check in self.checks:
            row = check.to_dict()
            tol = "" if row["tol"] is None else f"{row['tol']:g}"
            lines.append(
                f"| {row['name']} | {json.dumps(row['measured'])} | "
                f"{json.dumps(row['expected'])} | {tol} | {row['status']} |"
            )

        for title, rows in sorted(self.tables.items()):
            if not rows:
                continue
            columns = list(rows[0])
            lines += ["", f"## {title}", ""]
            lines.append("| " + " | ".join(columns) + " |")
            lines.append("|" + "---|" * len(columns))
            for row in rows:
                lines.append("| " + " | ".join(str(row[c]) for c in columns) + " |")

        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "json", timing: bool = False) -> str:
        if fmt not in C.REPORT_FORMATS:
            raise ValueError(f"unknown report format: {fmt}")
        if fmt == "json":
            return self.to_json(timing)
        return self.to_csv() if fmt == "csv" else self.to_markdown()

    def write(self, directory: str, fmt: str = "json", timing: bool = False) -> str:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"report.{fmt}")
        with open(path, "w") as report_file:
            report_file.write(self.render(fmt, timing))
        return path
