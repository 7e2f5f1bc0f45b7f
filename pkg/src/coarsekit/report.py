"""Structured pass/fail reports shared by the CLI scenarios.

A report is a flat list of assertion rows.  Each row states what was checked,
where the expected value comes from (a definition, a brute-force oracle, or a
stated bound), the measured value, the bound it is compared against, and the
verdict.  JSON and CSV renderings are deterministic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .io import dumps_canonical

__all__ = ["ReportRow", "Report", "SOURCES"]

SOURCES = ("definition", "oracle", "stated-bound")


@dataclass
class ReportRow:
    id: str
    description: str
    source: str
    value: float | int | str | None
    bound: float | int | str | None
    passed: bool

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise ValueError(f"unknown source tag {self.source!r}")

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "source": self.source,
            "value": self.value,
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass
class Report:
    scenario: str
    seed: int | None = None
    rows: list[ReportRow] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def add(
        self,
        id: str,
        description: str,
        source: str,
        value,
        bound,
        passed: bool,
    ) -> ReportRow:
        row = ReportRow(
            id=id, description=description, source=source,
            value=value, bound=bound, passed=bool(passed),
        )
        self.rows.append(row)
        return row

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "scenario": self.scenario,
            "seed": self.seed,
            "passed": self.all_passed,
            "rows": [r.as_dict() for r in self.rows],
            "extras": self.extras,
        }

    def write_json(self, path) -> Path:
        path = Path(path)
        path.write_text(dumps_canonical(self.to_dict()))
        return path

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "description", "source", "value", "bound", "passed"])
            for r in self.rows:
                writer.writerow(
                    [r.id, r.description, r.source, r.value, r.bound, int(r.passed)]
                )
        return path

    def summary_lines(self) -> list[str]:
        out = []
        for r in self.rows:
            tag = "PASS" if r.passed else "FAIL"
            out.append(f"[{tag}] {r.id}: {r.description} (value={r.value}, bound={r.bound})")
        return out
