"""Verification records shared by the library and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS, FAIL, FLAGGED = "PASS", "FAIL", "FLAGGED"


@dataclass
class Check:
    statement: str
    backend: str
    verdict: str
    witness: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == PASS

    def record(self) -> dict:
        return {
            "statement": self.statement,
            "backend": self.backend,
            "verdict": self.verdict,
            "witness": {k: self.witness[k] for k in sorted(self.witness)},
        }


def check(statement, backend, passed: bool, **witness) -> Check:
    return Check(statement, backend, PASS if passed else FAIL, witness)


def flagged(statement, backend, reason) -> Check:
    return Check(statement, backend, FLAGGED, {"reason": reason})


@dataclass
class Report:
    command: str
    presentation: str = ""
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    def extend(self, checks):
        self.checks.extend(checks)
        return self

    @property
    def ok(self) -> bool:
        return not self.errors and all(c.verdict != FAIL for c in self.checks)

    def record(self) -> dict:
        return {
            "command": self.command,
            "presentation": self.presentation,
            "ok": self.ok,
            "checks": [c.record() for c in self.checks],
            "data": self.data,
            "errors": list(self.errors),
        }
