"""
RunReport: the per-check pass/fail ledger behind `verify`, `sweep`, `run`
and `report`.
"""

import logging
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from utils.errors import ContractViolation

logger = logging.getLogger(__name__)


class CheckResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    passed: bool
    measured: float
    threshold: float
    comparison: Literal["<=", ">="] = "<="


class RunReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: str
    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)
    error: Optional[str] = None
    duration_s: float = 0.0

    def add(self, name, measured, threshold, comparison="<="):
        if any(c.name == name for c in self.checks):
            raise ContractViolation(f"check '{name}' already recorded")
        measured = float(measured)
        if comparison == "<=":
            passed = measured <= threshold
        else:
            passed = measured >= threshold
        check = CheckResult(
            name=name, passed=passed, measured=measured, threshold=float(threshold), comparison=comparison
        )
        self.checks.append(check)
        logger.debug("check %s: %.3e %s %.3e -> %s", name, measured, comparison, threshold, passed)
        return check

    def fail(self, error):
        self.error = str(error)
        logger.error("%s %s failed: %s", self.command, self.scenario, error)

    @property
    def passed(self):
        return self.error is None and bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def to_json_dict(self):
        """Everything except the wall-clock duration, so reruns compare byte-identical."""
        data = self.model_dump(mode="json", exclude={"duration_s"})
        data["passed"] = self.passed
        return data

    def to_text(self):
        lines = [
            f"scenario: {self.scenario}",
            f"command:  {self.command}",
            f"status:   {'PASS' if self.passed else 'FAIL'}",
            f"duration: {self.duration_s:.3f} s",
        ]
        for key in sorted(self.parameters):
            lines.append(f"  {key} = {self.parameters[key]}")
        if self.error:
            lines.append(f"error: {self.error}")
        width = max([len(c.name) for c in self.checks] + [5])
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"[{mark}] {c.name:<{width}}  {c.measured:.3e} {c.comparison} {c.threshold:.3e}")
        return "\n".join(lines) + "\n"
