"""Pass/fail records produced by the property checks and consumed by the verify suites."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        out["passed"] = bool(self.passed)
        out["measured"] = float(self.measured)
        out["bound"] = float(self.bound)
        return out
