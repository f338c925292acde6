from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional


class CheckStatus(str, Enum):
    passed = "PASS"
    failed = "FAIL"
    skipped = "SKIPPED"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: CheckStatus
    measured: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""
    samples: Optional[int] = None


@dataclass
class VerificationReport:
    problem: str
    seed: int
    checks: List[CheckResult] = field(default_factory=list)
    max_conditioning: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.status != CheckStatus.failed for c in self.checks)

    def counts(self) -> Dict[str, int]:
        out = {status.value: 0 for status in CheckStatus}
        for check in self.checks:
            out[check.status.value] += 1
        return out

    def find(self, name: str) -> Optional[CheckResult]:
        return next((c for c in self.checks if c.name == name), None)
