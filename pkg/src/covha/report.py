"""Check results and the verification report."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class CheckResult:
    """One numerical check: passes when ``value <= bound`` (or when skipped).

    For residual checks ``value`` is the worst residual and ``bound`` the
    tolerance; for ratio checks such as the contraction bound ``value`` is the
    worst ratio.
    """

    id: str
    description: str
    value: float
    bound: float
    seed: int | None = None
    skipped: bool = False
    data: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.skipped or bool(self.value <= self.bound)

    def as_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def worst(results: list[CheckResult], id: str, description: str, bound: float, **kw) -> CheckResult:
    """Fold several results into one keeping the largest value."""
    live = [r for r in results if not r.skipped]
    value = max((r.value for r in live), default=0.0)
    return CheckResult(id, description, value, bound, skipped=not live, **kw)
