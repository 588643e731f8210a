"""Report values returned by the validators and family checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

DEFAULT_MAX_INSTANCES = 10**6
DEFAULT_MAX_STEPS = 10**8


class FamilyTooLarge(RuntimeError):
    """Raised when an enumeration or simulation would exceed its guard."""


@dataclass
class Violation:
    kind: str
    message: str
    where: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "message": self.message, "where": _jsonable(self.where)}


@dataclass
class Report:
    """Outcome of a check; truthy iff no violations were recorded."""

    violations: list[Violation] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def add(self, kind: str, message: str, **where: Any) -> None:
        self.violations.append(Violation(kind, message, where))

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]

    def to_json(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "checked": self.checked,
            "violations": [v.to_json() for v in self.violations],
        }

    def __str__(self) -> str:
        if self.ok:
            return f"ok ({self.checked} checked)"
        return "; ".join(f"{v.kind}: {v.message}" for v in self.violations)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj
