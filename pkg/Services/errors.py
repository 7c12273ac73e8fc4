# errors.py
from __future__ import annotations

from typing import Optional


class SignalBenchError(ValueError):
    """Base for every error the CLI turns into a nonzero exit code."""


class ConfigurationError(SignalBenchError):
    pass


class PlanScheduleError(SignalBenchError):
    pass


class RuleBaseError(SignalBenchError):
    pass


class ScenarioError(SignalBenchError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.message = message
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")


class SensorDataError(SignalBenchError):
    pass
