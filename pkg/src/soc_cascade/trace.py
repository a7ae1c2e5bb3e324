"""Per-step simulation traces and their CSV form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TERMINAL_REASONS = ("converged", "max_steps", "saturated")


@dataclass
class SimTrace:
    steps: np.ndarray  # strictly increasing step indices, starting at 0
    affected_ratio: np.ndarray
    reason: str
    capacity_ratio: np.ndarray | None = None
    snapshots: list[np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.reason not in TERMINAL_REASONS:
            raise ValueError(f"unknown terminal reason: {self.reason!r}")

    @property
    def terminal_affected(self) -> float:
        return float(self.affected_ratio[-1])

    def time_to_half(self) -> int | None:
        """First step with affected ratio >= 0.5, None if never reached."""
        hit = np.flatnonzero(self.affected_ratio >= 0.5)
        return int(self.steps[hit[0]]) if len(hit) else None

    def to_csv(self) -> str:
        if self.capacity_ratio is None:
            lines = ["step,affected_ratio"]
            for s, a in zip(self.steps, self.affected_ratio):
                lines.append(f"{int(s)},{float(a)!r}")
        else:
            lines = ["step,affected_ratio,capacity_ratio"]
            for s, a, c in zip(self.steps, self.affected_ratio, self.capacity_ratio):
                lines.append(f"{int(s)},{float(a)!r},{float(c)!r}")
        return "\n".join(lines) + "\n"
