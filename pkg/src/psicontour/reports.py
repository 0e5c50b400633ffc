"""Check reports shared by the symbol checkers and the verification suite."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(np.real(v)), "im": float(np.imag(v))}
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


@dataclass
class CheckReport:
    """Outcome of one numerical check.

    ``margin`` is the worst-case slack (tolerance minus observed error, or bound
    minus observed value); the check fails iff the margin is negative.
    """

    name: str
    passed: bool
    margin: float
    samples: int
    location: object = None
    seed: int | None = None
    tolerance: float | None = None
    details: dict = field(default_factory=dict)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: margin={self.margin:.3e} samples={self.samples}"

    def to_dict(self):
        return _plain(asdict(self))
