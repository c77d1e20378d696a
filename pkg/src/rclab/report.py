"""Flat machine-readable run reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .model import DerivedConstants


@dataclass
class RunReport:
    """Everything a command run produced, flattened for report.json.

    verdicts holds exactly the named checks the subcommand performed; the
    optional summary blocks stay None when the subcommand did not compute
    them.
    """

    scenario_name: str
    constants: DerivedConstants | None = None
    trajectory_summary: dict[str, float] | None = None
    esd_summary: dict[str, float] | None = None
    comparison: dict[str, float] | None = None
    analysis: dict[str, object] | None = None
    verdicts: dict[str, bool] = field(default_factory=dict)

    def all_passed(self) -> bool:
        return all(self.verdicts.values())

    def flat(self) -> dict[str, object]:
        out: dict[str, object] = {"scenario_name": self.scenario_name}
        if self.constants is not None:
            c = self.constants
            out.update({
                "constants.gamma": c.gamma,
                "constants.K_M": c.K_M,
                "constants.m_lower": c.m_lower,
                "constants.m_upper": c.m_upper,
                "constants.beta": c.beta,
                "constants.M0": c.M0,
                "constants.M_tilde": c.M_tilde,
                "constants.mu0": c.mu0,
            })
        for prefix, block in (
            ("trajectory", self.trajectory_summary),
            ("esd", self.esd_summary),
            ("comparison", self.comparison),
            ("analysis", self.analysis),
        ):
            if block is not None:
                for key, value in block.items():
                    out[f"{prefix}.{key}"] = value
        for key, value in self.verdicts.items():
            out[f"verdicts.{key}"] = value
        return out

    def to_json(self) -> str:
        flat = {k: _jsonable(v) for k, v in self.flat().items()}
        return json.dumps(flat, sort_keys=True, indent=2) + "\n"


def _jsonable(value: object) -> object:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value
