"""CSV serialization of trajectories and stable distributions.

All numbers are written with 17 significant digits so files round-trip
losslessly; the S column is left blank where the entropy is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .esd import EsdResult
from .integrator import Trajectory


def _num(x: float) -> str:
    return f"{x:.17g}"


def trajectory_csv(traj: Trajectory) -> str:
    """Render a trajectory as CSV: t, f_1..f_N, R_1..R_N, mass, S, Q, F, H."""
    n = traj.params.N
    header = (
        ["t"]
        + [f"f_{j}" for j in range(1, n + 1)]
        + [f"R_{k}" for k in range(1, n + 1)]
        + ["mass", "S", "Q", "F", "H"]
    )
    rows = [",".join(header)]
    for t, state, diag in zip(traj.times, traj.states, traj.diagnostics):
        cells = [_num(t)]
        cells += [_num(v) for v in state.f]
        cells += [_num(v) for v in state.R]
        cells += [_num(diag.mass), "" if diag.S is None else _num(diag.S),
                  _num(diag.Q), _num(diag.F), _num(diag.H)]
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def esd_csv(trait: np.ndarray, esd: EsdResult) -> str:
    """Render a stable distribution as CSV: trait, f_tilde, R_tilde."""
    rows = ["trait,f_tilde,R_tilde"]
    for x, f, R in zip(trait, esd.f_tilde, esd.R_tilde):
        rows.append(f"{_num(x)},{_num(f)},{_num(R)}")
    return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class CsvTable:
    """Parsed CSV with named columns; cells are floats or None (blank)."""

    header: list[str]
    columns: dict[str, list[float | None]]

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, name: str) -> list[float | None]:
        if name not in self.columns:
            raise ParseError(f"missing column '{name}'", field=name)
        return self.columns[name]

    def numeric(self, name: str) -> np.ndarray:
        col = self.column(name)
        if any(v is None for v in col):
            raise ParseError(f"column '{name}' has blank cells", field=name)
        return np.array(col, dtype=float)


def read_csv(text: str) -> CsvTable:
    """Parse CSV text produced by this package."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty CSV")
    header = lines[0].split(",")
    if len(header) < 2:
        raise ParseError("CSV header must name at least two columns", line=1)
    cols: dict[str, list[float | None]] = {name: [] for name in header}
    if len(cols) != len(header):
        raise ParseError("duplicate column names", line=1)
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(
                f"expected {len(header)} cells, got {len(cells)}", line=lineno
            )
        for name, cell in zip(header, cells):
            if cell == "":
                cols[name].append(None)
                continue
            try:
                cols[name].append(float(cell))
            except ValueError as err:
                raise ParseError(f"not a number: {cell!r}", line=lineno) from err
    if not cols[header[0]]:
        raise ParseError("CSV has a header but no data rows")
    return CsvTable(header=header, columns=cols)
