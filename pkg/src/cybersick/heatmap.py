"""Spatial discomfort aggregation and experiment-table rendering.

Reports are binned on the (position_x, position_z) ground plane into a
fixed-resolution grid; each cell keeps per-level counts and the mean
reported level (0-3). Exports are deterministic: the CSV round-trips the
grid exactly, and the SVG draws one rect per occupied cell colored through
a fixed 4-stop palette.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .evaluation import ExperimentGrid
from .records import SessionRecord
from .registry import Scenario

N_LEVELS = 4

#: Level-0 through level-3 color stops (low -> high discomfort).
DEFAULT_PALETTE: tuple[str, ...] = ("#2c7bb6", "#abd9e9", "#fdae61", "#d7191c")


@dataclass(frozen=True)
class HeatGrid:
    bounds: tuple[float, float, float, float]  # min_x, min_z, max_x, max_z
    resolution: tuple[int, int]  # nx, nz
    counts: np.ndarray  # (nx, nz, 4) int64

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    def cell_counts(self, ix: int, iz: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.counts[ix, iz])

    def mean_level(self, ix: int, iz: int) -> float:
        cell = self.counts[ix, iz]
        total = cell.sum()
        if total == 0:
            raise ValueError(f"cell ({ix}, {iz}) holds no reports")
        return float(np.dot(cell, np.arange(N_LEVELS)) / total)

    def occupied_cells(self) -> list[tuple[int, int]]:
        ixs, izs = np.nonzero(self.counts.sum(axis=2))
        return sorted(zip(ixs.tolist(), izs.tolist()))

    def cell_center(self, ix: int, iz: int) -> tuple[float, float]:
        min_x, min_z, max_x, max_z = self.bounds
        nx, nz = self.resolution
        return (
            min_x + (ix + 0.5) * (max_x - min_x) / nx,
            min_z + (iz + 0.5) * (max_z - min_z) / nz,
        )


def _reported_points(sessions: Sequence[SessionRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs, zs, levels = [], [], []
    for session in sessions:
        for frame in session.frames:
            if frame.reported_discomfort is not None:
                xs.append(frame.position_x)
                zs.append(frame.position_z)
                levels.append(frame.reported_discomfort)
    return np.asarray(xs), np.asarray(zs), np.asarray(levels, dtype=np.int64)


def aggregate_track_heat(
    sessions: Sequence[SessionRecord],
    resolution: tuple[int, int] = (64, 64),
    bounds: tuple[float, float, float, float] | None = None,
) -> HeatGrid:
    """Bin every voiced report into the grid; errors with zero reports.

    Levels are always the full 0-3 scale regardless of the label scheme a
    classifier used. Pass shared ``bounds`` to make grids cell-compatible.
    """
    xs, zs, levels = _reported_points(sessions)
    if xs.size == 0:
        raise ValueError("no reported frames to aggregate")
    nx, nz = resolution
    if nx < 1 or nz < 1:
        raise ValueError("resolution must be positive")
    if bounds is None:
        bounds = (float(xs.min()), float(zs.min()), float(xs.max()), float(zs.max()))
    min_x, min_z, max_x, max_z = bounds
    span_x = max_x - min_x or 1.0
    span_z = max_z - min_z or 1.0
    ix = np.clip(((xs - min_x) / span_x * nx).astype(np.int64), 0, nx - 1)
    iz = np.clip(((zs - min_z) / span_z * nz).astype(np.int64), 0, nz - 1)
    counts = np.zeros((nx, nz, N_LEVELS), dtype=np.int64)
    np.add.at(counts, (ix, iz, levels), 1)
    return HeatGrid(bounds=(min_x, min_z, max_x, max_z), resolution=(nx, nz), counts=counts)


def facet_by(
    sessions: Sequence[SessionRecord],
    facet: str,
    resolution: tuple[int, int] = (64, 64),
) -> dict[object, HeatGrid]:
    """Disjoint per-profile-value grids sharing one coordinate frame."""
    if not hasattr(sessions[0].profile, facet):
        raise ValueError(f"{facet!r} is not a profile attribute")
    xs, zs, _ = _reported_points(sessions)
    if xs.size == 0:
        raise ValueError("no reported frames to aggregate")
    bounds = (float(xs.min()), float(zs.min()), float(xs.max()), float(zs.max()))
    partitions: dict[object, list[SessionRecord]] = {}
    for session in sessions:
        partitions.setdefault(getattr(session.profile, facet), []).append(session)
    return {
        value: aggregate_track_heat(group, resolution=resolution, bounds=bounds)
        for value, group in sorted(partitions.items(), key=lambda kv: str(kv[0]))
    }


# ---------------------------------------------------------------------------
# exports


def export_heat_csv(grid: HeatGrid) -> bytes:
    """One row per occupied cell; the leading comment carries the geometry."""
    buf = io.StringIO()
    min_x, min_z, max_x, max_z = grid.bounds
    nx, nz = grid.resolution
    buf.write(f"# bounds={min_x!r},{min_z!r},{max_x!r},{max_z!r} resolution={nx},{nz}\n")
    buf.write("ix,iz,center_x,center_z,count_0,count_1,count_2,count_3,mean\n")
    for ix, iz in grid.occupied_cells():
        cx, cz = grid.cell_center(ix, iz)
        c = grid.cell_counts(ix, iz)
        buf.write(
            f"{ix},{iz},{cx!r},{cz!r},{c[0]},{c[1]},{c[2]},{c[3]},{grid.mean_level(ix, iz)!r}\n"
        )
    return buf.getvalue().encode("utf-8")


def parse_heat_csv(data: bytes) -> HeatGrid:
    lines = data.decode("utf-8").splitlines()
    if not lines or not lines[0].startswith("# bounds="):
        raise ValueError("missing geometry comment line")
    meta = lines[0][2:]
    bounds_part, resolution_part = meta.split(" ")
    bounds = tuple(float(v) for v in bounds_part.split("=", 1)[1].split(","))
    nx, nz = (int(v) for v in resolution_part.split("=", 1)[1].split(","))
    counts = np.zeros((nx, nz, N_LEVELS), dtype=np.int64)
    for line in lines[2:]:
        if not line.strip():
            continue
        cells = line.split(",")
        ix, iz = int(cells[0]), int(cells[1])
        counts[ix, iz] = [int(c) for c in cells[4:8]]
    return HeatGrid(bounds=bounds, resolution=(nx, nz), counts=counts)  # type: ignore[arg-type]


def _blend(color_a: str, color_b: str, t: float) -> str:
    a = [int(color_a[i : i + 2], 16) for i in (1, 3, 5)]
    b = [int(color_b[i : i + 2], 16) for i in (1, 3, 5)]
    mixed = [round(x + (y - x) * t) for x, y in zip(a, b)]
    return "#" + "".join(f"{v:02x}" for v in mixed)


def level_color(mean_level: float, palette: tuple[str, ...] = DEFAULT_PALETTE) -> str:
    """Interpolate the 4-stop palette at a mean level in [0, 3]."""
    position = min(max(mean_level, 0.0), 3.0)
    low = min(int(position), 2)
    return _blend(palette[low], palette[low + 1], position - low)


def export_heat_svg(grid: HeatGrid, palette: tuple[str, ...] = DEFAULT_PALETTE) -> bytes:
    """Deterministic SVG: one unit rect per occupied cell, z flipped up."""
    nx, nz = grid.resolution
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{nx * 8}" height="{nz * 8}" '
        f'viewBox="0 0 {nx} {nz}">',
        f'<rect x="0" y="0" width="{nx}" height="{nz}" fill="#ffffff"/>',
    ]
    for ix, iz in grid.occupied_cells():
        color = level_color(grid.mean_level(ix, iz), palette)
        parts.append(f'<rect x="{ix}" y="{nz - 1 - iz}" width="1" height="1" fill="{color}"/>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# experiment tables


def _format_cell(accuracy: float, kappa: float) -> tuple[str, str]:
    return f"{accuracy * 100:.1f}%", f"{kappa:.4f}"


def emit_grid_tables(
    grid: ExperimentGrid,
    scenarios: tuple[Scenario, ...] = (Scenario.A, Scenario.B, Scenario.C),
) -> dict[str, str]:
    """One plain-text table per scheme: learner rows, (ACC, KPP) per scenario."""
    learners = []
    for report in grid.reports:
        if report.learner not in learners:
            learners.append(report.learner)
    schemes = []
    for report in grid.reports:
        if report.scheme not in schemes:
            schemes.append(report.scheme)
    missing = []
    for scheme in schemes:
        for scenario in scenarios:
            for learner in learners:
                try:
                    grid.cell(scenario, scheme, learner)
                except KeyError:
                    missing.append(f"({scenario.value}, {scheme.value}, {learner})")
    if missing:
        raise ValueError("incomplete grid; missing cells: " + ", ".join(missing))

    tables: dict[str, str] = {}
    name_width = max(len("learner"), max(len(name) for name in learners))
    for scheme in schemes:
        header = f"{'learner':<{name_width}}"
        for scenario in scenarios:
            header += f"  {scenario.value + ' ACC':>7} {scenario.value + ' KPP':>7}"
        lines = [f"{scheme.value} classification ({grid.k}-fold)", header]
        for learner in learners:
            row = f"{learner:<{name_width}}"
            for scenario in scenarios:
                report = grid.cell(scenario, scheme, learner)
                acc, kpp = _format_cell(report.accuracy, report.kappa)
                row += f"  {acc:>7} {kpp:>7}"
            lines.append(row)
        tables[scheme.value] = "\n".join(lines) + "\n"
    return tables
