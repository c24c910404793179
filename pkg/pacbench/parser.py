"""Text formats: profile files, Eb/N0 grids and sweep results."""

import csv
import io
import json
import re
from pathlib import Path
from typing import List

from .core import InvalidInputError
from .pretransform import RateProfile
from .runner import SweepRow

RESULTS_COLUMNS = [
    "ebn0_db",
    "frames",
    "frame_errors",
    "fer",
    "anv",
    "budget_exceedances",
    "dispersion_fer",
    "wall_time_s",
]

# start:step:stop, e.g. 1:0.5:3 -> 1, 1.5, 2, 2.5, 3
RANGE_PATTERN = re.compile(
    r'^\s*(-?\d+(?:\.\d*)?)\s*:\s*(\d+(?:\.\d*)?)\s*:\s*(-?\d+(?:\.\d*)?)\s*$'
)


def parse_ebn0_grid(text: str) -> List[float]:
    """Parse a comma-separated list of dB points or a start:step:stop range."""
    if match := RANGE_PATTERN.match(text):
        start, step, stop = (float(g) for g in match.groups())
        if step <= 0:
            raise InvalidInputError(f"Grid step must be positive: {text!r}")
        count = int(round((stop - start) / step)) + 1
        if count < 1:
            raise InvalidInputError(f"Empty grid: {text!r}")
        return [round(start + i * step, 10) for i in range(count)]
    try:
        points = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InvalidInputError(f"Invalid Eb/N0 grid: {text!r}") from None
    if not points:
        raise InvalidInputError("Eb/N0 grid is empty")
    return points


def format_profile(profile: RateProfile) -> str:
    """First line "N K", then the information positions, one per line."""
    lines = [f"{profile.N} {profile.k}"]
    lines.extend(str(p) for p in profile.positions)
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> RateProfile:
    tokens = text.split()
    if len(tokens) < 2:
        raise InvalidInputError("Profile file needs a header line 'N K'")
    try:
        numbers = [int(t) for t in tokens]
    except ValueError:
        raise InvalidInputError("Profile file must contain integers only") from None
    N, K = numbers[0], numbers[1]
    positions = numbers[2:]
    if len(positions) != K:
        raise InvalidInputError(f"Profile header says K={K} but lists {len(positions)} positions")
    if positions != sorted(set(positions)):
        raise InvalidInputError("Profile positions must be strictly ascending")
    return RateProfile.from_positions(N, positions)


def read_profile(path: Path) -> RateProfile:
    with open(path, encoding="utf-8") as f:
        return parse_profile(f.read())


def format_results_csv(rows: List[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULTS_COLUMNS)
    for r in rows:
        writer.writerow([
            f"{r.ebn0_db:g}",
            r.frames,
            r.frame_errors,
            f"{r.fer:.6e}",
            f"{r.anv:.6f}",
            r.budget_exceedances,
            f"{r.dispersion_fer:.6e}",
            f"{r.wall_time_s:.3f}",
        ])
    return buf.getvalue()


def parse_results_csv(text: str) -> List[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != RESULTS_COLUMNS:
        raise InvalidInputError(f"Unexpected results header: {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(
            ebn0_db=float(rec["ebn0_db"]),
            frames=int(rec["frames"]),
            frame_errors=int(rec["frame_errors"]),
            fer=float(rec["fer"]),
            anv=float(rec["anv"]),
            budget_exceedances=int(rec["budget_exceedances"]),
            dispersion_fer=float(rec["dispersion_fer"]),
            wall_time_s=float(rec["wall_time_s"]),
        ))
    return rows


def format_results_json(rows: List[SweepRow], config: dict, metadata: dict) -> str:
    return json.dumps(
        {"config": config, "metadata": metadata, "rows": [r.to_dict() for r in rows]},
        indent=2,
    ) + "\n"
