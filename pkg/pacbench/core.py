"""Core data models, errors and storage helpers for pac-bench."""

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional
import json
import os
import socket


class InvalidInputError(ValueError):
    """Raised for malformed lengths, indices, distributions or parameters."""


class PolynomialError(InvalidInputError):
    """Raised when a connection polynomial cannot be parsed or is invalid."""


class ProtocolError(RuntimeError):
    """Raised when the demapper is driven out of order."""


class UnsatisfiableConstructionError(ValueError):
    """Raised when a profile merge cannot reach its target dimension.

    The partially built profile and its dimension are kept on the exception
    so callers can report how far the construction got.
    """

    def __init__(self, message: str, achieved_k: int, profile=None):
        super().__init__(message)
        self.achieved_k = achieved_k
        self.profile = profile


class QuadratureError(ArithmeticError):
    """Raised when Gauss-Hermite integration fails its convergence gate."""


@dataclass
class RunMetadata:
    """Metadata for a simulation run stored under runs/<run_id>/."""
    run_id: str
    machine: str
    started_at: datetime
    completed_at: Optional[datetime]
    duration_seconds: Optional[float]
    config: dict
    code: dict
    status: str  # "running", "completed", "failed", "interrupted"
    rows: int = 0
    notes: dict = field(default_factory=dict)
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "machine": self.machine,
            "started_at": self.started_at.isoformat(),
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
            "duration_seconds": self.duration_seconds,
            "config": self.config,
            "code": self.code,
            "status": self.status,
            "rows": self.rows,
            "notes": self.notes,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunMetadata":
        return cls(
            run_id=d["run_id"],
            machine=d["machine"],
            started_at=datetime.fromisoformat(d["started_at"]),
            completed_at=datetime.fromisoformat(d["completed_at"]) if d.get("completed_at") else None,
            duration_seconds=d.get("duration_seconds"),
            config=d.get("config", {}),
            code=d.get("code", {}),
            status=d["status"],
            rows=d.get("rows", 0),
            notes=d.get("notes", {}),
            error=d.get("error"),
        )


def get_bench_dir() -> Path:
    """Get the pac-bench root directory (auto-detected from package location).

    Can be overridden via the PACBENCH_DIR environment variable.
    """
    if env_dir := os.environ.get("PACBENCH_DIR"):
        return Path(env_dir)
    # this file is at <root>/pacbench/core.py
    return Path(__file__).resolve().parent.parent


def get_config_dir() -> Path:
    """Get the directory holding defaults.yaml and recipes.yaml."""
    return get_bench_dir() / "config"


def get_runs_dir() -> Path:
    """Get the runs directory."""
    return get_bench_dir() / "runs"


def get_machine_name() -> str:
    """Get the machine hostname."""
    return socket.gethostname()


def generate_run_id(label: str) -> str:
    """Generate a run ID from a timestamp and a short code label, e.g. pac-256-128."""
    timestamp = datetime.now().strftime("%Y-%m-%dT%H-%M-%S")
    return f"{timestamp}_{label}"


def atomic_write_json(path: Path, data: dict) -> None:
    """Write JSON data atomically (write to temp, then rename)."""
    temp_path = path.with_suffix(f".{os.getpid()}.tmp")
    try:
        with open(temp_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)
            f.flush()
            os.fsync(f.fileno())
        os.rename(temp_path, path)
    finally:
        if temp_path.exists():
            temp_path.unlink()


def atomic_write_text(path: Path, text: str) -> None:
    """Write text atomically, same scheme as atomic_write_json."""
    temp_path = path.with_suffix(f".{os.getpid()}.tmp")
    try:
        with open(temp_path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.rename(temp_path, path)
    finally:
        if temp_path.exists():
            temp_path.unlink()
