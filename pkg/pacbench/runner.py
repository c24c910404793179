"""Profile recipes and Monte-Carlo FER/ANV sweeps."""

import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import yaml
except ImportError:
    print("Error: pyyaml is required. Set up virtual environment:", file=sys.stderr)
    print("  python3 -m venv .venv && .venv/bin/pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)

try:
    from filelock import FileLock
except ImportError:
    print("Error: filelock is required. Set up virtual environment:", file=sys.stderr)
    print("  python3 -m venv .venv && .venv/bin/pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)

from tqdm import tqdm

from . import __version__
from .channel import dispersion_fer, ebn0_to_esn0, frame_rng, transmit
from .construction import (
    ChannelModel,
    bias_vector,
    is_rm_dimension,
    merge_profiles,
    node_cutoff_tree,
    polar_profile,
    profile_min_weight,
    rm_profile,
    tame_profile,
)
from .core import (
    InvalidInputError,
    RunMetadata,
    atomic_write_json,
    atomic_write_text,
    generate_run_id,
    get_config_dir,
    get_machine_name,
    get_runs_dir,
)
from .demapper import LlrLattice
from .fano import FanoConfig, Outcome, bias_for_mode, decode
from .polar import CodeSpec
from .pretransform import ConnPoly, RateProfile, extract_data, pac_encode

RECIPE_KINDS = ("rm", "polar", "tamed-rm", "merged")


def load_defaults() -> dict:
    """Load simulation defaults from config/defaults.yaml."""
    defaults_file = get_config_dir() / "defaults.yaml"
    if defaults_file.exists():
        with open(defaults_file, encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    return {}


def load_recipes() -> dict:
    """Load named construction recipes from config/recipes.yaml."""
    recipes_file = get_config_dir() / "recipes.yaml"
    if recipes_file.exists():
        with open(recipes_file, encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    return {}


@dataclass
class DonorSpec:
    """High-rate RM code tamed separately before lending rows to a merge."""
    k: int
    design_snr: float
    level: int
    design_rate: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "design_snr": self.design_snr,
            "level": self.level,
            "design_rate": self.design_rate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DonorSpec":
        return cls(
            k=int(d["k"]),
            design_snr=float(d["design_snr"]),
            level=int(d["level"]),
            design_rate=d.get("design_rate"),
        )


@dataclass
class Recipe:
    """How to build a rate profile.

    design_snr is Eb/N0 in dB; the design rate defaults to k/N of the code the
    construction starts from.
    """
    kind: str
    n: int
    k: int
    name: Optional[str] = None
    design_snr: Optional[float] = None
    design_rate: Optional[float] = None
    level: Optional[int] = None
    epsilon: float = 0.1
    all_levels: bool = False
    mc_samples: int = 1_000_000
    seed: int = 0
    donor: Optional[DonorSpec] = None
    weight: Optional[int] = None
    target_k: Optional[int] = None
    description: Optional[str] = None

    def __post_init__(self):
        if self.kind not in RECIPE_KINDS:
            raise InvalidInputError(f"Unknown recipe kind: {self.kind}")
        if self.kind in ("polar", "tamed-rm", "merged") and self.design_snr is None:
            raise InvalidInputError(f"Recipe '{self.kind}' needs a design SNR")
        if self.kind in ("tamed-rm", "merged") and self.level is None:
            raise InvalidInputError(f"Recipe '{self.kind}' needs a level")
        if self.kind == "merged" and (self.donor is None or self.weight is None or self.target_k is None):
            raise InvalidInputError("Recipe 'merged' needs donor, weight and target_k")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["donor"] = self.donor.to_dict() if self.donor else None
        return d

    @classmethod
    def from_dict(cls, d: dict, name: Optional[str] = None) -> "Recipe":
        d = dict(d)
        donor = d.pop("donor", None)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"Unknown recipe keys: {sorted(unknown)}")
        if name is not None:
            d.setdefault("name", name)
        return cls(donor=DonorSpec.from_dict(donor) if donor else None, **d)


def get_recipe(name: str) -> Recipe:
    """Look up a named recipe from config/recipes.yaml."""
    recipes = load_recipes()
    if name not in recipes:
        raise InvalidInputError(f"Unknown recipe: {name}")
    return Recipe.from_dict(recipes[name], name=name)


def _design_channel(snr_db: float, rate: Optional[float], n: int, k: int) -> ChannelModel:
    return ChannelModel.from_ebn0(snr_db, rate if rate is not None else k / n)


def _tamed_rm(recipe: Recipe, k: int, snr_db: float, rate, level: int, progress: bool):
    channel = _design_channel(snr_db, rate, recipe.n, k)
    tree = node_cutoff_tree(
        channel, recipe.n, level,
        epsilon=recipe.epsilon, mc_samples=recipe.mc_samples, seed=recipe.seed, progress=progress,
    )
    start = rm_profile(recipe.n, k)
    return start, tame_profile(start, tree, level, all_levels=recipe.all_levels), tree


def build_profile(recipe: Recipe, progress: bool = False) -> tuple[RateProfile, dict]:
    """Run a recipe; returns the profile and metadata describing how it was built."""
    meta = {"recipe": recipe.to_dict(), "N": recipe.n}
    if recipe.kind == "rm":
        profile = rm_profile(recipe.n, recipe.k)
        meta["exact_rm"] = is_rm_dimension(recipe.n, recipe.k)
    elif recipe.kind == "polar":
        channel = _design_channel(recipe.design_snr, recipe.design_rate, recipe.n, recipe.k)
        profile = polar_profile(channel, recipe.n, recipe.k, recipe.mc_samples, recipe.seed, progress=progress)
        meta["design_esn0"] = channel.param
    elif recipe.kind == "tamed-rm":
        start, profile, tree = _tamed_rm(
            recipe, recipe.k, recipe.design_snr, recipe.design_rate, recipe.level, progress
        )
        meta["design_esn0"] = tree.channel.param
        meta["frozen"] = sorted(set(start.positions) - set(profile.positions))
        meta["caps"] = [int(c) for c in tree.caps[recipe.level]]
    else:
        _, base, tree = _tamed_rm(
            recipe, recipe.k, recipe.design_snr, recipe.design_rate, recipe.level, progress
        )
        donor_spec = recipe.donor
        _, donor, _ = _tamed_rm(
            recipe, donor_spec.k, donor_spec.design_snr, donor_spec.design_rate, donor_spec.level, progress
        )
        profile = merge_profiles(base, donor, recipe.target_k, recipe.weight, tree, recipe.level)
        meta["design_esn0"] = tree.channel.param
        meta["base_k"] = base.k
        meta["donor_k"] = donor.k
        meta["added"] = sorted(set(profile.positions) - set(base.positions))
    meta["K"] = profile.k
    meta["min_weight"] = profile_min_weight(profile)
    return profile, meta


@dataclass
class ExperimentConfig:
    """Everything that determines a sweep's output."""
    ebn0_grid: list
    g: str = "3211"
    recipe: Optional[Recipe] = None
    profile_path: Optional[str] = None
    delta: float = 1.0
    max_visits: Optional[int] = None
    min_frames: int = 1000
    min_errors: int = 100
    max_frames: int = 1_000_000
    batch_frames: int = 200
    seed: int = 0
    mc_samples: int = 200_000
    bias_mode: str = "cutoff"
    workers: int = 1
    noiseless: bool = False
    normal_approx: str = "with_log"
    wall_time: bool = True

    def __post_init__(self):
        self.ebn0_grid = [float(x) for x in self.ebn0_grid]
        if not self.ebn0_grid:
            raise InvalidInputError("Eb/N0 grid is empty")
        if self.min_frames < 1:
            raise InvalidInputError(f"min_frames must be >= 1, got {self.min_frames}")
        if self.max_frames < self.min_frames:
            raise InvalidInputError("max_frames must be >= min_frames")
        if self.batch_frames < 1:
            raise InvalidInputError(f"batch_frames must be >= 1, got {self.batch_frames}")
        if self.workers < 1:
            raise InvalidInputError(f"workers must be >= 1, got {self.workers}")
        ConnPoly.from_octal(self.g)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["recipe"] = self.recipe.to_dict() if self.recipe else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = {k: v for k, v in d.items() if k in {f.name for f in fields(cls)}}
        if isinstance(d.get("recipe"), dict):
            d["recipe"] = Recipe.from_dict(d["recipe"])
        return cls(**d)


@dataclass
class SweepRow:
    ebn0_db: float
    frames: int
    frame_errors: int
    fer: float
    anv: float
    budget_exceedances: int
    dispersion_fer: float
    wall_time_s: float
    truncated: bool = False

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepRow":
        return cls(**{f.name: d[f.name] for f in fields(cls) if f.name in d})


@dataclass
class PointTask:
    """Picklable description of a batch of frames at one grid point."""
    N: int
    mask: np.ndarray
    g: tuple
    bias: np.ndarray
    esn0: float
    delta: float
    max_visits: Optional[int]
    seed: int
    point: int
    frames: range = field(default_factory=lambda: range(0))


def simulate_frame(task: PointTask, spec: CodeSpec, fano_cfg: FanoConfig, frame: int) -> tuple[bool, int, bool]:
    """Encode random data, transmit and decode one frame: (error, visits, exceeded)."""
    rng = frame_rng(task.seed, task.point, frame, 0)
    d = rng.integers(0, 2, size=spec.K, dtype=np.uint8)
    _, _, x = pac_encode(d, spec)
    draw = transmit(x, task.esn0, (task.seed, task.point, frame))
    result = decode(LlrLattice(draw.llrs), spec, fano_cfg)
    error = not np.array_equal(extract_data(result.v_hat, spec.profile), d)
    return error, result.visits, result.outcome is Outcome.VISIT_BUDGET_EXCEEDED


def _run_task(task: PointTask) -> list:
    profile = RateProfile(task.mask)
    spec = CodeSpec(task.N, profile.k, profile, ConnPoly(task.g))
    fano_cfg = FanoConfig(bias=task.bias, delta=task.delta, max_visits=task.max_visits)
    return [simulate_frame(task, spec, fano_cfg, frame) for frame in task.frames]


def _split(frames: range, parts: int) -> list[range]:
    size = math.ceil(len(frames) / parts)
    return [frames[i:i + size] for i in range(0, len(frames), size)]


def run_sweep(cfg: ExperimentConfig, profile: RateProfile, progress: bool = True) -> list[SweepRow]:
    """Simulate every grid point until the stopping rule is met.

    A point stops once it has min_frames frames and min_errors errors, or at
    max_frames (marked truncated). Frames run in fixed batches whose contents
    do not depend on the worker count, so the output is deterministic.
    """
    N = profile.N
    K = profile.k
    g = ConnPoly.from_octal(cfg.g)
    if K == 0 and not cfg.noiseless:
        print("Warning: all positions frozen; every frame decodes trivially", file=sys.stderr)
    rows = []
    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for point, ebn0 in enumerate(cfg.ebn0_grid):
            start = time.time()
            rate = K / N if K else 1.0 / N
            esn0 = ebn0_to_esn0(ebn0, rate)
            rates = bias_vector(ChannelModel.biawgn(esn0), N, mc_samples=cfg.mc_samples, seed=cfg.seed)
            base = PointTask(
                N=N,
                mask=np.asarray(profile.mask),
                g=g.coeffs,
                bias=bias_for_mode(rates, cfg.bias_mode),
                esn0=math.inf if cfg.noiseless else esn0,
                delta=cfg.delta,
                max_visits=cfg.max_visits,
                seed=cfg.seed,
                point=point,
            )
            frames = errors = visits = exceeded = 0
            bar = tqdm(total=cfg.max_frames, desc=f"Eb/N0={ebn0:g} dB", unit="frame",
                       disable=not progress, leave=False)
            while frames < cfg.max_frames and not (frames >= cfg.min_frames and errors >= cfg.min_errors):
                batch = range(frames, min(frames + cfg.batch_frames, cfg.max_frames))
                tasks = [
                    PointTask(**{**base.__dict__, "frames": part})
                    for part in _split(batch, cfg.workers)
                ]
                results = executor.map(_run_task, tasks) if executor else map(_run_task, tasks)
                for chunk in results:
                    for error, frame_visits, over in chunk:
                        errors += error
                        visits += frame_visits
                        exceeded += over
                frames += len(batch)
                bar.update(len(batch))
                bar.set_postfix(errors=errors)
            bar.close()
            ref = dispersion_fer(N, K, esn0, cfg.normal_approx) if K else 0.0
            rows.append(SweepRow(
                ebn0_db=ebn0,
                frames=frames,
                frame_errors=errors,
                fer=errors / frames,
                anv=visits / (frames * N),
                budget_exceedances=exceeded,
                dispersion_fer=ref,
                wall_time_s=round(time.time() - start, 3) if cfg.wall_time else 0.0,
                truncated=errors < cfg.min_errors,
            ))
            if progress:
                r = rows[-1]
                print(f"  Eb/N0={ebn0:g} dB: frames={r.frames} errors={r.frame_errors} "
                      f"FER={r.fer:.3e} ANV={r.anv:.3f}")
    finally:
        if executor:
            executor.shutdown()
    return rows


def write_results(rows: list[SweepRow], path: Path, fmt: str, config: dict, metadata: dict) -> None:
    """Write sweep rows as CSV or JSON under a file lock."""
    from .parser import format_results_csv, format_results_json

    text = format_results_csv(rows) if fmt == "csv" else format_results_json(rows, config, metadata)
    lock = FileLock(str(path) + ".lock")
    with lock:
        atomic_write_text(path, text)


def execute_sweep(
    cfg: ExperimentConfig,
    profile: RateProfile,
    profile_meta: dict,
    out: Optional[Path] = None,
    fmt: str = "csv",
    runs_dir: Optional[Path] = None,
    progress: bool = True,
) -> RunMetadata:
    """Run a sweep, recording metadata and results under runs/<run_id>/.

    With `out` the results also go to that path.
    """
    if runs_dir is None:
        runs_dir = get_runs_dir()
    label = f"pac-{profile.N}-{profile.k}"
    run_id = generate_run_id(label)
    run_dir = runs_dir / run_id
    run_dir.mkdir(parents=True, exist_ok=True)

    code = {
        "N": profile.N,
        "K": profile.k,
        "g": cfg.g,
        "positions": profile.positions,
        **{k: v for k, v in profile_meta.items() if k not in ("N", "K")},
    }
    notes = {
        "normal_approx": cfg.normal_approx,
        "stopping_rule": {
            "min_frames": cfg.min_frames,
            "min_errors": cfg.min_errors,
            "max_frames": cfg.max_frames,
        },
        "delta": cfg.delta,
        "seed": cfg.seed,
        "version": __version__,
    }

    print(f"Run ID: {run_id}")
    print(f"Code: PAC({profile.N},{profile.k}), g={cfg.g}")
    print(f"Eb/N0 grid: {', '.join(f'{x:g}' for x in cfg.ebn0_grid)} dB")
    print(f"Workers: {cfg.workers}")
    print()

    metadata = RunMetadata(
        run_id=run_id,
        machine=get_machine_name(),
        started_at=datetime.now(),
        completed_at=None,
        duration_seconds=None,
        config=cfg.to_dict(),
        code=code,
        status="running",
        notes=notes,
    )
    atomic_write_json(run_dir / "metadata.json", metadata.to_dict())

    start_time = time.time()
    try:
        rows = run_sweep(cfg, profile, progress=progress)
        metadata.status = "completed"
        metadata.rows = len(rows)
        metadata.notes["truncated_points"] = [r.ebn0_db for r in rows if r.truncated]
        write_results(rows, run_dir / "results.csv", "csv", cfg.to_dict(), metadata.to_dict())
        if out is not None:
            write_results(rows, out, fmt, cfg.to_dict(), metadata.to_dict())
        return metadata
    except KeyboardInterrupt:
        metadata.status = "interrupted"
        raise
    except Exception as e:
        metadata.status = "failed"
        metadata.error = str(e)
        raise
    finally:
        metadata.completed_at = datetime.now()
        metadata.duration_seconds = time.time() - start_time
        atomic_write_json(run_dir / "metadata.json", metadata.to_dict())
