"""Command implementations for the pac-bench CLI."""

import csv
import io
import json
import sys
from pathlib import Path

from filelock import FileLock

from .channel import NORMAL_APPROX_VARIANTS, biawgn_constants, dispersion_fer, ebn0_to_esn0
from .construction import ChannelModel, node_cutoff_tree
from .core import (
    InvalidInputError,
    QuadratureError,
    UnsatisfiableConstructionError,
    atomic_write_text,
    get_runs_dir,
)
from .guessing import rate_cap
from .parser import format_profile, parse_ebn0_grid, parse_results_csv, read_profile
from .runner import (
    RECIPE_KINDS,
    DonorSpec,
    ExperimentConfig,
    Recipe,
    build_profile,
    execute_sweep,
    get_recipe,
    load_defaults,
)

LIBRARY_ERRORS = (InvalidInputError, UnsatisfiableConstructionError, QuadratureError)


def format_table(headers: list[str], rows: list[list[str]], alignments: list[str] | None = None) -> str:
    """Format a markdown table with proper column padding.

    Args:
        headers: List of header strings
        rows: List of rows, each row is a list of cell strings
        alignments: List of alignments ('l', 'r', 'c') for each column.
                   Defaults to left-aligned.

    Returns:
        Formatted markdown table string
    """
    if not headers:
        return ""

    num_cols = len(headers)
    if alignments is None:
        alignments = ['l'] * num_cols

    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            if i < num_cols:
                widths[i] = max(widths[i], len(str(cell)))

    sep_parts = []
    for i, align in enumerate(alignments):
        w = widths[i]
        if align == 'r':
            sep_parts.append('-' * (w + 1) + ':')
        elif align == 'c':
            sep_parts.append(':' + '-' * w + ':')
        else:
            sep_parts.append('-' * (w + 2))

    def render(cells: list[str]) -> str:
        parts = []
        for i in range(num_cols):
            cell = str(cells[i]) if i < len(cells) else ''
            parts.append(cell.rjust(widths[i]) if alignments[i] == 'r' else cell.ljust(widths[i]))
        return '| ' + ' | '.join(parts) + ' |'

    lines = [render(headers), '|' + '|'.join(sep_parts) + '|']
    lines.extend(render(row) for row in rows)
    return '\n'.join(lines)


def _pick(value, defaults: dict, key: str, fallback=None):
    """CLI flag if given, else the YAML default, else the built-in fallback."""
    if value is not None:
        return value
    return defaults.get(key, fallback)


def resolve_recipe(args, defaults: dict) -> Recipe:
    """Build a Recipe from --recipe plus the construction flags."""
    name = args.recipe or "rm"
    epsilon = _pick(args.epsilon, defaults, "epsilon", 0.1)
    mc_samples = _pick(args.mc_samples, defaults, "mc_samples", 1_000_000)
    seed = _pick(args.seed, defaults, "seed", 0)

    if name not in RECIPE_KINDS:
        recipe = get_recipe(name)
        for attr, value in (("epsilon", args.epsilon), ("mc_samples", args.mc_samples), ("seed", args.seed)):
            if value is not None:
                setattr(recipe, attr, value)
        return recipe

    if args.n is None or args.k is None:
        raise InvalidInputError(f"Recipe '{name}' needs --n and --k")
    donor = None
    if name == "merged" and args.donor_k is not None:
        donor = DonorSpec(
            k=args.donor_k,
            design_snr=args.donor_snr if args.donor_snr is not None else args.design_snr,
            level=args.donor_level if args.donor_level is not None else args.level,
        )
    return Recipe(
        kind=name,
        n=args.n,
        k=args.k,
        design_snr=args.design_snr,
        design_rate=args.design_rate,
        level=args.level,
        epsilon=epsilon,
        all_levels=args.all_levels,
        mc_samples=mc_samples,
        seed=seed,
        donor=donor,
        weight=args.weight,
        target_k=args.target_k,
    )


def load_code(args, defaults: dict, progress: bool):
    """Profile and build metadata from --profile or a recipe."""
    if args.profile:
        profile = read_profile(Path(args.profile))
        if args.n is not None and args.n != profile.N:
            raise InvalidInputError(f"Profile has N={profile.N}, but --n {args.n} was given")
        return profile, {"profile_file": args.profile, "N": profile.N, "K": profile.k}
    return build_profile(resolve_recipe(args, defaults), progress=progress)


def _describe(profile, meta: dict) -> None:
    recipe = meta.get("recipe") or {}
    print(f"Code: N={profile.N}, K={profile.k}, rate={profile.k / profile.N:.4f}")
    if recipe:
        print(f"  Recipe: {recipe.get('name') or recipe['kind']}")
    if meta.get("min_weight") is not None:
        print(f"  Minimum row weight: {meta['min_weight']}")
    if "exact_rm" in meta:
        print(f"  RM dimension: {'yes' if meta['exact_rm'] else 'no (last weight class completed by index)'}")
    if meta.get("frozen"):
        print(f"  Frozen by taming: {meta['frozen']}")
    if meta.get("added"):
        print(f"  Added by merge ({len(meta['added'])}): {meta['added']}")


def cmd_construct(args) -> int:
    """Build a rate profile and emit it as a profile file."""
    defaults = load_defaults()
    try:
        profile, meta = load_code(args, defaults, progress=not args.quiet)
    except UnsatisfiableConstructionError as e:
        print(f"Error: {e} (achieved K={e.achieved_k})", file=sys.stderr)
        return 1
    except LIBRARY_ERRORS as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    text = format_profile(profile)
    if args.out:
        out = Path(args.out)
        with FileLock(str(out) + ".lock"):
            atomic_write_text(out, text)
        # human summary only when stdout is free
        _describe(profile, meta)
        print(f"Profile written to {out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(args) -> int:
    """Run a FER/ANV sweep."""
    defaults = load_defaults()
    progress = not args.quiet and sys.stderr.isatty()
    try:
        profile, meta = load_code(args, defaults, progress=progress)
        cfg = ExperimentConfig(
            ebn0_grid=parse_ebn0_grid(args.ebn0),
            g=_pick(args.g, defaults, "g", "3211"),
            recipe=resolve_recipe(args, defaults) if not args.profile else None,
            profile_path=args.profile,
            delta=_pick(args.delta, defaults, "delta", 1.0),
            max_visits=_pick(args.max_visits, defaults, "max_visits"),
            min_frames=_pick(args.min_frames, defaults, "min_frames", 1000),
            min_errors=_pick(args.min_errors, defaults, "min_errors", 100),
            max_frames=_pick(args.max_frames, defaults, "max_frames", 1_000_000),
            batch_frames=_pick(args.batch_frames, defaults, "batch_frames", 200),
            seed=_pick(args.seed, defaults, "seed", 0),
            mc_samples=_pick(None, defaults, "bias_mc_samples", 200_000),
            bias_mode=_pick(args.bias_mode, defaults, "bias_mode", "cutoff"),
            workers=_pick(args.workers, defaults, "workers", 1),
            noiseless=args.noiseless,
            normal_approx=_pick(args.normal_approx, defaults, "normal_approx", "with_log"),
            wall_time=not args.no_wall_time,
        )
    except UnsatisfiableConstructionError as e:
        print(f"Error: {e} (achieved K={e.achieved_k})", file=sys.stderr)
        return 1
    except LIBRARY_ERRORS as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    _describe(profile, meta)
    try:
        metadata = execute_sweep(
            cfg,
            profile,
            meta,
            out=Path(args.out) if args.out else None,
            fmt=args.format,
            progress=not args.quiet,
        )
    except KeyboardInterrupt:
        print("\n\nInterrupted.", file=sys.stderr)
        return 130
    except LIBRARY_ERRORS as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    print(f"\nRun {metadata.run_id} completed ({metadata.rows} point(s))")
    if args.out:
        print(f"Results written to {args.out}")
    return 0


BOUNDS_COLUMNS = ["ebn0_db", "esn0", "capacity", "dispersion", "cutoff_rate", "k_cap",
                  "dispersion_fer", "dispersion_fer_plain"]


def bounds_rows(N: int, K: int, grid: list[float], epsilon: float) -> list[dict]:
    """Channel constants and reference FER per Eb/N0 point."""
    rows = []
    for ebn0 in grid:
        esn0 = ebn0_to_esn0(ebn0, K / N)
        consts = biawgn_constants(esn0)
        rows.append({
            "ebn0_db": ebn0,
            "esn0": esn0,
            "capacity": consts.capacity,
            "dispersion": consts.dispersion,
            "cutoff_rate": consts.cutoff_rate,
            "k_cap": rate_cap(N, consts.cutoff_rate, epsilon),
            "dispersion_fer": dispersion_fer(N, K, esn0, NORMAL_APPROX_VARIANTS[0]),
            "dispersion_fer_plain": dispersion_fer(N, K, esn0, NORMAL_APPROX_VARIANTS[1]),
        })
    return rows


def cmd_bounds(args) -> int:
    """Print channel constants and normal-approximation FER."""
    defaults = load_defaults()
    try:
        grid = parse_ebn0_grid(args.ebn0)
        rows = bounds_rows(args.n, args.k, grid, _pick(args.epsilon, defaults, "epsilon", 0.1))
    except LIBRARY_ERRORS as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    if args.format == "json":
        text = json.dumps({"N": args.n, "K": args.k, "rows": rows}, indent=2) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=BOUNDS_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        table = [
            [f"{r['ebn0_db']:g}", f"{r['esn0']:.4f}", f"{r['capacity']:.4f}", f"{r['dispersion']:.4f}",
             f"{r['cutoff_rate']:.4f}", str(r["k_cap"]), f"{r['dispersion_fer']:.3e}",
             f"{r['dispersion_fer_plain']:.3e}"]
            for r in rows
        ]
        text = format_table(BOUNDS_COLUMNS, table, ['r'] * len(BOUNDS_COLUMNS)) + "\n"

    if args.out:
        out = Path(args.out)
        with FileLock(str(out) + ".lock"):
            atomic_write_text(out, text)
        print(f"Bounds written to {out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_tree(args) -> int:
    """Dump node cutoff rates and caps."""
    defaults = load_defaults()
    try:
        channel = ChannelModel.from_ebn0(args.design_snr, args.rate)
        tree = node_cutoff_tree(
            channel,
            args.n,
            args.level,
            epsilon=_pick(args.epsilon, defaults, "epsilon", 0.1),
            mc_samples=_pick(args.mc_samples, defaults, "mc_samples", 1_000_000),
            seed=_pick(args.seed, defaults, "seed", 0),
            progress=not args.quiet,
        )
    except LIBRARY_ERRORS as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    if args.json:
        print(json.dumps(tree.to_dict(), indent=2))
        return 0

    print(f"Polarization tree: N={tree.N}, Es/N0={channel.param:.4f}, epsilon={tree.epsilon}, "
          f"samples={tree.mc_samples}")
    for s in range(tree.levels + 1):
        print(f"\nLevel {s} (node length {tree.node_len(s)}):")
        rows = []
        for t in range(1 << s):
            start, stop = tree.span(s, t)
            rows.append([
                str(t),
                f"{start}-{stop}",
                f"{tree.z[s][t]:.5f}",
                f"{tree.sigma[s][t]:.1e}",
                f"{tree.r0[s][t]:.4f}",
                str(tree.caps[s][t]),
            ])
        print(format_table(["node", "span", "Z", "sigma", "R0", "cap"], rows, ['r', 'l', 'r', 'r', 'r', 'r']))
    return 0


def cmd_list(args) -> int:
    """List recent runs."""
    runs_dir = get_runs_dir()
    if not runs_dir.exists():
        print("No runs found")
        return 0

    runs = sorted((p for p in runs_dir.iterdir() if p.is_dir()), key=lambda p: p.name, reverse=True)
    runs = runs[:args.limit]

    if not runs:
        print("No runs found")
        return 0

    print(f"Recent runs (showing {len(runs)}):")
    for run_dir in runs:
        metadata_file = run_dir / "metadata.json"
        if metadata_file.exists():
            with open(metadata_file, encoding="utf-8") as f:
                metadata = json.load(f)
            code = metadata.get("code") or {}
            label = f"PAC({code['N']},{code['K']})" if "N" in code and "K" in code else "PAC(?)"
            status = metadata.get("status", "unknown")
            duration = metadata.get("duration_seconds")
            duration_str = f"{duration:.1f}s" if duration else "N/A"
            print(f"  {run_dir.name} {label} [{status}] {metadata.get('rows', 0)} points, {duration_str}")
        else:
            print(f"  {run_dir.name} [incomplete]")

    return 0


def cmd_show(args) -> int:
    """Show details and results for a specific run."""
    run_dir = get_runs_dir() / args.run_id

    if not run_dir.exists():
        print(f"Run not found: {args.run_id}", file=sys.stderr)
        return 1

    metadata_file = run_dir / "metadata.json"
    if not metadata_file.exists():
        print(f"Metadata not found for run: {args.run_id}", file=sys.stderr)
        return 1

    with open(metadata_file, encoding="utf-8") as f:
        metadata = json.load(f)

    code = metadata.get("code", {})
    notes = metadata.get("notes", {})
    print(f"Run: {metadata['run_id']}")
    print(f"  Machine: {metadata['machine']}")
    print(f"  Code: PAC({code.get('N')},{code.get('K')}), g={code.get('g')}")
    print(f"  Status: {metadata['status']}")
    print(f"  Duration: {metadata.get('duration_seconds', 'N/A')}s")
    print(f"  Delta: {notes.get('delta')}, seed: {notes.get('seed')}, "
          f"normal approximation: {notes.get('normal_approx')}")
    if metadata.get("error"):
        print(f"  Error: {metadata['error']}")

    results_file = run_dir / "results.csv"
    if results_file.exists():
        rows = parse_results_csv(results_file.read_text(encoding="utf-8"))
        table = [
            [f"{r.ebn0_db:g}", str(r.frames), str(r.frame_errors), f"{r.fer:.3e}", f"{r.anv:.3f}",
             str(r.budget_exceedances), f"{r.dispersion_fer:.3e}"]
            for r in rows
        ]
        print()
        print(format_table(
            ["Eb/N0", "frames", "errors", "FER", "ANV", "budget", "dispersion FER"],
            table,
            ['r'] * 7,
        ))

    return 0
