"""Command-line interface for pac-bench."""

import argparse
import sys
from fractions import Fraction

from . import __version__


def _rate(text: str) -> float:
    """Accept a rate as a decimal or a fraction such as 93/256."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid rate: {text!r}") from None


def _add_code_args(parser: argparse.ArgumentParser) -> None:
    """Flags selecting or constructing a rate profile."""
    parser.add_argument("--n", type=int, default=None, help="Blocklength N (power of two)")
    parser.add_argument("--k", type=int, default=None, help="Dimension K (starting RM dimension for tamed/merged)")
    parser.add_argument("--profile", type=str, default=None, help="Read the rate profile from a profile file")
    parser.add_argument(
        "--recipe",
        type=str,
        default=None,
        help="Recipe kind (rm, polar, tamed-rm, merged) or a name from config/recipes.yaml",
    )
    parser.add_argument("--design-snr", type=float, default=None, help="Design Eb/N0 in dB")
    parser.add_argument("--design-rate", type=_rate, default=None, help="Design rate (default: K/N)")
    parser.add_argument("--level", type=int, default=None, help="Polarization tree level for caps")
    parser.add_argument("--epsilon", type=float, default=None, help="Cap slack epsilon (default: 0.1)")
    parser.add_argument("--all-levels", action="store_true", help="Enforce caps on every level up to --level")
    parser.add_argument("--donor-k", type=int, default=None, help="Merged: dimension of the donor RM code")
    parser.add_argument("--donor-snr", type=float, default=None, help="Merged: donor design Eb/N0 in dB")
    parser.add_argument("--donor-level", type=int, default=None, help="Merged: donor taming level")
    parser.add_argument("--weight", type=int, default=None, help="Merged: row weight of added positions")
    parser.add_argument("--target-k", type=int, default=None, help="Merged: target dimension")
    parser.add_argument("--mc-samples", type=int, default=None, help="Monte-Carlo samples for Bhattacharyya estimates")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser."""
    parser = argparse.ArgumentParser(
        prog="pacbench",
        description="PAC code construction, Fano decoding and bounds",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # construct command
    construct_parser = subparsers.add_parser(
        "construct",
        help="Build a rate profile and write it as a profile file",
    )
    _add_code_args(construct_parser)
    construct_parser.add_argument("--out", type=str, default=None, help="Output path (default: stdout)")
    construct_parser.add_argument("--quiet", action="store_true", help="Suppress progress output")

    # simulate command
    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Run a FER/ANV sweep with the Fano decoder",
    )
    _add_code_args(simulate_parser)
    simulate_parser.add_argument("--g", type=str, default=None, help="Connection polynomial in octal (default: 3211)")
    simulate_parser.add_argument("--ebn0", type=str, required=True,
                                 help="Eb/N0 points in dB: '1,2,3' or start:step:stop")
    simulate_parser.add_argument("--delta", type=float, default=None, help="Fano threshold spacing")
    simulate_parser.add_argument("--max-visits", type=int, default=None, help="Visit budget per frame")
    simulate_parser.add_argument("--min-frames", type=int, default=None, help="Minimum frames per point")
    simulate_parser.add_argument("--min-errors", type=int, default=None, help="Minimum frame errors per point")
    simulate_parser.add_argument("--max-frames", type=int, default=None, help="Frame cap per point")
    simulate_parser.add_argument("--batch-frames", type=int, default=None, help="Frames per scheduling batch")
    simulate_parser.add_argument("--bias-mode", choices=["cutoff", "fixed"], default=None,
                                 help="Per-bit cutoff-rate bias or their mean on every bit")
    simulate_parser.add_argument("--workers", type=int, default=None, help="Worker processes")
    simulate_parser.add_argument("--noiseless", action="store_true", help="Transmit without noise (saturated LLRs)")
    simulate_parser.add_argument("--normal-approx", choices=["with_log", "plain"], default=None,
                                 help="Normal approximation variant for the reference FER")
    simulate_parser.add_argument("--no-wall-time", action="store_true",
                                 help="Write 0 for wall time so output is byte-identical across runs")
    simulate_parser.add_argument("--out", type=str, default=None, help="Also write results to this path")
    simulate_parser.add_argument("--format", choices=["csv", "json"], default="csv", help="Format for --out")
    simulate_parser.add_argument("--quiet", action="store_true", help="Suppress progress bars")

    # bounds command
    bounds_parser = subparsers.add_parser(
        "bounds",
        help="Print capacity, dispersion, cutoff rate and normal-approximation FER",
    )
    bounds_parser.add_argument("--n", type=int, required=True, help="Blocklength N")
    bounds_parser.add_argument("--k", type=int, required=True, help="Dimension K")
    bounds_parser.add_argument("--ebn0", type=str, required=True, help="Eb/N0 points in dB")
    bounds_parser.add_argument("--epsilon", type=float, default=None, help="Cap slack epsilon (default: 0.1)")
    bounds_parser.add_argument("--out", type=str, default=None, help="Write rows to this path")
    bounds_parser.add_argument("--format", choices=["table", "csv", "json"], default="table", help="Output format")

    # tree command
    tree_parser = subparsers.add_parser(
        "tree",
        help="Dump node cutoff rates and caps of the polarization tree",
    )
    tree_parser.add_argument("--n", type=int, required=True, help="Blocklength N")
    tree_parser.add_argument("--rate", type=_rate, required=True, help="Design rate, decimal or fraction (e.g. 93/256)")
    tree_parser.add_argument("--design-snr", type=float, required=True, help="Design Eb/N0 in dB")
    tree_parser.add_argument("--level", type=int, required=True, help="Deepest level to estimate")
    tree_parser.add_argument("--epsilon", type=float, default=None, help="Cap slack epsilon (default: 0.1)")
    tree_parser.add_argument("--mc-samples", type=int, default=None, help="Monte-Carlo samples")
    tree_parser.add_argument("--seed", type=int, default=None, help="Random seed")
    tree_parser.add_argument("--json", action="store_true", help="Emit JSON instead of tables")
    tree_parser.add_argument("--quiet", action="store_true", help="Suppress progress output")

    # list command
    list_parser = subparsers.add_parser(
        "list",
        help="List recent simulation runs",
    )
    list_parser.add_argument(
        "--limit",
        type=int,
        default=10,
        help="Maximum number of runs to show",
    )

    # show command
    show_parser = subparsers.add_parser(
        "show",
        help="Show details and results of a run",
    )
    show_parser.add_argument("run_id", help="Run ID to show")

    return parser


def main(args=None):
    """Main entry point."""
    parser = create_parser()
    parsed = parser.parse_args(args)

    if parsed.command is None:
        # Show help when no command provided
        parser.print_help()
        return 0

    # Import handlers here to keep --help fast
    if parsed.command == "construct":
        from .commands import cmd_construct
        return cmd_construct(parsed)
    elif parsed.command == "simulate":
        from .commands import cmd_simulate
        return cmd_simulate(parsed)
    elif parsed.command == "bounds":
        from .commands import cmd_bounds
        return cmd_bounds(parsed)
    elif parsed.command == "tree":
        from .commands import cmd_tree
        return cmd_tree(parsed)
    elif parsed.command == "list":
        from .commands import cmd_list
        return cmd_list(parsed)
    elif parsed.command == "show":
        from .commands import cmd_show
        return cmd_show(parsed)
    else:
        parser.print_help()
        return 1


if __name__ == "__main__":
    sys.exit(main())
