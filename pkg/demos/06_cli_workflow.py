"""The full experiment workflow driven through the command-line interface.

Trains a small multi-seed run, aggregates the curves, renders a recorded
trial, and prints the oracle ceilings — the same five subcommands you would
use from a shell, called in-process here.

Run: python demos/06_cli_workflow.py [out_dir]
"""
import sys
from pathlib import Path

from causal_gym.cli import main as cli


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_run")
    run_dir = out / "offpolicy"

    print("== train (3 seeds, deliberately short) ==")
    cli([
        "train", "--env", "tabular", "--setting", "offpolicy",
        "--trials", "2000", "--seeds", "0,1,2",
        "--trace-trials", "1999",
        "--out-dir", str(run_dir),
    ])

    print("\n== aggregate the three curves into mean +/- SE (CSV + SVG) ==")
    cli([
        "aggregate", str(run_dir),
        "--out", str(out / "aggregate.csv"),
        "--svg", str(out / "aggregate.svg"),
        "--title", "off-policy tabular, 3 seeds",
    ])

    print("\n== evaluate seed 0's checkpoint ==")
    cli([
        "evaluate", "--config", str(run_dir / "config.json"),
        "--checkpoint", str(run_dir / "seed_0" / "checkpoint.bin"),
        "--n-trials", "500",
    ])

    print("\n== render the recorded trace of trial 1999 ==")
    cli(["render-trace", str(run_dir / "seed_0"), "1999"])

    print("\n== oracle ceilings (small sample for speed) ==")
    cli(["oracle", "--n-trials", "2000"])


if __name__ == "__main__":
    main()
