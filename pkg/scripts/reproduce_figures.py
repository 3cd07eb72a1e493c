"""Regenerate every preset panel into one output directory."""
import argparse
import sys

from qfi_lab.cli import main as cli_main
from qfi_lab.figures import FIGURES


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="qfi-lab-out/figures")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("figures", nargs="*", default=list(FIGURES))
    args = parser.parse_args()
    failed = [f for f in args.figures if cli_main(["reproduce", f, "--seed", str(args.seed), "--out", args.out])]
    if failed:
        print("failed:", ", ".join(failed), file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
