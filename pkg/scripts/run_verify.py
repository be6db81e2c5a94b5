"""Run the verification suite, then the same suite with a corrupted Kronecker
product, and show which families notice."""

import argparse
from pathlib import Path

from oversmoothing.harness import verify


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for label, sabotage in (("clean", None), ("sabotaged", "kron")):
        passed, payload = verify(args.out_dir / f"verify_{label}.json", sabotage)
        print(f"{label}: {'all passed' if passed else 'failures detected'}")
        for check in payload["checks"]:
            failed = sum(not c["passed"] for c in check["cases"])
            print(f"  {check['name']:<24} {len(check['cases']):>3} cases, {failed} failed")


if __name__ == "__main__":
    main()
