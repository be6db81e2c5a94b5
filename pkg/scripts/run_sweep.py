"""Full depth sweep on the karate club: CSV, summary table and one SVG per metric."""

import argparse
import json
import time
from pathlib import Path

from oversmoothing.harness import ExperimentConfig, format_summary, run_experiment
from oversmoothing.plot import METRICS, emit_plot


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    parser.add_argument("--depth", type=int, default=96)
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = args.out_dir / "sweep.csv"
    config = ExperimentConfig(depth=args.depth, seeds=args.seeds, dim=args.dim,
                              output=csv_path, jobs=args.jobs)
    start = time.perf_counter()
    result = run_experiment(config)
    print(format_summary(result.summaries))
    print(f"\n{len(result.traces)} traces in {time.perf_counter() - start:.1f}s -> {csv_path}")

    summary = {m: s.to_dict() for m, s in result.summaries.items()}
    (args.out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    for metric in METRICS:
        print(emit_plot(csv_path, metric, args.out_dir / f"{metric}.svg"))


if __name__ == "__main__":
    main()
