"""Run one experiment config and write records, summary and plot table to a directory.

    python3 scripts/run_sweep.py scripts/configs/coverage_second_order.json --out-dir runs/second_order
"""
import argparse
import json
import sys
import time
from pathlib import Path

from betreg.experiment import load_config, plot_data, records_to_csv, run_experiment


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config")
    p.add_argument("--out-dir", default=None, help="defaults to runs/<config stem>")
    p.add_argument("--replications", type=int, default=None, help="override R for a quick look")
    args = p.parse_args(argv)

    config = load_config(args.config)
    if args.replications is not None:
        config = type(config).from_json({**config.to_json(), "replications": args.replications})
    out = Path(args.out_dir or Path("runs") / Path(args.config).stem)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    records, summary = run_experiment(config)
    (out / "records.csv").write_text(records_to_csv(records))
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out / "plot.dat").write_text(plot_data(summary))

    for cell in summary["cells"]:
        for est, s in cell["estimators"].items():
            print(f"n={cell['n']:5d} sigma2={cell['sigma2']:.5f} {est:8s} "
                  f"median_mae={s['median_mae']:.5g} coverage={s['coverage']:.3f}")
    print(f"{len(records)} records in {time.perf_counter() - t0:.1f}s -> {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
