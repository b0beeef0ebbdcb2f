"""Median betting MAE against E[sigma^2] at fixed n and fixed f*.

Compares the observed ratio of the noisiest to the quietest regime with the
square-root prediction, and lists squared and log ERM alongside when asked.
"""
import argparse
import math

from betreg.experiment import ExperimentConfig, load_config, run_experiment


def main(argv=None):
    p = argparse.ArgumentParser(description="variance adaptivity sweep")
    p.add_argument("--config", default="scripts/configs/variance_adaptivity.json")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--all-estimators", action="store_true")
    args = p.parse_args(argv)

    obj = load_config(args.config).to_json()
    if args.replications is not None:
        obj["replications"] = args.replications
    if args.all_estimators:
        obj["estimators"] = ["squared", "log", "betting"]
    config = ExperimentConfig.from_json(obj)
    _, summary = run_experiment(config)

    cells = sorted(summary["cells"], key=lambda c: -c["sigma2"])
    print(f"{'sigma2':>10} {'q':>7}  " + "  ".join(f"{e:>10}" for e in config.estimators))
    for c in cells:
        meds = "  ".join(f"{c['estimators'][e]['median_mae']:10.5f}" for e in config.estimators)
        print(f"{c['sigma2']:10.5f} {c['first_order_q']:7.4f}  {meds}")
    hi, lo = cells[0], cells[-1]
    for e in config.estimators:
        ratio = hi["estimators"][e]["median_mae"] / lo["estimators"][e]["median_mae"]
        print(f"{e}: observed ratio {ratio:.2f}, sqrt prediction {math.sqrt(hi['sigma2'] / lo['sigma2']):.2f}")


if __name__ == "__main__":
    main()
