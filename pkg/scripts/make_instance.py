"""Write a synthetic class file and a sample CSV ready for ``betreg fit``.

    python3 scripts/make_instance.py --n 400 --out-dir runs/instance
    betreg fit --class runs/instance/class.json --data runs/instance/data.csv
"""
import argparse
import json
from pathlib import Path

from betreg.hypotheses import save_dataset
from betreg.synthetic import SynthConfig, make_instance, sample_dataset


def main(argv=None):
    p = argparse.ArgumentParser(description="synthetic instance + sample")
    p.add_argument("--config", default="scripts/configs/generator.json")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--out-dir", default="runs/instance")
    args = p.parse_args(argv)

    with open(args.config) as fh:
        inst = make_instance(SynthConfig.from_json(json.load(fh)))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inst.save(out / "class.json")
    save_dataset(sample_dataset(inst, args.n, args.data_seed), out / "data.csv")
    print(f"f* index {inst.hclass.star_index}, E[sigma^2]={float(inst.space.weights @ inst.variances):.5f} -> {out}")


if __name__ == "__main__":
    main()
