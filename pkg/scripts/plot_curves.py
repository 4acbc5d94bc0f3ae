"""Plots the CLI's CSV output as three figures.

    python scripts/plot_curves.py out/ --generate

With --generate the CSVs are first produced by the `lapdp` CLI into the
directory; without it the files must already be there. Expected files:

  dominance_rr_profile.csv, dominance_gauss_profile.csv   (lapdp profile)
  dominance_rr_renyi.csv, dominance_gauss_renyi.csv       (lapdp convert --to renyi)
  calibrate.csv                                           (lapdp calibrate)
  compose100.csv                                          (lapdp compose)

Figures written: dominance.png, calibration.png, composition.png.
matplotlib is needed here only; the library itself never imports it.
"""

import argparse
import csv
import json
import math
import pathlib
import subprocess
import sys

RR = {"randomized_response": {"eps0": 3.0, "delta0": 0.0}}
GAUSS = {"gaussian": {"kappa": 4.5}}
POINT = {"point_guarantee": {"eps0": 0.1, "delta0": 1e-8}}

RUNS = {
    "dominance_rr_profile.csv": ["profile", RR, "--eps-min", "-6", "--eps-max", "6", "--steps", "601"],
    "dominance_gauss_profile.csv": ["profile", GAUSS, "--eps-min", "-6", "--eps-max", "6", "--steps", "601"],
    "dominance_rr_renyi.csv": ["convert", RR, "--from", "profile", "--to", "renyi",
                               "--q-min", "1.1", "--q-max", "10", "--steps", "90"],
    "dominance_gauss_renyi.csv": ["convert", GAUSS, "--from", "profile", "--to", "renyi",
                                  "--q-min", "1.1", "--q-max", "10", "--steps", "90"],
    "calibrate.csv": ["calibrate", {"mechanisms": [POINT]}, "--delta-budget", "1e-6", "--k-range", "1..100"],
    "compose100.csv": ["compose", {"mechanisms": [dict(POINT, repeat=100)]}, "--method", "closed-form",
                       "--eps-min", "0", "--eps-max", "10", "--steps", "501"],
}


def generate(out: pathlib.Path):
    out.mkdir(parents=True, exist_ok=True)
    for name, (cmd, spec, *flags) in RUNS.items():
        argv = [sys.executable, "-m", "lapdp.cli", cmd, json.dumps(spec), *flags, "--output", str(out / name)]
        subprocess.run(argv, check=True)


def read(path: pathlib.Path):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    header, body = rows[0], rows[1:]
    return {h: [float(r[i]) for r in body] for i, h in enumerate(header)}


def plot_dominance(plt, d: pathlib.Path):
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    for name, label in (("gauss", "Gaussian, kappa = 4.5"), ("rr", "randomized response, eps0 = 3")):
        r = read(d / f"dominance_{name}_renyi.csv")
        left.plot(r["q"], r["rho"], label=label)
        p = read(d / f"dominance_{name}_profile.csv")
        right.semilogy(p["epsilon"], [max(v, 1e-300) for v in p["delta"]], label=label)
    left.set(xlabel="order q", ylabel="Rényi divergence", title="Rényi curves")
    right.set(xlabel="epsilon", ylabel="delta", title="privacy profiles", ylim=(1e-6, 1.5))
    left.legend()
    right.legend()
    fig.tight_layout()
    fig.savefig(d / "dominance.png", dpi=150)


def plot_calibration(plt, d: pathlib.Path):
    c = read(d / "calibrate.csv")
    ks = [k for k, e in zip(c["k"], c["epsilon"]) if math.isfinite(e)]
    eps = [e for e in c["epsilon"] if math.isfinite(e)]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(ks, eps, marker=".")
    ax.set(xlabel="number of compositions k", ylabel="epsilon at delta = 1e-6",
           title="(0.1, 1e-8) guarantee, exact composition")
    fig.tight_layout()
    fig.savefig(d / "calibration.png", dpi=150)


def plot_composition(plt, d: pathlib.Path):
    c = read(d / "compose100.csv")
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(c["epsilon"], [max(v, 1e-300) for v in c["delta"]])
    ax.axhline(1e-8, color="grey", linestyle=":", label="delta = 1e-8")
    ax.set(xlabel="epsilon", ylabel="delta", title="100-fold (0.1, 1e-8) composition")
    ax.legend()
    fig.tight_layout()
    fig.savefig(d / "composition.png", dpi=150)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory", type=pathlib.Path)
    ap.add_argument("--generate", action="store_true", help="run the CLI to create the CSVs first")
    args = ap.parse_args(argv)
    if args.generate:
        generate(args.directory)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plot_dominance(plt, args.directory)
    plot_calibration(plt, args.directory)
    plot_composition(plt, args.directory)
    return 0


if __name__ == "__main__":
    sys.exit(main())
