"""Plot the CSV files written by run_experiments.py (needs matplotlib).

Usage: python scripts/plot_results.py [--data results] [--out results/figures.png]
"""
import argparse
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def load(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: data[name] for name in data.dtype.names}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--data", default="results")
    p.add_argument("--out", default=None)
    args = p.parse_args()
    out = args.out or os.path.join(args.data, "figures.png")

    fig, ax = plt.subplots(2, 2, figsize=(11, 8))
    d = load(os.path.join(args.data, "rho.csv"))
    ax[0, 0].plot(d["E"], d["rho"], label="barrier")
    ax[0, 0].plot(d["E"], d["rho_free"], "--", label="free")
    ax[0, 0].set(xlabel="E", ylabel="rho(E)", title="spectral density", yscale="log")
    ax[0, 0].legend()

    d = load(os.path.join(args.data, "chi.csv"))
    for e in np.unique(d["E"]):
        m = d["E"] == e
        ax[0, 1].plot(d["r"][m], d["chi"][m], label=f"E = {e:g}")
    ax[0, 1].set(xlabel="r", ylabel="chi(r; E)", title="regular eigenfunctions")
    ax[0, 1].legend()

    d = load(os.path.join(args.data, "green.csv"))
    ax[1, 0].plot(d["r"], d["G"], label="barrier")
    ax[1, 0].plot(d["r"], d["G_free"], "--", label="free")
    ax[1, 0].set(xlabel="r", ylabel="G(r, 0.5; -1)", title="resolvent kernel")
    ax[1, 0].legend()

    d = load(os.path.join(args.data, "evolution.csv"))
    for t in np.unique(d["t"]):
        m = d["t"] == t
        ax[1, 1].plot(d["r"][m], d["density"][m], label=f"t = {t:g}")
    ax[1, 1].set(xlabel="r", ylabel="|phi(r, t)|^2", title="wave packet")
    ax[1, 1].legend()

    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
