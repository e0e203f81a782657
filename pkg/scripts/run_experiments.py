"""Generate the data behind the example plots.

Usage: python scripts/run_experiments.py [--out results] [--v0 1.0]

Writes CSV files (same formats as the CLI) for the spectral density, a few
eigenfunctions, the free-versus-barrier Green function, and a wave packet
evolving through the barrier.
"""
import argparse
import os

import numpy as np

from rhs_spectra import (BarrierConfig, Family, QuadratureSpec, eval_eigenfunction, evolve,
                         green_function, make_spectral_test_function, rho_values)
from rhs_spectra.cli import csv_text
from rhs_spectra.transform import position_norm


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--v0", type=float, default=1.0)
    args = p.parse_args()
    os.makedirs(args.out, exist_ok=True)
    cfg = BarrierConfig(v0=args.v0)
    quad = QuadratureSpec()

    def save(name, header, rows):
        path = os.path.join(args.out, name)
        with open(path, "w", newline="\n") as fh:
            fh.write(csv_text(header, rows))
        print(f"wrote {path} ({len(rows)} rows)")

    E = np.linspace(0.01, 6.0, 600)
    E = E[np.abs(E - cfg.v0) > 1e-6]
    free = rho_values(cfg.replace(v0=0.0), E)
    save("rho.csv", ["E", "rho", "rho_free"], list(zip(E, rho_values(cfg, E), free)))

    r = np.linspace(0.0, 6.0, 601)
    rows = []
    for e in (0.3, 0.9, 1.5, 4.0):
        chi = eval_eigenfunction(cfg, Family.CHI, e, r).real
        rows.extend((x, e, v) for x, v in zip(r, chi))
    save("chi.csv", ["r", "E", "chi"], rows)

    s = 0.5
    rows = [(x, green_function(cfg, x, s, -1.0).real, green_function(cfg.replace(v0=0.0), x, s, -1.0).real)
            for x in r]
    save("green.csv", ["r", "G", "G_free"], rows)

    lo = cfg.v0 + 0.5
    phi = make_spectral_test_function(cfg, lo, lo + 4.0, (1.0, 0.3, -0.2))
    n0 = position_norm(cfg, phi, quad)
    rr = np.linspace(0.0, 120.0, 1201)
    rows, norms = [], []
    for t in (0.0, 5.0, 10.0, 20.0):
        pt = evolve(cfg, phi, t, quad)
        vals = pt(rr)
        rows.extend((t, x, abs(v) ** 2 / n0 ** 2) for x, v in zip(rr, vals))
        norms.append((t, position_norm(cfg, pt, quad) / n0))
    save("evolution.csv", ["t", "r", "density"], rows)
    save("evolution_norms.csv", ["t", "norm_ratio"], norms)


if __name__ == "__main__":
    main()
