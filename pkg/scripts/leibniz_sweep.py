"""Largest fractional Leibniz ratio over random trigonometric polynomials on T¹, per σ and resolution."""
import argparse

import numpy as np

from prodnls.fractional import leibniz_ratio, random_trig_poly
from prodnls.grid import TorusSpectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--mu", type=float, default=0.5)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.3, 0.8, 1.2])
    ap.add_argument("--resolutions", type=int, nargs="+", default=[64, 128])
    ap.add_argument("--degree", type=int, default=8)
    ap.add_argument("--form", choices=("signed", "modulus"), default="signed")
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    for sigma in args.sigmas:
        row = []
        for N in args.resolutions:
            torus = TorusSpectrum(1, (1.0,), N)
            rng = np.random.default_rng(args.seed)  # same coefficients at every resolution
            ratios = [leibniz_ratio(random_trig_poly(torus, rng, args.degree), args.mu, sigma, args.form)
                      for _ in range(args.count)]
            row.append(f"N={N}: max {max(ratios):.4f} median {np.median(ratios):.4f}")
        print(f"sigma={sigma:g}  " + "  ".join(row))


if __name__ == "__main__":
    main()
