"""Contraction factor and Strichartz ratio of the Duhamel map across data sizes (n = k = 1, μ = 4)."""
import argparse

import numpy as np

from prodnls.evolution import EvolutionConfig, ball_spec, contraction_factor, evolve, free_series
from prodnls.exponents import NonlinearityContext
from prodnls.fields import Field, mixed_norm
from prodnls.grid import BoxGrid, ProductGrid, TorusSpectrum
from prodnls.scattering import strichartz_ratios


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.0125, 0.025, 0.05, 0.1])
    ap.add_argument("--trials", type=int, default=8)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--lam", type=float, default=-1.0)
    args = ap.parse_args()

    g = ProductGrid(BoxGrid(1, 32.0, 256), TorusSpectrum(1, (1.0,), 8))
    ctx = NonlinearityContext(1, 1, 4, lam=args.lam, sigma=0.75)
    cfg = EvolutionConfig(ctx, 1e-2, 1.0)
    factors = []
    print(f"{'eps':>8} {'radius':>10} {'max':>10} {'mean':>10} {'(6,6) ratio':>12}")
    for eps in args.eps:
        f = Field.from_function(g, lambda x, y: eps * np.exp(-x ** 2 / 2) * np.exp(1j * y))
        radius = 0.5 * mixed_norm(free_series(f, cfg.sample_times()), ball_spec(ctx))
        st = contraction_factor(f, cfg, radius, trials=args.trials, seed=args.seed)
        ratio = next(iter(strichartz_ratios(evolve(f, cfg), ctx).values()))
        factors.append(st.max)
        print(f"{eps:8.4f} {radius:10.3e} {st.max:10.3e} {st.mean:10.3e} {ratio:12.5f}")
    if len(factors) > 1:
        slope = np.polyfit(np.log(args.eps), np.log(factors), 1)[0]
        print(f"log-log slope {slope:.3f} (mu = 4)")


if __name__ == "__main__":
    main()
