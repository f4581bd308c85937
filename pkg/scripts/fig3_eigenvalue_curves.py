"""Leading eigenvalues mu1, mu2 and |mu3| as the community gap c_in - c_out varies.

Averages over independent samples at fixed mean degree c and writes one row
per gap with the means, standard errors and the reference lines c, sqrt(c)
and (c_in - c_out)/2.  mu2 leaves the bulk where the gap crosses 2 sqrt(c).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from _common import parse_config, write_rows
from nbclust.eigen import SolverOpts, topk_eigs
from nbclust.graph import SbmParams, derive_seed, sbm_sample
from nbclust.operators import build_b_prime
from nbclust.sweep import leading_moduli


@dataclass
class Config:
    n: int = 10_000
    c: float = 3.0
    gaps: tuple = (0.0, 1.0, 2.0, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0)
    seeds: int = 20
    base_seed: int = 0
    out: str = "figdata/fig3.csv"


def main(cfg: Config):
    rows = []
    for i, gap in enumerate(cfg.gaps):
        params = SbmParams.from_gap(cfg.n, 2, cfg.c, gap)
        samples = []
        for s in range(cfg.seeds):
            seed = derive_seed(cfg.base_seed, i, s)
            g = sbm_sample(params, seed).graph
            res = topk_eigs(build_b_prime(g).T, SolverOpts(k=3, seed=seed))
            samples.append(leading_moduli(res.values, 2))
        a = np.array(samples, dtype=float)
        # below threshold mu2 is complex in every sample and its column is all NaN
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mean = np.nanmean(a, axis=0)
            err = np.nanstd(a, axis=0) / np.sqrt(np.maximum(np.sum(~np.isnan(a), axis=0), 1))
        rows.append((gap, *mean, *err, cfg.c, np.sqrt(cfg.c), gap / 2))
        print(f"gap {gap:g}: mu1 {mean[0]:.3f} mu2 {mean[1]:.3f} |mu3| {mean[2]:.3f}")
    write_rows(
        cfg.out,
        ["gap", "mu1", "mu2", "mu3_abs", "mu1_err", "mu2_err", "mu3_abs_err", "c", "sqrt_c", "half_gap"],
        rows,
    )


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
