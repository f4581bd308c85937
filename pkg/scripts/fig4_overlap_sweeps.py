"""Overlap of every clustering method across the detectability transition.

Runs two resumable sweeps: one over c_in - c_out at fixed mean degree, one
over the mean degree at a fixed c_out / c_in ratio.  Each writes per-run rows
and a per-point summary (mean overlap and standard error per method).
Interrupted runs pick up where they stopped.
"""

from dataclasses import dataclass
from pathlib import Path

from _common import parse_config
from nbclust.sweep import SweepSpec, run_sweep


@dataclass
class Config:
    n: int = 10_000
    seeds: int = 20
    c: float = 3.0
    ratio: float = 0.1
    gaps: tuple = (1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5)
    degrees: tuple = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0)
    threads: int = 1
    base_seed: int = 0
    out: str = "figdata/fig4"


def main(cfg: Config):
    panels = {
        "gap": SweepSpec("gap", cfg.gaps, n=cfg.n, seeds=cfg.seeds, c=cfg.c, base_seed=cfg.base_seed),
        "degree": SweepSpec("c", cfg.degrees, n=cfg.n, seeds=cfg.seeds, ratio=cfg.ratio, base_seed=cfg.base_seed),
    }
    for name, spec in panels.items():
        path = Path(f"{cfg.out}_{name}.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        run_sweep(spec, path, threads=cfg.threads)
        print(f"{name}: {path} (summary in {path.with_suffix('.summary.csv')})")


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
