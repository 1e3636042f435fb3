"""Random n = 10, m = 2 problem: 220 symmetric solutions from the dense path,
then RI (one vector per MEP row) against RIS (one shared vector)."""
import argparse
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from nepv.cli import write_history
from nepv.dense import solve_all
from nepv.problems import gen_random
from nepv.resinv import RiConfig, ri_solve, ris_solve
from nepv.rng import named_rng


@dataclass
class Config:
    n: int = 10
    seed: int = 0
    target: complex = 0.0
    perturbation: float = 1e-3
    max_iter: int = 100
    tol: float = 1e-12
    out_dir: Path = Path("out/example2")


def main(cfg: Config) -> None:
    p, g = gen_random(cfg.n, 2, cfg.seed)
    t0 = time.perf_counter()
    sol = solve_all(p, g=g)
    print(f"dense: {len(sol.pairs)} GEP eigenvalues, {len(sol.true_records)} symmetric, "
          f"{time.perf_counter() - t0:.1f} s")

    # start near the symmetric solution closest to the target
    rec = min(sol.true_records, key=lambda r: abs(r.lam - cfg.target))
    rng = named_rng(cfg.seed, "perturb")
    x0 = rec.x + cfg.perturbation * rng.standard_normal(cfg.n)
    sigma = rec.lam + cfg.perturbation
    print(f"target solution lambda {rec.lam:.8f}")
    run = RiConfig(sigma=sigma, x0=x0, max_iter=cfg.max_iter, tol=cfg.tol, record_vectors=True)
    ri, ris = ri_solve(sol.mep, run), ris_solve(sol.mep, run)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for res in (ri, ris):
        write_history(cfg.out_dir / f"{res.method}.csv", res, 2)
        print(f"{res.method:3s} lambda {res.lam:.8f} converged={res.converged} in {res.iterations} steps")
    spread = [max(np.linalg.norm(x - xs[0]) / np.linalg.norm(xs[0]) for x in xs[1:]) for xs in ri.vectors]
    print("RI vector spread per iteration:", " ".join(f"{s:.0e}" for s in spread))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--out-dir", type=Path, default=Config.out_dir)
    a = ap.parse_args()
    main(Config(seed=a.seed, out_dir=a.out_dir))
