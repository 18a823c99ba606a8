# ── run_batch.py ─────────────────────────────────────────────
# Runs one soup config over several seeds in parallel processes and reports,
# per seed, how the dominant genotype's length compares with the ancestor's.
#   python run_batch.py configs/soup.conf --seeds 5 --instructions 50000000

import argparse
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

import pandas as pd
from tqdm import tqdm

from openmedium.commands import load_config
from openmedium.utils.calculations import dominant
from openmedium.utils.logs import setup_logging
from openmedium.utils.rng import RngStreams
from openmedium.worlds import make_world

logger = logging.getLogger("run_batch")

# ─── settings ───────────────────────────────────────────────
DEFAULT_SEEDS = 5
DEFAULT_INSTRUCTIONS = 50_000_000
SHRINK_TARGET = 0.9          # dominant length at or below 90% of the ancestor
SUMMARY_FILE = Path("runs") / "batch_summary.csv"


# ─── 1. one seed ────────────────────────────────────────────
def run_seed(config, seed: int, instructions: int) -> dict:
    """Step a soup until it has executed ``instructions`` instructions or dies out."""
    cfg = config.replace(seed=seed, world_kind="soup")
    world = make_world(cfg, RngStreams(seed))
    ancestor_length = next(iter(world.orgs.values())).length
    while world.instructions < instructions and not world.extinct:
        world.run_steps(1000)
        world.events.clear()

    counts, lengths = {}, {}
    for org in world.orgs.values():
        counts[org.genotype_id] = counts.get(org.genotype_id, 0) + 1
        lengths[org.genotype_id] = org.length
    top = dominant(counts)
    length = lengths.get(top, 0)
    return {
        "seed": seed,
        "steps": world.clock,
        "instructions": world.instructions,
        "population": world.population,
        "genotypes": len(counts),
        "ancestor_length": ancestor_length,
        "dominant_length": length,
        "ratio": round(length / ancestor_length, 4) if length else 0.0,
        "shrunk": bool(length) and length <= SHRINK_TARGET * ancestor_length,
    }


# ─── 2. main ────────────────────────────────────────────────
def main(argv=None):
    parser = argparse.ArgumentParser(description="multi-seed soup batch (shrinkage check)")
    parser.add_argument("config", nargs="?", help="soup config file (defaults apply when omitted)")
    parser.add_argument("--seeds", type=int, default=DEFAULT_SEEDS)
    parser.add_argument("--first-seed", type=int, default=0)
    parser.add_argument("--instructions", type=int, default=DEFAULT_INSTRUCTIONS)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    parser.add_argument("--out", type=Path, default=SUMMARY_FILE)
    args = parser.parse_args(argv)
    setup_logging()

    t0 = time.time()
    config = load_config(args.config, args.overrides)
    seeds = range(args.first_seed, args.first_seed + args.seeds)

    rows = []
    with ProcessPoolExecutor(args.workers) as ex:
        jobs = {ex.submit(run_seed, config, seed, args.instructions): seed for seed in seeds}
        for fut in tqdm(as_completed(jobs), total=len(jobs), desc="Seeds"):
            try:
                rows.append(fut.result())
            except Exception:
                logger.exception("seed %d failed", jobs[fut])

    if not rows:
        print("no seed finished"); return 1

    table = pd.DataFrame(rows).sort_values("seed").reset_index(drop=True)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(args.out, index=False, lineterminator="\n")
    print(table.to_string(index=False))
    shrunk = int(table["shrunk"].sum())
    print(f"{shrunk} of {len(table)} seeds shrank by 10% or more; {time.time() - t0:.1f}s -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
