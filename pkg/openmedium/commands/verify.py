"""Canned scenarios that print PASS or FAIL with the evidence behind the verdict."""
import tempfile
from pathlib import Path

from ..observatory.genotypes import chain_genotype
from ..observatory.metrics import chem_organisms
from ..utils.calculations import fnv1a64
from ..utils.checkpoint import checkpoint_name
from ..utils.config import RunConfig
from ..utils.data_handler import ancestor_text
from ..utils.errors import AuditViolation
from ..utils.rng import RngStreams
from ..utils.simulation import EVENTS_FILE, Experiment, run_loop
from ..worlds import isa, make_world
from . import ExitStatus

SCENARIOS = ("ancestor", "replicator", "conservation", "determinism")
DEFAULT_STEPS = {"replicator": 20000, "conservation": 100000, "determinism": 400}
# instructions per cell of the ancestor copy loop: mov_ii inc_a inc_b dec_c ifz,
# the four template nops the ifz skip lands on, then jmp
COPY_COST_PER_CELL = 10
CHECK_EVERY = 100


def register(subparsers):
    p = subparsers.add_parser("verify", help="run a built-in check; exit 3 on FAIL")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--genome", help="genome file for the ancestor check (default: shipped ancestor)")
    p.add_argument("--steps", type=int, help="step budget for replicator, conservation and determinism")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_verify)


def verify_ancestor(genome: bytes, seed: int = 0, soup_size: int = 60000) -> tuple:
    """Mutation-free soup: two or more organisms, all with the ancestor's genotype,
    inside ten copy-loop budgets."""
    cfg = RunConfig(world_kind="soup", seed=seed, soup_size=soup_size, p_copy_flip=0.0, p_cosmic=0.0)
    world = make_world(cfg, RngStreams(seed), genome)
    ancestor_id = fnv1a64(genome)
    budget = 10 * COPY_COST_PER_CELL * len(genome)
    while world.instructions < budget and not world.extinct and world.population < 2:
        world.step()
        world.drain_events()
    genotypes = {org.genotype_id for org in world.orgs.values()}
    ok = world.population >= 2 and genotypes == {ancestor_id}
    evidence = [
        f"genome {len(genome)} cells, genotype {ancestor_id:016x}",
        f"population {world.population} after {world.instructions} of {budget} instructions",
        f"genotypes {' '.join(f'{g:016x}' for g in sorted(genotypes)) or 'none'}",
    ]
    return ok, evidence


def _max_chain_abundance(cfg, steps: int) -> tuple:
    world = make_world(cfg, RngStreams(cfg.seed))
    seeded = chain_genotype(cfg.payload).genotype_id
    best, at = 0, 0
    for _ in range(steps):
        world.step()
        if world.clock % CHECK_EVERY == 0 or world.clock == steps:
            counts, _, _ = chem_organisms(world.snapshot())
            if counts.get(seeded, 0) > best:
                best, at = counts[seeded], world.clock
            if best >= 2:
                break
    return best, at


def verify_replicator(steps: int, seed: int = 0) -> tuple:
    """A seeded chain copies itself when food is around and never without it."""
    cfg = RunConfig(world_kind="atoms", seed=seed, p_bond_break=0.0, p_state_reset=0.0)
    fed, fed_at = _max_chain_abundance(cfg, steps)
    starved_cfg = cfg.replace(food_count=0, cap_food_count=0)
    starved, _ = _max_chain_abundance(starved_cfg, steps)
    ok = fed >= 2 and starved <= 1
    evidence = [
        f"with food: {fed} copies of {cfg.payload!r}" + (f" by step {fed_at}" if fed >= 2 else f" within {steps} steps"),
        f"without food: at most {starved} within {steps} steps",
    ]
    return ok, evidence


def verify_conservation(steps: int, seed: int = 0) -> tuple:
    cfg = RunConfig(world_kind="atoms", seed=seed, steps=steps, strict_audit=True)
    world = make_world(cfg, RngStreams(seed))
    before = world.census().tolist()
    try:
        result = run_loop(world, cfg)
    except AuditViolation as exc:
        return False, [str(exc)]
    after = world.census().tolist()
    census = " ".join(f"{letter}={n}" for letter, n in zip("abcdef", after))
    return before == after, [f"census unchanged over {result.steps_run} steps and {result.frames} audits: {census}"]


def _run(cfg, out: Path, observatory: bool = True):
    Experiment(cfg.replace(output_dir=str(out)), observatory=observatory).start()
    return out


def verify_determinism(steps: int, seed: int = 0) -> tuple:
    """Repeat runs match byte for byte, with or without the observatory, and
    a run split by a resume ends on the same checkpoint."""
    ok, evidence = True, []
    half = steps // 2
    configs = {
        "soup": RunConfig(world_kind="soup", seed=seed, steps=steps, soup_size=8000, metrics_interval=50),
        "atoms": RunConfig(world_kind="atoms", seed=seed, steps=steps, grid_width=32, grid_height=32,
                           food_count=100, cap_food_count=20, metrics_interval=50),
    }
    with tempfile.TemporaryDirectory(prefix="openmedium-verify-") as tmp:
        root = Path(tmp)
        for kind, cfg in configs.items():
            final = checkpoint_name(steps)
            a = _run(cfg, root / f"{kind}-a")
            b = _run(cfg, root / f"{kind}-b", observatory=False)
            split = _run(cfg.replace(steps=half), root / f"{kind}-split")
            Experiment.resume(split / checkpoint_name(half), steps - half).continue_run()
            same_events = (a / EVENTS_FILE).read_bytes() == (b / EVENTS_FILE).read_bytes()
            same_ckpt = (a / final).read_bytes() == (b / final).read_bytes()
            same_resume = (a / final).read_bytes() == (split / final).read_bytes()
            ok = ok and same_events and same_ckpt and same_resume
            evidence.append(
                f"{kind}: events {'match' if same_events else 'DIFFER'}, "
                f"observatory on/off {'match' if same_ckpt else 'DIFFER'}, "
                f"{half}+{steps - half} resume {'matches' if same_resume else 'DIFFERS'}"
            )
    return ok, evidence


def cmd_verify(args) -> ExitStatus:
    steps = args.steps if args.steps is not None else DEFAULT_STEPS.get(args.scenario, 0)
    if args.scenario == "ancestor":
        genome = isa.parse_genome(ancestor_text(args.genome or ""))
        ok, evidence = verify_ancestor(genome, args.seed)
    elif args.scenario == "replicator":
        ok, evidence = verify_replicator(steps, args.seed)
    elif args.scenario == "conservation":
        ok, evidence = verify_conservation(steps, args.seed)
    else:
        ok, evidence = verify_determinism(steps, args.seed)
    print(f"{'PASS' if ok else 'FAIL'} {args.scenario}")
    for line in evidence:
        print(f"  {line}")
    return ExitStatus.OK if ok else ExitStatus.VERIFY_FAILED
