from ..observatory.components import connected_components
from ..observatory.detectors import foreign_fraction
from ..observatory.genotypes import CHAIN, chem_genotype, soup_genotype
from ..utils.checkpoint import checkpoint_load
from ..utils.errors import UsageError
from ..worlds import isa
from ..worlds.rules import TYPE_LETTERS
from . import ExitStatus


def register(subparsers):
    p = subparsers.add_parser("inspect", help="summarize a checkpoint, or show one organism")
    p.add_argument("checkpoint")
    p.add_argument("selector", nargs="?", help="org:N (soup organism id, or chain index for atoms)")
    p.set_defaults(handler=cmd_inspect)


def parse_selector(text: str) -> int:
    kind, _, value = text.partition(":")
    if kind != "org" or not value.isdigit():
        raise UsageError(f"selector must read org:N, got {text!r}")
    return int(value)


def cmd_inspect(args) -> ExitStatus:
    ckpt = checkpoint_load(args.checkpoint)
    world = ckpt.world
    wanted = parse_selector(args.selector) if args.selector else None
    if world.kind == "soup":
        _inspect_soup(world.snapshot(), wanted)
    else:
        _inspect_chem(world.snapshot(), wanted)
    return ExitStatus.OK


def _inspect_soup(snap, wanted):
    if wanted is None:
        print(f"soup step={snap.step} organisms={len(snap.organisms)} free={snap.free_cells}/{snap.soup_size}")
        for org in snap.organisms:
            print(f"  org:{org.id} start={org.start} len={org.length} genotype={org.genotype_id:016x} parent={org.parent_id}")
        return
    org = next((o for o in snap.organisms if o.id == wanted), None)
    if org is None:
        raise UsageError(f"no organism {wanted}")
    genotype = soup_genotype(snap.body(org))
    share = foreign_fraction(org)
    print(f"; org:{org.id} start={org.start} len={org.length} genotype={org.genotype_id:016x} born={org.birth_step}")
    print(f"; ax={org.ax} bx={org.bx} cx={org.cx} ip={org.ip} stack={list(org.stack)} errors={org.error_flag_count}")
    if genotype.genotype_id != org.genotype_id:
        print("; body changed since birth")
    if share is not None:
        print(f"; foreign share {share:.3f}")
    print(isa.genome_text(snap.body(org)), end="")


def _inspect_chem(snap, wanted):
    partners = snap.partners()
    chains = []
    for component in connected_components(snap):
        if len(component) > 1:
            genotype = chem_genotype(component, snap.types, partners)
            if genotype.kind == CHAIN:
                chains.append((component, genotype))
    if wanted is None:
        census = " ".join(f"{letter}={n}" for letter, n in zip(TYPE_LETTERS, snap.census))
        print(f"atoms step={snap.step} grid={snap.width}x{snap.height} atoms={snap.atom_count} bonds={len(snap.bonds)}")
        print(f"census {census}")
        for k, (component, genotype) in enumerate(chains):
            print(f"  org:{k} atoms={len(component)} genotype={genotype.genotype_id:016x} sequence={genotype.canonical}")
        return
    if wanted >= len(chains):
        raise UsageError(f"no chain {wanted}")
    component, genotype = chains[wanted]
    print(f"org:{wanted} genotype={genotype.genotype_id:016x} sequence={genotype.canonical}")
    for atom in component:
        print(
            f"  atom {atom} {TYPE_LETTERS[int(snap.types[atom])]}{int(snap.states[atom])} "
            f"at ({int(snap.xs[atom])}, {int(snap.ys[atom])}) bonds={partners[atom]}"
        )
