"""The 16-opcode soup instruction set and the genome text grammar.

Opcode numbers are frozen: genotype ids are hashes of raw cell values.

    0 nop0     1 nop1     2 ifz      3 jmp
    4 adrf     5 adrb     6 sub_ab   7 xchg
    8 mov_ii   9 inc_a   10 inc_b   11 dec_c
   12 push_ax 13 pop_ax  14 mal     15 divide
"""
from ..utils.errors import GenomeError

MNEMONICS = (
    "nop0", "nop1", "ifz", "jmp",
    "adrf", "adrb", "sub_ab", "xchg",
    "mov_ii", "inc_a", "inc_b", "dec_c",
    "push_ax", "pop_ax", "mal", "divide",
)
OPCODES = {name: code for code, name in enumerate(MNEMONICS)}

NOP0, NOP1, IFZ, JMP, ADRF, ADRB, SUB_AB, XCHG = range(8)
MOV_II, INC_A, INC_B, DEC_C, PUSH_AX, POP_AX, MAL, DIVIDE = range(8, 16)

OPCODE_MASK = 0x0F
TEMPLATE_OPS = (JMP, ADRF, ADRB)
STACK_DEPTH = 10


def parse_genome(text: str, max_length: int | None = None) -> bytes:
    """Read one mnemonic per line; ``;`` starts a comment, case is ignored."""
    cells = bytearray()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip().lower()
        if not line:
            continue
        if line not in OPCODES:
            raise GenomeError(f"line {lineno}: unknown mnemonic {line!r}")
        cells.append(OPCODES[line])
    if not cells:
        raise GenomeError("genome is empty")
    if max_length is not None and len(cells) > max_length:
        raise GenomeError(f"genome too long: {len(cells)} cells > max_org_size {max_length}")
    return bytes(cells)


def disassemble(cells) -> list[str]:
    return [MNEMONICS[c & OPCODE_MASK] for c in cells]


def genome_text(cells) -> str:
    return "\n".join(disassemble(cells)) + "\n"
