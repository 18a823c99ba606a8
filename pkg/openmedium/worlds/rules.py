"""Reaction rule grammar for the atom medium.

One rule per line, ``T1s1 SEP T2s2 -> T1s1' SEP' T2s2'``, e.g. ``a1+b1 -> a2#b2``.
``+`` means unbonded, ``#`` bonded. Types are ``a``..``f``; ``x`` and ``y``
are wildcards, the same letter binding the same type within a rule. ``#``
is taken, so comments start with ``;``.
"""
import itertools
import re
from dataclasses import dataclass

import numpy as np

from ..utils.errors import RuleError

TYPE_LETTERS = "abcdef"
WILDCARDS = "xy"
BARRIER_TYPE = TYPE_LETTERS.index("f")

_ATOM = re.compile(r"([a-z])(\d+)")
_SIDE = re.compile(r"^([a-z]\d+)(?:([+#])([a-z]\d+))*$")


@dataclass(frozen=True)
class ReactionRule:
    type_a: str
    state_a: int
    type_b: str
    state_b: int
    bonded_before: bool
    new_state_a: int
    new_state_b: int
    bonded_after: bool
    line: int = 0
    text: str = ""

    def bindings(self):
        """Concrete (type_a, type_b) index pairs this rule applies to."""
        letters = sorted({t for t in (self.type_a, self.type_b) if t in WILDCARDS})
        for combo in itertools.product(range(len(TYPE_LETTERS)), repeat=len(letters)):
            bound = dict(zip(letters, combo))
            ta = bound.get(self.type_a, TYPE_LETTERS.find(self.type_a))
            tb = bound.get(self.type_b, TYPE_LETTERS.find(self.type_b))
            yield ta, tb


@dataclass(frozen=True)
class RuleTable:
    """Rules in file order plus a lookup keyed by (bonded, key_p, key_q).

    A key is ``type * (max_state + 1) + state``. ``rule_index`` holds the
    first matching rule or -1; ``swapped`` says the pair matched as (B, A).
    """
    rules: tuple
    max_state: int
    rule_index: np.ndarray
    swapped: np.ndarray

    def __len__(self):
        return len(self.rules)

    def key(self, atom_type, state):
        return atom_type * (self.max_state + 1) + state


def _parse_side(side: str, lineno: int):
    side = side.replace(" ", "").replace("\t", "")
    if not _SIDE.match(side):
        raise RuleError(f"line {lineno}: cannot read {side!r}")
    atoms = [(t, int(s)) for t, s in _ATOM.findall(side)]
    seps = re.findall(r"[+#]", side)
    for t, _ in atoms:
        if t not in TYPE_LETTERS and t not in WILDCARDS:
            raise RuleError(f"line {lineno}: unknown type {t!r}")
    return atoms, seps


def parse_rule(line: str, lineno: int = 0, max_state: int = 9) -> ReactionRule:
    if line.count("->") != 1:
        raise RuleError(f"line {lineno}: expected exactly one '->'")
    lhs, rhs = line.split("->")
    left, left_sep = _parse_side(lhs, lineno)
    right, right_sep = _parse_side(rhs, lineno)
    if len(left) != 2:
        raise RuleError(f"line {lineno}: a rule acts on exactly two atoms")
    if len(right) != len(left):
        raise RuleError(f"line {lineno}: atom count not conserved")
    for (t0, _), (t1, _) in zip(left, right):
        if t0 != t1:
            raise RuleError(f"line {lineno}: type not conserved")
    for _, state in left + right:
        if state > max_state:
            raise RuleError(f"line {lineno}: state {state} above max_state {max_state}")
    return ReactionRule(
        type_a=left[0][0], state_a=left[0][1], type_b=left[1][0], state_b=left[1][1],
        bonded_before=left_sep[0] == "#", new_state_a=right[0][1], new_state_b=right[1][1],
        bonded_after=right_sep[0] == "#", line=lineno, text=line.strip(),
    )


def parse_rules(text: str, max_state: int = 9) -> RuleTable:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if line:
            rules.append(parse_rule(line, lineno, max_state))
    return build_table(rules, max_state)


def build_table(rules, max_state: int = 9) -> RuleTable:
    size = len(TYPE_LETTERS) * (max_state + 1)
    rule_index = np.full((2, size, size), -1, dtype=np.int32)
    swapped = np.zeros((2, size, size), dtype=bool)
    width = max_state + 1
    for i, rule in enumerate(rules):
        bonded = int(rule.bonded_before)
        pairs = [(ta * width + rule.state_a, tb * width + rule.state_b) for ta, tb in rule.bindings()]
        # orientation (A, B) first, so a rule only fills (B, A) where (A, B) left a gap
        for kp, kq in pairs:
            if rule_index[bonded, kp, kq] < 0:
                rule_index[bonded, kp, kq] = i
        for kp, kq in pairs:
            if rule_index[bonded, kq, kp] < 0:
                rule_index[bonded, kq, kp] = i
                swapped[bonded, kq, kp] = True
    return RuleTable(rules=tuple(rules), max_state=max_state, rule_index=rule_index, swapped=swapped)
