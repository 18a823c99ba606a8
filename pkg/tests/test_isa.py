"""Tests for isa.py - genome text grammar."""

import pytest

from openmedium.utils.errors import GenomeError
from openmedium.worlds import isa


def test_opcode_numbers_are_frozen():
    assert isa.OPCODES["nop0"] == 0
    assert isa.OPCODES["mov_ii"] == 8
    assert isa.OPCODES["divide"] == 15
    assert len(isa.MNEMONICS) == 16


def test_comments_and_case():
    cells = isa.parse_genome("NOP1 ; marker\n\n; whole-line comment\nmov_ii\n")
    assert cells == bytes([isa.NOP1, isa.MOV_II])


def test_unknown_mnemonic_names_the_line():
    with pytest.raises(GenomeError, match="line 2"):
        isa.parse_genome("nop0\nfly\n")


def test_empty_genome():
    with pytest.raises(GenomeError, match="empty"):
        isa.parse_genome("; nothing\n")


def test_too_long():
    with pytest.raises(GenomeError, match="too long"):
        isa.parse_genome("nop0\n" * 5, max_length=4)


def test_text_reads_back(ancestor):
    assert isa.parse_genome(isa.genome_text(ancestor)) == ancestor


def test_shipped_ancestor(ancestor):
    assert len(ancestor) == 88
    assert ancestor.count(isa.DIVIDE) == 1
    assert ancestor.count(isa.MAL) == 1
