"""Tests for detectors.py - parasite share and stasis verdicts."""

from types import SimpleNamespace

from openmedium.observatory.detectors import (
    ACTIVE,
    INDETERMINATE,
    STASIS,
    detect_parasites,
    detect_stasis,
    foreign_fraction,
)


def org(org_id, own, foreign, done=True):
    return SimpleNamespace(
        id=org_id, window_done=done, last_own=own, last_foreign=foreign,
        executed_own=own, executed_foreign=foreign,
    )


def test_foreign_fraction_uses_completed_window():
    o = SimpleNamespace(window_done=True, last_own=10, last_foreign=30, executed_own=5, executed_foreign=0)
    assert foreign_fraction(o) == 0.75


def test_foreign_fraction_before_any_instruction():
    assert foreign_fraction(org(1, 0, 0, done=False)) is None


def test_parasite_threshold_is_strict():
    snapshot = SimpleNamespace(organisms=(org(1, 50, 50), org(2, 10, 90), org(3, 100, 0)))
    assert detect_parasites(snapshot, 0.5) == [2]


def test_stasis_needs_a_full_window():
    history = [(step, {1: 20}) for step in range(0, 500, 100)]
    verdict = detect_stasis(history, {1: 0}, window=1000, persistence=100, n_min=10)
    assert verdict.status == INDETERMINATE


def test_old_dominant_genotype_means_stasis():
    history = [(step, {1: 20}) for step in range(0, 3001, 100)]
    verdict = detect_stasis(history, {1: 0}, window=1000, persistence=100, n_min=10)
    assert verdict.status == STASIS
    assert verdict.window == (2000, 3000)


def test_new_persistent_genotype_means_active():
    history = [(step, {1: 20, 2: 15 if step >= 2500 else 0}) for step in range(0, 3001, 100)]
    verdict = detect_stasis(history, {1: 0, 2: 2500}, window=1000, persistence=300, n_min=10)
    assert verdict.status == ACTIVE
    assert verdict.active
    assert verdict.newest_persistent == 2


def test_new_but_brief_genotype_is_not_enough():
    history = [(step, {1: 20, 2: 15 if step == 2900 else 0}) for step in range(0, 3001, 100)]
    verdict = detect_stasis(history, {1: 0, 2: 2900}, window=1000, persistence=300, n_min=10)
    assert verdict.status == STASIS


def test_new_but_rare_genotype_is_not_enough():
    history = [(step, {1: 20, 2: 3 if step >= 2500 else 0}) for step in range(0, 3001, 100)]
    verdict = detect_stasis(history, {1: 0, 2: 2500}, window=1000, persistence=300, n_min=10)
    assert verdict.status == STASIS
