"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one PASS/FAIL line (with per-check measurements) straight
to the terminal, so ``pytest -v`` output doubles as the acceptance report.
"""

import pytest

from ergolab.verify import CRITERIA


def _report(number, capsys):
    report = CRITERIA[number](seed=0)
    with capsys.disabled():
        print()
        print(report.line())
        for c in report.checks:
            print(f"    [{'ok' if c.passed else 'FAIL'}] {c.name}" + (f": {c.measured}" if c.measured else ""))
    return report


def test_criterion_1_exactness(capsys):
    assert _report(1, capsys).passed


def test_criterion_2_roth_positivity(capsys):
    assert _report(2, capsys).passed


def test_criterion_3_certificate_soundness(capsys):
    assert _report(3, capsys).passed


@pytest.mark.slow
def test_criterion_4_weak_mixing_convergence(capsys):
    assert _report(4, capsys).passed


def test_criterion_5_bootstrap_consistency(capsys):
    assert _report(5, capsys).passed


def test_criterion_6_joining_laws(capsys):
    assert _report(6, capsys).passed


@pytest.mark.slow
def test_criterion_7_spectral_dichotomy(capsys):
    assert _report(7, capsys).passed


def test_criterion_8_return_bounds(capsys):
    assert _report(8, capsys).passed
