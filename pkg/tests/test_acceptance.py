"""Acceptance gate: every criterion at its stated tolerance.

Each test prints its criterion's check lines, so `pytest -v -s
tests/test_acceptance.py` reads as the full verification report. The same
checks back the command line `sigmatoda verify-all`.
"""

import json

import pytest

from sigmatoda import verify


@pytest.fixture(scope="module")
def report():
    return verify.run_all(seed=0)


def _criterion(report, index):
    result = next(r for r in report if r.index == index)
    print()
    print(verify.format_report([result]))
    return result


def test_criterion_1_legendre_certificate(report):
    assert _criterion(report, 1).passed


def test_criterion_2_addition_identities(report):
    assert _criterion(report, 2).passed


def test_criterion_3_toda_identities(report):
    assert _criterion(report, 3).passed


def test_criterion_4_division_polynomials(report):
    result = _criterion(report, 4)
    assert result.passed
    notes = " ".join(c.note for c in result.checks)
    assert "discrepancy" in notes  # the degree-14 tabulation is reported


def test_criterion_5_torsion_periodicity(report):
    assert _criterion(report, 5).passed


def test_criterion_6_flaschka_lax_spectral(report):
    result = _criterion(report, 6)
    assert result.passed
    notes = " ".join(c.note for c in result.checks)
    assert "quasi-period" in notes


def test_criterion_7_poncelet(report):
    assert _criterion(report, 7).passed


def test_criterion_8_runtime(report):
    result = _criterion(report, 8)
    assert result.passed
    total = next(c for c in result.checks if c.name == "total_runtime_seconds")
    assert total.value < 600.0


def test_criterion_8_determinism(report):
    def serialize(results):
        return json.dumps([[r.index, r.title,
                            [[c.name, repr(c.value), c.passed] for c in r.checks
                             if not c.name.endswith("_seconds")]]
                           for r in results if r.index != 8], sort_keys=True)

    second = verify.run_all(seed=0)
    assert serialize(report) == serialize(second)


@pytest.mark.xfail(strict=True,
                   reason="closed forms without the quasi-period factors fail; "
                          "the corrected forms pass at 1e-12 (see criterion 6)")
def test_hamiltonian_forms_without_quasi_period_factors():
    from sigmatoda.division import torsion_to_frame, xi_set
    from sigmatoda.toda import invariant_sigma_relations

    ctx1, _ = verify.canonical_contexts()
    cand = max((c for c in xi_set(ctx1.curve, 3)
                if abs(c.point.x.imag) < 1e-9 and c.point.x.real > 0),
               key=lambda c: c.point.x.real)
    frame = torsion_to_frame(ctx1, cand, 3)
    rel = invariant_sigma_relations(frame, 3)
    assert abs(rel["I1"] - rel["I1_plain"]) < 1e-6
    assert abs(rel["IN1"] - rel["IN1_plain"]) < 1e-6
