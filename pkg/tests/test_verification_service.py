import pytest

from app.service.verification_service import VerificationService

CRITERIA = {
    "fuchsian-cone-angle",
    "orbit-growth",
    "parabolic-torus",
    "horosphere-image",
    "hilbert-distance",
    "duality",
    "generalized-polyhedra",
    "gauss-bonnet",
    "rigidity",
    "determinism",
    "table-coverage",
}


@pytest.fixture(scope="module")
def summary():
    return VerificationService().verify_all(seed=0)


def test_every_criterion_passes(summary):
    assert summary.passed, [row.model_dump() for row in summary.failures]
    assert {row.criterion for row in summary.rows} == CRITERIA
    assert summary.failures == []


def test_table_coverage_row(summary):
    rows = {row.check: row for row in summary.rows if row.criterion == "table-coverage"}
    assert rows["realized_rows"].measured == "[1, 2, 3, 4, 5, 6, 7, 9, 10]"
    assert rows["classified_only_row"].measured == 8


def test_zero_bound_scale_reports_failures():
    tampered = VerificationService().verify_all(seed=0, bound_scale=0.0)
    assert not tampered.passed
    assert tampered.bound_scale == 0.0
    hilbert = next(row for row in tampered.rows if row.criterion == "hilbert-distance")
    assert hilbert.bound == 0.0
