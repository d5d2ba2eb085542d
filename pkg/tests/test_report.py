import pytest

from slap.report import (REFERENCE_TOTALS, expected_size, reconcile, run_report, summary_table, analytic_sizes,
                         median_iqr)
from slap.scenario import load_scenario, run_scenario


@pytest.fixture(scope="module", params=["honest_ap_query", "rural_nd_query"])
def run(request):
    return run_scenario(load_scenario(request.param), capture=True)


def test_sizes_reconcile_exactly(run):
    assert reconcile(run.net.trace, run.net.captured) == []
    assert run_report(run)["reconciliation"] == "exact"


def test_reconcile_detects_tampering(run):
    trace = [dict(r) for r in run.net.trace]
    delivered = [r for r in trace if not r.get("dropped")]
    delivered[3]["size"] += 1
    assert len(reconcile(trace, run.net.captured)) == 1
    assert reconcile(trace[:-1], run.net.captured)


def test_phase_bytes_sum_to_trace(run):
    rep = run_report(run)
    assert sum(rep["bytes_by_phase"].values()) == sum(r["size"] for r in run.net.trace if not r.get("dropped"))


def test_analytic_sizes_arithmetic():
    rows = {r["phase"]: r for r in analytic_sizes(k=2)}
    assert rows["pol_ap"]["analytic_bytes"] == 10 * 32 + 2 * 64 + 3 * 32 + 8 + 16
    assert rows["query"]["analytic_bytes"] == 7 * 32 + 64 + 32 + 8 + 16 + 560
    assert {r: rows[r]["reference_bytes"] for r in rows} == REFERENCE_TOTALS


def test_unknown_type_has_no_rule():
    with pytest.raises(ValueError):
        expected_size("mystery", b"")


def test_summary_table_and_stats():
    text = summary_table([{"a": 1.23456, "b": None}], ["a", "b"])
    assert "1.235" in text and "-" in text
    assert median_iqr([1.0, 2.0, 3.0, 4.0, 5.0])["median"] == 3.0
