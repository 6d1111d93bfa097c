"""Bench rows on the bundled UCI files; each row skips when its file is not vendored."""

import pytest

from semtree.bench import PASS, default_bench_spec, run_row
from semtree.data.registry import available, is_synthetic

pytestmark = [pytest.mark.slow, pytest.mark.integration]

ROWS = [row for row in default_bench_spec().rows
        if not is_synthetic(row.dataset) and not row.report_only]


@pytest.mark.parametrize("row", ROWS, ids=[row.name for row in ROWS])
def test_bench_row(row, tmp_path):
    if not available().get(row.dataset, False):
        pytest.skip(f"{row.dataset} is not vendored")
    outcome = run_row(row, tmp_path)
    assert outcome.status == PASS, outcome.aggregate.to_dict()
    assert not outcome.aggregate.partial
