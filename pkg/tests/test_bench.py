import json

import pytest

from semtree.bench import (
    FAIL,
    PASS,
    REPORTED,
    SKIPPED,
    BenchOutcome,
    BenchRow,
    BenchSpec,
    any_failed,
    default_bench_spec,
    format_markdown,
    run_row,
    write_report,
)
from semtree.exceptions import ConfigError
from semtree.factory import path_config
from semtree.training import AGGREGATE_NAME, AggregateResult
from semtree.types import DataFormat, OptimConfig, OptimizerType, RunConfig, TaskType


def aggregate(metrics, task=TaskType.CLASSIFICATION, config_hash='h'):
    seeds = tuple(range(len(metrics)))
    return AggregateResult('d', task, 2, config_hash, seeds, dict(zip(seeds, metrics)))


def blobs_row(expected=0.0):
    config = RunConfig(dataset='synthetic:blobs', height=1,
                       optim=OptimConfig(epochs=3, lr=0.1, batch_size=32))
    return BenchRow('blobs-h1', 'synthetic:blobs', 1, expected, 0.0, seeds=1, config=config)


class TestJudge:
    def test_accuracy_within_tolerance(self):
        row = BenchRow('r', 'banknote', 3, 99.8, -0.8)
        assert row.judge(aggregate([99.0, 99.2])) == PASS
        assert row.judge(aggregate([98.0, 99.0])) == FAIL

    def test_rmse_upper_bound(self):
        row = BenchRow('r', 'abalone', 5, 2.135, 0.145, task=TaskType.REGRESSION)
        assert row.judge(aggregate([2.2, 2.25], TaskType.REGRESSION)) == PASS
        assert row.judge(aggregate([2.3, 2.31], TaskType.REGRESSION)) == FAIL

    def test_min_passing_seeds(self):
        row = BenchRow('r', 'acute-inflammations-1', 2, 100.0, 0.0, min_passing_seeds=9)
        assert row.judge(aggregate([100.0] * 9 + [87.5])) == PASS
        assert row.judge(aggregate([100.0] * 8 + [87.5, 95.0])) == FAIL

    def test_no_finite_metrics(self):
        row = BenchRow('r', 'banknote', 3, 99.8, -0.8)
        assert row.judge(aggregate([])) == FAIL


class TestSpec:
    def test_default_rows(self):
        rows = {row.name: row for row in default_bench_spec().rows}
        assert rows['balance-scale-h2'].tolerance == -3.2
        assert rows['abalone-h5'].seeds == 5
        assert rows['abalone-h5'].task is TaskType.REGRESSION
        assert rows['acute-inflammations-2-h2'].min_passing_seeds == 9
        assert rows['synthetic-piecewise-h1'].config is not None

    def test_from_dict_defaults(self):
        spec = BenchSpec.from_dict({'rows': [{'dataset': 'banknote', 'height': 3, 'expected': 99.8}]})
        row = spec.rows[0]
        assert row.name == 'banknote'
        assert row.seeds == 10
        assert row.tolerance == 0.0

    def test_missing_rows(self):
        with pytest.raises(ConfigError, match="rows"):
            BenchSpec.from_dict({})

    def test_bad_row(self):
        with pytest.raises(ConfigError, match="bench row"):
            BenchSpec.from_dict({'rows': [{'dataset': 'banknote', 'height': 'tall', 'expected': 1}]})

    def test_row_config_carries_seeds(self):
        config = default_bench_spec().rows[0].run_config()
        assert config.seeds == tuple(range(10))
        assert config.height == 3

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / 'spec.json'
        path.write_text('[', encoding='utf-8')
        with pytest.raises(ConfigError):
            BenchSpec.load(path)


class TestRunRow:
    def test_missing_dataset_skipped(self, tmp_path, monkeypatch):
        monkeypatch.setenv('SEMTREE_DATA_DIR', str(tmp_path))
        outcome = run_row(BenchRow('b', 'banknote', 3, 99.8, -0.8, seeds=1))
        assert outcome.status == SKIPPED
        assert 'banknote' in outcome.reason
        assert outcome.aggregate is None

    def test_synthetic_row_runs(self, tmp_path):
        outcome = run_row(blobs_row(), tmp_path)
        assert outcome.status == PASS
        assert (tmp_path / 'blobs-h1' / AGGREGATE_NAME).is_file()

    def test_reuse_matching_hash(self, tmp_path):
        row = blobs_row()
        saved = aggregate([77.0], config_hash=row.run_config().config_hash())
        saved.write(tmp_path / row.name / AGGREGATE_NAME)
        outcome = run_row(row, tmp_path, reuse=True)
        assert outcome.reused
        assert outcome.aggregate.mean == 77.0

    def test_reuse_ignores_other_hash(self, tmp_path):
        row = blobs_row()
        aggregate([77.0], config_hash='stale').write(tmp_path / row.name / AGGREGATE_NAME)
        outcome = run_row(row, tmp_path, reuse=True)
        assert not outcome.reused
        assert outcome.aggregate.config_hash == row.run_config().config_hash()


class TestReport:
    def test_markdown_table(self):
        outcomes = [
            BenchOutcome(BenchRow('a', 'banknote', 3, 99.8, -0.8), PASS, aggregate([99.0, 100.0])),
            BenchOutcome(BenchRow('b', 'abalone', 5, 2.135, 0.145, task=TaskType.REGRESSION), SKIPPED),
        ]
        lines = format_markdown(outcomes).splitlines()
        assert lines[0] == '| dataset | height | ours (mean ± std) | reference | status |'
        assert lines[2] == '| a | 3 | 99.5 ± 0.5 | 99.8 | pass |'
        assert lines[3] == '| b | 5 | - | 2.135 | skipped |'
        assert lines[-1] == 'RMSE rows are reported in original target units.'

    def test_write_report(self, tmp_path):
        outcomes = [BenchOutcome(BenchRow('a', 'banknote', 3, 99.8, -0.8), FAIL, aggregate([90.0]))]
        paths = write_report(outcomes, tmp_path / 'out')
        report = json.loads(paths['json'].read_text(encoding='utf-8'))
        assert report['rows'][0]['status'] == FAIL
        assert report['rows'][0]['result']['mean'] == 90.0
        assert any_failed(outcomes)

    def test_skipped_is_not_failure(self):
        assert not any_failed([BenchOutcome(BenchRow('a', 'banknote', 3, 99.8, -0.8), SKIPPED)])


class TestReportOnly:
    def test_judged_reported(self):
        row = BenchRow('r', 'protein', 4, 68.60, None)
        assert row.report_only
        assert row.judge(aggregate([12.0, 13.0])) == REPORTED
        assert BenchRow('r', 'protein', 4, None, None).judge(aggregate([50.0])) == REPORTED

    def test_no_metrics_still_fails(self):
        assert BenchRow('r', 'protein', 4, 68.60, None).judge(aggregate([])) == FAIL

    def test_default_rows(self):
        rows = {row.name: row for row in default_bench_spec().rows}
        blood = rows['blood-transfusion-h2']
        assert blood.report_only
        assert blood.expected == 78.5
        assert rows['microsoft-h5'].task is TaskType.REGRESSION
        assert rows['comp-activ-h5'].seeds == 5
        assert not rows['banknote-h3'].report_only

    def test_path_row_config(self, tmp_path, monkeypatch):
        monkeypatch.setenv('SEMTREE_DATA_DIR', str(tmp_path))
        rows = {row.name: row for row in default_bench_spec().rows}
        config = rows['letter-h10'].run_config()
        assert config.dataset == str(tmp_path / 'letter.scale')
        assert config.test_dataset == str(tmp_path / 'letter.scale.t')
        assert config.format is DataFormat.LIBSVM
        assert config.height == 10
        assert config.optim.optimizer is OptimizerType.RMSPROP
        ctslice = rows['ctslice-h5'].run_config()
        assert ctslice.test_dataset is None
        assert ctslice.splits == (0.5, 0.1, 0.4)
        assert ctslice.target == ('reference',)

    def test_from_dict(self):
        spec = BenchSpec.from_dict({'rows': [
            {'dataset': 'protein', 'height': 4, 'expected': 68.6, 'report_only': True},
            {'dataset': 'letter', 'height': 10},
        ]})
        flagged, bare = spec.rows
        assert flagged.tolerance is None and flagged.expected == 68.6
        assert bare.expected is None and bare.report_only

    def test_dict_keeps_missing_tolerance(self):
        row = BenchRow('r', 'protein', 4, 68.6, None)
        assert BenchRow.from_dict(row.to_dict()) == row

    def test_missing_files_skipped(self, tmp_path, monkeypatch):
        monkeypatch.setenv('SEMTREE_DATA_DIR', str(tmp_path))
        (tmp_path / 'pendigits').write_text('1 1:0.5\n', encoding='utf-8')
        outcome = run_row(BenchRow('p', 'pendigits', 8, 97.02, None, seeds=1))
        assert outcome.status == SKIPPED
        assert 'pendigits.t' in outcome.reason

    def test_synthetic_row_reported(self, tmp_path):
        base = blobs_row()
        row = BenchRow('blobs-h1', base.dataset, 1, None, None, seeds=1, config=base.config)
        outcome = run_row(row, tmp_path)
        assert outcome.status == REPORTED
        assert not any_failed([outcome])

    def test_markdown_without_reference(self):
        outcome = BenchOutcome(BenchRow('p', 'protein', 4, None, None), REPORTED, aggregate([70.0]))
        assert format_markdown([outcome]).splitlines()[2] == '| p | 4 | 70.0 ± 0.0 | - | reported |'

    def test_unknown_path_dataset(self):
        with pytest.raises(ConfigError, match="path dataset"):
            path_config('imagenet')
