import json

import pytest

from semtree.cli import EXIT_CONFIG, EXIT_CORRUPT, EXIT_FAILURE, EXIT_NO_STANDARDIZER, EXIT_OK, main
from semtree.codecs import CheckpointCodec
from semtree.factory import create_regressor

pytestmark = pytest.mark.integration


BLOBS_CONFIG = {
    'dataset': 'synthetic:blobs',
    'task': 'classification',
    'height': 2,
    'seeds': [0],
    'optim': {'epoch': 5, 'optimizer': 'adam', 'lr': 0.1, 'scheduler_decay': 0.95, 'batch_size': 32},
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(BLOBS_CONFIG), encoding='utf-8')
    return path


@pytest.fixture
def trained(tmp_path, config_path):
    out = tmp_path / 'run'
    assert main(['train', str(config_path), '--out-dir', str(out), '--seeds', '0,1']) == EXIT_OK
    return out


class TestTrain:
    def test_writes_artifacts(self, trained):
        for name in ('checkpoint_seed0.json', 'tree_seed0.json', 'run_seed0.jsonl',
                     'checkpoint_seed1.json', 'aggregate.json'):
            assert (trained / name).is_file()
        aggregate = json.loads((trained / 'aggregate.json').read_text(encoding='utf-8'))
        assert aggregate['seeds'] == [0, 1]

    def test_unknown_key(self, tmp_path, capsys):
        path = tmp_path / 'bad.json'
        path.write_text(json.dumps({**BLOBS_CONFIG, 'learning_rate': 0.1}), encoding='utf-8')
        assert main(['train', str(path), '--out-dir', str(tmp_path / 'out')]) == EXIT_CONFIG
        assert 'learning_rate' in capsys.readouterr().err

    def test_unreadable_config(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{', encoding='utf-8')
        assert main(['train', str(path)]) == EXIT_CONFIG

    def test_missing_dataset_fails(self, tmp_path):
        path = tmp_path / 'missing.json'
        path.write_text(json.dumps({'dataset': str(tmp_path / 'nope.csv')}), encoding='utf-8')
        assert main(['train', str(path), '--out-dir', str(tmp_path / 'out')]) == EXIT_FAILURE

    def test_bad_seed_list(self, config_path):
        with pytest.raises(SystemExit) as info:
            main(['train', str(config_path), '--seeds', 'a,b'])
        assert info.value.code == 2


class TestEval:
    def test_reports_metrics(self, trained, config_path, capsys):
        capsys.readouterr()
        code = main(['eval', str(trained / 'checkpoint_seed0.json'), '--config', str(config_path)])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report['metric'] == 'accuracy'
        assert 0.0 <= report['test_metric'] <= 100.0

    def test_config_hash_mismatch(self, trained, tmp_path):
        other = tmp_path / 'other.json'
        other.write_text(json.dumps({**BLOBS_CONFIG, 'height': 3}), encoding='utf-8')
        assert main(['eval', str(trained / 'checkpoint_seed0.json'), '--config', str(other)]) == EXIT_CONFIG


class TestExport:
    def test_destandardized_tree(self, trained, tmp_path):
        out = tmp_path / 'raw_tree.json'
        code = main(['export', str(trained / 'checkpoint_seed0.json'), '--destandardize',
                     '--output', str(out)])
        assert code == EXIT_OK
        document = CheckpointCodec().load_tree(out)
        assert document.destandardized is True

    def test_missing_standardizer(self, tmp_path):
        path = tmp_path / 'plain.json'
        CheckpointCodec().save_checkpoint(path, create_regressor(1, num_features=2, seed=0))
        assert main(['export', str(path), '--destandardize']) == EXIT_NO_STANDARDIZER

    def test_corrupt_checkpoint(self, trained, tmp_path):
        data = json.loads((trained / 'checkpoint_seed0.json').read_text(encoding='utf-8'))
        data['overparam_chain'][0][0][0] += 0.5
        path = tmp_path / 'corrupt.json'
        path.write_text(json.dumps(data), encoding='utf-8')
        assert main(['export', str(path)]) == EXIT_CORRUPT


class TestEquivCheck:
    def test_trained_checkpoint(self, trained, capsys):
        capsys.readouterr()
        code = main(['equiv-check', str(trained / 'checkpoint_seed0.json'), '--samples', '20000'])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)['mismatches'] == 0

    def test_one_dimensional_grid(self, tmp_path):
        path = tmp_path / 'tiny.json'
        CheckpointCodec().save_checkpoint(path, create_regressor(1, num_features=1, seed=3))
        assert main(['equiv-check', str(path), '--samples', '1000', '--seed', '1']) == EXIT_OK

    def test_mutated_tree_reports_mismatches(self, trained, tmp_path, capsys):
        tree = json.loads((trained / 'tree_seed0.json').read_text(encoding='utf-8'))
        for node in tree['nodes']:
            node['weights'] = [-w for w in node['weights']]
            node['bias'] = -node['bias']
        path = tmp_path / 'mutated_tree.json'
        path.write_text(json.dumps(tree), encoding='utf-8')
        capsys.readouterr()
        code = main(['equiv-check', str(trained / 'checkpoint_seed0.json'), '--tree', str(path),
                     '--samples', '5000'])
        assert code == EXIT_FAILURE
        assert json.loads(capsys.readouterr().out)['mismatches'] > 0

    def test_corrupt_checkpoint(self, tmp_path):
        path = tmp_path / 'garbage.json'
        path.write_text('not json', encoding='utf-8')
        assert main(['equiv-check', str(path)]) == EXIT_CORRUPT


class TestGradcheck:
    def test_passes(self, capsys):
        assert main(['gradcheck', '--trials', '3']) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report['passed'] is True
        assert report['max_rel_error'] < 1e-4
        assert report['error_kind'] == 'relative, denominator max(|analytic|, |numeric|, 1e-2)'
        assert 'max_unfloored_rel_error' in report

    def test_regression_marks_straight_through(self, capsys):
        assert main(['gradcheck', '--task', 'regression', '--trials', '2']) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report['ste_paths'] == {'decision_weights': 'by-definition',
                                       'decision_biases': 'by-definition'}

    def test_zero_trials(self):
        assert main(['gradcheck', '--trials', '0']) == EXIT_CONFIG


class TestBench:
    def test_missing_dataset_skipped(self, tmp_path, monkeypatch):
        monkeypatch.setenv('SEMTREE_DATA_DIR', str(tmp_path / 'empty'))
        spec = tmp_path / 'bench.json'
        spec.write_text(json.dumps({'rows': [
            {'dataset': 'balance-scale', 'height': 2, 'expected': 90.2, 'tolerance': -3.2,
             'provenance': 'balance scale row'},
        ]}), encoding='utf-8')
        assert main(['bench', str(spec), '--out-dir', str(tmp_path / 'out')]) == EXIT_OK
        report = json.loads((tmp_path / 'out' / 'bench.json').read_text(encoding='utf-8'))
        assert report['rows'][0]['status'] == 'skipped'

    def test_failing_row(self, tmp_path):
        spec = tmp_path / 'bench.json'
        spec.write_text(json.dumps({'rows': [
            {'name': 'blobs', 'dataset': 'synthetic:blobs', 'height': 1, 'expected': 101.0,
             'tolerance': 0.0, 'seeds': 1, 'config': {**BLOBS_CONFIG, 'height': 1}},
        ]}), encoding='utf-8')
        assert main(['bench', str(spec), '--out-dir', str(tmp_path / 'out')]) == EXIT_FAILURE
        assert (tmp_path / 'out' / 'bench.md').is_file()

    def test_report_only_row(self, tmp_path):
        spec = tmp_path / 'bench.json'
        spec.write_text(json.dumps({'rows': [
            {'name': 'blobs', 'dataset': 'synthetic:blobs', 'height': 1, 'expected': 101.0,
             'report_only': True, 'seeds': 1, 'config': {**BLOBS_CONFIG, 'height': 1}},
        ]}), encoding='utf-8')
        assert main(['bench', str(spec), '--out-dir', str(tmp_path / 'out')]) == EXIT_OK
        report = json.loads((tmp_path / 'out' / 'bench.json').read_text(encoding='utf-8'))
        assert report['rows'][0]['status'] == 'reported'
        assert report['rows'][0]['tolerance'] is None

    def test_bad_spec(self, tmp_path):
        spec = tmp_path / 'bench.json'
        spec.write_text(json.dumps({'rows': [{'dataset': 'banknote'}]}), encoding='utf-8')
        assert main(['bench', str(spec)]) == EXIT_CONFIG
