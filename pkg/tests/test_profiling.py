import pytest

from semtree.profiling import RunProfiler


class TestRunProfiler:
    def setup_method(self):
        self.profiler = RunProfiler(enable_memory_tracking=False)

    def test_folds_stages_by_name(self):
        for _ in range(3):
            with self.profiler.profile_operation('epoch'):
                pass
        with self.profiler.profile_operation('fit', {'seed': 1}) as timing:
            pass
        summary = self.profiler.get_summary()
        assert list(summary) == ['epoch', 'fit']
        assert summary['epoch']['calls'] == 3
        assert summary['fit']['calls'] == 1
        assert summary['epoch']['slowest_seconds'] <= summary['epoch']['total_seconds']
        assert timing.metadata == {'seed': 1}
        assert timing.seconds >= 0.0

    def test_records_on_error(self):
        with pytest.raises(RuntimeError):
            with self.profiler.profile_operation('epoch'):
                raise RuntimeError("boom")
        assert self.profiler.get_summary()['epoch']['calls'] == 1

    def test_memory_disabled(self):
        assert not self.profiler.tracks_memory
        with self.profiler.profile_operation('fit') as timing:
            pass
        assert timing.rss_delta == 0
        assert self.profiler.get_summary()['fit']['rss_delta'] == 0

    def test_empty_summary(self):
        assert self.profiler.get_summary() == {}
