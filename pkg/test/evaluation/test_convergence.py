import pytest

from nary_retrieval.evaluation.convergence import convergence_trace
from nary_retrieval.evaluation.experiment import ExperimentConfig
from nary_retrieval.shared import is_non_increasing
from test.shared import small_experiment, write_config_file


@pytest.fixture
def cfg(tmp_path) -> ExperimentConfig:
    values = small_experiment(bit_budget=8, bits_per_dim=4)
    values["lambda"] = 0.0
    return ExperimentConfig.from_file(write_config_file(tmp_path / "trace.cfg", **values))


@pytest.mark.parametrize("method,max_length", [("lsq-binary", 20), ("itq", 10), ("okmeans", 7)])
def test_traces_are_non_increasing(cfg, method, max_length):
    trace = convergence_trace(method, cfg)
    iterations = [i for i, _ in trace]
    errors = [e for _, e in trace]
    assert iterations == list(range(1, len(trace) + 1))
    assert 1 <= len(trace) <= max_length
    assert is_non_increasing(errors, 1e-9)


def test_only_binary_coders_have_traces(cfg):
    with pytest.raises(ValueError):
        convergence_trace("pq", cfg)
