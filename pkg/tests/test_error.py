import pytest

from metis_tap import error
from metis_tap.config import RunConfig, TapConfig


def it_serialises_an_error():
    failure = error.UnknownVertex(message="unknown vertex c999999", ctx={'id': 'c999999'})

    assert failure.at_step("similarity_pairs").error() == {'error': "unknown vertex c999999",
                                                           'code': 1,
                                                           'step': "similarity_pairs",
                                                           'ctx': {'id': 'c999999'}}


def it_keeps_the_first_step_name():
    assert error.GraphError(message="boom", name="load").at_step("screen").name == "load"


def it_uses_exit_codes_by_error_family():
    assert error.MalformedRecords().code == error.VALIDATION_FAILURE
    assert error.StalePlan().code == error.VALIDATION_FAILURE
    assert error.StorageError().code == error.STORAGE_FAILURE
    assert error.StorageError(code=7).code == 7


def it_requires_theta_for_dedupe(tmp_path):
    with pytest.raises(error.ConfigError):
        RunConfig(command="dedupe", records_path=tmp_path / "r.csv").validate()


def it_requires_records(tmp_path):
    with pytest.raises(error.ConfigError):
        RunConfig(command="screen").validate()


def it_rejects_a_worker_count_below_one(tmp_path):
    with pytest.raises(error.ConfigError):
        RunConfig(command="screen", records_path=tmp_path / "r.csv", workers=0).validate()


def it_resolves_paths(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)

    config = RunConfig(command="screen", records_path=tmp_path.joinpath("r.csv").relative_to(tmp_path)).resolved()

    assert config.records_path == tmp_path.resolve() / "r.csv"
    assert config.out_dir == tmp_path.resolve()


def it_leaves_the_worker_count_out_of_the_replay_args(tmp_path):
    one = RunConfig(command="dedupe", records_path=tmp_path / "r.csv", theta=0.8, workers=1).replay_args()
    eight = RunConfig(command="dedupe", records_path=tmp_path / "r.csv", theta=0.8, workers=8).replay_args()

    assert one == eight


def it_configures_the_tunables():
    try:
        config = TapConfig().configure(float_precision=2)
        assert config.fmt(0.96537) == "0.97"
        assert TapConfig().zero_tolerance == 1e-12
    finally:
        TapConfig().clear()
    assert TapConfig().fmt(0.96537) == "0.965370"
