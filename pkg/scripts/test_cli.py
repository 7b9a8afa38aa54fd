# test_cli.py
import json

import pytest
from pydantic import ValidationError

from src import cli
from src.core.engine import EngineFacade
from src.core.errors import ConfigurationError
from src.models.run_models import HurwitzTarget, ModelSpec, RunConfig, TRTarget, Verdict, VerifyTarget, WgnTarget
from src.storage.storage import InMemoryStorage

SIMPLE = {"family": "I", "name": "simple", "P1": [0, 1], "R1": [0, 1]}


@pytest.fixture
def facade(storage):
    return EngineFacade(storage)


@pytest.fixture(autouse=True)
def no_database(monkeypatch):
    monkeypatch.setenv("USE_DATABASE", "false")


def config(*targets, **kwargs) -> RunConfig:
    return RunConfig(model=ModelSpec(**SIMPLE), targets=list(targets), **kwargs)


def test_targets_are_discriminated_by_kind():
    parsed = RunConfig.model_validate({
        "model": SIMPLE,
        "targets": [{"kind": "tr", "g_max": 1, "n_max": 2}, {"kind": "hurwitz", "g": 0, "k": [1, 3]}],
    })
    assert isinstance(parsed.targets[0], TRTarget)
    assert isinstance(parsed.targets[1], HurwitzTarget)
    assert parsed.targets[1].k == [3, 1]


def test_unknown_target_kind_is_rejected():
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"model": SIMPLE, "targets": [{"kind": "plot"}]})


def test_decimal_data_forces_numeric_mode():
    parsed = RunConfig(model=ModelSpec(family="I", P1=[0, "0.5"]))
    assert parsed.effective_mode == "numeric"
    assert config().effective_mode == "exact"


def test_hurwitz_target(facade, storage):
    output = facade.run(config(HurwitzTarget(g=1, k=[2])))
    record = output.results[0]
    assert (record.key, record.value, record.engine) == ("2", "1/12", "oracle")
    assert output.meta["mode"] == "exact"
    fingerprint = output.meta["model"]
    assert storage.get_number(fingerprint, "exact/oracle", 1, [2]) == "1/12"
    assert storage.get_number(fingerprint, "exact/closedform", 1, [2]) is None


def test_each_engine_computes_its_own_number(facade, storage):
    oracle = facade.run(config(HurwitzTarget(g=0, k=[2, 1]))).results[0]
    closed = facade.run(config(HurwitzTarget(g=0, k=[2, 1], engine="closedform"))).results[0]
    assert (oracle.engine, closed.engine) == ("oracle", "closedform")
    assert closed.value == oracle.value == "2/3"
    fingerprint = facade.run(config()).meta["model"]
    assert storage.get_number(fingerprint, "exact/oracle", 0, [2, 1]) == "2/3"
    assert storage.get_number(fingerprint, "exact/closedform", 0, [2, 1]) == "2/3"


@pytest.mark.parametrize("engine", ["closedform", "trengine"])
def test_hurwitz_engines_agree(facade, engine):
    oracle = facade.run(config(HurwitzTarget(g=0, k=[2, 1]))).results[0]
    other = EngineFacade(InMemoryStorage()).run(config(HurwitzTarget(g=0, k=[2, 1], engine=engine))).results[0]
    assert other.engine == engine
    assert other.value == oracle.value


def test_wgn_series(facade):
    output = facade.run(config(WgnTarget(g=1, n=1, k_max=3)))
    record = output.results[0]
    assert record.key == "W_{1,1}"
    assert record.value["2"] == "1/12"
    assert record.value["3"] == "3/8"


def test_unstable_H_is_a_configuration_error(facade):
    with pytest.raises(ConfigurationError):
        facade.run(config(WgnTarget(g=0, n=2, quantity="H")))


def test_vanishing_P2_is_a_configuration_error(facade):
    bad = RunConfig(model=ModelSpec(family="I", P2=[0, 1]), targets=[HurwitzTarget(g=0, k=[1])])
    with pytest.raises(ConfigurationError, match="vanishing at zero"):
        facade.run(bad)


def test_render_csv(facade):
    output = facade.run(config(HurwitzTarget(g=1, k=[2]), WgnTarget(g=0, n=1, k_max=2)))
    lines = cli.render_csv(output).splitlines()
    assert lines[0] == "g,k,value,engine"
    assert "1,2,1/12,oracle" in lines
    assert "0,2,1/2,closedform" in lines


def test_render_json_is_deterministic():
    run = config(HurwitzTarget(g=1, k=[3]), WgnTarget(g=0, n=2, k_max=3))
    first = cli.render_json(EngineFacade(InMemoryStorage()).run(run))
    second = cli.render_json(EngineFacade(InMemoryStorage()).run(run))
    assert first == second


def test_main_run_writes_output(tmp_path):
    path = tmp_path / "run.json"
    out = tmp_path / "out.json"
    path.write_text(json.dumps({"model": SIMPLE, "targets": [{"kind": "hurwitz", "g": 2, "k": [2]}]}))
    assert cli.main(["run", str(path), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["results"][0]["value"] == "1/240"
    assert data["meta"]["seed"] == 2024


def test_main_run_rejects_invalid_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"model": SIMPLE, "targets": [{"kind": "hurwitz", "g": -1, "k": [2]}]}))
    assert cli.main(["run", str(path)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2


def test_main_maps_model_errors_to_exit_code(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"model": {"family": "I", "P2": [0, 1]},
                                "targets": [{"kind": "hurwitz", "g": 0, "k": [1]}]}))
    assert cli.main(["run", str(path)]) == 2


def test_verify_target_on_simple_model(facade):
    output = facade.run(config(VerifyTarget(g_max=0, n_max=1, r_max=1, k_max=3)))
    summary = output.results[0]
    assert summary.verdict is Verdict.PASS
    assert summary.value["fail"] == 0
    assert output.reports
    assert not output.any_failed


def test_main_maps_unexpected_errors_to_computation_exit_code(tmp_path, monkeypatch):
    def broken_run(self, config):
        raise ValueError("unexpected")

    monkeypatch.setattr(EngineFacade, "run", broken_run)
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"model": SIMPLE, "targets": [{"kind": "hurwitz", "g": 0, "k": [1]}]}))
    assert cli.main(["run", str(path)]) == 3
