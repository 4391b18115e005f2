import json

import pytest

from asmc.config import ConfigError, apply_overrides, load_config, parse_config, with_values
from asmc.records import StaleArtifactError, config_hash, read_artifact, write_artifact


def test_minimal_config_gets_defaults():
    cfg = parse_config('potential = "quartic"\neta = 0.1\n')
    assert (cfg.eta1, cfg.delta, cfg.theta, cfg.alpha, cfg.nu, cfg.dt) == (1.0, 0.1, 0.1, 1.0, 1.0, 0.01)
    assert cfg.section("verify")["runs"] == 20


def test_eta_above_eta1_is_a_range_error():
    with pytest.raises(ConfigError, match="eta"):
        parse_config("eta = 1.5")


def test_unknown_potential_names_valid_ids():
    with pytest.raises(ConfigError) as err:
        parse_config('potential = "unknown"')
    for name in ("quartic", "tilted_quartic", "triple_well"):
        assert name in str(err.value)


@pytest.mark.parametrize(
    "text",
    ["colour = 3", "delta = 0", "theta = 1.2", "[verify]\nspeed = 2", "m = 2.5", "integrator = 'rk4'", "eta = "],
)
def test_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_sections_params_and_aliases(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('potential = "tilted_quartic"\nC_N = 0.02\nM = 4\n[params]\ntilt = 0.2\n[bench]\nseeds = 3\n')
    cfg = load_config(path)
    assert cfg.c_n == 0.02 and cfg.m == 4 and cfg.params == {"tilt": 0.2}
    assert cfg.section("bench")["seeds"] == 3 and cfg.section("bench")["baseline"] is True
    assert cfg.make_potential().tilt == 0.2


def test_bad_potential_parameters():
    with pytest.raises(ConfigError):
        parse_config('potential = "quartic"\n[params]\nomega = 2\n')


def test_overrides():
    cfg = apply_overrides(parse_config(""), ["eta=0.05", "verify.runs=3", "params.tilt=0.2", "potential=tilted_quartic"])
    assert cfg.eta == 0.05 and cfg.section("verify")["runs"] == 3 and cfg.params["tilt"] == 0.2
    assert apply_overrides(cfg, ["budget_cap=0"]).budget_cap is None
    assert apply_overrides(apply_overrides(cfg, ["budget_cap=0"]), ["seed=1"]).budget_cap is None
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["eta"])


def test_hash_ignores_paths_and_threads():
    a = parse_config("eta = 0.1")
    assert a.hash == with_values(a, output_dir="/elsewhere", threads=8).hash
    assert a.hash != with_values(a, seed=1).hash
    assert len(a.hash) == 16


class TestRecords:
    def test_hash_is_canonical(self):
        assert config_hash({"a": 1, "b": [0.5, 2]}) == config_hash({"b": [0.5, 2.0], "a": 1.0})

    def test_artifact_roundtrip(self, tmp_path):
        path = write_artifact(tmp_path / "x" / "a.json", {"k": 1}, {"value": 3})
        body = read_artifact(path, {"k": 1})
        assert body["value"] == 3 and body["config_hash"] == config_hash({"k": 1})

    def test_stale_artifact_refused(self, tmp_path):
        path = write_artifact(tmp_path / "a.json", {"k": 1}, {"value": 3})
        with pytest.raises(StaleArtifactError):
            read_artifact(path, {"k": 2})
        data = json.loads(path.read_text())
        data["config_hash"] = "0" * 16
        path.write_text(json.dumps(data))
        with pytest.raises(StaleArtifactError):
            read_artifact(path, {"k": 1})
