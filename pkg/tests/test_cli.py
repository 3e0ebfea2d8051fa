import json
from pathlib import Path

import pytest

from fittsbench.cli import EXIT_CODES, main
from fittsbench.config import OUTPUT_ENV, ExperimentConfig, apply_override, config_from_dict, load_config
from fittsbench.errors import InvalidArgumentError, MissingInputError, UnreachableDistanceError

SMALL = """
seed: 4
output_dir: small
generator:
  distances_m: [0.2, 0.3, 0.4]
  trials_per_condition: 4
policy:
  hidden_sizes: [32, 32]
  max_epochs: 20
  batch_size: 64
analysis:
  dump_trajectories: true
"""

ARTIFACTS = [
    "demos/manifest.csv",
    "metrics/human.csv",
    "metrics/human_discards.csv",
    "metrics/policy.csv",
    "metrics/rollouts.csv",
    "policy/history.csv",
    "report/fits.csv",
    "report/human.svg",
    "report/policy.svg",
]


@pytest.fixture
def small(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "out"))
    cfg = tmp_path / "small.yaml"
    cfg.write_text(SMALL)
    return cfg, tmp_path / "out" / "small"


def snapshot(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and ".stamps" not in p.parts}


# config -------------------------------------------------------------------

def test_seed_is_global(small):
    cfg = load_config(small[0])
    assert cfg.generator.seed == cfg.policy.seed == 4
    assert tuple(cfg.generator.distances_m) == (0.2, 0.3, 0.4)


def test_overrides_parse_as_yaml(small):
    cfg = load_config(small[0], ["generator.mt_noise_sigma_s=0", "policy.hidden_sizes=[8, 8]"])
    assert cfg.generator.mt_noise_sigma_s == 0
    assert tuple(cfg.policy.hidden_sizes) == (8, 8)


def test_bad_override():
    with pytest.raises(InvalidArgumentError):
        apply_override({}, "no-equals-sign")


def test_hash_ignores_output_dir_only():
    a = config_from_dict({"output_dir": "x"})
    b = config_from_dict({"output_dir": "y"})
    c = config_from_dict({"output_dir": "x", "seed": 1})
    assert a.hash() == b.hash() != c.hash()
    assert len(a.hash()) == 16


def test_output_env(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert ExperimentConfig(output_dir="r").output_path == tmp_path / "r"
    monkeypatch.delenv(OUTPUT_ENV)
    assert ExperimentConfig(output_dir="r").output_path == Path("r")


@pytest.mark.parametrize("doc", [{"typo": 1}, {"policy": {"hidden": [3]}}, {"analysis": {"success_rule": "disc"}}])
def test_config_rejects_unknown(doc):
    with pytest.raises(InvalidArgumentError):
        config_from_dict(doc)


def test_config_rejects_unreachable_distance():
    with pytest.raises(UnreachableDistanceError):
        config_from_dict({"generator": {"distances_m": [0.2, 5.0]}})


def test_warm_window_must_cover_history():
    with pytest.raises(InvalidArgumentError):
        config_from_dict({"rollout": {"warm_start_s": 0.1}})


def test_missing_config():
    with pytest.raises(MissingInputError):
        load_config("/nonexistent.yaml")


# end to end ---------------------------------------------------------------

def test_full_run_cached_and_reproducible(small, capsys):
    cfg, root = small
    assert main(["all", "--config", str(cfg)]) == 0
    first = snapshot(root)
    for name in ARTIFACTS:
        assert name in first, name
    out = capsys.readouterr().out
    assert "gen: ran" in out and "analyze: ran" in out

    assert main(["all", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.count(": cached") == 5
    assert snapshot(root) == first

    assert main(["all", "--config", str(cfg), "--force"]) == 0
    assert snapshot(root) == first


def test_provenance_in_every_artifact(small):
    cfg, root = small
    assert main(["all", "--config", str(cfg)]) == 0
    h = load_config(cfg).hash()
    line = f"config_hash={h} seed=4"
    for name in ARTIFACTS:
        assert line in (root / name).read_text(), name
    policy = json.loads((root / "policy/policy.json").read_text())
    assert policy["provenance"] == {"config_hash": h, "seed": 4}
    for demo in (root / "demos").glob("*.json"):
        assert json.loads(demo.read_text())["metadata"]["config_hash"] == h
    assert f"config_hash: `{h}`, seed: 4" in (root / "report/summary.md").read_text()


def test_changed_config_invalidates(small, capsys):
    cfg, root = small
    assert main(["all", "--config", str(cfg)]) == 0
    capsys.readouterr()
    assert main(["all", "--config", str(cfg), "--set", "policy.max_epochs=19"]) == 0
    out = capsys.readouterr().out
    assert "train: ran" in out and "analyze: ran" in out


def test_tampered_output_reruns(small, capsys):
    cfg, root = small
    assert main(["all", "--config", str(cfg)]) == 0
    good = (root / "report/fits.csv").read_bytes()
    (root / "report/fits.csv").write_text("junk")
    capsys.readouterr()
    assert main(["analyze", "--config", str(cfg)]) == 0
    assert "analyze: ran" in capsys.readouterr().out
    assert (root / "report/fits.csv").read_bytes() == good


def test_analyze_human_only(small):
    cfg, root = small
    for stage in ("gen", "metrics", "analyze"):
        assert main([stage, "--config", str(cfg)]) == 0
    summary = (root / "report/summary.md").read_text()
    assert "Comparison absent" in summary
    assert not (root / "report/policy.svg").exists()


def test_stage_order_enforced(small, capsys):
    cfg, _ = small
    assert main(["train", "--config", str(cfg)]) == EXIT_CODES["missing-input"]
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "missing-input"


def test_missing_config_exit_code(capsys):
    assert main(["gen", "--config", "/nonexistent.yaml"]) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "missing-input"


def test_bad_override_exit_code(small, capsys):
    cfg, _ = small
    assert main(["gen", "--config", str(cfg), "--set", "generator.bogus=1"]) == 2


def test_schema_mismatch_exit_code(small, capsys):
    cfg, root = small
    for stage in ("gen", "train"):
        assert main([stage, "--config", str(cfg)]) == 0
    p = root / "policy/policy.json"
    doc = json.loads(p.read_text())
    doc["schema"] = "policy-v9"
    p.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["rollout", "--config", str(cfg)]) == 4
    assert json.loads(capsys.readouterr().err)["error"] == "schema-version"


def test_corrupt_demo_exit_code(small, capsys):
    cfg, root = small
    assert main(["gen", "--config", str(cfg)]) == 0
    victim = sorted((root / "demos").glob("*.json"))[0]
    victim.write_text("{not json")
    assert main(["metrics", "--config", str(cfg)]) == 6


def test_unwritable_output(tmp_path, monkeypatch):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    monkeypatch.setenv(OUTPUT_ENV, str(blocker))
    assert main(["gen"]) == 5


def test_console_script_entry_point():
    from importlib.metadata import entry_points
    (ep,) = [e for e in entry_points(group="console_scripts") if e.name == "bench"]
    assert ep.value == "fittsbench.cli:main"
