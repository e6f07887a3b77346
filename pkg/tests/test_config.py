from pathlib import Path

import pytest
import yaml

from pseudorefine.config.config_loader import (
    DEFAULT_CONFIG_FILE,
    LOG_LEVEL_ENV,
    ConfigLoader,
    create_default_config,
)
from pseudorefine.models.config import PipelineConfig
from pseudorefine.superpixel.seeds import SeedsParams
from pseudorefine.validation.input_validation import ConfigError, MissingInputError


def test_defaults():
    config = PipelineConfig()
    assert (config.tau, config.tau_prime, config.alpha) == (0.968, 0.99, 0.99)
    assert config.temperature == 0.1
    assert config.lambda_proto == 0.1
    assert config.superpixel.num_superpixels == 1000
    assert config.output_dir == Path("out")
    assert config.class_ids() == list(range(19))

    refine = config.refine_params()
    assert (refine.tau, refine.tau_prime, refine.use_margin) == (0.968, 0.99, True)
    assert config.align_config().normalize_projected


def test_class_subsets():
    assert len(PipelineConfig(class_subset="16").class_ids()) == 16
    assert len(PipelineConfig(class_subset=16).class_ids()) == 16
    assert PipelineConfig(num_classes=3, class_subset=[0, 2]).class_ids() == [0, 2]
    assert PipelineConfig(num_classes=2).class_ids() == [0, 1]

    with pytest.raises(ConfigError):
        PipelineConfig(class_subset=[])
    with pytest.raises(ConfigError):
        PipelineConfig(num_classes=2, class_subset="16")


@pytest.mark.parametrize(
    "field,value",
    [
        ("tau", 0.0),
        ("tau", 1.0),
        ("tau_prime", 1.2),
        ("alpha", -0.5),
        ("temperature", 0.0),
        ("lambda_proto", -1.0),
        ("num_classes", 0),
        ("workers", 0),
        ("log_level", "loud"),
        ("log_format", "xml"),
        ("prompt_mode", "automask"),
        ("points_per_side", 0),
    ],
)
def test_invalid_values(field, value):
    with pytest.raises(ConfigError):
        PipelineConfig(**{field: value})


def test_yaml_file(workspace):
    (workspace / "cfg.yml").write_text(
        "pseudorefine:\n"
        "  tau: 0.9\n"
        "  lambda: 0.5\n"
        "  superpixel:\n"
        "    num_superpixels: 64\n"
        "  output_dir: results\n",
        encoding="utf-8",
    )
    config = ConfigLoader("cfg.yml").load()

    assert config.tau == 0.9
    assert config.lambda_proto == 0.5
    assert config.superpixel == SeedsParams(num_superpixels=64)
    assert config.output_dir == Path("results")


def test_default_file_is_picked_up(workspace):
    (workspace / DEFAULT_CONFIG_FILE).write_text("workers: 3\n", encoding="utf-8")
    assert ConfigLoader().load().workers == 3


def test_precedence(workspace, monkeypatch):
    (workspace / "cfg.yml").write_text(
        "log_level: warning\ntau: 0.9\nsuperpixel: {num_superpixels: 64, levels: 2}\n",
        encoding="utf-8",
    )
    monkeypatch.setenv(LOG_LEVEL_ENV, "ERROR")

    loader = ConfigLoader("cfg.yml")
    assert loader.load().log_level == "error"

    config = ConfigLoader("cfg.yml").load(
        {"log_level": "debug", "tau": None, "superpixel": {"num_superpixels": 16}}
    )
    assert config.log_level == "debug"
    assert config.tau == 0.9
    assert config.superpixel == SeedsParams(num_superpixels=16, levels=2)


def test_file_errors(workspace):
    with pytest.raises(MissingInputError):
        ConfigLoader("missing.yml").load()

    (workspace / "bad.yml").write_text("tau: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigLoader("bad.yml").load()

    (workspace / "list.yml").write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigLoader("list.yml").load()

    (workspace / "typo.yml").write_text("tua: 0.5\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigLoader("typo.yml").load()

    (workspace / "range.yml").write_text("tau: 2.0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigLoader("range.yml").load()


def test_save_round_trip(workspace):
    original = PipelineConfig(tau=0.95, lambda_proto=0.25, superpixel=SeedsParams(32))
    ConfigLoader().save_config(original, "saved/config.yml")

    data = yaml.safe_load((workspace / "saved" / "config.yml").read_text(encoding="utf-8"))
    assert data["pseudorefine"]["lambda"] == 0.25

    loaded = ConfigLoader("saved/config.yml").load()
    assert loaded.to_dict() == original.to_dict()


def test_default_template_parses(workspace):
    (workspace / "template.yml").write_text(create_default_config(), encoding="utf-8")
    assert ConfigLoader("template.yml").load().to_dict() == PipelineConfig().to_dict()
