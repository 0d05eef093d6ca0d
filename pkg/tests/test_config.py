"""YAML configuration parsing and validation."""

import pytest

from teleparity.config import (
    build_market,
    build_model_spec,
    build_panel_config,
    build_regimes,
    build_true_parameters,
    load_config,
    model_options,
)
from teleparity.exceptions import ConfigError


def write(tmp_path, text):
    path = tmp_path / "cfg.yaml"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = write(tmp_path, "a: [unclosed")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_non_mapping_root(self, tmp_path):
        path = write(tmp_path, "- just\n- a list\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_empty_file_is_empty_mapping(self, tmp_path):
        assert load_config(write(tmp_path, "")) == {}


class TestBuildMarket:
    def test_defaults_fill_in(self):
        prim = build_market({})
        assert prim.demand.eta0 == 0.3

    def test_invalid_field_is_config_error(self):
        with pytest.raises(ConfigError):
            build_market({"market": {"production": {"tfp": -1.0}}})

    def test_unknown_field_is_config_error(self):
        with pytest.raises(ConfigError):
            build_market({"market": {"production": {"bogus": 1.0}}})


class TestBuildRegimes:
    def test_known_kinds(self):
        regimes = build_regimes(
            {
                "regimes": {
                    "f": {"kind": "price_floor", "rho": 1.2},
                    "c": {"kind": "cost_ceiling", "gamma_cc": 0.3},
                    "n": {"kind": "none"},
                }
            }
        )
        assert regimes["f"].rho == 1.2
        assert regimes["c"].gamma == 0.3
        assert regimes["n"].gamma == 0.0

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            build_regimes({"regimes": {"x": {"kind": "price_cap", "rho": 1.0}}})

    def test_missing_rho(self):
        with pytest.raises(ConfigError):
            build_regimes({"regimes": {"x": {"kind": "price_floor"}}})


class TestPanelAndModel:
    def test_panel_seed_override(self):
        cfg = {"panel": {"n_states": 4, "seed": 1}}
        assert build_panel_config(cfg, seed=9).seed == 9
        assert build_panel_config(cfg).seed == 1

    def test_unknown_panel_field(self):
        with pytest.raises(ConfigError):
            build_panel_config({"panel": {"bogus": 1}})

    def test_true_parameters(self):
        cfg = {"true_parameters": {"beta1": {"k": 0.1}, "beta2": {"k": 0.2}}}
        params = build_true_parameters(cfg)
        assert params.beta1 == {"k": 0.1}

    def test_model_spec_and_options(self):
        cfg = {
            "model": {
                "treatment_types": ["price_floor", "cost_parity"],
                "controls": ["x0"],
                "include_triple": False,
                "cluster": "cluster_id",
            }
        }
        types, controls, triple = model_options(cfg)
        assert types == ("price_floor", "cost_parity")
        assert controls == ("x0",)
        assert triple is False
        spec = build_model_spec(cfg, ("a", "b"))
        assert spec.regressors == ("a", "b")
        assert spec.outcome == "outcome_count"
