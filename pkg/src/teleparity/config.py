"""YAML run configuration: parsing and construction of typed specs."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml

from .dgp import PanelConfig, TrueParameters
from .exceptions import ConfigError, DomainError
from .market.specs import (
    DemandSpec,
    InputSupplySpec,
    MarketPrimitives,
    PolicyRegime,
    ProductionSpec,
)
from .ppml import ModelSpec

DEFAULT_DEMAND = {
    "eta0": 0.3,
    "eta1": 0.05,
    "eta2": 0.07,
    "broadband_z": 0.0,
    "wage": 1.0,
    "time_per_unit": 0.5,
    "composite_money_price": 1.0,
    "composite_time_per_unit": 0.5,
    "demand_shift": 2.0,
}


def load_config(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    return raw


def _section(cfg: dict, name: str, default: dict | None = None) -> dict:
    value = cfg.get(name, default if default is not None else {})
    if not isinstance(value, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return value


def build_market(cfg: dict[str, Any]) -> MarketPrimitives:
    market = _section(cfg, "market")
    try:
        demand_kwargs = {**DEFAULT_DEMAND, **_section(market, "demand")}
        return MarketPrimitives(
            production=ProductionSpec(**_section(market, "production")),
            telehealth_supply=InputSupplySpec(
                **_section(market, "telehealth_supply", {"elasticity": 1.0})
            ),
            inperson_supply=InputSupplySpec(
                **_section(market, "inperson_supply", {"elasticity": 0.5})
            ),
            demand=DemandSpec(**demand_kwargs),
        )
    except (TypeError, DomainError) as exc:
        raise ConfigError(f"invalid market configuration: {exc}") from exc


_REGIME_BUILDERS = {
    "none": lambda spec: PolicyRegime.none(),
    "price_floor": lambda spec: PolicyRegime.price_floor(float(spec["rho"])),
    "price_ceiling": lambda spec: PolicyRegime.price_ceiling(float(spec["rho"])),
    "price_parity": lambda spec: PolicyRegime.price_parity(float(spec["rho"])),
    "cost_parity": lambda spec: PolicyRegime.cost_parity(),
    "cost_ceiling": lambda spec: PolicyRegime.cost_ceiling(
        float(spec.get("gamma_cc", 0.25))
    ),
}


def build_regimes(cfg: dict[str, Any]) -> dict[str, PolicyRegime]:
    section = _section(cfg, "regimes", {"none": {"kind": "none"}})
    out: dict[str, PolicyRegime] = {}
    for name, spec in section.items():
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"regime {name!r} needs a 'kind' field")
        kind = spec["kind"]
        builder = _REGIME_BUILDERS.get(kind)
        if builder is None:
            raise ConfigError(
                f"regime {name!r} has unknown kind {kind!r}; "
                f"choose one of {sorted(_REGIME_BUILDERS)}"
            )
        try:
            out[name] = builder(spec)
        except (KeyError, ValueError, DomainError) as exc:
            raise ConfigError(f"invalid regime {name!r}: {exc}") from exc
    return out


def build_panel_config(cfg: dict[str, Any], seed: int | None = None) -> PanelConfig:
    section = dict(_section(cfg, "panel"))
    for key in ("cohort_years", "treatment_types"):
        if key in section and isinstance(section[key], list):
            section[key] = tuple(section[key])
    if seed is not None:
        section["seed"] = seed
    try:
        return PanelConfig(**section)
    except TypeError as exc:
        raise ConfigError(f"invalid panel configuration: {exc}") from exc


def build_true_parameters(cfg: dict[str, Any]) -> TrueParameters:
    section = dict(_section(cfg, "true_parameters"))
    for key in ("beta5",):
        if key in section and isinstance(section[key], list):
            section[key] = tuple(section[key])
    section.setdefault("beta1", {})
    section.setdefault("beta2", {})
    try:
        return TrueParameters(**section)
    except TypeError as exc:
        raise ConfigError(f"invalid true_parameters configuration: {exc}") from exc


def build_model_spec(
    cfg: dict[str, Any], regressors: tuple[str, ...]
) -> ModelSpec:
    section = dict(_section(cfg, "model"))
    section.pop("treatment_types", None)
    section.pop("controls", None)
    section.pop("include_triple", None)
    for key in ("absorb",):
        if key in section and isinstance(section[key], list):
            section[key] = tuple(section[key])
    section.setdefault("outcome", "outcome_count")
    try:
        return ModelSpec(regressors=regressors, **section)
    except TypeError as exc:
        raise ConfigError(f"invalid model configuration: {exc}") from exc


def model_options(cfg: dict[str, Any]) -> tuple[tuple[str, ...], tuple[str, ...], bool]:
    """(treatment_types, controls, include_triple) from the model section."""
    section = _section(cfg, "model")
    types = tuple(section.get("treatment_types", ("price_floor",)))
    controls = tuple(section.get("controls", ()))
    include_triple = bool(section.get("include_triple", True))
    return types, controls, include_triple
