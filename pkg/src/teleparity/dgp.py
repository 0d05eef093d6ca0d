"""Synthetic county-by-year panel generator with known true coefficients.

Outcomes are Poisson draws around an exponential linear index built from
staggered treatment cohorts, treatment-type flags, standardized broadband,
controls, and county/year fixed effects, so the estimation pipeline can be
validated by parameter recovery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .exceptions import ConfigError, DataError, DomainError

NEVER = -1  # cohort_year sentinel for never-treated units
_MEAN_CAP = 1e12


@dataclass(frozen=True)
class TrueParameters:
    """Coefficients of the multiplicative (log-link) outcome index.

    beta1..beta3 are per-treatment-type maps: beta1 the triple-interaction
    slope (type x post x broadband), beta2 the type x post level shift,
    beta3 the type x broadband interaction.  beta4 multiplies post x
    broadband, beta5 the controls.  Fixed effects may be given explicitly;
    when absent they are drawn N(0, sd) from the panel seed.
    """

    beta1: dict[str, float]
    beta2: dict[str, float]
    beta3: dict[str, float] = field(default_factory=dict)
    beta4: float = 0.0
    beta5: tuple[float, ...] = ()
    county_effects: dict[int, float] | None = None
    year_effects: dict[int, float] | None = None
    county_effect_sd: float = 0.0
    year_effect_sd: float = 0.0

    def validate(self, treatment_types: tuple[str, ...], n_controls: int) -> None:
        for name, mapping in (("beta1", self.beta1), ("beta2", self.beta2)):
            extra = set(mapping) - set(treatment_types)
            if extra:
                raise ConfigError(f"{name} has unknown treatment types {sorted(extra)}")
        if len(self.beta5) != n_controls:
            raise ConfigError(
                f"beta5 has {len(self.beta5)} entries for {n_controls} controls"
            )


@dataclass(frozen=True)
class PanelConfig:
    n_states: int = 50
    counties_per_state: int = 20
    start_year: int = 2010
    end_year: int = 2019
    cohort_years: tuple[int, ...] = (2012, 2013, 2014, 2015, 2016, 2017)
    never_treated_fraction: float = 0.5
    treatment_types: tuple[str, ...] = ("price_floor",)
    broadband_trend: float = 0.15
    broadband_county_sd: float = 1.0
    broadband_noise_sd: float = 0.3
    n_controls: int = 0
    control_log_mean: float = 0.0
    control_log_sd: float = 1.0
    baseline_log_mean: float = 0.0
    overdispersion: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_states < 1 or self.counties_per_state < 1:
            raise ConfigError("panel dimensions must be positive")
        if self.end_year < self.start_year:
            raise ConfigError("end_year must be >= start_year")
        years = set(range(self.start_year, self.end_year + 1))
        if not set(self.cohort_years) <= years:
            raise ConfigError("cohort_years must lie inside the year range")
        if not 0.0 <= self.never_treated_fraction <= 1.0:
            raise ConfigError("never_treated_fraction must be in [0, 1]")
        if not self.cohort_years and self.never_treated_fraction < 1.0:
            raise ConfigError(
                "cohort set empty while never_treated_fraction < 1"
            )
        if not self.treatment_types:
            raise ConfigError("at least one treatment type is required")
        if self.overdispersion < 0:
            raise ConfigError("overdispersion must be >= 0")

    @property
    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)


@dataclass(frozen=True)
class TreatmentAssignment:
    """Per-state cohort year (NEVER for never-treated) and treatment type."""

    cohort_year: dict[int, int]
    treatment_type: dict[int, str]


def assign_cohorts(config: PanelConfig) -> TreatmentAssignment:
    """Randomly assign states to treatment cohorts and types, reproducibly."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
    states = np.arange(config.n_states)
    n_never = int(round(config.never_treated_fraction * config.n_states))
    never = set(rng.choice(states, size=n_never, replace=False).tolist())
    cohorts: dict[int, int] = {}
    types: dict[int, str] = {}
    for s in states:
        if s in never or not config.cohort_years:
            cohorts[int(s)] = NEVER
            types[int(s)] = ""
        else:
            cohorts[int(s)] = int(rng.choice(config.cohort_years))
            types[int(s)] = str(rng.choice(config.treatment_types))
    return TreatmentAssignment(cohort_year=cohorts, treatment_type=types)


def _draw_effects(
    explicit: dict[int, float] | None,
    keys: np.ndarray,
    sd: float,
    rng: np.random.Generator,
) -> dict[int, float]:
    if explicit is not None:
        return {int(k): float(explicit.get(int(k), 0.0)) for k in keys}
    draws = rng.normal(0.0, sd, size=len(keys)) if sd > 0 else np.zeros(len(keys))
    return {int(k): float(v) for k, v in zip(keys, draws)}


def simulate_outcomes(
    assignment: TreatmentAssignment,
    params: TrueParameters,
    config: PanelConfig,
) -> pd.DataFrame:
    """Draw the full panel: covariates, linear index, Poisson outcomes."""
    params.validate(config.treatment_types, config.n_controls)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))

    n_counties = config.n_states * config.counties_per_state
    years = np.array(config.years)
    county_id = np.repeat(np.arange(n_counties), len(years))
    state_id = county_id // config.counties_per_state
    year = np.tile(years, n_counties)
    n = len(county_id)

    cohort = np.array([assignment.cohort_year[s] for s in range(config.n_states)])[
        state_id
    ]
    ttype = np.array(
        [assignment.treatment_type[s] for s in range(config.n_states)], dtype=object
    )[state_id]
    post = ((cohort != NEVER) & (year >= cohort)).astype(np.int64)

    county_base = rng.normal(0.0, config.broadband_county_sd, size=n_counties)
    raw_bb = (
        county_base[county_id]
        + config.broadband_trend * (year - config.start_year)
        + rng.normal(0.0, config.broadband_noise_sd, size=n)
    )
    sd = raw_bb.std()
    broadband_z = (raw_bb - raw_bb.mean()) / sd if sd > 0 else raw_bb - raw_bb.mean()

    controls = np.log(
        rng.lognormal(config.control_log_mean, config.control_log_sd, size=(n, config.n_controls))
    ) if config.n_controls else np.zeros((n, 0))

    county_fe_map = _draw_effects(
        params.county_effects, np.arange(n_counties), params.county_effect_sd, rng
    )
    year_fe_map = _draw_effects(
        params.year_effects, years, params.year_effect_sd, rng
    )
    county_fe = np.array([county_fe_map[c] for c in range(n_counties)])[county_id]
    year_fe = np.array([year_fe_map[int(y)] for y in years])[
        np.searchsorted(years, year)
    ]

    index = config.baseline_log_mean + county_fe + year_fe
    index = index + params.beta4 * post * broadband_z
    if config.n_controls:
        index = index + controls @ np.asarray(params.beta5)
    type_flags = {}
    for k in config.treatment_types:
        flag = (ttype == k).astype(np.int64)
        type_flags[k] = flag
        index = index + params.beta2.get(k, 0.0) * flag * post
        index = index + params.beta1.get(k, 0.0) * flag * post * broadband_z
        index = index + params.beta3.get(k, 0.0) * flag * broadband_z

    if not np.all(np.isfinite(index)):
        raise DomainError("linear index is not finite for all rows")
    mean = np.exp(index)
    if np.any(mean > _MEAN_CAP):
        raise DomainError(f"expected outcome exceeds overflow guard {_MEAN_CAP:g}")
    if config.overdispersion > 0:
        # Gamma(1/a, a) mixing keeps the conditional mean exact.
        a = config.overdispersion
        mean = mean * rng.gamma(1.0 / a, a, size=n)
    outcome = rng.poisson(mean)

    data = {
        "county_id": county_id,
        "state_id": state_id,
        "year": year,
        "outcome_count": outcome,
        "cohort_year": cohort,
        "post": post,
        "broadband_z": broadband_z,
        "cluster_id": state_id,
        "metro": (county_id % 2).astype(np.int64),
    }
    for k, flag in type_flags.items():
        data[f"type_{k}"] = flag
    for j in range(config.n_controls):
        data[f"x{j}"] = controls[:, j]
    return pd.DataFrame(data)


def generate_panel(params: TrueParameters, config: PanelConfig) -> pd.DataFrame:
    """Convenience wrapper: assign cohorts then simulate outcomes."""
    return simulate_outcomes(assign_cohorts(config), params, config)


def apply_sample_window(
    dataset: pd.DataFrame, first_allowed_cohort: int, last_allowed_cohort: int
) -> pd.DataFrame:
    """Drop always-treated cohorts; relabel late cohorts as never-treated.

    States whose cohort predates the window are removed entirely (treated in
    every observed year).  States adopting after the window are kept with
    their treatment flags cleared.
    """
    out = dataset.copy()
    early = (out["cohort_year"] != NEVER) & (out["cohort_year"] < first_allowed_cohort)
    out = out.loc[~early].copy()
    if out.empty:
        raise DataError("sample window removed every observation")
    late = (out["cohort_year"] != NEVER) & (out["cohort_year"] > last_allowed_cohort)
    out.loc[late, "cohort_year"] = NEVER
    out.loc[late, "post"] = 0
    for col in out.columns:
        if col.startswith("type_"):
            out.loc[late, col] = 0
    return out.reset_index(drop=True)


def make_placebo(dataset: pd.DataFrame, shift_years: int) -> pd.DataFrame:
    """Pre-treatment panel with fake adoption shifted earlier by shift_years."""
    if shift_years <= 0:
        raise DomainError(f"shift_years must be positive, got {shift_years}")
    out = dataset.copy()
    treated = out["cohort_year"] != NEVER
    pre = ~treated | (out["year"] < out["cohort_year"])
    out = out.loc[pre].copy()
    min_year = int(out["year"].min())
    treated_cohorts = out.loc[out["cohort_year"] != NEVER, "cohort_year"]
    if not treated_cohorts.empty and (treated_cohorts - shift_years <= min_year).any():
        raise DataError(
            "shift pushes a fake cohort outside the observed pre-period"
        )
    fake = out["cohort_year"].where(out["cohort_year"] == NEVER,
                                    out["cohort_year"] - shift_years)
    out["cohort_year"] = fake
    out["post"] = (
        (out["cohort_year"] != NEVER) & (out["year"] >= out["cohort_year"])
    ).astype(np.int64)
    treated_rows = out["cohort_year"] != NEVER
    if treated_rows.any() and not out.loc[treated_rows, "post"].any():
        raise DataError("no fake post-period remains inside the observed pre-period")
    return out.reset_index(drop=True)


PANEL_FLOAT_FORMAT = "%.17g"


def write_panel(dataset: pd.DataFrame, path) -> None:
    """Write the canonical panel CSV (cohort_year -1 means never treated)."""
    dataset.to_csv(path, index=False, float_format=PANEL_FLOAT_FORMAT)


def read_panel(path) -> pd.DataFrame:
    frame = pd.read_csv(path)
    required = {"county_id", "state_id", "year", "outcome_count", "cohort_year"}
    missing = required - set(frame.columns)
    if missing:
        raise DataError(f"panel file missing columns {sorted(missing)}")
    return frame
