"""Broadband ingestion: household weighting and standardizing transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .exceptions import DataError, DomainError

TRANSFORMS = ("zscore", "log_minmax", "arcsinh")

# Categorical connection tiers 0-5 expanded to midpoint rates per 1000
# households; direct rates are used when supplied.
TIER_MIDPOINTS = {0: 0.0, 1: 100.0, 2: 300.0, 3: 500.0, 4: 700.0, 5: 900.0}

_LOG_MINMAX_DELTA_FRACTION = 1e-6


@dataclass(frozen=True)
class BroadbandRecord:
    county_id: int
    year: int
    tier: float  # category 0-5 or a direct rate per 1000 households
    households: float
    is_category: bool = True

    def __post_init__(self) -> None:
        if self.households < 0:
            raise DataError(f"households must be >= 0, got {self.households}")
        if self.is_category and self.tier not in TIER_MIDPOINTS:
            raise DataError(f"tier category must be 0..5, got {self.tier}")


def weighted_connections(record: BroadbandRecord) -> float:
    """hhweight = households/1000; weighted = rate per 1000 x hhweight."""
    rate = TIER_MIDPOINTS[record.tier] if record.is_category else record.tier
    return rate * record.households / 1000.0


def _transform(values: np.ndarray, transform: str) -> tuple[np.ndarray, dict]:
    if transform == "zscore":
        sd = values.std(ddof=0)
        if sd == 0 or len(np.unique(values)) < 2:
            raise DataError("z-score undefined: weighted values are degenerate")
        return (values - values.mean()) / sd, {"mean": float(values.mean()), "sd": float(sd)}
    if transform == "log_minmax":
        lo, hi = float(values.min()), float(values.max())
        if hi == lo:
            raise DataError("min-max undefined: weighted values are degenerate")
        delta = _LOG_MINMAX_DELTA_FRACTION * (hi - lo)
        scaled = (values - lo + delta) / (hi - lo + delta)
        return np.log(scaled), {"min": lo, "max": hi, "delta": float(delta)}
    if transform == "arcsinh":
        return np.arcsinh(values), {}
    raise DomainError(f"unknown transform {transform!r}; choose one of {TRANSFORMS}")


def ingest_broadband(
    records: list[BroadbandRecord] | pd.DataFrame,
    transform: str = "zscore",
    per_year: bool = False,
) -> tuple[pd.DataFrame, dict]:
    """Weight tier rates by households and standardize to a broadband column.

    Returns a (county_id, year, broadband_z) frame plus transform metadata.
    per_year applies the transform within each year instead of pooled.
    """
    if isinstance(records, pd.DataFrame):
        needed = {"county_id", "year", "tier", "households"}
        missing = needed - set(records.columns)
        if missing:
            raise DataError(f"broadband file missing columns {sorted(missing)}")
        records = [
            BroadbandRecord(
                county_id=int(r.county_id),
                year=int(r.year),
                tier=float(r.tier),
                households=float(r.households),
                is_category=bool(getattr(r, "is_category", True)),
            )
            for r in records.itertuples(index=False)
        ]
    if not records:
        raise DataError("no broadband records supplied")
    frame = pd.DataFrame(
        {
            "county_id": [r.county_id for r in records],
            "year": [r.year for r in records],
            "weighted": [weighted_connections(r) for r in records],
        }
    )
    meta: dict = {"transform": transform, "per_year": per_year}
    if per_year:
        parts = []
        for year, grp in frame.groupby("year", sort=True):
            vals, m = _transform(grp["weighted"].to_numpy(dtype=float), transform)
            grp = grp.assign(broadband_z=vals)
            parts.append(grp)
            meta[f"year_{year}"] = m
        frame = pd.concat(parts, ignore_index=True)
    else:
        vals, m = _transform(frame["weighted"].to_numpy(dtype=float), transform)
        frame["broadband_z"] = vals
        meta.update(m)
    return frame[["county_id", "year", "broadband_z"]], meta


PRICE_FLAGS = {
    "price_at_least_same": "price_floor",
    "price_does_not_exceed": "price_ceiling",
    "price_same_rate": "price_parity",
}
COST_FLAGS = {
    "cost_same_rate": "cost_parity",
    "cost_does_not_exceed": "cost_ceiling",
}


def assemble_panel(
    broadband: pd.DataFrame,
    outcomes: pd.DataFrame,
    law_table: pd.DataFrame,
    controls: pd.DataFrame | None = None,
) -> pd.DataFrame:
    """Inner-join outcomes, broadband, controls, and the state law table.

    Outcomes must carry (county_id, state_id, year, outcome_count); the law
    table one row per adopting state with adoption_year and framing flag
    columns.  Price framings are mutually exclusive per state.
    """
    needed = {"county_id", "state_id", "year", "outcome_count"}
    missing = needed - set(outcomes.columns)
    if missing:
        raise DataError(f"outcome file missing columns {sorted(missing)}")
    n_before = len(outcomes)
    outcomes = outcomes.dropna(subset=["outcome_count"])
    n_missing_outcome = n_before - len(outcomes)

    panel = outcomes.merge(broadband, on=["county_id", "year"], how="inner")
    if panel.empty:
        raise DataError("no (county_id, year) keys shared by outcomes and broadband")
    if controls is not None and not controls.empty:
        panel = panel.merge(controls, on=["county_id", "year"], how="inner")
        if panel.empty:
            raise DataError("controls join removed every observation")

    types = sorted(set(PRICE_FLAGS.values()) | set(COST_FLAGS.values()))
    cohort = {}
    state_type = {}
    for row in law_table.itertuples(index=False):
        sid = int(row.state_id)
        price_hits = [t for f, t in PRICE_FLAGS.items() if getattr(row, f, 0)]
        cost_hits = [t for f, t in COST_FLAGS.items() if getattr(row, f, 0)]
        if len(price_hits) > 1:
            raise DataError(
                f"state {sid} sets multiple mutually exclusive price flags: {price_hits}"
            )
        if len(cost_hits) > 1:
            raise DataError(
                f"state {sid} sets multiple mutually exclusive cost flags: {cost_hits}"
            )
        hits = price_hits + cost_hits
        if hits:
            cohort[sid] = int(row.adoption_year)
            state_type[sid] = hits[0]

    sid = panel["state_id"].to_numpy()
    panel["cohort_year"] = np.array([cohort.get(int(s), -1) for s in sid])
    panel["post"] = (
        (panel["cohort_year"] != -1) & (panel["year"] >= panel["cohort_year"])
    ).astype(np.int64)
    for t in types:
        panel[f"type_{t}"] = np.array(
            [1 if state_type.get(int(s)) == t else 0 for s in sid], dtype=np.int64
        )
    panel["cluster_id"] = panel["state_id"]
    if "metro" not in panel.columns:
        panel["metro"] = 0
    panel.attrs["n_missing_outcome_dropped"] = n_missing_outcome
    return panel.reset_index(drop=True)
