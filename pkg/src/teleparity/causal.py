"""Interaction design construction and causal post-processing.

Turns panel flags into the triple-interaction regressor columns, and turns
fitted coefficients into treatment-effect summaries: ATT at a broadband
level, its local rate of change, percentage effects, event studies, and
placebo checks, all with cluster-robust delta-method inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import chi2, norm

from .dgp import NEVER, make_placebo
from .exceptions import DataError
from .ppml import FitResult, ModelSpec, fit

Z95 = 1.959964

SUMMARY_COLUMNS = [
    "policy_type",
    "metric",
    "coefficient",
    "std_error",
    "z",
    "p",
    "ci_low",
    "ci_high",
]

DEFAULT_LEVELS = (0.0, 1.0, 2.0, 4.0, 8.0, 12.0)


@dataclass(frozen=True)
class CausalRow:
    policy_type: str
    metric: str
    coefficient: float
    std_error: float

    @property
    def z(self) -> float:
        return self.coefficient / self.std_error if self.std_error > 0 else math.inf

    @property
    def p(self) -> float:
        return 2.0 * norm.sf(abs(self.z))

    @property
    def ci95(self) -> tuple[float, float]:
        return (
            self.coefficient - Z95 * self.std_error,
            self.coefficient + Z95 * self.std_error,
        )


@dataclass(frozen=True)
class CausalSummary:
    policy_type: str
    att_rows: tuple[CausalRow, ...]
    acrt_derivative: CausalRow
    acrt_raw: CausalRow
    taylor_gap: float

    def to_frame(self) -> pd.DataFrame:
        rows = list(self.att_rows) + [self.acrt_derivative, self.acrt_raw]
        return pd.DataFrame(
            [
                {
                    "policy_type": r.policy_type,
                    "metric": r.metric,
                    "coefficient": r.coefficient,
                    "std_error": r.std_error,
                    "z": r.z,
                    "p": r.p,
                    "ci_low": r.ci95[0],
                    "ci_high": r.ci95[1],
                }
                for r in rows
            ],
            columns=SUMMARY_COLUMNS,
        )


def _post_name(k: str) -> str:
    return f"{k}_post"


def _triple_name(k: str) -> str:
    return f"{k}_post_bb"


def build_design(
    dataset: pd.DataFrame,
    treatment_types: tuple[str, ...],
    include_triple: bool = True,
    controls: tuple[str, ...] = (),
) -> tuple[pd.DataFrame, tuple[str, ...]]:
    """Materialize the interaction regressors; returns (frame, column names).

    Per type k: k_post = M_ik*post, k_post_bb = M_ik*post*B, k_bb = M_ik*B;
    plus post_bb = post*B.  include_triple=False omits every *B interaction,
    giving the two-way specification.
    """
    needed = {"post", "broadband_z"} | {f"type_{k}" for k in treatment_types}
    missing = needed - set(dataset.columns)
    if missing:
        raise DataError(f"design columns missing: {sorted(missing)}")
    out = dataset.copy()
    names: list[str] = []
    post = out["post"].to_numpy(dtype=float)
    bb = out["broadband_z"].to_numpy(dtype=float)
    for k in treatment_types:
        flag = out[f"type_{k}"].to_numpy(dtype=float)
        out[_post_name(k)] = flag * post
        names.append(_post_name(k))
        if include_triple:
            out[_triple_name(k)] = flag * post * bb
            out[f"{k}_bb"] = flag * bb
            names.extend([_triple_name(k), f"{k}_bb"])
    if include_triple:
        out["post_bb"] = post * bb
        names.append("post_bb")
    names.extend(controls)
    return out, tuple(names)


def _pair(fit_result: FitResult, k: str) -> tuple[float, float, np.ndarray]:
    b2 = fit_result.coef(_post_name(k))
    b1 = fit_result.coef(_triple_name(k))
    V = fit_result.subvcov((_post_name(k), _triple_name(k)))
    return b2, b1, V


def att_at(fit_result: FitResult, k: str, B: float) -> tuple[float, float]:
    """ATT(B) = exp(b2 + b1*B) - 1 with delta-method standard error."""
    b2, b1, V = _pair(fit_result, k)
    e = math.exp(b2 + b1 * B)
    grad = np.array([e, B * e])
    se = math.sqrt(float(grad @ V @ grad))
    return e - 1.0, se


def acrt(fit_result: FitResult, k: str, B: float = 0.0) -> dict[str, tuple[float, float]]:
    """Rate of change of ATT in broadband, both definitions with SEs.

    'derivative' is b1*exp(b2 + b1*B); 'raw' is the triple-interaction
    coefficient b1 itself.  Both are reported because reporting conventions
    differ on which is intended.
    """
    b2, b1, V = _pair(fit_result, k)
    e = math.exp(b2 + b1 * B)
    value = b1 * e
    grad = np.array([b1 * e, e * (1.0 + b1 * B)])
    se = math.sqrt(float(grad @ V @ grad))
    raw_se = math.sqrt(float(V[1, 1]))
    return {"derivative": (value, se), "raw": (b1, raw_se)}


def att_percent(fit_result: FitResult, k: str) -> float:
    """Percentage treatment effect at B = 0: exp(b2) - 1."""
    return att_at(fit_result, k, 0.0)[0]


def taylor_gap(fit_result: FitResult, k: str) -> float:
    """Finite-difference ATT(1) - ATT(0) minus the derivative-form rate at 0."""
    a1, _ = att_at(fit_result, k, 1.0)
    a0, _ = att_at(fit_result, k, 0.0)
    d0 = acrt(fit_result, k, 0.0)["derivative"][0]
    return (a1 - a0) - d0


def att_table(
    fit_result: FitResult,
    k: str,
    levels: tuple[float, ...] = DEFAULT_LEVELS,
) -> CausalSummary:
    rows = []
    for B in levels:
        a, se = att_at(fit_result, k, B)
        rows.append(CausalRow(k, f"ATT(B={B:g})", a, se))
    both = acrt(fit_result, k, 0.0)
    return CausalSummary(
        policy_type=k,
        att_rows=tuple(rows),
        acrt_derivative=CausalRow(k, "ACRT(derivative,B=0)", *both["derivative"]),
        acrt_raw=CausalRow(k, "ACRT(raw)", *both["raw"]),
        taylor_gap=taylor_gap(fit_result, k),
    )


def event_study(
    dataset: pd.DataFrame,
    spec: ModelSpec | None = None,
    window: tuple[int, int] = (7, 7),
    controls: tuple[str, ...] = (),
    interact_broadband: bool = True,
) -> dict:
    """Relative-time event study around adoption, base period -1 omitted.

    Relative years beyond the window are saturated into the endpoint bins.
    Returns per-relative-year coefficients with cluster-robust SEs and a
    joint Wald test that all pre-period coefficients are zero.
    """
    pre_n, post_n = window
    frame = dataset.copy()
    treated = frame["cohort_year"] != NEVER
    rel = np.where(treated, frame["year"] - frame["cohort_year"], 0)
    rel = np.clip(rel, -pre_n, post_n)
    names = []
    for r in range(-pre_n, post_n + 1):
        if r == -1:
            continue
        col = f"rel_m{-r}" if r < 0 else f"rel_p{r}"
        frame[col] = (treated & (rel == r)).astype(float)
        names.append(col)
        if interact_broadband:
            frame[col + "_bb"] = frame[col] * frame["broadband_z"]
            names.append(col + "_bb")
    for col in names:
        if frame.loc[treated, col.removesuffix("_bb")].sum() == 0:
            raise DataError(f"relative-year bin {col!r} has no observations")
    model = ModelSpec(
        outcome="outcome_count",
        regressors=(*names, *controls),
        absorb=spec.absorb if spec else ("county_id", "year"),
        cluster=spec.cluster if spec else "cluster_id",
    )
    res = fit(frame, model)
    coeffs = {
        nm: (res.coef(nm), res.se(nm)) for nm in names if nm in res.names
    }
    pre_names = [
        nm
        for nm in names
        if nm in res.names and nm.startswith("rel_m") and not nm.endswith("_bb")
    ]
    idx = [res.names.index(nm) for nm in pre_names]
    b = res.coefficients[idx]
    V = res.vcov_cluster[np.ix_(idx, idx)]
    try:
        stat = float(b @ np.linalg.solve(V, b))
    except np.linalg.LinAlgError:
        stat = float(b @ np.linalg.pinv(V) @ b)
    df = len(idx)
    return {
        "coefficients": coeffs,
        "base_period": -1,
        "pre_joint_stat": stat,
        "pre_joint_df": df,
        "pre_joint_p": float(chi2.sf(stat, df)) if df else 1.0,
        "fit": res,
    }


def placebo_test(
    dataset: pd.DataFrame,
    shift_years: int,
    treatment_types: tuple[str, ...],
    controls: tuple[str, ...] = (),
) -> dict:
    """Fictitious-adoption check on the pre-treatment panel.

    The treated main effect is absorbed by the county fixed effects, so the
    fitted regressors are the fake-post interactions; the main effect is
    reported as absorbed.
    """
    if not (dataset["cohort_year"] != NEVER).any():
        raise DataError("placebo test requires at least one treated state")
    placebo = make_placebo(dataset, shift_years)
    design, names = build_design(placebo, treatment_types, True, controls)
    model = ModelSpec(outcome="outcome_count", regressors=names)
    res = fit(design, model)
    out = {"treated_main_effect": "absorbed by county fixed effects", "fit": res}
    for k in treatment_types:
        if _post_name(k) in res.names:
            c, s = res.coef(_post_name(k)), res.se(_post_name(k))
            z = c / s if s > 0 else math.inf
            out[k] = {
                "coefficient": c,
                "std_error": s,
                "z": z,
                "p": float(2.0 * norm.sf(abs(z))),
            }
    return out
