"""Poisson pseudo-maximum-likelihood with absorbed fixed effects.

The exponential-conditional-mean model is fitted by iteratively reweighted
least squares; inside each IRLS step the fixed effects are profiled out by
weighted alternating demeaning of the working response and regressors, so
only the slope coefficients are ever materialized.  Inference is a
cluster-robust sandwich on the demeaned design, which by Frisch-Waugh
equals the corresponding block of the full-dummy sandwich.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.linalg

from .exceptions import ConvergenceError, DataError, DomainError

_COLLINEAR_RTOL = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    outcome: str
    regressors: tuple[str, ...]
    absorb: tuple[str, ...] = ("county_id", "year")
    cluster: str = "cluster_id"
    tol_deviance: float = 1e-9
    tol_params: float = 1e-8
    max_iter: int = 100
    demean_tol: float = 1e-11
    max_demean_sweeps: int = 10_000

    def __post_init__(self) -> None:
        if not self.regressors:
            raise DataError("at least one regressor is required")


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    names: tuple[str, ...]  # retained regressors, in design order
    coefficients: np.ndarray
    vcov_cluster: np.ndarray
    vcov_cluster_uncorrected: np.ndarray
    linear_index: np.ndarray  # per retained row, includes absorbed effects
    fitted_mean: np.ndarray
    deviance: float
    n_obs: int
    n_clusters: int
    n_params: int  # slopes + absorbed effective parameters
    n_dropped_separated: int
    n_dropped_collinear: int
    dropped_collinear: tuple[str, ...]
    converged: bool
    iterations: int
    retained_index: np.ndarray  # row labels of the input frame that were kept

    def coef(self, name: str) -> float:
        return float(self.coefficients[self._pos(name)])

    def se(self, name: str) -> float:
        i = self._pos(name)
        return math.sqrt(self.vcov_cluster[i, i])

    def subvcov(self, names: tuple[str, str]) -> np.ndarray:
        idx = [self._pos(n) for n in names]
        return self.vcov_cluster[np.ix_(idx, idx)]

    def _pos(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(
                f"coefficient {name!r} not in fit (dropped or absent)"
            ) from None


def _group_codes(frame: pd.DataFrame, dims: tuple[str, ...]) -> list[np.ndarray]:
    codes = []
    for dim in dims:
        if dim not in frame.columns:
            raise DataError(f"absorb dimension {dim!r} not in data")
        codes.append(pd.factorize(frame[dim].to_numpy())[0])
    return codes


def absorb(
    columns: np.ndarray,
    weights: np.ndarray,
    dims: list[np.ndarray],
    tol: float = 1e-11,
    max_sweeps: int = 10_000,
) -> np.ndarray:
    """Remove weighted group means along every dimension, iterated to tol.

    columns is (n, k); dims are integer group-code arrays.  One dimension
    converges in a single pass; crossed dimensions alternate until the
    largest adjustment falls below tol times the column scale.
    """
    if np.any(weights <= 0):
        raise DomainError("absorption weights must be positive")
    out = np.array(columns, dtype=float, copy=True)
    if out.ndim == 1:
        out = out[:, None]
    scale = max(np.max(np.abs(out)), 1.0)
    sizes = [np.bincount(d, weights=weights) for d in dims]
    for sweep in range(max_sweeps):
        biggest = 0.0
        for d, wsum in zip(dims, sizes):
            for j in range(out.shape[1]):
                gm = np.bincount(d, weights=weights * out[:, j]) / wsum
                adj = gm[d]
                out[:, j] -= adj
                biggest = max(biggest, np.max(np.abs(adj)))
        if biggest <= tol * scale:
            return out if columns.ndim > 1 else out[:, 0]
        if len(dims) == 1:
            return out if columns.ndim > 1 else out[:, 0]
    raise ConvergenceError(
        "demeaning tolerance not reached",
        diagnostics={"sweeps": max_sweeps, "last_adjustment": biggest},
    )


def drop_separated(
    dataset: pd.DataFrame, spec: ModelSpec
) -> tuple[pd.DataFrame, list]:
    """Iteratively drop rows in fixed-effect cells whose outcomes are all zero."""
    frame = dataset
    dropped: list = []
    while True:
        y = frame[spec.outcome].to_numpy(dtype=float)
        mask = np.ones(len(frame), dtype=bool)
        for dim in spec.absorb:
            codes, _ = pd.factorize(frame[dim].to_numpy())
            totals = np.bincount(codes, weights=y)
            mask &= totals[codes] > 0
        if mask.all():
            return frame, dropped
        dropped.extend(frame.index[~mask].tolist())
        frame = frame.loc[mask]
        if frame.empty:
            raise DataError("separation check dropped every observation")


def _drop_collinear(
    X: np.ndarray, names: tuple[str, ...]
) -> tuple[np.ndarray, tuple[str, ...], tuple[str, ...]]:
    """Pivoted-QR purge of (near) collinear columns of the absorbed design."""
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    lead = diag[0] if diag.size else 0.0
    keep_piv = [p for p, d in zip(piv, diag) if lead > 0 and d >= _COLLINEAR_RTOL * lead]
    keep = sorted(keep_piv)
    drop = sorted(set(range(X.shape[1])) - set(keep))
    if not keep:
        raise DataError("no regressor survives the collinearity purge")
    return (
        X[:, keep],
        tuple(names[i] for i in keep),
        tuple(names[i] for i in drop),
    )


def _poisson_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(y / mu), 0.0)
    return float(2.0 * np.sum(term - (y - mu)))


def _absorbed_param_count(dims: list[np.ndarray]) -> int:
    levels = [int(d.max()) + 1 for d in dims]
    return sum(levels) - (len(dims) - 1) if dims else 0


def fit(dataset: pd.DataFrame, spec: ModelSpec) -> FitResult:
    """IRLS fit of the Poisson model with absorbed fixed effects."""
    missing = [c for c in (spec.outcome, *spec.regressors, spec.cluster, *spec.absorb)
               if c not in dataset.columns]
    if missing:
        raise DataError(f"columns missing from data: {missing}")
    frame, dropped_sep = drop_separated(dataset, spec)
    y = frame[spec.outcome].to_numpy(dtype=float)
    if np.any(y < 0):
        raise DataError("outcome must be nonnegative")
    X_raw = frame[list(spec.regressors)].to_numpy(dtype=float)
    dims = _group_codes(frame, spec.absorb)
    n = len(frame)

    X_demeaned0 = absorb(X_raw, np.ones(n), dims, spec.demean_tol, spec.max_demean_sweeps)
    _, kept_names, dropped_names = _drop_collinear(X_demeaned0, spec.regressors)
    kept_idx = [spec.regressors.index(nm) for nm in kept_names]
    X = X_raw[:, kept_idx]
    k = X.shape[1]

    eta = np.log(y + 0.1)
    beta = np.zeros(k)
    deviance = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, spec.max_iter + 1):
        mu = np.exp(eta)
        w = mu
        z = eta + (y - mu) / mu
        stacked = np.column_stack([z, X])
        demeaned = absorb(stacked, w, dims, spec.demean_tol, spec.max_demean_sweeps)
        z_t, X_t = demeaned[:, 0], demeaned[:, 1:]
        XtW = X_t.T * w
        try:
            beta_new = np.linalg.solve(XtW @ X_t, XtW @ z_t)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                "singular weighted design during IRLS",
                diagnostics={"iteration": iterations},
            ) from exc
        eta = z - (z_t - X_t @ beta_new)
        new_dev = _poisson_deviance(y, np.exp(eta))
        step = float(np.max(np.abs(beta_new - beta))) if k else 0.0
        rel = abs(new_dev - deviance) / (abs(deviance) + 1e-12)
        beta, deviance = beta_new, new_dev
        if rel < spec.tol_deviance and step < spec.tol_params:
            converged = True
            break

    mu = np.exp(eta)
    w = mu
    X_t = absorb(X, w, dims, spec.demean_tol, spec.max_demean_sweeps)
    bread = X_t.T @ (X_t * w[:, None])
    resid = y - mu
    clusters, _ = pd.factorize(frame[spec.cluster].to_numpy())
    G = int(clusters.max()) + 1
    scores = X_t * resid[:, None]
    meat = np.zeros((k, k))
    sums = np.zeros((G, k))
    np.add.at(sums, clusters, scores)
    meat = sums.T @ sums
    try:
        bread_inv = np.linalg.inv(bread)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError("singular bread matrix in sandwich") from exc
    vcov_raw = bread_inv @ meat @ bread_inv
    vcov_raw = (vcov_raw + vcov_raw.T) / 2.0
    n_params = k + _absorbed_param_count(dims)
    if G > 1 and n > n_params:
        correction = (G / (G - 1)) * ((n - 1) / (n - n_params))
    else:
        correction = 1.0
    vcov = vcov_raw * correction

    return FitResult(
        spec=spec,
        names=kept_names,
        coefficients=beta,
        vcov_cluster=vcov,
        vcov_cluster_uncorrected=vcov_raw,
        linear_index=eta,
        fitted_mean=mu,
        deviance=deviance,
        n_obs=n,
        n_clusters=G,
        n_params=n_params,
        n_dropped_separated=len(dropped_sep),
        n_dropped_collinear=len(dropped_names),
        dropped_collinear=dropped_names,
        converged=converged,
        iterations=iterations,
        retained_index=frame.index.to_numpy(),
    )


def reset_test(dataset: pd.DataFrame, spec: ModelSpec) -> dict[str, float]:
    """Specification test: squared fitted index added as a regressor.

    Refits with the squared linear index (fixed effects included) and tests
    its coefficient against zero with the cluster-robust variance; robust
    Wald chi-square with one degree of freedom.
    """
    base = fit(dataset, spec)
    if not base.converged:
        raise ConvergenceError("base fit did not converge for the reset test")
    augmented = dataset.loc[base.retained_index].copy()
    augmented["_fitted_sq"] = base.linear_index**2
    aug_spec = ModelSpec(
        outcome=spec.outcome,
        regressors=(*base.names, "_fitted_sq"),
        absorb=spec.absorb,
        cluster=spec.cluster,
        tol_deviance=spec.tol_deviance,
        tol_params=spec.tol_params,
        max_iter=spec.max_iter,
        demean_tol=spec.demean_tol,
        max_demean_sweeps=spec.max_demean_sweeps,
    )
    aug = fit(augmented, aug_spec)
    coef = aug.coef("_fitted_sq")
    se = aug.se("_fitted_sq")
    stat = (coef / se) ** 2 if se > 0 else 0.0
    from scipy.stats import chi2

    return {
        "statistic": float(stat),
        "df": 1.0,
        "p_value": float(chi2.sf(stat, 1)),
        "coefficient": coef,
        "std_error": se,
    }


def cluster_vcov(fit_result: FitResult) -> np.ndarray:
    """Cluster-robust covariance of the slope coefficients (corrected)."""
    if not fit_result.converged:
        raise ConvergenceError("cluster vcov requires a converged fit")
    return fit_result.vcov_cluster
