"""Shared fixtures and independent oracles for the test suite.

The oracles deliberately take different computational routes from the
library code: the Poisson oracle materializes explicit fixed-effect dummy
columns and runs full Newton steps; the equilibrium oracle solves the
two-unknown system directly with a general-purpose root finder instead of
the library's closed-form one-dimensional reduction.
"""

from __future__ import annotations

import math

import numpy as np
import pandas as pd
import pytest
from scipy.optimize import root

from teleparity.market.specs import (
    DemandSpec,
    InputSupplySpec,
    MarketPrimitives,
    ProductionSpec,
)


def dense_poisson_oracle(df: pd.DataFrame, spec):
    """Full-dummy Newton MLE with cluster sandwich; returns (beta, vcov, K).

    The slope block of the sandwich is comparable to the absorbed fit by the
    Frisch-Waugh theorem; the same small-sample correction is applied.
    """
    y = df[spec.outcome].to_numpy(float)
    X = df[list(spec.regressors)].to_numpy(float)
    blocks = [X]
    for i, dim in enumerate(spec.absorb):
        codes, uniq = pd.factorize(df[dim].to_numpy())
        D = np.eye(len(uniq))[codes]
        if i > 0:
            D = D[:, 1:]  # drop one level per extra dimension
        blocks.append(D)
    Z = np.column_stack(blocks)
    k = X.shape[1]
    beta = np.linalg.lstsq(Z, np.log(y + 0.1), rcond=None)[0]

    def loglik(b):
        eta = Z @ b
        return float(np.sum(y * eta - np.exp(eta)))

    for _ in range(300):
        mu = np.exp(Z @ beta)
        step = np.linalg.solve(Z.T @ (Z * mu[:, None]), Z.T @ (y - mu))
        base = loglik(beta)
        scale = 1.0
        while scale > 1e-8 and not (loglik(beta + scale * step) >= base - 1e-12):
            scale /= 2.0
        beta = beta + scale * step
        if np.max(np.abs(scale * step)) < 1e-13:
            break
    mu = np.exp(Z @ beta)
    H = Z.T @ (Z * mu[:, None])
    clusters, _ = pd.factorize(df[spec.cluster].to_numpy())
    G = int(clusters.max()) + 1
    sums = np.zeros((G, Z.shape[1]))
    np.add.at(sums, clusters, Z * (y - mu)[:, None])
    Binv = np.linalg.inv(H)
    V = Binv @ (sums.T @ sums) @ Binv
    n, K = len(y), Z.shape[1]
    corr = (G / (G - 1)) * ((n - 1) / (n - K)) if G > 1 and n > K else 1.0
    return beta[:k], V[:k, :k] * corr, K


def equilibrium_oracle(prim: MarketPrimitives, gamma: float = 0.0, rho: float | None = None):
    """Solve the two-unknown (ln T, ln I) system with a generic root finder.

    Closure is cost minimization when rho is None, otherwise the compliance
    condition r_T*T/Y = rho.  Returns (T, I, Y, P).
    """

    def system(x):
        T, I = math.exp(x[0]), math.exp(x[1])
        r_T = prim.telehealth_supply.marginal_price(T)
        r_I = prim.inperson_supply.marginal_price(I)
        Y = prim.production.output(T, I)
        P = (r_T * T + r_I * I) / Y
        fd = math.log(Y) - math.log(prim.demand.quantity(P, gamma))
        if rho is None:
            closure = math.log(prim.production.mrts(T, I) * r_I / r_T)
        else:
            closure = math.log(r_T * T / Y) - math.log(rho)
        return [fd, closure]

    best = None
    for t0 in (-2.0, 0.0, 2.0):
        for i0 in (-2.0, 0.0, 2.0):
            try:
                sol = root(system, [t0, i0], method="hybr", tol=1e-13)
            except Exception:
                continue
            if sol.success:
                resid = max(abs(v) for v in system(sol.x))
                if best is None or resid < best[0]:
                    best = (resid, sol.x)
    if best is None or best[0] > 1e-8:
        raise RuntimeError("oracle root find failed")
    T, I = math.exp(best[1][0]), math.exp(best[1][1])
    Y = prim.production.output(T, I)
    r_T = prim.telehealth_supply.marginal_price(T)
    r_I = prim.inperson_supply.marginal_price(I)
    P = (r_T * T + r_I * I) / Y
    return T, I, Y, P


def random_primitives(rng: np.random.Generator, broadband: float | None = None) -> MarketPrimitives:
    """A random economy drawn from a region where the demand guard holds."""
    return MarketPrimitives(
        production=ProductionSpec(
            tfp=rng.uniform(0.5, 2.0),
            share=rng.uniform(0.2, 0.8),
            substitution=rng.uniform(0.4, 3.0),
        ),
        telehealth_supply=InputSupplySpec(
            elasticity=rng.uniform(0.3, 3.0), scale=rng.uniform(0.5, 2.0)
        ),
        inperson_supply=InputSupplySpec(
            elasticity=rng.uniform(0.3, 3.0), scale=rng.uniform(0.5, 2.0)
        ),
        demand=DemandSpec(
            eta0=0.3,
            eta1=0.05,
            eta2=0.07,
            broadband_z=rng.uniform(0.0, 4.0) if broadband is None else broadband,
            wage=rng.uniform(0.5, 2.0),
            time_per_unit=rng.uniform(0.1, 1.0),
            composite_money_price=1.0,
            composite_time_per_unit=0.5,
            demand_shift=rng.uniform(0.5, 5.0),
        ),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)
