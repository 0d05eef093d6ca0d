"""Comparative-statics sweeps over regimes and broadband levels."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Mapping

import pandas as pd

from .formulas import eta_difference
from .solve import solve_regulated, solve_unregulated
from .specs import MarketPrimitives, PolicyRegime

SWEEP_COLUMNS = [
    "regime",
    "broadband_z",
    "Y_unreg",
    "Y_reg",
    "shift",
    "eta_unreg",
    "eta_reg",
    "diff_direct",
    "diff_factorized",
    "sign_ok",
]


def regime_sweep(
    prim: MarketPrimitives,
    regimes: Mapping[str, PolicyRegime],
    broadband_levels: Iterable[float],
) -> pd.DataFrame:
    """Solve every (regime, broadband) cell and tabulate shifts and elasticities."""
    rows = []
    for b in broadband_levels:
        p = replace(prim, demand=replace(prim.demand, broadband_z=b))
        unreg = solve_unregulated(p)
        _, s_i = unreg.cost_shares
        # The formula arguments are curvature elasticities of the input cost
        # schedules (T*Gamma''/Gamma'), the reciprocal of the supply
        # elasticity parameter.
        summary = eta_difference(
            s_i,
            p.production.substitution,
            1.0 / p.telehealth_supply.elasticity,
            1.0 / p.inperson_supply.elasticity,
        )
        for name, regime in regimes.items():
            reg = solve_regulated(p, regime)
            rows.append(
                {
                    "regime": name,
                    "broadband_z": b,
                    "Y_unreg": unreg.quantity,
                    "Y_reg": reg.quantity,
                    "shift": reg.quantity - unreg.quantity,
                    "eta_unreg": summary.eta_unreg,
                    "eta_reg": summary.eta_reg,
                    "diff_direct": summary.diff_direct,
                    "diff_factorized": summary.diff_factorized,
                    "sign_ok": summary.sign_matches,
                }
            )
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
