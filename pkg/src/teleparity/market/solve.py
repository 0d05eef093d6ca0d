"""Numerical equilibrium solvers for the regulated market.

Both solvers reduce the system to a single unknown, log telehealth input.
With isoelastic input supply and CES production the second input has a
closed form: from the cost-minimization condition in the unregulated case,
and from inverting the production function under a binding price control.
The remaining final-demand residual is monotone in log T, so a bracketed
Brent solve is globally convergent.
"""

from __future__ import annotations

import math
import warnings

from scipy.optimize import brentq

from ..exceptions import BracketError, DomainError, InfeasibleRegimeError
from .specs import Equilibrium, MarketPrimitives, PolicyRegime

_LOG_LO = math.log(1e-8)
_LOG_HI = math.log(1e8)
_SCAN_POINTS = 65
_XTOL = 1e-12


def _cmc_inperson(prim: MarketPrimitives, ln_t: float) -> float:
    """Log in-person input satisfying cost minimization at log telehealth ln_t."""
    prod = prim.production
    e = prod.ces_exponent
    eps_t = prim.telehealth_supply.elasticity
    eps_i = prim.inperson_supply.elasticity
    # MRTS = r_T/r_I in logs, solved for ln I
    const = (
        math.log(prod.share / (1.0 - prod.share))
        - math.log(prim.telehealth_supply.scale / prim.inperson_supply.scale)
    )
    return ((e - 1.0 - 1.0 / eps_t) * ln_t + const) / (e - 1.0 - 1.0 / eps_i)


def _invert_production(prim: MarketPrimitives, T: float, Y: float) -> float | None:
    """In-person input with output Y at telehealth input T; None if unattainable."""
    prod = prim.production
    f_target = Y / prod.tfp
    if f_target <= 0:
        return None
    e = prod.ces_exponent
    a = prod.share
    if abs(e) < 1e-12:
        return (f_target / T ** a) ** (1.0 / (1.0 - a))
    u = f_target ** e - a * T ** e
    if u <= 0:
        return None
    return (u / (1.0 - a)) ** (1.0 / e)


def _point_unregulated(prim: MarketPrimitives, ln_t: float):
    T = math.exp(ln_t)
    I = math.exp(_cmc_inperson(prim, ln_t))
    r_T = prim.telehealth_supply.marginal_price(T)
    r_I = prim.inperson_supply.marginal_price(I)
    Y = prim.production.output(T, I)
    P = (r_T * T + r_I * I) / Y
    return T, I, r_T, r_I, Y, P


def _point_regulated(prim: MarketPrimitives, rho: float, ln_t: float):
    """Producer-side point under the compliance condition r_T*T/Y = rho."""
    T = math.exp(ln_t)
    r_T = prim.telehealth_supply.marginal_price(T)
    Y = r_T * T / rho
    I = _invert_production(prim, T, Y)
    if I is None or I <= 0 or not math.isfinite(I):
        return None
    r_I = prim.inperson_supply.marginal_price(I)
    P = rho + r_I * I / Y
    return T, I, r_T, r_I, Y, P


def _demand_log(prim: MarketPrimitives, price: float, gamma: float) -> float:
    return math.log(prim.demand.quantity(price, gamma))


def _scan_bracket(residual, xs):
    """First pair of consecutive feasible points with a residual sign change."""
    prev_x = prev_r = None
    for x in xs:
        r = residual(x)
        if r is None:
            prev_x = prev_r = None
            continue
        if prev_r is not None and (r == 0.0 or prev_r * r < 0):
            return prev_x, x
        prev_x, prev_r = x, r
    return None


def _solve_on_curve(
    prim: MarketPrimitives, gamma: float, point_fn, hint: float | None = None
) -> Equilibrium:
    """Find log T where supply-side output meets final demand.

    With a hint, a bracket is first sought on an expanding grid around it so
    the root closest to the hinted branch is selected; otherwise (or on
    failure) a dense scan of the full interval is used.
    """

    def residual(ln_t: float) -> float | None:
        point = point_fn(ln_t)
        if point is None:
            return None
        _, _, _, _, Y, P = point
        if Y <= 0 or P <= 0 or not (math.isfinite(Y) and math.isfinite(P)):
            return None
        return math.log(Y) - _demand_log(prim, P, gamma)

    bracket = None
    if hint is not None:
        offsets = [0.0]
        step = 0.05
        while step < (_LOG_HI - _LOG_LO):
            offsets.extend((step, -step))
            step *= 2.2
        xs = sorted(
            min(max(hint + o, _LOG_LO), _LOG_HI) for o in offsets
        )
        bracket = _scan_bracket(residual, xs)
    if bracket is None:
        grid = [
            _LOG_LO + i * (_LOG_HI - _LOG_LO) / (_SCAN_POINTS - 1)
            for i in range(_SCAN_POINTS)
        ]
        bracket = _scan_bracket(residual, grid)
    if bracket is None:
        raise BracketError(
            "no sign change of the supply-demand residual on the search interval",
            diagnostics={"gamma": gamma},
        )
    ln_t = brentq(residual, bracket[0], bracket[1], xtol=_XTOL, rtol=8.9e-16)
    T, I, r_T, r_I, Y, P = point_fn(ln_t)
    _check_assumptions(prim, r_T, T, r_I, I)
    return Equilibrium(
        quantity=Y,
        full_price=P,
        telehealth_input=T,
        inperson_input=I,
        telehealth_price=r_T,
        inperson_price=r_I,
    )


def _check_assumptions(prim, r_T, T, r_I, I):
    s_I = r_I * I / (r_T * T + r_I * I)
    sigma = prim.production.substitution
    if sigma * s_I >= 1.0:
        warnings.warn(
            f"sigma*s_I = {sigma * s_I:.4f} >= 1 at the solved point; "
            "elasticity-difference sign results are not guaranteed",
            stacklevel=3,
        )


def solve_unregulated(prim: MarketPrimitives, gamma: float = 0.0) -> Equilibrium:
    """Equilibrium with cost minimization closing the producer side.

    gamma > 0 applies a demand-side cost control while keeping the
    unregulated producer conditions (no binding price control).
    """
    return _solve_on_curve(prim, gamma, lambda ln_t: _point_unregulated(prim, ln_t))


def solve_regulated(
    prim: MarketPrimitives, regime: PolicyRegime, force_binding: bool = False
) -> Equilibrium:
    """Equilibrium under the policy regime.

    A price control binds only on the correct side of the unregulated
    telehealth revenue share (floor/parity above it, ceiling below it);
    a non-binding control leaves the producer side unregulated.  Cost
    controls always act through the demand curvature.  force_binding skips
    binding detection and imposes the compliance condition outright, which
    is what tracing the regulated supply curve through its pivot requires.
    """
    gamma = regime.gamma
    if regime.price_kind is None:
        return solve_unregulated(prim, gamma)
    rho = regime.rho
    unreg = solve_unregulated(prim, gamma)
    if not force_binding:
        share = unreg.telehealth_revenue_per_unit
        if regime.price_kind == "ceiling":
            binding = rho < share
        else:  # floor and parity bind from below
            binding = rho > share
        if not binding:
            return unreg
    try:
        return _solve_on_curve(
            prim,
            gamma,
            lambda ln_t: _point_regulated(prim, rho, ln_t),
            hint=math.log(unreg.telehealth_input),
        )
    except BracketError as exc:
        raise InfeasibleRegimeError(
            f"compliance condition rho={rho} unsatisfiable against demand"
        ) from exc


def equilibrium_shift(prim: MarketPrimitives, regime: PolicyRegime) -> float:
    """Regulated minus unregulated equilibrium quantity (theoretical ATT)."""
    return solve_regulated(prim, regime).quantity - solve_unregulated(prim).quantity


def apply_shocks(prim: MarketPrimitives, dA: float, dB: float) -> MarketPrimitives:
    """Scale tfp by (1+dA) and demand_shift by (1+dB)."""
    return prim.with_shocks(dA, dB)


def local_supply_elasticity(
    prim: MarketPrimitives,
    regime: PolicyRegime | None,
    bump: float = 1e-4,
    force_binding: bool = False,
) -> float:
    """Finite-difference (dY/dP)*(P/Y) along the relevant supply relation.

    Perturbs the demand shifter both ways and re-solves, so the pair of
    equilibria trace the supply curve.  Pass force_binding=True to stay on
    the compliance curve even where the perturbed control would not bind.
    """
    if bump <= 0:
        raise DomainError(f"bump must be > 0, got {bump}")
    regime = regime or PolicyRegime.none()
    hi = solve_regulated(prim.with_shocks(0.0, bump), regime, force_binding)
    lo = solve_regulated(prim.with_shocks(0.0, -bump), regime, force_binding)
    d_log_p = math.log(hi.full_price) - math.log(lo.full_price)
    if d_log_p == 0.0:
        raise DomainError("price did not move under the demand perturbation")
    return (math.log(hi.quantity) - math.log(lo.quantity)) / d_log_p


def condition_residuals(
    prim: MarketPrimitives, eq: Equilibrium, regime: PolicyRegime | None = None
) -> dict[str, float]:
    """Relative residuals of every equilibrium condition at a candidate point.

    Includes both closure conditions (cost minimization and price-regulation
    compliance) so callers can check either system.
    """
    gamma = regime.gamma if regime is not None else 0.0
    T, I = eq.telehealth_input, eq.inperson_input
    r_T, r_I = eq.telehealth_price, eq.inperson_price
    Y, P = eq.quantity, eq.full_price
    res = {
        "fp": (P * Y - (r_T * T + r_I * I)) / (P * Y),
        "pf": (Y - prim.production.output(T, I)) / Y,
        "is": (r_I - prim.inperson_supply.marginal_price(I)) / r_I,
        "ts": (r_T - prim.telehealth_supply.marginal_price(T)) / r_T,
        "fd": (Y - prim.demand.quantity(P, gamma)) / Y,
        "cmc": prim.production.mrts(T, I) * r_I / r_T - 1.0,
    }
    if regime is not None and regime.rho is not None:
        res["prc"] = (r_T * T / Y - regime.rho) / regime.rho
    return res
