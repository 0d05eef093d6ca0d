"""Closed-form elasticity and price arithmetic of the supply-chain model."""

from __future__ import annotations

import math

from ..exceptions import AssumptionError, DomainError
from .specs import ElasticitySummary, FullPriceSpec, InputSupplySpec

TIME_GREATER = "time_greater"
EQUAL = "equal"
MONEY_GREATER = "money_greater"

POSITIVE = "positive"
ZERO = "zero"
NEGATIVE = "negative"


def marginal_input_price(spec: InputSupplySpec, quantity: float) -> float:
    """Inverse isoelastic supply: scale * quantity**(1/elasticity)."""
    return spec.marginal_price(quantity)


def cost_shares(r_T: float, T: float, r_I: float, I: float) -> tuple[float, float]:
    """Telehealth and in-person cost shares; sums to 1 exactly."""
    if min(r_T, T, r_I, I) <= 0:
        raise DomainError("cost_shares requires all positive inputs")
    total = r_T * T + r_I * I
    s_T = r_T * T / total
    return s_T, 1.0 - s_T


def input_ratio_alpha(sigma: float, eps_T: float, eps_I: float) -> float:
    """Ratio of log input responses I_hat / T_hat along the unregulated supply."""
    return (1.0 + sigma * eps_T) / (1.0 + sigma * eps_I)


def eta_unregulated(s_I: float, sigma: float, eps_T: float, eps_I: float) -> float:
    """Supply elasticity of the composite service without a price control."""
    _check_elasticity_args(s_I, eps_T, eps_I)
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    s_T = 1.0 - s_I
    alpha = input_ratio_alpha(sigma, eps_T, eps_I)
    return (s_T + s_I * alpha) / (s_T * eps_T + s_I * alpha * eps_I)


def eta_regulated(s_I: float, eps_T: float, eps_I: float) -> float:
    """Supply elasticity when a binding control pins r_T*T/Y (share-scaled form).

    Note: log-differentiating the compliance-constrained system gives this
    expression without the leading s_I factor (the s_I in the in-person
    response cancels inside the zero-profit condition).  Finite differences
    along the solved compliance curve agree with eta_regulated_consistent,
    not with this form; both are kept so each can be tested against its own
    reference.
    """
    _check_elasticity_args(s_I, eps_T, eps_I)
    return s_I * (1.0 + eps_T) / (eps_T * (1.0 - s_I + eps_I) + eps_I * s_I)


def eta_regulated_consistent(s_I: float, eps_T: float, eps_I: float) -> float:
    """Compliance-curve supply elasticity re-derived without the s_I factor.

    Valid at points where cost minimization also holds (the rotation pivot),
    where output elasticities coincide with cost shares.
    """
    _check_elasticity_args(s_I, eps_T, eps_I)
    return (1.0 + eps_T) / (eps_T * (1.0 - s_I + eps_I) + eps_I * s_I)


def eta_difference(s_I: float, sigma: float, eps_T: float, eps_I: float) -> ElasticitySummary:
    """Unregulated minus regulated supply elasticity, by two routes.

    diff_direct is A/B - C/D from the elasticity formulas themselves;
    diff_factorized is the factorized numerator over B*D.  The two
    expressions do not agree for all parameters (e.g. at eps_T == eps_I the
    factorized form is identically zero while the direct difference is not),
    so both are reported and sign_matches is judged on diff_direct.
    """
    _check_elasticity_args(s_I, eps_T, eps_I)
    if sigma <= 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    if sigma * s_I >= 1.0:
        raise AssumptionError(f"requires sigma*s_I < 1, got {sigma * s_I}")
    s_T = 1.0 - s_I
    alpha = input_ratio_alpha(sigma, eps_T, eps_I)
    A = s_T + s_I * alpha
    B = s_T * eps_T + s_I * alpha * eps_I
    C = s_I * (1.0 + eps_T)
    D = eps_T * (1.0 - s_I + eps_I) + eps_I * s_I
    diff_direct = A / B - C / D
    numerator = (eps_T - eps_I) * (1.0 - s_I) * (
        sigma * s_I * eps_T + (1.0 - sigma * s_I) * eps_I + sigma
    )
    diff_factorized = numerator / (B * D)
    target = eps_T - eps_I
    if abs(diff_direct) < 1e-12:
        sign_matches = abs(target) < 1e-12
    else:
        sign_matches = math.copysign(1.0, diff_direct) == math.copysign(1.0, target)
    return ElasticitySummary(
        s_T=s_T,
        s_I=s_I,
        alpha=alpha,
        eta_unreg=A / B,
        eta_reg=C / D,
        diff_direct=diff_direct,
        diff_factorized=diff_factorized,
        sign_matches=sign_matches,
    )


def full_price(spec: FullPriceSpec, quantity: float) -> tuple[float, float]:
    """Out-of-pocket cost per visit and full money price including premium."""
    if quantity <= 0:
        raise DomainError(f"quantity must be > 0, got {quantity}")
    e_oop = (
        spec.annual_deductible / quantity
        + spec.fixed_copay
        + spec.coinsurance_rate * spec.service_cost
    )
    p_y = e_oop + spec.premium / quantity
    return e_oop, p_y


def b1_elasticity_order(wage: float, time_per_unit: float, money_price: float) -> str:
    """Order of time-price vs money-price demand elasticity magnitudes.

    Both elasticities share the derivative with respect to the total price,
    so the ordering is that of w*tau vs P_Y.
    """
    if money_price < 0 or wage * time_per_unit < 0:
        raise DomainError("prices must be nonnegative")
    time_price = wage * time_per_unit
    if time_price == 0 and money_price == 0:
        raise DomainError("time and money prices cannot both be zero")
    if math.isclose(time_price, money_price, rel_tol=1e-12, abs_tol=1e-15):
        return EQUAL
    return TIME_GREATER if time_price > money_price else MONEY_GREATER


def b2_substitution_sign(
    wage: float,
    comp_time: float,
    comp_price: float,
    med_time: float,
    med_price: float,
) -> str:
    """Sign of the broadband substitution effect on medical-services demand.

    Positive when the composite good is relatively more time intensive:
    ws/(ws+q) > w*tau/(w*tau + P_Y).
    """
    comp_total = wage * comp_time + comp_price
    med_total = wage * med_time + med_price
    if comp_total <= 0 or med_total <= 0:
        raise DomainError("total prices must be positive")
    comp_share = wage * comp_time / comp_total
    med_share = wage * med_time / med_total
    if math.isclose(comp_share, med_share, rel_tol=1e-12, abs_tol=1e-15):
        return ZERO
    return POSITIVE if comp_share > med_share else NEGATIVE


def _check_elasticity_args(s_I: float, eps_T: float, eps_I: float) -> None:
    if not 0 < s_I < 1:
        raise DomainError(f"s_I must be in (0,1), got {s_I}")
    if eps_T <= 0 or eps_I <= 0:
        raise DomainError("supply elasticities must be > 0")
