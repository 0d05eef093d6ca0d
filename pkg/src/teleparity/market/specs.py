"""Parameter containers for the regulated healthcare market model.

The model has two upstream inputs -- a telehealth input T and an in-person
input I -- combined by a CES technology into a composite service Y that
consumers buy at a full (money + time) price.  Input supply is isoelastic,
so every structural parameter of the general model is a primitive here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..exceptions import DomainError, GuardError

PRICE_FLOOR = "floor"
PRICE_CEILING = "ceiling"
PRICE_PARITY = "parity"
COST_PARITY = "parity"
COST_CEILING = "ceiling"


@dataclass(frozen=True)
class InputSupplySpec:
    """Isoelastic input supply: marginal cost scale * x**(1/elasticity)."""

    elasticity: float
    scale: float = 1.0

    def __post_init__(self):
        if self.elasticity <= 0:
            raise DomainError(f"supply elasticity must be > 0, got {self.elasticity}")
        if self.scale <= 0:
            raise DomainError(f"supply scale must be > 0, got {self.scale}")

    def marginal_price(self, quantity: float) -> float:
        """Marginal input price at the given quantity (inverse supply)."""
        if quantity <= 0:
            raise DomainError(f"quantity must be > 0, got {quantity}")
        return self.scale * quantity ** (1.0 / self.elasticity)


@dataclass(frozen=True)
class ProductionSpec:
    """CES technology Y = tfp * [share*T^e + (1-share)*I^e]^(1/e).

    The CES exponent is 1 - 1/substitution; substitution = 1 is the
    Cobb-Douglas limit and is handled exactly.
    """

    tfp: float = 1.0
    share: float = 0.5
    substitution: float = 1.0

    def __post_init__(self):
        if self.tfp <= 0:
            raise DomainError(f"tfp must be > 0, got {self.tfp}")
        if not 0 < self.share < 1:
            raise DomainError(f"share must be in (0,1), got {self.share}")
        if self.substitution <= 0:
            raise DomainError(f"substitution must be > 0, got {self.substitution}")

    @property
    def ces_exponent(self) -> float:
        return 1.0 - 1.0 / self.substitution

    def output(self, telehealth: float, inperson: float) -> float:
        if telehealth <= 0 or inperson <= 0:
            raise DomainError("inputs must be > 0")
        e = self.ces_exponent
        if abs(e) < 1e-12:
            return self.tfp * telehealth ** self.share * inperson ** (1.0 - self.share)
        inner = self.share * telehealth ** e + (1.0 - self.share) * inperson ** e
        return self.tfp * inner ** (1.0 / e)

    def mrts(self, telehealth: float, inperson: float) -> float:
        """Marginal rate of technical substitution F_T / F_I."""
        if telehealth <= 0 or inperson <= 0:
            raise DomainError("inputs must be > 0")
        a = self.share
        return (a / (1.0 - a)) * (telehealth / inperson) ** (self.ces_exponent - 1.0)


@dataclass(frozen=True)
class DemandSpec:
    """Quasi-linear demand Y = demand_shift * (P + wage*time_per_unit)**(-1/eta).

    eta varies with broadband and the cost-control intensity gamma:
    eta = eta0 + eta1*B - eta2*gamma*B, constrained to (0, 1).
    """

    eta0: float
    eta1: float
    eta2: float
    broadband_z: float = 0.0
    wage: float = 1.0
    time_per_unit: float = 0.0
    composite_money_price: float = 1.0
    composite_time_per_unit: float = 0.0
    demand_shift: float = 1.0

    def __post_init__(self):
        if self.eta0 <= 0:
            raise DomainError(f"eta0 must be > 0, got {self.eta0}")
        if not self.eta2 > self.eta1 > 0:
            raise DomainError(
                f"need eta2 > eta1 > 0, got eta1={self.eta1}, eta2={self.eta2}"
            )
        if self.wage <= 0:
            raise DomainError(f"wage must be > 0, got {self.wage}")
        if self.time_per_unit < 0:
            raise DomainError("time_per_unit must be >= 0")
        if self.composite_money_price <= 0:
            raise DomainError("composite_money_price must be > 0")
        if self.composite_time_per_unit < 0:
            raise DomainError("composite_time_per_unit must be >= 0")
        if self.demand_shift <= 0:
            raise DomainError("demand_shift must be > 0")

    def eta(self, gamma: float) -> float:
        return demand_eta(self.broadband_z, gamma, self.eta0, self.eta1, self.eta2)

    def quantity(self, money_price: float, gamma: float = 0.0) -> float:
        return demand_quantity(
            money_price,
            self.wage,
            self.time_per_unit,
            self.eta(gamma),
            self.demand_shift,
        )


def demand_eta(broadband_z: float, gamma: float, eta0: float, eta1: float, eta2: float) -> float:
    """Demand curvature eta0 + eta1*B - eta2*gamma*B; price elasticity is -1/eta."""
    if not eta2 > eta1 > 0:
        raise DomainError(f"need eta2 > eta1 > 0, got eta1={eta1}, eta2={eta2}")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must be in [0,1], got {gamma}")
    eta = eta0 + eta1 * broadband_z - eta2 * gamma * broadband_z
    if not 0.0 < eta < 1.0:
        raise GuardError(
            f"eta={eta:.6g} outside (0,1) at broadband_z={broadband_z}, gamma={gamma}"
        )
    return eta


def demand_quantity(
    money_price: float,
    wage: float,
    time_per_unit: float,
    eta: float,
    demand_shift: float,
) -> float:
    """Quantity demanded at the full price money_price + wage*time_per_unit."""
    full = money_price + wage * time_per_unit
    if full <= 0:
        raise DomainError(f"full price must be > 0, got {full}")
    if not 0 < eta < 1:
        raise DomainError(f"eta must be in (0,1), got {eta}")
    return demand_shift * full ** (-1.0 / eta)


@dataclass(frozen=True)
class PolicyRegime:
    """Active price control (floor/ceiling/parity on per-unit telehealth
    revenue rho) and cost control (parity or ceiling with gamma_cc)."""

    price_kind: str | None = None
    rho: float | None = None
    cost_kind: str | None = None
    gamma_cc: float = 0.25

    def __post_init__(self):
        if self.price_kind is not None:
            if self.price_kind not in (PRICE_FLOOR, PRICE_CEILING, PRICE_PARITY):
                raise DomainError(f"unknown price control {self.price_kind!r}")
            if self.rho is None or self.rho <= 0:
                raise DomainError("a price control requires rho > 0")
        if self.cost_kind is not None:
            if self.cost_kind not in (COST_PARITY, COST_CEILING):
                raise DomainError(f"unknown cost control {self.cost_kind!r}")
            if self.cost_kind == COST_CEILING and not 0 < self.gamma_cc < 1:
                raise DomainError(f"gamma_cc must be in (0,1), got {self.gamma_cc}")

    @property
    def gamma(self) -> float:
        """Demand-side cost-control intensity: parity 1, ceiling gamma_cc, none 0."""
        if self.cost_kind is None:
            return 0.0
        if self.cost_kind == COST_PARITY:
            return 1.0
        return self.gamma_cc

    @classmethod
    def none(cls) -> "PolicyRegime":
        return cls()

    @classmethod
    def price_floor(cls, rho: float, **kw) -> "PolicyRegime":
        return cls(price_kind=PRICE_FLOOR, rho=rho, **kw)

    @classmethod
    def price_ceiling(cls, rho: float, **kw) -> "PolicyRegime":
        return cls(price_kind=PRICE_CEILING, rho=rho, **kw)

    @classmethod
    def price_parity(cls, rho: float, **kw) -> "PolicyRegime":
        return cls(price_kind=PRICE_PARITY, rho=rho, **kw)

    @classmethod
    def cost_parity(cls) -> "PolicyRegime":
        return cls(cost_kind=COST_PARITY)

    @classmethod
    def cost_ceiling(cls, gamma_cc: float = 0.25) -> "PolicyRegime":
        return cls(cost_kind=COST_CEILING, gamma_cc=gamma_cc)


@dataclass(frozen=True)
class MarketPrimitives:
    telehealth_supply: InputSupplySpec
    inperson_supply: InputSupplySpec
    production: ProductionSpec
    demand: DemandSpec

    def with_shocks(self, dA: float, dB: float) -> "MarketPrimitives":
        """Scale tfp by (1 + dA) and demand_shift by (1 + dB)."""
        tfp = self.production.tfp * (1.0 + dA)
        shift = self.demand.demand_shift * (1.0 + dB)
        if tfp <= 0 or shift <= 0:
            raise DomainError("shock would make tfp or demand_shift nonpositive")
        return replace(
            self,
            production=replace(self.production, tfp=tfp),
            demand=replace(self.demand, demand_shift=shift),
        )


@dataclass(frozen=True)
class Equilibrium:
    quantity: float
    full_price: float
    telehealth_input: float
    inperson_input: float
    telehealth_price: float
    inperson_price: float

    @property
    def telehealth_revenue_per_unit(self) -> float:
        """r_T * T / Y, the quantity a price control pins down."""
        return self.telehealth_price * self.telehealth_input / self.quantity

    @property
    def cost_shares(self) -> tuple[float, float]:
        from .formulas import cost_shares

        return cost_shares(
            self.telehealth_price,
            self.telehealth_input,
            self.inperson_price,
            self.inperson_input,
        )


@dataclass(frozen=True)
class ElasticitySummary:
    s_T: float
    s_I: float
    alpha: float
    eta_unreg: float
    eta_reg: float
    diff_direct: float
    diff_factorized: float
    sign_matches: bool


@dataclass(frozen=True)
class FullPriceSpec:
    """Out-of-pocket decomposition of the consumer money price."""

    annual_deductible: float = 0.0
    fixed_copay: float = 0.0
    service_cost: float = 0.0
    coinsurance_rate: float = 0.2
    premium: float = 0.0
    provider_share: float = 0.6
    insurer_share: float = 0.2
    admin_share: float = 0.2

    def __post_init__(self):
        for name in ("annual_deductible", "fixed_copay", "service_cost", "premium"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if not 0 <= self.coinsurance_rate <= 1:
            raise DomainError("coinsurance_rate must be in [0,1]")
        total = self.provider_share + self.insurer_share + self.admin_share
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise DomainError(f"premium shares must sum to 1, got {total}")
