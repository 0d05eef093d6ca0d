from .formulas import (
    b1_elasticity_order,
    b2_substitution_sign,
    cost_shares,
    eta_difference,
    eta_regulated,
    eta_regulated_consistent,
    eta_unregulated,
    full_price,
    input_ratio_alpha,
    marginal_input_price,
)
from .solve import (
    apply_shocks,
    condition_residuals,
    equilibrium_shift,
    local_supply_elasticity,
    solve_regulated,
    solve_unregulated,
)
from .specs import (
    DemandSpec,
    ElasticitySummary,
    Equilibrium,
    FullPriceSpec,
    InputSupplySpec,
    MarketPrimitives,
    PolicyRegime,
    ProductionSpec,
    demand_eta,
    demand_quantity,
)
from .sweep import SWEEP_COLUMNS, regime_sweep

__all__ = [
    "b1_elasticity_order",
    "b2_substitution_sign",
    "cost_shares",
    "eta_difference",
    "eta_regulated",
    "eta_regulated_consistent",
    "eta_unregulated",
    "full_price",
    "input_ratio_alpha",
    "marginal_input_price",
    "apply_shocks",
    "condition_residuals",
    "equilibrium_shift",
    "local_supply_elasticity",
    "solve_regulated",
    "solve_unregulated",
    "DemandSpec",
    "ElasticitySummary",
    "Equilibrium",
    "FullPriceSpec",
    "InputSupplySpec",
    "MarketPrimitives",
    "PolicyRegime",
    "ProductionSpec",
    "demand_eta",
    "demand_quantity",
    "SWEEP_COLUMNS",
    "regime_sweep",
]
