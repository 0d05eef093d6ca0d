"""Equilibrium solvers: condition residuals, oracle agreement, comparative
statics, binding detection, and elasticity finite differences."""

import math
import warnings

import numpy as np
import pytest

from teleparity.exceptions import DomainError, InfeasibleRegimeError
from teleparity.market import (
    MarketPrimitives,
    PolicyRegime,
    apply_shocks,
    condition_residuals,
    equilibrium_shift,
    eta_regulated_consistent,
    eta_unregulated,
    local_supply_elasticity,
    solve_regulated,
    solve_unregulated,
)
from teleparity.market.specs import DemandSpec, InputSupplySpec, ProductionSpec

from conftest import equilibrium_oracle, random_primitives


def simple_economy(**demand_kw) -> MarketPrimitives:
    demand = dict(
        eta0=0.3, eta1=0.05, eta2=0.07, broadband_z=1.0, wage=1.0,
        time_per_unit=0.5, demand_shift=2.0,
    )
    demand.update(demand_kw)
    return MarketPrimitives(
        production=ProductionSpec(tfp=1.0, share=0.5, substitution=1.5),
        telehealth_supply=InputSupplySpec(elasticity=1.5),
        inperson_supply=InputSupplySpec(elasticity=0.7),
        demand=DemandSpec(**demand),
    )


class TestUnregulated:
    def test_conditions_hold(self):
        prim = simple_economy()
        eq = solve_unregulated(prim)
        res = condition_residuals(prim, eq)
        for name in ("fp", "pf", "is", "ts", "fd", "cmc"):
            assert abs(res[name]) < 1e-9, name

    def test_matches_independent_oracle(self, rng):
        for _ in range(25):
            prim = random_primitives(rng)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                eq = solve_unregulated(prim)
            T, I, Y, P = equilibrium_oracle(prim)
            assert eq.quantity == pytest.approx(Y, rel=1e-7)
            assert eq.full_price == pytest.approx(P, rel=1e-7)

    def test_cost_control_reduces_eta_effect(self):
        prim = simple_economy(broadband_z=2.0)
        free = solve_unregulated(prim, gamma=0.0)
        controlled = solve_unregulated(prim, gamma=1.0)
        # flatter eta means the same price maps to different demand
        assert controlled.quantity != pytest.approx(free.quantity)

    def test_demand_shift_moves_along_supply(self):
        prim = simple_economy()
        lo = solve_unregulated(prim)
        hi = solve_unregulated(apply_shocks(prim, 0.0, 0.1))
        assert hi.quantity > lo.quantity
        assert hi.full_price > lo.full_price


class TestRegulated:
    def test_binding_floor_conditions(self):
        prim = simple_economy()
        unreg = solve_unregulated(prim)
        rho = 1.2 * unreg.telehealth_revenue_per_unit
        regime = PolicyRegime.price_floor(rho)
        eq = solve_regulated(prim, regime)
        res = condition_residuals(prim, eq, regime)
        for name in ("fp", "pf", "is", "ts", "fd", "prc"):
            assert abs(res[name]) < 1e-9, name
        # cost minimization is violated under a binding control
        assert abs(res["cmc"]) > 1e-6

    def test_matches_independent_oracle(self):
        prim = simple_economy()
        unreg = solve_unregulated(prim)
        rho = 1.15 * unreg.telehealth_revenue_per_unit
        eq = solve_regulated(prim, PolicyRegime.price_floor(rho))
        T, I, Y, P = equilibrium_oracle(prim, rho=rho)
        assert eq.quantity == pytest.approx(Y, rel=1e-7)
        assert eq.telehealth_input == pytest.approx(T, rel=1e-6)

    def test_nonbinding_floor_returns_unregulated(self):
        prim = simple_economy()
        unreg = solve_unregulated(prim)
        rho = 0.5 * unreg.telehealth_revenue_per_unit
        eq = solve_regulated(prim, PolicyRegime.price_floor(rho))
        assert eq.quantity == pytest.approx(unreg.quantity)

    def test_nonbinding_ceiling_returns_unregulated(self):
        prim = simple_economy()
        unreg = solve_unregulated(prim)
        rho = 1.5 * unreg.telehealth_revenue_per_unit
        eq = solve_regulated(prim, PolicyRegime.price_ceiling(rho))
        assert eq.quantity == pytest.approx(unreg.quantity)

    def test_binding_ceiling_binds(self):
        prim = simple_economy()
        unreg = solve_unregulated(prim)
        rho = 0.85 * unreg.telehealth_revenue_per_unit
        eq = solve_regulated(prim, PolicyRegime.price_ceiling(rho))
        assert eq.telehealth_revenue_per_unit == pytest.approx(rho, rel=1e-9)

    def test_pivot_continuity(self):
        # forcing the control at exactly the unregulated revenue share
        # reproduces the unregulated equilibrium
        prim = simple_economy()
        unreg = solve_unregulated(prim)
        rho = unreg.telehealth_revenue_per_unit
        eq = solve_regulated(prim, PolicyRegime.price_floor(rho), force_binding=True)
        assert eq.quantity == pytest.approx(unreg.quantity, rel=1e-8)

    def test_infeasible_rho(self):
        prim = simple_economy()
        with pytest.raises(InfeasibleRegimeError):
            solve_regulated(prim, PolicyRegime.price_floor(1e9))

    def test_cost_parity_flattens_demand(self):
        prim = simple_economy(broadband_z=2.0)
        eq = solve_regulated(prim, PolicyRegime.cost_parity())
        res = condition_residuals(prim, eq, PolicyRegime.cost_parity())
        assert abs(res["fd"]) < 1e-9


class TestEquilibriumShift:
    def test_floor_with_lower_telehealth_curvature_raises_quantity(self):
        # supply elasticity higher for telehealth -> curvature lower; a
        # binding floor rotates supply flatter and raises traded quantity
        prim = simple_economy(broadband_z=2.0)
        unreg = solve_unregulated(prim)
        regime = PolicyRegime.price_floor(1.1 * unreg.telehealth_revenue_per_unit)
        assert equilibrium_shift(prim, regime) > 0

    def test_nonbinding_shift_zero(self):
        prim = simple_economy()
        unreg = solve_unregulated(prim)
        regime = PolicyRegime.price_floor(0.5 * unreg.telehealth_revenue_per_unit)
        assert equilibrium_shift(prim, regime) == pytest.approx(0.0)


class TestLocalElasticity:
    def test_unregulated_matches_formula(self, rng):
        worst = 0.0
        for _ in range(40):
            prim = random_primitives(rng)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                eq = solve_unregulated(prim)
                fd = local_supply_elasticity(prim, None)
            _, s_i = eq.cost_shares
            formula = eta_unregulated(
                s_i,
                prim.production.substitution,
                1.0 / prim.telehealth_supply.elasticity,
                1.0 / prim.inperson_supply.elasticity,
            )
            worst = max(worst, abs(fd / formula - 1.0))
        assert worst < 1e-3

    def test_regulated_pivot_matches_consistent_formula(self, rng):
        worst = 0.0
        for _ in range(40):
            prim = random_primitives(rng)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                unreg = solve_unregulated(prim)
                regime = PolicyRegime.price_floor(unreg.telehealth_revenue_per_unit)
                fd = local_supply_elasticity(prim, regime, force_binding=True)
            _, s_i = unreg.cost_shares
            formula = eta_regulated_consistent(
                s_i,
                1.0 / prim.telehealth_supply.elasticity,
                1.0 / prim.inperson_supply.elasticity,
            )
            worst = max(worst, abs(fd / formula - 1.0))
        assert worst < 1e-3

    def test_bad_bump(self):
        with pytest.raises(DomainError):
            local_supply_elasticity(simple_economy(), None, bump=0.0)


class TestCobbDouglasClosedForm:
    def test_symmetric_regulated_curve(self):
        # sigma=1, a=0.5, unit linear supplies: along the compliance curve
        # Y = T^2/rho, I = T^3/rho^2, P = rho + T^4/rho^3, analytically.
        prim = MarketPrimitives(
            production=ProductionSpec(tfp=1.0, share=0.5, substitution=1.0),
            telehealth_supply=InputSupplySpec(elasticity=1.0),
            inperson_supply=InputSupplySpec(elasticity=1.0),
            demand=DemandSpec(eta0=0.3, eta1=0.05, eta2=0.07, broadband_z=1.0,
                              time_per_unit=0.5, demand_shift=2.0),
        )
        unreg = solve_unregulated(prim)
        rho = unreg.telehealth_revenue_per_unit
        eq = solve_regulated(prim, PolicyRegime.price_floor(1.05 * rho),
                             force_binding=True)
        T = eq.telehealth_input
        r = 1.05 * rho
        assert eq.quantity == pytest.approx(T**2 / r, rel=1e-9)
        assert eq.inperson_input == pytest.approx(T**3 / r**2, rel=1e-9)
        assert eq.full_price == pytest.approx(r + T**4 / r**3, rel=1e-9)
