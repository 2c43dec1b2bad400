"""Family construction, residual conditions, and the Newton/LM driver."""

import math

import numpy as np
import pytest

from helikon.divisor import residue
from helikon.errors import AbelViolation, CoincidentPoints, SingularJacobian
from helikon.expr import Plane, parse_expr
from helikon.paths import circle, polyline
from helikon.solver import (
    AsymptoticRegularity,
    FamilySpec,
    HorizontalPeriod,
    VerticalPeriod,
    asymptotic_residual,
    periodic_g1h_family,
    solve,
    standard_g1h_family,
)
from helikon.surface import WeierstrassData

INIT = {"E1": 0.25 + 0.1j, "rho": 0.8, "c": 0.0}


def toy_family(residual_fn):
    """One real parameter smuggled through the basepoint; closed-form
    residual so the driver itself is what gets exercised."""
    plane = Plane()
    g = parse_expr("exp(i*u)", plane)
    dh = parse_expr("1 du", plane)

    def constructor(params):
        return WeierstrassData(g=g, dh=dh, basepoint=params["x"])

    class Closed:
        def evaluate(self, data, tol):
            return residual_fn(data.basepoint.real)

    return FamilySpec(
        parameters=[("x", "real")],
        constructor=constructor,
        residuals=[Closed()],
    )


class TestFamilyConstruction:
    def test_coincident_punctures_rejected(self):
        with pytest.raises(CoincidentPoints):
            periodic_g1h_family({"E1": 0.3, "E2": 0.3})
        with pytest.raises(CoincidentPoints):
            # coincide mod the lattice
            periodic_g1h_family({"E1": 0.3, "E2": 0.3 + 1 + 1j})

    def test_explicit_a_must_satisfy_abel(self):
        with pytest.raises(AbelViolation):
            periodic_g1h_family(
                {"E1": 0.2 + 0.1j, "zero_shifts": [0.37], "a": 0.0}
            )

    def test_degenerate_pair_warns_and_cancels(self):
        E1 = 0.1 + 0.2j
        with pytest.warns(UserWarning):
            data = periodic_g1h_family(
                {
                    "E1": E1,
                    "zero_shifts": [-E1 - 0.5, 0.4],
                    "pole_shifts": [E1 + 0.5, 0.4],
                }
            )
        # the coincident 0.4/0.4 pair drops out; Abel holds for the rest
        assert data.domain.punctures == (E1, -E1)

    def test_dh_residues_are_minus_plus_i(self):
        E1 = 0.11 + 0.13j
        data = periodic_g1h_family(
            {
                "E1": E1,
                "zero_shifts": [-E1 - 0.5],
                "pole_shifts": [E1 + 0.5],
                "c": 0.3 - 0.2j,
            }
        )
        E1, E2 = data.domain.punctures
        assert abs(residue(data.dh, E1, 0.05) - (-1j)) < 1e-10
        assert abs(residue(data.dh, E2, 0.05) - 1j) < 1e-10

    def test_g_is_single_valued(self):
        fam = standard_g1h_family(shift=0.5)
        data = fam.build(fam.pack(INIT))
        u = 0.21 + 0.43j
        v0 = data.g(u)
        assert abs(data.g(u + 1) / v0 - 1) < 1e-10
        assert abs(data.g(u + 1j) / v0 - 1) < 1e-10


class TestFamilySpec:
    def test_pack_unpack_round_trip(self):
        fam = standard_g1h_family()
        x = fam.pack(INIT)
        assert x.size == 5
        back = fam.unpack(x)
        assert back["E1"] == INIT["E1"]
        assert back["rho"] == INIT["rho"]

    def test_wrong_size_vector(self):
        fam = standard_g1h_family()
        with pytest.raises(ValueError):
            fam.unpack(np.zeros(3))

    def test_guard_rejects_small_rho(self):
        fam = standard_g1h_family()
        bad = dict(INIT, rho=0.01)
        with pytest.raises(CoincidentPoints):
            fam.residual_vector(fam.pack(bad))

    def test_guard_rejects_merging_punctures(self):
        fam = standard_g1h_family()
        bad = dict(INIT, E1=0.01 + 0.01j)
        with pytest.raises(CoincidentPoints):
            fam.residual_vector(fam.pack(bad))

    def test_empty_residual_list(self):
        with pytest.raises(ValueError):
            FamilySpec(parameters=[("x", "real")], constructor=None, residuals=[])

    def test_cycle_basis_collects_cycles(self):
        fam = standard_g1h_family()
        from helikon.lattice import Lattice

        basis = fam.cycle_basis(lattice=Lattice(1j))
        assert [lbl for lbl, _ in basis.items()] == ["A", "B"]


class TestResidualConditions:
    def test_vertical_period_catenoid(self):
        from helikon.expr import PuncturedPlane

        dom = PuncturedPlane((0,))
        data = WeierstrassData(
            g=parse_expr("u", dom),
            dh=parse_expr("1/u du", dom),
            basepoint=1.0,
        )
        cond = VerticalPeriod(circle(0, 1.0))
        (val,) = cond.evaluate(data, 1e-11)
        assert abs(val) < 1e-10  # Re(2 pi i) = 0

    def test_horizontal_period_catenoid(self):
        from helikon.expr import PuncturedPlane

        dom = PuncturedPlane((0,))
        data = WeierstrassData(
            g=parse_expr("u", dom),
            dh=parse_expr("1/u du", dom),
            basepoint=1.0,
        )
        cond = HorizontalPeriod(circle(0, 1.0))
        r = cond.evaluate(data, 1e-11)
        assert max(abs(v) for v in r) < 1e-10

    def test_asymptotic_residual_zero_for_helicoid_like_data(self):
        # dg/g - i dh = i du - i du = 0 identically
        plane = Plane()
        data = WeierstrassData(
            g=parse_expr("exp(i*u)", plane),
            dh=parse_expr("1 du", plane),
            basepoint=0.0,
        )
        assert asymptotic_residual(data, [0.5 + 0.5j]) < 1e-12

    def test_asymptotic_residual_vanishes_on_family(self):
        # the family construction cancels the dg/g residues (+1, -1) against
        # the -i * dh residues (-1, +1), so the defect is identically zero
        data = periodic_g1h_family(
            {"E1": 0.25 + 0.1j, "zero_shifts": [-0.75 - 0.1j],
             "pole_shifts": [0.75 + 0.1j], "rho": 0.8, "c": 0.0}
        )
        assert asymptotic_residual(data, data.domain.punctures) < 1e-10

    def test_asymptotic_residual_flags_wrong_dh_scale(self):
        from dataclasses import replace

        data = periodic_g1h_family(
            {"E1": 0.25 + 0.1j, "zero_shifts": [-0.75 - 0.1j],
             "pole_shifts": [0.75 + 0.1j], "rho": 0.8, "c": 0.0}
        )
        # doubling dh breaks the cancellation: residue defect 1 per puncture
        bad = replace(data, dh=data.dh.scale(2.0))
        val = asymptotic_residual(bad, bad.domain.punctures)
        assert abs(val - 1.0) < 1e-9


class TestDriver:
    def test_quadratic_toy_converges(self):
        fam = toy_family(lambda x: [x * x - 4.0])
        res = solve(fam, np.array([3.0]), tol=1e-12)
        assert res.converged
        assert abs(res.params[0] - 2.0) < 1e-10
        # monotone history
        assert all(b <= a for a, b in zip(res.history, res.history[1:]))

    def test_fixed_point_takes_zero_iterations(self):
        fam = toy_family(lambda x: [0.0])
        res = solve(fam, np.array([1.7]))
        assert res.converged and res.iterations == 0
        assert res.params[0] == 1.7

    def test_rootless_toy_raises(self):
        fam = toy_family(lambda x: [x * x + 1.0])
        with pytest.raises(SingularJacobian):
            solve(fam, np.array([0.5]), tol=1e-12, max_iter=60)

    def test_final_norm_recomputed(self):
        fam = toy_family(lambda x: [x - 1.25])
        res = solve(fam, np.array([0.0]), tol=1e-13)
        assert abs(res.final_norm) < 1e-13
        assert res.history[-1] == res.final_norm


class TestPeriodProblem:
    def test_standard_family_solves(self):
        fam = standard_g1h_family(tau=1j, shift=0.5)
        res = solve(fam, INIT, tol=1e-8, max_iter=50)
        assert res.converged
        assert res.final_norm < 1e-8
        assert all(b <= a for a, b in zip(res.history, res.history[1:]))
        # the reduced system (horizontal closure + end regularity) is
        # underdetermined, so the endpoint is one point on a solution curve;
        # pin invariants of the solved data, not the parameter values
        params = fam.unpack(res.params)
        assert params["rho"] > 0.05
        # horizontal closure on both generators in the final report
        for entry in res.report.entries:
            assert entry.r1 < 1e-7
        # the solved data still has the exact dh residues
        data = fam.build(res.params)
        E1, E2 = data.domain.punctures
        assert abs(residue(data.dh, E1, 0.05) + 1j) < 1e-9
        assert abs(residue(data.dh, E2, 0.05) - 1j) < 1e-9
