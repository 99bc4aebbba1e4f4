import math

import numpy as np
import pytest

from ponderomotive.duan import (
    DuanStandardForm,
    _residuals,
    duan_check,
    duan_R,
    duan_standard_form,
    duan_substandard,
)
from ponderomotive.errors import DegenerateBlock, DegenerateState
from ponderomotive.gaussian import (
    CovarianceMatrix,
    log_negativity,
    random_local_symplectic,
    random_physical_cm,
    rescale,
    tmsv,
)


def _vac_one(entries):
    return CovarianceMatrix(entries, "vacuum_one")


class TestSubstandard:
    @pytest.mark.parametrize("r", [0.1, 0.7, 1.5])
    def test_tmsv(self, r):
        n, m, c, cp = duan_substandard(rescale(tmsv(r), "vacuum_one"))
        assert n == pytest.approx(math.cosh(2 * r), rel=1e-12)
        assert m == pytest.approx(math.cosh(2 * r), rel=1e-12)
        assert sorted([c, cp]) == pytest.approx([-math.sinh(2 * r), math.sinh(2 * r)], rel=1e-6)

    def test_thermal(self):
        assert tuple(duan_substandard(_vac_one(2 * np.eye(4)))) == (2.0, 2.0, 0.0, 0.0)

    def test_vacuum(self):
        assert tuple(duan_substandard(_vac_one(np.eye(4)))) == (1.0, 1.0, 0.0, 0.0)

    def test_half_arrays_rescaled(self):
        n, m, _, _ = duan_substandard(0.5 * np.eye(4))
        assert n == m == 1.0

    def test_invariant_under_local_ops(self, rng):
        for _ in range(50):
            V = random_physical_cm(rng)
            S = random_local_symplectic(rng)
            a = duan_substandard(V)
            b = duan_substandard(S @ V.entries @ S.T)
            assert tuple(a) == pytest.approx(tuple(b), rel=1e-7, abs=1e-7)

    def test_degenerate_block(self):
        V = np.diag([1.0, 0.0, 1.0, 1.0])
        with pytest.raises(DegenerateBlock):
            duan_substandard(_vac_one(V))

    def test_reconstructs_determinants(self, rng):
        for _ in range(50):
            E = rescale(random_physical_cm(rng), "vacuum_one").entries
            n, m, c, cp = duan_substandard(_vac_one(E))
            assert c * cp == pytest.approx(np.linalg.det(E[:2, 2:]), rel=1e-8, abs=1e-9)
            detV = (n * m - c * c) * (n * m - cp * cp)
            assert detV == pytest.approx(np.linalg.det(E), rel=1e-7)


class TestStandardForm:
    def test_symmetric_tmsv_unchanged(self):
        s = math.sinh(1.0)
        f = duan_standard_form(math.cosh(1.0), math.cosh(1.0), s, -s)
        assert (f.r1, f.r2) == (1.0, 1.0)
        assert (f.n1, f.n2, f.m1, f.m2) == (math.cosh(1.0),) * 4

    def test_thermal(self):
        f = duan_standard_form(2.0, 2.0, 0.0, 0.0)
        assert (f.r1, f.r2, f.n1, f.n2, f.m1, f.m2, f.c1, f.c2) == (1, 1, 2, 2, 2, 2, 0, 0)

    def test_generic_asymmetric_residuals(self):
        f = duan_standard_form(1.8, 1.3, 0.9, -0.6)
        r10, r11 = _residuals(f.r1, f.r2, 1.8, 1.3, 0.9, -0.6)
        assert abs(r10) <= 1e-8 and abs(r11) <= 1e-8
        assert f.r1 != 1.0
        # conditions written directly in terms of the standard form entries
        lhs = abs(f.c1) - abs(f.c2)
        rhs = math.sqrt((f.n1 - 1) * (f.m1 - 1)) - math.sqrt((f.n2 - 1) * (f.m2 - 1))
        assert lhs == pytest.approx(rhs, abs=1e-8)
        assert (f.n1 - 1) / (f.m1 - 1) == pytest.approx((f.n2 - 1) / (f.m2 - 1), rel=1e-8)

    def test_degenerate_marginal_flagged(self):
        f = duan_standard_form(1.0, 1.5, 0.0, 0.0)
        assert f.degenerate and (f.r1, f.r2) == (1.0, 1.0)

    def test_large_variances_converge(self, rng):
        for _ in range(50):
            V = random_physical_cm(rng, max_squeeze=3.0)
            v = duan_check(V)
            assert v.applicable, v.reason


class TestR:
    def test_thermal(self):
        assert duan_R(DuanStandardForm(2, 2, 2, 2, 0, 0)) == 2.0

    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0])
    def test_tmsv(self, r):
        assert duan_check(tmsv(r)).R == pytest.approx(math.exp(-2 * r), abs=1e-9)

    def test_one_pure_marginal(self):
        with pytest.raises(DegenerateState):
            duan_R(DuanStandardForm(1.0, 1.0, 2.0, 2.0, 0.0, 0.0))

    def test_golden(self, golden):
        v = duan_check(golden)
        assert v.applicable and v.entangled and v.R < 1


class TestCheck:
    def test_vacuum(self):
        v = duan_check(CovarianceMatrix.vacuum())
        assert v.applicable and not v.entangled and v.R == 1.0

    def test_tmsv_entangled(self):
        assert duan_check(tmsv(0.5)).entangled

    def test_thermal_separable(self):
        v = duan_check(np.eye(4))
        assert not v.entangled and v.R == pytest.approx(2.0)

    def test_not_applicable_is_reported(self):
        v = duan_check(np.diag([0.5, 0.0, 0.5, 0.5]))
        assert not v.applicable and not v.entangled and "DegenerateBlock" in v.reason

    def test_agrees_with_ppt(self, rng):
        disagree = 0
        for _ in range(1000):
            V = random_physical_cm(rng)
            v = duan_check(V)
            if not v.applicable or abs(v.R - 1) <= 1e-6:
                continue
            disagree += (v.R < 1) != (log_negativity(V) > 0)
        assert disagree == 0
