"""Regime case tables: worked examples and the C = m deg(f) sweep."""

import pytest

from feynpar.graph_poly import OddDimension, case_table_affine, case_table_sliced


def test_affine_worked_examples():
    r = case_table_affine(2, 4, 1)
    assert r.regime == "low" and r.f_exponents == (0, 1)
    assert r.m == 2 and r.omega_exponents == (0, 0) and r.big_c == 2

    r = case_table_affine(3, 4, 1)
    assert r.regime == "middle" and r.m == 1
    assert r.f_exponents == (1, 2) and r.big_c == 4
    assert r.big_c == r.m * r.f_degree(1)

    r = case_table_affine(6, 4, 1)
    assert r.regime == "high" and r.f_exponents == (1, 0)
    assert r.m == 4 and r.omega_exponents == (0, 2) and r.big_c == 8


def test_sliced_worked_examples():
    r = case_table_sliced(2, 4, 1)
    assert r.regime == "low" and r.f_exponents == (0, 1)
    assert r.m == 2 and r.h_exponents == (0, 0) and r.r_max == 0

    r = case_table_sliced(3, 4, 1)
    assert r.regime == "middle" and r.m == 1
    assert r.h_exponents == (0, 1) and r.r_max == 2

    r = case_table_sliced(2, 2, 1)
    assert r.regime == "high" and r.f_exponents == (1, 0)
    assert r.m == 1 and r.h_exponents == (0, 0) and r.r_max == 1


def test_sweep_c_equals_m_deg_f():
    for n in range(1, 13):
        for d in (2, 4, 6, 8):
            for ell in range(1, 5):
                r = case_table_affine(n, d, ell)
                assert r.big_c == r.m * r.f_degree(ell), (n, d, ell)
                assert r.m > 0


def test_sweep_sliced_integrality():
    for k in range(1, 13):
        for d in (2, 4, 6, 8):
            for ell in range(1, 5):
                r = case_table_sliced(k, d, ell)
                assert isinstance(r.m, int) and r.m > 0
                assert isinstance(r.r_max, int)
                assert r.big_c == r.m * r.f_degree(ell)


def test_regimes_partition():
    for n in range(1, 13):
        for d in (2, 4, 6, 8):
            for ell in range(1, 5):
                r = case_table_affine(n, d, ell)
                hi = n - d * (ell + 1) / 2
                lo = n - d * ell / 2
                if hi >= 0:
                    assert r.regime == "high"
                elif lo <= 0:
                    assert r.regime == "low"
                else:
                    assert r.regime == "middle"


def test_odd_dimension_rejected():
    with pytest.raises(OddDimension):
        case_table_affine(3, 3, 1)
    with pytest.raises(OddDimension):
        case_table_sliced(3, 5, 1)
