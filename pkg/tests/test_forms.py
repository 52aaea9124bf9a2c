"""Differential-form algebra and the Stokes-Euler identity."""

from math import log

import pytest
from scipy import integrate as scipy_integrate

from feynpar.forms import AffineChain, PolyForm, integrate_rational_form
from feynpar.integrals import stokes_euler_residual
from feynpar.poly import MultiPoly
from feynpar.quadrature import IntegrateOpts


def test_contraction_examples():
    w2 = PolyForm.volume(2)
    delta = w2.contract_euler()
    t1, t2 = MultiPoly.variables(2)
    assert delta.coeffs == {(0,): -t2, (1,): t1}
    # d Delta(omega_n) = n omega_n
    ddelta = delta.d()
    assert ddelta.coeffs == {(0, 1): MultiPoly.constant(2, 2)}


def test_wedge_antisymmetry():
    t1, t2, t3 = MultiPoly.variables(3)
    a = PolyForm(3, 1, {(0,): t2})
    b = PolyForm(3, 1, {(1,): t3})
    ab = a.wedge(b)
    ba = b.wedge(a)
    assert ab.coeffs[(0, 1)] == t2 * t3
    assert ba.coeffs[(0, 1)] == -(t2 * t3)
    assert a.wedge(a).coeffs == {}


def test_d_squared_zero():
    t1, t2, t3 = MultiPoly.variables(3)
    form = PolyForm(3, 1, {(0,): t1 * t2, (2,): t2 * t3 + t1})
    assert form.d().d().coeffs == {}


def test_euler_contraction_of_df():
    # Delta(df) = deg(f) f for homogeneous f
    t1, t2 = MultiPoly.variables(2)
    f = t1 * t1 + 3 * t1 * t2
    df = PolyForm(2, 1, {(0,): f.partial(0), (1,): f.partial(1)})
    assert df.contract_euler().coeffs[()] == f.scale(2)


def test_segment_integral_against_scipy():
    t1, t2 = MultiPoly.variables(2)
    f = t1 + t2
    omega = PolyForm(2, 1, {(0,): t1})  # t1 dt1
    seg = AffineChain.from_simplex([[1.0, 1.0], [2.0, 3.0]])
    val, err, _ = integrate_rational_form(omega, f, 2, seg, IntegrateOpts(tolerance=1e-11))
    oracle = scipy_integrate.quad(
        lambda u: (1 + u) * 1.0 / (2 + 3 * u) ** 2, 0, 1
    )[0]
    assert abs(val - oracle) < 1e-9


def test_triangle_integral_against_exact():
    t1, t2 = MultiPoly.variables(2)
    f = t1 + t2
    w2 = PolyForm.volume(2)
    tri = AffineChain.from_simplex([[1, 1], [2, 1], [1, 2]])
    val, err, _ = integrate_rational_form(w2, f, 2, tri, IntegrateOpts(tolerance=1e-11))
    assert abs(val - (log(1.5) - 1 / 3)) < 1e-9


def test_boundary_operator_signs():
    tri = AffineChain.from_simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    bnd = tri.boundary()
    assert [w for w, _ in bnd.pieces] == [1, -1, 1]
    # integral of an exact form over a closed boundary vanishes: d(t1 t2)
    t1, t2 = MultiPoly.variables(2)
    form = PolyForm(2, 1, {(0,): t2, (1,): t1})
    val, _, _ = integrate_rational_form(form, None, 0, bnd, IntegrateOpts(tolerance=1e-12))
    assert abs(val) < 1e-12


def test_stokes_identity_top_form_m2():
    """omega_2/(t1+t2)^2 on a shifted triangle: residual at machine scale."""
    t1, t2 = MultiPoly.variables(2)
    rep = stokes_euler_residual(
        PolyForm.volume(2),
        t1 + t2,
        2,
        AffineChain.from_simplex([[1, 1], [2, 1], [1, 2]]),
        IntegrateOpts(tolerance=1e-10),
    )
    assert rep["residual"] < 1e-8
    assert abs(rep["boundary_term"]) < 1e-9  # projective top forms are closed


def test_stokes_identity_one_form():
    """Closed 1-form t1 dt1 with nontrivial boundary and volume terms."""
    t1, t2 = MultiPoly.variables(2)
    omega = PolyForm(2, 1, {(0,): t1})
    seg = AffineChain.from_simplex([[1.0, 1.0], [2.0, 3.0]])
    rep = stokes_euler_residual(omega, t1 + t2, 2, seg, IntegrateOpts(tolerance=1e-11))
    assert rep["residual"] < 1e-8
    assert abs(rep["boundary_term"]) > 0.01  # genuinely nonzero pieces


def test_stokes_negative_control_non_closed():
    """omega = t2 dt1 is not closed; the residual reproduces the defect."""
    t1, t2 = MultiPoly.variables(2)
    omega = PolyForm(2, 1, {(0,): t2})
    assert not omega.is_closed()
    seg = AffineChain.from_simplex([[1.0, 1.0], [2.0, 3.0]])
    rep = stokes_euler_residual(omega, t1 + t2, 2, seg, IntegrateOpts(tolerance=1e-11))
    # defect = int Delta(d omega)/f^m over the segment = 1/10 for this data
    assert abs(rep["residual"] - 0.1) < 1e-8
    assert rep["residual"] > 1e-2


def test_paper_normalization_via_m1_agreement():
    """With m = 1 the volume term carries no extra factor, so both the
    corrected and the literal normalizations coincide."""
    t1, t2 = MultiPoly.variables(2)
    f = (t1 + 2 * t2) * t1  # degree 2: omega_2 is homogeneous of m deg f = 2
    omega = PolyForm.volume(2)
    tri = AffineChain.from_simplex([[1, 1], [3, 1], [1, 2]])
    rep = stokes_euler_residual(omega, f, 1, tri, IntegrateOpts(tolerance=1e-10))
    assert rep["residual"] < 1e-8
    assert rep["volume_term"] == pytest.approx(rep["lhs"] - rep["boundary_term"], abs=1e-8)
