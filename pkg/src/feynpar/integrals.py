"""Feynman-integral numerics: parametric integrals, DimReg series, the
projective Stokes identity, Gelfand-Leray functions, Mellin transforms,
asymptotic fits, Leray epsilon-regularization, and log-moment coefficients.

Level-set integrals are computed exclusively by sublevel-set differentiation
(the Gelfand-Leray derivative rule); nothing ever parametrizes a level set.
Divergent configurations are detected by geometric probe ladders toward the
faces of the integration domain, not by power counting alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, log

import numpy as np

from .forms import AffineChain, PolyForm, integrate_rational_form
from .graph_poly import MomentumData, case_table_affine, v_function
from .graphs import FeynmanGraph
from .poly import MultiPoly
from .quadrature import (
    IntegrateOpts,
    SublevelOpts,
    ToleranceNotReached,
    box_cells,
    gelfand_leray_derivative,
    integrate_simplex,
)


class DivergentConfiguration(ValueError):
    pass


class FitUnstable(RuntimeError):
    pass


class ConvergenceDomain(ValueError):
    pass


# -- integrand assembly -------------------------------------------------------------


def _graph_integrand(g: FeynmanGraph, mom: MomentumData, d: int):
    """(psi, p_eff, psi_exponent, p_exponent) with integrand psi^a * p_eff^b."""
    if mom.mode == "two-leg" and mom.p_squared is None:
        raise ValueError("numerics need a numeric p^2 in two-leg mode")
    p_eff, psi = v_function(g, mom)
    n = g.n_edges
    ell = g.loop_number()
    sd = Fraction(n) - Fraction(d * ell, 2)
    a = float(sd - Fraction(d, 2))
    b = float(-sd)
    return psi, p_eff, a, b


def _power_eval(psi, p_eff, a, b):
    def fn(t):
        vals = np.ones(t.shape[0])
        if a:
            vals = vals * psi.eval_float(t) ** a
        if b:
            vals = vals * p_eff.eval_float(t) ** b
        return vals

    return fn


def probe_divergence(fn, n: int, margin: float = 0.05):
    """Geometric probe ladder toward every face of the simplex.

    Fits the local blowup exponent along rays into each face; a face of
    codimension c makes the integral divergent when the integrand grows at
    least like r^{-c}. Returns the list of offending faces.
    """
    from itertools import combinations

    center = np.full(n, 1.0 / n)
    bad = []
    for size in range(1, n):
        for face in combinations(range(n), size):
            fc = np.zeros(n)
            rest = [i for i in range(n) if i not in face]
            fc[rest] = 1.0 / len(rest)
            rs = 2.0 ** -np.arange(6, 18)
            pts = (1 - rs)[:, None] * fc[None, :] + rs[:, None] * center[None, :]
            vals = np.abs(np.asarray(fn(pts), dtype=np.float64))
            if not np.all(np.isfinite(vals)):
                bad.append(face)
                continue
            if np.all(vals < 1e-300):
                continue
            slopes = np.diff(np.log(vals + 1e-300)) / np.diff(np.log(rs))
            alpha = -float(np.median(slopes[-4:]))
            if alpha >= size - margin:
                bad.append(face)
    return bad


def feynman_U(g: FeynmanGraph, mom: MomentumData, d: int,
              opts: IntegrateOpts | None = None, allow_divergent: bool = False):
    """Residue integral over the simplex of psi^{-D/2} V^{-(n - D l/2)}.

    The Gamma-function and (4 pi)-power prefactors are reported separately
    and never folded into the numeric value. Divergence is probe-detected.
    """
    opts = opts or IntegrateOpts(tolerance=1e-9)
    psi, p_eff, a, b = _graph_integrand(g, mom, d)
    fn = _power_eval(psi, p_eff, a, b)
    n = g.n_edges
    ell = g.loop_number()
    bad = probe_divergence(fn, n)
    if bad and not allow_divergent:
        raise DivergentConfiguration(f"integrand blows up at faces {bad}")
    try:
        res = integrate_simplex(fn, n, opts)
    except ToleranceNotReached as exc:
        if not allow_divergent:
            raise
        res = exc.result
    sd = Fraction(n) - Fraction(d * ell, 2)
    prefactor = {
        "gamma_argument": str(sd),
        "gamma_pole": sd <= 0,
        "four_pi_exponent": str(Fraction(-ell * d, 2)),
    }
    return res, prefactor


@dataclass
class SeriesResult:
    coefficients: list
    errors: list
    mass_scale_rule: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "coefficients": self.coefficients,
            "errors": self.errors,
            "mass_scale_rule": self.mass_scale_rule,
        }


def dimreg_series(g: FeynmanGraph, mom: MomentumData, d: int, log_mu: float = 0.0,
                  order: int = 2, opts: IntegrateOpts | None = None) -> SeriesResult:
    """Coefficients of the z-expansion of the regularized residue integral.

    c_k = int G L^k / k! with G the base integrand and
    L = -log(psi)/2 + (loops/2) log(V); the whole series is then multiplied
    by the formal exp(-z * loops * log_mu).
    """
    opts = opts or IntegrateOpts(tolerance=1e-9)
    psi, p_eff, a, b = _graph_integrand(g, mom, d)
    n, ell = g.n_edges, g.loop_number()
    base = _power_eval(psi, p_eff, a, b)
    bad = probe_divergence(base, n)
    if bad:
        raise DivergentConfiguration(f"base integrand blows up at faces {bad}")

    def level(k):
        def fn(t):
            g0 = base(t)
            psi_v = psi.eval_float(t)
            v_v = p_eff.eval_float(t) / psi_v
            big_l = -0.5 * np.log(psi_v) + 0.5 * ell * np.log(v_v)
            return g0 * big_l**k / factorial(k)

        return fn

    coeffs = []
    errors = []
    for k in range(order + 1):
        try:
            res = integrate_simplex(level(k), n, opts)
        except ToleranceNotReached as exc:
            res = exc.result
        coeffs.append(res.value)
        errors.append(res.error_estimate)
    if log_mu:
        coeffs, errors = _apply_mu_rule(coeffs, errors, ell, log_mu)
    return SeriesResult(
        coeffs, errors, {"log_mu": log_mu, "loops": ell, "exponent": f"-z*{ell}*log_mu"}
    )


def _apply_mu_rule(coeffs, errors, ell, log_mu):
    rate = -ell * log_mu
    out_c = []
    out_e = []
    for k in range(len(coeffs)):
        c = sum(coeffs[k - i] * rate**i / factorial(i) for i in range(k + 1))
        e = sum(errors[k - i] * abs(rate) ** i / factorial(i) for i in range(k + 1))
        out_c.append(c)
        out_e.append(e)
    return out_c, out_e


# -- projective Stokes identity ---------------------------------------------------------


def stokes_euler_residual(omega: PolyForm, f: MultiPoly, m: int, chain: AffineChain,
                          opts: IntegrateOpts | None = None, deg_f: int | None = None):
    """Both sides of m deg(f) int omega/f^m = int_boundary Delta(omega)/f^m
    + m int df ^ Delta(omega)/f^{m+1}, for closed homogeneous omega.

    Note the factor m on the volume term: expanding d(Delta(omega)/f^m) with
    the Euler identities forces it, and the numeric residuals confirm it (the
    two normalizations agree exactly when m = 1).
    """
    opts = opts or IntegrateOpts(tolerance=1e-8)
    if deg_f is None:
        deg_f = f.total_degree()
    delta = omega.contract_euler()
    df = PolyForm(f.arity, 1, {(i,): f.partial(i) for i in range(f.arity)})
    lhs_int, e1, n1 = integrate_rational_form(omega, f, m, chain, opts)
    boundary, e2, n2 = integrate_rational_form(delta, f, m, chain.boundary(), opts)
    volume, e3, n3 = integrate_rational_form(df.wedge(delta), f, m + 1, chain, opts)
    lhs = m * deg_f * lhs_int
    rhs = boundary + m * volume
    return {
        "lhs": lhs,
        "boundary_term": boundary,
        "volume_term": m * volume,
        "residual": abs(lhs - rhs),
        "error_estimate": m * deg_f * e1 + e2 + m * e3,
        "evaluations": n1 + n2 + n3,
        "coefficient": m * deg_f,
    }


def default_identity_chain(n: int, shift: float = 0.2) -> AffineChain:
    """Solid n-simplex shifted into the open orthant: v0 = shift * (1,..,1),
    v_i = v0 + e_i.

    Both graph polynomials are strictly positive there (cut-set coefficients
    are nonnegative), so every term of the identity converges; a domain
    touching the coordinate planes would put the boundary integrals on the
    second-polynomial zero locus, where only the oriented facet sum is finite.
    """
    base = np.full(n, shift)
    verts = [base]
    verts.extend(base + np.eye(n))
    return AffineChain.from_simplex(np.array(verts))


def projective_identity_residual(g: FeynmanGraph, mom: MomentumData, d: int,
                                 opts: IntegrateOpts | None = None,
                                 chain: AffineChain | None = None):
    """Numerical residual of the projective reformulation for the graph.

    Builds (f, m, omega) from the affine case table at (n, D, loops) and
    evaluates the Stokes-Euler identity on an n-dimensional solid simplex.
    """
    n, ell = g.n_edges, g.loop_number()
    case = case_table_affine(n, d, ell)
    p_eff, psi = v_function(g, mom)
    if p_eff.arity != n:
        raise ValueError("numeric momenta required (fix p^2 or use gram mode)")
    fp, fpsi = case.f_exponents
    f = (p_eff**fp) * (psi**fpsi)
    op, opsi = case.omega_exponents
    h = (p_eff**op) * (psi**opsi)
    omega = PolyForm.volume(n).scale_poly(h)
    chain = chain or default_identity_chain(n)
    _probe_chain(h, f, case.m, chain)
    report = stokes_euler_residual(omega, f, case.m, chain, opts)
    report["case"] = {
        "regime": case.regime,
        "m": case.m,
        "f_exponents": case.f_exponents,
        "omega_exponents": case.omega_exponents,
        "big_c": case.big_c,
    }
    return report


def _probe_chain(h: MultiPoly, f: MultiPoly, m: int, chain: AffineChain,
                 margin: float = 0.05):
    """Probe h/f^m along rays toward each vertex of each chain piece."""
    for _, verts in chain.pieces:
        verts = np.asarray(verts, dtype=np.float64)
        centroid = verts.mean(axis=0)
        dim = verts.shape[0] - 1
        for vtx in verts:
            rs = 2.0 ** -np.arange(4, 16)
            pts = (1 - rs)[:, None] * vtx[None, :] + rs[:, None] * centroid[None, :]
            vals = np.abs(h.eval_float(pts)) / np.abs(f.eval_float(pts)) ** m
            if not np.all(np.isfinite(vals)):
                raise DivergentConfiguration(f"integrand not finite near {vtx}")
            if np.all(vals < 1e-300):
                continue
            slopes = np.diff(np.log(vals + 1e-300)) / np.diff(np.log(rs))
            alpha = -float(np.median(slopes[-4:]))
            if alpha >= dim - margin:
                raise DivergentConfiguration(
                    f"blowup exponent {alpha:.2f} >= {dim} toward {vtx}"
                )


# -- Gelfand-Leray and Mellin -----------------------------------------------------------


def _as_batch_fn(f):
    if isinstance(f, MultiPoly):
        return f.eval_float
    return f


def gelfand_leray_J(f, alpha_density, domain_bounds, s_grid,
                    sub_opts: SublevelOpts | None = None):
    """Samples of J(s) = d/ds int_{domain & f <= s} alpha.

    f and alpha_density map point batches to values (MultiPoly allowed);
    domain_bounds is a box [(lo, hi), ...]. Returns [(s, J, error)].
    """
    sub_opts = sub_opts or SublevelOpts()
    f_fn = _as_batch_fn(f)
    a_fn = _as_batch_fn(alpha_density)
    cells = box_cells(domain_bounds)
    s_grid = sorted(float(s) for s in s_grid)
    spacing = min(
        (b - a for a, b in zip(s_grid, s_grid[1:])), default=s_grid[0] * 0.5
    )
    out = []
    for s in s_grid:
        h = min(0.2 * s, 0.45 * spacing)
        deriv, err = gelfand_leray_derivative(a_fn, f_fn, cells, s, h, opts=sub_opts)
        out.append((s, deriv, err))
    return out


@dataclass
class AsymptoticFit:
    exponent: float
    log_power: int
    amplitude: float
    residual: float
    pole_location: float
    pole_order: int
    pole_leading_coeff: float

    def to_json(self):
        return self.__dict__.copy()


def asymptotic_fit(samples, max_log_power: int = 2, residual_threshold: float = 0.05,
                   use_smallest: int | None = None) -> AsymptoticFit:
    """Fit J(s) ~ a s^lambda log(s)^r near 0 and read off the Mellin pole.

    The pole of the Mellin transform sits at z = -(lambda + 1) with order
    r + 1 and leading Laurent coefficient (-1)^r r! a.
    """
    pts = sorted((float(s), float(j)) for s, j, *_ in samples)
    if use_smallest:
        pts = pts[:use_smallest]
    if len(pts) < 8:
        raise FitUnstable("need at least 8 samples near 0")
    s = np.array([p[0] for p in pts])
    j = np.array([p[1] for p in pts])
    if np.all(np.abs(j) < 1e-12):
        return AsymptoticFit(0.0, 0, 0.0, 0.0, -1.0, 1, 0.0)
    sign = 1.0 if np.sum(j >= 0) >= len(j) / 2 else -1.0
    keep = sign * j > 0
    if keep.sum() < 8:
        raise FitUnstable("mixed-sign samples near 0")
    s, j = s[keep], j[keep]
    ls = np.log(s)
    lil = np.log(np.abs(np.log(s)))
    best = None
    for r in range(max_log_power + 1):
        y = np.log(np.abs(j)) - r * lil
        coeffs, res_arr, *_ = np.polyfit(ls, y, 1, full=True)
        lam, log_a = coeffs
        fit_res = float(np.sqrt(res_arr[0] / len(s))) if len(res_arr) else 0.0
        if best is None or fit_res < best[0]:
            best = (fit_res, r, lam, log_a)
    fit_res, r, lam, log_a = best
    if fit_res > residual_threshold:
        raise FitUnstable(f"best residual {fit_res:.3g} above threshold")
    a = sign * float(np.exp(log_a))
    return AsymptoticFit(
        exponent=float(lam),
        log_power=r,
        amplitude=a,
        residual=fit_res,
        pole_location=-(float(lam) + 1.0),
        pole_order=r + 1,
        pole_leading_coeff=(-1) ** r * factorial(r) * a,
    )


def _tail_integral(z, lam, r, a, s0):
    """int_0^{s0} a s^{z+lam} log(s)^r ds, closed form."""
    w = z + lam + 1.0
    if w <= 0:
        raise ConvergenceDomain(f"z = {z} at or below the fitted pole {-(lam + 1)}")
    l0 = log(s0)
    if r == 0:
        return a * s0**w / w
    if r == 1:
        return a * s0**w * (l0 / w - 1.0 / w**2)
    if r == 2:
        return a * s0**w * (l0**2 / w - 2 * l0 / w**2 + 2.0 / w**3)
    raise ValueError("log powers above 2 are not fitted")


def mellin_transform(samples, z_list, tail: AsymptoticFit | None = None):
    """F(z) = int_0^{s_max} s^z J(s) ds from samples of J.

    Piecewise-linear J is integrated exactly per interval; the tail below the
    smallest sample uses the fitted leading term (fit computed here when not
    supplied). Raises ConvergenceDomain when z is at or below the fitted pole.
    """
    pts = sorted((float(s), float(j)) for s, j, *_ in samples)
    if tail is None:
        tail = asymptotic_fit(pts, use_smallest=max(8, len(pts) // 3))
    s0 = pts[0][0]
    out = []
    for z in z_list:
        z = float(z)
        total = _tail_integral(z, tail.exponent, tail.log_power, tail.amplitude, s0)
        for (sa, ja), (sb, jb) in zip(pts, pts[1:]):
            if sb <= sa:
                continue
            slope = (jb - ja) / (sb - sa)
            intercept = ja - slope * sa
            total += slope * _power_piece(z + 1, sa, sb) + intercept * _power_piece(
                z, sa, sb
            )
        out.append((z, total))
    return out, tail


def _power_piece(z, sa, sb):
    """int_{sa}^{sb} s^z ds with the log special case."""
    if abs(z + 1.0) < 1e-12:
        return log(sb / sa)
    return (sb ** (z + 1) - sa ** (z + 1)) / (z + 1)


# -- Leray regularization ------------------------------------------------------------------


def leray_I_epsilon(f: MultiPoly, h: MultiPoly, m: int, domain_bounds, eps_grid,
                    floor: float | None = None,
                    sub_opts: SublevelOpts | None = None):
    """Samples of I_eps: facet Gelfand-Leray term plus interior level term.

    I_eps = sum over domain facets of d/de int_{F & f<=e} i*(Delta(h omega)/f^{m-1})
            + d/de int_{domain & f<=e} df ^ Delta(h omega)/f^m,
    all via sublevel differentiation with an inner band floor that keeps the
    integrals finite near f = 0. Returns (samples, fit dict).
    """
    sub_opts = sub_opts or SublevelOpts()
    eps_grid = sorted(float(e) for e in eps_grid)
    if floor is None:
        floor = eps_grid[0] / 4.0
    k = f.arity
    omega = PolyForm.volume(k).scale_poly(h)
    delta = omega.contract_euler()
    df = PolyForm(k, 1, {(i,): f.partial(i) for i in range(k)})
    interior_form = df.wedge(delta)  # k-form: density * omega_k
    interior_density_poly = interior_form.coeffs.get(tuple(range(k)))

    cells = box_cells(domain_bounds)
    facets = _box_facets(domain_bounds)

    def interior_density(pts):
        if interior_density_poly is None:
            return np.zeros(pts.shape[0])
        return interior_density_poly.eval_float(pts) / f.eval_float(pts) ** m

    spacing = min(
        (b - a for a, b in zip(eps_grid, eps_grid[1:])), default=eps_grid[0] * 0.5
    )
    samples = []
    for eps in eps_grid:
        h_step = min(0.2 * eps, 0.45 * spacing, 0.9 * (eps - floor))
        val, err = gelfand_leray_derivative(
            interior_density, f.eval_float, cells, eps, h_step, floor=floor,
            opts=sub_opts,
        )
        for origin, direction, length in facets:
            dens, f_line = _facet_pullback(delta, f, m - 1, origin, direction)
            fv, fe = gelfand_leray_derivative(
                dens, f_line, [np.array([[0.0], [length]])], eps, h_step,
                floor=floor, opts=sub_opts,
            )
            val += fv
            err += fe
        samples.append((eps, val, err))
    finite = all(np.isfinite(v) for _, v, _ in samples)
    fit = _blowup_fit(samples)
    # m - 1 = 0 degenerates the facet form to a polynomial; evaluated
    # literally, flagged for the caller.
    return samples, {"all_finite": finite, "facet_power_zero": m == 1, **fit}


def _box_facets(bounds):
    """(origin, direction, length) for each edge of a 2-d box (1-d: endpoints)."""
    if len(bounds) != 2:
        raise NotImplementedError("facet terms implemented for 2-d domains")
    (ax, bx), (ay, by) = bounds
    return [
        (np.array([ax, ay]), np.array([1.0, 0.0]), bx - ax),
        (np.array([bx, ay]), np.array([0.0, 1.0]), by - ay),
        (np.array([ax, by]), np.array([1.0, 0.0]), bx - ax),
        (np.array([ax, ay]), np.array([0.0, 1.0]), by - ay),
    ]


def _facet_pullback(form: PolyForm, f: MultiPoly, power: int, origin, direction):
    """Pull a 1-form and f back to a parametrized line segment."""

    def to_ambient(x):
        return origin[None, :] + x * direction[None, :]

    def dens(x):
        pts = to_ambient(x)
        acc = np.zeros(len(x))
        for (i,), coeff in form.coeffs.items():
            if direction[i]:
                acc += coeff.eval_float(pts) * direction[i]
        if power:
            acc = acc / f.eval_float(pts) ** power
        return acc

    def f_line(x):
        return f.eval_float(to_ambient(x))

    return dens, f_line


def _blowup_fit(samples, zero_atol=1e-9):
    vals = np.array([abs(v) for _, v, _ in samples])
    eps = np.array([e for e, _, _ in samples])
    if np.all(vals < zero_atol):
        return {"nu": 0.0, "amplitude": 0.0, "note": "no blowup detected"}
    keep = vals > zero_atol
    slope, intercept = np.polyfit(np.log(eps[keep]), np.log(vals[keep]), 1)
    return {"nu": float(-slope), "amplitude": float(np.exp(intercept)), "note": ""}


# -- log-moment zeta coefficients --------------------------------------------------------


def log_zeta_coeffs(f: MultiPoly, alpha_density, n_max: int,
                    opts: IntegrateOpts | None = None):
    """zeta_n = int_Sigma log(f)^n / n! * alpha over the Feynman simplex."""
    opts = opts or IntegrateOpts(tolerance=1e-9)
    a_fn = _as_batch_fn(alpha_density)
    f_fn = _as_batch_fn(f)
    n_vars = f.arity if isinstance(f, MultiPoly) else None
    if n_vars is None:
        raise ValueError("f must be a MultiPoly to fix the simplex dimension")
    out = []
    for n in range(n_max + 1):
        def fn(t, n=n):
            return a_fn(t) * np.log(f_fn(t)) ** n / factorial(n)

        try:
            res = integrate_simplex(fn, n_vars, opts)
        except ToleranceNotReached as exc:
            res = exc.result
        out.append((res.value, res.error_estimate))
    return out


def iterated_log_integral(a: float, b: float, n: int,
                          opts: IntegrateOpts | None = None):
    """int over {a <= s_1 <= ... <= s_n <= b} of prod ds_i/s_i.

    Equals log(b/a)^n / n!; computed honestly as a chain integral over the
    order simplex with vertices (a,..,a), (a,..,a,b), ..., (b,..,b).
    """
    opts = opts or IntegrateOpts(tolerance=1e-9)
    verts = []
    for j in range(n + 1):
        verts.append([a] * (n - j) + [b] * j)
    chain = AffineChain.from_simplex(np.array(verts, dtype=np.float64))
    denom = MultiPoly.one(n)
    for i in range(n):
        denom = denom * MultiPoly.variable(n, i)
    numerator = PolyForm.volume(n)
    val, err, evals = integrate_rational_form(numerator, denom, 1, chain, opts)
    return abs(val), err, evals
