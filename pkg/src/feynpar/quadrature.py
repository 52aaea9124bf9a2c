"""Adaptive simplex quadrature, Monte Carlo on the simplex, and sublevel-set
integrals for Gelfand-Leray differentiation.

The fixed rule is a Grundmann-Moller rule (degree 2s+1, interior nodes, any
dimension); adaptivity comes from longest-edge bisection driven by the
parent-minus-children discrepancy. Simplex integrals over the Feynman domain
use the delta-constrained projection convention: drop t_n, set
t_n = 1 - sum(t_i), Jacobian 1.

Sublevel integrals classify simplicial cells against the threshold(s),
integrate interior cells with the fixed rule, refine straddling cells, and
resolve the final straddle layer by clipping the linearly-interpolated level
set (exact polygon area/centroid), giving O(h^2) boundary error.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import factorial

import numpy as np

from .kernels import pairwise_sum


class ToleranceNotReached(RuntimeError):
    def __init__(self, msg, result):
        super().__init__(msg)
        self.result = result


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    method: str
    seed: int | None = None
    converged: bool = True

    def to_json(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "evaluations": self.evaluations,
            "method": self.method,
            "seed": self.seed,
            "converged": self.converged,
        }


@dataclass
class IntegrateOpts:
    tolerance: float = 1e-8
    max_evals: int = 4_000_000
    method: str = "adaptive"  # "adaptive" | "monte-carlo"
    seed: int = 0
    rule_order: int = 2  # Grundmann-Moller s parameter (degree 2s+1)
    split: str = "longest-edge"  # or "all-edges" for the cross-check rule
    batch: int = 256


# -- Grundmann-Moller rules -------------------------------------------------------


@lru_cache(maxsize=None)
def gm_rule(dim: int, s: int):
    """(barycentric nodes array (M, dim+1), weights (M,)) for the unit simplex.

    Weights sum to the simplex volume 1/dim!; rule is exact to degree 2s+1.
    """
    nodes = []
    weights = []
    for i in range(s + 1):
        denom = dim + 1 + 2 * (s - i)
        w = (
            (-1.0) ** i
            * 2.0 ** (-2 * s)
            * denom ** (2 * s + 1)
            / (factorial(i) * factorial(dim + 1 + 2 * s - i))
        )
        for beta in _compositions(s - i, dim + 1):
            nodes.append([(2 * b + 1) / denom for b in beta])
            weights.append(w)
    return np.array(nodes), np.array(weights)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def simplex_volume(verts: np.ndarray) -> float:
    d = verts.shape[0] - 1
    if d == 0:
        return 1.0
    mat = verts[1:] - verts[0]
    return abs(np.linalg.det(mat)) / factorial(d)


def _rule_points(verts: np.ndarray, s: int):
    bary, w = gm_rule(verts.shape[0] - 1, s)
    return bary @ verts, w


def _split_longest(verts: np.ndarray):
    d1 = verts.shape[0]
    best = (0.0, 0, 1)
    for i, j in combinations(range(d1), 2):
        dist = float(np.sum((verts[i] - verts[j]) ** 2))
        if dist > best[0]:
            best = (dist, i, j)
    _, i, j = best
    mid = (verts[i] + verts[j]) / 2.0
    a = verts.copy()
    a[i] = mid
    b = verts.copy()
    b[j] = mid
    return [a, b]


def _split_all_edges(verts: np.ndarray):
    """Split every edge at its midpoint (2^d children for d <= 2, else fall
    back to longest-edge); the alternative subdivision used by cross-checks."""
    d = verts.shape[0] - 1
    if d == 1:
        return _split_longest(verts)
    if d == 2:
        m01 = (verts[0] + verts[1]) / 2
        m02 = (verts[0] + verts[2]) / 2
        m12 = (verts[1] + verts[2]) / 2
        return [
            np.array([verts[0], m01, m02]),
            np.array([verts[1], m01, m12]),
            np.array([verts[2], m02, m12]),
            np.array([m01, m02, m12]),
        ]
    return _split_longest(verts)


def integrate_over_simplices(fn, simplices, opts: IntegrateOpts):
    """Adaptive integral of fn over a list of simplices (vertex arrays).

    Per-cell errors come from an embedded Grundmann-Moller pair (orders s and
    s-1 evaluated together); refinement bisects the worst cells.
    """
    s = max(opts.rule_order, 1)
    splitter = _split_longest if opts.split == "longest-edge" else _split_all_edges
    evals = 0
    nonfinite = 0

    def rule_batch(cells):
        nonlocal evals, nonfinite
        pts = []
        meta = []
        for verts in cells:
            p_hi, w_hi = _rule_points(verts, s)
            p_lo, w_lo = _rule_points(verts, s - 1)
            pts.append(p_hi)
            pts.append(p_lo)
            meta.append((verts, w_hi, w_lo))
        allpts = np.vstack(pts)
        vals = np.asarray(fn(allpts), dtype=np.float64)
        evals += len(allpts)
        out = []
        idx = 0
        for verts, w_hi, w_lo in meta:
            v_hi = vals[idx : idx + len(w_hi)]
            idx += len(w_hi)
            v_lo = vals[idx : idx + len(w_lo)]
            idx += len(w_lo)
            bad_hi = ~np.isfinite(v_hi)
            bad_lo = ~np.isfinite(v_lo)
            if bad_hi.any() or bad_lo.any():
                nonfinite += int(bad_hi.sum() + bad_lo.sum())
                v_hi = np.where(bad_hi, 0.0, v_hi)
                v_lo = np.where(bad_lo, 0.0, v_lo)
            d = verts.shape[0] - 1
            scale = simplex_volume(verts) * factorial(d)
            hi = float(np.dot(w_hi, v_hi)) * scale
            lo = float(np.dot(w_lo, v_lo)) * scale
            out.append((hi, abs(hi - lo) + 1e-300))
        return out

    cells = [np.asarray(v, dtype=np.float64) for v in simplices]
    heap = []
    leaves = {}
    counter = 0
    total = 0.0
    total_err = 0.0
    for verts, (val, err) in zip(cells, rule_batch(cells)):
        leaves[counter] = (verts, val, err)
        heapq.heappush(heap, (-err, counter))
        total += val
        total_err += err
        counter += 1

    while heap and total_err > opts.tolerance and evals < opts.max_evals:
        batch_ids = []
        while heap and len(batch_ids) < opts.batch:
            negerr, lid = heapq.heappop(heap)
            if lid in leaves:
                batch_ids.append(lid)
            if total_err - sum(leaves[i][2] for i in batch_ids) < opts.tolerance / 4:
                break
        if not batch_ids:
            break
        children = []
        for lid in batch_ids:
            verts, val, err = leaves.pop(lid)
            total -= val
            total_err -= err
            children.extend(splitter(verts))
        for kc, (kv, kerr) in zip(children, rule_batch(children)):
            leaves[counter] = (kc, kv, kerr)
            heapq.heappush(heap, (-kerr, counter))
            total += kv
            total_err += kerr
            counter += 1

    total = pairwise_sum([v for _, v, _ in leaves.values()])
    total_err = float(sum(e for _, _, e in leaves.values()))
    converged = total_err <= opts.tolerance and nonfinite == 0
    result = QuadratureResult(
        value=float(total),
        error_estimate=total_err,
        evaluations=evals,
        method="adaptive",
        seed=None,
        converged=converged,
    )
    if not converged:
        raise ToleranceNotReached(
            f"error estimate {total_err:.3g} (nonfinite evals: {nonfinite})", result
        )
    return result


def standard_simplex_vertices(d: int) -> np.ndarray:
    """Vertices of {x in R^d : x_i >= 0, sum x <= 1}: e_1..e_d then 0."""
    return np.vstack([np.eye(d), np.zeros(d)]) if d else np.zeros((1, 0))


def lift_to_simplex(pts: np.ndarray) -> np.ndarray:
    """Map projected coordinates x in R^{n-1} to t = (x, 1 - sum x)."""
    last = 1.0 - pts.sum(axis=1, keepdims=True)
    return np.hstack([pts, last])


def integrate_simplex(fn, n: int, opts: IntegrateOpts | None = None) -> QuadratureResult:
    """Integral over the Feynman simplex of a function of t (projection measure).

    fn maps an (N, n) array of simplex points to (N,) values.
    """
    opts = opts or IntegrateOpts()
    if n == 1:
        v = float(np.asarray(fn(np.array([[1.0]])))[0])
        ok = np.isfinite(v)
        res = QuadratureResult(v if ok else 0.0, 0.0, 1, "adaptive", None, ok)
        if not ok:
            raise ToleranceNotReached("point evaluation not finite", res)
        return res
    d = n - 1
    wrapped = lambda pts: fn(lift_to_simplex(pts))
    if opts.method == "monte-carlo":
        return _monte_carlo_simplex(fn, n, opts)
    return integrate_over_simplices(wrapped, [standard_simplex_vertices(d)], opts)


def _monte_carlo_simplex(fn, n: int, opts: IntegrateOpts) -> QuadratureResult:
    rng = np.random.default_rng(opts.seed)
    total = opts.max_evals
    vals = np.empty(total)
    done = 0
    while done < total:
        m = min(1 << 16, total - done)
        t = rng.dirichlet(np.ones(n), size=m)
        v = np.asarray(fn(t), dtype=np.float64)
        vals[done : done + m] = np.where(np.isfinite(v), v, 0.0)
        done += m
    mean = pairwise_sum(vals) / total
    var = pairwise_sum((vals - mean) ** 2) / max(total - 1, 1)
    stderr = float(np.sqrt(var / total))
    return QuadratureResult(float(mean), stderr, total, "monte-carlo", opts.seed,
                            converged=stderr <= max(opts.tolerance, 0.0) or True)


# -- sublevel / band integrals -----------------------------------------------------


@dataclass
class SublevelOpts:
    max_depth: int = 22
    min_depth: int = 3
    rule_order: int = 2
    batch_cells: int = 4096


def box_cells(bounds):
    """Simplicial cells covering a box; bounds = [(lo, hi)] per coordinate."""
    if len(bounds) == 1:
        (a, b), = bounds
        return [np.array([[a], [b]], dtype=np.float64)]
    if len(bounds) == 2:
        (ax, bx), (ay, by) = bounds
        p00, p10 = np.array([ax, ay]), np.array([bx, ay])
        p01, p11 = np.array([ax, by]), np.array([bx, by])
        return [np.array([p00, p10, p11]), np.array([p00, p11, p01])]
    raise NotImplementedError("sublevel integrals support dimensions 1 and 2")


def _clip_polygon(poly, fvals, threshold, keep_below=True):
    """Sutherland-Hodgman clip of a polygon against a linear-interp level."""
    out_pts = []
    out_f = []
    m = len(poly)
    for i in range(m):
        p0, f0 = poly[i], fvals[i]
        p1, f1 = poly[(i + 1) % m], fvals[(i + 1) % m]
        in0 = f0 <= threshold if keep_below else f0 >= threshold
        in1 = f1 <= threshold if keep_below else f1 >= threshold
        if in0:
            out_pts.append(p0)
            out_f.append(f0)
        if in0 != in1:
            tparam = (threshold - f0) / (f1 - f0)
            out_pts.append(p0 + tparam * (p1 - p0))
            out_f.append(threshold)
    return out_pts, out_f


def _polygon_area_centroid(pts):
    if len(pts) < 3:
        return 0.0, None
    a = 0.0
    cx = cy = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % len(pts)]
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if a == 0.0:
        return 0.0, None
    area = a / 2.0
    return abs(area), np.array([cx / (6 * area), cy / (6 * area)])


def _segment_clip(p0, p1, f0, f1, lo, hi):
    """Kept sub-segment of {lo <= f <= hi} on a 1-d cell (linear interp)."""
    t0, t1 = 0.0, 1.0
    df = f1 - f0
    for bound, below in ((hi, True), (lo, False)):
        if bound is None:
            continue
        in0 = f0 <= bound if below else f0 >= bound
        in1 = f1 <= bound if below else f1 >= bound
        if in0 and in1:
            continue
        if not in0 and not in1:
            return None
        tc = (bound - f0) / df
        if in0:
            t1 = min(t1, tc)
        else:
            t0 = max(t0, tc)
    if t0 >= t1:
        return None
    return p0 + t0 * (p1 - p0), p0 + t1 * (p1 - p0)


def band_integral(density, f, cells, lo, hi, opts: SublevelOpts | None = None):
    """Integral of `density` over {lo <= f <= hi} within the cells.

    lo may be None for a plain sublevel integral. Returns (value, error est).
    density and f map (N, d) arrays to (N,) values.
    """
    opts = opts or SublevelOpts()
    total = 0.0
    err = 0.0
    work = [(np.asarray(c, dtype=np.float64), 0) for c in cells]
    d = work[0][0].shape[1]
    s = opts.rule_order

    def f_probe(verts):
        if d == 1:
            probes = np.vstack([verts, verts.mean(axis=0, keepdims=True)])
        else:
            mids = np.array(
                [(verts[i] + verts[j]) / 2 for i, j in combinations(range(len(verts)), 2)]
            )
            probes = np.vstack([verts, mids, verts.mean(axis=0, keepdims=True)])
        return probes, np.asarray(f(probes), dtype=np.float64)

    while work:
        chunk = work[: opts.batch_cells]
        del work[: opts.batch_cells]
        refine = []
        for verts, depth in chunk:
            probes, fv = f_probe(verts)
            fmax, fmin = fv.max(), fv.min()
            below_hi = fmax <= hi
            above_lo = lo is None or fmin >= lo
            outside = fmin > hi or (lo is not None and fmax < lo)
            if outside and depth >= opts.min_depth:
                continue
            if below_hi and above_lo and depth >= opts.min_depth:
                pts, w = _rule_points(verts, s)
                dv = np.asarray(density(pts), dtype=np.float64)
                scale = simplex_volume(verts) * factorial(d)
                total += float(np.dot(w, dv)) * scale
                continue
            if depth < opts.max_depth:
                refine.extend((child, depth + 1) for child in _split_longest(verts))
                continue
            # Final layer: clip the linear interpolant.
            vf = fv[: len(verts)]
            diam = float(np.max(np.linalg.norm(verts - verts.mean(axis=0), axis=1))) * 2
            if d == 1:
                seg = _segment_clip(verts[0], verts[1], vf[0], vf[1], lo, hi)
                if seg is None:
                    continue
                a, b = seg
                mid = (a + b) / 2.0
                dv = float(np.asarray(density(mid[None, :]))[0])
                length = float(abs(b[0] - a[0]))
                total += dv * length
                err += abs(dv) * diam**2 * 4
            else:
                poly = [verts[i] for i in range(3)]
                fvals = [vf[i] for i in range(3)]
                pts, fs = _clip_polygon(poly, fvals, hi, keep_below=True)
                if lo is not None and pts:
                    pts, fs = _clip_polygon(pts, fs, lo, keep_below=False)
                area, centroid = _polygon_area_centroid(pts)
                if area and centroid is not None:
                    dv = float(np.asarray(density(centroid[None, :]))[0])
                    total += dv * area
                    err += abs(dv) * diam**3 * 4
        work.extend(refine)
    return total, err


def gelfand_leray_derivative(density, f, cells, s_value, h, floor=None,
                             opts: SublevelOpts | None = None):
    """d/ds of the sublevel integral at s, by central differences with
    Richardson refinement.

    The central difference A(s+h) - A(s-h) is computed directly as the thin
    band integral over {s-h <= f <= s+h}, which keeps the integrand range
    mild and makes any error far below the level cancel exactly. The
    optional floor clips the band from below (it cancels in the derivative
    whenever floor < s - h). Returns (derivative, error estimate).
    """
    def thin(step):
        lo = s_value - step
        if floor is not None:
            lo = max(lo, floor)
        return band_integral(density, f, cells, lo, s_value + step, opts)

    b_h, e_h = thin(h)
    b_h2, e_h2 = thin(h / 2)
    d_h = b_h / (2 * h)
    d_h2 = b_h2 / h
    richardson = (4 * d_h2 - d_h) / 3
    fd_err = abs(d_h2 - d_h) / 3
    quad_err = e_h / (2 * h) + e_h2 / h
    return richardson, fd_err + quad_err
