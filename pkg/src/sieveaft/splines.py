"""Cubic B-spline basis on a fixed interval, with derivatives and quadrature.

The basis is clamped (boundary knots repeated degree+1 times), so with
``m`` interior knots there are ``m + 4`` cubic basis functions.  Evaluation
uses the Cox-de Boor recursion vectorized over query points; derivative
bases are obtained from the degree-lowering recurrence.  Points outside
the domain are evaluated by constant extension: order-0 values are taken
at the nearer boundary and derivative values are zero there.

Integrals of spline-valued integrands are handled by composite
Gauss-Legendre rules split at the interior knots, which is exact for
polynomials per span and very accurate for smooth transforms such as
``exp`` of a cubic spline.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEGREE = 3
GAUSS_ORDER = 16

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_ORDER)


@dataclass(frozen=True)
class BasisSpec:
    """Configuration of a clamped cubic B-spline basis on [domain_lo, domain_hi]."""

    domain_lo: float
    domain_hi: float
    interior_knots: tuple[float, ...]
    degree: int = DEGREE

    def __post_init__(self):
        a, b = self.domain_lo, self.domain_hi
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValueError("domain endpoints must be finite")
        if not a < b:
            raise ValueError(f"domain must satisfy lo < hi, got [{a}, {b}]")
        if self.degree != DEGREE:
            raise ValueError("only cubic (degree 3) bases are supported")
        ks = self.interior_knots
        if any(not np.isfinite(k) for k in ks):
            raise ValueError("interior knots must be finite")
        if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
            raise ValueError("interior knots must be strictly increasing")
        if ks and not (a < ks[0] and ks[-1] < b):
            raise ValueError("interior knots must lie strictly inside the domain")

    @property
    def basis_count(self) -> int:
        return len(self.interior_knots) + self.degree + 1

    @property
    def n_interior(self) -> int:
        return len(self.interior_knots)


@dataclass(frozen=True)
class QuadratureGrid:
    """Composite Gauss-Legendre nodes/weights with the span each node lies in."""

    nodes: np.ndarray
    weights: np.ndarray
    span_index: np.ndarray

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def build_basis(domain_lo: float, domain_hi: float, n_interior: int) -> BasisSpec:
    """Basis with ``n_interior`` equally spaced interior knots on the domain."""
    if not (np.isfinite(domain_lo) and np.isfinite(domain_hi)):
        raise ValueError("domain endpoints must be finite")
    if not domain_lo < domain_hi:
        raise ValueError("domain_lo must be strictly below domain_hi")
    if n_interior < 0:
        raise ValueError("n_interior must be nonnegative")
    step = (domain_hi - domain_lo) / (n_interior + 1)
    knots = tuple(domain_lo + j * step for j in range(1, n_interior + 1))
    return BasisSpec(float(domain_lo), float(domain_hi), knots)


def basis_with_knots(domain_lo, domain_hi, interior_knots) -> BasisSpec:
    """Basis with explicitly placed interior knots (e.g. residual quantiles)."""
    return BasisSpec(float(domain_lo), float(domain_hi),
                     tuple(float(k) for k in interior_knots))


@lru_cache(maxsize=256)
def _knot_vector(spec: BasisSpec) -> np.ndarray:
    p = spec.degree
    t = np.concatenate([
        np.full(p + 1, spec.domain_lo),
        np.asarray(spec.interior_knots, dtype=float),
        np.full(p + 1, spec.domain_hi),
    ])
    t.flags.writeable = False
    return t


@lru_cache(maxsize=256)
def _breaks(spec: BasisSpec) -> np.ndarray:
    br = np.concatenate([[spec.domain_lo],
                         np.asarray(spec.interior_knots, dtype=float),
                         [spec.domain_hi]])
    br.flags.writeable = False
    return br


def _safe_div(num, den):
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0.0)
    return out


def _local_basis(spec: BasisSpec, s: np.ndarray, max_order: int = 0):
    """Nonzero basis window at each point of ``s`` (assumed inside the domain).

    Returns ``(first, rows)`` where ``first[i]`` is the index of the first of
    the four nonzero cubic basis functions at ``s[i]`` and ``rows[q]`` is the
    ``(n, 4)`` array of order-``q`` values for ``q`` in ``0..max_order``.
    """
    t = _knot_vector(spec)
    p = spec.degree
    K = spec.basis_count
    x = np.asarray(s, dtype=float)
    mu = np.clip(np.searchsorted(t, x, side="right") - 1, p, K - 1)

    n = x.shape[0]
    N = np.zeros((n, p + 1))
    N[:, 0] = 1.0
    left = np.zeros((n, p + 1))
    right = np.zeros((n, p + 1))
    snaps = {}
    for j in range(1, p + 1):
        left[:, j] = x - t[mu + 1 - j]
        right[:, j] = t[mu + j] - x
        saved = np.zeros(n)
        for r in range(j):
            den = right[:, r + 1] + left[:, j - r]
            temp = _safe_div(N[:, r], den)
            N[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        N[:, j] = saved
        if j == p - 2:
            snaps[1] = N[:, : j + 1].copy()
        elif j == p - 1:
            snaps[2] = N[:, : j + 1].copy()

    first = mu - p
    rows = [N.copy()]
    if max_order >= 1:
        I4 = mu[:, None] + np.arange(-p, 1)
        d1a = t[I4 + p] - t[I4]
        d1b = t[I4 + p + 1] - t[I4 + 1]
        N2 = snaps[2]
        N2pad = np.zeros((n, p + 2))
        N2pad[:, 1 : p + 1] = N2
        rows.append(p * (_safe_div(N2pad[:, :-1], d1a) - _safe_div(N2pad[:, 1:], d1b)))
    if max_order >= 2:
        I5 = mu[:, None] + np.arange(-p, 2)
        e1a = t[I5 + p - 1] - t[I5]
        e1b = t[I5 + p] - t[I5 + 1]
        N1 = snaps[1]
        N1pad = np.zeros((n, p + 3))
        N1pad[:, 2 : p + 1] = N1
        dlow = (p - 1) * (_safe_div(N1pad[:, :-1], e1a) - _safe_div(N1pad[:, 1:], e1b))
        rows.append(p * (_safe_div(dlow[:, :-1], d1a) - _safe_div(dlow[:, 1:], d1b)))
    return first, rows


def eval_basis(spec: BasisSpec, s, order: int = 0) -> np.ndarray:
    """All ``K`` basis values (or first/second derivatives) at ``s``.

    ``s`` may be a scalar or a 1-d array; the result has the basis axis
    last.  Points outside the domain use the constant boundary extension
    (order 0 takes the nearer boundary's values, orders 1-2 are zero).
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1, or 2")
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError("evaluation points must be finite")
    clipped = np.clip(arr, spec.domain_lo, spec.domain_hi)
    first, rows = _local_basis(spec, clipped, max_order=order)
    vals = rows[order]
    if order > 0:
        vals = np.where((arr >= spec.domain_lo) & (arr <= spec.domain_hi),
                        vals.T, 0.0).T
    K = spec.basis_count
    out = np.zeros((arr.shape[0], K))
    cols = first[:, None] + np.arange(spec.degree + 1)
    np.put_along_axis(out, cols, vals, axis=1)
    if np.isscalar(s) or np.ndim(s) == 0:
        return out[0]
    return out


def quadrature_grid(spec: BasisSpec, lo: float, hi: float) -> QuadratureGrid:
    """Composite Gauss-Legendre grid on [lo, hi], split at straddled knots."""
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("integration limits must be finite")
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    empty = np.empty(0)
    if lo == hi:
        return QuadratureGrid(empty, empty.copy(), np.empty(0, dtype=int))
    br = _breaks(spec)
    inner = br[(br > lo) & (br < hi)]
    edges = np.concatenate([[lo], inner, [hi]])
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * _GL_X).ravel()
    weights = (half[:, None] * _GL_W).ravel()
    span = np.clip(np.searchsorted(br, mid, side="right") - 1, 0, len(br) - 2)
    return QuadratureGrid(nodes, weights, np.repeat(span, GAUSS_ORDER))


class _SpanTables:
    """Per-spec precomputation reused by every likelihood evaluation.

    Holds the Gauss-Legendre nodes of every inter-knot span, the compact
    (4 nonzero) and dense basis values at those nodes, and the basis
    windows at the two boundaries.
    """

    __slots__ = ("breaks", "n_spans", "node_w", "node_vals", "node_first",
                 "node_dense", "bound_first", "bound_vals", "glx01", "glw01")

    def __init__(self, spec: BasisSpec):
        br = _breaks(spec)
        self.breaks = br
        S = len(br) - 1
        self.n_spans = S
        half = 0.5 * np.diff(br)
        mid = 0.5 * (br[:-1] + br[1:])
        nodes = (mid[:, None] + half[:, None] * _GL_X).ravel()
        self.node_w = (half[:, None] * _GL_W).ravel()
        first, rows = _local_basis(spec, nodes, max_order=0)
        self.node_first = first
        self.node_vals = rows[0]
        K = spec.basis_count
        dense = np.zeros((S * GAUSS_ORDER, K))
        cols = first[:, None] + np.arange(4)
        np.put_along_axis(dense, cols, rows[0], axis=1)
        self.node_dense = dense
        bfirst, brows = _local_basis(spec, np.array([br[0], br[-1]]), max_order=0)
        self.bound_first = bfirst
        self.bound_vals = brows[0]
        # GL rule mapped to [0, 1], reused for per-endpoint partial spans
        self.glx01 = 0.5 * (_GL_X + 1.0)
        self.glw01 = 0.5 * _GL_W


@lru_cache(maxsize=256)
def _span_tables(spec: BasisSpec) -> _SpanTables:
    return _SpanTables(spec)
