"""Tensor-product quadrature on eigenvalue manifolds and Monte-Carlo means."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_RANK = 4
CHUNK = 1 << 16
TAIL_RATIO = 1e-12


DOMAIN_KINDS = ("box", "torus", "cone", "ordered_orthant", "ordered_simplex", "ordered_circle")


@dataclass(frozen=True)
class Domain:
    """Integration region, described by a parameter box and a map into coordinates.

    * ``box`` - ``lo <= x <= hi`` (Gauss-Legendre);
    * ``torus`` - ``[-pi, pi)^rank`` (periodic trapezoid);
    * ``cone`` - the ordered chamber ``x_1 >= ... >= x_n`` with ``x_n`` in
      ``[lo, hi]`` and every gap ``x_k - x_{k+1}`` in ``[0, hi - lo]``;
    * ``ordered_orthant`` - ``x_1 >= ... >= x_n >= 0`` with gaps in ``[0, hi]``;
    * ``ordered_simplex`` - ``hi >= x_1 >= ... >= x_n >= 0`` (stick-breaking map);
    * ``ordered_circle`` - angles ``x_1 >= ... >= x_n >= x_1 - 2 pi`` with ``x_1``
      periodic.

    The chamber kinds make root factors like ``|x_r - x_s|`` smooth in the
    parameters, which keeps tensor rules spectrally accurate for odd exponents.
    ``truncated`` flags the parameter faces ``(lo, hi)`` that cut off an
    unbounded manifold; the tail heuristic looks only at those.
    """

    kind: str
    rank: int
    lo: Optional[tuple[float, ...]] = None
    hi: Optional[tuple[float, ...]] = None
    truncated: tuple[bool, bool] = (False, False)

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")
        if self.kind not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind in ("torus", "ordered_circle"):
            object.__setattr__(self, "lo", (-math.pi,) * self.rank)
            object.__setattr__(self, "hi", (math.pi,) * self.rank)
            return
        lo = tuple(float(v) for v in np.broadcast_to(self.lo if self.lo is not None else 0.0, (self.rank,)))
        hi = tuple(float(v) for v in np.broadcast_to(self.hi, (self.rank,)))
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("domain needs lo < hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def box(cls, lo, hi, rank: Optional[int] = None, truncated=(False, False)) -> "Domain":
        rank = rank or np.size(lo)
        return cls("box", rank, lo, hi, tuple(truncated))

    @classmethod
    def torus(cls, rank: int) -> "Domain":
        return cls("torus", rank)

    @classmethod
    def cone(cls, rank: int, lo: float, hi: float) -> "Domain":
        return cls("cone", rank, lo, hi, (True, True))

    @classmethod
    def ordered_orthant(cls, rank: int, width: float) -> "Domain":
        return cls("ordered_orthant", rank, 0.0, width, (False, True))

    @classmethod
    def ordered_simplex(cls, rank: int, height: float) -> "Domain":
        return cls("ordered_simplex", rank, 0.0, height)

    @classmethod
    def ordered_circle(cls, rank: int) -> "Domain":
        return cls("ordered_circle", rank)

    def param_bounds(self, dim: int) -> tuple[float, float, bool]:
        """``(lo, hi, periodic)`` of parameter ``dim``."""
        k = self.kind
        if k == "torus" or (k == "ordered_circle" and dim == 0):
            return -math.pi, math.pi, True
        if k in ("ordered_simplex", "ordered_circle"):
            return 0.0, 1.0, False
        if k == "cone" and dim > 0:
            return 0.0, self.hi[dim] - self.lo[dim], False
        return self.lo[dim], self.hi[dim], False

    def truncated_faces(self, dim: int) -> tuple[bool, bool]:
        if self.kind == "cone" and dim > 0:
            return (False, True)
        return self.truncated

    def to_coords(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map parameters to coordinates; returns ``(x, log|jacobian|)``."""
        k, n = self.kind, self.rank
        zero = np.zeros(t.shape[:-1])
        if k in ("box", "torus"):
            return t, zero
        if k == "cone":
            # x_n = s, x_k = s + u_k + ... + u_{n-1}
            tail = np.cumsum(t[..., :0:-1], axis=-1)[..., ::-1]
            x = np.concatenate([t[..., :1] + tail, t[..., :1]], axis=-1)
            return x, zero
        if k == "ordered_orthant":
            return np.cumsum(t[..., ::-1], axis=-1)[..., ::-1], zero
        if k == "ordered_simplex":
            h = self.hi[0]
            x = h * np.cumprod(t, axis=-1)
            powers = np.arange(n - 1, -1, -1)
            with np.errstate(divide="ignore"):
                log_jac = n * math.log(h) + (powers[:-1] * np.log(t[..., :-1])).sum(axis=-1)
            return x, log_jac
        # ordered_circle: distances d_1 >= ... >= d_{n-1} from x_1, stick-breaking in [0, 2 pi]
        s = t[..., :1]
        if n == 1:
            return s, zero
        v = t[..., 1:]
        d = 2 * math.pi * np.cumprod(v, axis=-1)
        x = np.concatenate([s, s - d[..., ::-1]], axis=-1)
        m = n - 1
        powers = np.arange(m - 1, -1, -1)
        with np.errstate(divide="ignore"):
            log_jac = m * math.log(2 * math.pi) + (powers[:-1] * np.log(v[..., :-1])).sum(axis=-1)
        return x, log_jac


@dataclass(frozen=True)
class QuadResult:
    value: float
    est_error: float
    nodes_used: int


def rule_1d(domain: Domain, nodes: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for parameter ``dim``."""
    lo, hi, periodic = domain.param_bounds(dim)
    if periodic:
        x = lo + (hi - lo) * np.arange(nodes) / nodes
        return x, np.full(nodes, (hi - lo) / nodes)
    t, w = leggauss(nodes)
    half = (hi - lo) / 2
    return lo + half * (t + 1), half * w


def _grid_chunks(domain: Domain, nodes: int, chunk: int) -> Iterable[tuple[np.ndarray, np.ndarray]]:
    """``(points, log weights)`` in a fixed lexicographic order."""
    rules = [rule_1d(domain, nodes, d) for d in range(domain.rank)]
    ts = np.stack([r[0] for r in rules])
    log_ws = np.stack([np.log(r[1]) for r in rules])
    total = nodes**domain.rank
    dims = np.arange(domain.rank)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.stack(np.unravel_index(flat, (nodes,) * domain.rank), axis=-1)
        x, log_jac = domain.to_coords(ts[dims, idx])
        yield x, log_ws[dims, idx].sum(axis=-1) + log_jac


def _check(domain: Domain, nodes: int):
    if nodes < 2:
        raise ValueError("nodes_per_dim must be >= 2")
    if domain.rank > MAX_RANK:
        raise ValueError(f"tensor grids are limited to rank <= {MAX_RANK}; use Monte Carlo")


def _integrate(domain: Domain, nodes: int, f: Callable, chunk: int) -> float:
    total = 0.0
    for pts, lw in _grid_chunks(domain, nodes, chunk):
        total += float(np.sum(np.asarray(f(pts), dtype=float) * np.exp(lw)))
    return total


def tensor_quad(domain: Domain, nodes_per_dim: int, f: Callable, chunk: int = CHUNK) -> QuadResult:
    """Integrate ``f`` (vectorized over rows of an ``(N, rank)`` array) over ``domain``."""
    _check(domain, nodes_per_dim)
    value = _integrate(domain, nodes_per_dim, f, chunk)
    coarse = _integrate(domain, max(nodes_per_dim // 2, 1), f, chunk)
    return QuadResult(value, abs(value - coarse), nodes_per_dim**domain.rank)


def _ratio(domain, nodes, log_density, observable, chunk) -> tuple[float, float]:
    logs, vals = [], []
    for pts, lw in _grid_chunks(domain, nodes, chunk):
        ld = np.asarray(log_density(pts), dtype=float) + lw
        logs.append(ld)
        vals.append(np.asarray(observable(pts), dtype=float))
    ld = np.concatenate(logs)
    vals = np.concatenate(vals)
    if np.any(np.isnan(ld)):
        raise ValueError("log density returned NaN")
    top = np.max(ld)
    if not np.isfinite(top):
        raise ValueError("density vanishes on the whole grid")
    w = np.exp(ld - top)
    den = float(np.sum(w))
    num = float(np.sum(w * np.where(w > 0, vals, 0.0)))
    return num / den, top


def _tail_check(domain: Domain, nodes: int, log_density: Callable, top: float):
    if not any(any(domain.truncated_faces(d)) for d in range(domain.rank)):
        return
    rules = [rule_1d(domain, nodes, d)[0] for d in range(domain.rank)]
    worst = -np.inf
    for d in range(domain.rank):
        lo, hi, _ = domain.param_bounds(d)
        for face, flag in zip((lo, hi), domain.truncated_faces(d)):
            if not flag:
                continue
            axes = [r if k != d else np.array([face]) for k, r in enumerate(rules)]
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.rank)
            x, _ = domain.to_coords(pts)
            worst = max(worst, float(np.max(log_density(x))))
    if worst - top > math.log(TAIL_RATIO):
        warnings.warn(
            "density on a truncated face exceeds 1e-12 of its maximum; widen the box",
            RuntimeWarning,
            stacklevel=3,
        )


def normalized_expectation(
    log_density: Callable,
    observable: Callable,
    domain: Domain,
    nodes_per_dim: int,
    chunk: int = CHUNK,
) -> QuadResult:
    """``int f e^{log_density} / int e^{log_density}`` on ``domain``."""
    _check(domain, nodes_per_dim)
    value, top = _ratio(domain, nodes_per_dim, log_density, observable, chunk)
    coarse, _ = _ratio(domain, max(nodes_per_dim // 2, 2), log_density, observable, chunk)
    _tail_check(domain, nodes_per_dim, log_density, top)
    return QuadResult(value, abs(value - coarse), nodes_per_dim**domain.rank)


def mc_mean(values) -> tuple[float, float]:
    """Sample mean and standard error ``std / sqrt(N)``."""
    v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float).ravel()
    if v.size < 2:
        raise ValueError("need at least two values")
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(v.size))
