"""Joint eigenvalue densities in log space.

Every ``log_J_*`` function accepts coordinates of shape ``(..., rank)`` and
returns an array of shape ``(...)`` (a Python float for 1-d input).  Vanishing
densities are reported as ``-inf``; nothing is normalized.

Two families of evaluators exist side by side: generic root-product engines
driven by a :class:`~genrmt.roots.RootDatum`, and the specialized closed forms.
They are implemented independently so that each can serve as an oracle for the
other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .roots import (
    COMPACT_GROUPS,
    COMPLEX_GROUPS,
    RootDatum,
    VALID_BETAS,
    build_complex_roots,
    build_group_roots,
    build_restricted_roots,
)

LOG2 = math.log(2.0)
TWO_PI = 2.0 * math.pi

#: tolerance for the SL torus and sl trace constraints
CONSTRAINT_TOL = 1e-9

KINDS = (
    "linear",
    "nonlinear_noncompact",
    "compact",
    "sym_space_noncompact_delta",
    "sym_space_compact_delta",
    "group_compact",
    "algebra_compact",
    "group_complex",
    "algebra_complex",
    "pseudo_algebra_gl",
    "pseudo_group_gl",
    "sl2r_alg1",
    "sl2r_alg2",
    "sl2r_grp1",
    "sl2r_grp2",
)

SL2R_KINDS = ("sl2r_alg1", "sl2r_alg2", "sl2r_grp1", "sl2r_grp2")
_FAMILY_KINDS = (
    "linear",
    "nonlinear_noncompact",
    "compact",
    "sym_space_noncompact_delta",
    "sym_space_compact_delta",
)

#: coordinate chart of each kind
CHARTS = {
    "linear": "linear",
    "nonlinear_noncompact": "log",
    "compact": "angle",
    "sym_space_noncompact_delta": "log",
    "sym_space_compact_delta": "angle",
    "group_compact": "angle",
    "algebra_compact": "linear",
    "group_complex": "complex",
    "algebra_complex": "complex",
    "pseudo_algebra_gl": "linear",
    "pseudo_group_gl": "linear",
    "sl2r_alg1": "linear",
    "sl2r_alg2": "linear",
    "sl2r_grp1": "linear",
    "sl2r_grp2": "angle",
}


# ---------------------------------------------------------------------------
# small helpers


def _as_points(x, dtype=float) -> np.ndarray:
    x = np.asarray(x, dtype=dtype)
    if x.ndim == 0:
        x = x[None]
    return x


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def _check_rank(x: np.ndarray, rank: int):
    if x.shape[-1] != rank:
        raise ValueError(f"point has {x.shape[-1]} coordinates, expected {rank}")


def _log_abs(v) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(v))


def _xlog(exponent: float, v) -> np.ndarray:
    """``exponent * log|v|`` with the convention ``0 * log 0 = 0``."""
    if exponent == 0:
        return np.zeros(np.shape(v))
    return exponent * _log_abs(v)


def _pairs(n: int):
    r, s = np.triu_indices(n, k=1)
    return r, s


def _check_beta(beta):
    if beta not in VALID_BETAS:
        raise ValueError(f"beta must be one of {VALID_BETAS}, got {beta!r}")


def _check_mn(m, n):
    if n < 1 or m < n:
        raise ValueError(f"need m >= n >= 1, got m={m}, n={n}")


# ---------------------------------------------------------------------------
# envelopes


@dataclass(frozen=True)
class Envelope:
    kind: str = "uniform"
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian_trace", "gaussian_hs"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.kind != "uniform" and not self.a > 0:
            raise ValueError("Gaussian envelopes need a > 0")
        if self.kind == "gaussian_hs" and (self.b != 0 or self.c != 0):
            raise ValueError("gaussian_hs takes only the parameter a")

    @classmethod
    def uniform(cls) -> "Envelope":
        return cls("uniform")

    @classmethod
    def gaussian_trace(cls, a: float, b: float = 0.0, c: float = 0.0) -> "Envelope":
        return cls("gaussian_trace", float(a), float(b), float(c))

    @classmethod
    def gaussian_hs(cls, a: float) -> "Envelope":
        return cls("gaussian_hs", float(a))


def log_envelope(env: Envelope, x):
    """log p at eigenvalue coordinates ``x``."""
    x = _as_points(x, dtype=np.result_type(np.asarray(x), float))
    if env.kind == "uniform":
        return _out(np.zeros(x.shape[:-1]))
    sq = np.sum(np.abs(x) ** 2, axis=-1)
    if env.kind == "gaussian_hs":
        return _out(-env.a * sq)
    return _out(-env.a * sq + env.b * np.sum(x.real, axis=-1) + env.c)


# ---------------------------------------------------------------------------
# generic engines over a RootDatum


def _roots_at(datum: RootDatum, x: np.ndarray) -> np.ndarray:
    _check_rank(x, datum.rank)
    return x @ datum.coeff_matrix.T


def log_J_linear(datum: RootDatum, x):
    """``sum beta_l log|l(x)|`` over the stored positive roots."""
    x = _as_points(x)
    lam = _roots_at(datum, x)
    return _out(_log_abs(lam) @ datum.multiplicities)


def log_J_nonlinear(datum: RootDatum, x):
    """``dim_l log 2 + sum beta_l (log|sinh(l/2)| + log cosh(l) / 2)``; ``x = log a``."""
    x = _as_points(x)
    lam = _roots_at(datum, x)
    log_cosh = np.logaddexp(lam, -lam) - LOG2
    terms = _log_abs(np.sinh(lam / 2)) + 0.5 * log_cosh
    return _out(datum.dim_l * LOG2 + terms @ datum.multiplicities)


def _centered(v: np.ndarray, period: float) -> np.ndarray:
    """Representative of ``v`` mod ``period`` near zero.

    Values already inside the half-period window are kept as they are, so tiny
    angles of either sign keep full relative precision; exact lattice points
    reduce to 0.
    """
    r = np.remainder(v, period)
    r = np.where(r > period / 2, r - period, r)
    return np.where(np.abs(v) <= period / 2, v, r)


def log_J_compact(datum: RootDatum, x):
    """``dim_l log 2 + sum beta_l log|sin(l/2)|`` on angle coordinates."""
    x = _as_points(x)
    lam = _centered(_roots_at(datum, x), TWO_PI)
    return _out(datum.dim_l * LOG2 + _log_abs(np.sin(lam / 2)) @ datum.multiplicities)


def log_delta_noncompact(datum: RootDatum, x):
    x = _as_points(x)
    lam = _roots_at(datum, x)
    return _out(_log_abs(np.sinh(lam)) @ datum.multiplicities)


def log_delta_compact(datum: RootDatum, x):
    x = _as_points(x)
    lam = _centered(_roots_at(datum, x), math.pi)
    return _out(_log_abs(np.sin(lam)) @ datum.multiplicities)


def _log_abs_one_minus_char(theta: np.ndarray) -> np.ndarray:
    # |1 - exp(-i theta)| with theta reduced so that exact lattice points give 0
    theta = _centered(theta, TWO_PI)
    return _log_abs(np.expm1(-1j * theta))


def log_J_group_compact(group: str, x, datum: Optional[RootDatum] = None):
    """Character engine ``sum over Delta of log|1 - exp(-i alpha(x))|``."""
    x = _as_points(x)
    datum = datum or build_group_roots(group, x.shape[-1])
    alpha = _roots_at(datum, x)
    # alpha and -alpha contribute the same modulus
    return _out(2.0 * _log_abs_one_minus_char(alpha).sum(axis=-1))


def log_J_algebra_compact(group: str, x, datum: Optional[RootDatum] = None):
    """``sum over Delta of log|alpha(x)|`` (``x`` are the imaginary parts of the eigenvalues)."""
    x = _as_points(x)
    datum = datum or build_group_roots(group, x.shape[-1])
    alpha = _roots_at(datum, x)
    return _out(2.0 * _log_abs(alpha).sum(axis=-1))


def _character_coords(group: str, h: np.ndarray) -> np.ndarray:
    if group in ("sl", "sp"):
        return h
    # orthogonal groups: h_r is the cosine coordinate (w + 1/w) / 2
    return h + 1j * np.sqrt(1 - h * h)


def _check_complex_group(group: str, h: np.ndarray):
    if group not in COMPLEX_GROUPS:
        raise ValueError(f"unknown complex group {group!r}")
    if group == "sl":
        dev = np.abs(np.prod(h, axis=-1) - 1)
        if np.any(dev > CONSTRAINT_TOL):
            raise ValueError(f"SL torus constraint violated: |prod h - 1| = {np.max(dev):.3g}")
    if group == "sp" and np.any(h == 0):
        raise ValueError("Sp(n, C) torus coordinates must be nonzero")


def log_J_group_complex(group: str, h):
    """Character engine ``sum over Delta of 2 log|1 - theta_alpha(h^-1)|``."""
    h = _as_points(h, dtype=complex)
    _check_complex_group(group, h)
    datum = build_complex_roots(group, h.shape[-1])
    w = _character_coords(group, h)
    log_w = np.log(w)
    theta = log_w @ datum.coeff_matrix.T
    # log|1 - e^{-theta}| + log|1 - e^{theta}|, each counted with exponent 2
    val = _log_abs(np.expm1(-theta)) + _log_abs(np.expm1(theta))
    return _out(2.0 * val.sum(axis=-1))


def log_J_algebra_complex(group: str, z):
    """``sum over Delta of 2 log|alpha(z)|`` with complex root evaluation."""
    z = _as_points(z, dtype=complex)
    if group not in COMPLEX_GROUPS:
        raise ValueError(f"unknown complex group {group!r}")
    if group == "sl":
        dev = np.abs(z.sum(axis=-1))
        if np.any(dev > CONSTRAINT_TOL):
            raise ValueError(f"sl trace constraint violated: |sum z| = {np.max(dev):.3g}")
    datum = build_complex_roots(group, z.shape[-1])
    alpha = z @ datum.coeff_matrix.T
    return _out(4.0 * _log_abs(alpha).sum(axis=-1))


# ---------------------------------------------------------------------------
# closed forms


def _log_pair_prod(f, v: np.ndarray) -> np.ndarray:
    r, s = _pairs(v.shape[-1])
    if r.size == 0:
        return np.zeros(v.shape[:-1])
    return f(v[..., r], v[..., s]).sum(axis=-1)


def log_J_vandermonde(beta: float, x):
    """``prod_{r<s} |x_r - x_s|^beta``."""
    x = _as_points(x, dtype=np.result_type(np.asarray(x), float))
    return _out(_log_pair_prod(lambda u, v: beta * _log_abs(u - v), x))


def log_J_linear_indefinite(m: int, n: int, beta: int, x):
    """``2^{(b-1)n} prod|x_r^2 - x_s^2|^b prod|x_r|^{b(m-n+1)-1}``."""
    _check_beta(beta)
    _check_mn(m, n)
    x = _as_points(x)
    _check_rank(x, n)
    val = (beta - 1) * n * LOG2
    val = val + _log_pair_prod(lambda u, v: beta * _log_abs(u * u - v * v), x)
    val = val + _xlog(beta * (m - n + 1) - 1, x).sum(axis=-1)
    return _out(val)


def log_J_new_transfer_dualform(n: int, beta: int, a):
    """``2^{-b n(n-1)/4} prod|a_r - a_s|^b (a_r^-2 + a_s^-2)^{b/2}``, ``a > 0``."""
    _check_beta(beta)
    a = _as_points(a)
    _check_rank(a, n)
    if np.any(a <= 0):
        raise ValueError("new-transfer coordinates must be positive")
    val = -beta * n * (n - 1) / 4 * LOG2
    val = val + _log_pair_prod(
        lambda u, v: beta * _log_abs(u - v) + beta / 2 * np.log(u**-2 + v**-2), a
    )
    return _out(val)


def log_J_nonlinear_indefinite_dualform(m: int, n: int, beta: int, a):
    """Dual form in ``a_r = cosh x_r >= 1``."""
    _check_beta(beta)
    _check_mn(m, n)
    a = _as_points(a)
    _check_rank(a, n)
    if np.any(a < 1):
        raise ValueError("coordinates must satisfy a_r >= 1")
    val = n * (beta * (m + 1) - 2) / 2 * LOG2
    val = val + _log_pair_prod(
        lambda u, v: beta * _log_abs(u - v) + beta / 2 * np.log(u * u + v * v - 1), a
    )
    single = _xlog((beta - 1) / 2, (a * a - 1) * (2 * a * a - 1))
    single = single + _xlog(beta * (m - n) / 2, a * (a - 1))
    return _out(val + single.sum(axis=-1))


def log_J_circular_dualform(n: int, beta: float, x):
    """``prod|e^{ix_r} - e^{ix_s}|^b``."""
    x = _as_points(x)
    _check_rank(x, n)
    t = np.exp(1j * x)
    return _out(_log_pair_prod(lambda u, v: beta * _log_abs(u - v), t))


def log_J_jacobi(m: int, n: int, beta: int, a):
    """Dual form of the compact BC density in ``a_r = cos x_r``."""
    _check_beta(beta)
    _check_mn(m, n)
    a = _as_points(a)
    _check_rank(a, n)
    if np.any(np.abs(a) > 1):
        raise ValueError("Jacobi coordinates must lie in [-1, 1]")
    val = n * (beta * (m + 1) - 2) / 2 * LOG2
    val = val + _log_pair_prod(lambda u, v: beta * _log_abs(u - v), a)
    single = _xlog((beta - 1) / 2, 1 + a) + _xlog((beta * (m - n + 1) - 1) / 2, 1 - a)
    return _out(val + single.sum(axis=-1))


def log_J_group_compact_closed(group: str, x):
    """Closed forms for U(n), SO(2n+1), Sp(n), SO(2n) in angle coordinates."""
    x = _as_points(x)
    n = x.shape[-1]
    if group == "u":
        t = np.exp(1j * x)
        return _out(_log_pair_prod(lambda u, v: 2 * _log_abs(u - v), t))
    if group == "sp":
        t = np.exp(1j * x)
        val = _log_pair_prod(lambda u, v: 2 * _log_abs(u - v) + 2 * _log_abs(1 - u * v), t)
        return _out(val + 2 * _log_abs(1 - t * t).sum(axis=-1))
    t = np.cos(x)
    pair = _log_pair_prod(lambda u, v: 2 * _log_abs(u - v), t)
    if group == "so_odd":
        # 1 - cos x computed as 2 sin^2(x/2) to avoid cancellation
        single = _log_abs(2 * np.sin(x / 2) ** 2).sum(axis=-1)
        return _out(n * n * LOG2 + pair + single)
    if group == "so_even":
        return _out(n * (n - 1) * LOG2 + pair)
    raise ValueError(f"unknown compact group {group!r}")


def log_J_algebra_compact_closed(group: str, x):
    x = _as_points(x)
    n = x.shape[-1]
    if group == "u":
        return _out(_log_pair_prod(lambda u, v: 2 * _log_abs(u - v), x))
    if group not in COMPACT_GROUPS:
        raise ValueError(f"unknown compact group {group!r}")
    val = _log_pair_prod(lambda u, v: 2 * _log_abs(u * u - v * v), x)
    if group in ("so_odd", "sp"):
        val = val + 2 * _log_abs(x).sum(axis=-1)
    if group == "sp":
        val = val + 2 * n * LOG2
    return _out(val)


def log_J_group_complex_closed(group: str, h):
    h = _as_points(h, dtype=complex)
    _check_complex_group(group, h)
    n = h.shape[-1]
    pair4 = _log_pair_prod(lambda u, v: 4 * _log_abs(u - v), h)
    if group == "sl":
        return _out(pair4)
    if group == "so_even":
        return _out(2 * n * (n - 1) * LOG2 + pair4)
    if group == "so_odd":
        return _out(2 * n * n * LOG2 + pair4 + 2 * _log_abs(1 - h).sum(axis=-1))
    # Sp(n, C): the |h_r| exponent is -4n; log_J_sp_complex_printed keeps the other one
    val = pair4 + _log_pair_prod(lambda u, v: 4 * _log_abs(1 - u * v), h)
    val = val + (4 * _log_abs(1 - h * h) - 4 * n * _log_abs(h)).sum(axis=-1)
    return _out(val)


def log_J_sp_complex_printed(h):
    """Sp(n, C) closed form with the ``|h_r|^{-2n(n+1)}`` exponent as printed.

    Agrees with the character engine only for ``n = 1``; kept for comparison.
    """
    h = _as_points(h, dtype=complex)
    _check_complex_group("sp", h)
    n = h.shape[-1]
    val = _log_pair_prod(lambda u, v: 4 * _log_abs(u - v) + 4 * _log_abs(1 - u * v), h)
    val = val + (4 * _log_abs(1 - h * h) - 2 * n * (n + 1) * _log_abs(h)).sum(axis=-1)
    return _out(val)


def log_J_algebra_complex_closed(group: str, z):
    z = _as_points(z, dtype=complex)
    if group not in COMPLEX_GROUPS:
        raise ValueError(f"unknown complex group {group!r}")
    if group == "sl":
        if np.any(np.abs(z.sum(axis=-1)) > CONSTRAINT_TOL):
            raise ValueError("sl trace constraint violated")
        return _out(_log_pair_prod(lambda u, v: 4 * _log_abs(u - v), z))
    n = z.shape[-1]
    val = _log_pair_prod(lambda u, v: 4 * _log_abs(u * u - v * v), z)
    if group in ("so_odd", "sp"):
        val = val + 4 * _log_abs(z).sum(axis=-1)
    if group == "sp":
        val = val + 4 * n * LOG2
    return _out(val)


# ---------------------------------------------------------------------------
# pseudo ensembles of GL(n, R)


def _check_j(n: int, j: int):
    if not 0 <= j <= n // 2:
        raise ValueError(f"need 0 <= j <= {n // 2}, got j={j}")


def _gl_pair_terms(n: int, j: int, x: np.ndarray) -> np.ndarray:
    """log of ``prod_{r<s}|y_r - y_s|^2`` written out in the real coordinates."""
    re = x[..., :j]
    im = x[..., j : 2 * j]
    real = x[..., 2 * j :]
    val = np.zeros(x.shape[:-1])
    if j:
        val = val + j * math.log(4.0) + 2 * _log_abs(im).sum(axis=-1)
    val = val + _log_pair_prod(lambda u, v: 2 * _log_abs(u - v), real)
    if j and n > 2 * j:
        dx = re[..., :, None] - real[..., None, :]
        val = val + (2 * _log_abs(dx**2 + im[..., :, None] ** 2)).sum(axis=(-2, -1))
    if j > 1:
        r, s = _pairs(j)
        dx2 = (re[..., r] - re[..., s]) ** 2
        minus = dx2 + (im[..., r] - im[..., s]) ** 2
        plus = dx2 + (im[..., r] + im[..., s]) ** 2
        val = val + (2 * _log_abs(minus) + 2 * _log_abs(plus)).sum(axis=-1)
    return val


def log_J_pseudo_algebra_gl(n: int, j: int, x):
    """Closed form for the j-th Cartan class of ``gl(n, R)``."""
    _check_j(n, j)
    x = _as_points(x)
    _check_rank(x, n)
    with np.errstate(divide="ignore"):
        return _out(_gl_pair_terms(n, j, x))


def log_J_pseudo_group_gl(n: int, j: int, h):
    """Closed form for the j-th Cartan subgroup class of ``GL(n, R)``."""
    _check_j(n, j)
    h = _as_points(h)
    _check_rank(h, n)
    mod2 = h[..., :j] ** 2 + h[..., j : 2 * j] ** 2
    det = np.prod(mod2, axis=-1) * np.prod(h[..., 2 * j :], axis=-1)
    if np.any(det == 0):
        raise ValueError("point is not in a Cartan subgroup (zero determinant)")
    with np.errstate(divide="ignore"):
        val = _gl_pair_terms(n, j, h)
    val = val - (n - 1) * (np.log(mod2).sum(axis=-1) + _log_abs(h[..., 2 * j :]).sum(axis=-1))
    return _out(val)


def pseudo_gl_eigenvalues(n: int, j: int, x) -> np.ndarray:
    """The complex eigenvalues ``y`` of ``D_j(x)``: ``x_r +- i x_{j+r}`` and the real tail."""
    _check_j(n, j)
    x = _as_points(x)
    re, im, real = x[..., :j], x[..., j : 2 * j], x[..., 2 * j :]
    return np.concatenate([re + 1j * im, re - 1j * im, real + 0j], axis=-1)


def log_J_pseudo_algebra_gl_engine(n: int, j: int, x):
    """``prod_{r<s}|y_r - y_s|^2`` over the complex eigenvalues."""
    y = pseudo_gl_eigenvalues(n, j, x)
    return _out(_log_pair_prod(lambda u, v: 2 * _log_abs(u - v), y))


def log_J_pseudo_group_gl_engine(n: int, j: int, h):
    """``prod_{r<s}|l_r - l_s|^2 / |l_r l_s|`` over the complex eigenvalues."""
    l = pseudo_gl_eigenvalues(n, j, h)
    if np.any(l == 0):
        raise ValueError("point is not in a Cartan subgroup (zero determinant)")
    return _out(
        _log_pair_prod(lambda u, v: 2 * _log_abs(u - v) - _log_abs(u) - _log_abs(v), l)
    )


# ---------------------------------------------------------------------------
# SL(2, R)


def log_J_sl2r(kind: str, coord):
    """Scalar closed forms: alg1 ``4x^2``, alg2 ``4y^2``, grp1 ``(a - 1/a)^2``, grp2 ``4 sin^2 y``."""
    c = np.asarray(coord, dtype=float)
    if c.ndim and c.shape[-1] == 1:
        c = c[..., 0]
    if kind in ("sl2r_alg1", "alg1", "sl2r_alg2", "alg2"):
        val = 2 * _log_abs(c) + 2 * LOG2
    elif kind in ("sl2r_grp1", "grp1"):
        if np.any(c == 0):
            raise ValueError("grp1 coordinate must be nonzero")
        val = 2 * _log_abs(c - 1 / c)
    elif kind in ("sl2r_grp2", "grp2"):
        val = 2 * _log_abs(np.sin(c)) + 2 * LOG2
    else:
        raise ValueError(f"unknown SL(2,R) form {kind!r}")
    return _out(val)


def sl2r_direct(kind: str, coord):
    """Direct (non-log) evaluation of the SL(2,R) forms."""
    c = np.asarray(coord, dtype=float)
    kind = kind.removeprefix("sl2r_")
    if kind in ("alg1", "alg2"):
        return 4 * c * c
    if kind == "grp1":
        return (c - 1 / c) ** 2
    if kind == "grp2":
        return 4 * np.sin(c) ** 2
    raise ValueError(f"unknown SL(2,R) form {kind!r}")


# ---------------------------------------------------------------------------
# ensemble specifications


@dataclass(frozen=True)
class EnsembleParams:
    n: Optional[int] = None
    m: Optional[int] = None
    beta: Optional[int] = None
    j: Optional[int] = None
    family: Optional[str] = None  # "gl" or "indefinite"
    group: Optional[str] = None  # compact or complex group tag


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    datum: Optional[RootDatum]
    params: EnsembleParams
    envelope: Envelope = field(default_factory=Envelope.uniform)

    @property
    def rank(self) -> int:
        if self.kind in SL2R_KINDS:
            return 1
        return self.params.n

    @property
    def chart(self) -> str:
        return CHARTS[self.kind]

    @property
    def family_tag(self) -> str:
        """Root family used for folding."""
        return self.datum.family.value if self.datum is not None else "A"


def make_spec(
    kind: str,
    *,
    n: Optional[int] = None,
    m: Optional[int] = None,
    beta: Optional[int] = None,
    j: Optional[int] = None,
    family: Optional[str] = None,
    group: Optional[str] = None,
    envelope: Optional[Envelope] = None,
) -> EnsembleSpec:
    """Validate parameters for ``kind`` and attach the matching root datum."""
    if kind not in KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    envelope = envelope or Envelope.uniform()
    datum = None
    if kind in _FAMILY_KINDS:
        if family not in ("gl", "indefinite"):
            raise ValueError(f"{kind} needs family 'gl' or 'indefinite'")
        if n is None or beta is None:
            raise ValueError(f"{kind} needs n and beta")
        if family == "indefinite" and m is None:
            raise ValueError(f"{kind} with the indefinite family needs m")
        datum = build_restricted_roots(family, n, m if family == "indefinite" else None, beta)
        params = EnsembleParams(n=n, m=m if family == "indefinite" else None, beta=beta, family=family)
    elif kind in ("group_compact", "algebra_compact"):
        if group not in COMPACT_GROUPS or n is None:
            raise ValueError(f"{kind} needs n and group in {sorted(COMPACT_GROUPS)}")
        datum = build_group_roots(group, n)
        params = EnsembleParams(n=n, group=group)
    elif kind in ("group_complex", "algebra_complex"):
        if group not in COMPLEX_GROUPS or n is None:
            raise ValueError(f"{kind} needs n and group in {sorted(COMPLEX_GROUPS)}")
        datum = build_complex_roots(group, n)
        params = EnsembleParams(n=n, group=group)
    elif kind in ("pseudo_algebra_gl", "pseudo_group_gl"):
        if n is None or j is None:
            raise ValueError(f"{kind} needs n and j")
        if n < 1:
            raise ValueError("n must be >= 1")
        _check_j(n, j)
        params = EnsembleParams(n=n, j=j)
    else:
        params = EnsembleParams(n=1)
    return EnsembleSpec(kind, datum, params, envelope)


def log_J(spec: EnsembleSpec, x, form: str = "engine"):
    """Density factor for ``spec`` at ``x``; ``form="closed"`` uses the specialized closed form.

    For the closed forms of the nonlinear and compact indefinite families and
    of the nonlinear gl family the coordinates are the dual ones
    (``a = cosh x``, ``a = cos x`` and ``a = e^x`` respectively).
    """
    kind, p, d = spec.kind, spec.params, spec.datum
    if form not in ("engine", "closed"):
        raise ValueError("form must be 'engine' or 'closed'")
    closed = form == "closed"
    if kind == "linear":
        if not closed:
            return log_J_linear(d, x)
        if p.family == "gl":
            return log_J_vandermonde(p.beta, x)
        return log_J_linear_indefinite(p.m, p.n, p.beta, x)
    if kind == "nonlinear_noncompact":
        if not closed:
            return log_J_nonlinear(d, x)
        if p.family == "gl":
            return log_J_new_transfer_dualform(p.n, p.beta, x)
        return log_J_nonlinear_indefinite_dualform(p.m, p.n, p.beta, x)
    if kind == "compact":
        if not closed:
            return log_J_compact(d, x)
        if p.family == "gl":
            return log_J_circular_dualform(p.n, p.beta, x)
        return log_J_jacobi(p.m, p.n, p.beta, x)
    if kind == "sym_space_noncompact_delta":
        return log_delta_noncompact(d, x)
    if kind == "sym_space_compact_delta":
        return log_delta_compact(d, x)
    if kind == "group_compact":
        return log_J_group_compact_closed(p.group, x) if closed else log_J_group_compact(p.group, x, d)
    if kind == "algebra_compact":
        return log_J_algebra_compact_closed(p.group, x) if closed else log_J_algebra_compact(p.group, x, d)
    if kind == "group_complex":
        return log_J_group_complex_closed(p.group, x) if closed else log_J_group_complex(p.group, x)
    if kind == "algebra_complex":
        return log_J_algebra_complex_closed(p.group, x) if closed else log_J_algebra_complex(p.group, x)
    if kind == "pseudo_algebra_gl":
        fn = log_J_pseudo_algebra_gl if closed else log_J_pseudo_algebra_gl_engine
        return fn(p.n, p.j, x)
    if kind == "pseudo_group_gl":
        fn = log_J_pseudo_group_gl if closed else log_J_pseudo_group_gl_engine
        return fn(p.n, p.j, x)
    return log_J_sl2r(kind, x)


def log_density(spec: EnsembleSpec, x, form: str = "engine"):
    """``(log J, log p)`` at ``x``."""
    lj = log_J(spec, x, form)
    lp = log_envelope(spec.envelope, _as_points(x, dtype=np.result_type(np.asarray(x), float)))
    return lj, lp
