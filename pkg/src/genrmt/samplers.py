"""Matrix-level samplers.

Every sampler takes a ``numpy.random.Generator`` and an optional ``size``
(number of independent draws) and returns a :class:`MatrixSample` whose
``data`` has shape ``(size, rows, cols)``, or ``(rows, cols)`` when ``size`` is
``None``.  Quaternion matrices live in their ``2n x 2n`` complex embedding
``[[A, B], [-conj(B), conj(A)]]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .densities import Envelope

STRUCTURES = (
    "real_symmetric",
    "hermitian",
    "quaternion_selfdual_embedded",
    "unitary",
    "orthogonal",
    "symplectic_embedded",
    "rect_block",
    "symspace_point",
    "algebra",
)

STRUCTURE_TOL = 1e-10


@dataclass(frozen=True)
class MatrixSample:
    data: np.ndarray
    structure: str
    beta: int
    group: Optional[str] = None  # for algebra and symspace samples
    m: Optional[int] = None
    n: Optional[int] = None

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.data.ndim < 2:
            raise ValueError("sample data must be at least 2-d")

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[-2:]

    @property
    def batched(self) -> bool:
        return self.data.ndim > 2


def _check_beta(beta):
    if beta not in (1, 2, 4):
        raise ValueError(f"beta must be 1, 2 or 4, got {beta!r}")


def _shape(size, *tail):
    return tail if size is None else (size, *tail)


def _dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def _T(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2)


def symplectic_form(n: int) -> np.ndarray:
    """``J = [[0, I], [-I, 0]]`` of size ``2n``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def quaternion_embed(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Embed the quaternion matrix ``a + b j`` (``a``, ``b`` complex) as ``2r x 2c`` complex."""
    top = np.concatenate([a, b], axis=-1)
    bottom = np.concatenate([-np.conj(b), np.conj(a)], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def quaternion_real_residual(m: np.ndarray) -> float:
    """max |J conj(M) J^-1 - M| (zero for embedded quaternion matrices)."""
    r, c = m.shape[-2] // 2, m.shape[-1] // 2
    jr, jc = symplectic_form(r), symplectic_form(c)
    return float(np.max(np.abs(jr @ np.conj(m) @ jc.T - m), initial=0.0))


def ginibre(kind: str, rows: int, cols: int, rng: np.random.Generator, size=None) -> MatrixSample:
    """i.i.d. standard normal entries; complex entries have E|z|^2 = 1."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    shape = _shape(size, rows, cols)
    if kind == "real":
        return MatrixSample(rng.standard_normal(shape), "rect_block", 1)
    if kind == "complex":
        z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return MatrixSample(z * np.sqrt(0.5), "rect_block", 2)
    if kind == "quaternion":
        s = np.sqrt(0.5)
        a = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * s
        b = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * s
        return MatrixSample(quaternion_embed(a, b), "rect_block", 4)
    raise ValueError(f"unknown Ginibre kind {kind!r}")


def _complex_normal(rng, shape, sigma):
    return sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _hermitian_part(g: np.ndarray) -> np.ndarray:
    return (g + _dag(g)) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Gaussian and chiral ensembles


def sample_gaussian(beta: int, n: int, env: Envelope, rng: np.random.Generator, size=None) -> MatrixSample:
    """GOE/GUE/GSE with matrix density proportional to exp(-a tr X^2 + b tr X).

    Diagonal entries have variance 1/(2a) and mean b/(2a); every independent
    real component of an off-diagonal entry has variance 1/(4a).  For beta=4
    the trace is the quaternion trace (half the trace of the embedding).
    """
    _check_beta(beta)
    if env.kind != "gaussian_trace":
        raise ValueError("Gaussian ensembles need a gaussian_trace envelope")
    if n < 1:
        raise ValueError("n must be >= 1")
    sigma = np.sqrt(1.0 / (4.0 * env.a))
    mean = env.b / (2.0 * env.a)
    shape = _shape(size, n, n)
    if beta == 1:
        x = _hermitian_part(sigma * rng.standard_normal(shape))
        structure = "real_symmetric"
    elif beta == 2:
        x = _hermitian_part(_complex_normal(rng, shape, sigma))
        structure = "hermitian"
    else:
        a = _hermitian_part(_complex_normal(rng, shape, sigma))
        g = _complex_normal(rng, shape, sigma)
        b = (g - _T(g)) / np.sqrt(2.0)
        x = quaternion_embed(a, b)
        structure = "quaternion_selfdual_embedded"
    if mean:
        x = x + mean * np.eye(x.shape[-1])
    return MatrixSample(x, structure, beta)


def sample_chiral(beta: int, m: int, n: int, env: Envelope, rng: np.random.Generator, size=None) -> MatrixSample:
    """Rectangular block ``B`` (m x n) with density proportional to exp(-a tr B B*).

    Each real component of each entry has variance 1/(2a).
    """
    _check_beta(beta)
    if env.kind != "gaussian_hs":
        raise ValueError("chiral ensembles need a gaussian_hs envelope")
    if n < 1 or m < n:
        raise ValueError(f"need m >= n >= 1, got m={m}, n={n}")
    sigma = np.sqrt(1.0 / (2.0 * env.a))
    shape = _shape(size, m, n)
    if beta == 1:
        data = sigma * rng.standard_normal(shape)
    elif beta == 2:
        data = _complex_normal(rng, shape, sigma)
    else:
        data = quaternion_embed(_complex_normal(rng, shape, sigma), _complex_normal(rng, shape, sigma))
    return MatrixSample(data, "rect_block", beta, m=m, n=n)


# ---------------------------------------------------------------------------
# Haar measure and circular ensembles


def _qr_haar(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return q * phase[..., None, :]


def _quaternion_gram_schmidt(z: np.ndarray) -> np.ndarray:
    """Orthonormalize quaternion columns of an embedded ``2n x 2n`` matrix."""
    n = z.shape[-1] // 2
    out = np.array(z, dtype=complex)
    done = []
    for k in range(n):
        cols = [k, n + k]
        v = out[..., :, cols]
        for u in done:
            v = v - u @ (_dag(u) @ v)
        # for a quaternion column V*V is |v|^2 times the 2x2 identity
        norm2 = np.real(np.einsum("...ij,...ij->...", np.conj(v), v)) / 2.0
        v = v / np.sqrt(norm2)[..., None, None]
        out[..., :, cols] = v
        done.append(v)
    return out


def sample_haar(group: str, n: int, rng: np.random.Generator, size=None) -> MatrixSample:
    """Haar element of U(n), O(n), SO(n) or Sp(n) (the latter embedded, 2n x 2n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if group == "unitary":
        z = ginibre("complex", n, n, rng, size).data
        return MatrixSample(_qr_haar(z), "unitary", 2)
    if group in ("orthogonal", "special_orthogonal"):
        z = ginibre("real", n, n, rng, size).data
        q = _qr_haar(z)
        if group == "special_orthogonal":
            det = np.linalg.det(q)
            flip = np.where(det < 0, -1.0, 1.0)
            q = q.copy()
            q[..., :, 0] *= flip[..., None]
        return MatrixSample(q, "orthogonal", 1)
    if group == "symplectic":
        z = ginibre("quaternion", n, n, rng, size).data
        return MatrixSample(_quaternion_gram_schmidt(z), "symplectic_embedded", 4)
    raise ValueError(f"unknown Haar group {group!r}")


def sample_circular(beta: int, n: int, rng: np.random.Generator, size=None) -> MatrixSample:
    """COE (U^T U), CUE (U) and CSE (U^R U with U^R = J U^T J^-1)."""
    _check_beta(beta)
    if beta == 2:
        return sample_haar("unitary", n, rng, size)
    if beta == 1:
        u = sample_haar("unitary", n, rng, size).data
        return MatrixSample(_T(u) @ u, "unitary", 1)
    u = sample_haar("unitary", 2 * n, rng, size).data
    j = symplectic_form(n)
    dual = j @ _T(u) @ j.T
    return MatrixSample(dual @ u, "unitary", 4)


# ---------------------------------------------------------------------------
# compact Lie algebras and symmetric spaces

ALGEBRA_GROUPS = ("u", "so", "sp")


def algebra_rank(group: str, n: int) -> int:
    return n // 2 if group == "so" else n


def sample_algebra_compact(group: str, n: int, env: Envelope, rng: np.random.Generator, size=None) -> MatrixSample:
    """Gaussian element of u(n), so(n) or sp(n) with density exp(-a tr X X*).

    The trace is normalized so that the eigenvalue coordinates ``x`` satisfy
    ``tr X X* = sum x_r^2``.  ``u(n)`` is ``i`` times a GUE draw with the same
    generator, so the two coincide exactly.
    """
    if env.kind not in ("gaussian_hs", "gaussian_trace"):
        raise ValueError("algebra ensembles need a Gaussian envelope")
    if n < 1:
        raise ValueError("n must be >= 1")
    a = env.a
    shape = _shape(size, n, n)
    if group == "u":
        h = sample_gaussian(2, n, Envelope.gaussian_trace(a), rng, size).data
        return MatrixSample(1j * h, "algebra", 2, group="u", n=n)
    if group == "so":
        g = np.sqrt(1.0 / (2.0 * a)) * rng.standard_normal(shape)
        x = np.triu(g, k=1)
        return MatrixSample(x - _T(x), "algebra", 1, group="so", n=n)
    if group == "sp":
        sigma = np.sqrt(1.0 / (4.0 * a))
        ga = _complex_normal(rng, shape, sigma)
        gb = _complex_normal(rng, shape, sigma)
        # anti-Hermitian A and complex symmetric B; diagonal components get variance 1/(2a)
        a_part = (ga - _dag(ga)) / np.sqrt(2.0)
        b_part = (gb + _T(gb)) / np.sqrt(2.0)
        return MatrixSample(quaternion_embed(a_part, b_part), "algebra", 4, group="sp", n=n)
    raise ValueError(f"unknown compact algebra {group!r}; expected one of {ALGEBRA_GROUPS}")


SYMSPACE_GROUPS = {1: "so", 2: "u", 4: "sp"}


def indefinite_signature(m: int, n: int, quaternion: bool = False) -> np.ndarray:
    """Diagonal of ``I_{m,n}`` (doubled for the quaternion embedding)."""
    d = np.concatenate([np.ones(m), -np.ones(n)])
    return np.concatenate([d, d]) if quaternion else d


def sample_symspace_compact(family: str, m: int, n: int, rng: np.random.Generator, size=None) -> MatrixSample:
    """``p = g I_{m,n} g^-1 I_{m,n}`` with ``g`` Haar in SO(m+n), U(m+n) or Sp(m+n)."""
    if n < 1 or m < n:
        raise ValueError(f"need m >= n >= 1, got m={m}, n={n}")
    if family == "so":
        g, beta = sample_haar("special_orthogonal", m + n, rng, size).data, 1
    elif family == "u":
        g, beta = sample_haar("unitary", m + n, rng, size).data, 2
    elif family == "sp":
        g, beta = sample_haar("symplectic", m + n, rng, size).data, 4
    else:
        raise ValueError(f"unknown symmetric-space family {family!r}")
    sig = indefinite_signature(m, n, quaternion=family == "sp")
    p = ((g * sig) @ _dag(g)) * sig
    return MatrixSample(p, "symspace_point", beta, group=family, m=m, n=n)


# ---------------------------------------------------------------------------
# structure identities


def structure_residual(sample: MatrixSample) -> float:
    """Largest deviation from the defining identities of ``sample.structure``."""
    m = sample.data
    eye = np.eye(m.shape[-1])
    s = sample.structure
    res = []
    if s in ("real_symmetric", "hermitian", "quaternion_selfdual_embedded"):
        res.append(np.abs(m - _dag(m)))
        if s == "real_symmetric":
            res.append(np.abs(np.imag(m)))
    if s in ("unitary", "orthogonal", "symplectic_embedded", "symspace_point"):
        res.append(np.abs(m @ _dag(m) - eye))
    if s == "orthogonal":
        res.append(np.abs(np.imag(m)))
    if s == "unitary" and sample.beta == 1:
        res.append(np.abs(m - _T(m)))
    if s == "unitary" and sample.beta == 4:
        j = symplectic_form(m.shape[-1] // 2)
        res.append(np.abs(j @ _T(m) @ j.T - m))
    if s == "algebra":
        res.append(np.abs(m + _dag(m)))
        if sample.group == "so":
            res.append(np.abs(np.imag(m)))
    if s == "symspace_point":
        sig = indefinite_signature(sample.m, sample.n, quaternion=sample.group == "sp")
        ip = sig[:, None] * m
        res.append(np.abs(ip @ ip - eye))
    out = max((float(np.max(r, initial=0.0)) for r in res), default=0.0)
    quaternion = s in ("quaternion_selfdual_embedded", "symplectic_embedded") or (
        s in ("algebra", "symspace_point") and sample.beta == 4
    )
    if quaternion or (s == "rect_block" and sample.beta == 4):
        out = max(out, quaternion_real_residual(m))
    return out
