"""Eigenvalue coordinates of matrix samples and Weyl-chamber folding.

All functions accept batched input (leading axes) and operate row-wise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .roots import Family, RootDatum
from .samplers import MatrixSample, STRUCTURE_TOL

FOLD_TOL = 1e-7
INPUT_TOL = 1e-8

CHARTS = ("linear", "log", "angle")


@dataclass(frozen=True)
class ChamberPoint:
    coords: np.ndarray
    chart: str
    datum_family: Family

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        object.__setattr__(self, "datum_family", Family(self.datum_family))


def _data(sample) -> np.ndarray:
    return sample.data if isinstance(sample, MatrixSample) else np.asarray(sample)


def _dag(m):
    return np.conj(np.swapaxes(m, -1, -2))


def _scale(m) -> float:
    return max(1.0, float(np.max(np.abs(m), initial=0.0)))


def hermitian_eigenvalues(sample) -> np.ndarray:
    """Ascending eigenvalues of a self-adjoint matrix (quaternion spectra still doubled)."""
    if isinstance(sample, MatrixSample) and sample.structure not in (
        "real_symmetric",
        "hermitian",
        "quaternion_selfdual_embedded",
    ):
        raise ValueError(f"not a self-adjoint sample: {sample.structure}")
    m = _data(sample)
    if np.max(np.abs(m - _dag(m)), initial=0.0) > INPUT_TOL * _scale(m):
        raise ValueError("matrix is not self-adjoint")
    return np.linalg.eigvalsh(m)


def unitary_eigenangles(sample) -> np.ndarray:
    """Principal eigen-angles in (-pi, pi], ascending."""
    m = _data(sample)
    eye = np.eye(m.shape[-1])
    if np.max(np.abs(m @ _dag(m) - eye), initial=0.0) > INPUT_TOL:
        raise ValueError("matrix is not unitary")
    theta = np.angle(np.linalg.eigvals(m))
    # np.angle returns -pi for arguments just below the negative axis
    theta = np.where(theta <= -math.pi, math.pi, theta)
    return np.sort(theta, axis=-1)


def singular_values(sample) -> np.ndarray:
    """Singular values, descending."""
    return np.linalg.svd(_data(sample), compute_uv=False)


def dedupe_pairs(values, tol: float = FOLD_TOL) -> np.ndarray:
    """Keep one representative of each adjacent pair after sorting.

    Raises if the sorted values do not pair up within ``tol`` (relative to the
    larger of 1 and the largest magnitude).
    """
    v = np.sort(np.asarray(values, dtype=float), axis=-1)
    if v.shape[-1] % 2:
        raise ValueError("dedupe_pairs needs an even number of values")
    first, second = v[..., 0::2], v[..., 1::2]
    scale = np.maximum(1.0, np.max(np.abs(v), axis=-1, keepdims=True, initial=0.0))
    gap = np.abs(second - first)
    if np.any(gap > tol * scale):
        raise ValueError(f"values do not pair up within tolerance (max gap {np.max(gap):.3g})")
    return (first + second) / 2


def reduce_angle(x) -> np.ndarray:
    """Representative of ``x`` mod 2 pi in (-pi, pi]."""
    return math.pi - np.remainder(math.pi - np.asarray(x, dtype=float), 2 * math.pi)


def fold(x, family, chart: str = "linear", tol: float = FOLD_TOL) -> np.ndarray:
    """Canonical Weyl-chamber representative, row-wise."""
    family = Family(family)
    x = np.asarray(x, dtype=float)
    if chart == "angle":
        x = reduce_angle(x)
    if family is Family.A:
        return -np.sort(-x, axis=-1)
    ax = -np.sort(-np.abs(x), axis=-1)
    if family is not Family.D:
        return ax
    negative = np.sum(x < -tol, axis=-1) % 2 == 1
    has_zero = np.any(np.abs(x) <= tol, axis=-1)
    flip = negative & ~has_zero
    ax[..., -1] = np.where(flip, -ax[..., -1], ax[..., -1])
    return ax


def fold_to_chamber(x, chart: str, datum: RootDatum | Family | str) -> ChamberPoint:
    family = datum.family if isinstance(datum, RootDatum) else Family(datum)
    x = np.asarray(x, dtype=float)
    if isinstance(datum, RootDatum) and x.shape[-1] != datum.rank:
        raise ValueError(f"point has {x.shape[-1]} coordinates, expected {datum.rank}")
    return ChamberPoint(fold(x, family, chart), chart, family)


# ---------------------------------------------------------------------------
# extraction for each sampler


def _drop_smallest_abs(theta: np.ndarray, count: int) -> np.ndarray:
    if count == 0:
        return theta
    order = np.argsort(np.abs(theta), axis=-1, kind="stable")
    dropped = np.take_along_axis(theta, order[..., :count], axis=-1)
    if np.any(np.abs(dropped) > FOLD_TOL):
        raise ValueError("expected fixed unit eigenvalues are missing")
    return np.take_along_axis(theta, order[..., count:], axis=-1)


def _pm_pairs(theta: np.ndarray) -> np.ndarray:
    """From a multiset ``{+-t_k}`` recover ``|t_k|`` (descending)."""
    lo = np.sort(theta, axis=-1)
    k = lo.shape[-1] // 2
    neg, pos = lo[..., :k], lo[..., k:][..., ::-1]
    scale = np.maximum(1.0, np.max(np.abs(lo), axis=-1, keepdims=True, initial=0.0))
    if np.any(np.abs(neg + pos) > FOLD_TOL * scale):
        raise ValueError("spectrum is not symmetric under t -> -t")
    return -np.sort(-(pos - neg) / 2, axis=-1)


def _pm_pairs_angle(theta: np.ndarray) -> np.ndarray:
    # angles near pi may appear as +pi on both sides, so pair by absolute value
    return -np.sort(-dedupe_pairs(np.abs(theta)), axis=-1)


def gaussian_coords(sample: MatrixSample) -> np.ndarray:
    ev = hermitian_eigenvalues(sample)
    if sample.beta == 4:
        ev = dedupe_pairs(ev)
    return fold(ev, Family.A)


def chiral_coords(sample: MatrixSample) -> np.ndarray:
    sv = singular_values(sample)
    if sample.beta == 4:
        sv = dedupe_pairs(sv)
    return fold(sv, Family.BC)


def circular_coords(sample: MatrixSample) -> np.ndarray:
    theta = unitary_eigenangles(sample)
    if sample.beta == 4:
        theta = _dedupe_angles(theta)
    return fold(theta, Family.A, "angle")


def _dedupe_angles(theta: np.ndarray) -> np.ndarray:
    # Kramers pairs may straddle the branch cut at +-pi; rotate it away first
    z = np.exp(1j * theta)
    rot = np.angle(z * np.exp(-1j * _cut(theta)[..., None]))
    return reduce_angle(dedupe_pairs(rot) + _cut(theta)[..., None])


def _cut(theta: np.ndarray) -> np.ndarray:
    """A rotation placing the largest gap between sorted angles at the branch cut."""
    s = np.sort(theta, axis=-1)
    ext = np.concatenate([s, s[..., :1] + 2 * math.pi], axis=-1)
    gaps = np.diff(ext, axis=-1)
    k = np.argmax(gaps, axis=-1)
    mid = np.take_along_axis(ext, k[..., None], axis=-1)[..., 0] + np.max(gaps, axis=-1) / 2
    return reduce_angle(mid + math.pi)


def group_coords(sample: MatrixSample, group: str) -> np.ndarray:
    """Torus coordinates of Haar samples from U(n), SO(2n+1), Sp(n) and SO(2n)."""
    theta = unitary_eigenangles(sample)
    if group == "u":
        return fold(theta, Family.A, "angle")
    if group == "so_odd":
        theta = _drop_smallest_abs(theta, 1)
        return fold(_pm_pairs_angle(theta), Family.B, "angle")
    if group == "so_even":
        return fold(_pm_pairs_angle(theta), Family.D, "angle")
    if group == "sp":
        return fold(_pm_pairs_angle(theta), Family.C, "angle")
    raise ValueError(f"unknown compact group {group!r}")


def algebra_coords(sample: MatrixSample) -> np.ndarray:
    """Coordinates ``x`` with eigenvalues ``i x`` (u) or ``+- i x`` (so, sp)."""
    m = sample.data
    if np.max(np.abs(m + _dag(m)), initial=0.0) > INPUT_TOL * _scale(m):
        raise ValueError("matrix is not skew-adjoint")
    if sample.group == "u":
        return fold(np.linalg.eigvalsh(-1j * m), Family.A)
    t = np.linalg.eigvalsh(-1j * m)
    if sample.group == "so":
        n = m.shape[-1]
        t = _drop_smallest_abs(t, n % 2)
        return fold(_pm_pairs(t), Family.D)
    if sample.group == "sp":
        return fold(_pm_pairs(t), Family.C)
    raise ValueError(f"unknown algebra {sample.group!r}")


def extract_symspace_coords(sample: MatrixSample, m: int | None = None, n: int | None = None) -> np.ndarray:
    """Recover ``x`` in [0, pi/2]^n from ``p`` whose eigen-angles are ``+-2 x_k`` plus ``m - n`` zeros."""
    if sample.structure != "symspace_point":
        raise ValueError("expected a symspace_point sample")
    m = sample.m if m is None else m
    n = sample.n if n is None else n
    theta = unitary_eigenangles(sample)
    quaternion = sample.beta == 4
    k = 2 if quaternion else 1
    theta = _drop_smallest_abs(theta, k * (m - n))
    a = np.sort(np.abs(theta), axis=-1)
    a = dedupe_pairs(a)
    if quaternion:
        a = dedupe_pairs(a)
    return fold(a / 2, Family.BC, "angle")
