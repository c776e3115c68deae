"""Restricted root systems, multiplicities and Weyl-group data.

Roots are stored as integer coefficient vectors in the basis ``e_1, ..., e_rank``
of the explicit Cartan parametrizations (``e_r(diag(x)) = x_r``).  Only the
positive half is stored; ``RootDatum.doubling`` marks data whose densities run
over the full set ``Delta = Sigma+ u -Sigma+`` (group, algebra and complex
ensembles).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

__all__ = [
    "Family",
    "RootVector",
    "PositiveRoot",
    "RootDatum",
    "build_restricted_roots",
    "build_group_roots",
    "build_complex_roots",
    "evaluate_root",
    "weyl_order",
    "reflection_matrix",
    "VALID_BETAS",
    "COMPACT_GROUPS",
    "COMPLEX_GROUPS",
]

VALID_BETAS = (1, 2, 4)

#: group tags for compact groups (section on Weyl integration) and their root family
COMPACT_GROUPS = {"u": "A", "so_odd": "B", "sp": "C", "so_even": "D"}
#: group tags for complex semisimple groups
COMPLEX_GROUPS = {"sl": "A", "so_odd": "B", "sp": "C", "so_even": "D"}


class Family(str, Enum):
    A = "A"
    BC = "BC"
    B = "B"
    C = "C"
    D = "D"


@dataclass(frozen=True)
class RootVector:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not any(coeffs):
            raise ValueError("root vector must be nonzero")
        if any(abs(c) > 2 for c in coeffs):
            raise ValueError(f"root coefficients must lie in {{-2..2}}, got {coeffs}")

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def __str__(self):
        terms = []
        for r, c in enumerate(self.coeffs, start=1):
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else str(abs(c))
            terms.append(f"{sign}{mag}e{r}")
        out = "".join(terms)
        return out[1:] if out.startswith("+") else out


@dataclass(frozen=True)
class PositiveRoot:
    vector: RootVector
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("zero-multiplicity roots are never stored")


@dataclass(frozen=True)
class RootDatum:
    family: Family
    rank: int
    positive_roots: tuple[PositiveRoot, ...]
    weyl_order: int
    dim_l: int
    doubling: bool = False
    # cached (k, rank) coefficient matrix and (k,) multiplicities
    coeff_matrix: np.ndarray = field(init=False, repr=False, compare=False)
    multiplicities: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")
        for root in self.positive_roots:
            if root.vector.rank != self.rank:
                raise ValueError("root length does not match rank")
        total = sum(root.multiplicity for root in self.positive_roots)
        if total != self.dim_l:
            raise ValueError(f"dim_l={self.dim_l} but multiplicities sum to {total}")
        coeffs = np.array(
            [root.vector.coeffs for root in self.positive_roots], dtype=float
        ).reshape(len(self.positive_roots), self.rank)
        mult = np.array([root.multiplicity for root in self.positive_roots], dtype=float)
        coeffs.setflags(write=False)
        mult.setflags(write=False)
        object.__setattr__(self, "coeff_matrix", coeffs)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def num_roots(self) -> int:
        return len(self.positive_roots)

    def evaluate(self, x) -> np.ndarray:
        """All positive roots at ``x``; shape ``x.shape[:-1] + (num_roots,)``."""
        x = np.asarray(x)
        if x.shape[-1] != self.rank:
            raise ValueError(f"point has {x.shape[-1]} coordinates, expected {self.rank}")
        return x @ self.coeff_matrix.T


def weyl_order(family: Family | str, rank: int) -> int:
    family = Family(family)
    if family is Family.A:
        # A_{rank-1} acting on rank coordinates
        return math.factorial(rank)
    if family is Family.D:
        return 2 ** (rank - 1) * math.factorial(rank)
    return 2**rank * math.factorial(rank)


def _pairs(n: int, plus: bool) -> list[tuple[int, ...]]:
    roots = []
    for r in range(n):
        for s in range(r + 1, n):
            c = [0] * n
            c[r], c[s] = 1, -1
            roots.append(tuple(c))
            if plus:
                c = [0] * n
                c[r], c[s] = 1, 1
                roots.append(tuple(c))
    return roots


def _unit(n: int, r: int, scale: int) -> tuple[int, ...]:
    c = [0] * n
    c[r] = scale
    return tuple(c)


def _datum(family, rank, roots_mults, doubling=False) -> RootDatum:
    kept = tuple(
        PositiveRoot(RootVector(c), m) for c, m in roots_mults if m > 0
    )
    return RootDatum(
        family=Family(family),
        rank=rank,
        positive_roots=kept,
        weyl_order=weyl_order(family, rank),
        dim_l=sum(r.multiplicity for r in kept),
        doubling=doubling,
    )


def _check_beta(beta):
    if beta not in VALID_BETAS:
        raise ValueError(f"beta must be one of {VALID_BETAS}, got {beta!r}")


def build_restricted_roots(family: str, n: int, m: int | None = None, beta: int = 1) -> RootDatum:
    """Restricted roots of ``GL(n, K)`` (``family="gl"``) or ``O/U/Sp(m, n)``
    (``family="indefinite"``), with ``K`` fixed by ``beta`` in {1, 2, 4}.

    The indefinite family is ``BC_n`` with multiplicities ``beta`` on
    ``e_r +- e_s``, ``beta*(m - n)`` on ``e_r`` and ``beta - 1`` on ``2 e_r``.
    Vanishing multiplicities drop the root, so the surviving system may be
    ``B_n``, ``C_n`` or ``D_n``; ``family`` on the result reports which.
    """
    _check_beta(beta)
    if n < 1:
        raise ValueError("n must be >= 1")
    if family == "gl":
        return _datum("A", n, [(c, beta) for c in _pairs(n, plus=False)])
    if family != "indefinite":
        raise ValueError(f"unknown restricted-root family {family!r}")
    if m is None or m < n:
        raise ValueError(f"indefinite family needs m >= n, got m={m}, n={n}")
    short = beta * (m - n)
    long_ = beta - 1
    roots = [(c, beta) for c in _pairs(n, plus=True)]
    for r in range(n):
        roots.append((_unit(n, r, 1), short))
        roots.append((_unit(n, r, 2), long_))
    if short and long_:
        tag = "BC"
    elif short:
        tag = "B"
    elif long_:
        tag = "C"
    else:
        tag = "D"
    return _datum(tag, n, roots)


def _group_roots(tag: str, n: int) -> RootDatum:
    if tag == "A":
        return _datum("A", n, [(c, 1) for c in _pairs(n, plus=False)], doubling=True)
    roots = [(c, 1) for c in _pairs(n, plus=True)]
    if tag == "B":
        roots += [(_unit(n, r, 1), 1) for r in range(n)]
    elif tag == "C":
        roots += [(_unit(n, r, 2), 1) for r in range(n)]
    return _datum(tag, n, roots, doubling=True)


def build_group_roots(group: str, n: int) -> RootDatum:
    """Root system ``Delta`` (stored as its positive half) of a compact group.

    ``group`` is one of ``u`` (U(n)), ``so_odd`` (SO(2n+1)), ``sp`` (Sp(n)) or
    ``so_even`` (SO(2n)); ``n`` is the rank of the maximal torus.
    """
    if group not in COMPACT_GROUPS:
        raise ValueError(f"unknown compact group {group!r}; expected one of {sorted(COMPACT_GROUPS)}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return _group_roots(COMPACT_GROUPS[group], n)


def build_complex_roots(group: str, n: int) -> RootDatum:
    """Root system of ``SL(n,C)``, ``Sp(n,C)``, ``SO(2n,C)`` or ``SO(2n+1,C)``."""
    if group not in COMPLEX_GROUPS:
        raise ValueError(f"unknown complex group {group!r}; expected one of {sorted(COMPLEX_GROUPS)}")
    if group == "sl" and n < 2:
        raise ValueError("sl(n, C) needs n >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    return _group_roots(COMPLEX_GROUPS[group], n)


def evaluate_root(root: RootVector | PositiveRoot, point: Sequence[float]):
    """``lambda(point) = sum_r coeffs[r] * point[r]``; complex points allowed."""
    if isinstance(root, PositiveRoot):
        root = root.vector
    point = np.asarray(point)
    if point.shape[-1] != root.rank:
        raise ValueError(f"point has {point.shape[-1]} coordinates, expected {root.rank}")
    return point @ np.asarray(root.coeffs, dtype=float)


def reflection_matrix(root: RootVector | PositiveRoot) -> np.ndarray:
    """Orthogonal reflection through the hyperplane ``ker(root)``."""
    if isinstance(root, PositiveRoot):
        root = root.vector
    v = np.asarray(root.coeffs, dtype=float)
    return np.eye(v.size) - 2.0 * np.outer(v, v) / (v @ v)
