"""Cross-route verification checks and suites.

A check compares two independent computations of the same number:

* ``pointwise_equality`` - root-product engine against the specialized closed
  form at random interior points;
* ``invariance`` - log J against itself after random Weyl-group words;
* ``wall_vanishing`` - log J is ``-inf`` on every root hyperplane and decays
  monotonically approaching it;
* ``structure`` - sampler outputs satisfy their algebraic identities;
* ``mc_vs_quad`` - matrix Monte Carlo against eigenvalue-density quadrature.
"""
from __future__ import annotations

import configparser
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import densities as D
from .densities import Envelope, EnsembleSpec, make_spec
from .quadrature import Domain, mc_mean, normalized_expectation
from .rng import RngHandle, block_sizes
from . import samplers as S
from . import spectra as SP

CHECK_KINDS = ("pointwise_equality", "invariance", "mc_vs_quad", "wall_vanishing", "structure")
MC_BLOCK = 10_000
WALL_MARGIN = 0.05

# ---------------------------------------------------------------------------
# observables


def _sum_sq(x):
    return np.sum(x**2, axis=-1)


def _sum_quartic(x):
    return np.sum(x**4, axis=-1)


def _gap_sq(x):
    r, s = np.triu_indices(x.shape[-1], k=1)
    return np.sum((x[..., r] - x[..., s]) ** 2, axis=-1)


def _abs_char_sq(x):
    return np.abs(np.sum(np.exp(1j * x), axis=-1)) ** 2


def _char2_sq(x):
    return np.abs(np.sum(np.exp(2j * x), axis=-1)) ** 2


_OBSERVABLES = {
    "sum_sq": _sum_sq,
    "sum_quartic": _sum_quartic,
    "gap_sq": _gap_sq,
    "abs_char_sq": _abs_char_sq,
    "char2_sq": _char2_sq,
}


def observable_catalog(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return _OBSERVABLES[name]
    except KeyError:
        raise ValueError(f"unknown observable {name!r}; expected one of {sorted(_OBSERVABLES)}") from None


# ---------------------------------------------------------------------------
# specs and reports


@dataclass(frozen=True)
class Tolerance:
    rel: float = 1e-3
    sigma_mult: float = 5.0


@dataclass(frozen=True)
class CheckSpec:
    name: str
    kind: str
    ensemble: EnsembleSpec
    observable: Optional[str] = None
    sample_count: int = 100_000
    nodes_per_dim: int = 64
    seed: Optional[int] = None
    stream: Optional[int] = None
    tolerance: Tolerance = field(default_factory=Tolerance)
    num_points: int = 1000
    reference: Optional[float] = None

    def __post_init__(self):
        if self.kind not in CHECK_KINDS:
            raise ValueError(f"unknown check kind {self.kind!r}")
        if self.kind == "mc_vs_quad":
            if not has_sampler(self.ensemble):
                raise ValueError(f"{self.name}: no sampler for ensemble kind {self.ensemble.kind}")
            observable_catalog(self.observable)
        if self.kind == "structure" and not has_sampler(self.ensemble):
            raise ValueError(f"{self.name}: no sampler for ensemble kind {self.ensemble.kind}")


@dataclass(frozen=True)
class CheckReport:
    name: str
    lhs: float
    rhs: float
    stderr: float
    criterion: str
    passed: bool
    error: Optional[str] = None


def _fmt(v: float) -> str:
    return format(v, ".17g") if math.isfinite(v) else ("-inf" if v < 0 else ("inf" if v > 0 else "nan"))


# ---------------------------------------------------------------------------
# sampler and quadrature routes per ensemble


def has_sampler(spec: EnsembleSpec) -> bool:
    k, p = spec.kind, spec.params
    if k == "linear":
        env = spec.envelope.kind
        return (p.family == "gl" and env == "gaussian_trace") or (p.family == "indefinite" and env == "gaussian_hs")
    if k == "compact":
        return p.family == "gl"
    if k == "sym_space_compact_delta":
        return p.family == "indefinite"
    if k == "group_compact":
        return True
    if k == "algebra_compact":
        return spec.envelope.kind == "gaussian_hs"
    return False


_HAAR = {"u": ("unitary", 1), "so_odd": ("special_orthogonal", 2), "so_even": ("special_orthogonal", 2), "sp": ("symplectic", 1)}
_ALGEBRA = {"u": "u", "so_odd": "so", "so_even": "so", "sp": "sp"}


def _algebra_size(group: str, n: int) -> int:
    return {"so_odd": 2 * n + 1, "so_even": 2 * n}.get(group, n)


def draw_sample(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> S.MatrixSample:
    """Matrices for ``spec`` (raises for density-only ensembles)."""
    if not has_sampler(spec):
        raise ValueError(f"no matrix sampler for ensemble kind {spec.kind} with these parameters")
    k, p = spec.kind, spec.params
    if k == "linear" and p.family == "gl":
        return S.sample_gaussian(p.beta, p.n, spec.envelope, rng, size)
    if k == "linear":
        return S.sample_chiral(p.beta, p.m, p.n, spec.envelope, rng, size)
    if k == "compact":
        return S.sample_circular(p.beta, p.n, rng, size)
    if k == "sym_space_compact_delta":
        return S.sample_symspace_compact(S.SYMSPACE_GROUPS[p.beta], p.m, p.n, rng, size)
    if k == "group_compact":
        name, _ = _HAAR[p.group]
        dim = {"so_odd": 2 * p.n + 1, "so_even": 2 * p.n}.get(p.group, p.n)
        return S.sample_haar(name, dim, rng, size)
    return S.sample_algebra_compact(_ALGEBRA[p.group], _algebra_size(p.group, p.n), spec.envelope, rng, size)


def sample_coords(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Folded eigenvalue coordinates of ``size`` matrix draws, shape ``(size, rank)``."""
    sample = draw_sample(spec, rng, size)
    k = spec.kind
    if k == "linear":
        return SP.gaussian_coords(sample) if spec.params.family == "gl" else SP.chiral_coords(sample)
    if k == "compact":
        return SP.circular_coords(sample)
    if k == "sym_space_compact_delta":
        return SP.extract_symspace_coords(sample)
    if k == "group_compact":
        return SP.group_coords(sample, spec.params.group)
    return SP.algebra_coords(sample)


def quadrature_domain(spec: EnsembleSpec) -> Domain:
    """One Weyl chamber of the eigenvalue manifold, parametrized so root factors are smooth.

    Densities and observables are Weyl invariant, so normalized expectations
    over a chamber equal those over the whole manifold.
    """
    n, env, k = spec.rank, spec.envelope, spec.kind
    if k == "compact":
        return Domain.ordered_circle(n)
    if k == "group_compact":
        return Domain.torus(n)
    if k == "sym_space_compact_delta":
        return Domain.ordered_simplex(n, math.pi / 2)
    if env.kind == "uniform":
        raise ValueError("noncompact quadrature needs a Gaussian envelope")
    width = 12.0 / math.sqrt(2.0 * env.a)
    full = (k == "linear" and spec.params.family == "gl") or (k == "algebra_compact" and spec.params.group == "u")
    if full:
        c = env.b / (2.0 * env.a)
        return Domain.cone(n, c - width, c + width)
    return Domain.ordered_orthant(n, width)


def density_function(spec: EnsembleSpec) -> Callable[[np.ndarray], np.ndarray]:
    def log_density(x):
        return np.asarray(D.log_J(spec, x)) + np.asarray(D.log_envelope(spec.envelope, x))

    return log_density


# ---------------------------------------------------------------------------
# individual checks


def _coords_block(args):
    spec, seed, stream, block, size = args
    return sample_coords(spec, RngHandle(seed, stream).generator(block), size)


def _run_blocks(fn, tasks, jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def coords_stream(spec: EnsembleSpec, handle: RngHandle, count: int, jobs: int = 1) -> np.ndarray:
    """Folded coordinates of ``count`` draws in fixed blocks; independent of ``jobs``."""
    tasks = [(spec, handle.seed, handle.stream_id, b, sz) for b, sz in enumerate(block_sizes(count, MC_BLOCK))]
    parts = _run_blocks(_coords_block, tasks, jobs)
    return np.concatenate(parts) if parts else np.zeros((0, spec.rank))


def _mc_block(args):
    spec, observable, seed, stream, block, size = args
    return observable_catalog(observable)(_coords_block((spec, seed, stream, block, size)))


def mc_values(spec: EnsembleSpec, observable: str, handle: RngHandle, count: int, jobs: int = 1) -> np.ndarray:
    """Observable values for ``count`` draws; independent of ``jobs``."""
    tasks = [(spec, observable, handle.seed, handle.stream_id, b, sz) for b, sz in enumerate(block_sizes(count, MC_BLOCK))]
    parts = _run_blocks(_mc_block, tasks, jobs)
    return np.concatenate(parts) if parts else np.zeros(0)


def check_mc_vs_quad(spec: CheckSpec, handle: Optional[RngHandle] = None, jobs: int = 1) -> CheckReport:
    handle = handle or RngHandle(spec.seed or 0, spec.stream or 0)
    vals = mc_values(spec.ensemble, spec.observable, handle, spec.sample_count, jobs)
    lhs, stderr = mc_mean(vals)
    quad = normalized_expectation(
        density_function(spec.ensemble),
        observable_catalog(spec.observable),
        quadrature_domain(spec.ensemble),
        spec.nodes_per_dim,
    )
    rhs = quad.value
    tol = spec.tolerance
    bound = tol.sigma_mult * stderr + tol.rel * abs(rhs)
    passed = abs(lhs - rhs) <= bound
    criterion = f"|lhs-rhs|={abs(lhs - rhs):.3g} <= {tol.sigma_mult:g}*stderr+{tol.rel:g}*|rhs|={bound:.3g}"
    if spec.reference is not None:
        ref_bound = tol.sigma_mult * stderr
        ok = abs(lhs - spec.reference) <= ref_bound
        passed = passed and ok
        criterion += f"; |lhs-{spec.reference:g}|={abs(lhs - spec.reference):.3g} <= {ref_bound:.3g}"
    return CheckReport(spec.name, lhs, rhs, stderr, criterion, bool(passed))


# -- pointwise -------------------------------------------------------------


def _dual_coords(spec: EnsembleSpec, x: np.ndarray) -> np.ndarray:
    """Coordinates expected by the closed form of ``spec``."""
    k, fam = spec.kind, spec.params.family
    if k == "nonlinear_noncompact":
        return np.exp(x) if fam == "gl" else np.cosh(x)
    if k == "compact" and fam == "indefinite":
        return np.cos(x)
    return x


def _random_points(spec: EnsembleSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    n, k = spec.rank, spec.kind
    if k in ("group_complex", "algebra_complex"):
        if k == "group_complex" and spec.params.group in ("sl", "sp"):
            h = rng.uniform(0.5, 2.0, (count, n)) * np.exp(1j * rng.uniform(-math.pi, math.pi, (count, n)))
            if spec.params.group == "sl":
                h[:, -1] = 1.0 / np.prod(h[:, :-1], axis=-1)
            return h
        z = rng.uniform(-2, 2, (count, n)) + 1j * rng.uniform(-2, 2, (count, n))
        if k == "algebra_complex" and spec.params.group == "sl":
            z[:, -1] = -np.sum(z[:, :-1], axis=-1)
        return z
    if k in D.SL2R_KINDS:
        if k == "sl2r_grp2":
            return rng.uniform(0.1, math.pi - 0.1, (count, 1))
        return rng.uniform(0.1, 2.0, (count, 1)) * rng.choice([-1.0, 1.0], (count, 1))
    if spec.chart == "angle":
        if k == "compact" and spec.params.family == "indefinite":
            return rng.uniform(0, math.pi, (count, n))
        return rng.uniform(-math.pi, math.pi, (count, n))
    return rng.uniform(-3, 3, (count, n))


def _interior(spec: EnsembleSpec, x: np.ndarray, margin: float = WALL_MARGIN) -> np.ndarray:
    """Rows at distance >= margin from every wall of the engine or closed form."""
    n, k = spec.rank, spec.kind
    if k in D.SL2R_KINDS:
        v = x[:, 0]
        if k == "sl2r_grp1":
            return np.abs(np.abs(v) - 1) >= margin
        return np.ones(len(x), dtype=bool)
    if k in ("group_complex", "algebra_complex"):
        r, s = np.triu_indices(n, k=1)
        group = spec.params.group
        vals = [x[:, r] - x[:, s]]
        if k == "algebra_complex" and group != "sl":
            vals += [x[:, r] + x[:, s], x]
        elif k == "group_complex" and group == "sp":
            vals += [1 - x[:, r] * x[:, s], 1 - x * x, x]
        elif k == "group_complex" and group == "so_odd":
            vals += [1 - x]
        return np.all(np.concatenate([np.abs(v) for v in vals], axis=-1) >= margin, axis=-1)
    if k in ("pseudo_algebra_gl", "pseudo_group_gl"):
        y = D.pseudo_gl_eigenvalues(n, spec.params.j, x)
        r, s = np.triu_indices(n, k=1)
        ok = np.all(np.abs(y[:, r] - y[:, s]) >= margin, axis=-1)
        return ok & np.all(np.abs(x) >= margin, axis=-1)
    r, s = np.triu_indices(n, k=1)
    vals = [x[:, r] - x[:, s]]
    if spec.family_tag != "A":
        vals += [x[:, r] + x[:, s], x, 2 * x]
    vals = np.concatenate(vals, axis=-1)
    if spec.chart == "angle":
        d = np.abs(np.remainder(vals + math.pi, 2 * math.pi) - math.pi)
        if k == "sym_space_compact_delta":
            d = np.abs(np.remainder(vals + math.pi / 2, math.pi) - math.pi / 2)
        return np.all(d >= margin, axis=-1)
    return np.all(np.abs(vals) >= margin, axis=-1)


def interior_points(spec: EnsembleSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    out = []
    have = 0
    while have < count:
        pts = _random_points(spec, rng, 2 * count)
        pts = pts[_interior(spec, pts)]
        out.append(pts)
        have += len(pts)
    return np.concatenate(out)[:count]


def relative_discrepancy(log_a, log_b) -> np.ndarray:
    """``|a/b - 1|`` computed from logs; equal infinities count as agreement."""
    log_a, log_b = np.asarray(log_a, dtype=float), np.asarray(log_b, dtype=float)
    both = np.isneginf(log_a) & np.isneginf(log_b)
    with np.errstate(invalid="ignore"):
        d = np.abs(np.expm1(log_a - log_b))
    d = np.where(both, 0.0, d)
    return np.where(np.isnan(d), np.inf, d)


def pointwise_pair(spec: EnsembleSpec) -> tuple[Callable, Callable]:
    """The two independent evaluators compared by :func:`check_pointwise`."""
    if spec.kind in D.SL2R_KINDS:
        return (lambda x: np.exp(D.log_J_sl2r(spec.kind, x))), (lambda x: D.sl2r_direct(spec.kind, x[..., 0]))
    if spec.kind in ("sym_space_noncompact_delta", "sym_space_compact_delta"):
        raise ValueError(f"{spec.kind} has a single evaluator; no pointwise pair")
    return (lambda x: D.log_J(spec, x, "engine")), (lambda x: D.log_J(spec, _dual_coords(spec, x), "closed"))


def check_pointwise(
    spec: EnsembleSpec,
    num_points: int = 1000,
    seed: int = 0,
    rel_tol: float = 1e-10,
    name: Optional[str] = None,
    handle: Optional[RngHandle] = None,
) -> CheckReport:
    """Max relative density discrepancy between engine and closed form."""
    rng = (handle or RngHandle(seed)).generator()
    x = interior_points(spec, rng, num_points)
    f, g = pointwise_pair(spec)
    if spec.kind in D.SL2R_KINDS:
        a, b = f(x), g(x)
        d = np.abs(a / b - 1)
    else:
        d = relative_discrepancy(f(x), g(x))
    worst = float(np.max(d))
    passed = worst < rel_tol
    return CheckReport(name or f"pointwise:{spec.kind}", worst, 0.0, 0.0, f"max rel diff {worst:.3g} < {rel_tol:g}", passed)


# -- Weyl invariance -------------------------------------------------------


def weyl_generators(spec: EnsembleSpec) -> list[Callable[[np.ndarray], np.ndarray]]:
    """Generators of the Weyl group acting on the coordinates of ``spec``."""
    n, k = spec.rank, spec.kind
    gens = []

    def swap(i, j):
        def g(x):
            y = x.copy()
            y[..., [i, j]] = x[..., [j, i]]
            return y

        return g

    if k in D.SL2R_KINDS:
        if k == "sl2r_grp1":
            return [lambda x: 1.0 / x]
        return [lambda x: -x]
    if k in ("pseudo_algebra_gl", "pseudo_group_gl"):
        j = spec.params.j
        for i in range(2 * j, n - 1):
            gens.append(swap(i, i + 1))
        for i in range(j - 1):
            a, b = swap(i, i + 1), swap(j + i, j + i + 1)
            gens.append(lambda x, a=a, b=b: b(a(x)))
        for i in range(j):
            def conj(x, i=i):
                y = x.copy()
                y[..., j + i] = -x[..., j + i]
                return y

            gens.append(conj)
        return gens
    for i in range(n - 1):
        gens.append(swap(i, i + 1))
    if k == "group_complex":
        if spec.params.group == "sp":
            def inv_last(x):
                y = x.copy()
                y[..., -1] = 1.0 / x[..., -1]
                return y

            gens.append(inv_last)
        return gens
    fam = spec.family_tag
    if fam in ("B", "C", "BC"):
        def flip_last(x):
            y = x.copy()
            y[..., -1] = -x[..., -1]
            return y

        gens.append(flip_last)
    elif fam == "D" and n >= 2:
        def flip_pair(x):
            y = x.copy()
            y[..., -2], y[..., -1] = -x[..., -1], -x[..., -2]
            return y

        gens.append(flip_pair)
    return gens


def check_invariance(
    spec: EnsembleSpec,
    num_points: int = 1000,
    seed: int = 0,
    tol: float = 1e-12,
    max_word: int = 5,
    name: Optional[str] = None,
    handle: Optional[RngHandle] = None,
) -> CheckReport:
    """log J changes by at most ``tol`` (absolute) under random Weyl words."""
    rng = (handle or RngHandle(seed)).generator()
    x = interior_points(spec, rng, num_points)
    gens = weyl_generators(spec)
    y = x.copy()
    if gens:
        lengths = rng.integers(1, max_word + 1, num_points)
        for step in range(max_word):
            choice = rng.integers(0, len(gens), num_points)
            for gi, g in enumerate(gens):
                mask = (choice == gi) & (lengths > step)
                if np.any(mask):
                    y[mask] = g(y[mask])
    base = np.asarray(D.log_J(spec, x), dtype=float)
    moved = np.asarray(D.log_J(spec, y), dtype=float)
    worst = float(np.max(np.abs(moved - base)))
    return CheckReport(
        name or f"invariance:{spec.kind}", worst, 0.0, 0.0, f"max |d log J| {worst:.3g} <= {tol:g}", worst <= tol
    )


# -- walls -----------------------------------------------------------------


def _other_roots_clear(spec: EnsembleSpec, x: np.ndarray, k: int, gap: float = 0.1) -> bool:
    """Roots not parallel to root ``k`` stay at least ``gap`` away from their walls."""
    cm = spec.datum.coeff_matrix
    c = cm[k]
    # parallel roots (e_r and 2 e_r) share the hyperplane of root k
    parallel = np.abs(cm @ c) ** 2 == np.sum(cm**2, axis=1) * (c @ c)
    vals = np.abs(spec.datum.evaluate(x))
    if spec.chart == "angle":
        vals = np.abs(np.remainder(vals + math.pi, 2 * math.pi) - math.pi)
    return bool(np.all(vals[~parallel] >= gap))


def _wall_points(spec: EnsembleSpec, rng: np.random.Generator) -> list[np.ndarray]:
    """Points placed exactly on each positive-root hyperplane and generic otherwise."""
    datum = spec.datum
    n = spec.rank
    out = []
    for k, root in enumerate(datum.positive_roots):
        c = np.array(root.vector.coeffs)
        nz = np.flatnonzero(c)
        for _ in range(1000):
            x = rng.uniform(0.3, 1.2, n) * rng.choice([-1.0, 1.0], n)
            if len(nz) == 1:
                x[nz[0]] = 0.0
            else:
                r, s = nz
                x[s] = -c[r] * c[s] * x[r]
            if spec.kind == "algebra_complex" and spec.params.group == "sl":
                # the trace constraint; centring keeps x_r - x_s = 0
                x = x - x.mean()
            if _other_roots_clear(spec, x, k):
                break
        else:
            raise RuntimeError(f"no generic point found on the wall of {root.vector}")
        out.append(x)
        if spec.chart == "angle" and len(nz) == 1 and abs(c[nz[0]]) == 1:
            y = x.copy()
            y[nz[0]] = 2 * math.pi
            out.append(y)
    return out


def check_wall_vanishing(spec: EnsembleSpec, seed: int = 0, name: Optional[str] = None, handle: Optional[RngHandle] = None) -> CheckReport:
    """``-inf`` on every wall; for linear kinds also monotone decay along a ray."""
    rng = (handle or RngHandle(seed)).generator()
    if spec.datum is None or spec.datum.num_roots == 0:
        return CheckReport(name or f"walls:{spec.kind}", 0.0, 0.0, 0.0, "no walls", True)
    pts = _wall_points(spec, rng)
    vals = np.array([float(np.asarray(D.log_J(spec, p))) for p in pts])
    on_wall = bool(np.all(np.isneginf(vals)))
    monotone = True
    if spec.kind in ("linear", "algebra_compact"):
        for p in pts:
            direction = rng.normal(size=p.size)
            ts = np.logspace(-2, -3, 8)
            ray = np.asarray(D.log_J(spec, p[None, :] + ts[:, None] * direction[None, :]))
            monotone &= bool(np.all(np.diff(ray) < 0))
    passed = on_wall and monotone
    crit = f"-inf on {len(pts)} wall points: {on_wall}; monotone approach: {monotone}"
    return CheckReport(name or f"walls:{spec.kind}", float(np.max(vals)), float("-inf"), 0.0, crit, passed)


# -- sampler structure -----------------------------------------------------


def check_structure(spec: EnsembleSpec, count: int = 200, seed: int = 0, tol: float = 1e-10, name: Optional[str] = None, handle: Optional[RngHandle] = None) -> CheckReport:
    """Structure identities of ``count`` draws; beta=4 spectra must pair up."""
    rng = (handle or RngHandle(seed)).generator()
    sample = draw_sample(spec, rng, count)
    worst = S.structure_residual(sample)
    paired = True
    if sample.beta == 4 and sample.structure in ("quaternion_selfdual_embedded", "unitary", "rect_block"):
        try:
            if sample.structure == "quaternion_selfdual_embedded":
                SP.dedupe_pairs(SP.hermitian_eigenvalues(sample))
            elif sample.structure == "rect_block":
                SP.dedupe_pairs(SP.singular_values(sample))
            else:
                SP.circular_coords(sample)
        except ValueError:
            paired = False
    passed = worst <= tol and paired
    crit = f"residual {worst:.3g} <= {tol:g}" + ("" if sample.beta != 4 else f"; even multiplicity: {paired}")
    return CheckReport(name or f"structure:{spec.kind}", worst, 0.0, 0.0, crit, passed)


# ---------------------------------------------------------------------------
# suites


def _handle_for(spec: CheckSpec, seed: int, index: int) -> RngHandle:
    return RngHandle(spec.seed if spec.seed is not None else seed, spec.stream if spec.stream is not None else index)


def run_check(spec: CheckSpec, handle: RngHandle, jobs: int = 1) -> CheckReport:
    """Run one check; failures of any kind become a failed report."""
    try:
        if spec.kind == "mc_vs_quad":
            return check_mc_vs_quad(spec, handle, jobs)
        if spec.kind == "pointwise_equality":
            return check_pointwise(spec.ensemble, spec.num_points, rel_tol=spec.tolerance.rel, name=spec.name, handle=handle)
        if spec.kind == "invariance":
            return check_invariance(spec.ensemble, spec.num_points, tol=spec.tolerance.rel, name=spec.name, handle=handle)
        if spec.kind == "wall_vanishing":
            return check_wall_vanishing(spec.ensemble, name=spec.name, handle=handle)
        return check_structure(spec.ensemble, spec.num_points, tol=spec.tolerance.rel, name=spec.name, handle=handle)
    except Exception as exc:  # reported, not raised
        msg = f"{type(exc).__name__}: {exc}"
        return CheckReport(spec.name, float("nan"), float("nan"), float("nan"), "error", False, msg)


def _run_indexed(args):
    spec, seed, index = args
    return run_check(spec, _handle_for(spec, seed, index))


def run_suite(suite: Sequence[CheckSpec], seed: int = 0, jobs: int = 1) -> list[CheckReport]:
    """Run every check; reports come back in suite order whatever ``jobs`` is."""
    tasks = [(spec, seed, i) for i, spec in enumerate(suite)]
    return _run_blocks(_run_indexed, tasks, jobs)


def format_reports(reports: Sequence[CheckReport], fmt: str = "csv") -> str:
    buf = io.StringIO()
    if fmt == "csv":
        buf.write("name,lhs,rhs,stderr,pass,criterion\n")
        for r in reports:
            crit = (r.error or r.criterion).replace('"', "'")
            buf.write(f'{r.name},{_fmt(r.lhs)},{_fmt(r.rhs)},{_fmt(r.stderr)},{str(r.passed).lower()},"{crit}"\n')
    elif fmt == "jsonl":
        import json

        for r in reports:
            row = {
                "name": r.name,
                "lhs": _fmt(r.lhs),
                "rhs": _fmt(r.rhs),
                "stderr": _fmt(r.stderr),
                "pass": r.passed,
                "criterion": r.error or r.criterion,
            }
            buf.write(json.dumps(row) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


# -- INI serialization -----------------------------------------------------

_INT_KEYS = ("n", "m", "beta", "j")


def _envelope_fields(env: Envelope) -> dict:
    out = {"envelope": env.kind}
    if env.kind != "uniform":
        out["a"] = repr(env.a)
    if env.kind == "gaussian_trace":
        out["b"], out["c"] = repr(env.b), repr(env.c)
    return out


def spec_to_section(spec: CheckSpec) -> dict:
    e, p = spec.ensemble, spec.ensemble.params
    sec = {"check": spec.kind, "ensemble": e.kind}
    for key in ("n", "m", "beta", "j", "family", "group"):
        v = getattr(p, key)
        if v is not None and not (e.kind in D.SL2R_KINDS and key == "n"):
            sec[key] = str(v)
    sec.update(_envelope_fields(e.envelope))
    if spec.observable:
        sec["observable"] = spec.observable
    sec["samples"] = str(spec.sample_count)
    sec["nodes"] = str(spec.nodes_per_dim)
    sec["points"] = str(spec.num_points)
    sec["rel"] = repr(spec.tolerance.rel)
    sec["sigma"] = repr(spec.tolerance.sigma_mult)
    if spec.seed is not None:
        sec["seed"] = str(spec.seed)
    if spec.stream is not None:
        sec["stream"] = str(spec.stream)
    if spec.reference is not None:
        sec["reference"] = repr(spec.reference)
    return sec


def dump_suite(suite: Sequence[CheckSpec]) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    for spec in suite:
        cp[spec.name] = spec_to_section(spec)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def envelope_from_fields(kind: str, a=None, b=None, c=None) -> Envelope:
    if kind == "uniform":
        return Envelope.uniform()
    if a is None:
        raise ValueError(f"envelope {kind} needs a")
    if kind == "gaussian_hs":
        return Envelope.gaussian_hs(float(a))
    if kind == "gaussian_trace":
        return Envelope.gaussian_trace(float(a), float(b or 0.0), float(c or 0.0))
    raise ValueError(f"unknown envelope {kind!r}")


def section_to_spec(name: str, sec) -> CheckSpec:
    known = {
        "check", "ensemble", "n", "m", "beta", "j", "family", "group", "envelope", "a", "b", "c",
        "observable", "samples", "nodes", "points", "rel", "sigma", "seed", "stream", "reference",
    }
    unknown = set(sec) - known
    if unknown:
        raise ValueError(f"[{name}] unknown keys: {sorted(unknown)}")
    for req in ("check", "ensemble"):
        if req not in sec:
            raise ValueError(f"[{name}] missing key {req!r}")
    ints = {k: int(sec[k]) for k in _INT_KEYS if k in sec}
    env = envelope_from_fields(sec.get("envelope", "uniform"), sec.get("a"), sec.get("b"), sec.get("c"))
    ensemble = make_spec(sec["ensemble"], family=sec.get("family"), group=sec.get("group"), envelope=env, **ints)
    defaults = CheckSpec.__dataclass_fields__
    return CheckSpec(
        name=name,
        kind=sec["check"],
        ensemble=ensemble,
        observable=sec.get("observable"),
        sample_count=int(sec.get("samples", defaults["sample_count"].default)),
        nodes_per_dim=int(sec.get("nodes", defaults["nodes_per_dim"].default)),
        num_points=int(sec.get("points", defaults["num_points"].default)),
        tolerance=Tolerance(float(sec.get("rel", 1e-3)), float(sec.get("sigma", 5.0))),
        seed=int(sec["seed"], 0) if "seed" in sec else None,
        stream=int(sec["stream"]) if "stream" in sec else None,
        reference=float(sec["reference"]) if "reference" in sec else None,
    )


def load_suite(text: str) -> list[CheckSpec]:
    """Parse an INI suite; raises ``ValueError`` on malformed input."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValueError(f"malformed suite file: {exc}") from exc
    out = []
    for name in cp.sections():
        try:
            out.append(section_to_spec(name, cp[name]))
        except (TypeError, KeyError) as exc:
            raise ValueError(f"[{name}] {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# built-in suite


def _mc(name, ensemble, observable, **kw) -> CheckSpec:
    return CheckSpec(name, "mc_vs_quad", ensemble, observable, **kw)


def mc_suite() -> list[CheckSpec]:
    """Monte Carlo against quadrature for every sampled ensemble family."""
    suite = []
    gauss = Envelope.gaussian_trace(0.5)
    names = {1: "goe", 2: "gue", 4: "gse"}
    for beta in (1, 2, 4):
        for n in (2, 3):
            spec = make_spec("linear", family="gl", n=n, beta=beta, envelope=gauss)
            for obs in ("sum_sq", "sum_quartic", "gap_sq"):
                stream = 1000 + n if (beta == 2 and obs == "sum_sq") else None
                suite.append(_mc(f"{names[beta]}_n{n}_{obs}", spec, obs, stream=stream))
    cnames = {1: "coe", 2: "cue", 4: "cse"}
    for beta in (1, 2, 4):
        for n in (2, 3):
            spec = make_spec("compact", family="gl", n=n, beta=beta)
            for obs in ("abs_char_sq", "char2_sq"):
                ref = 1.0 if (beta == 2 and obs == "abs_char_sq") else None
                suite.append(_mc(f"{cnames[beta]}_n{n}_{obs}", spec, obs, reference=ref))
    for m, n in ((1, 1), (2, 1)):
        spec = make_spec("sym_space_compact_delta", family="indefinite", m=m, n=n, beta=2)
        suite.append(_mc(f"symspace_u{m}{n}_sum_sq", spec, "sum_sq"))
    for beta in (1, 2):
        for m, n in ((2, 1), (3, 2)):
            spec = make_spec("linear", family="indefinite", m=m, n=n, beta=beta, envelope=Envelope.gaussian_hs(0.5))
            suite.append(_mc(f"chiral_b{beta}_m{m}n{n}_sum_sq", spec, "sum_sq"))
    suite.append(_mc("algebra_so4_sum_sq", make_spec("algebra_compact", group="so_even", n=2, envelope=Envelope.gaussian_hs(0.5)), "sum_sq"))
    # shares its stream with gue_n2_sum_sq so both routes see the same matrices up to a factor i
    suite.append(_mc("algebra_u2_sum_sq", make_spec("algebra_compact", group="u", n=2, envelope=Envelope.gaussian_hs(0.5)), "sum_sq", stream=1002))
    return suite


def density_kind_catalog() -> list[EnsembleSpec]:
    """One or more parameter sets for each of the fifteen kinds."""
    out = []
    for beta in (1, 2, 4):
        for n in (2, 3):
            out.append(make_spec("linear", family="gl", n=n, beta=beta))
            out.append(make_spec("nonlinear_noncompact", family="gl", n=n, beta=beta))
            out.append(make_spec("compact", family="gl", n=n, beta=beta))
            out.append(make_spec("sym_space_noncompact_delta", family="gl", n=n, beta=beta))
            out.append(make_spec("sym_space_compact_delta", family="gl", n=n, beta=beta))
        for m, n in ((1, 1), (2, 1), (3, 2), (2, 2)):
            for kind in _family_kinds():
                out.append(make_spec(kind, family="indefinite", m=m, n=n, beta=beta))
    for n in (1, 2, 3):
        for g in ("u", "so_odd", "sp", "so_even"):
            out.append(make_spec("group_compact", group=g, n=n))
            out.append(make_spec("algebra_compact", group=g, n=n))
        for g in ("sl", "sp", "so_even", "so_odd"):
            if g == "sl" and n < 2:
                continue
            out.append(make_spec("group_complex", group=g, n=n))
            out.append(make_spec("algebra_complex", group=g, n=n))
    for n in (1, 2, 3, 4):
        for j in range(n // 2 + 1):
            out.append(make_spec("pseudo_algebra_gl", n=n, j=j))
            out.append(make_spec("pseudo_group_gl", n=n, j=j))
    for k in D.SL2R_KINDS:
        out.append(make_spec(k))
    return out


def _family_kinds():
    return ("linear", "nonlinear_noncompact", "compact", "sym_space_noncompact_delta", "sym_space_compact_delta")


def _spec_label(spec: EnsembleSpec) -> str:
    p = spec.params
    parts = [spec.kind]
    for key in ("family", "group", "m", "n", "beta", "j"):
        v = getattr(p, key)
        if v is not None and not (spec.kind in D.SL2R_KINDS and key == "n"):
            parts.append(f"{key}{v}")
    return "_".join(parts)


def pointwise_suite() -> list[CheckSpec]:
    """Engine against closed form wherever both exist."""
    suite = []
    for beta in (1, 2, 4):
        for n in (2, 3, 5):
            spec = make_spec("nonlinear_noncompact", family="gl", n=n, beta=beta)
            suite.append(CheckSpec(f"dual_{_spec_label(spec)}", "pointwise_equality", spec, tolerance=Tolerance(1e-10)))
        for m, n in ((1, 1), (2, 1), (3, 2)):
            for kind in ("nonlinear_noncompact", "compact", "linear"):
                spec = make_spec(kind, family="indefinite", m=m, n=n, beta=beta)
                suite.append(CheckSpec(f"dual_{_spec_label(spec)}", "pointwise_equality", spec, tolerance=Tolerance(1e-10)))
        for n in range(1, 6):
            for kind in ("compact", "linear"):
                spec = make_spec(kind, family="gl", n=n, beta=beta)
                suite.append(CheckSpec(f"dual_{_spec_label(spec)}", "pointwise_equality", spec, tolerance=Tolerance(1e-10)))
    for n in (1, 2, 3):
        for g in ("u", "so_odd", "sp", "so_even"):
            for kind in ("group_compact", "algebra_compact"):
                spec = make_spec(kind, group=g, n=n)
                suite.append(CheckSpec(f"closed_{_spec_label(spec)}", "pointwise_equality", spec, tolerance=Tolerance(1e-10)))
        for g in ("sl", "sp", "so_even", "so_odd"):
            if g == "sl" and n < 2:
                continue
            for kind in ("group_complex", "algebra_complex"):
                spec = make_spec(kind, group=g, n=n)
                suite.append(CheckSpec(f"closed_{_spec_label(spec)}", "pointwise_equality", spec, tolerance=Tolerance(1e-10)))
    for n in (2, 3, 4):
        for j in range(n // 2 + 1):
            for kind in ("pseudo_algebra_gl", "pseudo_group_gl"):
                spec = make_spec(kind, n=n, j=j)
                suite.append(CheckSpec(f"closed_{_spec_label(spec)}", "pointwise_equality", spec, tolerance=Tolerance(1e-10)))
    for k in D.SL2R_KINDS:
        suite.append(CheckSpec(f"exact_{k}", "pointwise_equality", make_spec(k), num_points=100, tolerance=Tolerance(1e-15)))
    return suite


def invariance_suite() -> list[CheckSpec]:
    suite = []
    for spec in density_kind_catalog():
        label = _spec_label(spec)
        suite.append(CheckSpec(f"weyl_{label}", "invariance", spec, tolerance=Tolerance(1e-12)))
        if spec.datum is not None and spec.kind not in ("group_complex",):
            suite.append(CheckSpec(f"walls_{label}", "wall_vanishing", spec))
    return suite


def structure_suite() -> list[CheckSpec]:
    suite = []
    for beta in (1, 2, 4):
        for n in (2, 3):
            for spec in (
                make_spec("linear", family="gl", n=n, beta=beta, envelope=Envelope.gaussian_trace(0.5)),
                make_spec("compact", family="gl", n=n, beta=beta),
            ):
                suite.append(CheckSpec(f"structure_{_spec_label(spec)}", "structure", spec, num_points=200, tolerance=Tolerance(1e-10)))
        for m, n in ((1, 1), (2, 1), (3, 2)):
            for spec in (
                make_spec("linear", family="indefinite", m=m, n=n, beta=beta, envelope=Envelope.gaussian_hs(0.5)),
                make_spec("sym_space_compact_delta", family="indefinite", m=m, n=n, beta=beta),
            ):
                suite.append(CheckSpec(f"structure_{_spec_label(spec)}", "structure", spec, num_points=200, tolerance=Tolerance(1e-10)))
    for n in (1, 2, 3):
        for g in ("u", "so_odd", "sp", "so_even"):
            for spec in (
                make_spec("group_compact", group=g, n=n),
                make_spec("algebra_compact", group=g, n=n, envelope=Envelope.gaussian_hs(0.5)),
            ):
                suite.append(CheckSpec(f"structure_{_spec_label(spec)}", "structure", spec, num_points=200, tolerance=Tolerance(1e-10)))
    return suite


def default_suite() -> list[CheckSpec]:
    """Everything the acceptance gate covers except CLI determinism."""
    return pointwise_suite() + invariance_suite() + structure_suite() + mc_suite()
