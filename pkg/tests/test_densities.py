import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from genrmt import densities as D
from genrmt.densities import Envelope, make_spec
from genrmt.roots import build_complex_roots, build_group_roots, build_restricted_roots

import oracles as O

NINF = -math.inf
coord = st.floats(-3, 3, allow_nan=False)
# millesimal grid: hits walls exactly and never produces subnormal gaps
grid_coord = st.integers(-3000, 3000).map(lambda k: k / 1000)


def gl(n, beta):
    return build_restricted_roots("gl", n, beta=beta)


def bc(m, n, beta):
    return build_restricted_roots("indefinite", n, m=m, beta=beta)


# -- linear ------------------------------------------------------------------


def test_linear_examples():
    assert D.log_J_linear(gl(2, 1), [2, 0]) == pytest.approx(math.log(2))
    assert D.log_J_linear(gl(3, 2), [2, 1, 0]) == pytest.approx(math.log(4))
    assert D.log_J_linear(gl(3, 2), [1, 1, 0]) == NINF


def test_linear_length_mismatch():
    with pytest.raises(ValueError):
        D.log_J_linear(gl(2, 1), [1, 2, 3])


def test_linear_indefinite_examples():
    assert D.log_J_linear_indefinite(1, 1, 2, [3]) == pytest.approx(math.log(6))
    assert D.log_J_linear_indefinite(2, 2, 1, [2, 1]) == pytest.approx(math.log(3))
    assert D.log_J_linear_indefinite(3, 2, 1, [0, 1]) == NINF
    with pytest.raises(ValueError):
        D.log_J_linear_indefinite(1, 2, 1, [1, 2])


@given(st.lists(coord, min_size=1, max_size=5), st.sampled_from([1, 2, 4]))
def test_vandermonde_matches_oracle(x, beta):
    diffs = [abs(a - b) for i, a in enumerate(x) for b in x[i + 1:]]
    got = D.log_J_vandermonde(beta, x)
    if any(d == 0 for d in diffs):
        assert got == NINF
    else:
        assert got == pytest.approx(sum(beta * math.log(d) for d in diffs), abs=1e-10)
    ref = O.vandermonde(beta, x)
    if 1e-200 < ref < 1e200:
        assert got == pytest.approx(math.log(ref), abs=1e-10)


@given(st.lists(st.floats(0.05, 3), min_size=1, max_size=3), st.integers(0, 2), st.sampled_from([1, 2, 4]))
def test_linear_indefinite_engine_matches_oracle(x, extra, beta):
    n = len(x)
    m = n + extra
    ref = O.chiral_linear(m, n, beta, x)
    assume(ref > 1e-200)
    assert D.log_J_linear_indefinite(m, n, beta, x) == pytest.approx(math.log(ref), abs=1e-9)
    # the engine on the BC datum carries the same product
    assert D.log_J_linear(bc(m, n, beta), x) == pytest.approx(math.log(ref), abs=1e-9)


# -- nonlinear noncompact ----------------------------------------------------


def test_nonlinear_examples():
    assert D.log_J_nonlinear(gl(2, 1), [0, 0]) == NINF
    ref = 2 * math.sinh(0.5) * math.sqrt(math.cosh(1))
    # the quoted approximation 1.29468 agrees to four decimals (exact value 1.294617...)
    assert ref == pytest.approx(1.29468, abs=1e-4)
    assert D.log_J_nonlinear(gl(2, 1), [1, 0]) == pytest.approx(math.log(ref), rel=1e-14)


@given(st.floats(-4, 4).filter(lambda t: abs(t) > 1e-3))
def test_nonlinear_beta_linearity(t):
    one = D.log_J_nonlinear(gl(2, 1), [t, 0])
    four = D.log_J_nonlinear(gl(2, 4), [t, 0])
    assert four == pytest.approx(4 * (one - math.log(2)) + 4 * math.log(2), rel=1e-12, abs=1e-12)


def test_nonlinear_large_argument_is_finite():
    assert math.isfinite(D.log_J_nonlinear(gl(2, 2), [400.0, -400.0]))


def test_new_transfer_examples():
    ref = 2 ** -0.5 * (math.e - 1) * math.sqrt(math.e**-2 + 1)
    assert D.log_J_new_transfer_dualform(2, 1, [math.e, 1]) == pytest.approx(math.log(ref), rel=1e-14)
    assert ref == pytest.approx(1.29468, abs=1e-4)
    assert D.log_J_new_transfer_dualform(2, 2, [2, 1]) == pytest.approx(math.log(0.625), rel=1e-14)
    assert D.log_J_new_transfer_dualform(2, 2, [1.5, 1.5]) == NINF
    with pytest.raises(ValueError):
        D.log_J_new_transfer_dualform(2, 1, [1, -1])


@given(st.lists(st.floats(-2.5, 2.5), min_size=2, max_size=4), st.sampled_from([1, 2, 4]))
def test_new_transfer_equals_engine(x, beta):
    assume(min(abs(a - b) for i, a in enumerate(x) for b in x[i + 1:]) > 1e-2)
    n = len(x)
    eng = D.log_J_nonlinear(gl(n, beta), x)
    dual = D.log_J_new_transfer_dualform(n, beta, np.exp(x))
    assert dual == pytest.approx(eng, rel=1e-10, abs=1e-10)


def test_nonlinear_indefinite_examples():
    assert D.log_J_nonlinear_indefinite_dualform(2, 1, 1, [1.0]) == NINF
    assert D.log_J_nonlinear_indefinite_dualform(3, 2, 2, [2.0, 1.0]) == NINF
    x = 1.0
    eng = D.log_J_nonlinear(bc(1, 1, 2), [x])
    assert D.log_J_nonlinear_indefinite_dualform(1, 1, 2, [math.cosh(x)]) == pytest.approx(eng, rel=1e-12)
    with pytest.raises(ValueError):
        D.log_J_nonlinear_indefinite_dualform(1, 1, 2, [0.5])


@given(st.lists(st.floats(0.05, 2.5), min_size=1, max_size=3), st.integers(0, 2), st.sampled_from([1, 2, 4]))
def test_nonlinear_indefinite_dualform_equals_engine(x, extra, beta):
    n = len(x)
    assume(all(abs(a - b) > 1e-2 for i, a in enumerate(x) for b in x[i + 1:]))
    m = n + extra
    eng = D.log_J_nonlinear(bc(m, n, beta), x)
    dual = D.log_J_nonlinear_indefinite_dualform(m, n, beta, np.cosh(x))
    assert dual == pytest.approx(eng, rel=1e-10, abs=1e-10)


# -- compact ---------------------------------------------------------------


def test_compact_examples():
    assert D.log_J_compact(gl(2, 2), [0, 0]) == NINF
    assert D.log_J_compact(gl(2, 2), [0, math.pi]) == pytest.approx(math.log(4))


@given(st.lists(coord, min_size=2, max_size=4), st.integers(0, 3), st.sampled_from([1, 2, 4]))
def test_compact_periodic(x, k, beta):
    k = k % len(x)
    d = gl(len(x), beta)
    shifted = list(x)
    shifted[k] += 2 * math.pi
    assume(O.min_root_distance(O.a_roots(len(x), 1), x, 2 * math.pi) > 1e-6)
    a, b = D.log_J_compact(d, x), D.log_J_compact(d, shifted)
    if a == NINF:
        assert b == NINF
    else:
        assert b == pytest.approx(a, abs=1e-9)


def test_circular_examples():
    assert D.log_J_circular_dualform(2, 2, [0, math.pi]) == pytest.approx(math.log(4))
    assert D.log_J_circular_dualform(3, 2, [0.3, 0.3, 1.0]) == NINF
    eq = [0, 2 * math.pi / 3, 4 * math.pi / 3]
    assert D.log_J_circular_dualform(3, 1, eq) == pytest.approx(1.5 * math.log(3), rel=1e-12)


@given(st.lists(coord, min_size=2, max_size=5), st.sampled_from([1, 2, 4]))
def test_circular_equals_compact_engine(x, beta):
    n = len(x)
    assume(O.min_root_distance(O.a_roots(n, 1), x, 2 * math.pi) > 1e-6)
    ref = O.vandermonde(beta, [cmath.exp(1j * v) for v in x])
    assert D.log_J_circular_dualform(n, beta, x) == pytest.approx(math.log(ref), abs=1e-9)
    assert D.log_J_compact(gl(n, beta), x) == pytest.approx(math.log(ref), abs=1e-9)


def test_jacobi_examples():
    assert D.log_J_jacobi(1, 1, 2, [0.0]) == pytest.approx(math.log(2))
    assert D.log_J_jacobi(2, 1, 2, [1.0]) == NINF
    a = 0.3
    assert D.log_J_jacobi(1, 1, 2, [a]) == pytest.approx(math.log(2 * math.sqrt(1 - a * a)), rel=1e-14)
    with pytest.raises(ValueError):
        D.log_J_jacobi(1, 1, 2, [1.5])


def test_jacobi_beta1_square_is_pure_interaction():
    a = [0.5, -0.2]
    n = 2
    prefactor = 2.0 ** (n * (1 * (n + 1) - 2) / 2)
    assert D.log_J_jacobi(2, 2, 1, a) == pytest.approx(math.log(prefactor * 0.7), rel=1e-13)


@given(st.lists(st.floats(0.05, 3.1), min_size=1, max_size=3), st.integers(0, 2), st.sampled_from([1, 2, 4]))
def test_jacobi_equals_compact_engine(x, extra, beta):
    n = len(x)
    assume(all(abs(a - b) > 1e-2 for i, a in enumerate(x) for b in x[i + 1:]))
    m = n + extra
    ref = 2.0 ** bc(m, n, beta).dim_l * O.root_product(O.bc_roots(m, n, beta), x, lambda t: math.sin(t / 2))
    assume(ref > 1e-200)
    assert D.log_J_compact(bc(m, n, beta), x) == pytest.approx(math.log(ref), rel=1e-10, abs=1e-10)
    assert D.log_J_jacobi(m, n, beta, np.cos(x)) == pytest.approx(math.log(ref), rel=1e-10, abs=1e-10)


# -- delta densities -------------------------------------------------------


def test_delta_examples():
    assert D.log_delta_noncompact(gl(2, 1), [0, 0]) == NINF
    assert D.log_delta_noncompact(gl(2, 1), [1, 0]) == pytest.approx(math.log(1.17520), abs=1e-5)
    assert D.log_delta_compact(gl(2, 1), [0, 0]) == NINF
    assert D.log_delta_compact(gl(2, 2), [math.pi / 4, 0]) == pytest.approx(-math.log(2))
    for x in (0.3, 1.2, 2.9):
        assert D.log_delta_compact(bc(2, 1, 1), [x]) == pytest.approx(math.log(abs(math.sin(x))))


@given(st.lists(coord, min_size=1, max_size=3), st.integers(0, 2), st.sampled_from([1, 2, 4]))
def test_delta_match_oracle(x, extra, beta):
    n = len(x)
    m = n + extra
    roots = O.bc_roots(m, n, beta)
    assume(O.min_root_distance([r for r in roots if r[1]], x, math.pi) > 1e-6)
    for fn, f in ((D.log_delta_compact, math.sin), (D.log_delta_noncompact, math.sinh)):
        ref = O.root_product(roots, x, f)
        assume(1e-200 < ref < 1e200)
        assert fn(bc(m, n, beta), x) == pytest.approx(math.log(ref), abs=1e-9, rel=1e-10)


# -- compact groups and algebras -------------------------------------------


def test_group_compact_examples():
    assert D.log_J_group_compact("u", [0, math.pi]) == pytest.approx(math.log(4))
    assert D.log_J_group_compact("so_odd", [math.pi]) == pytest.approx(math.log(4))
    assert D.log_J_group_compact("sp", [math.pi / 2]) == pytest.approx(math.log(4))
    with pytest.raises(ValueError):
        D.log_J_group_compact("spin", [0.1])


def test_algebra_compact_examples():
    assert D.log_J_algebra_compact("u", [1, 0]) == pytest.approx(0.0, abs=1e-15)
    assert D.log_J_algebra_compact_closed("sp", [1.0]) == pytest.approx(math.log(4))
    assert D.log_J_algebra_compact("sp", [1.0]) == pytest.approx(math.log(4))
    for g in ("so_odd", "sp", "so_even"):
        assert D.log_J_algebra_compact(g, [1.5, -1.5]) == NINF


GROUPS = ["u", "so_odd", "sp", "so_even"]


@settings(max_examples=200)
@given(st.sampled_from(GROUPS), st.lists(coord, min_size=1, max_size=3))
def test_group_compact_engine_closed_oracle(group, x):
    assume(O.min_root_distance(O.group_roots(group, len(x)), x, 2 * math.pi) > 1e-6)
    ref = O.compact_weyl_char(O.group_roots(group, len(x)), x)
    eng = D.log_J_group_compact(group, x)
    closed = D.log_J_group_compact_closed(group, x)
    assert eng == pytest.approx(math.log(ref), abs=1e-9)
    assert closed == pytest.approx(eng, rel=1e-10, abs=1e-10)


@settings(max_examples=200)
@given(st.sampled_from(GROUPS), st.lists(coord, min_size=1, max_size=3))
def test_algebra_compact_engine_closed_oracle(group, x):
    ref = O.root_product(O.group_roots(group, len(x)), x, lambda t: t) ** 2
    assume(ref > 1e-100)
    eng = D.log_J_algebra_compact(group, x)
    assert eng == pytest.approx(math.log(ref), abs=1e-9)
    assert D.log_J_algebra_compact_closed(group, x) == pytest.approx(eng, rel=1e-10, abs=1e-10)


# -- complex groups and algebras -------------------------------------------


def test_algebra_complex_examples():
    assert D.log_J_algebra_complex("sl", [1, -1]) == pytest.approx(4 * math.log(2))
    assert D.log_J_algebra_complex("sp", [1]) == pytest.approx(4 * math.log(2))
    assert D.log_J_algebra_complex_closed("sp", [1]) == pytest.approx(4 * math.log(2))
    assert D.log_J_algebra_complex("so_even", [1, 1]) == NINF
    with pytest.raises(ValueError):
        D.log_J_algebra_complex("sl", [1, 1])


def test_group_complex_constraints():
    with pytest.raises(ValueError):
        D.log_J_group_complex("sl", [2.0, 2.0])
    with pytest.raises(ValueError):
        D.log_J_group_complex("sp", [0.0, 1.0])
    assert math.isfinite(D.log_J_group_complex("sl", [2.0, 0.5]))


def complex_points(n):
    return st.lists(
        st.tuples(st.floats(0.3, 2.0), st.floats(-math.pi, math.pi)), min_size=n, max_size=n
    ).map(lambda v: np.array([r * cmath.exp(1j * t) for r, t in v]))


@settings(max_examples=150)
@given(st.sampled_from(["sp", "so_even", "so_odd"]), st.integers(1, 3), st.data())
def test_group_complex_engine_vs_closed(group, n, data):
    h = data.draw(complex_points(n))
    assume(O.complex_separation(h) > 1e-4)
    eng = D.log_J_group_complex(group, h)
    assume(math.isfinite(eng))
    assert D.log_J_group_complex_closed(group, h) == pytest.approx(eng, rel=1e-10, abs=1e-10)


@settings(max_examples=100)
@given(st.integers(2, 4), st.data())
def test_sl_group_engine_vs_closed(n, data):
    h = data.draw(complex_points(n))
    h[-1] = 1 / np.prod(h[:-1])
    assume(O.complex_separation(h) > 1e-4)
    eng = D.log_J_group_complex("sl", h)
    assume(math.isfinite(eng))
    assert D.log_J_group_complex_closed("sl", h) == pytest.approx(eng, rel=1e-10, abs=1e-10)


@settings(max_examples=150)
@given(st.sampled_from(["sl", "sp", "so_even", "so_odd"]), st.integers(2, 3), st.data())
def test_algebra_complex_engine_vs_closed(group, n, data):
    z = data.draw(complex_points(n))
    if group == "sl":
        z = z - z.mean()
    assume(O.complex_separation(z) > 1e-4)
    eng = D.log_J_algebra_complex(group, z)
    assume(math.isfinite(eng))
    assert D.log_J_algebra_complex_closed(group, z) == pytest.approx(eng, rel=1e-10, abs=1e-10)


def test_sp_complex_printed_exponent_differs_from_engine():
    h = np.array([1.7, 0.6 + 0.4j])
    eng = D.log_J_group_complex("sp", h)
    assert D.log_J_group_complex_closed("sp", h) == pytest.approx(eng, rel=1e-12)
    assert abs(D.log_J_sp_complex_printed(h) - eng) > 1e-3
    # for n = 1 the two exponents coincide
    h1 = np.array([1.3 + 0.2j])
    assert D.log_J_sp_complex_printed(h1) == pytest.approx(D.log_J_group_complex("sp", h1), rel=1e-12)


# -- pseudo GL and SL(2,R) ----------------------------------------------------


def test_pseudo_algebra_examples():
    assert D.log_J_pseudo_algebra_gl(2, 0, [1, 0]) == pytest.approx(0.0, abs=1e-15)
    assert D.log_J_pseudo_algebra_gl(2, 1, [0, 1]) == pytest.approx(math.log(4))
    assert D.log_J_pseudo_algebra_gl(4, 1, [0.3, 0.0, 1.0, 2.0]) == NINF
    with pytest.raises(ValueError):
        D.log_J_pseudo_algebra_gl(3, 2, [0, 1, 2])


def test_pseudo_group_examples():
    assert D.log_J_pseudo_group_gl(2, 0, [2, 0.5]) == pytest.approx(math.log(2.25))
    assert D.log_J_pseudo_group_gl(1, 0, [3.0]) == pytest.approx(0.0, abs=1e-15)
    assert D.log_J_pseudo_group_gl(2, 0, [1.5, 1.5]) == NINF
    with pytest.raises(ValueError):
        D.log_J_pseudo_group_gl(2, 0, [0.0, 1.0])


@settings(max_examples=100)
@given(st.integers(1, 5), st.data())
def test_pseudo_closed_forms_match_eigenvalue_engine(n, data):
    j = data.draw(st.integers(0, n // 2))
    x = data.draw(st.lists(st.floats(-2, 2).filter(lambda v: abs(v) > 0.05), min_size=n, max_size=n))
    a = D.log_J_pseudo_algebra_gl(n, j, x)
    assume(math.isfinite(a))
    assert D.log_J_pseudo_algebra_gl_engine(n, j, x) == pytest.approx(a, rel=1e-10, abs=1e-10)
    g = D.log_J_pseudo_group_gl(n, j, x)
    assume(math.isfinite(g))
    assert D.log_J_pseudo_group_gl_engine(n, j, x) == pytest.approx(g, rel=1e-10, abs=1e-10)


def test_sl2r_examples():
    assert D.log_J_sl2r("sl2r_alg1", 1.0) == pytest.approx(math.log(4))
    assert D.log_J_sl2r("sl2r_grp2", math.pi / 2) == pytest.approx(math.log(4))
    assert D.log_J_sl2r("sl2r_grp1", 1.0) == NINF
    with pytest.raises(ValueError):
        D.log_J_sl2r("sl2r_grp1", 0.0)


@given(st.floats(0.01, 5))
def test_sl2r_direct_forms(t):
    assert math.exp(D.log_J_sl2r("sl2r_alg1", t)) == pytest.approx(4 * t * t, rel=1e-14)
    assert math.exp(D.log_J_sl2r("sl2r_alg2", t)) == pytest.approx(4 * t * t, rel=1e-14)
    assert math.exp(D.log_J_sl2r("sl2r_grp2", t)) == pytest.approx(4 * math.sin(t) ** 2, rel=1e-13)
    if abs(t - 1) > 1e-3:
        assert math.exp(D.log_J_sl2r("sl2r_grp1", t)) == pytest.approx((t - 1 / t) ** 2, rel=1e-13)


# -- envelope and dispatch -------------------------------------------------


def test_envelope_examples():
    assert D.log_envelope(Envelope.gaussian_trace(0.5), [1, -1]) == pytest.approx(-1.0)
    assert D.log_envelope(Envelope.uniform(), [3, 4]) == 0.0
    assert D.log_envelope(Envelope.gaussian_hs(1.0), [2]) == pytest.approx(-4.0)
    assert D.log_envelope(Envelope.gaussian_trace(1.0, 2.0, 0.5), [1.0]) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        Envelope.gaussian_hs(0.0)
    with pytest.raises(ValueError):
        Envelope("gaussian_hs", 1.0, 1.0)


def test_batched_evaluation_shape():
    x = np.random.default_rng(0).normal(size=(4, 5, 3))
    out = D.log_J_linear(gl(3, 2), x)
    assert out.shape == (4, 5)
    assert out[1, 2] == pytest.approx(D.log_J_linear(gl(3, 2), x[1, 2]))


def test_make_spec_validation():
    assert len(D.KINDS) == 15
    with pytest.raises(ValueError):
        make_spec("linear", n=2, beta=1)
    with pytest.raises(ValueError):
        make_spec("pseudo_group_gl", n=3, j=2)
    with pytest.raises(ValueError):
        make_spec("nonsense")
    spec = make_spec("compact", family="indefinite", n=2, m=3, beta=2)
    assert spec.rank == 2 and spec.chart == "angle"


def test_log_J_closed_form_dispatch_uses_dual_coordinates():
    spec = make_spec("nonlinear_noncompact", family="gl", n=2, beta=1)
    x = np.array([1.0, 0.0])
    assert D.log_J(spec, np.exp(x), form="closed") == pytest.approx(D.log_J(spec, x), rel=1e-12)
    spec = make_spec("compact", family="indefinite", n=1, m=1, beta=2)
    assert D.log_J(spec, [0.0], form="closed") == pytest.approx(math.log(2))


def test_log_density_returns_pair():
    spec = make_spec("linear", family="gl", n=2, beta=1, envelope=Envelope.gaussian_trace(0.5))
    lj, lp = D.log_density(spec, [2.0, 0.0])
    assert lj == pytest.approx(math.log(2))
    assert lp == pytest.approx(-2.0)


# -- Weyl invariance on random points ---------------------------------------


def _weyl_images(family, x):
    n = len(x)
    for perm, signs in O.signed_permutations(n):
        if family == "A" and any(s < 0 for s in signs):
            continue
        if family == "D" and math.prod(signs) < 0:
            continue
        yield O.apply_signed(perm, signs, x)


@settings(max_examples=60)
@given(st.lists(grid_coord, min_size=1, max_size=3), st.sampled_from([1, 2, 4]), st.integers(0, 2))
def test_weyl_invariance_restricted(x, beta, extra):
    n = len(x)
    for datum, fn in (
        (gl(n, beta), D.log_J_linear),
        (bc(n + extra, n, beta), D.log_J_linear),
        (bc(n + extra, n, beta), D.log_J_nonlinear),
        (bc(n + extra, n, beta), D.log_J_compact),
        (bc(n + extra, n, beta), D.log_delta_compact),
    ):
        base = fn(datum, x)
        family = datum.family.value if datum.family.value in ("A", "D") else "B"
        for img in _weyl_images(family, x):
            v = fn(datum, img)
            if base == NINF:
                assert v == NINF
            else:
                assert v == pytest.approx(base, abs=1e-12, rel=1e-12)


@settings(max_examples=60)
@given(st.sampled_from(GROUPS), st.lists(grid_coord, min_size=1, max_size=3))
def test_weyl_invariance_compact_groups(group, x):
    family = build_group_roots(group, len(x)).family.value
    family = "B" if family in ("B", "C", "BC") else family
    base = D.log_J_group_compact(group, x)
    for img in _weyl_images(family, x):
        v = D.log_J_group_compact(group, img)
        assert (v == NINF) if base == NINF else v == pytest.approx(base, abs=1e-12)


def test_complex_roots_share_compact_lists():
    for g in ("sp", "so_even", "so_odd"):
        for n in (1, 2, 3):
            a = build_complex_roots(g, n)
            b = build_group_roots(g, n)
            assert a.positive_roots == b.positive_roots


@pytest.mark.parametrize("t", [1e-20, 1e-9, 3.0])
def test_tiny_angles_keep_precision_for_both_signs(t):
    for sign in (1, -1):
        v = D.log_J_group_compact("so_odd", [sign * t])
        assert v == pytest.approx(2 * math.log(2 * math.sin(t / 2)), rel=1e-12)
        d = D.log_delta_compact(bc(2, 1, 1), [sign * t])
        assert d == pytest.approx(math.log(math.sin(t)), rel=1e-12)


def test_lattice_points_are_walls():
    assert D.log_J_group_compact("u", [0.0, 2 * math.pi]) == NINF
    assert D.log_J_compact(gl(2, 2), [2 * math.pi, 0.0]) == NINF
    assert D.log_delta_compact(gl(2, 2), [math.pi, 0.0]) == NINF
