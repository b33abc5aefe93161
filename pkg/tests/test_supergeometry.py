import random
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import R11, R20, R21, R22, charts, parities, rand_sf, rand_vf, rngs, sf, vf
from superfedosov.corpus import build_instance, darboux_form, random_one_form
from superfedosov.errors import DegenerateFormError, HomogeneityError, InvariantError, SignatureError
from superfedosov.fedosov import fedosov_correct, random_cochain, s_from_cochain
from superfedosov.superscalar import Parity, sign
from superfedosov.supergeometry import (
    BilinearForm,
    Chart,
    Connection,
    TwoForm,
    VectorField,
    apply,
    closedness_residuals,
    covariant_derivative,
    covariant_derivative_bilinear,
    d_one_form,
    form_eval,
    is_closed,
    lie_bracket,
    solve_against_omega,
    torsion,
)


def gram(chart, entries, parity=Parity.EVEN):
    """Gram matrix from {(i, j): text}, completed by graded antisymmetry."""
    n = chart.dim
    g = [[chart.zero()] * n for _ in range(n)]
    for (i, j), t in entries.items():
        v = sf(chart, t)
        g[i][j] = v
        g[j][i] = v.scale(-sign(chart.parity(i) * chart.parity(j)))
    return BilinearForm(chart, tuple(map(tuple, g)), parity)


def christoffel(chart, entries):
    n = chart.dim
    t = [[[chart.zero()] * n for _ in range(n)] for _ in range(n)]
    for (i, j, k), text in entries.items():
        t[i][j][k] = sf(chart, text)
    return Connection(chart, t)


def test_chart_rejects_bad_names():
    with pytest.raises(ValueError):
        Chart((("x", Parity.EVEN), ("x", Parity.ODD)))
    with pytest.raises(ValueError):
        Chart((("1x", Parity.EVEN),))


def test_chart_with_interleaved_parities():
    chart = Chart((("t", Parity.ODD), ("u", Parity.EVEN), ("s", Parity.ODD)))
    assert (chart.p, chart.q) == (1, 2)
    assert chart.slot_names() == ("u", "t", "s")
    assert sf(chart, "s*t") == -sf(chart, "t*s")
    assert chart.partial(sf(chart, "u^2*t"), 1) == sf(chart, "2*u*t")


# ---------------------------------------------------------------------------
# apply / lie_bracket


def test_apply_examples():
    assert apply(R20.basis(0), sf(R20, "x1^2")) == sf(R20, "2*x1")
    X = vf(R22, "th1", "0", "0", "0")
    assert apply(X, sf(R22, "x1*th2")) == sf(R22, "th1*th2")
    assert apply(R22.basis(2), sf(R22, "th1*th2")) == sf(R22, "th2")


def test_lie_bracket_examples():
    d1 = R11.basis(0)
    dth = R11.basis(1)
    assert lie_bracket(d1, vf(R11, "x1", "0")) == d1
    assert lie_bracket(dth, vf(R11, "th1", "0")) == d1
    assert lie_bracket(dth, dth).is_zero()


def test_lie_bracket_rejects_mixed():
    mixed = vf(R11, "1", "1")
    with pytest.raises(HomogeneityError):
        lie_bracket(mixed, R11.basis(0))


@given(charts, parities, parities, rngs)
def test_bracket_graded_antisymmetry(chart, px, py, rng):
    X, Y = rand_vf(chart, px, rng), rand_vf(chart, py, rng)
    assert lie_bracket(X, Y) == -sign(px * py) * lie_bracket(Y, X)


@given(charts, parities, parities, parities, rngs)
def test_bracket_super_jacobi(chart, px, py, pz, rng):
    X, Y, Z = rand_vf(chart, px, rng), rand_vf(chart, py, rng), rand_vf(chart, pz, rng)
    # (-1)^{|X||Z|}[X,[Y,Z]] + (-1)^{|Y||X|}[Y,[Z,X]] + (-1)^{|Z||Y|}[Z,[X,Y]] = 0
    total = (
        sign(px * pz) * lie_bracket(X, lie_bracket(Y, Z))
        + sign(py * px) * lie_bracket(Y, lie_bracket(Z, X))
        + sign(pz * py) * lie_bracket(Z, lie_bracket(X, Y))
    )
    assert total.is_zero()


@given(charts, parities, parities, rngs)
def test_bracket_is_commutator_of_derivations(chart, px, py, rng):
    X, Y = rand_vf(chart, px, rng), rand_vf(chart, py, rng)
    f = rand_sf(chart, Parity.ODD if rng.random() < 0.5 else Parity.EVEN, rng)
    lhs = apply(lie_bracket(X, Y), f)
    rhs = apply(X, apply(Y, f)) - apply(Y, apply(X, f)).scale(sign(px * py))
    assert lhs == rhs


# ---------------------------------------------------------------------------
# bilinear forms


def test_form_eval_examples():
    w = gram(R20, {(0, 1): "1"})
    assert form_eval(w, R20.basis(0), R20.basis(1)) == R20.constant(1)
    assert form_eval(w, vf(R20, "x1", "0"), R20.basis(1)) == sf(R20, "x1")
    odd = gram(R11, {(0, 1): "1"}, Parity.ODD)
    assert form_eval(odd, R11.basis(1), R11.basis(0)) == R11.constant(-1)


def test_bilinear_form_rejects_wrong_entry_parity():
    with pytest.raises(InvariantError):
        gram(R21, {(0, 2): "1"})


@given(parities, parities, parities, rngs)
def test_form_eval_bilinearity_signs(pf, px, py, rng):
    w = build_instance(rng.randrange(9), rng.randrange(1000)).omega
    chart = w.chart
    X, Y = rand_vf(chart, px, rng), rand_vf(chart, py, rng)
    f = rand_sf(chart, pf, rng)
    gp = int(w.parity)
    assert form_eval(w, f * X, Y) == (f * form_eval(w, X, Y)).scale(sign(pf * gp))
    assert form_eval(w, X, f * Y) == (f * form_eval(w, X, Y)).scale(sign(pf * (gp + px)))


def test_two_form_invariants():
    with pytest.raises(InvariantError) as e:
        TwoForm.from_form(gram(R21, {(0, 1): "1", (2, 2): "1+x1"}))
    assert e.value.indices == (0, 2, 2)
    with pytest.raises(DegenerateFormError):
        TwoForm.from_form(gram(R21, {(2, 2): "1"}))
    n = R20.dim
    bad = [[R20.zero()] * n for _ in range(n)]
    bad[0][1] = sf(R20, "1")
    with pytest.raises(InvariantError):
        TwoForm(R20, tuple(map(tuple, bad)))


def test_is_closed_examples():
    ok, res = is_closed(gram(R20, {(0, 1): "1+x1*x2^3"}))
    assert ok and not res
    ok, res = is_closed(gram(R21, {(0, 1): "1+x1", (2, 2): "1"}))
    assert ok
    ok, res = is_closed(gram(R21, {(0, 1): "1", (2, 2): "1+x1"}))
    assert not ok
    assert res[(0, 2, 2)] == R21.constant(1)


def test_d_one_form_examples():
    d = d_one_form(R20, (R20.zero(), sf(R20, "x1")), Parity.EVEN)
    assert d.gram[0][1] == R20.constant(1)
    assert d.gram[1][0] == R20.constant(-1)
    z = d_one_form(R21, (R21.zero(),) * 3, Parity.EVEN)
    assert all(v.is_zero() for row in z.gram for v in row)


@given(charts, parities, rngs)
def test_d_squared_is_zero(chart, par, rng):
    alpha = random_one_form(chart, par, 3, rng)
    d = d_one_form(chart, alpha, par)
    assert is_closed(d)[0]
    # d of the exact form (df)_j = (-1)^{|f||j|} d_j f vanishes
    f = rand_sf(chart, par, rng, degree=3)
    df = tuple(chart.partial(f, j).scale(sign(par * chart.parity(j))) for j in range(chart.dim))
    assert all(v.is_zero() for row in d_one_form(chart, df, par).gram for v in row)


def test_d_one_form_rejects_wrong_parity():
    with pytest.raises(HomogeneityError):
        d_one_form(R21, (sf(R21, "th1"), R21.zero(), R21.zero()), Parity.EVEN)


def test_solve_against_omega_examples():
    w = TwoForm.from_form(gram(R20, {(0, 1): "1"}))
    V = solve_against_omega(w, [R20.zero(), R20.constant(1)], Parity.EVEN)
    assert V == R20.basis(0)
    w = TwoForm.from_form(gram(R20, {(0, 1): "1+x1"}))
    V = solve_against_omega(w, [R20.zero(), R20.constant(1)], Parity.EVEN)
    assert V == vf(R20, "1/(1+x1)", "0")
    degenerate = gram(R20, {})
    with pytest.raises(DegenerateFormError):
        solve_against_omega(degenerate, [R20.zero(), R20.constant(1)], Parity.EVEN)


@given(st.integers(0, 8), st.integers(0, 10**6), parities, rngs)
def test_solve_substitutes_back(shape, seed, par, rng):
    w = build_instance(shape, seed).omega
    chart = w.chart
    V0 = rand_vf(chart, par, rng)
    targets = [form_eval(w, V0, chart.basis(k)) for k in range(chart.dim)]
    V = solve_against_omega(w, targets, par)
    assert V == V0


# ---------------------------------------------------------------------------
# connections


def test_covariant_derivative_examples():
    d1 = R21.basis(0)
    flat = Connection.flat(R21)
    assert covariant_derivative(flat, d1, vf(R21, "x1", "0", "0")) == d1
    C = christoffel(R20, {(0, 0, 0): "2/(3*(1+x1))"})
    assert covariant_derivative(C, R20.basis(0), R20.basis(0)) == vf(R20, "2/(3*(1+x1))", "0")
    assert covariant_derivative(Connection.flat(R11), R11.basis(1), vf(R11, "th1", "0")) == R11.basis(0)


def test_torsion_examples():
    assert torsion(Connection.flat(R20), R20.basis(0), R20.basis(1)).is_zero()
    C = christoffel(R20, {(0, 1, 0): "1"})
    assert torsion(C, R20.basis(0), R20.basis(1)) == R20.basis(0)
    C = christoffel(R11, {(1, 1, 0): "x1^2+3"})
    assert torsion(C, R11.basis(1), R11.basis(1)) == vf(R11, "2*x1^2+6", "0")


def test_connection_rejects_odd_christoffel():
    with pytest.raises(InvariantError):
        christoffel(R21, {(0, 0, 0): "th1"})


def random_even_connection(chart, rng, symmetric=False):
    n = chart.dim
    t = [[[chart.zero()] * n for _ in range(n)] for _ in range(n)]
    for i, j, k in product(range(n), repeat=3):
        if symmetric and j < i:
            continue
        par = chart.parity(i) + chart.parity(j) + chart.parity(k)
        t[i][j][k] = rand_sf(chart, par, rng, degree=1)
        if symmetric:
            t[j][i][k] = t[i][j][k].scale(sign(chart.parity(i) * chart.parity(j)))
    if symmetric:
        for i in range(n):
            if chart.parity(i) is Parity.ODD:
                t[i][i] = [chart.zero()] * n
    return Connection(chart, t)


@given(charts, parities, parities, parities, rngs)
def test_connection_axioms(chart, pf, px, py, rng):
    C = random_even_connection(chart, rng)
    X, Y, X2 = rand_vf(chart, px, rng), rand_vf(chart, py, rng), rand_vf(chart, px, rng)
    f = rand_sf(chart, pf, rng, rational=True)
    nab = lambda A, B: covariant_derivative(C, A, B)  # noqa: E731
    assert nab(X + X2, Y) == nab(X, Y) + nab(X2, Y)
    assert nab(X, Y + Y) == nab(X, Y) + nab(X, Y)
    assert nab(f * X, Y) == f * nab(X, Y)
    assert nab(X, f * Y) == apply(X, f) * Y + sign(px * pf) * (f * nab(X, Y))


@given(charts, parities, parities, rngs)
def test_torsion_is_tensorial(chart, px, py, rng):
    C = random_even_connection(chart, rng)
    X, Y = rand_vf(chart, px, rng), rand_vf(chart, py, rng)
    n = chart.dim
    table = [[torsion(C, chart.basis(i), chart.basis(j)).components for j in range(n)] for i in range(n)]
    from superfedosov.supergeometry import Tensor21

    assert torsion(C, X, Y) == Tensor21(chart, table)(X, Y)


@given(charts, rngs)
def test_symmetric_iff_torsion_free(chart, rng):
    for symmetric in (True, False):
        C = random_even_connection(chart, rng, symmetric=symmetric)
        torsion_free = all(
            torsion(C, chart.basis(i), chart.basis(j)).is_zero()
            for i, j in product(range(chart.dim), repeat=2)
        )
        assert torsion_free == C.is_symmetric


def test_covariant_derivative_bilinear_examples():
    w = TwoForm.from_form(gram(R20, {(0, 1): "1+x1"}))
    flat = Connection.flat(R20)
    e = [R20.basis(i) for i in range(2)]
    assert covariant_derivative_bilinear(flat, w, e[0], e[0], e[1]) == R20.constant(1)
    const = darboux_form(R22, Parity.EVEN)
    for i, j, k in product(range(4), repeat=3):
        b = [R22.basis(t) for t in (i, j, k)]
        assert covariant_derivative_bilinear(Connection.flat(R22), const, *b).is_zero()
    C = fedosov_correct(flat, w)
    assert covariant_derivative_bilinear(C, w, e[0], e[0], e[1]).is_zero()


def cyclic_nabla(C, w, i, j, k):
    chart = w.chart
    gp = int(w.parity)
    pi, pj, pk = (int(chart.parity(t)) for t in (i, j, k))
    e = [chart.basis(t) for t in range(chart.dim)]
    return (
        covariant_derivative_bilinear(C, w, e[i], e[j], e[k]).scale(sign(gp * pi))
        - covariant_derivative_bilinear(C, w, e[j], e[i], e[k]).scale(sign(pj * (gp + pi)))
        + covariant_derivative_bilinear(C, w, e[k], e[i], e[j]).scale(sign(pk * (gp + pi + pj)))
    )


@given(st.integers(0, 8), st.integers(0, 10**6), rngs)
def test_palais_identity(shape, seed, rng):
    """Cyclic sum of nabla w vanishes for symmetric connections and closed w."""
    w = build_instance(shape, seed).omega
    C = random_even_connection(w.chart, rng, symmetric=True)
    triples = list(product(range(w.chart.dim), repeat=3))
    for i, j, k in rng.sample(triples, min(len(triples), 12)):
        assert cyclic_nabla(C, w, i, j, k).is_zero(), (i, j, k)


def test_palais_sum_is_closedness_residual_for_flat():
    w = gram(R21, {(0, 1): "1", (2, 2): "1+x1"})
    flat = Connection.flat(R21)
    res = closedness_residuals(w)
    for i, j, k in product(range(3), repeat=3):
        assert cyclic_nabla(flat, w, i, j, k) == res.get((i, j, k), R21.zero())


def test_signature_mismatch():
    with pytest.raises(SignatureError):
        VectorField(R20, (R20.zero(),))
    with pytest.raises(SignatureError):
        apply(R20.basis(0), R21.constant(1))


def test_random_deformation_of_curved_base():
    # a user-supplied symmetric base connection works as well as the flat one
    rng = random.Random(3)
    w = build_instance(2, 7).omega
    C0 = random_even_connection(w.chart, rng, symmetric=True)
    C = fedosov_correct(C0, w)
    S = s_from_cochain(w, random_cochain(w.chart, w.parity, 1, 5))
    from superfedosov.fedosov import verify_symplectic

    assert verify_symplectic(C, w).passed
    assert verify_symplectic(C + S, w).passed
