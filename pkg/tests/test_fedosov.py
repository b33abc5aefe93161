import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import R20, R21, rand_sf, rand_vf, rngs, sf, vf
from superfedosov.corpus import SHAPES, build_instance, darboux_form
from superfedosov.errors import PreconditionError
from superfedosov.fedosov import (
    SCochain,
    STensor,
    check_admissible,
    deform,
    extract_n,
    fedosov_correct,
    graded_symmetrize,
    koszul_sign,
    n_identity_residuals,
    random_cochain,
    s_from_cochain,
    verify_symplectic,
)
from superfedosov.superscalar import Parity, sign
from superfedosov.supergeometry import (
    Chart,
    Connection,
    Tensor21,
    TwoForm,
    apply,
    covariant_derivative,
)
from test_supergeometry import gram, random_even_connection


def omega_r20():
    return TwoForm.from_form(gram(R20, {(0, 1): "1+x1"}))


def table(chart, entries):
    n = chart.dim
    t = [[[chart.zero()] * n for _ in range(n)] for _ in range(n)]
    for (i, j, k), text in entries.items():
        t[i][j][k] = sf(chart, text)
    return t


# ---------------------------------------------------------------------------
# extract_n / fedosov_correct


def test_extract_n_constant_form_is_zero():
    w = TwoForm.from_form(darboux_form(Chart.standard(2, 2), Parity.EVEN))
    N = extract_n(Connection.flat(w.chart), w)
    assert N == Tensor21.zero(w.chart)
    assert fedosov_correct(Connection.flat(w.chart), w) == Connection.flat(w.chart)


def test_extract_n_hand_example():
    N = extract_n(Connection.flat(R20), omega_r20())
    expected = Tensor21(R20, table(R20, {(0, 0, 0): "1/(1+x1)", (0, 1, 1): "1/(1+x1)"}))
    assert N == expected
    assert N.at(0, 0) == vf(R20, "1/(1+x1)", "0")


def test_extract_n_superextension():
    w = TwoForm.from_form(gram(R21, {(0, 1): "1+x1", (2, 2): "1"}))
    N = extract_n(Connection.flat(R21), w)
    expected = Tensor21(R21, table(R21, {(0, 0, 0): "1/(1+x1)", (0, 1, 1): "1/(1+x1)"}))
    assert N == expected


def test_extract_n_rejects_asymmetric_base():
    C = Connection(R20, table(R20, {(0, 1, 0): "1"}))
    with pytest.raises(PreconditionError):
        extract_n(C, omega_r20())


def test_fedosov_hand_example():
    C = fedosov_correct(Connection.flat(R20), omega_r20())
    expected = Connection(
        R20, table(R20, {(0, 0, 0): "2/(3*(1+x1))", (0, 1, 1): "1/(3*(1+x1))", (1, 0, 1): "1/(3*(1+x1))"})
    )
    assert C == expected
    assert verify_symplectic(C, omega_r20()).passed


def test_verify_reports_flat_failure():
    rep = verify_symplectic(Connection.flat(R20), omega_r20())
    assert not rep.passed
    assert rep["torsion"].passed
    comp = rep["compatibility"]
    assert not comp.passed
    assert comp.indices == (0, 0, 1)
    assert comp.residual == R20.constant(1)


def test_verify_constant_form_flat_passes():
    w = TwoForm.from_form(darboux_form(Chart.standard(2, 1), Parity.EVEN))
    assert verify_symplectic(Connection.flat(w.chart), w).passed


@pytest.mark.parametrize("shape", range(len(SHAPES)))
def test_existence_on_each_shape(shape):
    w = build_instance(shape, 2024).omega
    N = extract_n(Connection.flat(w.chart), w)
    anti, cyclic = n_identity_residuals(N, w)
    assert all(r.is_zero() for r in anti.values())
    assert all(r.is_zero() for r in cyclic.values())
    C = fedosov_correct(Connection.flat(w.chart), w, N)
    assert C.is_symmetric
    assert verify_symplectic(C, w).passed


def test_cyclic_identity_needs_closedness():
    # without closedness the cyclic identity fails while antisymmetry survives
    g = gram(R21, {(0, 1): "1", (2, 2): "1+x1"})
    N = extract_n(Connection.flat(R21), g)
    anti, cyclic = n_identity_residuals(N, g)
    assert all(r.is_zero() for r in anti.values())
    assert any(not r.is_zero() for r in cyclic.values())


@given(st.integers(0, 8), st.integers(0, 10**6), rngs)
def test_corrected_connection_satisfies_axioms(shape, seed, rng):
    w = build_instance(shape, seed).omega
    chart = w.chart
    C = fedosov_correct(Connection.flat(chart), w)
    px, pf = rng.choice([Parity.EVEN, Parity.ODD]), rng.choice([Parity.EVEN, Parity.ODD])
    X, Y = rand_vf(chart, px, rng, 1), rand_vf(chart, rng.choice([Parity.EVEN, Parity.ODD]), rng, 1)
    f = rand_sf(chart, pf, rng, 1)
    assert covariant_derivative(C, f * X, Y) == f * covariant_derivative(C, X, Y)
    assert covariant_derivative(C, X, f * Y) == apply(X, f) * Y + sign(px * pf) * (
        f * covariant_derivative(C, X, Y)
    )


def test_user_supplied_base_connection():
    rng = random.Random(11)
    w = build_instance(1, 3).omega
    C0 = random_even_connection(w.chart, rng, symmetric=True)
    assert verify_symplectic(fedosov_correct(C0, w), w).passed


# ---------------------------------------------------------------------------
# cochains and S-tensors


def test_koszul_sign():
    assert koszul_sign((1, 1, 0), (1, 0, 2)) == -1
    assert koszul_sign((1, 0, 1), (2, 1, 0)) == -1
    assert koszul_sign((0, 0, 0), (2, 1, 0)) == 1


def test_s_from_cochain_examples():
    w = TwoForm.from_form(gram(R20, {(0, 1): "1"}))
    assert s_from_cochain(w, SCochain.zero(R20)) == Tensor21.zero(R20)
    B = SCochain(R20, table(R20, {(0, 0, 0): "1"}), Parity.EVEN)
    S = s_from_cochain(w, B)
    assert S.at(0, 0) == vf(R20, "0", "-1")
    assert isinstance(S, STensor)


def test_s_from_cochain_rejects_asymmetric():
    w = TwoForm.from_form(gram(R20, {(0, 1): "1"}))
    B = SCochain(R20, table(R20, {(0, 0, 1): "1"}), Parity.EVEN)
    with pytest.raises(PreconditionError):
        s_from_cochain(w, B)
    B = SCochain(R20, table(R20, {}), Parity.ODD)
    with pytest.raises(PreconditionError):
        s_from_cochain(w, B)


def test_check_admissible_examples():
    w = TwoForm.from_form(gram(R20, {(0, 1): "1"}))
    assert check_admissible(w, Tensor21.zero(R20)).passed
    S = s_from_cochain(w, random_cochain(R20, Parity.EVEN, 2, 1))
    assert check_admissible(w, S).passed
    bad = Tensor21(R20, table(R20, {(0, 1, 0): "1"}))
    rep = check_admissible(w, bad)
    assert not rep["supersymmetry"].passed


def test_deform_examples():
    w = omega_r20()
    C = fedosov_correct(Connection.flat(R20), w)
    assert deform(C, Tensor21.zero(R20)) == C
    S = s_from_cochain(w, random_cochain(R20, Parity.EVEN, 1, 9))
    assert verify_symplectic(deform(C, S), w).passed
    bad = Tensor21(R20, table(R20, {(0, 1, 0): "1"}))
    rep = verify_symplectic(deform(C, bad), w)
    assert not rep["torsion"].passed


def test_random_cochain_determinism_and_symmetry():
    chart = Chart.standard(2, 2)
    a = random_cochain(chart, Parity.ODD, 2, 42)
    b = random_cochain(chart, Parity.ODD, 2, 42)
    assert a.components == b.components
    assert not a.symmetry_residuals()
    assert random_cochain(chart, Parity.ODD, 2, 43).components != a.components
    with pytest.raises(ValueError):
        random_cochain(chart, Parity.ODD, -1, 0)


def test_random_cochain_pure_odd_line_vanishes():
    chart = Chart.standard(0, 1)
    for seed in range(20):
        B = random_cochain(chart, Parity.EVEN, 3, seed)
        assert B[0, 0, 0].is_zero()


@given(st.integers(0, 8), st.integers(0, 10**6), st.integers(0, 10**6))
def test_graded_symmetrize_is_projection(shape, seed, cseed):
    chart = build_instance(shape, seed).chart
    B = random_cochain(chart, Parity.EVEN, 1, cseed)
    assert graded_symmetrize(chart, B.components) == B.components


# ---------------------------------------------------------------------------
# the affine space


@given(st.integers(0, 8), st.integers(0, 10**6), st.integers(0, 10**6))
def test_affine_structure(shape, seed, cseed):
    w = build_instance(shape, seed).omega
    chart = w.chart
    C = fedosov_correct(Connection.flat(chart), w)
    C2 = deform(C, s_from_cochain(w, random_cochain(chart, w.parity, 1, cseed)))
    assert check_admissible(w, C2 - C).passed
    t = random.Random(cseed).choice([Fraction(1, 2), Fraction(-1), Fraction(2), Fraction(-3, 7)])
    assert verify_symplectic(C2.affine_combination(C, t), w).passed


def random_supersymmetric_tensor(chart, rng):
    n = chart.dim
    t = [[[chart.zero()] * n for _ in range(n)] for _ in range(n)]
    for i, j, k in product(range(n), repeat=3):
        if j < i:
            continue
        par = chart.parity(i) + chart.parity(j) + chart.parity(k)
        t[i][j][k] = rand_sf(chart, par, rng, degree=1)
        t[j][i][k] = t[i][j][k].scale(sign(chart.parity(i) * chart.parity(j)))
    for i in range(n):
        if chart.parity(i) is Parity.ODD:
            t[i][i] = [chart.zero()] * n
    return Tensor21(chart, t)


@given(st.integers(0, 8), st.integers(0, 10**6), rngs)
def test_deformation_sound_and_complete(shape, seed, rng):
    """deform(C, S) is symplectic exactly when S is admissible."""
    w = build_instance(shape, seed).omega
    chart = w.chart
    C = fedosov_correct(Connection.flat(chart), w)
    kind = rng.randrange(3)
    if kind == 0:
        S = s_from_cochain(w, random_cochain(chart, w.parity, 1, rng.randrange(10**6)))
    elif kind == 1:
        S = random_supersymmetric_tensor(chart, rng)
    else:
        n = chart.dim
        raw = [[[rand_sf(chart, chart.parity(i) + chart.parity(j) + chart.parity(k), rng, 1) for k in range(n)]
                for j in range(n)] for i in range(n)]
        S = Tensor21(chart, raw)
    assert verify_symplectic(deform(C, S), w).passed == check_admissible(w, S).passed
