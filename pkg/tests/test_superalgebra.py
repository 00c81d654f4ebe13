import numpy as np
import pytest

from artifact.grassmann import inv
from artifact.lightcone import act, to_matrix
from artifact.superalgebra import (GroupElement, SuperMatrix, SuperMatrixError, compose, make_generator,
                                   project_sl2, psi_conjugate, sdet, sinv, smul, str_, token_matrix,
                                   word_from_text, word_to_text, _psi_conj)
from artifact.verification import GENERATOR_KINDS

from conftest import NGEN


def test_identity_is_neutral(draws):
    M = draws.token_word(4).mat
    I = SuperMatrix.identity(NGEN)
    assert smul(I, M).max_diff(M) == 0.0
    assert smul(M, I).max_diff(M) == 0.0


def test_unipotent_u_adds(draws):
    a, b = draws.odd(), draws.odd()
    U = lambda x: make_generator("U", x, ngen=NGEN).mat
    assert smul(U(a), U(b)).max_diff(U(a + b)) < 1e-12


def test_ucal_inverse_pair(draws):
    t1, t2 = draws.odd(), draws.odd()
    U = make_generator("Ucal", t1, t2, ngen=NGEN).mat
    Ui = make_generator("Ucalinv", t1, t2, ngen=NGEN).mat
    assert smul(U, Ui).max_diff(SuperMatrix.identity(NGEN)) < 1e-12


def test_prime_matrix_is_j_times_ucal_inverse(draws):
    t1, t2 = draws.odd(), draws.odd()
    P = make_generator("P", t1, t2, ngen=NGEN).mat
    J = make_generator("J", ngen=NGEN).mat
    Ui = make_generator("Ucalinv", t1, t2, ngen=NGEN).mat
    assert P.max_diff(smul(J, Ui)) < 1e-12
    want = SuperMatrix([[t1 * t2 * 0.5 - 1, t1, 1], [-t2, 1, 0], [-1, 0, 0]], NGEN)
    assert P.max_diff(want) < 1e-12


def test_sdet_examples(g):
    a, f, d = 2.0 + g[0] * g[1], 3.0 - g[2] * g[3], 0.5 + g[1] * g[4]
    D = SuperMatrix([[a, 0, 0], [0, f, 0], [0, 0, d]], NGEN)
    assert (sdet(D) - a * d * inv(f)).max_abs() < 1e-12
    assert (sdet(make_generator("J", ngen=NGEN).mat) - 1.0).max_abs() == 0.0
    assert (sdet(SuperMatrix.identity(NGEN)) - 1.0).max_abs() == 0.0


def test_supertrace_examples(draws):
    assert (str_(SuperMatrix.identity(NGEN)) - 1.0).max_abs() == 0.0
    assert (str_(SuperMatrix([[1, 0, 0], [0, 0, 0], [0, 0, 0]], NGEN)) - 1.0).max_abs() == 0.0
    # the matrix form of any superspace vector is supertraceless
    assert str_(to_matrix(draws.special())).max_abs() < 1e-12


@pytest.mark.parametrize("kind", GENERATOR_KINDS)
def test_every_generator_has_unit_sdet(kind, draws):
    gen = draws.generator(kind)
    assert (sdet(gen.mat) - 1.0).max_abs() < 1e-12


def test_z_is_diagonal(g):
    a = 1.5 + g[0] * g[3]
    Z = make_generator("Z", a, ngen=NGEN)
    want = SuperMatrix([[a, 0, 0], [0, a * a, 0], [0, 0, a]], NGEN)
    assert Z.mat.max_diff(want) == 0.0


def test_psi_is_a_flag():
    P = make_generator("Psi", ngen=NGEN)
    assert P.psi == 1 and P.mat.max_diff(SuperMatrix.identity(NGEN)) == 0.0
    PP = compose(P, P)
    assert PP.psi == 0 and PP.mat.max_diff(SuperMatrix.identity(NGEN)) == 0.0


def test_psi_z_acts_like_z_inverse_psi(draws):
    a = draws.positive()
    lhs = compose(make_generator("Psi", ngen=NGEN), make_generator("Z", a, ngen=NGEN))
    rhs = compose(make_generator("Z", inv(a), ngen=NGEN), make_generator("Psi", ngen=NGEN))
    for _ in range(5):
        M = draws.special()
        assert act(lhs, M).max_diff(act(rhs, M)) < 1e-12


def test_j_squared_is_z_minus_one():
    J = make_generator("J", ngen=NGEN)
    assert compose(J, J).mat.max_diff(make_generator("Z", -1.0, ngen=NGEN).mat) == 0.0


@pytest.mark.parametrize("kind", GENERATOR_KINDS)
def test_conjugation_table_matches_matrix_rule(kind, draws):
    gen = draws.generator(kind)
    tok = gen.word[0]
    assert token_matrix(_psi_conj(tok), NGEN).max_diff(psi_conjugate(gen.mat)) < 1e-12


def test_projection_examples(g):
    assert np.allclose(project_sl2(make_generator("Psi", ngen=NGEN)), np.eye(2))
    assert np.allclose(project_sl2(make_generator("Z", -1.0, ngen=NGEN)), -np.eye(2))
    b = 0.7 + g[0] * g[1]
    assert np.allclose(project_sl2(make_generator("W", b, ngen=NGEN)), [[1, 0.7], [0, 1]])


def test_projection_is_a_homomorphism(draws):
    for _ in range(10):
        x, y = draws.token_word(4), draws.token_word(4)
        assert np.allclose(project_sl2(compose(x, y)), project_sl2(x) @ project_sl2(y), atol=1e-10)


def test_inverse_word(draws):
    for _ in range(10):
        x = draws.token_word(6)
        e = compose(x, x.inverse())
        assert e.psi == 0
        assert e.mat.max_diff(SuperMatrix.identity(NGEN)) < 1e-10
        assert smul(x.mat, sinv(x.mat)).max_diff(SuperMatrix.identity(NGEN)) < 1e-10


def test_word_text_roundtrip(draws):
    x = draws.token_word(6)
    y = GroupElement.from_word(word_from_text(word_to_text(x.word), NGEN), NGEN)
    assert y.psi == x.psi and y.mat.max_diff(x.mat) == 0.0


def test_generator_errors(draws):
    with pytest.raises(SuperMatrixError):
        make_generator("Q", ngen=NGEN)
    with pytest.raises(SuperMatrixError):
        make_generator("Da", -1.0, ngen=NGEN)
    with pytest.raises(Exception):
        make_generator("U", draws.positive(), ngen=NGEN)
    with pytest.raises(SuperMatrixError):
        make_generator("Z", 0.0, ngen=NGEN)
