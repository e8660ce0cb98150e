"""Multivector algebra: product identities, Hodge duality, projections."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mintube import exterior as ext

DIMS = [3, 4, 5, 6]


def random_kform(rng, n, k):
    grades = np.array([bin(i).count("1") for i in range(1 << n)])
    c = np.where(grades == k, rng.standard_normal(1 << n), 0.0)
    return ext.Multivector(n, c)


def random_multivector(rng, n):
    return ext.Multivector(n, rng.standard_normal(1 << n))


# -- constructors and structure --------------------------------------------

def test_basis_vector_roundtrip():
    for n in DIMS:
        for axis in range(1, n + 1):
            v = ext.Multivector.basis_vector(n, axis).to_vector()
            expect = np.zeros(n)
            expect[axis - 1] = 1.0
            assert np.array_equal(v, expect)


def test_from_vector_grade():
    rng = np.random.default_rng(0)
    x = ext.Multivector.from_vector(rng.standard_normal(5))
    assert x.grades_present() == [1]


def test_blade_rejects_unsorted_axes():
    with pytest.raises(ValueError):
        ext.Multivector.blade(4, (2, 1))


def test_dimension_mismatch_raises():
    a = ext.Multivector.zero(3)
    b = ext.Multivector.zero(4)
    with pytest.raises(ext.DimensionMismatch):
        ext.wedge(a, b)


def test_coeffs_are_frozen():
    x = ext.Multivector.zero(3)
    with pytest.raises(ValueError):
        x.coeffs[0] = 1.0


# -- products ---------------------------------------------------------------

def test_wedge_anticommutes_on_vectors():
    rng = np.random.default_rng(1)
    for n in DIMS:
        a = ext.Multivector.from_vector(rng.standard_normal(n))
        b = ext.Multivector.from_vector(rng.standard_normal(n))
        assert ext.wedge(a, b).isclose(-1.0 * ext.wedge(b, a))
        assert ext.wedge(a, a).norm() < 1e-12


def test_wedge_associative():
    rng = np.random.default_rng(2)
    for n in DIMS:
        x, y, z = (random_multivector(rng, n) for _ in range(3))
        lhs = ext.wedge(ext.wedge(x, y), z)
        rhs = ext.wedge(x, ext.wedge(y, z))
        assert lhs.isclose(rhs, tol=1e-10)


def test_interior_adjoint_to_wedge():
    rng = np.random.default_rng(3)
    for n in DIMS:
        u, x, y = (random_multivector(rng, n) for _ in range(3))
        lhs = ext.inner(x, ext.interior(u, y))
        rhs = ext.inner(ext.wedge(u, x), y)
        assert abs(lhs - rhs) < 1e-10


def test_hodge_of_volume_and_scalar():
    for n in DIMS:
        one = ext.Multivector.scalar(n, 1.0)
        omega = ext.Multivector.volume(n)
        assert ext.hodge(one).isclose(omega)
        assert ext.hodge(omega).isclose(one)


def test_hodge_double_sign():
    rng = np.random.default_rng(4)
    for n in DIMS:
        for k in range(n + 1):
            x = random_kform(rng, n, k)
            sign = (-1.0) ** (k * (n - k))
            assert ext.hodge(ext.hodge(x)).isclose(sign * x, tol=1e-12)


def test_hodge_isometry():
    rng = np.random.default_rng(5)
    for n in DIMS:
        for k in range(n + 1):
            x = random_kform(rng, n, k)
            y = random_kform(rng, n, k)
            assert abs(ext.inner(ext.hodge(x), ext.hodge(y)) - ext.inner(x, y)) < 1e-10


# -- frames and projections -------------------------------------------------

def test_frame_rejects_nonorthonormal():
    with pytest.raises(ValueError):
        ext.SubspaceFrame(3, np.array([[1.0, 1.0, 0.0]]))


def test_orthonormalize_matches_input_span():
    rng = np.random.default_rng(6)
    v = rng.standard_normal((2, 4))
    frame = ext.SubspaceFrame.orthonormalize(v)
    # same span: original vectors have zero component off the frame
    proj = frame.vectors.T @ (frame.vectors @ v.T)
    assert np.allclose(proj.T, v, atol=1e-10)


def test_volume_form_unit_norm():
    rng = np.random.default_rng(7)
    for n in DIMS:
        for k in range(1, n):
            frame = ext.SubspaceFrame.orthonormalize(rng.standard_normal((k, n)))
            assert abs(ext.volume_form(frame).norm() - 1.0) < 1e-10


def test_project_complement_vs_gram():
    rng = np.random.default_rng(8)
    for n in DIMS:
        for k in range(1, n):
            frame = ext.SubspaceFrame.orthonormalize(rng.standard_normal((k, n)))
            x = rng.standard_normal(n)
            q = frame.vectors
            expect = x - q.T @ (q @ x)
            got = ext.project_complement(frame, x)
            assert np.allclose(got, expect, atol=1e-10)


def test_hyperplane_volume_form_dual_to_normal():
    rng = np.random.default_rng(9)
    for n in DIMS:
        basis = ext.SubspaceFrame.orthonormalize(rng.standard_normal((n, n)))
        v = ext.SubspaceFrame(n, basis.vectors[:-1])
        xi = basis.vectors[-1]
        dual = ext.hodge(ext.volume_form(v)).to_vector()
        assert min(np.linalg.norm(dual - xi), np.linalg.norm(dual + xi)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 6), st.integers(0, 2 ** 31 - 1))
def test_pi_v_antisymmetric_pairing(n, seed):
    # <eta, pi_T(q)> changes sign when eta and q swap, for T a hyperplane
    # complement pair: both reduce to the determinant of the full frame.
    rng = np.random.default_rng(seed)
    basis = ext.SubspaceFrame.orthonormalize(rng.standard_normal((n, n)))
    t_frame = ext.SubspaceFrame(n, basis.vectors[: n - 2])
    q = rng.standard_normal(n)
    eta = rng.standard_normal(n)
    lhs = float(eta @ ext.pi_V(t_frame, q).to_vector())
    rhs = float(q @ ext.pi_V(t_frame, eta).to_vector())
    assert abs(lhs + rhs) < 1e-9
