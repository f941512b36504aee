import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from math import factorial

from iontrap import qlinalg as ql
from conftest import random_hermitian


def test_kron_identity():
    assert np.array_equal(ql.kron(ql.I2, ql.I3), np.eye(6))


def test_kron_projector_matches_block_form():
    p_d = ql.kron(np.diag([1.0, 0.0]), ql.I3)
    assert np.allclose(p_d, ql.P_D)
    assert np.allclose(ql.P_D, np.eye(6) - ql.P_S)
    assert np.allclose(ql.P_S, np.diag([0, 0, 0, 1, 1, 1]))


def test_kron_entry_d2_s2():
    m = ql.kron(ql.SX, ql.NUM)
    assert m[ql.basis_index("D2"), ql.basis_index("S2")] == pytest.approx(1.0)


def test_spin_algebra():
    assert np.allclose(ql.SX @ ql.SY - ql.SY @ ql.SX, 1j * ql.SZ)
    assert np.allclose(np.linalg.eigvalsh(ql.SX), [-0.5, 0.5])
    # |D> is the +1/2 eigenstate of SZ and S+ = |D><S|.
    assert ql.SZ[0, 0] == 0.5
    assert ql.SPLUS[0, 1] == 1


def test_ladder_truncation():
    e = np.eye(3)
    assert np.allclose(ql.A @ e[1], e[0])
    assert np.allclose(ql.A @ e[2], np.sqrt(2) * e[1])
    assert np.allclose(ql.ADAG @ e[2], 0)
    assert np.allclose(ql.NUM, np.diag([0, 1, 2]))


def test_expm_zero_generator():
    assert np.allclose(ql.expm_hermitian(np.zeros((6, 6)), 3.7), np.eye(6))


def test_expm_pi_pulse():
    om = 2 * np.pi * 1e5
    u = ql.expm_hermitian(om * ql.kron(ql.SX, ql.I3), np.pi / om)
    x = np.array([[0, 1], [1, 0]])
    assert np.allclose(u, -1j * ql.kron(x, ql.I3), atol=1e-12)


def test_expm_matches_taylor_series(rng):
    for _ in range(5):
        h = random_hermitian(rng, 6, 0.5)
        series = sum(np.linalg.matrix_power(-1j * h, k) / factorial(k) for k in range(31))
        assert np.linalg.norm(ql.expm_hermitian(h, 1.0) - series) < 1e-10


def test_expm_rejects_non_hermitian():
    with pytest.raises(ql.NotHermitianError):
        ql.expm_hermitian(np.triu(np.ones((6, 6))), 1.0)


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_expm_group_property_and_unitarity(seed, t1, t2):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 6)
    u1 = ql.expm_hermitian(h, t1)
    assert ql.unitarity_error(u1) < 1e-10
    assert np.linalg.norm(u1 @ ql.expm_hermitian(h, t2) - ql.expm_hermitian(h, t1 + t2)) < 1e-10


@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_kron_bilinear(seed, c):
    rng = np.random.default_rng(seed)
    a, a2 = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(2))
    b, b2 = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(2))
    assert np.allclose(ql.kron(c * a, b), c * ql.kron(a, b))
    assert np.allclose(ql.kron(a, c * b), c * ql.kron(a, b))
    assert np.allclose(ql.kron(a + a2, b), ql.kron(a, b) + ql.kron(a2, b))
    assert np.allclose(ql.kron(a, b + b2), ql.kron(a, b) + ql.kron(a, b2))


def test_project_computational_examples():
    blk = ql.project_computational(ql.dm(ql.ket("S0")))
    assert np.allclose(blk.rho, np.diag([0, 0, 1, 0]))
    assert blk.p_leak == pytest.approx(0.0)
    blk = ql.project_computational(ql.dm(ql.ket("D2")))
    assert np.allclose(blk.rho, 0)
    assert blk.p_leak == pytest.approx(1.0)
    rho = 0.5 * ql.dm(ql.ket("S1")) + 0.5 * ql.dm(ql.ket("D2"))
    blk = ql.project_computational(rho)
    assert np.allclose(blk.rho, np.diag([0, 0, 0, 0.5]))
    assert blk.p_leak == pytest.approx(0.5)
    assert not blk.renormalized
    blk = ql.project_computational(rho, renormalize=True)
    assert blk.renormalized
    assert np.allclose(blk.rho, np.diag([0, 0, 0, 1.0]))


def test_embed_restrict_roundtrip(rng):
    op = rng.standard_normal((4, 4))
    assert np.allclose(ql.restrict_computational(ql.embed_computational(op)), op)


def test_phase_aligned_distance_ignores_global_phase(rng):
    u = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    assert ql.phase_aligned_distance(np.exp(1.3j) * u, u) < 1e-12
