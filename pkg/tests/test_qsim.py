import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneway import qsim
from oneway.qsim import Basis
from tests.conftest import equal_up_to_phase

angles = st.floats(-math.pi, math.pi, allow_nan=False)


def random_state(rng, m):
    v = rng.normal(size=2 ** m) + 1j * rng.normal(size=2 ** m)
    return qsim.state_from_vector(v, tuple(range(m)))


def dense_projector(m, site, vec):
    """``|vec><vec|`` on ``site`` of an m-qubit register, qubit 0 most significant."""
    ops = [np.eye(2)] * m
    ops[site] = np.outer(vec, vec.conj())
    out = np.ones((1, 1))
    for o in ops:
        out = np.kron(out, o)
    return out


def test_plus_state_amplitudes():
    psi = qsim.init_plus(("a", "b", "c"))
    assert np.allclose(psi.amplitudes, np.full(8, 1 / math.sqrt(8)))
    assert psi.sites == ("a", "b", "c")


def test_size_limit():
    with pytest.raises(qsim.SizeLimitError):
        qsim.init_plus(range(5), max_qubits=4)
    psi = qsim.init_plus(range(3), max_qubits=4)
    with pytest.raises(qsim.SizeLimitError):
        qsim.attach(psi, (7, 8), max_qubits=4)


def test_duplicate_sites_rejected():
    with pytest.raises(qsim.QSimError):
        qsim.init_plus((1, 1))


@given(angles)
def test_basis_vectors_orthonormal(phi):
    v0, v1 = Basis.plane(phi).vectors()
    assert abs(np.vdot(v0, v1)) < 1e-12
    assert abs(np.vdot(v0, v0) - 1) < 1e-12


def test_basis_names():
    v0, v1 = Basis.plane(0.0).vectors()
    assert np.allclose(v0, [1 / math.sqrt(2)] * 2)
    v0, _ = Basis.plane(math.pi / 2).vectors()
    assert np.allclose(v0, np.array([1, 1j]) / math.sqrt(2))
    with pytest.raises(qsim.QSimError):
        Basis("Q")


@given(st.integers(1, 5), st.integers(0, 2 ** 31), angles)
def test_born_rule_against_dense_projector(m, seed, phi):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, m)
    site = int(rng.integers(m))
    basis = Basis.plane(phi) if rng.random() < 0.7 else Basis.z()
    v0, v1 = basis.vectors()
    vec = psi.amplitudes
    p0 = float(np.vdot(vec, dense_projector(m, site, v0) @ vec).real)
    assert math.isclose(qsim.outcome_probability(psi, site, basis), p0, abs_tol=1e-12)
    for s, v in ((0, v0), (1, v1)):
        proj = dense_projector(m, site, v) @ vec
        if np.linalg.norm(proj) < 1e-9:
            continue
        proj /= np.linalg.norm(proj)
        out, kept = qsim.measure(psi, site, basis, outcome=s, keep=True)
        assert out == s
        assert equal_up_to_phase(kept.amplitudes, proj)


def test_measure_removes_qubit_and_draw_rule():
    psi = qsim.product_state((0, 1), [np.array([1, 0]), qsim.PLUS])
    s, rest = qsim.measure(psi, 0, Basis.z(), draw=0.99)
    assert s == 0 and rest.sites == (1,)
    assert np.allclose(rest.amplitudes, qsim.PLUS)
    s, _ = qsim.measure(psi, 1, Basis.z(), draw=0.49)
    assert s == 0
    s, _ = qsim.measure(psi, 1, Basis.z(), draw=0.51)
    assert s == 1


def test_forced_impossible_outcome_raises():
    psi = qsim.product_state((0, 1), [np.array([1, 0]), qsim.PLUS])
    with pytest.raises(qsim.DegenerateProjectionError):
        qsim.measure(psi, 0, Basis.z(), outcome=1)


def test_cannot_remove_last_qubit():
    psi = qsim.init_plus((0,))
    with pytest.raises(qsim.QSimError):
        qsim.measure(psi, 0, Basis.z())
    s, kept = qsim.measure(psi, 0, Basis.plane(0.0), keep=True)
    assert s == 0 and kept.m == 1


@given(st.integers(0, 2 ** 31))
def test_cz_symmetric_and_involutive(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, 3)
    a = qsim.apply_cz(psi, 0, 2)
    b = qsim.apply_cz(psi, 2, 0)
    assert np.allclose(a.amplitudes, b.amplitudes)
    assert np.allclose(qsim.apply_cz(a, 0, 2).amplitudes, psi.amplitudes)


def test_cz_dense():
    rng = np.random.default_rng(3)
    psi = random_state(rng, 2)
    cz = np.diag([1, 1, 1, -1])
    assert np.allclose(qsim.apply_cz(psi, 0, 1).amplitudes, cz @ psi.amplitudes)


def test_cnot_dense_control_first():
    rng = np.random.default_rng(4)
    psi = random_state(rng, 2)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.allclose(qsim.apply_cnot(psi, 0, 1).amplitudes, cnot @ psi.amplitudes)
    swapped = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
    assert np.allclose(qsim.apply_cnot(psi, 1, 0).amplitudes, swapped @ psi.amplitudes)


def test_non_unitary_rejected():
    psi = qsim.init_plus((0,))
    with pytest.raises(qsim.QSimError):
        qsim.apply_unitary1(psi, 0, np.array([[1, 0], [0, 2]]))


def test_fidelity_aligns_registries(rng):
    psi = random_state(rng, 3)
    perm = psi.permuted((2, 0, 1))
    assert math.isclose(qsim.fidelity(psi, perm), 1.0, abs_tol=1e-12)
    other = random_state(rng, 3)
    assert qsim.fidelity(psi, other) < 1 - 1e-6
    with pytest.raises(qsim.QSimError):
        qsim.fidelity(psi, qsim.init_plus((0, 1)))


def test_measurements_on_distinct_qubits_commute(rng):
    psi = random_state(rng, 3)
    b1, b2 = Basis.plane(0.4), Basis.plane(-1.3)
    _, a = qsim.measure(psi, 0, b1, outcome=1)
    _, a = qsim.measure(a, 2, b2, outcome=0)
    _, b = qsim.measure(psi, 2, b2, outcome=0)
    _, b = qsim.measure(b, 0, b1, outcome=1)
    assert equal_up_to_phase(a.amplitudes, b.amplitudes)
