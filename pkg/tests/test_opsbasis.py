import itertools

import numpy as np
import pytest

from qric import (
    OccupationVector,
    WeylOp,
    alpha_coeff,
    apply_local,
    bell_state,
        ghz_state,
    overlap,
    phi_state,
    stabilizer_expectation,
    symmetric_state,
    weyl_matrix,
    weyl_r,
    weyl_u,
)
from qric import channels, opsbasis, statealg
from qric.errors import DimensionError
from qric.statealg import DensityOperator, Register


# ---------------------------------------------------------------------------
# Weyl operators

def test_u00_is_identity():
    np.testing.assert_allclose(weyl_u(3, 0, 0), np.eye(3), atol=1e-15)


def test_u11_d2_columns():
    U = weyl_u(2, 1, 1)
    np.testing.assert_allclose(U @ [1, 0], [0, 1], atol=1e-15)   # |0> -> |1>
    np.testing.assert_allclose(U @ [0, 1], [-1, 0], atol=1e-15)  # |1> -> -|0>


@pytest.mark.parametrize("d", [2, 3, 5])
def test_r_inverts_u(d):
    # dense-product oracle for R^{m,n} U^{-m,n} = I
    for m in range(d):
        for n in range(d):
            np.testing.assert_allclose(
                weyl_r(d, m, n) @ weyl_u(d, -m, n), np.eye(d), atol=1e-12
            )


@pytest.mark.parametrize("d", [2, 3, 4])
def test_weyl_unitarity_and_adjoint_relation(d):
    for m in range(d):
        for n in range(d):
            U = weyl_matrix(WeylOp(d, m, n, "U"))
            R = weyl_matrix(WeylOp(d, m, n, "R"))
            np.testing.assert_allclose(U @ U.conj().T, np.eye(d), atol=1e-12)
            np.testing.assert_allclose(R, weyl_u(d, -m, n).conj().T, atol=1e-12)


def test_weylop_validation():
    with pytest.raises(DimensionError):
        WeylOp(2, 2, 0, "U")
    with pytest.raises(DimensionError):
        WeylOp(2, 0, 0, "Q")


# ---------------------------------------------------------------------------
# Bell and GHZ states

def test_bell_00_d2():
    b = bell_state(2, 0, 0, ("X", "Y"))
    np.testing.assert_allclose(b.amps, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-12)


def test_bell_00_d3():
    b = bell_state(3, 0, 0, ("X", "Y"))
    want = np.zeros(9)
    want[[0, 4, 8]] = 1 / np.sqrt(3)
    np.testing.assert_allclose(b.amps, want, atol=1e-12)


def test_bell_gram_matrix_d3():
    states = [bell_state(3, m, n, ("X", "Y")) for m in range(3) for n in range(3)]
    gram = np.array([[overlap(a, b) for b in states] for a in states])
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-12)


def test_ghz_000_d2():
    g = ghz_state(2, ("a", "b", "c"), 0, 0)
    want = np.zeros(8)
    want[[0, 7]] = 1 / np.sqrt(2)
    np.testing.assert_allclose(g.amps, want, atol=1e-12)


def test_ghz_two_legs_equals_bell():
    for m in range(3):
        for n in range(3):
            g = ghz_state(3, ("X", "Y"), m, n)
            b = bell_state(3, m, n, ("X", "Y"))
            np.testing.assert_allclose(g.amps, b.amps, atol=1e-12)


def test_ghz_11_d2_against_operator_oracle():
    # oracle: apply I (x) U^{1,1} (x) U^{0,1} to |G^{0,0}>
    g0 = ghz_state(2, ("a", "b", "c"), 0, 0)
    ref = apply_local(g0, weyl_u(2, 1, 1), "b")
    ref = apply_local(ref, weyl_u(2, 0, 1), "c")
    g = ghz_state(2, ("a", "b", "c"), 1, 1)
    np.testing.assert_allclose(g.amps, ref.amps, atol=1e-12)
    want = np.zeros(8)
    want[0b011] = 1 / np.sqrt(2)
    want[0b100] = -1 / np.sqrt(2)
    np.testing.assert_allclose(g.amps, want, atol=1e-12)


# ---------------------------------------------------------------------------
# symmetric states and alpha coefficients

def test_symmetric_state_examples():
    st = symmetric_state(2, (1, 1), ("a", "b"))
    np.testing.assert_allclose(st.amps, np.array([0, 1, 1, 0]) / np.sqrt(2), atol=1e-12)
    st = symmetric_state(2, (2, 0), ("a", "b"))
    np.testing.assert_allclose(st.amps, [1, 0, 0, 0], atol=1e-12)


def test_symmetric_state_d3_full_permutations():
    st = symmetric_state(3, OccupationVector((1, 1, 1)), ("a", "b", "c"))
    # oracle: explicit permutation enumeration
    nonzero = {idx for idx, a in enumerate(st.amps) if abs(a) > 1e-14}
    perms = set()
    for p in itertools.permutations((0, 1, 2)):
        perms.add(p[0] * 9 + p[1] * 3 + p[2])
    assert nonzero == perms
    for idx in nonzero:
        assert abs(st.amps[idx] - 1 / np.sqrt(6)) < 1e-12


def test_symmetric_state_rejects_bad_occupation():
    with pytest.raises(DimensionError):
        symmetric_state(2, (1, 0), ("a", "b"))


def test_alpha_coeff_values():
    assert abs(alpha_coeff(2, 2, 1) - np.sqrt(1 / 3)) < 1e-12
    assert abs(alpha_coeff(2, 2, 2) - np.sqrt(2 / 3)) < 1e-12
    with pytest.raises(DimensionError):
        alpha_coeff(2, 2, 0)


@pytest.mark.parametrize("d,N", [(2, 3), (3, 2)])
def test_alpha_normalizes_telecloning_channel(d, N):
    ch = channels.telecloning_channel(d, N)
    assert abs(ch.norm() - 1) < 1e-10


def test_phi_states_orthonormal():
    for d, N in [(2, 2), (3, 2), (2, 3)]:
        states = [phi_state(d, N, j) for j in range(d)]
        for i, a in enumerate(states):
            for j, b in enumerate(states):
                want = 1.0 if i == j else 0.0
                assert abs(overlap(a, b) - want) < 1e-10


# ---------------------------------------------------------------------------
# stabilizer expectations

def test_stabilizer_expectation_u0v0_channel():
    from qric.analysis import stabilizer_groups

    minus, plus = stabilizer_groups(2)
    ch = channels.product_bell_channel(2, 2, (0, 1, 0, 1))
    for m in range(2):
        for n in range(2):
            val = stabilizer_expectation(ch, m, n, minus, plus)
            assert abs(val - 1) < 1e-12


def test_stabilizer_expectation_smolin_d3():
    from qric.analysis import stabilizer_groups

    minus, plus = stabilizer_groups(2)
    rho = channels.smolin_like(3, 2)
    for m in range(3):
        for n in range(3):
            val = stabilizer_expectation(rho, m, n, minus, plus)
            assert abs(val - 1) < 1e-12


def test_stabilizer_expectation_maximally_mixed():
    from qric.analysis import stabilizer_groups

    minus, plus = stabilizer_groups(2)
    reg = Register(2, channels.channel_labels(2))
    rho = DensityOperator(reg, np.eye(16) / 16, validate=False)
    for m in range(2):
        for n in range(2):
            val = stabilizer_expectation(rho, m, n, minus, plus)
            want = 1.0 if (m, n) == (0, 0) else 0.0
            assert abs(val - want) < 1e-12


def test_stabilizer_elements_commute():
    # d <= 3, N <= 3 spot check on the matrix level
    for d, N in [(2, 2), (3, 2), (2, 3)]:
        from qric.analysis import stabilizer_groups

        minus, plus = stabilizer_groups(N)
        labels = channels.channel_labels(N)
        reg = Register(d, labels)

        def elem_matrix(m, n):
            out = np.eye(d ** (2 * N), dtype=complex)
            for l in labels:
                op = weyl_u(d, -m if l in minus else m, n)
                out = statealg.dense_local_operator(reg, op, l) @ out
            return out

        pairs = [(1, 0), (0, 1), (1, 1)]
        for (m1, n1), (m2, n2) in itertools.combinations(pairs, 2):
            A, B = elem_matrix(m1, n1), elem_matrix(m2, n2)
            assert np.abs(A @ B - B @ A).max() < 1e-10


# ---------------------------------------------------------------------------
# paper-identity properties

@pytest.mark.parametrize("d", [2, 3])
def test_bell_is_stabilizer_eigenstate(d):
    # (U^{-m,n} (x) U^{m,n}) |B^{x,y}> = w^{ym-xn} |B^{x,y}>
    for m, n, x, y in itertools.product(range(d), repeat=4):
        b = bell_state(d, x, y, ("A", "B"))
        out = apply_local(b, weyl_u(d, -m, n), "A")
        out = apply_local(out, weyl_u(d, m, n), "B")
        phase = opsbasis.omega_power(d, y * m - x * n)
        np.testing.assert_allclose(out.amps, phase * b.amps, atol=1e-12)


@pytest.mark.parametrize("d,N", [(2, 2), (2, 3), (3, 2)])
def test_clone_covariance(d, N):
    # R^{m,n} on clones + R^{-m,n} on ancillas maps |phi_{j+n}> to w^{jm}|phi_j>
    for m in range(d):
        for n in range(d):
            for j in range(d):
                src = phi_state(d, N, (j + n) % d)
                out = src
                for s in range(1, N + 1):
                    out = apply_local(out, weyl_r(d, m, n), str(s))
                for s in range(1, N):
                    out = apply_local(out, weyl_r(d, -m, n), f"A_{s}")
                want = opsbasis.omega_power(d, j * m) * phi_state(d, N, j).amps
                np.testing.assert_allclose(out.amps, want, atol=1e-12)


@pytest.mark.parametrize("d", range(2, 8))
def test_root_of_unity_sum(d):
    for j in range(d):
        total = sum(opsbasis.omega_power(d, j * k) for k in range(d))
        want = d if j == 0 else 0.0
        assert abs(total - want) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_basis_change_identity(d):
    # |j>|k> = (1/sqrt d) sum_l w^{-jl} |B^{l, k-j}>
    for j in range(d):
        for k in range(d):
            want = np.zeros(d * d, dtype=complex)
            want[j * d + k] = 1.0
            acc = np.zeros(d * d, dtype=complex)
            for l in range(d):
                acc += opsbasis.omega_power(d, -j * l) * opsbasis.bell_vector(d, l, (k - j) % d)
            np.testing.assert_allclose(acc / np.sqrt(d), want, atol=1e-12)
