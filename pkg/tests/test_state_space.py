import itertools
import json

import numpy as np
import pytest

from stabatlas.clifford_core import gate
from stabatlas.state_space import (
    DenseState,
    apply,
    apply_matrix,
    make_state,
    parse_state_spec,
    pauli_expectations,
    schmidt,
)

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])
# Gate matrices use kron(q1, q2) while state indices store qubit 1 in bit 0.
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return DenseState.from_unnormalized(v)


def dense_pauli(x, z, n):
    """X^x Z^z with bit j of x, z acting on qubit j + 1 (kron order q_n ... q_1)."""
    op = np.array([[1.0]])
    for q in range(n, 0, -1):
        f = np.eye(2)
        if (x >> (q - 1)) & 1:
            f = f @ X
        if (z >> (q - 1)) & 1:
            f = f @ Z
        op = np.kron(op, f)
    return op


def test_basis_bitstring_is_qubit_ordered():
    s = make_state("basis", "01")
    assert s.amplitudes[2] == 1  # qubit 2 set -> bit 1


def test_product_state_orders_qubits():
    s = make_state("product", [[0, 1], [1, 0], [1, 0]])
    assert s.amplitudes[1] == 1


@pytest.mark.parametrize("spec, n", [("ghz:3", 3), ("w:4", 4), ("dicke:5,2", 5), ("zeros:2", 2), ("basis:0110", 4)])
def test_parse_state_spec(spec, n):
    s = parse_state_spec(spec)
    assert s.n_qubits == n
    assert abs(np.linalg.norm(s.amplitudes) - 1) < 1e-12


@pytest.mark.parametrize("spec", ["ghz", "dicke:3", "basis:012", "w:x", ""])
def test_parse_state_spec_rejects(spec):
    with pytest.raises(ValueError):
        parse_state_spec(spec)


def test_dicke_weight_validation():
    with pytest.raises(ValueError):
        make_state("dicke", 3, 4)


def test_unnormalized_rejected_by_constructor():
    with pytest.raises(ValueError):
        DenseState(1, np.array([1, 1], complex))


def test_json_roundtrip(tmp_path, rng):
    s = random_state(rng, 3)
    path = tmp_path / "s.json"
    path.write_text(s.to_json())
    assert json.loads(path.read_text())["n"] == 3
    back = parse_state_spec(f"file:{path}")
    np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-15)


def test_equals_mod_phase(rng):
    s = random_state(rng, 2)
    t = DenseState(2, np.exp(0.7j) * s.amplitudes)
    assert s.equals_mod_phase(t)
    assert s.key() == t.key()
    assert not s.equals_mod_phase(random_state(rng, 2))


@pytest.mark.parametrize("name", ["H1", "P2", "C12", "C21"])
def test_apply_two_qubit_gate_on_qubits_one_two(name, rng):
    s = random_state(rng, 2)
    got = apply(gate(name), s)
    want = SWAP @ gate(name).to_numpy() @ SWAP @ s.amplitudes
    np.testing.assert_allclose(got.amplitudes, want, atol=1e-12)


def test_apply_embeds_into_larger_register(rng):
    s = random_state(rng, 3)
    u = gate("C12").to_numpy()
    got = apply_matrix(u, (1, 2), s)
    # Oracle: in index order (q3, q2, q1) the full operator is I (x) SWAP U SWAP
    full = np.kron(np.eye(2), SWAP @ u @ SWAP)
    np.testing.assert_allclose(got.amplitudes, full @ s.amplitudes, atol=1e-12)


def test_three_qubit_cnot_label():
    s = make_state("basis", "001")  # qubit 3 set
    out = apply(gate("C32", 3), s)
    assert np.isclose(abs(out.amplitudes[0b110]), 1)


@pytest.mark.parametrize("sub", [(1,), (2,), (1, 2), (1, 3), (2, 3, 4)])
def test_schmidt_matches_svd_oracle(sub, rng):
    s = random_state(rng, 4)
    got = schmidt(s, sub).values
    t = s.amplitudes.reshape([2] * 4)
    axes = [4 - q for q in sub]
    rest = [a for a in range(4) if a not in axes]
    mat = np.transpose(t, axes + rest).reshape(2 ** len(sub), -1)
    sv = np.linalg.svd(mat, compute_uv=False) ** 2
    np.testing.assert_allclose(np.sort(got)[::-1][: len(sv)], np.sort(sv)[::-1], atol=1e-12)


def test_reduced_density_trace_and_hermitian(rng):
    rho = random_state(rng, 3).reduced_density((1, 3))
    assert np.isclose(np.trace(rho), 1)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)


def test_pauli_expectations_match_dense_oracle(rng):
    n = 3
    s = random_state(rng, n)
    got = pauli_expectations(s)
    for x, z in itertools.product(range(2**n), repeat=2):
        want = np.vdot(s.amplitudes, dense_pauli(x, z, n) @ s.amplitudes)
        assert abs(got[x, z] - want) < 1e-12


def test_stabilizer_state_has_2n_unit_expectations():
    got = np.abs(pauli_expectations(make_state("ghz", 3)))
    assert np.sum(np.isclose(got, 1)) == 8
    assert np.sum(np.isclose(got, 0)) == 56
