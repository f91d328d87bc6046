import numpy as np
import pytest

from stabatlas.clifford_core import (
    ALPHABET,
    CORE_RELATIONS,
    ExactMatrix,
    canonical_mod_phase,
    default_catalog,
    gate,
    is_local_tensor,
    omega,
    parse_word,
    verify_relations,
    word_matrix,
)

# Independent float oracle: kron(q1, q2), control first for C12.
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
P = np.diag([1, 1j])
I2 = np.eye(2)
CX12 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
ORACLE = {
    "H1": np.kron(H, I2),
    "H2": np.kron(I2, H),
    "P1": np.kron(P, I2),
    "P2": np.kron(I2, P),
    "C12": CX12,
    "C21": SWAP @ CX12 @ SWAP,
}


@pytest.mark.parametrize("name", ALPHABET)
def test_generators_match_float_oracle(name):
    np.testing.assert_allclose(gate(name).to_numpy(), ORACLE[name], atol=1e-14)


@pytest.mark.parametrize("name", ALPHABET)
def test_generators_are_exactly_unitary(name):
    assert gate(name).matrix.is_unitary()


def test_word_order_is_left_to_right_product():
    word = "H1 P2 C12 H2"
    expected = ORACLE["H1"] @ ORACLE["P2"] @ ORACLE["C12"] @ ORACLE["H2"]
    np.testing.assert_allclose(word_matrix(word).to_numpy(), expected, atol=1e-12)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1", []),
        ("H1 C12", ["H1", "C12"]),
        ("P1^3", ["P1"] * 3),
        ("(H1 P1)^2", ["H1", "P1", "H1", "P1"]),
        ("(C12 (H2)^2)^2 P1", ["C12", "H2", "H2", "C12", "H2", "H2", "P1"]),
    ],
)
def test_parse_word(text, expected):
    assert parse_word(text) == expected


@pytest.mark.parametrize("text", ["(H1", "H1)", "^2 H1", "X1"])
def test_parse_word_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_word(text)


def test_omega_is_hp_cubed():
    hp = word_matrix("(H1 P1)^3")
    assert hp == omega(4)
    np.testing.assert_allclose(omega(4).to_numpy(), np.exp(1j * np.pi / 4) * np.eye(4), atol=1e-14)


def test_canonical_mod_phase_collapses_all_eight_phases():
    m = word_matrix("H1 C12 P2")
    reps = {canonical_mod_phase(omega(4, k) @ m).encode() for k in range(8)}
    assert len(reps) == 1


def test_matrix_byte_roundtrip():
    m = word_matrix("H1 P2 C21 H2 P1")
    back, off = ExactMatrix.from_bytes(m.to_bytes())
    assert back == m and off == len(m.to_bytes())


def test_adjoint_inverts():
    m = word_matrix("H1 P2 C21")
    assert m @ m.adjoint() == ExactMatrix.identity(4)


@pytest.mark.parametrize(
    "word, local",
    [("H1 P2", True), ("P1 H1 P1", True), ("C12", False), ("C12 C21 C12", False), ("H1 C12 H1 C12", False)],
)
def test_is_local_tensor(word, local):
    assert is_local_tensor(word_matrix(word)) is local


def test_catalog_covers_sixteen_core_identities():
    names = set(default_catalog().names())
    assert set(CORE_RELATIONS) <= names
    assert len(CORE_RELATIONS) == 16


@pytest.mark.parametrize("result", verify_relations(), ids=lambda r: f"{r.relation.name}:{r.relation.left}")
def test_relation_holds_exactly(result):
    assert result.passed, result.detail


def test_relation_checker_detects_a_false_identity():
    from stabatlas.clifford_core import Relation, RelationCatalog

    bad = RelationCatalog([Relation("bogus", "H1 P1", "P1 H1")])
    assert not verify_relations(bad)[0].passed
