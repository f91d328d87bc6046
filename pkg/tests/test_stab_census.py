import csv
import io
import json
from math import prod

import numpy as np
import pytest

from reference_data import CENSUS_N3, CENSUS_N4
from stabatlas.entropy_lab import entropy_vector, representative_subsets
from stabatlas.stab_census import (
    StabTableau,
    census_to_csv,
    census_to_json,
    entropy_census,
    enumerate_lagrangians,
    enumerate_stabilizer_states,
    stab_entropy,
    stabilizer_state_count,
)
from stabatlas.state_space import pauli_expectations


def count_formula(n):
    return 2**n * prod(2**k + 1 for k in range(1, n + 1))


@pytest.mark.parametrize("n, count", [(1, 6), (2, 60), (3, 1080), (4, 36720), (5, 2423520)])
def test_state_count_closed_form(n, count):
    assert stabilizer_state_count(n) == count == count_formula(n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_enumeration_size_and_distinctness(n):
    keys = {t.to_dense().key() for t in enumerate_stabilizer_states(n, validate=True)}
    assert len(keys) == count_formula(n)


@pytest.mark.parametrize("n, lagr", [(1, 3), (2, 15), (3, 135)])
def test_lagrangian_count(n, lagr):
    # number of Lagrangian subspaces of F_2^{2n}: prod (2^k + 1)
    assert sum(1 for _ in enumerate_lagrangians(n)) == lagr


def test_dense_states_are_stabilized_by_their_rows():
    for t in list(enumerate_stabilizer_states(3))[::53]:
        ev = pauli_expectations(t.to_dense())
        for x, z, s in t.rows:
            # row is s * i^{x.z} X^x Z^z, so <X^x Z^z> = s * i^{-x.z}
            want = s * (1j) ** (-bin(x & z).count("1"))
            assert abs(ev[x, z] - want) < 1e-10


def test_symplectic_entropy_matches_dense():
    for t in list(enumerate_stabilizer_states(4))[::997]:
        dense = entropy_vector(t.to_dense())
        exact = tuple(stab_entropy(t, s) for s in representative_subsets(4))
        np.testing.assert_allclose(dense.components, exact, atol=1e-9)


def test_tableau_validation():
    with pytest.raises(ValueError):
        StabTableau(2, ((1, 0, 1), (0, 1, 1))).validate()  # X1 and Z1 anticommute
    with pytest.raises(ValueError):
        StabTableau(2, ((1, 0, 1), (1, 0, 1))).validate()


def test_census_n3_multiplicities():
    rows = entropy_census(3)
    assert {r.vector: r.count for r in rows} == CENSUS_N3
    assert all(r.holographic for r in rows)


def test_census_n4_multiplicities():
    rows = entropy_census(4)
    assert {r.vector: r.count for r in rows} == CENSUS_N4
    bad = [r for r in rows if not r.holographic]
    assert [(r.vector, r.count, r.violated) for r in bad] == [((1,) * 7, 2592, ("MMI",))]


def test_census_serializations():
    rows = entropy_census(3)
    parsed = list(csv.DictReader(io.StringIO(census_to_csv(rows))))
    assert len(parsed) == 5
    assert sum(int(r["count"]) for r in parsed) == 1080
    data = json.loads(census_to_json(3, rows))
    assert data["n"] == 3 and len(data["vectors"]) == 5
