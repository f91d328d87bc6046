"""Enumeration of all n-qubit stabilizer states by canonical check matrices.

A stabilizer state is fixed by a Lagrangian subspace ``L`` of ``F_2^{2n}``
together with ``n`` sign bits.  The subspaces are produced directly in a
canonical form:

1. pick the X-projection ``V`` of ``L`` as a reduced echelon basis
   ``x_1..x_k`` with pivot bits ``p_1..p_k``;
2. pick a symmetric ``k x k`` matrix ``B`` over ``F_2`` and set
   ``z_i = sum_j B_ij e_{p_j}``;
3. complete with a reduced basis ``y_1..y_{n-k}`` of ``V``'s orthogonal
   complement, used as pure-Z rows.

Every Lagrangian subspace arises exactly once, so the count is
``sum_k [n, k]_2 * 2**(k(k+1)/2)``, and attaching all ``2**n`` sign vectors
gives ``2**n * prod_k (2**(n-k) + 1)`` states.

Entanglement entropies come from F_2 ranks: for a subsystem ``A``,
``S_A = rank(L restricted to A) - |A|`` bits.  Signs never change an entropy,
so censuses weight each subspace by ``2**n``.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass
from itertools import combinations, product
from math import prod
from typing import Iterable, Iterator, Sequence

import numpy as np

from .entropy_lab import EntropyVector, check_inequalities, representative_subsets
from .state_space import DenseState

__all__ = [
    "CensusRow",
    "StabTableau",
    "census_to_csv",
    "census_to_json",
    "entropy_census",
    "enumerate_lagrangians",
    "enumerate_stabilizer_states",
    "stab_entropy",
    "stabilizer_state_count",
]

MAX_N = 5


def _popcount(x: int) -> int:
    return bin(x).count("1")


def f2_rank(vectors: Iterable[int]) -> int:
    """Rank over F_2 of integers read as bit vectors."""
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


@dataclass(frozen=True)
class StabTableau:
    """Generators ``(x, z, sign)`` of a stabilizer group on ``n`` qubits.

    Bit ``q - 1`` of ``x`` or ``z`` refers to qubit ``q``.  A row denotes the
    Hermitian Pauli ``sign * i**(x.z) X^x Z^z`` with ``sign`` in ``{+1, -1}``.
    """

    n: int
    rows: tuple[tuple[int, int, int], ...]

    def validate(self) -> None:
        if len(self.rows) != self.n:
            raise ValueError("a stabilizer state needs n generators")
        for (x1, z1, _), (x2, z2, _) in combinations(self.rows, 2):
            if (_popcount(x1 & z2) + _popcount(x2 & z1)) % 2:
                raise ValueError("generators do not commute")
        if f2_rank(x | (z << self.n) for x, z, _ in self.rows) != self.n:
            raise ValueError("generators are not independent")

    def symplectic_rows(self) -> list[int]:
        return [x | (z << self.n) for x, z, _ in self.rows]

    def entropy(self, subsystem: Iterable[int]) -> int:
        return stab_entropy(self, subsystem)

    def to_dense(self) -> DenseState:
        """Dense amplitude vector (used as an oracle and for orbit work)."""
        n = self.n
        dim = 2**n
        idx = np.arange(dim)
        ops = []
        for x, z, s in self.rows:
            phase = (1j) ** (_popcount(x & z) % 4) * s
            zsign = np.array([(-1) ** _popcount(int(b) & z) for b in idx])
            ops.append((x, phase * zsign))
        for start in range(dim):
            v = np.zeros(dim, complex)
            v[start] = 1
            for x, diag in ops:
                pv = np.zeros(dim, complex)
                pv[idx ^ x] = diag * v
                v = (v + pv) / 2
            if np.linalg.norm(v) > 1e-6:
                return DenseState.from_unnormalized(v)
        raise ValueError("tableau does not define a state")  # pragma: no cover


def stab_entropy(t: StabTableau, subsystem: Iterable[int]) -> int:
    """Entropy in bits of the reduced state on ``subsystem``."""
    sub = set(subsystem)
    if any(not 1 <= q <= t.n for q in sub):
        raise ValueError("subsystem out of range")
    amask = sum(1 << (q - 1) for q in sub)
    full = amask | (amask << t.n)
    return f2_rank(r & full for r in t.symplectic_rows()) - len(sub)


# ---------------------------------------------------------------------------
# Enumeration


def _echelon_subspaces(n: int, k: int) -> Iterator[tuple[list[int], list[int]]]:
    """Reduced echelon bases of all k-dim subspaces of F_2^n.

    Yields ``(basis, pivots)``; row ``i`` has its lowest set bit at
    ``pivots[i]`` and no other row has that bit set.
    """
    for pivots in combinations(range(n), k):
        pivot_set = set(pivots)
        free = [
            [b for b in range(p + 1, n) if b not in pivot_set] for p in pivots
        ]
        choices = [product((0, 1), repeat=len(f)) for f in free]
        for bits in product(*[list(c) for c in choices]):
            basis = []
            for p, f, bb in zip(pivots, free, bits):
                v = 1 << p
                for b, on in zip(f, bb):
                    if on:
                        v |= 1 << b
                basis.append(v)
            yield basis, list(pivots)


def _orthogonal_basis(n: int, basis: Sequence[int]) -> list[int]:
    vecs = [z for z in range(1 << n) if all(_popcount(z & x) % 2 == 0 for x in basis)]
    # reduce to an echelon basis
    out: list[int] = []
    for v in vecs:
        w = v
        for b in out:
            w = min(w, w ^ b)
        if w:
            out.append(w)
    # fully reduce for a canonical listing
    out.sort()
    for i in range(len(out)):
        for j in range(len(out)):
            if i != j and out[j] & (out[i] & -out[i]):
                out[j] ^= out[i]
    return sorted(out)


def enumerate_lagrangians(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every Lagrangian subspace once, as canonical ``(x, z)`` generator rows."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be between 1 and {MAX_N}")
    for k in range(n + 1):
        tri = [(i, j) for i in range(k) for j in range(i, k)]
        for basis, pivots in _echelon_subspaces(n, k):
            perp = _orthogonal_basis(n, basis)
            for bits in product((0, 1), repeat=len(tri)):
                B = [[0] * k for _ in range(k)]
                for (i, j), b in zip(tri, bits):
                    B[i][j] = B[j][i] = b
                rows = []
                for i in range(k):
                    z = 0
                    for j in range(k):
                        if B[i][j]:
                            z |= 1 << pivots[j]
                    rows.append((basis[i], z))
                rows.extend((0, y) for y in perp)
                yield tuple(rows)


def enumerate_stabilizer_states(n: int, validate: bool = False) -> Iterator[StabTableau]:
    """Stream all ``|S_n|`` stabilizer states as canonical tableaux."""
    for rows in enumerate_lagrangians(n):
        for signs in product((1, -1), repeat=n):
            t = StabTableau(n, tuple((x, z, s) for (x, z), s in zip(rows, signs)))
            if validate:
                t.validate()
            yield t


def stabilizer_state_count(n: int) -> int:
    """``2**n * prod_{k=0}^{n-1} (2**(n-k) + 1)``."""
    return 2**n * prod(2 ** (n - k) + 1 for k in range(n))


# ---------------------------------------------------------------------------
# Census


@dataclass(frozen=True)
class CensusRow:
    vector: tuple[int, ...]
    count: int
    holographic: bool
    violated: tuple[str, ...]


def _lagrangian_entropy_vector(n: int, rows: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    sym = [x | (z << n) for x, z in rows]
    out = []
    for sub in representative_subsets(n):
        amask = sum(1 << (q - 1) for q in sub)
        full = amask | (amask << n)
        out.append(f2_rank(r & full for r in sym) - len(sub))
    return tuple(out)


def entropy_census(n: int) -> list[CensusRow]:
    """Distinct entropy vectors with state multiplicities, sorted by vector."""
    counts: Counter[tuple[int, ...]] = Counter()
    for rows in enumerate_lagrangians(n):
        counts[_lagrangian_entropy_vector(n, rows)] += 2**n
    out = []
    for vec in sorted(counts):
        rep = check_inequalities(EntropyVector(n, tuple(float(c) for c in vec)))
        out.append(CensusRow(vec, counts[vec], rep.holographic, tuple(rep.violated())))
    return out


def census_to_csv(rows: Sequence[CensusRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["entropy_vector", "count", "holographic", "violated_inequalities"])
    for r in rows:
        w.writerow(
            [
                "(" + ",".join(map(str, r.vector)) + ")",
                r.count,
                "yes" if r.holographic else "no",
                ";".join(r.violated),
            ]
        )
    return buf.getvalue()


def census_to_json(n: int, rows: Sequence[CensusRow]) -> str:
    return json.dumps(
        {
            "n": n,
            "states": sum(r.count for r in rows),
            "distinct_vectors": len(rows),
            "non_holographic": sum(not r.holographic for r in rows),
            "mmi_violating": sum("MMI" in r.violated for r in rows),
            "subsets": [list(s) for s in representative_subsets(n)] if n >= 2 else [],
            "vectors": [
                {
                    "vector": list(r.vector),
                    "count": r.count,
                    "holographic": r.holographic,
                    "violated": list(r.violated),
                }
                for r in rows
            ],
        },
        indent=2,
        sort_keys=True,
    )
