"""Dense n-qubit state vectors.

Basis index bit ``j`` holds qubit ``j + 1``: the rightmost binary digit of a
basis label is qubit 1.  Reshaping the amplitude vector in C order therefore
puts qubit ``n`` on tensor axis 0 and qubit 1 on the last axis.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .clifford_core import CliffordElement, ExactMatrix

__all__ = [
    "DenseState",
    "SchmidtData",
    "apply",
    "apply_matrix",
    "make_state",
    "parse_state_spec",
    "pauli_expectations",
    "schmidt",
]

NORM_TOL = 1e-12
CANON_THRESHOLD = 1e-10
RANK_THRESHOLD = 1e-12


@dataclass(frozen=True, eq=False)
class DenseState:
    """An immutable normalized state on ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        if amps.size != 2**self.n_qubits:
            raise ValueError(f"need {2**self.n_qubits} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > 1e-8:
            raise ValueError(f"state is not normalized (norm {norm})")
        amps /= norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amps: Sequence[complex] | np.ndarray) -> "DenseState":
        a = np.asarray(amps, dtype=complex).reshape(-1)
        n = int(round(np.log2(a.size)))
        if 2**n != a.size:
            raise ValueError("amplitude count must be a power of two")
        norm = np.linalg.norm(a)
        if norm < 1e-14:
            raise ValueError("cannot normalize the zero vector")
        return cls(n, a / norm)

    # -- tensor views -------------------------------------------------
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def axis_of(self, qubit: int) -> int:
        if not 1 <= qubit <= self.n_qubits:
            raise ValueError(f"qubit {qubit} out of range")
        return self.n_qubits - qubit

    def matricize(self, subsystem: Sequence[int]) -> np.ndarray:
        """``|I| x |I^c|`` reshape; rows follow ``kron`` order of ``subsystem``."""
        sub = list(subsystem)
        rest = [q for q in range(1, self.n_qubits + 1) if q not in sub]
        axes = [self.axis_of(q) for q in sub] + [self.axis_of(q) for q in rest]
        return np.transpose(self.tensor(), axes).reshape(2 ** len(sub), -1)

    def reduced_density(self, subsystem: Sequence[int]) -> np.ndarray:
        m = self.matricize(subsystem)
        return m @ m.conj().T

    # -- canonical form -----------------------------------------------
    @cached_property
    def canonical(self) -> np.ndarray:
        """Amplitudes rotated so the first non-negligible entry is real positive."""
        a = self.amplitudes
        nz = np.nonzero(np.abs(a) > CANON_THRESHOLD)[0]
        phase = a[nz[0]] / abs(a[nz[0]])
        out = a / phase
        out.setflags(write=False)
        return out

    def key(self, decimals: int = 8) -> bytes:
        """Hashable key for equality up to global phase."""
        c = np.round(self.canonical, decimals) + (0.0 + 0.0j)
        return c.tobytes()

    def equals_mod_phase(self, other: "DenseState", tol: float = 1e-9) -> bool:
        return self.n_qubits == other.n_qubits and abs(
            abs(np.vdot(self.amplitudes, other.amplitudes)) - 1
        ) < tol

    # -- I/O ------------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n_qubits,
                "qubit_order": "basis index bit j is qubit j+1",
                "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DenseState":
        data = json.loads(text)
        amps = np.array([complex(re_, im_) for re_, im_ in data["amplitudes"]])
        state = cls.from_unnormalized(amps)
        if state.n_qubits != int(data["n"]):
            raise ValueError("qubit count does not match amplitude count")
        return state

    def __repr__(self) -> str:
        return f"DenseState(n_qubits={self.n_qubits})"


@dataclass(frozen=True)
class SchmidtData:
    """Squared Schmidt coefficients of a bipartition, in descending order."""

    subsystem: tuple[int, ...]
    values: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.sum(self.values > RANK_THRESHOLD))


def apply_matrix(u: np.ndarray, support: Sequence[int], state: DenseState) -> DenseState:
    """Apply a ``2^k x 2^k`` matrix in ``kron`` order of ``support``."""
    support = list(support)
    n = state.n_qubits
    if any(not 1 <= q <= n for q in support):
        raise ValueError(f"support {support} out of range for {n} qubits")
    k = len(support)
    axes = [state.axis_of(q) for q in support]
    t = np.moveaxis(state.tensor(), axes, list(range(k)))
    shape = t.shape
    t = (u @ t.reshape(2**k, -1)).reshape(shape)
    t = np.moveaxis(t, list(range(k)), axes)
    return DenseState(n, t.reshape(-1))


def apply(element: CliffordElement | ExactMatrix, state: DenseState, support: Sequence[int] | None = None) -> DenseState:
    """Apply a Clifford element; bare 4x4 matrices act on qubits (1, 2)."""
    if isinstance(element, CliffordElement):
        return apply_matrix(element.to_numpy(), element.qubit_support, state)
    if support is None:
        support = (1, 2) if element.dim == 4 else (1,)
    return apply_matrix(element.to_numpy(), support, state)


def schmidt(state: DenseState, subsystem: Iterable[int]) -> SchmidtData:
    """Squared singular values of the subsystem reshape."""
    sub = tuple(sorted(set(subsystem)))
    if not sub or len(sub) >= state.n_qubits:
        raise ValueError("subsystem must be a nonempty proper subset")
    m = state.matricize(sub)
    s = np.linalg.svd(m, compute_uv=False)
    vals = np.sort(s**2)[::-1]
    return SchmidtData(sub, vals)


# ---------------------------------------------------------------------------
# Named states


def _basis_index(bits: dict[int, int]) -> int:
    return sum(b << (q - 1) for q, b in bits.items())


def make_state(kind: str, *args, **kwargs) -> DenseState:
    """Build a named state.

    ``kind`` is one of ``zeros(n)``, ``ghz(n)``, ``w(n)``, ``dicke(N, k)``,
    ``basis(bitstring)`` or ``amplitudes(list)``.  A basis bitstring lists
    qubits left to right, so ``"01"`` has qubit 2 set.
    """
    kind = kind.lower()
    if kind == "zeros":
        (n,) = args
        a = np.zeros(2**n, complex)
        a[0] = 1
        return DenseState(n, a)
    if kind == "ghz":
        (n,) = args
        a = np.zeros(2**n, complex)
        a[0] = a[-1] = 1 / np.sqrt(2)
        return DenseState(n, a)
    if kind == "w":
        (n,) = args
        return make_state("dicke", n, 1)
    if kind == "dicke":
        n, k = args
        if n < 1 or not 0 <= k <= n:
            raise ValueError(f"invalid Hamming weight {k} for {n} qubits")
        a = np.zeros(2**n, complex)
        for ones in combinations(range(n), k):
            a[sum(1 << q for q in ones)] = 1
        return DenseState(n, a / np.sqrt(comb(n, k)))
    if kind == "basis":
        (bits,) = args
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid bitstring {bits!r}")
        n = len(bits)
        a = np.zeros(2**n, complex)
        a[_basis_index({q + 1: int(b) for q, b in enumerate(bits)})] = 1
        return DenseState(n, a)
    if kind == "amplitudes":
        (amps,) = args
        return DenseState.from_unnormalized(amps)
    if kind == "product":
        # product of single-qubit vectors listed for qubits 1..n
        vecs = [np.asarray(v, complex) for v in args[0]]
        t = np.array([1.0 + 0j])
        for v in reversed(vecs):
            t = np.kron(t, v)
        return DenseState.from_unnormalized(t)
    raise ValueError(f"unknown state kind {kind!r}")


_SPEC_RE = re.compile(r"^(dicke):(\d+),(\d+)$|^(ghz|w|zeros):(\d+)$|^file:(.+)$|^basis:([01]+)$")


def parse_state_spec(spec: str) -> DenseState:
    """Parse ``dicke:N,k``, ``ghz:N``, ``w:N``, ``zeros:N``, ``basis:0101`` or ``file:path``."""
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise ValueError(f"unrecognized state spec {spec!r}")
    if m.group(1):
        return make_state("dicke", int(m.group(2)), int(m.group(3)))
    if m.group(4):
        return make_state(m.group(4), int(m.group(5)))
    if m.group(7):
        return make_state("basis", m.group(7))
    return DenseState.from_json(Path(m.group(6)).read_text())


def pauli_expectations(state: DenseState) -> np.ndarray:
    """``<psi| X^x Z^z |psi>`` for all ``(x, z)`` as a ``(2^n, 2^n)`` array."""
    psi = state.amplitudes
    d = psi.size
    idx = np.arange(d)
    out = np.empty((d, d), complex)
    for x in range(d):
        v = np.conj(psi[idx ^ x]) * psi
        # Walsh-Hadamard transform over z: sum_i v[i] (-1)^{i.z}
        h = v.copy()
        step = 1
        while step < d:
            h = h.reshape(-1, 2, step)
            h = np.stack([h[:, 0] + h[:, 1], h[:, 0] - h[:, 1]], axis=1).reshape(-1)
            step *= 2
        out[x] = h
    return out
