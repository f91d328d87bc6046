"""Dicke-state entropies, symmetrized cones, star graphs and stabilizers.

Entropies in this module are in nats; ``to_bits`` converts for interop with
:mod:`stabatlas.entropy_lab`.  The entropy of ``ell`` qubits of ``|D^N_k>``
depends only on ``ell``: the reduced state is diagonal in the weight basis
with probabilities ``p_i = C(ell, i) C(N-ell, k-i) / C(N, k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, log
from typing import Sequence

import numpy as np

from .entropy_lab import EntropyVector, check_inequalities, representative_subsets
from .state_space import DenseState, make_state, pauli_expectations

__all__ = [
    "DickeConeReport",
    "DickeSpec",
    "DickeStabilizerReport",
    "StarGraph",
    "cardinality_conjecture",
    "dicke_entropy",
    "dicke_entropy_l_independent",
    "dicke_entropy_l_less_than_k",
    "dicke_entropy_vector",
    "dicke_stabilizers",
    "entanglement_cardinality",
    "pauli_stabilizer",
    "printed_l_less_than_k_prefactor",
    "shec_gaps",
    "sqec_gaps",
    "star_realization",
    "symmetrized_entropy",
    "to_bits",
    "w1_negative",
    "weight_probabilities",
]

LN2 = log(2.0)


def to_bits(nats: float) -> float:
    return nats / LN2


@dataclass(frozen=True)
class DickeSpec:
    """``N`` qubits with Hamming weight ``k`` (``0 < k <= N``)."""

    N: int
    k: int

    def __post_init__(self) -> None:
        if self.N < 1 or not 0 < self.k <= self.N:
            raise ValueError(f"need 0 < k <= N, got N={self.N}, k={self.k}")

    def state(self) -> DenseState:
        return make_state("dicke", self.N, self.k)

    @property
    def label(self) -> str:
        return f"D{self.N}_{self.k}"


def _check_ell(spec: DickeSpec, ell: int, allow_ends: bool = False) -> None:
    lo, hi = (0, spec.N) if allow_ends else (1, spec.N - 1)
    if not lo <= ell <= hi:
        raise ValueError(f"ell={ell} out of range for N={spec.N}")


def weight_probabilities(spec: DickeSpec, ell: int) -> list[float]:
    """``p_i`` for ``i = 0..min(ell, k)`` (zeros kept in place)."""
    total = comb(spec.N, spec.k)
    return [
        comb(ell, i) * comb(spec.N - ell, spec.k - i) / total
        for i in range(min(ell, spec.k) + 1)
    ]


def _xlogx_sum(counts: Sequence[int]) -> float:
    return sum(c * log(c) for c in counts if c > 0)


def dicke_entropy(spec: DickeSpec, ell: int, bits: bool = False) -> float:
    """Entanglement entropy of any ``ell`` qubits of ``|D^N_k>``."""
    _check_ell(spec, ell, allow_ends=True)
    s = -sum(p * log(p) for p in weight_probabilities(spec, ell) if p > 0)
    s = max(s, 0.0)
    return to_bits(s) if bits else s


def dicke_entropy_l_independent(spec: DickeSpec, ell: int) -> float:
    """``ln C(N,k) - C(N,k)^-1 sum c_i ln c_i`` with integer counts ``c_i``."""
    _check_ell(spec, ell, allow_ends=True)
    total = comb(spec.N, spec.k)
    counts = [comb(ell, i) * comb(spec.N - ell, spec.k - i) for i in range(min(ell, spec.k) + 1)]
    return log(total) - _xlogx_sum(counts) / total


def dicke_entropy_l_less_than_k(spec: DickeSpec, ell: int, prefactor: float | None = None) -> float:
    """Rewrite for ``ell < k`` with an explicit first-term prefactor.

    The counts ``c_i`` sum to ``C(N, k)`` for every ``ell``, so the correct
    prefactor of ``ln C(N, k)`` is 1; ``prefactor`` lets callers evaluate
    other candidate coefficients against the defining sum.
    """
    if not 0 < ell < spec.k:
        raise ValueError("this rewrite needs 0 < ell < k")
    total = comb(spec.N, spec.k)
    counts = [comb(ell, i) * comb(spec.N - ell, spec.k - i) for i in range(ell + 1)]
    a = 1.0 if prefactor is None else prefactor
    return a * log(total) - _xlogx_sum(counts) / total


def printed_l_less_than_k_prefactor(spec: DickeSpec, ell: int) -> float:
    """``k!(N-k)!/(ell!(N-ell)!)``, a candidate prefactor that is not 1 in general."""
    from math import factorial

    return factorial(spec.k) * factorial(spec.N - spec.k) / (
        factorial(ell) * factorial(spec.N - ell)
    )


# ---------------------------------------------------------------------------
# Entropy vectors and cones


@dataclass
class DickeConeReport:
    spec: DickeSpec
    vector: EntropyVector
    ell_entropies: tuple[float, ...]
    holographic: bool
    mmi: str
    sqec_ok: bool
    shec_ok: bool
    flags: dict = field(default_factory=dict)


def sqec_gaps(s: Sequence[float]) -> list[float]:
    """``-S_{l-1} + 2 S_l - S_{l+1}`` for ``1 <= l <= ceil(N/2)``; ``s[l]`` is ``S_l``."""
    N = len(s) - 1
    top = min(-(-N // 2), N - 1)
    return [-s[l - 1] + 2 * s[l] - s[l + 1] for l in range(1, top + 1)]


def shec_gaps(s: Sequence[float]) -> list[float]:
    """``-l(l+1)S_{l-1} + 2(l-1)(l+1)S_l - l(l-1)S_{l+1}`` for ``2 <= l <= N/2``."""
    N = len(s) - 1
    return [
        -l * (l + 1) * s[l - 1] + 2 * (l - 1) * (l + 1) * s[l] - l * (l - 1) * s[l + 1]
        for l in range(2, N // 2 + 1)
    ]


def dicke_entropy_vector(spec: DickeSpec, tol: float = 1e-9) -> DickeConeReport:
    """Symmetric entropy vector (bits) with holographic and symmetric-cone verdicts."""
    if spec.N < 2:
        raise ValueError("entropy vectors need N >= 2")
    ell_s = tuple(dicke_entropy(spec, l) for l in range(spec.N + 1))
    comps = tuple(to_bits(ell_s[len(sub)]) for sub in representative_subsets(spec.N))
    vec = EntropyVector(spec.N, comps)
    for sub, c in zip(vec.subsets, comps):
        if c != comps[vec.subsets.index(next(t for t in vec.subsets if len(t) == len(sub)))]:
            raise AssertionError("equal-size subsystems must share one entropy")
    rep = check_inequalities(vec, tol=tol)
    return DickeConeReport(
        spec,
        vec,
        ell_s,
        rep.holographic,
        rep.status("MMI"),
        all(g >= -tol for g in sqec_gaps(ell_s)),
        all(g >= -tol for g in shec_gaps(ell_s)),
        {k: rep.status(k) for k in ("SA", "AL", "SSA", "MMI")},
    )


# ---------------------------------------------------------------------------
# Star graphs


@dataclass(frozen=True)
class StarGraph:
    """``N`` unit legs and one leg of weight ``w`` attached to the purifier.

    ``min_cut(m)`` is ``min{m, N - 1 - m + w}``, the cut convention used for
    symmetric star graphs.  ``cut_size`` is the party count the graph is
    evaluated at and ``coefficient`` the prefactor it carries in the sum.
    """

    N: int
    w: float
    cut_size: int
    coefficient: float

    def min_cut(self, m: int | None = None) -> float:
        m = self.cut_size if m is None else m
        return min(float(m), self.N - 1 - m + self.w)

    def contribution(self) -> float:
        return self.coefficient * self.min_cut()


def symmetrized_entropy(spec: DickeSpec, ell: int) -> float:
    """``C(N,l)^-1 [C(N-1,l) S_l + C(N-1,N-l) S_{N-l}]``."""
    N = spec.N
    return (
        comb(N - 1, ell) * dicke_entropy(spec, ell)
        + comb(N - 1, N - ell) * dicke_entropy(spec, N - ell)
    ) / comb(N, ell)


def star_realization(spec: DickeSpec, ell: int) -> tuple[list[StarGraph], float]:
    """Star graphs whose weighted min-cuts sum to the symmetrized ``S~_ell``.

    One graph per nonzero weight probability ``p_i``.  Each graph carries
    ``p_i`` as coefficient and a weight solved from ``min-cut = -ln p_i``.
    The ``i = 0`` term is cut at ``ell`` parties and the others at
    ``N - ell``; a term falls back to the other side when its cut would be
    capped by the unit legs.  For ``k = 1`` this yields
    ``w1 = ell + ln(N/(N-ell)) - (N-1)`` and ``w2 = ln(N/ell) - ell + 1``.
    """
    N = spec.N
    if not 1 <= ell <= -(-N // 2) or ell >= N:
        raise ValueError(f"ell must satisfy 1 <= ell <= ceil(N/2) and ell < N")
    graphs = []
    for i, p in enumerate(weight_probabilities(spec, ell)):
        if p <= 0:
            continue
        target = -log(p)
        sides = (ell, N - ell) if i == 0 else (N - ell, ell)
        for c in sides:
            if target <= c + 1e-15:
                graphs.append(StarGraph(N, target - (N - 1 - c), c, p))
                break
        else:
            raise ValueError(f"term {i} cannot be realized on a symmetric star graph")
    total = sum(g.contribution() for g in graphs)
    return graphs, total


def w1_negative(N: int, ell: int) -> bool:
    """Closed-form window where the first ``k = 1`` weight is negative."""
    return ell < (N - 1) - log(N / (N - ell))


# ---------------------------------------------------------------------------
# Stabilizers


_PAULI_CHARS = "IXYZ"


def _pauli_label(x: int, z: int, n: int, sign: complex) -> str:
    out = []
    for q in range(n):
        xb, zb = x >> q & 1, z >> q & 1
        if xb and zb:  # X Z = -i Y
            sign *= -1j
        out.append(_PAULI_CHARS[{(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}[(xb, zb)]])
    prefix = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[sign]
    return prefix + "".join(out)


def pauli_stabilizer(state: DenseState, tol: float = 1e-9) -> list[tuple[int, int, complex]]:
    """All Pauli strings fixing the state up to phase, with the exact eigenvalue.

    An entry ``(x, z, s)`` means ``s * X^x Z^z`` fixes the state with
    eigenvalue ``+1``; ``s`` is a power of ``i``.
    """
    ex = pauli_expectations(state)
    out = []
    for x, z in zip(*np.nonzero(np.abs(np.abs(ex) - 1) < tol)):
        e = ex[x, z]
        s = complex(np.round(np.conj(e).real), np.round(np.conj(e).imag))
        out.append((int(x), int(z), s))
    return out


def _pauli_matrix_action(state: DenseState, x: int, z: int, sign: complex) -> np.ndarray:
    psi = state.amplitudes
    idx = np.arange(psi.size)
    zs = np.array([(-1) ** bin(i & z).count("1") for i in idx])
    out = np.zeros_like(psi)
    out[idx ^ x] = zs * psi
    return sign * out


def _hermitian_string(n: int, letters: dict[int, str], sign: int) -> tuple[int, int, complex]:
    """``sign`` times a tensor product of X/Y/Z letters, as ``(x, z, s)`` with X^x Z^z."""
    x = z = 0
    s: complex = sign
    for q, c in letters.items():
        if c in "XY":
            x |= 1 << (q - 1)
        if c in "YZ":
            z |= 1 << (q - 1)
        if c == "Y":  # Y = i X Z
            s *= 1j
    return x, z, s


def claimed_pauli_stabilizers(spec: DickeSpec) -> dict[str, tuple[int, int, complex]]:
    N, k = spec.N, spec.k
    all_q = range(1, N + 1)
    out = {"parity": _hermitian_string(N, {q: "Z" for q in all_q}, (-1) ** k)}
    if k == N:
        for q in all_q:
            out[f"-Z{q}"] = _hermitian_string(N, {q: "Z"}, -1)
        for a in all_q:
            for b in all_q:
                if a < b:
                    out[f"Z{a}Z{b}"] = _hermitian_string(N, {a: "Z", b: "Z"}, 1)
    if N == 2 * k:
        out["all-X"] = _hermitian_string(N, {q: "X" for q in all_q}, 1)
        out["all-Y"] = _hermitian_string(N, {q: "Y" for q in all_q}, 1)
    return out


CLAIMED_C2 = {
    "edge": ("1", "H2 C12 H2", "C12 C21 C12", "H2 C12 H2 C12 C21 C12"),
    "middle": ("1", "C12 C21 C12"),
}


@dataclass
class DickeStabilizerReport:
    spec: DickeSpec
    pauli_stabilizer: list[str]
    pauli_orbit: int
    hc_stabilizer: list[str]
    hc_orbit: int
    c2_stabilizer: list[str]
    c2_orbit: int
    claims_checked: list[str]


def dicke_stabilizers(spec: DickeSpec, tol: float = 1e-9) -> DickeStabilizerReport:
    """Brute-force Pauli and two-qubit Clifford stabilizers with claim checks."""
    from .clifford_core import word_matrix
    from .group_engine import GroupError, close_subgroup, stabilizer_subgroup

    if spec.N > 8:
        raise ValueError("dicke_stabilizers supports N <= 8")
    state = spec.state()
    n = spec.N
    stab = pauli_stabilizer(state, tol)
    checked = []
    for name, (x, z, s) in claimed_pauli_stabilizers(spec).items():
        moved = _pauli_matrix_action(state, x, z, s)
        if not np.allclose(moved, state.amplitudes, atol=1e-10):
            raise GroupError(f"claimed Pauli stabilizer {name} does not fix {spec.label}")
        checked.append(f"pauli:{name}")
    pauli_orbit = 4**n // len(stab)
    hc_orbit = c2_orbit = 0
    hc_words: list[str] = []
    c2_words: list[str] = []
    if n >= 2:
        hc = close_subgroup(["H1", "H2", "C12", "C21"], mod_phase=True)
        c2 = close_subgroup(["H1", "H2", "P1", "P2", "C12", "C21"], mod_phase=True)
        hs = stabilizer_subgroup(hc, state, tol)
        cs = stabilizer_subgroup(c2, state, tol)
        hc_words = [hc.word_string(i) for i in hs]
        c2_words = [c2.word_string(i) for i in cs]
        hc_orbit, c2_orbit = hc.order // len(hs), c2.order // len(cs)
        kind = None
        if n >= 3 and spec.k in (1, n - 1):
            kind = "edge"
        elif 1 < spec.k < n - 1:
            kind = "middle"
        if kind:
            claimed = {c2.index_of(word_matrix(w)) for w in CLAIMED_C2[kind]}
            if claimed != set(cs):
                raise GroupError(f"claimed C2 stabilizer for {spec.label} does not match")
            checked.append(f"c2:{kind}")
    return DickeStabilizerReport(
        spec,
        [_pauli_label(x, z, n, s) for x, z, s in stab],
        pauli_orbit,
        hc_words,
        hc_orbit,
        c2_words,
        c2_orbit,
        checked,
    )


# ---------------------------------------------------------------------------
# Entanglement cardinality


def orbit_entropy_values(spec: DickeSpec, decimals: int = 9) -> tuple[np.ndarray, set[float]]:
    """Entropy vectors (bits) across the ``(HC)_{1,2}`` orbit and their value set."""
    from .graph_atlas import reachability_graph
    from .group_engine import close_subgroup

    hc = close_subgroup(["H1", "H2", "C12", "C21"], mod_phase=True)
    g = reachability_graph(hc, spec.state(), state_label=spec.label)
    vecs = np.array(g.palette)
    return vecs, {round(float(v), decimals) + 0.0 for v in vecs.ravel()}


@lru_cache(maxsize=None)
def entanglement_cardinality(N: int, k: int = 1) -> int:
    """Number of distinct nonzero entanglement entropies on the ``(HC)_{1,2}`` orbit."""
    if N > 8:
        raise ValueError("entanglement_cardinality supports N <= 8")
    _, values = orbit_entropy_values(DickeSpec(N, k))
    return sum(1 for v in values if v > 1e-9)


def cardinality_conjecture(N: int) -> int:
    return (5 * N - 7) // 2
