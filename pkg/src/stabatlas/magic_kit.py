"""Entanglement-spectrum magic measures, anti-flatness and an Ising pipeline.

All logarithms are natural.  A :class:`Spectrum` holds the descending
eigenvalues of a reduced density matrix; ``padded`` zero-fills it to the
next power of two, which is the index space of the XOR formula for the
non-local stabilizer Renyi entropy estimate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import ceil, log, log2, pi
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .state_space import DenseState, pauli_expectations, schmidt

__all__ = [
    "IsingConfig",
    "MagicBounds",
    "Spectrum",
    "anti_flatness",
    "capacity",
    "capacity_pair_form",
    "capacity_variance_form",
    "ising_ground_state",
    "ising_hamiltonian",
    "ising_magic_scan",
    "m2_bounds",
    "m2_bruteforce",
    "m2_pair_closed_form",
    "m2_spectrum_estimate",
    "m2_averaged",
    "modified_renyi",
    "renyi",
    "smoothed_smax",
    "two_copy_state",
]

SUM_TOL = 1e-10
ZERO_EIG = 1e-15


@dataclass(frozen=True)
class Spectrum:
    """Descending non-negative eigenvalues summing to one."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        v = np.asarray(self.values, float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("a spectrum needs at least one value")
        if np.any(v < -1e-12):
            raise ValueError("eigenvalues must be non-negative")
        if abs(v.sum() - 1) > SUM_TOL:
            raise ValueError(f"eigenvalues sum to {v.sum()}, not 1")
        if np.any(np.diff(v) > 1e-15):
            raise ValueError("eigenvalues must be in descending order")

    @classmethod
    def from_values(cls, values: Iterable[float], normalize: bool = False) -> "Spectrum":
        """Sort descending, clip round-off negatives, optionally renormalize."""
        v = np.clip(np.asarray(list(values), float), 0.0, None)
        if normalize:
            v = v / v.sum()
        return cls(tuple(float(x) for x in np.sort(v)[::-1]))

    @classmethod
    def from_state(cls, state: DenseState, subsystem: Sequence[int]) -> "Spectrum":
        vals = schmidt(state, subsystem).values
        return cls.from_values(vals, normalize=True)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, float)

    @property
    def rank(self) -> int:
        return int(np.sum(self.array > ZERO_EIG))

    @property
    def n_qubits(self) -> int:
        """``ceil(log2(len))``: qubits of the padded index space."""
        return max(0, ceil(log2(len(self.values))))

    def padded(self) -> np.ndarray:
        out = np.zeros(2**self.n_qubits)
        out[: len(self.values)] = self.array
        return out

    @property
    def s_max(self) -> float:
        """``ln`` of the padded dimension."""
        return self.n_qubits * log(2.0)


def _as_spectrum(spec: Spectrum | Sequence[float]) -> Spectrum:
    return spec if isinstance(spec, Spectrum) else Spectrum.from_values(spec)


# ---------------------------------------------------------------------------
# Entropies and flatness


def renyi(spec: Spectrum | Sequence[float], alpha: float) -> float:
    """Renyi entropy ``S_alpha`` with the 0, 1 and infinity limits."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    lam = _as_spectrum(spec).array
    lam = lam[lam > ZERO_EIG]
    if alpha == 0:
        return log(lam.size)
    if alpha == 1:
        return float(-(lam * np.log(lam)).sum())
    if np.isinf(alpha):
        return float(-np.log(lam.max()))
    return float(np.log((lam**alpha).sum()) / (1 - alpha))


def anti_flatness(spec: Spectrum | Sequence[float]) -> float:
    """``sum l^3 - (sum l^2)^2``, the variance of ``l`` under ``l`` itself."""
    lam = _as_spectrum(spec).array
    return float((lam**3).sum() - (lam**2).sum() ** 2)


def modified_renyi(spec: Spectrum | Sequence[float], n: float) -> float:
    """``S~_n = ln sum l^n - n sum l^n ln l / sum l^n``."""
    lam = _as_spectrum(spec).array
    lam = lam[lam > ZERO_EIG]
    w = lam**n
    z = w.sum()
    return float(np.log(z) - n * (w * np.log(lam)).sum() / z)


def capacity_pair_form(spec: Spectrum | Sequence[float], n: float) -> float:
    """``-n sum_{k<l} l_k^n l_l^n ln^2(l_k/l_l) / (sum l^n)^2``."""
    if n <= 0:
        raise ValueError("n must be positive")
    lam = _as_spectrum(spec).array
    lam = lam[lam > ZERO_EIG]
    w = lam**n
    logs = np.log(lam)
    diff = (logs[:, None] - logs[None, :]) ** 2
    pairs = np.triu(np.outer(w, w) * diff, k=1).sum()
    return float(-n * pairs / w.sum() ** 2)


def capacity_variance_form(spec: Spectrum | Sequence[float], n: float, beta: float = 1.0) -> float:
    """``-n beta^2 Var(H)`` in the Gibbs state at inverse temperature ``n beta``.

    ``H`` is the entanglement Hamiltonian with energies ``E_k = -ln(l_k)/beta``;
    the result does not depend on ``beta``.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    lam = _as_spectrum(spec).array
    lam = lam[lam > ZERO_EIG]
    energies = -np.log(lam) / beta
    boltz = np.exp(-n * beta * (energies - energies.min()))
    p = boltz / boltz.sum()
    mean = (p * energies).sum()
    var = (p * (energies - mean) ** 2).sum()
    return float(-n * beta**2 * var)


def capacity(spec: Spectrum | Sequence[float], n: float, check: bool = True) -> float:
    """``d/dn S~_n``: pair form, cross-checked against the variance form."""
    a = capacity_pair_form(spec, n)
    if check:
        b = capacity_variance_form(spec, n)
        if abs(a - b) > 1e-8 * max(1.0, abs(a)):
            raise ArithmeticError(f"capacity forms disagree: {a} vs {b}")
    return a


def smoothed_smax(spec: Spectrum | Sequence[float], epsilon: float) -> float:
    """``ln r`` for the least ``r`` whose discarded tail mass is at most ``epsilon``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    lam = _as_spectrum(spec).array
    tails = np.concatenate([np.cumsum(lam[::-1])[::-1], [0.0]])  # tails[r] = sum_{i>=r}
    r = int(np.argmax(tails <= epsilon + 1e-15))
    return log(max(r, 1))


# ---------------------------------------------------------------------------
# Stabilizer Renyi entropy


def m2_bruteforce(state: DenseState) -> float:
    """``-ln sum_P p_P^2 - ln d`` over all ``4^n`` Pauli strings."""
    if state.n_qubits > 8:
        raise ValueError("m2_bruteforce supports at most 8 qubits")
    ex = np.abs(pauli_expectations(state)) ** 2
    d = state.amplitudes.size
    return float(-np.log((ex**2).sum() / d))


def two_copy_state(spec: Spectrum | Sequence[float]) -> DenseState:
    """``sum_i sqrt(l_i) |i>|i>`` on twice the padded qubit count."""
    lam = _as_spectrum(spec).padded()
    d = lam.size
    amps = np.zeros(d * d, complex)
    idx = np.arange(d)
    amps[idx + d * idx] = np.sqrt(lam)
    return DenseState.from_unnormalized(amps)


def m2_spectrum_estimate(spec: Spectrum | Sequence[float], ordered: bool = True) -> float:
    """XOR-sum formula on the zero-padded spectrum.

    ``ordered=False`` keeps the given order, which lets callers compare
    permutations; the default sorts descending.
    """
    if isinstance(spec, Spectrum):
        lam = spec.padded()
    else:
        raw = np.clip(np.asarray(spec, float), 0, None)
        if ordered:
            raw = np.sort(raw)[::-1]
        d = 2 ** max(0, ceil(log2(raw.size)))
        lam = np.zeros(d)
        lam[: raw.size] = raw
    d = lam.size
    if d > 256:
        raise ValueError("spectrum estimate supports rank up to 256")
    s = np.sqrt(lam)
    idx = np.arange(d)
    i2, i3, i4 = np.meshgrid(idx, idx, idx, indexing="ij")
    base = s[i2] * s[i3] * s[i4] * s[i2 ^ i3 ^ i4]
    total = 0.0
    for i1 in range(d):
        if s[i1] == 0:
            continue
        term = s[i1] * base * s[i3 ^ i2 ^ i1] * s[i4 ^ i2 ^ i1] * s[i1 ^ i3 ^ i4]
        total += float(term.sum())
    return float(-np.log(total))


def m2_pair_closed_form(lam: float) -> float:
    """``-ln(1 - 4l + 20l^2 - 32l^3 + 16l^4)`` for the spectrum ``{l, 1-l}``."""
    return float(-np.log(1 - 4 * lam + 20 * lam**2 - 32 * lam**3 + 16 * lam**4))


# ---------------------------------------------------------------------------
# Permutation-averaged estimate


def _xor_slots(i1: int, i2: int, i3: int, i4: int) -> tuple[int, ...]:
    return (i1, i2, i3, i4, i3 ^ i2 ^ i1, i4 ^ i2 ^ i1, i1 ^ i3 ^ i4, i2 ^ i3 ^ i4)


@lru_cache(maxsize=None)
def _multiplicity_patterns(d: int) -> dict[tuple[int, ...], int]:
    """Tuples ``(i1..i4)`` grouped by the sorted multiplicities of their 8 slots."""
    out: dict[tuple[int, ...], int] = {}
    for t in product(range(d), repeat=4):
        slots = _xor_slots(*t)
        counts = tuple(sorted((slots.count(v) for v in set(slots)), reverse=True))
        out[counts] = out.get(counts, 0) + 1
    return out


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


@lru_cache(maxsize=None)
def _mobius_terms(exponents: tuple[float, ...]) -> tuple[tuple[tuple[float, ...], float], ...]:
    """Set-partition expansion grouped by the multiset of block exponent sums."""
    from math import factorial

    terms: dict[tuple[float, ...], float] = {}
    for part in _set_partitions(list(range(len(exponents)))):
        mu = 1.0
        for block in part:
            mu *= (-1) ** (len(block) - 1) * factorial(len(block) - 1)
        key = tuple(sorted(sum(exponents[b] for b in block) for block in part))
        terms[key] = terms.get(key, 0.0) + mu
    return tuple(sorted(terms.items()))


def _injective_sum(lam: np.ndarray, exponents: Sequence[float]) -> float:
    """``sum over distinct (t_1..t_m) of prod_b lam[t_b]**exponents[b]`` by Mobius inversion."""
    powers: dict[float, float] = {}
    total = 0.0
    for key, mu in _mobius_terms(tuple(exponents)):
        prod_val = 1.0
        for e in key:
            if e not in powers:
                powers[e] = float((lam**e).sum())
            prod_val *= powers[e]
        total += mu * prod_val
    return total


def m2_averaged(spec: Spectrum | Sequence[float]) -> float:
    """``-ln`` of the XOR sum averaged over all orderings of the padded spectrum.

    Every index tuple contributes ``E[prod sqrt(l_sigma(slot))]`` over a
    uniformly random permutation ``sigma``, which equals the injective sum for
    its multiplicity pattern divided by the falling factorial ``d (d-1) ...``.
    Since ``-ln`` is convex and the descending order maximizes the sum, the
    result upper-bounds :func:`m2_spectrum_estimate`.
    """
    lam = _as_spectrum(spec).padded()
    d = lam.size
    if d > 16:
        raise ValueError("averaged estimate supports padded dimension up to 16")
    total = 0.0
    for counts, mult in _multiplicity_patterns(d).items():
        m = len(counts)
        falling = float(np.prod([d - j for j in range(m)]))
        total += mult * _injective_sum(lam, [c / 2 for c in counts]) / falling
    return float(-np.log(total))


def printed_average_formula(spec: Spectrum | Sequence[float]) -> float:
    """The four-term average with coefficients ``7/(r-3)`` and ``1/((r-3)(r-5)(r-6)(r-7))``."""
    lam = _as_spectrum(spec).padded()
    r = lam.size
    if r < 8:
        raise ValueError("the printed coefficients need r >= 8")
    s4 = float((lam**4).sum())
    s22 = _injective_sum(lam, [2, 2])
    s1111 = _injective_sum(lam, [1, 1, 1, 1])
    s8 = _injective_sum(lam, [0.5] * 8)
    inner = s4 + 7 * s22 + 7 / (r - 3) * s1111 + s8 / ((r - 3) * (r - 5) * (r - 6) * (r - 7))
    return float(-np.log(inner))


@dataclass(frozen=True)
class MagicBounds:
    estimate: float
    upper_2s2: float
    upper_antiflat: float
    averaged: float | None
    relative_flatness: float

    @property
    def bound(self) -> float:
        return min(self.upper_2s2, self.upper_antiflat)


def m2_bounds(spec: Spectrum | Sequence[float], tol: float = 1e-10) -> MagicBounds:
    """Estimate, its entropy bounds and the permutation average, with checks."""
    sp = _as_spectrum(spec)
    est = m2_spectrum_estimate(sp)
    s2 = renyi(sp, 2)
    s_half = renyi(sp, 0.5)
    avg = m2_averaged(sp) if sp.padded().size <= 16 else None
    out = MagicBounds(
        est,
        2 * s2,
        4 * (sp.s_max - s_half),
        avg,
        sp.s_max - renyi(sp, 1),
    )
    if est > out.bound + tol:
        raise ArithmeticError("estimate exceeds the entropy bound")
    if avg is not None and not est - tol <= avg <= out.upper_2s2 + tol:
        raise ArithmeticError("averaged estimate is out of order")
    return out


# ---------------------------------------------------------------------------
# Transverse-field Ising model


@dataclass(frozen=True)
class IsingConfig:
    """Periodic chain ``H = -cos(t) sum ZZ - sin(t) sum X + b sum Z``."""

    n: int
    theta: float
    bias: float = 0.0

    def __post_init__(self) -> None:
        if not 2 <= self.n <= 14:
            raise ValueError("Ising chains support 2 <= n <= 14")
        if self.bias < 0:
            raise ValueError("bias must be non-negative")

    @classmethod
    def from_g(cls, n: int, g: float, bias: float = 0.0) -> "IsingConfig":
        return cls(n, pi / 4 + g, bias)

    @property
    def g(self) -> float:
        return self.theta - pi / 4


def ising_hamiltonian(cfg: IsingConfig) -> scipy.sparse.csr_matrix:
    n, d = cfg.n, 2**cfg.n
    idx = np.arange(d)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    z = 1 - 2 * bits  # z[i, q-1] is the Z eigenvalue of qubit q
    zz = (z * np.roll(z, -1, axis=1)).sum(axis=1)
    diag = -np.cos(cfg.theta) * zz + cfg.bias * z.sum(axis=1)
    rows = [idx]
    cols = [idx]
    vals = [diag]
    for q in range(n):
        rows.append(idx)
        cols.append(idx ^ (1 << q))
        vals.append(np.full(d, -np.sin(cfg.theta)))
    return scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d)
    )


def ising_ground_state(cfg: IsingConfig, degeneracy_tol: float = 1e-10) -> DenseState:
    """Lowest eigenvector: dense solve up to 12 sites, Lanczos beyond."""
    h = ising_hamiltonian(cfg)
    if cfg.n <= 12:
        vals, vecs = scipy.linalg.eigh(h.toarray(), subset_by_index=[0, 1])
    else:
        vals, vecs = scipy.sparse.linalg.eigsh(h, k=2, which="SA", tol=1e-12)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        resid = np.linalg.norm(h @ vecs[:, 0] - vals[0] * vecs[:, 0])
        if resid > 1e-8:
            raise ArithmeticError(f"Lanczos did not converge (residual {resid})")
    if vals[1] - vals[0] < degeneracy_tol:
        raise ArithmeticError("degenerate ground space; use a bias field b > 0")
    v = vecs[:, 0]
    # fix the global sign so outputs are reproducible
    k = int(np.argmax(np.abs(v) > 1e-12))
    v = v * np.sign(v[k])
    return DenseState.from_unnormalized(v)


SCAN_COLUMNS = ("n", "g", "cut", "entropy", "anti_flatness", "capacity_n1", "m2_estimate")


def ising_magic_scan(
    n: int,
    gs: Sequence[float],
    cuts: Sequence[int],
    bias: float = 0.0,
) -> list[dict[str, float]]:
    """Ground state, contiguous-block spectrum and magic quantities per grid point."""
    rows = []
    for g in gs:
        state = ising_ground_state(IsingConfig.from_g(n, g, bias))
        for cut in cuts:
            sp = Spectrum.from_state(state, range(1, cut + 1))
            rows.append(
                {
                    "n": n,
                    "g": float(g),
                    "cut": cut,
                    "entropy": renyi(sp, 1),
                    "anti_flatness": anti_flatness(sp),
                    "capacity_n1": capacity(sp, 1.0),
                    "m2_estimate": m2_spectrum_estimate(sp),
                }
            )
    return rows


def scan_to_csv(rows: Sequence[dict[str, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for r in rows:
        w.writerow([r["n"], f"{r['g']:.12g}", r["cut"]] + [f"{r[c]:.12e}" for c in SCAN_COLUMNS[3:]])
    return buf.getvalue()
