"""Entropy vectors of pure states and the holographic inequality battery.

For a pure state on ``n`` qubits, ``S_I = S_{I^c}``, so one entropy per
complementary pair suffices.  The representative of a pair is the smaller
side; on a tie it is the side containing qubit 1.  Components are ordered by
subset size and then lexicographically, giving ``2**(n-1) - 1`` entries:

* ``n = 3``: ``(S_1, S_2, S_3)``
* ``n = 4``: ``(S_1, S_2, S_3, S_4; S_12, S_13, S_14)``

Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Iterable, Sequence

import numpy as np

from .state_space import DenseState, schmidt

__all__ = [
    "EntropyVector",
    "InequalityReport",
    "check_inequalities",
    "entropy_function",
    "entropy_vector",
    "representative_subsets",
    "shannon_bits",
]

SATURATION_TOL = 1e-9


@lru_cache(maxsize=None)
def representative_subsets(n: int) -> tuple[tuple[int, ...], ...]:
    """One subset per complementary pair, in (size, lexicographic) order."""
    if n < 2:
        raise ValueError("entropy vectors need at least two qubits")
    reps = []
    for size in range(1, n // 2 + 1):
        for sub in combinations(range(1, n + 1), size):
            if 2 * size == n and 1 not in sub:
                continue
            reps.append(sub)
    return tuple(reps)


def _complement(sub: Iterable[int], n: int) -> tuple[int, ...]:
    s = set(sub)
    return tuple(q for q in range(1, n + 1) if q not in s)


def canonical_subset(sub: Iterable[int], n: int) -> tuple[int, ...]:
    """The representative of ``sub``'s complementary pair."""
    s = tuple(sorted(set(sub)))
    c = _complement(s, n)
    if len(s) < len(c) or (len(s) == len(c) and 1 in s):
        return s
    return c


def shannon_bits(values: np.ndarray) -> float:
    v = np.asarray(values, float)
    v = v[v > 1e-15]
    return float(-(v * np.log2(v)).sum())


@dataclass(frozen=True)
class EntropyVector:
    """Reduced entropy vector of an ``n``-party pure state, in bits."""

    n: int
    components: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.components) != 2 ** (self.n - 1) - 1:
            raise ValueError("wrong number of components")
        if min(self.components, default=0) < -1e-12:
            raise ValueError("entropies must be non-negative")

    @property
    def subsets(self) -> tuple[tuple[int, ...], ...]:
        return representative_subsets(self.n)

    def entropy(self, subsystem: Iterable[int]) -> float:
        """``S_I`` for any subset (0 for the empty and full sets)."""
        s = tuple(sorted(set(subsystem)))
        if not s or len(s) == self.n:
            return 0.0
        return self.components[self.subsets.index(canonical_subset(s, self.n))]

    def rounded(self, decimals: int = 8) -> tuple[float, ...]:
        return tuple(round(c, decimals) + 0.0 for c in self.components)

    def as_ints(self) -> tuple[int, ...]:
        out = tuple(int(round(c)) for c in self.components)
        if any(abs(a - b) > 1e-8 for a, b in zip(out, self.components)):
            raise ValueError("entropy vector is not integral")
        return out

    def format(self, decimals: int = 4) -> str:
        """Tuple style with ``;`` between cardinality blocks."""
        blocks: list[list[str]] = []
        last = None
        for sub, c in zip(self.subsets, self.components):
            if len(sub) != last:
                blocks.append([])
                last = len(sub)
            txt = f"{c:.{decimals}f}".rstrip("0").rstrip(".") if decimals else str(c)
            blocks[-1].append(txt or "0")
        return "(" + "; ".join(",".join(b) for b in blocks) + ")"


def entropy_function(state: DenseState) -> Callable[[Iterable[int]], float]:
    """A cached ``S_I`` oracle (bits) for every subset of the state's qubits."""
    n = state.n_qubits

    @lru_cache(maxsize=None)
    def _s(sub: tuple[int, ...]) -> float:
        if not sub or len(sub) == n:
            return 0.0
        return shannon_bits(schmidt(state, sub).values)

    def s(subsystem: Iterable[int]) -> float:
        return _s(canonical_subset(subsystem, n) if set(subsystem) else ())

    return s


def entropy_vector(state: DenseState) -> EntropyVector:
    """Entropy vector of a pure state via Schmidt spectra."""
    n = state.n_qubits
    comps = []
    for sub in representative_subsets(n):
        comps.append(max(shannon_bits(schmidt(state, sub).values), 0.0))
    return EntropyVector(n, tuple(comps))


# ---------------------------------------------------------------------------
# Inequalities


@dataclass
class InequalityStatus:
    name: str
    status: str = "saturated"
    instances: int = 0
    violations: int = 0
    witness: tuple | None = None
    worst_gap: float = float("inf")


@dataclass
class InequalityReport:
    """Status per inequality family plus the holographic verdict."""

    results: dict[str, InequalityStatus] = field(default_factory=dict)

    @property
    def holographic(self) -> bool:
        return all(self.results[k].status != "violated" for k in ("SA", "AL", "MMI"))

    def status(self, name: str) -> str:
        return self.results[name].status

    def violated(self) -> list[str]:
        return [k for k, r in self.results.items() if r.status == "violated"]


def _disjoint_families(n: int, parts: int, allow_empty_last: bool = False):
    """Tuples of pairwise disjoint nonempty subsets (as bitmasks), unordered."""
    labels = range(parts + 1)  # label `parts` means "unused"
    seen = set()
    for assign in product(labels, repeat=n):
        masks = [0] * parts
        for q, lab in enumerate(assign):
            if lab < parts:
                masks[lab] |= 1 << q
        if any(m == 0 for m in masks[: parts - 1 if allow_empty_last else parts]):
            continue
        key = tuple(masks)
        if key in seen:
            continue
        seen.add(key)
        yield key


def _mask_to_tuple(mask: int) -> tuple[int, ...]:
    return tuple(q + 1 for q in range(mask.bit_length()) if mask >> q & 1)


def check_inequalities(
    v: EntropyVector,
    full_entropy_fn: Callable[[Iterable[int]], float] | None = None,
    tol: float = SATURATION_TOL,
) -> InequalityReport:
    """Evaluate SA, AL, SSA and MMI over all disjoint subset families.

    Gaps are ``lhs - rhs`` of each inequality written as ``lhs >= rhs``;
    a gap below ``-tol`` is a violation, within ``tol`` a saturation.
    """
    n = v.n
    fn = full_entropy_fn or v.entropy
    cache: dict[int, float] = {}

    def S(mask: int) -> float:
        if mask not in cache:
            cache[mask] = fn(_mask_to_tuple(mask)) if mask else 0.0
        return cache[mask]

    report = InequalityReport({k: InequalityStatus(k) for k in ("SA", "AL", "SSA", "MMI")})

    def record(name: str, gap: float, witness: tuple) -> None:
        r = report.results[name]
        r.instances += 1
        if gap < r.worst_gap:
            r.worst_gap = gap
        if gap < -tol:
            r.violations += 1
            if r.status != "violated":
                r.status = "violated"
                r.witness = tuple(_mask_to_tuple(m) for m in witness)
        elif gap > tol and r.status == "saturated":
            r.status = "satisfied"

    pairs = [(a, b) for a, b in _disjoint_families(n, 2) if a < b]
    for a, b in pairs:
        record("SA", S(a) + S(b) - S(a | b), (a, b))
        record("AL", S(a | b) - abs(S(a) - S(b)), (a, b))
    for a, b, c in _disjoint_families(n, 3, allow_empty_last=True):
        if a < b:
            record("SSA", S(a | c) + S(b | c) - S(a | b | c) - S(c), (a, b, c))
    for a, b, c in _disjoint_families(n, 3):
        if a < b < c:
            gap = S(a | b) + S(a | c) + S(b | c) - S(a) - S(b) - S(c) - S(a | b | c)
            record("MMI", gap, (a, b, c))
    return report
