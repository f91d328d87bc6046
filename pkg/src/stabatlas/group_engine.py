"""Subgroup closure, cosets and double cosets for two-qubit Clifford groups.

Groups are enumerated by breadth-first search over exact matrices, so every
element carries a shortest generator word and the search depth gives the
Cayley-graph diameter measured from the identity along generator arrows.
Element order inside a :class:`SubgroupTable` is the sort order of the
canonical encodings, which makes every downstream artifact deterministic.
"""

from __future__ import annotations

import hashlib
import logging
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .clifford_core import (
    ALPHABET,
    ExactMatrix,
    _read_varint,
    _reduce,
    _write_varint,
    canonical_mod_phase,
    gate,
    is_local_tensor,
    multiply,
)

logger = logging.getLogger(__name__)

__all__ = [
    "CosetSpace",
    "GroupError",
    "OrderFormula",
    "SubgroupTable",
    "close_subgroup",
    "cache_dir_default",
    "clear_memo",
    "clifford_order_formula",
    "closure_indices",
    "double_coset_count_formula",
    "double_cosets",
    "generating_set",
    "left_cosets",
    "local_subgroup",
    "orbit_size",
    "phase_reduction",
    "stabilizer_subgroup",
]

DEFAULT_CAP = 200_000
CACHE_VERSION = 1
_CACHE_MAGIC = b"STABATLAS-GROUP"


class GroupError(RuntimeError):
    """Raised when a group computation violates its own consistency checks."""


# ---------------------------------------------------------------------------
# Fast right multiplication by a sparse generator


def _sparse_columns(g: ExactMatrix) -> list[list[tuple[int, int, int]]]:
    d = g.dim
    num = g.numerator
    return [
        [(t, num[t][c][0], num[t][c][1]) for t in range(d) if num[t][c] != (0, 0)]
        for c in range(d)
    ]


def _right_mul_raw(
    entries: tuple[int, ...], k: int, cols: list[list[tuple[int, int, int]]], gk: int, d: int
) -> tuple[tuple[int, ...], int]:
    flat = [0] * (2 * d * d)
    for r in range(d):
        base = 2 * r * d
        for c, terms in enumerate(cols):
            sr = si = 0
            for t, gr, gi in terms:
                ar = entries[base + 2 * t]
                ai = entries[base + 2 * t + 1]
                sr += ar * gr - ai * gi
                si += ar * gi + ai * gr
            flat[base + 2 * c] = sr
            flat[base + 2 * c + 1] = si
    return _reduce(flat, k + gk)


def _mod_phase_key(entries: tuple[int, ...], k: int, d: int) -> tuple[int, ...]:
    """Encoding of the lexicographically smallest phase multiple."""
    return canonical_mod_phase(ExactMatrix(d, entries, k)).encode()


# ---------------------------------------------------------------------------
# Tables


@dataclass
class SubgroupTable:
    """An enumerated subgroup of the two-qubit Clifford group.

    ``elements`` are canonical :class:`ExactMatrix` values (phase-canonical
    representatives when ``mod_phase`` is set), sorted by encoding.
    ``words[i]`` is a shortest generator word for ``elements[i]`` and
    ``depth[i]`` its length.
    """

    generator_set: tuple[str, ...]
    mod_phase: bool
    elements: list[ExactMatrix]
    words: list[tuple[str, ...]]
    depth: list[int]
    _index: dict[tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._index:
            self._index = {m.encode(): i for i, m in enumerate(self.elements)}

    # -- basic queries ------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def diameter(self) -> int:
        return max(self.depth) if self.depth else 0

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    @property
    def identity_index(self) -> int:
        return self.index_of(ExactMatrix.identity(self.dim))

    def normalize(self, m: ExactMatrix) -> ExactMatrix:
        return canonical_mod_phase(m) if self.mod_phase else m

    def index_of(self, m: ExactMatrix) -> int:
        """Index of ``m`` (after phase normalization); ``KeyError`` if absent."""
        return self._index[self.normalize(m).encode()]

    def contains(self, m: ExactMatrix) -> bool:
        return self.normalize(m).encode() in self._index

    def mul(self, i: int, j: int) -> int:
        return self.index_of(multiply(self.elements[i], self.elements[j]))

    def inverse(self, i: int) -> int:
        return self.index_of(self.elements[i].adjoint())

    def word_string(self, i: int) -> str:
        return " ".join(self.words[i]) if self.words[i] else "1"

    @cached_property
    def float_matrices(self) -> np.ndarray:
        """All elements as a ``(order, dim, dim)`` complex array."""
        return np.stack([m.to_numpy() for m in self.elements])

    def generator_indices(self) -> list[int]:
        return [self.index_of(gate(g, 2).matrix) for g in self.generator_set]

    @cached_property
    def _float_index(self) -> dict[bytes, int]:
        keys = self._float_keys(self.float_matrices)
        index = {k: i for i, k in enumerate(keys)}
        if len(index) != self.order:
            raise GroupError("float keys collide; elements are not separable")
        return index

    def _float_keys(self, mats: np.ndarray) -> list[bytes]:
        flat = mats.reshape(len(mats), -1)
        if self.mod_phase:
            first = flat[np.arange(len(flat)), np.argmax(np.abs(flat) > 1e-6, axis=1)]
            flat = flat * (np.abs(first) / first)[:, None]
        flat = np.round(flat, 6) + (0.0 + 0.0j)
        return [row.tobytes() for row in flat]

    def indices_of_floats(self, mats: np.ndarray) -> np.ndarray:
        """Indices of a stack of floating-point group elements."""
        index = self._float_index
        try:
            return np.array([index[k] for k in self._float_keys(mats)], dtype=np.int64)
        except KeyError as exc:
            raise GroupError("matrix is not an element of this group") from exc

    @cached_property
    def left_action(self) -> dict[str, np.ndarray]:
        """``left_action[g][i]`` is the index of ``g * elements[i]``."""
        return {
            g: self.left_multiply_all(self.index_of(gate(g, 2).matrix))
            for g in self.generator_set
        }

    @cached_property
    def right_action(self) -> dict[str, np.ndarray]:
        """``right_action[g][i]`` is the index of ``elements[i] * g``."""
        return {
            g: self.right_multiply_all(self.index_of(gate(g, 2).matrix))
            for g in self.generator_set
        }

    def right_multiply_all(self, k: int) -> np.ndarray:
        """Permutation ``i -> index(elements[i] * elements[k])``."""
        perm = self.indices_of_floats(self.float_matrices @ self.float_matrices[k])
        self._spot_check(perm, lambda i: multiply(self.elements[i], self.elements[k]))
        return perm

    def left_multiply_all(self, h: int) -> np.ndarray:
        """Permutation ``i -> index(elements[h] * elements[i])``."""
        perm = self.indices_of_floats(self.float_matrices[h] @ self.float_matrices)
        self._spot_check(perm, lambda i: multiply(self.elements[h], self.elements[i]))
        return perm

    def _spot_check(self, perm: np.ndarray, exact) -> None:
        """Compare a few float lookups against exact arithmetic."""
        step = max(1, self.order // 7)
        for i in range(0, self.order, step):
            if self.index_of(exact(i)) != perm[i]:
                raise GroupError("floating-point lookup disagrees with exact product")

    def is_subgroup(self, indices: Iterable[int]) -> bool:
        idx = sorted(set(int(i) for i in indices))
        if self.identity_index not in idx:
            return False
        member = np.zeros(self.order, dtype=bool)
        member[idx] = True
        fm = self.float_matrices[idx]
        for a in idx:
            if not member[self.indices_of_floats(self.float_matrices[a] @ fm)].all():
                return False
        return True

    @cached_property
    def conjugacy_classes(self) -> np.ndarray:
        """Class label for every element (label = smallest member index)."""
        gens = self.generator_indices()
        inv = [self.inverse(g) for g in gens]
        parent = np.arange(self.order)

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        fm = self.float_matrices
        for g, gi in zip(gens, inv):
            perm = self.indices_of_floats(fm[g] @ fm @ fm[gi])
            for i in range(self.order):
                a, b = find(i), find(int(perm[i]))
                if a != b:
                    parent[max(a, b)] = min(a, b)
        return np.array([find(i) for i in range(self.order)], dtype=np.int64)

    # -- serialization ------------------------------------------------
    def to_bytes(self) -> bytes:
        out = bytearray(_CACHE_MAGIC)
        _write_varint(out, CACHE_VERSION)
        _write_varint(out, int(self.mod_phase))
        _write_varint(out, len(self.generator_set))
        for g in self.generator_set:
            _write_varint(out, ALPHABET.index(g))
        _write_varint(out, self.order)
        for m, w in zip(self.elements, self.words):
            out += m.to_bytes()
            _write_varint(out, len(w))
            for s in w:
                _write_varint(out, self.generator_set.index(s))
        digest = hashlib.sha256(bytes(out)).digest()
        return bytes(out) + digest

    @classmethod
    def from_bytes(cls, data: bytes) -> "SubgroupTable":
        if len(data) < 32 or hashlib.sha256(data[:-32]).digest() != data[-32:]:
            raise ValueError("checksum mismatch")
        data = data[:-32]
        if not data.startswith(_CACHE_MAGIC):
            raise ValueError("bad magic")
        off = len(_CACHE_MAGIC)
        version, off = _read_varint(data, off)
        if version != CACHE_VERSION:
            raise ValueError("cache version mismatch")
        mp, off = _read_varint(data, off)
        ng, off = _read_varint(data, off)
        gens = []
        for _ in range(ng):
            gi, off = _read_varint(data, off)
            gens.append(ALPHABET[gi])
        n, off = _read_varint(data, off)
        elements, words = [], []
        for _ in range(n):
            m, off = ExactMatrix.from_bytes(data, off)
            wl, off = _read_varint(data, off)
            w = []
            for _ in range(wl):
                s, off = _read_varint(data, off)
                w.append(gens[s])
            elements.append(m)
            words.append(tuple(w))
        if off != len(data):
            raise ValueError("trailing bytes")
        return cls(tuple(gens), bool(mp), elements, words, [len(w) for w in words])


def _canonical_gens(generators: Iterable[str]) -> tuple[str, ...]:
    gens = []
    for g in generators:
        g = g.strip()
        if g not in ALPHABET:
            raise ValueError(f"generator {g!r} not in alphabet {ALPHABET}")
        if g not in gens:
            gens.append(g)
    return tuple(sorted(gens, key=ALPHABET.index))


def cache_dir_default() -> Path:
    return Path(os.environ.get("STABATLAS_CACHE", ".stabatlas-cache"))


def _cache_path(cache_dir: Path, gens: tuple[str, ...], mod_phase: bool) -> Path:
    key = hashlib.sha256(
        f"v{CACHE_VERSION}|{','.join(gens)}|{int(mod_phase)}".encode()
    ).hexdigest()[:24]
    return cache_dir / f"group-{key}.bin"


# In-process memo: a subgroup is fully determined by its canonical generators.
_MEMO: dict[tuple[tuple[str, ...], bool], SubgroupTable] = {}


def close_subgroup(
    generators: Sequence[str],
    mod_phase: bool = False,
    cap: int = DEFAULT_CAP,
    cache_dir: str | os.PathLike | None = None,
) -> SubgroupTable:
    """Enumerate the subgroup generated by ``generators`` by BFS.

    Words are extended on the right, and generators are tried in alphabet
    order, so the recorded shortest words are deterministic.  With
    ``cache_dir`` set, a validated on-disk copy is reused and a corrupt one
    is silently rebuilt.
    """
    gens = _canonical_gens(generators)
    memo_key = (gens, bool(mod_phase))
    table = _MEMO.get(memo_key)
    path = None if cache_dir is None else _cache_path(Path(cache_dir), gens, mod_phase)
    if table is None and path is not None and path.exists():
        try:
            table = SubgroupTable.from_bytes(path.read_bytes())
        except ValueError as exc:
            logger.warning("discarding corrupt group cache %s: %s", path, exc)
            path.unlink()
    if table is None:
        table = _bfs(gens, mod_phase, cap)
    if table.order > cap:
        raise GroupError(f"group order {table.order} exceeds cap {cap}")
    _MEMO[memo_key] = table
    if path is not None and not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(table.to_bytes())
        tmp.replace(path)
    return table


def clear_memo() -> None:
    """Forget subgroups enumerated earlier in this process."""
    _MEMO.clear()


def _bfs(gens: tuple[str, ...], mod_phase: bool, cap: int) -> SubgroupTable:
    d = 4
    ident = ExactMatrix.identity(d)
    sparse = [(g, _sparse_columns(gate(g, 2).matrix), gate(g, 2).matrix.half_pow) for g in gens]

    def key_of(entries: tuple[int, ...], k: int) -> tuple[int, ...]:
        return _mod_phase_key(entries, k, d) if mod_phase else entries + (k,)

    start = key_of(ident.entries, 0)
    seen: dict[tuple[int, ...], tuple[str, ...]] = {start: ()}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        entries, k = cur[:-1], cur[-1]
        word = seen[cur]
        for name, cols, gk in sparse:
            e2, k2 = _right_mul_raw(entries, k, cols, gk, d)
            key = key_of(e2, k2)
            if key not in seen:
                seen[key] = word + (name,)
                if len(seen) > cap:
                    raise GroupError(f"closure exceeded cap of {cap} elements")
                queue.append(key)
    keys = sorted(seen)
    elements = [ExactMatrix(d, key[:-1], key[-1]) for key in keys]
    words = [seen[key] for key in keys]
    return SubgroupTable(gens, mod_phase, elements, words, [len(w) for w in words])


def phase_reduction(generators: Sequence[str]) -> dict[str, int]:
    """Order and diameter with and without phase for one generating set."""
    full = close_subgroup(generators, mod_phase=False)
    red = close_subgroup(generators, mod_phase=True)
    if full.order % red.order:
        raise GroupError("phase quotient order does not divide the group order")
    return {
        "order": full.order,
        "diameter": full.diameter,
        "phase_factor": full.order // red.order,
        "order_mod_phase": red.order,
        "diameter_mod_phase": red.diameter,
    }


# ---------------------------------------------------------------------------
# Subgroups and cosets


def closure_indices(table: SubgroupTable, generators: Iterable[int]) -> list[int]:
    """Indices of the subgroup of ``table`` generated by element indices."""
    gens = list(dict.fromkeys(generators))
    ident = table.identity_index
    seen = {ident}
    queue = deque([ident])
    gm = [table.elements[g] for g in gens]
    while queue:
        x = queue.popleft()
        for g in gm:
            y = table.index_of(multiply(table.elements[x], g))
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return sorted(seen)


def generating_set(table: SubgroupTable, subgroup: Iterable[int]) -> list[int]:
    """A small generating set for a subgroup, chosen greedily in index order."""
    members = sorted(set(subgroup))
    target = len(members)
    gens: list[int] = []
    current = {table.identity_index}
    for x in members:
        if len(current) == target:
            break
        if x in current:
            continue
        gens.append(x)
        current = set(closure_indices(table, gens))
    if current != set(members):
        raise GroupError("element set is not a subgroup")
    return gens


@dataclass
class CosetSpace:
    """A partition of a group into (double) coset classes."""

    parent: SubgroupTable
    classes: list[tuple[int, ...]]
    kind: str
    left_subgroup: tuple[int, ...] | None = None
    right_subgroup: tuple[int, ...] | None = None

    @cached_property
    def class_of(self) -> np.ndarray:
        out = np.full(self.parent.order, -1, dtype=np.int64)
        for c, members in enumerate(self.classes):
            out[list(members)] = c
        return out

    def __len__(self) -> int:
        return len(self.classes)

    def representatives(self) -> list[int]:
        return [c[0] for c in self.classes]


def _check_subgroup(table: SubgroupTable, idx: Sequence[int], what: str) -> tuple[int, ...]:
    members = tuple(sorted(set(int(i) for i in idx)))
    if any(not 0 <= i < table.order for i in members):
        raise GroupError(f"{what} is not a subset of the group")
    if table.order % len(members):
        raise GroupError(f"{what} order {len(members)} does not divide {table.order}")
    gens = generating_set(table, members)
    if set(closure_indices(table, gens)) != set(members):
        raise GroupError(f"{what} is not closed")
    return members


def _union_find_classes(n: int, perms: Iterable[np.ndarray]) -> list[tuple[int, ...]]:
    parent = np.arange(n)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for perm in perms:
        for i in range(n):
            a, b = find(i), find(int(perm[i]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [tuple(v) for _, v in sorted(groups.items())]


def left_cosets(table: SubgroupTable, h_elements: Sequence[int]) -> CosetSpace:
    """Left cosets ``g H``; each class is listed in increasing index order."""
    h = _check_subgroup(table, h_elements, "H")
    gens = generating_set(table, h)
    classes = _union_find_classes(table.order, (table.right_multiply_all(k) for k in gens))
    sizes = {len(c) for c in classes}
    if sizes != {len(h)} or len(classes) * len(h) != table.order:
        raise GroupError("left cosets do not have uniform size")
    return CosetSpace(table, classes, "left", None, h)


def double_cosets(
    table: SubgroupTable, h_elements: Sequence[int], k_elements: Sequence[int]
) -> CosetSpace:
    """Double cosets ``H g K``, cross-checked against the fixed-point count."""
    h = _check_subgroup(table, h_elements, "H")
    k = _check_subgroup(table, k_elements, "K")
    perms = [table.left_multiply_all(x) for x in generating_set(table, h)]
    perms += [table.right_multiply_all(x) for x in generating_set(table, k)]
    classes = _union_find_classes(table.order, perms)
    expected = double_coset_count_formula(table, h, k)
    if expected != len(classes):
        raise GroupError(
            f"double coset partition has {len(classes)} classes, formula gives {expected}"
        )
    return CosetSpace(table, classes, "double", h, k)


def double_coset_count_formula(
    table: SubgroupTable, h: Sequence[int], k: Sequence[int]
) -> int:
    """Count ``|H\\G/K|`` by averaging fixed points of ``g -> h g k``.

    ``h g k = g`` iff ``g^-1 h g = k^-1``, so the number of fixed pairs is
    ``sum over conjugacy classes C of |C n H| |C n K| |G| / |C|``.
    """
    labels = table.conjugacy_classes
    sizes = np.bincount(labels, minlength=table.order)
    ch = np.bincount(labels[list(h)], minlength=table.order)
    ck = np.bincount(labels[list(k)], minlength=table.order)
    num = 0
    for c in np.nonzero(ch * ck)[0]:
        num += int(ch[c]) * int(ck[c]) * table.order // int(sizes[c])
    den = len(h) * len(k)
    if num % den:
        raise GroupError("fixed-point sum is not divisible by |H||K|")
    return num // den


def local_subgroup(table: SubgroupTable) -> list[int]:
    """Indices of elements that factor as ``A (x) B``."""
    idx = [i for i, m in enumerate(table.elements) if is_local_tensor(m)]
    _check_subgroup(table, idx, "local subgroup")
    return idx


def stabilizer_subgroup(table: SubgroupTable, state, tolerance: float = 1e-9) -> list[int]:
    """Elements fixing ``state`` up to phase, acting on qubits 1 and 2.

    An element is kept when ``|<psi|U|psi>| >= 1 - tolerance``.  Overlaps in
    the band ``[1 - 10*tolerance, 1 - tolerance)`` are ambiguous and raise.
    """
    if not table.mod_phase:
        raise GroupError("stabilizer extraction expects a mod-phase table")
    rho = state.reduced_density((1, 2))
    overlaps = np.abs(np.einsum("ij,nji->n", rho, table.float_matrices))
    ambiguous = (overlaps >= 1 - 10 * tolerance) & (overlaps < 1 - tolerance)
    if ambiguous.any():
        raise GroupError("stabilizer test is ambiguous at this tolerance; use a smaller one")
    idx = [int(i) for i in np.nonzero(overlaps >= 1 - tolerance)[0]]
    _check_subgroup(table, idx, "stabilizer")
    return idx


def orbit_size(table: SubgroupTable, state, tolerance: float = 1e-9) -> int:
    return table.order // len(stabilizer_subgroup(table, state, tolerance))


# ---------------------------------------------------------------------------
# Closed forms


@dataclass(frozen=True)
class OrderFormula:
    n: int
    mod_phase_order: int
    with_phase_order: int
    local_order: int
    ratio: int


def clifford_order_formula(n: int) -> OrderFormula:
    """``|C_n|`` mod phase, with the eight phases, ``|(HP)_n| = 24**n``, and their ratio."""
    if n < 1:
        raise ValueError("n must be at least 1")
    mod = 2 ** (n * n + 2 * n) * prod(4**j - 1 for j in range(1, n + 1))
    local = 24**n
    return OrderFormula(n, mod, 8 * mod, local, mod // local)
