"""Exact Clifford arithmetic over the ring Z[i, 1/sqrt(2)].

Every one- and two-qubit Clifford unitary can be written as a matrix of
Gaussian integers divided by a power of sqrt(2).  :class:`ExactMatrix` stores
exactly that: a flat tuple of integers ``(re00, im00, re01, im01, ...)`` in
row-major order, and the exponent ``k`` of the denominator ``sqrt(2)**k``.
After canonical reduction two matrices are equal as complex matrices iff
their encodings are equal, so Python tuple hashing gives O(1) group-element
lookup.

Two-qubit matrices use the ordering ``kron(qubit1, qubit2)``; the row index
of a basis ket ``|a1 a2>`` is ``2*a1 + a2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "ALPHABET",
    "CliffordElement",
    "ExactMatrix",
    "Relation",
    "RelationCatalog",
    "RelationResult",
    "canonical_mod_phase",
    "default_catalog",
    "gate",
    "is_local_tensor",
    "multiply",
    "omega",
    "parse_word",
    "verify_relations",
    "word_matrix",
]

#: Generator alphabet for two-qubit work.
ALPHABET: tuple[str, ...] = ("H1", "H2", "P1", "P2", "C12", "C21")

_SQRT2 = np.sqrt(2.0)


def _reduce(entries: Sequence[int], k: int) -> tuple[tuple[int, ...], int]:
    """Strip common factors of 2 against the sqrt(2)**k denominator."""
    if k < 2 or any(x & 1 for x in entries):
        return tuple(entries), k
    entries = [x >> 1 for x in entries]
    k -= 2
    while k >= 2 and not any(x & 1 for x in entries):
        entries = [x >> 1 for x in entries]
        k -= 2
    return tuple(entries), k


@dataclass(frozen=True)
class ExactMatrix:
    """A ``dim x dim`` matrix ``numerator / sqrt(2)**half_pow``.

    The constructor canonicalizes, so instances compare and hash by value.
    """

    dim: int
    entries: tuple[int, ...]
    half_pow: int = 0

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if len(self.entries) != 2 * self.dim * self.dim:
            raise ValueError(
                f"expected {2 * self.dim * self.dim} integers, got {len(self.entries)}"
            )
        if self.half_pow < 0:
            raise ValueError("half_pow must be non-negative")
        ent, k = _reduce(tuple(int(x) for x in self.entries), self.half_pow)
        object.__setattr__(self, "entries", ent)
        object.__setattr__(self, "half_pow", k)

    # -- constructors -------------------------------------------------
    @classmethod
    def from_gaussian(
        cls, rows: Sequence[Sequence[complex | tuple[int, int]]], half_pow: int = 0
    ) -> "ExactMatrix":
        """Build from nested rows of Gaussian integers.

        Entries may be ``(re, im)`` pairs or Python complex numbers with
        integral parts.
        """
        dim = len(rows)
        flat: list[int] = []
        for row in rows:
            if len(row) != dim:
                raise ValueError("matrix must be square")
            for z in row:
                if isinstance(z, tuple):
                    re_, im_ = z
                else:
                    zc = complex(z)
                    re_, im_ = zc.real, zc.imag
                    if re_ != int(re_) or im_ != int(im_):
                        raise ValueError(f"entry {z!r} is not a Gaussian integer")
                flat.extend((int(re_), int(im_)))
        return cls(dim, tuple(flat), half_pow)

    @classmethod
    def identity(cls, dim: int) -> "ExactMatrix":
        flat = [0] * (2 * dim * dim)
        for i in range(dim):
            flat[2 * (i * dim + i)] = 1
        return cls(dim, tuple(flat), 0)

    # -- views --------------------------------------------------------
    @property
    def numerator(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        d, e = self.dim, self.entries
        return tuple(
            tuple((e[2 * (r * d + c)], e[2 * (r * d + c) + 1]) for c in range(d))
            for r in range(d)
        )

    def encode(self) -> tuple[int, ...]:
        """Serialization order used for lexicographic comparison."""
        return self.entries + (self.half_pow,)

    def to_numpy(self) -> np.ndarray:
        e = np.asarray(self.entries, dtype=float)
        z = (e[0::2] + 1j * e[1::2]).reshape(self.dim, self.dim)
        return z / _SQRT2**self.half_pow

    # -- algebra ------------------------------------------------------
    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        return multiply(self, other)

    def adjoint(self) -> "ExactMatrix":
        d, e = self.dim, self.entries
        flat = [0] * len(e)
        for r in range(d):
            for c in range(d):
                src = 2 * (r * d + c)
                dst = 2 * (c * d + r)
                flat[dst] = e[src]
                flat[dst + 1] = -e[src + 1]
        return ExactMatrix(d, tuple(flat), self.half_pow)

    def scale_by_i(self, power: int = 1) -> "ExactMatrix":
        """Multiply by ``i**power`` (no change to the denominator)."""
        e = self.entries
        power %= 4
        if power == 0:
            return self
        if power == 1:
            flat = [v for a, b in zip(e[0::2], e[1::2]) for v in (-b, a)]
        elif power == 2:
            flat = [-v for v in e]
        else:
            flat = [v for a, b in zip(e[0::2], e[1::2]) for v in (b, -a)]
        return ExactMatrix(self.dim, tuple(flat), self.half_pow)

    def scale_by_omega(self) -> "ExactMatrix":
        """Multiply by omega = (1 + i)/sqrt(2)."""
        e = self.entries
        flat = [v for a, b in zip(e[0::2], e[1::2]) for v in (a - b, a + b)]
        return ExactMatrix(self.dim, tuple(flat), self.half_pow + 1)

    def is_unitary(self) -> bool:
        return multiply(self, self.adjoint()) == ExactMatrix.identity(self.dim)

    def to_bytes(self) -> bytes:
        """Binary form: dim, k, then row-major (re, im) as signed varints."""
        out = bytearray()
        for v in (self.dim, self.half_pow, *self.entries):
            _write_varint(out, v)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["ExactMatrix", int]:
        dim, offset = _read_varint(data, offset)
        k, offset = _read_varint(data, offset)
        vals = []
        for _ in range(2 * dim * dim):
            v, offset = _read_varint(data, offset)
            vals.append(v)
        return cls(dim, tuple(vals), k), offset

    def __repr__(self) -> str:
        return f"ExactMatrix(dim={self.dim}, half_pow={self.half_pow}, numerator={self.numerator})"


def _write_varint(out: bytearray, value: int) -> None:
    z = (value << 1) if value >= 0 else ((-value << 1) - 1)  # zigzag
    while True:
        byte = z & 0x7F
        z >>= 7
        if z:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _read_varint(data: bytes, offset: int) -> tuple[int, int]:
    shift = 0
    z = 0
    while True:
        if offset >= len(data):
            raise ValueError("truncated varint")
        byte = data[offset]
        offset += 1
        z |= (byte & 0x7F) << shift
        shift += 7
        if not byte & 0x80:
            break
    value = (z >> 1) if not z & 1 else -((z + 1) >> 1)
    return value, offset


def multiply(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """Exact product ``a @ b``."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    d = a.dim
    ea, eb = a.entries, b.entries
    flat = [0] * (2 * d * d)
    for r in range(d):
        for c in range(d):
            sr = si = 0
            for t in range(d):
                ia = 2 * (r * d + t)
                ib = 2 * (t * d + c)
                ar, ai = ea[ia], ea[ia + 1]
                if ar == 0 and ai == 0:
                    continue
                br, bi = eb[ib], eb[ib + 1]
                sr += ar * br - ai * bi
                si += ar * bi + ai * br
            flat[2 * (r * d + c)] = sr
            flat[2 * (r * d + c) + 1] = si
    return ExactMatrix(d, tuple(flat), a.half_pow + b.half_pow)


def kron(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """Exact tensor product ``a (x) b``."""
    da, db = a.dim, b.dim
    d = da * db
    flat = [0] * (2 * d * d)
    na, nb = a.numerator, b.numerator
    for r1 in range(da):
        for c1 in range(da):
            ar, ai = na[r1][c1]
            if ar == 0 and ai == 0:
                continue
            for r2 in range(db):
                for c2 in range(db):
                    br, bi = nb[r2][c2]
                    idx = 2 * ((r1 * db + r2) * d + (c1 * db + c2))
                    flat[idx] = ar * br - ai * bi
                    flat[idx + 1] = ar * bi + ai * br
    return ExactMatrix(d, tuple(flat), a.half_pow + b.half_pow)


def omega(dim: int = 4, power: int = 1) -> ExactMatrix:
    """The global phase ``omega**power`` times the identity."""
    m = ExactMatrix.identity(dim)
    for _ in range(power % 8):
        m = m.scale_by_omega()
    return m


def phase_multiples(m: ExactMatrix) -> list[ExactMatrix]:
    """``[omega**j * m for j in 0..7]``."""
    w = m.scale_by_omega()
    out = []
    for j in range(4):  # omega**(2j) = i**j
        out.append(m.scale_by_i(j))
        out.append(w.scale_by_i(j))
    return out


def canonical_mod_phase(m: ExactMatrix) -> ExactMatrix:
    """Lexicographically smallest encoding among the eight phase multiples."""
    return min(phase_multiples(m), key=ExactMatrix.encode)


def is_local_tensor(m: ExactMatrix) -> bool:
    """Exact test whether a 4x4 matrix factors as ``A (x) B``.

    The realigned matrix ``R[(i1 j1), (i2 j2)] = M[(i1 i2), (j1 j2)]`` has
    rank one exactly when ``M`` is a tensor product.  Rank one is checked by
    comparing every entry against a nonzero pivot with Gaussian-integer
    cross products, so no rounding is involved.
    """
    if m.dim != 4:
        raise ValueError("is_local_tensor needs a 4x4 matrix")
    num = m.numerator
    R = [[(0, 0)] * 4 for _ in range(4)]
    for i1 in range(2):
        for i2 in range(2):
            for j1 in range(2):
                for j2 in range(2):
                    R[2 * i1 + j1][2 * i2 + j2] = num[2 * i1 + i2][2 * j1 + j2]
    pivot = next(
        ((p, q) for p in range(4) for q in range(4) if R[p][q] != (0, 0)), None
    )
    if pivot is None:
        return False
    p, q = pivot

    def gmul(x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
        return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])

    for a in range(4):
        for b in range(4):
            if gmul(R[a][b], R[p][q]) != gmul(R[a][q], R[p][b]):
                return False
    return True


# ---------------------------------------------------------------------------
# Generators and words


_H = ExactMatrix.from_gaussian([[1, 1], [1, -1]], 1)
_P = ExactMatrix.from_gaussian([[1, 0], [0, 1j]])
_I2 = ExactMatrix.identity(2)
_CNOT = ExactMatrix.from_gaussian(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
)
_SWAP = ExactMatrix.from_gaussian(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
)

_GATE_RE = re.compile(r"^(H|P)(\d+)$|^C(\d)(\d)$|^C(\d+),(\d+)$")


@dataclass(frozen=True)
class CliffordElement:
    """An exact Clifford unitary together with the qubits it acts on.

    ``qubit_support`` lists qubit labels (1-based) in the tensor order of the
    matrix, e.g. ``(1, 2)`` for a 4x4 matrix in ``kron(q1, q2)`` order.
    """

    matrix: ExactMatrix
    qubit_support: tuple[int, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if 2 ** len(self.qubit_support) != self.matrix.dim:
            raise ValueError("support size does not match matrix dimension")
        if len(set(self.qubit_support)) != len(self.qubit_support):
            raise ValueError("repeated qubit in support")

    def __matmul__(self, other: "CliffordElement") -> "CliffordElement":
        if self.qubit_support != other.qubit_support:
            raise ValueError("elements act on different supports")
        label = f"{self.label} {other.label}".strip()
        return CliffordElement(self.matrix @ other.matrix, self.qubit_support, label)

    def equals_mod_phase(self, other: "CliffordElement") -> bool:
        return self.qubit_support == other.qubit_support and canonical_mod_phase(
            self.matrix
        ) == canonical_mod_phase(other.matrix)

    def to_numpy(self) -> np.ndarray:
        return self.matrix.to_numpy()


def _parse_gate_name(name: str) -> tuple[str, tuple[int, ...]]:
    m = _GATE_RE.match(name.strip())
    if not m:
        raise ValueError(f"unknown generator name {name!r}")
    if m.group(1):
        return m.group(1), (int(m.group(2)),)
    if m.group(3):
        return "C", (int(m.group(3)), int(m.group(4)))
    return "C", (int(m.group(5)), int(m.group(6)))


def gate(name: str, n_qubits: int = 2) -> CliffordElement:
    """Return a generator as an exact :class:`CliffordElement`.

    ``name`` is ``H<i>``, ``P<i>`` or ``C<i><j>`` (``C<i>,<j>`` for labels
    above 9).  With ``n_qubits == 1`` the result is 2x2 on qubit 1.  Otherwise
    gates that touch only qubits 1 and 2 are returned as 4x4 matrices on the
    support ``(1, 2)`` so that words multiply directly; gates on other qubits
    use their own minimal support.
    """
    kind, qubits = _parse_gate_name(name)
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    for q in qubits:
        if not 1 <= q <= n_qubits:
            raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
    if kind == "C":
        c, t = qubits
        if c == t:
            raise ValueError("CNOT control and target must differ")
        if {c, t} == {1, 2}:
            mat = _CNOT if (c, t) == (1, 2) else _SWAP @ _CNOT @ _SWAP
            return CliffordElement(mat, (1, 2), name)
        return CliffordElement(_CNOT, (c, t), name)
    base = _H if kind == "H" else _P
    (q,) = qubits
    if n_qubits >= 2 and q in (1, 2):
        mat = kron(base, _I2) if q == 1 else kron(_I2, base)
        return CliffordElement(mat, (1, 2), name)
    return CliffordElement(base, (q,), name)


def parse_word(text: str) -> list[str]:
    """Expand a word such as ``"(C12 H2)^4 P1^3"`` into generator names.

    Tokens are whitespace separated; parentheses group and ``^n`` repeats
    the preceding token or group.  The leftmost generator is the leftmost
    matrix factor.  ``1`` denotes the empty word.
    """
    tokens = re.findall(r"\(|\)|\^\d+|[A-Za-z]\d+(?:,\d+)?|\b1\b", text)
    stack: list[list[str]] = [[]]
    last: list[str] | None = None
    for tok in tokens:
        if tok == "(":
            stack.append([])
            last = None
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced parentheses in word")
            grp = stack.pop()
            stack[-1].extend(grp)
            last = grp
        elif tok.startswith("^"):
            if last is None:
                raise ValueError("exponent without operand")
            stack[-1].extend(last * (int(tok[1:]) - 1))
            last = None
        elif tok == "1":
            last = []
        else:
            _parse_gate_name(tok)
            stack[-1].append(tok)
            last = [tok]
    if len(stack) != 1:
        raise ValueError("unbalanced parentheses in word")
    return stack[0]


def word_matrix(word: str | Iterable[str], n_qubits: int = 2) -> ExactMatrix:
    """Exact matrix of a generator word (leftmost symbol = leftmost factor)."""
    names = parse_word(word) if isinstance(word, str) else list(word)
    dim = 2 if n_qubits == 1 else 4
    m = ExactMatrix.identity(dim)
    for name in names:
        g = gate(name, n_qubits)
        if g.matrix.dim != dim:
            raise ValueError(f"generator {name} does not act on qubits 1 and 2")
        m = m @ g.matrix
    return m


# ---------------------------------------------------------------------------
# Relations


@dataclass(frozen=True)
class Relation:
    """``left = omega**phase * right``; ``mod_phase`` relaxes the phase."""

    name: str
    left: str
    right: str
    phase: int = 0
    mod_phase: bool = False


@dataclass(frozen=True)
class RelationResult:
    relation: Relation
    passed: bool
    detail: str = ""


class RelationCatalog(list):
    """A list of :class:`Relation` with a lookup helper."""

    def names(self) -> list[str]:
        return sorted({r.name for r in self})

    def by_name(self, name: str) -> list[Relation]:
        return [r for r in self if r.name == name]


def _both(name: str, template: str, right: str, **kw) -> list[Relation]:
    """Instantiate a relation for (i, j) = (1, 2) and (2, 1)."""
    out = []
    for i, j in ((1, 2), (2, 1)):
        sub = lambda s: (
            s.replace("{ij}", f"{i}{j}")
            .replace("{ji}", f"{j}{i}")
            .replace("{i}", str(i))
            .replace("{j}", str(j))
        )
        out.append(Relation(name, sub(template), sub(right), **kw))
    return out


def default_catalog() -> RelationCatalog:
    """The two-qubit presentation plus derived identities.

    Sixteen named identities, each instantiated for both qubit orderings
    (the cube relation also in both factor orders).  ``hpc_sixth`` is an
    extra phase identity outside the sixteen.
    """
    rels: list[Relation] = []
    rels += _both("hadamard_square", "H{i} H{i}", "1")
    rels += _both("phase_fourth", "P{i}^4", "1")
    rels += _both("hadamard_phase_cube", "(H{i} P{i})^3", "1", phase=1)
    rels += _both("hadamard_phase_cube", "(P{i} H{i})^3", "1", phase=1)
    rels += _both("cnot_square", "C{ij} C{ij}", "1")
    rels += _both("phase_phase_commute", "P{i}^3 P{j} P{i}", "P{j}")
    rels += _both("hadamard_hadamard_commute", "H{i} H{j} H{i}", "H{j}")
    rels += _both("phase_hadamard_commute", "P{i}^3 H{j} P{i}", "H{j}")
    rels += _both("four_generator", "C{ij} H{j} C{ij} P{j} C{ij} P{j}^3 H{j}", "P{i}")
    rels += _both("cnot_reversal", "H{i} H{j} C{ji} H{i} H{j}", "C{ij}")
    rels += _both("cnot_phase_fourth", "(C{ij} P{j})^4", "P{i}^2")
    rels += _both("cnot_braid", "C{ij} C{ji} C{ij}", "C{ji} C{ij} C{ji}")
    rels += _both("phase_cnot_commute", "P{i}^3 C{ij} P{i}", "C{ij}")
    rels += _both("cnot_hadamard_fourth", "(C{ij} H{j})^4", "P{i}^2")
    rels += _both("cnot_phase_swap", "C{ij} P{j} C{ij} P{j}", "P{j} C{ij} P{j} C{ij}")
    rels += _both("cnot_hadamard_phase_square", "(C{ij} H{i} P{j}^2)^2", "(P{j}^2 H{i} C{ij})^2")
    rels += _both("hadamard_transport", "C{ji} C{ij} C{ji} H{i} C{ji} C{ij} C{ji}", "H{j}")
    rels += _both("hpc_sixth", "(H{i} P{j} C{ij})^6", "1", phase=6)
    rels += _both("hpc_sixth", "(H{i} C{ij} P{j})^6", "1", phase=6)
    return RelationCatalog(rels)


#: The sixteen core identities; ``hpc_sixth`` is an extra phase check.
CORE_RELATIONS: tuple[str, ...] = (
    "hadamard_square",
    "phase_fourth",
    "hadamard_phase_cube",
    "cnot_square",
    "phase_phase_commute",
    "hadamard_hadamard_commute",
    "phase_hadamard_commute",
    "four_generator",
    "cnot_reversal",
    "cnot_phase_fourth",
    "cnot_braid",
    "phase_cnot_commute",
    "cnot_hadamard_fourth",
    "cnot_phase_swap",
    "cnot_hadamard_phase_square",
    "hadamard_transport",
)


def verify_relations(catalog: RelationCatalog | None = None) -> list[RelationResult]:
    """Evaluate every relation as an exact matrix identity."""
    if catalog is None:
        catalog = default_catalog()
    results = []
    for rel in catalog:
        lhs = word_matrix(rel.left)
        rhs = omega(4, rel.phase) @ word_matrix(rel.right)
        if rel.mod_phase:
            ok = canonical_mod_phase(lhs) == canonical_mod_phase(rhs)
        else:
            ok = lhs == rhs
        detail = "" if ok else f"lhs={lhs.to_numpy().round(6).tolist()}"
        results.append(RelationResult(rel, ok, detail))
    return results


def iter_words(alphabet: Sequence[str], length: int) -> Iterator[list[str]]:
    """All words of exactly ``length`` symbols (small lengths only)."""
    if length == 0:
        yield []
        return
    for w in iter_words(alphabet, length - 1):
        for a in alphabet:
            yield w + [a]
