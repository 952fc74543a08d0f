"""Boolean-domain primitives: truth tables, character expansion, ternary masks.

Conventions used throughout the package:

* Boolean values live in ``{-1, +1}`` with ``-1 = TRUE`` and ``+1 = FALSE``.
* Input index ``idx`` of a truth table encodes the assignment bitwise: bit ``i``
  holds variable ``i`` (first declared variable in bit 0), and a set bit means
  the variable is TRUE (``-1``).
* Character index ``S`` is a bitmask over the same positions, so
  ``chi_S(x) = prod_{i in S} x_i``.
* ``sign(0) = +1`` (FALSE).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

TRUE = -1
FALSE = 1

#: Largest n for which a full truth table is materialized.
MAX_TABLE_N = 24

DEFAULT_VARIABLES = "abcdefghijklmnopqrstuvwxyz"


def default_variables(n: int) -> tuple[str, ...]:
    if n <= len(DEFAULT_VARIABLES):
        return tuple(DEFAULT_VARIABLES[:n])
    return tuple(f"x{i}" for i in range(n))


def popcount(x: int) -> int:
    return bin(x).count("1")


def degree(subset: int) -> int:
    """Degree of a character, i.e. the number of variables in the subset."""
    return popcount(subset)


def sign(values) -> np.ndarray:
    """Elementwise sign with ``sign(0) = +1``."""
    values = np.asarray(values)
    return np.where(values < 0, -1, 1).astype(np.int8)


def _check_pm1(x: np.ndarray) -> None:
    if not np.all((x == 1) | (x == -1)):
        raise ValueError("Boolean values must be -1 (TRUE) or +1 (FALSE)")


@lru_cache(maxsize=None)
def input_matrix(n: int) -> np.ndarray:
    """All ``2**n`` assignments as a ``(2**n, n)`` int8 array in table order."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    out = np.where(bits == 1, -1, 1).astype(np.int8)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def character_matrix(n: int) -> np.ndarray:
    """Sign matrix ``H[x, S] = chi_S(x)`` of shape ``(2**n, 2**n)``.

    This is the Sylvester-Hadamard matrix under the package's bit conventions;
    it is symmetric because input and character indices share bit positions.
    """
    if n > 14:
        raise ValueError("character matrix is only materialized for n <= 14")
    idx = np.arange(1 << n, dtype=np.int64)
    parity = np.zeros((1 << n, 1 << n), dtype=np.int64)
    anded = idx[:, None] & idx[None, :]
    for i in range(n):
        parity ^= (anded >> i) & 1
    out = np.where(parity == 1, -1, 1).astype(np.int8)
    out.flags.writeable = False
    return out


def index_of(x: Sequence[int]) -> int:
    """Truth-table index of a single ±1 assignment."""
    arr = np.asarray(x)
    _check_pm1(arr)
    return int(sum(1 << i for i, v in enumerate(arr) if v == TRUE))


def decode(idx: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`index_of`."""
    return tuple(TRUE if (idx >> i) & 1 else FALSE for i in range(n))


def expand_basis(x: Sequence[int]) -> np.ndarray:
    """Evaluate every character ``chi_S`` at the assignment ``x``.

    Entry ``S`` of the result is the product of ``x_i`` over the bits of ``S``;
    the empty character is always ``+1``.

    >>> expand_basis([-1, 1]).tolist()
    [1, -1, 1, -1]
    """
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError("expand_basis expects a single assignment")
    _check_pm1(arr)
    out = np.ones(1, dtype=np.int8)
    for v in arr:
        # doubling step: characters without variable i, then with it
        out = np.concatenate([out, out * np.int8(v)])
    return out


@dataclass(frozen=True)
class TruthTable:
    """Complete ±1 output vector of an n-variable Boolean function."""

    n: int
    outputs: np.ndarray
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        out = np.asarray(self.outputs, dtype=np.int8)
        if out.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} outputs for n={self.n}, got shape {out.shape}")
        _check_pm1(out)
        out = out.copy()
        out.flags.writeable = False
        object.__setattr__(self, "outputs", out)
        if not self.variables:
            object.__setattr__(self, "variables", default_variables(self.n))
        elif len(self.variables) != self.n:
            raise ValueError("variables must name every input")

    def __call__(self, x: Sequence[int]) -> int:
        return int(self.outputs[index_of(x)])

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.outputs, other.outputs)

    def __hash__(self):
        return hash((self.n, self.outputs.tobytes()))

    def __neg__(self) -> "TruthTable":
        return TruthTable(self.n, -self.outputs, self.variables)

    def to_dict(self) -> dict:
        return {"n": self.n, "variables": list(self.variables), "outputs": self.outputs.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "TruthTable":
        return cls(int(doc["n"]), np.asarray(doc["outputs"]), tuple(doc.get("variables", ())))


@dataclass(frozen=True)
class TernaryMask:
    """Coefficient vector in ``{-1, 0, +1}`` indexed by character bitmask."""

    n: int
    coeffs: np.ndarray
    variables: tuple[str, ...] = ()
    op_name: str | None = None

    def __post_init__(self):
        if self.n > MAX_TABLE_N:
            raise ValueError(f"dense masks are limited to n <= {MAX_TABLE_N}")
        c = np.asarray(self.coeffs)
        if c.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients for n={self.n}, got shape {c.shape}")
        if not np.all((c == -1) | (c == 0) | (c == 1)):
            raise ValueError("mask coefficients must be exactly -1, 0 or +1")
        c = c.astype(np.int8)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        if not self.variables:
            object.__setattr__(self, "variables", default_variables(self.n))
        elif len(self.variables) != self.n:
            raise ValueError("variables must name every input")

    @property
    def support(self) -> int:
        return int(np.count_nonzero(self.coeffs))

    @property
    def sparsity(self) -> float:
        return 1.0 - self.support / (1 << self.n)

    def __eq__(self, other):
        if not isinstance(other, TernaryMask):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.n, self.coeffs.tobytes()))

    def __neg__(self) -> "TernaryMask":
        return TernaryMask(self.n, -self.coeffs, self.variables)

    def __repr__(self):
        name = f" {self.op_name}" if self.op_name else ""
        return f"TernaryMask<n={self.n}{name}>{self.coeffs.tolist()}"

    def with_name(self, op_name: str | None) -> "TernaryMask":
        return TernaryMask(self.n, self.coeffs, self.variables, op_name)

    def terms(self) -> dict[str, int]:
        """Nonzero coefficients keyed by monomial label (``"1"``, ``"a"``, ``"ab"``...)."""
        return {subset_label(s, self.variables): int(c) for s, c in enumerate(self.coeffs) if c}

    @classmethod
    def from_terms(cls, labels: Sequence[str], values: Sequence[int],
                   variables: Sequence[str], op_name: str | None = None) -> "TernaryMask":
        """Build a mask from coefficients printed in an arbitrary monomial order.

        ``labels`` name each printed position (``"1"`` for the constant,
        otherwise the concatenated variable names), so tables printed as
        ``[1, a, b, c, ab, ...]`` or ``[1, d, c, cd, ...]`` can be read directly.
        """
        variables = tuple(variables)
        if len(variables) > MAX_TABLE_N:
            raise ValueError(f"dense masks are limited to n <= {MAX_TABLE_N}")
        if len(labels) != len(values):
            raise ValueError("labels and values differ in length")
        coeffs = np.zeros(1 << len(variables), dtype=np.int8)
        seen = set()
        for label, v in zip(labels, values):
            s = parse_subset(label, variables)
            if s in seen:
                raise ValueError(f"duplicate monomial {label!r}")
            seen.add(s)
            coeffs[s] = v
        return cls(len(variables), coeffs, variables, op_name)

    def in_order(self, labels: Sequence[str]) -> list[int]:
        """Coefficients listed in a printed monomial order."""
        return [int(self.coeffs[parse_subset(lab, self.variables)]) for lab in labels]

    def reindexed(self, variables: Sequence[str]) -> "TernaryMask":
        """Same polynomial with the bit positions reassigned to ``variables``."""
        variables = tuple(variables)
        if sorted(variables) != sorted(self.variables):
            raise ValueError("reindexing must permute the same variable names")
        labels = [subset_label(s, self.variables) for s in range(1 << self.n)]
        return TernaryMask.from_terms(labels, self.coeffs.tolist(), variables, self.op_name)

    def to_dict(self) -> dict:
        doc = {"n": self.n, "variables": list(self.variables), "coeffs": self.coeffs.tolist()}
        if self.op_name is not None:
            doc["op_name"] = self.op_name
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TernaryMask":
        return cls(int(doc["n"]), np.asarray(doc["coeffs"]), tuple(doc.get("variables", ())),
                   doc.get("op_name"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "TernaryMask":
        return cls.from_dict(json.loads(text))


def zero_mask(n: int) -> TernaryMask:
    return TernaryMask(n, np.zeros(1 << n, dtype=np.int8))


def subset_label(subset: int, variables: Sequence[str]) -> str:
    if subset == 0:
        return "1"
    names = [variables[i] for i in range(len(variables)) if (subset >> i) & 1]
    sep = "" if all(len(v) == 1 for v in variables) else "*"
    return sep.join(names)


def parse_subset(label: str, variables: Sequence[str]) -> int:
    if label in ("1", ""):
        return 0
    if "*" in label or label in tuple(variables):
        names = label.split("*")
    else:
        names = list(label)
    subset = 0
    for name in names:
        try:
            i = list(variables).index(name)
        except ValueError:
            raise ValueError(f"unknown variable {name!r} in monomial {label!r}") from None
        if (subset >> i) & 1:
            raise ValueError(f"repeated variable in monomial {label!r}")
        subset |= 1 << i
    return subset


def dot_products(mask: TernaryMask) -> np.ndarray:
    """Integer polynomial value ``sum_S w_S chi_S(x)`` at every input, in table order."""
    return character_matrix(mask.n).astype(np.int32) @ mask.coeffs.astype(np.int32)


def eval_mask(mask: TernaryMask, x: Sequence[int]) -> int:
    """Threshold a ternary polynomial at one assignment (``sign(0) = +1``)."""
    arr = np.asarray(x)
    if arr.shape != (mask.n,):
        raise ValueError(f"mask has n={mask.n} but input has shape {arr.shape}")
    total = int(np.dot(mask.coeffs.astype(np.int64), expand_basis(arr).astype(np.int64)))
    return TRUE if total < 0 else FALSE


def mask_table(mask: TernaryMask) -> TruthTable:
    """Truth table computed by a mask over all inputs."""
    return TruthTable(mask.n, sign(dot_products(mask)), mask.variables)


def accuracy(mask: TernaryMask, table: TruthTable) -> float:
    """Fraction of the ``2**n`` inputs on which ``mask`` reproduces ``table``."""
    if mask.n != table.n:
        raise ValueError(f"dimension mismatch: mask n={mask.n}, table n={table.n}")
    return float(np.mean(sign(dot_products(mask)) == table.outputs))


def support_stats(masks: Iterable[TernaryMask]) -> tuple[float, float]:
    """Mean support size and mean sparsity of a collection of masks."""
    masks = list(masks)
    if not masks:
        raise ValueError("support_stats needs at least one mask")
    if len({m.n for m in masks}) != 1:
        raise ValueError("masks must share n")
    return (float(np.mean([m.support for m in masks])),
            float(np.mean([m.sparsity for m in masks])))


# ---------------------------------------------------------------------------
# operations


Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OperationSpec:
    """A named n-input Boolean function.

    ``evaluator`` is vectorized: it maps an ``(m, n)`` array of ±1 assignments
    to ``m`` ±1 outputs. Calling the spec with a single assignment returns an int.
    """

    name: str
    n: int
    evaluator: Evaluator = field(repr=False, compare=False)
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.variables:
            object.__setattr__(self, "variables", default_variables(self.n))

    def __call__(self, x: Sequence[int]) -> int:
        arr = np.asarray(x, dtype=np.int8).reshape(1, self.n)
        _check_pm1(arr)
        return int(self.evaluator(arr)[0])


def boolean_op(name: str, n: int, fn: Callable[..., np.ndarray],
               variables: Sequence[str] = ()) -> OperationSpec:
    """Wrap a function of n boolean arrays (True = TRUE) as an :class:`OperationSpec`."""

    def evaluator(x: np.ndarray) -> np.ndarray:
        truth = np.asarray(x) == TRUE
        result = np.broadcast_to(fn(*(truth[:, i] for i in range(n))), truth.shape[:1])
        return np.where(result, TRUE, FALSE).astype(np.int8)

    return OperationSpec(name, n, evaluator, tuple(variables))


def truth_table_of(op: OperationSpec) -> TruthTable:
    """Materialize an operation over all ``2**n`` inputs."""
    if op.n > MAX_TABLE_N:
        raise ValueError(f"n={op.n} exceeds the materialization bound {MAX_TABLE_N}")
    out = np.asarray(op.evaluator(input_matrix(op.n)))
    return TruthTable(op.n, out, op.variables)


def table_from_bools(n: int, fn: Callable[..., np.ndarray]) -> TruthTable:
    return truth_table_of(boolean_op("anonymous", n, fn))
