"""Exhaustive search over ternary masks and strict-margin certificates."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import OperationSpec, TernaryMask, TruthTable, character_matrix, dot_products, truth_table_of

#: Largest n enumerated without an explicit override.
MAX_ENUM_N = 3

# base-3 digit -> coefficient; the digit order doubles as the tie-break order 0 < +1 < -1
DIGIT_VALUES = np.array([0, 1, -1], dtype=np.int8)


def candidate_block(n: int, start: int, stop: int) -> np.ndarray:
    """Masks with counter values ``start..stop-1`` as rows of a ``(k, 2**n)`` array.

    Digit ``i`` of the base-3 counter (least significant first) is the
    coefficient of character ``i``.
    """
    counters = np.arange(start, stop, dtype=np.int64)
    dim = 1 << n
    digits = np.empty((len(counters), dim), dtype=np.int8)
    for i in range(dim):
        digits[:, i] = counters % 3
        counters //= 3
    return DIGIT_VALUES[digits]


def enumerate_perfect_masks(table: TruthTable, allow_n4: bool = False,
                            chunk: int = 1 << 20) -> list[TernaryMask]:
    """Every ternary mask whose threshold reproduces ``table`` on all inputs.

    Results come back in base-3 counter order. ``n = 4`` (43M candidates) needs
    ``allow_n4=True``; larger n is never enumerated.
    """
    n = table.n
    if n > MAX_ENUM_N and not (allow_n4 and n == 4):
        raise ValueError(f"exhaustive enumeration is limited to n <= {MAX_ENUM_N}; "
                         "use spectral synthesis for larger n")
    H = character_matrix(n).astype(np.int16)
    target_neg = table.outputs < 0
    total = 3 ** (1 << n)
    found = []
    for start in range(0, total, chunk):
        block = candidate_block(n, start, min(total, start + chunk))
        dots = block.astype(np.int16) @ H.T  # (k, inputs)
        ok = np.all((dots < 0) == target_neg, axis=1)
        for row in block[ok]:
            found.append(TernaryMask(n, row, table.variables))
    return found


def _selection_key(mask: TernaryMask):
    zeros = int(np.count_nonzero(mask.coeffs == 0))
    digits = tuple(0 if c == 0 else (1 if c == 1 else 2) for c in mask.coeffs.tolist())
    return (-zeros, digits)


def select_mask(candidates: Sequence[TernaryMask]) -> TernaryMask:
    """Sparsest candidate; ties go to the lexicographically smallest coefficients
    under the value order ``0 < +1 < -1``."""
    if not candidates:
        raise ValueError("no candidate masks to select from")
    return min(candidates, key=_selection_key)


def margins(mask: TernaryMask, table: TruthTable) -> np.ndarray:
    """``f(x) * (w . chi(x))`` at every input."""
    if mask.n != table.n:
        raise ValueError(f"dimension mismatch: mask n={mask.n}, table n={table.n}")
    return table.outputs.astype(np.int32) * dot_products(mask)


def margin_certificate(mask: TernaryMask, table: TruthTable) -> bool:
    """True iff every input is classified with margin at least 1 (no zero dot products)."""
    return bool(np.all(margins(mask, table) >= 1))


def min_margin(mask: TernaryMask, table: TruthTable) -> int:
    return int(margins(mask, table).min())


@dataclass
class EnumerationResult:
    op_name: str
    perfect_masks: list[TernaryMask] = field(repr=False)
    selected: TernaryMask | None
    certificate_holds: bool
    certified_count: int = 0

    @property
    def representable(self) -> bool:
        return bool(self.perfect_masks)

    def row(self) -> dict:
        sel = self.selected
        return {
            "op": self.op_name,
            "representable": self.representable,
            "perfect_count": len(self.perfect_masks),
            "mask": None if sel is None else sel.to_dict(),
            "support": None if sel is None else sel.support,
            "sparsity": None if sel is None else sel.sparsity,
            "certificate": self.certificate_holds,
            "certified_masks": self.certified_count,
        }


def enumerate_table(table: TruthTable, name: str = "", allow_n4: bool = False) -> EnumerationResult:
    perfect = enumerate_perfect_masks(table, allow_n4=allow_n4)
    if not perfect:
        return EnumerationResult(name, [], None, False)
    selected = select_mask(perfect).with_name(name or None)
    certified = sum(margin_certificate(m, table) for m in perfect)
    return EnumerationResult(name, perfect, selected, margin_certificate(selected, table), certified)


def enumerate_op(op: OperationSpec, allow_n4: bool = False) -> EnumerationResult:
    return enumerate_table(truth_table_of(op), op.name, allow_n4)


def representability_report(ops: Iterable[OperationSpec], workers: int = 1) -> list[EnumerationResult]:
    """Enumerate each operation; all must share one ``n <= 3``.

    Results keep the input order whatever the worker count.
    """
    ops = list(ops)
    if len({op.n for op in ops}) > 1:
        raise ValueError("operations must share n")
    if workers > 1 and len(ops) > 1:
        with ProcessPoolExecutor(min(workers, len(ops))) as pool:
            return list(pool.map(enumerate_table, [truth_table_of(op) for op in ops],
                                 [op.name for op in ops]))
    return [enumerate_op(op) for op in ops]


def best_perfect_mask(op: OperationSpec) -> TernaryMask:
    """Selected perfect mask for an operation; raises if none exists."""
    res = enumerate_op(op)
    if res.selected is None:
        raise ValueError(f"{op.name} has no ternary representation")
    return res.selected


def format_report(results: Sequence[EnumerationResult], order: Sequence[str] | None = None) -> str:
    lines = [f"{'op':<24} {'repr':>4} {'#perfect':>8} {'support':>7} {'sparsity':>8} {'cert':>4}  mask"]
    for r in results:
        if r.selected is None:
            lines.append(f"{r.op_name:<24} {'no':>4} {0:>8}")
            continue
        coeffs = r.selected.in_order(order) if order else r.selected.coeffs.tolist()
        lines.append(f"{r.op_name:<24} {'yes':>4} {len(r.perfect_masks):>8} {r.selected.support:>7} "
                     f"{r.selected.sparsity:>8.3f} {'yes' if r.certificate_holds else 'no':>4}  "
                     f"{' '.join(f'{c:+d}' if c else ' 0' for c in coeffs)}")
    return "\n".join(lines)
