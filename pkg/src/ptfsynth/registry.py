"""Built-in operations for n = 2, 3, 4 and published reference masks.

All operations use the package convention ``-1 = TRUE``. Reference masks are
stored exactly as printed, together with the monomial order they were printed
in, and converted with :meth:`TernaryMask.from_terms`.

Published three- and four-variable masks were produced under the opposite
polarity for AND/OR-type operations; they are kept verbatim as reference data
and are not guaranteed to reproduce the registry tables (see
``tests/test_registry.py`` for which rows do).
"""

from __future__ import annotations

import numpy as np

from .core import OperationSpec, TernaryMask, TruthTable, boolean_op, truth_table_of


def _count(*bits):
    return sum(b.astype(np.int8) for b in bits)


def _implies(p, q):
    return ~p | q


# ---------------------------------------------------------------------------
# n = 2: all sixteen functions, named as in the n=2 representability table

OPS_2 = {
    "false": lambda a, b: np.zeros_like(a),
    "true": lambda a, b: np.ones_like(a),
    "and": lambda a, b: a & b,
    "nand": lambda a, b: ~(a & b),
    "or": lambda a, b: a | b,
    "nor": lambda a, b: ~(a | b),
    "xor": lambda a, b: a ^ b,
    "xnor": lambda a, b: ~(a ^ b),
    "a": lambda a, b: a,
    "not_a": lambda a, b: ~a,
    "b": lambda a, b: b,
    "not_b": lambda a, b: ~b,
    "a_and_not_b": lambda a, b: a & ~b,
    "a_or_not_b": lambda a, b: a | ~b,
    "not_a_and_b": lambda a, b: ~a & b,
    "not_a_or_b": lambda a, b: ~a | b,
}

ALIASES_2 = {"implies": "not_a_or_b", "not_implies": "a_and_not_b"}

# "nonlinear" compositions, defined by their names
COMPOSED_2 = {
    "if_a_then_xor_else_and": lambda a, b: np.where(a, a ^ b, a & b),
    "if_a_then_and_else_or": lambda a, b: np.where(a, a & b, a | b),
    "xor_and_ab_b": lambda a, b: (a & b) ^ b,
    "and_xor_ab_a": lambda a, b: (a ^ b) & a,
    "or_and_xor": lambda a, b: (a & b) | (a ^ b),
    "majority_xor_and_or": lambda a, b: _count(a ^ b, a & b, a | b) >= 2,
    "parity_and_or": lambda a, b: (a & b) ^ (a | b),
    "xor_implies_and": lambda a, b: _implies(a ^ b, a & b),
}

OPS_3 = {
    "parity_3": lambda a, b, c: a ^ b ^ c,
    "majority_3": lambda a, b, c: _count(a, b, c) >= 2,
    "and_3": lambda a, b, c: a & b & c,
    "or_3": lambda a, b, c: a | b | c,
    "xor_ab_xor_c": lambda a, b, c: (a ^ b) ^ c,
    "and_ab_or_c": lambda a, b, c: (a & b) | c,
    "or_ab_and_c": lambda a, b, c: (a | b) & c,
    "implies_ab_c": lambda a, b, c: _implies(_implies(a, b), c),
    "xor_and_ab_c": lambda a, b, c: (a & b) ^ c,
    "and_xor_ab_c": lambda a, b, c: (a ^ b) & c,
}

# helper gates used by circuit construction
HELPERS_3 = {
    # t OR (e AND g): one step of the unsigned greater-than chain
    "or_a_and_bc": lambda a, b, c: a | (b & c),
}

OPS_4 = {
    "xor_4": lambda a, b, c, d: a ^ b ^ c ^ d,
    "and_4": lambda a, b, c, d: a & b & c & d,
    "or_4": lambda a, b, c, d: a | b | c | d,
    # ties count as TRUE
    "majority_4": lambda a, b, c, d: _count(a, b, c, d) >= 2,
    "threshold_3of4": lambda a, b, c, d: _count(a, b, c, d) >= 3,
    "exactly_2of4": lambda a, b, c, d: _count(a, b, c, d) == 2,
    "xor_ab_and_cd": lambda a, b, c, d: (a ^ b) & (c & d),
    "or_ab_xor_cd": lambda a, b, c, d: (a | b) ^ (c ^ d),
    "nested_xor": lambda a, b, c, d: ((a ^ b) ^ c) ^ d,
    "implies_chain": lambda a, b, c, d: _implies(a, _implies(b, _implies(c, d))),
}

_GROUPS = {
    2: {**OPS_2, **{k: OPS_2[v] for k, v in ALIASES_2.items()}, **COMPOSED_2},
    3: {**OPS_3, **HELPERS_3},
    4: OPS_4,
}

#: Names swept by "all" at each n.
STANDARD_OPS = {2: tuple(OPS_2), 3: tuple(OPS_3), 4: tuple(OPS_4)}

LINEAR_OPS_2 = ("xor", "and", "or", "implies", "xnor", "nand", "nor", "not_implies")
NONLINEAR_OPS_2 = tuple(COMPOSED_2)
PRIMITIVES_2 = ("xor", "and", "or", "implies")


def names(n: int | None = None) -> list[str]:
    if n is None:
        return [name for k in sorted(_GROUPS) for name in _GROUPS[k]]
    return list(_GROUPS[n])


def get_op(name: str, n: int | None = None) -> OperationSpec:
    """Look up a registry operation by name."""
    for k in ([n] if n is not None else sorted(_GROUPS)):
        fn = _GROUPS.get(k, {}).get(name)
        if fn is not None:
            return boolean_op(name, k, fn)
    raise KeyError(f"unknown operation {name!r}; known: {', '.join(names(n))}")


def standard_ops(n: int) -> list[OperationSpec]:
    return [get_op(name, n) for name in STANDARD_OPS[n]]


def table(name: str, n: int | None = None) -> TruthTable:
    return truth_table_of(get_op(name, n))


# ---------------------------------------------------------------------------
# published masks, verbatim

ORDER_2 = ("1", "a", "b", "ab")
ORDER_3 = ("1", "a", "b", "c", "ab", "ac", "bc", "abc")
ORDER_4 = ("1", "d", "c", "cd", "b", "bd", "bc", "bcd",
           "a", "ad", "ac", "acd", "ab", "abd", "abc", "abcd")

# learned n=2 masks for the four base operations
PHASE1_MASKS = {
    "xor": (0, 0, 0, 1),
    "and": (1, 1, 1, -1),
    "or": (-1, 1, 1, 1),
    "implies": (-1, -1, 1, -1),
}

# linear compositions: (parent, sign, composed mask)
LINEAR_COMPOSITIONS = {
    "xor": ("xor", 1, (0, 0, 0, 1)),
    "and": ("and", 1, (1, 1, 1, -1)),
    "or": ("or", 1, (-1, 1, 1, 1)),
    "implies": ("implies", 1, (-1, -1, 1, -1)),
    "xnor": ("xor", -1, (0, 0, 0, -1)),
    "nand": ("and", -1, (-1, -1, -1, 1)),
    "nor": ("or", -1, (1, -1, -1, -1)),
    "not_implies": ("implies", -1, (1, 1, -1, 1)),
}

# masks printed for the nonlinear compositions; these do not all compute the
# named function
NONLINEAR_MASKS = {
    "if_a_then_xor_else_and": (-1, 0, 1, 0),
    "if_a_then_and_else_or": (-1, 1, 0, 0),
    "xor_and_ab_b": (0, -1, 1, 0),
    "and_xor_ab_a": (0, 1, -1, 0),
    "or_and_xor": (-1, 1, 1, 0),
    "majority_xor_and_or": (-1, 1, 1, 0),
    "parity_and_or": (-1, 0, 0, 1),
    "xor_implies_and": (-1, 0, 0, -1),
}

# one perfect mask for each of the sixteen n=2 functions
TERNARY_2 = {
    "false": (1, 0, 0, 0),
    "true": (-1, 0, 0, 0),
    "and": (1, 1, 1, -1),
    "nand": (-1, -1, -1, 1),
    "or": (-1, 1, 1, 1),
    "nor": (1, -1, -1, -1),
    "xor": (0, 0, 0, 1),
    "xnor": (0, 0, 0, -1),
    "a": (0, 1, 0, 0),
    "not_a": (0, -1, 0, 0),
    "b": (0, 0, 1, 0),
    "not_b": (0, 0, -1, 0),
    "a_and_not_b": (1, 1, -1, 1),
    "a_or_not_b": (-1, 1, -1, -1),
    "not_a_and_b": (1, -1, 1, 1),
    "not_a_or_b": (-1, -1, 1, -1),
}

TERNARY_3 = {
    "parity_3": (-1, 0, 0, 0, 0, 0, 0, 1),
    "majority_3": (-1, 0, 1, 1, 0, 0, 0, -1),
    "and_3": (-1, 0, 0, 1, 0, 1, 1, 1),
    "or_3": (-1, 1, 1, 1, -1, -1, -1, 1),
    "xor_ab_xor_c": (-1, 0, 0, 0, 0, 0, 0, 1),
    "and_ab_or_c": (-1, 0, 1, 1, 1, 0, -1, -1),
    "or_ab_and_c": (-1, 0, 0, 1, -1, 1, 1, 0),
    "implies_ab_c": (-1, 0, -1, 1, -1, 0, 1, 1),
    "xor_and_ab_c": (-1, -1, 0, -1, 0, 1, 1, 1),
    "and_xor_ab_c": (-1, -1, 0, 1, 1, 0, 0, 1),
}

TERNARY_4 = {
    "xor_4": (0,) * 15 + (1,),
    "and_4": (-1,) + (1,) * 15,
    "or_4": (1, 1, 1, -1, 1, -1, -1, 1, 1, -1, -1, 1, -1, 1, 1, -1),
    "majority_4": (1, 1, 1, -1, 1, 0, 0, -1, 1, -1, 0, 0, -1, -1, -1, 1),
    "threshold_3of4": (-1, 1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1),
    "exactly_2of4": (-1, 0, 0, -1, 0, -1, -1, 0, 0, -1, -1, 0, -1, 0, 0, 1),
    "xor_ab_and_cd": (-1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1),
    "or_ab_xor_cd": (1, 1, 1, -1, 1, 1, 1, -1, 1, 1, 1, -1, -1, -1, -1, 1),
    "nested_xor": (0,) * 15 + (1,),
    "implies_chain": (1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1, -1, 1),
}

_PRINTED = {2: (ORDER_2, "ab"), 3: (ORDER_3, "abc"), 4: (ORDER_4, "abcd")}


def printed_mask(values, n: int, op_name: str | None = None) -> TernaryMask:
    """Convert a mask printed in the published monomial order for ``n``."""
    order, variables = _PRINTED[n]
    return TernaryMask.from_terms(order, values, tuple(variables), op_name)


def reference_masks(which: str) -> dict[str, TernaryMask]:
    """Published masks by table: ``phase1``, ``linear``, ``nonlinear``, ``n2``, ``n3``, ``n4``."""
    if which == "phase1":
        src, n = PHASE1_MASKS, 2
    elif which == "linear":
        src, n = {k: v[2] for k, v in LINEAR_COMPOSITIONS.items()}, 2
    elif which == "nonlinear":
        src, n = NONLINEAR_MASKS, 2
    elif which == "n2":
        src, n = TERNARY_2, 2
    elif which == "n3":
        src, n = TERNARY_3, 3
    elif which == "n4":
        src, n = TERNARY_4, 4
    else:
        raise KeyError(which)
    return {name: printed_mask(v, n, name) for name, v in src.items()}
