"""
Multi-bit circuits from ternary gates
=====================================

Adders, equality and comparison are assembled from small exact masks and
checked against machine-integer oracles, exhaustively when narrow and by
seeded sampling when wide.
"""

from ptfsynth.circuit import (build_comparator, build_equality, build_ripple_adder, evaluate,
                              int_assignment, read_int, verify_exhaustive, verify_random)

adder = build_ripple_adder(32)
x, y = 0xDEADBEEF, 0x12345678
out = evaluate(adder, {**int_assignment("x", x, 32), **int_assignment("y", y, 32), "cin": 1})
print(hex(read_int(out, [f"s{i}" for i in range(32)] + ["cout"])), hex(x + y))

# %%
for c in (build_ripple_adder(4), build_comparator(6), build_equality(8)):
    r = verify_exhaustive(c)
    print(f"{c.name:<10} {c.bits:>3} bits  {r.samples:>6} inputs  errors {r.errors}")

# %%
for c in (build_ripple_adder(128), build_comparator(128), build_equality(128)):
    r = verify_random(c, None, 200_000, seed=1)
    print(f"{c.name:<10} {c.bits:>3} bits  errors {r.errors}  bound {r.error_bound:.2e}")

# %%
# A broken carry is caught immediately.
from ptfsynth.circuit import gate_mask
bad = adder.replace_gate(7, gate_mask("parity_3"))
print("faulty adder errors", verify_random(bad, None, 10_000).errors)
