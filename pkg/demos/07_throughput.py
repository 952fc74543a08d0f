"""
Bit-sliced inference throughput
===============================

Each ternary gate compiles to XOR votes and a vertical popcount, so one
uint64 word evaluates 64 inputs at once.
"""

from ptfsynth.circuit import gate_mask, throughput_bench
from ptfsynth.cli import INFERENCE_MASKS
from ptfsynth.transform import fwht_benchmark, format_bench

masks = [gate_mask(k) for k in INFERENCE_MASKS]
packed = throughput_bench(masks, 1_000_000, repetitions=3, kernel="packed")
naive = throughput_bench(masks, 2_000, repetitions=1, kernel="naive")
print(f"packed {packed.mops:10.1f} MOps/s")
print(f"naive  {naive.mops:10.3f} MOps/s")

# %%
print(format_bench(fwht_benchmark(range(14, 21), repetitions=3)))
