"""
Why the spectral start matters
==============================

The same sampler, seeded identically, is started from a uniform random mask
and from the quantized spectrum. Parity-like targets are the slow ones from
a random start.
"""

from ptfsynth import registry
from ptfsynth.synth import McmcConfig, format_summary, warmstart_experiment

ops = [registry.get_op(k, 4) for k in ("majority_4", "exactly_2of4", "or_ab_xor_cd", "xor_ab_and_cd")]
result = warmstart_experiment(ops, seeds=range(5), m=McmcConfig(max_sweeps=100_000))
print(format_summary(result.summary()))

for t in result.traces[:8]:
    print(t.op_name, t.init_strategy, t.steps_to_perfect)
