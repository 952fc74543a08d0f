"""
Exact ternary masks for small Boolean functions
===============================================

Every n <= 3 function is searched over all 3**(2**n) ternary masks. We look
at the two-variable set, how many masks reproduce each function, and which
ones separate every input with a nonzero margin.
"""

from ptfsynth import registry
from ptfsynth.enumeration import enumerate_op, format_report, representability_report

# %%
# The sixteen two-variable functions. -1 encodes TRUE, sign(0) is FALSE.
results = representability_report(registry.standard_ops(2))
print(format_report(results, registry.ORDER_2))

# %%
# The sparsest AND mask sits on a zero dot product at one input; five other
# AND masks have a strict margin everywhere.
res = enumerate_op(registry.get_op("and", 2))
print("selected", res.selected.terms(), "certificate", res.certificate_holds,
      "certified masks", res.certified_count, "of", len(res.perfect_masks))

# %%
# Three variables: all ten standard operations are representable.
results = representability_report(registry.standard_ops(3))
print(format_report(results, registry.ORDER_3))
