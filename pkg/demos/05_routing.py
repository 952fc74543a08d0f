"""
Routing children onto frozen parents
====================================

Four primitive masks are frozen. Each child picks one parent through a
Sinkhorn-normalized routing matrix and one sign. Signs are what make the
negated functions reachable.
"""

import numpy as np

from ptfsynth import registry
from ptfsynth.route import (best_hard_routing, format_plan, harden_routing, negation_boundary,
                            sinkhorn_project)

parents = [m.with_name(k) for k, m in registry.reference_masks("phase1").items()]

# %%
# Soft routing from learned-looking logits, then the hard argmax.
logits = np.random.default_rng(0).normal(size=(4, 8)) + 4 * np.tile(np.eye(4), 2)
P = sinkhorn_project(logits)
print("column error", P.column_error(), "row error", P.row_error())
print("hard routing", harden_routing(P))

# %%
# The exact optimum for the eight linear compositions.
names = list(registry.LINEAR_OPS_2)
plan, acc = best_hard_routing([registry.table(k, 2) for k in names], parents, target_names=names)
print(format_plan(plan))

# %%
# Without signs, negated targets stall.
print(negation_boundary(parents, {k: registry.table(k, 2) for k in ("nand", "nor", "xnor")}))
