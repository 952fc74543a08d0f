"""Sinkhorn-constrained routing with per-column sign modulation.

A routing matrix ``P`` (parents x children) is projected onto the column
stochastic matrices with uniform row budget ``n_children / m``; hard ``k = 1``
routing picks one parent per child, and a sign vector ``s`` turns the selected
parent mask into the composed child mask ``s_j * W[argmax_i P_ij]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .core import TernaryMask, TruthTable, accuracy

#: Fixed projection length used throughout.
SINKHORN_ITERATIONS = 20


@dataclass(frozen=True)
class RoutingMatrix:
    """Nonnegative ``(m, n_children)`` matrix with its row budget."""

    values: np.ndarray
    row_target: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def column_error(self) -> float:
        return float(np.max(np.abs(self.values.sum(axis=0) - 1.0)))

    def row_error(self) -> float:
        return float(np.max(np.abs(self.values.sum(axis=1) - self.row_target)))


def sinkhorn_project(logits, iterations: int = SINKHORN_ITERATIONS) -> RoutingMatrix:
    """Alternate row and column normalization of ``exp(logits)`` in the log domain.

    Each iteration first scales rows to ``n_children / m`` and then columns to
    one, so column sums are exact up to rounding after the final step. Row sums
    are only as close as ``iterations`` allows.

    Parameters
    ----------
    logits : array_like, shape (m, n_children)
        Finite real scores.
    iterations : int
        Number of row/column passes (default 20).
    """
    z = np.array(logits, dtype=np.float64)
    if z.ndim != 2 or 0 in z.shape:
        raise ValueError("logits must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    m, k = z.shape
    log_row = math.log(k / m)
    for _ in range(iterations):
        z -= logsumexp(z, axis=1, keepdims=True) - log_row
        z -= logsumexp(z, axis=0, keepdims=True)
    return RoutingMatrix(np.exp(z), k / m)


def harden_routing(P) -> tuple[int, ...]:
    """Per-column argmax; ties go to the lowest parent index."""
    values = np.asarray(P, dtype=np.float64)
    return tuple(int(i) for i in np.argmax(values, axis=0))


def hard_matrix(assignment: Sequence[int], m: int) -> np.ndarray:
    """One-hot ``(m, len(assignment))`` matrix of a hard routing."""
    out = np.zeros((m, len(assignment)), dtype=np.int8)
    out[list(assignment), np.arange(len(assignment))] = 1
    return out


def check_signs(signs) -> np.ndarray:
    s = np.asarray(signs)
    if s.ndim != 1 or not np.all(np.isin(s, (-1, 1))):
        raise ValueError("sign vector entries must be exactly -1 or +1")
    return s.astype(np.int8)


def signed_routing(P, signs) -> np.ndarray:
    """The factorized routing ``R = P * s[None, :]``."""
    return np.asarray(P, dtype=np.float64) * check_signs(signs)[None, :]


def spectral_norm(M, iterations: int = 1000, tol: float = 1e-14, seed: int = 0) -> float:
    """Largest singular value of ``M`` by power iteration on ``M^T M``."""
    A = np.asarray(M, dtype=np.float64)
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iterations):
        w = A.T @ (A @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        new = math.sqrt(norm)
        if abs(new - sigma) <= tol * max(1.0, new):
            sigma = new
            break
        sigma = new
    return float(np.linalg.norm(A @ v))


@dataclass(frozen=True)
class CompositionPlan:
    """Hard routing of children onto frozen parent masks, with one sign per child."""

    assignment: tuple[int, ...]
    signs: tuple[int, ...]
    parents: tuple[TernaryMask, ...]
    child_names: tuple[str, ...] = ()

    def __post_init__(self):
        assignment = tuple(int(a) for a in self.assignment)
        signs = tuple(int(s) for s in check_signs(self.signs))
        parents = tuple(self.parents)
        if len(signs) != len(assignment):
            raise ValueError("need one sign per child")
        if not parents:
            raise ValueError("need at least one parent mask")
        if any(a < 0 or a >= len(parents) for a in assignment):
            raise ValueError("assignment entry out of range for the parent set")
        if len({p.n for p in parents}) != 1:
            raise ValueError("parent masks must share n")
        if self.child_names and len(self.child_names) != len(assignment):
            raise ValueError("need one name per child")
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "child_names", tuple(self.child_names))

    @classmethod
    def from_routing(cls, P, signs, parents: Sequence[TernaryMask],
                     child_names: Sequence[str] = ()) -> "CompositionPlan":
        return cls(harden_routing(P), tuple(signs), tuple(parents), tuple(child_names))

    def __len__(self) -> int:
        return len(self.assignment)

    def parent_name(self, i: int) -> str:
        return self.parents[i].op_name or f"parent{i}"

    def records(self) -> list[dict]:
        """One ``{child, parent, sign, mask}`` record per child."""
        out = []
        for j in range(len(self)):
            mask = compose_mask(self, j)
            out.append({
                "child": self.child_names[j] if self.child_names else f"child{j}",
                "parent": self.parent_name(self.assignment[j]),
                "sign": self.signs[j],
                "mask": mask.coeffs.tolist(),
            })
        return out

    def to_dict(self) -> dict:
        return {
            "parents": [p.to_dict() for p in self.parents],
            "compositions": self.records(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CompositionPlan":
        parents = [TernaryMask.from_dict(p) for p in doc["parents"]]
        by_name = {p.op_name or f"parent{i}": i for i, p in enumerate(parents)}
        recs = doc["compositions"]
        plan = cls(tuple(by_name[r["parent"]] for r in recs), tuple(r["sign"] for r in recs),
                   tuple(parents), tuple(r["child"] for r in recs))
        for j, r in enumerate(recs):
            if compose_mask(plan, j).coeffs.tolist() != list(r["mask"]):
                raise ValueError(f"record {r['child']!r} does not match its parent and sign")
        return plan


def compose_mask(plan: CompositionPlan, child: int) -> TernaryMask:
    """Selected parent mask times the child's sign (still exactly ternary)."""
    if not 0 <= child < len(plan):
        raise IndexError(f"child {child} out of range for {len(plan)} children")
    parent = plan.parents[plan.assignment[child]]
    name = plan.child_names[child] if plan.child_names else None
    return TernaryMask(parent.n, plan.signs[child] * parent.coeffs.astype(np.int16),
                       parent.variables, name)


@dataclass(frozen=True)
class LinearChoice:
    """Best ``(parent, sign)`` for one target, plus every pair attaining it."""

    target: str
    parent: int
    sign: int
    accuracy: float
    optima: tuple[tuple[int, int], ...]


def solve_linear_composition(targets: Sequence[TruthTable], parents: Sequence[TernaryMask],
                             allow_signs: bool = True,
                             target_names: Sequence[str] = ()) -> list[LinearChoice]:
    """Exact search over every ``(parent, sign)`` pair for each target.

    Ties go to the lowest parent index, then to sign ``+1``. With
    ``allow_signs=False`` only sign ``+1`` is tried.
    """
    parents = list(parents)
    if not parents:
        raise ValueError("parent set is empty")
    ns = {p.n for p in parents} | {t.n for t in targets}
    if len(ns) > 1:
        raise ValueError("targets and parents must share n")
    names = list(target_names) or [f"target{i}" for i in range(len(targets))]
    sign_set = (1, -1) if allow_signs else (1,)
    out = []
    for name, table in zip(names, targets):
        scores = {(i, s): accuracy(p if s == 1 else -p, table)
                  for i, p in enumerate(parents) for s in sign_set}
        best = max(scores.values())
        optima = tuple(k for k, v in scores.items() if v == best)
        parent, sign = optima[0]
        out.append(LinearChoice(name, parent, sign, best, optima))
    return out


def best_hard_routing(targets: Sequence[TruthTable], parents: Sequence[TernaryMask],
                      allow_signs: bool = True,
                      target_names: Sequence[str] = ()) -> tuple[CompositionPlan, list[float]]:
    """Accuracy-maximizing hard routing over all ``m ** n_children`` assignments.

    Children are scored independently, so the joint optimum is the per-child
    optimum of :func:`solve_linear_composition`.
    """
    choices = solve_linear_composition(targets, parents, allow_signs, target_names)
    plan = CompositionPlan(tuple(c.parent for c in choices), tuple(c.sign for c in choices),
                           tuple(parents), tuple(c.target for c in choices))
    return plan, [c.accuracy for c in choices]


def negation_boundary(parents: Sequence[TernaryMask], targets: dict[str, TruthTable]) -> dict[str, tuple[float, float]]:
    """``name -> (best accuracy without signs, best accuracy with signs)``."""
    names = list(targets)
    tables = [targets[k] for k in names]
    plain = solve_linear_composition(tables, parents, False, names)
    signed = solve_linear_composition(tables, parents, True, names)
    return {k: (a.accuracy, b.accuracy) for k, a, b in zip(names, plain, signed)}


def format_plan(plan: CompositionPlan) -> str:
    lines = [f"{'child':<14} {'parent':<10} {'sign':>4}  mask"]
    for r in plan.records():
        lines.append(f"{r['child']:<14} {r['parent']:<10} {r['sign']:>+4d}  "
                     f"[{', '.join(f'{c:+d}' if c else '0' for c in r['mask'])}]")
    return "\n".join(lines)
