"""Spectral synthesis: exact WHT, threshold quantization, parallel-tempering refinement.

The refinement energy of a mask is its error rate on the full truth table. One
*sweep* visits every coordinate once (in a fresh random order) on every chain;
steps are reported in sweeps.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .core import MAX_TABLE_N, OperationSpec, TernaryMask, TruthTable, accuracy, character_matrix, truth_table_of
from .transform import SpectralVector, exact_coefficients

VALUES = np.array([-1, 0, 1], dtype=np.int8)

RANDOM_TERNARY = "random_ternary"
WHT_THRESHOLD = "wht_threshold"

#: Largest n for MCMC refinement (character matrix is materialized).
MAX_SYNTH_N = 12

#: Sweep budget for the warm-start comparison. Random starts on parity targets
#: sit on a flat energy plateau and can need a few hundred thousand sweeps.
WARMSTART_MAX_SWEEPS = 1_000_000


@dataclass(frozen=True)
class QuantizationConfig:
    tau: float = 0.3

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")


@dataclass(frozen=True)
class McmcConfig:
    temperatures: tuple[float, ...] = (0.01, 0.1, 0.5, 1.0)
    max_sweeps: int = 20_000
    swap_interval: int = 1
    seed: int = 0

    def __post_init__(self):
        temps = tuple(float(t) for t in self.temperatures)
        if not temps or any(t <= 0 for t in temps):
            raise ValueError("temperatures must be positive")
        if any(b <= a for a, b in zip(temps, temps[1:])):
            raise ValueError("temperatures must be strictly ascending")
        if self.max_sweeps < 0 or self.swap_interval < 1:
            raise ValueError("max_sweeps must be >= 0 and swap_interval >= 1")
        object.__setattr__(self, "temperatures", temps)

    def with_seed(self, seed: int) -> "McmcConfig":
        return McmcConfig(self.temperatures, self.max_sweeps, self.swap_interval, seed)


@dataclass
class SynthesisTrace:
    op_name: str
    initial_accuracy: float
    final_accuracy: float
    steps_to_perfect: int | None
    init_strategy: str
    seed: int
    sweeps_run: int = 0
    swaps_accepted: int = 0
    best_history: list[int] = field(default_factory=list, repr=False)

    def record(self) -> dict:
        doc = asdict(self)
        doc.pop("best_history")
        return doc


def quantize_coefficients(spectrum: SpectralVector, config: QuantizationConfig = QuantizationConfig(),
                          variables: Sequence[str] = ()) -> TernaryMask:
    """Threshold each coefficient: ``+1`` above ``tau``, ``-1`` below ``-tau``, else 0."""
    c = spectrum.coeffs
    coeffs = np.where(c > config.tau, 1, np.where(c < -config.tau, -1, 0))
    return TernaryMask(spectrum.n, coeffs, tuple(variables))


def random_mask(n: int, rng: np.random.Generator, variables: Sequence[str] = ()) -> TernaryMask:
    return TernaryMask(n, VALUES[rng.integers(0, 3, size=1 << n)], tuple(variables))


@njit(cache=True)
def _gibbs_coord(masks, dots, errors, H, target_neg, inv_temps, coord, u, best_mask, best):
    chains, size = dots.shape
    wrong = np.empty(3, dtype=np.int64)
    weights = np.empty(3, dtype=np.float64)
    for c in range(chains):
        old = masks[c, coord]
        for k in range(3):
            delta = k - 1 - old
            w = 0
            for x in range(size):
                if (dots[c, x] + delta * H[x, coord] < 0) != target_neg[x]:
                    w += 1
            wrong[k] = w
        low = min(wrong[0], min(wrong[1], wrong[2]))
        total = 0.0
        for k in range(3):
            weights[k] = np.exp(-(wrong[k] - low) / size * inv_temps[c])
            total += weights[k]
        r = u[c] * total
        choice = 2
        acc = 0.0
        for k in range(3):
            acc += weights[k]
            if r < acc:
                choice = k
                break
        delta = choice - 1 - old
        if delta != 0:
            for x in range(size):
                dots[c, x] += delta * H[x, coord]
            masks[c, coord] = choice - 1
        errors[c] = wrong[choice]
        if errors[c] < best[0]:
            best[0] = errors[c]
            best_mask[:] = masks[c]


@njit(cache=True)
def _sweep(masks, dots, errors, H, target_neg, inv_temps, order, uniforms, best_mask, best):
    for i in range(order.shape[0]):
        _gibbs_coord(masks, dots, errors, H, target_neg, inv_temps, order[i], uniforms[i],
                     best_mask, best)
        if best[0] == 0:
            return


class ParallelTempering:
    """Replica-exchange Gibbs sampler over ternary masks for one truth table.

    Every chain caches the integer polynomial value at each input, so updating
    one coefficient costs one column of the character matrix. All random draws
    come from one numpy generator seeded by ``config.seed``.
    """

    def __init__(self, table: TruthTable, initial: TernaryMask, config: McmcConfig):
        if initial.n != table.n:
            raise ValueError(f"dimension mismatch: mask n={initial.n}, table n={table.n}")
        if table.n > MAX_SYNTH_N:
            raise ValueError(f"refinement is limited to n <= {MAX_SYNTH_N}")
        self.table = table
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.n = table.n
        self.size = 1 << table.n
        self.H = np.ascontiguousarray(character_matrix(table.n), dtype=np.int64)
        self.target_neg = table.outputs < 0
        self.temps = np.asarray(config.temperatures, dtype=np.float64)
        self.inv_temps = 1.0 / self.temps
        chains = len(self.temps)
        self.masks = np.tile(initial.coeffs.astype(np.int64), (chains, 1))
        self.dots = np.tile(self.H @ initial.coeffs.astype(np.int64), (chains, 1))
        self.errors = np.count_nonzero((self.dots < 0) != self.target_neg, axis=1).astype(np.int64)
        self._best = np.array([self.errors.min()], dtype=np.int64)
        self.best_mask = self.masks[int(self.errors.argmin())].copy()
        self.swaps_accepted = 0

    @property
    def best_errors(self) -> int:
        return int(self._best[0])

    @property
    def energies(self) -> np.ndarray:
        return self.errors / self.size

    def gibbs_update(self, coord: int) -> None:
        """Resample coefficient ``coord`` of every chain from its conditional."""
        u = self.rng.random(len(self.temps))
        _gibbs_coord(self.masks, self.dots, self.errors, self.H, self.target_neg,
                     self.inv_temps, coord, u, self.best_mask, self._best)

    def swap_probability(self, i: int) -> float:
        j = i + 1
        e_i, e_j = self.errors[i] / self.size, self.errors[j] / self.size
        exponent = (e_i - e_j) * (self.inv_temps[i] - self.inv_temps[j])
        return 1.0 if exponent >= 0 else math.exp(exponent)

    def swap(self, i: int) -> None:
        """Exchange the complete states of chains ``i`` and ``i + 1``."""
        idx = [i + 1, i]
        self.masks[[i, i + 1]] = self.masks[idx]
        self.dots[[i, i + 1]] = self.dots[idx]
        self.errors[[i, i + 1]] = self.errors[idx]

    def attempt_swap(self) -> bool:
        if len(self.temps) < 2:
            return False
        i = int(self.rng.integers(0, len(self.temps) - 1))
        accept = self.rng.random() < self.swap_probability(i)
        if accept:
            self.swap(i)
            self.swaps_accepted += 1
        return accept

    def sweep(self) -> None:
        order = self.rng.permutation(self.size)
        uniforms = self.rng.random((self.size, len(self.temps)))
        _sweep(self.masks, self.dots, self.errors, self.H, self.target_neg, self.inv_temps,
               order, uniforms, self.best_mask, self._best)

    def run(self) -> tuple[int | None, int, list[int]]:
        """Sweep until a perfect mask is seen or the budget runs out.

        Returns ``(steps_to_perfect, sweeps_run, best_errors_per_sweep)``.
        """
        history = [self.best_errors]
        if self.best_errors == 0:
            return 0, 0, history
        for sweep in range(1, self.config.max_sweeps + 1):
            self.sweep()
            history.append(self.best_errors)
            if self.best_errors == 0:
                return sweep, sweep, history
            if sweep % self.config.swap_interval == 0:
                self.attempt_swap()
        return None, self.config.max_sweeps, history


def mcmc_refine(initial: TernaryMask, table: TruthTable, config: McmcConfig = McmcConfig(),
                op_name: str = "", init_strategy: str = WHT_THRESHOLD) -> tuple[TernaryMask, SynthesisTrace]:
    """Refine ``initial`` towards an exact representation of ``table``.

    Returns the lowest-energy mask visited on any chain and a trace; an
    already-perfect start is returned unchanged with ``steps_to_perfect = 0``.
    """
    sampler = ParallelTempering(table, initial, config)
    init_acc = accuracy(initial, table)
    steps, sweeps, history = sampler.run()
    if steps == 0:
        best = initial
    else:
        best = TernaryMask(table.n, sampler.best_mask, table.variables, op_name or None)
    final = 1.0 - sampler.best_errors / sampler.size
    trace = SynthesisTrace(op_name, init_acc, final, steps, init_strategy, config.seed,
                           sweeps, sampler.swaps_accepted, history)
    return best, trace


def synthesize(table: TruthTable, q: QuantizationConfig = QuantizationConfig(),
               m: McmcConfig = McmcConfig(), op_name: str = "") -> tuple[TernaryMask, SynthesisTrace]:
    """Exact spectrum -> ternary quantization -> refinement if not already exact."""
    if table.n > MAX_TABLE_N:
        raise ValueError(f"n={table.n} exceeds {MAX_TABLE_N}")
    init = quantize_coefficients(exact_coefficients(table), q, table.variables)
    mask, trace = mcmc_refine(init, table, m, op_name, WHT_THRESHOLD)
    return mask.with_name(op_name or None), trace


def synthesize_op(op: OperationSpec, q: QuantizationConfig = QuantizationConfig(),
                  m: McmcConfig = McmcConfig()) -> tuple[TernaryMask, SynthesisTrace]:
    return synthesize(truth_table_of(op), q, m, op.name)


def random_init(n: int, seed: int, variables: Sequence[str] = ()) -> TernaryMask:
    """Uniform ternary start for a given seed (independent of the MCMC stream)."""
    return random_mask(n, np.random.default_rng([seed, 0xA5]), variables)


@dataclass
class WarmstartResult:
    traces: list[SynthesisTrace]

    def steps(self, strategy: str, max_sweeps: int | None = None) -> list[int]:
        """Steps per run; unconverged runs are censored at ``max_sweeps``."""
        out = []
        for t in self.traces:
            if t.init_strategy != strategy:
                continue
            if t.steps_to_perfect is not None:
                out.append(t.steps_to_perfect)
            elif max_sweeps is not None:
                out.append(max_sweeps)
        return out

    def summary(self) -> list[dict]:
        rows = []
        for strategy in (RANDOM_TERNARY, WHT_THRESHOLD):
            runs = [t for t in self.traces if t.init_strategy == strategy]
            if not runs:
                continue
            cap = max(t.sweeps_run for t in runs)
            steps = self.steps(strategy, cap)
            rows.append({
                "strategy": strategy,
                "runs": len(runs),
                "converged": sum(t.steps_to_perfect is not None for t in runs),
                "mean": statistics.fmean(steps),
                "std": statistics.pstdev(steps),
                "median": statistics.median(steps),
            })
        return rows


def _warmstart_runs(args) -> list[SynthesisTrace]:
    name, table, seed, q, m = args
    cfg = m.with_seed(seed)
    wht_init = quantize_coefficients(exact_coefficients(table), q, table.variables)
    _, rand = mcmc_refine(random_init(table.n, seed, table.variables), table, cfg, name, RANDOM_TERNARY)
    _, wht = mcmc_refine(wht_init, table, cfg, name, WHT_THRESHOLD)
    return [rand, wht]


def warmstart_experiment(ops: Iterable[OperationSpec], seeds: Sequence[int],
                         q: QuantizationConfig = QuantizationConfig(0.1),
                         m: McmcConfig = McmcConfig(max_sweeps=WARMSTART_MAX_SWEEPS),
                         workers: int = 1) -> WarmstartResult:
    """Sweeps-to-perfect from a random start versus the WHT-threshold start.

    Both strategies share the MCMC seed for each ``(op, seed)`` pair; the
    random start is drawn from a separate stream keyed by the same seed. Runs
    are independent, so ``workers > 1`` gives identical traces.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    jobs = [(op.name, truth_table_of(op), seed, q, m) for op in ops for seed in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as pool:
            chunks = list(pool.map(_warmstart_runs, jobs))
    else:
        chunks = [_warmstart_runs(j) for j in jobs]
    return WarmstartResult([t for pair in chunks for t in pair])


def format_summary(rows: Sequence[dict]) -> str:
    lines = [f"{'strategy':<16} {'runs':>5} {'conv':>5} {'mean ± std':>18} {'median':>8}"]
    for r in rows:
        lines.append(f"{r['strategy']:<16} {r['runs']:>5} {r['converged']:>5} "
                     f"{r['mean']:>9.1f} ± {r['std']:<6.1f} {r['median']:>8.1f}")
    return "\n".join(lines)
