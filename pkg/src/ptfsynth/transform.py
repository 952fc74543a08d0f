"""Walsh-Hadamard transforms and Monte Carlo Fourier coefficient estimation."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .core import MAX_TABLE_N, TernaryMask, TruthTable, default_variables, popcount, sign

#: Largest n for exact transforms at desk scale (128 MiB of float64).
MAX_FWHT_N = 24


def _log2_length(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise ValueError(f"length {length} is not a power of two")
    return length.bit_length() - 1


def fwht_inplace(buf: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of ``buf``, overwriting it.

    Works for any numeric dtype; integer input gives an exact integer result.
    Stage ``h`` pairs index ``j`` with ``j + h`` inside every block of ``2h``.
    """
    n = _log2_length(buf.shape[0])
    if buf.ndim != 1:
        raise ValueError("fwht expects a 1-D buffer")
    if n == 0:
        return buf
    tmp = np.empty(buf.shape[0] // 2, dtype=buf.dtype)
    h = 1
    while h < buf.shape[0]:
        pairs = buf.reshape(-1, 2, h)
        lo, hi = pairs[:, 0, :], pairs[:, 1, :]
        t = tmp.reshape(-1, h)
        np.copyto(t, lo)
        lo += hi
        np.subtract(t, hi, out=hi)
        h *= 2
    return buf


def fwht(values, exact: bool | None = None) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform; applying it twice scales by ``2**n``.

    Integer input (or ``exact=True``) is transformed in int64 arithmetic;
    everything else in float64.

    >>> fwht([1, 0, 0, 0]).tolist()
    [1, 1, 1, 1]
    >>> fwht([1, 1, 1, 1]).tolist()
    [4, 0, 0, 0]
    """
    arr = np.asarray(values)
    if exact is None:
        exact = np.issubdtype(arr.dtype, np.integer)
    if exact:
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError("exact transform needs integer values")
        buf = arr.astype(np.int64, copy=True)
    else:
        buf = arr.astype(np.float64, copy=True)
    return fwht_inplace(buf)


@dataclass(frozen=True)
class SpectralVector:
    """Normalized Fourier coefficients ``f_hat(S) = E_x[f(x) chi_S(x)]``."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients")
        object.__setattr__(self, "coeffs", c)

    def energy(self) -> float:
        return float(np.sum(self.coeffs ** 2))

    def heavy(self, threshold: float) -> dict[int, float]:
        return {int(s): float(v) for s, v in enumerate(self.coeffs) if abs(v) > threshold}

    def reconstruct(self) -> np.ndarray:
        """Real-valued function values ``sum_S f_hat(S) chi_S(x)`` in table order."""
        return fwht(self.coeffs)


def exact_transform(table: TruthTable) -> np.ndarray:
    """Integer transform ``sum_x f(x) chi_S(x)`` of a table (no normalization)."""
    if table.n > MAX_FWHT_N:
        raise ValueError(f"n={table.n} exceeds the exact transform bound {MAX_FWHT_N}")
    return fwht(table.outputs.astype(np.int64))


def exact_coefficients(table: TruthTable) -> SpectralVector:
    """Exact normalized Fourier coefficients of a ±1 truth table.

    The transform runs in integers and is divided by ``2**n`` once at the end,
    so for ``n <= 24`` every coefficient is an exactly representable dyadic.
    """
    return SpectralVector(table.n, exact_transform(table) / float(1 << table.n))


def reconstructs(table: TruthTable) -> bool:
    """Whether ``sign(sum_S f_hat(S) chi_S)`` reproduces ``table`` exactly."""
    integer = fwht(exact_transform(table))  # 2**n * f(x)
    return bool(np.array_equal(sign(integer), table.outputs))


# ---------------------------------------------------------------------------
# oracle access


@dataclass(frozen=True)
class Oracle:
    """Black-box access to an n-variable ±1 function.

    ``query`` takes an ``(m, n)`` int8 array of assignments and returns ``m``
    outputs; pass ``batched=False`` for a function of a single assignment.
    """

    n: int
    query: Callable[[np.ndarray], np.ndarray]
    batched: bool = True

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.int8)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[1] != self.n:
            raise ValueError(f"oracle expects {self.n} inputs, got {x.shape[1]}")
        if self.batched:
            return np.asarray(self.query(x), dtype=np.int8)
        return np.fromiter((self.query(row) for row in x), dtype=np.int8, count=len(x))

    @classmethod
    def from_op(cls, op) -> "Oracle":
        return cls(op.n, op.evaluator)

    @classmethod
    def from_table(cls, table: TruthTable) -> "Oracle":
        weights = (1 << np.arange(table.n, dtype=np.int64))

        def query(x):
            return table.outputs[((x == -1).astype(np.int64) @ weights)]

        return cls(table.n, query)

    @classmethod
    def from_mask(cls, mask: TernaryMask) -> "Oracle":
        """Oracle evaluating a ternary polynomial directly (any n)."""
        support = [int(s) for s in np.flatnonzero(mask.coeffs)]
        weights = [int(mask.coeffs[s]) for s in support]
        positions = [[i for i in range(mask.n) if (s >> i) & 1] for s in support]

        def query(x):
            total = np.zeros(len(x), dtype=np.int64)
            for w, pos in zip(weights, positions):
                chi = np.prod(x[:, pos], axis=1, dtype=np.int64) if pos else 1
                total += w * chi
            return sign(total)

        return cls(mask.n, query)


def hoeffding_samples(epsilon: float, delta: float) -> int:
    """Samples so that a mean of ±1 variables is within ``epsilon`` w.p. ``1 - delta``.

    Two-sided Hoeffding for variables with range 2: ``2 exp(-m eps^2 / 2) <= delta``.
    """
    _check_eps_delta(epsilon, delta)
    return math.ceil(2.0 * math.log(2.0 / delta) / epsilon ** 2)


def _check_eps_delta(epsilon, delta):
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class EstimationPlan:
    epsilon: float
    delta: float
    m: int
    max_degree: int = 1

    def __post_init__(self):
        _check_eps_delta(self.epsilon, self.delta)
        need = hoeffding_samples(self.epsilon, self.delta)
        if self.m < need:
            raise ValueError(f"m={self.m} is below the Hoeffding requirement {need} "
                             f"for epsilon={self.epsilon}, delta={self.delta}")
        if self.max_degree < 0:
            raise ValueError("max_degree must be non-negative")

    @classmethod
    def for_accuracy(cls, epsilon: float, delta: float, max_degree: int = 1) -> "EstimationPlan":
        return cls(epsilon, delta, hoeffding_samples(epsilon, delta), max_degree)


def sample_inputs(n: int, m: int, seed: int) -> np.ndarray:
    """``m`` uniform ±1 assignments from a counter-based stream keyed by ``seed``.

    Sample ``j`` consumes words ``j*w .. j*w + w - 1`` of the Philox stream, with
    ``w = ceil(n / 64)``, so the assignment depends only on ``(seed, j)``.
    """
    words = max(1, -(-n // 64))
    raw = np.random.Philox(key=seed).random_raw(m * words).reshape(m, words)
    bits = (raw[:, :, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)
    bits = bits.reshape(m, words * 64)[:, :n]
    return np.where(bits == 1, -1, 1).astype(np.int8)


def character_values(x: np.ndarray, subset: int) -> np.ndarray:
    pos = [i for i in range(x.shape[1]) if (subset >> i) & 1]
    if not pos:
        return np.ones(len(x), dtype=np.int64)
    return np.prod(x[:, pos], axis=1, dtype=np.int64)


def estimate_coefficient(oracle: Oracle, subset: int, plan: EstimationPlan, seed: int) -> float:
    """Empirical mean of ``f(x) chi_S(x)`` over ``plan.m`` seeded uniform inputs."""
    if subset >> oracle.n:
        raise ValueError("character index out of range")
    x = sample_inputs(oracle.n, plan.m, seed)
    fx = oracle(x).astype(np.int64)
    return float(np.mean(fx * character_values(x, subset)))


def low_degree_subsets(n: int, max_degree: int) -> list[int]:
    out = []
    for k in range(min(max_degree, n) + 1):
        for combo in combinations(range(n), k):
            out.append(sum(1 << i for i in combo))
    return out


def low_degree_survey(oracle: Oracle, plan: EstimationPlan, seed: int,
                      max_candidates: int = 100_000) -> dict[int, float]:
    """Estimate every coefficient of degree ``<= plan.max_degree`` from one sample batch."""
    if plan.max_degree > oracle.n:
        raise ValueError("max_degree exceeds the number of variables")
    count = sum(math.comb(oracle.n, k) for k in range(plan.max_degree + 1))
    if count > max_candidates:
        raise ValueError(f"{count} candidates exceed the budget of {max_candidates}")
    x = sample_inputs(oracle.n, plan.m, seed)
    fx = oracle(x).astype(np.int64)
    return {s: float(np.mean(fx * character_values(x, s)))
            for s in low_degree_subsets(oracle.n, plan.max_degree)}


def label_survey(survey: dict[int, float], n: int) -> dict[str, float]:
    from .core import subset_label
    variables = default_variables(n)
    return {subset_label(s, variables): v for s, v in survey.items()}


# ---------------------------------------------------------------------------
# benchmark


@dataclass
class BenchRow:
    n: int
    dimension: int
    time_ms: float | None
    throughput_m_per_s: float | None
    memory_mb: float
    note: str = ""

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def fwht_benchmark(n_range: Sequence[int], repetitions: int = 5, seed: int = 0,
                   max_n: int = MAX_FWHT_N) -> list[BenchRow]:
    """Time the float64 transform for each ``n``; report the median over repetitions."""
    rows = []
    for n in n_range:
        dim = 1 << n
        mem = dim * 8 / 1e6
        if n > max_n or n < 1:
            rows.append(BenchRow(n, dim, None, None, mem, f"n outside 1..{max_n}"))
            continue
        try:
            gen = np.random.default_rng([seed, n])
            src = gen.standard_normal(dim)
            buf = np.empty_like(src)
            times = []
            for _ in range(max(1, repetitions)):
                np.copyto(buf, src)
                t0 = time.perf_counter()
                fwht_inplace(buf)
                times.append(time.perf_counter() - t0)
        except MemoryError as exc:
            rows.append(BenchRow(n, dim, None, None, mem, f"allocation failed: {exc}"))
            continue
        t = statistics.median(times)
        rows.append(BenchRow(n, dim, t * 1e3, dim / t / 1e6, mem))
    return rows


def format_bench(rows: Sequence[BenchRow], delimiter: str = "\t") -> str:
    header = ["n", "dimension", "time_ms", "throughput_M_per_s", "memory_MB", "note"]
    lines = [delimiter.join(header)]
    for r in rows:
        cells = [str(r.n), str(r.dimension),
                 "" if r.time_ms is None else f"{r.time_ms:.3f}",
                 "" if r.throughput_m_per_s is None else f"{r.throughput_m_per_s:.1f}",
                 f"{r.memory_mb:.2f}", r.note]
        lines.append(delimiter.join(cells))
    return "\n".join(lines)
