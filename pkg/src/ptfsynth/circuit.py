"""Multi-bit circuits built from ternary-mask gates, and their verification.

Signals are named wires. In the ``±1`` evaluator a signal holds ``-1`` (TRUE)
or ``+1`` (FALSE); in the packed evaluator a signal is a ``uint64`` array in
which each bit is one independent sample and a set bit means TRUE. Integer
oracles read signal ``x{i}`` as bit ``i`` of ``x`` with TRUE as binary 1.
"""

from __future__ import annotations

import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import FALSE, TRUE, TernaryMask, eval_mask
from .enumeration import best_perfect_mask
from .registry import get_op

MAX_BITS = 128
WORD = 64
#: Samples per verification chunk; fixed so results do not depend on worker count.
CHUNK_SAMPLES = 1 << 20
WILSON_Z = 1.96

PackedOracle = Callable[[Mapping[str, np.ndarray]], Mapping[str, np.ndarray]]


@lru_cache(maxsize=None)
def gate_mask(name: str) -> TernaryMask:
    """Sparsest perfect mask of a two- or three-input registry operation."""
    for n in (2, 3):
        try:
            op = get_op(name, n)
        except KeyError:
            continue
        return best_perfect_mask(op)
    raise KeyError(f"{name!r} is not a two- or three-input registry operation")


# ---------------------------------------------------------------------------
# structure


@dataclass(frozen=True)
class GateNode:
    mask: TernaryMask
    inputs: tuple[str, ...]
    output: str
    ref: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if len(self.inputs) != self.mask.n:
            raise ValueError(f"gate {self.output!r}: {len(self.inputs)} inputs for an n={self.mask.n} mask")
        if not self.ref:
            object.__setattr__(self, "ref", self.mask.op_name or "")


@dataclass(frozen=True)
class Circuit:
    """Topologically ordered gate list over named signals."""

    inputs: tuple[str, ...]
    gates: tuple[GateNode, ...]
    outputs: tuple[str, ...]
    name: str = "circuit"
    bits: int = 0

    def __post_init__(self):
        for attr in ("inputs", "gates", "outputs"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        known = set()
        for s in self.inputs:
            if s in known:
                raise ValueError(f"duplicate input {s!r}")
            known.add(s)
        for g in self.gates:
            missing = [s for s in g.inputs if s not in known]
            if missing:
                raise ValueError(f"gate {g.output!r} reads {missing} before they are driven")
            if g.output in known:
                raise ValueError(f"signal {g.output!r} is driven twice")
            known.add(g.output)
        for s in self.outputs:
            if s not in known:
                raise ValueError(f"output {s!r} is not driven")

    def __len__(self) -> int:
        return len(self.gates)

    def gate_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.ref] = out.get(g.ref, 0) + 1
        return out

    def depth(self, refs: Sequence[str] | None = None) -> int:
        """Longest input-to-output path, counting only gates whose ref is in ``refs``."""
        level = {s: 0 for s in self.inputs}
        for g in self.gates:
            step = 1 if refs is None or g.ref in refs else 0
            level[g.output] = max((level[s] for s in g.inputs), default=0) + step
        return max((level[s] for s in self.outputs), default=0)

    def replace_gate(self, index: int, mask: TernaryMask, ref: str | None = None) -> "Circuit":
        """Copy with gate ``index`` using a different mask (for fault injection)."""
        gates = list(self.gates)
        old = gates[index]
        gates[index] = GateNode(mask, old.inputs, old.output, ref or mask.op_name or f"{old.ref}*")
        return replace(self, gates=tuple(gates))

    def to_dict(self) -> dict:
        masks = {}
        for g in self.gates:
            prev = masks.setdefault(g.ref, g.mask)
            if prev != g.mask:
                raise ValueError(f"mask reference {g.ref!r} is bound to two different masks")
        return {
            "name": self.name,
            "bits": self.bits,
            "inputs": list(self.inputs),
            "masks": {k: m.to_dict() for k, m in masks.items()},
            "gates": [{"mask": g.ref, "inputs": list(g.inputs), "output": g.output} for g in self.gates],
            "outputs": list(self.outputs),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "Circuit":
        masks = {k: TernaryMask.from_dict(v) for k, v in doc["masks"].items()}
        gates = [GateNode(masks[g["mask"]], g["inputs"], g["output"], g["mask"]) for g in doc["gates"]]
        return cls(tuple(doc["inputs"]), tuple(gates), tuple(doc["outputs"]),
                   doc.get("name", "circuit"), doc.get("bits", 0))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def _gate(name: str, inputs: Sequence[str], output: str) -> GateNode:
    return GateNode(gate_mask(name), tuple(inputs), output, name)


def _check_bits(bits: int) -> None:
    if not isinstance(bits, (int, np.integer)) or not 1 <= bits <= MAX_BITS:
        raise ValueError(f"bits must be an integer in 1..{MAX_BITS}, got {bits!r}")


def build_full_adder() -> Circuit:
    """One-bit adder: sum is parity of ``(a, b, cin)``, carry is their majority."""
    gates = [_gate("parity_3", ("a", "b", "cin"), "sum"),
             _gate("majority_3", ("a", "b", "cin"), "cout")]
    return Circuit(("a", "b", "cin"), tuple(gates), ("sum", "cout"), "full_adder", 1)


def build_ripple_adder(bits: int) -> Circuit:
    """``bits``-wide adder ``x + y + cin`` with outputs ``s0..s{bits-1}, cout``."""
    _check_bits(bits)
    inputs = [f"x{i}" for i in range(bits)] + [f"y{i}" for i in range(bits)] + ["cin"]
    gates = []
    carry = "cin"
    for i in range(bits):
        nxt = "cout" if i == bits - 1 else f"c{i + 1}"
        gates.append(_gate("parity_3", (f"x{i}", f"y{i}", carry), f"s{i}"))
        gates.append(_gate("majority_3", (f"x{i}", f"y{i}", carry), nxt))
        carry = nxt
    outputs = [f"s{i}" for i in range(bits)] + ["cout"]
    return Circuit(tuple(inputs), tuple(gates), tuple(outputs), "adder", bits)


def build_equality(bits: int) -> Circuit:
    """``x == y``: per-bit XNOR gates reduced by a balanced tree of AND gates."""
    _check_bits(bits)
    inputs = [f"x{i}" for i in range(bits)] + [f"y{i}" for i in range(bits)]
    gates = []
    layer = []
    for i in range(bits):
        out = "eq" if bits == 1 else f"e{i}"
        gates.append(_gate("xnor", (f"x{i}", f"y{i}"), out))
        layer.append(out)
    level = 0
    while len(layer) > 1:
        nxt = []
        for j in range(0, len(layer) - 1, 2):
            out = "eq" if len(layer) == 2 else f"and{level}_{j // 2}"
            gates.append(_gate("and", (layer[j], layer[j + 1]), out))
            nxt.append(out)
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
        level += 1
    return Circuit(tuple(inputs), tuple(gates), ("eq",), "equality", bits)


def build_comparator(bits: int) -> Circuit:
    """Unsigned strict ``x > y``.

    Bit ``i`` computes ``gt_i = (x_i AND NOT y_i) OR (eq_i AND gt_{i-1})`` with
    ``gt_0 = x_0 AND NOT y_0``; the chain runs from bit 0 to the most
    significant bit, whose ``gt`` is the result.
    """
    _check_bits(bits)
    inputs = [f"x{i}" for i in range(bits)] + [f"y{i}" for i in range(bits)]
    gates = []
    prev = None
    for i in range(bits):
        last = i == bits - 1
        t = "gt" if (last and i == 0) else f"t{i}"
        gates.append(_gate("a_and_not_b", (f"x{i}", f"y{i}"), t))
        if i == 0:
            prev = t
            continue
        gates.append(_gate("xnor", (f"x{i}", f"y{i}"), f"e{i}"))
        out = "gt" if last else f"gt{i}"
        gates.append(_gate("or_a_and_bc", (t, f"e{i}", prev), out))
        prev = out
    return Circuit(tuple(inputs), tuple(gates), ("gt",), "comparator", bits)


BUILDERS = {
    "adder": build_ripple_adder,
    "equality": build_equality,
    "comparator": build_comparator,
}


# ---------------------------------------------------------------------------
# scalar evaluation


def evaluate(circuit: Circuit, assignment: Mapping[str, int]) -> dict[str, int]:
    """Evaluate one ``±1`` assignment with a single topological pass."""
    missing = [s for s in circuit.inputs if s not in assignment]
    if missing:
        raise KeyError(f"missing input signals: {missing}")
    values = {s: int(assignment[s]) for s in circuit.inputs}
    for g in circuit.gates:
        values[g.output] = eval_mask(g.mask, [values[s] for s in g.inputs])
    return {s: values[s] for s in circuit.outputs}


def int_assignment(prefix: str, value: int, bits: int) -> dict[str, int]:
    """Signals ``{prefix}0..`` holding the bits of ``value`` (TRUE = binary 1)."""
    return {f"{prefix}{i}": TRUE if (value >> i) & 1 else FALSE for i in range(bits)}


def read_int(values: Mapping[str, int], names: Sequence[str]) -> int:
    return sum(1 << i for i, s in enumerate(names) if values[s] == TRUE)


# ---------------------------------------------------------------------------
# packed evaluation


@dataclass(frozen=True)
class PackedGate:
    """A mask compiled to XOR votes and a popcount threshold.

    Term ``w_S chi_S(x)`` is negative exactly when the number of TRUE inputs in
    ``S`` is odd XOR ``w_S = -1``. The polynomial is negative (TRUE) iff more
    than half of the ``support`` terms are negative.
    """

    terms: tuple[tuple[tuple[int, ...], bool], ...]
    support: int

    @classmethod
    def compile(cls, mask: TernaryMask) -> "PackedGate":
        terms = []
        for s in np.flatnonzero(mask.coeffs).tolist():
            pos = tuple(i for i in range(mask.n) if (s >> i) & 1)
            terms.append((pos, bool(mask.coeffs[s] < 0)))
        return cls(tuple(terms), len(terms))

    def __call__(self, planes: Sequence[np.ndarray]) -> np.ndarray:
        shape = planes[0].shape
        ones = np.uint64(0xFFFFFFFFFFFFFFFF)
        if self.support == 0:
            return np.zeros(shape, dtype=np.uint64)
        width = self.support.bit_length()
        counter = [np.zeros(shape, dtype=np.uint64) for _ in range(width)]
        for pos, negate in self.terms:
            vote = np.full(shape, ones if negate else 0, dtype=np.uint64)
            for i in pos:
                vote ^= planes[i]
            carry = vote
            for j in range(width):
                counter[j], carry = counter[j] ^ carry, counter[j] & carry
        return bitsliced_greater(counter, self.support // 2)


def bitsliced_greater(counter: Sequence[np.ndarray], threshold: int) -> np.ndarray:
    """Per bit lane, whether the vertical counter exceeds ``threshold``."""
    gt = np.zeros_like(counter[0])
    eq = np.full_like(counter[0], np.uint64(0xFFFFFFFFFFFFFFFF))
    for j in reversed(range(len(counter))):
        if (threshold >> j) & 1:
            eq &= counter[j]
        else:
            gt |= eq & counter[j]
            eq &= ~counter[j]
    return gt


@lru_cache(maxsize=4096)
def _compiled(mask: TernaryMask) -> PackedGate:
    return PackedGate.compile(mask)


def eval_mask_packed(mask: TernaryMask, planes: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate ``mask`` on 64 samples per word; ``planes[i]`` is variable ``i``."""
    if len(planes) != mask.n:
        raise ValueError(f"mask has n={mask.n} but got {len(planes)} input planes")
    return _compiled(mask)(planes)


def evaluate_packed(circuit: Circuit, planes: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    missing = [s for s in circuit.inputs if s not in planes]
    if missing:
        raise KeyError(f"missing input signals: {missing}")
    values = {s: np.asarray(planes[s], dtype=np.uint64) for s in circuit.inputs}
    for g in circuit.gates:
        values[g.output] = eval_mask_packed(g.mask, [values[s] for s in g.inputs])
    return {s: values[s] for s in circuit.outputs}


def unpack(plane: np.ndarray, count: int) -> np.ndarray:
    """First ``count`` sample bits of a packed plane as a bool array."""
    bits = np.unpackbits(np.ascontiguousarray(plane).view(np.uint8), bitorder="little")
    return bits[:count].astype(bool)


def pack(bits: np.ndarray) -> np.ndarray:
    b = np.asarray(bits, dtype=bool)
    words = -(-len(b) // WORD)
    padded = np.zeros(words * WORD, dtype=bool)
    padded[:len(b)] = b
    return np.packbits(padded, bitorder="little").view(np.uint64)


def _lane_mask(count: int) -> np.ndarray:
    words = -(-count // WORD)
    out = np.full(words, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    rem = count % WORD
    if rem:
        out[-1] = np.uint64((1 << rem) - 1)
    return out


# ---------------------------------------------------------------------------
# integer oracles over bool arrays (independent of the gate structure)


def _limbs(bits: Mapping[str, np.ndarray], prefix: str, width: int) -> list[np.ndarray]:
    """Little-endian 64-bit limbs of the integers spelled by ``prefix0..``."""
    limbs = []
    for lo in range(0, width, WORD):
        acc = None
        for i in range(lo, min(width, lo + WORD)):
            term = bits[f"{prefix}{i}"].astype(np.uint64) << np.uint64(i - lo)
            acc = term if acc is None else acc | term
        limbs.append(acc)
    return limbs


def _spell(limbs: Sequence[np.ndarray], prefix: str, width: int) -> dict[str, np.ndarray]:
    return {f"{prefix}{i}": ((limbs[i // WORD] >> np.uint64(i % WORD)) & np.uint64(1)).astype(bool)
            for i in range(width)}


@dataclass(frozen=True)
class adder_oracle:
    """``x + y + cin`` by limb-wise machine addition."""

    bits: int

    def __call__(self, inp):
        bits = self.bits
        xs, ys = _limbs(inp, "x", bits), _limbs(inp, "y", bits)
        carry = inp["cin"].astype(np.uint64)
        sums = []
        for k, (x, y) in enumerate(zip(xs, ys)):
            width = min(WORD, bits - k * WORD)
            if width == WORD:
                t = x + y
                s = t + carry
                carry = ((t < x) | (s < t)).astype(np.uint64)
            else:
                total = x + y + carry
                s = total & np.uint64((1 << width) - 1)
                carry = total >> np.uint64(width)
            sums.append(s)
        out = _spell(sums, "s", bits)
        out["cout"] = carry.astype(bool)
        return out


@dataclass(frozen=True)
class equality_oracle:
    bits: int

    def __call__(self, inp):
        xs, ys = _limbs(inp, "x", self.bits), _limbs(inp, "y", self.bits)
        eq = np.ones_like(xs[0], dtype=bool)
        for x, y in zip(xs, ys):
            eq &= x == y
        return {"eq": eq}


@dataclass(frozen=True)
class comparator_oracle:
    """Unsigned strict ``x > y``, compared limb by limb from the top."""

    bits: int

    def __call__(self, inp):
        xs, ys = _limbs(inp, "x", self.bits), _limbs(inp, "y", self.bits)
        gt = np.zeros_like(xs[0], dtype=bool)
        eq = np.ones_like(xs[0], dtype=bool)
        for x, y in zip(reversed(xs), reversed(ys)):
            gt |= eq & (x > y)
            eq &= x == y
        return {"gt": gt}


@dataclass(frozen=True)
class full_adder_oracle:
    def __call__(self, inp):
        total = inp["a"].astype(np.int8) + inp["b"] + inp["cin"]
        return {"sum": (total & 1).astype(bool), "cout": total >= 2}


ORACLES = {
    "adder": adder_oracle,
    "equality": equality_oracle,
    "comparator": comparator_oracle,
}


def oracle_for(circuit: Circuit) -> PackedOracle:
    if circuit.name == "full_adder":
        return full_adder_oracle()
    return ORACLES[circuit.name](circuit.bits)


# ---------------------------------------------------------------------------
# verification


def wilson_interval(errors: int, m: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if m < 1:
        raise ValueError("m must be >= 1")
    p = errors / m
    denom = 1 + z * z / m
    center = (p + z * z / (2 * m)) / denom
    half = z * math.sqrt(p * (1 - p) / m + z * z / (4 * m * m)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class VerificationReport:
    circuit: str
    bits: int
    samples: int
    errors: int
    seed: int | None
    workers: int = 1
    exhaustive: bool = False
    wilson: tuple[float, float] = field(init=False)
    rule_of_three_bound: float | None = field(init=False)

    def __post_init__(self):
        if not 0 <= self.errors <= self.samples:
            raise ValueError("errors must lie in 0..samples")
        self.wilson = wilson_interval(self.errors, self.samples)
        self.rule_of_three_bound = 3.0 / self.samples if self.errors == 0 else None

    @property
    def error_rate(self) -> float:
        return self.errors / self.samples

    @property
    def passed(self) -> bool:
        return self.errors == 0

    @property
    def error_bound(self) -> float:
        """Rule-of-three bound when error-free, else the Wilson upper limit."""
        if self.exhaustive and self.errors == 0:
            return 0.0
        return self.rule_of_three_bound if self.errors == 0 else self.wilson[1]

    def record(self) -> dict:
        return {"circuit": self.circuit, "bits": self.bits, "samples": self.samples,
                "errors": self.errors, "error_bound": self.error_bound}

    def to_dict(self) -> dict:
        doc = self.record()
        doc.update(seed=self.seed, workers=self.workers, exhaustive=self.exhaustive,
                   wilson=list(self.wilson), rule_of_three_bound=self.rule_of_three_bound)
        return doc


def _mismatches(circuit: Circuit, oracle: PackedOracle, planes: dict[str, np.ndarray], count: int) -> int:
    got = evaluate_packed(circuit, planes)
    want = oracle({s: unpack(p, count) for s, p in planes.items()})
    lanes = _lane_mask(count)
    bad = np.zeros_like(lanes)
    for s in circuit.outputs:
        bad |= (got[s] ^ pack(want[s])) & lanes
    return int(np.unpackbits(bad.view(np.uint8)).sum())


def _chunk_errors(args) -> int:
    circuit, oracle, seed_seq, count = args
    gen = np.random.default_rng(seed_seq)
    words = -(-count // WORD)
    raw = gen.integers(0, np.iinfo(np.uint64).max, size=(len(circuit.inputs), words),
                       dtype=np.uint64, endpoint=True)
    planes = dict(zip(circuit.inputs, raw))
    return _mismatches(circuit, oracle, planes, count)


def verify_random(circuit: Circuit, oracle: PackedOracle | None, m: int, seed: int = 0,
                  workers: int = 1) -> VerificationReport:
    """Compare ``circuit`` with ``oracle`` on ``m`` uniform seeded input samples.

    Samples are drawn in fixed chunks of ``CHUNK_SAMPLES``, each from its own
    child of ``SeedSequence(seed)``, so the report is identical for any worker
    count. ``oracle`` maps input bool arrays to output bool arrays.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    oracle = oracle or oracle_for(circuit)
    counts = [CHUNK_SAMPLES] * (m // CHUNK_SAMPLES)
    if m % CHUNK_SAMPLES:
        counts.append(m % CHUNK_SAMPLES)
    jobs = [(circuit, oracle, ss, c)
            for ss, c in zip(np.random.SeedSequence(seed).spawn(len(counts)), counts)]
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        errors = sum(map(_chunk_errors, jobs))
    else:
        with ProcessPoolExecutor(workers) as pool:
            errors = sum(pool.map(_chunk_errors, jobs))
    return VerificationReport(circuit.name, circuit.bits, m, errors, seed, workers)


def verify_exhaustive(circuit: Circuit, oracle: PackedOracle | None = None,
                      max_inputs: int = 26) -> VerificationReport:
    """Compare on every one of the ``2**k`` input assignments."""
    k = len(circuit.inputs)
    if k > max_inputs:
        raise ValueError(f"{k} inputs is too many for exhaustive verification")
    oracle = oracle or oracle_for(circuit)
    count = 1 << k
    idx = np.arange(count, dtype=np.int64)
    planes = {s: pack((idx >> i) & 1) for i, s in enumerate(circuit.inputs)}
    errors = _mismatches(circuit, oracle, planes, count)
    return VerificationReport(circuit.name, circuit.bits, count, errors, None, 1, True)


# ---------------------------------------------------------------------------
# throughput


def naive_eval(masks: Sequence[TernaryMask], x: np.ndarray) -> np.ndarray:
    """One input at a time, one mask at a time, via :func:`eval_mask`."""
    out = np.empty((len(masks), len(x)), dtype=np.int8)
    for j, row in enumerate(x):
        for k, mask in enumerate(masks):
            out[k, j] = eval_mask(mask, row[:mask.n])
    return out


def packed_eval(masks: Sequence[TernaryMask], planes: Sequence[np.ndarray]) -> list[np.ndarray]:
    return [eval_mask_packed(mask, planes[:mask.n]) for mask in masks]


@dataclass
class ThroughputResult:
    kernel: str
    batch: int
    ops: int
    seconds: float
    repetitions: int

    @property
    def mops(self) -> float:
        return mops_per_second(self.batch, self.ops, self.seconds)

    def record(self) -> dict:
        return {"kernel": self.kernel, "batch": self.batch, "ops": self.ops,
                "seconds": self.seconds, "mops_per_s": self.mops}


def mops_per_second(batch: int, ops: int, seconds: float) -> float:
    """Complete function evaluations per second, in millions: ``B K / (T 1e6)``."""
    return batch * ops / (seconds * 1e6)


def throughput_bench(masks: Sequence[TernaryMask], batch: int, repetitions: int = 5,
                     kernel: str = "packed", seed: int = 0) -> ThroughputResult:
    """Median wall time to evaluate every mask on a seeded random batch."""
    if batch < 1:
        raise ValueError("batch must be >= 1")
    masks = list(masks)
    if not masks:
        raise ValueError("need at least one mask")
    n = max(m.n for m in masks)
    gen = np.random.default_rng(seed)
    if kernel == "packed":
        words = -(-batch // WORD)
        planes = list(gen.integers(0, np.iinfo(np.uint64).max, size=(n, words),
                                   dtype=np.uint64, endpoint=True))
        run = lambda: packed_eval(masks, planes)
    elif kernel == "naive":
        x = np.where(gen.integers(0, 2, size=(batch, n)) == 1, TRUE, FALSE).astype(np.int8)
        run = lambda: naive_eval(masks, x)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    times = []
    for _ in range(max(1, repetitions)):
        t0 = time.perf_counter()
        run()
        times.append(time.perf_counter() - t0)
    return ThroughputResult(kernel, batch, len(masks), statistics.median(times), max(1, repetitions))


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
