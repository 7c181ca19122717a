"""Behavior tables for chain scenarios, correlators, and the two bound values.

A behavior stores P(outcomes | inputs) as a dense (num_inputs, num_outcomes)
float array.  Row and column indices are mixed-radix packed, party 1 most
significant: p22 inputs and outcomes pack as bit strings, p14 intermediate
outcomes pack base 4 (outcome integer 2*b0 + b1), and p14 intermediate inputs
contribute radix-1 digits so the input index is just 2*x1 + x_last.

The two quantities of interest are built from (n+1)-partite correlators.  With
outcome bit b meaning eigenvalue (-1)**b,

    I = (1/4) sum_{x1, xlast} <corr at all-zero intermediate settings/bits>
    J = (1/4) sum_{x1, xlast} (-1)**(x1 + xlast) <corr at all-one ...>

and the two bound values are sqrt|I| + sqrt|J| (chain with independent
sources) and |I| + |J| (fully local models).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, KindError, RangeError
from .network import KIND_P14, KIND_P22, check_kind

BEHAVIOR_SCHEMA_VERSION = 1
ENTRY_ATOL = 1e-12
NORM_ATOL = 1e-10
VIOLATION_ATOL = 1e-9


def alphabets(kind: str, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Per-party (input_sizes, output_sizes) for a chain with n sources."""
    check_kind(kind)
    if n < 2:
        raise RangeError(f"chain needs at least two sources, got n={n}")
    if kind == KIND_P22:
        return (2,) * (n + 1), (2,) * (n + 1)
    return (2,) + (1,) * (n - 1) + (2,), (2,) + (4,) * (n - 1) + (2,)


@dataclass(eq=False)
class Behavior:
    """Dense conditional probability table for one chain scenario."""

    kind: str
    n: int
    table: np.ndarray

    def __post_init__(self):
        check_kind(self.kind)
        ins, outs = alphabets(self.kind, self.n)
        shape = (int(np.prod(ins)), int(np.prod(outs)))
        self.table = np.asarray(self.table, dtype=float)
        if self.table.shape != shape:
            raise DimensionError(
                f"table shape {self.table.shape} does not match {shape} for "
                f"kind={self.kind}, n={self.n}"
            )
        lo = float(self.table.min())
        hi = float(self.table.max())
        if lo < -ENTRY_ATOL or hi > 1.0 + ENTRY_ATOL:
            raise RangeError(f"table entries outside [0, 1]: min={lo}, max={hi}")
        sums = self.table.sum(axis=1)
        worst = float(np.abs(sums - 1.0).max())
        if worst > NORM_ATOL:
            raise RangeError(f"rows must sum to 1, worst deviation {worst}")

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return alphabets(self.kind, self.n)[0]

    @property
    def output_sizes(self) -> tuple[int, ...]:
        return alphabets(self.kind, self.n)[1]

    def input_index(self, xs) -> int:
        return int(np.ravel_multi_index(tuple(int(x) for x in xs), self.input_sizes))

    def outcome_index(self, outs) -> int:
        return int(np.ravel_multi_index(tuple(int(a) for a in outs), self.output_sizes))

    def prob(self, xs, outs) -> float:
        return float(self.table[self.input_index(xs), self.outcome_index(outs)])


def uniform_behavior(kind: str, n: int) -> Behavior:
    ins, outs = alphabets(kind, n)
    num_in, num_out = int(np.prod(ins)), int(np.prod(outs))
    return Behavior(kind, n, np.full((num_in, num_out), 1.0 / num_out))


def mix_behaviors(weights, behaviors) -> Behavior:
    """Convex mixture of behaviors on the same scenario."""
    weights = np.asarray(list(weights), dtype=float)
    behaviors = list(behaviors)
    if len(weights) != len(behaviors) or not behaviors:
        raise DimensionError("need one weight per behavior")
    if weights.min() < -ENTRY_ATOL or abs(weights.sum() - 1.0) > 1e-10:
        raise RangeError("mixture weights must be nonnegative and sum to 1")
    first = behaviors[0]
    for b in behaviors[1:]:
        if b.kind != first.kind or b.n != first.n:
            raise KindError("cannot mix behaviors from different scenarios")
    table = sum(w * b.table for w, b in zip(weights, behaviors))
    return Behavior(first.kind, first.n, table)


@lru_cache(maxsize=64)
def _outcome_digits(kind: str, n: int) -> tuple[np.ndarray, ...]:
    _, outs = alphabets(kind, n)
    num_out = int(np.prod(outs))
    return tuple(np.asarray(d) for d in np.unravel_index(np.arange(num_out), outs))


def _sign_vector(kind: str, n: int, selectors) -> np.ndarray:
    """(-1)**(sum of relevant outcome bits) per packed outcome index.

    For p22 every party contributes its output bit.  For p14 the ends
    contribute their bits and intermediate i contributes bit selectors[i-1]
    of its two-bit outcome string (bit 0 is the high bit of 2*b0 + b1).
    """
    digits = _outcome_digits(kind, n)
    if kind == KIND_P22:
        parity = np.zeros(digits[0].shape, dtype=np.int64)
        for d in digits:
            parity ^= d
    else:
        selectors = tuple(int(s) for s in selectors)
        if len(selectors) != n - 1:
            raise DimensionError(f"need {n - 1} bit selectors, got {len(selectors)}")
        parity = digits[0] ^ digits[-1]
        for sel, d in zip(selectors, digits[1:-1]):
            if sel not in (0, 1):
                raise RangeError(f"bit selectors must be 0 or 1, got {sel}")
            parity ^= (d >> 1) if sel == 0 else (d & 1)
    return 1.0 - 2.0 * (parity & 1)


def correlator_p22(b: Behavior, xs) -> float:
    """Full (n+1)-partite correlator <prod_i (-1)**a_i> at input tuple xs."""
    if b.kind != KIND_P22:
        raise KindError(f"correlator_p22 needs a p22 behavior, got {b.kind}")
    row = b.table[b.input_index(xs)]
    return float(row @ _sign_vector(KIND_P22, b.n, None))

def correlator_p14(b: Behavior, x1: int, xlast: int, selectors) -> float:
    """End-to-end correlator with one outcome bit selected per intermediate."""
    if b.kind != KIND_P14:
        raise KindError(f"correlator_p14 needs a p14 behavior, got {b.kind}")
    xs = (x1,) + (0,) * (b.n - 1) + (xlast,)
    row = b.table[b.input_index(xs)]
    return float(row @ _sign_vector(KIND_P14, b.n, tuple(selectors)))


def compute_IJ(b: Behavior) -> tuple[float, float]:
    """Signed values of the two correlator averages for a behavior."""
    n = b.n
    total_i = 0.0
    total_j = 0.0
    for x1 in (0, 1):
        for xlast in (0, 1):
            if b.kind == KIND_P22:
                ci = correlator_p22(b, (x1,) + (0,) * (n - 1) + (xlast,))
                cj = correlator_p22(b, (x1,) + (1,) * (n - 1) + (xlast,))
            else:
                ci = correlator_p14(b, x1, xlast, (0,) * (n - 1))
                cj = correlator_p14(b, x1, xlast, (1,) * (n - 1))
            total_i += ci
            total_j += (-1) ** (x1 + xlast) * cj
    return total_i / 4.0, total_j / 4.0


@dataclass
class CorrelatorReport:
    """Signed I and J plus the two derived bound values and violation flags."""

    I: float
    J: float
    nlocal_value: float
    local_value: float
    violates_nlocal: bool
    violates_local: bool

    def to_json(self) -> dict:
        return {
            "I": self.I,
            "J": self.J,
            "abs_I": abs(self.I),
            "abs_J": abs(self.J),
            "nlocal_value": self.nlocal_value,
            "local_value": self.local_value,
            "violates_nlocal": self.violates_nlocal,
            "violates_local": self.violates_local,
        }


def bound_values(I: float, J: float) -> CorrelatorReport:
    """Evaluate sqrt|I|+sqrt|J| and |I|+|J| and flag strict violations of 1.

    Raises RangeError when |I| or |J| exceeds 1 beyond tolerance; correlator
    averages of a normalized behavior cannot.
    """
    if abs(I) > 1.0 + VIOLATION_ATOL or abs(J) > 1.0 + VIOLATION_ATOL:
        raise RangeError(f"|I| and |J| must not exceed 1, got I={I}, J={J}")
    nlocal = np.sqrt(abs(I)) + np.sqrt(abs(J))
    local = abs(I) + abs(J)
    return CorrelatorReport(
        I=float(I),
        J=float(J),
        nlocal_value=float(nlocal),
        local_value=float(local),
        violates_nlocal=bool(nlocal > 1.0 + VIOLATION_ATOL),
        violates_local=bool(local > 1.0 + VIOLATION_ATOL),
    )


def correlator_report(b: Behavior) -> CorrelatorReport:
    I, J = compute_IJ(b)
    return bound_values(I, J)


def behavior_to_json(b: Behavior) -> dict:
    return {
        "schema_version": BEHAVIOR_SCHEMA_VERSION,
        "kind": b.kind,
        "n": b.n,
        "input_sizes": list(b.input_sizes),
        "output_sizes": list(b.output_sizes),
        "row_order": "inputs-major, outcomes-minor, party 1 most significant",
        "table": b.table.reshape(-1).tolist(),
    }


def behavior_from_json(doc: dict) -> Behavior:
    version = doc.get("schema_version")
    if version != BEHAVIOR_SCHEMA_VERSION:
        raise KindError(f"unsupported behavior schema version {version!r}")
    kind, n = check_kind(doc["kind"]), int(doc["n"])
    ins, outs = alphabets(kind, n)
    shape = (int(np.prod(ins)), int(np.prod(outs)))
    table = np.asarray(doc["table"], dtype=float).reshape(shape)
    return Behavior(kind, n, table)


def save_behavior_json(b: Behavior, path) -> None:
    with open(path, "w") as fh:
        json.dump(behavior_to_json(b), fh)


def load_behavior_json(path) -> Behavior:
    with open(path) as fh:
        return behavior_from_json(json.load(fh))


def save_behavior_csv(b: Behavior, path) -> None:
    """One row per (input tuple, outcome tuple): x1..xN, a1..aN, p."""
    ins, outs = alphabets(b.kind, b.n)
    num_parties = b.n + 1
    header = [f"x{i + 1}" for i in range(num_parties)] + \
             [f"a{i + 1}" for i in range(num_parties)] + ["p"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for xi in range(b.table.shape[0]):
            xs = np.unravel_index(xi, ins)
            for oi in range(b.table.shape[1]):
                outs_t = np.unravel_index(oi, outs)
                writer.writerow([*map(int, xs), *map(int, outs_t),
                                 repr(float(b.table[xi, oi]))])


def load_behavior_csv(path, kind: str, n: int) -> Behavior:
    ins, outs = alphabets(kind, n)
    shape = (int(np.prod(ins)), int(np.prod(outs)))
    table = np.zeros(shape)
    num_parties = n + 1
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            xs = tuple(int(v) for v in row[:num_parties])
            outs_t = tuple(int(v) for v in row[num_parties:2 * num_parties])
            xi = int(np.ravel_multi_index(xs, ins))
            oi = int(np.ravel_multi_index(outs_t, outs))
            table[xi, oi] = float(row[-1])
    return Behavior(kind, n, table)
