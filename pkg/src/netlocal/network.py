"""Linear network scenarios: n independent two-qubit sources in a chain.

A scenario has n sources S_1..S_n and n+1 parties.  Party 1 holds the left
qubit of S_1, party i (2 <= i <= n) holds the right qubit of S_{i-1} together
with the left qubit of S_i, and party n+1 holds the right qubit of S_n.
Global qubit order is source-major: (S_1 left, S_1 right, S_2 left, ...).

Two measurement layouts are supported:

* kind "p22": every party has two inputs and two outputs; intermediate
  parties measure a dichotomic two-qubit observable per input.
* kind "p14": the end parties have two inputs and two outputs; each
  intermediate party performs one fixed four-outcome projective measurement
  whose outcomes are two-bit strings encoded as the integer 2*b0 + b1.

Outcome bit b corresponds to eigenvalue (-1)**b everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qlin
from .errors import KindError, RangeError, ScenarioError

KIND_P22 = "p22"
KIND_P14 = "p14"
KINDS = (KIND_P22, KIND_P14)

SCENARIO_SCHEMA_VERSION = 1

PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise KindError(f"unknown scenario kind {kind!r}, expected one of {KINDS}")
    return kind


def singlet() -> np.ndarray:
    """Density operator of the two-qubit singlet (|01> - |10>)/sqrt(2)."""
    ket = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    return np.outer(ket, ket.conj())


def werner(alpha: float) -> np.ndarray:
    """Singlet mixed with white noise: alpha*singlet + (1-alpha)*I/4."""
    if not 0.0 <= alpha <= 1.0:
        raise RangeError(f"visibility must lie in [0, 1], got {alpha}")
    return alpha * singlet() + (1.0 - alpha) * ID4 / 4.0


def end_observable(x: int) -> np.ndarray:
    """Dichotomic end-party observable (sigma_z + (-1)**x sigma_x)/sqrt(2)."""
    if x not in (0, 1):
        raise RangeError(f"end-party input must be 0 or 1, got {x}")
    return (PAULI_Z + (-1) ** x * PAULI_X) / np.sqrt(2.0)


def partial_bsm_observable(x: int) -> np.ndarray:
    """Two-qubit parity observable sigma_z x sigma_z (x=0) or sigma_x x sigma_x (x=1)."""
    if x not in (0, 1):
        raise RangeError(f"intermediate input must be 0 or 1, got {x}")
    s = PAULI_Z if x == 0 else PAULI_X
    return np.kron(s, s)


def bsm_projectors() -> list[np.ndarray]:
    """The four Bell projectors in outcome order 0..3.

    Outcome 2*b0 + b1 carries bit b0 = eigenvalue bit of sigma_z x sigma_z
    and bit b1 = eigenvalue bit of sigma_x x sigma_x, so the order is
    phi+, phi-, psi+, psi-.
    """
    s = 1.0 / np.sqrt(2.0)
    kets = [
        np.array([s, 0.0, 0.0, s], dtype=complex),
        np.array([s, 0.0, 0.0, -s], dtype=complex),
        np.array([0.0, s, s, 0.0], dtype=complex),
        np.array([0.0, s, -s, 0.0], dtype=complex),
    ]
    return [np.outer(k, k.conj()) for k in kets]


@dataclass(eq=False)
class SourceState:
    """One two-qubit source: its density operator and, if known, the
    visibility used to build it (None for hand-supplied states)."""

    rho: np.ndarray
    alpha: float | None = None

    def __post_init__(self):
        self.rho = qlin.as_operator(self.rho)
        if self.rho.shape != (4, 4):
            raise ScenarioError(f"source state must be 4x4, got {self.rho.shape}")
        if not qlin.is_density_operator(self.rho, atol=1e-9):
            raise ScenarioError("source state is not a density operator")


@dataclass(eq=False)
class NetworkScenario:
    """A fully specified chain scenario.

    end_settings holds, for each end party (index 0 for party 1, index 1 for
    party n+1), its two dichotomic single-qubit observables.  For kind p22,
    intermediate_settings holds per intermediate party its two dichotomic
    two-qubit observables; for kind p14 it holds the four projectors of its
    Bell-basis measurement, in outcome order.
    """

    n: int
    kind: str
    sources: list[SourceState]
    end_settings: list[list[np.ndarray]]
    intermediate_settings: list[list[np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        check_kind(self.kind)
        if self.n < 2:
            raise ScenarioError(f"chain needs at least two sources, got n={self.n}")
        if len(self.sources) != self.n:
            raise ScenarioError(f"expected {self.n} sources, got {len(self.sources)}")
        if len(self.end_settings) != 2 or any(len(obs) != 2 for obs in self.end_settings):
            raise ScenarioError("end_settings must hold two observables per end party")
        for obs in self.end_settings:
            for a in obs:
                _check_dichotomic(a, 2)
        if len(self.intermediate_settings) != self.n - 1:
            raise ScenarioError(
                f"expected {self.n - 1} intermediate settings, got {len(self.intermediate_settings)}"
            )
        for ops in self.intermediate_settings:
            if self.kind == KIND_P22:
                if len(ops) != 2:
                    raise ScenarioError("p22 intermediates need two observables")
                for b in ops:
                    _check_dichotomic(b, 4)
            else:
                if len(ops) != 4:
                    raise ScenarioError("p14 intermediates need four projectors")
                _check_projective(ops)

    @property
    def num_parties(self) -> int:
        return self.n + 1


def _check_dichotomic(op, dim):
    op = qlin.as_operator(op)
    if op.shape != (dim, dim):
        raise ScenarioError(f"observable must be {dim}x{dim}, got {op.shape}")
    if not qlin.is_hermitian(op, atol=1e-10):
        raise ScenarioError("observable is not Hermitian")
    if not np.allclose(op @ op, np.eye(dim), atol=1e-10):
        raise ScenarioError("observable is not dichotomic (square != identity)")


def _check_projective(ops):
    dim = 4
    total = np.zeros((dim, dim), dtype=complex)
    for p in ops:
        p = qlin.as_operator(p)
        if p.shape != (dim, dim):
            raise ScenarioError(f"projector must be {dim}x{dim}, got {p.shape}")
        if not qlin.is_hermitian(p, atol=1e-10):
            raise ScenarioError("projector is not Hermitian")
        if not np.allclose(p @ p, p, atol=1e-10):
            raise ScenarioError("projector is not idempotent")
        total = total + p
    if not np.allclose(total, np.eye(dim), atol=1e-10):
        raise ScenarioError("projectors do not sum to the identity")


def standard_scenario(n: int, kind: str, alphas=None) -> NetworkScenario:
    """The reference scenario: Werner sources, standard settings everywhere.

    Args:
        n: number of sources (>= 2).
        kind: "p22" or "p14".
        alphas: per-source visibilities; defaults to all ones (pure singlets).
    """
    check_kind(kind)
    if n < 2:
        raise ScenarioError(f"chain needs at least two sources, got n={n}")
    if alphas is None:
        alphas = [1.0] * n
    alphas = [float(a) for a in alphas]
    if len(alphas) != n:
        raise ScenarioError(f"expected {n} visibilities, got {len(alphas)}")
    sources = [SourceState(werner(a), alpha=a) for a in alphas]
    ends = [[end_observable(0), end_observable(1)] for _ in range(2)]
    if kind == KIND_P22:
        mids = [[partial_bsm_observable(0), partial_bsm_observable(1)] for _ in range(n - 1)]
    else:
        mids = [bsm_projectors() for _ in range(n - 1)]
    return NetworkScenario(n=n, kind=kind, sources=sources,
                           end_settings=ends, intermediate_settings=mids)


def measurement_elements(scenario: NetworkScenario, party: int) -> list[list[np.ndarray]]:
    """POVM elements of one party, as elements[input][outcome].

    Party indices run 0..n (0 and n are the ends).  Dichotomic observables B
    expand to projectors (I + (-1)**a B)/2; p14 intermediates return their
    projector list under their single input.
    """
    n = scenario.n
    if not 0 <= party <= n:
        raise ScenarioError(f"party index {party} out of range for {n + 1} parties")
    if party == 0 or party == n:
        obs = scenario.end_settings[0 if party == 0 else 1]
        return [[(ID2 + (-1) ** a * b) / 2.0 for a in (0, 1)] for b in obs]
    ops = scenario.intermediate_settings[party - 1]
    if scenario.kind == KIND_P22:
        return [[(ID4 + (-1) ** a * b) / 2.0 for a in (0, 1)] for b in ops]
    return [[np.asarray(p, dtype=complex) for p in ops]]


def _matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def scenario_to_json(scenario: NetworkScenario) -> dict:
    """Plain-dict form of a scenario; floats survive a JSON round trip exactly."""
    return {
        "schema_version": SCENARIO_SCHEMA_VERSION,
        "n": scenario.n,
        "kind": scenario.kind,
        "sources": [
            {"alpha": s.alpha, "rho": _matrix_to_json(s.rho)} for s in scenario.sources
        ],
        "end_settings": [[_matrix_to_json(o) for o in obs] for obs in scenario.end_settings],
        "intermediate_settings": [
            [_matrix_to_json(o) for o in ops] for ops in scenario.intermediate_settings
        ],
    }


def scenario_from_json(doc: dict) -> NetworkScenario:
    version = doc.get("schema_version")
    if version != SCENARIO_SCHEMA_VERSION:
        raise ScenarioError(f"unsupported scenario schema version {version!r}")
    sources = [
        SourceState(_matrix_from_json(s["rho"]), alpha=s.get("alpha"))
        for s in doc["sources"]
    ]
    ends = [[_matrix_from_json(o) for o in obs] for obs in doc["end_settings"]]
    mids = [[_matrix_from_json(o) for o in ops] for ops in doc["intermediate_settings"]]
    return NetworkScenario(n=int(doc["n"]), kind=check_kind(doc["kind"]),
                           sources=sources, end_settings=ends,
                           intermediate_settings=mids)
