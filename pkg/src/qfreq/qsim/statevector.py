"""Dense statevector simulation for the exact (tiny-instance) tier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import Stream
from .ledger import ResourceLedger

MAX_QUBITS = 22
NORM_TOL = 1e-10


class StatevectorError(ValueError):
    pass


class Statevector:
    """Unit-norm complex amplitudes over 2^q basis states.

    Mutated in place by the gate methods; callers own their instance.
    """

    def __init__(self, amplitudes):
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel().copy()
        q = int(round(math.log2(amps.size))) if amps.size else -1
        if amps.size == 0 or 1 << q != amps.size:
            raise StatevectorError(f"length {amps.size} is not a power of two")
        if q > MAX_QUBITS:
            raise StatevectorError(f"{q} qubits exceeds the {MAX_QUBITS}-qubit cap")
        if abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise StatevectorError("amplitudes are not normalised")
        self.amplitudes = amps
        self.q = q

    @classmethod
    def basis(cls, q: int, index: int = 0) -> "Statevector":
        amps = np.zeros(1 << q, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def uniform(cls, q: int, support: int | None = None) -> "Statevector":
        """Equal superposition over the first `support` basis states (all if None)."""
        size = 1 << q
        support = size if support is None else support
        amps = np.zeros(size, dtype=np.complex128)
        amps[:support] = 1.0 / math.sqrt(support)
        return cls(amps)

    def __len__(self) -> int:
        return self.amplitudes.size

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes)

    def norm(self) -> float:
        return float(math.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def check_norm(self) -> None:
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise StatevectorError(f"norm drifted to {self.norm()!r}")

    def apply_permutation(self, perm: np.ndarray) -> None:
        """Basis permutation |x> -> |perm[x]>."""
        perm = np.asarray(perm)
        if perm.size != self.amplitudes.size or np.unique(perm).size != perm.size:
            raise StatevectorError("not a permutation of the basis")
        out = np.empty_like(self.amplitudes)
        out[perm] = self.amplitudes
        self.amplitudes = out

    def apply_phase_flip(self, mask: np.ndarray) -> None:
        self.amplitudes[np.asarray(mask, dtype=bool)] *= -1

    def reflect_about(self, vector: np.ndarray) -> None:
        """Apply 2|u><u| - I for a unit vector u."""
        u = np.asarray(vector, dtype=np.complex128)
        self.amplitudes = 2 * u * np.vdot(u, self.amplitudes) - self.amplitudes

    def apply_unitary(self, matrix: np.ndarray) -> None:
        self.amplitudes = np.asarray(matrix) @ self.amplitudes

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def register_probabilities(self, widths: tuple[int, ...], which: int) -> np.ndarray:
        """Marginal distribution of one register; registers are listed high bits first."""
        if sum(widths) != self.q:
            raise StatevectorError("register widths must sum to q")
        probs = self.probabilities().reshape([1 << w for w in widths])
        axes = tuple(i for i in range(len(widths)) if i != which)
        return probs.sum(axis=axes)

    def measure(self, rng: np.random.Generator) -> int:
        probs = self.probabilities()
        return int(rng.choice(probs.size, p=probs / probs.sum()))


# -- query oracle ----------------------------------------------------------------


@dataclass(frozen=True)
class OracleLayout:
    """|i>|x> with the index register in the high bits.

    Index basis state i (0-based) stands for stream position i+1; padding
    states i >= n are left untouched by the oracle.
    """

    index_qubits: int
    value_qubits: int

    @classmethod
    def for_stream(cls, stream: Stream) -> "OracleLayout":
        qi = max(1, math.ceil(math.log2(max(stream.n, 1))))
        qv = max(1, math.ceil(math.log2(stream.m + 1)))
        return cls(qi, qv)

    @property
    def q(self) -> int:
        return self.index_qubits + self.value_qubits

    @property
    def modulus(self) -> int:
        return 1 << self.value_qubits


def oracle_query(stream: Stream, i: int, ledger: ResourceLedger | None = None) -> int:
    """Classical query: returns a_i and charges one oracle use."""
    value = stream[i]
    if ledger is not None:
        ledger.charge_queries(1)
    return value


def oracle_permutation(
    stream: Stream, layout: OracleLayout, kind: str = "add", inverse: bool = False
) -> np.ndarray:
    """Basis permutation for |i>|x> -> |i>|x + a_i mod m'> (or x XOR a_i)."""
    n_idx = 1 << layout.index_qubits
    mod = layout.modulus
    a = np.zeros(n_idx, dtype=np.int64)
    a[: stream.n] = stream.as_array()
    i_grid, x_grid = np.meshgrid(np.arange(n_idx), np.arange(mod), indexing="ij")
    shift = a[i_grid]
    if kind == "add":
        x_new = (x_grid - shift) % mod if inverse else (x_grid + shift) % mod
    elif kind == "xor":
        x_new = x_grid ^ shift
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    x_new = np.where(i_grid < stream.n, x_new, x_grid)
    return (i_grid * mod + x_new).ravel()


def apply_query_oracle(
    state: Statevector,
    stream: Stream,
    layout: OracleLayout,
    ledger: ResourceLedger | None = None,
    *,
    kind: str = "add",
    inverse: bool = False,
) -> None:
    if state.q != layout.q:
        raise StatevectorError("state does not match the oracle layout")
    state.apply_permutation(oracle_permutation(stream, layout, kind, inverse))
    if ledger is not None:
        ledger.charge_queries(1)


# -- Grover ---------------------------------------------------------------------


@dataclass(frozen=True)
class GroverResult:
    index: int
    success_probability: float
    analytic_probability: float
    iterations: int
    marked: bool


def grover_iterate(state: Statevector, marked: np.ndarray, start: np.ndarray, iterations: int) -> None:
    """Oracle phase flip on `marked` followed by reflection about `start`."""
    for _ in range(iterations):
        state.apply_phase_flip(marked)
        state.reflect_about(start)


def grover_search_statevector(
    marked_predicate,
    q: int,
    rng: np.random.Generator,
    *,
    assumed_marked: int | None = None,
    ledger: ResourceLedger | None = None,
) -> GroverResult:
    """Grover search over 2^q items with floor(pi/4 sqrt(2^q/t)) iterations."""
    if q > 12:
        raise StatevectorError("Grover validation tier is limited to 12 qubits")
    size = 1 << q
    if callable(marked_predicate):
        marked = np.fromiter((bool(marked_predicate(x)) for x in range(size)), bool, size)
    else:
        marked = np.asarray(marked_predicate, dtype=bool)
    t = int(marked.sum())
    if assumed_marked is not None and assumed_marked > 0 and t == 0:
        raise StatevectorError("predicate marks no items but a positive count was assumed")
    if t == 0:
        iterations = 0
        analytic = 0.0
    else:
        iterations = int(math.floor(math.pi / 4 * math.sqrt(size / t)))
        if t == size:
            iterations = 0
        theta = math.asin(math.sqrt(t / size))
        analytic = math.sin((2 * iterations + 1) * theta) ** 2
    state = Statevector.uniform(q)
    start = state.amplitudes.copy()
    grover_iterate(state, marked, start, iterations)
    probs = state.probabilities()
    if ledger is not None:
        ledger.charge_queries(iterations)
    index = int(rng.choice(size, p=probs / probs.sum()))
    return GroverResult(
        index=index,
        success_probability=float(probs[marked].sum()),
        analytic_probability=analytic,
        iterations=iterations,
        marked=bool(marked[index]),
    )
