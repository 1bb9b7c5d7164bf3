"""Canonical amplitude estimation (phase estimation on the Grover operator).

With M evaluation points the measured integer y yields the estimate
sin^2(pi y / M).  Tier A simulates the circuit on a statevector; tier B samples
y from the closed-form output distribution, which is what the large-scale
algorithms use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ledger import ResourceLedger
from .statevector import StatevectorError

MAX_EVAL_QUBITS = 12
_SNAP = 1e-9


@dataclass(frozen=True)
class AEResult:
    estimate: float
    y: int
    M: int


def _fejer(delta: np.ndarray, M: int) -> np.ndarray:
    """|<y|QFT^-1|phase>|^2 as a function of the phase offset delta (period 1)."""
    delta = np.asarray(delta, dtype=float)
    scaled = M * delta
    nearest = np.round(scaled)
    on_grid = np.abs(scaled - nearest) < _SNAP
    num = np.sin(np.pi * scaled) ** 2
    den = (M * np.sin(np.pi * delta)) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 1.0)
    # snap exactly representable phases so the distribution is exactly a point mass
    grid_val = np.where(np.mod(nearest, M) == 0, 1.0, 0.0)
    return np.where(on_grid, grid_val, out)


def ae_distribution(p: float, M: int) -> np.ndarray:
    """Probability of each outcome y in [0, M) for true good-probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if M < 1:
        raise ValueError("M must be at least 1")
    theta = math.asin(math.sqrt(p)) / math.pi
    y = np.arange(M) / M
    probs = 0.5 * (_fejer(y - theta, M) + _fejer(y + theta, M))
    return probs / probs.sum()


def estimate_from_outcome(y: int, M: int) -> float:
    return math.sin(math.pi * y / M) ** 2


def ae_error_bound(p: float, M: int) -> float:
    """Additive error holding with probability >= 8/pi^2."""
    return 2 * math.pi * math.sqrt(p * (1 - p)) / M + math.pi**2 / M**2


def iterations_for_error(error: float) -> int:
    """Smallest power of two M with the worst-case (p = 1/2) bound <= error."""
    M = 1
    while math.pi / M + math.pi**2 / M**2 > error:
        M *= 2
    return M


def bernoulli_operator(p: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-qubit A with A|0> = sqrt(1-p)|0> + sqrt(p)|1>; good state is |1>."""
    angle = math.asin(math.sqrt(p))
    c, s = math.cos(angle), math.sin(angle)
    A = np.array([[c, -s], [s, c]], dtype=np.complex128)
    return A, np.array([False, True])


def grover_operator(A: np.ndarray, good: np.ndarray) -> np.ndarray:
    """Q = -A S_0 A^dagger S_good."""
    D = A.shape[0]
    s0 = np.eye(D, dtype=np.complex128)
    s0[0, 0] = -1
    s_good = np.diag(np.where(np.asarray(good, dtype=bool), -1.0, 1.0)).astype(np.complex128)
    return -A @ s0 @ A.conj().T @ s_good


def ae_statevector_distribution(A: np.ndarray, good: np.ndarray, M: int) -> np.ndarray:
    """Outcome distribution from a full simulation of the estimation circuit.

    Evaluation register of log2(M) qubits, Hadamards, controlled Q^(2^j) from
    evaluation qubit j, inverse QFT, then the evaluation-register marginal.
    """
    q = int(round(math.log2(M))) if M >= 1 else -1
    if M < 1 or 1 << q != M:
        raise StatevectorError(f"statevector tier needs M a power of two, got {M}")
    if q > MAX_EVAL_QUBITS:
        raise StatevectorError(f"statevector tier is limited to {MAX_EVAL_QUBITS} evaluation qubits")
    A = np.asarray(A, dtype=np.complex128)
    D = A.shape[0]
    psi = A[:, 0]
    # after Hadamards on the evaluation register: uniform over y, tensor psi
    state = np.tile(psi / math.sqrt(M), (M, 1))
    Q = grover_operator(A, good)
    power = Q
    ys = np.arange(M)
    for j in range(q):
        rows = (ys >> j) & 1 == 1
        state[rows] = state[rows] @ power.T
        power = power @ power
    # inverse QFT on the evaluation register
    state = np.fft.fft(state, axis=0) / math.sqrt(M)
    probs = (np.abs(state) ** 2).sum(axis=1)
    if abs(probs.sum() - 1.0) > 1e-9:
        raise StatevectorError("norm lost during estimation circuit")
    return probs / probs.sum()


def amplitude_estimate(
    M: int,
    rng: np.random.Generator,
    *,
    probability: float | None = None,
    operator: tuple[np.ndarray, np.ndarray] | None = None,
    ledger: ResourceLedger | None = None,
    passes_per_iteration: int | None = None,
) -> AEResult:
    """Run one amplitude estimation with M evaluation points.

    Give either the true `probability` (closed-form sampling) or an
    `operator` pair (A, good_mask) for statevector simulation.  The ledger is
    charged M predicate uses, as queries or, when passes_per_iteration is
    set, as M * passes_per_iteration stream passes.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if operator is not None:
        dist = ae_statevector_distribution(*operator, M)
    elif probability is not None:
        dist = ae_distribution(probability, M)
    else:
        raise ValueError("need a probability or an operator")
    y = int(rng.choice(M, p=dist))
    if ledger is not None:
        if passes_per_iteration is None:
            ledger.charge_queries(M, by="amplitude_estimation")
        else:
            ledger.charge_passes(M * passes_per_iteration, by="amplitude_estimation")
    return AEResult(estimate=estimate_from_outcome(y, M), y=y, M=M)


def sample_outcomes(p: float, M: int, rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.choice(M, size=size, p=ae_distribution(p, M))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
