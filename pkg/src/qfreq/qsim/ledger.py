from __future__ import annotations

from dataclasses import dataclass, field

LEDGER_COLUMNS = (
    "trial",
    "seed",
    "algorithm",
    "n",
    "m",
    "k",
    "epsilon",
    "oracle_queries",
    "stream_passes",
    "space_qubits",
    "classical_samples",
    "estimate",
    "true_value",
)


@dataclass
class ResourceLedger:
    """Charged resources for one trial.  Counters only ever grow."""

    oracle_queries: int = 0
    stream_passes: int = 0
    modeled_space_qubits: int = 0
    classical_samples: int = 0
    emulated: dict[str, bool] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    def charge_queries(self, count: int, *, by: str | None = None) -> None:
        if count < 0:
            raise ValueError("query charge must be non-negative")
        self.oracle_queries += int(count)
        if by is not None:
            self.emulated.setdefault(by, True)

    def charge_passes(self, count: int, *, by: str | None = None) -> None:
        if count < 0:
            raise ValueError("pass charge must be non-negative")
        self.stream_passes += int(count)
        if by is not None:
            self.emulated.setdefault(by, True)

    def charge_samples(self, count: int) -> None:
        if count < 0:
            raise ValueError("sample charge must be non-negative")
        self.classical_samples += int(count)

    def note_space(self, qubits: int) -> None:
        """Record a live-space reading; the ledger keeps the high-water mark."""
        self.modeled_space_qubits = max(self.modeled_space_qubits, int(qubits))

    def merge(self, other: "ResourceLedger") -> "ResourceLedger":
        """Summation merge of per-trial ledgers; space keeps the max."""
        out = ResourceLedger(
            oracle_queries=self.oracle_queries + other.oracle_queries,
            stream_passes=self.stream_passes + other.stream_passes,
            modeled_space_qubits=max(self.modeled_space_qubits, other.modeled_space_qubits),
            classical_samples=self.classical_samples + other.classical_samples,
        )
        out.emulated = {**self.emulated, **other.emulated}
        out.notes = {**self.notes, **other.notes}
        return out

    def snapshot(self) -> tuple[int, int, int, int]:
        return (
            self.oracle_queries,
            self.stream_passes,
            self.modeled_space_qubits,
            self.classical_samples,
        )
