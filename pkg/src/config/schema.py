# src/config/schema.py
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from src.config.settings import (
    DEFAULT_CHECK_FRACTION_BOB,
    DEFAULT_CHECK_FRACTION_FINAL,
    DEFAULT_CHECK_FRACTION_HOP,
    DEFAULT_ERROR_THRESHOLD,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
)

MemoryMode = Literal["quantum_memory", "measure_immediately"]
ChannelKind = Literal["identity", "depolarizing", "lossy"]
AttackKind = Literal[
    "none",
    "intercept_resend",
    "single_photon_fake",
    "entangled_fake",
    "invisible_probe",
    "trojan_multiphoton",
]


class ProtocolConfig(BaseModel):
    """Parameters of one m-Alice / n-Bob protocol run."""
    m: int = Field(default=2, ge=2, description="Number of Alices (encoding parties).")
    n: int = Field(default=1, ge=1, description="Number of Bobs (receiving parties).")
    N: int = Field(default=200, ge=0, description="Per-Bob key-block length; Alice 1 prepares n*N signal photons.")
    decoy_counts: Optional[List[int]] = Field(
        default=None,
        description="Decoys inserted by Alice 2..m (length m-1). None means no decoys.",
    )
    check_fraction_hop: float = Field(default=DEFAULT_CHECK_FRACTION_HOP, gt=0, lt=1, description="Sampling fraction of each per-hop check.")
    check_fraction_bob: float = Field(default=DEFAULT_CHECK_FRACTION_BOB, gt=0, lt=1, description="Sampling fraction of the Bobs' check.")
    check_fraction_final: float = Field(default=DEFAULT_CHECK_FRACTION_FINAL, gt=0, le=1, description="Fraction of key blocks compared in the final check.")
    error_threshold: float = Field(default=DEFAULT_ERROR_THRESHOLD, ge=0, le=1, description="Abort when a check error rate exceeds this value.")
    memory_mode: MemoryMode = Field(default="quantum_memory", description="Whether Bobs can hold photons until the rotation strings are public.")
    seed: int = Field(default=DEFAULT_SEED, ge=0, description="Master seed of the run.")
    pauli_weights: List[float] = Field(
        default_factory=lambda: [1.0, 1.0, 1.0],
        min_length=3,
        max_length=3,
        description="Relative weights of the three pauli codes used by encoding Alices.",
    )

    @model_validator(mode="after")
    def _check_decoys(self):
        if self.decoy_counts is None:
            return self
        if len(self.decoy_counts) != self.m - 1:
            raise ValueError(f"decoy_counts must have m-1 = {self.m - 1} entries, got {len(self.decoy_counts)}.")
        if any(c < 0 for c in self.decoy_counts):
            raise ValueError("decoy_counts entries must be non-negative.")
        return self

    @property
    def decoys(self) -> List[int]:
        return list(self.decoy_counts) if self.decoy_counts is not None else [0] * (self.m - 1)

    @property
    def total_decoys(self) -> int:
        return sum(self.decoys)

    @property
    def padding(self) -> int:
        """Photons Alice m appends so that nN + N_m is a multiple of n."""
        return (-(self.n * self.N + self.total_decoys)) % self.n

    @property
    def block_count(self) -> int:
        """N-bar: photons each Bob receives."""
        return (self.n * self.N + self.total_decoys + self.padding) // self.n


class ChannelModel(BaseModel):
    kind: ChannelKind = Field(default="identity", description="Noise model applied on every quantum link.")
    p: float = Field(default=0.0, ge=0, le=1, description="Depolarizing or loss probability.")


class AttackStrategy(BaseModel):
    kind: AttackKind = Field(default="none", description="Attack applied during the run.")
    attacker_index: int = Field(
        default=0,
        ge=0,
        description="Dishonest Alice i0 (1..m) for fake-signal attacks; 0 means an external attacker.",
    )
    link: int = Field(
        default=1,
        ge=1,
        description="External attacks act on the link leaving Alice `link` (m = the link to the Bobs).",
    )
    alpha: Optional[List[complex]] = Field(default=None, description="Ancilla vector paired with |0> for entangled_fake.")
    beta: Optional[List[complex]] = Field(default=None, description="Ancilla vector paired with |1> for entangled_fake.")
    tamper_fraction: float = Field(default=1.0, ge=0, le=1, description="Fraction of signals carrying extra copies (trojan) or probes appended per signal (invisible).")

    @model_validator(mode="after")
    def _check_pair(self):
        if self.kind == "entangled_fake":
            if self.alpha is None or self.beta is None:
                raise ValueError("entangled_fake requires alpha and beta.")
            if len(self.alpha) != 2 or len(self.beta) != 2:
                raise ValueError("alpha and beta must each have two components.")
        if self.kind in ("single_photon_fake", "entangled_fake") and self.attacker_index < 1:
            raise ValueError("fake-signal attacks need a dishonest Alice index >= 1.")
        return self


class ExperimentConfig(BaseModel):
    protocol: ProtocolConfig = Field(default_factory=ProtocolConfig)
    attack: AttackStrategy = Field(default_factory=AttackStrategy)
    channel: ChannelModel = Field(default_factory=ChannelModel)
    trials: int = Field(default=1, ge=1, description="Number of independent protocol runs.")
    output_path: Optional[str] = Field(default=None, description="Where the JSON report is written; stdout when unset.")
    workers: int = Field(default=DEFAULT_WORKERS, ge=1, description="Process pool size for trials.")

    @model_validator(mode="after")
    def _check_attack_fits(self):
        if self.attack.attacker_index > self.protocol.m:
            raise ValueError(f"attacker_index {self.attack.attacker_index} exceeds m = {self.protocol.m}.")
        if self.attack.link > self.protocol.m:
            raise ValueError(f"link {self.attack.link} exceeds m = {self.protocol.m}.")
        return self
