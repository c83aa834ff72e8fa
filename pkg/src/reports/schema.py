# src/reports/schema.py
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field

from src.config.schema import ExperimentConfig
from src.config.settings import REPORT_SCHEMA_VERSION

AbortStage = Literal["M2", "M3", "M5", "M7"]


class StageTally(BaseModel):
    sampled: int = Field(default=0, description="Photons drawn for the check.")
    retained: int = Field(default=0, description="Samples whose measurement basis matched the announced basis.")
    errors: int = Field(default=0, description="Retained samples whose bit disagreed with the announced label.")
    multiphoton: int = Field(default=0, description="Sampled signals carrying extra copies.")
    filtered: int = Field(default=0, description="Invisible photons removed before sampling.")

    @property
    def error_rate(self) -> float:
        return self.errors / self.retained if self.retained else 0.0


class RunReport(BaseModel):
    """Transcript of one protocol run."""
    trial: int = 0
    seed: int = 0
    aborted: bool = False
    abort_stage: Optional[AbortStage] = None
    abort_reason: Optional[str] = None
    per_hop_error_rates: List[float] = Field(default_factory=list, description="Error rate of the check at Alice 2..m, in order.")
    bob_check_error_rate: float = 0.0
    final_check_error_rate: float = 0.0
    stage_tallies: Dict[str, StageTally] = Field(default_factory=dict)
    signal_photons: int = Field(default=0, description="n*N signal photons prepared by Alice 1.")
    photons_per_bob: int = Field(default=0, description="N-bar: positions each Bob received.")
    lost_photons: int = 0
    tampered_photons: int = Field(default=0, description="Carriers touched by the attacker.")
    sifted_count: int = Field(default=0, description="Signal positions measured by Bobs with a usable bit.")
    check_count: int = Field(default=0, description="Positions consumed by the final check.")
    dropped_blocks: int = Field(default=0, description="Key blocks missing at least one usable Bob bit.")
    key_length: int = 0
    usable_fraction: Optional[float] = Field(default=None, description="Usable bits per signal position reaching the announcement step.")
    efficiency: Optional[float] = Field(default=None, description="key_length / photons_per_bob; null when nothing was distributed.")
    alice_combined_bits: str = ""
    bob_xor_key: str = ""
    attacker_key_accuracy: Optional[float] = None
    attacker_info_gain: float = 0.0


class DetectionStats(BaseModel):
    trials: int = 0
    abort_count: int = 0
    abort_by_stage: Dict[str, int] = Field(default_factory=dict)
    mean_error_rate_by_stage: Dict[str, float] = Field(default_factory=dict, description="Mean over runs that reached the stage.")
    pooled_error_rate_by_stage: Dict[str, float] = Field(default_factory=dict, description="Total errors / total retained samples.")
    retained_by_stage: Dict[str, int] = Field(default_factory=dict)
    attacker_info_gain: float = Field(default=0.0, description="Fraction of key bits the attacker predicts with certainty.")
    attacker_key_accuracy: Optional[float] = Field(default=None, description="Fraction of key bits the attacker predicts correctly.")
    expected_detection_probability: Optional[float] = None


class ExperimentReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    config: ExperimentConfig
    reports: List[RunReport]
    summary: DetectionStats


class BoundsReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    objective: Literal["s1", "s2"]
    minimum: float
    argmin: Tuple[float, float, float, float] = Field(description="(x, y, z, t) of the feasible minimiser.")
    p1: float
    p2: float
    grid_resolution: int
    refinement: int
    grid_minimum: float
    unconstrained_minimum: float


class EfficiencyRow(BaseModel):
    memory_mode: str
    trials: int
    mean_usable_fraction: Optional[float]
    mean_efficiency: Optional[float]
    expected_efficiency: Optional[float] = None


class EfficiencyReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    config: ExperimentConfig
    modes: List[EfficiencyRow]


class DiscriminationReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    alpha: List[complex]
    beta: List[complex]
    trials: int
    success_rate: float
    p2_bound: float
