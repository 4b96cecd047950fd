from typing import Dict, List, Optional

from pydantic import BaseModel


class SChainSummary(BaseModel):
    beta: float
    delta: Optional[float]
    eigenvalues: List[float]
    detailed_balance_residual: float
    mixing_time: Optional[float]
    negative_eigenvalues: bool
    lazy: bool


class SWalkSummary(BaseModel):
    delta_min: float
    two_sqrt_delta: float
    passed: bool
    fixed_point_residual: float
    similarity_deviation: float
    thermal_trace_distance: float
    eigenphases: List[float]


class SMergedOutcomes(BaseModel):
    step: int
    groups: List[List[int]]


class SAnnealRun(BaseModel):
    d: int
    final_fidelity: float
    final_trace_distance: float
    thermal_fidelity: float
    cumulative_success: float
    zeno_error: float
    retries: int
    controlled_w_count: int
    budget_quantum: float
    budget_classical: float
    trace_file: str
    merged_outcomes: List[SMergedOutcomes] = []


class SAnnealMetadata(BaseModel):
    hamiltonian: str
    beta: float
    mode: str
    policy: str
    post_select: bool
    seed: int
    epsilon: float
    h2_bound: float
    log_convention: str = "natural"
    runs: List[SAnnealRun]


class SLeakageWindow(BaseModel):
    a: int
    window: float
    max_eta: float
    mean_eta: float
    flagged: bool
    file: str


class SLeakageSummary(BaseModel):
    hamiltonian: str
    kick: str
    threshold: float
    config: Dict[str, float]
    windows: List[SLeakageWindow]
    note: str = "threshold and binning are calibration choices"
