from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.pea import PEAConfig

KickKind = Literal["spin-flips", "pauli-flips", "single-flip", "swap", "identity"]


class SStrict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HamiltonianSpec(SStrict):
    model: Literal["ising", "tfim", "random2local", "random", "diagonal"]
    n: int = Field(ge=1, le=5)
    J: float = 1.0
    h: float = 0.0
    periodic: bool = False
    seed: int = 0
    energies: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_energies(self):
        if self.model == "diagonal" and self.energies is None:
            raise ValueError("для model=diagonal обязателен список energies")
        return self


class KickSpec(SStrict):
    kind: KickKind = "spin-flips"
    site: int = Field(default=1, ge=1)


class ScheduleSpec(SStrict):
    d: Optional[int] = Field(default=None, ge=1)
    ds: Optional[List[int]] = None
    epsilon: Optional[float] = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def check_target(self):
        if self.d is None and not self.ds and self.epsilon is None:
            raise ValueError("нужно задать d, ds или epsilon")
        return self


class InstanceSpec(SStrict):
    name: Optional[str] = None
    hamiltonian: HamiltonianSpec
    kick: KickSpec = KickSpec()
    betas: List[float] = [1.0]


class GenerateSpec(SStrict):
    model: Literal["ising", "tfim", "random2local"] = "random2local"
    n_values: List[int] = [2]
    count: int = Field(default=10, ge=0)
    betas: List[float] = [0.5, 1.0, 2.0]
    seed: int = 0
    kick: KickSpec = KickSpec()


class ExperimentConfig(SStrict):
    """Описание эксперимента; неизвестные ключи отвергаются."""

    hamiltonian: Optional[HamiltonianSpec] = None
    kick: KickSpec = KickSpec()
    beta: float = Field(default=1.0, ge=0)
    schedule: Optional[ScheduleSpec] = None
    mode: Literal["exact", "pea"] = "exact"
    policy: Literal["abort", "retry-step", "accept-and-continue"] = "retry-step"
    max_retries: int = Field(default=10, ge=0)
    post_select: bool = False
    lazy_chain: bool = False
    allow_large: bool = False
    pea: PEAConfig = PEAConfig()
    windows: List[int] = [3, 4, 5, 6, 7, 8]
    instances: List[InstanceSpec] = []
    generate: Optional[GenerateSpec] = None
    workers: int = Field(default=1, ge=1)
    seed: int = 0
    output_dir: str = "results"
