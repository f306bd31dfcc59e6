"""Run configuration: one tolerance block plus subcommand inputs."""

import os
from dataclasses import asdict, dataclass, field, fields

from .errors import InvalidInputError


@dataclass(frozen=True)
class Tolerances:
    tau_cmc: float = 1e-3
    tau_min: float = 1e-3
    tau_isom: float = 1e-3
    tau_period: float = 1e-4
    tau_conf: float = 1e-3
    tau_normal: float = 1e-3
    tau_shape: float = 5e-3
    tau_necksize: float = 1e-3
    tau_hopf: float = 1e-4
    tau_hausdorff: float = 1e-3
    rho_cluster: float = 1e-3
    loop_factor: float = 10.0
    max_drift: float = 1e-6
    eps_unit: float = 1e-9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise InvalidInputError(f"tolerance {f.name} must be positive, got {v!r}", module="cli")

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    resolution: tuple = (400, 200)
    necksizes: tuple = ()
    triple: tuple = ()
    options: dict = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)
    outputs: dict = field(default_factory=dict)
    report_format: str = "json"

    def __post_init__(self):
        if len(self.resolution) != 2 or min(self.resolution) < 16:
            raise InvalidInputError(f"resolution must be at least 16x16, got {self.resolution}", module="cli")
        if self.report_format != "json":
            raise InvalidInputError("json is the only report format", module="cli")


def worker_count():
    """Pool size from COUSINLAB_THREADS (default: CPU count)."""
    raw = os.environ.get("COUSINLAB_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"COUSINLAB_THREADS must be an integer, got {raw!r}", module="cli") from exc
    if n < 1:
        raise InvalidInputError("COUSINLAB_THREADS must be at least 1", module="cli")
    return n
