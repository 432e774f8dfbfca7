"""Strong-decoherence master equations for open quantum systems (C++ core)."""

from ._core import (
    CM_TO_RAD_PER_FS,
    ConfigError,
    DomainError,
    KernelContext,
    ModelError,
    NumericalError,
    RunConfig,
    __version__,
    beta_from_temperature,
    cm_to_rad_fs,
    eet_chain,
    heom_evolve,
    load_config,
    parse_config,
    rad_fs_to_cm,
    rates_report,
    run,
    simulate,
    spin_boson_paper,
    trace_distance,
)

__all__ = [
    "CM_TO_RAD_PER_FS",
    "ConfigError",
    "DomainError",
    "KernelContext",
    "ModelError",
    "NumericalError",
    "RunConfig",
    "__version__",
    "beta_from_temperature",
    "cm_to_rad_fs",
    "eet_chain",
    "heom_evolve",
    "load_config",
    "parse_config",
    "rad_fs_to_cm",
    "rates_report",
    "run",
    "simulate",
    "spin_boson_paper",
    "trace_distance",
]
