"""Environment-driven run settings.

Values come from the process environment, which ``main`` first fills from an
optional ``.env`` file via python-dotenv. Command-line flags override them.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import asdict, dataclass

from randgraphstate.core.montecarlo import DEFAULT_SEED, validate_seed

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _flag(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes")


@dataclass(frozen=True)
class RunSettings:
    seed: int = DEFAULT_SEED
    threads: int = 1
    log_level: str = "WARNING"
    telemetry_enabled: bool = False
    telemetry_file: str = os.path.join("logs", "telemetry.json")
    telemetry_max_events: int = 1000

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> RunSettings:
        """Read ``RGS_*`` variables; malformed values raise ``ValueError``."""
        env = os.environ if environ is None else environ
        try:
            seed = validate_seed(int(env.get("RGS_SEED", str(DEFAULT_SEED))))
            threads = int(env.get("RGS_THREADS", "1"))
            max_events = int(env.get("RGS_TELEMETRY_MAX_EVENTS", "1000"))
        except ValueError as exc:
            raise ValueError(f"invalid RGS_* environment setting: {exc}") from exc
        if threads < 1:
            raise ValueError(f"RGS_THREADS must be positive, got {threads}")
        log_level = env.get("RGS_LOG_LEVEL", "WARNING").upper()
        if log_level not in LOG_LEVELS:
            raise ValueError(f"RGS_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
        return cls(
            seed=seed,
            threads=threads,
            log_level=log_level,
            telemetry_enabled=_flag(env.get("RGS_TELEMETRY_ENABLED", "false")),
            telemetry_file=env.get("RGS_TELEMETRY_FILE", os.path.join("logs", "telemetry.json")),
            telemetry_max_events=max_events,
        )

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return asdict(self)
