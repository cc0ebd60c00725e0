"""Opt-in run telemetry with atomic JSON event logging and rotation.

Disabled unless ``RGS_TELEMETRY_ENABLED=true``. Each event is appended to a
JSON array in ``RGS_TELEMETRY_FILE`` (default ``logs/telemetry.json``), keeping
the most recent ``RGS_TELEMETRY_MAX_EVENTS`` entries.
"""

from __future__ import annotations

import json
import logging
import os
import time
from typing import Any

from randgraphstate.core.artifacts import atomic_write_json
from randgraphstate.core.settings import RunSettings

logger = logging.getLogger(__name__)


class TelemetryManager:
    """Appends structured events when enabled in ``settings``."""

    def __init__(self, settings: RunSettings | None = None) -> None:
        self.settings = settings or RunSettings.from_env()

    def enabled(self) -> bool:
        return self.settings.telemetry_enabled

    def _load_events(self) -> list:
        path = self.settings.telemetry_file
        if not os.path.exists(path):
            return []
        try:
            with open(path, encoding="utf-8") as f:
                events = json.load(f)
        except (OSError, json.JSONDecodeError):
            return []
        return events if isinstance(events, list) else []

    def send_event(self, name: str, payload: dict[str, Any] | None = None) -> bool:
        """Record one event; returns whether it was written. Never raises."""
        if not self.enabled():
            return False
        event = {"name": name, "timestamp": time.time(), "payload": payload or {}}
        try:
            events = self._load_events()
            events.append(event)
            limit = self.settings.telemetry_max_events
            if len(events) > limit:
                events = events[-limit:]
            atomic_write_json(self.settings.telemetry_file, events)
            return True
        except Exception:
            logger.debug("Telemetry write failed", exc_info=True)
            return False


def send_event(
    name: str, payload: dict[str, Any] | None = None, settings: RunSettings | None = None
) -> bool:
    return TelemetryManager(settings).send_event(name, payload)
