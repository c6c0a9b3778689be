"""Session configuration: parsing, validation, defaults.

Configs are JSON objects; every key is optional and falls back to the
reference setup (23-inch 16:9 large display, phone centered, height span
10 cm, input span 10 cm mapped onto the display width).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .experiment import DisplayConfig, ExperimentError, METHODS, PhoneRect
from .tracking import HeightCalibration, TrackingError
from .transfer import (
    DEFAULT_SCALE_BOUNDS,
    TransferError,
    VARIANT_ENDPOINT,
    ZMappingParams,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    display: DisplayConfig = field(default_factory=DisplayConfig)
    method: str = "ZM"
    zmap: ZMappingParams = field(
        default_factory=lambda: ZMappingParams(
            h_min=0.0,
            h_max=0.10,
            input_span=0.10,
            output_span=0.509,
            variant=VARIANT_ENDPOINT,
        )
    )
    scale_bounds: tuple = DEFAULT_SCALE_BOUNDS
    calibration: HeightCalibration = field(
        default_factory=lambda: HeightCalibration(h_min=0.0, h_max=0.10)
    )
    seed: int = 0
    subject: int = 0
    trial_limit: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.trial_limit is not None and self.trial_limit < 1:
            raise ConfigError("trial_limit must be at least 1")

    def to_dict(self) -> dict:
        d = self.display
        return {
            "display": {"width": d.width, "height": d.height},
            "phone_rect": {
                "center": list(d.phone_rect.center),
                "width": d.phone_rect.width,
                "height": d.phone_rect.height,
            },
            "start_point": list(d.start_point),
            "method": self.method,
            "zmap": {
                "h_min": self.zmap.h_min,
                "h_max": self.zmap.h_max,
                "input_span": self.zmap.input_span,
                "output_span": self.zmap.output_span,
                "variant": self.zmap.variant,
            },
            "scale_bounds": list(self.scale_bounds),
            "calibration": {
                "h_min": self.calibration.h_min,
                "h_max": self.calibration.h_max,
            },
            "seed": self.seed,
            "subject": self.subject,
            "trial_limit": self.trial_limit,
        }


def config_from_dict(obj: dict) -> SessionConfig:
    """Build a validated SessionConfig from a plain dict of overrides."""
    base = SessionConfig()
    try:
        disp = obj.get("display", {})
        width = float(disp.get("width", base.display.width))
        height = float(disp.get("height", base.display.height))
        pr = obj.get("phone_rect", {})
        phone = PhoneRect(
            center=np.asarray(pr.get("center", [0.0, 0.0]), dtype=float),
            width=float(pr.get("width", base.display.phone_rect.width)),
            height=float(pr.get("height", base.display.phone_rect.height)),
        )
        display = DisplayConfig(
            width=width,
            height=height,
            phone_rect=phone,
            start_point=np.asarray(obj.get("start_point", [0.0, 0.0]), dtype=float),
        )
        zm = obj.get("zmap", {})
        zmap = ZMappingParams(
            h_min=float(zm.get("h_min", base.zmap.h_min)),
            h_max=float(zm.get("h_max", base.zmap.h_max)),
            input_span=float(zm.get("input_span", base.zmap.input_span)),
            output_span=float(zm.get("output_span", width)),
            variant=zm.get("variant", VARIANT_ENDPOINT),
        )
        cal = obj.get("calibration", {})
        calibration = HeightCalibration(
            h_min=float(cal.get("h_min", zmap.h_min)),
            h_max=float(cal.get("h_max", zmap.h_max)),
        )
        bounds = tuple(obj.get("scale_bounds", DEFAULT_SCALE_BOUNDS))
        limit = obj.get("trial_limit")
        return SessionConfig(
            display=display,
            method=obj.get("method", base.method),
            zmap=zmap,
            scale_bounds=bounds,
            calibration=calibration,
            seed=int(obj.get("seed", 0)),
            subject=int(obj.get("subject", 0)),
            trial_limit=None if limit is None else int(limit),
        )
    except (TransferError, TrackingError, ExperimentError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc


def parse_config(text: str) -> SessionConfig:
    """Parse a JSON config document into a validated SessionConfig."""
    try:
        obj = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(obj)
