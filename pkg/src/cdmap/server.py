"""Live session service: wire protocol engine and TCP server.

The wire protocol is newline-delimited JSON. Messages are tagged objects:

  client -> server:
    {"tag": "hello", "config": {...overrides...}}
    {"tag": "calib_sample", "z": <meters>}
    {"tag": "calib_done"}
    {"tag": "input", "t": <s>, "x": ..., "y": ..., "z": ...,
     "touch": "down"|"up"|"none"}
    {"tag": "session_end"}

  server -> client:
    {"tag": "hello", "config": {...resolved...}, "task": {...}}
    {"tag": "mapped", "t", "fx", "fy", "gain", "scale"}
    {"tag": "trial_event", "kind": "green_active"|"acquired"|"session_done",
     "trial", "mt_s", "misses"[, "target": {"x", "y", "w"}]}
    {"tag": "session_end", "log_ref": <path>}
    {"tag": "error", "message": ...}

Every input message yields exactly one mapped reply (plus any trial
events). Timestamps must be strictly increasing. One session per
connection. The same SessionEngine drives in-process use and the socket,
so both paths produce identical trial logs.

Touch positions are interpreted at the mapped (environment-space) cursor
and attributed to the method's active display; single-pointer clients
cannot address the disabled display.

Hello replies carry a "task" summary (phase, trial index, red start
target, upcoming goal target) so clients can render the task without
recomputing the session plan; green_active events repeat the goal target.
"""

from __future__ import annotations

import json
import socketserver
import threading
from pathlib import Path

import numpy as np

from .config import ConfigError, SessionConfig, config_from_dict
from .experiment import (
    RED_TARGET_WIDTH,
    TaskEvent,
    TaskState,
    plan_session,
    step_task,
)
from .logs import write_log
from .tracking import calibrate_height
from .transfer import MapperState, ZMappingParams, zmap_gain, zmap_step


class ProtocolError(ValueError):
    pass


class SessionEngine:
    """Drives one session: calibration, mapping, and the acquisition task."""

    def __init__(self, config: SessionConfig, log_dir=None):
        self.config = config
        self.log_dir = Path(log_dir) if log_dir is not None else None
        self.calib_samples: list[float] = []
        self.records = []
        self.last_t = -float("inf")
        self.ended = False
        self._start_session()

    def _start_session(self):
        cfg = self.config
        plan = plan_session(cfg.subject, cfg.display, cfg.seed)
        targets = plan.main[cfg.method]
        if cfg.trial_limit is not None:
            targets = targets[: cfg.trial_limit]
        self.task = TaskState(
            method=cfg.method,
            targets=targets,
            cfg=cfg.display,
            seed=cfg.seed,
            subject=cfg.subject,
        )
        self.mapper = MapperState.at(cfg.display.start_point)
        self.touch_down = False

    def _task_summary(self) -> dict:
        start = self.config.display.start_point
        summary = {
            "phase": self.task.phase,
            "trial": self.task.trial_index,
            "active_display": self.task.active_display,
            "red": {"x": float(start[0]), "y": float(start[1]), "w": RED_TARGET_WIDTH},
            "target": None,
        }
        if self.task.phase != "done":
            summary["target"] = self._target_dict(self.task.targets[self.task.trial_index])
        return summary

    @staticmethod
    def _target_dict(target) -> dict:
        return {
            "x": float(target.center[0]),
            "y": float(target.center[1]),
            "w": target.width,
        }

    def handle(self, msg: dict) -> list[dict]:
        """Process one wire message, returning the replies in order."""
        if self.ended:
            raise ProtocolError("session already ended")
        if not isinstance(msg, dict) or "tag" not in msg:
            raise ProtocolError("message must be an object with a 'tag'")
        tag = msg["tag"]
        if tag == "hello":
            return self._on_hello(msg)
        if tag == "calib_sample":
            self.calib_samples.append(float(msg["z"]))
            return []
        if tag == "calib_done":
            return self._on_calib_done()
        if tag == "input":
            return self._on_input(msg)
        if tag == "session_end":
            return self._on_session_end()
        raise ProtocolError(f"unknown message tag {tag!r}")

    def _on_hello(self, msg) -> list[dict]:
        overrides = msg.get("config", {})
        if overrides:
            try:
                self.config = config_from_dict({**self.config.to_dict(), **overrides})
            except ConfigError as exc:
                raise ProtocolError(f"invalid config: {exc}") from exc
            self._start_session()
        return [
            {"tag": "hello", "config": self.config.to_dict(), "task": self._task_summary()}
        ]

    def _on_calib_done(self) -> list[dict]:
        # the stream mixes low- and high-pose samples; split at the midpoint
        # of the sorted heights and take per-segment medians
        samples = sorted(self.calib_samples)
        half = len(samples) // 2
        cal = calibrate_height(samples[:half], samples[half:])
        cfg_dict = self.config.to_dict()
        cfg_dict["calibration"] = {"h_min": cal.h_min, "h_max": cal.h_max}
        cfg_dict["zmap"]["h_min"] = cal.h_min
        cfg_dict["zmap"]["h_max"] = cal.h_max
        self.config = config_from_dict(cfg_dict)
        self._start_session()
        self.calib_samples = []
        return [
            {"tag": "hello", "config": self.config.to_dict(), "task": self._task_summary()}
        ]

    def _map_input(self, t, p, touch):
        """Advance the method's transfer function by one sample."""
        method = self.config.method
        gain = 1.0
        if method == "PT":
            f = np.array([p[0], p[1]])
        elif method == "ST":
            # relative 1:1 drag; strokes only while touching, re-primed on
            # touch down so lifting the finger clutches
            if touch == "down" and not self.touch_down:
                self.mapper = MapperState(f_prev=self.mapper.f_prev)
            if self.touch_down or touch == "down":
                self.mapper, f = zmap_step(
                    self.mapper, p, self._unit_gain_params()
                )
            else:
                f = self.mapper.f_prev
        else:  # ZM: always live, height modulates the gain
            self.mapper, f = zmap_step(self.mapper, p, self.config.zmap)
            gain = zmap_gain(p[2], self.config.zmap)
        return f, gain

    def _unit_gain_params(self):
        zm = self.config.zmap
        return ZMappingParams(
            h_min=zm.h_min,
            h_max=zm.h_max,
            input_span=zm.input_span,
            output_span=zm.input_span,  # span ratio 1 -> gain 1 everywhere
            variant="endpoint_normalized",
        )

    def _on_input(self, msg) -> list[dict]:
        try:
            t = float(msg["t"])
            p = np.array([float(msg["x"]), float(msg["y"]), float(msg["z"])])
            touch = msg.get("touch", "none")
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed input message: {exc}") from exc
        if touch not in ("down", "up", "none"):
            raise ProtocolError(f"unknown touch state {touch!r}")
        if t <= self.last_t:
            raise ProtocolError(f"non-monotone timestamp {t} after {self.last_t}")
        self.last_t = t

        f, gain = self._map_input(t, p, touch)
        replies = [
            {
                "tag": "mapped",
                "t": t,
                "fx": float(f[0]),
                "fy": float(f[1]),
                "gain": float(gain),
                "scale": 1.0,
            }
        ]
        if touch in ("down", "up"):
            was_green = self.task.phase == "green"
            event = TaskEvent(
                kind="touch_down" if touch == "down" else "touch_up",
                position=f,
                display=self.task.active_display,
                time=t,
            )
            self.task, record = step_task(self.task, event)
            self.touch_down = touch == "down"
            if record is not None:
                self.records.append(record)
                # environment reset: the cursor snaps back to the start point
                self.mapper = MapperState.at(self.config.display.start_point)
                replies.append(
                    {
                        "tag": "trial_event",
                        "kind": "acquired",
                        "trial": record.trial,
                        "mt_s": record.mt_s,
                        "misses": record.misses,
                    }
                )
                if self.task.phase == "done":
                    replies.append(
                        {
                            "tag": "trial_event",
                            "kind": "session_done",
                            "trial": record.trial,
                            "mt_s": record.mt_s,
                            "misses": record.misses,
                        }
                    )
            elif not was_green and self.task.phase == "green":
                replies.append(
                    {
                        "tag": "trial_event",
                        "kind": "green_active",
                        "trial": self.task.trial_index,
                        "mt_s": 0.0,
                        "misses": 0,
                        "target": self._target_dict(
                            self.task.targets[self.task.trial_index]
                        ),
                    }
                )
        else:
            self.touch_down = self.touch_down and touch != "up"
        return replies

    def _on_session_end(self) -> list[dict]:
        self.ended = True
        log_ref = ""
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            path = self.log_dir / (
                f"session_s{self.config.subject}_{self.config.method}"
                f"_seed{self.config.seed}.jsonl"
            )
            path.write_text(write_log(self.records), encoding="utf-8")
            log_ref = str(path)
        return [{"tag": "session_end", "log_ref": log_ref}]


def run_transcript(engine: SessionEngine, messages) -> list[dict]:
    """Drive an engine with a message sequence in-process; returns all replies."""
    replies = []
    for msg in messages:
        replies.extend(engine.handle(msg))
    return replies


class _SessionHandler(socketserver.StreamRequestHandler):
    def handle(self):
        engine = SessionEngine(self.server.session_config, self.server.log_dir)
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
                replies = engine.handle(msg)
            except (json.JSONDecodeError, ProtocolError, ValueError) as exc:
                self._send({"tag": "error", "message": str(exc)})
                return
            for reply in replies:
                self._send(reply)
            if engine.ended:
                return

    def _send(self, obj):
        self.wfile.write((json.dumps(obj, separators=(",", ":")) + "\n").encode("utf-8"))
        self.wfile.flush()


class SessionServer(socketserver.ThreadingTCPServer):
    """One isolated session per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, config: SessionConfig, log_dir=None):
        super().__init__(address, _SessionHandler)
        self.session_config = config
        self.log_dir = log_dir


def serve_session(config: SessionConfig, host="127.0.0.1", port=7021, log_dir=None):
    """Blocking server loop; returns the server for tests to shut down."""
    server = SessionServer((host, port), config, log_dir)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
