"""Control-display mapping toolkit.

Pointing transfer functions (direct, uniform gain, height-modulated gain,
focus-preserving zoom), marker-stream processing, a Fitts-law target
acquisition harness with a synthetic user, and a repeated-measures
statistics pipeline.
"""

__version__ = "0.1.0"
