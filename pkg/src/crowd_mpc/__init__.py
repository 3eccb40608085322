"""MPC longitudinal speed regulation through a crossing crowd, with a PID baseline."""

__version__ = "0.1.0"
