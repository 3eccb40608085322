"""Discrete PID speed controller and its gap-dependent reference speed."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class PidState:
    kp: float
    ki: float
    kd: float
    dt: float
    integral: float = 0.0  # accumulated K_i * e * dt, N
    e_prev: float = 0.0  # m/s

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("PID dt must be positive")
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("PID gains must be non-negative")


def reference_speed(gap: float, v_r: float, d_safe: float, d_buffer: float) -> float:
    """0 at or below d_safe, v_r beyond d_safe + d_buffer, linear in between."""
    if not d_buffer > 0:
        raise ValueError("d_buffer must be positive")
    frac = (gap - d_safe) / d_buffer
    return v_r * min(1.0, max(0.0, frac))


def pid_step(state: PidState, v: float, v_ref: float, u_max: float) -> tuple[float, PidState]:
    """One control update; returns (force, new state).

    Error is v - v_ref and the output is -(P + I + D), clamped to +-u_max.
    The integral is not advanced on steps where the output saturates.
    """
    e = v - v_ref
    u_p = state.kp * e
    u_i = state.integral + state.ki * e * state.dt
    u_d = state.kd * (e - state.e_prev) / state.dt
    raw = -(u_p + u_i + u_d)
    u = min(u_max, max(-u_max, raw))
    integral = u_i if u == raw else state.integral
    return u, replace(state, integral=integral, e_prev=e)
