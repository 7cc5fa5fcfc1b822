"""Fixed-step RK4 simulation of network models and trajectory comparison.

Any model exposing ``A``, ``B``, ``C`` and ``energy(states)`` can be
simulated. Impulses are applied as a jump of the initial state by the
corresponding column of B.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, IntegrationError


@dataclass(frozen=True)
class Signal:
    """Input description: ``zero``, ``impulse``/``step`` on one channel, or ``samples``.

    ``samples`` has one row per grid point (t = 0, dt, ..., t_end); inputs at
    half steps are interpolated linearly.
    """

    kind: str = "zero"
    channel: int = 0
    samples: Optional[np.ndarray] = None

    def describe(self) -> str:
        if self.kind in ("impulse", "step"):
            return f"{self.kind}:{self.channel + 1}"
        return self.kind


def zero() -> Signal:
    return Signal("zero")


def impulse(channel: int) -> Signal:
    return Signal("impulse", channel)


def step(channel: int) -> Signal:
    return Signal("step", channel)


def sampled(samples) -> Signal:
    return Signal("samples", samples=np.atleast_2d(np.asarray(samples, dtype=float)))


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray      # (len(t), order)
    outputs: np.ndarray     # (len(t), channels)
    energy: np.ndarray      # (len(t),)
    signal: str

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def to_csv(self, path_or_file) -> None:
        n, k = self.states.shape[1], self.outputs.shape[1]
        header = (["t"] + [f"state_{i + 1}" for i in range(n)]
                  + [f"y_{i + 1}" for i in range(k)] + ["energy"])
        rows = np.hstack([self.t[:, None], self.states, self.outputs, self.energy[:, None]])
        if hasattr(path_or_file, "write"):
            _write_rows(path_or_file, header, rows)
        else:
            with open(path_or_file, "w", newline="") as fh:
                _write_rows(fh, header, rows)


def _write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(x, ".17g") for x in r])


def _rk4_maps(A, B, h):
    """One RK4 step as x+ = Phi x + G0 u(t) + Gm u(t + h/2) + G1 u(t + h)."""
    n, m = B.shape
    I = np.eye(n)

    def stages(x, u0, um, u1):
        k1 = A @ x + B @ u0
        k2 = A @ (x + 0.5 * h * k1) + B @ um
        k3 = A @ (x + 0.5 * h * k2) + B @ um
        k4 = A @ (x + h * k3) + B @ u1
        return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    Zm, Im, Zx, Zu = np.zeros((m, m)), np.eye(m), np.zeros((n, m)), np.zeros((m, n))
    Phi = stages(I, Zu, Zu, Zu)
    G0 = stages(Zx, Im, Zm, Zm)
    Gm = stages(Zx, Zm, Im, Zm)
    G1 = stages(Zx, Zm, Zm, Im)
    return Phi, G0, Gm, G1


def integrate(model, signal: Signal = Signal(), x0=None, t_end: float = 1.0,
              dt: float = 1e-3) -> Trajectory:
    """Classical fourth-order Runge-Kutta on a uniform grid from 0 to t_end."""
    if not (dt > 0 and t_end > 0):
        raise InputError("dt and t_end must be positive")
    A, B, C = np.asarray(model.A, float), np.asarray(model.B, float), np.asarray(model.C, float)
    n, m = B.shape
    steps = int(round(t_end / dt))
    if steps < 1 or abs(steps * dt - t_end) > 1e-9 * t_end:
        raise InputError(f"t_end={t_end} is not a whole number of steps of dt={dt}")
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise InputError(f"x0 must have length {n}")

    if signal.kind in ("impulse", "step") and not 0 <= signal.channel < m:
        raise InputError(f"input channel {signal.channel + 1} does not exist")
    u = np.zeros((steps + 1, m))
    if signal.kind == "impulse":
        x = x + B[:, signal.channel]
    elif signal.kind == "step":
        u[:, signal.channel] = 1.0
    elif signal.kind == "samples":
        if signal.samples.shape != (steps + 1, m):
            raise InputError(f"samples must have shape {(steps + 1, m)}")
        u = signal.samples
    elif signal.kind != "zero":
        raise InputError(f"unknown signal kind {signal.kind!r}")

    Phi, G0, Gm, G1 = _rk4_maps(A, B, dt)
    forced = bool(np.any(u))
    X = np.empty((steps + 1, n))
    X[0] = x
    with np.errstate(over="ignore", invalid="ignore"):     # blow-up is reported below
        for k in range(steps):
            x = Phi @ x
            if forced:
                x = x + G0 @ u[k] + Gm @ (0.5 * (u[k] + u[k + 1])) + G1 @ u[k + 1]
            X[k + 1] = x
            if k % 1024 == 0 and not np.all(np.isfinite(x)):
                raise IntegrationError(f"non-finite state at t={(k + 1) * dt}")
    if not np.all(np.isfinite(X)):
        raise IntegrationError("non-finite state encountered")
    t = np.arange(steps + 1) * dt
    return Trajectory(t, X, X @ C.T, np.asarray(model.energy(X.T), float), signal.describe())


def dissipation_residual(traj: Trajectory) -> float:
    """max_k |(E[k+1] - E[k-1]) / (2 dt) + ||y_k||^2| over interior grid points.

    For an unforced run the energy drops exactly at the rate of the
    dissipated power, so this only measures discretisation error.
    """
    if len(traj.t) < 3:
        return 0.0
    dE = (traj.energy[2:] - traj.energy[:-2]) / (traj.t[2:] - traj.t[:-2])
    power = np.sum(traj.outputs[1:-1] ** 2, axis=1)
    return float(np.max(np.abs(dE + power)))


def compare(full: Trajectory, reduced: Trajectory, alignment: np.ndarray) -> dict:
    """Output mismatch of two runs on the same grid.

    ``alignment`` places reduced output channels on the rows of the full
    model's channels; dropped channels are compared against zero.
    """
    if full.t.shape != reduced.t.shape or not np.allclose(full.t, reduced.t, rtol=0, atol=1e-12):
        raise InputError("trajectories are on different time grids")
    err = full.outputs - reduced.outputs @ alignment.T
    power = np.sum(err ** 2, axis=1)
    return {
        "l2_error_squared": float(np.trapezoid(power, full.t)),
        "max_abs_error": float(np.max(np.abs(err), initial=0.0)),
        "full_output_energy": float(np.trapezoid(np.sum(full.outputs ** 2, axis=1), full.t)),
        "reduced_output_energy": float(np.trapezoid(np.sum(reduced.outputs ** 2, axis=1), full.t)),
        "t_end": float(full.t[-1]),
        "dt": full.dt,
    }
