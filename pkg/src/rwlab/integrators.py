"""Fixed-step RK4 and composite Simpson quadrature with step-halving estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError

DEFAULT_RK4_STEP = 1e-3
DEFAULT_SIMPSON_PANELS = 512


def rk4_step(rhs, t, y, h):
    """One classical Runge-Kutta step; ``t``, ``h`` may be arrays broadcasting against ``y[..., 0]``."""
    h = np.asarray(h, dtype=float)
    hh = h[..., None] if h.ndim else h
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + hh / 2 * k1)
    k3 = rhs(t + h / 2, y + hh / 2 * k2)
    k4 = rhs(t + h, y + hh * k3)
    return y + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class Trajectory:
    """RK4 solution stored on its nodes; off-node values come from one partial RK4 step."""

    rhs: Callable
    ts: np.ndarray
    ys: np.ndarray
    step: float
    normalize: Callable | None = None
    exited: bool = False
    exit_reason: str = ""

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        n = len(self.ts) - 1
        k = np.clip(np.rint((t - self.ts[0]) / self.step).astype(int), 0, n)
        base_t = self.ts[k]
        y = rk4_step(self.rhs, base_t, self.ys[k], t - base_t)
        if self.normalize is not None:
            y = self.normalize(y)
        return y


def rk4_solve(rhs, y0, t0: float, t1: float, step: float = DEFAULT_RK4_STEP,
              normalize=None, stop=None) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` with a fixed step.

    The step is shrunk so that an integer number of steps spans the range.
    ``normalize(y)`` is applied after every step; ``stop(t, y)`` returning a
    non-empty string ends the integration early and is recorded as the exit
    reason.
    """
    if step <= 0 or not math.isfinite(step):
        raise InvalidInputError(f"RK4 step must be positive, got {step}")
    span = t1 - t0
    n = max(1, int(math.ceil(abs(span) / step - 1e-9)))
    h = span / n
    y = np.asarray(y0, dtype=float)
    if normalize is not None:
        y = normalize(y)
    ts = [t0]
    ys = [y]
    exited, reason = False, ""
    for i in range(n):
        t = t0 + i * h
        y_new = rk4_step(rhs, t, y, h)
        if normalize is not None:
            y_new = normalize(y_new)
        t_new = t0 + (i + 1) * h
        if stop is not None:
            why = stop(t_new, y_new)
            if why or not np.all(np.isfinite(y_new)):
                exited, reason = True, why or "non-finite state"
                break
        y = y_new
        ts.append(t_new)
        ys.append(y)
    return Trajectory(rhs, np.array(ts), np.array(ys), abs(h) if h != 0 else step,
                      normalize, exited, reason)


def rk4_with_error(rhs, y0, t0: float, t1: float, step: float = DEFAULT_RK4_STEP, normalize=None):
    """Final state with step ``step`` and a Richardson estimate |y_h - y_{h/2}| / 15."""
    coarse = rk4_solve(rhs, y0, t0, t1, step, normalize).ys[-1]
    fine = rk4_solve(rhs, y0, t0, t1, step / 2, normalize).ys[-1]
    return fine, np.abs(fine - coarse) / 15.0


def simpson(func, a: float, b: float, panels: int = DEFAULT_SIMPSON_PANELS) -> float:
    """Composite Simpson rule with ``panels`` double-intervals on [a, b]."""
    if panels < 1:
        raise InvalidInputError("Simpson needs at least one panel")
    x = np.linspace(a, b, 2 * panels + 1)
    y = np.asarray(func(x), dtype=float)
    h = (b - a) / (2 * panels)
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


def simpson_with_error(func, a: float, b: float, panels: int = DEFAULT_SIMPSON_PANELS):
    coarse = simpson(func, a, b, panels)
    fine = simpson(func, a, b, 2 * panels)
    return fine, abs(fine - coarse) / 15.0


class CumulativeSimpson:
    """u -> integral of ``func`` from ``anchor`` to u, on a cached grid.

    Panel sums are accumulated once over [lo, hi]; an evaluation adds a
    two-subinterval Simpson rule from the nearest node to u, so the result is
    smooth inside each panel and fourth-order accurate.
    """

    def __init__(self, func, lo: float, hi: float, anchor: float | None = None,
                 panels: int = DEFAULT_SIMPSON_PANELS):
        if not hi > lo:
            raise InvalidInputError(f"quadrature range must be increasing, got [{lo}, {hi}]")
        self.func = func
        self.lo = float(lo)
        self.hi = float(hi)
        self.panels = int(panels)
        self.width = (self.hi - self.lo) / self.panels
        self.nodes = np.linspace(self.lo, self.hi, self.panels + 1)
        x = np.linspace(self.lo, self.hi, 2 * self.panels + 1)
        y = np.asarray(func(x), dtype=float)
        piece = self.width / 6 * (y[:-1:2] + 4 * y[1::2] + y[2::2])
        self.cumulative = np.concatenate([[0.0], np.cumsum(piece)])
        self.offset = 0.0
        if anchor is not None:
            self.offset = float(self._raw(np.asarray(anchor, dtype=float)))

    def _raw(self, u):
        k = np.clip(np.rint((u - self.lo) / self.width).astype(int), 0, self.panels)
        a = self.nodes[k]
        m = 0.5 * (a + u)
        part = (u - a) / 6 * (self.func(a) + 4 * self.func(m) + self.func(u))
        return self.cumulative[k] + part

    def __call__(self, u):
        return self._raw(np.asarray(u, dtype=float)) - self.offset
