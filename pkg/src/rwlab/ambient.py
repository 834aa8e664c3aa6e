"""Robertson-Walker spacetimes I x_f Q^3_c.

Points and vectors are plain float arrays whose trailing axis holds the four
coordinate components ``(t, q1, q2, q3)``; every routine broadcasts over the
leading axes so whole parameter grids are evaluated in one call.

For ``c = 0`` the base chart is Cartesian.  For ``c = +1`` / ``c = -1`` the base
is charted conformally, ``g_c = lam(q)^2 * delta`` with
``lam = 2 / (1 + c |q|^2)`` (stereographic sphere, Poincare ball).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidInputError

WARPING_KINDS = ("constant", "exponential", "cosh", "power", "linear")

_N_COEFFS = {"constant": 1, "exponential": 1, "cosh": 2, "power": 2, "linear": 2}

# sampling window used for sign checks on unbounded intervals
_SAMPLE_WINDOW = 50.0


@dataclass(frozen=True)
class WarpingFunction:
    """Scale factor f from a fixed analytic catalog.

    kinds and coefficients:
      constant    [a]     f = a
      exponential [a]     f = exp(a t)
      cosh        [a, b]  f = cosh(a t) + b
      power       [a, p]  f = (t + a)^p        (requires t + a > 0)
      linear      [a, b]  f = a t + b
    """

    kind: str
    coefficients: tuple[float, ...]
    interval: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        if self.kind not in WARPING_KINDS:
            raise InvalidInputError(f"unknown warping kind {self.kind!r}; expected one of {WARPING_KINDS}")
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) != _N_COEFFS[self.kind]:
            raise InvalidInputError(
                f"warping kind {self.kind!r} takes {_N_COEFFS[self.kind]} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)
        lo, hi = (float(x) for x in self.interval)
        if self.kind == "power" and lo < -coeffs[0]:
            if self.interval == (-math.inf, math.inf):
                lo = -coeffs[0]
            else:
                raise DomainError(f"power warping needs t + {coeffs[0]} > 0 on the interval; got lower end {lo}")
        if not lo < hi:
            raise InvalidInputError(f"empty warping interval ({lo}, {hi})")
        object.__setattr__(self, "interval", (lo, hi))
        self._check_nonvanishing()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, a: float = 1.0, interval=(-math.inf, math.inf)) -> "WarpingFunction":
        return cls("constant", (a,), interval)

    @classmethod
    def exponential(cls, a: float = 1.0, interval=(-math.inf, math.inf)) -> "WarpingFunction":
        return cls("exponential", (a,), interval)

    @classmethod
    def cosh(cls, a: float = 1.0, b: float = 0.0, interval=(-math.inf, math.inf)) -> "WarpingFunction":
        return cls("cosh", (a, b), interval)

    @classmethod
    def power(cls, a: float, p: float, interval=(-math.inf, math.inf)) -> "WarpingFunction":
        return cls("power", (a, p), interval)

    @classmethod
    def linear(cls, a: float, b: float, interval=(-math.inf, math.inf)) -> "WarpingFunction":
        return cls("linear", (a, b), interval)

    def to_dict(self) -> dict:
        lo, hi = self.interval
        return {"kind": self.kind, "coefficients": list(self.coefficients),
                "interval": [_encode_bound(lo), _encode_bound(hi)]}

    @classmethod
    def from_dict(cls, d: dict) -> "WarpingFunction":
        try:
            kind = d["kind"]
            coeffs = tuple(d["coefficients"])
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"warping record needs 'kind' and 'coefficients': {d!r}") from exc
        interval = d.get("interval")
        if interval is None:
            interval = (-math.inf, math.inf)
        else:
            interval = (_decode_bound(interval[0]), _decode_bound(interval[1]))
        return cls(kind, coeffs, interval)

    # -- evaluation -----------------------------------------------------------

    def __call__(self, t):
        return self.value(t)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        k, c = self.kind, self.coefficients
        if k == "constant":
            return np.full_like(t, c[0])
        if k == "exponential":
            return np.exp(c[0] * t)
        if k == "cosh":
            return np.cosh(c[0] * t) + c[1]
        if k == "power":
            return (t + c[0]) ** c[1]
        return c[0] * t + c[1]

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        k, c = self.kind, self.coefficients
        if k == "constant":
            return np.zeros_like(t)
        if k == "exponential":
            return c[0] * np.exp(c[0] * t)
        if k == "cosh":
            return c[0] * np.sinh(c[0] * t)
        if k == "power":
            return c[1] * (t + c[0]) ** (c[1] - 1.0)
        return np.full_like(t, c[0])

    def log_derivative(self, t):
        """(ln f)' = f'/f."""
        return self.derivative(t) / self.value(t)

    def contains(self, t) -> np.ndarray:
        lo, hi = self.interval
        t = np.asarray(t, dtype=float)
        return (t > lo) & (t < hi)

    def check(self, t) -> None:
        if not np.all(self.contains(t)):
            bad = np.asarray(t, dtype=float)[~self.contains(t)]
            raise DomainError(f"t = {bad.flat[0]!r} outside warping interval {self.interval}")

    def sample_points(self, n: int = 1001) -> np.ndarray:
        lo, hi = self.interval
        a = max(lo, -_SAMPLE_WINDOW)
        b = min(hi, _SAMPLE_WINDOW)
        if not a < b:
            # interval lies entirely outside the window
            a = lo if math.isfinite(lo) else hi - 2 * _SAMPLE_WINDOW
            b = hi if math.isfinite(hi) else lo + 2 * _SAMPLE_WINDOW
        return np.linspace(a, b, n + 2)[1:-1]

    def _check_nonvanishing(self) -> None:
        lo, hi = self.interval
        k, c = self.kind, self.coefficients
        root = None
        if k == "constant" and c[0] == 0.0:
            raise DomainError("constant warping must be nonzero")
        if k == "cosh":
            if c[0] == 0.0:
                if 1.0 + c[1] == 0.0:
                    raise DomainError("cosh warping with a = 0 and b = -1 vanishes identically")
            elif c[1] <= -1.0:
                r = math.acosh(-c[1]) / abs(c[0])
                for root in (-r, r):
                    if lo < root < hi:
                        raise DomainError(f"cosh warping vanishes at t = {root} inside {self.interval}")
        if k == "power" and c[1] != 0.0 and lo < -c[0]:
            raise DomainError("power warping base t + a must stay positive")
        if k == "linear":
            if c[0] == 0.0:
                if c[1] == 0.0:
                    raise DomainError("linear warping vanishes identically")
            else:
                root = -c[1] / c[0]
                if lo < root < hi:
                    raise DomainError(f"linear warping vanishes at t = {root} inside {self.interval}")
        ts = self.sample_points()
        with np.errstate(over="ignore"):
            vals = self.value(ts)
        finite = np.isfinite(vals)
        if np.any(vals[finite] == 0.0) or np.any(np.diff(np.sign(vals[finite])) != 0):
            raise DomainError(f"warping {k} changes sign on {self.interval}")


def _encode_bound(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _decode_bound(x) -> float:
    return float(x)


@dataclass(frozen=True)
class AmbientPoint:
    t: float
    q: tuple[float, float, float]

    def __array__(self, dtype=None, copy=None):
        return np.array([self.t, *self.q], dtype=dtype or float)


@dataclass(frozen=True)
class AmbientVector:
    """X = X0 d/dt + Xbar, stored as its four chart components."""

    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float).reshape(4))

    @classmethod
    def from_parts(cls, x0: float, xbar) -> "AmbientVector":
        return cls(np.concatenate([[x0], np.asarray(xbar, dtype=float)]))

    @property
    def x0(self) -> float:
        return float(self.components[0])

    @property
    def xbar(self) -> np.ndarray:
        return self.components[1:].copy()

    def __array__(self, dtype=None, copy=None):
        return np.array(self.components, dtype=dtype or float)


@dataclass(frozen=True)
class AmbientSpec:
    """The spacetime L^4_1(f, c)."""

    warping: WarpingFunction
    curvature: int = 0
    # chart guard for the Poincare ball: reject |q|^2 > 1 - chart_margin
    chart_margin: float = 1e-6

    def __post_init__(self):
        if self.curvature not in (-1, 0, 1):
            raise InvalidInputError(f"base curvature must be -1, 0 or 1, got {self.curvature!r}")

    def to_dict(self) -> dict:
        return {"warping": self.warping.to_dict(), "c": self.curvature}

    @classmethod
    def from_dict(cls, d: dict) -> "AmbientSpec":
        return cls(WarpingFunction.from_dict(d["warping"]), int(d.get("c", 0)))

    # -- base chart -----------------------------------------------------------

    def check_point(self, p) -> None:
        p = np.asarray(p, dtype=float)
        self.warping.check(p[..., 0])
        if self.curvature == -1:
            r2 = np.sum(p[..., 1:] ** 2, axis=-1)
            if np.any(r2 >= 1.0 - self.chart_margin):
                raise DomainError("point outside the Poincare-ball chart of the hyperbolic base")

    def base_conformal(self, q) -> np.ndarray:
        """lam(q)^2, so that g_c = lam^2 * identity in the chart."""
        q = np.asarray(q, dtype=float)
        if self.curvature == 0:
            return np.ones(q.shape[:-1])
        lam = 2.0 / (1.0 + self.curvature * np.sum(q * q, axis=-1))
        return lam * lam

    def base_log_gradient(self, q) -> np.ndarray:
        """Gradient of sigma = ln lam in chart coordinates."""
        q = np.asarray(q, dtype=float)
        if self.curvature == 0:
            return np.zeros_like(q)
        denom = 1.0 + self.curvature * np.sum(q * q, axis=-1)
        return -2.0 * self.curvature * q / denom[..., None]

    def base_metric(self, q, a, b) -> np.ndarray:
        """g_c(a, b) at chart point q."""
        return self.base_conformal(q) * np.sum(np.asarray(a) * np.asarray(b), axis=-1)

    def base_christoffel_contract(self, q, a, b) -> np.ndarray:
        """Gamma_c(a, b)^k for the conformal base chart."""
        s = self.base_log_gradient(q)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        sa = np.sum(s * a, axis=-1)[..., None]
        sb = np.sum(s * b, axis=-1)[..., None]
        ab = np.sum(a * b, axis=-1)[..., None]
        return a * sb + b * sa - ab * s

    # -- spacetime tensors ----------------------------------------------------

    def metric_matrix(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        self.check_point(p)
        f = self.warping.value(p[..., 0])
        g = np.zeros(p.shape[:-1] + (4, 4))
        g[..., 0, 0] = -1.0
        d = f * f * self.base_conformal(p[..., 1:])
        for i in range(1, 4):
            g[..., i, i] = d
        return g

    def metric_derivative(self, p) -> np.ndarray:
        """Analytic d_mu g_{nu lam}, indexed [..., mu, nu, lam]."""
        p = np.asarray(p, dtype=float)
        self.check_point(p)
        t, q = p[..., 0], p[..., 1:]
        f = self.warping.value(t)
        fp = self.warping.derivative(t)
        conf = self.base_conformal(q)
        s = self.base_log_gradient(q)
        dg = np.zeros(p.shape[:-1] + (4, 4, 4))
        for i in range(1, 4):
            dg[..., 0, i, i] = 2.0 * f * fp * conf
            for k in range(1, 4):
                # d_k (f^2 lam^2) = 2 f^2 lam^2 d_k sigma
                dg[..., k, i, i] = 2.0 * f * f * conf * s[..., k - 1]
        return dg

    def christoffel(self, p) -> np.ndarray:
        """Coordinate Christoffel symbols Gamma^lam_{mu nu}, indexed [..., lam, mu, nu].

        Gamma^t_{ij} = f f' (g_c)_{ij}, Gamma^i_{tj} = (ln f)' delta^i_j, and the
        base-base block is the base connection; all other entries vanish.
        """
        p = np.asarray(p, dtype=float)
        self.check_point(p)
        t, q = p[..., 0], p[..., 1:]
        f = self.warping.value(t)
        fp = self.warping.derivative(t)
        conf = self.base_conformal(q)
        s = self.base_log_gradient(q)
        gam = np.zeros(p.shape[:-1] + (4, 4, 4))
        lf = fp / f
        for i in range(1, 4):
            gam[..., 0, i, i] = f * fp * conf
            gam[..., i, 0, i] = lf
            gam[..., i, i, 0] = lf
        # conformal base: Gamma^k_ij = d_ik s_j + d_jk s_i - d_ij s_k
        for k in range(3):
            for i in range(3):
                for j in range(3):
                    val = 0.0
                    if i == k:
                        val = val + s[..., j]
                    if j == k:
                        val = val + s[..., i]
                    if i == j:
                        val = val - s[..., k]
                    if not (isinstance(val, float) and val == 0.0):
                        gam[..., k + 1, i + 1, j + 1] = val
        return gam

    def contract(self, p, x, y, gamma=None) -> np.ndarray:
        """Gamma^lam_{mu nu} x^mu y^nu."""
        if gamma is None:
            gamma = self.christoffel(p)
        return np.einsum("...lmn,...m,...n->...l", gamma, np.asarray(x, float), np.asarray(y, float))


def metric(spec: AmbientSpec, p, x, y) -> np.ndarray:
    """g~(X, Y) = -X0 Y0 + f(t)^2 g_c(Xbar, Ybar)."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    spec.check_point(p)
    f = spec.warping.value(p[..., 0])
    return -x[..., 0] * y[..., 0] + f * f * spec.base_metric(p[..., 1:], x[..., 1:], y[..., 1:])


def christoffel(spec: AmbientSpec, p) -> np.ndarray:
    return spec.christoffel(p)


def covariant_derivative(spec: AmbientSpec, p, x, dx, direction) -> np.ndarray:
    """(nabla~_dir X)^lam = dir(X^lam) + Gamma^lam_{mu nu} dir^mu X^nu.

    ``x`` is the field value at ``p`` and ``dx`` the directional derivative of its
    components along ``direction``.
    """
    return np.asarray(dx, dtype=float) + spec.contract(p, direction, x)


def covariant_derivative_split(spec: AmbientSpec, p, x, dx, direction) -> np.ndarray:
    """Same derivative assembled as product connection plus warping correction.

    nabla~_D X = nabla0_D X + (ln f)' ( g~(Dbar, Xbar) d/dt + D0 Xbar + X0 Dbar ),
    with nabla0 the connection of I x Q^3_c (no warping).
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    d = np.asarray(direction, dtype=float)
    spec.check_point(p)
    t, q = p[..., 0], p[..., 1:]
    out = np.array(dx, dtype=float, copy=True)
    out[..., 1:] += spec.base_christoffel_contract(q, d[..., 1:], x[..., 1:])
    f = spec.warping.value(t)
    lf = spec.warping.log_derivative(t)
    gbar = f * f * spec.base_metric(q, d[..., 1:], x[..., 1:])
    out[..., 0] += lf * gbar
    out[..., 1:] += lf[..., None] * (d[..., :1] * x[..., 1:] + x[..., :1] * d[..., 1:])
    return out


def causal_character(spec: AmbientSpec, p, x, tol: float | None = None) -> str:
    """'spacelike', 'timelike' or 'null' by the sign of g~(X, X)."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise InvalidInputError("causal character of the zero vector is undefined")
    p = np.asarray(p, dtype=float)
    q = float(metric(spec, p, x, x))
    if tol is None:
        f = float(spec.warping.value(p[0]))
        scale = x[0] ** 2 + f * f * float(spec.base_conformal(p[1:])) * float(np.dot(x[1:], x[1:]))
        tol = 1e-10 * (1.0 + scale)
    if abs(q) <= tol:
        return "null"
    return "spacelike" if q > 0 else "timelike"
