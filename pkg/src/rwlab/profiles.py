"""Profile functions of one variable with exact first and second derivatives.

Family constructors take their free functions (x1, x2, zeta1, R, kappa, ...)
from this catalog so jets never need numerical differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

PROFILE_KINDS = ("constant", "polynomial", "sin", "exp", "cosh")


class Profile:
    """value / d1 / d2 on float arrays."""

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        raise NotImplementedError

    def d1(self, x):
        raise NotImplementedError

    def d2(self, x):
        raise NotImplementedError

    def jet(self, x):
        return self.value(x), self.d1(x), self.d2(x)

    def to_dict(self) -> dict:
        raise InvalidInputError(f"{type(self).__name__} is not serializable as a catalog profile")


@dataclass(frozen=True)
class CatalogProfile(Profile):
    """Closed-form profile.

      constant   [a]           a
      polynomial [a0, a1, ...] sum a_k x^k
      sin        [A, B, C, D]  A sin(B x + C) + D
      exp        [A, B, C]     A exp(B x) + C
      cosh       [A, B, C, D]  A cosh(B x + C) + D
    """

    kind: str
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidInputError(f"unknown profile kind {self.kind!r}; expected one of {PROFILE_KINDS}")
        coeffs = tuple(float(c) for c in self.coefficients)
        need = {"constant": 1, "sin": 4, "exp": 3, "cosh": 4}.get(self.kind)
        if need is not None and len(coeffs) != need:
            raise InvalidInputError(f"profile {self.kind!r} takes {need} coefficients, got {len(coeffs)}")
        if self.kind == "polynomial" and not coeffs:
            raise InvalidInputError("polynomial profile needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coefficients": list(self.coefficients)}

    def _eval(self, x, order: int):
        x = np.asarray(x, dtype=float)
        c = self.coefficients
        k = self.kind
        if k == "constant":
            return np.full_like(x, c[0] if order == 0 else 0.0)
        if k == "polynomial":
            p = np.polynomial.polynomial.Polynomial(c)
            if order:
                p = p.deriv(order)
            return p(x) + 0.0 * x
        if k == "sin":
            A, B, C, D = c
            arg = B * x + C
            return (A * np.sin(arg) + D, A * B * np.cos(arg), -A * B * B * np.sin(arg))[order]
        if k == "exp":
            A, B, C = c
            e = np.exp(B * x)
            return (A * e + C, A * B * e, A * B * B * e)[order]
        A, B, C, D = c
        arg = B * x + C
        return (A * np.cosh(arg) + D, A * B * np.sinh(arg), A * B * B * np.cosh(arg))[order]

    def value(self, x):
        return self._eval(x, 0)

    def d1(self, x):
        return self._eval(x, 1)

    def d2(self, x):
        return self._eval(x, 2)


def constant(a: float) -> CatalogProfile:
    return CatalogProfile("constant", (a,))


def polynomial(*coeffs: float) -> CatalogProfile:
    return CatalogProfile("polynomial", tuple(coeffs))


def sin(A: float, B: float = 1.0, C: float = 0.0, D: float = 0.0) -> CatalogProfile:
    return CatalogProfile("sin", (A, B, C, D))


def exp(A: float, B: float = 1.0, C: float = 0.0) -> CatalogProfile:
    return CatalogProfile("exp", (A, B, C))


def cosh(A: float, B: float = 1.0, C: float = 0.0, D: float = 0.0) -> CatalogProfile:
    return CatalogProfile("cosh", (A, B, C, D))


def from_dict(d) -> CatalogProfile:
    if isinstance(d, (int, float)):
        return constant(float(d))
    try:
        return CatalogProfile(d["kind"], tuple(d["coefficients"]))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"profile record needs 'kind' and 'coefficients': {d!r}") from exc


class QuadratureProfile(Profile):
    """x(u) = scale * integral_{anchor}^{u} g + shift, where g and g' are known exactly."""

    def __init__(self, integral, integrand, integrand_d1, scale: float = 1.0, shift: float = 0.0):
        self.integral = integral
        self.integrand = integrand
        self.integrand_d1 = integrand_d1
        self.scale = scale
        self.shift = shift

    def value(self, x):
        return self.scale * self.integral(x) + self.shift

    def d1(self, x):
        return self.scale * self.integrand(np.asarray(x, dtype=float))

    def d2(self, x):
        return self.scale * self.integrand_d1(np.asarray(x, dtype=float))


class TrajectoryProfile(Profile):
    """One scalar channel of an ODE trajectory whose state holds (y, y')."""

    def __init__(self, trajectory, index: int, dindex: int, second):
        self.trajectory = trajectory
        self.index = index
        self.dindex = dindex
        self.second = second

    def value(self, x):
        return self.trajectory(x)[..., self.index]

    def d1(self, x):
        return self.trajectory(x)[..., self.dindex]

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        return self.second(x, self.trajectory(x))
