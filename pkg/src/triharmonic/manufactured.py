"""Manufactured solutions as exactly differentiable separable fields.

A univariate factor is a finite sum of atoms ``p(x) * exp(a x) * trig(b x)``
with ``p`` a polynomial and ``trig`` either ``cos`` or ``sin``. Atoms with
equal ``(a, b, trig)`` are merged, which keeps derivatives and products in a
canonical form. A field is a sum of products ``X_i(x) * Y_i(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P

_TRIGS = ("cos", "sin")


def _trim(c) -> np.ndarray:
    return np.trim_zeros(np.asarray(c, dtype=float), "b")


class Separable1D:
    """Sum of atoms ``poly(x) * exp(rate x) * trig(freq x)``.

    Stored as a mapping ``(rate, freq, trig) -> ascending polynomial
    coefficients``. ``freq`` is kept non-negative and ``freq == 0`` always
    uses ``cos`` (so the trig factor is 1).
    """

    __slots__ = ("atoms",)

    def __init__(self, atoms=None):
        merged: dict[tuple[float, float, str], np.ndarray] = {}
        for (rate, freq, trig), coef in (atoms or {}).items():
            rate, freq = float(rate), float(freq)
            coef = np.asarray(coef, dtype=float)
            if trig not in _TRIGS:
                raise ValueError(f"unsupported atom {trig!r}")
            if freq < 0:
                freq = -freq
                if trig == "sin":
                    coef = -coef
            if freq == 0.0:
                if trig == "sin":
                    continue
            key = (rate, freq, trig)
            merged[key] = P.polyadd(merged[key], coef) if key in merged else coef
        self.atoms = {key: c for key, c in ((k, _trim(v)) for k, v in merged.items()) if c.size}

    @classmethod
    def polynomial(cls, coeffs) -> "Separable1D":
        """From ascending coefficients."""
        return cls({(0.0, 0.0, "cos"): coeffs})

    @classmethod
    def exp(cls, rate: float, scale: float = 1.0) -> "Separable1D":
        return cls({(rate, 0.0, "cos"): [scale]})

    @classmethod
    def sin(cls, freq: float, scale: float = 1.0) -> "Separable1D":
        return cls({(0.0, freq, "sin"): [scale]})

    @classmethod
    def cos(cls, freq: float, scale: float = 1.0) -> "Separable1D":
        return cls({(0.0, freq, "cos"): [scale]})

    def __add__(self, other: "Separable1D") -> "Separable1D":
        atoms = dict(self.atoms)
        for key, c in other.atoms.items():
            atoms[key] = P.polyadd(atoms[key], c) if key in atoms else c
        return Separable1D(atoms)

    def __neg__(self) -> "Separable1D":
        return self.scale(-1.0)

    def __sub__(self, other: "Separable1D") -> "Separable1D":
        return self + (-other)

    def scale(self, s: float) -> "Separable1D":
        return Separable1D({k: s * c for k, c in self.atoms.items()})

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scale(float(other))
        out: dict = {}
        for (r1, f1, t1), c1 in self.atoms.items():
            for (r2, f2, t2), c2 in other.atoms.items():
                c = P.polymul(c1, c2)
                rate = r1 + r2
                # Product-to-sum identities.
                if t1 == "cos" and t2 == "cos":
                    parts = [(f1 - f2, "cos", 0.5), (f1 + f2, "cos", 0.5)]
                elif t1 == "sin" and t2 == "sin":
                    parts = [(f1 - f2, "cos", 0.5), (f1 + f2, "cos", -0.5)]
                elif t1 == "sin":
                    parts = [(f1 + f2, "sin", 0.5), (f1 - f2, "sin", 0.5)]
                else:
                    parts = [(f2 + f1, "sin", 0.5), (f2 - f1, "sin", 0.5)]
                for freq, trig, w in parts:
                    term = Separable1D({(rate, freq, trig): w * c})
                    for key, cc in term.atoms.items():
                        out[key] = P.polyadd(out[key], cc) if key in out else cc
        return Separable1D(out)

    __rmul__ = __mul__

    def derivative(self, order: int = 1) -> "Separable1D":
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        g = self
        for _ in range(order):
            g = g._d1()
        return g

    def _d1(self) -> "Separable1D":
        out: dict = {}

        def add(key, c):
            out[key] = P.polyadd(out[key], c) if key in out else np.asarray(c, dtype=float)

        for (rate, freq, trig), c in self.atoms.items():
            add((rate, freq, trig), P.polyder(c) if c.size > 1 else [0.0])
            if rate:
                add((rate, freq, trig), rate * c)
            if freq:
                if trig == "cos":
                    add((rate, freq, "sin"), -freq * c)
                else:
                    add((rate, freq, "cos"), freq * c)
        return Separable1D(out)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for (rate, freq, trig), c in self.atoms.items():
            v = P.polyval(x, c)
            if rate:
                v = v * np.exp(rate * x)
            if freq:
                v = v * (np.cos(freq * x) if trig == "cos" else np.sin(freq * x))
            total = total + v
        return total

    def is_zero(self) -> bool:
        return not self.atoms

    def __repr__(self) -> str:
        return f"Separable1D({self.atoms!r})"


@dataclass(frozen=True)
class SeparableField:
    terms: tuple[tuple[Separable1D, Separable1D], ...]

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast(x, y).shape)
        for X, Y in self.terms:
            total = total + X(x) * Y(y)
        return total

    def derivative(self, ax: int, ay: int) -> "SeparableField":
        terms = []
        for X, Y in self.terms:
            dX, dY = X.derivative(ax), Y.derivative(ay)
            if not (dX.is_zero() or dY.is_zero()):
                terms.append((dX, dY))
        return SeparableField(tuple(terms))

    def gradient(self, x, y):
        return self.derivative(1, 0)(x, y), self.derivative(0, 1)(x, y)

    def __add__(self, other: "SeparableField") -> "SeparableField":
        return SeparableField(self.terms + other.terms)

    def scale(self, s: float) -> "SeparableField":
        return SeparableField(tuple((X.scale(s), Y) for X, Y in self.terms))

    def __neg__(self) -> "SeparableField":
        return self.scale(-1.0)


def laplacian_power(g: SeparableField, m: int) -> SeparableField:
    """``Delta^m g`` via the binomial expansion ``sum_j C(m, j) dx^{2j} dy^{2(m-j)}``."""
    if m not in (1, 2, 3):
        raise ValueError(f"laplacian power must be 1, 2 or 3, got {m}")
    terms = []
    for X, Y in g.terms:
        for j in range(m + 1):
            dX = X.derivative(2 * j).scale(comb(m, j))
            dY = Y.derivative(2 * (m - j))
            if not (dX.is_zero() or dY.is_zero()):
                terms.append((dX, dY))
    return SeparableField(tuple(terms))


def laplacian(g: SeparableField) -> SeparableField:
    return laplacian_power(g, 1)


@dataclass(frozen=True)
class ManufacturedCase:
    id: str
    bc_kind: str
    u: SeparableField
    phi: SeparableField
    lam: SeparableField
    f: SeparableField
    notes: str = ""


def _bump(power: int) -> Separable1D:
    """``x^p (1 - x)^p``."""
    return Separable1D.polynomial(P.polypow([0.0, 1.0], power)) * Separable1D.polynomial(
        P.polypow([1.0, -1.0], power)
    )


def _case(id_: str, bc: str, u: SeparableField, notes: str) -> ManufacturedCase:
    phi = laplacian(u)
    lam = laplacian(phi)
    f = -laplacian(lam)
    return ManufacturedCase(id=id_, bc_kind=bc, u=u, phi=phi, lam=lam, f=f, notes=notes)


def _build_catalog() -> dict[str, ManufacturedCase]:
    b5, b3 = _bump(5), _bump(3)
    ex = Separable1D.exp(1.0)
    pi = np.pi

    ss1 = SeparableField(((b5, b5),))
    ss2 = SeparableField(((ex * b5, b5), (b5, ex * b5)))
    ss3 = SeparableField(((Separable1D.sin(pi), Separable1D.sin(pi)),))
    cl1 = SeparableField(((b3.scale(4096.0), b3),))
    cl2 = SeparableField(
        ((b3.scale(4096.0) * ex.scale(0.4), b3), (b3.scale(4096.0), b3 * Separable1D.cos(1.0)))
    )
    return {
        "ss1": _case("ss1", "simply-supported", ss1, "x^5(1-x)^5 y^5(1-y)^5; polynomial"),
        "ss2": _case("ss2", "simply-supported", ss2, "(e^y + e^x) x^5(1-x)^5 y^5(1-y)^5"),
        "ss3": _case("ss3", "simply-supported", ss3, "sin(pi x) sin(pi y); normal derivative nonzero"),
        "cl1": _case("cl1", "clamped", cl1, "4096 x^3(1-x)^3 y^3(1-y)^3"),
        "cl2": _case("cl2", "clamped", cl2, "4096 x^3(1-x)^3 y^3(1-y)^3 (2/5 e^x + cos y)"),
    }


CATALOG = _build_catalog()


def catalog(example: str) -> ManufacturedCase:
    try:
        return CATALOG[example]
    except KeyError:
        raise KeyError(f"unknown example {example!r}; choose from {sorted(CATALOG)}") from None
