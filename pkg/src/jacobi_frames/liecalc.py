"""Polynomial vector fields and (1,1)-tensors on coordinate space ``x1..xn``."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

from .field import Poly, var_key
from .forms import UsageError


class DimensionError(UsageError):
    pass


def coords(n: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(n))


def _poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    return Poly.const(x)


@dataclass(frozen=True)
class PolyVectorField:
    components: tuple[Poly, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(_poly(x) for x in self.components))

    @property
    def dimension(self) -> int:
        return len(self.components)

    def __add__(self, other: PolyVectorField) -> PolyVectorField:
        _same(self, other)
        return PolyVectorField(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: PolyVectorField) -> PolyVectorField:
        _same(self, other)
        return PolyVectorField(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> PolyVectorField:
        return PolyVectorField(tuple(-a for a in self.components))

    def scale(self, f) -> PolyVectorField:
        f = _poly(f)
        return PolyVectorField(tuple(f * a for a in self.components))

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.components)

    def apply(self, f: Poly) -> Poly:
        """Directional derivative ``X f``."""
        xs = coords(self.dimension)
        return sum((c * f.diff(x) for c, x in zip(self.components, xs)), Poly())

    def to_text(self) -> str:
        return "[" + ", ".join(a.to_text() for a in self.components) + "]"


@dataclass(frozen=True)
class PolyTensor11:
    entries: tuple[tuple[Poly, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_poly(x) for x in r) for r in self.entries)
        if any(len(r) != len(rows) for r in rows):
            raise DimensionError("tensor matrix must be square")
        object.__setattr__(self, "entries", rows)

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @classmethod
    def scalar(cls, n: int, tau) -> PolyTensor11:
        tau = _poly(tau)
        return cls(tuple(tuple(tau if i == j else Poly() for j in range(n)) for i in range(n)))

    def __call__(self, v: PolyVectorField) -> PolyVectorField:
        _same(self, v)
        n = self.dimension
        return PolyVectorField(
            tuple(sum((self.entries[i][j] * v.components[j] for j in range(n)), Poly()) for i in range(n))
        )


def _same(a, b):
    if a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


def partial(i: int, n: int) -> PolyVectorField:
    """Coordinate field d/dx_{i+1}."""
    return PolyVectorField(tuple(Poly.const(1) if k == i else Poly() for k in range(n)))


def vf_bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    _same(X, Y)
    return PolyVectorField(tuple(X.apply(yi) - Y.apply(xi) for xi, yi in zip(X.components, Y.components)))


def lie_deriv_tensor(X: PolyVectorField, T: PolyTensor11, Y: PolyVectorField) -> PolyVectorField:
    """``(L_X T) Y = [X, TY] - T[X, Y]``."""
    _same(X, T)
    _same(X, Y)
    return vf_bracket(X, T(Y)) - T(vf_bracket(X, Y))


@dataclass(frozen=True)
class Eq15Result:
    passed: bool
    residual: PolyVectorField


def eq15_check(f, X: PolyVectorField, T: PolyTensor11, Y: PolyVectorField) -> Eq15Result:
    """Check ``(L_{fX} T)Y = f (L_X T)Y - df(TY) X + df(Y) TX``."""
    f = _poly(f)
    lhs = lie_deriv_tensor(X.scale(f), T, Y)
    rhs = lie_deriv_tensor(X, T, Y).scale(f) - X.scale(T(Y).apply(f)) + T(X).scale(Y.apply(f))
    residual = lhs - rhs
    return Eq15Result(residual.is_zero(), residual)


def tau_step(tau, V: PolyVectorField, Y: PolyVectorField) -> Eq15Result:
    """``(L_V (tau I)) Y = dtau(V) Y``."""
    tau = _poly(tau)
    T = PolyTensor11.scalar(V.dimension, tau)
    residual = lie_deriv_tensor(V, T, Y) - Y.scale(V.apply(tau))
    return Eq15Result(residual.is_zero(), residual)


# -- random and symbolic instances ---------------------------------------


def _monomials(n: int, degree: int):
    xs = coords(n)
    out = [()]
    for d in range(1, degree + 1):
        for combo in combinations_with_replacement(xs, d):
            mono: dict = {}
            for x in combo:
                mono[x] = mono.get(x, 0) + 1
            out.append(tuple(sorted(mono.items(), key=lambda t: var_key(t[0]))))
    return out


def random_poly(rng: random.Random, n: int, degree: int, density: float = 0.5, bound: int = 5) -> Poly:
    terms = {}
    for m in _monomials(n, degree):
        if rng.random() < density:
            terms[m] = rng.randint(-bound, bound)
    return Poly(terms)


def random_field(rng: random.Random, n: int, degree: int) -> PolyVectorField:
    return PolyVectorField(tuple(random_poly(rng, n, degree) for _ in range(n)))


def random_tensor(rng: random.Random, n: int, degree: int) -> PolyTensor11:
    return PolyTensor11(tuple(tuple(random_poly(rng, n, degree) for _ in range(n)) for _ in range(n)))


def generic_poly(n: int, degree: int, prefix: str) -> Poly:
    """Polynomial whose coefficients are independent symbols ``<prefix>0, <prefix>1, ...``."""
    acc = Poly()
    for k, m in enumerate(_monomials(n, degree)):
        acc = acc + Poly.var(f"{prefix}{k}") * Poly({m: 1})
    return acc


def generic_field(n: int, degree: int, prefix: str) -> PolyVectorField:
    return PolyVectorField(tuple(generic_poly(n, degree, f"{prefix}{i + 1}_") for i in range(n)))


def battery(seed: int, count: int, dims: Sequence[int] = (2, 3, 4), max_degree: int = 3):
    """Deterministic random instances ``(f, X, T, Y)`` for the identity check."""
    rng = random.Random(seed)
    for k in range(count):
        n = dims[k % len(dims)]
        deg = lambda: rng.randint(0, max_degree)  # noqa: E731
        yield (
            random_poly(rng, n, deg()),
            random_field(rng, n, deg()),
            random_tensor(rng, n, deg()),
            random_field(rng, n, deg()),
        )
