"""Exact 3x3 operator calculus in the orthonormal frame (W, X, Y) with Y = phi X.

Matrices hold RatFunc entries; column ``j`` is the image of the ``j``-th
frame vector.  ``phi`` annihilates W and rotates the holomorphic plane:
``phi X = Y``, ``phi Y = -X``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .field import Assumptions, Poly, RatFunc, linear_system, linsolve, rf

C = RatFunc.var("c")


@dataclass(frozen=True)
class Vec3:
    components: tuple[RatFunc, RatFunc, RatFunc]

    def __post_init__(self):
        comps = tuple(rf(x) for x in self.components)
        if len(comps) != 3:
            raise ValueError("Vec3 needs three components")
        object.__setattr__(self, "components", comps)

    def __getitem__(self, i):
        return self.components[i]

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(tuple(x + y for x, y in zip(self.components, other.components)))

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(tuple(x - y for x, y in zip(self.components, other.components)))

    def __neg__(self) -> Vec3:
        return Vec3(tuple(-x for x in self.components))

    def scale(self, s) -> Vec3:
        s = rf(s)
        return Vec3(tuple(x * s for x in self.components))

    def substitute(self, bindings) -> Vec3:
        return Vec3(tuple(x.substitute(bindings) for x in self.components))

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.components)

    def to_text(self) -> str:
        return "[" + ", ".join(x.to_text() for x in self.components) + "]"


def inner(u: Vec3, v: Vec3) -> RatFunc:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


@dataclass(frozen=True)
class Operator3:
    entries: tuple[tuple[RatFunc, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(rf(x) for x in row) for row in self.entries)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("Operator3 needs a 3x3 matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def parse(cls, rows: Sequence[Sequence[str]] | str, bindings: Mapping | None = None) -> Operator3:
        if isinstance(rows, str):
            rows = [r.split(",") for r in rows.strip().strip("[]").split(";")]
        return cls(tuple(tuple(RatFunc.parse(str(x), bindings) for x in r) for r in rows))

    @classmethod
    def diag(cls, *d) -> Operator3:
        z = RatFunc.zero()
        return cls(tuple(tuple(rf(d[i]) if i == j else z for j in range(3)) for i in range(3)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> Vec3:
        return Vec3(tuple(self.entries[i][j] for i in range(3)))

    def apply(self, v: Vec3) -> Vec3:
        return Vec3(tuple(sum((self.entries[i][j] * v[j] for j in range(3)), RatFunc.zero()) for i in range(3)))

    def __add__(self, other: Operator3) -> Operator3:
        return Operator3(tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __sub__(self, other: Operator3) -> Operator3:
        return self + (-other)

    def __neg__(self) -> Operator3:
        return Operator3(tuple(tuple(-x for x in r) for r in self.entries))

    def scale(self, s) -> Operator3:
        s = rf(s)
        return Operator3(tuple(tuple(x * s for x in r) for r in self.entries))

    def __matmul__(self, other: Operator3) -> Operator3:
        e, f = self.entries, other.entries
        return Operator3(
            tuple(
                tuple(sum((e[i][k] * f[k][j] for k in range(3)), RatFunc.zero()) for j in range(3))
                for i in range(3)
            )
        )

    def transpose(self) -> Operator3:
        return Operator3(tuple(tuple(self.entries[j][i] for j in range(3)) for i in range(3)))

    def trace(self) -> RatFunc:
        return self.entries[0][0] + self.entries[1][1] + self.entries[2][2]

    def is_self_adjoint(self) -> bool:
        return self == self.transpose()

    def is_skew(self) -> bool:
        return self == -self.transpose()

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.entries for x in r)

    def map(self, fn: Callable[[RatFunc], RatFunc]) -> Operator3:
        return Operator3(tuple(tuple(fn(x) for x in r) for r in self.entries))

    def substitute(self, bindings) -> Operator3:
        b = {k: rf(v) for k, v in bindings.items()}
        return self.map(lambda x: x.substitute(b))

    def to_text(self) -> str:
        return "[" + "; ".join(", ".join(x.to_text() for x in r) for r in self.entries) + "]"

    __str__ = to_text


W = Vec3((1, 0, 0))
X = Vec3((0, 1, 0))
Y = Vec3((0, 0, 1))
FRAME = (W, X, Y)
PHI = Operator3(((0, 0, 0), (0, 0, -1), (0, 1, 0)))
IDENTITY = Operator3.diag(1, 1, 1)


def commutator(p: Operator3, q: Operator3) -> Operator3:
    return p @ q - q @ p


def vwedge(u: Vec3, v: Vec3) -> Operator3:
    """The skew operator ``z -> <v,z> u - <u,z> v``."""
    return Operator3(tuple(tuple(u[i] * v[j] - v[i] * u[j] for j in range(3)) for i in range(3)))


def gauss_R(A: Operator3, x: Vec3, y: Vec3, c=C) -> Operator3:
    c = rf(c)
    ambient = (
        vwedge(x, y)
        + vwedge(PHI.apply(x), PHI.apply(y))
        + PHI.scale(2 * inner(x, PHI.apply(y)))
    )
    return vwedge(A.apply(x), A.apply(y)) + ambient.scale(c)


def structure_jacobi(A: Operator3, c=C) -> Operator3:
    cols = [gauss_R(A, e, W, c).apply(W) for e in FRAME]
    return Operator3(tuple(tuple(cols[j][i] for j in range(3)) for i in range(3)))


def double_comm(RW: Operator3, A: Operator3) -> Operator3:
    return commutator(RW, commutator(PHI, A))


def generic_symmetric(prefix: str) -> Operator3:
    """Symmetric matrix of six independent symbols ``<prefix>11 .. <prefix>33``."""
    s = {}
    for i in range(3):
        for j in range(i, 3):
            s[(i, j)] = s[(j, i)] = RatFunc.var(f"{prefix}{i + 1}{j + 1}")
    return Operator3(tuple(tuple(s[(i, j)] for j in range(3)) for i in range(3)))


def nonhopf_shape() -> Operator3:
    """Shape operator where W is not principal: AW = aW + bX."""
    return Operator3.parse([["a", "b", "0"], ["b", "l", "m"], ["0", "m", "n"]])


def hopf_shape() -> Operator3:
    return Operator3.parse([["a", "0", "0"], ["0", "l", "0"], ["0", "0", "n"]])


def bridge_identity(R: Operator3, A: Operator3) -> tuple[Operator3, Operator3]:
    """``M - M^T`` and ``[R, [phi, A]]`` for ``M = R phi A - phi A R``."""
    m = R @ PHI @ A - PHI @ A @ R
    return m - m.transpose(), double_comm(R, A)


def reduce_modulo(x, var: str, relation) -> RatFunc:
    """Remainder of a rational function modulo a polynomial relation in ``var``.

    The denominator must not involve ``var``.
    """
    x = rf(x)
    rel = rf(relation).num
    if var in x.den.variables:
        raise ValueError(f"denominator involves {var!r}")
    return RatFunc(x.num.rem_in(var, rel), x.den)


def prop31_step(R: Operator3) -> bool:
    """``trace(R^2)`` equals the sum of squared entries for self-adjoint R.

    A self-adjoint R with R^2 = 0 therefore vanishes.
    """
    if not R.is_self_adjoint():
        raise ValueError("operator is not self-adjoint")
    squares = sum((x * x for r in R.entries for x in r), RatFunc.zero())
    return (R @ R).trace() == squares


def eq14_value(lam, nu, k) -> RatFunc:
    """``-k<U, phi A V> + k<V, phi A U>`` in the principal frame (W, V, U), U = phi V."""
    k = rf(k)
    A = Operator3.diag(RatFunc.var("a"), lam, nu)
    V, U = X, Y
    return -k * inner(U, PHI.apply(A.apply(V))) + k * inner(V, PHI.apply(A.apply(U)))


# -- case analyses -----------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    name: str
    passed: bool
    value: str = ""


@dataclass(frozen=True)
class ConditionReport:
    findings: tuple[Finding, ...]
    hypotheses: tuple[str, ...] = ()
    data: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.findings)


def prop33_conditions(A: Operator3 | None = None, c=C) -> ConditionReport:
    """Vanishing structure Jacobi operator in a non-Hopf frame, both directions."""
    A = A or nonhopf_shape()
    c = rf(c)
    rw = structure_jacobi(A, c)
    conditions = {"m": RatFunc.zero(), "l": (RatFunc.var("b") ** 2 - c) / RatFunc.var("a"), "n": -c / RatFunc.var("a")}
    forward = rw.substitute(conditions)
    entries = [rw[1, 1], rw[1, 2], rw[2, 2]]
    rows, rhs = linear_system(entries, ["l", "m", "n"])
    sol = linsolve(rows, rhs, ["l", "m", "n"], Assumptions(["a", "b", c]))
    solved = dict(zip(sol.unknowns, sol.particular)) if sol.consistent else {}
    alpha_zero = (RatFunc.var("a") * RatFunc.var("n") + c).substitute({"a": 0})
    findings = (
        Finding("conditions force R_W = 0", forward.is_zero(), forward.to_text()),
        Finding("R_W = 0 has a unique solution in (l, m, n)", sol.consistent and sol.rank == 3, str(sol.rank)),
        Finding(
            "solution equals the condition set",
            all(solved.get(k) == v for k, v in conditions.items()),
            ", ".join(f"{k} = {v.to_text()}" for k, v in sorted(solved.items())),
        ),
        Finding("a*n + c = 0 is impossible when a = 0", not alpha_zero.is_zero(), alpha_zero.to_text()),
    )
    return ConditionReport(findings, ("a != 0", "b != 0", "c != 0"), {"solution": solved, "rw": rw})


def prop42_derivation(A: Operator3 | None = None, c=C) -> ConditionReport:
    """Non-Hopf frame with [R_W, [phi, A]] = 0: replay the derivation of the reduced shape."""
    A = A or nonhopf_shape()
    c = rf(c)
    a, b, l, n = (RatFunc.var(s) for s in "abln")
    rw = structure_jacobi(A, c)
    bracket = commutator(PHI, A)
    v_w = rw.apply(bracket.apply(W))
    conds = [v_w[1] / b, v_w[2] / b]
    fix = {"m": RatFunc.zero(), "n": -c / a}
    rw1 = rw.substitute(fix)
    a1 = A.substitute(fix)
    br1 = commutator(PHI, a1)
    left = rw1.apply(br1.apply(X))
    right = br1.apply(rw1.apply(X))
    lam_eq_nu = {"l": -c / a, "m": RatFunc.zero(), "n": -c / a}
    other = {"l": (b**2 - c) / a, "m": RatFunc.zero(), "n": -c / a}
    eq8 = A.substitute(lam_eq_nu)
    eq9 = structure_jacobi(eq8, c)
    expected_y = ((a * l + c - b**2) * (l - n)).substitute(fix)
    findings = (
        Finding("R_W [phi,A] W has no W component", v_w[0].is_zero(), v_w[0].to_text()),
        Finding("conditions from R_W phi A W = 0", conds == [a * RatFunc.var("m"), a * n + c],
                ", ".join(x.to_text() for x in conds)),
        Finding("R_W [phi,A] X vanishes once m = 0, a*n + c = 0", left.is_zero(), left.to_text()),
        Finding("[phi,A] R_W X = (a*l + c - b^2)(l - n) Y",
                right[0].is_zero() and right[1].is_zero() and right[2] == expected_y, right.to_text()),
        Finding("branch a*l + c - b^2 = 0 gives R_W = 0", structure_jacobi(A.substitute(other), c).is_zero()),
    )
    return ConditionReport(
        findings,
        ("b != 0", "R_W does not vanish identically"),
        {"conditions": conds, "eq8": eq8, "eq9": eq9, "rw": rw, "y_component": right[2]},
    )


@dataclass(frozen=True)
class HopfCase:
    label: str
    bindings: dict
    relation: tuple[str, str] | None  # (variable, polynomial text)
    k: str


def hopf_cases(c=C) -> tuple[HopfCase, ...]:
    c = rf(c)
    a = RatFunc.var("a")
    l = RatFunc.var("l")
    return (
        HopfCase("a = 0, l != n, l*n = c", {"a": RatFunc.zero(), "n": c / l}, None, "c"),
        HopfCase("a = 0, l = n, l^2 = c", {"a": RatFunc.zero(), "n": l}, ("l", "l^2 - c"), "c"),
        HopfCase("a^2 + 4c = 0, l = n = a/2", {"l": a / 2, "n": a / 2}, ("a", "a^2 + 4*c"), "-c"),
        HopfCase("a != 0, l = n, l^2 = a*l + c", {"n": l}, ("l", "l^2 - a*l - c"), "l^2"),
    )


def _on_case(x: RatFunc, case: HopfCase, c: RatFunc) -> RatFunc:
    x = x.substitute(case.bindings)
    if case.relation is not None:
        var, rel = case.relation
        x = reduce_modulo(x, var, RatFunc.parse(rel, {"c": c}))
    return x


def hopf_relation(c=C) -> RatFunc:
    """``l*n - (l + n)/2 * a - c``: vanishes for Hopf principal curvatures."""
    return RatFunc.parse("l*n - (l + n)/2*a - c", {"c": rf(c)})


def prop44_cases(c=C) -> ConditionReport:
    c = rf(c)
    A = hopf_shape()
    rw = structure_jacobi(A, c)
    findings = []
    ks = {}
    for case in hopf_cases(c):
        k = RatFunc.parse(case.k, {"c": c})
        restricted = [rw[1, 1] - k, rw[2, 2] - k, rw[1, 2], rw[2, 1]]
        ok = all(_on_case(x, case, c).is_zero() for x in restricted)
        findings.append(Finding(f"[{case.label}] R_W = k on W-perp", ok, f"k = {k.to_text()}"))
        rel = _on_case(hopf_relation(c), case, c)
        findings.append(Finding(f"[{case.label}] consistent with the Hopf relation", rel.is_zero(), rel.to_text()))
        ks[case.label] = k
    dc = double_comm(rw, A)
    a, l, n = (RatFunc.var(s) for s in "aln")
    amp = a * (l - n) ** 2
    findings.append(
        Finding("[R_W,[phi,A]] = 0 forces a(l - n)^2 = 0",
                dc.column(0).is_zero() and dc[2, 1] == -amp and dc[1, 2] == amp
                and dc[1, 1].is_zero() and dc[2, 2].is_zero(), dc.to_text())
    )
    hr = hopf_relation(c)
    findings.append(Finding("a = 0 turns the Hopf relation into l*n = c",
                            hr.substitute({"a": 0}) == l * n - c))
    quad = hr.substitute({"n": l})
    findings.append(Finding("l = n turns the Hopf relation into l^2 = a*l + c", quad == l * l - a * l - c))
    disc = (a * a + 4 * c)
    double_root = quad.substitute({"l": a / 2})
    findings.append(Finding("double root l = a/2 exactly when a^2 + 4c = 0",
                            (double_root * 4 + disc).is_zero(), double_root.to_text()))
    phi_aw = PHI.apply(A.apply(W))
    findings.append(Finding("<V, phi A W> = 0 for V in W-perp", phi_aw.is_zero(), phi_aw.to_text()))
    return ConditionReport(tuple(findings), ("Hopf relation l*n = (l+n)/2 a + c",), {"k": ks, "rw": rw, "double_comm": dc})


__all__ = [
    "C", "ConditionReport", "FRAME", "Finding", "HopfCase", "IDENTITY", "Operator3", "PHI", "Vec3",
    "W", "X", "Y", "bridge_identity", "commutator", "double_comm", "eq14_value", "gauss_R",
    "generic_symmetric", "hopf_cases", "hopf_relation", "hopf_shape", "inner", "nonhopf_shape",
    "prop31_step", "prop33_conditions", "prop42_derivation", "prop44_cases", "reduce_modulo",
    "structure_jacobi", "vwedge",
]
