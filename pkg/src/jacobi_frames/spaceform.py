"""Structure model of the unitary frame bundle over CP^2 / CH^2.

Frames are unitary: ``e4 = J e1`` and ``e3 = J e2``.  Only the connection
forms ``w32, w41, w42, w43`` are independent; the others are expanded at
construction time using antisymmetry together with

    w^2_1 = -w^4_3,    w^3_1 = w^4_2.

The holomorphic sectional curvature is ``4c``; ``c`` stays a symbol unless a
constant is passed in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .field import RatFunc, rf
from .forms import Coframe, DiffForm, StructureModel, UsageError, ext_d, wedge

BASE_COFRAME = ("w1", "w2", "w3", "w4", "w32", "w41", "w42", "w43")
INDEPENDENT = {(3, 2): "w32", (4, 1): "w41", (4, 2): "w42", (4, 3): "w43"}
# dependent connection forms as (sign, independent pair)
_DEPENDENT = {(2, 1): (-1, (4, 3)), (3, 1): (1, (4, 2))}
RESERVED = {"c", *BASE_COFRAME}


def connection_form(coframe: Coframe, i: int, j: int) -> DiffForm:
    """``w^i_j`` written in the independent connection forms."""
    if i == j:
        return DiffForm.zero(coframe, 1)
    if (i, j) in INDEPENDENT:
        return coframe.basis(INDEPENDENT[(i, j)])
    if (j, i) in INDEPENDENT:
        return -coframe.basis(INDEPENDENT[(j, i)])
    if (i, j) in _DEPENDENT:
        sign, pair = _DEPENDENT[(i, j)]
        return connection_form(coframe, *pair) * sign
    sign, pair = _DEPENDENT[(j, i)]
    return -(connection_form(coframe, *pair) * sign)


def curvature_table(coframe: Coframe, c) -> dict[tuple[int, int], DiffForm]:
    """All sixteen curvature 2-forms Phi^i_j of the unitary model."""
    c = rf(c)
    w = {k: coframe.basis(f"w{k}") for k in range(1, 5)}
    base = {
        (3, 2): (wedge(w[3], w[2]) * 4 + wedge(w[4], w[1]) * 2) * c,
        (4, 1): (wedge(w[4], w[1]) * 4 + wedge(w[3], w[2]) * 2) * c,
        (4, 2): (wedge(w[3], w[1]) + wedge(w[4], w[2])) * c,
        (4, 3): (wedge(w[1], w[2]) + wedge(w[4], w[3])) * c,
    }
    base[(3, 1)] = base[(4, 2)]
    base[(1, 2)] = base[(4, 3)]
    table = {}
    for i in range(1, 5):
        for j in range(1, 5):
            if i == j:
                table[(i, j)] = DiffForm.zero(coframe, 2)
            elif (i, j) in base:
                table[(i, j)] = base[(i, j)]
            else:
                table[(i, j)] = -base[(j, i)]
    return table


def _structure_rules(coframe: Coframe, curvature) -> dict[str, DiffForm]:
    conn = {(i, j): connection_form(coframe, i, j) for i in range(1, 5) for j in range(1, 5)}
    rules = {}
    for i in range(1, 5):
        acc = DiffForm.zero(coframe, 2)
        for j in range(1, 5):
            acc = acc - wedge(conn[(i, j)], coframe.basis(f"w{j}"))
        rules[f"w{i}"] = acc
    for (i, j), name in INDEPENDENT.items():
        rules[name] = structure_rhs(coframe, conn, curvature, i, j)
    return rules


def structure_rhs(coframe, conn, curvature, i: int, j: int) -> DiffForm:
    """Right-hand side ``-w^i_k ^ w^k_j + Phi^i_j`` of the connection structure equation."""
    acc = DiffForm.zero(coframe, 2)
    for k in range(1, 5):
        acc = acc - wedge(conn[(i, k)], conn[(k, j)])
    return acc + curvature[(i, j)]


@dataclass(frozen=True, eq=False)
class SpaceformModel:
    model: StructureModel
    curvature: dict
    c: RatFunc

    @property
    def coframe(self) -> Coframe:
        return self.model.coframe

    def connection(self, i: int, j: int) -> DiffForm:
        return connection_form(self.coframe, i, j)


def build_unitary_model(extra_vars: Iterable[str] = (), c=None) -> SpaceformModel:
    extra = list(extra_vars)
    if len(set(extra)) != len(extra):
        raise UsageError(f"duplicate variables: {extra}")
    for v in extra:
        if v in RESERVED or f"d{v}" in RESERVED:
            raise UsageError(f"variable name {v!r} collides with a built-in name")
    c = RatFunc.var("c") if c is None else rf(c)
    coframe = Coframe(BASE_COFRAME + tuple(f"d{v}" for v in extra))
    curvature = curvature_table(coframe, c)
    rules = _structure_rules(coframe, curvature)
    model = StructureModel(coframe, rules, tuple((v, f"d{v}") for v in extra))
    return SpaceformModel(model, curvature, c)


def ambient_curvature_forms(coframe: Coframe, c) -> dict[tuple[int, int], DiffForm]:
    """Phi^i_j recomputed from ``R(X,Y) = c(X^Y + JX^JY + 2<X,JY>J)`` in a unitary frame.

    Independent of :func:`curvature_table`; used to cross-check it.
    """
    c = rf(c)
    # J as a matrix acting on coordinate vectors (columns = images of e1..e4)
    jmat = {1: {4: 1}, 2: {3: 1}, 3: {2: -1}, 4: {1: -1}}

    def j_of(vec):
        out = {k: 0 for k in range(1, 5)}
        for k, x in vec.items():
            for t, s in jmat[k].items():
                out[t] += s * x
        return out

    def e(k):
        return {t: (1 if t == k else 0) for t in range(1, 5)}

    def inner(u, v):
        return sum(u[k] * v[k] for k in range(1, 5))

    def curv(x, y, z):
        jx, jy, jz = j_of(x), j_of(y), j_of(z)
        out = {}
        for t in range(1, 5):
            out[t] = (
                inner(y, z) * x[t] - inner(x, z) * y[t]
                + inner(jy, z) * jx[t] - inner(jx, z) * jy[t]
                + 2 * inner(x, jy) * jz[t]
            )
        return out

    forms = {}
    for i in range(1, 5):
        for j in range(1, 5):
            acc = DiffForm.zero(coframe, 2)
            for k in range(1, 5):
                for l in range(k + 1, 5):
                    val = curv(e(k), e(l), e(j))[i]
                    if val:
                        acc = acc + wedge(coframe.basis(f"w{k}"), coframe.basis(f"w{l}")) * (c * val)
            forms[(i, j)] = acc
    return forms


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    residual: str = "0"


@dataclass(frozen=True)
class BianchiReport:
    checks: tuple[IdentityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)


def _record(name: str, residual: DiffForm) -> IdentityCheck:
    return IdentityCheck(name, residual.is_zero(), residual.to_text())


def bianchi_check(m: SpaceformModel) -> BianchiReport:
    cf = m.coframe
    checks = []
    for i in range(1, 5):
        acc = DiffForm.zero(cf, 3)
        for j in range(1, 5):
            acc = acc + wedge(m.curvature[(i, j)], cf.basis(f"w{j}"))
        checks.append(_record(f"Phi^{i}_j ^ w^j = 0", acc))
    for name in cf.names:
        dd = ext_d(m.model, ext_d(m.model, cf.basis(name)))
        checks.append(_record(f"d(d({name})) = 0", dd))
    conn = {(i, j): connection_form(cf, i, j) for i in range(1, 5) for j in range(1, 5)}
    for i in range(1, 5):
        for j in range(1, 5):
            if i == j:
                continue
            lhs = ext_d(m.model, conn[(i, j)])
            rhs = structure_rhs(cf, conn, m.curvature, i, j)
            checks.append(_record(f"d(w^{i}_{j}) structure equation", lhs - rhs))
    ambient = ambient_curvature_forms(cf, m.c)
    for key in sorted(m.curvature):
        checks.append(_record(f"Phi^{key[0]}_{key[1]} from ambient curvature", m.curvature[key] - ambient[key]))
    return BianchiReport(tuple(checks))
