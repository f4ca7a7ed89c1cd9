"""Pfaffian exterior differential systems over a structure model.

Generators are put in reduced row-echelon form: every generator gets a
distinct *leading* coframe element with coefficient 1, and the leading
elements do not occur in any other normalized generator.  Reduction modulo
the algebraic ideal is then a single substitution of each leading element by
its solved expression.  That is all the systems handled here need; general
ideal membership is out of reach of this approach.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .field import Assumptions, DomainError, LinSolution, RatFunc, linear_system, linsolve, rf
from .forms import DiffForm, StructureModel, UsageError, ext_d, replace_basis, wedge


class NormalizationError(ValueError):
    pass


class TorsionError(ValueError):
    pass


class ObstructionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PfaffianSystem:
    model: StructureModel
    names: tuple[str, ...]
    generators: tuple[DiffForm, ...]
    independence: tuple[str, ...]
    assumptions: Assumptions
    leading: tuple[str, ...]
    normalized: tuple[DiffForm, ...]
    # normalized[e] = sum_i transform[e][i] * generators[i]
    transform: tuple[tuple[RatFunc, ...], ...]
    inversions: tuple[tuple[str, RatFunc], ...] = ()
    prolongation_vars: tuple[str, ...] = ()

    @property
    def coframe(self):
        return self.model.coframe

    @property
    def solved_form(self) -> dict[str, DiffForm]:
        """Leading element -> the 1-form it equals modulo the ideal."""
        return {e: self.coframe.basis(e) - g for e, g in zip(self.leading, self.normalized)}

    def generator(self, name: str) -> DiffForm:
        return self.generators[self.names.index(name)]

    def named_forms(self) -> dict[str, DiffForm]:
        return dict(zip(self.names, self.generators))


def _choose_leading(g: DiffForm, taken: set, independence: set, assumptions: Assumptions):
    cf = g.coframe
    candidates = []
    blocked = []
    for (i,), coef in sorted(g.terms.items()):
        name = cf.names[i]
        if name in taken or name in independence:
            continue
        if assumptions.is_unit(coef):
            candidates.append((0 if coef.is_constant() else 1, i, name, coef))
        else:
            blocked.append(f"{name} (coefficient {coef.to_text()} not known to be nonzero)")
    if not candidates:
        detail = "; ".join(blocked) if blocked else "only independence or already-leading elements remain"
        raise NormalizationError(f"no admissible leading element for {g.to_text()}: {detail}")
    _, _, name, coef = min(candidates)
    return name, coef


def normalize(
    model: StructureModel,
    generators: Sequence[tuple[str, DiffForm]] | Sequence[DiffForm],
    independence: Sequence[str],
    assumptions: Assumptions | Sequence = (),
    prolongation_vars: Sequence[str] = (),
) -> PfaffianSystem:
    if not isinstance(assumptions, Assumptions):
        assumptions = Assumptions(assumptions)
    pairs = [
        g if isinstance(g, tuple) else (f"theta{k}", g) for k, g in enumerate(generators)
    ]
    names = tuple(n for n, _ in pairs)
    gens = tuple(g.over(model.coframe) for _, g in pairs)
    for n, g in zip(names, gens):
        if g.degree != 1:
            raise UsageError(f"generator {n} is not a 1-form")
    indep = set(independence)
    for name in independence:
        model.coframe.index(name)
    count = len(gens)
    rows: list[list] = []  # [lead, form, transform row]
    inversions = []
    taken: set = set()
    for k, theta in enumerate(gens):
        g = theta
        vec = [RatFunc.zero()] * count
        vec[k] = RatFunc.one()
        for lead, form, row in rows:
            a = g.terms.get((model.coframe.index(lead),))
            if a is not None:
                g = g - form * a
                vec = [x - a * y for x, y in zip(vec, row)]
        if g.is_zero():
            raise NormalizationError(f"generator {names[k]} is dependent on the earlier generators")
        lead, coef = _choose_leading(g, taken, indep, assumptions)
        if not coef.is_constant():
            inversions.append((lead, coef))
        inv = coef.inverse()
        g = g * inv
        vec = [x * inv for x in vec]
        li = model.coframe.index(lead)
        for r in rows:
            a = r[1].terms.get((li,))
            if a is not None:
                r[1] = r[1] - g * a
                r[2] = [x - a * y for x, y in zip(r[2], vec)]
        rows.append([lead, g, vec])
        taken.add(lead)
    return PfaffianSystem(
        model=model,
        names=names,
        generators=gens,
        independence=tuple(independence),
        assumptions=assumptions,
        leading=tuple(r[0] for r in rows),
        normalized=tuple(r[1] for r in rows),
        transform=tuple(tuple(r[2]) for r in rows),
        inversions=tuple(inversions),
        prolongation_vars=tuple(prolongation_vars),
    )


def reduce(sys: PfaffianSystem, x: DiffForm) -> DiffForm:
    if not isinstance(x, DiffForm):
        return rf(x)
    x = x.over(sys.coframe)
    solved = sys.solved_form
    lead = set(sys.leading)
    # Normalized generators are in reduced echelon form, so one pass suffices;
    # the loop only guards against misuse.
    while x.support() & lead:
        x = replace_basis(x, {e: solved[e] for e in x.support() & lead})
    return x


def certificate(sys: PfaffianSystem, x: DiffForm) -> dict[str, object]:
    """Forms eta_i with ``x - reduce(x) = sum_i eta_i ^ theta_i`` (generator names as keys).

    Degree-1 input gives scalar (RatFunc) etas.
    """
    x = x.over(sys.coframe)
    cf = sys.coframe
    solved = sys.solved_form
    lead_pos = {cf.index(e): k for k, e in enumerate(sys.leading)}
    k = x.degree
    per_lead: list = [None] * len(sys.leading)
    for idx, coef in x.terms.items():
        for pos, i in enumerate(idx):
            if i not in lead_pos:
                continue
            left: object = coef
            for q in idx[:pos]:
                factor = solved[cf.names[q]] if q in lead_pos else cf.basis(cf.names[q])
                left = wedge(left, factor)
            for q in idx[pos + 1:]:
                left = wedge(left, cf.basis(cf.names[q]))
            if (k - 1 - pos) % 2:
                left = -left
            slot = lead_pos[i]
            per_lead[slot] = left if per_lead[slot] is None else per_lead[slot] + left
    out: dict[str, object] = {}
    for slot, eta in enumerate(per_lead):
        if eta is None:
            continue
        for gi, name in enumerate(sys.names):
            m = sys.transform[slot][gi]
            if m.is_zero():
                continue
            term = eta * m
            out[name] = term if name not in out else out[name] + term
    return out


@dataclass(frozen=True)
class Congruence:
    passed: bool
    residual: DiffForm


def verify_congruence(sys: PfaffianSystem, lhs: DiffForm, rhs: DiffForm) -> Congruence:
    lhs = lhs.over(sys.coframe) if isinstance(lhs, DiffForm) else lhs
    rhs = rhs.over(sys.coframe) if isinstance(rhs, DiffForm) else rhs
    if isinstance(lhs, DiffForm) and isinstance(rhs, DiffForm):
        if lhs.degree != rhs.degree and not (lhs.is_zero() or rhs.is_zero()):
            raise UsageError("congruence sides have different degrees")
    residual = reduce(sys, lhs - rhs)
    return Congruence(residual.is_zero(), residual)


def _unknown(i: int, j: int) -> str:
    return f"_u{i}_{j}"


def torsion_unknowns(npi: int, nind: int) -> tuple[str, ...]:
    return tuple(_unknown(i, j) for i in range(1, npi + 1) for j in range(1, nind + 1))


def _free_element(sys, name, pi, free_elements):
    support = sorted(pi.support() & set(free_elements), key=sys.coframe.index)
    if len(support) != 1:
        raise TorsionError(f"{name} must involve exactly one free element, found {support}")
    e = support[0]
    coef = pi.terms[(sys.coframe.index(e),)]
    if not sys.assumptions.is_unit(coef):
        raise TorsionError(f"coefficient {coef.to_text()} of {e} in {name} is not invertible")
    return e, coef


def torsion_substitution(sys, pi_defs, free_elements, values: Sequence[DiffForm]) -> dict[str, DiffForm]:
    """Free element -> expression making each pi equal the corresponding ``values`` entry."""
    subst = {}
    for (name, pi), target in zip(pi_defs, values):
        pi = reduce(sys, pi.over(sys.coframe))
        e, coef = _free_element(sys, name, pi, free_elements)
        rest = pi - sys.coframe.basis(e) * coef
        subst[e] = (target.over(sys.coframe) - rest) / coef
    return subst


def solve_torsion(
    sys: PfaffianSystem,
    pi_defs: Sequence[tuple[str, DiffForm]],
    free_elements: Sequence[str] | None = None,
) -> LinSolution:
    """Admissible values of the pi's as combinations of the independence forms.

    Unknowns are ordered row-major: pi_1 on each independence form, then pi_2, ...
    """
    cf = sys.coframe
    if free_elements is None:
        support = set()
        for _, pi in pi_defs:
            support |= reduce(sys, pi.over(cf)).support()
        free_elements = sorted(support - set(sys.independence) - set(sys.leading), key=cf.index)
    free_elements = list(free_elements)
    unknowns = torsion_unknowns(len(pi_defs), len(sys.independence))
    ansatz = []
    for i in range(1, len(pi_defs) + 1):
        acc = DiffForm.zero(cf, 1)
        for j, w in enumerate(sys.independence, start=1):
            acc = acc + cf.basis(w) * RatFunc.var(_unknown(i, j))
        ansatz.append(acc)
    subst = torsion_substitution(sys, pi_defs, free_elements, ansatz)
    allowed = set(sys.independence)
    exprs = []
    for theta in sys.generators:
        dtheta = reduce(sys, ext_d(sys.model, theta))
        closed = replace_basis(dtheta, subst)
        stray = closed.support() - allowed
        if stray:
            raise TorsionError(f"elements {sorted(stray)} survive the ansatz substitution")
        exprs.extend(closed.terms.values())
    rows, rhs = linear_system(exprs, unknowns)
    if not rows:
        rows, rhs = [[RatFunc.zero()] * len(unknowns)], [RatFunc.zero()]
    return linsolve(rows, rhs, unknowns, sys.assumptions)


def pattern_forms(sys: PfaffianSystem, pattern: Sequence) -> list[DiffForm]:
    """Turn a flat kernel vector (row-major) into one 1-form per pi."""
    n = len(sys.independence)
    vals = [rf(x) for x in pattern]
    if len(vals) % n:
        raise UsageError("pattern length is not a multiple of the independence count")
    out = []
    for r in range(len(vals) // n):
        acc = DiffForm.zero(sys.coframe, 1)
        for j, w in enumerate(sys.independence):
            acc = acc + sys.coframe.basis(w) * vals[r * n + j]
        out.append(acc)
    return out


def pattern_vector(sys: PfaffianSystem, forms: Sequence[DiffForm]) -> list[RatFunc]:
    """Inverse of :func:`pattern_forms`; forms must lie in the independence span."""
    out = []
    for f in forms:
        f = f.over(sys.coframe) if isinstance(f, DiffForm) else DiffForm.zero(sys.coframe, 1)
        stray = f.support() - set(sys.independence)
        if stray:
            raise UsageError(f"pattern form involves {sorted(stray)}")
        out.extend(f.terms.get((sys.coframe.index(w),), RatFunc.zero()) for w in sys.independence)
    return out


def in_solution_space(sol: LinSolution, vector: Sequence) -> bool:
    """True iff ``vector`` lies in the affine solution set (homogeneous span if particular is 0)."""
    if not sol.consistent:
        return False
    vec = [rf(x) for x in vector]
    target = [v - p for v, p in zip(vec, sol.particular)]
    if not sol.basis:
        return all(t.is_zero() for t in target)
    rows = [list(col) for col in zip(*sol.basis)]
    check = linsolve(rows, target)
    return check.consistent


def prolong(
    sys: PfaffianSystem,
    pi_defs: Sequence[tuple[str, DiffForm]],
    pattern: Sequence,
    new_var: str,
    new_names: Sequence[str] | None = None,
    torsion: LinSolution | None = None,
) -> PfaffianSystem:
    """Adjoin ``new_var`` and generators ``pi_i - new_var * pattern_i``."""
    if torsion is not None and not in_solution_space(torsion, pattern):
        raise TorsionError("prolongation pattern is not a solution of the torsion equations")
    forms = pattern_forms(sys, pattern)
    if len(forms) != len(pi_defs):
        raise UsageError("one pattern row per pi definition is required")
    model = sys.model.extend(new_var)
    cf = model.coframe
    scale = RatFunc.var(new_var)
    new_names = list(new_names) if new_names is not None else [
        f"theta{len(sys.names) + k}" for k in range(len(pi_defs))
    ]
    gens = [(n, g.over(cf)) for n, g in zip(sys.names, sys.generators)]
    for name, (_, pi), form in zip(new_names, pi_defs, forms):
        gens.append((name, pi.over(cf) - form.over(cf) * scale))
    return normalize(
        model, gens, sys.independence, sys.assumptions, sys.prolongation_vars + (new_var,)
    )


def restrict(sys: PfaffianSystem, bindings: Mapping[str, object]) -> PfaffianSystem:
    """Pin variables to constants: substitute everywhere and drop their differentials."""
    if not bindings:
        return sys
    b = {k: rf(v) for k, v in bindings.items()}
    for v, val in b.items():
        if v not in sys.model.variable_names:
            raise UsageError(f"{v!r} is not a variable of the system")
        if not val.is_constant():
            raise UsageError("only constant bindings are supported")
    assumptions = sys.assumptions.substitute(b)
    drop = [sys.model.differential_of(v) for v in b]
    model = sys.model.restrict(b)
    gens = [(n, g.substitute(b).over(model.coframe, drop=drop)) for n, g in zip(sys.names, sys.generators)]
    keep = tuple(v for v in sys.prolongation_vars if v not in b)
    return normalize(model, gens, sys.independence, assumptions, keep)


def obstruction(sys: PfaffianSystem, x: DiffForm) -> DiffForm:
    """Reduce ``x`` and insist that no prolongation-variable differential survives."""
    reduced = reduce(sys, x)
    diffs = {sys.model.differential_of(v) for v in sys.prolongation_vars}
    survivors = reduced.support() & diffs
    if survivors:
        raise ObstructionError(
            f"obstruction combination not closed: {sorted(survivors)} survive in {reduced.to_text()}"
        )
    return reduced


__all__ = [
    "Congruence",
    "DomainError",
    "NormalizationError",
    "ObstructionError",
    "PfaffianSystem",
    "TorsionError",
    "certificate",
    "in_solution_space",
    "normalize",
    "obstruction",
    "pattern_forms",
    "pattern_vector",
    "prolong",
    "reduce",
    "restrict",
    "solve_torsion",
    "torsion_substitution",
    "torsion_unknowns",
    "verify_congruence",
]
