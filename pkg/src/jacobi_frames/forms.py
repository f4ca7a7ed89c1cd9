"""Exterior algebra over a declared coframe, with ``d`` driven by structure equations.

A :class:`DiffForm` stores canonical monomials: strictly increasing index
tuples into its :class:`Coframe`, mapped to nonzero :class:`RatFunc`
coefficients.  Scalars (degree-0 forms) are plain ``RatFunc`` values wherever
a caller hands one in; ``DiffForm`` of degree 0 also exists so that
``d(d f)`` and friends stay uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from . import expr
from .field import RatFunc, rf


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Coframe:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise UsageError(f"coframe names must be distinct: {names}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def dimension(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UsageError(f"{name!r} is not in the coframe {self.names}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def extended(self, *names: str) -> Coframe:
        return Coframe(self.names + tuple(names))

    def without(self, *names: str) -> Coframe:
        return Coframe(tuple(n for n in self.names if n not in names))

    def basis(self, name: str) -> DiffForm:
        return DiffForm(self, 1, {(self.index(name),): RatFunc.one()})


def _merge_sign(i: tuple, j: tuple) -> tuple[int, tuple] | None:
    """Sign and sorted union for ``w_I ^ w_J``; None if they share an index."""
    if set(i) & set(j):
        return None
    inversions = sum(1 for x in i for y in j if x > y)
    return (-1 if inversions % 2 else 1), tuple(sorted(i + j))


class DiffForm:
    __slots__ = ("coframe", "degree", "_terms", "_hash")

    def __init__(self, coframe: Coframe, degree: int, terms: Mapping[tuple, object] | None = None):
        self.coframe = coframe
        self.degree = degree
        clean = {}
        for idx, coef in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise UsageError(f"monomial {idx} is not a strictly increasing {degree}-tuple")
            if idx and not 0 <= idx[-1] < coframe.dimension or idx and idx[0] < 0:
                raise UsageError(f"monomial {idx} is out of range for the coframe")
            coef = rf(coef)
            if not coef.is_zero():
                clean[idx] = coef
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, coframe, degree, terms):
        f = cls.__new__(cls)
        f.coframe, f.degree, f._terms, f._hash = coframe, degree, terms, None
        return f

    @classmethod
    def zero(cls, coframe: Coframe, degree: int) -> DiffForm:
        return cls._raw(coframe, degree, {})

    @classmethod
    def scalar(cls, coframe: Coframe, value) -> DiffForm:
        value = rf(value)
        return cls._raw(coframe, 0, {} if value.is_zero() else {(): value})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def monomial_names(self, idx: tuple) -> tuple[str, ...]:
        return tuple(self.coframe.names[i] for i in idx)

    def support(self) -> set[str]:
        """Names of coframe elements appearing in any term."""
        return {self.coframe.names[i] for idx in self._terms for i in idx}

    def _check(self, other: DiffForm):
        if other.coframe != self.coframe:
            raise UsageError("forms live over different coframes")

    def __add__(self, other):
        if isinstance(other, DiffForm):
            self._check(other)
            if other.degree != self.degree:
                if other.is_zero():
                    return self
                if self.is_zero():
                    return other
                raise UsageError(f"cannot add forms of degree {self.degree} and {other.degree}")
            t = dict(self._terms)
            for k, v in other._terms.items():
                s = t[k] + v if k in t else v
                if s.is_zero():
                    t.pop(k, None)
                else:
                    t[k] = s
            return DiffForm._raw(self.coframe, self.degree, t)
        other = rf(other)
        if other.is_zero():
            return self
        return self + DiffForm.scalar(self.coframe, other)

    __radd__ = __add__

    def __neg__(self):
        return DiffForm._raw(self.coframe, self.degree, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DiffForm):
            raise UsageError("use wedge() to multiply two forms")
        other = rf(other)
        if other.is_zero():
            return DiffForm.zero(self.coframe, self.degree)
        return DiffForm._raw(self.coframe, self.degree, {k: v * other for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * rf(other).inverse()

    def __eq__(self, other):
        if isinstance(other, DiffForm):
            if self.is_zero() and other.is_zero():
                return True
            return (
                self.coframe == other.coframe
                and self.degree == other.degree
                and self._terms == other._terms
            )
        if isinstance(other, (RatFunc, int, Fraction)):
            other = rf(other)
            if self.is_zero():
                return other.is_zero()
            return self.degree == 0 and self._terms.get((), RatFunc.zero()) == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.coframe.names, self.degree, frozenset(self._terms.items())))
        return self._hash

    def map_coefficients(self, fn) -> DiffForm:
        return DiffForm(self.coframe, self.degree, {k: fn(v) for k, v in self._terms.items()})

    def substitute(self, bindings: Mapping[str, object]) -> DiffForm:
        b = {k: rf(v) for k, v in bindings.items()}
        return self.map_coefficients(lambda x: x.substitute(b))

    def over(self, coframe: Coframe, drop: Iterable[str] = ()) -> DiffForm:
        """Re-express over another coframe by name; terms containing ``drop`` are discarded."""
        if coframe == self.coframe:
            return self
        drop = set(drop)
        t = {}
        for idx, coef in self._terms.items():
            names = self.monomial_names(idx)
            if drop & set(names):
                continue
            new = [coframe.index(n) for n in names]
            order = sorted(range(len(new)), key=lambda k: new[k])
            sign = _perm_sign(order)
            key = tuple(new[k] for k in order)
            t[key] = t[key] + coef * sign if key in t else coef * sign
        return DiffForm(coframe, self.degree, t)

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for idx in sorted(self._terms):
            coef = self._terms[idx].to_text()
            if not idx:
                parts.append(coef)
                continue
            mono = "^".join(self.monomial_names(idx))
            if coef in ("1", "-1"):
                parts.append(mono if coef == "1" else f"-{mono}")
                continue
            if not (coef.startswith("(") and ")/(" in coef and coef.endswith(")")):
                coef = f"({coef})"
            parts.append(f"{coef} {mono}")
        return " + ".join(parts)

    __str__ = to_text

    def __repr__(self):
        return f"DiffForm({self.to_text()!r})"


def _perm_sign(order: Sequence[int]) -> int:
    inv = sum(1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b])
    return -1 if inv % 2 else 1


FormLike = Union[DiffForm, RatFunc, int, Fraction]


def _as_form(x: FormLike, coframe: Coframe) -> DiffForm:
    if isinstance(x, DiffForm):
        return x
    return DiffForm.scalar(coframe, x)


def wedge(x: FormLike, y: FormLike) -> DiffForm | RatFunc:
    if not isinstance(x, DiffForm) and not isinstance(y, DiffForm):
        return rf(x) * rf(y)
    if not isinstance(x, DiffForm):
        return y * x
    if not isinstance(y, DiffForm):
        return x * y
    if x.coframe != y.coframe:
        raise UsageError("wedge of forms over different coframes")
    out: dict = {}
    for i, fi in x._terms.items():
        for j, gj in y._terms.items():
            merged = _merge_sign(i, j)
            if merged is None:
                continue
            sign, key = merged
            term = fi * gj if sign > 0 else -(fi * gj)
            if key in out:
                s = out[key] + term
                if s.is_zero():
                    del out[key]
                else:
                    out[key] = s
            else:
                out[key] = term
    return DiffForm._raw(x.coframe, x.degree + y.degree, out)


def wedge_all(*forms: FormLike):
    result = forms[0]
    for f in forms[1:]:
        result = wedge(result, f)
    return result


def coeff_of(x: DiffForm, monomial: Sequence) -> RatFunc:
    """Stored coefficient of a strictly increasing monomial (names or indices)."""
    idx = tuple(x.coframe.index(m) if isinstance(m, str) else int(m) for m in monomial)
    if len(idx) != x.degree:
        raise UsageError(f"monomial {tuple(monomial)} has the wrong degree for a {x.degree}-form")
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise UsageError(f"monomial {tuple(monomial)} is not strictly increasing")
    return x._terms.get(idx, RatFunc.zero())


def replace_basis(x: DiffForm, mapping: Mapping[str, DiffForm]) -> DiffForm:
    """Substitute 1-forms for coframe elements, expanding wedges."""
    if not mapping:
        return x
    cf = x.coframe
    by_index = {cf.index(k): v for k, v in mapping.items()}
    out = DiffForm.zero(cf, x.degree)
    for idx, coef in x._terms.items():
        if not any(i in by_index for i in idx):
            out = out + DiffForm._raw(cf, x.degree, {idx: coef})
            continue
        acc: FormLike = coef
        for i in idx:
            factor = by_index[i] if i in by_index else DiffForm._raw(cf, 1, {(i,): RatFunc.one()})
            acc = wedge(acc, factor)
        out = out + acc
    return out


# -- structure models --------------------------------------------------


@dataclass(frozen=True, eq=False)
class StructureModel:
    """Coframe plus ``d`` of every basis 1-form and the scalar variables' differentials."""

    coframe: Coframe
    d_rules: Mapping[str, DiffForm]
    variables: tuple[tuple[str, str], ...] = ()
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        rules = dict(self.d_rules)
        object.__setattr__(self, "variables", tuple((v, dv) for v, dv in self.variables))
        for v, dv in self.variables:
            if dv not in self.coframe:
                raise UsageError(f"differential {dv!r} of {v!r} is not in the coframe")
            if dv in rules and not rules[dv].is_zero():
                raise UsageError(f"d({dv}) must vanish")
            rules[dv] = DiffForm.zero(self.coframe, 2)
        for name in self.coframe.names:
            if name not in rules:
                raise UsageError(f"no structure equation for {name!r}")
        for name, rule in rules.items():
            if name not in self.coframe:
                raise UsageError(f"structure equation for unknown element {name!r}")
            if rule.degree != 2 and not rule.is_zero():
                raise UsageError(f"d({name}) must be a 2-form")
            rules[name] = rule.over(self.coframe) if not rule.is_zero() else DiffForm.zero(self.coframe, 2)
        object.__setattr__(self, "d_rules", rules)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.variables)

    def differential_of(self, v: str) -> str:
        for name, dv in self.variables:
            if name == v:
                return dv
        raise UsageError(f"{v!r} is not a model variable")

    def basis(self, name: str) -> DiffForm:
        return self.coframe.basis(name)

    def extend(self, var: str, diff_name: str | None = None) -> StructureModel:
        diff_name = diff_name or f"d{var}"
        if var in self.variable_names or diff_name in self.coframe:
            raise UsageError(f"variable {var!r} or {diff_name!r} already present")
        cf = self.coframe.extended(diff_name)
        rules = {k: v.over(cf) for k, v in self.d_rules.items()}
        return StructureModel(cf, rules, self.variables + ((var, diff_name),))

    def restrict(self, bindings: Mapping[str, object]) -> StructureModel:
        """Pin variables to constants: substitute and drop their differentials."""
        drop = [self.differential_of(v) for v in bindings]
        cf = self.coframe.without(*drop)
        b = {k: rf(v) for k, v in bindings.items()}
        rules = {
            k: v.substitute(b).over(cf, drop=drop)
            for k, v in self.d_rules.items()
            if k not in drop
        }
        return StructureModel(cf, rules, tuple((v, dv) for v, dv in self.variables if v not in bindings))

    def d_monomial(self, idx: tuple) -> DiffForm:
        cached = self._cache.get(idx)
        if cached is not None:
            return cached
        cf = self.coframe
        out = DiffForm.zero(cf, len(idx) + 1)
        for pos, i in enumerate(idx):
            left = DiffForm._raw(cf, pos, {idx[:pos]: RatFunc.one()})
            right = DiffForm._raw(cf, len(idx) - pos - 1, {idx[pos + 1:]: RatFunc.one()})
            piece = wedge(wedge(left, self.d_rules[cf.names[i]]), right)
            out = out + (piece if pos % 2 == 0 else -piece)
        self._cache[idx] = out
        return out


def d_scalar(model: StructureModel, f) -> DiffForm:
    f = rf(f)
    t = {}
    present = set(f.variables)
    for v, dv in model.variables:
        if v in present:
            g = f.diff(v)
            if not g.is_zero():
                t[(model.coframe.index(dv),)] = g
    return DiffForm(model.coframe, 1, t)


def ext_d(model: StructureModel, x: FormLike) -> DiffForm:
    if not isinstance(x, DiffForm):
        return d_scalar(model, x)
    if x.coframe != model.coframe:
        raise UsageError("form is not over the model's coframe")
    out = DiffForm.zero(model.coframe, x.degree + 1)
    for idx, coef in x._terms.items():
        mono = DiffForm._raw(model.coframe, x.degree, {idx: RatFunc.one()})
        df = d_scalar(model, coef)
        if not df.is_zero():
            out = out + wedge(df, mono)
        out = out + model.d_monomial(idx) * coef
    return out


# -- parsing -----------------------------------------------------------


class FormAlgebra(expr.Algebra):
    """Values are RatFunc scalars or DiffForms; ``^`` is wedge unless it is a scalar power."""

    def __init__(
        self,
        coframe: Coframe,
        named: Mapping[str, DiffForm] | None = None,
        bindings: Mapping[str, object] | None = None,
        model: StructureModel | None = None,
    ):
        self.coframe = coframe
        self.named = dict(named or {})
        self.bindings = {k: rf(v) for k, v in (bindings or {}).items()}
        self.model = model

    def integer(self, n):
        return rf(n)

    def name(self, ident):
        if ident in self.named:
            return self.named[ident].over(self.coframe)
        if ident in self.coframe:
            return self.coframe.basis(ident)
        if ident in self.bindings:
            return self.bindings[ident]
        return RatFunc.var(ident)

    def call(self, fn, arg):
        if fn == "d":
            if self.model is None:
                raise expr.ParseError("d() needs a structure model")
            return ext_d(self.model, arg)
        raise expr.ParseError(f"unknown function {fn!r}")

    def caret(self, left, right, literal):
        if not isinstance(left, DiffForm) and not isinstance(right, DiffForm):
            if literal is None:
                raise expr.ParseError("scalar exponent must be an integer literal")
            return left**literal
        return wedge(left, right)

    def mul(self, x, y):
        if isinstance(x, DiffForm) and isinstance(y, DiffForm):
            if x.degree == 0 or y.degree == 0:
                return wedge(x, y)
            raise expr.ParseError("use ^ for the wedge of two forms")
        return x * y

    def div(self, x, y):
        if isinstance(y, DiffForm):
            raise expr.ParseError("cannot divide by a form")
        return x / y

    def add(self, x, y):
        if isinstance(x, DiffForm) or isinstance(y, DiffForm):
            return _as_form(x, self.coframe) + _as_form(y, self.coframe)
        return x + y

    def sub(self, x, y):
        return self.add(x, -y)


def parse_form(
    text: str,
    coframe: Coframe,
    named: Mapping[str, DiffForm] | None = None,
    bindings: Mapping[str, object] | None = None,
    model: StructureModel | None = None,
    degree: int | None = None,
) -> DiffForm:
    """Parse form text; a scalar result is returned as a degree-0 form unless it is
    zero and ``degree`` asks for the zero form of that degree."""
    value = expr.parse(text, FormAlgebra(coframe, named, bindings, model))
    if not isinstance(value, DiffForm):
        value = DiffForm.scalar(coframe, value)
    if value.is_zero() and degree is not None:
        return DiffForm.zero(coframe, degree)
    if degree is not None and value.degree != degree:
        raise UsageError(f"expected a {degree}-form, got degree {value.degree}: {text!r}")
    return value
