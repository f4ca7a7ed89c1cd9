"""Exact arithmetic: sparse polynomials over Q, canonical rational functions,
partial derivatives, and linear solving over the rational-function field.

Rationals are :class:`fractions.Fraction`, which already keeps
``gcd(num, den) = 1``, ``den > 0`` and ``0 == 0/1``.

Terms are ordered graded-lexicographically with the global variable order
``c, a, b, l, m, n, p, k, t`` followed by every other name in string order.
The Greek symbols are spelled ``a``=alpha, ``b``=beta, ``l``=lambda,
``m``=mu, ``n``=nu, ``p``=rho, ``t``=tau.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd as igcd
from typing import Iterable, Mapping, Sequence, Union

from . import expr

KNOWN_ORDER = ("c", "a", "b", "l", "m", "n", "p", "k", "t")
_KNOWN_RANK = {v: i for i, v in enumerate(KNOWN_ORDER)}


class DomainError(ArithmeticError):
    """Division by zero, or a substitution that makes a denominator vanish."""


class NotDivisible(ArithmeticError):
    pass


@lru_cache(maxsize=None)
def var_key(name: str):
    if name in _KNOWN_RANK:
        return (0, _KNOWN_RANK[name], "")
    return (1, 0, name)


def sort_vars(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=var_key))


Monomial = tuple  # tuple[tuple[str, int], ...], sorted by var_key


@lru_cache(maxsize=1 << 16)
def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda t: var_key(t[0])))


def _mono_div(m1: Monomial, m2: Monomial) -> Monomial | None:
    d = dict(m1)
    for v, e in m2:
        have = d.get(v, 0)
        if have < e:
            return None
        if have == e:
            del d[v]
        else:
            d[v] = have - e
    return tuple(sorted(d.items(), key=lambda t: var_key(t[0])))


def _mono_text(m: Monomial) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def _grlex_key(vars_: Sequence[str]):
    def key(m: Monomial):
        d = dict(m)
        exps = tuple(d.get(v, 0) for v in vars_)
        return (sum(exps), exps)

    return key


Scalar = Union[int, Fraction]


class Poly:
    """Sparse multivariate polynomial with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> Poly:
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, q: Scalar) -> Poly:
        return cls({(): q})

    @classmethod
    def var(cls, name: str) -> Poly:
        return cls._raw({((name, 1),): Fraction(1)})

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def variables(self) -> tuple[str, ...]:
        return sort_vars(v for m in self._terms for v, _ in m)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get((), Fraction(0))

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self._terms), default=-1)

    def degree_in(self, v: str) -> int:
        if not self._terms:
            return -1
        return max(dict(m).get(v, 0) for m in self._terms)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in decreasing grlex order."""
        key = _grlex_key(self.variables)
        return sorted(self._terms.items(), key=lambda t: key(t[0]), reverse=True)

    def leading_term(self) -> tuple[Monomial, Fraction]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        key = _grlex_key(self.variables)
        m = max(self._terms, key=key)
        return m, self._terms[m]

    def lc(self) -> Fraction:
        return self.leading_term()[1]

    def coeffs_in(self, v: str) -> dict[int, Poly]:
        """View as a polynomial in ``v``: exponent -> coefficient polynomial."""
        out: dict[int, dict] = {}
        for m, c in self._terms.items():
            e = 0
            rest = []
            for w, k in m:
                if w == v:
                    e = k
                else:
                    rest.append((w, k))
            out.setdefault(e, {})[tuple(rest)] = c
        return {e: Poly._raw(t) for e, t in out.items()}

    # -- arithmetic ---------------------------------------------------
    @staticmethod
    def coerce(x) -> Poly:
        if isinstance(x, Poly):
            return x
        if isinstance(x, (int, Fraction)):
            return Poly.const(x)
        return NotImplemented

    def __add__(self, other):
        other = Poly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        t = dict(self._terms)
        for m, c in other._terms.items():
            s = t.get(m, 0) + c
            if s:
                t[m] = s
            else:
                t.pop(m, None)
        return Poly._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = Poly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly._raw({})
            return Poly._raw({m: c * other for m, c in self._terms.items()})
        other = Poly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._terms, other._terms
        # integer fast path: accumulate in ints, wrap once at the end
        if all(c.denominator == 1 for c in a.values()) and all(c.denominator == 1 for c in b.values()):
            a = {m: c.numerator for m, c in a.items()}
            b = {m: c.numerator for m, c in b.items()}
        t: dict = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return Poly._raw({m: Fraction(c) for m, c in t.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        other = Poly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def diff(self, v: str) -> Poly:
        t: dict = {}
        for m, c in self._terms.items():
            d = dict(m)
            e = d.get(v, 0)
            if not e:
                continue
            if e == 1:
                del d[v]
            else:
                d[v] = e - 1
            nm = tuple(sorted(d.items(), key=lambda q: var_key(q[0])))
            t[nm] = t.get(nm, 0) + c * e
        return Poly(t)

    def divexact(self, other: Poly) -> Poly:
        """Exact quotient; raises :class:`NotDivisible` if there is a remainder."""
        if other.is_zero():
            raise DomainError("division by the zero polynomial")
        if other.is_constant():
            return self * (1 / other.constant_value())
        vars_ = sort_vars(set(self.variables) | set(other.variables))
        key = _grlex_key(vars_)
        lm, lc = max(other._terms.items(), key=lambda t: key(t[0]))
        rem = dict(self._terms)
        quo: dict = {}
        while rem:
            m = max(rem, key=key)
            t = _mono_div(m, lm)
            if t is None:
                raise NotDivisible
            coef = rem[m] / lc
            quo[t] = coef
            for m2, c2 in other._terms.items():
                mm = _mono_mul(t, m2)
                s = rem.get(mm, 0) - coef * c2
                if s:
                    rem[mm] = s
                else:
                    rem.pop(mm, None)
        return Poly._raw(quo)

    def divides(self, other: Poly) -> bool:
        try:
            other.divexact(self)
        except NotDivisible:
            return False
        return True

    def rem_in(self, v: str, modulus: Poly) -> Poly:
        """Remainder on division by ``modulus`` viewed as a polynomial in ``v``.

        The leading coefficient of ``modulus`` in ``v`` must be a nonzero
        constant so the division stays inside Q[vars].
        """
        dm = modulus.degree_in(v)
        if dm <= 0:
            raise ValueError(f"modulus must involve {v!r}")
        lead = modulus.coeffs_in(v)[dm]
        if not lead.is_constant():
            raise ValueError("modulus must have a constant leading coefficient")
        inv = 1 / lead.constant_value()
        x = Poly.var(v)
        r = self
        while not r.is_zero() and r.degree_in(v) >= dm:
            dr = r.degree_in(v)
            lr = r.coeffs_in(v)[dr]
            r = r - lr * inv * modulus * x ** (dr - dm)
        return r

    def numeric_content(self) -> Fraction:
        """Positive rational q with self/q integral and coprime; sign of lc kept out."""
        if not self._terms:
            return Fraction(0)
        nums = 0
        dens = 1
        for c in self._terms.values():
            nums = igcd(nums, c.numerator)
            dens = dens * c.denominator // igcd(dens, c.denominator)
        return Fraction(nums, dens)

    def monomial_content(self) -> Monomial:
        if not self._terms:
            return ()
        it = iter(self._terms)
        common = dict(next(it))
        for m in it:
            d = dict(m)
            for v in list(common):
                e = min(common[v], d.get(v, 0))
                if e:
                    common[v] = e
                else:
                    del common[v]
            if not common:
                break
        return tuple(sorted(common.items(), key=lambda q: var_key(q[0])))

    def evaluate(self, bindings: Mapping[str, "RatFunc"]) -> "RatFunc":
        bound_parts: dict = {}
        for m, c in self._terms.items():
            free = []
            fixed = []
            for v, e in m:
                (fixed if v in bindings else free).append((v, e))
            bound_parts.setdefault(tuple(fixed), {})[tuple(free)] = c
        total = RatFunc.zero()
        powers: dict = {}
        for fixed, polyterms in bound_parts.items():
            factor = RatFunc.one()
            for v, e in fixed:
                if (v, e) not in powers:
                    powers[(v, e)] = bindings[v] ** e
                factor = factor * powers[(v, e)]
            total = total + factor * RatFunc(Poly._raw(polyterms))
        return total

    def to_text(self) -> str:
        return _poly_product_text(self)

    def __repr__(self):
        return f"Poly({self.to_text()!r})"

    __str__ = to_text


ZERO_POLY = Poly()
ONE_POLY = Poly.const(1)


def _sum_text(p: Poly) -> str:
    parts = []
    for i, (m, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mono = _mono_text(m)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


def _poly_product_text(p: Poly) -> str:
    """Numeric content, then monomial content, then the primitive cofactor."""
    if p.is_zero():
        return "0"
    q = p.numeric_content()
    mono = p.monomial_content()
    prim = p.divexact(Poly._raw({mono: Fraction(1)})) * (1 / q)
    if prim.lc() < 0:
        prim = -prim
        q = -q
    factors = []
    if not prim.is_constant():
        inner = _sum_text(prim)
        factors.append(f"({inner})" if (len(prim._terms) > 1 and (mono or abs(q) != 1)) else inner)
    head = _mono_text(mono)
    pieces = [s for s in (head, *factors) if s]
    if not pieces:
        return str(q)
    body = "*".join(pieces)
    if q == 1:
        return body
    if q == -1:
        return "-" + (f"({body})" if len(prim._terms) > 1 and not mono else body)
    return f"{q}*{body}"


# -- gcd ----------------------------------------------------------------


def _unit_normal(p: Poly) -> Poly:
    if p.is_zero():
        return p
    return p * (1 / p.lc())


def _mono_gcd(m: Poly, f: Poly) -> Poly:
    (mono, _), = m._terms.items()
    common = dict(mono)
    for t in f._terms:
        d = dict(t)
        for v in list(common):
            e = min(common[v], d.get(v, 0))
            if e:
                common[v] = e
            else:
                del common[v]
        if not common:
            return ONE_POLY
    return Poly._raw({tuple(sorted(common.items(), key=lambda q: var_key(q[0]))): Fraction(1)})


def _content_in(f: Poly, v: str) -> Poly:
    g = None
    for c in f.coeffs_in(v).values():
        g = c if g is None else poly_gcd(g, c)
        if g.is_constant():
            return ONE_POLY
    return _unit_normal(g)


def _primitive_in(f: Poly, v: str) -> Poly:
    return f.divexact(_content_in(f, v))


def _prem(a: Poly, b: Poly, v: str) -> Poly:
    """Pseudo-remainder: ``lc_v(b)^(deg a - deg b + 1) * a`` reduced modulo ``b``."""
    db = b.degree_in(v)
    lb = b.coeffs_in(v)[db]
    x = Poly.var(v)
    r = a
    steps = a.degree_in(v) - db + 1
    while not r.is_zero() and r.degree_in(v) >= db:
        dr = r.degree_in(v)
        lr = r.coeffs_in(v)[dr]
        r = r * lb - lr * b * x ** (dr - db)
        steps -= 1
    return r * lb**steps if steps > 0 and not r.is_zero() else r


def _prs_gcd(a: Poly, b: Poly, v: str) -> Poly:
    """Subresultant remainder sequence; inputs primitive in ``v``."""
    if a.degree_in(v) < b.degree_in(v):
        a, b = b, a
    g = h = ONE_POLY
    while True:
        delta = a.degree_in(v) - b.degree_in(v)
        r = _prem(a, b, v)
        if r.is_zero():
            return _primitive_in(b, v)
        if r.degree_in(v) == 0:
            return ONE_POLY
        a, b = b, r.divexact(g * h**delta)
        g = a.coeffs_in(v)[a.degree_in(v)]
        h = g**delta if delta == 1 else (g**delta).divexact(h ** (delta - 1)) if delta else h


def _eval_except(p: Poly, v: str, point: Mapping[str, int]) -> dict[int, Fraction]:
    """Univariate image of ``p`` in ``v`` with every other variable set from ``point``."""
    out: dict[int, Fraction] = {}
    for m, c in p._terms.items():
        e_v = 0
        val = c
        for x, e in m:
            if x == v:
                e_v = e
            else:
                val *= point[x] ** e
        out[e_v] = out.get(e_v, 0) + val
    return {e: c for e, c in out.items() if c}


def _uni_rem(a: dict, b: dict) -> dict:
    a = dict(a)
    db = max(b)
    lb = b[db]
    while a and max(a) >= db:
        da = max(a)
        q = a[da] / lb
        for e, c in b.items():
            k = e + da - db
            val = a.get(k, 0) - q * c
            if val:
                a[k] = val
            else:
                a.pop(k, None)
    return a


def _uni_gcd_degree(a: dict, b: dict) -> int:
    while b:
        a, b = b, _uni_rem(a, b)
    return max(a) if a else 0


_PROBE_POINTS = ((2, 3, 5, 7, 11, 13), (-3, 4, -7, 9, 17, -5), (5, -2, 13, 3, -11, 19))


def _coprime_by_evaluation(f: Poly, g: Poly) -> bool:
    """True only if gcd(f, g) is certainly constant.

    For each variable v, the other variables are fixed at a point where the
    leading coefficients in v survive; the image of any common factor then
    keeps its degree in v, so a constant image gcd bounds that degree by 0.
    """
    shared = sort_vars(set(f.variables) & set(g.variables))
    if not shared:
        return False
    allv = sort_vars(set(f.variables) | set(g.variables))
    for v in shared:
        ok = False
        for vals in _PROBE_POINTS:
            point = {x: vals[i % len(vals)] + i // len(vals) for i, x in enumerate(allv)}
            fi, gi = _eval_except(f, v, point), _eval_except(g, v, point)
            if not fi or not gi or max(fi) != f.degree_in(v) or max(gi) != g.degree_in(v):
                continue
            if _uni_gcd_degree(fi, gi) > 0:
                return False
            ok = True
            break
        if not ok:
            return False
    return True


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic (grlex) gcd over Q, by content / primitive-part recursion."""
    if f.is_zero():
        return _unit_normal(g)
    if g.is_zero():
        return _unit_normal(f)
    if f.is_constant() or g.is_constant():
        return ONE_POLY
    if f.is_monomial():
        return _mono_gcd(f, g)
    if g.is_monomial():
        return _mono_gcd(g, f)
    if f == g:
        return _unit_normal(f)
    fv, gv = set(f.variables), set(g.variables)
    if _coprime_by_evaluation(f, g):
        return ONE_POLY
    f = f * (1 / f.numeric_content())
    g = g * (1 / g.numeric_content())
    # main variable: lowest combined degree keeps the remainder sequence short
    v = min(sort_vars(fv | gv), key=lambda x: (x not in fv or x not in gv, f.degree_in(x) + g.degree_in(x)))
    if v not in gv:
        return poly_gcd(_content_in(f, v), g)
    if v not in fv:
        return poly_gcd(f, _content_in(g, v))
    cf, cg = _content_in(f, v), _content_in(g, v)
    h = _prs_gcd(f.divexact(cf), g.divexact(cg), v)
    return _unit_normal(poly_gcd(cf, cg) * h)


# -- rational functions -------------------------------------------------


class RatFunc:
    """Canonical quotient ``num/den`` with gcd 1 and monic denominator."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        num = Poly.coerce(num) if not isinstance(num, Poly) else num
        if den is None:
            self.num, self.den = num, ONE_POLY
            self._hash = None
            return
        den = Poly.coerce(den) if not isinstance(den, Poly) else den
        if den.is_zero():
            raise DomainError("division by the zero rational function")
        if num.is_zero():
            self.num, self.den = ZERO_POLY, ONE_POLY
        elif den.is_constant():
            self.num, self.den = num * (1 / den.constant_value()), ONE_POLY
        else:
            g = poly_gcd(num, den)
            if not g.is_constant():
                num, den = num.divexact(g), den.divexact(g)
            lc = den.lc()
            if lc != 1:
                num, den = num * (1 / lc), den * (1 / lc)
            self.num, self.den = num, den
        self._hash = None

    @classmethod
    def _raw(cls, num: Poly, den: Poly) -> RatFunc:
        r = cls.__new__(cls)
        r.num, r.den, r._hash = num, den, None
        return r

    @classmethod
    def zero(cls) -> RatFunc:
        return _ZERO

    @classmethod
    def one(cls) -> RatFunc:
        return _ONE

    @classmethod
    def var(cls, name: str) -> RatFunc:
        return cls._raw(Poly.var(name), ONE_POLY)

    @classmethod
    def coerce(cls, x) -> RatFunc:
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, (int, Fraction)):
            return cls._raw(Poly.const(x), ONE_POLY)
        if isinstance(x, Poly):
            return cls._raw(x, ONE_POLY)
        if isinstance(x, str):
            return cls.parse(x)
        return NotImplemented

    @classmethod
    def parse(cls, text: str, bindings: Mapping[str, "RatFunc"] | None = None) -> RatFunc:
        value = expr.parse(text, ScalarAlgebra(bindings))
        return value

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    @property
    def variables(self) -> tuple[str, ...]:
        return sort_vars(set(self.num.variables) | set(self.den.variables))

    def __bool__(self):
        return not self.num.is_zero()

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = RatFunc.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            if self.den.is_constant():
                return RatFunc._raw(self.num + other.num, ONE_POLY)
            return RatFunc(self.num + other.num, self.den)
        g = poly_gcd(self.den, other.den)
        bd = self.den.divexact(g) if not g.is_constant() else self.den
        dd = other.den.divexact(g) if not g.is_constant() else other.den
        return RatFunc(self.num * dd + other.num * bd, bd * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._raw(-self.num, self.den)

    def __sub__(self, other):
        other = RatFunc.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return RatFunc.coerce(other) - self

    def __mul__(self, other):
        other = RatFunc.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return _ZERO
        if self.den.is_constant() and other.den.is_constant():
            return RatFunc._raw(self.num * other.num, ONE_POLY)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> RatFunc:
        if self.num.is_zero():
            raise DomainError("division by the zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        other = RatFunc.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RatFunc.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc._raw(self.num**n, self.den**n)

    def __eq__(self, other):
        other = RatFunc.coerce(other) if not isinstance(other, RatFunc) else other
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- calculus -----------------------------------------------------
    def diff(self, v: str) -> RatFunc:
        dn = self.num.diff(v)
        dd = self.den.diff(v)
        if dd.is_zero():
            if dn.is_zero():
                return _ZERO
            return RatFunc(dn, self.den)
        return RatFunc(dn * self.den - self.num * dd, self.den * self.den)

    def substitute(self, bindings: Mapping[str, "RatFunc"]) -> RatFunc:
        bindings = {k: RatFunc.coerce(v) for k, v in bindings.items()}
        touched = set(self.variables) & set(bindings)
        if not touched:
            return self
        den = self.den.evaluate(bindings)
        if den.is_zero():
            raise DomainError(f"denominator {self.den.to_text()} vanishes under the substitution")
        return self.num.evaluate(bindings) / den

    # -- text ---------------------------------------------------------
    def to_text(self) -> str:
        if self.den == ONE_POLY:
            return _poly_product_text(self.num)
        # print with an integral, primitive denominator
        q = self.den.numeric_content()
        num, den = self.num * (1 / q), self.den * (1 / q)
        return f"({_poly_product_text(num)})/({_poly_product_text(den)})"

    __str__ = to_text

    def __repr__(self):
        return f"RatFunc({self.to_text()!r})"


_ZERO = RatFunc._raw(ZERO_POLY, ONE_POLY)
_ONE = RatFunc._raw(ONE_POLY, ONE_POLY)


def var(name: str) -> RatFunc:
    return RatFunc.var(name)


def const(q: Scalar) -> RatFunc:
    return RatFunc.coerce(Fraction(q))


def rf(x) -> RatFunc:
    """Coerce ints, Fractions, Polys and text into a RatFunc."""
    return RatFunc.coerce(x)


def rf_arith(op: str, x, y=None) -> RatFunc:
    x = rf(x)
    if op == "neg":
        return -x
    y = rf(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def rf_diff(x, v: str) -> RatFunc:
    return rf(x).diff(v)


def rf_substitute(x, bindings: Mapping[str, object]) -> RatFunc:
    return rf(x).substitute({k: rf(v) for k, v in bindings.items()})


class ScalarAlgebra(expr.Algebra):
    def __init__(self, bindings: Mapping[str, RatFunc] | None = None):
        self.bindings = dict(bindings or {})

    def integer(self, n):
        return RatFunc.coerce(n)

    def name(self, ident):
        if ident in self.bindings:
            return RatFunc.coerce(self.bindings[ident])
        return RatFunc.var(ident)

    def caret(self, left, right, literal):
        if literal is None:
            raise expr.ParseError("exponent must be an integer literal")
        return left**literal


# -- nonzero assumptions --------------------------------------------------


class Assumptions:
    """Polynomials assumed nonzero; decides which quantities may be inverted."""

    def __init__(self, polys: Iterable = ()):
        factors = []
        for p in polys:
            p = rf(p)
            if not p.is_polynomial():
                raise ValueError("assumed-nonzero quantities must be polynomials")
            q = p.num
            if q.is_zero():
                raise DomainError("cannot assume 0 is nonzero")
            if q.is_constant():
                continue
            q = _unit_normal(q)
            if q not in factors:
                factors.append(q)
        self.factors: tuple[Poly, ...] = tuple(factors)

    def _strip(self, p: Poly) -> Poly:
        changed = True
        while changed and not p.is_constant():
            changed = False
            for q in self.factors:
                try:
                    p = p.divexact(q)
                    changed = True
                except NotDivisible:
                    pass
        return p

    def is_unit(self, x) -> bool:
        """True iff ``x`` is a nonzero constant times a product of assumed factors."""
        x = rf(x)
        if x.is_zero():
            return False
        return self._strip(x.num).is_constant() and self._strip(x.den).is_constant()

    def check_substitution(self, bindings: Mapping[str, RatFunc]) -> None:
        for q in self.factors:
            if RatFunc(q).substitute(bindings).is_zero():
                raise DomainError(f"substitution makes assumed-nonzero {q.to_text()} vanish")

    def substitute(self, bindings: Mapping[str, RatFunc]) -> Assumptions:
        self.check_substitution(bindings)
        out = []
        for q in self.factors:
            v = RatFunc(q).substitute(bindings)
            out.append(v.num)
            if not v.den.is_constant():
                out.append(v.den)
        return Assumptions(out)

    def __repr__(self):
        return f"Assumptions({[q.to_text() for q in self.factors]})"


# -- linear systems -------------------------------------------------------


@dataclass(frozen=True)
class LinSolution:
    """Solution set ``particular + span(basis)``; ``particular is None`` if inconsistent."""

    particular: tuple[RatFunc, ...] | None
    basis: tuple[tuple[RatFunc, ...], ...]
    rank: int
    unknowns: tuple[str, ...] = ()
    pivot_conditions: tuple[RatFunc, ...] = field(default=())

    @property
    def consistent(self) -> bool:
        return self.particular is not None

    @property
    def dimension(self) -> int:
        return len(self.basis) if self.consistent else -1


def _complexity(x: RatFunc) -> tuple:
    return (len(x.num._terms) + len(x.den._terms), x.num.degree() + x.den.degree())


def linsolve(
    rows: Sequence[Sequence],
    rhs: Sequence | None = None,
    unknowns: Sequence[str] | None = None,
    assumptions: Assumptions | None = None,
) -> LinSolution:
    """Solve ``rows . u = rhs`` over the rational-function field.

    Pivots are chosen deterministically, preferring ones invertible under
    ``assumptions``; any other pivot divided by is recorded in
    ``pivot_conditions`` (the solution is valid where those are nonzero).
    """
    m = len(rows)
    n = len(rows[0]) if rows else (len(unknowns) if unknowns else 0)
    a = [[rf(x) for x in row] for row in rows]
    if any(len(row) != n for row in a):
        raise ValueError("ragged coefficient matrix")
    b = [rf(x) for x in rhs] if rhs is not None else [RatFunc.zero()] * m
    unknowns = tuple(unknowns) if unknowns is not None else tuple(f"u{j + 1}" for j in range(n))
    assumptions = assumptions or Assumptions()
    pivots: list[int] = []
    conditions: list[RatFunc] = []
    r = 0
    for col in range(n):
        best = None
        for i in range(r, m):
            x = a[i][col]
            if x.is_zero():
                continue
            score = (0 if assumptions.is_unit(x) else 1, _complexity(x), i)
            if best is None or score < best[0]:
                best = (score, i)
        if best is None:
            continue
        i = best[1]
        a[r], a[i] = a[i], a[r]
        b[r], b[i] = b[i], b[r]
        piv = a[r][col]
        if not assumptions.is_unit(piv) and not piv.is_constant():
            conditions.append(piv)
        inv = piv.inverse()
        a[r] = [x * inv for x in a[r]]
        b[r] = b[r] * inv
        for k in range(m):
            if k != r and not a[k][col].is_zero():
                f = a[k][col]
                a[k] = [x - f * y for x, y in zip(a[k], a[r])]
                b[k] = b[k] - f * b[r]
        pivots.append(col)
        r += 1
        if r == m:
            break
    rank = len(pivots)
    if any(not b[i].is_zero() for i in range(rank, m)):
        return LinSolution(None, (), rank, unknowns, tuple(conditions))
    particular = [RatFunc.zero()] * n
    for i, col in enumerate(pivots):
        particular[col] = b[i]
    basis = []
    free = [j for j in range(n) if j not in pivots]
    for fcol in free:
        v = [RatFunc.zero()] * n
        v[fcol] = RatFunc.one()
        for i, col in enumerate(pivots):
            v[col] = -a[i][fcol]
        basis.append(tuple(v))
    return LinSolution(tuple(particular), tuple(basis), rank, unknowns, tuple(conditions))


def linear_system(exprs: Iterable, unknowns: Sequence[str]) -> tuple[list[list[RatFunc]], list[RatFunc]]:
    """Rows and right-hand side for ``expr = 0`` with each expr affine in ``unknowns``."""
    rows, rhs = [], []
    zero_bind = {u: RatFunc.zero() for u in unknowns}
    uset = set(unknowns)
    for e in exprs:
        e = rf(e)
        row = []
        for u in unknowns:
            coef = e.diff(u)
            if uset & set(coef.variables):
                raise ValueError(f"expression is not linear in the unknowns: {e.to_text()}")
            row.append(coef)
        rows.append(row)
        rhs.append(-e.substitute(zero_bind))
    return rows, rhs


def is_proportional(u: Sequence, v: Sequence) -> bool:
    """True iff the vectors are nonzero multiples of each other (all 2x2 minors vanish)."""
    u = [rf(x) for x in u]
    v = [rf(x) for x in v]
    if len(u) != len(v) or all(x.is_zero() for x in u) or all(x.is_zero() for x in v):
        return False
    i = next(k for k, x in enumerate(u) if not x.is_zero())
    if v[i].is_zero():
        return False
    return all((u[j] * v[i] - v[j] * u[i]).is_zero() for j in range(len(u)))
