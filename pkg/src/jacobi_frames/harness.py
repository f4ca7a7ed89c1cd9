"""Scenario registry, runners and reports.

A scenario file lists checks in order.  Each check names an operation, its
arguments, an expected value and a provenance tag.  Runners evaluate the
operation; the result is compared with the expected value after both are
parsed into the same exact type, never by string.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping

import yaml

from . import liecalc, shapecalc
from .field import NotDivisible, RatFunc, rf
from .forms import DiffForm, UsageError, coeff_of, parse_form
from .pfaffian import (
    in_solution_space,
    normalize,
    obstruction,
    prolong,
    reduce,
    restrict,
    solve_torsion,
    verify_congruence,
)
from .shapecalc import Operator3, reduce_modulo
from .spaceform import bianchi_check, build_unitary_model

PROVENANCE = ("paper", "trivial", "derived")
CURVATURE_CHOICES = {"symbolic": None, "+1": 1, "-1": -1}

FAILURE_NOTE = (
    "note: a mismatch against a [paper] expectation is a defect of this toolkit, "
    "not evidence against the source result, unless the --dump trail shows the residual."
)


class ScenarioError(ValueError):
    pass


# -- scenario model --------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    op: str
    expected: Any
    provenance: str
    args: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    paper_anchor: str
    runner: str
    checks: tuple[Check, ...]
    setup: Mapping[str, Any] = field(default_factory=dict)


def _check_from(raw: Mapping, sid: str) -> Check:
    missing = {"name", "op", "expected", "provenance"} - set(raw)
    if missing:
        raise ScenarioError(f"{sid}: check {raw.get('name')!r} lacks {sorted(missing)}")
    if raw["provenance"] not in PROVENANCE:
        raise ScenarioError(f"{sid}: bad provenance {raw['provenance']!r}")
    return Check(raw["name"], raw["op"], raw["expected"], raw["provenance"], dict(raw.get("args") or {}))


def scenario_from_mapping(raw: Mapping) -> Scenario:
    for key in ("id", "description", "paper_anchor", "runner", "checks"):
        if key not in raw:
            raise ScenarioError(f"scenario file lacks {key!r}")
    sid = raw["id"]
    if raw["runner"] not in RUNNERS:
        raise ScenarioError(f"{sid}: unknown runner {raw['runner']!r}")
    checks = tuple(_check_from(c, sid) for c in raw["checks"])
    return Scenario(sid, raw["description"], raw["paper_anchor"], raw["runner"], checks, raw.get("setup") or {})


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_mapping(yaml.safe_load(fh))


def registry(directory=None) -> dict[str, Scenario]:
    """All bundled scenarios keyed by id, sorted by id."""
    if directory is None:
        files = [f for f in resources.files("jacobi_frames").joinpath("scenarios").iterdir()
                 if f.name.endswith(".yaml")]
    else:
        files = sorted(Path(directory).glob("*.yaml"))
    out = {}
    for f in files:
        sc = scenario_from_mapping(yaml.safe_load(f.read_text(encoding="utf-8")))
        if sc.id in out:
            raise ScenarioError(f"duplicate scenario id {sc.id!r}")
        out[sc.id] = sc
    return dict(sorted(out.items()))


# -- run context -----------------------------------------------------------


class Context:
    """Curvature choice plus the dump trail of one scenario run."""

    def __init__(self, c=None):
        self.c = None if c is None else rf(c)
        self.trail: list[tuple[str, str]] = []
        # named forms (generators, pi's) usable inside expected values
        self.named: dict[str, DiffForm] = {}

    @property
    def curvature(self) -> RatFunc:
        return RatFunc.var("c") if self.c is None else self.c

    @property
    def bindings(self) -> dict:
        return {} if self.c is None else {"c": self.c}

    def dump(self, name: str, value) -> None:
        self.trail.append((name, serialize(value)))


# -- serialization and comparison ------------------------------------------


def serialize(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (DiffForm, RatFunc, Operator3, liecalc.PolyVectorField)):
        return value.to_text()
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(serialize(v) for v in value) + "]"
    return str(value)


def matches(actual, expected, ctx: Context) -> bool:
    """Exact comparison after parsing ``expected`` into the type of ``actual``."""
    if isinstance(actual, bool):
        return isinstance(expected, bool) and actual is expected
    if isinstance(actual, int):
        return not isinstance(expected, bool) and isinstance(expected, int) and actual == expected
    if isinstance(actual, str):
        return actual == str(expected)
    if isinstance(actual, RatFunc):
        return actual == RatFunc.parse(str(expected), ctx.bindings)
    if isinstance(actual, DiffForm):
        return actual == parse_form(str(expected), actual.coframe, ctx.named, ctx.bindings)
    if isinstance(actual, Operator3):
        return actual == Operator3.parse(str(expected), ctx.bindings)
    if isinstance(actual, (list, tuple)):
        if not isinstance(expected, (list, tuple)) or len(expected) != len(actual):
            return False
        return all(matches(a, e, ctx) for a, e in zip(actual, expected))
    raise ScenarioError(f"cannot compare values of type {type(actual).__name__}")


# -- runners ---------------------------------------------------------------


class PfaffianRunner:
    """Stateful pipeline: normalize, check, solve torsion, prolong, restrict, obstruct."""

    def __init__(self, scenario: Scenario, ctx: Context):
        self.ctx = ctx
        setup = scenario.setup
        variables = list(setup.get("variables", ()))
        self.space = build_unitary_model(variables, ctx.c)
        model = self.space.model
        self.named = ctx.named
        gens = []
        for name, text in _pairs(setup["generators"]):
            form = self.parse(text, model)
            gens.append((name, form))
            self.named[name] = form
        self.pi = []
        for name, text in _pairs(setup.get("pi", [])):
            form = self.parse(text, model)
            self.pi.append((name, form))
            self.named[name] = form
        assumptions = [RatFunc.parse(str(x), ctx.bindings) for x in setup.get("assume_nonzero", ())]
        self.sys = normalize(model, gens, list(setup["independence"]), assumptions)
        self.torsion = None
        for name, g in zip(self.sys.leading, self.sys.normalized):
            ctx.dump(f"normalized[{name}]", g)

    def parse(self, text: str, model=None) -> DiffForm:
        model = model or self.sys.model
        return parse_form(str(text), model.coframe, self.named, self.ctx.bindings, model)

    def run(self, check: Check):
        handler = getattr(self, "op_" + check.op, None)
        if handler is None:
            raise ScenarioError(f"unknown pfaffian operation {check.op!r}")
        return handler(**check.args)

    def op_leading(self):
        return list(self.sys.leading)

    def op_reduce(self, form):
        out = reduce(self.sys, self.parse(form))
        self.ctx.dump(f"reduce({form})", out)
        return out

    def op_congruence(self, lhs, rhs):
        out = verify_congruence(self.sys, self.parse(lhs), self.parse(rhs)).residual
        self.ctx.dump(f"residual({lhs} - ({rhs}))", out)
        return out

    def _solve(self):
        if self.torsion is None:
            self.torsion = solve_torsion(self.sys, self.pi)
        return self.torsion

    def op_torsion_rank(self):
        return self._solve().rank

    def op_kernel_dim(self):
        sol = self._solve()
        return sol.dimension if sol.consistent else -1

    def op_kernel(self, like):
        """The one kernel vector, scaled so its first nonzero entry agrees with ``like``."""
        sol = self._solve()
        if not sol.consistent or len(sol.basis) != 1:
            raise ScenarioError("kernel is not one-dimensional")
        if any(not p.is_zero() for p in sol.particular):
            raise ScenarioError("torsion equations are inhomogeneous")
        ref = [RatFunc.parse(str(x), self.ctx.bindings) for x in like]
        vec = list(sol.basis[0])
        k = next(i for i, r in enumerate(ref) if not r.is_zero())
        if vec[k].is_zero():
            return vec
        scale = ref[k] / vec[k]
        return [v * scale for v in vec]

    def op_in_kernel(self, pattern):
        vec = [RatFunc.parse(str(x), self.ctx.bindings) for x in pattern]
        return in_solution_space(self._solve(), vec)

    def op_prolong(self, var, names, pattern):
        vec = [RatFunc.parse(str(x), self.ctx.bindings) for x in pattern]
        self.sys = prolong(self.sys, self.pi, vec, var, names, torsion=self._solve())
        self.named.update(self.sys.named_forms())
        for name in names:
            self.ctx.dump(name, self.sys.generator(name))
        return list(self.sys.leading)

    def op_generator(self, name):
        return self.sys.generator(name)

    def op_obstruction(self, form):
        out = obstruction(self.sys, self.parse(form))
        self.ctx.dump(f"obstruction({form})", out)
        return out

    def op_homogeneous_degree(self, form, var):
        """Common degree in ``var`` of every coefficient, or -1 if they are not homogeneous."""
        out = obstruction(self.sys, self.parse(form))
        degrees = set()
        for coef in out.terms.values():
            for part in (coef.num, coef.den):
                ds = {dict(m).get(var, 0) for m in part.terms}
                if len(ds) != 1:
                    return -1
            degrees.add(coef.num.degree_in(var) - coef.den.degree_in(var))
        return degrees.pop() if len(degrees) == 1 else -1

    def op_restrict(self, bindings):
        self.sys = restrict(self.sys, bindings)
        self.named.update(self.sys.named_forms())
        return list(self.sys.leading)

    def op_remainder(self, form, monomial, var, modulus):
        """Coefficient of an obstruction reduced modulo a branch relation in ``var``."""
        coef = coeff_of(obstruction(self.sys, self.parse(form)), list(monomial))
        rel = RatFunc.parse(str(modulus), self.ctx.bindings)
        out = reduce_modulo(coef, var, rel)
        self.ctx.dump(f"remainder({form}; {modulus})", out)
        return out

    def op_quotient(self, form, monomial, subtract, divisor):
        """``(coefficient - subtract) / divisor``; an error if not exact."""
        coef = coeff_of(obstruction(self.sys, self.parse(form)), list(monomial))
        diff = coef - RatFunc.parse(str(subtract), self.ctx.bindings)
        div = RatFunc.parse(str(divisor), self.ctx.bindings)
        if not div.is_polynomial():
            raise ScenarioError("divisor must be a polynomial")
        try:
            return RatFunc(diff.num.divexact(div.num), diff.den)
        except NotDivisible:
            raise ScenarioError("difference is not divisible by the branch polynomial") from None


def _pairs(items):
    if isinstance(items, Mapping):
        return list(items.items())
    return [tuple(x) for x in items]


CalcOp = Callable[..., Any]
CALC_OPS: dict[str, CalcOp] = {}


def calc_op(name: str):
    def deco(fn):
        CALC_OPS[name] = fn
        return fn
    return deco


def _shape(kind: str) -> Operator3:
    if kind == "nonhopf":
        return shapecalc.nonhopf_shape()
    if kind == "hopf":
        return shapecalc.hopf_shape()
    raise ScenarioError(f"unknown shape {kind!r}")


@calc_op("structure_jacobi")
def _op_structure_jacobi(ctx, shape):
    out = shapecalc.structure_jacobi(_shape(shape), ctx.curvature)
    ctx.dump(f"R_W[{shape}]", out)
    return out


@calc_op("rw_self_adjoint")
def _op_rw_self_adjoint(ctx, shape):
    return shapecalc.structure_jacobi(_shape(shape), ctx.curvature).is_self_adjoint()


@calc_op("rw_kills_w")
def _op_rw_kills_w(ctx):
    A = shapecalc.generic_symmetric("s")
    return shapecalc.structure_jacobi(A, ctx.curvature).apply(shapecalc.W).is_zero()


@calc_op("trace_square_identity")
def _op_trace_square(ctx):
    return shapecalc.prop31_step(shapecalc.generic_symmetric("r"))


@calc_op("nilpotent_example_not_symmetric")
def _op_nilpotent_example(ctx):
    """A nonzero square-zero operator exists, so self-adjointness is essential."""
    n = Operator3(((0, 1, 0), (0, 0, 0), (0, 0, 0)))
    return (n @ n).is_zero() and not n.is_zero() and not n.is_self_adjoint()


def _finding(report, name: str) -> bool:
    for f in report.findings:
        if f.name == name:
            return f.passed
    raise ScenarioError(f"no finding named {name!r}")


@calc_op("prop33_finding")
def _op_prop33_finding(ctx, name):
    return _finding(shapecalc.prop33_conditions(c=ctx.curvature), name)


@calc_op("prop33_solution")
def _op_prop33_solution(ctx, var):
    return shapecalc.prop33_conditions(c=ctx.curvature).data["solution"][var]


@calc_op("bridge_residual")
def _op_bridge_residual(ctx):
    lhs, rhs = shapecalc.bridge_identity(shapecalc.generic_symmetric("r"), shapecalc.generic_symmetric("s"))
    out = lhs - rhs
    ctx.dump("M - M^T - [R,[phi,A]]", out)
    return out


@calc_op("bridge_symbol_count")
def _op_bridge_symbols(ctx):
    names = set()
    for op in (shapecalc.generic_symmetric("r"), shapecalc.generic_symmetric("s")):
        for row in op.entries:
            for x in row:
                names |= set(x.variables)
    return len(names)


@calc_op("prop42_finding")
def _op_prop42_finding(ctx, name):
    return _finding(shapecalc.prop42_derivation(c=ctx.curvature), name)


@calc_op("prop42_data")
def _op_prop42_data(ctx, key):
    out = shapecalc.prop42_derivation(c=ctx.curvature).data[key]
    ctx.dump(key, out)
    return out


@calc_op("double_comm")
def _op_double_comm(ctx, shape):
    A = _shape(shape)
    out = shapecalc.double_comm(shapecalc.structure_jacobi(A, ctx.curvature), A)
    ctx.dump(f"[R_W,[phi,A]][{shape}]", out)
    return out


@calc_op("prop44_finding")
def _op_prop44_finding(ctx, name):
    return _finding(shapecalc.prop44_cases(c=ctx.curvature), name)


@calc_op("hopf_k")
def _op_hopf_k(ctx, case):
    """The constant k with R_W = k on W-perp, verified on the case before returning it."""
    c = ctx.curvature
    cases = shapecalc.hopf_cases(c)
    report = shapecalc.prop44_cases(c)
    hc = cases[case]
    if not _finding(report, f"[{hc.label}] R_W = k on W-perp"):
        raise ScenarioError(f"R_W is not scalar on W-perp in case {hc.label!r}")
    return report.data["k"][hc.label]


@calc_op("eq14")
def _op_eq14(ctx):
    return shapecalc.eq14_value(RatFunc.var("l"), RatFunc.var("n"), RatFunc.var("k"))


@calc_op("eq15_battery")
def _op_eq15_battery(ctx, seed, count):
    """Number of random instances with zero residual."""
    good = 0
    for k, inst in enumerate(liecalc.battery(seed, count)):
        res = liecalc.eq15_check(*inst)
        if res.passed:
            good += 1
        else:
            ctx.dump(f"residual[{k}]", res.residual)
    return good


@calc_op("tau_step")
def _op_tau_step(ctx, dimension, degree):
    n = dimension
    tau = liecalc.generic_poly(n, degree, "t")
    res = liecalc.tau_step(tau, liecalc.generic_field(n, degree, "v"), liecalc.generic_field(n, degree, "y"))
    ctx.dump("tau step residual", res.residual)
    return res.passed


@calc_op("constant_multiple_invariant")
def _op_constant_multiple(ctx, seed, count):
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(2, 4)
        T = liecalc.PolyTensor11.scalar(n, rng.randint(-9, 9))
        X = liecalc.random_field(rng, n, 3)
        Y = liecalc.random_field(rng, n, 3)
        if not liecalc.lie_deriv_tensor(X, T, Y).is_zero():
            return False
    return True


@calc_op("scalar_rw_vanishes")
def _op_scalar_rw_vanishes(ctx):
    """R_W = tau * I together with R_W W = 0 forces tau = 0."""
    tau = RatFunc.var("t")
    value = Operator3.diag(tau, tau, tau).apply(shapecalc.W)[0]
    rw_w = shapecalc.structure_jacobi(shapecalc.generic_symmetric("s"), ctx.curvature).apply(shapecalc.W)
    return rw_w.is_zero() and value == tau


@calc_op("bianchi_group")
def _op_bianchi_group(ctx, group):
    report = bianchi_check(build_unitary_model(c=ctx.c))
    selected = [ch for ch in report.checks if group in ch.name]
    if not selected:
        raise ScenarioError(f"no identities match {group!r}")
    for ch in selected:
        if not ch.passed:
            ctx.trail.append((ch.name, ch.residual))
    return all(ch.passed for ch in selected)


@calc_op("bianchi_count")
def _op_bianchi_count(ctx):
    return len(bianchi_check(build_unitary_model(c=ctx.c)).checks)


class CalcRunner:
    def __init__(self, scenario: Scenario, ctx: Context):
        self.ctx = ctx

    def run(self, check: Check):
        fn = CALC_OPS.get(check.op)
        if fn is None:
            raise ScenarioError(f"unknown operation {check.op!r}")
        return fn(self.ctx, **check.args)


RUNNERS = {"pfaffian": PfaffianRunner, "calc": CalcRunner}


# -- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class CheckRecord:
    name: str
    status: str
    expected: str
    actual: str
    ms: float
    provenance: str


@dataclass(frozen=True)
class Report:
    scenario: str
    paper_anchor: str
    checks: tuple[CheckRecord, ...]
    trail: tuple[tuple[str, str], ...] = ()

    @property
    def status(self) -> str:
        return "pass" if self.checks and all(c.status == "pass" for c in self.checks) else "fail"

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "paper_anchor": self.paper_anchor,
            "checks": [
                {"name": c.name, "status": c.status, "expected": c.expected, "actual": c.actual, "ms": c.ms}
                for c in self.checks
            ],
            "status": self.status,
        }

    def to_text(self) -> str:
        lines = [f"== {self.scenario}: {self.status.upper()}  ({self.paper_anchor})"]
        for c in self.checks:
            lines.append(f"  [{c.status}] {c.name}  [{c.provenance}]  {c.ms:.1f} ms")
            if c.status != "pass":
                lines.append(f"      expected: {c.expected}")
            lines.append(f"      actual:   {c.actual}")
        if self.status != "pass":
            lines.append("  " + FAILURE_NOTE)
        return "\n".join(lines)


def _expected_text(expected) -> str:
    if isinstance(expected, (list, tuple)):
        return "[" + ", ".join(_expected_text(e) for e in expected) + "]"
    return serialize(expected)


def run_scenario(scenario: Scenario, c=None, timing: bool = True) -> Report:
    ctx = Context(c)
    records = []
    runner = None
    setup_error = None
    try:
        runner = RUNNERS[scenario.runner](scenario, ctx)
    except (ArithmeticError, ValueError, KeyError) as exc:
        setup_error = f"setup failed: {type(exc).__name__}: {exc}"
    for check in scenario.checks:
        expected = _expected_text(check.expected)
        start = time.perf_counter()
        if runner is None:
            status, actual = "error", setup_error
        else:
            try:
                value = runner.run(check)
                actual = serialize(value)
                status = "pass" if matches(value, check.expected, ctx) else "fail"
            except (ArithmeticError, ValueError, KeyError, TypeError, StopIteration) as exc:
                status, actual = "error", f"{type(exc).__name__}: {exc}"
        ms = round((time.perf_counter() - start) * 1000, 3) if timing else 0.0
        records.append(CheckRecord(check.name, status, expected, actual, ms, check.provenance))
    return Report(scenario.id, scenario.paper_anchor, tuple(records), tuple(ctx.trail))


def write_dump(report: Report, directory) -> Path:
    """One text file per scenario; each intermediate on its own ``name: form`` line."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    path = root / f"{report.scenario}.txt"
    body = [f"{name}: {text}" for name, text in report.trail]
    body += [f"check {c.name}: {c.actual}" for c in report.checks]
    path.write_text("\n".join(body) + "\n", encoding="utf-8")
    return path


__all__ = [
    "CALC_OPS",
    "CURVATURE_CHOICES",
    "Check",
    "CheckRecord",
    "Context",
    "FAILURE_NOTE",
    "Report",
    "Scenario",
    "ScenarioError",
    "UsageError",
    "load_scenario",
    "matches",
    "registry",
    "run_scenario",
    "serialize",
    "write_dump",
]
