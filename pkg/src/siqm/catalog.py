"""Registry of additive shape-invariant superpotentials.

Each entry carries W(x, a) in terms of the shifted parameter ``a`` (so the
partner step is always a -> a + hbar), the additive function g(a), the
auxiliary parameters it needs and the spatial domain.  The ten conventional
(hbar-independent) superpotentials are built in; the hbar-dependent
extension of Morse comes from :func:`make_extended_morse`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import symexpr as sx
from .symexpr import DomainError, Expression

__all__ = [
    "CatalogError", "ConstraintError", "Constraint", "Domain",
    "AdditiveParametrization", "SuperpotentialEntry", "ResidualReport",
    "NAMES", "CONVENTIONAL", "get_entry", "make_extended_morse",
    "custom_entry", "validate_conventional", "catalog_document",
]


class CatalogError(KeyError):
    def __str__(self):
        return self.args[0]


class ConstraintError(ValueError):
    def __init__(self, entry, constraint, values):
        shown = ", ".join(f"{k}={values[k]:g}" for k in sorted(constraint.names) if k in values)
        super().__init__(f"{entry}: constraint '{constraint.text}' violated ({shown})")
        self.constraint = constraint


@dataclass(frozen=True)
class Constraint:
    """Strict or non-strict inequality between two expressions, e.g. ``Q > 0``."""

    text: str

    @cached_property
    def _parts(self):
        m = re.fullmatch(r"(.+?)(>=|<=|>|<)(.+)", self.text)
        if m is None:
            raise ValueError(f"not an inequality: {self.text!r}")
        return sx.parse(m.group(1)), m.group(2), sx.parse(m.group(3))

    @property
    def names(self):
        lhs, _, rhs = self._parts
        return sx.free_parameters(lhs) | sx.free_parameters(rhs)

    def holds(self, values) -> bool:
        lhs, op, rhs = self._parts
        u = sx.evaluate(lhs, 0.0, values)
        v = sx.evaluate(rhs, 0.0, values)
        return {">": u > v, ">=": u >= v, "<": u < v, "<=": u <= v}[op]


@dataclass(frozen=True)
class Domain:
    lo: float
    hi: float
    label: str

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all((x > self.lo) & (x < self.hi)))

    @property
    def infinite_ends(self):
        return tuple(s for s, v in ((-1, self.lo), (1, self.hi)) if math.isinf(v))


REAL_LINE = Domain(-math.inf, math.inf, "x in (-inf, inf)")
HALF_LINE = Domain(0.0, math.inf, "r in (0, inf)")


@dataclass(frozen=True)
class AdditiveParametrization:
    """How the tabulated amplitude maps onto the shifted parameter ``a``."""

    kind: str       # "inert", "direct" or "reflected"
    relation: str   # e.g. "A = alpha - a"
    table_form: str  # superpotential as tabulated, in its own symbols

    shift = "a -> a + hbar"


@dataclass(frozen=True)
class SuperpotentialEntry:
    name: str
    W: Expression
    g: Expression
    aux: dict
    domain: Domain
    parametrization: AdditiveParametrization
    constraints: tuple = ()
    hbar_dependent: bool = False
    default_a: float = 1.0
    default_hbar: float = 1.0
    x_sample: tuple = (-4.0, 4.0)
    a_sample: tuple = (0.5, 3.0)
    notes: str = ""

    # cached derivative trees; excluded from equality
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def binding(self, a, hbar=None):
        b = dict(self.aux)
        b["a"] = a
        if self.hbar_dependent:
            b["hbar"] = self.default_hbar if hbar is None else hbar
        return b

    def derivative(self, *wrt):
        """W differentiated successively by each name in ``wrt`` (cached)."""
        if wrt not in self._cache:
            e = self.W
            for v in wrt:
                e = sx.differentiate(e, v)
            self._cache[wrt] = e
        return self._cache[wrt]

    def W_at(self, x, a, hbar=None):
        return sx.evaluate(self.W, x, self.binding(a, hbar))

    def dWdx_at(self, x, a, hbar=None):
        return sx.evaluate(self.derivative("x"), x, self.binding(a, hbar))

    def g_at(self, a):
        return sx.evaluate(self.g, 0.0, self.binding(a, self.default_hbar))

    def violations(self, a=None):
        """Constraints that fail for the given ``a`` (aux-only ones if ``a`` is None)."""
        values = self.binding(self.default_a if a is None else a)
        out = []
        for c in self.constraints:
            if a is None and "a" in c.names:
                continue
            if not c.holds(values):
                out.append(c)
        return out

    def require(self, a=None):
        bad = self.violations(a)
        if bad:
            raise ConstraintError(self.name, bad[0], self.binding(self.default_a if a is None else a))

    def sample_points(self, rng, n):
        x = rng.uniform(*self.x_sample, size=n)
        a = rng.uniform(*self.a_sample, size=n)
        return list(zip(x.tolist(), a.tolist()))

    def to_json(self):
        return {
            "name": self.name,
            "W": sx.to_text(self.W),
            "g": sx.to_text(self.g),
            "aux": dict(self.aux),
            "constraints": [c.text for c in self.constraints],
            "domain": self.domain.label,
            "parametrization": {
                "kind": self.parametrization.kind,
                "relation": self.parametrization.relation,
                "table_form": self.parametrization.table_form,
                "shift": self.parametrization.shift,
            },
            "hbar_dependent": self.hbar_dependent,
        }


# ---------------------------------------------------------------------------
# conventional entries

_HALF_PI = math.pi / 2

# name: (W, g, aux defaults, constraints, domain, parametrization, extras)
_TABLE = {
    "harmonic": dict(
        W="omega * x / 2", g="omega * a",
        aux={"omega": 2.0}, constraints=("omega > 0",), domain=REAL_LINE,
        par=("inert", "a does not enter W", "omega*x/2"),
        x_sample=(-5.0, 5.0), a_sample=(0.0, 3.0), default_a=0.0,
    ),
    "coulomb": dict(
        W="e2 / (2 * a) - a / x", g="-e2 ^ 2 / (4 * a ^ 2)",
        aux={"e2": 1.0}, constraints=("e2 > 0", "a > 0"), domain=HALF_LINE,
        par=("direct", "a = l + 1", "e2/(2*(l+1)) - (l+1)/r"),
        x_sample=(0.2, 10.0), a_sample=(0.5, 4.0),
    ),
    "oscillator3d": dict(
        W="omega * x / 2 - a / x", g="2 * omega * a",
        aux={"omega": 2.0}, constraints=("omega > 0", "a > 0"), domain=HALF_LINE,
        par=("direct", "a = l + 1", "omega*r/2 - (l+1)/r"),
        x_sample=(0.2, 6.0), a_sample=(0.5, 4.0),
    ),
    "morse": dict(
        W="(alpha - a) - B * exp(-x)", g="-(alpha - a) ^ 2",
        aux={"alpha": 5.0, "B": 1.0}, constraints=("B > 0", "alpha - a > 0"),
        domain=REAL_LINE,
        par=("reflected", "A = alpha - a", "A - B*exp(-x)"),
        x_sample=(-3.0, 5.0), a_sample=(2.0, 4.5), default_a=2.0,
    ),
    "rosen-morse-1": dict(
        W="-a * cot(x) - B / a", g="a ^ 2 - B ^ 2 / a ^ 2",
        aux={"B": 1.0}, constraints=("a > 0",),
        domain=Domain(0.0, math.pi, "x in (0, pi)"),
        par=("direct", "A = a", "-A*cot(x) - B/A"),
        x_sample=(0.3, math.pi - 0.3), a_sample=(0.5, 3.0),
    ),
    "rosen-morse-2": dict(
        W="(alpha - a) * tanh(x) + B / (alpha - a)",
        g="-(alpha - a) ^ 2 - B ^ 2 / (alpha - a) ^ 2",
        aux={"alpha": 5.0, "B": 1.0},
        constraints=("alpha - a > 0", "(alpha - a) ^ 2 - B > 0", "(alpha - a) ^ 2 + B > 0"),
        domain=REAL_LINE,
        par=("reflected", "A = alpha - a", "A*tanh(x) + B/A"),
        x_sample=(-4.0, 4.0), a_sample=(2.0, 4.5), default_a=2.0,
    ),
    "eckart": dict(
        W="-a * coth(x) + B / a", g="-a ^ 2 - B ^ 2 / a ^ 2",
        aux={"B": 5.0}, constraints=("a > 0", "B - a ^ 2 > 0"), domain=HALF_LINE,
        par=("direct", "A = a", "-A*coth(r) + B/A"),
        x_sample=(0.2, 5.0), a_sample=(0.5, 3.0),
    ),
    "scarf-1": dict(
        W="a * tan(x) - B * sec(x)", g="a ^ 2",
        aux={"B": 1.0}, constraints=("a - B > 0", "a + B > 0"),
        domain=Domain(-_HALF_PI, _HALF_PI, "x in (-pi/2, pi/2)"),
        par=("direct", "A = a", "A*tan(x) - B*sec(x)"),
        x_sample=(-1.2, 1.2), a_sample=(0.5, 3.0), default_a=2.0,
    ),
    "scarf-2": dict(
        W="(alpha - a) * tanh(x) + B * sech(x)", g="-(alpha - a) ^ 2",
        aux={"alpha": 5.0, "B": 1.0}, constraints=("alpha - a > 0",),
        domain=REAL_LINE,
        par=("reflected", "A = alpha - a", "A*tanh(x) + B*sech(x)"),
        x_sample=(-4.0, 4.0), a_sample=(2.0, 4.5), default_a=2.0,
    ),
    "gen-poschl-teller": dict(
        W="(alpha - a) * coth(x) - B * csch(x)", g="-(alpha - a) ^ 2",
        aux={"alpha": 5.0, "B": 6.0},
        constraints=("alpha - a > 0", "B - (alpha - a) > 0"), domain=HALF_LINE,
        par=("reflected", "A = alpha - a", "A*coth(r) - B*csch(r)"),
        x_sample=(0.2, 5.0), a_sample=(2.0, 4.5), default_a=2.0,
    ),
}

CONVENTIONAL = tuple(_TABLE)
NAMES = CONVENTIONAL + ("extended-morse",)

EXTENDED_MORSE_W = (
    "(alpha - a) - exp(-x)"
    " + hbar ^ 2 * (2 * P * exp(x) - 2 * (alpha - a) * Q + Q * exp(-x))"
    " / (exp(2 * x) + Q * hbar ^ 2)"
)
MORSE_G = "-(alpha - a) ^ 2"


def _build(name, spec, aux):
    unknown = set(aux) - set(spec["aux"])
    if unknown:
        raise CatalogError(f"{name}: unknown parameter(s) {', '.join(sorted(unknown))}")
    values = {**spec["aux"], **{k: float(v) for k, v in aux.items()}}
    entry = SuperpotentialEntry(
        name=name,
        W=sx.parse(spec["W"]),
        g=sx.parse(spec["g"]),
        aux=values,
        domain=spec["domain"],
        parametrization=AdditiveParametrization(*spec["par"]),
        constraints=tuple(Constraint(c) for c in spec["constraints"]),
        default_a=spec.get("default_a", 1.0),
        x_sample=spec["x_sample"],
        a_sample=spec["a_sample"],
    )
    entry.require()
    return entry


def get_entry(name: str, aux: dict | None = None) -> SuperpotentialEntry:
    """Look up a catalog entry, binding auxiliary parameters over the defaults.

    Raises :class:`CatalogError` for an unknown name or parameter and
    :class:`ConstraintError` when an auxiliary constraint (one not involving
    ``a``) fails.
    """
    aux = dict(aux or {})
    if name == "extended-morse":
        unknown = set(aux) - {"P", "Q", "alpha", "hbar"}
        if unknown:
            raise CatalogError(f"{name}: unknown parameter(s) {', '.join(sorted(unknown))}")
        return make_extended_morse(
            aux.get("P", 3.0), aux.get("Q", 5.0), aux.get("alpha", 5.0), aux.get("hbar", 1.0)
        )
    if name not in _TABLE:
        raise CatalogError(f"unknown catalog entry {name!r}; choose from {', '.join(NAMES)}")
    return _build(name, _TABLE[name], aux)


def make_extended_morse(P: float, Q: float, alpha: float, hbar: float = 1.0) -> SuperpotentialEntry:
    """Extended Morse superpotential with free deformation parameters P and Q.

    W(x, a, hbar) = (alpha - a) - exp(-x)
        + hbar^2 (2 P e^x - 2 (alpha - a) Q + Q e^-x) / (e^{2x} + Q hbar^2),
    shape invariant under a -> a + hbar with g(a) = -(alpha - a)^2.  ``hbar``
    sets the default used when callers do not pass one.
    """
    if not Q > 0:
        raise ConstraintError("extended-morse", Constraint("Q > 0"), {"Q": Q})
    if not hbar > 0:
        raise ConstraintError("extended-morse", Constraint("hbar > 0"), {"hbar": hbar})
    return SuperpotentialEntry(
        name="extended-morse",
        W=sx.parse(EXTENDED_MORSE_W),
        g=sx.parse(MORSE_G),
        aux={"P": float(P), "Q": float(Q), "alpha": float(alpha)},
        domain=REAL_LINE,
        parametrization=AdditiveParametrization(
            "reflected", "A = alpha - a", "Morse kernel A - exp(-x) plus hbar^2 terms"
        ),
        constraints=(Constraint("Q > 0"), Constraint("alpha - a > 0")),
        hbar_dependent=True,
        default_a=2.0,
        default_hbar=float(hbar),
        x_sample=(-4.0, 8.0),
        a_sample=(alpha - 4.0, alpha - 0.5),
    )


def custom_entry(name, W, g, aux=None, domain=REAL_LINE, hbar_dependent=None, default_a=1.0):
    """Entry from user-supplied W and g text (no admissibility constraints)."""
    W = sx.parse(W) if isinstance(W, str) else W
    g = sx.parse(g) if isinstance(g, str) else g
    aux = {k: float(v) for k, v in (aux or {}).items()}
    if hbar_dependent is None:
        hbar_dependent = "hbar" in sx.free_parameters(W) | sx.free_parameters(g)
    missing = (sx.free_parameters(W) | sx.free_parameters(g)) - set(aux) - {"a", "hbar"}
    if missing:
        raise CatalogError(f"{name}: unbound parameter(s) {', '.join(sorted(missing))}")
    return SuperpotentialEntry(
        name=name, W=W, g=g, aux=aux, domain=domain,
        parametrization=AdditiveParametrization("custom", "user supplied", sx.to_text(W)),
        hbar_dependent=hbar_dependent, default_a=default_a,
    )


def catalog_document():
    """JSON-ready list of every entry at its default parameters."""
    return [get_entry(n).to_json() for n in NAMES]


# ---------------------------------------------------------------------------
# PDE gate for conventional entries


@dataclass
class ResidualReport:
    name: str
    pde1_max: float
    pde3_max: float
    n_samples: int
    flagged: list
    tol: float

    @property
    def passed(self):
        return (
            self.n_samples > len(self.flagged)
            and self.pde1_max < self.tol
            and self.pde3_max < self.tol
        )

    def to_json(self):
        return {
            "name": self.name,
            "pde1_max": self.pde1_max,
            "pde3_max": self.pde3_max,
            "n_samples": self.n_samples,
            "flagged": [list(s) for s in self.flagged],
            "tol": self.tol,
            "passed": self.passed,
        }


def validate_conventional(entry: SuperpotentialEntry, samples, tol=1e-10) -> ResidualReport:
    """Check W dW/da - dW/dx + g'(a)/2 = 0 and d^3W/da^2 dx = 0 at samples.

    Samples that hit a pole are listed in ``flagged`` and skipped.
    """
    if entry.hbar_dependent:
        raise ValueError(f"{entry.name} depends on hbar; use the series checks instead")
    pde1 = sx.sub(
        sx.add(sx.mul(entry.W, entry.derivative("a")), sx.mul(sx.Const(0.5), sx.differentiate(entry.g, "a"))),
        entry.derivative("x"),
    )
    pde3 = entry.derivative("a", "a", "x")
    r1, r3, flagged = [], [], []
    for x, a in samples:
        values = entry.binding(a)
        try:
            r1.append(abs(sx.evaluate(pde1, x, values)))
            r3.append(abs(sx.evaluate(pde3, x, values)))
        except DomainError:
            flagged.append((x, a))
    return ResidualReport(
        entry.name,
        max(r1, default=math.inf),
        max(r3, default=math.inf),
        len(samples),
        flagged,
        tol,
    )
