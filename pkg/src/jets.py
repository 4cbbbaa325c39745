"""Truncated power series (jets) in deformation parameters.

A :class:`JetRing` models the order-n infinitesimal neighborhood of the base:
polynomials in the parameters t_1..t_s and their formal conjugates ~t_1..~t_s
modulo all monomials of total degree > n. Coefficients are Gaussian rationals.

Jets are stored as sympy ``PolyElement`` values over ``QQ_I``; every
operation re-truncates so that no term of degree > n is ever kept.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import Symbol
from sympy.polys.domains import QQ_I
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyRing

from src import CONJ_PREFIX
from src.errors import ArithmeticFault, PreconditionError, SchemaError
from src.scalars import ZERO, ScalarLike, conjugate, format_scalar, to_scalar

Exponent = Tuple[int, ...]


def conj_name(name: str) -> str:
    """Name of the formal conjugate partner of a variable."""
    if name.startswith(CONJ_PREFIX):
        return name[len(CONJ_PREFIX):]
    return f"{CONJ_PREFIX}{name}"


class JetRing:
    """The ring C[t, ~t] / m^(n+1) with a conjugation involution.

    Args:
        params: Ordered parameter names t_1..t_s
        order: Truncation degree n
    """

    def __init__(self, params: Sequence[str], order: int):
        params = tuple(params)
        if len(params) < 1:
            raise SchemaError("A jet ring needs at least one parameter")
        if order < 0:
            raise SchemaError(f"Jet order must be >= 0, got {order}")
        if len(set(params)) != len(params):
            raise SchemaError(f"Duplicate parameter names in {list(params)}")
        for name in params:
            if not name or name.startswith(CONJ_PREFIX):
                raise SchemaError(f"Invalid parameter name {name!r}")
        self.params = params
        self.order = order
        self.variables = params + tuple(conj_name(p) for p in params)
        self._index = {v: i for i, v in enumerate(self.variables)}
        self.poly_ring = PolyRing([Symbol(v) for v in self.variables], QQ_I, lex)
        s = len(params)
        self._conj_perm = tuple(list(range(s, 2 * s)) + list(range(s)))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JetRing)
            and self.params == other.params
            and self.order == other.order
        )

    def __hash__(self) -> int:
        return hash((self.params, self.order))

    def __repr__(self) -> str:
        return f"JetRing({list(self.params)}, order={self.order})"

    @property
    def num_params(self) -> int:
        return len(self.params)

    def with_order(self, order: int) -> "JetRing":
        return JetRing(self.params, order)

    def index(self, name: str) -> int:
        if name not in self._index:
            raise PreconditionError(f"Unknown jet variable {name!r} (ring has {list(self.variables)})")
        return self._index[name]

    def conj_index(self, i: int) -> int:
        return self._conj_perm[i]

    @property
    def zero(self) -> "Jet":
        return Jet(self, self.poly_ring.zero)

    @property
    def one(self) -> "Jet":
        return Jet(self, self.poly_ring.one)

    def constant(self, value: ScalarLike) -> "Jet":
        return Jet(self, self.poly_ring.ground_new(to_scalar(value)))

    def gen(self, name: str) -> "Jet":
        """The jet of a single variable (zero in the order-0 ring)."""
        return Jet.from_dict(self, {self.monomial({name: 1}): QQ_I.one})

    def monomial(self, powers: Mapping[str, int]) -> Exponent:
        """Exponent tuple for a {variable: power} mapping."""
        exp = [0] * len(self.variables)
        for name, power in powers.items():
            if not isinstance(power, int) or power < 0:
                raise SchemaError(f"Invalid exponent {power!r} for {name!r}")
            exp[self.index(name)] += power
        return tuple(exp)

    def monomial_powers(self, exp: Exponent) -> Dict[str, int]:
        return {self.variables[i]: e for i, e in enumerate(exp) if e}

    def monomials(self, degree: int, variables: Optional[Iterable[int]] = None) -> List[Exponent]:
        """All exponents of exactly the given total degree, in lex order.

        Args:
            degree: Total degree
            variables: Variable indices allowed to appear (default: all)
        """
        allowed = sorted(variables) if variables is not None else list(range(len(self.variables)))
        out: List[Exponent] = []

        def build(pos: int, remaining: int, exp: List[int]):
            if pos == len(allowed):
                if remaining == 0:
                    out.append(tuple(exp))
                return
            for e in range(remaining, -1, -1):
                exp[allowed[pos]] = e
                build(pos + 1, remaining - e, exp)
            exp[allowed[pos]] = 0

        build(0, degree, [0] * len(self.variables))
        return out


class Jet:
    """An element of a :class:`JetRing`; immutable."""

    __slots__ = ("ring", "poly")

    def __init__(self, ring: JetRing, poly):
        self.ring = ring
        self.poly = poly

    @classmethod
    def from_dict(cls, ring: JetRing, terms: Mapping[Exponent, ScalarLike]) -> "Jet":
        """Build a jet from {exponent: coefficient}, truncating to the ring order."""
        clean = {}
        for exp, coeff in terms.items():
            coeff = to_scalar(coeff)
            if coeff and sum(exp) <= ring.order:
                clean[exp] = coeff
        return cls(ring, ring.poly_ring.from_dict(clean) if clean else ring.poly_ring.zero)

    def _wrap(self, poly) -> "Jet":
        return Jet(self.ring, _truncate_poly(self.ring, poly, self.ring.order))

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.ring != self.ring:
                raise ArithmeticFault(f"Ring mismatch: {self.ring} vs {other.ring}")
            return other
        return self.ring.constant(other)

    def __add__(self, other) -> "Jet":
        return Jet(self.ring, self.poly + self._coerce(other).poly)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return Jet(self.ring, self.poly - self._coerce(other).poly)

    def __rsub__(self, other) -> "Jet":
        return Jet(self.ring, self._coerce(other).poly - self.poly)

    def __neg__(self) -> "Jet":
        return Jet(self.ring, -self.poly)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.ring, self.poly * to_scalar(other))
        other = self._coerce(other)
        if self.poly.is_ground or other.poly.is_ground:
            return Jet(self.ring, self.poly * other.poly)
        return self._wrap(self.poly * other.poly)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, Jet):
            return self.ring == other.ring and self.poly == other.poly
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ring, tuple(sorted(self.poly.items()))))

    def __bool__(self) -> bool:
        return bool(self.poly)

    def __repr__(self) -> str:
        return f"Jet({format_jet(self)})"

    def terms(self) -> List[Tuple[Exponent, object]]:
        """(exponent, coefficient) pairs sorted by (degree, exponent descending)."""
        return sorted(self.poly.items(), key=lambda item: (sum(item[0]), tuple(-e for e in item[0])))

    @property
    def is_constant(self) -> bool:
        return self.poly.is_ground

    def constant_term(self):
        return self.poly.coeff(1) if self.poly else ZERO

    def coefficient(self, exp: Exponent):
        return dict(self.poly.items()).get(tuple(exp), ZERO)

    def degree_part(self, degree: int) -> "Jet":
        return Jet.from_dict(self.ring, {e: c for e, c in self.poly.items() if sum(e) == degree})

    def truncated(self, degree: int) -> "Jet":
        """Drop terms of degree > ``degree`` while staying in the same ring."""
        return Jet(self.ring, _truncate_poly(self.ring, self.poly, degree))

    def max_degree(self) -> int:
        return max((sum(e) for e in self.poly.keys()), default=-1)

    def min_degree(self) -> int:
        return min((sum(e) for e in self.poly.keys()), default=-1)

    @property
    def is_holomorphic(self) -> bool:
        s = self.ring.num_params
        return all(not any(e[s:]) for e in self.poly.keys())

    def variables_used(self) -> set:
        return {i for e in self.poly.keys() for i, k in enumerate(e) if k}

    def conj(self) -> "Jet":
        return jet_conj(self)

    def derive(self, u: "Direction") -> "Jet":
        return jet_derive(self, u)

    def lift(self, ring: JetRing) -> "Jet":
        """Re-embed into a ring with the same variables and a possibly different order."""
        if ring.params != self.ring.params:
            raise ArithmeticFault(f"Cannot move jet from {self.ring} to {ring}")
        return Jet.from_dict(ring, dict(self.poly.items()))


def _truncate_poly(ring: JetRing, poly, degree: int):
    if all(sum(e) <= degree for e in poly.keys()):
        return poly
    kept = {e: c for e, c in poly.items() if sum(e) <= degree}
    return ring.poly_ring.from_dict(kept) if kept else ring.poly_ring.zero


@dataclass(frozen=True)
class Direction:
    """A tangent direction sum c_v d/dv on the base."""

    coeffs: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {v: to_scalar(c) for v, c in self.coeffs.items()}
        clean = {v: c for v, c in clean.items() if c}
        if not clean:
            raise PreconditionError("A direction needs at least one nonzero coefficient")
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def coordinate(cls, name: str) -> "Direction":
        return cls({name: 1})

    def label(self) -> str:
        parts = []
        for name in sorted(self.coeffs):
            c = self.coeffs[name]
            parts.append(name if c == QQ_I.one else f"{format_scalar(c)}*{name}")
        return "+".join(parts)

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.coeffs.items())))


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated product; raises ArithmeticFault on a ring mismatch."""
    if not isinstance(b, Jet) or a.ring != b.ring:
        raise ArithmeticFault(f"Ring mismatch in jet_mul: {a.ring} vs {getattr(b, 'ring', b)}")
    return a * b


def jet_derive(a: Jet, u: Direction) -> Jet:
    """Apply the derivation sum c_v d/dv term-wise."""
    ring = a.ring
    result = ring.poly_ring.zero
    for name, coeff in u.coeffs.items():
        idx = ring.index(name)
        result += a.poly.diff(ring.poly_ring.gens[idx]) * coeff
    return Jet(ring, result)


def jet_truncate(a: Jet, m: int) -> Jet:
    """The quotient map onto the order-m ring."""
    if m > a.ring.order:
        raise PreconditionError(f"Cannot truncate an order-{a.ring.order} jet to order {m}")
    if m < 0:
        raise PreconditionError(f"Truncation order must be >= 0, got {m}")
    target = a.ring.with_order(m)
    return Jet.from_dict(target, dict(a.poly.items()))


def jet_conj(a: Jet) -> Jet:
    """Conjugate coefficients and swap each variable with its partner."""
    ring = a.ring
    perm = ring._conj_perm
    swapped = {}
    for exp, coeff in a.poly.items():
        new_exp = [0] * len(exp)
        for i, e in enumerate(exp):
            new_exp[perm[i]] = e
        swapped[tuple(new_exp)] = conjugate(coeff)
    return Jet.from_dict(ring, swapped)


def jet_eval(a: Jet, point: Mapping[str, object], allow_inconsistent: bool = False):
    """Evaluate a jet at a point.

    Args:
        a: Jet to evaluate
        point: Value for every ring variable
        allow_inconsistent: Skip the check that ~t takes the conjugate value of t

    Returns:
        The exact Gaussian-rational value
    """
    ring = a.ring
    missing = [v for v in ring.variables if v not in point]
    if missing:
        raise PreconditionError(f"Evaluation point is missing variables {missing}")
    values = [to_scalar(point[v]) for v in ring.variables]
    if not allow_inconsistent:
        for p in ring.params:
            if conjugate(to_scalar(point[p])) != to_scalar(point[conj_name(p)]):
                raise PreconditionError(
                    f"Evaluation point is not conjugation-consistent at {p!r}"
                )
    total = ZERO
    for exp, coeff in a.poly.items():
        term = coeff
        for value, e in zip(values, exp):
            if e:
                term = term * value**e
        total += term
    return total


def consistent_point(ring: JetRing, values: Mapping[str, object]) -> Dict[str, object]:
    """Extend {t: value} to a conjugation-consistent point over all variables."""
    point = {}
    for p in ring.params:
        v = to_scalar(values.get(p, 0))
        point[p] = v
        point[conj_name(p)] = conjugate(v)
    return point


def format_jet(a: Jet) -> str:
    """Human-readable rendering, e.g. ``1 + 2*t1*~t1``."""
    if not a:
        return "0"
    parts = []
    for exp, coeff in a.terms():
        mono = "*".join(
            name if e == 1 else f"{name}^{e}" for name, e in a.ring.monomial_powers(exp).items()
        )
        c = format_scalar(coeff)
        if not mono:
            parts.append(c)
        elif coeff == QQ_I.one:
            parts.append(mono)
        else:
            parts.append(f"({c})*{mono}")
    return " + ".join(parts)
