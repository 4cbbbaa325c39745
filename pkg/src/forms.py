"""Invariant model of a compact complex manifold.

The model is the exterior algebra on 2m generators, the holomorphic coframe
w^1..w^m and its conjugate wb^1..wb^m, with a differential fixed by its values
on the generators. Forms carry jet coefficients so that the same algebra hosts
t-dependent objects; d itself treats jets as constants.

Generators are numbered by a combined 0-based index: w^k is ``k - 1`` and
wb^k is ``m + k - 1``. A monomial is the ascending tuple of its generator
indices, which is exactly the canonical order w^I ^ wb^J with I and J
ascending.
"""

import logging
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from src.errors import ArithmeticFault, ModelValidationError, PreconditionError, SchemaError
from src.jets import Direction, Jet, JetRing, format_jet, jet_conj, jet_derive
from src.scalars import ScalarLike, format_scalar

logger = logging.getLogger(__name__)

Mono = Tuple[int, ...]
IJ = Tuple[Tuple[int, ...], Tuple[int, ...]]


def merge_monomials(a: Mono, b: Mono) -> Optional[Tuple[int, Mono]]:
    """Wedge two monomials: (sign, merged) or None when they share a generator."""
    if set(a) & set(b):
        return None
    inversions = sum(1 for x in a for y in b if x > y)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


class ComplexModel:
    """Structure-constant model of the Dolbeault algebra.

    Args:
        name: Model name
        dim: Complex dimension m
        ring: Jet ring for all coefficients
        differentials: For each of the 2m generators, the terms of its
            differential as {monomial: Jet}
    """

    def __init__(self, name: str, dim: int, ring: JetRing, differentials: Sequence[Mapping[Mono, Jet]]):
        if dim < 1:
            raise SchemaError(f"Model dimension must be >= 1, got {dim}")
        if len(differentials) != 2 * dim:
            raise SchemaError(f"Expected {2 * dim} generator differentials, got {len(differentials)}")
        self.name = name
        self.dim = dim
        self.ring = ring
        self._differentials = tuple(
            {mono: jet for mono, jet in terms.items() if jet} for terms in differentials
        )
        self._signature = tuple(
            tuple(sorted((mono, tuple(sorted(jet.poly.items()))) for mono, jet in terms.items()))
            for terms in self._differentials
        )
        self._d_cache: Dict[Mono, Dict[Mono, Jet]] = {}
        self._brackets: Optional[Dict[Tuple[int, int], Dict[int, Jet]]] = None

    @classmethod
    def from_structure(
        cls,
        name: str,
        dim: int,
        ring: JetRing,
        structure: Mapping[int, Mapping[IJ, ScalarLike]],
    ) -> "ComplexModel":
        """Build a model from dw^k (1-based k); dwb^k is the conjugate."""
        holo: List[Dict[Mono, Jet]] = []
        for k in range(1, dim + 1):
            terms: Dict[Mono, Jet] = {}
            for (I, J), coeff in structure.get(k, {}).items():
                mono, sign = ordered_monomial(dim, I, J)
                if mono is None:
                    raise SchemaError(f"Repeated generator in dw^{k} term {(list(I), list(J))}")
                terms[mono] = terms.get(mono, ring.zero) + ring.constant(coeff) * sign
            holo.append(terms)
        anti = [conjugate_terms(dim, terms) for terms in holo]
        return cls(name, dim, ring, holo + anti)

    def with_ring(self, ring: JetRing) -> "ComplexModel":
        """The same model over another jet ring (constant differentials only)."""
        moved = []
        for terms in self._differentials:
            if any(not jet.is_constant for jet in terms.values()):
                raise PreconditionError(f"Model {self.name} has jet-valued structure; cannot rebase")
            moved.append({mono: ring.constant(jet.constant_term()) for mono, jet in terms.items()})
        return ComplexModel(self.name, self.dim, ring, moved)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, ComplexModel)
            and self.name == other.name
            and self.dim == other.dim
            and self.ring == other.ring
            and self._signature == other._signature
        )

    def __hash__(self) -> int:
        return hash((self.name, self.dim, self.ring, self._signature))

    def __repr__(self) -> str:
        return f"ComplexModel({self.name!r}, dim={self.dim})"

    # Basis and generators

    def is_holo(self, gen: int) -> bool:
        return gen < self.dim

    def to_ij(self, mono: Mono) -> IJ:
        m = self.dim
        return (
            tuple(c + 1 for c in mono if c < m),
            tuple(c - m + 1 for c in mono if c >= m),
        )

    def bidegree(self, mono: Mono) -> Tuple[int, int]:
        p = sum(1 for c in mono if c < self.dim)
        return p, len(mono) - p

    def basis(self, p: int, q: int) -> List[Mono]:
        """Canonical basis monomials of bidegree (p, q)."""
        m = self.dim
        if not (0 <= p <= m and 0 <= q <= m):
            return []
        return [
            tuple(I) + tuple(m + j for j in J)
            for I in combinations(range(m), p)
            for J in combinations(range(m), q)
        ]

    def basis_total(self, degree: int) -> List[Mono]:
        return [mono for p in range(degree + 1) for mono in self.basis(p, degree - p)]

    def generator(self, gen: int) -> "Form":
        return Form(self, {(gen,): self.ring.one})

    def holo(self, k: int) -> "Form":
        """The form w^k (1-based)."""
        return self.generator(self._check_index(k) - 1)

    def anti(self, k: int) -> "Form":
        """The form wb^k (1-based)."""
        return self.generator(self.dim + self._check_index(k) - 1)

    def monomial_form(self, mono: Mono, coeff: Optional[Jet] = None) -> "Form":
        return Form(self, {tuple(mono): coeff if coeff is not None else self.ring.one})

    def form_ij(self, I: Sequence[int], J: Sequence[int], coeff=1) -> "Form":
        """w^I ^ wb^J with 1-based indices, reordered into canonical sign."""
        mono, sign = ordered_monomial(self.dim, I, J)
        if mono is None:
            return self.zero_form()
        jet = coeff if isinstance(coeff, Jet) else self.ring.constant(coeff)
        return Form(self, {mono: jet * sign})

    def zero_form(self) -> "Form":
        return Form(self, {})

    def constant_form(self, value) -> "Form":
        jet = value if isinstance(value, Jet) else self.ring.constant(value)
        return Form(self, {(): jet})

    def _check_index(self, k: int) -> int:
        if not 1 <= k <= self.dim:
            raise PreconditionError(f"Vector index {k} out of range 1..{self.dim}")
        return k

    # Differential

    def d_generator(self, gen: int) -> "Form":
        return Form(self, self._differentials[gen])

    def d_monomial(self, mono: Mono) -> Dict[Mono, Jet]:
        """d of a monomial as an odd derivation, cached per model."""
        cached = self._d_cache.get(mono)
        if cached is not None:
            return cached
        out: Dict[Mono, Jet] = {}
        for pos, gen in enumerate(mono):
            left, right = mono[:pos], mono[pos + 1:]
            outer = -1 if pos % 2 else 1
            for dmono, djet in self._differentials[gen].items():
                first = merge_monomials(left, dmono)
                if first is None:
                    continue
                second = merge_monomials(first[1], right)
                if second is None:
                    continue
                sign = outer * first[0] * second[0]
                key = second[1]
                value = out.get(key, self.ring.zero) + djet * sign
                if value:
                    out[key] = value
                else:
                    out.pop(key, None)
        self._d_cache[mono] = out
        return out

    # Brackets of the dual frame

    def brackets(self) -> Dict[Tuple[int, int], Dict[int, Jet]]:
        """Structure constants [E_x, E_y] = sum_c B[x, y][c] E_c for x < y.

        Recovered from d by the pairing rule de^c(E_x, E_y) = -e^c([E_x, E_y]).
        """
        if self._brackets is None:
            table: Dict[Tuple[int, int], Dict[int, Jet]] = {}
            for c, terms in enumerate(self._differentials):
                for mono, jet in terms.items():
                    if len(mono) != 2:
                        continue
                    table.setdefault(mono, {})[c] = -jet
            self._brackets = table
        return self._brackets

    def bracket(self, x: int, y: int) -> Dict[int, Jet]:
        """[E_x, E_y] as {generator index: coefficient}, frame indices combined."""
        if x == y:
            return {}
        if x < y:
            return dict(self.brackets().get((x, y), {}))
        return {c: -v for c, v in self.brackets().get((y, x), {}).items()}

    def holo_bracket(self, x: int, y: int) -> Dict[int, Jet]:
        """pr^{1,0} [E_x, E_y], keyed by holomorphic index 0..m-1."""
        return {c: v for c, v in self.bracket(x, y).items() if c < self.dim}

    def delbar_vector(self, k: int) -> Dict[Tuple[int, int], Jet]:
        """dbar X_k as {(a, l): coeff} meaning sum wb^a (x) X_l, 0-based indices."""
        out: Dict[Tuple[int, int], Jet] = {}
        for a in range(self.dim):
            for l, v in self.holo_bracket(self.dim + a, k).items():
                out[(a, l)] = v
        return out

    @property
    def is_parallelizable(self) -> bool:
        return all(not self.delbar_vector(k) for k in range(self.dim))

    # Validation

    def validate(self) -> None:
        """Check d^2 = 0, integrability and the Jacobi identity.

        Raises:
            ModelValidationError: With a diagnostic naming the failing generator
        """
        n = 2 * self.dim
        for gen in range(n):
            for mono in self._differentials[gen]:
                if len(mono) != 2:
                    raise ModelValidationError(
                        f"{self.name}: d{generator_name(self.dim, gen)} is not of degree 2"
                    )
            dd = differential_d(self.d_generator(gen))
            if dd:
                raise ModelValidationError(
                    f"{self.name}: d^2 != 0 on {generator_name(self.dim, gen)}: {format_form(dd)}"
                )
        for k in range(self.dim):
            bad = project_bidegree(self.d_generator(k), 0, 2)
            if bad:
                raise ModelValidationError(
                    f"{self.name}: d{generator_name(self.dim, k)} has nonzero (0,2)-component "
                    f"{format_form(bad)}"
                )
        for x, y, z in combinations(range(n), 3):
            total: Dict[int, Jet] = {}
            for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
                for e, v in self.bracket(a, b).items():
                    for f, w in self.bracket(e, c).items():
                        total[f] = total.get(f, self.ring.zero) + v * w
            if any(total.values()):
                raise ModelValidationError(
                    f"{self.name}: Jacobi identity fails on frame triple {(x, y, z)}"
                )
        logger.debug("Model %s validated", self.name)


def generator_name(dim: int, gen: int) -> str:
    return f"w{gen + 1}" if gen < dim else f"wb{gen - dim + 1}"


def ordered_monomial(dim: int, I: Sequence[int], J: Sequence[int]) -> Tuple[Optional[Mono], int]:
    """Canonical monomial and reordering sign for w^I ^ wb^J given in any order."""
    gens = [i - 1 for i in I] + [dim + j - 1 for j in J]
    for i in list(I) + list(J):
        if not 1 <= i <= dim:
            raise SchemaError(f"Index {i} out of range 1..{dim}")
    if len(set(gens)) != len(gens):
        return None, 0
    inversions = sum(1 for a in range(len(gens)) for b in range(a + 1, len(gens)) if gens[a] > gens[b])
    return tuple(sorted(gens)), -1 if inversions % 2 else 1


def _conj_monomial(dim: int, mono: Mono) -> Tuple[Mono, int]:
    swapped = [c + dim if c < dim else c - dim for c in mono]
    inversions = sum(
        1 for a in range(len(swapped)) for b in range(a + 1, len(swapped)) if swapped[a] > swapped[b]
    )
    return tuple(sorted(swapped)), -1 if inversions % 2 else 1


def conjugate_terms(dim: int, terms: Mapping[Mono, Jet]) -> Dict[Mono, Jet]:
    out: Dict[Mono, Jet] = {}
    for mono, jet in terms.items():
        new_mono, sign = _conj_monomial(dim, mono)
        out[new_mono] = jet_conj(jet) * sign
    return out


class Form:
    """A differential form on a model with jet coefficients.

    Terms are keyed by canonical monomials (ascending combined generator
    indices); zero coefficients are never stored.
    """

    __slots__ = ("model", "terms")

    def __init__(self, model: ComplexModel, terms: Mapping[Mono, Jet]):
        self.model = model
        self.terms: Dict[Mono, Jet] = {mono: jet for mono, jet in terms.items() if jet}

    @property
    def ring(self) -> JetRing:
        return self.model.ring

    def _check(self, other: "Form") -> None:
        if not isinstance(other, Form):
            raise TypeError(f"Expected a Form, got {type(other).__name__}")
        if other.model is not self.model and other.model != self.model:
            raise ArithmeticFault(f"Model mismatch: {self.model} vs {other.model}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        terms = dict(self.terms)
        for mono, jet in other.terms.items():
            terms[mono] = terms[mono] + jet if mono in terms else jet
        return Form(self.model, terms)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form(self.model, {mono: -jet for mono, jet in self.terms.items()})

    def __mul__(self, scalar) -> "Form":
        """Multiply by a jet or an exact scalar."""
        return Form(self.model, {mono: jet * scalar for mono, jet in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return (self.model is other.model or self.model == other.model) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        return f"Form({format_form(self)})"

    def items_ij(self) -> Iterator[Tuple[IJ, Jet]]:
        for mono in sorted(self.terms):
            yield self.model.to_ij(mono), self.terms[mono]

    def bidegrees(self) -> set:
        return {self.model.bidegree(mono) for mono in self.terms}

    def homogeneous_bidegree(self) -> Optional[Tuple[int, int]]:
        """The common bidegree, None for the zero form; raises if mixed."""
        degrees = self.bidegrees()
        if len(degrees) > 1:
            raise PreconditionError(f"Form is not bihomogeneous: bidegrees {sorted(degrees)}")
        return next(iter(degrees), None)

    def map_coefficients(self, fn) -> "Form":
        return Form(self.model, {mono: fn(jet) for mono, jet in self.terms.items()})

    def truncated(self, degree: int) -> "Form":
        return self.map_coefficients(lambda jet: jet.truncated(degree))

    def degree_part(self, degree: int) -> "Form":
        return self.map_coefficients(lambda jet: jet.degree_part(degree))

    def derive(self, u: Direction) -> "Form":
        return self.map_coefficients(lambda jet: jet_derive(jet, u))

    def coefficient(self, mono: Mono) -> Jet:
        return self.terms.get(tuple(mono), self.ring.zero)

    def rebase(self, model: ComplexModel) -> "Form":
        """The same coordinates on another model of equal dimension and ring."""
        if model.dim != self.model.dim or model.ring != self.model.ring:
            raise ArithmeticFault(f"Cannot move a form from {self.model} to {model}")
        return Form(model, self.terms)


def wedge(a: Form, b: Form) -> Form:
    """Graded-commutative product with Koszul signs."""
    a._check(b)
    out: Dict[Mono, Jet] = {}
    for ma, ja in a.terms.items():
        for mb, jb in b.terms.items():
            merged = merge_monomials(ma, mb)
            if merged is None:
                continue
            sign, mono = merged
            value = ja * jb
            if not value:
                continue
            value = value if sign > 0 else -value
            out[mono] = out[mono] + value if mono in out else value
    return Form(a.model, out)


def differential_d(a: Form) -> Form:
    """d extended as an odd derivation; jet coefficients are constants for d."""
    model = a.model
    out: Dict[Mono, Jet] = {}
    for mono, jet in a.terms.items():
        for dmono, djet in model.d_monomial(mono).items():
            value = djet * jet
            out[dmono] = out[dmono] + value if dmono in out else value
    return Form(model, out)


def project_bidegree(a: Form, p: int, q: int) -> Form:
    model = a.model
    return Form(model, {mono: jet for mono, jet in a.terms.items() if model.bidegree(mono) == (p, q)})


def delta_parts(a: Form) -> Tuple[Form, Form]:
    """(del a, delbar a) for a bihomogeneous form."""
    degree = a.homogeneous_bidegree()
    if degree is None:
        return a, a
    p, q = degree
    da = differential_d(a)
    return project_bidegree(da, p + 1, q), project_bidegree(da, p, q + 1)


def delta(a: Form) -> Form:
    """The operator del on a bihomogeneous form."""
    return delta_parts(a)[0]


def delbar(a: Form) -> Form:
    """The operator delbar on a bihomogeneous form."""
    return delta_parts(a)[1]


def del_any(a: Form) -> Form:
    """del applied bidegree by bidegree to a possibly mixed form."""
    out = a.model.zero_form()
    for p, q in sorted(a.bidegrees()):
        out = out + delta(project_bidegree(a, p, q))
    return out


def delbar_any(a: Form) -> Form:
    """delbar applied bidegree by bidegree to a possibly mixed form."""
    out = a.model.zero_form()
    for p, q in sorted(a.bidegrees()):
        out = out + delbar(project_bidegree(a, p, q))
    return out


def conjugate_form(a: Form) -> Form:
    """Swap holomorphic and antiholomorphic indices and conjugate the jets."""
    return Form(a.model, conjugate_terms(a.model.dim, a.terms))


def contract_vector(k: int, a: Form) -> Form:
    """Interior product with X_k (1-based); pairs only with holomorphic w^k."""
    gen = a.model._check_index(k) - 1
    return contract_generator(gen, a)


def contract_generator(gen: int, a: Form) -> Form:
    out: Dict[Mono, Jet] = {}
    for mono, jet in a.terms.items():
        if gen not in mono:
            continue
        pos = mono.index(gen)
        rest = mono[:pos] + mono[pos + 1:]
        value = -jet if pos % 2 else jet
        out[rest] = out[rest] + value if rest in out else value
    return Form(a.model, out)


def basis_vector(a: Form, basis: Sequence[Mono], exp) -> Dict[int, object]:
    """Scalar coordinates of one jet monomial of ``a`` against a basis list."""
    index = {mono: i for i, mono in enumerate(basis)}
    out: Dict[int, object] = {}
    for mono, jet in a.terms.items():
        if mono not in index:
            raise PreconditionError(f"Monomial {a.model.to_ij(mono)} is outside the requested basis")
        c = jet.coefficient(exp)
        if c:
            out[index[mono]] = c
    return out


def format_monomial(dim: int, mono: Mono) -> str:
    if not mono:
        return "1"
    return "^".join(generator_name(dim, c) for c in mono)


def format_form(a: Form) -> str:
    """Human-readable rendering such as ``(t11) wb1^w2``."""
    if not a.terms:
        return "0"
    parts = []
    for mono in sorted(a.terms):
        jet = a.terms[mono]
        coeff = format_scalar(jet.constant_term()) if jet.is_constant else format_jet(jet)
        parts.append(f"({coeff}) {format_monomial(a.model.dim, mono)}")
    return " + ".join(parts)
