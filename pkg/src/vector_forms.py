"""Vector-valued (0,q)-forms and their differential graded Lie algebra.

A :class:`VForm` is a sum of terms wb^J (x) X_k with jet coefficients. Here
live dbar on vector forms, the bracket, contraction into ordinary forms and the
two twisted differentials attached to a Beltrami differential phi:

* on forms:          dbar_phi = dbar - phi _| del + del (phi _| .)
* on vector forms:   dbar_phi = dbar - [phi, .]

Bracket convention, frozen by the antisymmetry and Jacobi tests::

    [b (x) X, c (x) Y] = b^c (x) pr10[X, Y] + b ^ (i_X del c) (x) Y
                         - (-1)^(q r) c ^ (i_Y del b) (x) X
"""

from itertools import combinations
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from src.errors import ArithmeticFault, PreconditionError
from src.forms import (
    ComplexModel,
    Form,
    Mono,
    contract_generator,
    del_any,
    delbar_any,
    differential_d,
    format_monomial,
    merge_monomials,
    project_bidegree,
    wedge,
)
from src.jets import Direction, Jet, format_jet, jet_derive
from src.scalars import format_scalar

# A term key: (anti indices 0-based ascending, vector index 0-based)
VKey = Tuple[Tuple[int, ...], int]


class VForm:
    """Homogeneous vector-valued (0,q)-form with jet coefficients."""

    __slots__ = ("model", "degree", "terms")

    def __init__(self, model: ComplexModel, degree: int, terms: Mapping[VKey, Jet]):
        self.model = model
        self.degree = degree
        self.terms: Dict[VKey, Jet] = {}
        for (J, k), jet in terms.items():
            if not jet:
                continue
            if len(J) != degree:
                raise PreconditionError(
                    f"Vector form term of degree {len(J)} in a degree-{degree} container"
                )
            self.terms[(tuple(J), k)] = jet

    @classmethod
    def zero(cls, model: ComplexModel, degree: int) -> "VForm":
        return cls(model, degree, {})

    @classmethod
    def basis_element(cls, model: ComplexModel, J, k: int, coeff: Optional[Jet] = None) -> "VForm":
        """wb^J (x) X_k with 1-based indices; J must be ascending."""
        J0 = tuple(j - 1 for j in J)
        if list(J0) != sorted(set(J0)):
            raise PreconditionError(f"Anti indices {list(J)} must be strictly increasing")
        model._check_index(k)
        for j in J:
            model._check_index(j)
        jet = coeff if coeff is not None else model.ring.one
        return cls(model, len(J0), {(J0, k - 1): jet})

    @property
    def ring(self):
        return self.model.ring

    def _check(self, other: "VForm") -> None:
        if not isinstance(other, VForm):
            raise TypeError(f"Expected a VForm, got {type(other).__name__}")
        if other.model is not self.model and other.model != self.model:
            raise ArithmeticFault(f"Model mismatch: {self.model} vs {other.model}")

    def __add__(self, other: "VForm") -> "VForm":
        self._check(other)
        if other.degree != self.degree and other.terms and self.terms:
            raise PreconditionError(f"Cannot add vector forms of degrees {self.degree} and {other.degree}")
        degree = self.degree if self.terms or not other.terms else other.degree
        terms = dict(self.terms)
        for key, jet in other.terms.items():
            terms[key] = terms[key] + jet if key in terms else jet
        return VForm(self.model, degree, terms)

    def __sub__(self, other: "VForm") -> "VForm":
        return self + (-other)

    def __neg__(self) -> "VForm":
        return VForm(self.model, self.degree, {key: -jet for key, jet in self.terms.items()})

    def __mul__(self, scalar) -> "VForm":
        return VForm(self.model, self.degree, {key: jet * scalar for key, jet in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, VForm):
            return NotImplemented
        if not (self.model is other.model or self.model == other.model):
            return False
        if not self.terms and not other.terms:
            return True
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.degree if self.terms else None, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        return f"VForm({format_vform(self)})"

    def items_1based(self) -> Iterator[Tuple[Tuple[int, ...], int, Jet]]:
        for J, k in sorted(self.terms):
            yield tuple(j + 1 for j in J), k + 1, self.terms[(J, k)]

    def map_coefficients(self, fn) -> "VForm":
        return VForm(self.model, self.degree, {key: fn(jet) for key, jet in self.terms.items()})

    def truncated(self, degree: int) -> "VForm":
        return self.map_coefficients(lambda jet: jet.truncated(degree))

    def degree_part(self, degree: int) -> "VForm":
        return self.map_coefficients(lambda jet: jet.degree_part(degree))

    def derive(self, u: Direction) -> "VForm":
        return self.map_coefficients(lambda jet: jet_derive(jet, u))

    def component(self, k: int) -> Form:
        """The (0,q)-form multiplying X_k (0-based k)."""
        m = self.model.dim
        return Form(
            self.model,
            {tuple(m + j for j in J): jet for (J, l), jet in self.terms.items() if l == k},
        )

    def rebase(self, model: ComplexModel) -> "VForm":
        if model.dim != self.model.dim or model.ring != self.model.ring:
            raise ArithmeticFault(f"Cannot move a vector form from {self.model} to {model}")
        return VForm(model, self.degree, self.terms)

    def max_jet_degree(self) -> int:
        return max((jet.max_degree() for jet in self.terms.values()), default=-1)


def vform_basis(model: ComplexModel, q: int) -> List[VKey]:
    """Canonical basis keys of A^{0,q}(T): anti index sets first, then vector index."""
    return [(J, k) for J in combinations(range(model.dim), q) for k in range(model.dim)]


def tensor(beta: Form, k: int, degree: Optional[int] = None) -> VForm:
    """beta (x) X_k for a (0,q)-form beta and 0-based k."""
    m = beta.model.dim
    terms: Dict[VKey, Jet] = {}
    for mono, jet in beta.terms.items():
        if any(c < m for c in mono):
            raise PreconditionError("Only (0,q)-forms can be tensored with a vector")
        key = (tuple(c - m for c in mono), k)
        terms[key] = terms[key] + jet if key in terms else jet
    if degree is None:
        degree = len(next(iter(beta.terms))) if beta.terms else 0
    return VForm(beta.model, degree, terms)


def _term_form(model: ComplexModel, J: Tuple[int, ...], jet: Jet) -> Form:
    return Form(model, {tuple(model.dim + j for j in J): jet})


def _check_beltrami(phi: VForm) -> None:
    if phi.degree != 1 and phi.terms:
        raise PreconditionError(f"Twisting needs a degree-1 Beltrami differential, got degree {phi.degree}")
    for jet in phi.terms.values():
        if jet.constant_term():
            raise PreconditionError("Beltrami differential must vanish at t = 0")


def vf_delbar(psi: VForm) -> VForm:
    """dbar on A^{0,q}(T) using the frame-wise dbar X_k from the model brackets."""
    model = psi.model
    q = psi.degree
    out = VForm.zero(model, q + 1)
    for (J, k), jet in psi.terms.items():
        beta = _term_form(model, J, jet)
        dbeta = project_bidegree(differential_d(beta), 0, q + 1)
        out = out + tensor(dbeta, k, q + 1)
        sign = -1 if q % 2 else 1
        for (a, l), coeff in model.delbar_vector(k).items():
            merged = merge_monomials(J, (a,))
            if merged is None:
                continue
            s, J2 = merged
            out = out + VForm(model, q + 1, {(J2, l): jet * coeff * (sign * s)})
    return out


def vf_bracket(phi: VForm, psi: VForm) -> VForm:
    """Graded bracket of vector forms of degrees q and r, landing in degree q + r."""
    phi._check(psi)
    model = phi.model
    m = model.dim
    q, r = phi.degree, psi.degree
    out = VForm.zero(model, q + r)
    koszul = -1 if (q * r) % 2 else 1
    for (J1, k), f in phi.terms.items():
        beta = _term_form(model, J1, f)
        dbeta = project_bidegree(differential_d(beta), 1, q)
        for (J2, l), g in psi.terms.items():
            gamma = _term_form(model, J2, g)
            for c, coeff in model.holo_bracket(k, l).items():
                out = out + tensor(wedge(beta, gamma) * coeff, c, q + r)
            dgamma = project_bidegree(differential_d(gamma), 1, r)
            term = wedge(beta, contract_generator(k, dgamma))
            out = out + tensor(term, l, q + r)
            term = wedge(gamma, contract_generator(l, dbeta))
            out = out - tensor(term, k, q + r) * koszul
    return out


def vf_contract(phi: VForm, eta: Form) -> Form:
    """(b (x) X) _| eta = b ^ i_X eta, extended bilinearly."""
    if phi.model is not eta.model and phi.model != eta.model:
        raise ArithmeticFault(f"Model mismatch: {phi.model} vs {eta.model}")
    model = phi.model
    out = model.zero_form()
    for (J, k), jet in phi.terms.items():
        out = out + wedge(_term_form(model, J, jet), contract_generator(k, eta))
    return out


def twisted_delbar_form(phi: VForm, eta: Form) -> Form:
    """dbar eta - phi _| del eta + del(phi _| eta)."""
    _check_beltrami(phi)
    return delbar_any(eta) - vf_contract(phi, del_any(eta)) + del_any(vf_contract(phi, eta))


def twisted_delbar_vform(phi: VForm, psi: VForm) -> VForm:
    """dbar psi - [phi, psi]."""
    _check_beltrami(phi)
    out = vf_delbar(psi)
    if phi.terms:
        out = out - vf_bracket(phi, psi)
    return out


def format_vform(psi: VForm) -> str:
    if not psi.terms:
        return "0"
    m = psi.model.dim
    parts = []
    for J, k in sorted(psi.terms):
        jet = psi.terms[(J, k)]
        coeff = format_scalar(jet.constant_term()) if jet.is_constant else format_jet(jet)
        parts.append(f"({coeff}) {format_monomial(m, tuple(m + j for j in J))}@X{k + 1}")
    return " + ".join(parts)
