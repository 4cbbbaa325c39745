"""Dolbeault cohomology of the central fiber and of twisted jet complexes.

Two families of complexes are handled uniformly through :class:`Space`:

* ``form``: A^{p,*} with dbar, for a fixed p
* ``tangent``: A^{0,*}(T) with dbar on vector forms

At t = 0 classes are reduced against the constant-coefficient dbar. Over the
Artinian ring C[t, ~t]/m^(r+1) the twisted operator dbar_phi is flattened into
one finite linear map on (monomial, basis element) pairs, so exactness there
is again a single sparse membership test.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from src.errors import InvariantViolation, PreconditionError
from src.forms import ComplexModel, Form, delbar, project_bidegree
from src.jets import Exponent, Jet
from src.linalg import (
    ImageReducer,
    KernelImage,
    SparseMatrix,
    Vector,
    kernel_image_basis,
    membership_solve,
    rref,
)
from src.scalars import ZERO
from src.vector_forms import VForm, twisted_delbar_form, twisted_delbar_vform, vf_delbar, vform_basis

logger = logging.getLogger(__name__)

FORM = "form"
TANGENT = "tangent"
KINDS = (FORM, TANGENT)

# Cached matrices and bases per (space, degree); each jet ring gets its own entries
BASIS_CACHE_SIZE = 256

Element = Union[Form, VForm]


@dataclass(frozen=True)
class Space:
    """The graded space A^{p,*} (form kind) or A^{0,*}(T) (tangent kind)."""

    model: ComplexModel
    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"Unknown cohomology kind {self.kind!r}")
        if self.kind == TANGENT and self.p != 0:
            raise PreconditionError("Tangent cohomology has no holomorphic degree")

    def basis(self, q: int) -> list:
        if q < 0 or q > self.model.dim:
            return []
        if self.kind == FORM:
            return self.model.basis(self.p, q)
        return vform_basis(self.model, q)

    def build(self, q: int, coeffs: Dict[object, Jet]) -> Element:
        if self.kind == FORM:
            return Form(self.model, coeffs)
        return VForm(self.model, q, coeffs)

    def element(self, q: int, key, jet: Optional[Jet] = None) -> Element:
        return self.build(q, {key: jet if jet is not None else self.model.ring.one})

    def zero(self, q: int) -> Element:
        return self.build(q, {})

    def degree_of(self, obj: Element) -> Optional[int]:
        if isinstance(obj, VForm):
            return obj.degree if obj.terms else None
        bidegree = obj.homogeneous_bidegree()
        if bidegree is None:
            return None
        if bidegree[0] != self.p:
            raise PreconditionError(f"Form of bidegree {bidegree} is not in A^({self.p},*)")
        return bidegree[1]

    def delbar(self, obj: Element) -> Element:
        if isinstance(obj, VForm):
            return vf_delbar(obj)
        return delbar(obj)

    def twisted(self, phi: VForm, obj: Element) -> Element:
        if isinstance(obj, VForm):
            return twisted_delbar_vform(phi, obj)
        out = twisted_delbar_form(phi, obj)
        degree = self.degree_of(obj)
        if degree is None:
            return out
        return project_bidegree(out, self.p, degree + 1)

    def label(self, q: int) -> str:
        return f"H^({self.p},{q})" if self.kind == FORM else f"H^{q}(T)"

    def key_label(self, key) -> str:
        if self.kind == FORM:
            I, J = self.model.to_ij(key)
            return "w" + "".join(map(str, I)) + ("~" + "".join(map(str, J)) if J else "")
        J, k = key
        return "wb" + "".join(str(j + 1) for j in J) + f"@X{k + 1}"


def coordinates_at(obj: Element, keys: Sequence, exp: Exponent) -> Vector:
    """Scalar coordinates of the t^exp coefficient of ``obj`` against basis keys."""
    index = {key: i for i, key in enumerate(keys)}
    out: Vector = {}
    for key, jet in obj.terms.items():
        if key not in index:
            raise PreconditionError(f"Term {key} lies outside the requested basis")
        c = jet.coefficient(exp)
        if c:
            out[index[key]] = c
    return out


def jet_monomials(obj: Element) -> List[Exponent]:
    """Exponents occurring in any coefficient, sorted by degree then lex."""
    exps = {e for jet in obj.terms.values() for e in jet.poly.keys()}
    return sorted(exps, key=lambda e: (sum(e), tuple(-x for x in e)))


def from_vector(space: Space, q: int, vec: Vector, exp: Optional[Exponent] = None) -> Element:
    """Inverse of :func:`coordinates_at`: sum vec_i * t^exp * basis_i."""
    ring = space.model.ring
    keys = space.basis(q)
    if exp is None:
        exp = (0,) * len(ring.variables)
    coeffs = {keys[i]: Jet.from_dict(ring, {exp: c}) for i, c in vec.items() if c}
    return space.build(q, coeffs)


@lru_cache(maxsize=BASIS_CACHE_SIZE)
def delbar_matrix(space: Space, q: int) -> SparseMatrix:
    """Matrix of dbar at t = 0 from degree q to q + 1."""
    source = space.basis(q)
    target = space.basis(q + 1)
    zero_exp = (0,) * len(space.model.ring.variables)
    columns = [coordinates_at(space.delbar(space.element(q, key)), target, zero_exp) for key in source]
    return SparseMatrix.from_columns(columns, len(target))


@dataclass
class CohomologyBasis:
    """Representatives of H^(p,q) or H^q(T) at t = 0.

    Attributes:
        space: The graded space
        q: Degree
        keys: Basis keys of the degree-q cochains
        representatives: Closed representatives, one per class
        kernel: Kernel/image data of the outgoing dbar
        incoming: Image basis of the incoming dbar
    """

    space: Space
    q: int
    keys: list
    representatives: List[Element]
    rep_vectors: List[Vector]
    kernel: KernelImage
    incoming: List[Vector]
    _coordinate_matrix: Optional[SparseMatrix] = field(default=None, repr=False)

    @property
    def model(self) -> ComplexModel:
        return self.space.model

    @property
    def kind(self) -> str:
        return self.space.kind

    @property
    def h(self) -> int:
        return len(self.representatives)

    def label(self) -> str:
        return self.space.label(self.q)

    def _matrix(self) -> SparseMatrix:
        if self._coordinate_matrix is None:
            self._coordinate_matrix = SparseMatrix.from_columns(
                self.rep_vectors + self.incoming, len(self.keys)
            )
        return self._coordinate_matrix

    def coordinates(self, vec: Vector) -> List[object]:
        """Class coordinates of a closed cochain given as a scalar vector.

        Raises:
            InvariantViolation: If the vector is not dbar-closed at t = 0
        """
        result = membership_solve(self._matrix(), vec)
        if not result.member:
            raise InvariantViolation(f"Cochain is not closed in {self.label()}", witness=vec)
        return [result.solution.get(i, ZERO) for i in range(self.h)]

    def is_closed(self, vec: Vector) -> bool:
        out = delbar_matrix(self.space, self.q).matvec(vec)
        return not out

    def is_exact(self, vec: Vector) -> bool:
        if not self.incoming:
            return not any(vec.values())
        return membership_solve(SparseMatrix.from_columns(self.incoming, len(self.keys)), vec).member

    def class_of(self, obj: Element) -> List[object]:
        """Coordinates of the t = 0 value of a closed element."""
        zero_exp = (0,) * len(self.model.ring.variables)
        return self.coordinates(coordinates_at(obj, self.keys, zero_exp))


@lru_cache(maxsize=BASIS_CACHE_SIZE)
def _cohomology_basis(space: Space, q: int) -> CohomologyBasis:
    keys = space.basis(q)
    outgoing = kernel_image_basis(delbar_matrix(space, q))
    incoming = kernel_image_basis(delbar_matrix(space, q - 1)).image if q > 0 else []
    # Complement of the incoming image inside the kernel, chosen by pivots.
    stacked = SparseMatrix.from_columns(incoming + outgoing.kernel, len(keys))
    _, pivots = rref(stacked)
    offset = len(incoming)
    chosen = [outgoing.kernel[p - offset] for p in pivots if p >= offset]
    reps = [from_vector(space, q, vec) for vec in chosen]
    logger.debug("%s of %s: h = %d", space.label(q), space.model.name, len(reps))
    return CohomologyBasis(
        space=space,
        q=q,
        keys=keys,
        representatives=reps,
        rep_vectors=chosen,
        kernel=outgoing,
        incoming=incoming,
    )


def cohomology_basis(model: ComplexModel, kind: str = FORM, p: int = 0, q: int = 0) -> CohomologyBasis:
    """Cohomology basis of dbar at t = 0.

    Args:
        model: Validated model
        kind: 'form' for H^(p,q), 'tangent' for H^q(T)
        p: Holomorphic degree (form kind only)
        q: Antiholomorphic degree

    Returns:
        CohomologyBasis with h = dim ker - rank of incoming dbar
    """
    return _cohomology_basis(Space(model, kind, p), q)


class TwistedComplex:
    """dbar_phi from degree q to q + 1 over the Artinian ring of order r.

    Rows and columns are indexed by (monomial, basis key) with monomials in a
    fixed set of active variables and of degree <= r.
    """

    def __init__(self, space: Space, phi: VForm, q: int, order: int, variables: Tuple[int, ...]):
        self.space = space
        self.phi = phi
        self.q = q
        self.order = order
        self.variables = variables
        ring = space.model.ring
        self.monomials = [
            exp for degree in range(order + 1) for exp in ring.monomials(degree, variables)
        ]
        self.source = space.basis(q)
        self.target = space.basis(q + 1)
        self._row_index = {
            (exp, key): i
            for i, (exp, key) in enumerate((e, k) for e in self.monomials for k in self.target)
        }
        columns = []
        images = [space.twisted(phi, space.element(q, key)).truncated(order) for key in self.source]
        for mono in self.monomials:
            for image in images:
                columns.append(self._shifted_vector(image, mono))
        self.matrix = SparseMatrix.from_columns(columns, len(self._row_index))
        self._reducer = ImageReducer(self.matrix)
        logger.debug(
            "Twisted complex %s order %d: %d x %d", space.label(q), order, *self.matrix.shape
        )

    def _shifted_vector(self, obj: Element, shift: Exponent) -> Vector:
        out: Vector = {}
        for key, jet in obj.terms.items():
            for exp, c in jet.poly.items():
                new = tuple(a + b for a, b in zip(exp, shift))
                if sum(new) > self.order:
                    continue
                row = self._row_index.get((new, key))
                if row is None:
                    raise PreconditionError(f"Monomial {new} is outside the active variables")
                out[row] = out.get(row, ZERO) + c
        return {i: c for i, c in out.items() if c}

    def vector(self, obj: Element) -> Vector:
        zero = (0,) * len(self.space.model.ring.variables)
        return self._shifted_vector(obj.truncated(self.order), zero)

    def contains(self, obj: Element) -> bool:
        """True when ``obj`` is dbar_phi-exact modulo m^(r+1)."""
        return self._reducer.contains(self.vector(obj))

    def normal_form(self, obj: Element) -> Dict[Tuple[Exponent, object], object]:
        """Canonical residue of ``obj`` modulo the twisted image."""
        residual = self._reducer.reduce(self.vector(obj))
        rows = {i: key for key, i in self._row_index.items()}
        return {rows[i]: c for i, c in sorted(residual.items())}


def active_variables(phi: VForm, *others: Element) -> Tuple[int, ...]:
    """Variables used by phi and the given elements, closed under conjugation."""
    ring = phi.model.ring
    used = set()
    for obj in (phi,) + others:
        for jet in obj.terms.values():
            used |= jet.variables_used()
    used |= {ring.conj_index(i) for i in used}
    return tuple(sorted(used))


@lru_cache(maxsize=64)
def _twisted_complex(space: Space, phi: VForm, q: int, order: int, variables: Tuple[int, ...]) -> TwistedComplex:
    return TwistedComplex(space, phi, q, order, variables)


def twisted_complex(space: Space, phi: VForm, q: int, order: int, *elements: Element) -> TwistedComplex:
    """Cached Artinian twisted complex wide enough for the given elements."""
    return _twisted_complex(space, phi, q, order, active_variables(phi, *elements))


def twisted_exact(space: Space, phi: VForm, obj: Element, order: int) -> bool:
    """Is ``obj`` (degree q + 1) in the image of dbar_phi modulo m^(order+1)?"""
    degree = space.degree_of(obj)
    if degree is None:
        return True
    return twisted_complex(space, phi, degree - 1, order, obj).contains(obj)
