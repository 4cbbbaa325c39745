"""Deformed coframes and the rho operator.

For a Beltrami differential phi the deformed (1,0)-coframe is
eta^k = w^k + phi _| w^k. Writing every generator image in the old basis gives
the coframe matrix ``P`` (rows: generators, columns: old generators)::

    P = [[ I,      Phi ],
         [ conj(Phi), I ]]

``P`` is the identity at t = 0, so its inverse over the jet ring is the finite
Neumann series sum (-N)^j with N = P - I.

Two conventions for rho are supported:

* generator substitution: w^k -> eta^k, wb^k -> conj(eta^k)
* dual-frame normalized: w^k -> eta^k, wb^k -> the (0,1)_t part of wb^k

In both cases rho is an algebra automorphism of the jet-coefficient exterior
algebra, and the deformed operators are d conjugated by rho followed by a
bidegree projection. Pulling d back through rho yields a model whose generator
differentials carry jets; the deformed operators are the ordinary ones on that
model.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from src.deformation import mc_defect
from src.errors import NonIntegrableError, PreconditionError
from src.forms import ComplexModel, Form, Mono, differential_d, format_form, project_bidegree, wedge
from src.jets import Jet, jet_conj
from src.vector_forms import VForm, twisted_delbar_form, twisted_delbar_vform, vf_delbar, vform_basis

logger = logging.getLogger(__name__)

GENERATOR_SUBSTITUTION = "generator-substitution"
DUAL_FRAME_NORMALIZED = "dual-frame-normalized"
CONVENTIONS = (GENERATOR_SUBSTITUTION, DUAL_FRAME_NORMALIZED)

JetMatrix = List[List[Jet]]


def identity_matrix(ring, size: int) -> JetMatrix:
    return [[ring.one if i == j else ring.zero for j in range(size)] for i in range(size)]


def matrix_multiply(a: JetMatrix, b: JetMatrix) -> JetMatrix:
    ring_zero = a[0][0].ring.zero if a and a[0] else None
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            total = ring_zero
            for k in range(inner):
                if a[i][k] and b[k][j]:
                    total = total + a[i][k] * b[k][j]
            row.append(total)
        out.append(row)
    return out


def unipotent_inverse(matrix: JetMatrix) -> JetMatrix:
    """Inverse of a matrix that is the identity at t = 0, by Neumann series."""
    size = len(matrix)
    ring = matrix[0][0].ring
    for i in range(size):
        for j in range(size):
            expected = 1 if i == j else 0
            if matrix[i][j].constant_term() != ring.constant(expected).constant_term():
                raise PreconditionError("Coframe matrix is not the identity at t = 0")
    neg_n = [
        [-(matrix[i][j] - (ring.one if i == j else ring.zero)) for j in range(size)]
        for i in range(size)
    ]
    result = identity_matrix(ring, size)
    power = identity_matrix(ring, size)
    for _ in range(ring.order):
        power = matrix_multiply(power, neg_n)
        if not any(e for row in power for e in row):
            break
        result = [[result[i][j] + power[i][j] for j in range(size)] for i in range(size)]
    return result


def beltrami_matrix(phi: VForm) -> JetMatrix:
    """Phi[k][a]: coefficient of wb^a (x) X_k in phi (0-based)."""
    m = phi.model.dim
    ring = phi.model.ring
    out = [[ring.zero for _ in range(m)] for _ in range(m)]
    for (J, k), jet in phi.terms.items():
        out[k][J[0]] = jet
    return out


def coframe_matrix(phi: VForm) -> JetMatrix:
    """P for generator substitution."""
    m = phi.model.dim
    ring = phi.model.ring
    beltrami = beltrami_matrix(phi)
    size = 2 * m
    out = identity_matrix(ring, size)
    for k in range(m):
        for a in range(m):
            out[k][m + a] = beltrami[k][a]
            out[m + k][a] = jet_conj(beltrami[k][a])
    return out


def _block_diag_lower(matrix: JetMatrix, lower: JetMatrix) -> JetMatrix:
    """diag(I, lower) . matrix, for a 2m x 2m matrix."""
    m = len(lower)
    out = [list(row) for row in matrix[:m]]
    lower_rows = matrix_multiply(lower, matrix[m:])
    return out + lower_rows


def substitute(form: Form, images: List[Form], cache: Dict[Mono, Form]) -> Form:
    """Apply the algebra morphism sending generator c to images[c]."""
    model = form.model
    out = model.zero_form()
    for mono, jet in form.terms.items():
        image = cache.get(mono)
        if image is None:
            image = model.constant_form(model.ring.one)
            for gen in mono:
                image = wedge(image, images[gen])
            cache[mono] = image
        out = out + image * jet
    return out


def row_form(model: ComplexModel, row: List[Jet]) -> Form:
    return Form(model, {(c,): jet for c, jet in enumerate(row) if jet})


def coframe_images(phi: VForm) -> List[Form]:
    """Generator-substitution images eta^k, conj(eta^k) without inverting P."""
    return [row_form(phi.model, row) for row in coframe_matrix(phi)]


@dataclass
class DeformedFrame:
    """Deformed coframe of a Beltrami differential under one rho convention.

    Attributes:
        model: Central model
        phi: Degree-1 Beltrami differential
        convention: One of CONVENTIONS
        matrix: Rows are rho(generator) in the old basis
        inverse: Rows are rho^-1(generator) in the old basis
    """

    model: ComplexModel
    phi: VForm
    convention: str
    matrix: JetMatrix
    inverse: JetMatrix
    _images: List[Form] = field(default_factory=list, repr=False)
    _inverse_images: List[Form] = field(default_factory=list, repr=False)
    _cache: Dict[Mono, Form] = field(default_factory=dict, repr=False)
    _inverse_cache: Dict[Mono, Form] = field(default_factory=dict, repr=False)
    _deformed: Optional[ComplexModel] = field(default=None, repr=False)

    def __post_init__(self):
        self._images = [row_form(self.model, row) for row in self.matrix]
        self._inverse_images = [row_form(self.model, row) for row in self.inverse]

    @property
    def coframe(self) -> List[Form]:
        """eta^1..eta^m as forms in the old basis."""
        return self._images[: self.model.dim]

    @property
    def conj_coframe(self) -> List[Form]:
        """Images of wb^1..wb^m (conj(eta^k) under generator substitution)."""
        return self._images[self.model.dim:]

    @property
    def dual_frame(self) -> JetMatrix:
        """Rows give X_k(t), then the conjugate frame, against (X_k, Xb_k)."""
        size = len(self.inverse)
        return [[self.inverse[j][i] for j in range(size)] for i in range(size)]

    def rho(self, form: Form) -> Form:
        return substitute(form, self._images, self._cache)

    def rho_inv(self, form: Form) -> Form:
        return substitute(form, self._inverse_images, self._inverse_cache)

    @property
    def deformed_model(self) -> ComplexModel:
        """Model whose generator differentials are rho^-1 d rho(e^c)."""
        if self._deformed is None:
            differentials = []
            for c in range(2 * self.model.dim):
                pulled = self.rho_inv(differential_d(self._images[c]))
                differentials.append(pulled.terms)
            self._deformed = ComplexModel(
                f"{self.model.name}@{self.convention}", self.model.dim, self.model.ring, differentials
            )
        return self._deformed


def build_frame(model: ComplexModel, phi: VForm, convention: str = GENERATOR_SUBSTITUTION) -> DeformedFrame:
    """Deformed coframe and its inverse over the jet ring.

    Raises:
        PreconditionError: If phi has degree != 1 or phi(0) != 0
    """
    if convention not in CONVENTIONS:
        raise PreconditionError(f"Unknown rho convention {convention!r}")
    if phi.terms and phi.degree != 1:
        raise PreconditionError(f"Frame needs a degree-1 Beltrami differential, got degree {phi.degree}")
    for jet in phi.terms.values():
        if jet.constant_term():
            raise PreconditionError("Beltrami differential must vanish at t = 0")
    m = model.dim
    matrix = coframe_matrix(phi)
    inverse = unipotent_inverse(matrix)
    if convention == DUAL_FRAME_NORMALIZED:
        lower = [row[m:] for row in inverse[m:]]
        lower_inv = unipotent_inverse(lower)
        matrix = _block_diag_lower(matrix, lower)
        ring = model.ring
        block = identity_matrix(ring, 2 * m)
        for i in range(m):
            for j in range(m):
                block[m + i][m + j] = lower_inv[i][j]
        inverse = matrix_multiply(inverse, block)
    return DeformedFrame(model=model, phi=phi, convention=convention, matrix=matrix, inverse=inverse)


def integrability_defect(frame: DeformedFrame) -> List[Form]:
    """(0,2)_t component of d eta^k in the deformed basis, for each k."""
    deformed = frame.deformed_model
    return [
        project_bidegree(deformed.d_generator(k), 0, 2).rebase(frame.model)
        for k in range(frame.model.dim)
    ]


def is_integrable(frame: DeformedFrame) -> bool:
    return not any(integrability_defect(frame))


def rho_apply(frame: DeformedFrame, x: Union[Form, VForm]) -> Union[Form, VForm]:
    """rho on forms; on vector forms, re-home coordinates onto the deformed frame.

    A vector form wb^J (x) X_k maps to rho(wb^J) (x) X_k(t), whose coordinates
    in the deformed frame are the original ones.
    """
    if isinstance(x, VForm):
        return x.rebase(frame.deformed_model)
    return frame.rho(x)


def rho_inverse(frame: DeformedFrame, x: Union[Form, VForm]) -> Union[Form, VForm]:
    if isinstance(x, VForm):
        return x.rebase(frame.model)
    return frame.rho_inv(x)


def _require_integrable(frame: DeformedFrame, order: Optional[int] = None) -> None:
    defect = integrability_defect(frame)
    if order is not None:
        defect = [f.truncated(order) for f in defect]
    if any(defect):
        shown = "; ".join(format_form(f) for f in defect if f)
        raise NonIntegrableError(f"Deformed structure is not integrable: {shown}", defect=defect)


def deformed_ops(frame: DeformedFrame, a: Form, order: Optional[int] = None) -> Tuple[Form, Form]:
    """(del_t a, delbar_t a) for ``a`` given in deformed coordinates.

    The result is again expressed in deformed coordinates. With ``order`` set,
    only integrability modulo m^(order+1) is required and both results are
    truncated to that order.

    Raises:
        NonIntegrableError: If the frame has a nonzero integrability defect
    """
    _require_integrable(frame, order)
    degree = a.homogeneous_bidegree()
    if degree is None:
        return a, a
    p, q = degree
    da = differential_d(a.rebase(frame.deformed_model)).rebase(frame.model)
    if order is not None:
        da = da.truncated(order)
    return project_bidegree(da, p + 1, q), project_bidegree(da, p, q + 1)


def deformed_vf_delbar(frame: DeformedFrame, psi: VForm, order: Optional[int] = None) -> VForm:
    """delbar_t on T^{1,0}_t-valued forms, in deformed coordinates."""
    _require_integrable(frame, order)
    out = vf_delbar(psi.rebase(frame.deformed_model)).rebase(frame.model)
    return out if order is None else out.truncated(order)


def _agreement_order(difference, limit: int) -> int:
    low = min((jet.min_degree() for jet in difference.terms.values()), default=None)
    if low is None or low > limit:
        return limit
    return low - 1


@dataclass
class ConjugationReport:
    """Agreement of rho^-1 delbar_t rho with the formula twist, per convention."""

    convention: str
    order: int
    form_agreement: int
    vform_agreement: int
    mismatches: List[dict] = field(default_factory=list)

    @property
    def agreement(self) -> int:
        return min(self.form_agreement, self.vform_agreement)


def verify_conjugation_identity(frame: DeformedFrame, order: Optional[int] = None, convention: Optional[str] = None) -> ConjugationReport:
    """Compare the genuine deformed delbar with the formula twists on all basis elements.

    Args:
        frame: Any frame of the Beltrami differential
        order: Highest jet degree to compare (default: ring order)
        convention: rho convention to test (default: the frame's own)

    Returns:
        ConjugationReport with the maximal agreement order on forms and vector forms
    """
    model = frame.model
    phi = frame.phi
    limit = model.ring.order if order is None else order
    if mc_defect(phi).truncated(limit):
        raise PreconditionError("Conjugation identity needs a Maurer-Cartan solution")
    convention = convention or frame.convention
    if convention != frame.convention:
        frame = build_frame(model, phi, convention)

    report = ConjugationReport(convention=convention, order=limit, form_agreement=limit, vform_agreement=limit)
    for degree in range(2 * model.dim + 1):
        for mono in model.basis_total(degree):
            x = model.monomial_form(mono)
            _, genuine = deformed_ops(frame, x, limit)
            formula = project_bidegree(
                twisted_delbar_form(phi, x), *_shift(model.bidegree(mono))
            )
            diff = (genuine - formula).truncated(limit)
            if diff:
                agreed = _agreement_order(diff, limit)
                report.form_agreement = min(report.form_agreement, agreed)
                if len(report.mismatches) < 5:
                    report.mismatches.append({"element": format_form(x), "difference": format_form(diff)})
    for q in range(model.dim + 1):
        for key in vform_basis(model, q):
            psi = VForm(model, q, {key: model.ring.one})
            diff = (deformed_vf_delbar(frame, psi, limit) - twisted_delbar_vform(phi, psi)).truncated(limit)
            if diff:
                report.vform_agreement = min(report.vform_agreement, _agreement_order(diff, limit))
    logger.info(
        "Conjugation identity (%s): forms agree to order %d, vector forms to order %d",
        convention,
        report.form_agreement,
        report.vform_agreement,
    )
    return report


def _shift(bidegree: Tuple[int, int]) -> Tuple[int, int]:
    return bidegree[0], bidegree[1] + 1
