"""Extension of cohomology classes along a deformation and their obstructions.

A class [alpha_0] of H^(p,q) or H^q(T) is extended order by order: at order k
the new part alpha_k must satisfy dbar alpha_k = -(degree-k part of the
twisted defect of alpha_0 + ... + alpha_(k-1)). Solvability is decided per jet
monomial against the constant dbar, so an obstruction is a list of t = 0
classes, one per degree-k monomial.

The order-n obstruction in a direction u is computed three ways:

* directly, as d_u of the degree-n twisted defect of alpha_(n-1)
* for forms, as del_tw(kappa _| alpha) - kappa _| del_tw(alpha)
* for vector forms, as the bracket [kappa, alpha]

where kappa is the Kodaira-Spencer representative of order n. The formula
versions agree with the direct one up to a fixed sign and a twisted-exact
term of the order-(n-1) complex; that agreement is checked, never assumed.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Union

from src.cohomology import (
    FORM,
    TANGENT,
    Element,
    Space,
    cohomology_basis,
    coordinates_at,
    delbar_matrix,
    from_vector,
    jet_monomials,
    twisted_exact,
)
from src.deformation import BeltramiSeries, mc_defect
from src.errors import InvariantViolation, PreconditionError
from src.forms import ComplexModel, Form
from src.frame import DUAL_FRAME_NORMALIZED, build_frame, deformed_ops
from src.jets import Direction
from src.linalg import membership_solve
from src.vector_forms import VForm, vf_bracket, vf_contract

logger = logging.getLogger(__name__)

# Sign s with formula = s * direct modulo twisted-exact terms
FORM_FORMULA_SIGN = 1
TANGENT_FORMULA_SIGN = -1


def _phi(series: Union[BeltramiSeries, VForm]) -> VForm:
    return series.phi if isinstance(series, BeltramiSeries) else series


def space_of(alpha: Element, kind: Optional[str] = None) -> Space:
    """The graded space an element lives in, checked against an expected kind."""
    if isinstance(alpha, VForm):
        space = Space(alpha.model, TANGENT)
    else:
        bidegree = alpha.homogeneous_bidegree()
        space = Space(alpha.model, FORM, bidegree[0] if bidegree else 0)
    if kind is not None and kind != space.kind:
        raise PreconditionError(f"Expected a {kind} class, got a {space.kind} element")
    return space


def _degree(space: Space, alpha: Element) -> int:
    if isinstance(alpha, VForm):
        return alpha.degree
    bidegree = alpha.homogeneous_bidegree()
    return bidegree[1] if bidegree else 0


@dataclass
class ExtensionResult:
    """Outcome of :func:`extend_class`.

    Attributes:
        space: Graded space of the class
        q: Degree of the class
        initial: Closed representative at t = 0
        phi: Beltrami differential
        target_order: Requested order
        achieved_order: Highest order with vanishing twisted defect
        representative: alpha(t) valid modulo m^(achieved_order + 1)
        orders: Per-order status records
        obstruction: Per-monomial classes at the first obstructed order, if any
        label: Class selector label such as ``H^(1,0)[2]``
    """

    space: Space
    q: int
    initial: Element
    phi: VForm
    target_order: int
    achieved_order: int
    representative: Element
    orders: List[dict] = field(default_factory=list)
    obstruction: Optional[dict] = None
    label: str = ""

    @property
    def success(self) -> bool:
        return self.obstruction is None and self.achieved_order >= self.target_order

    @property
    def kind(self) -> str:
        return self.space.kind

    def truncated(self, order: int) -> Element:
        """alpha_order, the representative modulo m^(order + 1)."""
        if order > self.achieved_order:
            raise PreconditionError(
                f"Class {self.label or self.space.label(self.q)} only extends to order "
                f"{self.achieved_order}, not {order}"
            )
        return self.representative.truncated(order)


def _monomial_classes(space: Space, q: int, obj: Element) -> List[dict]:
    """t = 0 classes of each jet monomial of a closed element of degree q."""
    basis = cohomology_basis(space.model, space.kind, space.p, q)
    ring = space.model.ring
    out = []
    for exp in jet_monomials(obj):
        coords = basis.coordinates(coordinates_at(obj, basis.keys, exp))
        out.append({"mono": ring.monomial_powers(exp), "coords": coords})
    return out


def extend_class(
    alpha0: Element,
    series: Union[BeltramiSeries, VForm],
    order: int,
    kind: Optional[str] = None,
    label: str = "",
) -> ExtensionResult:
    """Extend a t = 0 class along phi up to ``order``.

    Args:
        alpha0: Closed constant-coefficient representative
        series: Beltrami differential satisfying Maurer-Cartan to ``order``
        order: Target order n
        kind: Optional expected kind ('form' or 'tangent')
        label: Selector label carried into reports

    Returns:
        ExtensionResult stopping at the first obstructed order
    """
    phi = _phi(series)
    space = space_of(alpha0, kind)
    model = space.model
    ring = model.ring
    if order < 0 or order > ring.order:
        raise PreconditionError(f"Extension order must be in 0..{ring.order}, got {order}")
    if mc_defect(phi).truncated(order):
        raise PreconditionError(f"Maurer-Cartan fails below order {order + 1}")
    if any(not jet.is_constant for jet in alpha0.terms.values()):
        raise PreconditionError("Initial class representative must have constant coefficients")
    q = _degree(space, alpha0)
    if space.delbar(alpha0):
        raise PreconditionError(f"Initial representative is not dbar-closed in {space.label(q)}")

    dbar = delbar_matrix(space, q)
    target_keys = space.basis(q + 1)
    result = ExtensionResult(
        space=space,
        q=q,
        initial=alpha0,
        phi=phi,
        target_order=order,
        achieved_order=0,
        representative=alpha0,
        label=label or space.label(q),
    )
    result.orders.append({"order": 0, "status": "given"})
    alpha = alpha0

    for k in range(1, order + 1):
        defect = space.twisted(phi, alpha).truncated(k)
        if defect.truncated(k - 1):
            raise InvariantViolation(f"Twisted defect of {result.label} survives below order {k}")
        top = defect.degree_part(k)
        correction = space.zero(q)
        failures = []
        for exp in jet_monomials(top):
            vec = coordinates_at(top, target_keys, exp)
            solved = membership_solve(dbar, {i: -c for i, c in vec.items()})
            if not solved.member:
                coords = cohomology_basis(model, space.kind, space.p, q + 1).coordinates(vec)
                failures.append({"mono": ring.monomial_powers(exp), "coords": coords})
                continue
            correction = correction + from_vector(space, q, solved.solution, exp)
        if failures:
            result.obstruction = {"order": k, "classes": failures}
            result.orders.append({"order": k, "status": "obstructed"})
            logger.info("%s obstructed at order %d", result.label, k)
            break
        alpha = alpha + correction
        result.representative = alpha
        result.achieved_order = k
        result.orders.append({"order": k, "status": "solved", "terms": len(correction.terms)})
    return result


@dataclass
class ObstructionEntry:
    """One way of computing the order-n obstruction in a direction.

    Attributes:
        method: 'direct', 'formula' or 'bracket'
        representative: Degree q + 1 element with jets of degree n - 1
        coords: Per-monomial t = 0 classes ([{"mono", "coords"}]); the
            formula methods only fill them at order 1
        vanishes: All t = 0 classes vanish (direct) or the element is exact
            in the order-(n-1) twisted complex (formula methods)
        twisted_vanishes: Exactness in the order-(n-1) twisted complex
        monomials: Per-monomial t = 0 classes of the degree-n twisted defect
            itself (direct method only)
    """

    method: str
    order: int
    direction: Direction
    representative: Element
    coords: Optional[List[dict]]
    vanishes: bool
    twisted_vanishes: bool
    monomials: List[dict] = field(default_factory=list)


def _check_order(ext: ExtensionResult, order: Optional[int]) -> int:
    n = ext.achieved_order + 1 if order is None else order
    if n < 1:
        raise PreconditionError(f"Obstruction order must be >= 1, got {n}")
    if n > ext.space.model.ring.order:
        raise PreconditionError(f"Obstruction order {n} exceeds the ring order {ext.space.model.ring.order}")
    if n - 1 > ext.achieved_order:
        raise PreconditionError(
            f"{ext.label} extends only to order {ext.achieved_order}; no order-{n} obstruction"
        )
    return n


def _kappa(ext: ExtensionResult, u: Direction, n: int) -> VForm:
    kappa = ext.phi.derive(u).truncated(n - 1)
    return kappa if kappa.terms else VForm.zero(ext.space.model, 1)


def obstruction_direct(ext: ExtensionResult, u: Direction, order: Optional[int] = None) -> ObstructionEntry:
    """d_u of the degree-n twisted defect of alpha_(n-1), reduced per monomial at t = 0."""
    n = _check_order(ext, order)
    space = ext.space
    alpha = ext.truncated(n - 1)
    defect = space.twisted(ext.phi, alpha).truncated(n)
    if defect.truncated(n - 1):
        raise InvariantViolation(f"Twisted defect of {ext.label} survives below order {n}")
    direct = defect.derive(u).truncated(n - 1)
    coords = _monomial_classes(space, ext.q + 1, direct)
    return ObstructionEntry(
        method="direct",
        order=n,
        direction=u,
        representative=direct,
        coords=coords,
        vanishes=all(not any(c["coords"]) for c in coords),
        twisted_vanishes=twisted_exact(space, ext.phi, direct, n - 1),
        monomials=_monomial_classes(space, ext.q + 1, defect),
    )


def _formula_entry(ext: ExtensionResult, u: Direction, n: int, method: str, value: Element) -> ObstructionEntry:
    space = ext.space
    exact = twisted_exact(space, ext.phi, value, n - 1)
    coords = None
    if n == 1 and not space.delbar(value):
        coords = _monomial_classes(space, ext.q + 1, value)
    return ObstructionEntry(
        method=method,
        order=n,
        direction=u,
        representative=value,
        coords=coords,
        vanishes=exact,
        twisted_vanishes=exact,
    )


@lru_cache(maxsize=16)
def _normalized_frame(phi: VForm):
    return build_frame(phi.model, phi, DUAL_FRAME_NORMALIZED)


def relative_del(ext: ExtensionResult, x: Form, order: int) -> Form:
    """The twisted relative del at ``order``, via the dual-frame normalized rho."""
    frame = _normalized_frame(ext.phi)
    return deformed_ops(frame, x, order)[0]


def obstruction_formula_form(ext: ExtensionResult, u: Direction, order: Optional[int] = None) -> ObstructionEntry:
    """del_tw(kappa _| alpha) - kappa _| del_tw(alpha) at order n - 1."""
    if ext.kind != FORM:
        raise PreconditionError("The contraction formula applies to form classes only")
    n = _check_order(ext, order)
    alpha = ext.truncated(n - 1)
    kappa = _kappa(ext, u, n)
    first = relative_del(ext, vf_contract(kappa, alpha), n - 1)
    second = vf_contract(kappa, relative_del(ext, alpha, n - 1))
    return _formula_entry(ext, u, n, "formula", (first - second).truncated(n - 1))


def obstruction_bracket_tangent(ext: ExtensionResult, u: Direction, order: Optional[int] = None) -> ObstructionEntry:
    """[kappa, alpha_(n-1)] truncated to order n - 1."""
    if ext.kind != TANGENT:
        raise PreconditionError("The bracket formula applies to tangent classes only")
    n = _check_order(ext, order)
    alpha = ext.truncated(n - 1)
    kappa = _kappa(ext, u, n)
    value = vf_bracket(kappa, alpha).truncated(n - 1)
    if not value.terms:
        value = VForm.zero(ext.space.model, ext.q + 1)
    return _formula_entry(ext, u, n, "bracket", value)


def formula_sign(kind: str) -> int:
    return TANGENT_FORMULA_SIGN if kind == TANGENT else FORM_FORMULA_SIGN


def formulas_agree(ext: ExtensionResult, formula: ObstructionEntry, direct: ObstructionEntry) -> bool:
    """formula - sign * direct is exact in the order-(n-1) twisted complex."""
    difference = formula.representative - direct.representative * formula_sign(ext.kind)
    return twisted_exact(ext.space, ext.phi, difference, formula.order - 1)


@dataclass
class ObstructionReport:
    """Direct and formula obstructions of one class, order and direction."""

    label: str
    class_index: Optional[int]
    order: int
    direction: Direction
    direct: ObstructionEntry
    formula: ObstructionEntry
    agreement: bool

    @property
    def vanishes(self) -> bool:
        return self.direct.vanishes


def obstruction_report(
    ext: ExtensionResult,
    u: Direction,
    order: Optional[int] = None,
    class_index: Optional[int] = None,
) -> ObstructionReport:
    """Compute the obstruction both ways and cross-check them."""
    direct = obstruction_direct(ext, u, order)
    if ext.kind == FORM:
        formula = obstruction_formula_form(ext, u, direct.order)
    else:
        formula = obstruction_bracket_tangent(ext, u, direct.order)
    agreement = formulas_agree(ext, formula, direct)
    if not agreement:
        logger.warning(
            "Formula and direct obstructions disagree for %s at order %d along %s",
            ext.label,
            direct.order,
            u.label(),
        )
    return ObstructionReport(
        label=ext.label,
        class_index=class_index,
        order=direct.order,
        direction=u,
        direct=direct,
        formula=formula,
        agreement=agreement,
    )


def default_directions(series: Union[BeltramiSeries, VForm]) -> List[Direction]:
    """Coordinate directions of the variables phi uses, or of every parameter."""
    phi = _phi(series)
    ring = phi.model.ring
    used = set()
    for jet in phi.terms.values():
        used |= jet.variables_used()
    names = [ring.variables[i] for i in sorted(used)] or list(ring.params)
    return [Direction.coordinate(name) for name in names]


def obstruction_sweep(
    model: ComplexModel,
    series: Union[BeltramiSeries, VForm],
    kind: str = FORM,
    p: int = 0,
    q: int = 0,
    max_order: int = 1,
    directions: Optional[Sequence[Direction]] = None,
) -> List[ObstructionReport]:
    """Obstruction reports for every basis class, order and direction.

    Each class is extended as far as ``max_order - 1`` allows; orders beyond
    the first obstruction are skipped since alpha_(n-1) does not exist there.

    Returns:
        Reports sorted by (class index, order, direction label)
    """
    basis = cohomology_basis(model, kind, p, q)
    dirs = list(directions) if directions else default_directions(series)
    reports = []
    for index, rep in enumerate(basis.representatives):
        label = f"{basis.label()}[{index}]"
        ext = extend_class(rep, series, max_order - 1, kind=kind, label=label)
        top = min(ext.achieved_order + 1, max_order)
        for n in range(1, top + 1):
            for u in dirs:
                reports.append(obstruction_report(ext, u, n, class_index=index))
    reports.sort(key=lambda r: (r.class_index, r.order, r.direction.label()))
    logger.info("Obstruction sweep over %s: %d reports", basis.label(), len(reports))
    return reports


def first_order_obstructed(
    model: ComplexModel,
    series: Union[BeltramiSeries, VForm],
    p: int,
    q: int,
) -> Dict[int, bool]:
    """Per basis class of H^(p,q): is the class obstructed at order 1 in an active direction?"""
    out = {}
    for report in obstruction_sweep(model, series, FORM, p, q, max_order=1):
        out[report.class_index] = out.get(report.class_index, False) or not report.vanishes
    return out
