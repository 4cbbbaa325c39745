"""Beltrami series: Maurer-Cartan defect, Kuranishi solving and Kodaira-Spencer classes.

The Kuranishi recursion has no harmonic gauge in an invariant model, so each
order is solved with the pivot-canonical preimage of the constant dbar on
A^{0,1}(T). Different gauges give different series but the same obstruction
classes, which is all the downstream code compares.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from src.cohomology import (
    TANGENT,
    Space,
    cohomology_basis,
    coordinates_at,
    delbar_matrix,
    from_vector,
    jet_monomials,
    twisted_complex,
)
from src.errors import InvariantViolation, PreconditionError
from src.forms import ComplexModel
from src.jets import Direction
from src.linalg import SparseMatrix, membership_solve, rank
from src.scalars import gauss
from src.vector_forms import VForm, twisted_delbar_vform, vf_bracket, vf_delbar

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BeltramiSeries:
    """A Beltrami differential phi(t) with phi(0) = 0.

    Args:
        phi: Degree-1 vector form with jet coefficients
        holomorphic: When True, coefficients may only involve t, never ~t
    """

    phi: VForm
    holomorphic: bool = False

    def __post_init__(self):
        phi = self.phi
        if phi.terms and phi.degree != 1:
            raise PreconditionError(f"A Beltrami differential has degree 1, got {phi.degree}")
        for key, jet in phi.terms.items():
            if jet.constant_term():
                raise PreconditionError(f"Beltrami differential has a constant term at {key}")
            if self.holomorphic and not jet.is_holomorphic:
                raise PreconditionError(f"Holomorphic series has a conjugate-variable term at {key}")

    @property
    def model(self) -> ComplexModel:
        return self.phi.model

    @property
    def order(self) -> int:
        return self.phi.model.ring.order

    def truncated(self, degree: int) -> "BeltramiSeries":
        return BeltramiSeries(self.phi.truncated(degree), self.holomorphic)

    def active_params(self) -> List[str]:
        """Parameters t_k whose t_k or ~t_k appears in phi."""
        ring = self.model.ring
        s = ring.num_params
        used = set()
        for jet in self.phi.terms.values():
            used |= {i % s for i in jet.variables_used()}
        return [ring.params[i] for i in sorted(used)]


def mc_defect(series) -> VForm:
    """dbar phi - 1/2 [phi, phi], a vector (0,2)-form; zero iff Maurer-Cartan holds."""
    phi = series.phi if isinstance(series, BeltramiSeries) else series
    out = vf_delbar(phi)
    if phi.terms:
        out = out - vf_bracket(phi, phi) * gauss("1/2")
    if not out.terms:
        return VForm.zero(phi.model, 2)
    return out


def is_maurer_cartan(series, order: Optional[int] = None) -> bool:
    defect = mc_defect(series)
    if order is not None:
        defect = defect.truncated(order)
    return not defect


@dataclass
class SolveReport:
    """Per-order outcome of :func:`mc_solve`."""

    target_order: int
    achieved_order: int
    orders: List[dict] = field(default_factory=list)
    obstruction: Optional[dict] = None

    @property
    def success(self) -> bool:
        return self.obstruction is None and self.achieved_order >= self.target_order

    @property
    def last_nonzero_order(self) -> int:
        nonzero = [entry["order"] for entry in self.orders if entry["terms"]]
        return max(nonzero, default=0)


def _tangent_space(model: ComplexModel) -> Space:
    return Space(model, TANGENT)


def mc_solve(phi1: VForm, order: Optional[int] = None, holomorphic: bool = False):
    """Solve Maurer-Cartan order by order from a first-order term.

    Args:
        phi1: Degree-1 vector form, homogeneous of jet degree 1 and dbar-closed
        order: Target order n (default: the ring order)
        holomorphic: Constrain the series to t-only monomials

    Returns:
        (BeltramiSeries, SolveReport)
    """
    model = phi1.model
    ring = model.ring
    n = ring.order if order is None else order
    if n < 1:
        raise PreconditionError(f"Target order must be >= 1, got {n}")
    if n > ring.order:
        raise PreconditionError(f"Target order {n} exceeds the ring order {ring.order}")
    if phi1.terms and phi1.degree != 1:
        raise PreconditionError(f"First-order term must have degree 1, got {phi1.degree}")
    if phi1.degree_part(1) != phi1:
        raise PreconditionError("First-order term must be homogeneous of jet degree 1")
    if vf_delbar(phi1):
        raise PreconditionError("First-order term is not dbar-closed")

    space = _tangent_space(model)
    dbar1 = delbar_matrix(space, 1)
    target_keys = space.basis(2)
    report = SolveReport(target_order=n, achieved_order=1)
    report.orders.append({"order": 1, "status": "given", "terms": len(phi1.terms)})
    phi = phi1 if phi1.terms else VForm.zero(model, 1)

    for k in range(2, n + 1):
        defect = mc_defect(phi).truncated(k)
        if defect.truncated(k - 1):
            raise InvariantViolation(f"Maurer-Cartan defect below order {k} after solving", witness=defect)
        top = defect.degree_part(k)
        correction = VForm.zero(model, 1)
        failures = []
        for exp in jet_monomials(top):
            vec = coordinates_at(top, target_keys, exp)
            result = membership_solve(dbar1, {i: -c for i, c in vec.items()})
            if not result.member:
                coords = cohomology_basis(model, TANGENT, q=2).coordinates(vec)
                failures.append({"mono": ring.monomial_powers(exp), "coords": coords})
                continue
            correction = correction + from_vector(space, 1, result.solution, exp)
        if failures:
            report.obstruction = {"order": k, "classes": failures}
            report.orders.append({"order": k, "status": "obstructed", "terms": 0})
            logger.info("Maurer-Cartan obstructed at order %d", k)
            break
        if holomorphic and any(not jet.is_holomorphic for jet in correction.terms.values()):
            raise InvariantViolation(f"Holomorphic solve produced conjugate terms at order {k}")
        phi = phi + correction
        report.achieved_order = k
        report.orders.append({"order": k, "status": "solved", "terms": len(correction.terms)})
        logger.debug("Solved order %d with %d new terms", k, len(correction.terms))

    return BeltramiSeries(phi, holomorphic=holomorphic), report


@dataclass
class KSClass:
    """Kodaira-Spencer class of order m in a direction.

    Attributes:
        representative: d_u phi truncated to degree m - 1
        order: m
        direction: u
        coordinates: Coordinates of the t = 0 value in the stored H^1(T) basis
        twisted_normal_form: Canonical residue in the order-(m-1) twisted complex;
            two representatives give the same jet-level class iff these agree
    """

    representative: VForm
    order: int
    direction: Direction
    coordinates: List[object]
    twisted_normal_form: Dict = field(default_factory=dict)

    @property
    def is_zero(self) -> bool:
        return not self.twisted_normal_form and not any(self.coordinates)


def kodaira_spencer(series: BeltramiSeries, u: Direction, order: Optional[int] = None) -> KSClass:
    """Kodaira-Spencer class of order m (default: the ring order) in direction u."""
    phi = series.phi
    model = phi.model
    m = model.ring.order if order is None else order
    if m < 1 or m > model.ring.order:
        raise PreconditionError(f"Kodaira-Spencer order must be in 1..{model.ring.order}, got {m}")
    if mc_defect(phi).truncated(m):
        raise PreconditionError(f"Maurer-Cartan fails below order {m + 1}")
    rep = phi.derive(u).truncated(m - 1)
    if not rep.terms:
        rep = VForm.zero(model, 1)
    elif twisted_delbar_vform(phi, rep).truncated(m - 1):
        raise InvariantViolation("Kodaira-Spencer representative is not twisted-closed", witness=rep)
    basis = cohomology_basis(model, TANGENT, q=1)
    coords = basis.class_of(rep)
    normal = {}
    if rep.terms:
        normal = twisted_complex(_tangent_space(model), phi, 0, m - 1, rep).normal_form(rep)
    return KSClass(representative=rep, order=m, direction=u, coordinates=coords, twisted_normal_form=normal)


@dataclass
class KSMap:
    """Kodaira-Spencer map on coordinate directions at t = 0."""

    directions: List[str]
    matrix: List[List[object]]
    rank: int


def kodaira_spencer_map(series: BeltramiSeries, order: Optional[int] = None) -> KSMap:
    """Matrix of t = 0 Kodaira-Spencer coordinates over all active parameters."""
    params = series.active_params()
    rows = []
    for name in params:
        ks = kodaira_spencer(series, Direction.coordinate(name), order)
        rows.append(ks.coordinates)
    matrix = SparseMatrix.from_dense(rows) if rows and rows[0] else SparseMatrix.zeros(len(rows), 0)
    return KSMap(directions=params, matrix=rows, rank=rank(matrix))
