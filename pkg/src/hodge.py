"""Central and generic Hodge numbers, with jump detection.

Deformed ranks never invert the coframe matrix. For a (p,q)_t basis element
x, delbar_t(rho x) is the part of d(rho x) outside F^(p+1), the span of rho of
every monomial with at least p + 1 holomorphic generators. Hence::

    rank delbar_t on A^(p,q)_t = rank [ d rho(A^(p,q)) | rho(F^(p+1)) ] - dim F^(p+1)

and every entry is a polynomial in t, ~t once phi is read as a polynomial.
Symbolic mode ranks that matrix over the fraction field by Bareiss
elimination; sampled mode ranks it at two random conjugation-consistent
points and only trusts values on which the samples agree.
"""

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src import DEFAULT_SEED, MAX_SAMPLE_DENOMINATOR, SAMPLE_RETRIES
from src.cohomology import FORM, cohomology_basis
from src.deformation import BeltramiSeries, mc_defect
from src.errors import InvariantViolation, NonIntegrableError, PreconditionError
from src.forms import ComplexModel, Form, differential_d
from src.frame import coframe_images, coframe_matrix, substitute
from src.jets import JetRing, jet_eval
from src.linalg import SparseMatrix, generic_rank, rank, sample_point
from src.obstruction import first_order_obstructed
from src.vector_forms import VForm, format_vform

logger = logging.getLogger(__name__)

CENTRAL = "central"
SAMPLED = "sampled"
SYMBOLIC = "symbolic"
MODES = (CENTRAL, SAMPLED, SYMBOLIC)

Bidegree = Tuple[int, int]


def all_bidegrees(model: ComplexModel) -> List[Bidegree]:
    return [(p, q) for p in range(model.dim + 1) for q in range(model.dim + 1)]


def central_hodge_numbers(model: ComplexModel, bidegrees: Iterable[Bidegree]) -> Dict[Bidegree, int]:
    """h^(p,q) of the central fiber."""
    return {(p, q): cohomology_basis(model, FORM, p, q).h for p, q in bidegrees}


def _phi(series) -> VForm:
    return series.phi if isinstance(series, BeltramiSeries) else series


def _lift(phi: VForm, order: int) -> VForm:
    """phi read as a polynomial in a ring of the given order."""
    ring = phi.model.ring.with_order(order)
    model = phi.model.with_ring(ring)
    return VForm(model, 1, {key: jet.lift(ring) for key, jet in phi.terms.items()})


def _polynomial_degree(phi: VForm) -> int:
    return max(phi.max_jet_degree(), 1)


def require_polynomial_integrable(phi: VForm) -> None:
    """Maurer-Cartan must hold for phi as an exact polynomial, not only as a jet.

    Raises:
        NonIntegrableError: With the surviving defect
    """
    lifted = _lift(phi, 2 * _polynomial_degree(phi))
    defect = mc_defect(lifted)
    if defect:
        raise NonIntegrableError(
            f"Deformed structure is not integrable at generic points: {format_vform(defect)}",
            defect=defect,
        )


def _filtration_monomials(model: ComplexModel, p: int, k: int) -> list:
    return [mono for mono in model.basis_total(k) if model.bidegree(mono)[0] >= p]


def rank_matrix(model: ComplexModel, images: List[Form], p: int, q: int) -> Tuple[List[list], int]:
    """Jet matrix [d rho(A^(p,q)) | rho(F^(p+1))] and dim F^(p+1)."""
    k = p + q + 1
    rows = model.basis_total(k)
    row_index = {mono: i for i, mono in enumerate(rows)}
    cache: dict = {}
    columns: List[Form] = []
    for mono in model.basis(p, q):
        columns.append(differential_d(substitute(model.monomial_form(mono), images, cache)))
    filtration = _filtration_monomials(model, p + 1, k)
    for mono in filtration:
        columns.append(substitute(model.monomial_form(mono), images, cache))
    zero = model.ring.zero
    entries = [[zero] * len(columns) for _ in rows]
    for j, form in enumerate(columns):
        for mono, jet in form.terms.items():
            entries[row_index[mono]][j] = jet
    return entries, len(filtration)


def _deformed_numbers(
    model: ComplexModel,
    bidegrees: Sequence[Bidegree],
    delbar_rank,
) -> Dict[Bidegree, int]:
    out = {}
    for p, q in bidegrees:
        dim = comb(model.dim, p) * comb(model.dim, q)
        incoming = delbar_rank(p, q - 1) if q > 0 else 0
        out[(p, q)] = dim - delbar_rank(p, q) - incoming
    return out


def symbolic_hodge_numbers(model: ComplexModel, phi: VForm, bidegrees: Sequence[Bidegree]) -> Dict[Bidegree, int]:
    """Generic h^(p,q) with t, ~t treated as independent transcendentals."""
    cache: Dict[Bidegree, int] = {}

    def delbar_rank(p: int, q: int) -> int:
        if (p, q) not in cache:
            lifted = _lift(phi, (p + q + 1) * _polynomial_degree(phi))
            entries, fdim = rank_matrix(lifted.model, coframe_images(lifted), p, q)
            cache[(p, q)] = generic_rank(entries, SYMBOLIC).rank - fdim
        return cache[(p, q)]

    return _deformed_numbers(model, bidegrees, delbar_rank)


def evaluate_phi(phi: VForm, point: Dict[str, object]) -> VForm:
    """phi at a point, as a constant vector form over an order-0 ring."""
    ring = JetRing(phi.model.ring.params, 0)
    model = phi.model.with_ring(ring)
    return VForm(model, 1, {key: ring.constant(jet_eval(jet, point)) for key, jet in phi.terms.items()})


def _coframe_rank(phi0: VForm) -> int:
    rows = [[jet.constant_term() for jet in row] for row in coframe_matrix(phi0)]
    return rank(SparseMatrix.from_dense(rows))


def draw_point(phi: VForm, rng: np.random.Generator) -> Tuple[Dict[str, object], VForm]:
    """A sample point where the coframe matrix is invertible, resampling as needed."""
    ring = phi.model.ring
    for attempt in range(SAMPLE_RETRIES):
        point = sample_point(ring, rng, MAX_SAMPLE_DENOMINATOR)
        phi0 = evaluate_phi(phi, point)
        if _coframe_rank(phi0) == 2 * phi.model.dim:
            return point, phi0
        logger.info("Coframe matrix singular at sample %d; resampling", attempt + 1)
    raise PreconditionError(f"Coframe matrix singular at {SAMPLE_RETRIES} consecutive samples")


def point_hodge_numbers(phi0: VForm, bidegrees: Sequence[Bidegree]) -> Dict[Bidegree, int]:
    """Exact h^(p,q) of the fiber at one evaluated point."""
    model = phi0.model
    images = coframe_images(phi0)
    cache: Dict[Bidegree, int] = {}

    def delbar_rank(p: int, q: int) -> int:
        if (p, q) not in cache:
            entries, fdim = rank_matrix(model, images, p, q)
            values = [[e.constant_term() for e in row] for row in entries]
            matrix = SparseMatrix.from_dense(values) if values and values[0] else SparseMatrix.zeros(len(values), 0)
            cache[(p, q)] = rank(matrix) - fdim
        return cache[(p, q)]

    return _deformed_numbers(model, bidegrees, delbar_rank)


@dataclass
class HodgeTable:
    """Hodge numbers of one model and deformation.

    Attributes:
        model: Model name
        mode: One of MODES
        rows: One record per bidegree with central and deformed values
        jumps: Change records for bidegrees whose number differs from the central one
        samples: Sample points used in sampled mode
    """

    model: str
    mode: str
    rows: List[dict] = field(default_factory=list)
    jumps: List[dict] = field(default_factory=list)
    samples: List[dict] = field(default_factory=list)

    def value(self, p: int, q: int, column: Optional[str] = None) -> Optional[int]:
        column = column or self.mode
        for row in self.rows:
            if (row["p"], row["q"]) == (p, q):
                return row.get(column)
        raise KeyError(f"No row for bidegree ({p},{q})")


def detect_jumps(central: Dict[Bidegree, int], deformed: Dict[Bidegree, Optional[int]]) -> List[dict]:
    """Bidegrees whose deformed number differs from the central one.

    Args:
        central: h^(p,q) at t = 0
        deformed: Generic h^(p,q); None marks an inconclusive value

    Returns:
        List of change dictionaries, 'drop' or 'rise'
    """
    changes = []
    for (p, q), h0 in sorted(central.items()):
        h = deformed.get((p, q))
        if h is None or h == h0:
            continue
        kind = "drop" if h < h0 else "rise"
        verb = "drops" if h < h0 else "rises"
        changes.append({
            "bidegree": f"{p},{q}",
            "type": kind,
            "central": h0,
            "deformed": h,
            "change": h - h0,
            "message": f"h^({p},{q}) {verb} from {h0} to {h}",
        })
    return changes


def hodge_numbers(
    model: ComplexModel,
    series=None,
    bidegrees: Optional[Sequence[Bidegree]] = None,
    mode: str = CENTRAL,
    seed: int = DEFAULT_SEED,
) -> HodgeTable:
    """Hodge table in the requested mode, with a jump report.

    Args:
        model: Central model
        series: Beltrami differential (required unless mode is 'central')
        bidegrees: Bidegrees to report (default: all)
        mode: 'central', 'sampled' or 'symbolic'
        seed: Seed for the sampling generator

    Returns:
        HodgeTable

    Raises:
        NonIntegrableError: If phi fails Maurer-Cartan as a polynomial
        InvariantViolation: If a trusted deformed number exceeds the central one
    """
    if mode not in MODES:
        raise PreconditionError(f"Unknown Hodge mode {mode!r}; expected one of {list(MODES)}")
    degrees = list(bidegrees) if bidegrees else all_bidegrees(model)
    for p, q in degrees:
        if not (0 <= p <= model.dim and 0 <= q <= model.dim):
            raise PreconditionError(f"Bidegree ({p},{q}) out of range for dimension {model.dim}")
    central = central_hodge_numbers(model, degrees)
    table = HodgeTable(model=model.name, mode=mode)
    if mode == CENTRAL:
        table.rows = [{"p": p, "q": q, CENTRAL: central[(p, q)]} for p, q in degrees]
        return table
    if series is None:
        raise PreconditionError(f"Mode {mode!r} needs a deformation")
    phi = _phi(series)
    require_polynomial_integrable(phi)

    if mode == SYMBOLIC:
        deformed = symbolic_hodge_numbers(model, phi, degrees)
        statuses = {key: "ok" for key in degrees}
    else:
        rng = np.random.default_rng(seed)
        runs = []
        for _ in range(2):
            point, phi0 = draw_point(phi, rng)
            table.samples.append(point)
            runs.append(point_hodge_numbers(phi0, degrees))
        deformed, statuses = {}, {}
        for key in degrees:
            agree = runs[0][key] == runs[1][key]
            deformed[key] = runs[0][key] if agree else None
            statuses[key] = "ok" if agree else "inconclusive"
            if not agree:
                logger.info("Samples disagree on h^%s: %s vs %s", key, runs[0][key], runs[1][key])

    for p, q in degrees:
        table.rows.append({
            "p": p,
            "q": q,
            CENTRAL: central[(p, q)],
            mode: deformed[(p, q)],
            "status": statuses[(p, q)],
            "jump": deformed[(p, q)] is not None and deformed[(p, q)] != central[(p, q)],
        })
    table.jumps = detect_jumps(central, deformed)
    rises = [change for change in table.jumps if change["type"] == "rise"]
    if rises:
        raise InvariantViolation(
            f"Semicontinuity violated on {model.name}: " + "; ".join(c["message"] for c in rises),
            witness=rises,
        )
    return table


def jump_consistency(model: ComplexModel, series, p: int, q: int, table: Optional[HodgeTable] = None) -> dict:
    """Compare first-order obstruction of H^(p,q) classes with a sampled drop of h^(p,q).

    Returns:
        Dict with 'obstructed', 'drop' and 'consistent' (None when inconclusive)
    """
    if table is None:
        table = hodge_numbers(model, series, [(p, q)], SAMPLED)
    obstructed = any(first_order_obstructed(model, series, p, q).values())
    sampled = table.value(p, q, SAMPLED)
    central = table.value(p, q, CENTRAL)
    drop = None if sampled is None else sampled < central
    return {
        "obstructed": obstructed,
        "drop": drop,
        "consistent": None if drop is None else drop == obstructed,
    }


def annotate_consistency(model: ComplexModel, series, table: HodgeTable) -> HodgeTable:
    """Add a 'consistent' column to a sampled table."""
    for row in table.rows:
        check = jump_consistency(model, series, row["p"], row["q"], table)
        row["consistent"] = check["consistent"]
    return table
