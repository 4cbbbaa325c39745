"""Loading and writing of model, deformation and fixture documents.

This module handles:
- Model documents (structure equations of the central fiber)
- Deformation documents (a Beltrami series "phi" or a first-order term "phi1")
- Form and vector-form term lists in the exact SCALAR grammar
- The bundled corpus and its expected-results fixtures
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

from src import CORPUS_DIR, CORPUS_MODELS, DEFORMATIONS_DIR, EXPECTED_DIR
from src.deformation import BeltramiSeries
from src.errors import PreconditionError, SchemaError
from src.forms import ComplexModel, Form
from src.jets import Direction, Exponent, Jet, JetRing
from src.scalars import format_scalar, parse_scalar
from src.vector_forms import VForm

logger = logging.getLogger(__name__)

Document = Union[Mapping, str, Path]


def read_json(path: Union[str, Path]) -> dict:
    """Read a JSON document.

    Raises:
        FileNotFoundError: If the file does not exist
        SchemaError: If the file is not valid JSON
    """
    filepath = Path(path)
    if not filepath.exists():
        raise FileNotFoundError(f"Document not found at {filepath}")
    try:
        with open(filepath, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{filepath} is not valid JSON: {exc}") from exc


def _as_document(document: Document) -> dict:
    if isinstance(document, (str, Path)):
        return read_json(document)
    if not isinstance(document, Mapping):
        raise SchemaError(f"Expected a JSON object, got {type(document).__name__}")
    return dict(document)


def _require(doc: Mapping, key: str, kind, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing required key {key!r}")
    value = doc[key]
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"{where}: {key!r} must be an integer")
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: {key!r} has type {type(value).__name__}")
    return value


def _index_list(value, dim: int, where: str) -> List[int]:
    if not isinstance(value, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in value):
        raise SchemaError(f"{where}: index list must be a list of integers, got {value!r}")
    for i in value:
        if not 1 <= i <= dim:
            raise SchemaError(f"{where}: index {i} out of range 1..{dim}")
    return value


# Jets and terms


def parse_mono(ring: JetRing, mono: Optional[Mapping], where: str = "term") -> Exponent:
    """Exponent tuple for a {variable: power} mapping."""
    if mono is None:
        mono = {}
    if not isinstance(mono, Mapping):
        raise SchemaError(f"{where}: 'mono' must be an object, got {mono!r}")
    unknown = [name for name in mono if name not in ring.variables]
    if unknown:
        raise SchemaError(f"{where}: unknown variables {unknown}; ring has {list(ring.variables)}")
    return ring.monomial(mono)


def _coefficient_jet(ring: JetRing, term: Mapping, where: str) -> Jet:
    coeff = parse_scalar(_require(term, "coeff", str, where))
    return Jet.from_dict(ring, {parse_mono(ring, term.get("mono"), where): coeff})


def _jet_terms(jet: Jet) -> List[tuple]:
    return [(jet.ring.monomial_powers(exp), format_scalar(c)) for exp, c in jet.terms()]


def parse_form(model: ComplexModel, terms: List[Mapping]) -> Form:
    """Form from [{"coeff", "mono", "holo", "anti"}] terms; repeated keys add up."""
    if not isinstance(terms, list):
        raise SchemaError(f"Form terms must be a list, got {type(terms).__name__}")
    out = model.zero_form()
    for i, term in enumerate(terms):
        where = f"form term {i}"
        if not isinstance(term, Mapping):
            raise SchemaError(f"{where}: expected an object")
        holo = _index_list(term.get("holo", []), model.dim, where)
        anti = _index_list(term.get("anti", []), model.dim, where)
        if len(set(holo)) != len(holo) or len(set(anti)) != len(anti):
            raise SchemaError(f"{where}: repeated index in holo {holo} or anti {anti}")
        out = out + model.form_ij(holo, anti, _coefficient_jet(model.ring, term, where))
    return out


def form_terms(form: Form) -> List[dict]:
    """Canonical term list of a form, sorted by basis monomial then jet monomial."""
    out = []
    for (I, J), jet in form.items_ij():
        for mono, coeff in _jet_terms(jet):
            out.append({"coeff": coeff, "mono": mono, "holo": list(I), "anti": list(J)})
    return out


def parse_vform(model: ComplexModel, terms: List[Mapping], degree: Optional[int] = None) -> VForm:
    """Vector form from [{"coeff", "mono", "anti", "vec"}] terms."""
    if not isinstance(terms, list):
        raise SchemaError(f"Vector form terms must be a list, got {type(terms).__name__}")
    out: Optional[VForm] = VForm.zero(model, degree) if degree is not None else None
    for i, term in enumerate(terms):
        where = f"vector form term {i}"
        if not isinstance(term, Mapping):
            raise SchemaError(f"{where}: expected an object")
        anti = _index_list(term.get("anti", []), model.dim, where)
        if len(set(anti)) != len(anti):
            raise SchemaError(f"{where}: repeated anti index in {anti}")
        vec = _require(term, "vec", int, where)
        _index_list([vec], model.dim, where)
        jet = _coefficient_jet(model.ring, term, where)
        if degree is not None and len(anti) != degree:
            raise SchemaError(f"{where}: expected {degree} anti indices, got {len(anti)}")
        order = sorted(range(len(anti)), key=lambda a: anti[a])
        inversions = sum(1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b])
        element = VForm.basis_element(model, sorted(anti), vec, jet * (-1 if inversions % 2 else 1))
        out = element if out is None else out + element
    return out if out is not None else VForm.zero(model, 1)


def vform_terms(psi: VForm) -> List[dict]:
    """Canonical term list of a vector form."""
    out = []
    for J, k, jet in psi.items_1based():
        for mono, coeff in _jet_terms(jet):
            out.append({"coeff": coeff, "mono": mono, "anti": list(J), "vec": k})
    return out


# Models


def model_ring(document: Document, deformation: Optional["DeformationDocument"] = None, order: Optional[int] = None) -> JetRing:
    """Jet ring for a run: deformation params/order first, then the model's, then ``order``."""
    doc = _as_document(document)
    params = list(doc.get("params") or ["t"])
    ring_order = doc.get("order", 1)
    if deformation is not None:
        params = deformation.params or params
        if deformation.order is not None:
            ring_order = deformation.order
    if order is not None:
        ring_order = order
    if not isinstance(ring_order, int) or isinstance(ring_order, bool):
        raise SchemaError(f"Ring order must be an integer, got {ring_order!r}")
    if not all(isinstance(p, str) for p in params):
        raise SchemaError(f"Parameter names must be strings, got {params!r}")
    return JetRing(params, ring_order)


def load_model(document: Document, ring: Optional[JetRing] = None) -> ComplexModel:
    """Load and validate a model document.

    Args:
        document: Parsed JSON object or path to one
        ring: Jet ring to use instead of the document's params/order

    Returns:
        Validated ComplexModel

    Raises:
        SchemaError: If the document does not follow the model schema
        ModelValidationError: If d^2 != 0, integrability or Jacobi fails
    """
    doc = _as_document(document)
    name = _require(doc, "name", str, "model")
    dim = _require(doc, "dim", int, f"model {name}")
    if dim < 1:
        raise SchemaError(f"model {name}: dimension must be >= 1, got {dim}")
    structure = doc.get("structure", {})
    if not isinstance(structure, Mapping):
        raise SchemaError(f"model {name}: 'structure' must be an object")
    ring = ring or model_ring(doc)

    parsed: Dict[int, Dict] = {}
    for key, terms in structure.items():
        where = f"model {name} structure[{key}]"
        try:
            k = int(key)
        except ValueError as exc:
            raise SchemaError(f"{where}: key must be a generator index") from exc
        if not 1 <= k <= dim:
            raise SchemaError(f"{where}: generator index out of range 1..{dim}")
        if not isinstance(terms, list):
            raise SchemaError(f"{where}: expected a list of terms")
        equation: Dict = {}
        for i, term in enumerate(terms):
            if not isinstance(term, Mapping):
                raise SchemaError(f"{where} term {i}: expected an object")
            holo = tuple(_index_list(term.get("holo", []), dim, f"{where} term {i}"))
            anti = tuple(_index_list(term.get("anti", []), dim, f"{where} term {i}"))
            coeff = parse_scalar(_require(term, "coeff", str, f"{where} term {i}"))
            equation[(holo, anti)] = equation[(holo, anti)] + coeff if (holo, anti) in equation else coeff
        parsed[k] = equation

    model = ComplexModel.from_structure(name, dim, ring, parsed)
    model.validate()
    logger.info("Loaded model %s (dim %d, ring order %d)", name, dim, ring.order)
    return model


def model_document(model: ComplexModel) -> dict:
    """Model document with the structure equations dw^k of a constant model."""
    structure = {}
    for k in range(model.dim):
        terms = form_terms(model.d_generator(k))
        if terms:
            structure[str(k + 1)] = [
                {"coeff": t["coeff"], "holo": t["holo"], "anti": t["anti"]} for t in terms
            ]
    return {
        "name": model.name,
        "dim": model.dim,
        "params": list(model.ring.params),
        "order": model.ring.order,
        "structure": structure,
    }


# Deformations


@dataclass(frozen=True)
class DeformationDocument:
    """A parsed deformation document; terms stay raw until a model is known."""

    name: str
    params: List[str]
    order: Optional[int]
    holomorphic: bool
    phi: Optional[List[dict]] = None
    phi1: Optional[List[dict]] = None


def read_deformation(document: Document) -> DeformationDocument:
    """Schema-check a deformation document.

    Raises:
        SchemaError: If neither or both of 'phi' and 'phi1' are present, or fields are mistyped
    """
    doc = _as_document(document)
    params = _require(doc, "params", list, "deformation")
    order = doc.get("order")
    if order is not None and (not isinstance(order, int) or isinstance(order, bool)):
        raise SchemaError(f"deformation: 'order' must be an integer, got {order!r}")
    holomorphic = doc.get("holomorphic", False)
    if not isinstance(holomorphic, bool):
        raise SchemaError(f"deformation: 'holomorphic' must be a boolean, got {holomorphic!r}")
    phi, phi1 = doc.get("phi"), doc.get("phi1")
    if (phi is None) == (phi1 is None):
        raise SchemaError("deformation: exactly one of 'phi' and 'phi1' is required")
    for key, terms in (("phi", phi), ("phi1", phi1)):
        if terms is not None and not isinstance(terms, list):
            raise SchemaError(f"deformation: {key!r} must be a list of terms")
    return DeformationDocument(
        name=str(doc.get("name", "")),
        params=list(params),
        order=order,
        holomorphic=holomorphic,
        phi=phi,
        phi1=phi1,
    )


def _check_holomorphic(phi: VForm, holomorphic: bool) -> None:
    if not holomorphic:
        return
    for jet in phi.terms.values():
        if not jet.is_holomorphic:
            raise PreconditionError("Holomorphic deformation has a conjugate-variable term")


def load_series(model: ComplexModel, deformation: DeformationDocument, holomorphic: bool = False) -> BeltramiSeries:
    """Beltrami series from a document carrying 'phi'."""
    if deformation.phi is None:
        raise SchemaError(f"deformation {deformation.name}: expected 'phi', found 'phi1'")
    flag = holomorphic or deformation.holomorphic
    phi = parse_vform(model, deformation.phi, degree=1)
    return BeltramiSeries(phi, holomorphic=flag)


def load_first_order(model: ComplexModel, deformation: DeformationDocument, holomorphic: bool = False) -> VForm:
    """First-order term from a document carrying 'phi1' (or the linear part of 'phi')."""
    terms = deformation.phi1 if deformation.phi1 is not None else deformation.phi
    phi1 = parse_vform(model, terms, degree=1)
    if deformation.phi1 is None:
        phi1 = phi1.degree_part(1)
    _check_holomorphic(phi1, holomorphic or deformation.holomorphic)
    return phi1


def deformation_document(series: BeltramiSeries, name: str = "") -> dict:
    """Serialize a series in the deformation schema."""
    ring = series.model.ring
    doc = {
        "params": list(ring.params),
        "order": ring.order,
        "holomorphic": series.holomorphic,
        "phi": vform_terms(series.phi),
    }
    if name:
        doc = {"name": name, **doc}
    return doc


def parse_direction(text: str, ring: JetRing) -> Direction:
    """Direction from "t11" or "t11=1,t12=1/2"; variables must exist in the ring."""
    coeffs = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, value = part.partition("=")
        name = name.strip()
        if name not in ring.variables:
            raise SchemaError(f"Unknown direction variable {name!r}; ring has {list(ring.variables)}")
        coeffs[name] = parse_scalar(value.strip()) if value else parse_scalar("1")
    if not coeffs:
        raise SchemaError(f"Empty direction {text!r}")
    return Direction(coeffs)


# Corpus


def corpus_path(name: str) -> Path:
    filepath = CORPUS_DIR / f"{name}.json"
    if not filepath.exists():
        raise FileNotFoundError(f"Corpus model {name!r} not found at {filepath}")
    return filepath


def corpus_models(ring: Optional[JetRing] = None) -> Dict[str, ComplexModel]:
    """The bundled central fibers, loaded and validated.

    Returns:
        Dict mapping model name to ComplexModel, in CORPUS_MODELS order
    """
    return {name: load_model(corpus_path(name), ring) for name in CORPUS_MODELS}


def deformation_path(name: str) -> Path:
    filepath = DEFORMATIONS_DIR / f"{name}.json"
    if not filepath.exists():
        raise FileNotFoundError(f"Deformation {name!r} not found at {filepath}")
    return filepath


def load_case(model_name: str, deformation_name: str, order: Optional[int] = None):
    """Corpus model and deformation sharing the deformation's ring.

    Returns:
        (ComplexModel, DeformationDocument)
    """
    deformation = read_deformation(deformation_path(deformation_name))
    model_doc = read_json(corpus_path(model_name))
    ring = model_ring(model_doc, deformation, order)
    return load_model(model_doc, ring), deformation


def load_expected(name: str) -> dict:
    """Acceptance fixture for a corpus model.

    Each recorded value is an object {"value": ..., "provenance": ...}.
    """
    filepath = EXPECTED_DIR / f"{name}.json"
    if not filepath.exists():
        raise FileNotFoundError(f"Expected results not found at {filepath}")
    return read_json(filepath)
