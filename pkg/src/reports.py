"""JSON payloads and text rendering for every command.

Payload builders turn engine results into plain dicts holding only strings,
integers, booleans and lists, with every scalar in the SCALAR grammar, so the
JSON output is byte-stable. Text output renders the same payloads as pandas
tables.
"""

from typing import Dict, Iterable, List, Optional

import pandas as pd

from src.cohomology import TANGENT, CohomologyBasis, Space
from src.data_loader import deformation_document, form_terms, model_document, vform_terms
from src.deformation import BeltramiSeries, KSClass, KSMap, SolveReport
from src.forms import ComplexModel, format_form
from src.frame import ConjugationReport
from src.hodge import HodgeTable
from src.obstruction import ExtensionResult, ObstructionEntry, ObstructionReport
from src.scalars import format_scalar
from src.utils import truncate_text
from src.vector_forms import VForm, format_vform


def coords_payload(coords: Iterable) -> List[str]:
    return [format_scalar(c) for c in coords]


def _monomial_classes(records: Optional[List[dict]]) -> Optional[List[dict]]:
    if records is None:
        return None
    return [{"mono": r["mono"], "coords": coords_payload(r["coords"])} for r in records]


def element_terms(element) -> List[dict]:
    return vform_terms(element) if isinstance(element, VForm) else form_terms(element)


def format_element(element) -> str:
    return format_vform(element) if isinstance(element, VForm) else format_form(element)


def validate_payload(model: ComplexModel) -> dict:
    brackets = []
    for (x, y), values in sorted(model.brackets().items()):
        for c, jet in sorted(values.items()):
            brackets.append({"x": x + 1, "y": y + 1, "gen": c + 1, "coeff": format_scalar(jet.constant_term())})
    return {
        "model": model.name,
        "dim": model.dim,
        "valid": True,
        "parallelizable": model.is_parallelizable,
        "structure": model_document(model)["structure"],
        "brackets": brackets,
    }


def cohomology_payload(basis: CohomologyBasis) -> dict:
    space = basis.space
    return {
        "model": basis.model.name,
        "kind": basis.kind,
        "bidegree": f"{space.p},{basis.q}" if basis.kind != TANGENT else None,
        "degree": basis.q,
        "label": basis.label(),
        "h": basis.h,
        "basis": [element_terms(rep) for rep in basis.representatives],
    }


def mc_check_payload(series: BeltramiSeries, defect: VForm) -> dict:
    return {
        "order": series.order,
        "mc": not defect,
        "defect": vform_terms(defect),
    }


def mc_solve_payload(series: BeltramiSeries, report: SolveReport) -> dict:
    obstruction = None
    if report.obstruction is not None:
        obstruction = {
            "order": report.obstruction["order"],
            "classes": _monomial_classes(report.obstruction["classes"]),
        }
    return {
        "success": report.success,
        "target_order": report.target_order,
        "achieved_order": report.achieved_order,
        "last_nonzero_order": report.last_nonzero_order,
        "orders": report.orders,
        "obstruction": obstruction,
        "series": deformation_document(series),
    }


def _normal_form_payload(ks: KSClass) -> List[dict]:
    model = ks.representative.model
    space = Space(model, TANGENT)
    out = []
    for (exp, key), coeff in ks.twisted_normal_form.items():
        out.append({
            "mono": model.ring.monomial_powers(exp),
            "basis": space.key_label(key),
            "coeff": format_scalar(coeff),
        })
    return out


def ks_payload(ks: KSClass) -> dict:
    return {
        "direction": ks.direction.label(),
        "order": ks.order,
        "representative": vform_terms(ks.representative),
        "coords": coords_payload(ks.coordinates),
        "zero": ks.is_zero,
        "twisted_normal_form": _normal_form_payload(ks),
    }


def ks_map_payload(ks_map: KSMap) -> dict:
    return {
        "directions": ks_map.directions,
        "matrix": [coords_payload(row) for row in ks_map.matrix],
        "rank": ks_map.rank,
    }


def extension_payload(ext: ExtensionResult) -> dict:
    obstruction = None
    if ext.obstruction is not None:
        obstruction = {
            "order": ext.obstruction["order"],
            "classes": _monomial_classes(ext.obstruction["classes"]),
        }
    return {
        "class": ext.label,
        "kind": ext.kind,
        "target_order": ext.target_order,
        "achieved_order": ext.achieved_order,
        "success": ext.success,
        "representative": element_terms(ext.representative),
        "orders": ext.orders,
        "obstruction": obstruction,
    }


def _entry_payload(entry: ObstructionEntry) -> dict:
    return {
        "method": entry.method,
        "representative": element_terms(entry.representative),
        "coords": _monomial_classes(entry.coords),
        "vanishes": entry.vanishes,
        "twisted_vanishes": entry.twisted_vanishes,
    }


def obstruction_payload(report: ObstructionReport) -> dict:
    direct = report.direct
    return {
        "class": report.label,
        "order": report.order,
        "direction": report.direction.label(),
        "obstruction": {
            "coords": _monomial_classes(direct.coords),
            "vanishes": direct.vanishes,
            "twisted_vanishes": direct.twisted_vanishes,
            "agreement": report.agreement,
            "representative": element_terms(direct.representative),
            "monomials": _monomial_classes(direct.monomials),
            "formula": _entry_payload(report.formula),
        },
    }


def hodge_payload(table: HodgeTable) -> dict:
    samples = [
        {name: format_scalar(value) for name, value in sorted(point.items())} for point in table.samples
    ]
    return {
        "model": table.model,
        "mode": table.mode,
        "table": table.rows,
        "jumps": table.jumps,
        "samples": samples,
    }


def conjugation_payload(reports: List[ConjugationReport]) -> dict:
    return {
        "conventions": [
            {
                "convention": r.convention,
                "order": r.order,
                "form_agreement": r.form_agreement,
                "vform_agreement": r.vform_agreement,
                "agreement": r.agreement,
                "mismatches": r.mismatches,
            }
            for r in reports
        ]
    }


# Text rendering


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list):
        if value and isinstance(value[0], dict):
            return f"{len(value)} term(s)"
        return "[" + ", ".join(str(v) for v in value) + "]"
    if isinstance(value, dict):
        return truncate_text(", ".join(f"{k}={_cell(v)}" for k, v in value.items()))
    return str(value)


def _table(rows: List[Dict], columns: Optional[List[str]] = None) -> str:
    if not rows:
        return "(no rows)"
    df = pd.DataFrame(rows, columns=columns, dtype=object)
    return df.map(_cell).to_string(index=False)


def format_jump_message(changes: List[dict], format_type: str = "text") -> str:
    """Format Hodge jumps as a text or markdown list.

    Args:
        changes: Change records from detect_jumps
        format_type: 'text' or 'markdown'
    """
    if not changes:
        return "No Hodge number jumps."
    if format_type == "markdown":
        lines = ["## Hodge number jumps", ""]
        lines += [f"- **h^({c['bidegree']})**: {c['message']}" for c in changes]
        return "\n".join(lines)
    lines = ["Hodge number jumps", "-" * 40]
    lines += [f"* {c['message']}" for c in changes]
    return "\n".join(lines)


def render_text(command: str, payload) -> str:
    """Human-readable rendering of a command payload."""
    if command == "hodge":
        text = [f"{payload['model']} ({payload['mode']})", _table(payload["table"]), ""]
        text.append(format_jump_message(payload["jumps"]))
        return "\n".join(text) + "\n"
    if command == "obstruct":
        rows = [
            {
                "class": r["class"],
                "order": r["order"],
                "direction": r["direction"],
                "vanishes": r["obstruction"]["vanishes"],
                "twisted_vanishes": r["obstruction"]["twisted_vanishes"],
                "agreement": r["obstruction"]["agreement"],
            }
            for r in (payload if isinstance(payload, list) else [payload])
        ]
        return _table(rows) + "\n"
    if command == "verify-identities":
        rows = [{k: v for k, v in c.items() if k != "mismatches"} for c in payload["conventions"]]
        return _table(rows) + "\n"
    if command == "ks" and "matrix" in payload:
        rows = [dict(direction=d, coords=row) for d, row in zip(payload["directions"], payload["matrix"])]
        return _table(rows) + f"\nrank: {payload['rank']}\n"
    rows = [{"field": key, "value": _cell(value)} for key, value in payload.items()]
    return _table(rows) + "\n"
