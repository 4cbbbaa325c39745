"""Tests for the reports module (payloads and text rendering)."""

import pytest
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cohomology import FORM, cohomology_basis
from src.data_loader import corpus_path, load_case, load_model, load_series
from src.deformation import kodaira_spencer, mc_defect
from src.hodge import SAMPLED, detect_jumps, hodge_numbers
from src.jets import Direction, JetRing
from src.obstruction import extend_class, obstruction_report
from src.reports import (
    cohomology_payload,
    coords_payload,
    extension_payload,
    format_jump_message,
    hodge_payload,
    ks_payload,
    mc_check_payload,
    obstruction_payload,
    render_text,
    validate_payload,
)
from src.scalars import gauss
from src.utils import canonical_json


@pytest.fixture(scope="module")
def t11():
    model, deformation = load_case("iwasawa", "iwasawa-t11")
    return model, load_series(model, deformation)


class TestPayloads:
    """Tests for JSON payload builders."""

    def test_coords(self):
        assert coords_payload([gauss(0), gauss("1/2", -1), gauss(0, 1)]) == ["0", "1/2-1*i", "i"]

    def test_validate(self):
        model = load_model(corpus_path("kodaira_thurston"))
        payload = validate_payload(model)
        assert payload["dim"] == 2
        assert payload["parallelizable"] is False
        assert payload["structure"] == {"2": [{"coeff": "1", "holo": [1], "anti": [1]}]}

    def test_cohomology(self):
        model = load_model(corpus_path("iwasawa"), JetRing(["t"], 1))
        payload = cohomology_payload(cohomology_basis(model, FORM, 0, 1))
        assert payload["bidegree"] == "0,1"
        assert payload["h"] == 2
        assert payload["basis"][0] == [{"coeff": "1", "mono": {}, "holo": [], "anti": [1]}]

    def test_mc_check(self, t11):
        _, series = t11
        payload = mc_check_payload(series, mc_defect(series))
        assert payload == {"order": 3, "mc": True, "defect": []}

    def test_ks(self, t11):
        _, series = t11
        payload = ks_payload(kodaira_spencer(series, Direction.coordinate("t11"), order=1))
        assert payload["direction"] == "t11"
        assert payload["zero"] is False
        assert payload["representative"] == [{"coeff": "1", "mono": {}, "anti": [1], "vec": 1}]

    def test_extension_obstruction(self, t11):
        model, series = t11
        payload = extension_payload(extend_class(model.holo(3), series, 2, label="H^(1,0)[2]"))
        assert payload["success"] is False
        assert payload["obstruction"]["order"] == 1
        assert payload["class"] == "H^(1,0)[2]"

    def test_obstruction(self, t11):
        model, series = t11
        ext = extend_class(model.holo(3), series, 0, label="H^(1,0)[2]")
        payload = obstruction_payload(obstruction_report(ext, Direction.coordinate("t11"), 1, 2))
        assert payload["direction"] == "t11"
        assert payload["obstruction"]["formula"]["method"] == "formula"
        assert payload["obstruction"]["vanishes"] is False

    def test_hodge_is_serializable(self, t11):
        model, series = t11
        payload = hodge_payload(hodge_numbers(model, series, [(1, 0)], SAMPLED))
        text = canonical_json(payload)
        assert text == canonical_json(payload)
        assert all(isinstance(v, str) for point in payload["samples"] for v in point.values())


class TestJumpMessage:
    """Tests for format_jump_message."""

    def test_no_jumps(self):
        assert format_jump_message([]) == "No Hodge number jumps."

    def test_text(self):
        changes = detect_jumps({(1, 0): 3}, {(1, 0): 2})
        message = format_jump_message(changes)
        assert "Hodge number jumps" in message
        assert "* h^(1,0) drops from 3 to 2" in message

    def test_markdown(self):
        changes = detect_jumps({(1, 0): 3}, {(1, 0): 2})
        message = format_jump_message(changes, "markdown")
        assert message.startswith("## Hodge number jumps")
        assert "**h^(1,0)**" in message


class TestRenderText:
    """Tests for text rendering."""

    def test_hodge_table(self, t11):
        model, series = t11
        payload = hodge_payload(hodge_numbers(model, series, [(1, 0), (0, 1)], SAMPLED))
        text = render_text("hodge", payload)
        assert text.startswith("iwasawa (sampled)")
        assert "sampled" in text.splitlines()[1]

    def test_generic_payload(self):
        text = render_text("mc-check", {"order": 2, "mc": False, "defect": [{"coeff": "1"}]})
        assert "no" in text
        assert "1 term(s)" in text

    def test_ks_map(self):
        payload = {"directions": ["t1", "t2"], "matrix": [["1", "0"], ["0", "1"]], "rank": 2}
        text = render_text("ks", payload)
        assert text.rstrip().endswith("rank: 2")
        assert "[1, 0]" in text


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
