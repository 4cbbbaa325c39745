"""Tests for the obstruction module (class extension and obstruction formulas)."""

import pytest
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cohomology import FORM, TANGENT, cohomology_basis
from src.data_loader import load_case, load_expected, load_first_order, load_series
from src.deformation import mc_solve
from src.errors import PreconditionError
from src.forms import wedge
from src.jets import Direction
from src.obstruction import (
    FORM_FORMULA_SIGN,
    TANGENT_FORMULA_SIGN,
    default_directions,
    extend_class,
    first_order_obstructed,
    formula_sign,
    obstruction_bracket_tangent,
    obstruction_direct,
    obstruction_formula_form,
    obstruction_report,
    obstruction_sweep,
    space_of,
)
from src.vector_forms import VForm


def case(deformation_name, model_name="iwasawa"):
    model, deformation = load_case(model_name, deformation_name)
    return model, load_series(model, deformation)


@pytest.fixture(scope="module")
def nakamura():
    model, deformation = load_case("iwasawa", "nakamura", order=3)
    series, _ = mc_solve(load_first_order(model, deformation))
    return model, series


class TestExtendClass:
    """Tests for extend_class."""

    def test_w3_obstructed_along_t11(self):
        model, series = case("iwasawa-t11")
        ext = extend_class(model.holo(3), series, 2)
        assert not ext.success
        assert ext.achieved_order == 0
        assert ext.obstruction["order"] == 1
        assert any(any(entry["coords"]) for entry in ext.obstruction["classes"])

    def test_w3_extends_along_t31(self):
        model, series = case("iwasawa-t31")
        ext = extend_class(model.holo(3), series, 3)
        assert ext.success
        assert ext.achieved_order == 3
        assert ext.representative == model.holo(3)

    def test_label_defaults_to_space(self):
        model, series = case("iwasawa-t31")
        assert extend_class(model.holo(1), series, 1).label == "H^(1,0)"
        assert extend_class(model.holo(1), series, 1, label="H^(1,0)[0]").label == "H^(1,0)[0]"

    def test_tangent_class_extends(self):
        """wb2 (x) X1 picks up t wb3 (x) X3 along t wb1 (x) X2."""
        model, series = case("iwasawa-x2")
        alpha = VForm.basis_element(model, [2], 1)
        ext = extend_class(alpha, series, 2, kind=TANGENT)
        assert ext.kind == TANGENT
        assert ext.achieved_order >= 1
        first = ext.truncated(1) - alpha
        assert first.degree_part(1) == first
        assert set(first.terms) == {((2,), 2)}

    def test_rejects_open_representative(self):
        model, series = case("iwasawa-t31")
        with pytest.raises(PreconditionError, match=r"H\^\(0,1\)"):
            extend_class(model.anti(3), series, 1)

    def test_rejects_non_constant_representative(self):
        model, series = case("iwasawa-t31")
        alpha = model.form_ij([1], [], model.ring.gen("t31"))
        with pytest.raises(PreconditionError):
            extend_class(alpha, series, 1)

    def test_rejects_order_above_ring(self):
        model, series = case("iwasawa-t31")
        with pytest.raises(PreconditionError):
            extend_class(model.holo(1), series, 4)

    def test_rejects_non_maurer_cartan(self):
        model, series = case("bad-omega3bar")
        with pytest.raises(PreconditionError):
            extend_class(model.holo(1), series, 1)

    def test_truncated_past_achieved_order(self):
        model, series = case("iwasawa-t11")
        ext = extend_class(model.holo(3), series, 2)
        with pytest.raises(PreconditionError):
            ext.truncated(1)

    def test_kind_mismatch(self):
        model, _ = case("iwasawa-t31")
        with pytest.raises(PreconditionError):
            space_of(model.holo(1), TANGENT)


class TestFirstOrderObstruction:
    """Tests for the order-1 obstruction of H^(1,0) on the Iwasawa manifold."""

    @pytest.mark.parametrize("deformation", ["iwasawa-t11", "iwasawa-t31"])
    def test_w3_matches_fixture(self, deformation):
        model, series = case(deformation)
        expected = load_expected("iwasawa")["values"]["obstruction_w3"]["value"][deformation]
        ext = extend_class(model.holo(3), series, 0)
        report = obstruction_report(ext, Direction.coordinate(series.active_params()[0]), 1, class_index=2)
        assert report.vanishes is expected
        assert report.agreement

    def test_contraction_value(self):
        """The formula reduces to -kappa _| del w3 = wb1 ^ w2 along t11."""
        model, series = case("iwasawa-t11")
        ext = extend_class(model.holo(3), series, 0)
        entry = obstruction_formula_form(ext, Direction.coordinate("t11"), 1)
        assert entry.representative == wedge(model.anti(1), model.holo(2))
        assert not entry.vanishes
        assert entry.coords is not None

    def test_per_monomial_classes(self):
        """The degree-1 defect of w3 sits on the single monomial t11."""
        model, series = case("iwasawa-t11")
        ext = extend_class(model.holo(3), series, 0)
        entry = obstruction_direct(ext, Direction.coordinate("t11"), 1)
        assert [m["mono"] for m in entry.monomials] == [{"t11": 1}]
        assert [c["mono"] for c in entry.coords] == [{}]
        assert entry.coords[0]["coords"] == entry.monomials[0]["coords"]

    def test_per_class_flags(self):
        model, series = case("iwasawa-t11")
        assert first_order_obstructed(model, series, 1, 0) == {0: False, 1: False, 2: True}
        model, series = case("iwasawa-t31")
        assert first_order_obstructed(model, series, 1, 0) == {0: False, 1: False, 2: False}


class TestBracketFormula:
    """Tests for the tangent bracket obstruction."""

    def test_bracket_is_exact(self):
        model, series = case("iwasawa-x2")
        ext = extend_class(VForm.basis_element(model, [2], 1), series, 0, kind=TANGENT)
        report = obstruction_report(ext, Direction.coordinate("t"), 1)
        e = VForm.basis_element(model, [1, 2], 3)
        assert report.formula.method == "bracket"
        assert report.formula.representative in (e, e * -1)
        assert report.formula.representative == report.direct.representative * TANGENT_FORMULA_SIGN
        assert report.formula.vanishes
        assert report.direct.vanishes
        assert report.agreement

    def test_signs(self):
        assert formula_sign(FORM) == FORM_FORMULA_SIGN == 1
        assert formula_sign(TANGENT) == TANGENT_FORMULA_SIGN == -1

    def test_methods_check_kind(self):
        model, series = case("iwasawa-x2")
        tangent = extend_class(VForm.basis_element(model, [2], 1), series, 0)
        form = extend_class(model.holo(3), series, 0)
        u = Direction.coordinate("t")
        with pytest.raises(PreconditionError):
            obstruction_formula_form(tangent, u, 1)
        with pytest.raises(PreconditionError):
            obstruction_bracket_tangent(form, u, 1)


class TestObstructionOrders:
    """Tests for order bookkeeping of obstructions."""

    def test_default_order(self):
        model, series = case("iwasawa-t31")
        ext = extend_class(model.holo(3), series, 1)
        assert obstruction_direct(ext, Direction.coordinate("t31")).order == 2

    def test_order_beyond_extension(self):
        model, series = case("iwasawa-t31")
        ext = extend_class(model.holo(3), series, 1)
        with pytest.raises(PreconditionError):
            obstruction_direct(ext, Direction.coordinate("t31"), 3)

    def test_order_zero(self):
        model, series = case("iwasawa-t31")
        ext = extend_class(model.holo(3), series, 1)
        with pytest.raises(PreconditionError):
            obstruction_direct(ext, Direction.coordinate("t31"), 0)

    def test_default_directions(self):
        _, series = case("iwasawa-t11")
        assert [u.label() for u in default_directions(series)] == ["t11"]


class TestFormulaAgreement:
    """Direct and formula obstructions agree along the Nakamura family."""

    @pytest.mark.parametrize("bidegree", [(1, 0), (0, 1), (1, 1)])
    def test_forms(self, nakamura, bidegree):
        model, series = nakamura
        p, q = bidegree
        reports = obstruction_sweep(model, series, FORM, p, q, max_order=3)
        assert reports
        assert {r.order for r in reports} == {1, 2, 3}
        assert all(report.agreement for report in reports)

    def test_tangent(self, nakamura):
        model, series = nakamura
        reports = obstruction_sweep(model, series, TANGENT, q=1, max_order=3)
        assert len({r.class_index for r in reports}) == cohomology_basis(model, TANGENT, q=1).h
        assert all(report.agreement for report in reports)
        assert {r.order for r in reports} == {1, 2, 3}
        assert all(report.vanishes for report in reports)

    @pytest.mark.parametrize("bidegree", [(1, 0), (1, 1)])
    def test_artinian_and_central_reduction_agree(self, nakamura, bidegree):
        """At order 1 the order-0 twisted complex is the central one."""
        model, series = nakamura
        reports = obstruction_sweep(model, series, FORM, *bidegree, max_order=1)
        assert all(r.direct.vanishes == r.direct.twisted_vanishes for r in reports)

    def test_sweep_is_sorted(self, nakamura):
        model, series = nakamura
        reports = obstruction_sweep(model, series, FORM, 1, 0, max_order=1)
        keys = [(r.class_index, r.order, r.direction.label()) for r in reports]
        assert keys == sorted(keys)
        assert len(reports) == 3 * 6


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
