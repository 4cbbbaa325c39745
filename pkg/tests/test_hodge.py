"""Tests for the hodge module (central and deformed Hodge numbers)."""

import random

import pytest
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src import CORPUS_MODELS, DEFAULT_SEED
from src.cohomology import TANGENT, cohomology_basis
from src.data_loader import corpus_path, load_case, load_expected, load_model, load_series
from src.deformation import mc_solve
from src.errors import InvariantViolation, NonIntegrableError, PreconditionError
from src.hodge import (
    CENTRAL,
    SAMPLED,
    SYMBOLIC,
    all_bidegrees,
    annotate_consistency,
    detect_jumps,
    hodge_numbers,
    jump_consistency,
)
from src.jets import JetRing
from src.scalars import gauss
from src.vector_forms import VForm


def case(deformation_name, model_name="iwasawa"):
    model, deformation = load_case(model_name, deformation_name)
    return model, load_series(model, deformation)


def random_first_order(model, rng):
    """A random combination of H^1(T) representatives with coefficients linear in t1, t2."""
    ring = model.ring
    phi1 = VForm.zero(model, 1)
    for rep in cohomology_basis(model, TANGENT, q=1).representatives:
        linear = ring.zero
        for var in ring.params:
            linear = linear + ring.gen(var) * gauss(rng.randint(-2, 2), rng.randint(-1, 1))
        phi1 = phi1 + rep * linear
    return phi1


class TestCentralMode:
    """Tests for central Hodge tables."""

    def test_iwasawa(self):
        model, _ = case("iwasawa-t11")
        expected = load_expected("iwasawa")["values"]["hodge_central"]["value"]
        degrees = [tuple(map(int, key.split(","))) for key in expected]
        table = hodge_numbers(model, bidegrees=degrees)
        for key, h in expected.items():
            p, q = map(int, key.split(","))
            assert table.value(p, q) == h

    def test_rows_have_no_deformed_column(self):
        model, _ = case("iwasawa-t11")
        table = hodge_numbers(model, bidegrees=[(1, 0)])
        assert table.rows == [{"p": 1, "q": 0, CENTRAL: 3}]
        assert table.jumps == []

    def test_default_bidegrees(self):
        model, _ = case("kodaira-thurston-t", "kodaira_thurston")
        table = hodge_numbers(model)
        assert [(row["p"], row["q"]) for row in table.rows] == all_bidegrees(model)

    def test_missing_row(self):
        model, _ = case("iwasawa-t11")
        table = hodge_numbers(model, bidegrees=[(1, 0)])
        with pytest.raises(KeyError):
            table.value(0, 1)


class TestSampledMode:
    """Tests for sampled Hodge numbers."""

    @pytest.mark.parametrize("deformation", ["iwasawa-t11", "iwasawa-t31"])
    def test_h10_matches_fixture(self, deformation):
        model, series = case(deformation)
        expected = load_expected("iwasawa")["values"]["hodge_sampled_h10"]["value"][deformation]
        table = hodge_numbers(model, series, [(1, 0)], SAMPLED, seed=DEFAULT_SEED)
        assert table.value(1, 0) == expected
        assert table.rows[0]["status"] == "ok"
        assert len(table.samples) == 2

    def test_t11_drop_reported(self):
        model, series = case("iwasawa-t11")
        table = hodge_numbers(model, series, [(1, 0)], SAMPLED)
        assert table.rows[0]["jump"]
        assert table.jumps[0]["type"] == "drop"
        assert table.jumps[0]["message"] == "h^(1,0) drops from 3 to 2"

    def test_torus_has_no_jumps(self):
        model, series = case("kodaira-thurston-t", "torus3")
        table = hodge_numbers(model, series, mode=SAMPLED)
        assert table.jumps == []
        assert all(row["central"] == row[SAMPLED] for row in table.rows)

    def test_semicontinuity_on_all_bidegrees(self):
        for model_name, deformation in [("iwasawa", "iwasawa-t11"), ("kodaira_thurston", "kodaira-thurston-t")]:
            model, series = case(deformation, model_name)
            table = hodge_numbers(model, series, mode=SAMPLED)
            for row in table.rows:
                assert row[SAMPLED] is None or row[SAMPLED] <= row["central"]

    def test_random_semicontinuity_sweep(self):
        """Fifty Kuranishi families never raise a Hodge number."""
        rng = random.Random(50)
        models = {name: load_model(corpus_path(name), JetRing(["t1", "t2"], 2)) for name in CORPUS_MODELS}
        checked = 0
        for i in range(50):
            model = models[CORPUS_MODELS[i % len(CORPUS_MODELS)]]
            series, _ = mc_solve(random_first_order(model, rng))
            try:
                table = hodge_numbers(model, series, mode=SAMPLED, seed=rng.randrange(2**32))
            except NonIntegrableError:
                continue
            for row in table.rows:
                assert row[SAMPLED] is None or row[SAMPLED] <= row[CENTRAL]
            assert all(change["type"] == "drop" for change in table.jumps)
            checked += 1
        assert checked >= 16

    def test_rise_raises_invariant_violation(self, monkeypatch):
        model, series = case("iwasawa-t11")
        monkeypatch.setattr(
            "src.hodge.point_hodge_numbers", lambda phi0, bidegrees: {key: 5 for key in bidegrees}
        )
        with pytest.raises(InvariantViolation) as excinfo:
            hodge_numbers(model, series, [(1, 0)], SAMPLED)
        assert "h^(1,0) rises from 3 to 5" in str(excinfo.value)

    def test_same_seed_same_table(self):
        model, series = case("iwasawa-t11")
        first = hodge_numbers(model, series, [(1, 0), (0, 1)], SAMPLED, seed=7)
        second = hodge_numbers(model, series, [(1, 0), (0, 1)], SAMPLED, seed=7)
        assert first.rows == second.rows
        assert first.samples == second.samples

    def test_rejects_non_integrable(self):
        model, series = case("bad-omega3bar")
        with pytest.raises(NonIntegrableError):
            hodge_numbers(model, series, [(1, 0)], SAMPLED)


class TestSymbolicMode:
    """Tests for symbolic Hodge numbers."""

    def test_agrees_with_sampled(self):
        model, series = case("iwasawa-t11")
        degrees = [(1, 0), (0, 1)]
        symbolic = hodge_numbers(model, series, degrees, SYMBOLIC)
        sampled = hodge_numbers(model, series, degrees, SAMPLED)
        for p, q in degrees:
            assert symbolic.value(p, q) == sampled.value(p, q)
        assert symbolic.value(1, 0) == 2


class TestArguments:
    """Tests for argument validation."""

    def test_unknown_mode(self):
        model, series = case("iwasawa-t11")
        with pytest.raises(PreconditionError):
            hodge_numbers(model, series, mode="exact")

    def test_out_of_range_bidegree(self):
        model, series = case("iwasawa-t11")
        with pytest.raises(PreconditionError):
            hodge_numbers(model, series, [(4, 0)], SAMPLED)

    def test_missing_deformation(self):
        model, _ = case("iwasawa-t11")
        with pytest.raises(PreconditionError):
            hodge_numbers(model, None, [(1, 0)], SAMPLED)


class TestJumps:
    """Tests for jump detection and the obstruction cross-check."""

    def test_detect_drop_and_rise(self):
        changes = detect_jumps({(1, 0): 3, (0, 1): 2, (0, 2): 2}, {(1, 0): 2, (0, 1): 3, (0, 2): None})
        assert [(c["bidegree"], c["type"], c["change"]) for c in changes] == [("0,1", "rise", 1), ("1,0", "drop", -1)]

    def test_no_change(self):
        assert detect_jumps({(1, 0): 3}, {(1, 0): 3}) == []

    @pytest.mark.parametrize("deformation, obstructed", [("iwasawa-t11", True), ("iwasawa-t31", False)])
    def test_consistency(self, deformation, obstructed):
        model, series = case(deformation)
        check = jump_consistency(model, series, 1, 0)
        assert check["obstructed"] is obstructed
        assert check["drop"] is obstructed
        assert check["consistent"] is True

    def test_annotate(self):
        model, series = case("iwasawa-t11")
        table = annotate_consistency(model, series, hodge_numbers(model, series, [(1, 0)], SAMPLED))
        assert table.rows[0]["consistent"] is True


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
