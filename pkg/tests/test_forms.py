"""Tests for the forms module (invariant models and their exterior algebra)."""

import itertools
import random

import pytest
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src import CORPUS_MODELS
from src.data_loader import corpus_models, corpus_path, load_model
from src.errors import ModelValidationError
from src.forms import (
    conjugate_form,
    contract_vector,
    delbar,
    delta,
    differential_d,
    format_form,
    wedge,
)
from src.jets import JetRing
from src.scalars import IMAG, gauss


@pytest.fixture(scope="module")
def models():
    return corpus_models(JetRing(["t"], 1))


@pytest.fixture(scope="module")
def iwasawa(models):
    return models["iwasawa"]


def basis_forms(model):
    """Every canonical basis monomial of every bidegree, as forms."""
    for p in range(model.dim + 1):
        for q in range(model.dim + 1):
            for mono in model.basis(p, q):
                yield model.monomial_form(mono)


def sign(form):
    """(-1)^degree of a homogeneous form."""
    degree = len(next(iter(form.terms))) if form.terms else 0
    return -1 if degree % 2 else 1


class TestModelValidation:
    """Tests for loading and validating structure equations."""

    def test_corpus_loads(self, models):
        assert list(models) == CORPUS_MODELS

    def test_torus_is_abelian(self, models):
        torus = models["torus3"]
        assert all(not torus.d_generator(g) for g in range(6))
        assert torus.brackets() == {}

    def test_iwasawa_bracket(self, iwasawa):
        """dw3 = -w1^w2 gives [X1, X2] = X3."""
        assert iwasawa.bracket(0, 1) == {2: iwasawa.ring.one}
        assert iwasawa.bracket(1, 0) == {2: -iwasawa.ring.one}

    def test_parallelizable_flags(self, models):
        assert models["torus3"].is_parallelizable
        assert models["iwasawa"].is_parallelizable
        assert not models["kodaira_thurston"].is_parallelizable

    def test_broken_model_rejected(self):
        with pytest.raises(ModelValidationError, match=r"d\^2 != 0"):
            load_model(corpus_path("broken"))

    def test_integrability_violation(self):
        """dw3 = wb1^wb2 passes d^2 = 0 but has a (0,2)-component."""
        doc = {
            "name": "non-integrable",
            "dim": 3,
            "structure": {"3": [{"coeff": "1", "holo": [], "anti": [1, 2]}]},
        }
        with pytest.raises(ModelValidationError, match=r"\(0,2\)-component"):
            load_model(doc)


class TestWedge:
    """Tests for the graded-commutative product."""

    def test_anticommuting_generators(self, iwasawa):
        w1, w2 = iwasawa.holo(1), iwasawa.holo(2)
        assert wedge(w1, w2) == -wedge(w2, w1)

    def test_square_of_generator(self, iwasawa):
        assert not wedge(iwasawa.holo(1), iwasawa.holo(1))

    def test_jet_linearity(self, iwasawa):
        """(t wb1)^w2 = -t w2^wb1 in canonical order."""
        t = iwasawa.ring.gen("t")
        left = wedge(iwasawa.anti(1) * t, iwasawa.holo(2))
        assert left == iwasawa.form_ij([2], [1], t) * -1

    def test_associative(self, models):
        rng = random.Random(1)
        model = models["kodaira_thurston"]
        forms = list(basis_forms(model))
        for _ in range(30):
            a, b, c = (rng.choice(forms) for _ in range(3))
            assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


class TestDifferential:
    """Tests for d, del and delbar."""

    def test_iwasawa_structure(self, iwasawa):
        assert differential_d(iwasawa.holo(3)) == -wedge(iwasawa.holo(1), iwasawa.holo(2))
        assert differential_d(iwasawa.anti(3)) == -wedge(iwasawa.anti(1), iwasawa.anti(2))

    def test_iwasawa_bidegree_parts(self, iwasawa):
        assert delbar(iwasawa.anti(3)) == -wedge(iwasawa.anti(1), iwasawa.anti(2))
        assert delta(iwasawa.holo(3)) == -wedge(iwasawa.holo(1), iwasawa.holo(2))
        assert not delbar(iwasawa.holo(3))

    def test_kodaira_thurston_delbar(self, models):
        kt = models["kodaira_thurston"]
        assert delbar(kt.holo(2)) == wedge(kt.holo(1), kt.anti(1))

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_d_squared(self, models, name):
        model = models[name]
        for form in basis_forms(model):
            assert not differential_d(differential_d(form))

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_del_delbar_relations(self, models, name):
        """del^2 = delbar^2 = 0 and del delbar + delbar del = 0."""
        model = models[name]
        for form in basis_forms(model):
            d1, db = delta(form), delbar(form)
            assert not delta(d1)
            assert not delbar(db)
            assert not (delta(db) + delbar(d1))

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_leibniz(self, models, name):
        model = models[name]
        forms = [model.monomial_form(m) for d in range(3) for m in model.basis_total(d)]
        for a, b in itertools.product(forms, repeat=2):
            left = differential_d(wedge(a, b))
            right = wedge(differential_d(a), b) + wedge(a, differential_d(b)) * sign(a)
            assert left == right


class TestConjugation:
    """Tests for complex conjugation of forms."""

    def test_generator(self, iwasawa):
        assert conjugate_form(iwasawa.holo(1)) == iwasawa.anti(1)

    def test_mixed_form(self, iwasawa):
        """conj(i w1^wb2) = i w2^wb1 after reordering."""
        form = iwasawa.form_ij([1], [2], IMAG)
        assert conjugate_form(form) == iwasawa.form_ij([2], [1], IMAG)

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_involution_and_intertwining(self, models, name):
        model = models[name]
        for form in basis_forms(model):
            form = form * gauss(2, -3)
            assert conjugate_form(conjugate_form(form)) == form
            assert conjugate_form(differential_d(form)) == differential_d(conjugate_form(form))
            assert conjugate_form(delbar(form)) == delta(conjugate_form(form))


class TestContraction:
    """Tests for interior products with X_k."""

    def test_first_slot(self, iwasawa):
        assert contract_vector(1, wedge(iwasawa.holo(1), iwasawa.holo(2))) == iwasawa.holo(2)

    def test_missing_index(self, iwasawa):
        assert not contract_vector(3, wedge(iwasawa.holo(1), iwasawa.holo(2)))

    def test_derivation_sign(self, iwasawa):
        assert not contract_vector(1, wedge(iwasawa.anti(1), iwasawa.holo(2)))
        assert contract_vector(1, wedge(iwasawa.anti(3), iwasawa.holo(1))) == -iwasawa.anti(3)

    def test_odd_derivation(self, models):
        model = models["iwasawa"]
        forms = [model.monomial_form(m) for d in range(3) for m in model.basis_total(d)]
        for k in range(1, model.dim + 1):
            for a, b in itertools.product(forms, repeat=2):
                left = contract_vector(k, wedge(a, b))
                right = wedge(contract_vector(k, a), b) + wedge(a, contract_vector(k, b)) * sign(a)
                assert left == right


class TestFormatForm:
    def test_rendering(self, iwasawa):
        assert format_form(iwasawa.zero_form()) == "0"
        assert format_form(differential_d(iwasawa.holo(3))) == "(-1) w1^w2"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
