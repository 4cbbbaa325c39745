"""Tests for the vector_forms module (the DGLA of vector-valued forms)."""

import itertools
import random

import pytest
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src import CORPUS_MODELS
from src.data_loader import corpus_models, corpus_path, load_model
from src.errors import PreconditionError
from src.forms import delbar, wedge
from src.jets import Direction, JetRing
from src.vector_forms import (
    VForm,
    format_vform,
    twisted_delbar_form,
    twisted_delbar_vform,
    vf_bracket,
    vf_contract,
    vf_delbar,
    vform_basis,
)

NAKAMURA_PARAMS = ["t11", "t12", "t21", "t22", "t31", "t32"]


@pytest.fixture(scope="module")
def models():
    return corpus_models(JetRing(["t"], 1))


@pytest.fixture(scope="module")
def iwasawa():
    return load_model(corpus_path("iwasawa"), JetRing(NAKAMURA_PARAMS, 3))


def nakamura_phi(model, with_second_order=True):
    """sum t_(l i) wb^i (x) X_l, plus the quadratic correction on wb^3 (x) X_3."""
    ring = model.ring
    phi = VForm.zero(model, 1)
    for l in (1, 2, 3):
        for i in (1, 2):
            phi = phi + VForm.basis_element(model, [i], l, ring.gen(f"t{l}{i}"))
    if with_second_order:
        det = ring.gen("t11") * ring.gen("t22") - ring.gen("t12") * ring.gen("t21")
        phi = phi - VForm.basis_element(model, [3], 3, det)
    return phi


def all_vforms(model, degrees=(0, 1, 2)):
    out = []
    for q in degrees:
        for J, k in vform_basis(model, q):
            out.append(VForm.basis_element(model, [j + 1 for j in J], k + 1))
    return out


def koszul(q, r):
    return -1 if (q * r) % 2 else 1


class TestVectorDelbar:
    """Tests for dbar on vector forms."""

    def test_iwasawa_wb3_x3(self, iwasawa):
        psi = VForm.basis_element(iwasawa, [3], 3)
        assert vf_delbar(psi) == -VForm.basis_element(iwasawa, [1, 2], 3)

    def test_kodaira_thurston_frame(self, models):
        """dbar X1 = wb1 (x) X2."""
        kt = models["kodaira_thurston"]
        assert vf_delbar(VForm.basis_element(kt, [], 1)) == VForm.basis_element(kt, [1], 2)

    def test_torus_is_flat(self, models):
        torus = models["torus3"]
        assert all(not vf_delbar(psi) for psi in all_vforms(torus))

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_square_zero(self, models, name):
        for psi in all_vforms(models[name]):
            assert not vf_delbar(vf_delbar(psi))


class TestBracket:
    """Tests for the graded bracket."""

    def test_frame_bracket(self, iwasawa):
        a = VForm.basis_element(iwasawa, [1], 1)
        b = VForm.basis_element(iwasawa, [2], 2)
        assert vf_bracket(a, b) == VForm.basis_element(iwasawa, [1, 2], 3)

    def test_nakamura_self_bracket(self, iwasawa):
        """[phi1, phi1] = 2 (t11 t22 - t12 t21) wb1^wb2 (x) X3."""
        ring = iwasawa.ring
        phi1 = nakamura_phi(iwasawa, with_second_order=False)
        det = ring.gen("t11") * ring.gen("t22") - ring.gen("t12") * ring.gen("t21")
        assert vf_bracket(phi1, phi1) == VForm.basis_element(iwasawa, [1, 2], 3, det * 2)

    def test_torus_brackets_vanish(self, models):
        torus = models["torus3"]
        t = torus.ring.gen("t")
        psi = VForm.basis_element(torus, [1], 2, t) + VForm.basis_element(torus, [3], 1, t * 3)
        assert not vf_bracket(psi, psi)

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_graded_antisymmetry(self, models, name):
        forms = all_vforms(models[name])
        for a, b in itertools.product(forms, repeat=2):
            assert vf_bracket(a, b) == -(vf_bracket(b, a) * koszul(a.degree, b.degree))

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_graded_jacobi(self, models, name):
        rng = random.Random(17)
        forms = all_vforms(models[name], degrees=(0, 1))
        for _ in range(150):
            a, b, c = (rng.choice(forms) for _ in range(3))
            q, r, s = a.degree, b.degree, c.degree
            total = (
                vf_bracket(a, vf_bracket(b, c)) * koszul(q, s)
                + vf_bracket(b, vf_bracket(c, a)) * koszul(r, q)
                + vf_bracket(c, vf_bracket(a, b)) * koszul(s, r)
            )
            assert not total

    @pytest.mark.parametrize("name", CORPUS_MODELS)
    def test_delbar_is_derivation(self, models, name):
        forms = all_vforms(models[name], degrees=(0, 1))
        for a, b in itertools.product(forms, repeat=2):
            left = vf_delbar(vf_bracket(a, b))
            right = vf_bracket(vf_delbar(a), b) + vf_bracket(a, vf_delbar(b)) * koszul(a.degree, 1)
            assert left == right


class TestContraction:
    """Tests for phi _| eta."""

    def test_holomorphic_pair(self, iwasawa):
        eta = wedge(iwasawa.holo(1), iwasawa.holo(2))
        phi = VForm.basis_element(iwasawa, [1], 1)
        assert vf_contract(phi, eta) == wedge(iwasawa.anti(1), iwasawa.holo(2))

    def test_unpaired_vector(self, iwasawa):
        eta = wedge(iwasawa.holo(1), iwasawa.holo(2))
        assert not vf_contract(VForm.basis_element(iwasawa, [1], 3), eta)

    def test_one_form(self, iwasawa):
        t11 = iwasawa.ring.gen("t11")
        phi = VForm.basis_element(iwasawa, [1], 1, t11)
        assert vf_contract(phi, iwasawa.holo(1)) == iwasawa.anti(1) * t11


class TestTwistedDelbar:
    """Tests for the two twisted differentials."""

    def test_form_twist_t11(self, iwasawa):
        """dbar_phi w3 = t11 wb1^w2 for phi = t11 wb1 (x) X1."""
        t11 = iwasawa.ring.gen("t11")
        phi = VForm.basis_element(iwasawa, [1], 1, t11)
        expected = wedge(iwasawa.anti(1), iwasawa.holo(2)) * t11
        assert twisted_delbar_form(phi, iwasawa.holo(3)) == expected

    def test_form_twist_t31(self, iwasawa):
        t31 = iwasawa.ring.gen("t31")
        phi = VForm.basis_element(iwasawa, [1], 3, t31)
        assert not twisted_delbar_form(phi, iwasawa.holo(3))

    def test_zero_twist_is_delbar(self, iwasawa):
        zero = VForm.zero(iwasawa, 1)
        for p, q in [(1, 0), (0, 1), (1, 1)]:
            for mono in iwasawa.basis(p, q):
                eta = iwasawa.monomial_form(mono)
                assert twisted_delbar_form(zero, eta) == delbar(eta)

    def test_rejects_constant_term(self, iwasawa):
        phi = VForm.basis_element(iwasawa, [1], 1)
        with pytest.raises(PreconditionError):
            twisted_delbar_form(phi, iwasawa.holo(3))

    def test_rejects_wrong_degree(self, iwasawa):
        t11 = iwasawa.ring.gen("t11")
        phi = VForm.basis_element(iwasawa, [1, 2], 1, t11)
        with pytest.raises(PreconditionError):
            twisted_delbar_vform(phi, VForm.basis_element(iwasawa, [], 1))

    def test_flatness_for_maurer_cartan(self, iwasawa):
        """dbar_phi squares to zero on all basis forms and vector forms."""
        phi = nakamura_phi(iwasawa)
        for p in range(4):
            for q in range(3):
                for mono in iwasawa.basis(p, q):
                    eta = iwasawa.monomial_form(mono)
                    assert not twisted_delbar_form(phi, twisted_delbar_form(phi, eta))
        for psi in all_vforms(iwasawa, degrees=(0, 1)):
            assert not twisted_delbar_vform(phi, twisted_delbar_vform(phi, psi))

    def test_derivative_is_twisted_closed(self, iwasawa):
        """d_u phi is closed for the twisted vector dbar in every coordinate direction."""
        phi = nakamura_phi(iwasawa)
        for name in NAKAMURA_PARAMS:
            assert not twisted_delbar_vform(phi, phi.derive(Direction.coordinate(name)))


class TestFormatVForm:
    def test_rendering(self, iwasawa):
        assert format_vform(VForm.zero(iwasawa, 1)) == "0"
        assert format_vform(VForm.basis_element(iwasawa, [1, 2], 3)) == "(1) wb1^wb2@X3"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
