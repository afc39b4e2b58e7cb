import math

import numpy as np
import pytest

from fwmcluster import (
    CascadeTopology,
    FwmCell,
    Gain,
    bogoliubov_blocks,
    build_cascade,
    chain,
    covariance,
    fwm_transform,
    preset_topology,
    tree,
)
from fwmcluster.errors import InconsistencyError, TopologyError, ValidationError
from fwmcluster.symplectic import QuadratureTransform

from conftest import random_topology


def eq7(G1, G2):
    g1, g2 = math.sqrt(G1**2 - 1), math.sqrt(G2**2 - 1)
    ux = [[G1, g1, 0], [g1 * G2, G1 * G2, g2], [g1 * g2, g2 * G1, G2]]
    up = [[G1, -g1, 0], [-g1 * G2, G1 * G2, -g2], [g1 * g2, -g2 * G1, G2]]
    return np.array(ux), np.array(up)


def eq12(G):
    g = math.sqrt(G**2 - 1)
    ux = [[G * G, g * G, 0, g], [g * G, G * G, g, 0], [g * g, g * G, G, 0], [g * G, g * g, 0, G]]
    up = [[G * G, -g * G, 0, -g], [-g * G, G * G, -g, 0], [g * g, -g * G, G, 0], [-g * G, g * g, 0, G]]
    return np.array(ux), np.array(up)


class TestGain:
    @pytest.mark.parametrize("G", [1.0, 1.2, 2.0, 7.5, 1 + 1e-12])
    def test_hyperbolic_identity(self, G):
        gain = Gain(G)
        assert gain.G**2 - gain.g**2 == pytest.approx(1.0, abs=1e-12)

    def test_unit_gain_is_identity(self):
        assert Gain(1.0).g == 0.0

    @pytest.mark.parametrize("bad", [0.5, 0.999, -2, float("nan"), float("inf")])
    def test_rejects(self, bad):
        with pytest.raises(ValidationError):
            Gain(bad)


class TestSingleCell:
    def test_identity_at_unit_gain(self):
        t = fwm_transform(1.0)
        np.testing.assert_array_equal(t.ux, np.eye(2))
        np.testing.assert_array_equal(t.up, np.eye(2))

    def test_values_at_1_2(self):
        t = fwm_transform(1.2)
        g = 0.44**0.5
        np.testing.assert_allclose(t.ux, [[1.2, g], [g, 1.2]], atol=1e-15)
        np.testing.assert_allclose(t.up, [[1.2, -g], [-g, 1.2]], atol=1e-15)
        assert t.ux[0, 1] == pytest.approx(0.663325, abs=1e-6)
        assert t.pairing_error() < 1e-15

    def test_closed_form_covariance(self):
        c = covariance(fwm_transform(1.2))
        np.testing.assert_allclose(c.cxx, [[1.88, 1.591979], [1.591979, 1.88]], atol=1e-6)
        np.testing.assert_allclose(c.cpp, [[1.88, -1.591979], [-1.591979, 1.88]], atol=1e-6)

    def test_single_cell_cascade_equals_transform(self):
        t = build_cascade(chain([1.7], 1))
        ref = fwm_transform(1.7)
        np.testing.assert_array_equal(t.ux, ref.ux)
        np.testing.assert_array_equal(t.up, ref.up)
        assert t.labels == ("s1", "i1")


class TestCascade:
    def test_chain_labels(self):
        assert chain([1.2, 1.3]).labels == ("s1", "i2", "s2")

    def test_tree_labels(self):
        assert tree(1.2).labels == ("s3", "i2", "s2", "i3")

    @pytest.mark.parametrize("k", range(20))
    def test_chain_matches_closed_form(self, k):
        rng = np.random.default_rng(100 + k)
        G1, G2 = rng.uniform(1, 3, size=2)
        t = build_cascade(chain([G1, G2]))
        ux, up = eq7(G1, G2)
        np.testing.assert_allclose(t.ux, ux, rtol=0, atol=1e-12)
        np.testing.assert_allclose(t.up, up, rtol=0, atol=1e-12)

    def test_chain_third_row(self):
        G1, G2 = 1.3, 1.7
        g1, g2 = Gain(G1).g, Gain(G2).g
        t = build_cascade(chain([G1, G2]))
        np.testing.assert_allclose(t.ux[2], [g1 * g2, g2 * G1, G2], atol=1e-14)

    @pytest.mark.parametrize("k", range(20))
    def test_tree_matches_closed_form(self, k):
        G = np.random.default_rng(200 + k).uniform(1, 3)
        t = build_cascade(tree(G))
        ux, up = eq12(G)
        np.testing.assert_allclose(t.ux, ux, rtol=0, atol=1e-12)
        np.testing.assert_allclose(t.up, up, rtol=0, atol=1e-12)

    def test_custom_label_order_permutes_rows(self):
        base = build_cascade(chain([1.2, 1.4]))
        t = build_cascade(CascadeTopology(chain([1.2, 1.4]).cells, ("s2", "s1", "i2")))
        np.testing.assert_array_equal(t.ux, base.ux[[2, 0, 1]])

    def test_unit_gain_cascade_is_identity(self):
        c = covariance(build_cascade(tree(1.0)))
        np.testing.assert_array_equal(c.cxx, np.eye(4))
        np.testing.assert_array_equal(c.cpp, np.eye(4))

    def test_chain_purity(self):
        c = covariance(build_cascade(chain([1.2, 1.2])))
        assert np.linalg.det(c.cxx) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("k", range(10))
    def test_gain_swap_symmetry(self, k):
        G1, G2 = np.random.default_rng(300 + k).uniform(1, 3, size=2)
        a = np.linalg.eigvalsh(covariance(build_cascade(chain([G1, G2]))).cxx)
        b = np.linalg.eigvalsh(covariance(build_cascade(chain([G2, G1]))).cxx)
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


class TestTopologyErrors:
    def test_double_consumption(self):
        cells = (FwmCell(Gain(1.2)), FwmCell(Gain(1.2), "i1"), FwmCell(Gain(1.2), "i1"))
        with pytest.raises(TopologyError, match=r"cells\[2\].seed.*already consumed by cell 2"):
            CascadeTopology(cells)

    def test_forward_reference(self):
        with pytest.raises(TopologyError, match=r"cells\[1\].seed"):
            CascadeTopology((FwmCell(Gain(1.2)), FwmCell(Gain(1.2), "s3")))

    def test_self_reference(self):
        with pytest.raises(TopologyError):
            CascadeTopology((FwmCell(Gain(1.2)), FwmCell(Gain(1.2), "i2")))

    def test_first_cell_must_use_input(self):
        with pytest.raises(TopologyError, match=r"cells\[0\]"):
            CascadeTopology((FwmCell(Gain(1.2), "s1"),))

    def test_input_reused(self):
        with pytest.raises(TopologyError, match="external input"):
            CascadeTopology((FwmCell(Gain(1.2)), FwmCell(Gain(1.2), "input")))

    def test_empty(self):
        with pytest.raises(TopologyError):
            CascadeTopology(())

    def test_bad_labels(self):
        with pytest.raises(TopologyError):
            CascadeTopology(chain([1.2, 1.2]).cells, ("s1", "i2", "zz"))
        with pytest.raises(TopologyError):
            CascadeTopology(chain([1.2, 1.2]).cells, ("s1", "s1", "s2"))

    def test_presets(self):
        assert preset_topology("chain4", 1.3).n_modes == 5
        assert preset_topology("tree3", [1.1]).n_modes == 4
        with pytest.raises(ValidationError):
            preset_topology("ring", 1.2)
        with pytest.raises(ValidationError):
            preset_topology("tree3", [1.2, 1.3])


class TestRandomCascades:
    @pytest.mark.parametrize("seed", range(25))
    def test_invariants(self, seed):
        topo = random_topology(np.random.default_rng(seed))
        t = build_cascade(topo)
        c = covariance(t)
        assert t.pairing_error() < 1e-10
        assert c.purity_error() < 1e-8
        assert np.linalg.det(c.cxx) * np.linalg.det(c.cpp) == pytest.approx(1.0, abs=1e-8)
        np.testing.assert_array_equal(c.cxx, c.cxx.T)
        assert np.linalg.eigvalsh(c.cxx).min() > 0

    @pytest.mark.parametrize("seed", range(10))
    def test_bogoliubov_identities(self, seed):
        t = build_cascade(random_topology(np.random.default_rng(seed)))
        A, B = bogoliubov_blocks(t)
        n = t.n_modes
        scale = max(1.0, np.abs(A).max() ** 2)
        assert np.max(np.abs(A @ A.conj().T - B @ B.conj().T - np.eye(n))) < 1e-10 * scale
        sym = A @ B.T
        assert np.max(np.abs(sym - sym.T)) < 1e-10 * scale


def test_bogoliubov_single_cell():
    A, B = bogoliubov_blocks(fwm_transform(1.5))
    g = Gain(1.5).g
    np.testing.assert_allclose(A, np.diag([1.5, 1.5]), atol=1e-15)
    np.testing.assert_allclose(B, [[0, g], [g, 0]], atol=1e-15)


def test_bogoliubov_identity_gain():
    A, B = bogoliubov_blocks(fwm_transform(1.0))
    np.testing.assert_array_equal(A, np.eye(2))
    np.testing.assert_array_equal(B, np.zeros((2, 2)))


def test_bogoliubov_rejects_unpaired():
    with pytest.raises(InconsistencyError):
        bogoliubov_blocks(QuadratureTransform(np.eye(2) * 2, np.eye(2)))


def test_transform_rejects_nonfinite():
    with pytest.raises(ValidationError):
        QuadratureTransform(np.array([[np.nan, 0], [0, 1]]), np.eye(2))
