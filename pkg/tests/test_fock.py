import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from swapsim.fock import (
    CapacityError,
    FockState,
    StructuralError,
    born_distribution,
    inner_product,
    measure_modes,
    project,
    tensor,
)
from swapsim.measure import bell_states
from swapsim.optics import BeamSplitter, apply_bs
from swapsim.source import prepare_source

S = 2**-0.5


def singlet(m1, m2):
    return S * (FockState.basis({m1: 1, m2: 0}) - FockState.basis({m1: 0, m2: 1}))


def states(modes=("x", "y"), max_photons=2):
    patterns = [
        occ for occ in np.ndindex(*([3] * len(modes))) if sum(occ) <= max_photons
    ]
    amp = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)
    return st.dictionaries(st.sampled_from(patterns), amp, min_size=1).filter(
        lambda d: sum(abs(a) ** 2 for a in d.values()) > 1e-6
    ).map(lambda d: FockState(modes, d).normalized())


class TestTensor:
    def test_product_pair(self):
        phi = tensor(FockState.basis({"A": 1}), FockState.basis({"B": 1}))
        assert phi.amplitudes == {(1, 1): 1.0}

    def test_vacuum_factor(self):
        psi = singlet("A", "A'")
        out = tensor(psi, FockState.vacuum(["V"]))
        assert out.modes == ("A", "A'", "V")
        assert out.amplitudes == {(1, 0, 0): pytest.approx(S), (0, 1, 0): pytest.approx(-S)}

    def test_two_singlets(self):
        out = tensor(singlet("A", "A'"), singlet("B", "B'"))
        assert len(out) == 4
        assert out.amplitude({"A": 1, "B": 1}) == pytest.approx(0.5)
        assert out.amplitude({"A": 1, "B'": 1}) == pytest.approx(-0.5)
        assert out.amplitude({"A'": 1, "B": 1}) == pytest.approx(-0.5)
        assert out.amplitude({"A'": 1, "B'": 1}) == pytest.approx(0.5)

    def test_overlapping_modes(self):
        with pytest.raises(StructuralError):
            tensor(FockState.basis({"A": 1}), FockState.basis({"A": 0, "B": 1}))

    @given(states(("a", "b")), states(("c",)))
    def test_norm_multiplies(self, left, right):
        assert tensor(left, 2.0 * right).norm() == pytest.approx(2.0 * left.norm() * right.norm(), abs=1e-12)


class TestInnerProduct:
    def test_self_overlap(self):
        psi = singlet("A", "A'")
        assert inner_product(psi, psi) == pytest.approx(1.0, abs=1e-12)

    def test_bell_orthogonality(self):
        bell = bell_states("AB")
        assert abs(inner_product(bell["Psi+"], bell["Psi-"])) < 1e-15

    def test_eq1_coefficient(self):
        ab, eve = bell_states("AB"), bell_states("Eve")
        c = inner_product(tensor(ab["Phi+"], eve["Phi+"]), prepare_source())
        assert c == pytest.approx(0.5, abs=1e-12)

    def test_mode_order_ignored(self):
        psi = singlet("A", "B")
        assert inner_product(psi, psi.reordered(("B", "A"))) == pytest.approx(1.0)

    def test_mismatched_modes(self):
        with pytest.raises(StructuralError):
            inner_product(FockState.basis({"A": 1}), FockState.basis({"B": 1}))

    @given(states(), states())
    def test_conjugate_symmetry_and_bound(self, a, b):
        ab = inner_product(a, b)
        assert ab == pytest.approx(inner_product(b, a).conjugate(), abs=1e-12)
        assert abs(ab) <= a.norm() * b.norm() + 1e-12

    @given(states(("a",)), states(("b",)), states(("a",)), states(("b",)))
    def test_factorizes(self, a, b, c, d):
        lhs = inner_product(tensor(a, b), tensor(c, d))
        assert lhs == pytest.approx(inner_product(a, c) * inner_product(b, d), abs=1e-12)


class TestBorn:
    def test_point_mass(self):
        assert born_distribution(FockState.basis({"A": 1, "B": 0}), ["A", "B"]) == {(1, 0): 1.0}

    def test_singlet_uniform(self):
        dist = born_distribution(singlet("A", "A'"), ["A", "A'"])
        assert dist == {(0, 1): pytest.approx(0.5), (1, 0): pytest.approx(0.5)}

    def test_source_uniform(self):
        modes = ["A", "A'", "B", "B'"]
        dist = born_distribution(prepare_source(), modes)
        expected = oracles.marginal(oracles.amplitudes(oracles.source(), modes), modes, modes)
        assert set(dist) == set(expected) == {(1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1)}
        for k, p in dist.items():
            assert p == pytest.approx(0.25, abs=1e-12)

    def test_marginalizes(self):
        dist = born_distribution(prepare_source(), ["A"])
        assert dist == {(0,): pytest.approx(0.5), (1,): pytest.approx(0.5)}

    @given(states(("a", "b", "c")))
    def test_sums_to_one(self, psi):
        assert sum(born_distribution(psi, ["a", "c"]).values()) == pytest.approx(1.0, abs=1e-12)


class TestMeasure:
    def test_deterministic(self, rng):
        outcome, rest, p = measure_modes(FockState.basis({"A": 1, "B": 0}), ["A"], rng)
        assert outcome == (1,) and p == 1.0
        assert rest.modes == ("B",)

    def test_singlet_half(self, rng):
        outcome, rest, p = measure_modes(singlet("A", "A'"), ["A'"], rng)
        assert p == pytest.approx(0.5)
        (occ, amp), = rest.amplitudes.items()
        assert occ == (1 - outcome[0],) and abs(amp) == pytest.approx(1.0)

    def test_empty_modes(self, rng):
        with pytest.raises(StructuralError):
            measure_modes(singlet("A", "B"), [], rng)

    def test_eve_sector_after_splitter(self):
        # all five Eve patterns; the two bunched ones share the 2-photon quarter
        state = apply_bs(prepare_source(), BeamSplitter("A'", "B'"))
        dist = born_distribution(state, ["A'", "B'"])
        expr = oracles.beam_splitter(oracles.source(), "A'", "B'")
        modes = ["A", "A'", "B", "B'"]
        expected = oracles.marginal(oracles.amplitudes(expr, modes), modes, ["A'", "B'"])
        assert set(dist) == set(expected)
        for k in dist:
            assert dist[k] == pytest.approx(expected[k], abs=1e-12)
        assert dist == pytest.approx({(0, 0): 0.25, (1, 0): 0.25, (0, 1): 0.25, (2, 0): 0.125, (0, 2): 0.125})

    def test_frequencies_match_born(self):
        state = apply_bs(prepare_source(), BeamSplitter("A'", "B'"))
        dist = born_distribution(state, ["A'", "B'"])
        rng = np.random.default_rng(7)
        n = 100_000
        counts = {}
        for _ in range(n):
            o, _, _ = measure_modes(state, ["A'", "B'"], rng)
            counts[o] = counts.get(o, 0) + 1
        for o, p in dist.items():
            assert abs(counts.get(o, 0) - n * p) <= 5 * oracles.binomial_sigma(n, p)

    def test_returned_probability_is_born_weight(self, rng):
        state = apply_bs(prepare_source(), BeamSplitter("A'", "B'"))
        dist = born_distribution(state, ["A'", "B'"])
        for _ in range(50):
            o, rest, p = measure_modes(state, ["A'", "B'"], rng)
            assert p == dist[o]
            assert rest.norm() == pytest.approx(1.0, abs=1e-12)


class TestStateBasics:
    def test_prunes_tiny(self):
        assert FockState(["a"], {(0,): 1.0, (1,): 1e-17}).amplitudes == {(0,): 1.0}

    def test_cutoff_enforced(self):
        with pytest.raises(CapacityError):
            FockState(["a"], {(3,): 1.0})

    def test_normalized(self):
        psi = FockState(["a", "b"], {(1, 0): 3.0, (0, 1): 4.0j}).normalized()
        assert psi.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_projections_commute_exactly(self):
        state = apply_bs(apply_bs(prepare_source(), BeamSplitter("A'", "B'")), BeamSplitter("A", "B"))
        for eve in [(0, 0), (1, 0), (0, 1), (2, 0)]:
            for ab in [(0, 0), (1, 0), (0, 1), (0, 2)]:
                x = project(project(state, ["A'", "B'"], eve), ["A", "B"], ab)
                y = project(project(state, ["A", "B"], ab), ["A'", "B'"], eve)
                assert x.amplitudes == y.amplitudes

    def test_immutable_amplitudes(self):
        psi = FockState.basis({"a": 1})
        psi.amplitudes[(1,)] = 5.0
        assert psi.amplitude({"a": 1}) == 1.0

    def test_zero_norm(self):
        with pytest.raises(ValueError):
            FockState(["a"], {}).normalized()

    def test_repr(self):
        assert "FockState" in repr(FockState.basis({"a": 1}))


def test_norm_tolerance_constant():
    psi = prepare_source()
    assert math.isclose(psi.norm_sq(), 1.0, abs_tol=1e-12)
