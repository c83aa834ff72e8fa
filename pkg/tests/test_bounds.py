import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.analysis.bounds import (
    EPR_Z,
    HALF_NORM,
    GramParams,
    bounds_report,
    check_feasible,
    chi_overlaps,
    chi_states,
    is_feasible,
    minimize_objective,
    p1_bound,
    p1_from_sum,
    p2_bound,
    p2_from_sum,
    params_from_pair,
    realize_vectors,
    realized_overlap_matrix,
    s1_closed_form,
    s1_sum,
    s2_closed_form,
    s2_sum,
)
from src.utils.errors import ConfigurationError, FeasibilityError


def random_feasible(rng) -> GramParams:
    z = rng.uniform(0.01, HALF_NORM - 0.01)
    radius = np.sqrt(z * (HALF_NORM - z)) * np.sqrt(rng.uniform())
    angle = rng.uniform(0, 2 * np.pi)
    return GramParams.from_xyz(radius * np.cos(angle), radius * np.sin(angle), z)


@st.composite
def feasible_params(draw):
    z = draw(st.floats(min_value=0.01, max_value=HALF_NORM - 0.01))
    radius = np.sqrt(z * (HALF_NORM - z))
    scale = draw(st.floats(min_value=0.0, max_value=0.999))
    angle = draw(st.floats(min_value=0.0, max_value=2 * np.pi))
    return GramParams.from_xyz(scale * radius * np.cos(angle), scale * radius * np.sin(angle), z)


class TestEprPoint:

    def test_sums(self):
        epr = GramParams.epr()
        assert s1_sum(epr) == pytest.approx(27.0, abs=1e-9)
        assert s2_sum(epr) == pytest.approx(1 / 3, abs=1e-9)

    def test_bounds(self):
        epr = GramParams.epr()
        assert p1_bound(epr) == pytest.approx(0.625, abs=1e-9)
        assert p2_bound(epr) == pytest.approx(2 / 3, abs=1e-9)
        assert p1_from_sum(27) == pytest.approx(0.625)
        assert p2_from_sum(1 / 3) == pytest.approx(2 / 3)

    def test_epr_pair_maps_to_epr_point(self):
        s = 1 / np.sqrt(2)
        params = params_from_pair([s, 0], [0, s])
        assert params.as_tuple() == pytest.approx((0.0, 0.0, EPR_Z, EPR_Z), abs=1e-12)


class TestFeasibility:

    def test_infeasible_rejected(self):
        bad = GramParams(0.5, 0.5, EPR_Z, EPR_Z)
        assert not is_feasible(bad)
        with pytest.raises(FeasibilityError):
            check_feasible(bad)
        with pytest.raises(FeasibilityError):
            s1_sum(bad)

    def test_wrong_normalisation_rejected(self):
        assert not is_feasible(GramParams(0.0, 0.0, 0.5, 0.5))

    @given(feasible_params())
    def test_realized_vectors_reproduce_gram(self, params):
        alpha, beta = realize_vectors(params)
        aa, ab, bb = params.gram
        assert np.vdot(alpha, alpha).real == pytest.approx(aa, abs=1e-9)
        assert np.vdot(beta, beta).real == pytest.approx(bb, abs=1e-9)
        assert abs(np.vdot(alpha, beta) - ab) < 1e-9


class TestOverlapFamily:

    def test_formal_and_realized_overlaps_agree(self, rng):
        for _ in range(50):
            params = random_feasible(rng)
            formal = chi_overlaps(params).overlap_matrix
            realized = realized_overlap_matrix(params)
            assert np.allclose(formal, realized, atol=1e-9)

    def test_chi_states_are_nine_pair_states(self):
        states = chi_states(GramParams.epr())
        assert len(states) == 9
        assert all(s.dimension == 4 for s in states)

    def test_closed_forms_match_direct_sums(self, rng):
        for _ in range(1000):
            params = random_feasible(rng)
            assert s1_sum(params) == pytest.approx(2 * s1_closed_form(params), abs=1e-9)
            assert s2_sum(params) == pytest.approx(s2_closed_form(params), abs=1e-9)

    def test_states_are_never_all_orthogonal(self, rng):
        for _ in range(200):
            matrix = np.abs(chi_overlaps(random_feasible(rng)).overlap_matrix)
            assert (matrix - np.diag(np.diag(matrix))).max() > 0

    @settings(max_examples=200)
    @given(feasible_params())
    def test_bounds_peak_at_epr(self, params):
        assert s1_sum(params) >= 27 - 1e-9
        assert s2_sum(params) >= 1 / 3 - 1e-9
        assert p1_bound(params) <= 0.625 + 1e-9
        assert p2_bound(params) <= 2 / 3 + 1e-9


class TestMinimisation:

    def test_s1_minimum(self):
        result = minimize_objective("s1")
        assert result.fun == pytest.approx(27.0, abs=1e-6)
        assert result.x.as_tuple() == pytest.approx((0.0, 0.0, EPR_Z, EPR_Z), abs=1e-4)
        assert p1_bound(result.x) == pytest.approx(0.625, abs=1e-9)
        assert result.unconstrained_fun <= result.fun + 1e-9

    def test_s2_minimum(self):
        result = minimize_objective("s2")
        assert result.fun == pytest.approx(1 / 3, abs=1e-6)
        assert p2_bound(result.x) == pytest.approx(2 / 3, abs=1e-9)

    def test_resolution_converges(self):
        coarse = minimize_objective("s1", resolution=50)
        fine = minimize_objective("s1", resolution=150)
        assert coarse.x.as_tuple() == pytest.approx(fine.x.as_tuple(), abs=1e-3)

    def test_no_refinement_is_still_a_lower_bound_sample(self):
        result = minimize_objective("s1", resolution=50, refinement_iters=0)
        assert result.fun == result.grid_value
        assert result.fun >= 27 - 1e-9

    def test_bad_arguments(self):
        with pytest.raises(ConfigurationError):
            minimize_objective("s3")
        with pytest.raises(ConfigurationError):
            minimize_objective("s1", resolution=49)

    def test_report(self):
        report = bounds_report("s2", resolution=50, refinement_iters=10)
        assert report.objective == "s2"
        assert report.p2 == pytest.approx(2 / 3, abs=1e-6)
        assert report.grid_resolution == 50
        assert len(report.argmin) == 4
