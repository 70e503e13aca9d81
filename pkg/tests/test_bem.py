import math

import numpy as np
import pytest

import capbound as cb
from capbound import NumericalError

from conftest import SPHEROID21_EXACT


class TestSolveCapacity:
    def test_unit_sphere(self, sphere_solutions):
        sol = sphere_solutions[3]
        assert sol.capacity == pytest.approx(1.0, rel=0.01)
        assert (sol.density > 0).all()
        assert sol.residual < 1e-6
        assert sol.condition_estimate < 1e6

    def test_capacity_is_total_charge(self, sphere_meshes, sphere_solutions):
        sol = sphere_solutions[2]
        areas = sphere_meshes[2].face_areas
        assert sol.capacity == pytest.approx(float(sol.density @ areas), rel=1e-14)

    def test_sphere_scale_covariance_exact_power_of_two(self, sphere_meshes,
                                                        sphere_solutions):
        base = sphere_solutions[2].capacity
        scaled = cb.solve_capacity(sphere_meshes[2].scaled(2.0)).capacity
        # power-of-two scaling is exact in floating point end to end
        assert scaled == pytest.approx(2.0 * base, rel=1e-13)

    def test_scale_covariance_generic_factor(self, sphere_meshes, sphere_solutions):
        base = sphere_solutions[2].capacity
        scaled = cb.solve_capacity(sphere_meshes[2].scaled(1.7)).capacity
        assert scaled == pytest.approx(1.7 * base, rel=1e-8)

    def test_monotone_under_inclusion(self, sphere_solutions):
        inner = sphere_solutions[2].capacity
        outer = cb.solve_capacity(cb.make_sphere(1.2, 2)).capacity
        assert outer > inner * 1.05

    def test_spheroid_oracle(self, spheroid21_solution):
        assert spheroid21_solution.capacity == pytest.approx(
            SPHEROID21_EXACT, rel=0.01)
        assert (spheroid21_solution.density > 0).all()

    def test_volume_lower_bound(self, sphere_meshes, sphere_solutions,
                                spheroid21_solution, spheroid21_fine):
        # the sphere is the equality case, so the discrete comparison only
        # holds to within the BEM error allowance
        m = cb.measure(sphere_meshes[3])
        lower = (3.0 * m.volume / (4.0 * math.pi)) ** (1.0 / 3.0)
        sol = sphere_solutions[3]
        assert sol.capacity >= lower - sol.error_estimate
        # away from equality the raw inequality is strict
        m = cb.measure(spheroid21_fine)
        lower = (3.0 * m.volume / (4.0 * math.pi)) ** (1.0 / 3.0)
        assert spheroid21_solution.capacity > lower * 1.02

    def test_hawking_lower_bound_flat_space(self, sphere_meshes, sphere_solutions):
        # in flat space the Hawking mass is a (nonpositive) lower bound
        m = cb.measure(sphere_meshes[3])
        assert sphere_solutions[3].capacity >= m.hawking_mass

    def test_error_estimate_brackets_truth(self, sphere_solutions):
        for n in (2, 3, 4):
            sol = sphere_solutions[n]
            assert abs(sol.capacity - 1.0) < sol.error_estimate

    @pytest.mark.parametrize("tol", [0.0, -1.0, 0.5])
    def test_tolerance_validation(self, sphere_meshes, tol):
        with pytest.raises(ValueError):
            cb.solve_capacity(sphere_meshes[2], tolerance=tol)


class TestRefineCapacity:
    def test_sphere_extrapolation(self, sphere_meshes):
        c_star, order = cb.refine_capacity([sphere_meshes[n] for n in (2, 3, 4)])
        assert c_star == pytest.approx(1.0, rel=2e-3)
        assert order > 0.5

    def test_spheroid_extrapolation(self):
        meshes = [cb.make_spheroid(2.0, 1.0, n) for n in (2, 3, 4)]
        c_star, order = cb.refine_capacity(meshes)
        assert c_star == pytest.approx(SPHEROID21_EXACT, rel=3e-3)
        assert order > 0.5

    def test_four_level_least_squares_fit(self, sphere_meshes):
        meshes = [cb.make_sphere(1.0, 1)] + [sphere_meshes[n] for n in (2, 3, 4)]
        c_star, order = cb.refine_capacity(meshes)
        assert c_star == pytest.approx(1.0, rel=2e-3)
        assert order > 0.5

    def test_identical_meshes_rejected(self, sphere_meshes):
        with pytest.raises(ValueError, match="non-decreasing h"):
            cb.refine_capacity([sphere_meshes[2]] * 3)

    def test_too_few_meshes(self, sphere_meshes):
        with pytest.raises(ValueError, match="at least 3"):
            cb.refine_capacity([sphere_meshes[2], sphere_meshes[3]])

    def test_non_monotone_capacities_rejected(self):
        # strictly decreasing h but capacities 0.99, 0.50, 0.80
        meshes = [cb.make_sphere(1.0, 2), cb.make_sphere(0.5, 3),
                  cb.make_sphere(0.8, 4)]
        with pytest.raises(NumericalError, match="non-monotone"):
            cb.refine_capacity(meshes)
