import math

import pytest

import capbound as cb

SPHEROID21_EXACT = math.sqrt(3.0) / math.atanh(math.sqrt(3.0) / 2.0)


@pytest.fixture(scope="session")
def sphere_meshes():
    """Unit-sphere refinement sequence (320 / 1280 / 5120 faces)."""
    return {n: cb.make_sphere(1.0, n) for n in (2, 3, 4)}


@pytest.fixture(scope="session")
def sphere_solutions(sphere_meshes):
    return {n: cb.solve_capacity(m) for n, m in sphere_meshes.items()}


@pytest.fixture(scope="session")
def spheroid21_fine():
    return cb.make_spheroid(2.0, 1.0, 4)


@pytest.fixture(scope="session")
def spheroid21_solution(spheroid21_fine):
    return cb.solve_capacity(spheroid21_fine)


CORPUS_SPEC = [
    # name, builder args (kind, *params), fine subdivisions, coarse subdivisions
    ("sphere_r1_s3", ("sphere", 1.0), 3, 2),
    ("sphere_r1_s4", ("sphere", 1.0), 4, 3),
    ("sphere_r15_s3", ("sphere", 1.5), 3, 2),
    ("sphere_r08_s3", ("sphere", 0.8), 3, 2),
    ("spheroid_2_1_s4", ("spheroid", 2.0, 1.0), 4, 3),
    ("spheroid_15_1_s3", ("spheroid", 1.5, 1.0), 3, 2),
    ("spheroid_3_1_s3", ("spheroid", 3.0, 1.0), 3, 2),
    ("box_1_s3", ("box", 1.0, 1.0, 1.0, 0.2), 3, 2),
    ("box_211_s3", ("box", 2.0, 1.0, 1.0, 0.3), 3, 2),
    ("torus_2_05_s3", ("torus", 2.0, 0.5), 3, 2),
]


@pytest.fixture(scope="session")
def corpus():
    """(name, fine mesh, coarse mesh) for every corpus entry."""
    out = []
    for name, args, fine, coarse in CORPUS_SPEC:
        out.append((name,
                    cb.make_primitive(args[0], *args[1:], fine),
                    cb.make_primitive(args[0], *args[1:], coarse)))
    return out


@pytest.fixture(scope="session")
def corpus_reports(corpus):
    """BEM-backed bound report per corpus mesh plus a two-level error bound.

    The error bound for the fine capacity is |C_fine - C_coarse|, which
    overestimates the fine-level error for any convergence order above ~0.6.
    """
    out = {}
    for name, fine, coarse in corpus:
        report = cb.bound_report(fine, with_bem=True)
        c_coarse = cb.solve_capacity(coarse).capacity
        out[name] = (report, abs(report.capacity_bem - c_coarse))
    return out
