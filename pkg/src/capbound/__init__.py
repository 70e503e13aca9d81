"""capbound: capacity of closed surfaces and the bounds that cage it.

Flat-space capacities come from a single-layer BEM solve on triangle meshes;
curved-space capacities from radial quadrature on rotationally symmetric
asymptotically flat metrics.  Both sides are compared against closed-form
upper and lower bounds whose equality cases are the constant-mass
(Schwarzschild) metrics.
"""

from .bem import CapacitySolution, refine_capacity, solve_capacity
from .bounds import (
    BoundReport,
    HawkingCheck,
    ProfileFamily,
    bound_report,
    bray_miao_bound,
    evaluate_optimal_f,
    hawking_capacity_check,
    imcf_closed_form_bound,
    imcf_profile,
    optimal_fprime,
    optimal_profile_bound,
    profile_energy,
    steiner_profile,
    szego_bound,
    tabulated_energy,
    tabulated_profile,
)
from .errors import CapboundError, MeshError, NumericalError
from .mesh import (
    SurfaceMeasures,
    TriMesh,
    load_mesh,
    make_box,
    make_primitive,
    make_sphere,
    make_spheroid,
    make_torus,
    measure,
    save_mesh,
)
from .symmetric import (
    GeometrySample,
    MassBoundResult,
    RadialScan,
    SchwarzschildForms,
    StaticCheck,
    SymmetricMetric,
    adm_mass,
    flat_metric,
    geometry_at,
    imcf_trace,
    load_mass_csv,
    mass_bound_check,
    radial_capacity,
    schwarzschild_closed_forms,
    schwarzschild_metric,
    static_check,
    tabulated_metric,
    tabulated_metric_from_csv,
)

__version__ = "1.0.0"

__all__ = [
    "BoundReport",
    "CapacitySolution",
    "CapboundError",
    "GeometrySample",
    "HawkingCheck",
    "MassBoundResult",
    "MeshError",
    "NumericalError",
    "ProfileFamily",
    "RadialScan",
    "SchwarzschildForms",
    "StaticCheck",
    "SurfaceMeasures",
    "SymmetricMetric",
    "TriMesh",
    "adm_mass",
    "bound_report",
    "bray_miao_bound",
    "evaluate_optimal_f",
    "flat_metric",
    "geometry_at",
    "hawking_capacity_check",
    "imcf_closed_form_bound",
    "imcf_profile",
    "imcf_trace",
    "load_mass_csv",
    "load_mesh",
    "make_box",
    "make_primitive",
    "make_sphere",
    "make_spheroid",
    "make_torus",
    "mass_bound_check",
    "measure",
    "optimal_fprime",
    "optimal_profile_bound",
    "profile_energy",
    "radial_capacity",
    "refine_capacity",
    "save_mesh",
    "schwarzschild_closed_forms",
    "schwarzschild_metric",
    "solve_capacity",
    "static_check",
    "steiner_profile",
    "szego_bound",
    "tabulated_energy",
    "tabulated_metric",
    "tabulated_metric_from_csv",
    "tabulated_profile",
    "__version__",
]
