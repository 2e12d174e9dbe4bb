"""Layered-cube scatterer construction with numerical certificates.

The package builds arrays of axis-aligned cubes with slotted boundaries whose
exterior Helmholtz problem exhibits arbitrarily large cut-off resolvent norms
along a prescribed wavenumber sequence, and it emits machine-checkable
certificates for every inequality used along the way: quasimode norm
identities, inf-sup upper bounds, resolvent lower bounds, packing
separation, and the modal Dirichlet-to-Neumann sign conditions on spheres.
"""

from trapcert.specfun import (
    BesselDomainError,
    BesselRangeError,
    CylEval,
    SphEval,
    cyl_bessel,
    spherical_hankel,
    wronskian_residual,
)
from trapcert.sequences import (
    APower,
    ATable,
    DShiftedPower,
    DTable,
    DerivedParams,
    KLogGrowth,
    KTable,
    Schedule,
    ScheduleError,
    demo_schedule,
    derived_params,
    gap_fraction,
    growth_floor_check,
    partial_volume,
    wavenumber,
)
from trapcert.geometry import (
    BoxSpec,
    ConnectivityReport,
    DisjointnessReport,
    GeometryError,
    GeometrySummary,
    LayerPlan,
    build_layered,
    build_stacked,
    connectivity_certificate,
    disjointness_certificate,
    flood_fill_oracle,
    iter_layer_plans,
    layer_plan,
    suggested_resolution,
)
from trapcert.certify import (
    CertRecord,
    CertifyError,
    QuasimodeNorms,
    TraceTest,
    certify_geometry,
    infsup_upper,
    quasimode_norms,
    resolvent_lower,
    trace_inequality_residual,
)
from trapcert.dtnverify import (
    ModeCheckRecord,
    SweepSummary,
    a_nu,
    b_m,
    default_alphas,
    default_rho_grid,
    dtn_eigenvalue,
    verify_sweep,
)
from trapcert.cli import (
    RunConfig,
    load_config,
    run,
)

__version__ = "0.1.0"
