"""Independent numerical routes used to cross-check the closed forms."""

from .checks import (
    EntropyProductionCheck,
    entropy_production_check,
    entropy_quadrature,
    fisher_quadrature,
    lm_norm_quadrature,
    moment_quadrature,
)
from .quadrature import QuadratureResult, integrate, offcenter_quadrature, radial_quadrature, sphere_area
from .sampling import (
    SampleCloud,
    projected_sphere_fixture,
    rng_stream,
    sample_barenblatt,
    sample_flow,
    student_t_fixture,
)
from .transport import (
    DebiasedEstimate,
    Law1D,
    barenblatt_law_1d,
    debiased_assignment_w2,
    flow_law_1d,
    law_from_cdf,
    ot_1d_quantile,
    ot_assignment,
    quantile_grid,
)
