"""High-precision orthogonal-polynomial toolkit for the deformed Laguerre weight.

w(x; t) = x**alpha * exp(-x) * (x + t)**lambda on (0, inf).

Layers, bottom-up: :mod:`special` (precision policy, Gamma, Barnes G,
Kummer U, semi-axis quadrature), :mod:`moments`, :mod:`orthopoly`
(Hankel determinants and recurrence coefficients), :mod:`ladder`
(auxiliary quantities and identity checks) and :mod:`asymptotics`
(large-n and long-time expansions and their convergence orders).
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConsistencyError,
    DataIntegrityError,
    DlaguerreError,
    DomainError,
    PrecisionError,
)
from .special import (  # noqa: E402
    PrecisionCtx,
    SemiaxisIntegrand,
    integrate_semiaxis,
    kummer_u,
    log_barnes_g,
    log_gamma,
    zeta_prime_minus1,
)
from .moments import (  # noqa: E402
    MomentTable,
    Route,
    WeightParams,
    build_moment_table,
    moment_closed_form,
    moment_quadrature,
)
from .orthopoly import (  # noqa: E402
    RecurrenceTable,
    exact_recurrence,
    gram_schmidt_oracle,
    hankel_ldl,
    polynomial,
    recurrence_coeffs,
)
from .ladder import (  # noqa: E402
    AuxTable,
    ResidualReport,
    TGrid,
    aux_from_integrals,
    aux_from_recurrence,
    build_t_grid,
    identity_suite,
    verify_compatibility,
    verify_discrete_system,
    verify_ode,
    verify_painleve_v,
    verify_sigma_form,
    verify_toda,
)
from .asymptotics import (  # noqa: E402
    SeriesEval,
    convergence_order,
    fit_undetermined_constants,
    fluid_endpoint,
    fluid_endpoint_series,
    free_energy_series,
    lagrange_multiplier,
    largen_series,
    largen_study,
    longtime_series,
    longtime_study,
)
