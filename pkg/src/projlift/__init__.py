"""Split-signature Einstein lifts of projective surface structures.

Construct the Einstein, Walker, modified-Walker and skew metric families on
the rank-2 fibre extension of a surface with a projective structure, and
verify their curvature, gauge-invariance, symmetry, and twistor-distribution
properties numerically over exact symbolic jets.
"""

__version__ = "0.1.0"

from .conventions import Conventions, active as active_conventions  # noqa: F401
from .dsl import Expr, parse  # noqa: F401
from .lift import (  # noqa: F401
    MetricFamily,
    SympForm,
    einstein_lift,
    gauge_shift,
    modified_walker,
    para_structure,
    skew_ricci_flat,
    symplectic_form,
    walker_lift,
)
from .projective import (  # noqa: F401
    ConnectionN,
    OneForm,
    VectorField,
    connection_curvature,
    connection_from_entries,
    liouville,
    ode_coefficients,
    projective_change,
    special_residual,
    thomas_symbols,
    zero_connection,
)
from .report import Report, emit  # noqa: F401
