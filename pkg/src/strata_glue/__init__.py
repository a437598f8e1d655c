"""Desk-scale smooth-representation computations for rank-2 strata gluing."""

__version__ = "0.1.0"

from .lambda_core import (  # noqa: F401
    BadSqrt,
    BanalityViolation,
    BoundedComplex,
    CoeffRing,
    DegreeOutOfRange,
    FgModule,
    IllDefinedMap,
    LambdaMatrix,
    MissingSqrtQ,
    ModuleMap,
    free_module,
    homology,
    howell_form,
    iso_class,
    kernel,
    left_kernel,
    make_ring,
    module_isomorphism,
    quotient_module,
)

from .char_engine import (  # noqa: F401
    Gb2Character,
    GradedCharModule,
    TorusChar,
    UnramChar,
    compact_generator_ranks,
    glue,
    hc_tilde,
    is_generic,
    jacquet_symbolic,
    verdier_dualize,
)
