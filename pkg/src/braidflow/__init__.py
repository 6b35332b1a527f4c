"""braidflow: conjugation-generated norms, braid quasi-morphisms, and
Monte Carlo averaging of quasi-morphisms over traced disk-map trajectories."""

from .braids import (
    BraidWord,
    braid_permutation,
    free_reduce,
    full_twist,
    is_pure,
    linking_numbers,
    parse_word,
    word,
    writhe,
)
from .diskmaps import (
    Ball,
    HamiltonianFlow,
    RadialTwist,
    TwistComposition,
    identity_map,
    kercal_plateau_pair,
    make_kercal_map,
    moving_bump_flow,
    twist_flow,
)
from .ggestimate import (
    GGEstimate,
    area_bound,
    bound_certificate,
    gamma_estimate,
    gamma_extrapolate,
    scaling_check,
    sequence_experiment,
)
from .permgroups import (
    GroupTable,
    MetricMatrix,
    NormTable,
    build_group,
    conj_norm,
    qi_diagnostic,
    sym_classes,
    tsuboi_metric,
    verify_submultiplicativity,
)
from .pslmath import (
    PSLMatrix,
    braid_equal,
    braid_is_trivial,
    psl_image,
    rademacher,
    rademacher_phi,
)
from .quasimorphisms import QmSpec, defect_sample, homogenize, phi_b3
from .trajectories import Config3, TrajectoryBundle, braid_of, trace_loop

__all__ = [
    "BraidWord",
    "braid_permutation",
    "free_reduce",
    "full_twist",
    "is_pure",
    "linking_numbers",
    "parse_word",
    "word",
    "writhe",
    "Ball",
    "HamiltonianFlow",
    "RadialTwist",
    "TwistComposition",
    "identity_map",
    "kercal_plateau_pair",
    "make_kercal_map",
    "moving_bump_flow",
    "twist_flow",
    "GGEstimate",
    "area_bound",
    "bound_certificate",
    "gamma_estimate",
    "gamma_extrapolate",
    "scaling_check",
    "sequence_experiment",
    "GroupTable",
    "MetricMatrix",
    "NormTable",
    "build_group",
    "conj_norm",
    "qi_diagnostic",
    "sym_classes",
    "tsuboi_metric",
    "verify_submultiplicativity",
    "PSLMatrix",
    "braid_equal",
    "braid_is_trivial",
    "psl_image",
    "rademacher",
    "rademacher_phi",
    "QmSpec",
    "defect_sample",
    "homogenize",
    "phi_b3",
    "Config3",
    "TrajectoryBundle",
    "braid_of",
    "trace_loop",
]
