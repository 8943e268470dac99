"""Potts correlation-inequality verification toolkit.

Exact enumeration of the q-state ferromagnetic Potts model with external
field, its ghost-vertex random-cluster representation and coupling,
moment-based function classes, inequality verifiers with a fuzzing
harness, and a cluster Monte Carlo sampler for instances beyond
enumeration range.
"""

from .function_classes import (
    BadFamilyC,
    MembershipReport,
    MomentTable,
    check_Fq,
    check_Fq_i,
    make_family,
    moments,
    spin_function_from_spec,
)
from .mc import BadWindow, ChainState, Estimate, estimate, estimate_pooled, sw_sweep
from .model import (
    BadEdge,
    BadQ,
    BadRegion,
    EnumerationTooLarge,
    ModelError,
    NegativeCoupling,
    NegativeField,
    PottsModel,
    SpinFunction,
    partition_function,
    potts_distribution,
    potts_expectation,
    potts_weight,
    validate_model,
)
from .random_cluster import (
    AugmentedGraph,
    ClusterPartition,
    augment,
    cluster_moment_product,
    clusters,
    conditional_expectation,
    coupled_spin_marginal,
    event_Z,
    rc_distribution,
    rc_expectation,
    rc_probability,
    sample_spins,
)
from .verify import (
    FuzzConfig,
    FuzzResult,
    NotCertified,
    NotDisjoint,
    VerificationReport,
    fuzz,
    verify_disjoint_support,
    verify_gks_pair,
    verify_monotone,
    verify_real_nonneg,
)

__version__ = "0.1.0"
