"""Desk-scale laboratory for PCP verifiers sound against non-signaling
strategies, built on exact rational arithmetic end to end."""

__version__ = "0.1.0"

from .circuits import (
    Circuit,
    ConstraintSystem,
    Gate,
    LinearProof,
    arithmetize,
    evaluate,
    intended_proof,
    parse_circuit,
)
from .distributions import LocalDistribution, marginalize, tv_distance
from .errors import InvalidInput, ScopeExceeded
from .gf2 import (
    BitMatrix,
    BitVector,
    Permutation,
    RepeatedQuery,
    diag,
    inner,
    tensor,
)
from .strategy import (
    ClassicalStrategy,
    Domain,
    MixtureStrategy,
    Strategy,
    TableStrategy,
    consistency_probability,
    distance_l,
    flatten,
    fold,
    from_classical_proof,
    linearity_probability,
    ns_defect,
    repeated_classical,
    self_correct,
    zero_on_zeros_probability,
)
from .verifier import (
    AlmssVerifier,
    FullVerifier,
    RepeatedAlmssVerifier,
    acceptance_exact,
    acceptance_mc,
    consistency_test,
    full_verifier,
    linearity_test,
)
from .salp import build_sa_lp, max_acceptance, nearest_exact, nearest_linear
from .simplex import LinearProgram, solve, verify_certificate
