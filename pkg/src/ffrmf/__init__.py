"""ffrmf: random multiplicative functions over F_q[t], checked exactly.

The package makes the normal-limit behaviour of partial sums of random
+-1 multiplicative functions over polynomial rings experimentally
checkable: exact enumeration and counting of the squarefree polynomial
sets involved, exact verification of the supporting moment inequalities
at desk scale, and Monte Carlo verification of the Gaussian limit.
"""

__version__ = "0.1.0"

from .asymptotics import (
    euler_product_G,
    factorial_tail_check,
    gamma_real,
    sathe_selberg_estimate,
)
from .bounds import (
    BoundReport,
    bound_chain_report,
    composition_sum,
    composition_sum_envelope,
    full_overlap_chain,
    partial_overlap_chain,
)
from .counting import (
    LOG_SHIFT,
    CountTable,
    count_Pk,
    count_Pk_by_maxdeg,
    count_Pk_le,
    hardy_ramanujan_bound,
    is_prime_power,
    pi_irred,
    squarefree_total,
)
from .errors import (
    FfrmfError,
    ResourceBudgetError,
    UnsupportedFieldError,
    VerificationError,
)
from .montecarlo import (
    DEFAULT_SEED,
    SampleStats,
    SignAssignment,
    derive_signs,
    evaluate_sums,
    ks_normal,
    run_experiment,
)
from .oracle import (
    exact_mixed_moment,
    exhaustive_moments,
    full_overlap_count,
    mcleish_report,
    pair_parity_census,
    parity_key,
    partial_overlap_count,
    verify_divisor_pair_bound,
    verify_mixed_moment_bound,
)
from .polyfield import (
    FactorSet,
    FieldSpec,
    IrredId,
    IrredTable,
    MonicPoly,
    enumerate_Pkn,
    factor_set_product,
    factor_squarefree,
    irreducible_table,
    make_field,
    poly_mul,
)
