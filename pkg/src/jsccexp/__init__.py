"""Error exponents and finite-length bounds for joint source-channel coding."""
from .ensemble import (
    EnsembleConfig,
    ErrorEstimate,
    conditional_ensemble_error,
    empirical_exponent,
    exact_ensemble_error,
    monte_carlo_error,
)
from .errors import *  # noqa: F401,F403
from .exponents import (
    ExponentResult,
    best_pair_search,
    class_exponents,
    critical_rate,
    csiszar_jscc_exponent_dual,
    csiszar_jscc_exponent_primal,
    ensemble_ceiling,
    gallager_jscc_exponent,
    jscc_sphere_packing_exponent,
    random_coding_exponent,
    solve_threshold,
    source_reliability,
    sphere_packing_exponent,
    two_class_exponent,
)
from .finite import PartitionSpec, realize_partition, theorem1_bound
from .gallager import (
    RhoGrid,
    channel_function,
    class_source_function,
    lemma1_bound,
    linearized_source_function,
    source_function,
)
from .hull import DistributionSet, HullCurve, capacity, concave_hull, maximize_e0
from .presets import example_6x4
from .prob import (
    ChannelSpec,
    InputDistribution,
    SourceSpec,
    entropy,
    mutual_information,
    to_bits,
    uniform_input,
    validate_channel,
    validate_input,
    validate_source,
)
