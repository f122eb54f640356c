"""Combinatorial pricing games: exact equilibria, oracles, and dynamics."""

from ._kernels import backend
from .demand import (
    BLOCKED,
    DecisionMapSpec,
    DemandResult,
    MapKind,
    PriceVector,
    PropertyReport,
    decide,
    demand,
    greedy_set,
    gs_greedy,
    lex_first,
    lex_key,
    maximal_lex,
    prices,
    probe_map_properties,
)
from .dynamics import (
    CounterFound,
    DynamicsTrace,
    NonexistenceCertificate,
    ReplayTrace,
    UpdateRule,
    bertrand_network,
    best_response_dynamics,
    nonexistence_certificate,
    rule_replay,
)
from .game import (
    BestResponse,
    CharacterizationReport,
    CostConditionsReport,
    EquilibriumReport,
    GameSpec,
    GridPoint,
    GridScanResult,
    LocalSearchResult,
    SubmodularPrediction,
    Verdict,
    best_response,
    check_equilibrium,
    conditions_for_set,
    cost_epsilon_equilibrium,
    cost_equilibrium_conditions,
    epsilon_transfer,
    game,
    grid_equilibrium_scan,
    local_search_welfare,
    pareto_equilibrium,
    scan_max_gains,
    seller_utilities,
    submodular_prediction,
    welfare_optimum,
)
from .monopolist import (
    MonopolistResult,
    SymmetrizationProfile,
    brute_force_monopolist,
    exact_sampler_expectation,
    harmonic_sample,
    realizing_prices,
    repeated_sample,
    revenue_of_set,
    symmetrize,
)
from .rational import Value, as_value, harmonic_number
from .valuation import (
    ClassReport,
    Valuation,
    additive,
    all_or_nothing,
    bertrand,
    budgeted_additive,
    build_family,
    classify,
    coverage,
    harmonic,
    make_table,
    marginal,
    symmetric_from_sizes,
    xos,
)

__version__ = "0.1.0"
