"""traderdesk: decision support for price-taking traders.

Expected-value integer programs and antagonistic maximin games over price
polyhedra, on top of an embedded two-phase simplex and branch-and-bound
solver, plus trials and simulations for testing direction-calling ability.
"""

from .ability import (
    AbilityEstimate,
    TimeSeries,
    TradingRun,
    TrialRecord,
    bernoulli_predictor,
    check_consistency,
    estimate_ability,
    run_bernoulli_trials,
    run_segment_trials,
    sample_segments,
    simulate_trading,
)
from .errors import EngineError
from .expectations import (
    Direction,
    FuturesSpec,
    OptionKind,
    OptionsSpec,
    Partition,
    SecurityBelief,
    Side,
    classify_positive,
    expected_price,
    futures_expected_finres,
    options_expected_finres,
)
from .lp_solver import (
    LinearProgram,
    LpOutcome,
    check_duality_certificate,
    solve_dual_pair,
    solve_lp,
    to_mps,
)
from .milp import IntegerMask, MilpOutcome, relax_and_round, solve_milp
from .model1 import (
    ProblemInstance,
    StrategyResult,
    TraderState,
    build_problem1,
    build_problem2,
    build_problem4,
    solve_model1,
)
from .model2 import (
    BudgetRow,
    DerivativeClass,
    ExchangeScenario,
    GameSpec,
    MaximinResult,
    PriceBox,
    SaddlePointResult,
    build_derivative_game,
    build_game,
    build_game_with_holdings,
    evaluate_payoff,
    solve_maximin_exact,
    solve_maximin_upper_bound,
)

__version__ = "0.1.0"
