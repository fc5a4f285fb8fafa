"""Contract scheduling with untrusted and noisy advice."""
from .advisor import (AdvicePlan, CyclicFamily, best_member_at, build_noisy_schedule,
                      build_pareto_schedule, build_rft_schedule, build_robust_noisy_schedule,
                      select_with_noisy_advice)
from .bounds import (AdviceConfig, RobustnessSpec, binomial_tail, bounds_report,
                     entropy_bounds, noisy_lower_bound, noisy_upper_bound,
                     pareto_consistency_lower_bound, prior_work_bound, rft_optimal_value,
                     robust_noisy_lower_bound, robust_noisy_upper_bound, zeta_roots)
from .errors import (ConfigError, ContractSchedError, DomainError, InconsistentAnswersError,
                     InvalidScheduleError, PreconditionError, ProtocolError,
                     UnsupportedRegimeError)
from .harness import (SimulationConfig, SimulationRun, compare_bounds_table, run_scenario,
                      verify_theorems)
from .querygames import (AdviceChannel, GameState, QueryTranscript, SearchAdversary,
                         adversarial_respond, inject_errors, solve_min_cyclic,
                         weighting_query)
from .sequences import (MergedSequence, MultiSchedule, Schedule, acceleration_ratio,
                        alpha_estimate, check_zeta_envelope, fault_tolerant_ratio,
                        gal_functional, longest_completed_by)

__version__ = "0.1.0"
