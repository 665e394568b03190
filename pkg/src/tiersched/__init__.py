"""Multi-tier job scheduling: virtual-queue GA optimization, dispatch
baselines and a discrete-event simulator with an SLA penalty model."""

from .ga import (GaConfig, GaRun, fitness, insert_mutation, roulette_select,
                 run_ga, selection_weights, single_point_crossover)
from .model import (Environment, Job, PenaltyModel, TierSnapshot, VirtualQueue,
                    apply_schedule, evaluate_waiting, job_penalty,
                    response_time, total_exec_time, total_penalty)
from .policies import (SEGMENTED_GA, VIRTUAL_GA, WLC, WRR, Strategy, WrrCursor,
                       dispatch_wlc, dispatch_wrr, run_segmented_ga, segment_runs)
from .sim import (Event, ExperimentReport, SimConfig, SimResult,
                  compare_strategies, run_sim)
from .workload import (FixtureError, WorkloadConfig, generate, load_fixture,
                       save_fixture)

__version__ = "0.1.0"
