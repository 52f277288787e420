"""Cell-free massive MIMO simulator for expanded compute-and-forward."""
from .baselines import capped_rate, cf_equal_power, mrc_sum_rate
from .coeffs import select_all, select_coeff_complex, select_real_coeff
from .experiment import Scenario, TrialRecord, parse_scheme, run_scenario, summarize
from .geometry import ChannelRealization, LargeScaleMap, NetworkGeometry, draw_channel, large_scale, place_uniform
from .pipeline import parallel_pipeline, successive_pipeline
from .power import PowerAllocation, feasibility_point, optimize_parallel, optimize_single_combination
from .rates import RateReport, effective_noise_parallel, effective_noise_successive, recoverable
from .successive import assign_ues, hungarian_assign, order_combinations, succ_rates

__version__ = "0.1.0"
