"""Link-level simulator for IRS-assisted uplinks with limited-feedback codebooks."""

from .agent import (DdpgAgent, Normalization, ReplayBuffer, TrainResult,
                    behavior_action, build_state, ddpg_update, train,
                    utilization_step)
from .channel import (ChannelModel, ChannelState, Geometry, PathSet,
                      array_response, effective_channel, effective_channels,
                      evolve, path_loss, sample_initial)
from .codebook import (DirectionCodebook, StepSizes, dpic_apply, ra_update,
                       rvq_codebook)
from .config import ExperimentConfig, desk_config, load_config, save_config
from .errors import (ConfigurationError, DivergenceError,
                     ProtocolInfeasibleError, SingularityError)
from .metaatom import (CapacitanceBounds, CircuitProfile, default_profile,
                       expand_groups, impedance, interpolate_profile,
                       load_profile_csv, reflection_coefficient,
                       reflection_vector)
from .neural import AdamState, Mlp, adam_step, load_weights, save_weights, soft_update
from .protocol import (BlockResult, LinkBudget, Timings, data_rate,
                       effective_rate, feedback_bits, run_block,
                       sound_and_select, time_overhead)

__version__ = "0.1.0"
