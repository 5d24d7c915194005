"""Learning pulsed-jamming strategies with continuum-armed bandits."""
from .analytic import HolderParams, SerQuery, holder_constants, per_from_ser, ser_from_per, ser_numeric
from .environment import ActionSpace, Feedback, JammingEnvironment, RewardSpec, VictimProfile
from .jb import ActionGrid, compute_m, compute_m_elimination, jb_drifting_run, jb_run
from .phy import ChannelParams, ErrorRule, JammerAction, Scheme, simulate_packet
from .trace import RegretTrace

__version__ = "0.1.0"
