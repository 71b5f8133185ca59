from .dqn import DQNAgent, BootstrappedDQNAgent, DQNConfig, policy_head_loss
from .ddpg import DDPGAgent, DDPGConfig
from .reinforce import Episode, ReinforceAgent, ReinforceConfig, \
    discounted_returns, reinforce_psn_gradient

__all__ = [
    "DQNAgent", "BootstrappedDQNAgent", "DQNConfig", "policy_head_loss",
    "DDPGAgent", "DDPGConfig",
    "Episode", "ReinforceAgent", "ReinforceConfig",
    "discounted_returns", "reinforce_psn_gradient",
]
