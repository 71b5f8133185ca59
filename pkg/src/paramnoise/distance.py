"""Action-space distance measures that drive the adaptive noise scale:
KL divergence between softmaxed Q-values for discrete policies and the
root-mean-square action deviation for continuous ones."""

from __future__ import annotations

import numpy as np

from .nn import Network, softmax


def softmax_policy(q_values) -> np.ndarray:
    """Max-subtracted softmax over Q-values; a valid action distribution."""
    q_values = np.asarray(q_values, dtype=np.float64)
    if q_values.size == 0:
        raise ValueError("q_values must be nonempty")
    if not np.all(np.isfinite(q_values)):
        raise ValueError("q_values must be finite")
    return softmax(q_values)


def kl_divergence(p, q) -> float:
    """KL(p || q) with 0 log 0 := 0. Returns +inf when q puts zero mass where
    p does not (absolute-continuity violation)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("distributions must have equal length")
    support = p > 0.0
    if np.any(q[support] == 0.0):
        return np.inf
    ps = p[support]
    return float(np.sum(ps * np.log(ps / q[support])))


def epsilon_greedy_kl_threshold(epsilon: float, n_actions: int) -> float:
    """KL between a greedy policy and its epsilon-greedy counterpart:
    -log(1 - eps + eps/|A|). Used as the adaptation threshold so parameter
    noise is commensurable with epsilon-greedy action noise."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if n_actions < 1:
        raise ValueError("n_actions must be >= 1")
    return float(-np.log(1.0 - epsilon + epsilon / n_actions))


def _as_batch_fn(policy):
    """Accept either a Network or any callable mapping a state batch to an
    action batch."""
    return policy.forward if isinstance(policy, Network) else policy


def discrete_policy_distance(q_net, q_net_tilde, state_batch) -> float:
    """Mean KL over a state batch between softmax(Q(s)) and softmax(Q~(s)).
    Works equally for a perturbed Q-network and a perturbed policy head."""
    states = np.asarray(state_batch, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("state_batch must be a nonempty 2-D array")
    p = softmax(_as_batch_fn(q_net)(states))
    q = softmax(_as_batch_fn(q_net_tilde)(states))
    kls = [kl_divergence(pi, qi) for pi, qi in zip(p, q)]
    return float(np.mean(kls))


def continuous_policy_distance(pi, pi_tilde, state_batch) -> float:
    """sqrt of the mean (over action dimensions) of the per-dimension mean
    squared deviation between the two policies' actions over the batch."""
    states = np.asarray(state_batch, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("state_batch must be a nonempty 2-D array")
    a = np.atleast_2d(_as_batch_fn(pi)(states))
    a_tilde = np.atleast_2d(_as_batch_fn(pi_tilde)(states))
    if a.shape != a_tilde.shape:
        raise ValueError("policies produced mismatched action batches")
    per_dim_mse = np.mean((a - a_tilde) ** 2, axis=0)
    return float(np.sqrt(np.mean(per_dim_mse)))
