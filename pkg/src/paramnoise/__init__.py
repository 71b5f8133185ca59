"""Adaptive parameter-space noise exploration lab.

Perturbs policy weights with adaptively scaled spherical Gaussian noise at
episode boundaries and compares the result against action-space noise
baselines (epsilon-greedy, additive Gaussian, Ornstein-Uhlenbeck,
bootstrapped value heads) on desk-scale exploration benchmarks.
"""

from . import agents, distance, envs, harness, nn, noise, replay

__all__ = ["agents", "distance", "envs", "harness", "nn", "noise", "replay"]

__version__ = "0.1.0"
