"""Tests for the environment suite: chain MDP semantics and its dynamic-
programming oracle, mountain car dynamics, cartpole energy conservation,
pendulum reward, bounds, and determinism."""

import math

import numpy as np
import pytest

from paramnoise.envs import (
    ChainEnv,
    DensePendulum,
    SparseCartpoleSwingup,
    SparseMountainCar,
    chain_observation,
    chain_optimal_return,
    chain_step,
    make_env,
    wrap_angle,
)


# ---------------------------------------------------------------- chain ----

# [DERIVED] transition semantics: action 1 moves right, action 0 moves left,
# both saturate at the ends; rewards only at the two end states.
def test_chain_step_semantics():
    n = 5
    assert chain_step(2, 1, n) == (3, 0.0)
    assert chain_step(3, 0, n) == (2, 0.0)
    assert chain_step(1, 0, n) == (1, 0.001)    # loop at s_1
    assert chain_step(2, 0, n) == (1, 0.001)    # entering s_1 pays on arrival
    assert chain_step(n - 1, 1, n) == (n, 1.0)  # arriving at s_N
    assert chain_step(n, 1, n) == (n, 1.0)      # looping at s_N
    assert chain_step(n, 0, n) == (n - 1, 0.0)
    assert chain_step(1, 1, n) == (2, 0.0)


# [DERIVED] oracle: exact finite-horizon dynamic programming. For N=5 and
# horizon 14 starting at s_2: three steps right reach s_5 (reward 1 on
# arrival), then 11 self-loops at reward 1 each -> 12. The all-left policy
# earns 0.001 * 13.
def test_chain_optimal_return_dp_values():
    assert chain_optimal_return(5, 14) == pytest.approx(12.0, abs=1e-12)
    # right-run value beats the left-loop value for every N we use
    for n in (10, 20, 40):
        horizon = n + 9
        opt = chain_optimal_return(n, horizon)
        # rewarded on arrival at step n-2, then on every self-loop after
        right_run = horizon - (n - 2) + 1
        assert opt == pytest.approx(right_run, abs=1e-12)
        left_value = 0.001 * (horizon - 1)
        assert opt > left_value


# [DERIVED] brute-force oracle: enumerate all action sequences for a tiny
# chain and compare the best return with the DP value.
def test_chain_optimal_return_vs_enumeration():
    n, horizon = 4, 7
    best = -np.inf
    for bits in range(2 ** horizon):
        state, total = 2, 0.0
        for t in range(horizon):
            state, r = chain_step(state, (bits >> t) & 1, n)
            total += r
        best = max(best, total)
    assert chain_optimal_return(n, horizon) == pytest.approx(best, abs=1e-12)


# [PAPER] observation is the thermometer encoding phi(s_t) = 1{x <= s_t}.
def test_chain_observation_encoding():
    assert np.array_equal(chain_observation(3, 5),
                          np.array([1.0, 1.0, 1.0, 0.0, 0.0]))
    assert np.array_equal(chain_observation(1, 4),
                          np.array([1.0, 0.0, 0.0, 0.0]))
    assert np.array_equal(chain_observation(4, 4), np.ones(4))


# [TRIVIAL] episode protocol: starts at s_2, horizon N + 9 steps.
def test_chain_env_protocol():
    env = ChainEnv(10)
    obs = env.reset(np.random.default_rng(0))
    assert np.array_equal(obs, chain_observation(2, 10))
    steps = 0
    done = False
    while not done:
        res = env.step(1)
        done = res.done
        steps += 1
    assert steps == 19  # N + 9
    assert env.spec.horizon == 19


# [TRIVIAL] an all-right rollout earns the optimal return.
def test_chain_env_all_right_return():
    env = ChainEnv(10)
    env.reset(np.random.default_rng(0))
    total, done = 0.0, False
    while not done:
        res = env.step(1)
        total += res.reward
        done = res.done
    assert total == pytest.approx(chain_optimal_return(10, 19), abs=1e-12)


# --------------------------------------------------------- mountain car ----

# [DERIVED] one-step dynamics oracle: from (p, v) with action a in {-1,0,1}
# scaled by 0.001... here continuous force in [-1, 1]:
# v' = clip(v + 0.0015 a - 0.0025 cos(3p), +/-0.07), p' = clip(p + v').
def test_mountain_car_one_step_dynamics():
    env = SparseMountainCar()
    env.reset(np.random.default_rng(0))
    env.pos, env.vel = -0.5, 0.0
    res = env.step(np.array([1.0]))
    v_expected = 0.0015 * 1.0 - 0.0025 * math.cos(3 * -0.5)
    assert res.observation[1] == pytest.approx(v_expected, abs=1e-15)
    assert res.observation[0] == pytest.approx(-0.5 + v_expected, abs=1e-15)
    assert res.reward == 0.0 and not res.done


# [DERIVED] gravity-only check: zero action at p = -0.5 gives
# v' = -0.0025 cos(-1.5).
def test_mountain_car_gravity_term():
    env = SparseMountainCar()
    env.reset(np.random.default_rng(0))
    env.pos, env.vel = -0.5, 0.0
    res = env.step(np.array([0.0]))
    assert res.observation[1] == pytest.approx(-0.0025 * math.cos(-1.5),
                                               abs=1e-15)


# [DERIVED] sparsity oracle: full throttle from the valley cannot climb the
# hill directly, so at least 50 steps pass with zero reward.
def test_mountain_car_requires_momentum():
    env = SparseMountainCar()
    env.reset(np.random.default_rng(0))
    env.pos, env.vel = -0.5, 0.0
    for _ in range(50):
        res = env.step(np.array([1.0]))
        assert res.reward == 0.0
        assert not res.done


# [TRIVIAL] reaching the goal pays 1 exactly once and terminates.
def test_mountain_car_goal():
    env = SparseMountainCar()
    env.reset(np.random.default_rng(0))
    env.pos, env.vel = 0.449, 0.07
    res = env.step(np.array([1.0]))
    assert res.reward == 1.0 and res.done


# [TRIVIAL] left wall: position clips at -1.2 and velocity resets to 0.
def test_mountain_car_left_wall():
    env = SparseMountainCar()
    env.reset(np.random.default_rng(0))
    env.pos, env.vel = -1.199, -0.07
    res = env.step(np.array([-1.0]))
    assert res.observation[0] == -1.2
    assert res.observation[1] == 0.0


# ------------------------------------------------------------- cartpole ----

def cartpole_energy(env: SparseCartpoleSwingup) -> float:
    """Total mechanical energy of the cart-pole, zero potential at the pole's
    downward rest."""
    mc, mp = env.cart_mass, env.pole_mass
    l, g = env.pole_half_length, env.gravity
    _, x_dot, th, th_dot = env.state
    # uniform pole: center of mass at l, moment of inertia (1/3) mp (2l)^2
    # about the pivot = (4/3) mp l^2
    kinetic = (0.5 * (mc + mp) * x_dot ** 2
               + mp * l * x_dot * th_dot * math.cos(th)
               + 0.5 * (4.0 / 3.0) * mp * l ** 2 * th_dot ** 2)
    potential = mp * g * l * (1.0 + math.cos(th))
    return kinetic + potential


# [DERIVED] physics oracle: with zero force the system is conservative, so
# total energy over 500 steps drifts by < 1%.
def test_cartpole_energy_conservation():
    env = SparseCartpoleSwingup()
    env.reset(np.random.default_rng(0))
    env.state = np.array([0.0, 0.0, 2.5, 0.0])
    e0 = cartpole_energy(env)
    for _ in range(500):
        env.step(np.array([0.0]))
    drift = abs(cartpole_energy(env) - e0) / abs(e0)
    assert drift < 0.01, f"energy drift {drift:.4f}"


# [DERIVED] the downward equilibrium theta = pi is a fixed point of the
# unforced dynamics.
def test_cartpole_downward_fixed_point():
    env = SparseCartpoleSwingup()
    env.reset(np.random.default_rng(0))
    env.state = np.array([0.0, 0.0, math.pi, 0.0])
    for _ in range(100):
        res = env.step(np.array([0.0]))
    assert abs(abs(wrap_angle(env.state[2])) - math.pi) < 1e-9
    assert abs(env.state[3]) < 1e-9
    assert res.reward == 0.0  # hanging down is never rewarded


# [TRIVIAL] reward is 1 exactly when cos(theta) > 0.8.
def test_cartpole_reward_region():
    env = SparseCartpoleSwingup()
    env.reset(np.random.default_rng(0))
    env.state = np.array([0.0, 0.0, 0.0, 0.0])  # balanced upright
    assert env.step(np.array([0.0])).reward == 1.0
    env.reset(np.random.default_rng(0))
    # outside the cone, and an unforced pole only falls further
    env.state = np.array([0.0, 0.0, math.acos(0.75), 0.0])
    assert env.step(np.array([0.0])).reward == 0.0


# [TRIVIAL] leaving the track ends the episode.
def test_cartpole_track_limit():
    env = SparseCartpoleSwingup()
    env.reset(np.random.default_rng(0))
    env.state = np.array([2.39, 3.0, math.pi, 0.0])
    res = env.step(np.array([1.0]))
    assert res.done


# ------------------------------------------------------------- pendulum ----

# [DERIVED] reward oracle: -(wrap(theta)^2 + 0.1 theta_dot^2 + 0.001 u^2);
# hand value at theta = pi, theta_dot = 0, u = 0 is -pi^2.
def test_pendulum_reward_hand_values():
    env = DensePendulum()
    env.reset(np.random.default_rng(0))
    env.th, env.thdot = math.pi, 0.0
    res = env.step(np.array([0.0]))
    assert res.reward == pytest.approx(-(math.pi ** 2), abs=1e-12)
    env.th, env.thdot = 0.0, 0.0
    res = env.step(np.array([0.0]))
    # after one unforced step from upright the penalty stays ~0
    assert res.reward == pytest.approx(0.0, abs=1e-6)


# [DERIVED] one-step dynamics: theta_dot' = theta_dot + (3g/(2l) sin(theta)
# + 3u/(ml^2)) dt, theta' = theta + theta_dot' dt.
def test_pendulum_one_step_dynamics():
    env = DensePendulum()
    env.reset(np.random.default_rng(0))
    env.th, env.thdot = 1.0, 0.5
    env.step(np.array([1.5]))
    td = 0.5 + (3 * 10.0 / 2.0 * math.sin(1.0) + 3 * 1.5) * 0.05
    assert env.thdot == pytest.approx(td, abs=1e-12)
    assert env.th == pytest.approx(1.0 + td * 0.05, abs=1e-12)


# [TRIVIAL] torque is clipped to [-2, 2] before use.
def test_pendulum_torque_clip():
    env = DensePendulum()
    env.reset(np.random.default_rng(0))
    env.th, env.thdot = 1.0, 0.5
    env.step(np.array([50.0]))
    big = (env.th, env.thdot)
    env.reset(np.random.default_rng(0))
    env.th, env.thdot = 1.0, 0.5
    env.step(np.array([2.0]))
    assert (env.th, env.thdot) == big


# ------------------------------------------------------------- generics ----

@pytest.mark.parametrize("name", ["chain-N10", "sparse-mountaincar",
                                  "sparse-cartpole-swingup", "dense-pendulum"])
def test_env_bounds_and_determinism(name):
    env_a = make_env(name)
    env_b = make_env(name)
    rng_a = np.random.default_rng(77)
    rng_b = np.random.default_rng(77)
    obs_a = env_a.reset(rng_a)
    obs_b = env_b.reset(rng_b)
    assert np.array_equal(obs_a, obs_b)
    act_rng = np.random.default_rng(5)
    low, high = env_a.spec.obs_low, env_a.spec.obs_high
    for _ in range(200):
        if hasattr(env_a.spec.action_space, "n"):
            action = int(act_rng.integers(env_a.spec.action_space.n))
        else:
            action = act_rng.uniform(env_a.spec.action_space.low,
                                     env_a.spec.action_space.high,
                                     size=env_a.spec.action_space.dim)
        res_a = env_a.step(action)
        res_b = env_b.step(action)
        assert np.array_equal(res_a.observation, res_b.observation)
        assert res_a.reward == res_b.reward and res_a.done == res_b.done
        assert np.all(res_a.observation >= low - 1e-12)
        assert np.all(res_a.observation <= high + 1e-12)
        assert np.all(np.isfinite(res_a.observation))
        if res_a.done:
            obs_a = env_a.reset(rng_a)
            obs_b = env_b.reset(rng_b)
            assert np.array_equal(obs_a, obs_b)


# [TRIVIAL] horizons terminate episodes at the documented step counts.
@pytest.mark.parametrize("name,horizon", [("chain-N10", 19),
                                          ("sparse-mountaincar", 500),
                                          ("sparse-cartpole-swingup", 500),
                                          ("dense-pendulum", 200)])
def test_env_horizons(name, horizon):
    env = make_env(name)
    assert env.spec.horizon == horizon


def test_make_env_rejects_unknown():
    with pytest.raises(ValueError):
        make_env("lunar-lander")


# [TRIVIAL] wrap_angle maps into [-pi, pi).
def test_wrap_angle():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    assert wrap_angle(math.pi) == pytest.approx(-math.pi, abs=1e-12)
    assert wrap_angle(-3 * math.pi / 2) == pytest.approx(math.pi / 2,
                                                         abs=1e-12)
