import numpy as np
import pytest

import tenthsim_env
from tenthsim_env import ClosedHandleError, make

from tenthsim import ControlInput, RewardSpec
from tenthsim.errors import StartPoseCollisionError, SteppedAfterDoneError
from tenthsim.harness import load_scenario
from tenthsim.harness.race import build_engine
from tenthsim.harness.scenario import data_dir

SCENARIO = data_dir() / "race3_head_to_head.json"


def scripted_actions(n_steps, n_agents, seed=3):
    rng = np.random.default_rng(seed)
    return rng.uniform([-1.0, -3.0], [1.0, 3.0], size=(n_steps, n_agents, 2))


class TestLifecycle:
    def test_version_matches_engine(self):
        import tenthsim

        env = make(SCENARIO)
        assert env.version == tenthsim.__version__

    def test_space_descriptors_match_config(self):
        env = make(SCENARIO)
        scenario = load_scenario(SCENARIO)
        assert env.spaces.n_agents == len(scenario.agents)
        assert env.spaces.action_shape == (2, 2)
        assert env.spaces.scan_beams == tuple(
            a.scan_spec().num_beams for a in scenario.agents)
        p = scenario.agents[0].vehicle_params()
        np.testing.assert_allclose(env.spaces.action_high[0],
                                   [p.steer_rate_max, p.a_max])

    def test_closed_handle_rejects_calls(self):
        env = make(SCENARIO)
        env.close()
        with pytest.raises(ClosedHandleError):
            env.reset()
        with pytest.raises(ClosedHandleError):
            env.step(np.zeros((2, 2)))

    def test_invalid_pose_surfaces_engine_error(self):
        env = make(SCENARIO)
        with pytest.raises(StartPoseCollisionError):
            env.reset(poses=[(13.0, 0.0, 1.6), (9.3, 0.5, 1.63)])

    def test_step_before_reset_rejected(self):
        env = make(SCENARIO)
        with pytest.raises(SteppedAfterDoneError):
            env.step(np.zeros((2, 2)))


class TestStep:
    def test_out_of_bounds_clipped_with_info_flag(self):
        env = make(SCENARIO)
        env.reset()
        obs, rewards, term, trunc, info = env.step([[99.0, 99.0], [0.0, 0.0]])
        assert info["clipped"]
        obs, rewards, term, trunc, info = env.step(np.zeros((2, 2)))
        assert not info["clipped"]

    def test_reward_spec_applied(self):
        env = make(SCENARIO, reward=RewardSpec(time_penalty=2.0))
        env.reset()
        _, rewards, _, _, _ = env.step(np.zeros((2, 2)))
        np.testing.assert_allclose(rewards, -2.0 * 0.01)

    def test_done_episode_stepped_raises(self):
        env = make(SCENARIO)
        raw_timeout = dict(load_scenario(SCENARIO).raw)
        raw_timeout["timeout"] = 0.005
        from tenthsim.harness.scenario import scenario_from_dict
        from tenthsim_env import RaceEnv

        env = RaceEnv(scenario_from_dict(raw_timeout))
        env.reset()
        obs, _, term, trunc, _ = env.step(np.zeros((2, 2)))
        assert term or trunc
        with pytest.raises(SteppedAfterDoneError):
            env.step(np.zeros((2, 2)))


class TestParity:
    def test_zero_action_parity_vs_native(self):
        env = make(SCENARIO)
        obs0 = env.reset()
        engine, _, _ = build_engine(load_scenario(SCENARIO))
        native0 = engine.reset()
        for a, b in zip(obs0.agents, native0.agents):
            assert np.array_equal(a.scan, b.scan.ranges)
        for _ in range(50):
            obs, _, _, _, _ = env.step(np.zeros((2, 2)))
            native = engine.step([ControlInput(), ControlInput()])
        for a, b in zip(obs.agents, native.agents):
            assert np.array_equal(a.scan, b.scan.ranges)
            assert np.array_equal(a.pose,
                                  [b.pose.x, b.pose.y, b.pose.theta])

    def test_scripted_500_step_bitwise_parity(self):
        """The acceptance criterion: a 500-step action log through the
        binding matches the native engine trajectory bit for bit."""
        script = scripted_actions(500, 2)
        env = make(SCENARIO)
        env.reset()
        binding_traj = []
        for k in range(script.shape[0]):
            obs, _, term, trunc, _ = env.step(script[k])
            binding_traj.append(np.concatenate(
                [np.concatenate([a.pose, [a.velocity, a.steering]])
                 for a in obs.agents]))
            if term or trunc:
                break
        binding_traj = np.array(binding_traj)

        engine, _, _ = build_engine(load_scenario(SCENARIO))
        engine.reset()
        native_traj = []
        for k in range(script.shape[0]):
            out = engine.step([ControlInput(*script[k, i]) for i in range(2)])
            native_traj.append(np.concatenate(
                [[a.pose.x, a.pose.y, a.pose.theta, a.v, a.delta]
                 for a in out.agents]))
            if out.done:
                break
        native_traj = np.array(native_traj)

        assert binding_traj.shape == native_traj.shape
        assert binding_traj.tobytes() == native_traj.tobytes()

    def test_snapshot_round_trip_through_binding(self):
        env = make(SCENARIO)
        env.reset()
        script = scripted_actions(60, 2, seed=9)
        for k in range(30):
            env.step(script[k])
        blob = env.save_state()
        cont = [env.step(script[k])[0] for k in range(30, 60)]
        env.load_state(blob)
        again = [env.step(script[k])[0] for k in range(30, 60)]
        for a, b in zip(cont, again):
            for x, y in zip(a.agents, b.agents):
                assert np.array_equal(x.scan, y.scan)
                assert np.array_equal(x.pose, y.pose)
