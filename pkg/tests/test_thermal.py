import math

import numpy as np
import pytest

from fair_hitl.qlearn import LearningParams, QTable, TimeScales, multisample_run
from fair_hitl.thermal import (
    ACTIVITIES,
    ACTIVITY_MET,
    ACTIVITY_RMV,
    NOT_HOME,
    SETPOINTS_F,
    HouseParams,
    HouseSimulation,
    HvacInnerEnv,
    MultiOccupantHvacSystem,
    OccupantProfile,
    ThermalInstabilityError,
    ThermalState,
    celsius_to_fahrenheit,
    fahrenheit_to_celsius,
    make_occupant,
    occupant_heat_flow,
    outdoor_temperature,
    sample_activity,
    step_house,
    thermostat_command,
)

H1 = make_occupant("H1")
H2 = make_occupant("H2")
H3 = make_occupant("H3")


class TestSchedules:
    def test_every_hour_nonempty(self):
        for occ in (H1, H2, H3):
            for hour in range(24):
                assert len(occ.schedule[hour]) >= 1

    def test_h1_night_is_sleep(self):
        rng = np.random.default_rng(0)
        assert sample_activity(H1, 3, rng) == "sleeping"

    def test_h1_early_morning_candidates(self):
        rng = np.random.default_rng(0)
        seen = {sample_activity(H1, 6, rng) for _ in range(200)}
        assert seen == {"sleeping", "standing at rest", "running"}

    def test_h1_workday_absence(self):
        rng = np.random.default_rng(0)
        assert sample_activity(H1, 10, rng) == NOT_HOME

    def test_rmv_follows_activity_ordering(self):
        ordered = [a for a in ACTIVITIES if a != NOT_HOME]
        rmvs = [ACTIVITY_RMV[a] for a in ordered]
        assert rmvs == sorted(rmvs)
        assert ACTIVITY_RMV["sleeping"] == min(rmvs)
        assert ACTIVITY_RMV["running"] == max(rmvs)

    def test_rest_vs_exercise_rmv_anchors(self):
        assert ACTIVITY_RMV["seated relaxed"] == pytest.approx(6.0)
        assert ACTIVITY_RMV["running"] == pytest.approx(12.0)

    def test_bad_hour_rejected(self):
        with pytest.raises(ValueError):
            sample_activity(H1, 24, np.random.default_rng(0))

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            OccupantProfile("bad", ((),) * 24, clothing=0.5)
        with pytest.raises(ValueError):
            OccupantProfile("bad", (("juggling",),) * 24, clothing=0.5)


class TestOccupantHeat:
    def test_not_home_is_zero(self):
        assert occupant_heat_flow(H1, NOT_HOME) == 0.0

    def test_seated_relaxed_calibration(self):
        flow = occupant_heat_flow(H1, "seated relaxed")
        assert flow == pytest.approx(100.0, abs=5.0)

    def test_running_to_seated_ratio(self):
        ratio = occupant_heat_flow(H1, "running") / occupant_heat_flow(H1, "seated relaxed")
        assert ratio == pytest.approx(2.0)


class TestThermostat:
    def test_cold_turns_on(self):
        s = ThermalState(t_room=10.0, heater_on=False, t_out=10.0, clock=0.0)
        assert thermostat_command(s, 70.0) is True

    def test_hot_turns_off(self):
        s = ThermalState(t_room=30.0, heater_on=True, t_out=10.0, clock=0.0)
        assert thermostat_command(s, 70.0) is False

    def test_band_holds_previous(self):
        sp_c = fahrenheit_to_celsius(70.0)
        inside = ThermalState(t_room=sp_c + 1.0, heater_on=True, t_out=10.0, clock=0.0)
        assert thermostat_command(inside, 70.0) is True
        inside_off = ThermalState(t_room=sp_c + 1.0, heater_on=False, t_out=10.0, clock=0.0)
        assert thermostat_command(inside_off, 70.0) is False

    def test_setpoint_range(self):
        s = ThermalState(20.0, False, 10.0, 0.0)
        with pytest.raises(ValueError):
            thermostat_command(s, 90.0)

    def test_no_chatter_across_band(self):
        # the command may only flip after the room has crossed the band,
        # never on consecutive integrator steps
        params = HouseParams()
        s = ThermalState(t_room=18.0, heater_on=False, t_out=10.0, clock=0.0)
        flip_steps = []
        prev = s.heater_on
        for k in range(300):
            cmd = thermostat_command(s, 72.0)
            if cmd != prev:
                flip_steps.append(k)
                prev = cmd
            s = step_house(s, params, [], cmd)
        assert flip_steps, "relay never engaged"
        gaps = [b - a for a, b in zip(flip_steps, flip_steps[1:])]
        assert all(g >= 3 for g in gaps)


class TestStepHouse:
    def test_cooling_toward_outdoor(self):
        params = HouseParams()
        s = ThermalState(t_room=25.0, heater_on=False, t_out=10.0, clock=0.0)
        temps = []
        for _ in range(100):
            s = step_house(s, params, [], False)
            temps.append(s.t_room)
        assert all(b < a for a, b in zip(temps, temps[1:]))
        assert temps[-1] > 10.0

    def test_equilibrium(self):
        params = HouseParams()
        s = ThermalState(t_room=10.0, heater_on=False, t_out=10.0, clock=0.0)
        s2 = step_house(s, params, [], False)
        assert s2.t_room == pytest.approx(10.0)

    def test_hand_computed_step(self):
        params = HouseParams()
        s = ThermalState(t_room=20.0, heater_on=False, t_out=10.0, clock=0.0)
        s2 = step_house(s, params, [150.0], True)
        heater = (50.0 - 20.0) * 1.0 * 1005.4
        losses = (20.0 - 10.0) / params.r_eq
        expected = 20.0 + 60.0 * (heater - losses + 150.0) / (1470.0 * 1005.4)
        assert s2.t_room == pytest.approx(expected, abs=1e-9)
        assert s2.clock == 60.0

    def test_exponential_relaxation_bound(self):
        # heater off: Euler solution tracks the analytic exponential decay
        params = HouseParams()
        tau = params.r_eq * params.indoor_air_mass * params.air_heat_capacity
        s = ThermalState(t_room=26.0, heater_on=False, t_out=10.0, clock=0.0)
        for k in range(1, 61):
            s = step_house(s, params, [], False)
            analytic = 10.0 + 16.0 * math.exp(-k * params.dt / tau)
            assert s.t_room == pytest.approx(analytic, abs=0.15)

    def test_instability_guard(self):
        params = HouseParams(indoor_air_mass=0.5, dt=3600.0)
        s = ThermalState(t_room=20.0, heater_on=True, t_out=10.0, clock=0.0)
        with pytest.raises(ThermalInstabilityError):
            step_house(s, params, [], True)


class TestOutdoor:
    def test_deterministic_per_seed(self):
        assert outdoor_temperature(12345.0, 7) == outdoor_temperature(12345.0, 7)
        assert outdoor_temperature(12345.0, 7) != outdoor_temperature(12345.0, 8)

    def test_bounds(self):
        temps = [outdoor_temperature(t * 977.0, 3) for t in range(2000)]
        assert all(5.0 <= x <= 15.0 for x in temps)

    def test_daily_mean_near_base(self):
        day0 = [outdoor_temperature(s, 11) for s in np.arange(0, 86400, 360)]
        assert abs(float(np.mean(day0)) - 10.0) <= 2.01


class TestUnits:
    def test_roundtrip(self):
        for f in (60.0, 70.0, 76.0, 85.0):
            assert celsius_to_fahrenheit(fahrenheit_to_celsius(f)) == pytest.approx(f)

    def test_anchors(self):
        assert fahrenheit_to_celsius(50.0) == pytest.approx(10.0)
        assert fahrenheit_to_celsius(32.0) == pytest.approx(0.0)


class TestHouseSimulation:
    def test_votes_none_when_away(self):
        h = HouseSimulation([H1], seed=1)
        # advance to 10:00, when H1 is at work
        for _ in range(100):
            votes = h.advance_sample()
        assert h.activities[0] == NOT_HOME
        assert votes[0] is None

    def test_determinism(self):
        def run():
            h = HouseSimulation([H1, H2], seed=5)
            out = []
            for _ in range(50):
                out.append(tuple(h.advance_sample()))
            return out, h.state.t_room

        a, b = run(), run()
        assert a == b

    def test_heater_regulates_toward_setpoint(self):
        h = HouseSimulation([H3], seed=2, setpoint_f=76.0)
        for _ in range(240):
            h.advance_sample()
        sp = fahrenheit_to_celsius(76.0)
        assert abs(h.state.t_room - sp) <= 3.0


class TestInnerEnv:
    def test_state_space_shape(self):
        assert HvacInnerEnv.n_states == 21 * len(ACTIVITIES)
        assert HvacInnerEnv.n_actions == len(SETPOINTS_F)

    def test_observe_encodes_activity(self):
        h = HouseSimulation([H1], seed=3)
        env = HvacInnerEnv(h)
        s = env.observe()
        act_idx = s % len(ACTIVITIES)
        assert ACTIVITIES[act_idx] == h.activities[0]

    def test_apply_sets_setpoint(self):
        h = HouseSimulation([H1], seed=3)
        env = HvacInnerEnv(h)
        env.apply(5)
        assert h.setpoint_f == 80.0

    def test_multisample_contract_runs(self):
        h = HouseSimulation([H1], seed=3)
        env = HvacInnerEnv(h)
        q = QTable(env.n_states, env.n_actions)
        res = multisample_run(env, q, TimeScales(360.0, 2, 10), LearningParams(),
                              duration=40, rng=np.random.default_rng(0))
        assert len(res.rewards) == 4
        assert 0.0 <= res.performance <= 1.0

    def test_window_rewards_nonpositive(self):
        h = HouseSimulation([H1], seed=3)
        env = HvacInnerEnv(h)
        for _ in range(10):
            env.step()
        assert env.window_reward() <= 0.0


class TestMediatedSystem:
    def test_echo_rate_reaches_every_stack(self):
        sys = MultiOccupantHvacSystem([H1, H2, H3], seed=4)
        sys.echo_rate(6)
        assert [st.t_a for st in sys.stacks] == [6, 6, 6]

    def test_echo_action_credits_nearest_setpoint(self):
        sys = MultiOccupantHvacSystem([H1, H2, H3], seed=4)
        sys.echo_action(75.5)
        assert all(SETPOINTS_F[st.credited_action] == 76 for st in sys.stacks)

    def test_run_mediated_scores_present_humans(self):
        sys = MultiOccupantHvacSystem([H1, H2, H3], seed=4, eval_samples=10)
        scores = sys.run_mediated(74.0, 4)
        assert len(scores) == 3
        for s in scores:
            assert s is None or 0.0 <= s <= 1.0

    def test_preferred_actions_are_valid_setpoints(self):
        sys = MultiOccupantHvacSystem([H1, H2, H3], seed=4)
        for a in sys.preferred_actions():
            assert a in [float(sp) for sp in SETPOINTS_F]
