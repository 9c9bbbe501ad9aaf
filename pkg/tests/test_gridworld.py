import numpy as np
import pytest

from planset.gridworld import (
    ACTION_NAMES,
    MOVES,
    DroneState,
    ExecutionOutcome,
    GridWorld,
    InvalidGeometryError,
    InvalidPlanError,
    PlanningSimulator,
    default_policy_action,
    execute_plan,
    generate_instance,
    parse_map,
    render_map,
    shortest_unobstructed_path,
)

N, E, S, W = range(4)


class ScriptedRng:
    """Duck-typed generator feeding predetermined draws to the policy."""

    def __init__(self, uniforms=(), integers=()):
        self._u = list(uniforms)
        self._i = list(integers)

    def random(self):
        return self._u.pop(0)

    def integers(self, n):
        return self._i.pop(0) % n


def test_zero_risk_has_no_enemies():
    world = generate_instance(8, 8, 0.0, rng=0)
    assert world.enemies == frozenset()
    assert world.start == (0, 4)
    assert world.goal == (7, 4)


def test_full_risk_fills_everything_else():
    world = generate_instance(5, 5, 1.0, rng=0)
    assert len(world.enemies) == 23
    assert world.start not in world.enemies
    assert world.goal not in world.enemies


def test_enemy_count_rounds():
    world = generate_instance(20, 20, 0.10, rng=1)
    assert len(world.enemies) == 40  # round(0.10 * 398)


def test_instance_generation_is_seeded():
    a = generate_instance(12, 9, 0.3, rng=42)
    b = generate_instance(12, 9, 0.3, rng=42)
    c = generate_instance(12, 9, 0.3, rng=43)
    assert a == b
    assert a != c


def test_geometry_and_risk_validation():
    with pytest.raises(InvalidGeometryError):
        generate_instance(1, 5, 0.0, rng=0)
    with pytest.raises(ValueError):
        generate_instance(5, 5, 1.5, rng=0)


def test_legal_actions_respect_bounds():
    world = generate_instance(3, 3, 0.5, rng=0)  # enemies don't matter here
    sim = PlanningSimulator(world)
    assert sim.legal_actions(DroneState((0, 0), 0, False)) == (E, S)
    assert sim.legal_actions(DroneState((1, 1), 0, False)) == (N, E, S, W)
    assert sim.legal_actions(DroneState((2, 2), 0, False)) == (N, W)
    assert sim.legal_actions(DroneState((1, 1), 0, True)) == ()


def test_goal_step_pays_discounted_reward():
    world = generate_instance(8, 8, 0.0, rng=0)
    sim = PlanningSimulator(world)
    beside = DroneState((world.goal[0] - 1, world.goal[1]), 5, False)
    state, reward, done = sim.step(beside, E)
    assert done and state.done
    assert reward == pytest.approx(0.99**6)
    assert state.position == world.goal


def test_horizon_cuts_off_with_zero_reward():
    world = generate_instance(2, 2, 0.0, rng=0)
    sim = PlanningSimulator(world)
    horizon = sim.horizon
    state = DroneState((0, 0), horizon - 1, False)
    nxt, reward, done = sim.step(state, S)
    assert done and reward == 0.0 and nxt.steps_taken == horizon


def test_off_grid_step_rejected():
    world = generate_instance(4, 4, 0.0, rng=0)
    sim = PlanningSimulator(world)
    with pytest.raises(ValueError):
        sim.step(DroneState((0, 0), 0, False), W)


def test_rewards_stay_in_unit_interval():
    world = generate_instance(6, 6, 0.0, rng=5)
    sim = PlanningSimulator(world)
    rng = np.random.default_rng(7)
    for _ in range(20):
        state = sim.initial_state()
        total = 0.0
        while True:
            actions = sim.legal_actions(state)
            if not actions:
                break
            state, reward, done = sim.step(state, actions[int(rng.integers(len(actions)))])
            assert 0.0 <= reward <= 1.0
            total += reward
            if done:
                break
        assert 0.0 <= total <= 1.0


def test_state_key_is_cell_only():
    world = generate_instance(6, 6, 0.0, rng=0)
    sim = PlanningSimulator(world)
    a = DroneState((2, 3), 4, False)
    b = DroneState((2, 3), 9, False)
    assert sim.state_key(a) == sim.state_key(b) == b"2,3"
    assert sim.state_key(DroneState((3, 2), 4, False)) != sim.state_key(a)


def test_default_policy_greedy_branch():
    world = generate_instance(8, 8, 0.0, rng=0)
    left_of_goal = DroneState((world.goal[0] - 1, world.goal[1]), 0, False)
    assert default_policy_action(world, left_of_goal, ScriptedRng(uniforms=[0.79])) == E
    above_goal = DroneState((world.goal[0], world.goal[1] - 1), 0, False)
    assert default_policy_action(world, above_goal, ScriptedRng(uniforms=[0.0])) == S


def test_default_policy_greedy_tie_breaks_low_index():
    # Start cell: goal straight east, N and S both neutral, E unique argmin.
    # From a corner equidistant diagonally, E (index 1) beats S (index 2).
    world = GridWorld(5, 5, (0, 0), (2, 2), frozenset(), 0.0)
    corner = DroneState((0, 0), 0, False)
    assert default_policy_action(world, corner, ScriptedRng(uniforms=[0.5])) == E


def test_default_policy_uniform_branch():
    world = generate_instance(8, 8, 0.0, rng=0)
    center = DroneState((4, 4), 0, False)
    for idx, expected in enumerate((N, E, S, W)):
        assert default_policy_action(world, center, ScriptedRng(uniforms=[0.9], integers=[idx])) == expected


def test_simulator_default_action_agrees_with_free_function():
    world = generate_instance(9, 7, 0.0, rng=3)
    sim = PlanningSimulator(world, rollout_greedy_p=0.8)
    rng = np.random.default_rng(11)
    for _ in range(200):
        x = int(rng.integers(world.width))
        y = int(rng.integers(world.height))
        state = DroneState((x, y), 0, False)
        draws = rng.random(2)
        scripted_a = ScriptedRng(uniforms=[draws[0]], integers=[int(draws[1] * 12)])
        scripted_b = ScriptedRng(uniforms=[draws[0]], integers=[int(draws[1] * 12)])
        assert sim.default_action(state, scripted_a) == default_policy_action(world, state, scripted_b)


def test_execute_plan_shot_down_on_enemy_cell():
    world = GridWorld(4, 3, (0, 1), (3, 1), frozenset({(1, 1)}), 0.1)
    outcome = execute_plan(world, [E, E, E])
    assert outcome == ExecutionOutcome(False, True, 1)


def test_execute_plan_reaches_goal_on_clear_grid():
    world = generate_instance(6, 6, 0.0, rng=0)
    outcome = execute_plan(world, [E] * 5)
    assert outcome.reached_goal and not outcome.shot_down
    assert outcome.path_length == shortest_unobstructed_path(world) == 5


def test_execute_plan_empty_sequence():
    world = generate_instance(6, 6, 0.0, rng=0)
    assert execute_plan(world, []) == ExecutionOutcome(False, False, 0)


def test_execute_plan_rejects_illegal_step():
    world = generate_instance(6, 6, 0.0, rng=0)
    with pytest.raises(InvalidPlanError):
        execute_plan(world, [W])  # leaves the grid from the left edge


def test_execute_plan_stops_at_goal_ignoring_rest():
    world = generate_instance(4, 4, 0.0, rng=0)
    outcome = execute_plan(world, [E, E, E, N, N, N])
    assert outcome.reached_goal
    assert outcome.path_length == 3


def test_detection_radius_kills_nearby():
    enemies = frozenset({(2, 0)})
    world = GridWorld(5, 3, (0, 1), (4, 1), enemies, 0.1, detection_radius=1)
    outcome = execute_plan(world, [E, E, E, E])
    assert outcome.shot_down and outcome.path_length == 1  # (1,1) is within Chebyshev 1 of (2,0)
    safe = GridWorld(5, 3, (0, 1), (4, 1), enemies, 0.1, detection_radius=0)
    assert execute_plan(safe, [E, E, E, E]).reached_goal


def test_detection_checked_before_goal():
    enemies = frozenset({(4, 2)})
    world = GridWorld(5, 3, (0, 1), (4, 1), enemies, 0.1, detection_radius=1)
    outcome = execute_plan(world, [E, E, E, E])
    assert outcome.shot_down and not outcome.reached_goal


def test_shortest_path_cases():
    neighbors = GridWorld(4, 4, (1, 1), (1, 2), frozenset(), 0.0)
    assert shortest_unobstructed_path(neighbors) == 1
    identity = GridWorld(4, 4, (1, 1), (1, 1), frozenset(), 0.0)
    assert shortest_unobstructed_path(identity) == 0
    world = generate_instance(20, 20, 0.5, rng=9)
    assert shortest_unobstructed_path(world) == 19  # enemies are ignored


def test_map_round_trip():
    world = generate_instance(7, 5, 0.25, rng=4)
    text = render_map(world)
    clone = parse_map(text)
    assert clone.width == world.width and clone.height == world.height
    assert clone.start == world.start and clone.goal == world.goal
    assert clone.enemies == world.enemies
    assert clone.risk == pytest.approx(world.risk, abs=0.02)
    assert text.count("S") == 1 and text.count("G") == 1
    assert text.count("E") == len(world.enemies)


def test_map_parse_validation():
    with pytest.raises(ValueError):
        parse_map("S.\n..\n")  # no goal
    with pytest.raises(ValueError):
        parse_map("S.G\n..\n")  # ragged rows
    with pytest.raises(ValueError):
        parse_map("S?G\n...\n")  # unknown char


def test_moves_match_action_names():
    assert len(MOVES) == len(ACTION_NAMES) == 4
    assert MOVES[ACTION_NAMES.index("N")] == (0, -1)
    assert MOVES[ACTION_NAMES.index("E")] == (1, 0)
