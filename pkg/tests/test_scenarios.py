import numpy as np
import pytest

from safestop.scenarios import (
    BoxSolid,
    Cylinder,
    GenerationError,
    Scenario,
    generate_forest,
    generate_two_pillar_arena,
    generate_warehouse,
)


def test_cylinder_surface_points_on_surface():
    c = Cylinder((1.0, 2.0, 0.0), 0.5, 3.0)
    pts = c.surface_points(0.1)
    radial = np.hypot(pts[:, 0] - 1.0, pts[:, 1] - 2.0)
    np.testing.assert_allclose(radial, 0.5, atol=1e-9)
    assert pts[:, 2].min() >= -1e-9
    assert pts[:, 2].max() <= 3.0 + 1e-9


def test_box_surface_points_on_surface():
    b = BoxSolid((0.0, 0.0, 1.0), (1.0, 0.5, 1.0))
    pts = b.surface_points(0.2)
    d = np.abs(pts - np.array([0, 0, 1.0])) - np.array([1.0, 0.5, 1.0])
    assert np.all(d.max(axis=1) > -1e-9)   # every point touches a face
    assert np.all(d <= 1e-9)               # no point outside the box


def test_solid_distance():
    c = Cylinder((0, 0, 0), 1.0, 2.0)
    assert c.distance(np.array([3.0, 0, 1.0])) == pytest.approx(2.0)
    assert c.distance(np.array([0.5, 0, 1.0])) == pytest.approx(0.0)
    b = BoxSolid((0, 0, 0), (1, 1, 1))
    assert b.distance(np.array([3.0, 0, 0])) == pytest.approx(2.0)


def test_forest_zero_density():
    s = generate_forest(seed=1, tree_density=0.0)
    assert s.solids == []


def test_forest_deterministic():
    a = generate_forest(seed=5)
    b = generate_forest(seed=5)
    assert a.to_dict() == b.to_dict()
    c = generate_forest(seed=6)
    assert c.to_dict() != a.to_dict()


def test_forest_count_and_no_overlap():
    s = generate_forest(seed=2, bounds=(40.0, 40.0), tree_density=0.05)
    assert len(s.solids) == 80
    for i, a in enumerate(s.solids):
        for b in s.solids[i + 1:]:
            gap = np.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1])
            assert gap >= a.radius + b.radius - 1e-9


def test_forest_start_clear():
    s = generate_forest(seed=3)
    assert s.solid_distance(s.start.position) >= 0.3


def test_forest_generation_error_when_overfull():
    with pytest.raises(GenerationError):
        generate_forest(seed=1, bounds=(4.0, 4.0), tree_density=5.0,
                        radius_range=(0.5, 0.6), max_attempts_per_tree=5)


def test_warehouse_deterministic_and_aisle_blocked():
    a = generate_warehouse(seed=4)
    b = generate_warehouse(seed=4)
    assert a.to_dict() == b.to_dict()
    aisle_y = a.start.position[1]
    columns = [s for s in a.solids if isinstance(s, Cylinder)]
    assert len(columns) >= 2
    # every column sits in the aisle and blocks straight centerline flight
    for c in columns:
        assert abs(c.center[1] - aisle_y) - c.radius < 0.15
    # away from the columns the centerline keeps half the aisle clear
    xs = np.linspace(a.start.position[0], a.goal[0], 200)
    for x in xs:
        if min(abs(x - c.center[0]) for c in columns) < 2.0:
            continue
        p = np.array([x, aisle_y, a.start.position[2]])
        assert a.solid_distance(p) >= 2.8 / 2 - 1e-9


def test_warehouse_rejects_narrow_aisle():
    with pytest.raises(GenerationError):
        generate_warehouse(seed=1, aisle_width=0.5)


def test_two_pillar_arena_layout():
    s = generate_two_pillar_arena()
    assert len(s.solids) == 2
    # straight start-goal segment passes between the pillars
    seg_y = s.start.position[1]
    for pillar in s.solids:
        assert abs(pillar.center[1] - seg_y) > pillar.radius


def test_scenario_roundtrip(tmp_path):
    s = generate_forest(seed=9, bounds=(10.0, 10.0), tree_density=0.03)
    path = tmp_path / "scenario.json"
    s.save(str(path))
    loaded = Scenario.load(str(path))
    assert loaded.to_dict() == s.to_dict()


def test_scenario_schema_check():
    with pytest.raises(ValueError, match="schema"):
        Scenario.from_dict({"schema": 99})


def test_obstacle_map_matches_solids():
    s = generate_two_pillar_arena()
    m = s.build_obstacle_map()
    assert m.point_count > 0
    # map distance approximates solid distance to within the sampling pitch
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = rng.uniform([0, 0, 0.2], [8, 8, 2.8])
        exact = s.solid_distance(p)
        approx = m.nearest_distance(p)
        assert approx >= exact - 1e-9
        if exact < 3.0:
            assert approx <= exact + 0.15
