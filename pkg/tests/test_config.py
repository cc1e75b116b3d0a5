import math

import pytest

from dfdopt.config import (
    Box,
    Cylinder,
    ComponentNode,
    FlatPlate,
    Orientation,
    PanelSpec,
    Sphere,
    SpacecraftConfig,
    component_aero_mass,
    component_mass,
    derive_side_length,
    load_config,
    shape_half_extents,
)
from dfdopt.errors import BrokenHierarchy, DomainError, MissingData, UnknownMaterial

PANEL_TEMPLATE = """
[panel.{role}]
type = FP
material = Al-6061-T6
thickness = 0.003
"""

BASE_SCENARIO = """
[parent]
mass = 2000
avg_density = 100
material = Al-6061-T6
thickness = 0.003
""" + "".join(PANEL_TEMPLATE.format(role=r) for r in
              ("RAM", "Trail", "Earth", "Space", "Left", "Right"))


def write_config(tmp_path, body, name="cfg.cfg"):
    path = tmp_path / name
    path.write_text(BASE_SCENARIO + body)
    return path


# ---------------------------------------------------------------------------
# Derived quantities

def test_side_length_examples():
    assert derive_side_length(2000, 100) == pytest.approx(2.7144, abs=5e-4)
    assert derive_side_length(100, 100) == 1.0
    assert derive_side_length(3000, 100) == pytest.approx(3.1072, abs=5e-4)


def test_side_length_domain():
    for bad in ((0, 100), (100, 0), (-1, 100)):
        with pytest.raises(DomainError):
            derive_side_length(*bad)


def test_side_length_scaling():
    for m in (10.0, 123.0, 4000.0):
        assert derive_side_length(8 * m, 100) == pytest.approx(
            2 * derive_side_length(m, 100), rel=1e-12)
    samples = [derive_side_length(m, 100) for m in (1, 10, 100, 1000, 10000)]
    assert samples == sorted(samples)
    assert len(set(samples)) == len(samples)


def test_shell_mass(db):
    node = ComponentNode(id=10, name="Tank", parent_id=0, shape=Sphere(r=0.4163),
                         material="Al-6061-T6", wall_thickness=0.003,
                         position=(0, 0, 0))
    expected = 4 * math.pi * 0.4163 ** 2 * 0.003 * 2713
    assert component_mass(node, db) == pytest.approx(expected, rel=1e-12)
    assert component_mass(node, db) == pytest.approx(17.72, abs=0.01)


def test_explicit_mass_wins(db):
    node = ComponentNode(id=12, name="Cell", parent_id=11, shape=Box(0.21, 0.11, 0.076),
                         material="Al-6061-T6", thermal_mass=2.2)
    assert component_mass(node, db) == 2.2
    assert component_aero_mass(node, db) == 2.2


def test_missing_mass_data(db):
    node = ComponentNode(id=13, name="X", parent_id=0, shape=Sphere(r=0.1),
                         material="Al-6061-T6", thermal_mass=1.0, position=(0, 0, 0))
    node.thermal_mass = None
    node.wall_thickness = None
    with pytest.raises(MissingData):
        component_mass(node, db)


def test_aero_mass_override(db):
    node = ComponentNode(id=14, name="X", parent_id=0, shape=Sphere(r=0.1),
                         material="Al-6061-T6", thermal_mass=1.0, aero_mass=5.0,
                         position=(0, 0, 0))
    assert component_aero_mass(node, db) == 5.0


# ---------------------------------------------------------------------------
# Shapes and frames

def test_half_extents():
    assert shape_half_extents(Sphere(r=0.3), Orientation()) == (0.3, 0.3, 0.3)
    assert shape_half_extents(Cylinder(l=0.6, r=0.1), Orientation("RAM", "Left")) == \
        (0.3, 0.1, 0.1)
    assert shape_half_extents(Cylinder(l=0.6, r=0.1), Orientation("Space", "Left")) == \
        (0.1, 0.1, 0.3)
    assert shape_half_extents(Box(0.6, 0.4, 0.2), Orientation("Left", "RAM")) == \
        (0.2, 0.3, 0.1)
    assert shape_half_extents(FlatPlate(2.0, 1.0), Orientation("RAM", "Left")) == \
        (1.0, 0.5, 0.0)


def test_surface_areas():
    assert Box(1, 2, 3).surface_area() == 22
    assert Sphere(r=2).surface_area() == pytest.approx(16 * math.pi)
    assert Cylinder(l=2, r=1).surface_area() == pytest.approx(6 * math.pi)
    assert FlatPlate(2, 3).surface_area() == 12


def test_orientation_validation():
    with pytest.raises(Exception):
        Orientation("RAM", "Trail").validate()   # same body axis
    Orientation("RAM", "Space").validate()


def test_panel_frames(db, tmp_path):
    cfg = load_config(write_config(tmp_path, ""), db)
    center, u, v, n = cfg.panel_frame(cfg.panels["RAM"])
    side = derive_side_length(2000, 100)
    assert center == pytest.approx((side / 2, 0, 0))
    assert n == (1, 0, 0)
    assert u == (0, 1, 0) and v == (0, 0, 1)
    center, u, v, n = cfg.panel_frame(cfg.panels["Earth"])
    assert center == pytest.approx((0, 0, -side / 2))
    assert n == (0, 0, -1)


def test_attached_component_center(db, tmp_path):
    body = """
[component.Pay]
id = 15
parent = Earth
shape = box
l = 1.0
w = 0.6
h = 0.6
material = Al-6061-T6
thickness = 0.003
position = 1.2, -0.3
orientation = Left, RAM
"""
    cfg = load_config(write_config(tmp_path, body), db)
    node = cfg.components[0]
    side = derive_side_length(2000, 100)
    cx, cy, cz = cfg.component_center(node)
    # Earth panel: u along +x, v along +y, flush against the inside of the face
    assert cx == pytest.approx(1.2)
    assert cy == pytest.approx(-0.3)
    assert cz == pytest.approx(-side / 2 + 0.3)


# ---------------------------------------------------------------------------
# Hierarchy validation

def test_four_level_hierarchy_loads(db, tmp_path):
    body = """
[component.Tank]
id = 1
parent = 0
shape = sphere
r = 0.55
material = Titanium 6Al4V
thickness = 0.003
position = 0, 0, 0

[component.BattBox]
id = 8
parent = 0
shape = box
l = 0.6
w = 0.5
h = 0.4
material = Al-6061-T6
thickness = 0.003
position = 0.9, 0, 0

[component.BattCell]
id = 9
parent = 8
shape = box
l = 0.1
w = 0.05
h = 0.04
material = Al-6061-T6
mass = 1.0
quantity = 20
"""
    cfg = load_config(write_config(tmp_path, body), db)
    assert len(cfg.components) == 3
    cells = cfg.node_by_uid("9")
    assert cells.quantity == 20
    assert cfg.is_subcomponent(cells)
    assert len(cfg.placeable_components()) == 2


def test_missing_panel_is_broken(db, tmp_path):
    text = BASE_SCENARIO.replace("[panel.Earth]", "[panel.Unused]")
    path = tmp_path / "broken.cfg"
    path.write_text(text)
    with pytest.raises(Exception):
        load_config(path, db)


def test_self_parent_cycle(db, tmp_path):
    body = """
[component.Loop]
id = 9
parent = 9
shape = sphere
r = 0.1
material = Al-6061-T6
thickness = 0.003
position = 0, 0, 0
"""
    with pytest.raises(BrokenHierarchy):
        load_config(write_config(tmp_path, body), db)


def test_unknown_parent_id(db, tmp_path):
    body = """
[component.Orphan]
id = 9
parent = 77
shape = sphere
r = 0.1
material = Al-6061-T6
thickness = 0.003
position = 0, 0, 0
"""
    with pytest.raises(BrokenHierarchy):
        load_config(write_config(tmp_path, body), db)


def test_unknown_material(db, tmp_path):
    body = """
[component.X]
id = 9
parent = 0
shape = sphere
r = 0.1
material = Unobtanium
thickness = 0.003
position = 0, 0, 0
"""
    with pytest.raises(UnknownMaterial):
        load_config(write_config(tmp_path, body), db)


def test_chain_depth_limit(db, tmp_path):
    body = """
[component.A]
id = 9
parent = 0
shape = box
l = 1
w = 1
h = 1
material = Al-6061-T6
thickness = 0.003
position = 0, 0, 0

[component.B]
id = 10
parent = 9
shape = box
l = 0.5
w = 0.5
h = 0.5
material = Al-6061-T6
thickness = 0.003

[component.C]
id = 11
parent = 10
shape = box
l = 0.2
w = 0.2
h = 0.2
material = Al-6061-T6
thickness = 0.003

[component.D]
id = 12
parent = 11
shape = box
l = 0.1
w = 0.1
h = 0.1
material = Al-6061-T6
thickness = 0.003
"""
    with pytest.raises(BrokenHierarchy):
        load_config(write_config(tmp_path, body), db)


def test_attached_needs_2d_position(db, tmp_path):
    body = """
[component.X]
id = 9
parent = RAM
shape = box
l = 0.2
w = 0.2
h = 0.2
material = Al-6061-T6
thickness = 0.003
position = 0, 0, 0
"""
    with pytest.raises(BrokenHierarchy):
        load_config(write_config(tmp_path, body), db)


def test_every_chain_reaches_parent_quickly(db, tmp_path, leo_scenario):
    # depth from any node to the parent structure is at most 3 hops
    cfg = leo_scenario.baseline
    ids = {n.id: n for n in cfg.components}
    for node in cfg.components:
        hops = 0
        current = node
        while current.parent_id != 0 and current.parent_id not in range(2, 8):
            current = ids[current.parent_id]
            hops += 1
            assert hops <= 2
