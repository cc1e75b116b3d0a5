import math
import warnings

import numpy as np
import pytest

from dfdopt.config import Box, ComponentNode, PanelSpec, SpacecraftConfig
from dfdopt.errors import EmptyInput, InvariantError, MissingMaterialData, NegativeFlux, ParseError
from dfdopt.materials import MaterialDatabase, MaterialRecord
from dfdopt.survivability import (
    BleCoefficients,
    DebrisEnvironment,
    PenetrationResult,
    VectorFluxElement,
    analyze_survivability,
    component_penetration_probability,
    compute_pnp,
    critical_diameter,
    facing_panel,
    load_flux_table,
    panel_critical_diameter,
    panel_penetration_probability,
    save_flux_table,
    synthesize_environment,
    vulnerable_zone,
)

BLE = BleCoefficients()


def _material(name="TestAl", **overrides):
    fields = dict(name=name, rho_m=2713, t_m=867, h_f=386116, c_m=896,
                  epsilon=0.141, c_sound=5100, sigma_y=276e6, hb=95)
    fields.update(overrides)
    return MaterialRecord(**fields)


GRAPHITE = _material("TestGr", hb=None, c_sound=None, rho_m=1570)
DB = MaterialDatabase([_material(), GRAPHITE])


def _panel(role, pid, side=2.0, material="TestAl", wall_type="single_wall", **kw):
    return PanelSpec(id=pid, role=role, wall_type=wall_type, face_thickness=0.003,
                     material=material, l=side, w=side, **kw)


def make_config(components, side=2.0):
    panels = {role: _panel(role, pid, side) for role, pid in
              (("RAM", 2), ("Trail", 3), ("Earth", 4), ("Space", 5),
               ("Left", 6), ("Right", 7))}
    parent = ComponentNode(id=0, name="Parent", parent_id=0,
                           shape=Box(side, side, side), material="TestAl",
                           wall_thickness=0.003, aero_mass=1000)
    return SpacecraftConfig(parent=parent, panels=panels, components=components)


def box_node(cid, side, pos, parent=0, material="TestAl", t=0.002):
    return ComponentNode(id=cid, name=f"c{cid}", parent_id=parent,
                         shape=Box(side, side, side), material=material,
                         wall_thickness=t, position=tuple(pos))


def element(flux=1e-5, diameter=0.002, velocity=10000.0, az=0.0, el=0.0):
    return VectorFluxElement(flux=flux, diameter=diameter, velocity=velocity,
                             azimuth=az, elevation=el)


# ---------------------------------------------------------------------------
# Environment loading and synthesis

def test_load_single_row(tmp_path):
    f = tmp_path / "flux.csv"
    f.write_text("flux_m2yr,diameter_m,velocity_ms,azimuth_deg,elevation_deg\n"
                 "1e-5,0.001,10000,0,0\n")
    env = load_flux_table(f)
    assert len(env) == 1
    el = env.elements[0]
    assert el.flux == 1e-5 and el.diameter == 0.001 and el.azimuth == 0.0


def test_load_rejects_negative_flux(tmp_path):
    f = tmp_path / "flux.csv"
    f.write_text("flux_m2yr,diameter_m,velocity_ms,azimuth_deg,elevation_deg\n"
                 "-1e-5,0.001,10000,0,0\n")
    with pytest.raises(NegativeFlux):
        load_flux_table(f)


def test_load_rejects_bad_header(tmp_path):
    f = tmp_path / "flux.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        load_flux_table(f)


def test_empty_environment():
    env = DebrisEnvironment([])
    assert env.total_flux == 0.0
    assert len(env) == 0


def test_generator_bookkeeping():
    diameters = (0.001, 0.002, 0.005)
    env = synthesize_environment(total_flux=3.7e-3, diameters=diameters,
                                 n_azimuth=8, front_loaded=False)
    assert len(env) == 8 * len(diameters)
    assert env.total_flux == pytest.approx(3.7e-3, rel=1e-12)
    env_fl = synthesize_environment(total_flux=2.2e-3, diameters=diameters,
                                    n_azimuth=8, front_loaded=True)
    assert len(env_fl) == 24
    assert env_fl.total_flux == pytest.approx(2.2e-3, rel=1e-12)
    # front-loaded flux vanishes behind the spacecraft
    rear = [el for el in env_fl if math.cos(el.azimuth) < -1e-9]
    assert all(el.flux == 0.0 for el in rear)


def test_flux_round_trip(tmp_path):
    env = synthesize_environment(1e-3, (0.001, 0.003), n_azimuth=4)
    path = tmp_path / "f.csv"
    save_flux_table(env, path)
    again = load_flux_table(path)
    assert len(again) == len(env)
    for a, b in zip(env, again):
        assert a.flux == b.flux
        assert a.azimuth == pytest.approx(b.azimuth, abs=1e-15)


# ---------------------------------------------------------------------------
# Ballistic limits

def test_critical_diameter_reference_value():
    al = _material()
    d = critical_diameter(0.003, al, 7000.0, BLE)
    expected = (0.003 / (1.8 * 5.24 * 95 ** -0.25 * (2800 / 2713) ** 0.5
                         * (7000 / 5100) ** (2 / 3))) ** (18 / 19)
    assert d == pytest.approx(expected, rel=1e-12)
    assert d == pytest.approx(1.15e-3, abs=5e-6)


def test_critical_diameter_thickness_power_law():
    al = _material()
    d1 = critical_diameter(0.002, al, 7000.0, BLE)
    d2 = critical_diameter(0.004, al, 7000.0, BLE)
    assert d2 == pytest.approx(d1 * 2 ** (18 / 19), rel=1e-12)


def test_critical_diameter_monotonic():
    al = _material()
    thicknesses = [0.001, 0.002, 0.004, 0.008]
    ds = [critical_diameter(t, al, 7000.0, BLE) for t in thicknesses]
    assert ds == sorted(ds)
    velocities = [3000.0, 5000.0, 9000.0, 14000.0]
    ds = [critical_diameter(0.003, al, v, BLE) for v in velocities]
    assert ds == sorted(ds, reverse=True)


def test_critical_diameter_missing_data():
    with pytest.raises(MissingMaterialData):
        critical_diameter(0.003, GRAPHITE, 7000.0, BLE)


def test_critical_diameter_backfacing():
    assert critical_diameter(0.003, _material(), 0.0, BLE) == math.inf
    assert critical_diameter(0.003, _material(), -100.0, BLE) == math.inf


def test_panel_stack_critical_diameters():
    al = _material()
    single = _panel("RAM", 2)
    d_single = panel_critical_diameter(single, al, 7000.0, BLE)
    assert d_single == pytest.approx(critical_diameter(0.003, al, 7000.0, BLE), rel=1e-12)
    whipple = _panel("RAM", 2, wall_type="whipple")
    d_whipple = panel_critical_diameter(whipple, al, 7000.0, BLE)
    assert d_whipple >= d_single
    hc = _panel("RAM", 2, wall_type="honeycomb", hc_thickness=0.05, hc_areal_density=4.0)
    d_hc = panel_critical_diameter(hc, al, 7000.0, BLE)
    assert d_hc >= d_whipple  # core bonus thickens the rear sheet
    # transparent wall: no impact data stops nothing
    graphite_panel = _panel("RAM", 2, material="TestGr")
    assert panel_critical_diameter(graphite_panel, GRAPHITE, 7000.0, BLE) == 0.0


# ---------------------------------------------------------------------------
# Panel penetration

def test_panel_probability_empty_environment():
    res = panel_penetration_probability(_panel("RAM", 2), DB, DebrisEnvironment([]), 10.0, BLE)
    assert res.expected_penetrations == 0.0
    assert res.probability == 0.0


def test_panel_probability_closed_form():
    panel = _panel("RAM", 2, side=math.sqrt(2.0))   # area 2 m^2
    env = DebrisEnvironment([element(flux=1e-5, diameter=1.0)])
    res = panel_penetration_probability(panel, DB, env, 10.0, BLE)
    assert res.expected_penetrations == pytest.approx(2e-4, rel=1e-12)
    assert res.probability == pytest.approx(1.0 - math.exp(-2e-4), rel=1e-12)
    assert abs(res.probability - res.expected_penetrations) <= 1e-6


def test_panel_probability_below_ballistic_limit():
    panel = _panel("RAM", 2)
    env = DebrisEnvironment([element(flux=1e-3, diameter=1e-5)])
    res = panel_penetration_probability(panel, DB, env, 10.0, BLE)
    assert res.probability == 0.0


def test_panel_probability_backfacing_only():
    panel = _panel("Trail", 3)
    env = DebrisEnvironment([element(flux=1e-3, diameter=1.0, az=0.0)])
    res = panel_penetration_probability(panel, DB, env, 10.0, BLE)
    assert res.probability == 0.0


# ---------------------------------------------------------------------------
# Vulnerable zones

def test_zone_normal_incidence():
    cfg = make_config([box_node(9, 0.4, (0, 0, 0))])
    zone = vulnerable_zone(cfg, cfg.components[0], cfg.panels["RAM"], (1.0, 0.0, 0.0))
    assert zone.area == pytest.approx(0.16, rel=1e-12)
    assert zone.occlusion_fraction == 0.0


def test_zone_full_shadow():
    target = box_node(9, 0.4, (0, 0, 0))
    blocker = box_node(10, 0.4, (0.5, 0, 0))
    cfg = make_config([target, blocker])
    zone = vulnerable_zone(cfg, cfg.components[0], cfg.panels["RAM"], (1.0, 0.0, 0.0))
    assert zone.occlusion_fraction == pytest.approx(1.0, rel=1e-12)
    assert zone.exposed_area == pytest.approx(0.0, abs=1e-15)
    # the blocker itself is unshadowed
    zone_b = vulnerable_zone(cfg, cfg.components[1], cfg.panels["RAM"], (1.0, 0.0, 0.0))
    assert zone_b.occlusion_fraction == 0.0


def test_zone_clipped_at_panel_edge():
    # centered at the panel edge: half the projection falls off the rectangle
    cfg = make_config([box_node(9, 0.4, (0.0, 1.0, 0.0))])
    zone = vulnerable_zone(cfg, cfg.components[0], cfg.panels["RAM"], (1.0, 0.0, 0.0))
    assert zone.area == pytest.approx(0.08, rel=1e-12)


def test_zone_oblique_projection():
    cfg = make_config([box_node(9, 0.4, (0, 0, 0))])
    direction = (math.cos(math.radians(45)), math.sin(math.radians(45)), 0.0)
    zone = vulnerable_zone(cfg, cfg.components[0], cfg.panels["RAM"], direction)
    # hull spans y in [0.6, 1.4] before clipping at the 2 m panel's edge (1.0)
    assert zone.area == pytest.approx(0.4 * 0.4, rel=1e-9)


def test_zone_backfacing_empty():
    cfg = make_config([box_node(9, 0.4, (0, 0, 0))])
    zone = vulnerable_zone(cfg, cfg.components[0], cfg.panels["RAM"], (-1.0, 0.0, 0.0))
    assert zone.area == 0.0


def test_zone_partial_shadow():
    target = box_node(9, 0.4, (0, 0, 0))
    blocker = box_node(10, 0.4, (0.5, 0.2, 0.0))   # offset: half shadow
    cfg = make_config([target, blocker])
    zone = vulnerable_zone(cfg, cfg.components[0], cfg.panels["RAM"], (1.0, 0.0, 0.0))
    assert zone.occlusion_fraction == pytest.approx(0.5, rel=1e-9)


def test_facing_panel_selection():
    cfg = make_config([])
    panel, cos = facing_panel(cfg, (1.0, 0.0, 0.0))
    assert panel.role == "RAM" and cos == pytest.approx(1.0)
    panel, cos = facing_panel(cfg, (0.0, -1.0, 0.0))
    assert panel.role == "Right"
    diag = (math.cos(math.radians(30)), math.sin(math.radians(30)), 0.0)
    panel, cos = facing_panel(cfg, diag)
    assert panel.role == "RAM"


# ---------------------------------------------------------------------------
# Component penetration

def test_component_fully_occluded_probability_zero():
    target = box_node(9, 0.4, (0, 0, 0))
    blocker = box_node(10, 0.5, (0.5, 0, 0))
    cfg = make_config([target, blocker])
    env = DebrisEnvironment([element(flux=1e-3, diameter=1.0)])
    res = component_penetration_probability(target, cfg, env, 10.0, BLE, db=DB)
    assert res.probability == 0.0


def test_component_behind_quiet_sector():
    # flush against the trail panel: the front-loaded fixture carries zero
    # flux in every rear sector, so the elements aimed at that panel
    # contribute nothing
    target = ComponentNode(id=9, name="c9", parent_id=3, shape=Box(0.4, 0.4, 0.4),
                           material="TestAl", wall_thickness=0.002, position=(0.0, 0.0))
    cfg = make_config([target])
    fixture = synthesize_environment(1e-2, (0.001, 0.002, 0.005), n_azimuth=8,
                                     front_loaded=True)
    rear = [el for el in fixture if math.cos(el.azimuth) < -1e-9]
    assert rear and all(el.flux == 0.0 for el in rear)
    res = component_penetration_probability(target, cfg, DebrisEnvironment(rear),
                                            10.0, BLE, db=DB)
    assert res.probability == 0.0


def test_component_poisson_value():
    target = box_node(9, 0.4, (0, 0, 0))
    cfg = make_config([target])
    env = DebrisEnvironment([element(flux=1e-4, diameter=1.0)])
    res = component_penetration_probability(target, cfg, env, 10.0, BLE, db=DB)
    assert res.expected_penetrations == pytest.approx(1.6e-4, rel=1e-12)
    assert res.probability == pytest.approx(1.0 - math.exp(-1.6e-4), rel=1e-12)
    assert res.probability == pytest.approx(1.59987e-4, abs=1e-9)


def test_component_requires_both_walls_defeated():
    target = box_node(9, 0.4, (0, 0, 0), t=0.006)   # thick component wall
    cfg = make_config([target])
    # penetrates the 3 mm panel but not the 6 mm component wall at half speed
    d_panel = critical_diameter(0.003, _material(), 10000.0, BLE)
    d_comp = critical_diameter(0.006, _material(), 10000.0 * 0.5, BLE)
    assert d_panel < d_comp
    mid = 0.5 * (d_panel + d_comp)
    env = DebrisEnvironment([element(flux=1e-4, diameter=mid)])
    res = component_penetration_probability(target, cfg, env, 10.0, BLE, db=DB)
    assert res.probability == 0.0
    env_big = DebrisEnvironment([element(flux=1e-4, diameter=d_comp * 1.01)])
    res = component_penetration_probability(target, cfg, env_big, 10.0, BLE, db=DB)
    assert res.probability > 0.0


def test_adding_flux_never_decreases_probability():
    rng = np.random.default_rng(3)
    target = box_node(9, 0.4, (0, 0, 0))
    cfg = make_config([target])
    elements = []
    previous = 0.0
    for _ in range(12):
        elements.append(element(flux=float(rng.uniform(0, 1e-4)),
                                diameter=float(rng.uniform(5e-4, 6e-3)),
                                az=float(rng.uniform(0, 2 * math.pi)),
                                el=float(rng.uniform(-0.5, 0.5))))
        res = component_penetration_probability(target, cfg, DebrisEnvironment(elements),
                                                10.0, BLE, db=DB)
        assert res.probability >= previous - 1e-15
        previous = res.probability


def test_pnp_monotone_in_wall_thickness():
    env = synthesize_environment(1e-2, (0.0005, 0.001, 0.002, 0.0035, 0.005),
                                 n_azimuth=8)
    values = []
    for t in (0.001, 0.002, 0.003, 0.004, 0.005):
        target = box_node(9, 0.4, (0, 0, 0), t=t)
        cfg = make_config([target])
        res = component_penetration_probability(target, cfg, env, 10.0, BLE, db=DB)
        values.append(1.0 - res.probability)
    assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))


def test_probability_in_unit_interval_randomized():
    rng = np.random.default_rng(9)
    target = box_node(9, 0.4, (0, 0, 0))
    cfg = make_config([target])
    for _ in range(20):
        env = DebrisEnvironment([
            element(flux=float(rng.uniform(0, 10.0)),
                    diameter=float(rng.uniform(1e-4, 0.01)),
                    velocity=float(rng.uniform(1000, 15000)),
                    az=float(rng.uniform(0, 2 * math.pi)),
                    el=float(rng.uniform(-1.0, 1.0)))
            for _ in range(6)
        ])
        res = component_penetration_probability(target, cfg, env, 10.0, BLE, db=DB)
        assert 0.0 <= res.probability <= 1.0


# ---------------------------------------------------------------------------
# Aggregation

def test_pnp_examples():
    results = [PenetrationResult("a", -math.log(1 - 0.01)),
               PenetrationResult("b", -math.log(1 - 0.02))]
    assert compute_pnp(results) == pytest.approx(0.97, rel=1e-12)
    single = [PenetrationResult("tank", -math.log(1 - 0.0022))]
    assert compute_pnp(single) == pytest.approx(0.9978, rel=1e-12)
    with pytest.raises(EmptyInput):
        compute_pnp([])


def test_pnp_zero_flux_is_exactly_one():
    assert compute_pnp([PenetrationResult("a", 0.0), PenetrationResult("b", 0.0)]) == 1.0


def test_pnp_clamps_with_diagnostic():
    results = [PenetrationResult("a", 2.0), PenetrationResult("b", 2.0)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert compute_pnp(results) == 0.0
    assert any("clamped" in str(w.message) for w in caught)


def test_pnp_product_mode():
    results = [PenetrationResult("a", -math.log(1 - 0.01)),
               PenetrationResult("b", -math.log(1 - 0.02))]
    assert compute_pnp(results, mode="product") == pytest.approx(0.99 * 0.98, rel=1e-12)
    with pytest.raises(InvariantError):
        compute_pnp(results, mode="weird")


def test_poisson_linearization():
    for n in (1e-12, 1e-6, 1e-4, 1e-3):
        p = PenetrationResult("x", n).probability
        assert abs(p - n) <= 1e-6
        assert p == pytest.approx(1.0 - math.exp(-n), rel=1e-12)


def test_analyze_excludes_subcomponents():
    container = box_node(9, 0.4, (0, 0, 0))
    sub = ComponentNode(id=12, name="cell", parent_id=9, shape=Box(0.1, 0.05, 0.04),
                        material="TestAl", thermal_mass=1.0, quantity=5)
    cfg = make_config([container, sub])
    env = DebrisEnvironment([element(flux=1e-4, diameter=1.0)])
    panel_results, comp_results = analyze_survivability(cfg, DB, env, 10.0, BLE)
    assert [r.target_id for r in comp_results] == ["9"]
    assert len(panel_results) == 6
