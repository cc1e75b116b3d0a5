import math

import pytest

from dfdopt.config import (
    Box,
    ComponentNode,
    PanelSpec,
    SolarArraySpec,
    SpacecraftConfig,
    Sphere,
)
from dfdopt.demise import (
    Atmosphere,
    FragmentResult,
    G0,
    ReentryEvents,
    ThermalState,
    TrajectoryState,
    compute_lmf,
    default_atmosphere,
    heat_flux,
    propagate_step,
    simulate_reentry,
    thermal_update,
    tumbling_cross_section,
)
from dfdopt.errors import ConfigError, EmptyInput, InvariantError
from dfdopt.materials import MaterialDatabase, MaterialRecord


def _material(name="TestAl", **overrides):
    fields = dict(name=name, rho_m=2713, t_m=867, h_f=386116, c_m=896,
                  epsilon=0.141, c_sound=5100, sigma_y=276e6, hb=95)
    fields.update(overrides)
    return MaterialRecord(**fields)


def _panel(role, pid, side=2.0):
    return PanelSpec(id=pid, role=role, wall_type="single_wall", face_thickness=0.003,
                     material="TestAl", l=side, w=side)


def make_db(*extra):
    return MaterialDatabase([_material(), *extra])


def make_config(components, side=2.0, solar=None, parent_mass=2000.0):
    panels = {role: _panel(role, pid, side) for role, pid in
              (("RAM", 2), ("Trail", 3), ("Earth", 4), ("Space", 5),
               ("Left", 6), ("Right", 7))}
    parent = ComponentNode(id=0, name="Parent", parent_id=0,
                           shape=Box(side, side, side), material="TestAl",
                           wall_thickness=0.003, aero_mass=parent_mass)
    return SpacecraftConfig(parent=parent, panels=panels, components=components,
                            solar=solar)


ENTRY = TrajectoryState(altitude=120000.0, velocity=7800.0, flight_path_angle=0.0,
                        heading=math.radians(-8.0))
EVENTS = ReentryEvents(breakup_altitude=78000.0, solar_detach_altitude=95000.0)


# ---------------------------------------------------------------------------
# Atmosphere

def test_table_values_reproduced():
    atm = default_atmosphere()
    assert atm.density(0) == 1.225
    assert atm.density(75000) == 1.8e-5
    assert atm.density(120000) == 2.0e-8


def test_interlayer_interpolation_is_exponential():
    atm = default_atmosphere()
    scale = 5000.0 / math.log(1.8e-5 / 8.0e-6)
    expected = 1.8e-5 * math.exp(-2500.0 / scale)
    assert atm.density(77500) == pytest.approx(expected, rel=1e-12)


def test_density_monotone_decreasing():
    atm = default_atmosphere()
    hs = [h * 1000.0 for h in range(0, 200)]
    ds = [atm.density(h) for h in hs]
    assert all(a >= b for a, b in zip(ds, ds[1:]))


def test_vacuum_and_bounds():
    vac = Atmosphere.vacuum()
    assert vac.density(50000) == 0.0
    atm = default_atmosphere()
    assert atm.density(-10) == 1.225
    assert atm.density(250000) <= atm.density(200000)


def test_bad_tables_rejected():
    with pytest.raises(InvariantError):
        Atmosphere([0.0], [1.0])
    with pytest.raises(InvariantError):
        Atmosphere([0.0, 1.0], [1.0, -1.0])
    with pytest.raises(InvariantError):
        Atmosphere([0.0, 0.0], [1.0, 0.5])


# ---------------------------------------------------------------------------
# Trajectory propagation

def test_ballistic_energy_conservation():
    vac = Atmosphere.vacuum()
    state = TrajectoryState(altitude=120000.0, velocity=7800.0, flight_path_angle=0.0)
    energy0 = state.velocity ** 2 / 2 + G0 * state.altitude
    for _ in range(100):
        state = propagate_step(state, 1e9, vac, 0.1)
    energy1 = state.velocity ** 2 / 2 + G0 * state.altitude
    assert abs(energy1 - energy0) / energy0 < 1e-6


def test_altitude_decreases_when_diving():
    atm = default_atmosphere()
    state = TrajectoryState(altitude=120000.0, velocity=7800.0,
                            flight_path_angle=math.radians(-2.0))
    previous = state.altitude
    for _ in range(200):
        state = propagate_step(state, 172.0, atm, 0.5)
        assert state.altitude < previous
        previous = state.altitude


def test_rk4_step_halving_order():
    atm = default_atmosphere()
    start = TrajectoryState(altitude=70000.0, velocity=7000.0,
                            flight_path_angle=math.radians(-5.0))
    ref = start
    n = 256
    for _ in range(n):
        ref = propagate_step(ref, 50.0, atm, 2.0 / n)
    coarse = propagate_step(start, 50.0, atm, 2.0)
    fine = propagate_step(propagate_step(start, 50.0, atm, 1.0), 50.0, atm, 1.0)

    def err(s):
        return abs(s.velocity - ref.velocity) + abs(s.altitude - ref.altitude)

    ratio = err(coarse) / err(fine)
    assert 8.0 < ratio < 32.0


def test_propagate_argument_checks():
    atm = default_atmosphere()
    state = TrajectoryState(100000.0, 7000.0, 0.0)
    with pytest.raises(InvariantError):
        propagate_step(state, 100.0, atm, 0.0)
    with pytest.raises(InvariantError):
        propagate_step(state, 0.0, atm, 0.1)


# ---------------------------------------------------------------------------
# Heating and ablation

def test_heat_flux_zero_density():
    vac = Atmosphere.vacuum()
    assert heat_flux(TrajectoryState(80000, 7500, 0.0), 0.4, vac) == 0.0


def test_heat_flux_cubic_in_velocity():
    atm = default_atmosphere()
    q1 = heat_flux(TrajectoryState(75000, 3750, 0.0), 0.4163, atm)
    q2 = heat_flux(TrajectoryState(75000, 7500, 0.0), 0.4163, atm)
    assert q2 == pytest.approx(8 * q1, rel=1e-12)


def test_heat_flux_reference_value():
    atm = default_atmosphere()
    q = heat_flux(TrajectoryState(75000, 7500, 0.0), 0.4163, atm)
    assert q == pytest.approx(1.7415e-4 * math.sqrt(1.8e-5 / 0.4163) * 7500 ** 3, rel=1e-12)
    assert q == pytest.approx(4.83e5, rel=2e-3)


def test_thermal_update_zero_input():
    state = ThermalState(temperature=400.0, remaining_thermal_mass=5.0)
    after = thermal_update(state, 0.0, _material(), 0.0, 1.0)
    assert after == state


def test_thermal_update_heating_rate():
    mat = _material()
    state = ThermalState(temperature=300.0, remaining_thermal_mass=2.0)
    after = thermal_update(state, 1000.0, mat, 0.0, 0.5)
    assert after.temperature == pytest.approx(300.0 + 1000.0 * 0.5 / (2.0 * mat.c_m), rel=1e-12)
    assert after.remaining_thermal_mass == 2.0


def test_thermal_update_unit_melt():
    mat = _material()
    state = ThermalState(temperature=mat.t_m, remaining_thermal_mass=5.0)
    after = thermal_update(state, mat.h_f, mat, 0.0, 1.0)
    assert after.remaining_thermal_mass == pytest.approx(4.0, rel=1e-12)
    assert after.temperature == mat.t_m


def test_thermal_update_full_demise_time():
    mat = _material()
    state = ThermalState(temperature=mat.t_m, remaining_thermal_mass=1.0)
    after = thermal_update(state, 386116.0, mat, 0.0, 1.0)
    assert after.remaining_thermal_mass == pytest.approx(0.0, abs=1e-12)


def test_thermal_update_clamps_at_melting_point():
    mat = _material()
    state = ThermalState(temperature=860.0, remaining_thermal_mass=0.01)
    after = thermal_update(state, 1e9, mat, 0.0, 1.0)
    assert after.temperature == mat.t_m


def test_thermal_update_radiative_cooling():
    mat = _material()
    state = ThermalState(temperature=mat.t_m, remaining_thermal_mass=5.0)
    after = thermal_update(state, 0.0, mat, 1.0, 1.0)
    assert after.temperature < mat.t_m
    assert after.remaining_thermal_mass == 5.0


def test_absorbed_heat_bounded_by_convective_input():
    mat = _material()
    state = ThermalState(temperature=300.0, remaining_thermal_mass=3.0)
    total_in = 0.0
    for q in (500.0, 2000.0, 0.0, 1e4, 3e4):
        state = thermal_update(state, q, mat, 0.5, 1.0)
        total_in += q * 1.0
        assert state.absorbed_heat <= total_in + 1e-9


# ---------------------------------------------------------------------------
# Full simulation

def sphere_node(cid=10, material="TestAl", r=0.3, t=0.003, pos=(0, 0, 0)):
    return ComponentNode(id=cid, name=f"S{cid}", parent_id=0, shape=Sphere(r=r),
                         material=material, wall_thickness=t, position=pos)


def test_unmeltable_component_survives():
    db = make_db(_material("Unmeltium", t_m=1e9))
    cfg = make_config([sphere_node(material="Unmeltium")])
    results = simulate_reentry(cfg, ENTRY, EVENTS, db)
    comp = [r for r in results if r.uid == "10"][0]
    assert not comp.demised
    assert comp.final_mass == pytest.approx(comp.initial_mass, rel=1e-12)
    assert comp.landing_lonlat is not None
    assert comp.impact_energy is not None and comp.impact_energy > 0


def test_forcing_case_demises_below_breakup():
    db = make_db(_material("Tissue", t_m=300.0, h_f=1.0))
    cfg = make_config([sphere_node(material="Tissue")])
    results = simulate_reentry(cfg, ENTRY, EVENTS, db)
    comp = [r for r in results if r.uid == "10"][0]
    assert comp.demised
    assert comp.final_mass == 0.0
    assert comp.demise_altitude is not None
    assert comp.demise_altitude < EVENTS.breakup_altitude


def test_titanium_outlasts_aluminium():
    db = make_db(_material("TestTi", rho_m=4437, t_m=1943, h_f=393559, c_m=805.2,
                           epsilon=0.302, c_sound=4987, sigma_y=880e6, hb=334))
    base = dict(r=0.42, t=0.0029)
    cfg_ti = make_config([sphere_node(material="TestTi", **base)])
    cfg_al = make_config([sphere_node(material="TestAl", **base)])
    res_ti = simulate_reentry(cfg_ti, ENTRY, EVENTS, db)
    res_al = simulate_reentry(cfg_al, ENTRY, EVENTS, db)
    frac_ti = res_ti[-1].final_mass / res_ti[-1].initial_mass
    frac_al = res_al[-1].final_mass / res_al[-1].initial_mass
    assert frac_ti > frac_al


def test_fragment_mass_never_increases():
    db = make_db()
    cfg = make_config([sphere_node(r=0.42, t=0.004)])
    results = simulate_reentry(cfg, ENTRY, EVENTS, db, return_traces=True)
    for r in results:
        masses = [sample[4] for sample in r.trace]
        assert len(masses) > 2
        assert all(a >= b - 1e-12 for a, b in zip(masses, masses[1:]))


def test_results_independent_of_component_order():
    db = make_db()
    a = sphere_node(cid=10, r=0.3, pos=(0.5, 0, 0))
    b = sphere_node(cid=11, r=0.2, pos=(-0.5, 0, 0))
    cfg1 = make_config([a, b])
    cfg2 = make_config([sphere_node(cid=11, r=0.2, pos=(-0.5, 0, 0)),
                        sphere_node(cid=10, r=0.3, pos=(0.5, 0, 0))])
    res1 = {r.uid: (r.demised, r.final_mass) for r in simulate_reentry(cfg1, ENTRY, EVENTS, db)}
    res2 = {r.uid: (r.demised, r.final_mass) for r in simulate_reentry(cfg2, ENTRY, EVENTS, db)}
    assert res1 == res2


def test_entry_below_breakup_rejected():
    db = make_db()
    cfg = make_config([sphere_node()])
    with pytest.raises(ConfigError):
        simulate_reentry(cfg, TrajectoryState(70000.0, 7800.0, 0.0), EVENTS, db)


def test_solar_panels_not_reported():
    db = make_db()
    solar = SolarArraySpec(l=10, w=2, mass=82, quantity=1)
    cfg = make_config([sphere_node()], solar=solar)
    results = simulate_reentry(cfg, ENTRY, EVENTS, db)
    names = {r.name for r in results}
    assert not any("olar" in n for n in names)
    kinds = {r.kind for r in results}
    assert kinds == {"internal", "panel"}


def test_subcomponents_released_on_container_demise():
    db = make_db(_material("Tissue", t_m=300.0, h_f=1.0),
                 _material("Unmeltium", t_m=1e9))
    box = ComponentNode(id=11, name="BattBox", parent_id=0, shape=Box(0.4, 0.4, 0.4),
                        material="Tissue", wall_thickness=0.002, position=(0, 0, 0))
    cells = ComponentNode(id=12, name="Cells", parent_id=11, shape=Box(0.1, 0.05, 0.04),
                          material="Unmeltium", thermal_mass=1.0, quantity=20)
    cfg = make_config([box, cells])
    results = {r.uid: r for r in simulate_reentry(cfg, ENTRY, EVENTS, db)}
    assert results["11"].demised
    assert not results["12"].demised
    assert results["12"].quantity == 20
    assert results["12"].final_mass == 1.0


def test_lmf_examples():
    def frag(uid, m_in, m_fin, q=1, kind="internal"):
        return FragmentResult(uid=uid, name=uid, kind=kind, quantity=q,
                              initial_mass=m_in, final_mass=m_fin,
                              demised=m_fin == 0.0)

    assert compute_lmf([frag("a", 100, 0), frag("b", 50, 0)]) == 1.0
    assert compute_lmf([frag("a", 100, 0), frag("b", 50, 25)]) == pytest.approx(0.8333, abs=1e-4)
    assert compute_lmf([frag("a", 100, 100)]) == 0.0
    # panels never count toward the index
    assert compute_lmf([frag("a", 100, 0), frag("p", 500, 500, kind="panel")]) == 1.0
    # quantity multiplies both masses
    assert compute_lmf([frag("a", 10, 5, q=4), frag("b", 60, 0)]) == 0.8
    with pytest.raises(EmptyInput):
        compute_lmf([frag("p", 500, 500, kind="panel")])
    with pytest.raises(EmptyInput):
        compute_lmf([])


def test_lmf_extremes_from_simulation():
    db = make_db(_material("Tissue", t_m=300.0, h_f=1.0),
                 _material("Unmeltium", t_m=1e9))
    forced = make_config([sphere_node(material="Tissue")])
    assert compute_lmf(simulate_reentry(forced, ENTRY, EVENTS, db)) == 1.0
    keeper = make_config([sphere_node(material="Unmeltium")])
    assert compute_lmf(simulate_reentry(keeper, ENTRY, EVENTS, db)) == 0.0


def test_lmf_monotone_in_material_resistance():
    lmfs = []
    for t_m in (700.0, 900.0, 1200.0, 1600.0):
        db = make_db(_material("Var", t_m=t_m))
        cfg = make_config([sphere_node(material="Var", r=0.42, t=0.003)])
        lmfs.append(compute_lmf(simulate_reentry(cfg, ENTRY, EVENTS, db)))
    assert all(a >= b - 1e-12 for a, b in zip(lmfs, lmfs[1:]))
    lmfs = []
    for h_f in (2e5, 4e5, 8e5, 1.6e6):
        db = make_db(_material("Var", h_f=h_f))
        cfg = make_config([sphere_node(material="Var", r=0.42, t=0.003)])
        lmfs.append(compute_lmf(simulate_reentry(cfg, ENTRY, EVENTS, db)))
    assert all(a >= b - 1e-12 for a, b in zip(lmfs, lmfs[1:]))


def test_panel_detach_releases_attached_component():
    # a panel of fast-melting material lets go before breakup and takes its
    # attached component with it
    db = make_db(_material("Tissue", t_m=350.0, h_f=1000.0),
                 _material("Unmeltium", t_m=1e9))
    attached = ComponentNode(id=20, name="Radio", parent_id=2, shape=Box(0.2, 0.2, 0.2),
                             material="Unmeltium", wall_thickness=0.002,
                             position=(0.0, 0.0))
    cfg = make_config([attached])
    cfg.panels["RAM"].material = "Tissue"
    results = {r.uid: r for r in simulate_reentry(cfg, ENTRY, EVENTS, db)}
    assert "20" in results
    assert not results["20"].demised


def test_tumbling_cross_section_is_quarter_surface():
    shape = Sphere(r=0.5)
    assert tumbling_cross_section(shape) == pytest.approx(shape.surface_area() / 4, rel=1e-12)
    assert tumbling_cross_section(Sphere(r=0.5)) == pytest.approx(math.pi * 0.25, rel=1e-12)
