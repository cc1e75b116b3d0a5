"""Destructive re-entry surrogate.

The simulation runs in two phases.  While the stack is intact, only the
parent structure flies: solar arrays add drag area until they release at a
fixed altitude, each external panel heats up independently and detaches (with
its attached components) when its face material starts melting, and internal
components feel no heat.  At the user-defined breakup altitude everything
still on board becomes an independent fragment, each propagated on a 3-DOF
drag-only trajectory over a spherical non-rotating Earth and ablated with a
lumped-mass heat balance until it either demises or reaches the ground.

The demisability fitness is the liquid mass fraction over the internal
components: LMF = 1 - sum(final mass) / sum(initial mass).

Trajectories use fixed-step RK4.  The loop keeps the nominal step wherever
the thermal state is moving and stretches it (up to 10x) through thermally
quiet stretches of the descent; event altitudes are located by linear
interpolation inside the step.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

from .config import (
    PANEL_ROLE_BY_ID,
    ComponentNode,
    SpacecraftConfig,
    component_aero_mass,
    component_mass,
)
from .errors import ConfigError, EmptyInput, InvariantError, ParseError
from .materials import MaterialDatabase, MaterialRecord, packaged_data

EARTH_RADIUS = 6371000.0          # m
MU_EARTH = 3.986004418e14         # m^3/s^2
G0 = 9.80665                      # m/s^2
SIGMA_SB = 5.670374419e-8         # W/(m^2 K^4)

# Stagnation-point convective heating correlation, q = C sqrt(rho/Rn) V^3.
HEAT_FLUX_COEFF = 1.7415e-4

# Tumbling-averaged drag coefficients by shape.
DRAG_COEFF = {"sphere": 0.92, "cylinder": 0.80, "box": 1.05, "flat_plate": 1.10}

# Fraction of the stagnation flux absorbed over the surface of a tumbling body.
HEAT_FACTOR = {"sphere": 0.25, "cylinder": 0.22, "box": 0.20, "flat_plate": 0.35}

# Effective nose radius floor; avoids the Rn^-1/2 singularity for thin plates.
MIN_NOSE_RADIUS = 0.01

DEFAULT_BREAKUP_ALTITUDE = 78000.0
DEFAULT_SOLAR_DETACH_ALTITUDE = 95000.0

_MAX_FLIGHT_TIME = 86400.0        # s; safety cap per trajectory
_MAX_STRETCH = 20.0               # upper bound on the step relative to the nominal dt
_MAX_TEMP_STEP = 5.0              # K; largest temperature change within one step
_MAX_MELT_FRACTION = 0.02         # largest mass fraction melted within one step
_DEMISE_MASS_FRACTION = 1e-3      # remaining fraction below which a fragment counts as gone


class Atmosphere:
    """Piecewise-exponential density profile loaded from a table."""

    def __init__(self, altitudes_m, densities):
        if len(altitudes_m) != len(densities) or len(altitudes_m) < 2:
            raise InvariantError("atmosphere table needs at least two rows")
        if any(b <= a for a, b in zip(altitudes_m, altitudes_m[1:])):
            raise InvariantError("atmosphere altitudes must be strictly increasing")
        if any(d < 0 for d in densities):
            raise InvariantError("atmosphere densities must be non-negative")
        self.altitudes = [float(a) for a in altitudes_m]
        self.densities = [float(d) for d in densities]
        self._inv_scale = []
        for i in range(len(self.altitudes) - 1):
            da = self.altitudes[i + 1] - self.altitudes[i]
            lo, hi = self.densities[i], self.densities[i + 1]
            if lo > 0 and hi > 0 and lo != hi:
                self._inv_scale.append(math.log(lo / hi) / da)
            else:
                self._inv_scale.append(0.0)

    @classmethod
    def from_csv(cls, path: str | Path) -> "Atmosphere":
        alts, rhos = [], []
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["altitude_m", "density_kgm3"]:
                raise ParseError(f"{path}: expected header altitude_m,density_kgm3")
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    alts.append(float(row[0]))
                    rhos.append(float(row[1]))
                except (ValueError, IndexError):
                    raise ParseError(f"{path} line {lineno}: bad row {row!r}") from None
        return cls(alts, rhos)

    @classmethod
    def default(cls) -> "Atmosphere":
        return cls.from_csv(packaged_data("atmosphere.csv"))

    @classmethod
    def vacuum(cls) -> "Atmosphere":
        return cls([0.0, 200000.0], [0.0, 0.0])

    def density(self, altitude_m: float) -> float:
        alts = self.altitudes
        if altitude_m <= alts[0]:
            return self.densities[0]
        i = bisect_right(alts, altitude_m) - 1
        i = min(i, len(alts) - 2)
        rho = self.densities[i]
        if rho == 0.0:
            return 0.0
        return rho * math.exp(-(altitude_m - alts[i]) * self._inv_scale[i])


_DEFAULT_ATMOSPHERE: Atmosphere | None = None


def default_atmosphere() -> Atmosphere:
    global _DEFAULT_ATMOSPHERE
    if _DEFAULT_ATMOSPHERE is None:
        _DEFAULT_ATMOSPHERE = Atmosphere.default()
    return _DEFAULT_ATMOSPHERE


# ---------------------------------------------------------------------------
# State containers

@dataclass(frozen=True)
class TrajectoryState:
    """Point-mass state over a spherical non-rotating Earth (SI, radians)."""

    altitude: float
    velocity: float
    flight_path_angle: float
    longitude: float = 0.0
    latitude: float = 0.0
    heading: float = 0.0
    time: float = 0.0

    def as_tuple(self):
        return (self.altitude, self.velocity, self.flight_path_angle,
                self.longitude, self.latitude, self.heading)


@dataclass(frozen=True)
class ThermalState:
    """Lumped thermal state of one ablating object."""

    temperature: float
    remaining_thermal_mass: float
    absorbed_heat: float = 0.0


@dataclass(frozen=True)
class ReentryEvents:
    """Altitude-triggered events of the intact phase."""

    breakup_altitude: float = DEFAULT_BREAKUP_ALTITUDE
    solar_detach_altitude: float = DEFAULT_SOLAR_DETACH_ALTITUDE


@dataclass
class FragmentResult:
    """Fate of one object (or group of identical objects) after breakup."""

    uid: str
    name: str
    kind: str                    # "internal" | "panel"
    quantity: int
    initial_mass: float          # thermal mass per instance, kg
    final_mass: float            # surviving thermal mass per instance, kg
    demised: bool
    demise_altitude: float | None = None
    landing_lonlat: tuple[float, float] | None = None
    impact_energy: float | None = None
    trace: list | None = None    # optional (t, alt, v, T, mass) samples


# ---------------------------------------------------------------------------
# Trajectory dynamics

def _rk4(y, beta, atm: Atmosphere, dt: float):
    """One classical RK4 step of the drag-only point-mass dynamics over a
    spherical non-rotating Earth.

    State: (altitude, velocity, flight path angle, longitude, latitude,
    heading from north).  Position and heading evolve along the great
    circle, drag opposes the velocity, gravity follows mu / r^2.  The body
    sits on the hot path of every trajectory, hence the scalar expansion.
    """
    alts = atm.altitudes
    rhos = atm.densities
    invs = atm._inv_scale
    top = len(alts) - 2
    sin, cos, tan, exp = math.sin, math.cos, math.tan, math.exp

    h0, v0, gam0, lon0, lat0, psi0 = y

    def stage(h, v, gam, lat, psi):
        r = EARTH_RADIUS + h
        g = MU_EARTH / (r * r)
        if h <= alts[0]:
            rho = rhos[0]
        else:
            i = bisect_right(alts, h) - 1
            if i > top:
                i = top
            base = rhos[i]
            rho = base * exp(-(h - alts[i]) * invs[i]) if base > 0.0 else 0.0
        sg = sin(gam)
        cg = cos(gam)
        vs = v if v > 0.1 else 0.1
        cl = cos(lat)
        if -1e-9 < cl < 1e-9:
            cl = 1e-9 if cl >= 0 else -1e-9
        sp = sin(psi)
        vcg = v * cg
        return (v * sg,
                -0.5 * rho * v * v / beta - g * sg,
                (v / r - g / vs) * cg,
                vcg * sp / (r * cl),
                vcg * cos(psi) / r,
                vcg * sp * tan(lat) / r)

    a1, b1, c1, d1, e1, f1 = stage(h0, v0, gam0, lat0, psi0)
    hdt = 0.5 * dt
    a2, b2, c2, d2, e2, f2 = stage(h0 + hdt * a1, v0 + hdt * b1, gam0 + hdt * c1,
                                   lat0 + hdt * e1, psi0 + hdt * f1)
    a3, b3, c3, d3, e3, f3 = stage(h0 + hdt * a2, v0 + hdt * b2, gam0 + hdt * c2,
                                   lat0 + hdt * e2, psi0 + hdt * f2)
    a4, b4, c4, d4, e4, f4 = stage(h0 + dt * a3, v0 + dt * b3, gam0 + dt * c3,
                                   lat0 + dt * e3, psi0 + dt * f3)
    sixth = dt / 6.0
    return (h0 + sixth * (a1 + 2.0 * (a2 + a3) + a4),
            v0 + sixth * (b1 + 2.0 * (b2 + b3) + b4),
            gam0 + sixth * (c1 + 2.0 * (c2 + c3) + c4),
            lon0 + sixth * (d1 + 2.0 * (d2 + d3) + d4),
            lat0 + sixth * (e1 + 2.0 * (e2 + e3) + e4),
            psi0 + sixth * (f1 + 2.0 * (f2 + f3) + f4))


def propagate_step(state: TrajectoryState, ballistic_coeff: float,
                   atmosphere: Atmosphere, dt: float) -> TrajectoryState:
    """One fixed RK4 step of the drag-only point-mass dynamics."""
    if dt <= 0:
        raise InvariantError("time step must be positive")
    if ballistic_coeff <= 0:
        raise InvariantError("ballistic coefficient must be positive")
    y = _rk4(state.as_tuple(), ballistic_coeff, atmosphere, dt)
    return TrajectoryState(*y, time=state.time + dt)


def heat_flux(state: TrajectoryState, nose_radius: float, atmosphere: Atmosphere) -> float:
    """Stagnation-point convective heat flux, W/m^2."""
    if nose_radius <= 0:
        raise InvariantError("nose radius must be positive")
    rho = atmosphere.density(state.altitude)
    if rho <= 0.0:
        return 0.0
    return HEAT_FLUX_COEFF * math.sqrt(rho / nose_radius) * state.velocity ** 3


def thermal_update(thermal: ThermalState, q_conv_watts: float,
                   material: MaterialRecord, area: float, dt: float) -> ThermalState:
    """Advance the lumped heat balance by ``dt``.

    Below the melting point the temperature follows dT/dt = q_net / (m C)
    with q_net the convective input minus the grey-body radiation from
    ``area``.  At the melting point the temperature is clamped and any
    positive net input removes mass at q_net / h_f; mass floors at zero.
    """
    if dt <= 0:
        raise InvariantError("time step must be positive")
    m = thermal.remaining_thermal_mass
    if m <= 0.0:
        return thermal
    q_net = q_conv_watts - material.epsilon * SIGMA_SB * thermal.temperature ** 4 * area
    absorbed = thermal.absorbed_heat + max(q_net, 0.0) * dt
    if thermal.temperature >= material.t_m and q_net > 0.0:
        dm = q_net / material.h_f * dt
        return ThermalState(material.t_m, max(m - dm, 0.0), absorbed)
    temp = thermal.temperature + q_net / (m * material.c_m) * dt
    temp = min(max(temp, 4.0), material.t_m)
    return ThermalState(temp, m, absorbed)


# ---------------------------------------------------------------------------
# Shape-dependent aerothermal properties

def tumbling_cross_section(node_shape) -> float:
    # mean projected area of a tumbling convex body is one quarter of its surface
    return node_shape.surface_area() / 4.0


def nose_radius_of(node: ComponentNode) -> float:
    shape = node.shape
    if shape.kind in ("sphere", "cylinder"):
        return shape.r
    if shape.kind == "box":
        return max(min(shape.dims()) / 2.0, MIN_NOSE_RADIUS)
    thickness = node.wall_thickness or 0.0
    return max(thickness / 2.0, MIN_NOSE_RADIUS)


# ---------------------------------------------------------------------------
# Fragment flight

class FlightCache:
    """Memo for the intact phase and for repeated identical fragments."""

    def __init__(self):
        self.phase1: dict = {}
        self.fragments: dict = {}


def _interp_state(y0, y1, frac):
    return tuple(y0[i] + frac * (y1[i] - y0[i]) for i in range(6))


def _stable_dt(y, beta, rho) -> float:
    """Largest step that keeps the drag and flight-path dynamics stable."""
    h, v, gam = y[0], y[1], y[2]
    v_safe = max(v, 1.0)
    r = EARTH_RADIUS + h
    g = MU_EARTH / (r * r)
    decel = 0.5 * rho * v * v / beta
    rate = max(abs((v / r - g / v_safe) * math.cos(gam)), decel / v_safe, 1e-9)
    return 0.25 / rate


def _terminal_shortcut(y, t, rho, q_conv, temp, material, surface_area,
                       m_aero, drag_area, atm):
    """Close out a cold, slow, near-vertical descent analytically.

    Once a fragment falls at terminal equilibrium with heating too weak to
    ever approach the melting point, nothing below can change its fate;
    integrating the remaining minutes of feather-fall step by step is wasted
    work.  Returns (ground_state, time) or None when the conditions fail.
    """
    v, gam = y[1], y[2]
    if v > 150.0 or gam > -1.40 or rho <= 0.0 or y[0] <= 0.0:
        return None
    if temp > 0.6 * material.t_m:
        return None
    # equilibrium temperature the remaining heating could sustain
    teq4 = q_conv / (material.epsilon * SIGMA_SB * surface_area)
    if teq4 > (0.5 * material.t_m) ** 4:
        return None
    g = MU_EARTH / (EARTH_RADIUS + y[0]) ** 2
    decel = 0.5 * rho * v * v * drag_area / max(m_aero, 1e-12)
    if abs(decel - g) > 0.1 * g:
        return None
    rho0 = atm.density(0.0)
    beta = max(m_aero, 1e-12) / drag_area
    v_ground = math.sqrt(2.0 * beta * G0 / rho0) if rho0 > 0 else v
    # sink rate only shrinks on the way down; bound the remaining fall time
    t_ground = t + y[0] / min(v, max(v_ground, 0.1))
    return (0.0, v_ground, -math.pi / 2.0, y[3], y[4], y[5]), t_ground


def _fly_fragment(y0, t0, material: MaterialRecord, thermal_mass: float, contents_mass: float,
                  aero_mass: float, surface_area: float, cross_section: float,
                  drag_coeff: float, heat_factor: float, nose_radius: float,
                  t_init: float, atm: Atmosphere, dt: float, collect=None):
    """Fly one fragment to demise or the ground.

    Returns (demised, final_thermal_mass, demise_altitude, release_state_for_contents,
    ground_state, absorbed_heat).  ``release_state_for_contents`` is the state at
    which contained sub-components are set free (demise point), or None.
    """
    temp = t_init
    m_th = thermal_mass
    absorbed = 0.0
    y = y0
    t = t0
    heat_area = heat_factor * surface_area
    # below this remaining mass the fragment counts as fully demised; keeps a
    # vanishing shell from turning into an endless feather-fall
    demise_floor = max(1e-3, _DEMISE_MASS_FRACTION * thermal_mass)
    while t - t0 < _MAX_FLIGHT_TIME:
        rho = atm.density(y[0])
        v = y[1]
        q_stag = (HEAT_FLUX_COEFF * math.sqrt(rho / nose_radius) * v ** 3) if rho > 0 else 0.0
        q_conv = q_stag * heat_area
        q_net = q_conv - material.epsilon * SIGMA_SB * temp ** 4 * surface_area

        ground = _terminal_shortcut(y, t, rho, q_conv, temp, material, surface_area,
                                    aero_mass - (thermal_mass - m_th) + contents_mass,
                                    drag_coeff * cross_section, atm)
        if ground is not None:
            if collect is not None:
                collect.append((ground[1], 0.0, ground[0][1], temp, m_th))
            return False, m_th, None, None, ground, absorbed

        # step control: bound the per-step temperature change, melted mass
        # fraction, altitude change and integrator stability; never run finer
        # than the nominal dt nor coarser than its stretched multiple
        dt_step = dt * _MAX_STRETCH
        melting = temp >= material.t_m and q_net > 0.0
        if melting:
            dt_step = min(dt_step, _MAX_MELT_FRACTION * m_th * material.h_f / q_net)
        elif q_net != 0.0:
            dt_step = min(dt_step, _MAX_TEMP_STEP * m_th * material.c_m / abs(q_net))
        sink = abs(v * math.sin(y[2]))
        if sink > 1.0:
            dt_step = min(dt_step, 1000.0 / sink)

        m_aero = max(aero_mass - (thermal_mass - m_th) + contents_mass, 1e-6)
        beta = m_aero / (drag_coeff * cross_section)
        stable = _stable_dt(y, beta, rho)
        dt_step = max(min(dt_step, stable), min(dt, max(stable, 0.02 * dt)))
        y_new = _rk4(y, beta, atm, dt_step)
        if y_new[1] < 0.5:
            y_new = (y_new[0], 0.5) + y_new[2:]

        new_thermal = thermal_update(
            ThermalState(temp, m_th, absorbed), q_conv, material, surface_area, dt_step)
        if collect is not None:
            collect.append((t, y[0], y[1], temp, m_th))
        if new_thermal.remaining_thermal_mass <= demise_floor:
            melted = m_th - new_thermal.remaining_thermal_mass
            frac = (m_th - demise_floor) / melted if melted > 0 else 1.0
            frac = min(max(frac, 0.0), 1.0)
            y_demise = _interp_state(y, y_new, frac)
            if collect is not None:
                collect.append((t + frac * dt_step, y_demise[0], y_demise[1], material.t_m, 0.0))
            return True, 0.0, y_demise[0], (y_demise, t + frac * dt_step), None, new_thermal.absorbed_heat
        temp = new_thermal.temperature
        m_th = new_thermal.remaining_thermal_mass
        absorbed = new_thermal.absorbed_heat
        if y_new[0] <= 0.0:
            frac = y[0] / (y[0] - y_new[0]) if y[0] != y_new[0] else 1.0
            y_ground = _interp_state(y, y_new, frac)
            if collect is not None:
                collect.append((t + frac * dt_step, 0.0, y_ground[1], temp, m_th))
            return False, m_th, None, None, (y_ground, t + frac * dt_step), absorbed
        y = y_new
        t += dt_step
    # safety cap: still aloft, treat as surviving where it is
    return False, m_th, None, None, (y, t), absorbed


def _panel_thermal_mass(panel, db: MaterialDatabase) -> float:
    rec = db.lookup(panel.material)
    face = panel.area * panel.face_thickness * rec.rho_m
    if panel.wall_type == "single_wall":
        return face
    if panel.wall_type == "whipple":
        return 2.0 * face
    # honeycomb: two face sheets plus the core areal density
    return 2.0 * face + panel.area * (panel.hc_areal_density or 0.0)


def _fragment_key(y, material_name, thermal_mass, contents_mass, aero_mass,
                  surface_area, cross_section, drag_coeff, heat_factor, nose_radius,
                  t_init, dt):
    return (y, material_name, thermal_mass, contents_mass, aero_mass, surface_area,
            cross_section, drag_coeff, heat_factor, nose_radius, t_init, dt)


# ---------------------------------------------------------------------------
# Full simulation

def _phase1_key(config: SpacecraftConfig, entry: TrajectoryState,
                events: ReentryEvents, dt: float):
    panels = tuple(
        (p.role, p.wall_type, p.face_thickness, p.material, p.l, p.w,
         p.hc_thickness, p.hc_areal_density, p.t_init)
        for p in sorted(config.panels.values(), key=lambda p: p.id)
    )
    solar = None
    if config.solar is not None:
        s = config.solar
        solar = (s.l, s.w, s.mass, s.quantity, s.detach_altitude)
    parent = (config.parent.shape.dims(), config.parent.material,
              config.parent.aero_mass, config.parent.wall_thickness)
    return (entry.as_tuple(), entry.time, events.breakup_altitude,
            events.solar_detach_altitude, panels, solar, parent, dt)


def _fly_parent(config: SpacecraftConfig, entry: TrajectoryState, events: ReentryEvents,
                db: MaterialDatabase, atm: Atmosphere, dt: float):
    """Intact phase: returns the breakup state and per-panel release events."""
    parent_box = config.parent.shape
    base_area = tumbling_cross_section(parent_box)
    solar_area = config.solar.area / 2.0 if config.solar else 0.0
    solar_alt = (config.solar.detach_altitude if config.solar and config.solar.detach_altitude
                 else events.solar_detach_altitude)
    rn_parent = max(min(parent_box.dims()) / 2.0, MIN_NOSE_RADIUS)
    aero_mass = config.parent.aero_mass or component_mass(config.parent, db)

    panels = sorted(config.panels.values(), key=lambda p: p.id)
    panel_mat = {p.role: db.lookup(p.material) for p in panels}
    panel_temp = {p.role: p.t_init for p in panels}
    released: dict[str, tuple] = {}   # role -> (state tuple, time, temperature)

    y = entry.as_tuple()
    t = entry.time
    solar_attached = config.solar is not None
    while t - entry.time < _MAX_FLIGHT_TIME:
        if solar_attached and y[0] <= solar_alt:
            solar_attached = False
        area = base_area + (solar_area if solar_attached else 0.0)
        beta = aero_mass / (DRAG_COEFF["box"] * area)
        rho = atm.density(y[0])
        dt_step = dt if rho > 1e-7 else dt * _MAX_STRETCH
        stable = _stable_dt(y, beta, rho)
        dt_step = max(min(dt_step, stable), min(dt, max(stable, 0.02 * dt)))
        y_new = _rk4(y, beta, atm, dt_step)
        if y_new[1] < 0.5:
            y_new = (y_new[0], 0.5) + y_new[2:]

        if rho > 0:
            q_stag = HEAT_FLUX_COEFF * math.sqrt(rho / rn_parent) * y[1] ** 3
            for p in panels:
                if p.role in released:
                    continue
                rec = panel_mat[p.role]
                mass = _panel_thermal_mass(p, db)
                state = thermal_update(
                    ThermalState(panel_temp[p.role], mass),
                    q_stag * HEAT_FACTOR["flat_plate"] * p.area, rec, p.area, dt_step)
                panel_temp[p.role] = state.temperature
                if state.temperature >= rec.t_m:
                    released[p.role] = (y_new, t + dt_step, rec.t_m)

        if y_new[0] <= events.breakup_altitude:
            span = y[0] - y_new[0]
            frac = (y[0] - events.breakup_altitude) / span if span > 0 else 1.0
            y_break = _interp_state(y, y_new, frac)
            t_break = t + frac * dt_step
            return y_break, t_break, released, dict(panel_temp)
        if y_new[0] <= 0.0:
            # never reached the breakup altitude: release everything at ground level
            return y_new, t + dt_step, released, dict(panel_temp)
        y = y_new
        t += dt_step
    raise ConfigError("intact phase exceeded the flight time cap")


def simulate_reentry(config: SpacecraftConfig, entry: TrajectoryState,
                     events: ReentryEvents, db: MaterialDatabase, *,
                     atmosphere: Atmosphere | None = None, dt: float = 0.1,
                     cache: FlightCache | None = None,
                     return_traces: bool = False) -> list[FragmentResult]:
    """Simulate the full destructive re-entry of a configuration."""
    if entry.altitude <= events.breakup_altitude:
        raise ConfigError("entry state must start above the breakup altitude")
    atm = atmosphere or default_atmosphere()
    collect_traces = return_traces

    key = _phase1_key(config, entry, events, dt)
    if cache is not None and key in cache.phase1:
        y_break, t_break, released, panel_temp = cache.phase1[key]
    else:
        y_break, t_break, released, panel_temp = _fly_parent(config, entry, events, db, atm, dt)
        if cache is not None:
            cache.phase1[key] = (y_break, t_break, released, panel_temp)

    results: list[FragmentResult] = []

    def fly(uid, name, kind, quantity, material, thermal_mass, contents_mass, aero_mass,
            surface_area, cross_section, drag_coeff, heat_factor, rn, t_init, y0, t0):
        fkey = _fragment_key(y0, material.name, thermal_mass, contents_mass, aero_mass,
                             surface_area, cross_section, drag_coeff, heat_factor, rn,
                             t_init, dt)
        trace = [] if collect_traces else None
        if cache is not None and not collect_traces and fkey in cache.fragments:
            flown = cache.fragments[fkey]
        else:
            flown = _fly_fragment(y0, t0, material, thermal_mass, contents_mass, aero_mass,
                                  surface_area, cross_section, drag_coeff, heat_factor,
                                  rn, t_init, atm, dt, collect=trace)
            if cache is not None and not collect_traces:
                cache.fragments[fkey] = flown
        demised, m_fin, alt_demise, contents_release, ground, _ = flown
        result = FragmentResult(
            uid=uid, name=name, kind=kind, quantity=quantity,
            initial_mass=thermal_mass, final_mass=m_fin, demised=demised,
            demise_altitude=alt_demise, trace=trace)
        if ground is not None:
            yg, _tg = ground
            result.landing_lonlat = (yg[3], yg[4])
            m_total = max(aero_mass - (thermal_mass - m_fin) + contents_mass, 0.0)
            result.impact_energy = 0.5 * m_total * yg[1] ** 2
        results.append(result)
        return contents_release, ground

    def release_contents(node: ComponentNode, y0, t0):
        for sub in config.subcomponents_of(node):
            fly_component(sub, y0, t0)

    def land_contents(node: ComponentNode, ground):
        yg, _ = ground
        for sub in config.subcomponents_of(node):
            m_sub = component_mass(sub, db)
            results.append(FragmentResult(
                uid=sub.uid, name=sub.name, kind="internal", quantity=sub.quantity,
                initial_mass=m_sub, final_mass=m_sub, demised=False,
                landing_lonlat=(yg[3], yg[4]), impact_energy=None))

    def fly_component(node: ComponentNode, y0, t0):
        rec = db.lookup(node.material)
        m_th = component_mass(node, db)
        contents = sum(
            component_aero_mass(s, db) * s.quantity for s in config.subcomponents_of(node))
        m_aero = component_aero_mass(node, db)
        contents_release, ground = fly(
            node.uid, node.name, "internal", node.quantity, rec, m_th, contents, m_aero,
            node.shape.surface_area(), tumbling_cross_section(node.shape),
            DRAG_COEFF[node.shape.kind], HEAT_FACTOR[node.shape.kind],
            nose_radius_of(node), node.t_init, y0, t0)
        if contents_release is not None:
            y_rel, t_rel = contents_release
            release_contents(node, y_rel, t_rel)
        elif ground is not None:
            land_contents(node, ground)

    # external panels: early detachments fly from their release state, the rest
    # from the breakup state
    for panel in sorted(config.panels.values(), key=lambda p: p.id):
        rec = db.lookup(panel.material)
        if panel.role in released:
            y0, t0, temp0 = released[panel.role]
        else:
            y0, t0, temp0 = y_break, t_break, panel_temp[panel.role]
        mass = _panel_thermal_mass(panel, db)
        rn = max(panel.face_thickness / 2.0, MIN_NOSE_RADIUS)
        fly(str(panel.id), f"{panel.role} panel", "panel", 1, rec, mass, 0.0, mass,
            2.0 * panel.area, panel.area / 2.0, DRAG_COEFF["flat_plate"],
            HEAT_FACTOR["flat_plate"], rn, temp0, y0, t0)

    # internal components: attached ones leave with their panel when it goes early
    for node in sorted(config.placeable_components(), key=lambda n: (n.id, n.instance)):
        y0, t0 = y_break, t_break
        if config.is_attached(node):
            role = PANEL_ROLE_BY_ID[node.parent_id]
            if role in released:
                y0, t0, _ = released[role]
        fly_component(node, y0, t0)

    return results


def compute_lmf(results: list[FragmentResult], initial_masses=None) -> float:
    """Liquid mass fraction over the internal components:
    LMF = 1 - sum(final) / sum(initial)."""
    internal = [r for r in results if r.kind == "internal"]
    if not internal:
        raise EmptyInput("no internal components in the results")
    if initial_masses is not None:
        if len(initial_masses) != len(internal):
            raise InvariantError("initial mass list must align with the internal results")
        m_in = sum(m * r.quantity for m, r in zip(initial_masses, internal))
    else:
        m_in = sum(r.initial_mass * r.quantity for r in internal)
    if m_in <= 0:
        raise EmptyInput("total initial mass is zero")
    m_fin = sum(r.final_mass * r.quantity for r in internal)
    return 1.0 - m_fin / m_in
