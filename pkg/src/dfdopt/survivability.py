"""Debris-impact vulnerability analysis.

The debris environment is discretized into vector flux elements, each
carrying a flux, a particle diameter, an impact velocity, and an arrival
direction (azimuth from the flight direction toward +y, elevation from the
x-y plane toward +z).  For every element the analysis finds the external
panel facing it, asks a ballistic-limit equation for the smallest particle
that defeats the wall stack, and accumulates the penetrating flux over the
component's vulnerable zone: the projection of the component onto that panel
along the arrival direction, reduced by the shadows other components cast on
it.  Impacts are independent, so expected counts convert to probabilities
through a Poisson model, and the survivability fitness is
PNP = 1 - sum of the component penetration probabilities.

The single-wall ballistic limit is a crater-depth correlation inverted for
the critical diameter; multi-wall stacks apply it sequentially, cutting the
velocity by a configurable attenuation factor at each wall crossed.  Walls
made of materials without hardness/sound-speed data stop nothing (they are
treated as transparent rather than given invented properties).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from shapely.geometry import Polygon
from shapely.ops import unary_union

from .config import ComponentNode, PanelSpec, SpacecraftConfig
from .errors import EmptyInput, InvariantError, MissingMaterialData, NegativeFlux, ParseError
from .materials import MaterialDatabase, MaterialRecord

FLUX_CSV_HEADER = ["flux_m2yr", "diameter_m", "velocity_ms", "azimuth_deg", "elevation_deg"]


@dataclass(frozen=True)
class VectorFluxElement:
    """One directional sample of the debris environment."""

    flux: float         # impacts / m^2 / year on a facing surface
    diameter: float     # m
    velocity: float     # m/s
    azimuth: float      # rad, 0 = flight direction (+x), positive toward +y
    elevation: float    # rad, positive toward +z

    def validate(self) -> None:
        if self.flux < 0:
            raise NegativeFlux(f"flux must be non-negative, got {self.flux}")
        if self.diameter <= 0 or self.velocity <= 0:
            raise InvariantError("flux element diameter and velocity must be positive")

    def direction(self) -> tuple[float, float, float]:
        """Unit vector pointing from the spacecraft toward the flux source."""
        ce = math.cos(self.elevation)
        return (ce * math.cos(self.azimuth), ce * math.sin(self.azimuth),
                math.sin(self.elevation))


class DebrisEnvironment:
    """Immutable collection of vector flux elements."""

    def __init__(self, elements):
        self.elements = tuple(elements)
        for el in self.elements:
            el.validate()

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def total_flux(self) -> float:
        return sum(el.flux for el in self.elements)


def load_flux_table(path: str | Path) -> DebrisEnvironment:
    """Load a debris environment table (angles in degrees in the file)."""
    elements = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != FLUX_CSV_HEADER:
            raise ParseError(f"{path}: expected header {','.join(FLUX_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                flux, diameter, velocity, az_deg, el_deg = (float(c) for c in row)
            except (ValueError, IndexError):
                raise ParseError(f"{path} line {lineno}: bad row {row!r}") from None
            elements.append(VectorFluxElement(
                flux=flux, diameter=diameter, velocity=velocity,
                azimuth=math.radians(az_deg), elevation=math.radians(el_deg)))
    return DebrisEnvironment(elements)


def save_flux_table(env: DebrisEnvironment, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(FLUX_CSV_HEADER)
        for el in env:
            writer.writerow([repr(el.flux), repr(el.diameter), repr(el.velocity),
                             repr(math.degrees(el.azimuth)), repr(math.degrees(el.elevation))])


def synthesize_environment(total_flux: float, diameters, velocity: float = 10000.0,
                           n_azimuth: int = 8, elevations=(0.0,),
                           front_loaded: bool = True,
                           diameter_exponent: float = -1.5) -> DebrisEnvironment:
    """Build a synthetic test environment.

    The azimuth distribution is either isotropic or front-loaded (weights
    proportional to cos^2 of the azimuth, zero behind), which mimics the
    shape of a low-Earth-orbit environment where most of the flux arrives
    around the flight direction.  Fluxes are split across diameters with a
    power-law weight.  The element fluxes sum to ``total_flux`` exactly; the
    sectors with zero weight are kept so the element count stays
    n_azimuth * len(diameters) * len(elevations).
    """
    azimuths = [2.0 * math.pi * k / n_azimuth for k in range(n_azimuth)]
    if front_loaded:
        az_w = [max(math.cos(a), 0.0) ** 2 for a in azimuths]
    else:
        az_w = [1.0] * n_azimuth
    d_w = [d ** diameter_exponent for d in diameters]
    el_w = [1.0] * len(elevations)
    raw = []
    for el, we in zip(elevations, el_w):
        for a, wa in zip(azimuths, az_w):
            for d, wd in zip(diameters, d_w):
                raw.append((a, el, d, wa * wd * we))
    total_w = sum(w for _, _, _, w in raw)
    return DebrisEnvironment([
        VectorFluxElement(flux=total_flux * w / total_w, diameter=d,
                          velocity=velocity, azimuth=a, elevation=el)
        for a, el, d, w in raw
    ])


# ---------------------------------------------------------------------------
# Ballistic limits

@dataclass(frozen=True)
class BleCoefficients:
    """Coefficients of the reference single-wall ballistic limit and of the
    sequential multi-wall application."""

    crater_coeff: float = 5.24
    hardness_exp: float = 0.25
    density_exp: float = 0.5
    velocity_exp: float = 2.0 / 3.0
    thickness_exp: float = 18.0 / 19.0
    spall_factor: float = 1.8
    projectile_density: float = 2800.0   # kg/m^3
    velocity_attenuation: float = 0.5    # residual velocity fraction per wall crossed

    def validate(self) -> None:
        for name in ("crater_coeff", "hardness_exp", "density_exp", "velocity_exp",
                     "thickness_exp", "spall_factor", "projectile_density",
                     "velocity_attenuation"):
            if not getattr(self, name) > 0:
                raise InvariantError(f"BLE coefficient {name} must be positive")


@dataclass(frozen=True)
class PenetrationResult:
    """Expected penetration count and Poisson probability for one target."""

    target_id: str
    expected_penetrations: float

    @property
    def probability(self) -> float:
        return 1.0 - math.exp(-self.expected_penetrations)


def critical_diameter(thickness: float, material: MaterialRecord, v_normal: float,
                      ble: BleCoefficients = BleCoefficients()) -> float:
    """Smallest projectile diameter that perforates a single wall.

    Crater-depth correlation inverted for the diameter:

        d_c = [ t / (k 5.24 HB^-0.25 (rho_p/rho_w)^0.5 (v_n/C)^(2/3)) ]^(18/19)

    Strictly increasing in the wall thickness, decreasing in the normal
    velocity component.
    """
    ble.validate()
    if thickness <= 0:
        raise InvariantError("wall thickness must be positive")
    if material.hb is None or material.c_sound is None:
        raise MissingMaterialData(
            f"material {material.name} lacks hardness or sound speed; "
            "it cannot be used as a ballistic wall")
    if v_normal <= 0:
        return math.inf
    denom = (ble.spall_factor * ble.crater_coeff
             * material.hb ** (-ble.hardness_exp)
             * (ble.projectile_density / material.rho_m) ** ble.density_exp
             * (v_normal / material.c_sound) ** ble.velocity_exp)
    return (thickness / denom) ** ble.thickness_exp


def _wall_critical_diameter(thickness: float | None, material: MaterialRecord,
                            v_normal: float, ble: BleCoefficients) -> float:
    """Like :func:`critical_diameter` but conservative about missing data:
    a wall with no thickness or no impact properties stops nothing."""
    if thickness is None or thickness <= 0 or not material.has_impact_data:
        return 0.0
    return critical_diameter(thickness, material, v_normal, ble)


def panel_critical_diameter(panel: PanelSpec, material: MaterialRecord, v_normal: float,
                            ble: BleCoefficients = BleCoefficients()) -> float:
    """Critical diameter of a full panel stack at the given normal velocity.

    Honeycomb sandwiches and Whipple shields count as two sheets crossed in
    sequence, the second seeing the attenuated velocity; the honeycomb core
    contributes an equivalent thickness AD_core / rho_face to the rear sheet.
    """
    if v_normal <= 0:
        return math.inf
    first = _wall_critical_diameter(panel.face_thickness, material, v_normal, ble)
    if panel.wall_type == "single_wall":
        return first
    rear_t = panel.face_thickness
    if panel.wall_type == "honeycomb":
        rear_t = panel.face_thickness + (panel.hc_areal_density or 0.0) / material.rho_m
    second = _wall_critical_diameter(rear_t, material, v_normal * ble.velocity_attenuation, ble)
    return max(first, second)


def panel_wall_count(panel: PanelSpec) -> int:
    return 1 if panel.wall_type == "single_wall" else 2


# ---------------------------------------------------------------------------
# Geometry: facing panels and vulnerable zones

def _dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _convex_hull(points):
    """Monotone-chain convex hull (CCW).  Returns [] for degenerate input."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return []

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) >= 3 else []


def _clip_halfplane(poly, axis: int, bound: float, keep_below: bool):
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        fa = a[axis] - bound
        fb = b[axis] - bound
        if keep_below:
            ina, inb = fa <= 0, fb <= 0
        else:
            ina, inb = fa >= 0, fb >= 0
        if ina:
            out.append(a)
        if ina != inb:
            t = fa / (fa - fb)
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return out


def _clip_rect(poly, half_l: float, half_w: float):
    """Sutherland-Hodgman clip of a convex polygon to an origin-centered rect."""
    for axis, bound, below in ((0, half_l, True), (0, -half_l, False),
                               (1, half_w, True), (1, -half_w, False)):
        poly = _clip_halfplane(poly, axis, bound, below)
        if len(poly) < 3:
            return []
    return poly


def _poly_area(poly) -> float:
    area = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0


def _bbox(poly):
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    return min(xs), min(ys), max(xs), max(ys)


def facing_panel(config: SpacecraftConfig, direction) -> tuple[PanelSpec, float]:
    """Panel most aligned with the arrival direction and its cosine."""
    best, best_cos = None, -2.0
    for panel in sorted(config.panels.values(), key=lambda p: p.id):
        c = _dot(direction, panel.normal())
        if c > best_cos:
            best, best_cos = panel, c
    return best, best_cos


def _project_hull(config: SpacecraftConfig, node: ComponentNode,
                  panel_frame, direction) -> list:
    """CCW hull of the component's bounding box projected onto the panel
    plane along the arrival direction, in panel (u, v) coordinates."""
    center, u, v, n = panel_frame
    un = _dot(direction, n)
    if un <= 1e-9:
        return []
    lo, hi = config.component_aabb(node)
    cn = _dot(center, n)
    pts = []
    for corner in ((lo[0], lo[1], lo[2]), (lo[0], lo[1], hi[2]), (lo[0], hi[1], lo[2]),
                   (lo[0], hi[1], hi[2]), (hi[0], lo[1], lo[2]), (hi[0], lo[1], hi[2]),
                   (hi[0], hi[1], lo[2]), (hi[0], hi[1], hi[2])):
        s = (cn - _dot(corner, n)) / un
        q = (corner[0] + s * direction[0] - center[0],
             corner[1] + s * direction[1] - center[1],
             corner[2] + s * direction[2] - center[2])
        pts.append((_dot(q, u), _dot(q, v)))
    return _convex_hull(pts)


def _depth_along(config: SpacecraftConfig, node: ComponentNode, panel_frame, direction) -> float:
    center, _, _, n = panel_frame
    un = _dot(direction, n)
    c = config.component_center(node)
    return (_dot(center, n) - _dot(c, n)) / un


@dataclass(frozen=True)
class VulnerableZone:
    area: float
    occlusion_fraction: float

    @property
    def exposed_area(self) -> float:
        return self.area * (1.0 - self.occlusion_fraction)


def vulnerable_zone(config: SpacecraftConfig, component: ComponentNode,
                    panel: PanelSpec, direction, occluders=None) -> VulnerableZone:
    """Project a component onto a panel along an arrival direction.

    Returns the zone area clipped to the panel rectangle and the fraction of
    it shadowed by components sitting closer to the panel along the same
    direction.  Back-facing directions give an empty zone.
    """
    frame = config.panel_frame(panel)
    hull = _project_hull(config, component, frame, direction)
    zone = _clip_rect(hull, panel.l / 2.0, panel.w / 2.0)
    zone_area = _poly_area(zone)
    if zone_area <= 0.0:
        return VulnerableZone(0.0, 0.0)
    if occluders is None:
        occluders = [n for n in config.placeable_components() if n.uid != component.uid]
    depth = _depth_along(config, component, frame, direction)
    zx0, zy0, zx1, zy1 = _bbox(zone)
    shadows = []
    for other in occluders:
        if other.uid == component.uid:
            continue
        if _depth_along(config, other, frame, direction) >= depth - 1e-12:
            continue
        poly = _project_hull(config, other, frame, direction)
        if not poly:
            continue
        ox0, oy0, ox1, oy1 = _bbox(poly)
        if ox1 <= zx0 or ox0 >= zx1 or oy1 <= zy0 or oy0 >= zy1:
            continue
        shadows.append(Polygon(poly))
    if not shadows:
        return VulnerableZone(zone_area, 0.0)
    shadow = unary_union(shadows).intersection(Polygon(zone))
    frac = min(max(shadow.area / zone_area, 0.0), 1.0)
    return VulnerableZone(zone_area, frac)


# ---------------------------------------------------------------------------
# Penetration probabilities

def panel_penetration_probability(panel: PanelSpec, db: MaterialDatabase,
                                  env: DebrisEnvironment, lifetime: float,
                                  ble: BleCoefficients = BleCoefficients()) -> PenetrationResult:
    """Expected penetrations of one external panel over the mission."""
    material = db.lookup(panel.material)
    n = panel.normal()
    expected = 0.0
    for el in env:
        cos_theta = _dot(el.direction(), n)
        if cos_theta <= 0.0 or el.flux == 0.0:
            continue
        d_c = panel_critical_diameter(panel, material, el.velocity * cos_theta, ble)
        if el.diameter >= d_c:
            expected += el.flux * panel.area * cos_theta * lifetime
    return PenetrationResult(target_id=str(panel.id), expected_penetrations=expected)


def component_penetration_probability(component: ComponentNode, config: SpacecraftConfig,
                                      env: DebrisEnvironment, lifetime: float,
                                      ble: BleCoefficients = BleCoefficients(),
                                      db: MaterialDatabase | None = None,
                                      _zone_cache: dict | None = None) -> PenetrationResult:
    """Expected penetrations of an internal component through the structure.

    A particle counts when it defeats the facing panel stack and then, at the
    attenuation-reduced velocity, the component's own wall; its flux acts on
    the component's vulnerable zone reduced by mutual shielding.
    """
    if db is None:
        raise InvariantError("component penetration needs the material database")
    comp_mat = db.lookup(component.material)
    expected = 0.0
    for el in env:
        if el.flux == 0.0:
            continue
        direction = el.direction()
        key = (el.azimuth, el.elevation, component.uid)
        if _zone_cache is not None and key in _zone_cache:
            panel, cos_theta, zone = _zone_cache[key]
        else:
            panel, cos_theta = facing_panel(config, direction)
            zone = (vulnerable_zone(config, component, panel, direction)
                    if cos_theta > 0.0 else VulnerableZone(0.0, 0.0))
            if _zone_cache is not None:
                _zone_cache[key] = (panel, cos_theta, zone)
        if cos_theta <= 0.0 or zone.exposed_area <= 0.0:
            continue
        v_n = el.velocity * cos_theta
        panel_mat = db.lookup(panel.material)
        d_outer = panel_critical_diameter(panel, panel_mat, v_n, ble)
        if el.diameter < d_outer:
            continue
        v_inner = v_n * ble.velocity_attenuation ** panel_wall_count(panel)
        d_inner = _wall_critical_diameter(component.wall_thickness, comp_mat, v_inner, ble)
        if el.diameter < d_inner:
            continue
        expected += el.flux * zone.exposed_area * lifetime
    return PenetrationResult(target_id=component.uid, expected_penetrations=expected)


def analyze_survivability(config: SpacecraftConfig, db: MaterialDatabase,
                          env: DebrisEnvironment, lifetime: float,
                          ble: BleCoefficients = BleCoefficients()):
    """Penetration results for all panels and all internal components.

    Sub-components are covered by their containers and get no entry of their
    own.  Returns (panel_results, component_results).
    """
    zone_cache: dict = {}
    panel_results = [
        panel_penetration_probability(p, db, env, lifetime, ble)
        for p in sorted(config.panels.values(), key=lambda p: p.id)
    ]
    component_results = [
        component_penetration_probability(node, config, env, lifetime, ble, db=db,
                                          _zone_cache=zone_cache)
        for node in sorted(config.placeable_components(), key=lambda n: (n.id, n.instance))
    ]
    return panel_results, component_results


def compute_pnp(results, mode: str = "sum") -> float:
    """Probability of no penetration of the whole configuration.

    The default combines components as PNP = 1 - sum(P_j), clamped to [0, 1]
    with a diagnostic when clamping fires; ``mode="product"`` uses the
    product of the individual survival probabilities instead.
    """
    results = list(results)
    if not results:
        raise EmptyInput("no component penetration results")
    probs = [r.probability if isinstance(r, PenetrationResult) else float(r) for r in results]
    if mode == "product":
        pnp = 1.0
        for p in probs:
            pnp *= 1.0 - p
        return pnp
    if mode != "sum":
        raise InvariantError(f"unknown PNP mode {mode!r}")
    pnp = 1.0 - sum(probs)
    if pnp < 0.0:
        warnings.warn("summed penetration probabilities exceed 1; PNP clamped to 0",
                      stacklevel=2)
        return 0.0
    return min(pnp, 1.0)
