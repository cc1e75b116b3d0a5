"""Hierarchical spacecraft configuration.

The configuration has four levels: the parent structure (id 0), six external
panels (ids 2-7), internal components (free-floating in the parent frame or
attached to a panel), and sub-components contained inside other components.

Body frame: x along the parent length and the flight direction, y along the
width, z along the height.  Panel normals point outward:

    RAM +x, Trail -x, Left +y, Right -y, Space +z, Earth -z

Attached components use a panel-centered 2D frame; its in-plane axes (u, v)
map to body axes as follows: RAM/Trail panels u=y, v=z; Left/Right panels
u=x, v=z; Earth/Space panels u=x, v=y.  Positions are meters, SI throughout.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import (
    BrokenHierarchy,
    DomainError,
    InvariantError,
    MissingData,
    ParseError,
    UnknownMaterial,
)
from .materials import MaterialDatabase

PANEL_ROLES = ("RAM", "Trail", "Earth", "Space", "Left", "Right")
PANEL_ID_BY_ROLE = {"RAM": 2, "Trail": 3, "Earth": 4, "Space": 5, "Left": 6, "Right": 7}
PANEL_ROLE_BY_ID = {v: k for k, v in PANEL_ID_BY_ROLE.items()}

AXIS_VECTORS = {
    "RAM": (1.0, 0.0, 0.0),
    "Trail": (-1.0, 0.0, 0.0),
    "Left": (0.0, 1.0, 0.0),
    "Right": (0.0, -1.0, 0.0),
    "Space": (0.0, 0.0, 1.0),
    "Earth": (0.0, 0.0, -1.0),
}

# In-plane axes of each panel's 2D frame, as body-frame direction names.
PANEL_PLANE_AXES = {
    "RAM": ("Left", "Space"),
    "Trail": ("Left", "Space"),
    "Left": ("RAM", "Space"),
    "Right": ("RAM", "Space"),
    "Earth": ("RAM", "Left"),
    "Space": ("RAM", "Left"),
}

WALL_TYPES = ("single_wall", "honeycomb", "whipple")
_WALL_ALIASES = {
    "fp": "single_wall", "sw": "single_wall", "single": "single_wall",
    "single_wall": "single_wall", "singlewall": "single_wall",
    "hc-sp": "honeycomb", "hcsp": "honeycomb", "honeycomb": "honeycomb",
    "honeycombsandwich": "honeycomb", "whipple": "whipple",
}


def _axis_index(direction: str) -> int:
    vec = AXIS_VECTORS[direction]
    return max(range(3), key=lambda i: abs(vec[i]))


# ---------------------------------------------------------------------------
# Primitive shapes

@dataclass(frozen=True)
class Box:
    l: float
    w: float
    h: float

    kind = "box"

    def volume(self) -> float:
        return self.l * self.w * self.h

    def surface_area(self) -> float:
        return 2.0 * (self.l * self.w + self.l * self.h + self.w * self.h)

    def dims(self) -> tuple[float, ...]:
        return (self.l, self.w, self.h)


@dataclass(frozen=True)
class Cylinder:
    l: float
    r: float

    kind = "cylinder"

    def volume(self) -> float:
        return math.pi * self.r ** 2 * self.l

    def surface_area(self) -> float:
        return 2.0 * math.pi * self.r * self.l + 2.0 * math.pi * self.r ** 2

    def dims(self) -> tuple[float, ...]:
        return (self.l, self.r)


@dataclass(frozen=True)
class Sphere:
    r: float

    kind = "sphere"

    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.r ** 3

    def surface_area(self) -> float:
        return 4.0 * math.pi * self.r ** 2

    def dims(self) -> tuple[float, ...]:
        return (self.r,)


@dataclass(frozen=True)
class FlatPlate:
    l: float
    w: float

    kind = "flat_plate"

    def volume(self) -> float:
        return 0.0

    def surface_area(self) -> float:
        # both faces
        return 2.0 * self.l * self.w

    def dims(self) -> tuple[float, ...]:
        return (self.l, self.w)


Shape = Box | Cylinder | Sphere | FlatPlate


def validate_shape(shape: Shape) -> None:
    if any(d <= 0 for d in shape.dims()):
        raise InvariantError(f"{shape.kind} dimensions must be positive: {shape}")


@dataclass(frozen=True)
class Orientation:
    """Axis-aligned orientation: the direction of the length side and, for
    boxes and plates, of the width side.  Spheres ignore it."""

    axis1: str = "RAM"
    axis2: str = "Left"

    def validate(self) -> None:
        if self.axis1 not in AXIS_VECTORS or self.axis2 not in AXIS_VECTORS:
            raise InvariantError(f"unknown orientation axis in {self}")
        if _axis_index(self.axis1) == _axis_index(self.axis2):
            raise InvariantError(f"orientation axes must differ: {self}")


def shape_half_extents(shape: Shape, orientation: Orientation) -> tuple[float, float, float]:
    """Body-frame half extents of the shape's axis-aligned bounding box."""
    he = [0.0, 0.0, 0.0]
    if shape.kind == "sphere":
        return (shape.r, shape.r, shape.r)
    i1 = _axis_index(orientation.axis1)
    if shape.kind == "cylinder":
        for i in range(3):
            he[i] = shape.l / 2.0 if i == i1 else shape.r
        return tuple(he)
    i2 = _axis_index(orientation.axis2)
    i3 = ({0, 1, 2} - {i1, i2}).pop()
    he[i1] = shape.l / 2.0
    he[i2] = shape.w / 2.0
    he[i3] = shape.h / 2.0 if shape.kind == "box" else 0.0
    return tuple(he)


# ---------------------------------------------------------------------------
# Configuration nodes

@dataclass
class ComponentNode:
    """One object in the configuration tree.

    ``parent_id`` 0 means free-floating inside the parent structure (3D
    position, parent frame); 2-7 means attached to that panel (2D position,
    panel frame); any other id means contained in another component (no
    position of its own).
    """

    id: int
    name: str
    parent_id: int
    shape: Shape
    material: str
    wall_thickness: float | None = None
    thermal_mass: float | None = None
    aero_mass: float | None = None
    t_init: float = 300.0
    quantity: int = 1
    position: tuple[float, ...] | None = None
    orientation: Orientation = field(default_factory=Orientation)
    role: str = "generic"      # tank | reaction_wheel | battery_box | battery_cells | generic
    instance: str = ""         # suffix distinguishing expanded multi-instance copies

    @property
    def uid(self) -> str:
        return f"{self.id}{self.instance}"

    def validate(self) -> None:
        validate_shape(self.shape)
        self.orientation.validate()
        if self.quantity < 1:
            raise InvariantError(f"component {self.uid}: quantity must be >= 1")
        if self.t_init <= 0:
            raise InvariantError(f"component {self.uid}: initial temperature must be positive")
        if self.wall_thickness is not None and self.wall_thickness <= 0:
            raise InvariantError(f"component {self.uid}: wall thickness must be positive")
        if self.wall_thickness is None and self.thermal_mass is None:
            raise InvariantError(
                f"component {self.uid}: needs a wall thickness or an explicit mass")

    def half_extents(self) -> tuple[float, float, float]:
        return shape_half_extents(self.shape, self.orientation)


@dataclass
class PanelSpec:
    """One external panel of the parent structure."""

    id: int
    role: str
    wall_type: str            # single_wall | honeycomb | whipple
    face_thickness: float
    material: str
    l: float
    w: float
    hc_thickness: float | None = None       # honeycomb core thickness, m
    hc_areal_density: float | None = None   # honeycomb core areal density, kg/m^2
    t_init: float = 300.0

    def validate(self) -> None:
        if self.role not in PANEL_ROLES:
            raise InvariantError(f"panel {self.id}: unknown role {self.role!r}")
        if self.id != PANEL_ID_BY_ROLE[self.role]:
            raise InvariantError(f"panel {self.role}: id must be {PANEL_ID_BY_ROLE[self.role]}")
        if self.wall_type not in WALL_TYPES:
            raise InvariantError(f"panel {self.role}: unknown wall type {self.wall_type!r}")
        if self.face_thickness <= 0 or self.l <= 0 or self.w <= 0:
            raise InvariantError(f"panel {self.role}: dimensions must be positive")
        if self.wall_type == "honeycomb":
            if not (self.hc_thickness and self.hc_thickness > 0
                    and self.hc_areal_density and self.hc_areal_density > 0):
                raise InvariantError(
                    f"panel {self.role}: honeycomb panels need core thickness and areal density")
        elif self.hc_thickness is not None or self.hc_areal_density is not None:
            raise InvariantError(
                f"panel {self.role}: core parameters only apply to honeycomb panels")

    @property
    def area(self) -> float:
        return self.l * self.w

    def normal(self) -> tuple[float, float, float]:
        return AXIS_VECTORS[self.role]


@dataclass
class SolarArraySpec:
    """Solar panels: flat plates that contribute drag area until released."""

    l: float
    w: float
    mass: float
    quantity: int = 1
    detach_altitude: float | None = None   # m; scenario default applies when None

    def validate(self) -> None:
        if self.l <= 0 or self.w <= 0 or self.mass <= 0 or self.quantity < 1:
            raise InvariantError("solar array dimensions, mass and quantity must be positive")

    @property
    def area(self) -> float:
        return self.l * self.w * self.quantity


@dataclass
class SpacecraftConfig:
    """Validated spacecraft configuration shared by all analyses."""

    parent: ComponentNode
    panels: dict[str, PanelSpec]
    components: list[ComponentNode]
    solar: SolarArraySpec | None = None

    def validate(self, db: MaterialDatabase) -> None:
        if self.parent.id != 0 or self.parent.shape.kind != "box":
            raise BrokenHierarchy("parent must be a box with id 0")
        if set(self.panels) != set(PANEL_ROLES):
            missing = set(PANEL_ROLES) - set(self.panels)
            raise BrokenHierarchy(f"configuration must define all six panels; missing {sorted(missing)}")
        for panel in self.panels.values():
            panel.validate()
            self._require_material(db, panel.material)
        if self.solar is not None:
            self.solar.validate()
        self._require_material(db, self.parent.material)

        ids: dict[int, ComponentNode] = {}
        for node in self.components:
            node.validate()
            self._require_material(db, node.material)
            if node.id in ids and ids[node.id].instance == node.instance:
                raise BrokenHierarchy(f"duplicate component id {node.uid}")
            if node.id == 0:
                raise BrokenHierarchy("component id 0 is reserved for the parent structure")
            ids[node.id] = node

        for node in self.components:
            self._check_parent_chain(node, ids)
            if self.is_free(node):
                if node.position is None or len(node.position) != 3:
                    raise BrokenHierarchy(
                        f"component {node.uid}: free-floating components need a 3D position")
            elif self.is_attached(node):
                if node.position is None or len(node.position) != 2:
                    raise BrokenHierarchy(
                        f"component {node.uid}: attached components need a 2D panel position")

    def _check_parent_chain(self, node: ComponentNode, ids: dict[int, ComponentNode]) -> None:
        # parent references resolve to components first, then to panel ids
        seen = set()
        current = node
        for _ in range(3):
            pid = current.parent_id
            if pid == 0:
                return
            if pid == current.id or pid in seen:
                raise BrokenHierarchy(f"component {node.uid}: cyclic parent chain")
            if pid in ids:
                seen.add(current.id)
                current = ids[pid]
                continue
            if pid in PANEL_ROLE_BY_ID:
                return  # panels hang off the parent
            raise BrokenHierarchy(f"component {node.uid}: parent id {pid} does not exist")
        raise BrokenHierarchy(f"component {node.uid}: parent chain exceeds three levels")

    @staticmethod
    def _require_material(db: MaterialDatabase, name: str) -> None:
        if name not in db:
            raise UnknownMaterial(f"unknown material: {name!r}")

    # --- structural queries -------------------------------------------------

    def is_free(self, node: ComponentNode) -> bool:
        return node.parent_id == 0

    def is_attached(self, node: ComponentNode) -> bool:
        if node.parent_id not in PANEL_ROLE_BY_ID:
            return False
        # a component with that id shadows the panel id
        return all(n.id != node.parent_id for n in self.components)

    def is_subcomponent(self, node: ComponentNode) -> bool:
        return not (self.is_free(node) or self.is_attached(node))

    def placeable_components(self) -> list[ComponentNode]:
        """Components with a position of their own (free or attached)."""
        return [n for n in self.components if not self.is_subcomponent(n)]

    def subcomponents_of(self, node: ComponentNode) -> list[ComponentNode]:
        return [n for n in self.components if n.parent_id == node.id]

    def node_by_uid(self, uid: str) -> ComponentNode:
        for node in self.components:
            if node.uid == uid:
                return node
        raise BrokenHierarchy(f"no component with uid {uid!r}")

    def panel_by_id(self, panel_id: int) -> PanelSpec:
        return self.panels[PANEL_ROLE_BY_ID[panel_id]]

    def clone(self) -> "SpacecraftConfig":
        return SpacecraftConfig(
            parent=replace(self.parent),
            panels={k: replace(v) for k, v in self.panels.items()},
            components=[replace(n) for n in self.components],
            solar=replace(self.solar) if self.solar else None,
        )

    # --- geometry -----------------------------------------------------------

    def parent_half_extents(self) -> tuple[float, float, float]:
        box = self.parent.shape
        return (box.l / 2.0, box.w / 2.0, box.h / 2.0)

    def panel_frame(self, panel: PanelSpec):
        """Return (center, u, v, n) of a panel: 3D face center, in-plane unit
        axes and the outward normal, all in the body frame."""
        he = self.parent_half_extents()
        n = AXIS_VECTORS[panel.role]
        center = tuple(n[i] * he[i] for i in range(3))
        u_name, v_name = PANEL_PLANE_AXES[panel.role]
        return center, AXIS_VECTORS[u_name], AXIS_VECTORS[v_name], n

    def component_center(self, node: ComponentNode) -> tuple[float, float, float]:
        """3D body-frame center of a free or attached component."""
        if self.is_free(node):
            return tuple(node.position)
        if not self.is_attached(node):
            raise BrokenHierarchy(f"component {node.uid} has no position of its own")
        panel = self.panel_by_id(node.parent_id)
        center, u, v, n = self.panel_frame(panel)
        he = node.half_extents()
        depth = sum(abs(n[i]) * he[i] for i in range(3))
        a, b = node.position
        return tuple(center[i] + a * u[i] + b * v[i] - n[i] * depth for i in range(3))

    def component_aabb(self, node: ComponentNode):
        """Axis-aligned bounding box (lo, hi) of a free or attached component."""
        c = self.component_center(node)
        he = node.half_extents()
        return tuple(c[i] - he[i] for i in range(3)), tuple(c[i] + he[i] for i in range(3))


# ---------------------------------------------------------------------------
# Derived quantities

def derive_side_length(m_s: float, rho_bar: float) -> float:
    """Cube side length of a structure of mass ``m_s`` at average density
    ``rho_bar``: L = (m_s / rho_bar)^(1/3)."""
    if m_s <= 0 or rho_bar <= 0:
        raise DomainError("mass and average density must be positive")
    return (m_s / rho_bar) ** (1.0 / 3.0)


def component_mass(node: ComponentNode, db: MaterialDatabase) -> float:
    """Thermal mass of one instance: the explicit mass when given, otherwise
    the shell mass  surface_area * wall_thickness * density."""
    if node.thermal_mass is not None:
        return node.thermal_mass
    if node.wall_thickness is None:
        raise MissingData(f"component {node.uid}: no mass and no wall thickness")
    rec = db.lookup(node.material)
    return node.shape.surface_area() * node.wall_thickness * rec.rho_m


def component_aero_mass(node: ComponentNode, db: MaterialDatabase) -> float:
    """Mass seen by the trajectory; defaults to the thermal mass."""
    if node.aero_mass is not None and node.aero_mass > 0:
        return node.aero_mass
    return component_mass(node, db)


# ---------------------------------------------------------------------------
# Config-file parsing ([parent], [solar_panel], [panel.*], [component.*])

_SHAPE_ALIASES = {
    "box": "box", "cube": "box",
    "cyl": "cylinder", "cyl.": "cylinder", "cylinder": "cylinder",
    "sphere": "sphere",
    "flat_plate": "flat_plate", "flatplate": "flat_plate", "plate": "flat_plate",
}


def _getfloat(section, key: str, where: str, default=None) -> float | None:
    raw = section.get(key)
    if raw is None or raw.strip() == "":
        if default is not None:
            return default
        return None
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"{where}: {key} is not a number: {raw!r}") from None


def _require(section, key: str, where: str) -> str:
    raw = section.get(key)
    if raw is None or raw.strip() == "":
        raise ParseError(f"{where}: missing required key {key!r}")
    return raw.strip()


def parse_shape(section, where: str) -> Shape:
    kind = _SHAPE_ALIASES.get(_require(section, "shape", where).lower())
    if kind is None:
        raise ParseError(f"{where}: unknown shape {section.get('shape')!r}")
    if kind == "box":
        return Box(_getfloat(section, "l", where) or _missing(where, "l"),
                   _getfloat(section, "w", where) or _missing(where, "w"),
                   _getfloat(section, "h", where) or _missing(where, "h"))
    if kind == "cylinder":
        return Cylinder(_getfloat(section, "l", where) or _missing(where, "l"),
                        _getfloat(section, "r", where) or _missing(where, "r"))
    if kind == "sphere":
        return Sphere(_getfloat(section, "r", where) or _missing(where, "r"))
    return FlatPlate(_getfloat(section, "l", where) or _missing(where, "l"),
                     _getfloat(section, "w", where) or _missing(where, "w"))


def _missing(where: str, key: str):
    raise ParseError(f"{where}: missing shape dimension {key!r}")


def _parse_position(raw: str | None, where: str) -> tuple[float, ...] | None:
    if raw is None or raw.strip() == "":
        return None
    try:
        values = tuple(float(p) for p in raw.replace(";", ",").split(","))
    except ValueError:
        raise ParseError(f"{where}: position is not a list of numbers: {raw!r}") from None
    if len(values) not in (2, 3):
        raise ParseError(f"{where}: position must have 2 or 3 coordinates")
    return values


def _parse_orientation(raw: str | None, where: str) -> Orientation:
    if raw is None or raw.strip() == "":
        return Orientation()
    parts = [p.strip() for p in raw.strip("() ").split(",") if p.strip()]
    for p in parts:
        if p not in AXIS_VECTORS:
            raise ParseError(f"{where}: unknown orientation axis {p!r}")
    if len(parts) == 1:
        axis2 = next(a for a in ("Left", "RAM") if _axis_index(a) != _axis_index(parts[0]))
        return Orientation(parts[0], axis2)
    if len(parts) == 2:
        return Orientation(parts[0], parts[1])
    raise ParseError(f"{where}: orientation takes one or two axes")


def parse_parent(section) -> ComponentNode:
    where = "[parent]"
    mass = _getfloat(section, "mass", where)
    if mass is None:
        raise ParseError(f"{where}: missing required key 'mass'")
    if "l" in section:
        shape = Box(_getfloat(section, "l", where), _getfloat(section, "w", where),
                    _getfloat(section, "h", where))
    else:
        rho_bar = _getfloat(section, "avg_density", where)
        if rho_bar is None:
            raise ParseError(f"{where}: give l/w/h or avg_density to size the structure")
        side = derive_side_length(mass, rho_bar)
        shape = Box(side, side, side)
    return ComponentNode(
        id=0, name="Parent", parent_id=0, shape=shape,
        material=_require(section, "material", where),
        wall_thickness=_getfloat(section, "thickness", where),
        aero_mass=mass,
        thermal_mass=None,
        t_init=_getfloat(section, "t_init", where, default=300.0),
    )


def parse_solar(section) -> SolarArraySpec:
    where = "[solar_panel]"
    return SolarArraySpec(
        l=_getfloat(section, "l", where) or _missing(where, "l"),
        w=_getfloat(section, "w", where) or _missing(where, "w"),
        mass=_getfloat(section, "mass", where) or _missing(where, "mass"),
        quantity=int(_getfloat(section, "quantity", where, default=1.0)),
        detach_altitude=_getfloat(section, "detach_alt_m", where),
    )


def parse_panel(role: str, section, parent_box: Box) -> PanelSpec:
    where = f"[panel.{role}]"
    if role not in PANEL_ROLES:
        raise ParseError(f"{where}: unknown panel role")
    wall_raw = section.get("type", "single_wall").strip().lower()
    wall_type = _WALL_ALIASES.get(wall_raw)
    if wall_type is None:
        raise ParseError(f"{where}: unknown wall type {wall_raw!r}")
    default_l, default_w = _default_panel_dims(role, parent_box)
    return PanelSpec(
        id=PANEL_ID_BY_ROLE[role],
        role=role,
        wall_type=wall_type,
        face_thickness=_getfloat(section, "thickness", where) or _missing(where, "thickness"),
        material=_require(section, "material", where),
        l=_getfloat(section, "l", where, default=default_l),
        w=_getfloat(section, "w", where, default=default_w),
        hc_thickness=_getfloat(section, "s_hc", where),
        hc_areal_density=_getfloat(section, "ad_hc", where),
        t_init=_getfloat(section, "t_init", where, default=300.0),
    )


def _default_panel_dims(role: str, box: Box) -> tuple[float, float]:
    u_name, v_name = PANEL_PLANE_AXES[role]
    dims = (box.l, box.w, box.h)
    return dims[_axis_index(u_name)], dims[_axis_index(v_name)]


def parse_component(name: str, section) -> ComponentNode:
    where = f"[component.{name}]"
    raw_id = _require(section, "id", where)
    try:
        comp_id = int(raw_id)
    except ValueError:
        raise ParseError(f"{where}: id is not an integer: {raw_id!r}") from None
    parent_raw = section.get("parent", "0").strip()
    if parent_raw in PANEL_ID_BY_ROLE:
        parent_id = PANEL_ID_BY_ROLE[parent_raw]
    else:
        try:
            parent_id = int(parent_raw)
        except ValueError:
            raise ParseError(f"{where}: parent is not an id or panel role: {parent_raw!r}") from None
    aero = _getfloat(section, "aero_mass", where)
    if aero is not None and aero <= 0:
        aero = None
    return ComponentNode(
        id=comp_id,
        name=name,
        parent_id=parent_id,
        shape=parse_shape(section, where),
        material=_require(section, "material", where),
        wall_thickness=_getfloat(section, "thickness", where),
        thermal_mass=_getfloat(section, "mass", where),
        aero_mass=aero,
        t_init=_getfloat(section, "t_init", where, default=300.0),
        quantity=int(_getfloat(section, "quantity", where, default=1.0)),
        position=_parse_position(section.get("position"), where),
        orientation=_parse_orientation(section.get("orientation"), where),
        role=section.get("role", "generic").strip().lower(),
        instance=section.get("instance", "").strip(),
    )


def config_from_parser(parser: configparser.ConfigParser, db: MaterialDatabase) -> SpacecraftConfig:
    if "parent" not in parser:
        raise ParseError("configuration needs a [parent] section")
    parent = parse_parent(parser["parent"])
    solar = parse_solar(parser["solar_panel"]) if "solar_panel" in parser else None
    panels = {}
    components = []
    for section in parser.sections():
        if section.startswith("panel."):
            role = section.split(".", 1)[1]
            panels[role] = parse_panel(role, parser[section], parent.shape)
        elif section.startswith("component."):
            components.append(parse_component(section.split(".", 1)[1], parser[section]))
    cfg = SpacecraftConfig(parent=parent, panels=panels, components=components, solar=solar)
    cfg.validate(db)
    return cfg


def load_config(path: str | Path, db: MaterialDatabase) -> SpacecraftConfig:
    """Load and validate a spacecraft configuration from a scenario file."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as f:
            parser.read_file(f)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return config_from_parser(parser, db)
