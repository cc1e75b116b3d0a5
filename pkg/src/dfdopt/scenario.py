"""Scenario files: one INI-style file describes a complete study.

Sections:

  [mission]        mission design parameters, entry state, event altitudes
  [data]           data file names (materials, batteries, atmosphere, flux)
  [parent]         parent structure (explicit dims or mass + avg_density)
  [solar_panel]    optional solar arrays
  [panel.<Role>]   the six external panels (RAM, Trail, Earth, Space, Left, Right)
  [component.<N>]  internal components and sub-components
  [optimize.<N>]   per-component optimization variables (options: / bounds:)
  [ga]             population, generations, operator rates, seed
  [ble]            optional ballistic-limit coefficient overrides
  [placement]      optional grid resolution
  [demise]         optional integration step

Relative data paths resolve against $DFD_DATA_ROOT when set, then the
scenario's own directory, then the data files bundled with the package.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import os
from dataclasses import dataclass, field, fields as dc_fields, replace
from pathlib import Path

from . import config as cfgmod
from .config import SpacecraftConfig, config_from_parser
from .constraints import BatteryDesignParams, RwDesignParams, TankDesignParams
from .demise import (
    Atmosphere,
    FlightCache,
    ReentryEvents,
    TrajectoryState,
    DEFAULT_BREAKUP_ALTITUDE,
    DEFAULT_SOLAR_DETACH_ALTITUDE,
)
from .errors import DfdError, ParseError
from .materials import (
    BatteryCatalogue,
    MaterialDatabase,
    load_battery_catalogue,
    load_materials,
    packaged_data,
)
from .optimizer import VARIABLE_ORDER, GaParams, GeneSpec
from .survivability import BleCoefficients, DebrisEnvironment, load_flux_table

DATA_ROOT_ENV = "DFD_DATA_ROOT"

_DEFAULT_DATA = {
    "materials": "materials.csv",
    "batteries": "batteries.csv",
    "atmosphere": "atmosphere.csv",
    "flux": "flux_sso802.csv",
}


@dataclass(frozen=True)
class MissionParams:
    lifetime_years: float
    entry: TrajectoryState
    events: ReentryEvents
    tank: TankDesignParams | None
    rw: RwDesignParams | None
    battery: BatteryDesignParams | None
    orbit_altitude_km: float | None = None
    orbit_inclination_deg: float | None = None


@dataclass
class Scenario:
    """Everything needed to evaluate or optimize one study."""

    path: Path
    db: MaterialDatabase
    catalogue: BatteryCatalogue
    baseline: SpacecraftConfig
    env: DebrisEnvironment
    atmosphere: Atmosphere
    mission: MissionParams
    gene_specs: list[GeneSpec]
    ga: GaParams
    ble: BleCoefficients = field(default_factory=BleCoefficients)
    grid_resolution: float = 0.05
    pnp_mode: str = "sum"
    dt: float = 0.1
    data_digests: dict = field(default_factory=dict)
    overrides: tuple = ()
    parser: configparser.ConfigParser | None = None

    flight_cache: FlightCache = field(default_factory=FlightCache)
    fitness_cache: dict = field(default_factory=dict)

    def gene_bounds(self, component_id: int, variable: str):
        for spec in self.gene_specs:
            if spec.component_id == component_id and spec.variable == variable:
                return spec.bounds
        return None


def _reader(parser: configparser.ConfigParser, section: str):
    sec = parser[section] if section in parser else {}

    def get(key: str, default=None, required: bool = False) -> float | None:
        raw = sec.get(key)
        if raw is None or str(raw).strip() == "":
            if required:
                raise ParseError(f"[{section}]: missing required key {key!r}")
            return default
        try:
            return float(raw)
        except ValueError:
            raise ParseError(f"[{section}]: {key} is not a number: {raw!r}") from None

    return get


def _parse_mission(parser: configparser.ConfigParser) -> MissionParams:
    if "mission" not in parser:
        raise ParseError("scenario needs a [mission] section")
    get = _reader(parser, "mission")
    entry = TrajectoryState(
        altitude=get("entry_alt_m", required=True),
        velocity=get("entry_velocity_ms", required=True),
        flight_path_angle=math.radians(get("entry_fpa_deg", 0.0)),
        longitude=math.radians(get("entry_lon_deg", 0.0)),
        latitude=math.radians(get("entry_lat_deg", 0.0)),
        heading=math.radians(get("entry_heading_deg", 0.0)),
    )
    events = ReentryEvents(
        breakup_altitude=get("breakup_alt_m", DEFAULT_BREAKUP_ALTITUDE),
        solar_detach_altitude=get("solar_detach_alt_m", DEFAULT_SOLAR_DETACH_ALTITUDE),
    )
    sf = get("sf", 1.5)
    tank = None
    if get("m_f") is not None:
        tank = TankDesignParams(
            m_f=get("m_f", required=True),
            rho_f=get("rho_f", required=True),
            p=get("p_max", required=True),
            sf=get("sf_tank", sf),
            k1=get("k1", required=True),
            ar=get("ar_tank", 1.0),
        )
    rw = None
    if get("h_d") is not None:
        rw = RwDesignParams.from_rpm(
            h_d=get("h_d", required=True),
            omega_max_rpm=get("omega_max_rpm", required=True),
            sf=get("sf_rw", sf),
            ar=get("ar_rw", required=True),
        )
    battery = None
    if get("w_e") is not None:
        battery = BatteryDesignParams(
            w_e=get("w_e", required=True),
            t_e=get("t_e_min", required=True) / 60.0,
            eta=get("eta", 0.9),
            n_b=int(get("n_b", 1)),
        )
    return MissionParams(
        lifetime_years=get("lifetime_years", required=True),
        entry=entry, events=events, tank=tank, rw=rw, battery=battery,
        orbit_altitude_km=get("orbit_alt_km"),
        orbit_inclination_deg=get("orbit_inclination_deg"),
    )


_ROLE_PARAM_KEYS = {
    "tank": ("tank", "m_f, rho_f, p_max, k1"),
    "reaction_wheel": ("rw", "h_d, omega_max_rpm, ar_rw"),
    "battery_cells": ("battery", "w_e, t_e_min"),
}


def _check_role_params(baseline: SpacecraftConfig, mission: MissionParams) -> None:
    for node in baseline.components:
        entry = _ROLE_PARAM_KEYS.get(node.role)
        if entry and getattr(mission, entry[0]) is None:
            raise ParseError(
                f"component {node.name} has role {node.role!r} but [mission] "
                f"lacks its design parameters ({entry[1]})")


def _resolve_data(name: str, scenario_dir: Path, data_root: str | None) -> Path:
    p = Path(name)
    if p.is_absolute():
        return p
    roots = []
    if data_root:
        roots.append(Path(data_root))
    env_root = os.environ.get(DATA_ROOT_ENV)
    if env_root:
        roots.append(Path(env_root))
    roots.append(scenario_dir)
    for root in roots:
        candidate = root / p
        if candidate.exists():
            return candidate
    return packaged_data(name)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# [optimize.*] parsing

def _split_list(raw: str) -> list[str]:
    return [p.strip() for p in raw.split(",") if p.strip()]


def _parse_gene_value(key: str, raw: str, where: str):
    """Parse one ``<variable> = options: ...`` or ``<variable> = bounds: ...`` line."""
    raw = raw.strip()
    if raw.lower().startswith("options:"):
        return "options", _split_list(raw[len("options:"):])
    if raw.lower().startswith("bounds:"):
        ranges = []
        for part in raw[len("bounds:"):].split(";"):
            pair = _split_list(part)
            if len(pair) != 2:
                raise ParseError(f"{where}: {key} bounds need 'lo, hi' pairs")
            try:
                ranges.append((float(pair[0]), float(pair[1])))
            except ValueError:
                raise ParseError(f"{where}: {key} bounds are not numbers") from None
        return "bounds", ranges
    raise ParseError(f"{where}: {key} must start with 'options:' or 'bounds:'")


_POSITION_NAMES = ("pos_x", "pos_y", "pos_z")


def _gene_specs_for(name: str, comp_id: int, section, db: MaterialDatabase,
                    where: str) -> list[GeneSpec]:
    out: list[GeneSpec] = []

    def add(variable, options=None, bounds=None):
        out.append(GeneSpec(component_id=comp_id, variable=variable,
                            options=tuple(options) if options is not None else None,
                            bounds=tuple(bounds) if bounds is not None else None,
                            label=f"{name}.{variable}"))

    for key, raw in section.items():
        key_l = key.strip().lower()
        kind, payload = _parse_gene_value(key, raw, where)
        if key_l == "position":
            if kind != "bounds":
                raise ParseError(f"{where}: position takes bounds")
            for axis_name, rng in zip(_POSITION_NAMES, payload):
                add(axis_name, bounds=rng)
        elif key_l in ("thickness", "size"):
            if kind == "bounds":
                if len(payload) != 1:
                    raise ParseError(f"{where}: {key} takes one bounds pair")
                add(key_l, bounds=payload[0])
            else:
                # discrete levels are allowed (coarse desk studies)
                try:
                    add(key_l, options=[float(v) for v in payload])
                except ValueError:
                    raise ParseError(f"{where}: {key} options must be numbers") from None
        elif key_l == "material":
            if kind != "options":
                raise ParseError(f"{where}: material takes options")
            for m in payload:
                db.lookup(m)   # fail early on unknown names
            add("material", options=payload)
        elif key_l == "shape":
            if kind != "options":
                raise ParseError(f"{where}: shape takes options")
            shapes = [cfgmod._SHAPE_ALIASES.get(s.lower()) for s in payload]
            if None in shapes:
                raise ParseError(f"{where}: unknown shape option in {payload}")
            add("shape", options=shapes)
        elif key_l == "shielding":
            if kind != "options":
                raise ParseError(f"{where}: shielding takes options")
            walls = [cfgmod._WALL_ALIASES.get(s.lower()) for s in payload]
            if None in walls:
                raise ParseError(f"{where}: unknown wall type in {payload}")
            add("shielding", options=walls)
        elif key_l in ("quantity", "catalogue", "parent"):
            if kind != "options":
                raise ParseError(f"{where}: {key} takes options")
            values = []
            for v in payload:
                if key_l == "parent" and v in cfgmod.PANEL_ID_BY_ROLE:
                    values.append(cfgmod.PANEL_ID_BY_ROLE[v])
                else:
                    try:
                        values.append(int(v))
                    except ValueError:
                        raise ParseError(f"{where}: {key} option {v!r} is not an integer") from None
            add(key_l, options=values)
        elif key_l == "orientation":
            if kind != "options":
                raise ParseError(f"{where}: orientation takes options")
            for axis in payload:
                for part in axis.split("/"):
                    if part not in cfgmod.AXIS_VECTORS:
                        raise ParseError(f"{where}: unknown orientation axis {part!r}")
            add("orientation", options=payload)
        else:
            raise ParseError(f"{where}: unknown optimization variable {key!r}")
    return out


def _parse_gene_specs(parser: configparser.ConfigParser, baseline: SpacecraftConfig,
                      db: MaterialDatabase) -> list[GeneSpec]:
    by_name = {node.name: node.id for node in baseline.components}
    specs: list[GeneSpec] = []
    for section in parser.sections():
        if not section.startswith("optimize."):
            continue
        name = section.split(".", 1)[1]
        if name in cfgmod.PANEL_ID_BY_ROLE:
            comp_id = cfgmod.PANEL_ID_BY_ROLE[name]
        elif name in by_name:
            comp_id = by_name[name]
        else:
            raise ParseError(f"[{section}]: no component or panel named {name!r}")
        specs.extend(_gene_specs_for(name, comp_id, parser[section], db, f"[{section}]"))
    specs.sort(key=lambda s: (s.component_id, VARIABLE_ORDER.index(s.variable)))
    return specs


def _parse_ga(parser: configparser.ConfigParser) -> GaParams:
    get = _reader(parser, "ga")
    return GaParams(
        population_size=int(get("pop", 80)),
        generations=int(get("gens", 60)),
        p_crossover=get("pc", 0.95),
        p_mutation=get("pm", 0.01),
        eta_c=get("eta_c", 20.0),
        eta_m=get("eta_m", 20.0),
        seed=int(get("seed", 1)),
    )


def _parse_ble(parser: configparser.ConfigParser) -> BleCoefficients:
    ble = BleCoefficients()
    if "ble" not in parser:
        return ble
    get = _reader(parser, "ble")
    updates = {}
    for f in dc_fields(BleCoefficients):
        value = get(f.name)
        if value is not None:
            updates[f.name] = value
    return replace(ble, **updates)


def apply_overrides(parser: configparser.ConfigParser, overrides) -> None:
    """Apply ``section.key=value`` strings on top of the parsed file."""
    for item in overrides or ():
        if "=" not in item:
            raise ParseError(f"override {item!r} is not of the form section.key=value")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ParseError(f"override {item!r} needs a section-qualified key")
        section, key = target.rsplit(".", 1)
        section, key, value = section.strip(), key.strip(), value.strip()
        if section not in parser:
            parser.add_section(section)
        parser[section][key] = value


def load_scenario(path: str | Path, data_root: str | None = None,
                  overrides=()) -> Scenario:
    """Load, validate and assemble a scenario file."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as f:
            parser.read_file(f)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc
    apply_overrides(parser, overrides)

    data_section = parser["data"] if "data" in parser else {}
    digests = {"scenario": _sha256(path)}
    paths = {}
    for kind, default_name in _DEFAULT_DATA.items():
        name = data_section.get(kind, default_name)
        resolved = _resolve_data(name, path.parent, data_root)
        if not resolved.exists():
            raise ParseError(f"data file for {kind!r} not found: {name}")
        paths[kind] = resolved
        digests[kind] = _sha256(resolved)

    db = load_materials(paths["materials"])
    catalogue = load_battery_catalogue(paths["batteries"])
    atmosphere = Atmosphere.from_csv(paths["atmosphere"])
    env = load_flux_table(paths["flux"])
    baseline = config_from_parser(parser, db)
    mission = _parse_mission(parser)
    _check_role_params(baseline, mission)
    gene_specs = _parse_gene_specs(parser, baseline, db)
    ga = _parse_ga(parser)
    ble = _parse_ble(parser)

    get_pl = _reader(parser, "placement")
    get_dm = _reader(parser, "demise")
    pnp_mode = "sum"
    if "survivability" in parser:
        pnp_mode = parser["survivability"].get("pnp_mode", "sum").strip()

    return Scenario(
        path=path, db=db, catalogue=catalogue, baseline=baseline, env=env,
        atmosphere=atmosphere, mission=mission, gene_specs=gene_specs, ga=ga,
        ble=ble, grid_resolution=get_pl("grid_resolution", 0.05) or 0.05,
        pnp_mode=pnp_mode, dt=get_dm("dt", 0.1) or 0.1,
        data_digests=digests, overrides=tuple(overrides or ()), parser=parser,
    )


def validate_scenario(path: str | Path, data_root: str | None = None,
                      overrides=()) -> list[str]:
    """Collect every problem found while loading a scenario; empty = clean."""
    problems: list[str] = []
    try:
        scenario = load_scenario(path, data_root=data_root, overrides=overrides)
    except DfdError as exc:
        problems.append(str(exc))
        return problems
    problems.extend(scenario.db.warnings)
    return problems


# ---------------------------------------------------------------------------
# Config dumps (each optimized solution is written back as a loadable scenario)

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: SpacecraftConfig, scenario: Scenario, path: str | Path) -> None:
    """Write a decoded configuration as a standalone fixed scenario file."""
    out = configparser.ConfigParser(interpolation=None)
    out.optionxform = str
    if scenario.parser is not None:
        for section in scenario.parser.sections():
            if section.startswith(("optimize.", "parent", "solar_panel", "panel.",
                                   "component.")):
                continue
            out.add_section(section)
            for key, value in scenario.parser[section].items():
                out[section][key] = value

    out.add_section("parent")
    p = cfg.parent
    out["parent"].update({
        "mass": _fmt(p.aero_mass), "material": p.material,
        "thickness": _fmt(p.wall_thickness),
        "l": _fmt(p.shape.l), "w": _fmt(p.shape.w), "h": _fmt(p.shape.h),
        "t_init": _fmt(p.t_init),
    })
    if cfg.solar is not None:
        out.add_section("solar_panel")
        s = cfg.solar
        out["solar_panel"].update({"l": _fmt(s.l), "w": _fmt(s.w), "mass": _fmt(s.mass),
                                   "quantity": str(s.quantity)})
        if s.detach_altitude is not None:
            out["solar_panel"]["detach_alt_m"] = _fmt(s.detach_altitude)

    for role in cfgmod.PANEL_ROLES:
        panel = cfg.panels[role]
        section = f"panel.{role}"
        out.add_section(section)
        out[section].update({
            "type": panel.wall_type, "material": panel.material,
            "thickness": _fmt(panel.face_thickness),
            "l": _fmt(panel.l), "w": _fmt(panel.w), "t_init": _fmt(panel.t_init),
        })
        if panel.hc_thickness is not None:
            out[section]["s_hc"] = _fmt(panel.hc_thickness)
            out[section]["ad_hc"] = _fmt(panel.hc_areal_density)

    for node in cfg.components:
        section = f"component.{node.name}" + (f"_{node.instance}" if node.instance else "")
        out.add_section(section)
        sec = out[section]
        sec["id"] = str(node.id)
        if node.instance:
            sec["instance"] = node.instance
        sec["parent"] = str(node.parent_id)
        sec["shape"] = node.shape.kind
        for key, value in zip(("l", "w", "h"), node.shape.dims()):
            if node.shape.kind == "cylinder" and key == "w":
                sec["r"] = _fmt(value)
            elif node.shape.kind == "sphere" and key == "l":
                sec["r"] = _fmt(value)
            else:
                sec[key] = _fmt(value)
        sec["material"] = node.material
        if node.wall_thickness is not None:
            sec["thickness"] = _fmt(node.wall_thickness)
        if node.thermal_mass is not None:
            sec["mass"] = _fmt(node.thermal_mass)
        if node.aero_mass is not None:
            sec["aero_mass"] = _fmt(node.aero_mass)
        sec["t_init"] = _fmt(node.t_init)
        sec["quantity"] = str(node.quantity)
        if node.position is not None:
            sec["position"] = ", ".join(_fmt(x) for x in node.position)
        sec["orientation"] = f"{node.orientation.axis1}, {node.orientation.axis2}"
        sec["role"] = node.role

    with open(path, "w") as f:
        out.write(f)
