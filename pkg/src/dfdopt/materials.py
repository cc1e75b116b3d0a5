"""Material database and battery-cell catalogue.

Thermo-physical properties (density, melting point, heat of fusion, specific
heat, emissivity) feed the ablation model; strength and impact properties
(yield/ultimate strength, Brinell hardness, sound speed) feed the vessel
sizing checks and the ballistic-limit equations.  Both databases are loaded
once from CSV and are immutable afterwards, so they can be shared freely
between optimization workers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .errors import DuplicateId, DuplicateName, InvariantError, NotFound, ParseError

MATERIALS_CSV_HEADER = ["name", "rho", "hb", "tm", "hf", "cm", "eps", "c", "sigma_y", "sigma_u", "nu"]
BATTERIES_CSV_HEADER = ["id", "mass", "shape", "l", "w", "h", "diameter"]

# Poisson ratio assumed for metals when the database row leaves it blank.
DEFAULT_POISSON_RATIO = 0.33

# Heats of fusion this low almost certainly mean a bad row; load verbatim but warn.
SUSPICIOUS_HEAT_OF_FUSION = 1000.0  # J/kg

# Alternate spellings that must resolve to the canonical database rows.
_NAME_ALIASES = {
    "ti6al4v": "titanium6al4v",
    "ti-6al4v": "titanium6al4v",
    "aisi-316": "aisi316",
    "aisi-304": "aisi304",
}


def _norm(name: str) -> str:
    key = name.strip().lower().replace(" ", "").replace("-", "")
    return _NAME_ALIASES.get(key, key)


@dataclass(frozen=True)
class MaterialRecord:
    """One row of the material database (SI units throughout)."""

    name: str
    rho_m: float            # density, kg/m^3
    t_m: float              # melting temperature, K
    h_f: float              # heat of fusion, J/kg
    c_m: float              # specific heat capacity, J/(kg K)
    epsilon: float          # emissivity, (0, 1]
    sigma_y: float          # yield strength, Pa
    hb: float | None = None         # Brinell hardness (impact analysis only)
    c_sound: float | None = None    # speed of sound, m/s (impact analysis only)
    sigma_u: float | None = None    # ultimate strength, Pa
    nu: float | None = None        # Poisson ratio

    def validate(self) -> None:
        for attr in ("rho_m", "t_m", "h_f", "c_m", "sigma_y"):
            if not getattr(self, attr) > 0:
                raise InvariantError(f"{self.name}: {attr} must be positive")
        if not 0 < self.epsilon <= 1:
            raise InvariantError(f"{self.name}: emissivity must be in (0, 1], got {self.epsilon}")
        if self.hb is not None and self.hb <= 0:
            raise InvariantError(f"{self.name}: Brinell hardness must be positive")
        if self.c_sound is not None and self.c_sound <= 0:
            raise InvariantError(f"{self.name}: sound speed must be positive")
        if self.sigma_u is not None and self.sigma_u < self.sigma_y:
            raise InvariantError(f"{self.name}: ultimate strength below yield strength")
        if self.nu is not None and not 0 < self.nu < 0.5:
            raise InvariantError(f"{self.name}: Poisson ratio must be in (0, 0.5)")

    @property
    def sigma_u_eff(self) -> float:
        """Ultimate strength; falls back to yield strength (conservative)."""
        return self.sigma_u if self.sigma_u is not None else self.sigma_y

    @property
    def nu_eff(self) -> float:
        return self.nu if self.nu is not None else DEFAULT_POISSON_RATIO

    @property
    def has_impact_data(self) -> bool:
        return self.hb is not None and self.c_sound is not None


class MaterialDatabase:
    """Immutable name-indexed collection of material records."""

    def __init__(self, records: list[MaterialRecord], warnings: list[str] | None = None):
        self._by_key: dict[str, MaterialRecord] = {}
        self.warnings = list(warnings or [])
        for rec in records:
            rec.validate()
            key = _norm(rec.name)
            if key in self._by_key:
                raise DuplicateName(f"duplicate material name: {rec.name}")
            self._by_key[key] = rec
            if rec.h_f < SUSPICIOUS_HEAT_OF_FUSION:
                self.warnings.append(
                    f"material {rec.name}: heat of fusion {rec.h_f} J/kg is implausibly low"
                )

    def __len__(self) -> int:
        return len(self._by_key)

    def __iter__(self):
        return iter(self._by_key.values())

    def __contains__(self, name: str) -> bool:
        return _norm(name) in self._by_key

    def __eq__(self, other) -> bool:
        return isinstance(other, MaterialDatabase) and self._by_key == other._by_key

    def names(self) -> list[str]:
        return [rec.name for rec in self._by_key.values()]

    def lookup(self, name: str) -> MaterialRecord:
        try:
            return self._by_key[_norm(name)]
        except KeyError:
            raise NotFound(f"unknown material: {name!r}") from None

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            _write_materials(f, self)

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        _write_materials(buf, self)
        return buf.getvalue()


def _parse_float(cell: str, column: str, line: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"line {line}: column {column!r} is not a number: {cell!r}") from None


def _parse_optional(cell: str, column: str, line: int) -> float | None:
    cell = cell.strip()
    return None if cell == "" else _parse_float(cell, column, line)


def load_materials(path: str | Path) -> MaterialDatabase:
    """Load the material database from CSV.

    Header: ``name,rho,hb,tm,hf,cm,eps,c,sigma_y,sigma_u,nu`` with strengths in
    Pa.  Blank cells mark absent optional properties (hb, c, sigma_u, nu).
    """
    records = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != MATERIALS_CSV_HEADER:
            raise ParseError(f"{path}: expected header {','.join(MATERIALS_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(MATERIALS_CSV_HEADER):
                raise ParseError(f"{path} line {lineno}: expected {len(MATERIALS_CSV_HEADER)} cells")
            records.append(MaterialRecord(
                name=row[0].strip(),
                rho_m=_parse_float(row[1], "rho", lineno),
                hb=_parse_optional(row[2], "hb", lineno),
                t_m=_parse_float(row[3], "tm", lineno),
                h_f=_parse_float(row[4], "hf", lineno),
                c_m=_parse_float(row[5], "cm", lineno),
                epsilon=_parse_float(row[6], "eps", lineno),
                c_sound=_parse_optional(row[7], "c", lineno),
                sigma_y=_parse_float(row[8], "sigma_y", lineno),
                sigma_u=_parse_optional(row[9], "sigma_u", lineno),
                nu=_parse_optional(row[10], "nu", lineno),
            ))
    return MaterialDatabase(records)


def lookup(db: MaterialDatabase, name: str) -> MaterialRecord:
    """Return the unique record for ``name`` or raise :class:`NotFound`."""
    return db.lookup(name)


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(value)


def _write_materials(f, db: MaterialDatabase) -> None:
    writer = csv.writer(f)
    writer.writerow(MATERIALS_CSV_HEADER)
    for r in db:
        writer.writerow([r.name, repr(r.rho_m), _fmt(r.hb), repr(r.t_m), repr(r.h_f),
                         repr(r.c_m), repr(r.epsilon), _fmt(r.c_sound), repr(r.sigma_y),
                         _fmt(r.sigma_u), _fmt(r.nu)])


@dataclass(frozen=True)
class BatteryCellRecord:
    """Catalogued battery cell: mass plus outer envelope (meters)."""

    cell_id: int
    mass: float
    shape: str               # "box" or "cylinder"
    length: float
    width: float | None = None      # box only
    height: float | None = None     # box only
    diameter: float | None = None   # cylinder only

    def validate(self) -> None:
        if self.mass <= 0:
            raise InvariantError(f"cell {self.cell_id}: mass must be positive")
        if self.shape == "box":
            dims = (self.length, self.width, self.height)
        elif self.shape == "cylinder":
            dims = (self.length, self.diameter)
        else:
            raise InvariantError(f"cell {self.cell_id}: unknown shape {self.shape!r}")
        if any(d is None or d <= 0 for d in dims):
            raise InvariantError(f"cell {self.cell_id}: all dimensions must be positive")

    def envelope(self) -> tuple[float, float, float]:
        """Bounding box of one cell (l, w, h)."""
        if self.shape == "box":
            return (self.length, self.width, self.height)
        return (self.length, self.diameter, self.diameter)


class BatteryCatalogue:
    """Immutable id-indexed collection of battery cells."""

    def __init__(self, cells: list[BatteryCellRecord]):
        self._by_id: dict[int, BatteryCellRecord] = {}
        for cell in cells:
            cell.validate()
            if cell.cell_id in self._by_id:
                raise DuplicateId(f"duplicate battery cell id: {cell.cell_id}")
            self._by_id[cell.cell_id] = cell

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self):
        return iter(self._by_id.values())

    def ids(self) -> list[int]:
        return sorted(self._by_id)

    def lookup(self, cell_id: int) -> BatteryCellRecord:
        try:
            return self._by_id[cell_id]
        except KeyError:
            raise NotFound(f"unknown battery cell id: {cell_id}") from None


def load_battery_catalogue(path: str | Path) -> BatteryCatalogue:
    """Load the battery-cell catalogue (header ``id,mass,shape,l,w,h,diameter``)."""
    cells = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != BATTERIES_CSV_HEADER:
            raise ParseError(f"{path}: expected header {','.join(BATTERIES_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(BATTERIES_CSV_HEADER):
                raise ParseError(f"{path} line {lineno}: expected {len(BATTERIES_CSV_HEADER)} cells")
            try:
                cell_id = int(row[0])
            except ValueError:
                raise ParseError(f"{path} line {lineno}: id is not an integer: {row[0]!r}") from None
            cells.append(BatteryCellRecord(
                cell_id=cell_id,
                mass=_parse_float(row[1], "mass", lineno),
                shape=row[2].strip().lower(),
                length=_parse_float(row[3], "l", lineno),
                width=_parse_optional(row[4], "w", lineno),
                height=_parse_optional(row[5], "h", lineno),
                diameter=_parse_optional(row[6], "diameter", lineno),
            ))
    return BatteryCatalogue(cells)


@dataclass(frozen=True)
class BatteryChemistry:
    """Cell chemistry: energy density, usable depth of discharge, casing."""

    name: str
    energy_density: float   # Wh/kg
    dod: float              # fraction in (0, 1]
    casing_material: str

    def validate(self) -> None:
        if self.energy_density <= 0:
            raise InvariantError(f"{self.name}: energy density must be positive")
        if not 0 < self.dod <= 1:
            raise InvariantError(f"{self.name}: depth of discharge must be in (0, 1]")


BUILTIN_CHEMISTRIES = {
    "li-ion": BatteryChemistry("li-ion", energy_density=140.0, dod=0.2,
                               casing_material="Al-6061-T6"),
    "ni-cd": BatteryChemistry("ni-cd", energy_density=60.0, dod=0.6,
                              casing_material="AISI316"),
}


def chemistry_for_casing(material_name: str) -> BatteryChemistry:
    """Pick the built-in chemistry whose casing matches the cell material."""
    key = _norm(material_name)
    for chem in BUILTIN_CHEMISTRIES.values():
        if _norm(chem.casing_material) == key:
            return chem
    raise NotFound(f"no battery chemistry with casing material {material_name!r}")


def packaged_data(name: str) -> Path:
    """Path of a data file bundled with the package."""
    return Path(str(resources.files("dfdopt").joinpath("data").joinpath(name)))


def default_materials() -> MaterialDatabase:
    return load_materials(packaged_data("materials.csv"))


def default_battery_catalogue() -> BatteryCatalogue:
    return load_battery_catalogue(packaged_data("batteries.csv"))
