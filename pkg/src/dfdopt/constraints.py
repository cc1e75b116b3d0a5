"""Component feasibility checks.

Tanks are sized from the mission propellant budget and checked as thin-walled
pressure vessels; reaction wheels are sized for angular momentum and checked
against rim stress; battery packs are sized from the eclipse power budget.
Each check returns a verdict consumed by the optimizer: infeasible solutions
are discarded (death penalty) and repairable ones are adjusted in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvariantError
from .materials import BatteryCellRecord, BatteryChemistry, MaterialRecord

RPM_TO_RAD_S = 2.0 * math.pi / 60.0


@dataclass(frozen=True)
class TankDesignParams:
    """Mission inputs driving the tank assembly sizing."""

    m_f: float     # propellant mass for the whole mission, kg
    rho_f: float   # propellant density, kg/m^3
    p: float       # storage pressure, Pa
    sf: float      # safety factor on the wall stress
    k1: float      # filling factor covering the pressurant volume
    ar: float = 1.0  # cylinder aspect ratio, length/diameter

    def validate(self) -> None:
        for attr in ("m_f", "rho_f", "p", "ar"):
            if not getattr(self, attr) > 0:
                raise InvariantError(f"tank parameter {attr} must be positive")
        if self.sf < 1 or self.k1 < 1:
            raise InvariantError("tank safety factor and filling factor must be >= 1")


@dataclass(frozen=True)
class RwDesignParams:
    """Mission inputs driving the reaction wheel sizing."""

    h_d: float        # design angular momentum, N m s
    omega_max: float  # maximum spin rate, rad/s
    sf: float         # safety factor on the rim stress
    ar: float         # wheel aspect ratio, length/diameter

    def validate(self) -> None:
        for attr in ("h_d", "omega_max", "sf", "ar"):
            if not getattr(self, attr) > 0:
                raise InvariantError(f"reaction wheel parameter {attr} must be positive")

    @classmethod
    def from_rpm(cls, h_d: float, omega_max_rpm: float, sf: float, ar: float) -> "RwDesignParams":
        return cls(h_d=h_d, omega_max=omega_max_rpm * RPM_TO_RAD_S, sf=sf, ar=ar)


@dataclass(frozen=True)
class BatteryDesignParams:
    """Mission inputs driving the battery pack sizing."""

    w_e: float        # eclipse power demand, W
    t_e: float        # eclipse duration, hours
    eta: float = 0.9  # transmission efficiency
    n_b: int = 1      # number of batteries (not cells)

    def validate(self) -> None:
        if self.w_e <= 0 or self.t_e <= 0:
            raise InvariantError("eclipse power and duration must be positive")
        if not 0 < self.eta <= 1:
            raise InvariantError("transmission efficiency must be in (0, 1]")
        if self.n_b < 1 or int(self.n_b) != self.n_b:
            raise InvariantError("battery count must be a positive integer")


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of a component check: feasible, repaired, or rejected."""

    status: str                       # "feasible" | "repaired" | "rejected"
    new_value: float | None = None    # repaired value, when status == "repaired"
    reason: str | None = None         # machine-readable code, when rejected
    detail: str = ""

    @classmethod
    def feasible(cls, detail: str = "") -> "FeasibilityVerdict":
        return cls("feasible", detail=detail)

    @classmethod
    def repaired(cls, new_value: float, detail: str = "") -> "FeasibilityVerdict":
        return cls("repaired", new_value=new_value, detail=detail)

    @classmethod
    def rejected(cls, reason: str, detail: str = "") -> "FeasibilityVerdict":
        return cls("rejected", reason=reason, detail=detail)

    @property
    def is_rejected(self) -> bool:
        return self.status == "rejected"

    @property
    def is_repaired(self) -> bool:
        return self.status == "repaired"


# ---------------------------------------------------------------------------
# Tanks

def tank_volume(params: TankDesignParams) -> float:
    """Total propellant volume including the pressurant allowance:
    V_t = K1 * m_f / rho_f."""
    params.validate()
    return params.k1 * params.m_f / params.rho_f


def tank_radius(v_t: float, n_t: int, shape: str, ar: float = 1.0) -> float:
    """Internal radius of each of ``n_t`` equal vessels holding ``v_t`` total.

    Spheres:    r = (3 V / (4 pi n))^(1/3)
    Cylinders:  r = (V / (2 pi AR n))^(1/3)   with AR = length / diameter
    """
    if v_t <= 0 or n_t < 1:
        raise InvariantError("tank volume must be positive and count >= 1")
    if shape == "sphere":
        return (3.0 * v_t / (4.0 * math.pi * n_t)) ** (1.0 / 3.0)
    if shape == "cylinder":
        if ar <= 0:
            raise InvariantError("cylinder aspect ratio must be positive")
        return (v_t / (2.0 * math.pi * ar * n_t)) ** (1.0 / 3.0)
    raise InvariantError(f"tanks must be spheres or cylinders, got {shape!r}")


def tank_wall_stress(r_i: float, t_s: float, p: float, sf: float, shape: str) -> float:
    """Safety-factored membrane stress in the vessel wall.

    Spheres: SF p r / (2 t); cylinders (hoop): SF p r / t.
    """
    if t_s <= 0:
        raise InvariantError("wall thickness must be positive")
    stress = sf * p * r_i / t_s
    if shape == "sphere":
        return stress / 2.0
    if shape == "cylinder":
        return stress
    raise InvariantError(f"tanks must be spheres or cylinders, got {shape!r}")


def check_tank(material: MaterialRecord, thickness: float, radius: float,
               shape: str, params: TankDesignParams) -> FeasibilityVerdict:
    """A vessel is feasible only if the wall stress stays strictly below the
    material's ultimate strength (yield strength when no ultimate is known)."""
    params.validate()
    stress = tank_wall_stress(radius, thickness, params.p, params.sf, shape)
    limit = material.sigma_u_eff
    if stress < limit:
        return FeasibilityVerdict.feasible(
            detail=f"wall stress {stress / 1e6:.1f} MPa < {limit / 1e6:.1f} MPa")
    return FeasibilityVerdict.rejected(
        "tank-strength",
        detail=f"wall stress {stress / 1e6:.1f} MPa >= {limit / 1e6:.1f} MPa ({material.name})")


# ---------------------------------------------------------------------------
# Reaction wheels

def rw_min_radius(params: RwDesignParams, rho_m: float) -> float:
    """Smallest solid-disc radius meeting the momentum requirement:
    r_min = (H_d / (pi rho omega_max AR))^(1/5)."""
    params.validate()
    if rho_m <= 0:
        raise InvariantError("material density must be positive")
    return (params.h_d / (math.pi * rho_m * params.omega_max * params.ar)) ** 0.2


def rw_rim_stress(material: MaterialRecord, radius: float, params: RwDesignParams) -> float:
    """Safety-factored rim stress of a disc spinning at omega_max:
    SF (3 + nu) rho omega^2 r^2."""
    return params.sf * (3.0 + material.nu_eff) * material.rho_m * params.omega_max ** 2 * radius ** 2


def check_rw(material: MaterialRecord, radius: float, params: RwDesignParams,
             radius_bounds: tuple[float, float] | None = None) -> FeasibilityVerdict:
    """Check a wheel for momentum capacity and structural integrity.

    An undersized wheel is repaired by growing it to the minimum radius,
    provided that radius stays inside the optimization bounds.  The rim
    stress at the final radius must not exceed the yield strength.
    """
    params.validate()
    r_min = rw_min_radius(params, material.rho_m)
    final_radius = radius
    repaired = False
    if radius < r_min:
        if radius_bounds is not None and not (radius_bounds[0] <= r_min <= radius_bounds[1]):
            return FeasibilityVerdict.rejected(
                "rw-bounds",
                detail=f"required radius {r_min:.4f} m outside bounds {radius_bounds}")
        final_radius = r_min
        repaired = True
    stress = rw_rim_stress(material, final_radius, params)
    if stress > material.sigma_y:
        return FeasibilityVerdict.rejected(
            "rw-integrity",
            detail=f"rim stress {stress / 1e6:.1f} MPa > yield {material.sigma_y / 1e6:.1f} MPa")
    if repaired:
        return FeasibilityVerdict.repaired(
            r_min, detail=f"radius grown from {radius:.4f} m to {r_min:.4f} m")
    return FeasibilityVerdict.feasible()


# ---------------------------------------------------------------------------
# Batteries

def battery_capacity(params: BatteryDesignParams, chem: BatteryChemistry) -> float:
    """Required total capacity in Wh: C = W_e T_e / (eta N_b DOD)."""
    params.validate()
    chem.validate()
    return params.w_e * params.t_e / (params.eta * params.n_b * chem.dod)


def battery_mass(params: BatteryDesignParams, chem: BatteryChemistry) -> float:
    """Battery mass in kg: m_b = (C / E_d) * N_b."""
    return battery_capacity(params, chem) / chem.energy_density * params.n_b


def size_battery(params: BatteryDesignParams, chem: BatteryChemistry,
                 cell: BatteryCellRecord) -> int:
    """Number of catalogue cells needed: n_c = ceil(m_b / m_c)."""
    cell.validate()
    return math.ceil(battery_mass(params, chem) / cell.mass)
