"""Mixed integer/real NSGA-II over spacecraft configurations.

Each gene binds one optimization variable of one component (or panel):
discrete choices (material, shape, parent, catalogue entry, quantity) are
integer genes holding an index into an option list, continuous ones
(thickness, position, size) are bounded reals.  Decoding writes the gene
values into a copy of the baseline configuration and recomputes everything
they imply: tank radii from the propellant budget, battery cell counts from
the eclipse power budget, wheel geometry from the momentum design.

Evaluation runs the constraint checks (death penalty on rejection, in-place
repair where a repair rule exists), the position repair, the re-entry
simulation and the impact analysis, producing the fitness pair
(LMF, PNP), both maximized.  Selection is NSGA-II: fast non-dominated
sorting, crowding distance, binary tournaments, (mu + lambda) replacement.
Infeasible individuals never enter a mating pool.

All randomness flows from one counter-based generator (Philox) seeded with a
single 64-bit integer; evaluation itself draws no random numbers, so results
do not depend on how evaluations are distributed over worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import constraints, demise, placement, survivability
from .config import Box, Cylinder, Orientation, Sphere, SpacecraftConfig
from .errors import DecodeError, DfdError, InitializationError, InvariantError
from .materials import chemistry_for_casing

# Gene ordering inside one component; also the column order in result tables.
VARIABLE_ORDER = (
    "quantity", "material", "shape", "thickness", "parent",
    "pos_x", "pos_y", "pos_z", "size", "orientation", "catalogue", "shielding",
)

# Core parameters applied when a shielding gene turns a plain panel into a
# honeycomb sandwich and the baseline has none to inherit.
FALLBACK_HC_THICKNESS = 0.05       # m
FALLBACK_HC_AREAL_DENSITY = 4.0    # kg/m^2


@dataclass(frozen=True)
class GeneSpec:
    """Binding of one gene to one variable of one component."""

    component_id: int
    variable: str
    options: tuple | None = None            # integer genes: allowed values
    bounds: tuple[float, float] | None = None  # real genes: (lo, hi)
    label: str = ""

    def __post_init__(self):
        if (self.options is None) == (self.bounds is None):
            raise InvariantError(f"gene {self.label or self.variable}: "
                                 "give exactly one of options or bounds")
        if self.options is not None and len(self.options) == 0:
            raise InvariantError(f"gene {self.label}: empty option list")
        if self.bounds is not None and not self.bounds[0] < self.bounds[1]:
            raise InvariantError(f"gene {self.label}: bounds must satisfy lo < hi")

    @property
    def is_integer(self) -> bool:
        return self.options is not None

    def sample(self, rng: np.random.Generator):
        if self.is_integer:
            return int(rng.integers(0, len(self.options)))
        return float(rng.uniform(*self.bounds))

    def fit(self, raw: float):
        """Clip a relaxed real value back into the gene's domain."""
        if self.is_integer:
            return int(min(max(round(raw), 0), len(self.options) - 1))
        return float(min(max(raw, self.bounds[0]), self.bounds[1]))

    def check(self, value) -> None:
        if self.is_integer:
            if not isinstance(value, (int, np.integer)) or not 0 <= value < len(self.options):
                raise DecodeError(f"gene {self.label}: index {value!r} out of range")
        elif not self.bounds[0] <= value <= self.bounds[1]:
            raise DecodeError(f"gene {self.label}: value {value!r} outside bounds")

    def decoded(self, value):
        """Option value for integer genes, the value itself for reals."""
        self.check(value)
        return self.options[value] if self.is_integer else value


@dataclass(frozen=True)
class Genome:
    """Gene values, ordered like their specs."""

    values: tuple
    specs: tuple[GeneSpec, ...]

    def __post_init__(self):
        if len(self.values) != len(self.specs):
            raise InvariantError("genome length does not match its gene specs")

    def decoded_items(self):
        for value, spec in zip(self.values, self.specs):
            yield spec, spec.decoded(value)


@dataclass(frozen=True)
class GaParams:
    population_size: int = 80
    generations: int = 60
    p_crossover: float = 0.95
    p_mutation: float = 0.01
    eta_c: float = 20.0
    eta_m: float = 20.0
    seed: int = 1
    init_attempt_factor: int = 50

    def validate(self) -> None:
        if self.population_size < 2 or self.generations < 1:
            raise InvariantError("population must be >= 2 and generations >= 1")
        for p in (self.p_crossover, self.p_mutation):
            if not 0.0 <= p <= 1.0:
                raise InvariantError("probabilities must lie in [0, 1]")


def random_genome(specs, rng: np.random.Generator) -> Genome:
    return Genome(tuple(spec.sample(rng) for spec in specs), tuple(specs))


# ---------------------------------------------------------------------------
# Variation operators

def sbx_pair(x1: float, x2: float, eta_c: float, u: float) -> tuple[float, float]:
    """Raw simulated-binary crossover of two scalars; preserves x1 + x2."""
    if u <= 0.5:
        beta = (2.0 * u) ** (1.0 / (eta_c + 1.0))
    else:
        beta = (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta_c + 1.0))
    y1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)
    y2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)
    return y1, y2


def sbx_crossover(p1: Genome, p2: Genome, eta_c: float,
                  rng: np.random.Generator) -> tuple[Genome, Genome]:
    """Per-gene SBX; integer genes cross on the relaxed real index and round
    back to the nearest valid option.  Children are clipped into bounds."""
    if p1.specs != p2.specs:
        raise InvariantError("parents must share gene specs")
    c1, c2 = list(p1.values), list(p2.values)
    for i, spec in enumerate(p1.specs):
        if rng.random() >= 0.5:
            continue
        x1, x2 = float(p1.values[i]), float(p2.values[i])
        if abs(x1 - x2) < 1e-14:
            continue
        y1, y2 = sbx_pair(x1, x2, eta_c, float(rng.random()))
        c1[i], c2[i] = spec.fit(y1), spec.fit(y2)
    return Genome(tuple(c1), p1.specs), Genome(tuple(c2), p1.specs)


def polynomial_mutation(g: Genome, eta_m: float, p_m: float,
                        rng: np.random.Generator) -> Genome:
    """Bounded polynomial mutation, applied per gene with probability p_m."""
    vals = list(g.values)
    for i, spec in enumerate(g.specs):
        if rng.random() >= p_m:
            continue
        if spec.is_integer:
            lo, hi = 0.0, float(len(spec.options) - 1)
        else:
            lo, hi = spec.bounds
        span = hi - lo
        if span <= 0.0:
            continue
        x = float(vals[i])
        u = float(rng.random())
        d1 = (x - lo) / span
        d2 = (hi - x) / span
        if u < 0.5:
            dq = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta_m + 1.0)) \
                ** (1.0 / (eta_m + 1.0)) - 1.0
        else:
            dq = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta_m + 1.0)) \
                ** (1.0 / (eta_m + 1.0))
        vals[i] = spec.fit(x + dq * span)
    return Genome(tuple(vals), g.specs)


# ---------------------------------------------------------------------------
# Non-dominated sorting (both objectives maximized)

def dominates(a, b) -> bool:
    return a[0] >= b[0] and a[1] >= b[1] and (a[0] > b[0] or a[1] > b[1])


def nondominated_sort(fitnesses) -> list[list[int]]:
    """Fast non-dominated sort; returns fronts as lists of indices."""
    n = len(fitnesses)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    fronts: list[list[int]] = [[]]
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            if dominates(fitnesses[p], fitnesses[q]):
                dominated_by[p].append(q)
            elif dominates(fitnesses[q], fitnesses[p]):
                counts[p] += 1
        if counts[p] == 0:
            fronts[0].append(p)
    i = 0
    while fronts[i]:
        nxt = []
        for p in fronts[i]:
            for q in dominated_by[p]:
                counts[q] -= 1
                if counts[q] == 0:
                    nxt.append(q)
        i += 1
        fronts.append(nxt)
    fronts.pop()
    return fronts


def crowding_distances(fitnesses, front) -> dict[int, float]:
    """Crowding distance of each index in one front."""
    dist = {i: 0.0 for i in front}
    if len(front) <= 2:
        return {i: math.inf for i in front}
    for obj in range(2):
        ordered = sorted(front, key=lambda i: fitnesses[i][obj])
        lo = fitnesses[ordered[0]][obj]
        hi = fitnesses[ordered[-1]][obj]
        dist[ordered[0]] = math.inf
        dist[ordered[-1]] = math.inf
        if hi - lo <= 0.0:
            continue
        for k in range(1, len(ordered) - 1):
            gap = fitnesses[ordered[k + 1]][obj] - fitnesses[ordered[k - 1]][obj]
            dist[ordered[k]] += gap / (hi - lo)
    return dist


def hypervolume_2d(points) -> float:
    """Dominated area of a maximization front with respect to the origin."""
    pts = sorted(set(points))
    front = []
    best = -math.inf
    for x, y in sorted(pts, key=lambda p: (-p[0], -p[1])):
        if y > best:
            front.append((x, y))
            best = y
    front.sort()
    hv = 0.0
    prev_x = 0.0
    for x, y in front:
        hv += max(x - prev_x, 0.0) * max(y, 0.0)
        prev_x = x
    return hv


# ---------------------------------------------------------------------------
# Decode

def _genes_by_component(genome: Genome):
    grouped: dict[int, dict[str, object]] = {}
    for spec, value in genome.decoded_items():
        grouped.setdefault(spec.component_id, {})[spec.variable] = value
    return grouped


def _apply_panel_genes(cfg: SpacecraftConfig, panel_id: int, genes: dict) -> None:
    from .config import PANEL_ROLE_BY_ID
    panel = cfg.panels[PANEL_ROLE_BY_ID[panel_id]]
    if "material" in genes:
        panel.material = genes["material"]
    if "thickness" in genes:
        panel.face_thickness = float(genes["thickness"])
    if "shielding" in genes:
        wall = genes["shielding"]
        if wall == "honeycomb":
            panel.hc_thickness = panel.hc_thickness or FALLBACK_HC_THICKNESS
            panel.hc_areal_density = panel.hc_areal_density or FALLBACK_HC_AREAL_DENSITY
        else:
            panel.hc_thickness = None
            panel.hc_areal_density = None
        panel.wall_type = wall


def apply_wheel_radius(node, radius: float, rw_params: constraints.RwDesignParams,
                       rho_m: float) -> None:
    """Set a reaction wheel's geometry and mass for a solid disc of the given
    radius: length from the aspect ratio, mass from the material density."""
    length = 2.0 * radius * rw_params.ar
    node.shape = Cylinder(l=length, r=radius)
    node.thermal_mass = math.pi * radius ** 2 * length * rho_m
    node.wall_thickness = length / 2.0


def pack_cells(cell_env: tuple[float, float, float], count: int,
               margin: float = 1.05) -> tuple[float, float, float]:
    """Outer dimensions of a box stacking ``count`` cells in a regular grid.

    Searches the grid factorization with the smallest surface area
    (deterministic tie-break on the lexicographically smallest grid).
    """
    cl, cw, ch = cell_env
    best = None
    for nx in range(1, count + 1):
        for ny in range(1, math.ceil(count / nx) + 1):
            nz = math.ceil(count / (nx * ny))
            dims = (nx * cl * margin, ny * cw * margin, nz * ch * margin)
            area = 2 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2])
            key = (area, nx, ny, nz)
            if best is None or key < best[0]:
                best = (key, dims)
    return best[1]


def decode(genome: Genome, scenario) -> SpacecraftConfig:
    """Write the genome into a copy of the baseline configuration and
    recompute the derived quantities (tank geometry, battery pack, wheels)."""
    cfg = scenario.baseline.clone()
    grouped = _genes_by_component(genome)
    nodes = {node.id: node for node in cfg.components}

    for comp_id, genes in grouped.items():
        if comp_id in range(2, 8):
            _apply_panel_genes(cfg, comp_id, genes)
            continue
        if comp_id not in nodes:
            raise DecodeError(f"gene bound to unknown component id {comp_id}")
        node = nodes[comp_id]
        if "material" in genes:
            node.material = genes["material"]
        if "thickness" in genes:
            node.wall_thickness = float(genes["thickness"])
        if "quantity" in genes:
            node.quantity = int(genes["quantity"])
        if "parent" in genes:
            node.parent_id = int(genes["parent"])
        if "orientation" in genes:
            node.orientation = _decode_orientation(genes["orientation"])
        if "shape" in genes:
            _apply_shape_gene(node, genes["shape"])
        if "size" in genes:
            _apply_size_gene(node, float(genes["size"]), scenario)
        if any(k in genes for k in ("pos_x", "pos_y", "pos_z")):
            _apply_position_genes(cfg, node, genes)

    _derive_tanks(cfg, scenario)
    _derive_batteries(cfg, scenario, grouped)
    try:
        cfg.validate(scenario.db)
    except DfdError as exc:
        raise DecodeError(f"genome produced an invalid configuration: {exc}") from exc
    return cfg


def _decode_orientation(value) -> Orientation:
    if isinstance(value, Orientation):
        return value
    parts = [p.strip() for p in str(value).split("/") if p.strip()]
    if len(parts) == 1:
        from .config import _axis_index
        axis2 = next(a for a in ("Left", "RAM") if _axis_index(a) != _axis_index(parts[0]))
        return Orientation(parts[0], axis2)
    return Orientation(parts[0], parts[1])


def _apply_shape_gene(node, kind: str) -> None:
    if node.role == "tank":
        # dimensions are recomputed from the propellant budget afterwards
        node.shape = Sphere(r=1.0) if kind == "sphere" else Cylinder(l=1.0, r=1.0)
        return
    raise DecodeError(f"component {node.uid}: shape is only optimizable for tanks")


def _apply_size_gene(node, value: float, scenario) -> None:
    if node.role == "reaction_wheel":
        rec = scenario.db.lookup(node.material)
        apply_wheel_radius(node, value, scenario.mission.rw, rec.rho_m)
        return
    shape = node.shape
    if shape.kind == "sphere":
        node.shape = Sphere(r=value)
    elif shape.kind == "cylinder":
        node.shape = Cylinder(l=shape.l, r=value)
    elif shape.kind == "box":
        scale = value / shape.l
        node.shape = Box(l=value, w=shape.w * scale, h=shape.h * scale)
    else:
        raise DecodeError(f"component {node.uid}: size gene unsupported for {shape.kind}")


def _apply_position_genes(cfg: SpacecraftConfig, node, genes: dict) -> None:
    coords = [genes.get("pos_x"), genes.get("pos_y"), genes.get("pos_z")]
    if cfg.is_attached(node):
        if coords[0] is None or coords[1] is None:
            raise DecodeError(f"component {node.uid}: attached position needs two coordinates")
        node.position = (float(coords[0]), float(coords[1]))
    else:
        base = list(node.position or (0.0, 0.0, 0.0))
        for i, c in enumerate(coords):
            if c is not None:
                base[i] = float(c)
        node.position = tuple(base[:3])


def _derive_tanks(cfg: SpacecraftConfig, scenario) -> None:
    params = scenario.mission.tank
    v_t = constraints.tank_volume(params)
    tanks = [n for n in cfg.components if n.role == "tank"]
    for node in tanks:
        n_t = node.quantity
        kind = node.shape.kind
        radius = constraints.tank_radius(v_t, n_t, kind, params.ar)
        if kind == "sphere":
            node.shape = Sphere(r=radius)
        else:
            node.shape = Cylinder(l=2.0 * radius * params.ar, r=radius)
        node.thermal_mass = None   # shell mass follows the new geometry
        if n_t > 1:
            center = node.position if len(node.position or ()) == 3 else (0.0, 0.0, 0.0)
            ring = placement.ring_positions(center, n_t,
                                            placement.tank_ring_radius(radius))
            cfg.components.remove(node)
            for k, pos in enumerate(ring):
                inst = replace(node)
                inst.instance = chr(ord("a") + k)
                inst.quantity = 1
                inst.position = pos
                cfg.components.append(inst)


def _derive_batteries(cfg: SpacecraftConfig, scenario, grouped) -> None:
    params = scenario.mission.battery
    for node in cfg.components:
        if node.role != "battery_cells":
            continue
        genes = grouped.get(node.id, {})
        cell_id = genes.get("catalogue")
        cell = scenario.catalogue.lookup(int(cell_id)) if cell_id is not None else None
        if cell is None:
            continue
        chem = chemistry_for_casing(node.material)
        count = constraints.size_battery(params, chem, cell)
        if cell.shape == "box":
            node.shape = Box(l=cell.length, w=cell.width, h=cell.height)
        else:
            node.shape = Cylinder(l=cell.length, r=cell.diameter / 2.0)
        node.thermal_mass = cell.mass
        node.wall_thickness = None
        node.quantity = count
        container = next((c for c in cfg.components if c.id == node.parent_id), None)
        if container is not None and container.shape.kind == "box":
            dims = pack_cells(cell.envelope(), count)
            container.shape = Box(*dims)


# ---------------------------------------------------------------------------
# Evaluation pipeline

@dataclass
class EvalOutcome:
    """Fitness or death verdict of one genome."""

    genome: Genome | None
    lmf: float | None = None
    pnp: float | None = None
    dead_reason: str | None = None
    verdicts: dict = field(default_factory=dict)
    config: SpacecraftConfig | None = None

    @property
    def alive(self) -> bool:
        return self.dead_reason is None

    @property
    def fitness(self) -> tuple[float, float]:
        return (self.lmf, self.pnp)


def check_components(cfg: SpacecraftConfig, scenario) -> dict:
    """Run the component constraint checks, applying repairs in place.

    Returns {uid: FeasibilityVerdict}; the caller dies on any rejection.
    """
    verdicts: dict = {}
    mission = scenario.mission
    for node in list(cfg.components):
        if node.role == "tank":
            rec = scenario.db.lookup(node.material)
            radius = node.shape.r
            verdicts[node.uid] = constraints.check_tank(
                rec, node.wall_thickness, radius, node.shape.kind, mission.tank)
        elif node.role == "reaction_wheel":
            rec = scenario.db.lookup(node.material)
            bounds = scenario.gene_bounds(node.id, "size")
            verdict = constraints.check_rw(rec, node.shape.r, mission.rw, bounds)
            if verdict.is_repaired:
                apply_wheel_radius(node, verdict.new_value, mission.rw, rec.rho_m)
            verdicts[node.uid] = verdict
    return verdicts


def _run_pipeline(outcome: EvalOutcome, cfg: SpacecraftConfig, scenario) -> EvalOutcome:
    outcome.verdicts = check_components(cfg, scenario)
    rejected = [v for v in outcome.verdicts.values() if v.is_rejected]
    if rejected:
        outcome.dead_reason = rejected[0].reason
        return outcome
    try:
        cfg = placement.repair_positions(cfg, scenario.grid_resolution)
    except placement.RepairFailed:
        outcome.dead_reason = "placement"
        return outcome
    outcome.config = cfg
    outcome.lmf, outcome.pnp = evaluate_config(cfg, scenario)
    return outcome


def evaluate(genome: Genome, scenario) -> EvalOutcome:
    """Decode, check, repair, simulate: the full fitness pipeline."""
    cached = scenario.fitness_cache.get(genome.values)
    if cached is not None:
        return cached
    outcome = EvalOutcome(genome=genome)
    try:
        cfg = decode(genome, scenario)
    except DecodeError as exc:
        outcome.dead_reason = f"decode: {exc}"
    else:
        _run_pipeline(outcome, cfg, scenario)
    scenario.fitness_cache[genome.values] = outcome
    return outcome


def evaluate_fixed(scenario) -> EvalOutcome:
    """Evaluate the scenario's baseline configuration as-is (no genome)."""
    outcome = EvalOutcome(genome=None)
    return _run_pipeline(outcome, scenario.baseline.clone(), scenario)


def evaluate_config(cfg: SpacecraftConfig, scenario) -> tuple[float, float]:
    """Fitness pair of an already-feasible configuration."""
    results = demise.simulate_reentry(
        cfg, scenario.mission.entry, scenario.mission.events, scenario.db,
        atmosphere=scenario.atmosphere, dt=scenario.dt, cache=scenario.flight_cache)
    lmf = demise.compute_lmf(results)
    _, comp_results = survivability.analyze_survivability(
        cfg, scenario.db, scenario.env, scenario.mission.lifetime_years, scenario.ble)
    pnp = survivability.compute_pnp(comp_results, mode=scenario.pnp_mode)
    return lmf, pnp


# ---------------------------------------------------------------------------
# NSGA-II loop

@dataclass
class ParetoSolution:
    genome: Genome
    config: SpacecraftConfig
    lmf: float
    pnp: float
    verdicts: dict = field(default_factory=dict)


def _tournament(rng, alive_idx, rank, crowd):
    a, b = (alive_idx[int(rng.integers(0, len(alive_idx)))] for _ in range(2))
    if rank[a] != rank[b]:
        return a if rank[a] < rank[b] else b
    if crowd[a] != crowd[b]:
        return a if crowd[a] > crowd[b] else b
    return a


def run_nsga2(scenario, params: GaParams, workers: int = 1,
              history: list | None = None,
              evaluator=None) -> list[ParetoSolution]:
    """Run the optimization and return the final first front, decoded.

    ``evaluator`` maps a list of genomes to a list of EvalOutcomes; the
    default evaluates sequentially in-process.  Results are deterministic for
    a fixed seed regardless of how the evaluator parallelizes.
    """
    params.validate()
    specs = tuple(scenario.gene_specs)
    if not specs:
        raise InitializationError("scenario defines no optimization variables")
    rng = np.random.Generator(np.random.Philox(params.seed))
    if evaluator is None:
        def evaluator(genomes):
            return [evaluate(g, scenario) for g in genomes]

    # initial population: resample until feasible, within the attempt budget
    budget = params.init_attempt_factor * params.population_size
    population: list[EvalOutcome] = []
    attempts = 0
    while len(population) < params.population_size:
        if attempts >= budget:
            raise InitializationError(
                f"could not assemble a feasible population in {budget} attempts")
        want = params.population_size - len(population)
        batch = [random_genome(specs, rng) for _ in range(min(want, params.population_size))]
        attempts += len(batch)
        population.extend(o for o in evaluator(batch) if o.alive)

    for gen in range(params.generations):
        fits = [o.fitness for o in population]
        fronts = nondominated_sort(fits)
        rank = {}
        crowd = {}
        for r, front in enumerate(fronts):
            dists = crowding_distances(fits, front)
            for i in front:
                rank[i] = r
                crowd[i] = dists[i]

        alive_idx = list(range(len(population)))
        offspring_genomes: list[Genome] = []
        while len(offspring_genomes) < params.population_size:
            pa = population[_tournament(rng, alive_idx, rank, crowd)].genome
            pb = population[_tournament(rng, alive_idx, rank, crowd)].genome
            if rng.random() < params.p_crossover:
                ca, cb = sbx_crossover(pa, pb, params.eta_c, rng)
            else:
                ca, cb = pa, pb
            ca = polynomial_mutation(ca, params.eta_m, params.p_mutation, rng)
            cb = polynomial_mutation(cb, params.eta_m, params.p_mutation, rng)
            offspring_genomes.append(ca)
            if len(offspring_genomes) < params.population_size:
                offspring_genomes.append(cb)

        offspring = evaluator(offspring_genomes)
        feasible_offspring = [o for o in offspring if o.alive]
        combined = population + feasible_offspring

        fits = [o.fitness for o in combined]
        fronts = nondominated_sort(fits)
        survivors: list[int] = []
        for front in fronts:
            if len(survivors) + len(front) <= params.population_size:
                survivors.extend(sorted(front))
                continue
            dists = crowding_distances(fits, front)
            ordered = sorted(front, key=lambda i: (-dists[i], i))
            survivors.extend(ordered[: params.population_size - len(survivors)])
            break
        population = [combined[i] for i in survivors]

        if history is not None:
            front0_fits = [combined[i].fitness for i in fronts[0]]
            history.append({
                "generation": gen,
                "evaluated": len(offspring),
                "feasible": len(feasible_offspring),
                "front_size": len(fronts[0]),
                "hypervolume": hypervolume_2d(front0_fits),
                "best_lmf": max(f[0] for f in front0_fits),
                "best_pnp": max(f[1] for f in front0_fits),
            })

    fits = [o.fitness for o in population]
    front0 = nondominated_sort(fits)[0]
    seen = set()
    solutions = []
    for i in sorted(front0, key=lambda i: (fits[i][0], fits[i][1])):
        o = population[i]
        if o.genome.values in seen:
            continue
        seen.add(o.genome.values)
        solutions.append(ParetoSolution(
            genome=o.genome, config=o.config, lmf=o.lmf, pnp=o.pnp, verdicts=o.verdicts))
    return solutions
