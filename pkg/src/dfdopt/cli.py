"""Command-line front end.

    dfd validate <scenario>   check a scenario and print every problem found
    dfd evaluate <scenario>   evaluate the baseline configuration once
    dfd optimize <scenario>   run the NSGA-II study and write the front

Common flags: --seed overrides [ga] seed, --workers N evaluates individuals
on a process pool (results are independent of N), --out picks the output
directory, --set section.key=value patches the scenario, --data-root points
at a directory of data files (also via $DFD_DATA_ROOT).

Exit codes: 0 success, 2 validation failure, 3 infeasible configuration or
failed initialization, 4 I/O error.  Every run writes a manifest.json (also
on failure) recording the scenario digest, seed, and outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing as mp
import sys
import time
from pathlib import Path

from . import __version__
from .errors import DfdError, InitializationError, ParseError
from .optimizer import Genome, evaluate, evaluate_fixed, run_nsga2
from .scenario import dump_config, load_scenario, validate_scenario
from .survivability import analyze_survivability

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ---------------------------------------------------------------------------
# Worker pool: each process loads its own scenario copy; evaluation draws no
# randomness, so the split across workers cannot change any result.

_WORKER_SCENARIO = None


def _worker_init(path, data_root, overrides):
    global _WORKER_SCENARIO
    _WORKER_SCENARIO = load_scenario(path, data_root=data_root, overrides=overrides)


def _worker_eval(values):
    genome = Genome(tuple(values), tuple(_WORKER_SCENARIO.gene_specs))
    return evaluate(genome, _WORKER_SCENARIO)


class PoolEvaluator:
    def __init__(self, scenario, workers: int):
        self.scenario = scenario
        self.pool = mp.get_context("spawn").Pool(
            workers, initializer=_worker_init,
            initargs=(str(scenario.path), None, scenario.overrides))

    def __call__(self, genomes):
        outcomes = self.pool.map(_worker_eval, [g.values for g in genomes])
        # keep the orchestrating process's cache warm for the final report
        for genome, outcome in zip(genomes, outcomes):
            self.scenario.fitness_cache.setdefault(genome.values, outcome)
        return outcomes

    def close(self):
        self.pool.close()
        self.pool.join()


# ---------------------------------------------------------------------------
# Manifest

def _write_manifest(out_dir: Path, scenario_path: str, seed, digests, outputs,
                    started: float, status: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "dfd",
        "version": __version__,
        "scenario": str(scenario_path),
        "seed": seed,
        "data_digests": digests,
        "outputs": outputs,
        "wall_clock_s": round(time.monotonic() - started, 3),
        "status": status,
    }
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# Subcommands

def cmd_validate(args) -> int:
    problems = validate_scenario(args.scenario, data_root=args.data_root,
                                 overrides=args.set or ())
    hard = [p for p in problems if not p.startswith("material ")]
    for p in problems:
        kind = "warning" if p not in hard else "error"
        print(f"{kind}: {p}")
    if hard:
        print(f"{len(hard)} problem(s) found")
        return EXIT_VALIDATION
    print("scenario is clean")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    started = time.monotonic()
    out_dir = Path(args.out)
    digests, seed, status = {}, None, "failed"
    try:
        try:
            scenario = load_scenario(args.scenario, data_root=args.data_root,
                                     overrides=args.set or ())
        except ParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        digests = scenario.data_digests
        seed = scenario.ga.seed
        outcome = evaluate_fixed(scenario)
        for uid, verdict in outcome.verdicts.items():
            line = f"component {uid}: {verdict.status}"
            if verdict.detail:
                line += f" ({verdict.detail})"
            print(line)
        if not outcome.alive:
            print(f"configuration is infeasible: {outcome.dead_reason}", file=sys.stderr)
            status = f"dead:{outcome.dead_reason}"
            return EXIT_INFEASIBLE

        print(f"LMF = {outcome.lmf:.6f}")
        print(f"PNP = {outcome.pnp:.6f}")
        cfg = outcome.config
        from .demise import simulate_reentry
        results = simulate_reentry(cfg, scenario.mission.entry, scenario.mission.events,
                                   scenario.db, atmosphere=scenario.atmosphere,
                                   dt=scenario.dt, cache=scenario.flight_cache)
        panel_res, comp_res = analyze_survivability(
            cfg, scenario.db, scenario.env, scenario.mission.lifetime_years, scenario.ble)
        probs = {r.target_id: r.probability for r in comp_res + panel_res}
        out_dir.mkdir(parents=True, exist_ok=True)
        report = out_dir / "evaluation.csv"
        with open(report, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["uid", "name", "kind", "quantity", "initial_mass_kg",
                             "final_mass_kg", "demised", "demise_altitude_m",
                             "penetration_probability"])
            for r in results:
                writer.writerow([
                    r.uid, r.name, r.kind, r.quantity, _fmt(r.initial_mass),
                    _fmt(r.final_mass), int(r.demised),
                    _fmt(r.demise_altitude) if r.demise_altitude is not None else "",
                    _fmt(probs.get(r.uid, "")),
                ])
            for r in results:
                detail = f"demised at {r.demise_altitude:.0f} m" if r.demised \
                    else f"survived with {r.final_mass:.2f} kg"
                print(f"  {r.name} [{r.uid}] x{r.quantity}: {detail}")
        print(f"report written to {report}")
        status = "ok"
        return EXIT_OK
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DfdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    finally:
        _write_manifest(out_dir, args.scenario, seed, digests,
                        ["evaluation.csv"], started, status)


def cmd_optimize(args) -> int:
    started = time.monotonic()
    out_dir = Path(args.out)
    digests, seed, status = {}, None, "failed"
    outputs = ["pareto.csv", "history.csv", "solutions/"]
    evaluator = None
    try:
        overrides = list(args.set or ())
        if args.seed is not None:
            overrides.append(f"ga.seed={args.seed}")
        try:
            scenario = load_scenario(args.scenario, data_root=args.data_root,
                                     overrides=overrides)
        except ParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        digests = scenario.data_digests
        seed = scenario.ga.seed
        if args.workers > 1:
            evaluator = PoolEvaluator(scenario, args.workers)

        history: list[dict] = []
        try:
            solutions = run_nsga2(scenario, scenario.ga, history=history,
                                  evaluator=evaluator)
        except InitializationError as exc:
            print(f"initialization failed: {exc}", file=sys.stderr)
            status = "initialization-failed"
            return EXIT_INFEASIBLE

        out_dir.mkdir(parents=True, exist_ok=True)
        gene_labels = [spec.label or f"{spec.component_id}.{spec.variable}"
                       for spec in scenario.gene_specs]
        with open(out_dir / "pareto.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["solution"] + gene_labels + ["lmf", "pnp"])
            for k, sol in enumerate(solutions):
                writer.writerow([k] + [_fmt(v) for v in sol.genome.values]
                                + [_fmt(sol.lmf), _fmt(sol.pnp)])
        with open(out_dir / "history.csv", "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["generation", "evaluated", "feasible", "front_size",
                             "hypervolume", "best_lmf", "best_pnp"])
            for row in history:
                writer.writerow([row["generation"], row["evaluated"], row["feasible"],
                                 row["front_size"], _fmt(row["hypervolume"]),
                                 _fmt(row["best_lmf"]), _fmt(row["best_pnp"])])
        sol_dir = out_dir / "solutions"
        sol_dir.mkdir(exist_ok=True)
        for k, sol in enumerate(solutions):
            dump_config(sol.config, scenario, sol_dir / f"{k}.cfg")
        print(f"{len(solutions)} trade-off solutions written to {out_dir}")
        status = "ok"
        return EXIT_OK
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        if evaluator is not None:
            evaluator.close()
        _write_manifest(out_dir, args.scenario, seed, digests, outputs, started, status)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfd",
        description="Trade-off search between re-entry demisability and "
                    "debris-impact survivability of spacecraft configurations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("validate", cmd_validate), ("evaluate", cmd_evaluate),
                     ("optimize", cmd_optimize)):
        p = sub.add_parser(name)
        p.add_argument("scenario", help="path to the scenario file")
        p.add_argument("--seed", type=int, default=None, help="override the [ga] seed")
        p.add_argument("--workers", type=int, default=1,
                       help="evaluation worker processes")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a scenario value")
        p.add_argument("--data-root", default=None,
                       help="directory searched first for data files")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
