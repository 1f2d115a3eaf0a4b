#!/usr/bin/env python3
"""
Cellular Automaton Toolkit CLI

Runs the obstacle/particle automaton F and its compiled variants from the
command line: simulate and render configurations, validate admissibility,
build escape paths, compile Turing machines and tile sets, and produce the
witness reports for the dynamics.

Usage:
    python ca_cli.py [global options] <command> [command options]

Commands:
    simulate         step a grid file, write snapshots and frames
    validate         check a grid against the obstacle library
    route            build the escape path from a start cell
    witness          non-sensitivity witness and its sampled check
    violate          equicontinuity-violation certificate
    attract          iterate a finite grid into the admissible fields
    compile          compile a TM (--phi 2|3), tile set (--phi 4) or 1D rule (--phi lift)
    obstacle-search  largest admissible obstacle up to a bound
    constant         sensitivity constant of a compiled CA
    classify         bounded-horizon class hint
    render           ASCII or PPM picture of a grid
    replay           rerun a manifest and compare output digests

Global options:
    --seed N         seed for sampled checks (embedded in every report)
    --threads N      worker threads (output does not depend on it)
    --config FILE    JSON run config (violation-scope, min-interior, ...)
    --runs-dir DIR   where numbered run manifests are written
    --verbose        debug logging

Exit codes: 0 success, 1 check failed or nothing found, 2 bad input or usage.

Examples:
    python ca_cli.py simulate fixtures/grids/particle.grid --steps 10
    python ca_cli.py validate fixtures/grids/obstacle.grid
    python ca_cli.py compile fixtures/machines/loop.tm --phi 2 --out loop.rules
    python ca_cli.py obstacle-search loop.rules --bound 12
"""

import argparse
import contextlib
import io
import logging
import os
import shutil
import sys
import tempfile
from typing import Any, Dict, List, Optional

# Add parent directory to path to import ca_utils
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from ca_utils import (
    CompiledCA,
    Configuration,
    Dyadic,
    Simulation,
    attract_to_sft,
    build_path,
    calibrate_n0,
    check_nonsensitivity,
    classify_evidence,
    decompose_obstacles,
    equicontinuity_violation,
    format_compiled,
    format_grid,
    load_rules,
    load_run_config,
    load_tileset,
    load_tm,
    max_admissible_obstacle,
    nonsensitivity_witness,
    parse_grid,
    phi2,
    phi3,
    phi4,
    plain_f,
    violations,
    CAError
)
from ca_utils.analysis import constant_for_extent, report_json
from ca_utils.errors import AlphabetMismatchError, FormatError, ObstacleError
from ca_utils.lift import format_lifted_table, lift_1d_to_2d, load_rule_1d
from ca_utils.render import render_ascii, render_ppm
from ca_utils.router import with_n0

from experiment_manager import ExperimentManager, digest_bytes, digest_file, load_manifest

logger = logging.getLogger("ca_cli")

TOOL_VERSION = "1.0.0"
OUTPUT_FLAGS = ("--out", "--out-dir", "--render")


def status(message: str):
    """Status lines go to stderr; stdout carries results only."""
    print(message, file=sys.stderr)


class RunRecord:
    """Inputs, parameters and output digests of one command run."""

    def __init__(self, command: str, argv: List[str]):
        self.command = command
        self.argv = list(argv)
        self.inputs: Dict[str, Dict[str, str]] = {}
        self.parameters: Dict[str, Any] = {}
        self.outputs: Dict[str, str] = {}

    def add_input(self, role: str, path: str):
        self.inputs[role] = {"path": path, "sha256": digest_file(path)}

    def emit(self, role: str, data: bytes, path: Optional[str] = None):
        """Write data to path (stdout when None) and record its digest."""
        self.outputs[role] = digest_bytes(data)
        if path is None:
            sys.stdout.write(data.decode("utf-8"))
            sys.stdout.flush()
            return
        with open(path, "wb") as f:
            f.write(data)

    def manifest(self) -> Dict[str, Any]:
        return {"argv": self.argv, "inputs": self.inputs, "parameters": self.parameters,
                "outputs": self.outputs, "tool_version": TOOL_VERSION}


# argument types


def dyadic_arg(text: str) -> Dyadic:
    try:
        return Dyadic.parse(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a dyadic value 2^-k: {text} ({e})")


def position_arg(text: str):
    try:
        x, y = text.split(",")
        return (int(x), int(y))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


# loading


def read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def load_ca(args, config: Dict[str, Any], record: RunRecord) -> CompiledCA:
    rules = getattr(args, "rules", None)
    if rules:
        record.add_input("rules", rules)
        return load_rules(rules)
    return plain_f(config["violation-scope"], config["min-interior"])


def load_grid(path: str, ca: CompiledCA, record: RunRecord) -> Configuration:
    record.add_input("grid", path)
    return parse_grid(read_text(path), ca.rule_table.alphabet)


def require_library(ca: CompiledCA):
    if ca.obstacle_library is None:
        raise CAError(f"{ca.name} has no obstacle library")


def emit_report(record: RunRecord, report: Dict[str, Any], out: Optional[str]):
    record.emit("report", report_json(report).encode("utf-8"), out)


# commands


def cmd_simulate(args, config, record: RunRecord) -> int:
    ca = load_ca(args, config, record)
    rt = ca.rule_table
    x = load_grid(args.grid, ca, record)
    record.parameters.update({"steps": args.steps, "every": args.every, "frames": args.frames})
    if args.frames and not args.out_dir:
        raise CAError("--frames needs --out-dir")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
    sim = Simulation(x, rt, config["threads"])
    snapshots = 0
    for t in range(args.steps + 1):
        if t:
            sim.run(1)
        if args.out_dir and (t % args.every == 0 or t == args.steps):
            snapshot = sim.configuration
            stem = f"step_{t:04d}"
            record.emit(f"{stem}.grid", format_grid(snapshot).encode("utf-8"),
                        os.path.join(args.out_dir, f"{stem}.grid"))
            if args.frames == "ascii":
                record.emit(f"{stem}.txt", render_ascii(snapshot).encode("utf-8"),
                            os.path.join(args.out_dir, f"{stem}.txt"))
            elif args.frames == "ppm":
                record.emit(f"{stem}.ppm", render_ppm(snapshot, config["ppm-scale"]),
                            os.path.join(args.out_dir, f"{stem}.ppm"))
            snapshots += 1
    record.emit("final", format_grid(sim.configuration).encode("utf-8"), args.out)
    status(f"✓ Simulated {args.steps} steps of {rt.name}")
    if snapshots:
        status(f"  {snapshots} snapshots written to {args.out_dir}")
    return 0


def cmd_validate(args, config, record: RunRecord) -> int:
    ca = load_ca(args, config, record)
    require_library(ca)
    x = load_grid(args.grid, ca, record)
    rt = ca.rule_table
    lines = []
    found = sorted(violations(x, ca.obstacle_library, config["threads"]))
    obstacles = []
    problem = None
    try:
        obstacles = decompose_obstacles(x, rt.obstacle_class, config["min-interior"])
    except ObstacleError as e:
        problem = e
    admissible = not found and problem is None
    lines.append(f"admissible: {'yes' if admissible else 'no'}")
    lines.append(f"violations: {len(found)}")
    for px, py in found:
        lines.append(f"violation: {px} {py}")
    if problem is not None:
        lines.append(f"obstacle-error: {problem.position[0]} {problem.position[1]} {problem.reason}")
    else:
        lines.append(f"obstacles: {len(obstacles)}")
        for ob in obstacles:
            ox, oy = ob.interior_origin
            lines.append(f"obstacle: {ox} {oy} {ob.interior_w}x{ob.interior_h} {ob.kind}")
    record.emit("report", ("\n".join(lines) + "\n").encode("utf-8"), args.out)
    if admissible:
        status(f"✓ {args.grid} is admissible ({len(obstacles)} obstacles)")
        return 0
    status(f"✗ {args.grid} is not admissible ({len(found)} violations)")
    return 1


def cmd_route(args, config, record: RunRecord) -> int:
    ca = load_ca(args, config, record)
    x = load_grid(args.grid, ca, record)
    rt = ca.rule_table
    record.parameters.update({"start": list(args.start), "length": args.length, "calibrate": args.calibrate})
    path = build_path(x, args.start, args.length, rt.obstacle_class)
    if args.calibrate:
        path = with_n0(path, calibrate_n0(x, path, rt, config["threads"]))
    lines = [f"case: {path.case_tag}", f"start: {path.start[0]} {path.start[1]}",
             f"n0: {path.n0}", f"points: {len(path)}"]
    lines += [f"{i} {px} {py}" for i, (px, py) in enumerate(path.points)]
    record.emit("path", ("\n".join(lines) + "\n").encode("utf-8"), args.out)
    if args.render:
        record.emit("render", render_ppm(x, args.scale or config["ppm-scale"], overlay=path.points), args.render)
    status(f"✓ Built {path.case_tag} path of {len(path)} points from {args.start}")
    if args.calibrate:
        status(f"  calibrated n0 = {path.n0}")
    return 0


def cmd_witness(args, config, record: RunRecord) -> int:
    ca = load_ca(args, config, record)
    rt = ca.rule_table
    if "1" not in rt.alphabet:
        raise CAError(f"{ca.name} has no plain obstacle state to build the witness from")
    seed = config["seed"]
    c = nonsensitivity_witness(args.eps, config["min-interior"], rt.alphabet)
    record.parameters.update({"eps": str(args.eps), "horizon": args.horizon, "samples": args.samples,
                              "seed": seed})
    report = check_nonsensitivity(c, args.eps, args.horizon, args.samples, seed, rt, config["threads"])
    out = report.to_dict()
    out["witness"] = format_grid(c)
    emit_report(record, out, args.out)
    if report.passed:
        status(f"✓ No sample separated by more than {args.eps} within {args.horizon} steps")
        return 0
    status(f"✗ {report.details['failures']} of {args.samples} samples separated")
    return 1


def cmd_violate(args, config, record: RunRecord) -> int:
    ca = load_ca(args, config, record)
    rt = ca.rule_table
    if args.uniform is not None:
        x = Configuration(rt.alphabet, {}, args.uniform)
    elif args.grid:
        x = load_grid(args.grid, ca, record)
    else:
        raise CAError("violate needs a GRID file or --uniform STATE")
    params = {"z0": list(args.z0), "delta": str(args.delta), "horizon": args.horizon,
              "seed": config["seed"], "uniform": args.uniform}
    record.parameters.update(params)
    result = equicontinuity_violation(x, args.z0, args.delta, args.horizon, rt, config["threads"])
    emit_report(record, result.report(params).to_dict(), args.out)
    if result.found:
        status(f"✓ Orbits separate at {args.z0} after n = {result.certificate.n} steps")
        return 0
    status(f"✗ No certificate: {result.reason}")
    return 1


def cmd_attract(args, config, record: RunRecord) -> int:
    ca = load_ca(args, config, record)
    x = load_grid(args.grid, ca, record)
    record.parameters.update({"t_max": args.t_max, "factor": config["attract-factor"]})
    result = attract_to_sft(x, args.t_max, ca.rule_table, config["threads"], config["attract-factor"])
    out = result.report(config["seed"]).to_dict()
    out["configuration"] = format_grid(result.configuration)
    emit_report(record, out, args.out)
    if result.attracted:
        status(f"✓ Attracted at t0 = {result.t0} (t_max {result.t_max})")
        return 0
    status(f"✗ Not attracted within {result.t_max} steps ({len(result.residual)} residual positions)")
    return 1


def cmd_compile(args, config, record: RunRecord) -> int:
    record.add_input("source", args.source)
    record.parameters.update({"phi": args.phi})
    scope, min_interior = config["violation-scope"], config["min-interior"]
    if args.phi in ("2", "3"):
        m = load_tm(args.source)
        ca = (phi2 if args.phi == "2" else phi3)(m, scope, min_interior)
        text = format_compiled(ca)
    elif args.phi == "4":
        ca = phi4(load_tileset(args.source), scope, min_interior)
        text = format_compiled(ca)
    else:
        rt = lift_1d_to_2d(load_rule_1d(args.source))
        text = format_lifted_table(rt)
    record.emit("rules", text.encode("utf-8"), args.out)
    status(f"✓ Compiled {args.source} with phi{args.phi}" if args.phi != "lift" else f"✓ Lifted {args.source}")
    return 0


def cmd_obstacle_search(args, config, record: RunRecord) -> int:
    record.add_input("rules", args.rules)
    ca = load_rules(args.rules)
    require_library(ca)
    bound = args.bound or config["search-bound"]
    record.parameters.update({"bound": bound})
    extent = max_admissible_obstacle(ca, bound, config["threads"])
    report = {"kind": "obstacle-search", "bound": bound, "max_w": extent.max_w, "max_h": extent.max_h,
              "unbounded": extent.unbounded, "empty": extent.empty,
              "admissible": [list(size) for size in sorted(extent.admissible)], "seed": config["seed"]}
    emit_report(record, report, args.out)
    if extent.empty:
        status(f"⚠ No admissible obstacle up to {bound}x{bound}")
    elif extent.unbounded:
        status(f"✓ Admissible obstacles up to the bound {bound}x{bound}")
    else:
        status(f"✓ Largest admissible obstacle interior {extent.max_w}x{extent.max_h}")
    return 0


def cmd_constant(args, config, record: RunRecord) -> int:
    record.add_input("rules", args.rules)
    ca = load_rules(args.rules)
    require_library(ca)
    bound = args.bound or config["search-bound"]
    record.parameters.update({"bound": bound})
    extent = max_admissible_obstacle(ca, bound, config["threads"])
    constant = constant_for_extent(extent)
    report = {"kind": "sensitivity-constant", "bound": bound, "max_w": extent.max_w, "max_h": extent.max_h,
              "l": extent.l, "unbounded": extent.unbounded,
              "constant": None if constant is None else str(constant), "seed": config["seed"]}
    emit_report(record, report, args.out)
    if constant is None:
        status(f"✗ Obstacles unbounded up to {bound}: no sensitivity constant")
        return 1
    status(f"✓ Sensitivity constant {constant} (l = {extent.l})")
    return 0


def cmd_classify(args, config, record: RunRecord) -> int:
    record.add_input("rules", args.rules)
    ca = load_rules(args.rules)
    budget = args.budget or config["search-bound"]
    record.parameters.update({"horizon": args.horizon, "budget": budget, "samples": args.samples,
                              "seed": config["seed"]})
    evidence = classify_evidence(ca, args.horizon, budget, config["seed"], config["threads"], args.samples)
    report = evidence.to_dict()
    report["seed"] = config["seed"]
    emit_report(record, report, args.out)
    status(f"✓ {evidence.class_hint} (horizon {args.horizon})")
    status(f"⚠ {evidence.caveat}")
    return 0


def cmd_render(args, config, record: RunRecord) -> int:
    ca = load_ca(args, config, record)
    x = load_grid(args.grid, ca, record)
    scale = args.scale or config["ppm-scale"]
    record.parameters.update({"format": args.format, "scale": scale})
    if args.format == "ascii":
        record.emit("render", render_ascii(x).encode("utf-8"), args.out)
    else:
        if not args.out:
            raise CAError("ppm output needs --out")
        record.emit("render", render_ppm(x, scale), args.out)
    status(f"✓ Rendered {args.grid} as {args.format}")
    return 0


def redirect_outputs(argv: List[str], scratch: str) -> List[str]:
    """Recorded argv with output paths moved into scratch and manifests off."""
    out: List[str] = []
    skip = False
    for i, arg in enumerate(argv):
        if skip:
            skip = False
            continue
        if arg == "--runs-dir":
            skip = True
            continue
        if arg in OUTPUT_FLAGS and i + 1 < len(argv):
            out += [arg, os.path.join(scratch, os.path.basename(argv[i + 1].rstrip("/")))]
            skip = True
            continue
        out.append(arg)
    return ["--no-manifest"] + out


def cmd_replay(args, config, record: RunRecord) -> int:
    manifest = load_manifest(args.manifest)
    if manifest is None:
        return 2
    scratch = args.scratch or tempfile.mkdtemp(prefix="ca-replay-")
    os.makedirs(scratch, exist_ok=True)
    argv = redirect_outputs(manifest["argv"], scratch)
    status(f"Replaying {manifest['command']} from {args.manifest}")
    status("-" * 50)
    captured = io.StringIO()
    with contextlib.redirect_stdout(captured):
        code, rerun = run(argv)
    if rerun is None:
        status(f"✗ Replay exited with code {code}")
        return 1
    mismatches = 0
    for role, expected in sorted(manifest["outputs"].items()):
        actual = rerun.outputs.get(role)
        if actual == expected:
            status(f"✓ {role}")
        else:
            status(f"✗ {role}: expected {expected[:12]}, got {(actual or 'nothing')[:12]}")
            mismatches += 1
    extra = sorted(set(rerun.outputs) - set(manifest["outputs"]))
    for role in extra:
        status(f"⚠ {role}: not in the manifest")
    status("-" * 50)
    status("Summary:")
    status(f"  Outputs compared: {len(manifest['outputs'])}")
    status(f"  Mismatches: {mismatches}")
    if not args.scratch:
        shutil.rmtree(scratch, ignore_errors=True)
    return 0 if mismatches == 0 and not extra else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "route": cmd_route,
    "witness": cmd_witness,
    "violate": cmd_violate,
    "attract": cmd_attract,
    "compile": cmd_compile,
    "obstacle-search": cmd_obstacle_search,
    "constant": cmd_constant,
    "classify": cmd_classify,
    "render": cmd_render,
    "replay": cmd_replay,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Obstacle/particle cellular automaton toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__
    )
    parser.add_argument("--seed", type=int, help="Seed for sampled checks (default from config)")
    parser.add_argument("--threads", type=positive_int, help="Worker threads (default from config)")
    parser.add_argument("--config", help="Path to a JSON run config")
    parser.add_argument("--runs-dir", default="runs", help="Directory for run manifests (default: runs)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--no-manifest", action="store_true", help=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Step a grid file")
    p.add_argument("grid", help="ca-grid v1 file")
    p.add_argument("--rules", help="ca-rules v1 file (default: F)")
    p.add_argument("--steps", type=non_negative_int, required=True)
    p.add_argument("--every", type=positive_int, default=1, help="Snapshot interval with --out-dir")
    p.add_argument("--out-dir", help="Directory for per-step snapshots")
    p.add_argument("--frames", choices=("ascii", "ppm"), help="Also write frames next to snapshots")
    p.add_argument("--out", help="Final grid file (default: stdout)")

    p = sub.add_parser("validate", help="Check a grid against the obstacle library")
    p.add_argument("grid")
    p.add_argument("--rules")
    p.add_argument("--out")

    p = sub.add_parser("route", help="Escape path from a free start cell")
    p.add_argument("grid", help="particle-free admissible field")
    p.add_argument("--rules")
    p.add_argument("--start", type=position_arg, required=True, help="X,Y")
    p.add_argument("--length", type=positive_int, required=True)
    p.add_argument("--calibrate", action="store_true", help="Sweep for the smallest working n0")
    p.add_argument("--render", help="PPM with the path overlaid")
    p.add_argument("--scale", type=positive_int)
    p.add_argument("--out")

    p = sub.add_parser("witness", help="Non-sensitivity witness check")
    p.add_argument("--rules")
    p.add_argument("--eps", type=dyadic_arg, required=True, help="2^-k")
    p.add_argument("--horizon", type=positive_int, default=200)
    p.add_argument("--samples", type=positive_int, default=200)
    p.add_argument("--out")

    p = sub.add_parser("violate", help="Equicontinuity-violation certificate")
    p.add_argument("grid", nargs="?")
    p.add_argument("--uniform", help="Use the uniform configuration of this state instead of a grid")
    p.add_argument("--rules")
    p.add_argument("--z0", type=position_arg, required=True, help="X,Y")
    p.add_argument("--delta", type=dyadic_arg, required=True, help="2^-k")
    p.add_argument("--horizon", type=positive_int, default=2000)
    p.add_argument("--out")

    p = sub.add_parser("attract", help="Iterate a finite grid until it settles")
    p.add_argument("grid")
    p.add_argument("--rules")
    p.add_argument("--t-max", type=non_negative_int)
    p.add_argument("--out")

    p = sub.add_parser("compile", help="Compile a TM, tile set or 1D rule")
    p.add_argument("source")
    p.add_argument("--phi", choices=("2", "3", "4", "lift"), required=True)
    p.add_argument("--out")

    for name, help_text in (("obstacle-search", "Largest admissible obstacle"),
                            ("constant", "Sensitivity constant")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("rules")
        p.add_argument("--bound", type=positive_int, help="Search bound (default from config)")
        p.add_argument("--out")

    p = sub.add_parser("classify", help="Bounded-horizon class hint")
    p.add_argument("rules")
    p.add_argument("--horizon", type=positive_int, default=200)
    p.add_argument("--budget", type=positive_int, help="Largest side or bound tried (default from config)")
    p.add_argument("--samples", type=positive_int, default=8)
    p.add_argument("--out")

    p = sub.add_parser("render", help="ASCII or PPM picture of a grid")
    p.add_argument("grid")
    p.add_argument("--rules")
    p.add_argument("--format", choices=("ascii", "ppm"), default="ascii")
    p.add_argument("--scale", type=positive_int)
    p.add_argument("--out")

    p = sub.add_parser("replay", help="Rerun a manifest and compare output digests")
    p.add_argument("manifest")
    p.add_argument("--scratch", help="Directory for the replayed outputs (default: temporary)")

    return parser


def effective_config(args) -> Optional[Dict[str, Any]]:
    """Run config with command-line overrides applied."""
    config = load_run_config(args.config)
    if config is None:
        return None
    if args.seed is not None:
        config["seed"] = args.seed
    if args.threads is not None:
        config["threads"] = args.threads
    return config


def run(argv: List[str]):
    """Parse and run one command; (exit code, RunRecord or None)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (e.code if isinstance(e.code, int) else 2), None

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    with contextlib.redirect_stdout(sys.stderr):
        config = effective_config(args)
    if config is None:
        return 2, None

    logger.debug("running %s with config %s", args.command, config)
    record = RunRecord(args.command, argv)
    try:
        code = COMMANDS[args.command](args, config, record)
    except (FormatError, AlphabetMismatchError) as e:
        status(f"✗ Error: {e}")
        return 2, None
    except (OSError, ValueError) as e:
        status(f"✗ Error: {e}")
        return 2, None
    except CAError as e:
        status(f"✗ Error: {e}")
        return 1, None

    if args.command != "replay" and not args.no_manifest:
        path = ExperimentManager(args.runs_dir).write_manifest(args.command, record.manifest())
        status(f"📝 Manifest: {path}")
    return code, record


def main(argv: Optional[List[str]] = None) -> int:
    """Main function to handle command-line arguments and orchestrate the run."""
    code, _ = run(list(sys.argv[1:] if argv is None else argv))
    return code


if __name__ == "__main__":
    sys.exit(main())
