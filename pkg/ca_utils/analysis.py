#!/usr/bin/env python3
"""
Executable witnesses for the dynamics of the obstacle/particle CA.

- nonsensitivity_witness / check_nonsensitivity: a centred obstacle that no
  small perturbation can disturb
- attract_to_sft: finite configurations settle into admissible obstacle fields
- equicontinuity_violation: two configurations close to x whose orbits
  separate at z0, built from an escape path
- sensitivity_constant: the constant implied by the largest admissible obstacle
- classify_evidence: bounded-horizon hint at the class of a compiled CA

Every function that can fail on its input reports the outcome in a result
object instead of raising. Reports serialise to JSON with sorted keys.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .compilers import CompiledCA, ObstacleExtent, max_admissible_obstacle, obstacle_from_witness
from .engine import Simulation
from .errors import CAError, RoutingError
from .grid import Alphabet, Configuration, Dyadic, Position, cantor_distance, format_grid, norm, ring
from .router import build_path, field_obstacles
from .rules import ObstacleRuleTable, RuleTable, f_automaton
from .sft import F_ALPHABET, PARTICLE_STATES, obstacle_cells, violations
from .tiling import tiles_square
from .tobstacles import MIN_SIDE, t_obstacle

logger = logging.getLogger(__name__)

CAVEAT = ("Bounded-horizon evidence only: membership in these classes is undecidable, "
          "so this hint is not a decision.")
CLASS_HINTS = ("Eq-like", "S-like", "N-like")


def _k(value: Dyadic, what: str) -> int:
    if value.is_zero() or value.exponent < 1:
        raise CAError(f"{what} must be 2^-k with k >= 1, got {value}")
    return value.exponent


@dataclass
class WitnessReport:
    """Outcome of one witness check, reproducible from its parameters."""

    kind: str
    parameters: Dict[str, Any]
    passed: bool
    counterexample: Optional[Configuration] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {"kind": self.kind, "parameters": dict(self.parameters),
               "outcome": "pass" if self.passed else "fail", "details": dict(self.details)}
        if self.counterexample is not None:
            out["counterexample"] = format_grid(self.counterexample)
        return out


def report_json(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# non-sensitivity


def witness_side(eps: Dyadic, min_interior: int = 1) -> int:
    """Footprint side of the witness obstacle: 2k, clamped to the smallest legal obstacle."""
    return max(2 * _k(eps, "eps"), min_interior + 2)


def nonsensitivity_witness(eps: Dyadic, min_interior: int = 1,
                           alphabet: Alphabet = F_ALPHABET) -> Configuration:
    """All-0 configuration with one square obstacle covering the ball of radius k-1."""
    k = _k(eps, "eps")
    side = witness_side(eps, min_interior)
    if side != 2 * k:
        logger.info("witness side for %s clamped from %d to %d", eps, 2 * k, side)
    left = -(side // 2)
    inner = side - 2
    return Configuration(alphabet, obstacle_cells((left + 1, left + 1), inner, inner))


def compare_orbits(c: Configuration, y: Configuration, rt: RuleTable, eps: Dyadic,
                   horizon: int) -> Optional[int]:
    """First t <= horizon with d(F^t c, F^t y) > eps, or None."""
    a, b = Simulation(c, rt), Simulation(y, rt)
    for t in range(horizon + 1):
        if t:
            a.run(1)
            b.run(1)
        if cantor_distance(a.configuration, b.configuration) > eps:
            return t
    return None


def _ring_point(rng: np.random.Generator, r: int) -> Position:
    points = list(ring(r))
    return points[int(rng.integers(len(points)))]


def perturb(c: Configuration, k: int, horizon: int, rng: np.random.Generator,
            max_cells: int = 8) -> Configuration:
    """c changed only at norms in [k+2, k+2+horizon]: random cells plus possibly a particle."""
    states = [s for s in c.alphabet.states if s != c.alphabet.quiescent]
    lo, hi = k + 2, k + 2 + horizon
    updates: Dict[Position, str] = {}
    for _ in range(int(rng.integers(1, max_cells + 1))):
        p = _ring_point(rng, int(rng.integers(lo, hi + 1)))
        updates[p] = states[int(rng.integers(len(states)))]
    if "U" in c.alphabet and "D" in c.alphabet and rng.random() < 0.5:
        ux, uy = _ring_point(rng, int(rng.integers(lo + 1, hi + 1)))
        updates[(ux, uy)] = "U"
        updates[(ux, uy - 1)] = "D"
    return c.with_cells(updates)


def check_nonsensitivity(c: Configuration, eps: Dyadic, horizon: int, samples: int, seed: int,
                         rt: Optional[RuleTable] = None, threads: int = 1) -> WitnessReport:
    """Sample y with d(y, c) <= eps/4 and check d(F^t c, F^t y) <= eps for t <= horizon."""
    if horizon < 1 or samples < 1:
        raise CAError("horizon and samples must be at least 1")
    k = _k(eps, "eps")
    rt = rt or f_automaton()
    params = {"eps": str(eps), "horizon": horizon, "samples": samples, "seed": seed}

    def trial(i: int) -> Tuple[int, Configuration, Optional[int]]:
        y = perturb(c, k, horizon, np.random.default_rng([seed, i]))
        return i, y, compare_orbits(c, y, rt, eps, horizon)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(trial, range(samples)))
    else:
        results = [trial(i) for i in range(samples)]
    failures = [(i, y, t) for i, y, t in results if t is not None]
    logger.info("nonsensitivity at %s: %d/%d samples separated", eps, len(failures), samples)
    if not failures:
        return WitnessReport("nonsensitivity", params, True)
    i, y, t = failures[0]
    return WitnessReport("nonsensitivity", params, False, y, {"sample": i, "time": t, "failures": len(failures)})


# attraction


@dataclass
class AttractionResult:
    attracted: bool
    t0: Optional[int]
    configuration: Configuration
    t_max: int
    residual: List[Position] = field(default_factory=list)

    def report(self, seed: Optional[int] = None) -> WitnessReport:
        params = {"t_max": self.t_max, "seed": seed}
        details = {"t0": self.t0, "residual": [list(p) for p in self.residual]}
        return WitnessReport("attraction", params, self.attracted,
                             None if self.attracted else self.configuration, details)


def default_t_max(x: Configuration, factor: int = 4) -> int:
    """factor * (area + perimeter) of the support's bounding box."""
    box = x.bounding_box()
    if box is None:
        return 0
    w, h = box[2] - box[0] + 1, box[3] - box[1] + 1
    return factor * (w * h + 2 * (w + h))


def _near(p: Position, cells: Dict[Position, str], members) -> bool:
    return any(cells.get((p[0] + dx, p[1] + dy)) in members for dx in (-1, 0, 1) for dy in (-1, 0, 1))


def unsettled(x: Configuration, rt: ObstacleRuleTable, threads: int = 1) -> List[Position]:
    """Positions keeping x out of the terminal regime; empty once x is settled.

    Settled means: no library violation centred on a window touching an
    obstacle cell, no particle cell next to an obstacle cell, and every U
    sitting directly on a D.
    """
    cells = x.cells()
    obstacle = rt.obstacle_class
    residual = {c for c in violations(x, rt.library, threads) if _near(c, cells, obstacle)}
    for p in x.positions_with(PARTICLE_STATES):
        partner = (p[0], p[1] - 1) if cells[p] == "U" else (p[0], p[1] + 1)
        if _near(p, cells, obstacle) or cells.get(partner) != ("D" if cells[p] == "U" else "U"):
            residual.add(p)
    return sorted(residual)


def attract_to_sft(x: Configuration, t_max: Optional[int] = None, rt: Optional[ObstacleRuleTable] = None,
                   threads: int = 1, factor: int = 4) -> AttractionResult:
    """Iterate until the configuration settles; first such t0 <= t_max."""
    if not x.is_finite():
        raise CAError("attraction needs a finite configuration")
    rt = rt or f_automaton()
    t_max = default_t_max(x, factor) if t_max is None else t_max
    sim = Simulation(x, rt, threads)
    for t in range(t_max + 1):
        if t:
            sim.run(1)
        residual = unsettled(sim.configuration, rt, threads)
        if not residual:
            logger.info("attracted at t0=%d (t_max %d)", t, t_max)
            return AttractionResult(True, t, sim.configuration, t_max)
    logger.info("not attracted within %d steps: %d residual positions", t_max, len(residual))
    return AttractionResult(False, None, sim.configuration, t_max, residual)


def random_finite_configuration(rng: np.random.Generator, width: int, height: int, density: float,
                                alphabet: Alphabet = F_ALPHABET,
                                states: Optional[Sequence[str]] = None) -> Configuration:
    """Random non-quiescent states on a width x height box with lower-left corner (0, 0)."""
    states = list(states or [s for s in alphabet.states if s != alphabet.quiescent])
    occupied = rng.random((height, width)) < density
    picks = rng.integers(0, len(states), size=(height, width))
    ys, xs = np.nonzero(occupied)
    return Configuration(alphabet, {(int(px), int(py)): states[int(picks[py, px])] for py, px in zip(ys, xs)})


# equicontinuity violation


@dataclass
class ViolationCertificate:
    """y, y' within delta of x whose orbits disagree within norm |z0| at time n."""

    y: Configuration
    y_prime: Configuration
    n: int
    z0: Position
    branch: str
    d_y: Dyadic
    d_y_prime: Dyadic
    separation: Dyadic

    @property
    def threshold(self) -> Dyadic:
        return Dyadic.power(norm(self.z0) + 1)

    def holds(self, delta: Dyadic) -> bool:
        return self.d_y <= delta and self.d_y_prime <= delta and self.separation > self.threshold


@dataclass
class ViolationResult:
    found: bool
    certificate: Optional[ViolationCertificate] = None
    reason: str = ""

    def report(self, params: Dict[str, Any]) -> WitnessReport:
        cert = self.certificate
        if cert is None:
            return WitnessReport("equicontinuity-violation", params, False, details={"reason": self.reason})
        details = {"n": cert.n, "z0": list(cert.z0), "branch": cert.branch, "d_y": str(cert.d_y),
                   "d_y_prime": str(cert.d_y_prime), "separation": str(cert.separation),
                   "threshold": str(cert.threshold), "y": format_grid(cert.y),
                   "y_prime": format_grid(cert.y_prime)}
        return WitnessReport("equicontinuity-violation", params, True, details=details)


def _drift(sim: Simulation, z0: Position, budget: int) -> bool:
    """Step until every particle lies more than four columns left of z0."""
    while True:
        xs = [p[0] for p in sim.configuration.positions_with(PARTICLE_STATES)]
        if not xs or max(xs) < z0[0] - 4:
            return True
        if sim.time >= budget:
            return False
        sim.run(1)


def equicontinuity_violation(x: Configuration, z0: Position, delta: Dyadic, horizon: int,
                             rt: Optional[ObstacleRuleTable] = None, threads: int = 1) -> ViolationResult:
    """Certified pair y, y' in the delta-ball of x separating at z0 within horizon steps.

    x is truncated to the delta-ball and attracted; residual particles drift
    away; a particle placed far right on the escape path from z0 reaches z0
    after exactly n steps.
    """
    k = _k(delta, "delta")
    rt = rt or f_automaton()
    branch = "free-start" if x.is_finite() else "uniform"
    y = x.truncate(k)
    attraction = attract_to_sft(y, rt=rt, threads=threads)
    if not attraction.attracted:
        return ViolationResult(False, reason=f"truncation not attracted within {attraction.t_max} steps")
    sim = Simulation(attraction.configuration, rt, threads)
    if not _drift(sim, z0, max(0, horizon - attraction.t0)):
        return ViolationResult(False, reason="residual particles still near the start at the horizon")
    t1 = attraction.t0 + sim.time
    settled = sim.configuration
    field_only = Configuration(settled.alphabet, {p: s for p, s in settled.items() if s not in PARTICLE_STATES})
    box = y.bounding_box()
    # nothing in the orbit of y reaches column box[2] + 2, so a particle from here on runs free
    reach = max(z0[0] if box is None else box[2], z0[0]) + 4
    try:
        obstacles = field_obstacles(field_only, rt.obstacle_class)
        length = max(reach, k + 1) - z0[0] + 2 + sum(2 * ob.half_perimeter for ob in obstacles)
        path = build_path(field_only, z0, length, rt.obstacle_class)
    except RoutingError as e:
        return ViolationResult(False, reason=str(e))
    m = next((i for i, (u, d) in enumerate(path.placements)
              if u[0] >= reach and min(norm(u), norm(d)) >= k and t1 + i > k), None)
    if m is None:
        return ViolationResult(False, reason="escape path too short")
    n = t1 + m
    if n > horizon:
        return ViolationResult(False, reason=f"needs n={n} steps, beyond horizon {horizon}")
    (ux, uy), (dx, dy) = path.placements[m]
    y_prime = y.with_cells({(ux + t1, uy): "U", (dx + t1, dy): "D"})
    a = Simulation(y, rt, threads).run(n).configuration
    b = Simulation(y_prime, rt, threads).run(n).configuration
    cert = ViolationCertificate(y, y_prime, n, z0, branch, cantor_distance(x, y), cantor_distance(x, y_prime),
                                cantor_distance(a, b))
    if not cert.holds(delta):
        return ViolationResult(False, reason=f"certificate check failed at n={n}: separation {cert.separation}")
    logger.info("equicontinuity violation at %s: n=%d (%s)", z0, n, branch)
    return ViolationResult(True, cert)


# sensitivity constant and classification


def sensitivity_constant_from_extent(l: int) -> Dyadic:
    """2^(-l/2+1) with the exponent rounded up and clamped at 0."""
    return Dyadic.power(max(0, -(-l // 2) - 1))


def constant_for_extent(extent: ObstacleExtent) -> Optional[Dyadic]:
    """None when obstacles are unbounded up to the search bound."""
    if extent.unbounded:
        return None
    return sensitivity_constant_from_extent(extent.l)


def sensitivity_constant(ca: CompiledCA, search_bound: int, threads: int = 1) -> Optional[Dyadic]:
    return constant_for_extent(max_admissible_obstacle(ca, search_bound, threads))


@dataclass
class ClassEvidence:
    class_hint: str
    horizon: int
    caveat: str = CAVEAT
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.class_hint not in CLASS_HINTS:
            raise ValueError(f"unknown class hint {self.class_hint!r}")
        if not self.caveat:
            self.caveat = CAVEAT

    def to_dict(self) -> Dict[str, Any]:
        return {"class_hint": self.class_hint, "horizon": self.horizon, "caveat": self.caveat,
                "details": dict(self.details)}


def fixed_t_obstacle_sides(ca: CompiledCA, budget: int) -> Tuple[List[int], List[int]]:
    """Sides 3..budget whose tiling witness gives a T-obstacle fixed by the CA, and the rest."""
    rt = ca.rule_table
    fixed, failed = [], []
    for side in range(MIN_SIDE, budget + 1):
        result = tiles_square(rt.tileset, side)
        if result.tilable:
            x = t_obstacle(ca, result.witness)
            if Simulation(x, rt).run(1).configuration == x:
                fixed.append(side)
                continue
        failed.append(side)
    return fixed, failed


def _centred_obstacle(ca: CompiledCA, extent: ObstacleExtent) -> Configuration:
    rows = extent.witnesses[(extent.bound, extent.bound)]
    start = -(extent.bound // 2)
    return obstacle_from_witness(ca, rows, (start, start))


def classify_evidence(ca: CompiledCA, horizon: int, budget: int, seed: int,
                      threads: int = 1, samples: int = 8) -> ClassEvidence:
    """Eq-like when fixed T-obstacles exist at every side up to budget,
    otherwise S-like for bounded obstacles and N-like for unbounded ones."""
    if ca.obstacle_library is None:
        raise CAError(f"{ca.name} has no obstacle library to classify with")
    details: Dict[str, Any] = {"budget": budget, "seed": seed, "provenance": ca.provenance.phi}
    if ca.provenance.phi == "phi4":
        fixed, failed = fixed_t_obstacle_sides(ca, budget)
        details["fixed_t_obstacle_sides"] = fixed
        if fixed and not failed:
            return ClassEvidence("Eq-like", horizon, details=details)
    extent = max_admissible_obstacle(ca, budget, threads)
    details.update({"max_w": extent.max_w, "max_h": extent.max_h, "unbounded": extent.unbounded})
    if not extent.unbounded:
        details["constant"] = str(sensitivity_constant_from_extent(extent.l))
        return ClassEvidence("S-like", horizon, details=details)
    eps = Dyadic.power(max(1, (extent.bound + 2) // 2))
    witness = _centred_obstacle(ca, extent)
    check = check_nonsensitivity(witness, eps, horizon, samples, seed, ca.rule_table, threads)
    details["nonsensitivity"] = check.to_dict()["outcome"]
    return ClassEvidence("N-like", horizon, details=details)
