#!/usr/bin/env python3
"""
Unit tests for the dynamics witnesses: non-sensitivity, attraction,
equicontinuity violations, sensitivity constants and classification.
"""

import json
import unittest

# Add parent directory to path to import ca_utils
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from ca_utils import (Configuration, Dyadic, F_ALPHABET, attract_to_sft, check_nonsensitivity,
                      classify_evidence, decompose_obstacles, equicontinuity_violation, lift_1d_to_2d, elementary_rule,
                      nonsensitivity_witness, obstacle_configuration, parse_tm, phi2, phi4, plain_f,
                      random_obstacle_field, run, sensitivity_constant, violations)
from ca_utils.analysis import (CAVEAT, ClassEvidence, compare_orbits, constant_for_extent,
                               random_finite_configuration, report_json, sensitivity_constant_from_extent, witness_side)
from ca_utils.compilers import CompiledCA, Provenance, max_admissible_obstacle
from ca_utils.errors import CAError
from ca_utils.rules import f_automaton
from ca_utils.sft import default_sigma_af
from ca_utils.tiling import single_tile_set

HALT_NOW = "tm v1\nname: halt-now\ninitial: a\nfinal: h\nblank: 0\na 0 -> h 0 R\n"
START_ZONE = [(0, 0), (0, 1), (0, -1), (1, 0)]
SLOW = os.environ.get("CA_SLOW_TESTS") == "1"


def assert_settles(test, seed, side, density=0.3):
    """A random side x side soup settles, decomposes and stays settled for 50 steps."""
    x = random_finite_configuration(np.random.default_rng(seed), side, side, density)
    result = attract_to_sft(x)
    test.assertTrue(result.attracted, f"seed {seed}: {result.residual}")
    decompose_obstacles(result.configuration)
    later = run(result.configuration, f_automaton(), 50)
    test.assertEqual(violations(later, default_sigma_af()), set(), f"seed {seed}")


class TestNonsensitivity(unittest.TestCase):
    """Centred obstacles shield the centre."""

    def test_witness_shape(self):
        """eps = 2^-3 gives a 6x6 footprint around the origin."""
        x = nonsensitivity_witness(Dyadic.power(3))
        self.assertEqual(x.bounding_box(), (-3, -3, 2, 2))
        self.assertEqual(x[(2, 2)], "↙")
        self.assertEqual(x[(0, 0)], "1")

    def test_side_is_clamped(self):
        """The footprint never drops below the smallest legal obstacle."""
        self.assertEqual(witness_side(Dyadic.power(1)), 3)
        self.assertEqual(witness_side(Dyadic.power(2), min_interior=3), 5)

    def test_check_passes(self):
        """Perturbations far out never reach the centre."""
        eps = Dyadic.power(2)
        report = check_nonsensitivity(nonsensitivity_witness(eps), eps, 12, 6, seed=1)
        self.assertTrue(report.passed, report.details)
        self.assertEqual(report.parameters["seed"], 1)

    def test_check_passes_for_small_eps(self):
        """Witnesses for eps = 2^-1 .. 2^-5 all hold on a short horizon."""
        for k in range(1, 6):
            eps = Dyadic.power(k)
            report = check_nonsensitivity(nonsensitivity_witness(eps), eps, 20, 8, seed=k)
            self.assertTrue(report.passed, f"k={k}: {report.details}")

    def test_reproducible(self):
        """Same seed, same report, with or without threads."""
        eps = Dyadic.power(2)
        c = nonsensitivity_witness(eps)
        first = check_nonsensitivity(c, eps, 8, 4, seed=5).to_dict()
        second = check_nonsensitivity(c, eps, 8, 4, seed=5, threads=3).to_dict()
        self.assertEqual(first, second)

    def test_particle_reaches_centre(self):
        """A particle five columns right separates the orbits at t = 5."""
        c = Configuration(F_ALPHABET)
        y = c.with_cells({(5, 1): "U", (5, 0): "D"})
        self.assertEqual(compare_orbits(c, y, f_automaton(), Dyadic.power(1), 10), 5)
        self.assertIsNone(compare_orbits(c, y, f_automaton(), Dyadic.power(1), 4))

    def test_eps_must_be_below_one(self):
        """eps = 1 is refused."""
        with self.assertRaises(CAError):
            nonsensitivity_witness(Dyadic.power(0))


class TestAttraction(unittest.TestCase):
    """Finite configurations settle into obstacle fields."""

    def test_lone_one(self):
        """A lone 1 is gone after one step."""
        result = attract_to_sft(Configuration(F_ALPHABET, {(0, 0): "1"}))
        self.assertTrue(result.attracted)
        self.assertEqual(result.t0, 1)
        self.assertEqual(len(result.configuration), 0)

    def test_settled_inputs(self):
        """Obstacle fields and free particles are settled already."""
        field, _ = random_obstacle_field(np.random.default_rng(4), 6)
        self.assertEqual(attract_to_sft(field).t0, 0)
        particle = Configuration(F_ALPHABET, {(0, 1): "U", (0, 0): "D"})
        self.assertEqual(attract_to_sft(particle).t0, 0)

    def test_random_configurations(self):
        """Random soup settles within the default budget."""
        for seed in range(3):
            x = random_finite_configuration(np.random.default_rng(seed), 8, 8, 0.3)
            result = attract_to_sft(x)
            self.assertTrue(result.attracted, f"seed {seed}: {result.residual}")
            self.assertLessEqual(result.t0, result.t_max)

    def test_settled_soups_are_stable(self):
        """Settled soups decompose into obstacles and stay violation-free."""
        for seed in range(10):
            assert_settles(self, seed, 6 + 2 * seed)

    def test_close_pair_never_settles(self):
        """Two obstacles a single cell apart stay put and stay inadmissible."""
        x = obstacle_configuration([((0, 0), 2, 2), ((5, 0), 2, 2)])
        result = attract_to_sft(x, t_max=5)
        self.assertFalse(result.attracted)
        self.assertTrue(result.residual)
        self.assertEqual(result.report(seed=3).to_dict()["outcome"], "fail")

    def test_infinite_input(self):
        """A non-quiescent background is refused."""
        with self.assertRaises(CAError):
            attract_to_sft(Configuration(F_ALPHABET, {}, "1"))

    def test_random_configuration_box(self):
        """Random configurations stay in their box and repeat per seed."""
        a = random_finite_configuration(np.random.default_rng(9), 5, 4, 0.5)
        b = random_finite_configuration(np.random.default_rng(9), 5, 4, 0.5)
        self.assertEqual(a, b)
        self.assertTrue(all(0 <= p[0] < 5 and 0 <= p[1] < 4 for p in a.support()))


class TestEquicontinuityViolation(unittest.TestCase):
    """Escape paths separate nearby orbits."""

    def test_all_zero(self):
        """The all-0 configuration has a certified violation at the origin."""
        delta = Dyadic.power(2)
        result = equicontinuity_violation(Configuration(F_ALPHABET), (0, 0), delta, 500)
        self.assertTrue(result.found, result.reason)
        cert = result.certificate
        self.assertTrue(cert.holds(delta))
        self.assertEqual(cert.branch, "free-start")
        self.assertLessEqual(cert.n, 500)
        self.assertEqual(result.report({"delta": str(delta)}).to_dict()["outcome"], "pass")

    def test_obstacle_field(self):
        """Violations exist next to obstacles too."""
        delta = Dyadic.power(3)
        x = obstacle_configuration([((4, -1), 2, 3)])
        result = equicontinuity_violation(x, (0, 0), delta, 2000)
        self.assertTrue(result.found, result.reason)
        self.assertTrue(result.certificate.holds(delta))

    def test_all_one(self):
        """The all-1 configuration has violations at the origin and off it."""
        delta = Dyadic.power(3)
        x = Configuration(F_ALPHABET, {}, "1")
        for z0 in ((0, 0), (2, 1)):
            result = equicontinuity_violation(x, z0, delta, 500)
            self.assertTrue(result.found, f"{z0}: {result.reason}")
            self.assertEqual(result.certificate.branch, "uniform")
            self.assertTrue(result.certificate.holds(delta))

    def test_random_fields(self):
        """Random obstacle fields all carry a violation at the origin."""
        delta = Dyadic.power(5)
        for seed in range(10):
            x, _ = random_obstacle_field(np.random.default_rng(seed), 6, keep_free=START_ZONE)
            result = equicontinuity_violation(x, (0, 0), delta, 2000)
            self.assertTrue(result.found, f"seed {seed}: {result.reason}")
            self.assertTrue(result.certificate.holds(delta))

    def test_horizon_too_short(self):
        """A tiny horizon is reported, not raised."""
        result = equicontinuity_violation(Configuration(F_ALPHABET), (0, 0), Dyadic.power(4), 2)
        self.assertFalse(result.found)
        self.assertTrue(result.reason)

    def test_bad_delta(self):
        """delta must be below 1."""
        with self.assertRaises(CAError):
            equicontinuity_violation(Configuration(F_ALPHABET), (0, 0), Dyadic.power(0), 10)


class TestSensitivityConstant(unittest.TestCase):
    """Constants from obstacle extents."""

    def test_formula(self):
        """2^-(ceil(l/2) - 1), never above 1."""
        self.assertEqual(sensitivity_constant_from_extent(6), Dyadic.power(2))
        self.assertEqual(sensitivity_constant_from_extent(5), Dyadic.power(2))
        self.assertEqual(sensitivity_constant_from_extent(2), Dyadic.power(0))
        self.assertEqual(sensitivity_constant_from_extent(0), Dyadic.power(0))

    def test_unbounded_has_no_constant(self):
        """F's obstacles are unbounded."""
        self.assertIsNone(constant_for_extent(max_admissible_obstacle(plain_f(), 3)))

    def test_halting_machine(self):
        """One-row obstacles give the constant 1."""
        self.assertEqual(sensitivity_constant(phi2(parse_tm(HALT_NOW)), 3), Dyadic.power(0))


class TestClassification(unittest.TestCase):
    """Bounded-horizon class hints."""

    def test_tile_set_is_eq_like(self):
        """Fixed T-obstacles of every side suggest equicontinuity."""
        evidence = classify_evidence(phi4(single_tile_set()), 10, 5, seed=3)
        self.assertEqual(evidence.class_hint, "Eq-like")
        self.assertEqual(evidence.details["fixed_t_obstacle_sides"], [3, 4, 5])
        self.assertIn("undecidable", evidence.to_dict()["caveat"])

    def test_halting_machine_is_s_like(self):
        """Bounded obstacles suggest sensitivity."""
        evidence = classify_evidence(phi2(parse_tm(HALT_NOW)), 10, 3, seed=0)
        self.assertEqual(evidence.class_hint, "S-like")
        self.assertEqual(evidence.details["constant"], "2^-0")

    def test_f_is_n_like(self):
        """Unbounded obstacles without T-obstacles suggest neither."""
        evidence = classify_evidence(plain_f(), 6, 3, seed=0, samples=2)
        self.assertEqual(evidence.class_hint, "N-like")
        self.assertEqual(evidence.details["seed"], 0)
        self.assertIn(evidence.details["nonsensitivity"], ("pass", "fail"))

    def test_lifted_cannot_be_classified(self):
        """Classification needs an obstacle library."""
        lifted = CompiledCA(lift_1d_to_2d(elementary_rule(110)), None, Provenance("lift", "rule110", ""))
        with self.assertRaises(CAError):
            classify_evidence(lifted, 5, 3, seed=0)

    def test_unknown_hint(self):
        """Only the three hints exist."""
        with self.assertRaises(ValueError):
            ClassEvidence("Chaotic", 5)
        self.assertEqual(ClassEvidence("S-like", 5, caveat="").caveat, CAVEAT)

    def test_report_json_sorted(self):
        """Reports serialise with sorted keys and a trailing newline."""
        text = report_json({"b": 1, "a": 2})
        self.assertTrue(text.endswith("\n"))
        self.assertEqual(list(json.loads(text)), ["a", "b"])
        self.assertLess(text.index('"a"'), text.index('"b"'))


class TestAcceptanceSizes(unittest.TestCase):
    """Full-size runs, enabled with CA_SLOW_TESTS=1."""

    def setUp(self):
        if not SLOW:
            self.skipTest("set CA_SLOW_TESTS=1 to run full-size checks")

    def test_nonsensitivity_long_horizon(self):
        """200 samples over 200 steps for eps = 2^-1 .. 2^-5."""
        for k in range(1, 6):
            eps = Dyadic.power(k)
            report = check_nonsensitivity(nonsensitivity_witness(eps), eps, 200, 200, seed=k, threads=4)
            self.assertTrue(report.passed, f"k={k}: {report.details}")

    def test_many_soups(self):
        """Forty soups up to 30 x 30 settle and stay settled."""
        for seed in range(40):
            assert_settles(self, seed, 10 + seed % 21)


if __name__ == '__main__':
    unittest.main()
