#!/usr/bin/env python3
"""
Integration tests for ca_cli.py.

Each test runs the script in a subprocess on the fixture corpus and checks
exit codes, stdout results and written files.
"""

import json
import os
import shutil
import subprocess
import sys
import tempfile
import unittest

sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))))

from ca_utils import format_grid, load_rules, t_obstacle

TOOLKIT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
SCRIPT = os.path.join(TOOLKIT_DIR, "ca_cli.py")
FIXTURES = os.path.join(TOOLKIT_DIR, "fixtures")
F_RULES = os.path.join(os.path.dirname(TOOLKIT_DIR), "ca_utils", "data", "f_rules.ca")


def fixture(*parts):
    return os.path.join(FIXTURES, *parts)


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


class CliTestCase(unittest.TestCase):
    """Runs ca_cli.py with a private runs directory."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.runs_dir = os.path.join(self.temp_dir, "runs")

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def run_cli(self, *argv, timeout=300):
        cmd = [sys.executable, SCRIPT, "--runs-dir", self.runs_dir] + list(argv)
        return subprocess.run(cmd, capture_output=True, text=True, cwd=self.temp_dir, timeout=timeout)

    def tmp(self, name):
        return os.path.join(self.temp_dir, name)


class TestSimulate(CliTestCase):
    """simulate on the particle and obstacle fixtures."""

    def test_particle_moves_left(self):
        """After 10 steps the particle sits 10 columns to the left."""
        result = self.run_cli("simulate", fixture("grids", "particle.grid"), "--steps", "10")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertEqual(result.stdout, "ca-grid v1\nalphabet: F\nbackground: 0\norigin: -10 0\nU\nD\n")

    def test_zero_steps_is_identity(self):
        """steps = 0 reproduces the canonical input byte for byte."""
        for name in ("particle.grid", "obstacle.grid", "empty.grid"):
            out = self.tmp(name)
            result = self.run_cli("simulate", fixture("grids", name), "--steps", "0", "--out", out)
            self.assertEqual(result.returncode, 0, result.stderr)
            self.assertEqual(read_bytes(out), read_bytes(fixture("grids", name)))

    def test_obstacle_snapshots_unchanged(self):
        """Every snapshot of the obstacle equals the input."""
        out_dir = self.tmp("frames")
        result = self.run_cli("simulate", fixture("grids", "obstacle.grid"), "--steps", "6", "--every", "2",
                              "--out-dir", out_dir, "--frames", "ascii")
        self.assertEqual(result.returncode, 0, result.stderr)
        snapshots = sorted(f for f in os.listdir(out_dir) if f.endswith(".grid"))
        self.assertEqual(snapshots, ["step_0000.grid", "step_0002.grid", "step_0004.grid", "step_0006.grid"])
        for name in snapshots:
            self.assertEqual(read_bytes(os.path.join(out_dir, name)), read_bytes(fixture("grids", "obstacle.grid")))
        self.assertTrue(os.path.exists(os.path.join(out_dir, "step_0006.txt")))

    def test_ppm_frames(self):
        """PPM frames start with a P6 header."""
        out_dir = self.tmp("ppm")
        result = self.run_cli("simulate", fixture("grids", "particle.grid"), "--steps", "1",
                              "--out-dir", out_dir, "--frames", "ppm")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertTrue(read_bytes(os.path.join(out_dir, "step_0001.ppm")).startswith(b"P6\n"))

    def test_alphabet_mismatch(self):
        """A grid over another alphabet exits 2."""
        result = self.run_cli("simulate", fixture("grids", "rule184_rows.grid"), "--steps", "1")
        self.assertEqual(result.returncode, 2)
        self.assertIn("alphabet", result.stderr)


class TestValidate(CliTestCase):
    """validate exit codes."""

    def test_schematic_obstacle(self):
        """The schematic obstacle passes with one obstacle listed."""
        result = self.run_cli("validate", fixture("grids", "obstacle.grid"))
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertIn("obstacles: 1", result.stdout)

    def test_lone_one(self):
        """A lone 1 fails with violation positions listed."""
        result = self.run_cli("validate", fixture("grids", "lone_one.grid"))
        self.assertEqual(result.returncode, 1)
        self.assertIn("violation: ", result.stdout)

    def test_bad_corner(self):
        """A wrong corner state fails."""
        result = self.run_cli("validate", fixture("grids", "bad_corner.grid"))
        self.assertEqual(result.returncode, 1)

    def test_empty(self):
        """The empty grid passes."""
        result = self.run_cli("validate", fixture("grids", "empty.grid"))
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertIn("obstacles: 0", result.stdout)

    def test_ragged_raster(self):
        """A ragged raster is a parse error with its line."""
        result = self.run_cli("validate", fixture("grids", "ragged.grid"))
        self.assertEqual(result.returncode, 2)
        self.assertIn("line 6", result.stderr)


class TestCompile(CliTestCase):
    """compile and the searches on compiled CA."""

    def compile(self, source, phi, name):
        out = self.tmp(name)
        result = self.run_cli("compile", source, "--phi", phi, "--out", out)
        self.assertEqual(result.returncode, 0, result.stderr)
        return out

    def test_recompile_is_deterministic(self):
        """Compiling twice gives identical bytes."""
        a = self.compile(fixture("machines", "loop.tm"), "2", "a.rules")
        b = self.compile(fixture("machines", "loop.tm"), "2", "b.rules")
        self.assertEqual(read_bytes(a), read_bytes(b))
        self.assertTrue(read_bytes(a).startswith(b"ca-rules v1\n"))

    def test_looping_machine_phi2_unbounded(self):
        """phi2 of a looping machine admits obstacles up to the bound."""
        rules = self.compile(fixture("machines", "loop.tm"), "2", "loop.rules")
        result = self.run_cli("obstacle-search", rules, "--bound", "4")
        self.assertEqual(result.returncode, 0, result.stderr)
        report = json.loads(result.stdout)
        self.assertTrue(report["unbounded"])

    def test_looping_machine_phi3_empty(self):
        """phi3 of a looping machine admits no obstacle."""
        rules = self.compile(fixture("machines", "loop.tm"), "3", "loop3.rules")
        result = self.run_cli("obstacle-search", rules, "--bound", "4")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertTrue(json.loads(result.stdout)["empty"])

    def test_halting_machine_constant(self):
        """phi2 of a halting machine has a sensitivity constant."""
        rules = self.compile(fixture("machines", "halt_immediately.tm"), "2", "halt.rules")
        result = self.run_cli("constant", rules, "--bound", "4")
        self.assertEqual(result.returncode, 0, result.stderr)
        report = json.loads(result.stdout)
        self.assertFalse(report["unbounded"])
        self.assertIsNotNone(report["constant"])

    def test_plain_f_has_no_constant(self):
        """F admits every obstacle, so no constant is found."""
        result = self.run_cli("constant", F_RULES, "--bound", "3")
        self.assertEqual(result.returncode, 1)
        self.assertIsNone(json.loads(result.stdout)["constant"])

    def test_phi4_square_is_fixed(self):
        """A T-obstacle of the single-tile set survives simulation."""
        rules = self.compile(fixture("tiles", "single.tiles"), "4", "one.rules")
        ca = load_rules(rules)
        grid = self.tmp("square.grid")
        with open(grid, "w", encoding="utf-8") as f:
            f.write(format_grid(t_obstacle(ca, [["t"] * 5 for _ in range(5)])))
        result = self.run_cli("simulate", grid, "--rules", rules, "--steps", "3")
        self.assertEqual(result.returncode, 0, result.stderr)
        with open(grid, encoding="utf-8") as f:
            self.assertEqual(result.stdout, f.read())

    def test_phi4_classify_eq_like(self):
        """The single-tile set gives Eq-like evidence with the caveat."""
        rules = self.compile(fixture("tiles", "single.tiles"), "4", "one.rules")
        result = self.run_cli("--seed", "3", "classify", rules, "--budget", "5", "--horizon", "10")
        self.assertEqual(result.returncode, 0, result.stderr)
        report = json.loads(result.stdout)
        self.assertEqual(report["class_hint"], "Eq-like")
        self.assertIn("undecidable", report["caveat"])
        self.assertEqual(report["seed"], 3)

    def test_lifted_rule184(self):
        """The lifted rule 184 steps each row like the 1D rule."""
        rules = self.compile(fixture("rules", "rule184.ca1d"), "lift", "rule184.rules")
        result = self.run_cli("simulate", fixture("grids", "rule184_rows.grid"), "--rules", rules, "--steps", "1")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertEqual(result.stdout, "ca-grid v1\nalphabet: rule184\nbackground: 0\norigin: 0 0\n1.1.1\n1.1.1\n")


class TestAnalysisCommands(CliTestCase):
    """witness, violate and attract reports."""

    def test_witness_passes(self):
        """The centred obstacle withstands sampled perturbations."""
        result = self.run_cli("--seed", "1", "witness", "--eps", "2^-2", "--horizon", "20", "--samples", "5")
        self.assertEqual(result.returncode, 0, result.stderr)
        report = json.loads(result.stdout)
        self.assertEqual(report["outcome"], "pass")
        self.assertEqual(report["parameters"]["seed"], 1)

    def test_witness_is_reproducible(self):
        """Identical seeds give identical reports."""
        first = self.run_cli("--seed", "9", "witness", "--eps", "2^-1", "--horizon", "10", "--samples", "4")
        second = self.run_cli("--seed", "9", "witness", "--eps", "2^-1", "--horizon", "10", "--samples", "4")
        self.assertEqual(first.stdout, second.stdout)

    def test_violate_all_zero(self):
        """The all-0 configuration has a certified violation."""
        result = self.run_cli("violate", "--uniform", "0", "--z0", "0,0", "--delta", "2^-2", "--horizon", "500")
        self.assertEqual(result.returncode, 0, result.stderr)
        report = json.loads(result.stdout)
        self.assertEqual(report["outcome"], "pass")
        self.assertEqual(report["details"]["branch"], "free-start")

    def test_violate_needs_input(self):
        """Without a grid or --uniform the command fails."""
        result = self.run_cli("violate", "--z0", "0,0", "--delta", "2^-2")
        self.assertEqual(result.returncode, 1)

    def test_attract_lone_one(self):
        """A lone 1 settles."""
        result = self.run_cli("attract", fixture("grids", "lone_one.grid"))
        self.assertEqual(result.returncode, 0, result.stderr)
        report = json.loads(result.stdout)
        self.assertEqual(report["outcome"], "pass")
        self.assertIn("configuration", report)


class TestRouteAndRender(CliTestCase):
    """route and render outputs."""

    def test_route_lists_points(self):
        """The path from a free cell right of the obstacle is listed."""
        overlay = self.tmp("path.ppm")
        result = self.run_cli("route", fixture("grids", "obstacle.grid"), "--start", "6,1", "--length", "12",
                              "--render", overlay)
        self.assertEqual(result.returncode, 0, result.stderr)
        lines = result.stdout.splitlines()
        self.assertTrue(lines[0].startswith("case: "))
        self.assertEqual(lines[1], "start: 6 1")
        points = int(lines[3].split(":")[1])
        self.assertGreaterEqual(points, 12)
        self.assertEqual(lines[4], "0 6 1")
        self.assertTrue(read_bytes(overlay).startswith(b"P6\n"))

    def test_route_rejects_occupied_start(self):
        """Starting inside the obstacle is a routing failure."""
        result = self.run_cli("route", fixture("grids", "obstacle.grid"), "--start", "2,1", "--length", "5")
        self.assertEqual(result.returncode, 1)

    def test_render_ascii(self):
        """ASCII render shows the obstacle inside a one-cell margin."""
        result = self.run_cli("render", fixture("grids", "obstacle.grid"))
        self.assertEqual(result.returncode, 0, result.stderr)
        lines = result.stdout.splitlines()
        self.assertEqual(len(lines), 6)
        self.assertEqual(lines[0], ".......")
        self.assertEqual(lines[2], ".→111←.")

    def test_render_ppm_scale(self):
        """PPM dimensions follow the frame box times the scale."""
        out = self.tmp("obstacle.ppm")
        result = self.run_cli("render", fixture("grids", "obstacle.grid"), "--format", "ppm", "--scale", "2",
                              "--out", out)
        self.assertEqual(result.returncode, 0, result.stderr)
        data = read_bytes(out)
        self.assertTrue(data.startswith(b"P6\n14 12\n255\n"))
        self.assertEqual(len(data), len(b"P6\n14 12\n255\n") + 14 * 12 * 3)


class TestManifestReplay(CliTestCase):
    """Manifests reproduce their outputs."""

    def test_replay_matches(self):
        """Replaying a simulate run reproduces every digest."""
        out_dir = self.tmp("frames")
        result = self.run_cli("simulate", fixture("grids", "particle.grid"), "--steps", "3",
                              "--out-dir", out_dir, "--frames", "ascii", "--out", self.tmp("final.grid"))
        self.assertEqual(result.returncode, 0, result.stderr)
        manifest = os.path.join(self.runs_dir, "001_simulate.json")
        self.assertTrue(os.path.exists(manifest))
        replay = self.run_cli("replay", manifest, "--scratch", self.tmp("scratch"))
        self.assertEqual(replay.returncode, 0, replay.stderr)
        self.assertIn("Mismatches: 0", replay.stderr)
        self.assertTrue(os.path.exists(os.path.join(self.temp_dir, "scratch", "final.grid")))

    def test_replay_detects_change(self):
        """A tampered digest is reported as a mismatch."""
        result = self.run_cli("render", fixture("grids", "obstacle.grid"))
        self.assertEqual(result.returncode, 0, result.stderr)
        manifest = os.path.join(self.runs_dir, "001_render.json")
        with open(manifest, encoding="utf-8") as f:
            data = json.load(f)
        data["outputs"]["render"] = "0" * 64
        with open(manifest, "w", encoding="utf-8") as f:
            json.dump(data, f)
        replay = self.run_cli("replay", manifest)
        self.assertEqual(replay.returncode, 1)

    def test_config_seed_in_report(self):
        """The config file seed is embedded when --seed is absent."""
        result = self.run_cli("--config", fixture("configs", "run_config.json"), "witness", "--eps", "2^-1",
                              "--horizon", "5", "--samples", "2")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertEqual(json.loads(result.stdout)["parameters"]["seed"], 7)

    def test_bad_config(self):
        """An invalid config file exits 2."""
        result = self.run_cli("--config", fixture("configs", "bad_config.json"), "validate",
                              fixture("grids", "empty.grid"))
        self.assertEqual(result.returncode, 2)


if __name__ == '__main__':
    unittest.main()
