"""
Cellular Automaton Utilities

Shared library for the obstacle/particle cellular automaton F and its
compiled variants: configurations and the Cantor metric, pattern libraries,
the stepping engine, escape paths, the compilers from Turing machines and
tile sets, and executable witnesses for the dynamics.
"""

from .grid import (
    Alphabet,
    Configuration,
    Dyadic,
    Pattern,
    Wildcard,
    cantor_distance,
    shift,
    extract,
    pattern_matches,
    format_grid,
    parse_grid
)

from .sft import (
    F_ALPHABET,
    Obstacle,
    PatternLibrary,
    sigma_af,
    violations,
    decompose_obstacles,
    obstacle_configuration,
    random_obstacle_field,
    export_library
)

from .rules import (
    RuleTable,
    ObstacleRuleTable,
    f_automaton,
    local_rule_f,
    parse_rule_table,
    format_rule_table,
    load_rule_table
)

from .engine import Simulation, step, run, orbit, particles

from .router import (
    Path,
    build_path,
    place_particle,
    place_at,
    verify_arrival,
    verify_segment,
    calibrate_n0
)

from .turing import TuringMachine, run_tm, tm_to_tileset, parse_tm, load_tm

from .tiling import TileSet, tiles_square, parse_tileset, load_tileset

from .lift import lift_1d_to_2d, elementary_rule, run_1d

from .compilers import (
    CompiledCA,
    phi2,
    phi3,
    plain_f,
    max_admissible_obstacle,
    format_compiled,
    parse_compiled,
    load_rules
)

from .tobstacles import phi4, t_obstacle

from .analysis import (
    nonsensitivity_witness,
    check_nonsensitivity,
    attract_to_sft,
    equicontinuity_violation,
    sensitivity_constant,
    classify_evidence
)

from .config_utils import (
    load_json_file,
    load_run_config,
    validate_run_config
)

from .errors import CAError

__all__ = [
    'Alphabet',
    'Configuration',
    'Dyadic',
    'Pattern',
    'Wildcard',
    'cantor_distance',
    'shift',
    'extract',
    'pattern_matches',
    'format_grid',
    'parse_grid',
    'F_ALPHABET',
    'Obstacle',
    'PatternLibrary',
    'sigma_af',
    'violations',
    'decompose_obstacles',
    'obstacle_configuration',
    'random_obstacle_field',
    'export_library',
    'RuleTable',
    'ObstacleRuleTable',
    'f_automaton',
    'local_rule_f',
    'parse_rule_table',
    'format_rule_table',
    'load_rule_table',
    'Simulation',
    'step',
    'run',
    'orbit',
    'particles',
    'Path',
    'build_path',
    'place_particle',
    'place_at',
    'verify_arrival',
    'verify_segment',
    'calibrate_n0',
    'TuringMachine',
    'run_tm',
    'tm_to_tileset',
    'parse_tm',
    'load_tm',
    'TileSet',
    'tiles_square',
    'parse_tileset',
    'load_tileset',
    'lift_1d_to_2d',
    'elementary_rule',
    'run_1d',
    'CompiledCA',
    'phi2',
    'phi3',
    'plain_f',
    'max_admissible_obstacle',
    'format_compiled',
    'parse_compiled',
    'load_rules',
    'phi4',
    't_obstacle',
    'nonsensitivity_witness',
    'check_nonsensitivity',
    'attract_to_sft',
    'equicontinuity_violation',
    'sensitivity_constant',
    'classify_evidence',
    'load_json_file',
    'load_run_config',
    'validate_run_config',
    'CAError'
]
