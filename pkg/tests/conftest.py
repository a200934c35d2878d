"""Shared test fixtures: the bundled problem zoo and strategy applicability."""

from bcdcert.problems import ProblemSpec, make_problem, random_start

# Which x-strategies each family's declared oracles support. Rosenbrock
# deliberately has no Lipschitz oracle, so only backtracking applies.
APPLICABLE = {
    "tight_quadratic": ("fixed_step", "exact_min", "backtracking"),
    "coupled_quadratic": ("fixed_step", "exact_min", "backtracking"),
    "matrix_factorization": ("fixed_step", "exact_min", "backtracking"),
    "two_block_rosenbrock": ("backtracking",),
}

ZOO_PARAMS = {
    "tight_quadratic": {"l": 4.0, "anchor": [1.0, -2.0, 0.5], "g": [4.0, 0.0, -2.0]},
    "coupled_quadratic": {"n_x": 4, "n_y": 3},
    "matrix_factorization": {"m": 4, "n": 3, "r": 2},
    "two_block_rosenbrock": {"scale": 100.0},
}

ALL_COMBOS = [
    (family, strategy)
    for family in APPLICABLE
    for strategy in APPLICABLE[family]
]


def zoo_problem(family, seed=0):
    return make_problem(ProblemSpec(family, seed=seed, params=dict(ZOO_PARAMS[family])))


def zoo_start(obj, seed=0):
    return random_start(obj, seed)
