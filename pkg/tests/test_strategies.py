import numpy as np
import pytest

from bcdcert.errors import (
    BacktrackExhausted,
    InnerSolveFailed,
    MissingExactMinimizer,
    MissingLipschitzOracle,
    NonFiniteValue,
    SufficientDecreaseViolated,
)
from bcdcert.problem import BlockPoint, Objective
from bcdcert.problems import (
    CoupledQuadratic,
    LipschitzOverride,
    TightQuadratic,
    TwoBlockRosenbrock,
)
from bcdcert.strategies import (
    BacktrackParams,
    backtracking_gradient_x,
    exact_min_x,
    fixed_step_gradient_x,
    full_gradient_step,
    stationary_y,
)

from conftest import zoo_problem


def tight():
    return TightQuadratic(4.0, [1.0], [4.0])


# --- fixed step -------------------------------------------------------------


def test_fixed_step_achieves_equality_on_the_model():
    # On the exact quadratic with the exact L, the 1/L step lands on the
    # vertex and the decrease equals ||g||^2/(2L) to the last bit of algebra.
    obj = tight()
    p = BlockPoint([3.0])
    upd = fixed_step_gradient_x(obj, p)
    np.testing.assert_allclose(upd.x_next, [0.0])
    assert upd.e_t == 4.0
    decrease = obj.value(p) - obj.value(p.with_x(upd.x_next))
    need = float(obj.grad_x(p) @ obj.grad_x(p)) / (2.0 * 4.0)
    assert decrease == pytest.approx(need, rel=1e-12)


def test_fixed_step_rejects_a_lying_constant():
    # L declared at half the truth: the step doubles past the vertex and the
    # decrease on this symmetric quadratic is exactly zero.
    lying = LipschitzOverride(tight(), 2.0)
    with pytest.raises(SufficientDecreaseViolated):
        fixed_step_gradient_x(lying, BlockPoint([3.0]))


def test_fixed_step_needs_the_oracle():
    with pytest.raises(MissingLipschitzOracle):
        fixed_step_gradient_x(TwoBlockRosenbrock(), BlockPoint([0.0], [0.0]))


def test_fixed_step_accepts_overestimates():
    # a too-large constant is safe, just slower
    cautious = LipschitzOverride(tight(), 40.0)
    upd = fixed_step_gradient_x(cautious, BlockPoint([3.0]))
    assert upd.e_t == 40.0


@pytest.mark.parametrize("seed", range(10))
def test_fixed_step_certifies_on_random_quadratics(seed):
    obj = zoo_problem("coupled_quadratic", seed=seed)
    rng = np.random.default_rng(seed)
    p = BlockPoint(rng.standard_normal(obj.n_x), rng.standard_normal(obj.n_y))
    upd = fixed_step_gradient_x(obj, p)
    f0 = obj.value(p)
    f1 = obj.value(p.with_x(upd.x_next))
    gx = obj.grad_x(p)
    assert f0 - f1 >= float(gx @ gx) / (2 * upd.e_t) - 1e-12 * max(1, abs(f0))


# --- exact minimization -----------------------------------------------------


@pytest.mark.parametrize("seed", range(20))
def test_exact_min_dominates_fixed_step(seed):
    # the argmin can only fall lower than the 1/L trial point
    obj = zoo_problem("coupled_quadratic", seed=100 + seed)
    rng = np.random.default_rng(seed)
    p = BlockPoint(rng.standard_normal(obj.n_x), rng.standard_normal(obj.n_y))
    f0 = obj.value(p)
    d_exact = f0 - obj.value(p.with_x(exact_min_x(obj, p).x_next))
    d_fixed = f0 - obj.value(p.with_x(fixed_step_gradient_x(obj, p).x_next))
    assert d_exact >= d_fixed - 1e-12


def test_exact_min_reports_L_as_its_constant():
    obj = zoo_problem("coupled_quadratic", seed=0)
    p = BlockPoint(np.ones(obj.n_x), np.ones(obj.n_y))
    assert exact_min_x(obj, p).e_t == obj.lipschitz_x(p.y)


def test_exact_min_requires_both_oracles():
    with pytest.raises(MissingLipschitzOracle):
        exact_min_x(TwoBlockRosenbrock(), BlockPoint([0.0], [0.0]))

    singular = CoupledQuadratic([[0.0]], [[0.0]], [[1.0]])
    with pytest.raises(MissingExactMinimizer):
        exact_min_x(singular, BlockPoint([1.0], [1.0]))


class _ArgminLiar(Objective):
    """Claims an exact minimizer but returns a non-improving point."""

    n_x, n_y = 1, 0

    def value(self, p):
        return float(p.x[0] ** 2)

    def grad_x(self, p):
        return 2.0 * p.x

    def grad_y(self, p):
        return np.zeros(0)

    def lipschitz_x(self, y):
        return 2.0

    def exact_min_x(self, y):
        return np.array([100.0])


def test_exact_min_catches_a_lying_argmin():
    with pytest.raises(SufficientDecreaseViolated):
        exact_min_x(_ArgminLiar(), BlockPoint([3.0]))


# --- backtracking -----------------------------------------------------------


def test_backtracking_doubling_chain_lands_on_L():
    # from l=1 on the L=4 model: trials at 1 and 2 both fail the test
    # (decrease -144 and 0 against requirements 72 and 36), 4 accepts with
    # decrease == requirement == 18
    obj = tight()
    upd = backtracking_gradient_x(obj, BlockPoint([3.0]), BacktrackParams())
    assert upd.e_t == 4.0
    np.testing.assert_allclose(upd.x_next, [0.0])
    assert upd.inner_evals == 5  # f0+grad, then three trial evaluations


def test_backtracking_accepts_immediately_when_l_init_suffices():
    obj = tight()
    upd = backtracking_gradient_x(
        obj, BlockPoint([3.0]), BacktrackParams(l_init=4.0)
    )
    assert upd.e_t == 4.0
    assert upd.inner_evals == 3


def test_backtracking_zero_gradient_short_circuits():
    obj = tight()
    p = BlockPoint([0.0])  # the unconstrained minimizer
    upd = backtracking_gradient_x(obj, p, BacktrackParams(l_init=7.0))
    np.testing.assert_array_equal(upd.x_next, p.x)
    assert upd.e_t == 7.0


@pytest.mark.parametrize("seed", range(10))
def test_backtracking_stays_under_twice_the_truth(seed):
    # growth 2 from l_init=1 <= L: the first estimate >= L accepts, so the
    # accepted constant is < 2L
    obj = zoo_problem("coupled_quadratic", seed=200 + seed)
    true_l = float(np.linalg.eigvalsh(obj.A)[-1])
    assert true_l >= 1.0  # the diagonally dominant construction guarantees it
    rng = np.random.default_rng(seed)
    p = BlockPoint(rng.standard_normal(obj.n_x), rng.standard_normal(obj.n_y))
    upd = backtracking_gradient_x(obj, p, BacktrackParams())
    assert upd.e_t < 2.0 * true_l


class _NeverDecreases(Objective):
    """Constant value but nonzero reported gradient: no step can certify."""

    n_x, n_y = 1, 0

    def value(self, p):
        return 1.0

    def grad_x(self, p):
        return np.array([1.0])

    def grad_y(self, p):
        return np.zeros(0)


def test_backtracking_exhaustion():
    with pytest.raises(BacktrackExhausted):
        backtracking_gradient_x(
            _NeverDecreases(), BlockPoint([0.0]), BacktrackParams(max_rejects=5)
        )


class _WalledQuadratic(Objective):
    """0.5 L x^2 inside |x| <= 10, +inf outside; big steps overshoot the wall."""

    n_x, n_y = 1, 0
    L = 50.0

    def value(self, p):
        x = float(p.x[0])
        if abs(x) > 10.0:
            return float("inf")
        return 0.5 * self.L * x * x

    def grad_x(self, p):
        return self.L * p.x

    def grad_y(self, p):
        return np.zeros(0)


def test_backtracking_treats_non_finite_trials_as_rejections():
    obj = _WalledQuadratic()
    upd = backtracking_gradient_x(obj, BlockPoint([9.0]), BacktrackParams())
    assert np.isfinite(obj.value(BlockPoint(upd.x_next)))
    assert upd.e_t > 1.0  # at least one overshooting trial was rejected


def test_backtrack_params_validation():
    with pytest.raises(ValueError):
        BacktrackParams(l_init=0.0)
    with pytest.raises(ValueError):
        BacktrackParams(growth=1.0)
    with pytest.raises(ValueError):
        BacktrackParams(max_rejects=0)


# --- y block ----------------------------------------------------------------


def test_stationary_y_exact_path():
    obj = zoo_problem("coupled_quadratic", seed=5)
    rng = np.random.default_rng(5)
    p = BlockPoint(rng.standard_normal(obj.n_x), rng.standard_normal(obj.n_y))
    y_next, res = stationary_y(obj, p, tol=1e-10)
    assert res <= 1e-10
    assert np.linalg.norm(obj.grad_y(p.with_y(y_next))) == res
    assert obj.value(p.with_y(y_next)) <= obj.value(p)


def test_stationary_y_empty_block():
    obj = tight()
    y_next, res = stationary_y(obj, BlockPoint([3.0]), tol=1e-10)
    assert y_next.shape == (0,) and res == 0.0


class _HiddenMinimizer(CoupledQuadratic):
    """Same quadratic, exact_min_y withheld, forcing the inner descent."""

    def exact_min_y(self, x):
        return None


def test_stationary_y_inner_descent_fallback():
    base = zoo_problem("coupled_quadratic", seed=6)
    obj = _HiddenMinimizer(base.A, base.B, base.C, base.a, base.c)
    p = BlockPoint(np.ones(obj.n_x), np.ones(obj.n_y))
    y_next, res = stationary_y(obj, p, tol=1e-8)
    assert res <= 1e-8
    assert obj.value(p.with_y(y_next)) <= obj.value(p)


class _WrongMinimizer(CoupledQuadratic):
    def exact_min_y(self, x):
        return np.ones(self.n_y) * 1e3


def test_stationary_y_rejects_a_wrong_exact_minimizer():
    base = zoo_problem("coupled_quadratic", seed=7)
    obj = _WrongMinimizer(base.A, base.B, base.C, base.a, base.c)
    with pytest.raises(InnerSolveFailed):
        stationary_y(obj, BlockPoint(np.ones(obj.n_x), np.ones(obj.n_y)), tol=1e-10)


def test_stationary_y_tol_validation():
    with pytest.raises(ValueError):
        stationary_y(tight(), BlockPoint([1.0]), tol=0.0)


class _NaNMinimizer(CoupledQuadratic):
    def exact_min_y(self, x):
        return np.full(self.n_y, np.nan)


def test_stationary_y_rejects_non_finite_minimizer():
    base = zoo_problem("coupled_quadratic", seed=8)
    obj = _NaNMinimizer(base.A, base.B, base.C, base.a, base.c)
    with pytest.raises(NonFiniteValue):
        stationary_y(obj, BlockPoint(np.ones(obj.n_x), np.ones(obj.n_y)), tol=1e-10)


# --- baseline step ----------------------------------------------------------


def test_full_gradient_step_hand_check():
    obj = CoupledQuadratic([[1.0]], [[1.0]], [[2.0]])
    p = BlockPoint([1.0], [1.0])
    q = full_gradient_step(obj, p, step=0.1)
    # grad_x = 1+1 = 2, grad_y = 1+2 = 3
    np.testing.assert_allclose(q.x, [1.0 - 0.2])
    np.testing.assert_allclose(q.y, [1.0 - 0.3])


def test_full_gradient_step_zero_is_identity():
    obj = CoupledQuadratic([[1.0]], [[1.0]], [[2.0]])
    p = BlockPoint([1.0], [1.0])
    assert full_gradient_step(obj, p, 0.0) == p


def test_full_gradient_step_rejects_negative():
    obj = CoupledQuadratic([[1.0]], [[1.0]], [[2.0]])
    with pytest.raises(ValueError):
        full_gradient_step(obj, BlockPoint([1.0], [1.0]), -0.1)
