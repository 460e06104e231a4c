"""Forest Monte Carlo estimators of the smoothed signal K y.

One forest draw yields the partition-average estimate xbar (unbiased for
K y). A single gradient-descent step on the quadratic objective,
z = x - alpha (K^{-1} x - y), keeps the estimator unbiased for any step
size alpha and shrinks its variance when alpha is chosen well; the
control variate K^{-1} xbar has known expectation y, which gives both the
optimal step size and an empirical estimate of it from the samples.
"""

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import DataError
from .forests import DEFAULT_STEP_BUDGET, enumerate_forests, forest_rng, sample_forest
from .linalg import SmoothingProblem, apply_K_inverse

ZERO_VARIANCE_TOL = 1e-14  # per-node threshold on tr Var(ybar)


def _tree_averages(labels, q, y):
    """Per-tree q-weighted averages of y, broadcast back to the nodes.

    Computed as y_ref + sum q (y - y_ref) / sum q around each tree's
    reference node, which returns constant signals bit-exactly.
    """
    n = len(y)
    qsum = np.bincount(labels, weights=q, minlength=n)
    shift = np.bincount(labels, weights=q * (y - y[labels]), minlength=n)
    ratio = np.divide(shift, qsum, out=np.zeros(n), where=qsum > 0)
    return y[labels] + ratio[labels]


@dataclass
class EstimateSample:
    """One forest's estimate and its lazily computed control variate."""

    xbar: np.ndarray
    problem: object

    @cached_property
    def ybar(self):
        """K^{-1} xbar; its expectation over forest draws is the signal y."""
        return apply_K_inverse(self.problem, self.xbar)


def xbar_from_forest(forest, problem):
    """Partition-average estimate: each node gets its tree's q-weighted
    mean of y. Unbiased for K y under the forest distribution."""
    xbar = _tree_averages(forest.root_of, problem.q, problem.y)
    return EstimateSample(xbar=xbar, problem=problem)


def gradient_step(x, problem, alpha):
    """One gradient-descent step x - alpha (K^{-1} x - y) toward K y."""
    return x - alpha * (apply_K_inverse(problem, x) - problem.y)


class MonteCarloAccumulator:
    """Streaming moments of (xbar, ybar) sample pairs.

    Keeps running means plus centered scalar co-moments (Welford/Chan
    updates), enough to recover the sums N, sum_x, sum_y, sum_xx, sum_yy,
    sum_xy and the empirical step size without storing samples. Merging
    two accumulators is associative and commutative up to rounding.
    """

    def __init__(self, n):
        self.n = n
        self.count = 0
        self.mean_x = np.zeros(n)
        self.mean_y = np.zeros(n)
        self._m_xx = 0.0
        self._m_yy = 0.0
        self._m_xy = 0.0
        self.total_walk_steps = 0

    def add(self, sample):
        x, yv = sample.xbar, sample.ybar
        self.count += 1
        dx = x - self.mean_x
        dy = yv - self.mean_y
        self.mean_x = self.mean_x + dx / self.count
        self.mean_y = self.mean_y + dy / self.count
        self._m_xx += float(dx @ (x - self.mean_x))
        self._m_yy += float(dy @ (yv - self.mean_y))
        self._m_xy += float(dx @ (yv - self.mean_y))

    def merge(self, other):
        """Combined accumulator, equal to single-pass accumulation."""
        if self.n != other.n:
            raise DataError("cannot merge accumulators of different sizes")
        out = MonteCarloAccumulator(self.n)
        if self.count == 0 or other.count == 0:
            src = other if self.count == 0 else self
            out.count = src.count
            out.mean_x = src.mean_x.copy()
            out.mean_y = src.mean_y.copy()
            out._m_xx, out._m_yy, out._m_xy = src._m_xx, src._m_yy, src._m_xy
            out.total_walk_steps = self.total_walk_steps + other.total_walk_steps
            return out
        total = self.count + other.count
        dx = other.mean_x - self.mean_x
        dy = other.mean_y - self.mean_y
        f = self.count * other.count / total
        out.count = total
        out.mean_x = self.mean_x + dx * (other.count / total)
        out.mean_y = self.mean_y + dy * (other.count / total)
        out._m_xx = self._m_xx + other._m_xx + f * float(dx @ dx)
        out._m_yy = self._m_yy + other._m_yy + f * float(dy @ dy)
        out._m_xy = self._m_xy + other._m_xy + f * float(dx @ dy)
        out.total_walk_steps = self.total_walk_steps + other.total_walk_steps
        return out

    # --- raw-sum views -------------------------------------------------
    @property
    def sum_x(self):
        return self.count * self.mean_x

    @property
    def sum_y(self):
        return self.count * self.mean_y

    @property
    def sum_xx(self):
        return self._m_xx + self.count * float(self.mean_x @ self.mean_x)

    @property
    def sum_yy(self):
        return self._m_yy + self.count * float(self.mean_y @ self.mean_y)

    @property
    def sum_xy(self):
        return self._m_xy + self.count * float(self.mean_x @ self.mean_y)

    # --- trace statistics ----------------------------------------------
    @property
    def tr_var_xbar(self):
        return self._m_xx / (self.count - 1) if self.count >= 2 else math.nan

    @property
    def tr_var_ybar(self):
        return self._m_yy / (self.count - 1) if self.count >= 2 else math.nan

    @property
    def tr_cov_xy(self):
        return self._m_xy / (self.count - 1) if self.count >= 2 else math.nan


@dataclass
class AlphaStrategy:
    """How the gradient step size is chosen.

    kinds: "safe_constant" (spectral bound, guarantees contraction),
    "empirical" (covariance/variance trace ratio from the samples),
    "fixed" (given constant), "oracle_optimal" (exact enumeration,
    tiny graphs only).
    """

    kind: str
    value: float = None
    resolved: float = None
    fallback: bool = False

    @classmethod
    def safe(cls):
        return cls(kind="safe_constant")

    @classmethod
    def empirical(cls):
        return cls(kind="empirical")

    @classmethod
    def fixed(cls, value):
        return cls(kind="fixed", value=float(value))

    @classmethod
    def oracle(cls):
        return cls(kind="oracle_optimal")

    @classmethod
    def parse(cls, text):
        """"safe", "empirical", "oracle", or a float literal."""
        text = str(text).strip().lower()
        if text in ("safe", "safe_constant"):
            return cls.safe()
        if text == "empirical":
            return cls.empirical()
        if text in ("oracle", "oracle_optimal"):
            return cls.oracle()
        try:
            return cls.fixed(float(text))
        except ValueError:
            raise DataError(f"cannot parse step-size strategy {text!r}") from None


def safe_alpha(problem):
    """Largest step size with guaranteed contraction toward the solution.

    The eigenvalues of K^{-1} = I + Q^{-1} L are bounded by
    1 + max_i 2 d_i / q_i, so this step keeps every |1 - alpha mu| <= 1.
    For uniform q the bound is the familiar 2q / (q + 2 d_max).
    """
    g = problem.graph
    if problem.q_uniform:
        q = float(problem.q[0])
        return 2.0 * q / (q + 2.0 * g.d_max)
    return 2.0 / (1.0 + float(np.max(2.0 * g.degrees / problem.q)))


def resolve_alpha(strategy, problem, acc=None):
    """Resolve a step-size strategy to a number; records it on the strategy.

    The empirical and oracle strategies fall back to alpha = 0 (flagged on
    the strategy) when the control variate has zero variance, which only
    happens for constant signals; the plain average is exact there and a
    gradient step has nothing to correct.
    """
    if strategy.kind == "fixed":
        if strategy.value is None:
            raise DataError("fixed step-size strategy needs a value")
        alpha = float(strategy.value)
    elif strategy.kind == "safe_constant":
        alpha = safe_alpha(problem)
    elif strategy.kind == "empirical":
        if acc is None or acc.count < 2:
            raise DataError("empirical step size needs >= 2 accumulated samples")
        if acc.tr_var_ybar <= ZERO_VARIANCE_TOL * problem.graph.n:
            strategy.fallback = True
            alpha = 0.0
        else:
            alpha = acc._m_xy / acc._m_yy
    elif strategy.kind == "oracle_optimal":
        moments = exact_estimator_moments(problem.graph, problem.q, problem.y)
        if moments.alpha_star is None:
            strategy.fallback = True
            alpha = 0.0
        else:
            alpha = moments.alpha_star
    else:
        raise DataError(f"unknown step-size strategy {strategy.kind!r}")
    strategy.resolved = alpha
    return alpha


@dataclass
class MonteCarloResult:
    estimate: np.ndarray
    alpha: float
    strategy: AlphaStrategy
    accumulator: MonteCarloAccumulator
    diagnostics: dict = field(default_factory=dict)


def run_monte_carlo(problem, n_samples, strategy, seed=0,
                    max_steps=DEFAULT_STEP_BUDGET):
    """Estimate K y from n_samples forest draws.

    Draws forests on per-sample streams derived from (seed, i), averages
    the per-forest estimates, then applies the gradient step once to the
    sample mean (the step commutes with averaging, so this matches
    stepping every sample at a fraction of the cost). The empirical
    strategy resolves its step size from the same samples; the small
    O(1/N) bias this introduces is flagged in the diagnostics.
    """
    if n_samples < 1:
        raise DataError("n_samples must be >= 1")
    if strategy.kind == "empirical" and n_samples < 2:
        raise DataError("the empirical strategy needs n_samples >= 2")
    strategy = replace(strategy, resolved=None, fallback=False)
    acc = MonteCarloAccumulator(problem.graph.n)
    for i in range(n_samples):
        forest = sample_forest(problem.graph, problem.q, forest_rng(seed, i),
                               max_steps=max_steps)
        acc.add(xbar_from_forest(forest, problem))
        acc.total_walk_steps += forest.rng_draws
    alpha = resolve_alpha(strategy, problem, acc)
    estimate = gradient_step(acc.mean_x, problem, alpha)
    diagnostics = {
        "n_samples": n_samples,
        "strategy": strategy.kind,
        "alpha": alpha,
        "tr_var_xbar": acc.tr_var_xbar if n_samples >= 2 else None,
        "tr_var_ybar": acc.tr_var_ybar if n_samples >= 2 else None,
        "tr_cov_xy": acc.tr_cov_xy if n_samples >= 2 else None,
        "total_walk_steps": acc.total_walk_steps,
        "zero_variance_fallback": strategy.fallback,
        "alpha_from_same_samples": strategy.kind == "empirical",
    }
    return MonteCarloResult(estimate=estimate, alpha=alpha, strategy=strategy,
                            accumulator=acc, diagnostics=diagnostics)


@dataclass
class ExactMoments:
    """Exact estimator moments over the full forest distribution."""

    e_xbar: np.ndarray
    e_ybar: np.ndarray
    tr_var_xbar: float
    tr_var_ybar: float
    tr_cov_xy: float
    alpha_star: float  # None when the control variate is degenerate

    def mse_curve(self, alpha):
        """Exact mean squared error of the stepped estimator at this alpha:
        tr Var(xbar) + alpha^2 tr Var(ybar) - 2 alpha tr Cov(ybar, xbar)."""
        alpha = np.asarray(alpha, dtype=np.float64)
        return self.tr_var_xbar + alpha**2 * self.tr_var_ybar \
            - 2.0 * alpha * self.tr_cov_xy


def exact_estimator_moments(graph, q, y):
    """Moments of (xbar, ybar) by exhaustive forest enumeration (n <= 9)."""
    problem = SmoothingProblem(graph, y, q)
    dist = enumerate_forests(graph, problem.q)
    n = graph.n
    e_x = np.zeros(n)
    e_y = np.zeros(n)
    e_xx = e_yy = e_xy = 0.0
    for fam in dist.families:
        p = fam.weight / dist.normalizer
        xbar = _tree_averages(fam.components, problem.q, problem.y)
        ybar = apply_K_inverse(problem, xbar)
        e_x += p * xbar
        e_y += p * ybar
        e_xx += p * float(xbar @ xbar)
        e_yy += p * float(ybar @ ybar)
        e_xy += p * float(xbar @ ybar)
    tr_var_x = e_xx - float(e_x @ e_x)
    tr_var_y = e_yy - float(e_y @ e_y)
    tr_cov = e_xy - float(e_x @ e_y)
    alpha_star = tr_cov / tr_var_y if tr_var_y > ZERO_VARIANCE_TOL * n else None
    return ExactMoments(e_xbar=e_x, e_ybar=e_y, tr_var_xbar=tr_var_x,
                        tr_var_ybar=tr_var_y, tr_cov_xy=tr_cov,
                        alpha_star=alpha_star)
