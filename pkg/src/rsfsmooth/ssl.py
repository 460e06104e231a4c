"""Graph semi-supervised node classification.

Per class l the score vector is f_l = D^{1-sigma} K D^{sigma-1} y_l with
K = (D + (2/mu) L)^{-1} D, which is the smoothing operator of a problem
with absorption weights q_i = (mu/2) d_i. Scores are computed either
exactly (conjugate gradient) or by the forest Monte Carlo estimators.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError
from .estimators import (AlphaStrategy, MonteCarloAccumulator, gradient_step,
                         resolve_alpha, xbar_from_forest)
from .forests import DEFAULT_STEP_BUDGET, derive_seed, forest_rng, sample_forest
from .linalg import SmoothingProblem, solve_exact_cg


@dataclass
class SSLProblem:
    """Node classification instance.

    `labels[v]` is the ground-truth class id of vertex v, or -1 when
    unknown. `labeled_set` lists the vertices whose labels the classifier
    may see (defaults to every vertex with a known label); the rest of
    the known labels form the evaluation holdout.
    """

    graph: object
    labels: np.ndarray
    mu: float
    sigma: float
    labeled_set: np.ndarray = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (self.graph.n,):
            raise DataError("labels length must equal the vertex count")
        if self.labels.max() < 0:
            raise DataError("at least one vertex must carry a label")
        if self.mu <= 0:
            raise DataError("mu must be positive")
        if not 0.0 <= self.sigma <= 1.0:
            raise DataError("sigma must lie in [0, 1]")
        if self.labeled_set is None:
            self.labeled_set = np.flatnonzero(self.labels >= 0)
        self.labeled_set = np.unique(np.asarray(self.labeled_set, dtype=np.int64))
        if len(self.labeled_set) == 0:
            raise DataError("labeled set is empty")
        if self.labeled_set.min() < 0 or self.labeled_set.max() >= self.graph.n:
            raise DataError("labeled set contains out-of-range vertex ids")
        if (self.labels[self.labeled_set] < 0).any():
            raise DataError("labeled set contains vertices without a known label")
        self.k = int(self.labels.max()) + 1
        seen = set(self.labels[self.labeled_set].tolist())
        missing = [c for c in range(self.k) if c not in seen]
        if missing:
            raise DataError(f"classes without a labeled vertex: {missing}")

    def label_matrix(self):
        """n x k indicator matrix: Y[i, c] = 1 iff i is labeled with class c."""
        Y = np.zeros((self.graph.n, self.k))
        Y[self.labeled_set, self.labels[self.labeled_set]] = 1.0
        return Y

    def absorption(self):
        """Per-node absorption weights q_i = (mu/2) d_i."""
        return (self.mu / 2.0) * self.graph.degrees

    def safe_alpha(self):
        """Guaranteed-contraction step size for this parameterization."""
        return 2.0 * self.mu / (self.mu + 4.0)

    def holdout(self):
        mask = self.labels >= 0
        mask[self.labeled_set] = False
        return np.flatnonzero(mask)


@dataclass
class ClassificationResult:
    """Score matrix, argmax predictions, and holdout accuracy.

    Ties in the argmax go to the lowest class id. `accuracy` is NaN when
    there are no held-out labels to evaluate on.
    """

    F: np.ndarray
    predicted: np.ndarray
    accuracy: float
    diagnostics: dict = field(default_factory=dict)


def _finish(problem, F, diagnostics=None):
    predicted = np.argmax(F, axis=1)
    holdout = problem.holdout()
    if len(holdout):
        accuracy = float(np.mean(predicted[holdout] == problem.labels[holdout]))
    else:
        accuracy = float("nan")
    return ClassificationResult(F=F, predicted=predicted, accuracy=accuracy,
                                diagnostics=diagnostics or {})


def ssl_exact(problem, tol=1e-10, max_iter=None):
    """Exact classification scores via conjugate gradient, one class at a time."""
    g = problem.graph
    d_in = g.degrees ** (problem.sigma - 1.0)
    d_out = g.degrees ** (1.0 - problem.sigma)
    q = problem.absorption()
    Y = problem.label_matrix()
    F = np.empty((g.n, problem.k))
    iters = []
    for c in range(problem.k):
        sp = SmoothingProblem(g, d_in * Y[:, c], q)
        x, it = solve_exact_cg(sp, tol=tol, max_iter=max_iter)
        F[:, c] = d_out * x
        iters.append(it)
    return _finish(problem, F, {"cg_iterations": iters})


def ssl_forest(problem, n_samples, strategy, seed=0, resample_per_class=False,
               max_steps=DEFAULT_STEP_BUDGET):
    """Forest Monte Carlo classification scores.

    By default each forest draw is shared by all k classes: the forest law
    depends only on q_i = (mu/2) d_i, not on the class signal, so one draw
    serves every column of Y at a k-fold cost saving. Set
    `resample_per_class` to draw independent forests per class instead.
    """
    if n_samples < 1:
        raise DataError("n_samples must be >= 1")
    g = problem.graph
    d_in = g.degrees ** (problem.sigma - 1.0)
    d_out = g.degrees ** (1.0 - problem.sigma)
    q = problem.absorption()
    Y = problem.label_matrix()
    subproblems = [SmoothingProblem(g, d_in * Y[:, c], q) for c in range(problem.k)]
    accs = [MonteCarloAccumulator(g.n) for _ in range(problem.k)]

    if resample_per_class:
        for c in range(problem.k):
            for i in range(n_samples):
                forest = sample_forest(g, q, forest_rng(seed, c, i), max_steps=max_steps)
                accs[c].add(xbar_from_forest(forest, subproblems[c]))
                accs[c].total_walk_steps += forest.rng_draws
    else:
        for i in range(n_samples):
            forest = sample_forest(g, q, forest_rng(seed, i), max_steps=max_steps)
            for c in range(problem.k):
                accs[c].add(xbar_from_forest(forest, subproblems[c]))
            accs[0].total_walk_steps += forest.rng_draws

    F = np.empty((g.n, problem.k))
    alphas, fallbacks = [], []
    for c in range(problem.k):
        strat = replace(strategy, resolved=None, fallback=False)
        alpha = resolve_alpha(strat, subproblems[c], accs[c])
        F[:, c] = d_out * gradient_step(accs[c].mean_x, subproblems[c], alpha)
        alphas.append(alpha)
        fallbacks.append(strat.fallback)
    diagnostics = {
        "n_samples": n_samples,
        "strategy": strategy.kind,
        "alpha_per_class": alphas,
        "zero_variance_fallback_per_class": fallbacks,
        "forests_shared_across_classes": not resample_per_class,
        "total_walk_steps": sum(a.total_walk_steps for a in accs),
    }
    return _finish(problem, F, diagnostics)


METHODS = ("exact", "xbar", "zbar_safe", "zbar_empirical")


def _run_method(problem, method, n_samples, seed):
    if method == "exact":
        return ssl_exact(problem)
    if method == "xbar":
        return ssl_forest(problem, n_samples, AlphaStrategy.fixed(0.0), seed=seed)
    if method == "zbar_safe":
        return ssl_forest(problem, n_samples, AlphaStrategy.safe(), seed=seed)
    if method == "zbar_empirical":
        return ssl_forest(problem, n_samples, AlphaStrategy.empirical(), seed=seed)
    raise DataError(f"unknown classification method {method!r}")


def accuracy_experiment(problem, labels_per_class, repeats, n_samples=50, seed=0,
                        methods=METHODS):
    """Mean/std holdout accuracy per method over random labeled sets.

    Each repeat samples `labels_per_class` labeled vertices per class
    uniformly without replacement from the ground-truth labels of
    `problem`, classifies with every method (the forest methods share the
    same draws within a repeat), and scores on the unlabeled remainder.

    Returns a list of row dicts: {m, method, mean_acc, std_acc}.
    """
    m = int(labels_per_class)
    if m < 1:
        raise DataError("labels_per_class must be >= 1")
    if m * problem.k > problem.graph.n:
        raise DataError("labels_per_class exceeds the vertex budget")
    members = [np.flatnonzero(problem.labels == c) for c in range(problem.k)]
    for c, mem in enumerate(members):
        if len(mem) < m:
            raise DataError(f"class {c} has {len(mem)} members, fewer than m={m}")

    scores = {method: [] for method in methods}
    for r in range(repeats):
        pick_rng = np.random.default_rng(np.random.SeedSequence((int(seed), 1, r)))
        labeled = np.concatenate([
            pick_rng.choice(mem, size=m, replace=False) for mem in members
        ])
        sub = SSLProblem(graph=problem.graph, labels=problem.labels,
                         mu=problem.mu, sigma=problem.sigma, labeled_set=labeled)
        forest_seed = derive_seed(seed, 2, r)
        for method in methods:
            result = _run_method(sub, method, n_samples, forest_seed)
            scores[method].append(result.accuracy)
    rows = []
    for method in methods:
        accs = np.array(scores[method])
        rows.append({
            "m": m,
            "method": method,
            "mean_acc": float(np.mean(accs)),
            "std_acc": float(np.std(accs)),
        })
    return rows


def load_labels(path, n):
    """Load "node,class_id" CSV labels; unlisted nodes get -1."""
    labels = np.full(n, -1, dtype=np.int64)
    seen = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DataError(f"{path}: line {lineno}: expected 'node,class_id'")
            try:
                node, cls = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: cannot parse {raw!r}") from None
            if not 0 <= node < n:
                raise DataError(f"{path}: line {lineno}: node {node} out of range")
            if cls < 0:
                raise DataError(f"{path}: line {lineno}: negative class id")
            if node in seen:
                raise DataError(f"{path}: line {lineno}: duplicate node {node}")
            seen.add(node)
            labels[node] = cls
    if not seen:
        raise DataError(f"{path}: no labels")
    return labels


def load_labeled_set(path):
    """Load a labeled-vertex file, one vertex id per line."""
    ids = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                ids.append(int(line))
            except ValueError:
                raise DataError(f"{path}: line {lineno}: cannot parse {raw!r}") from None
    if not ids:
        raise DataError(f"{path}: empty labeled set")
    return np.array(ids, dtype=np.int64)
