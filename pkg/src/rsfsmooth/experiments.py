"""Experiment drivers behind the CLI: step-size sweeps and denoising tables."""

import numpy as np

from .errors import DataError
from .estimators import (AlphaStrategy, exact_estimator_moments, run_monte_carlo,
                         safe_alpha)
from .forests import ENUM_MAX_VERTICES, derive_seed
from .linalg import SmoothingProblem, apply_K_inverse, solve_exact_cg
from .signals import psnr


def sweep_alpha(graph, y, q, alpha_grid, n_samples, realizations, seed=0):
    """Empirical squared error of the stepped estimator across a step grid.

    For each realization, draws n_samples forests once; the stepped
    estimate is linear in alpha, so the whole grid (and the safe and
    empirical step sizes) is evaluated from the same sample mean. Errors
    are measured against the conjugate-gradient solution and averaged
    over realizations.
    """
    alpha_grid = np.asarray(alpha_grid, dtype=np.float64)
    if alpha_grid.size == 0:
        raise DataError("alpha grid is empty")
    if realizations < 1 or n_samples < 2:
        raise DataError("need realizations >= 1 and n_samples >= 2")
    problem = SmoothingProblem(graph, y, q)
    xhat, _ = solve_exact_cg(problem)
    a_safe = safe_alpha(problem)

    sq_grid = np.zeros(alpha_grid.size)
    sq_xbar = 0.0
    sq_safe = 0.0
    sq_hat = 0.0
    alpha_hats = []
    for r in range(realizations):
        res = run_monte_carlo(problem, n_samples, AlphaStrategy.empirical(),
                              seed=derive_seed(seed, 3, r))
        m_x = res.accumulator.mean_x
        corr = apply_K_inverse(problem, m_x) - y
        base = m_x - xhat
        errs = base[None, :] - alpha_grid[:, None] * corr[None, :]
        sq_grid += np.einsum("ij,ij->i", errs, errs)
        sq_xbar += float(base @ base)
        e = base - a_safe * corr
        sq_safe += float(e @ e)
        e = base - res.alpha * corr
        sq_hat += float(e @ e)
        alpha_hats.append(res.alpha)

    alpha_star = None
    if graph.n <= ENUM_MAX_VERTICES:
        alpha_star = exact_estimator_moments(graph, q, y).alpha_star
    return {
        "alphas": alpha_grid.tolist(),
        "mse_zbar": (sq_grid / realizations).tolist(),
        "mse_xbar": sq_xbar / realizations,
        "alpha_safe": a_safe,
        "alpha_hat_mean": float(np.mean(alpha_hats)),
        "mse_zbar_alpha_safe": sq_safe / realizations,
        "mse_zbar_alpha_hat": sq_hat / realizations,
        "alpha_star": alpha_star,
    }


def denoise_table(graph, clean, noise_std, q_grid, n_samples, seed=0):
    """PSNR of the noisy input and of each estimator across a q grid.

    One noisy signal (Gaussian noise on `clean`) is shared by the whole
    grid. The plain-average, safe-step, and empirical-step estimators are
    run on identical forest draws at each q. The empirical-step column is
    None when n_samples < 2.
    """
    q_grid = np.asarray(q_grid, dtype=np.float64)
    if q_grid.size == 0 or (q_grid <= 0).any():
        raise DataError("q grid must be nonempty and positive")
    clean = np.asarray(clean, dtype=np.float64)
    noise_rng = np.random.default_rng(np.random.SeedSequence((int(seed), 4)))
    y = clean + noise_std * noise_rng.standard_normal(graph.n)
    peak = float(np.max(np.abs(clean)))
    psnr_noisy = psnr(clean, y, peak=peak)

    rows = []
    for qi, qv in enumerate(q_grid):
        problem = SmoothingProblem(graph, y, float(qv))
        xhat, _ = solve_exact_cg(problem)
        sub = derive_seed(seed, 5, qi)
        res_x = run_monte_carlo(problem, n_samples, AlphaStrategy.fixed(0.0), seed=sub)
        res_s = run_monte_carlo(problem, n_samples, AlphaStrategy.safe(), seed=sub)
        psnr_emp = None
        if n_samples >= 2:
            res_e = run_monte_carlo(problem, n_samples, AlphaStrategy.empirical(), seed=sub)
            psnr_emp = psnr(clean, res_e.estimate, peak=peak)
        rows.append({
            "q": float(qv),
            "psnr_noisy": psnr_noisy,
            "psnr_exact": psnr(clean, xhat, peak=peak),
            "psnr_xbar": psnr(clean, res_x.estimate, peak=peak),
            "psnr_zbar_safe": psnr(clean, res_s.estimate, peak=peak),
            "psnr_zbar_empirical": psnr_emp,
        })
    return rows
