"""
Spatial lag regression by concentrated maximum likelihood
=========================================================

Plants known parameters on a lattice, then recovers them with the
maximum-likelihood estimator: the concentrated log-likelihood in rho is
maximized by golden-section search (plus a score polish), with the
log-determinant term priced through one symmetric eigendecomposition.
"""

import numpy as np

from rpvspatial import SynthConfig, fit_sar, generate, render_fit_table
from rpvspatial.sar import admissible_interval, concentrated_loglik

# --- plant rho = 0.4, beta = (1, 2, -3) on a 20x20 lattice -------------------

cfg = SynthConfig(rows=20, cols=20, rho_true=0.4, beta_true=(1.0, 2.0, -3.0), noise_sd=1.0, seed=7)
res = generate(cfg)
print(f"n = {res.y.size} tracts, planted rho = {cfg.rho_true}, beta = {cfg.beta_true}")

fit = fit_sar(res.y, res.X, res.weights, names=res.terms)
print(f"\nrecovered rho = {fit.rho:.4f}")
for term, est, t in zip(fit.terms, fit.beta, fit.t_stats):
    print(f"  {term:>8}: {est:8.4f}  (t = {t:6.2f})")
print(f"sigma2 = {fit.sigma2:.4f},  logL = {fit.log_lik:.3f},  AIC = {fit.aic:.1f}")

# --- the concentrated likelihood is a 1-d curve in rho -----------------------

lo, hi = admissible_interval(res.weights)
print(f"\nadmissible interval: ({lo:.4f}, {hi:.4f})")
grid = np.linspace(lo, hi, 9)
print("rho      lnL(rho)")
for rho in grid:
    marker = "  <-- optimum nearby" if abs(rho - fit.rho) < (hi - lo) / 16 else ""
    print(f"{rho:+.3f}  {concentrated_loglik(res.y, res.X, res.weights, rho):10.3f}{marker}")

# --- with no noise the planted parameters come back to machine precision -----

clean = generate(SynthConfig(rows=10, cols=10, rho_true=0.25, noise_sd=0.0, seed=5))
exact = fit_sar(clean.y, clean.X, clean.weights, names=clean.terms)
print(f"\nnoiseless 10x10: |rho error| = {abs(exact.rho - 0.25):.2e}, "
      f"max |beta error| = {np.abs(exact.beta - np.array([1, 2, -3])).max():.2e}")

# --- report rendering ---------------------------------------------------------

print("\naligned coefficient table (one row per specification):")
print(render_fit_table([fit, exact], [("DEMO", "CITY", "spec-a"), ("CLEAN", "CITY", "spec-b")]))
