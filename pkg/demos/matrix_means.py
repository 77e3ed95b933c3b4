"""Tour of the matrix beta-mean: the one knob that turns an arithmetic
average of covariance matrices into a geometric or harmonic one.

Run:  python3 demos/matrix_means.py
"""

import numpy as np

from betadpca import BetaConfig, beta_mean

np.set_printoptions(precision=6, suppress=True)

a = np.diag([1.0, 2.0, 8.0])
b = np.diag([4.0, 2.0, 0.5])

# --- the three classical means fall out of one formula -------------------
for beta, label in [(1.0, "arithmetic"), (0.0, "geometric"), (-1.0, "harmonic")]:
    m = beta_mean([a, b], BetaConfig(beta=beta, delta=1e-8))
    print(f"beta={beta:+.0f} ({label}): diag = {np.diag(m)}")

# Diagonal inputs commute, so each diagonal entry is just the scalar
# beta-mean: (1+4)/2, sqrt(1*4), 2/(1/1+1/4) for the first entry.

# --- non-commuting inputs still produce a PSD mean -----------------------
rng = np.random.default_rng(7)
q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
c = (q * [5.0, 1.0, 0.2]) @ q.T  # same spectrum as a rotated diagonal

for beta in (2.0, 0.5, 0.0, -0.5):
    m = beta_mean([a, c], BetaConfig(beta=beta, delta=1e-8))
    vals = np.linalg.eigvalsh(m)
    print(f"beta={beta:+.1f}: eigenvalues of the mean = {vals[::-1]}")

# --- the beta -> 0 limit is the log-Euclidean mean -----------------------
near = beta_mean([a, c], BetaConfig(beta=1e-5, delta=1e-8))
at = beta_mean([a, c], BetaConfig(beta=0.0, delta=1e-8))
print("||mean(1e-5) - mean(0)||_F =", np.linalg.norm(near - at))

# --- smaller beta = less influence for an outlier machine ----------------
# One machine reports a wildly inflated covariance; watch the top
# eigenvalue of the mean as beta decreases.
outlier = np.diag([400.0, 2.0, 1.0])
cohort = [a, b, a, b, outlier]
print("\ntop eigenvalue of the 5-machine mean (one outlier at 400):")
for beta in (1.0, 0.5, 0.0, -0.5, -1.0):
    m = beta_mean(cohort, BetaConfig(beta=beta, delta=1e-8))
    print(f"  beta={beta:+.1f}: {np.linalg.eigvalsh(m)[-1]:8.3f}")
