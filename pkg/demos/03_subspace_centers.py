"""Center frequencies from the signal subspace.

The top eigenvectors of the covariance span a space that is nearly invariant
under a one-step time shift. Fitting that shift with an orthogonal matrix
gives a rotation whose eigen-phases fall inside the frequency supports.
Grouping the phases and averaging each group recovers the centers.
"""
import numpy as np

from specband import PanelConfig, PriorHyperParams, estimate_centers, generate_panel
from specband.signal import snr_to_noise_variance

centers, W = np.array([0.94, 1.59]), 0.19
s2 = 0.64
prior = PriorHyperParams(centers, W, s2, snr_to_noise_variance(15.0, s2))
panel = generate_panel(PanelConfig(prior, N=100, L=100, amp_law="uniform", seed=3))

res = estimate_centers(panel, nu=2)
print(f"rank {res.rank_hat}, half-bandwidth estimate {res.W_hat:.4f} (true {W})")
print("eigen-phases in (0, pi):", np.round(res.clusters.phases, 3))
print("cluster labels:        ", res.clusters.assignment)
print("center estimates:", np.round(res.theta_hat, 4), " true:", centers)
err = np.linalg.norm(res.theta_hat - centers) / np.linalg.norm(centers)
print(f"relative error {err:.3%}")

# the 'optimal' grouping gives the same answer when the groups are well apart
alt = estimate_centers(res.cov, nu=2, method="optimal")
print("optimal 1-D partition centers:", np.round(alt.theta_hat, 4))
