"""How many eigenvalues of a band-limited covariance matter?

The concentration matrix of a frequency band has a spectrum that sits
near 1, drops through a short transition and then decays super-exponentially.
The number of eigenvalues on the plateau is close to N times the fraction of
the frequency circle the band covers. That count is what later sets the rank
of the signal subspace.
"""
import numpy as np

from specband import FrequencyBand, PriorHyperParams, build_signal_cov, concentration_matrix
from specband.kernel import eigen_count_at_least, verify_trace_identities

N = 1000
W = 2 * np.pi * 0.02

lowpass = FrequencyBand([(-W, W)])
bandpass = FrequencyBand.symmetric([(np.pi / 2 - W, np.pi / 2 + W)])

for name, band in [("low-pass", lowpass), ("band-pass pair", bandpass)]:
    es = concentration_matrix(band, N).eigen()
    print(f"{name}: covers {band.fraction:.3f} of the circle, expect ~{N * band.fraction:.0f} large eigenvalues")
    for gamma in (0.1, 0.5, 0.9):
        print(f"  eigenvalues >= {gamma}: {eigen_count_at_least(es, gamma)}")
    k = round(N * band.fraction)
    edge = ", ".join(f"{v:.3f}" for v in es.values[k - 4 : k + 4])
    print(f"  eigenvalues {k - 3} to {k + 4}: {edge}")

# trace equals N times the band fraction; the squared sum approaches it slowly
for n in (250, 500, 1000):
    ids = verify_trace_identities(bandpass, n)
    print(f"N={n:4d}: trace gap {ids['trace_gap']:.1e}, squared-sum gap {ids['sqsum_gap']:.2e}")

# modulation splits the band in two and halves the plateau height
mod = build_signal_cov(PriorHyperParams([np.pi / 2], W), N).eigen().values[:3]
flat = build_signal_cov(PriorHyperParams([0.0], W, check=False), N).eigen().values[:3]
print("plateau of the modulated kernel / plain sinc kernel:", np.round(mod / flat, 4))
