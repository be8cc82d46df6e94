"""
How many anchors can the target hear?
=====================================

The number of anchors whose SIR clears the detection threshold decides whether
a position fix is possible at all.  Frequency reuse and lighter network load
both raise the odds of hearing at least three.
"""

from netcrlb.localizability import NetworkParams, pmf_with_reuse

base = dict(gamma_db=20, beta_db=10)

print("frequency reuse K   P[L>=3]   E[L] (truncated)")
for K in (1, 2, 3, 4):
    pmf = pmf_with_reuse(NetworkParams.from_db(K=K, **base))
    mean = sum(ell * p for ell, p in enumerate(pmf.probs))
    print(f"{K:17d}   {pmf.localizable_fraction:7.4f}   {mean:6.2f}")

print("\nnetwork load q (K=2)   P[L>=3]")
for q in (1.0, 0.75, 0.5, 0.25):
    pmf = pmf_with_reuse(NetworkParams.from_db(K=2, q=q, **base))
    print(f"{q:20.2f}   {pmf.localizable_fraction:7.4f}")

pmf = pmf_with_reuse(NetworkParams.from_db(**base))
print("\nsingle-band distribution of L:")
for ell in range(7):
    print(f"  P[L={ell}] = {pmf.probs[ell]:.5f}")
print(f"  tail beyond {pmf.ell_max}: {pmf.tail_mass:.2e}")
