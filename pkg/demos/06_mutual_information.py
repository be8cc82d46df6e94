"""
Which single angle best summarizes the geometry?
================================================

``D`` depends on all internodal angles.  We rank the largest, second largest
and third largest angle by how much information ``sin^2`` of each carries
about ``D``, using a histogram plug-in estimator.
"""

from netcrlb.infoanalysis import best_surrogate, mi_study

rows = mi_study([3, 4, 5, 6], n_samples=300_000, seed=0)
print(" L  surrogate   I(D; W) bits")
for L, label, mi, *_ in rows:
    print(f"{L:2d}  W_({label:>3})    {mi:.4f}")
print("\nmost informative per L:", best_surrogate(rows))
