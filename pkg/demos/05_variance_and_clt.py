"""Variance growth regimes and normality diagnostics for cut-point counts."""

# %%
# The variance of the cut-point count grows like n at d=7, n log n at d=6
# and n^(3/2) at d=5.  A scan samples each n-cell with its own stream range,
# fits the log-log slope, and scores each candidate growth law.
# Desk-scale grid; the release gate uses 2^8..2^13 with 3000 samples per n.
from rwrange_lab import ObservableKind, variance_scan

for d in (7, 5):
    scan = variance_scan(ObservableKind.CUT_POINTS, d, n_grid=(256, 512, 1024, 2048),
                         samples_per_n=800, seed=0)
    print(f"d={d}: slope {scan.slope:.3f}, best law {scan.best_model()}")
    for cell in scan.grid:
        print(f"   n={cell.n:5d} var={cell.sample_variance:10.1f} "
              f"+/- {cell.std_error_of_variance:.1f}")

# %%
# Each cell's uncertainty is a delete-1 jackknife standard error of the
# sample variance, so the growth-law bands come with honest error bars.
import numpy as np

from rwrange_lab import jackknife_variance_error

gen = np.random.Generator(np.random.Philox(key=[11, 0]))
draws = gen.normal(0.0, 3.0, size=2000)
print("sample variance:", draws.var(ddof=1))
print("jackknife error:", jackknife_variance_error(draws))

# %%
# At d=7 the standardized cut-point count approaches a Gaussian; the report
# collects skewness, excess kurtosis, the KS distance to the normal CDF and
# the median absolute standardized value (0.674 for a Gaussian).
from rwrange_lab import clt_diagnostics

report = clt_diagnostics(ObservableKind.CUT_POINTS, d=7, n=1024,
                         samples=2000, seed=0)
print("skewness:", round(report.skewness, 3))
print("excess kurtosis:", round(report.excess_kurtosis, 3))
print("KS distance:", round(report.ks_distance, 4))
print("median |standardized|:", round(report.median_abs_standardized, 4))

# %%
# At d=5 fluctuations degenerate instead: a vanishing fraction of the draws
# carries the variance, so the median absolute standardized value sinks
# below the Gaussian 0.674 as n grows.
for n in (256, 1024, 4096):
    low_d = clt_diagnostics(ObservableKind.CUT_POINTS, d=5, n=n,
                            samples=2000, seed=0)
    print(f"d=5 n={n:5d}: median |standardized| = "
          f"{low_d.median_abs_standardized:.4f}")

# %%
# Reports serialize to JSON for run manifests and external consumers.
from rwrange_lab import report_to_json

print(report_to_json(report))
