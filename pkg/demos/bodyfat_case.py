"""Body-fat case study: Lasso-CV with SI and PoSI intervals.

Equivalent to ``selective-lasso analyze bodyfat --methods Lasso-CV-SI,Lasso-CV-PoSI``.
Takes about 15 seconds (100 bootstrap refits per method).
"""

from selective_lasso.analysis import analyze_dataset, format_report
from selective_lasso.datasets import load_bodyfat

data = load_bodyfat()
print(f"{len(data.y)} men, outcome {data.outcome}, predictors: {', '.join(data.names)}\n")

rows = analyze_dataset(data.x, data.y, data.names, ["Lasso-CV-SI", "Lasso-CV-PoSI"],
                       alpha=0.1, n_boot=100, seed=0)
print(format_report(rows))

for method in ("Lasso-CV-SI", "Lasso-CV-PoSI"):
    sure = [r.variable for r in rows if r.method == method and r.excludes_zero]
    print(f"\n{method}: intervals excluding zero for {', '.join(sure)}")
