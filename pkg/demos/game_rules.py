"""Compare the learning rules on two small error tables, then run the MW reduction."""
import numpy as np

from transinv import core, games
from transinv.hypotheses import FiniteTable

# rows are hypotheses, columns transforms; entries are err(h, T)
robust_vs_typical = [[0.01, 0.01, 0.49],
                     [0.01, 0.49, 0.49],
                     [0.49, 0.49, 0.49]]
hard_and_easy = [[0, 1 / 8, 1 / 4, 1 / 2],
                 [1 / 2, 1 / 2, 1 / 2, 1 / 2]]

for name, table in [("table A", robust_vs_typical), ("table B", hard_and_easy)]:
    print(f"\n{name}")
    for rep in (games.minmax_erm(matrix=table), games.regret_minmax(matrix=table),
                games.coverage_select(matrix=table, eps=0.05)):
        print(f"  {rep.rule:9s} -> {rep.selected_tag}  objective={rep.objective[rep.selected]:.3f}  "
              f"worst risk={rep.worst_case_risk:.3f}  worst regret={rep.worst_case_regret:.3f}")

# the same table realised as actual predictors, transforms and a distribution
H, T, D = core.realize_error_table(robust_vs_typical, 100)
print("\nrealised population errors:\n", core.error_matrix(H, T, D).values)

# MW over transforms, ERM over a finite table
tr = games.mw_erm_reduction(FiniteTable(H), T, core.LabeledSample(D.X, D.y), eps=0.1)
chk = games.mw_regret_bound_check(tr)
print(f"\nMW: R={tr.rounds} eta={tr.eta:.4f} mixture risk={tr.mixture_risk():.4f}")
print(f"    regret bound lhs={chk.lhs:.4f} <= rhs={chk.rhs:.4f}")
print("    last Q:", np.round(tr.Q[-1], 3))
