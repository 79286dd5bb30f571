"""Capacity of H composed with T on constructed and random instances."""
import numpy as np

from transinv import vc
from transinv.hypotheses import Halfspaces
from transinv.transforms import AllPermutations, BooleanBitmaps, LinearMaps

for k in (2, 3):
    r = vc.lowerbound_check(k)
    print(f"k={k}: vc(H)={r.vc_h.value}  vc(H o T) >= {r.vc_ht.value}  witness={r.vc_ht.witness}")

rng = np.random.default_rng(3)
P = rng.normal(size=(6, 2))
maps = [np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]]), np.outer([1.0, 2.0], [1.0, -1.0])]
lc = vc.linear_closure_check(P, maps)
print(f"\nlinear maps: {lc.n_composed} composed labellings, all among {lc.n_base} halfspace ones: {lc.subset}")

T = LinearMaps(maps)
H = Halfspaces(np.concatenate([P] + [t(P) for t in T]))
s = vc.sauer_bound_check(H, T, P)
print(f"growth: {s.n_behaviors} behaviours <= {s.sum_over_t} <= {s.bound_phi}  (vc(H)={s.vc_h})")

for d in (3, 4):
    for label, T in [("bit flips", BooleanBitmaps.all_flips(d)), ("permutations", AllPermutations(d))]:
        b = vc.boolean_composition_check(vc.dictators(d), T, d)
        print(f"d={d} dictators o {label:12s}: vc(H)={b.vc_h} vc(H o T)={b.vc_ht} ratio={b.ratio:.3f}")

print("\nsample size for vc=3, eps=0.1, delta=0.05:", round(vc.sample_size(3, 0.1, 0.05).m_estimate, 1))
