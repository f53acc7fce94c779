"""
Rediscovering the reversal in simulated trials
==============================================

Sample subjects from the network, tabulate them, and run the same
stratified analysis used on the real tables.  The rare (Xn, D) cells
hold about size / 2000 subjects each, so a stable stratified verdict
needs millions of draws.
"""

from simpsons.paradox_bn import ParadoxBnSpec
from simpsons.tables import detect_reversal
from simpsons.trial_sim import DRUG, RECOVERED, sample, sample_table, to_table

spec = ParadoxBnSpec(n=2)

small = to_table(sample(spec, 800, seed=1))
print("800 subjects:", small.total, "rows tabulated")

for size in (200_000, 10_000_000):
    table = sample_table(spec, size, seed=0)
    r = detect_reversal(table, DRUG, RECOVERED, {"X2"})
    print(f"\n{size:,} subjects")
    print(f"  pooled: drug {r.aggregate.treated_rate:.4f} vs placebo {r.aggregate.control_rate:.4f}")
    for (xn,), s in r.strata.items():
        print(f"  X2={xn:<5}: drug {s.treated_recovered}/{s.treated_total} ({s.treated_rate:.3f}) "
              f"vs placebo {s.control_recovered}/{s.control_total} ({s.control_rate:.3f})")
    print(f"  full reversal: {r.full_reversal}")
