"""
Stratification reverses a drug trial
====================================

Pooled, the drug looks better than placebo.  Split by sex, it is worse
for both men and women.  The second trial balances drug and sex, but
splitting further by age reverses it again.
"""

from simpsons import datasets
from simpsons.tables import detect_reversal, marginalize, scan_confounders

DRUG, REC = datasets.DRUG, datasets.RECOVERED


def show(title, table, strata):
    r = detect_reversal(table, DRUG, REC, strata)
    print(title)
    print(f"  pooled: drug {r.aggregate.treated_rate:.0%} vs placebo {r.aggregate.control_rate:.0%}")
    for key, s in r.strata.items():
        print(f"  {', '.join(key):<14} drug {s.treated_rate:.0%} vs placebo {s.control_rate:.0%}")
    print(f"  full reversal: {r.full_reversal}\n")


t4, t6 = datasets.table4(), datasets.table6()
show("First trial, by sex", t4, {"Sex"})
show("Second trial, by sex", t6, {"Sex"})
show("Second trial, by sex and age", t6, {"Sex", "Age"})

# the pooled tables are the stratified ones summed over the hidden variable
assert marginalize(t4, {"Sex"}) == datasets.table3()
assert marginalize(t6, {"Age"}) == datasets.table5()

print("Covariate subsets that reverse the second trial:")
for subset, _ in scan_confounders(t6, DRUG, REC, 2):
    print("  ", subset)
