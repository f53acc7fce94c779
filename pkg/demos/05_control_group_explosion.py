"""
How many subjects a fully stratified trial needs
================================================

Each extra binary confounder doubles the number of equal-size control
groups.
"""

from simpsons.rct_design import DesignSpec, Factor, allocate, group_count, subjects_required

drug_sex = DesignSpec((Factor.of("drug", ["drug", "placebo"]), Factor.of("sex", ["male", "female"])))
for states, size in allocate(drug_sex, 800).groups:
    print(f"{size} subjects: {states}")

for k in (2, 3, 10, 20):
    spec = DesignSpec.from_cardinalities([(f"f{i}", 2) for i in range(k)], 50)
    print(f"{k:>2} binary factors: {group_count(spec):>12,} groups, {subjects_required(spec):>14,} subjects")

age = DesignSpec.from_cardinalities([(f"f{i}", 2) for i in range(19)] + [("age", 10)], 50)
print(f"19 binary + 10-band age: {group_count(age):,} groups, {subjects_required(age):,} subjects")
