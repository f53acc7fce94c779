"""
Averages of averages
====================

Fred beats Jane on both yearly averages, yet Jane's average over all ten
modules is higher.  Weighting each yearly average by the number of
modules behind it resolves the apparent contradiction.
"""

from simpsons.datasets import COURSE_RESULTS
from simpsons.tables import weighted_average

for student, years in COURSE_RESULTS.items():
    naive = sum(avg for avg, _ in years) / len(years)
    print(f"{student}: yearly averages {[a for a, _ in years]}, "
          f"average of averages {naive:.1f}, true average {weighted_average(years):.1f}")
