"""
One hidden variable inverts every cell
======================================

Build the network for n = 3, print its NPT for Recovered, and compare
recovery with Xn observed and with Xn hidden.  Then check the inversion
for larger n.
"""

from simpsons.paradox_bn import (
    ParadoxBnSpec,
    build_npt,
    case1_recovery,
    case2_recovery,
    certify_reversal,
)

spec = ParadoxBnSpec(n=3)
print(build_npt(spec).to_csv())

for xn in (True, False):
    print(f"Xn={xn}: drug {case1_recovery(spec, xn, True)}, placebo {case1_recovery(spec, xn, False)}")
print(f"Xn hidden: drug {case2_recovery(spec, True):.5f}, placebo {case2_recovery(spec, False):.5f}")

for n in (1, 5, 10, 50):
    print(f"n={n:>2}: paradox {certify_reversal(ParadoxBnSpec(n=n)).paradox}")

# drug assignment independent of Xn: no inversion
print(certify_reversal(ParadoxBnSpec(p=0.5, q=0.5)))
