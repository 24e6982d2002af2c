"""The exact Gaussian oracle versus the closed forms.

Every loop signal is a known linear map of the underlying noises, so
finite-horizon mutual and directed information can be computed exactly
from covariances and log-determinants, with no sampling and no recourse to
the steady-state formulas.  This script runs the cross-checks and then
tells the one story where measurement- and estimate-based accounting
genuinely part ways.
"""

from privmask import MaskParams, SystemParams, consistency_report

SYS = SystemParams(a=1.0, k=-1.0, w=0.05)
MASKS = MaskParams(m=0.0, n=0.05)
HORIZON = 10

print(f"consistency report at a={SYS.a}, k={SYS.k}, w={SYS.w}, "
      f"m={MASKS.m}, n={MASKS.n}, horizon {HORIZON}\n")
print(f"{'check':38} {'lhs':>12} {'rhs':>12} {'abs err':>10}  status")
for c in consistency_report(SYS, MASKS, HORIZON):
    status = "info" if c.informational else ("pass" if c.passed else "FAIL")
    print(f"{c.name:38} {c.lhs:12.6f} {c.rhs:12.6f} {c.abs_err:10.2e}  {status}")

print(
    "\nGating rows: the oracle reproduces the closed-form directed sums and\n"
    "the conservation identity (mutual information = forward + backward\n"
    "flow) to 1e-9 or better.\n"
    "\n"
    "Informational rows: the cloud's estimate sequence is a *lossy* function\n"
    "of its measurements here, because the filter starts from a known state\n"
    "and its time-0 gain is zero: Y_0 influences the estimates only through\n"
    "the stored command, and one direction of the measurement path stays\n"
    "unrecoverable.  From horizon 2 on, that direction carries smoothing\n"
    "information about the state path, so I(X;Xhat) sits strictly below\n"
    "I(X;Y) by a bounded amount (~0.059 nats here).  Per step the two\n"
    "agree in the limit, which is why the rate formulas are unaffected."
)
