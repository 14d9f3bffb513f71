"""
Where the step-size bound stops holding
=======================================

For a softmax step, ``eta * x'x * (e^(1/L) - 1)`` is expected to stay below
``|p_hat - p_k|``.  Random logits with a handful of classes
respect that comfortably.  Put the true class far below the others and
increase the class count: around L = 21 the inequality flips.
"""

import math

import numpy as np

from gsaopt.gsa import softmax_greedy_lambda


def margin(z, k, p_hat=0.95):
    """``|p_hat - p_k|`` minus the scaled step.  Negative means violated."""
    L = z.size
    lam = softmax_greedy_lambda(z, k, p_hat)
    pk = math.exp(z[k] - np.logaddexp.reduce(z))
    return abs(p_hat - pk) - lam * (math.exp(1 / L) - 1)


# %%
rng = np.random.default_rng(0)
worst = min(margin(rng.normal(size=L) * 2, 0) for L in range(2, 11) for _ in range(500))
print(f"random logits, L <= 10: smallest margin {worst:.4f}")

# %%
for L in (5, 10, 20, 21, 25, 30, 50):
    z = np.zeros(L)
    z[0] = -50.0
    print(f"L={L:>2}  margin {margin(z, 0):+.5f}")
