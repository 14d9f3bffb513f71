"""
What one greedy step does
=========================

Pick a single training sample, compute the step length that would push its
predicted probability for the true class toward ``p_hat``, and check.  Then
watch how the running mean of those lengths settles during a pass.
"""

import numpy as np

from gsaopt.gsa import GsaConfig, greedy_step_softmax, gsa_train
from gsaopt.linalg import SparseVec
from gsaopt.models import LinearModel, loss_grad, softmax_forward

# %%
# A 4-class softmax model with random weights and one sparse sample.
rng = np.random.default_rng(1)
W = rng.normal(size=(4, 6))
x = SparseVec([0, 2, 5], [0.7, -1.2, 1.0], 6)
k = 3
print("p before:", np.round(softmax_forward(W, x), 4))

# %%
# The greedy length, and the plain SGD update taken with it.
eta = greedy_step_softmax(W, x, k, eta_max=np.inf)
_, c = loss_grad(LinearModel("softmax", W), x, k)
W_after = W - eta * np.outer(c, x.to_dense(6))
print(f"eta = {eta:.5f}")
print("p after: ", np.round(softmax_forward(W_after, x), 4))
# the length comes from a linearised target, so with 4 classes p_k moves a
# good way toward 0.95 without reaching it

# %%
# Over a whole pass the individual lengths jump around, the average does not.
rng = np.random.default_rng(2)
centers = rng.normal(size=(3, 2)) * 3
labels = rng.integers(3, size=300)
pts = centers[labels] + rng.normal(size=(300, 2))

from gsaopt.data import Dataset, Sample

ds = Dataset(tuple(Sample(SparseVec([0, 1, 2], [a, b, 1.0], 3), int(y))
                   for (a, b), y in zip(pts, labels)), 3, 3, {str(i): i for i in range(3)}, True)
model = LinearModel.for_dataset("softmax", ds)
model, state, trace = gsa_train(model, ds, passes=2, seed=0, config=GsaConfig())

etas = np.array([e for e in trace.eta if e is not None])
print(f"steps {len(trace)}, skipped {len(trace) - etas.size}")
print(f"eta spread: min {etas.min():.3g}  median {np.median(etas):.3g}  max {etas.max():.3g}")
for t in (10, 100, 300, 600):
    print(f"mean eta after {t:>3} steps: {trace.mean_eta[t - 1]:.4f}")
