"""A short tour of the quotient geometry behind the solvers.

A lifted factor w = [x; conj(h)] and e^{it} w describe the same rank-one
matrix w w^H, so directions along i w change nothing. The horizontal space
removes that direction, and the cost's gradient already lives there.
"""

import numpy as np

from blindmix.cost import CostContext
from blindmix.manifold import horizontal_project, is_horizontal, metric, random_horizontal
from blindmix.measurement import build_ensemble, synthesize_observation
from blindmix.metrics import draw_ground_truth

rng = np.random.default_rng(3)
N, K, s, L = 6, 5, 2, 80
ens = build_ensemble("gaussian", L, N, K, s, seed=5)
truth = draw_ground_truth(N, K, s, L, "gaussian", rng)
ctx = CostContext(ens, synthesize_observation(ens, truth.X, truth.H).y)

V = truth.point + 0.3 * (rng.standard_normal((s, N + K)) + 1j * rng.standard_normal((s, N + K)))
print(f"f at a perturbed point:           {ctx.objective(V):.6f}")
print(f"f after rotating each factor:     {ctx.objective(np.exp(1j * np.array([[0.4], [2.0]])) * V):.6f}")

eta = rng.standard_normal(V.shape) + 1j * rng.standard_normal(V.shape)
P = horizontal_project(V, eta)
print(f"\nmetric of projection with i w:    {metric(V[0], P[0], 1j * V[0]):.1e}")
print(f"projecting twice changes it by:   {np.abs(horizontal_project(V, P) - P).max():.1e}")

g = ctx.riemannian_gradient(V)
print(f"gradient is horizontal:           {is_horizontal(V, g)}")

# the metric pairing of the gradient with a direction is the directional derivative
d = random_horizontal(V, rng)
for t in (1e-2, 1e-4, 1e-6):
    fd = (ctx.objective(V + t * d) - ctx.objective(V - t * d)) / (2 * t)
    print(f"t={t:.0e}: finite difference {fd:+.8f}   g(grad, d) {metric(V, g, d):+.8f}")
