"""Least-squares objective on the product manifold and its derivatives.

With ``w_k = [x_k; u_k]`` (``u_k = conj(h_k)``) and residual
``c = sum_k J_k(w_k w_k^H) - y``, the Euclidean gradient ``2 df/dw_k^H`` is

    top    = 2 C_k^H (c * conj(B h_k))
    bottom = 2 B^T (conj(c) * C_k x_k)

where ``C_k`` is the Fourier-domain encoder. Hessian-vector products
differentiate these blocks along a direction on every factor, since the
residual couples all users.
"""

import numpy as np

from .errors import DivergenceError, ShapeError
from .manifold import horizontal_project, is_horizontal

__all__ = ["CostContext", "PointState"]


class PointState:
    """Products shared by every derivative evaluated at one point."""

    __slots__ = ("V", "cx", "bh", "residual", "f")

    def __init__(self, V, cx, bh, residual):
        self.V = V
        self.cx = cx
        self.bh = bh
        self.residual = residual
        self.f = float(np.real(np.vdot(residual, residual)))


class CostContext:
    """Objective ``f(v) = ||sum_k J_k(w_k w_k^H) - y||^2`` for one observation.

    The context caches the residual of the most recently evaluated point, so a
    context must not be shared between concurrently running solvers.
    """

    def __init__(self, ensemble, y):
        y = np.asarray(y, dtype=complex)
        if y.shape != (ensemble.L,):
            raise ShapeError(f"observation has shape {y.shape}, ensemble expects ({ensemble.L},)")
        self.ensemble = ensemble
        self.y = y
        self.N, self.K, self.s = ensemble.N, ensemble.K, ensemble.s
        self._state = None

    @property
    def shape(self):
        return (self.s, self.N + self.K)

    def _check_point(self, V):
        V = np.asarray(V)
        if V.shape != self.shape:
            raise ShapeError(f"point has shape {V.shape}, expected {self.shape}")
        return V

    def evaluate(self, V):
        V = self._check_point(V)
        st = self._state
        if st is not None and st.V.shape == V.shape and np.array_equal(st.V, V):
            return st
        ens = self.ensemble
        X = V[:, : self.N]
        H = np.conj(V[:, self.N:])
        cx = np.matmul(ens.fc, X[:, :, None])[:, :, 0]
        bh = H @ ens.B.T
        residual = np.sum(cx * bh, axis=0) - self.y
        st = PointState(V.copy(), cx, bh, residual)
        if not np.isfinite(st.f):
            raise DivergenceError("objective is not finite")
        self._state = st
        return st

    def objective(self, V):
        return self.evaluate(V).f

    def residual(self, V):
        return self.evaluate(V).residual

    def _gradient_blocks(self, t_top, t_bottom):
        ens = self.ensemble
        top = np.matmul(ens.fc_h, t_top[:, :, None])[:, :, 0]
        bottom = t_bottom @ ens.B
        return 2.0 * np.concatenate([top, bottom], axis=1)

    def euclidean_gradient(self, V, k=None):
        st = self.evaluate(V)
        c = st.residual
        g = self._gradient_blocks(c[None, :] * np.conj(st.bh), np.conj(c)[None, :] * st.cx)
        return g if k is None else g[k]

    def riemannian_gradient(self, V, k=None, check=True):
        """Half the Euclidean gradient, which is already horizontal."""
        g = 0.5 * self.euclidean_gradient(V)
        if check and not is_horizontal(np.asarray(V), g, tol=1e-9):
            raise AssertionError("Riemannian gradient left the horizontal space")
        return g if k is None else g[k]

    def euclidean_hessian_vec(self, V, eta, k=None):
        st = self.evaluate(V)
        eta = np.asarray(eta)
        if eta.shape != self.shape:
            raise ShapeError(f"direction needed on every factor: shape {eta.shape}, expected {self.shape}")
        ens = self.ensemble
        ex = eta[:, : self.N]
        eu = eta[:, self.N:]
        c_ex = np.matmul(ens.fc, ex[:, :, None])[:, :, 0]
        b_eh = np.conj(eu) @ ens.B.T
        q = np.sum(c_ex * st.bh + st.cx * b_eh, axis=0)
        c = st.residual
        t_top = q[None, :] * np.conj(st.bh) + c[None, :] * np.conj(b_eh)
        t_bottom = np.conj(q)[None, :] * st.cx + np.conj(c)[None, :] * c_ex
        hv = self._gradient_blocks(t_top, t_bottom)
        return hv if k is None else hv[k]

    def decrease(self, V, eta):
        """``f(V) - f(V + eta)`` computed from the residual change.

        Expanding ``r(V + eta) - r(V)`` term by term avoids the cancellation of
        subtracting two nearly equal objective values, which keeps trust-region
        ratios meaningful once the residual is small.
        """
        st = self.evaluate(V)
        eta = np.asarray(eta)
        ens = self.ensemble
        c_ex = np.matmul(ens.fc, eta[:, : self.N, None])[:, :, 0]
        b_eh = np.conj(eta[:, self.N:]) @ ens.B.T
        dr = np.sum(c_ex * st.bh + st.cx * b_eh + c_ex * b_eh, axis=0)
        return -float(2.0 * np.real(np.vdot(dr, st.residual)) + np.real(np.vdot(dr, dr)))

    def riemannian_hessian_vec(self, V, eta, check=True):
        V = np.asarray(V)
        if check and not is_horizontal(V, eta, tol=1e-9):
            raise AssertionError("Hessian direction is not horizontal")
        return horizontal_project(V, 0.5 * self.euclidean_hessian_vec(V, eta))
