"""Quotient geometry of ``C_*^n / SU(1)`` and its s-fold product.

A single factor is a 1-D complex array ``w`` of length ``n = N + K``; a point
on the product manifold is an ``(s, n)`` array whose rows are factors. Tangent
vectors share the shape of their base point. The metric is
``g(zeta, eta) = Tr(zeta^H eta + eta^H zeta) = 2 Re <zeta, eta>`` and the
vertical space at ``w`` is ``span_R{i w}``.
"""

import numpy as np

from .errors import DegeneratePointError, ShapeError

__all__ = [
    "horizontal_coefficient",
    "horizontal_project",
    "is_horizontal",
    "metric",
    "product_metric",
    "product_norm",
    "random_horizontal",
    "retract",
]


def _check_pair(a, b):
    if np.shape(a) != np.shape(b):
        raise ShapeError(f"tangent vectors have shapes {np.shape(a)} and {np.shape(b)}")


def metric(w, zeta, eta):
    _check_pair(zeta, eta)
    if w is not None and np.shape(w) != np.shape(zeta):
        raise ShapeError(f"base point shape {np.shape(w)} != tangent shape {np.shape(zeta)}")
    return 2.0 * float(np.real(np.vdot(zeta, eta)))


def product_metric(V, Z, H):
    """Sum of per-factor metrics; for ``(s, n)`` arrays this is one ``vdot``."""
    return metric(V, Z, H)


def product_norm(V, Z):
    return np.sqrt(max(product_metric(V, Z, Z), 0.0))


def horizontal_coefficient(w, eta):
    """``a = (w^H eta - eta^H w) / (2 w^H w)``, per factor along the last axis."""
    w = np.asarray(w)
    ww = np.sum(np.abs(w) ** 2, axis=-1, keepdims=True)
    if np.any(ww == 0):
        raise DegeneratePointError("horizontal projection at the origin")
    return 1j * np.imag(np.sum(np.conj(w) * eta, axis=-1, keepdims=True)) / ww


def horizontal_project(w, eta):
    _check_pair(w, eta)
    return eta - horizontal_coefficient(w, eta) * w


def is_horizontal(w, eta, tol=1e-10):
    """``|Im(w^H eta)| <= tol ||w|| ||eta||`` for every factor."""
    _check_pair(w, eta)
    w = np.atleast_2d(w)
    eta = np.atleast_2d(eta)
    im = np.abs(np.imag(np.sum(np.conj(w) * eta, axis=-1)))
    bound = tol * np.linalg.norm(w, axis=-1) * np.linalg.norm(eta, axis=-1)
    return bool(np.all(im <= bound))


def retract(w, xi):
    _check_pair(w, xi)
    out = w + xi
    if np.any(np.all(out == 0, axis=-1)):
        raise DegeneratePointError("retraction reached the origin")
    return out


def random_horizontal(w, seed=None):
    """Unit-metric-norm Gaussian direction in the horizontal space at ``w``."""
    rng = np.random.default_rng(seed)
    w = np.asarray(w)
    eta = rng.standard_normal(w.shape) + 1j * rng.standard_normal(w.shape)
    eta = horizontal_project(w, eta)
    return eta / np.sqrt(metric(w, eta, eta))
