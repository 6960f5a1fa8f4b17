"""Sphere node sets and small quadrature helpers.

Production node sets are Fibonacci lattices with equal weights (arbitrary N,
near-uniform coverage).  Oracle-grade checks use a Gauss-Legendre x trapezoid
product rule, which is spectrally accurate for smooth integrands and fully
independent of the lattice route.
"""

from __future__ import annotations

import numpy as np


def fibonacci_sphere(n: int, radius: float = 1.0):
    """Fibonacci lattice on the sphere |x| = radius.

    Returns (nodes, weights) with equal weights summing to the sphere area.
    """
    if n < 1:
        raise ValueError("need at least one node")
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    phi = 2.0 * np.pi * k / golden
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    nodes = radius * np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    weights = np.full(n, 4.0 * np.pi * radius ** 2 / n)
    return nodes, weights


def product_sphere(n_theta: int, n_phi: int, radius: float = 1.0):
    """Gauss-Legendre (cos theta) x trapezoid (phi) nodes and weights."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    ct = np.repeat(x, n_phi)
    st = np.sqrt(np.maximum(0.0, 1.0 - ct * ct))
    ph = np.tile(phi, n_theta)
    nodes = radius * np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1)
    weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi) * radius ** 2
    return nodes, weights


def unit_directions_product(n_theta: int, n_phi: int):
    """Directions and weights on the unit sphere with total weight 4*pi."""
    return product_sphere(n_theta, n_phi, radius=1.0)


def gauss_panel(a: float, b: float, n: int):
    """Gauss-Legendre nodes/weights mapped to [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w
