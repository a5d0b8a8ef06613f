"""Calibration curves in the disk with known geodesic curvature."""
import numpy as np

from minend import hyp2


def horocycle(spacing, n=200):
    """Samples of the horocycle |z - 1/2| = 1/2 around phi = pi, equally spaced."""
    out = []
    phi = np.pi - 0.5 * n * spacing / 2.0
    for _ in range(n):
        z = 0.5 + 0.5 * np.exp(1j * phi)
        out.append(z)
        speed = 2.0 / (1.0 - abs(z) ** 2) * 0.5
        # midpoint rule for the angle increment
        zm = 0.5 + 0.5 * np.exp(1j * (phi + 0.5 * spacing / speed))
        phi += spacing / (2.0 / (1.0 - abs(zm) ** 2) * 0.5)
    return np.array(out)


def equidistant(rho, spacing, n=200):
    """Points at signed distance rho from the real diameter, arclength spacing apart."""
    g = hyp2.Geodesic(hyp2.IdealPoint(np.pi), hyp2.IdealPoint(0.0))
    p = 1j * np.tanh(rho / 2.0)
    ds = spacing / np.cosh(rho)
    s = (np.arange(n) - n // 2) * ds
    return np.array([hyp2.translate(g, float(t), p).z for t in s])


def geodesic_samples(g, spacing, n=100):
    p = hyp2.from_standard(g, 0.0)
    return np.array([hyp2.translate(g, float(t), p).z for t in (np.arange(n) - n // 2) * spacing])
