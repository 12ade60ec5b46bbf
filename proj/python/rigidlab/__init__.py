"""Numerics for measure rigidity: subresonant maps, Lyapunov spectra,
expansion certificates, random-walk measures and entropy bookkeeping.

Maps, walks and spectra are passed either as JSON strings or as plain
Python objects, which are serialized here.
"""

import json

from . import _rigidlab
from ._rigidlab import RigidlabError, __version__, relative_entropy_bound_check, shannon_entropy

__all__ = [
    "RigidlabError",
    "__version__",
    "compose",
    "conjugate",
    "empirical_measure",
    "fixtures",
    "invert",
    "linearize",
    "ly_bounds",
    "lyapunov",
    "pesin_sum",
    "relative_entropy_bound_check",
    "residuals",
    "run_experiment",
    "shannon_entropy",
    "sigma",
    "stiffness_chain",
    "validate_map",
    "weyl_coefficients",
]


def _doc(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def validate_map(m, strict=False):
    return _rigidlab.validate_map(_doc(m), strict)


def compose(f, g):
    return json.loads(_rigidlab.compose(_doc(f), _doc(g)))


def invert(f):
    return json.loads(_rigidlab.invert(_doc(f)))


def conjugate(g, f):
    return json.loads(_rigidlab.conjugate(_doc(g), _doc(f)))


def linearize(f, affine=False):
    return json.loads(_rigidlab.linearize(_doc(f), affine))


def lyapunov(walk, start, n, seed=1):
    return _rigidlab.lyapunov(_doc(walk), list(start), n, seed)


def sigma(walk, N, vectors, base_point=(), mode="exact", samples=10000, seed=1):
    return _rigidlab.sigma(_doc(walk), N, [list(v) for v in vectors], list(base_point), mode, samples, seed)


def empirical_measure(walk, start, N, M=1, seed=1, burn_in=0):
    return _rigidlab.empirical_measure(_doc(walk), list(start), N, M, seed, burn_in)


def residuals(walk, start, N, M=1, seed=1, K=20):
    return _rigidlab.residuals(_doc(walk), list(start), N, M, seed, K)


def weyl_coefficients(walk, start, N, M=1, seed=1, K=10):
    return _rigidlab.weyl_coefficients(_doc(walk), list(start), N, M, seed, K)


def pesin_sum(spectrum):
    return _rigidlab.pesin_sum(_doc(spectrum))


def ly_bounds(spectrum):
    return _rigidlab.ly_bounds(_doc(spectrum))


def stiffness_chain(H_mu, spectrum, h_rel=None):
    return _rigidlab.stiffness_chain(H_mu, _doc(spectrum), h_rel)


def run_experiment(config):
    return _rigidlab.run_experiment(_doc(config))


def fixtures():
    out = []
    for f in _rigidlab.fixtures():
        f = dict(f)
        f["config"] = json.loads(f["config"])
        out.append(f)
    return out
