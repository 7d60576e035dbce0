"""Hyperbolicity certificates for circle and torus maps."""

import json

from ._core import (
    MapModel,
    __version__,
    certify_file,
    certify_json,
    hyperbolic_times,
    lift_plot_svg,
    lyapunov_spectrum,
    periodic_orbits,
    pliss_density,
    selftest,
)


def certify(config, seed=None):
    """Run the pipeline on a config (dict, JSON text or path) and return the report as a dict."""
    if isinstance(config, dict):
        text = json.dumps(config)
    elif config.lstrip().startswith("{"):
        text = config
    else:
        with open(config) as f:
            text = f.read()
    return json.loads(certify_json(text, seed))


__all__ = [
    "MapModel",
    "__version__",
    "certify",
    "certify_file",
    "certify_json",
    "hyperbolic_times",
    "lift_plot_svg",
    "lyapunov_spectrum",
    "periodic_orbits",
    "pliss_density",
    "selftest",
]
