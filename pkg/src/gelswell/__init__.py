"""One-dimensional gel swelling: constitutive model, hyperbolicity analysis,
a fixed-domain finite-volume solver, free-boundary reconstruction and
characteristic-based lifetime diagnostics."""

__version__ = "0.1.0"

from .params import POLYMER, POLYSACCHARIDE, ParameterSet, load_params  # noqa: E402,F401
