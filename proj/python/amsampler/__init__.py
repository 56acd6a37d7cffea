"""Reverse-diffusion samplers with an analytic Gaussian-mixture denoiser."""

from ._amsampler import *  # noqa: F401,F403
from ._amsampler import __doc__  # noqa: F401

__version__ = "0.1.0"
