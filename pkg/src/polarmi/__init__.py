"""Polar (amplitude / phase / cross) decomposition of mutual information over complex AWGN."""

__version__ = "0.1.0"

from .constellation import (Constellation, make_apsk, make_pam_factor,  # noqa: E402
                            make_product_apsk, make_psk, make_square_qam, split_m, validate)
from .distributions import ChannelParams  # noqa: E402
from .gaussian_polar import PolarDecomposition, decompose_gaussian  # noqa: E402
from .discrete_polar import decompose_discrete  # noqa: E402
from .numerics import EstimateWithError, EstimatorConfig  # noqa: E402

__all__ = [
    "ChannelParams", "Constellation", "EstimateWithError", "EstimatorConfig",
    "PolarDecomposition", "decompose_discrete", "decompose_gaussian", "make_apsk",
    "make_pam_factor", "make_product_apsk", "make_psk", "make_square_qam", "split_m",
    "validate",
]
