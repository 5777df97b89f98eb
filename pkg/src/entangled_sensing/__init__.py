"""Supervised learning on displacement channels probed by entangled or
separable squeezed light: noise models, SPSA-trained SVM and PCA, and
binary channel-discrimination error bounds."""

__version__ = "0.1.0"
