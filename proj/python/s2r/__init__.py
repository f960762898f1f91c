"""Feedback-free sim-to-real training on rich-observation MDPs."""

try:
    from ._s2r import *  # noqa: F401,F403  (installed layout)
except ImportError:
    from _s2r import *  # noqa: F401,F403  (build-tree layout)
