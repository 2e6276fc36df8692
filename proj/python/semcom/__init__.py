"""Semantic communication link simulator: causal models, MDL language
machinery, packet channel, and the teacher/apprentice protocol KPIs."""

try:
    # installed wheel: the extension lives inside the package
    from ._semcom import *  # noqa: F401,F403
    from ._semcom import __version__  # noqa: F401
except ImportError:
    # in-tree build: the extension sits on PYTHONPATH as a top-level module
    from _semcom import *  # noqa: F401,F403
    from _semcom import __version__  # noqa: F401
