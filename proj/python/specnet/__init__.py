"""SpectralNet: neural spectral clustering with an exact-eigensolver oracle."""

try:
    from ._specnet import *  # noqa: F401,F403
    from ._specnet import __doc__  # noqa: F401
except ImportError:  # built in-tree, module sits next to the build outputs
    from _specnet import *  # noqa: F401,F403
