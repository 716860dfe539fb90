try:
    from .version import __version__  # noqa: F401
except ImportError:
    __version__ = "latest"
