__all__ = [
    "__title__",
    "__version__",
    "__description__",
    "__author__",
    "__author_email__",
    "__license__",
]

__title__ = "butterfly_gap"
__version__ = "0.1.0"
__description__ = (
    "Classical rates versus quantum bounds for butterfly-block networks."
)
__author__ = "Nynra"
__author_email__ = "nynradev@pm.me"
__license__ = "MIT"
