"""slicebug: recurring-bug detection by feature-slice similarity over C code."""

__version__ = "0.1.0"
