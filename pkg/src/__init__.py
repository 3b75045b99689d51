"""ruij-lab - numerics of the hyperbolic Ruijsenaars system"""

__version__ = "0.1.0"
