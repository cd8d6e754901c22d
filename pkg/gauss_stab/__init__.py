"""gauss-stab constants
"""
__version__ = "0.1.0"

import logging

logging.getLogger(__name__).setLevel(logging.INFO)
