"""
horolab: Busemann functions, horofunctions and dl-functions on discrete surfaces.
"""

__version__ = "0.1.0"
