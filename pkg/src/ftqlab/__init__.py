"""ftqlab: desk-scale constructions and checks for constant-overhead fault tolerance."""

__version__ = "0.1.0"
