"""Ohta-Kawasaki nonlocal isoperimetric energy on the plane and the flat torus."""

__version__ = "0.1.0"
