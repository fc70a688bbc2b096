"""Diffuse Ohta-Kawasaki dynamics, sharp nonlocal Mullins-Sekerka dynamics,
and the verification experiments that couple them."""

__version__ = "0.1.0"
