"""Numerical lab for contact Hamilton-Jacobi equations u_t + H(x, u_x, u) = 0 on the flat circle."""

__version__ = "0.1.0"
