"""Bernstein and Markov-type inequalities for polynomials on finite-dimensional l_p spaces."""

__version__ = "0.1.0"
