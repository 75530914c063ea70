"""esverify: certifies that 4/n is a sum of three distinct unit fractions.

Residue classes are certified by seven constant-coefficient modular
equations, collected into per-modulus filters, and swept over a CRT wheel of
candidates n = r + k*G with n = 1 (mod 24).
"""

__version__ = "0.1.0"
