"""Anisotropic J1-J3 spin lattice energies, constructions and experiments."""
