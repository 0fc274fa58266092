"""Statevector tools for branched-subspace adiabatic eigenstate preparation.

The package is organized around a small statevector core (``statevector``,
``kernels``), Pauli-sum Hamiltonians for the XYZ ring (``hamiltonians``),
the domain-wall subspace map and its inverse circuits (``subspace``),
weight-preserving parametrized gates (``gates``), Trotterized/exact
adiabatic evolution (``adiabatic``), subspace eigenstate reconstruction
(``mcvqe``), and the sweep/CSV experiment layer (``experiment``, ``cli``).
"""

__version__ = "0.1.0"
