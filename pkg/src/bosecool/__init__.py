"""bosecool: cooling limits and simulation for bosonic heat-bath algorithmic cooling.

Subpackages:

- ``gaussian``: Gaussian states/unitaries in the moment representation
- ``hbac``: swap-chain protocol, cooling limits, entropy-production accounting
- ``spectrum``: machine-spectrum optimization for minimal entropy production
- ``fock``: exact truncated Fock-space engine for p-excitation-exchange collisions
- ``collisions``: closed-form short-time and iterated collision predictions
- ``cli``: command-line front end emitting CSV/JSON sweep data
"""

__version__ = "0.1.0"
