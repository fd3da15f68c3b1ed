"""Output purity, minimal output entropy and one-step capacity of quantum channels.

Submodules: ``linalg`` (matrix substrate), ``channels`` (Kraus-form channels),
``purity`` (purity functionals), ``capacity`` (Holevo capacity), ``harness``
(experiments) and ``cli``.
"""

__version__ = "0.1.0"
