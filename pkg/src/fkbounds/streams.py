"""Counter-based random streams keyed by (master seed, purpose, index).

Every stochastic work item in the package (a path, a disorder realization)
draws from its own Philox stream derived from the master seed and the item
index.  Results therefore never depend on how items are split across
workers, only on the indices themselves.
"""

import numpy as np

# Spawn-key namespaces.  Keep these distinct so that, say, path 3 and
# disorder realization 3 never share a stream under the same master seed.
PATHS = 0
FIELDS = 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for one work item."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
