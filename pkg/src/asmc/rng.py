"""Counter-based random streams keyed by (seed, level, particle).

Each stream is a Philox generator whose 128-bit key encodes the triple and
whose counter starts at zero, so the numbers a particle sees never depend
on how particles are scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_INDEX = 2**32 - 1
# particle slot reserved for the per-level resampling stream
RESAMPLE_SLOT = MAX_INDEX
INIT_LEVEL = 0


@dataclass(frozen=True)
class StreamId:
    seed: int
    level: int
    particle: int

    def key(self):
        for name in ("level", "particle"):
            v = getattr(self, name)
            if not 0 <= v <= MAX_INDEX:
                raise ValueError(f"stream {name} {v} outside [0, 2**32)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        return np.array([self.seed, (self.level << 32) | self.particle], dtype=np.uint64)


def stream(seed, level, particle):
    """Fresh generator for one (seed, level, particle) stream."""
    return np.random.Generator(np.random.Philox(key=StreamId(seed, level, particle).key()))


class StreamFactory:
    """Re-keys a single Philox instance instead of building one per stream.

    Cheaper than :func:`stream` in tight per-particle loops; the numbers
    produced are identical.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._bitgen = np.random.Philox(key=0)
        self._gen = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state

    def __call__(self, level, particle):
        st = self._state
        st["state"]["key"][:] = StreamId(self.seed, level, particle).key()
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bitgen.state = st
        return self._gen


def particle_normals(seed, level, particles, n_steps, dim, uniforms=False):
    """Standard normal increments for a block of particles.

    Returns an array of shape ``(len(particles), n_steps, dim)`` whose row
    ``j`` is the first ``n_steps * dim`` normals of stream
    ``(seed, level, particles[j])``.  With ``uniforms=True`` also returns
    the next ``n_steps`` uniforms of each stream (used by MALA).
    """
    factory = StreamFactory(seed)
    out = np.empty((len(particles), n_steps, dim))
    u = np.empty((len(particles), n_steps)) if uniforms else None
    for j, p in enumerate(particles):
        g = factory(level, int(p))
        out[j] = g.standard_normal((n_steps, dim))
        if uniforms:
            u[j] = g.random(n_steps)
    return (out, u) if uniforms else out
