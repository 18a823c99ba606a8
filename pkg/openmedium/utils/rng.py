"""Counter-based random streams with label-derived keys.

Every subsystem draws from its own named stream, so toggling one feature
never shifts the numbers another subsystem sees.

Mappings from a 64-bit output ``x``:
    uniform()      -> (x >> 11) * 2**-53            in [0, 1)
    below(n)       -> (x * n) >> 64                 in [0, n)
    bernoulli(p)   -> uniform() < p
    peek_uniforms(k) -> the next k uniform() values, counter untouched
    numpy_generator() -> numpy Generator on a Philox key of one draw
"""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_TWO_POW_53 = 1.0 / (1 << 53)


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, label: str) -> int:
    # never the builtin hash(): it is salted per process
    digest = hashlib.blake2b(f"{seed}:{label}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    __slots__ = ("label", "seed", "key", "counter")

    def __init__(self, seed: int, label: str, counter: int = 0, key: int | None = None):
        self.label = label
        self.seed = seed
        self.key = derive_key(seed, label) if key is None else key
        self.counter = counter

    def next(self) -> int:
        self.counter += 1
        return _mix64((self.key + self.counter * GOLDEN) & MASK64)

    def uniform(self) -> float:
        return (self.next() >> 11) * _TWO_POW_53

    def below(self, n: int) -> int:
        return (self.next() * n) >> 64

    def bernoulli(self, p: float) -> bool:
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return self.uniform() < p

    def peek_uniforms(self, count: int) -> np.ndarray:
        """The next ``count`` values of uniform() as float64, without advancing the counter."""
        steps = np.arange(self.counter + 1, self.counter + 1 + count, dtype=np.uint64)
        z = np.uint64(self.key) + steps * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z ^= z >> np.uint64(31)
        return (z >> np.uint64(11)).astype(np.float64) * _TWO_POW_53

    def numpy_generator(self) -> np.random.Generator:
        """A bulk generator for one phase; consumes exactly one draw of this stream."""
        return np.random.Generator(np.random.Philox(key=self.next()))

    def state(self) -> tuple:
        return (self.label, self.key, self.counter)

    def __repr__(self):
        return f"RngStream({self.label!r}, counter={self.counter})"


def rng_stream(seed: int, label: str) -> RngStream:
    return RngStream(seed, label)


def rng_next(stream: RngStream) -> int:
    return stream.next()


class RngStreams:
    """The named streams of one run, kept in a dict so checkpoints can list them."""

    def __init__(self, seed: int):
        self.seed = seed
        self._streams: dict[str, RngStream] = {}

    def stream(self, label: str) -> RngStream:
        if not label:
            raise ValueError("stream label must be non-empty")
        if label not in self._streams:
            self._streams[label] = RngStream(self.seed, label)
        return self._streams[label]

    def states(self) -> list[tuple]:
        return [self._streams[label].state() for label in sorted(self._streams)]

    @classmethod
    def from_states(cls, seed: int, states) -> "RngStreams":
        streams = cls(seed)
        for label, key, counter in states:
            streams._streams[label] = RngStream(seed, label, counter=counter, key=key)
        return streams
