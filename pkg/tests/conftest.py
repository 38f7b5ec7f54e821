"""Shared fixtures and small two-party drivers for the suite."""

import random

import pytest

from rootshare.ring import (CLIENT, SERVER, DealerState, FixedPointCodec,
                            beaver_mul_batch, make_shares)
from rootshare.transport import run_pair


@pytest.fixture
def codec():
    return FixedPointCodec()


@pytest.fixture
def codec32():
    return FixedPointCodec(l=32, f=12)


def quantize(x, codec):
    return codec.decode(codec.encode(x))


def mul_pairs(codec, xs, ys, seed):
    """Decoded Beaver products of two plaintext batches over a fresh session.

    Inputs are pre-quantized to the codec grid so the caller can compare
    against exact products of representable values.
    """
    rng = random.Random(seed)
    dealer = DealerState(codec, seed=seed + 1)
    stream_c, stream_s = dealer.pair_streams()
    count = len(xs)
    xsh = [make_shares(x, codec, rng) for x in xs]
    ysh = [make_shares(y, codec, rng) for y in ys]

    def party(name, stream, idx):
        def fn(ep):
            xv = [p[idx].value for p in xsh]
            yv = [p[idx].value for p in ysh]
            return beaver_mul_batch(name, xv, yv, stream.take(count), ep,
                                    codec)

        return fn

    out_c, out_s = run_pair(party(CLIENT, stream_c, 0),
                            party(SERVER, stream_s, 1))
    return [codec.decode((c + s) % codec.modulus)
            for c, s in zip(out_c, out_s)]


def chi2_uniform_stat(counts):
    """Pearson statistic of observed bin counts against the uniform law."""
    total = sum(counts)
    expected = total / len(counts)
    return sum((c - expected) ** 2 / expected for c in counts)


class FixedBits:
    """random.Random stand-in that hands out one scripted mask."""

    def __init__(self, value):
        self.value = value

    def getrandbits(self, _bits):
        return self.value
