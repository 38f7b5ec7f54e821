"""Inverse square root on shares: bit-trick seeding plus Newton refinement.

The classic one-party trick reads 1/sqrt(x) off the packed bits of x with
one integer shift against a magic constant. The two-party form here splits
that arithmetic across additive shares: each party shifts the packed bits
of its own share magnitude, the server adds a constant that merges the two
halves and compensates the flooding bias, and the sum of the two integers
approximates the packed bits of the result. No communication happens until
the bits re-enter the value domain.

Newton's update y <- y * (3/2 - x/2 * y^2) then runs on shares with three
Beaver multiplications per iteration. The iteration converges only when
seed * sqrt(x) < sqrt(3), which is what share flooding buys.
"""

import math
import random
from dataclasses import dataclass

from .errors import ConfigError, DivergenceError, RangeError, UsageError
from .floatbits import compose, decompose, pack_integer, to_binary32, \
    unpack_integer
from .ring import CLIENT, SERVER, DealerState, FixedPointCodec, RingShare, \
    beaver_mul_batch, reconstruct, truncate_local
from .transport import run_pair

MAGIC_K1 = 0x5F3759DF
MIN_MAGNITUDE = 2.0 ** -30

STRATEGY_MASKED_OPEN = "masked-open"
STRATEGY_LOCAL_REINTERPRET = "local-reinterpret"
STRATEGIES = (STRATEGY_MASKED_OPEN, STRATEGY_LOCAL_REINTERPRET)

# Expected mantissa fraction of a flooded share, used only to center the
# local-reinterpret linearization.
LINEARIZE_MANTISSA = 0.375


@dataclass(frozen=True)
class SeedParams:
    """Constants of the communication-free seed.

    K1 is the classic one-party magic integer, pinned verbatim. K2 and the
    flooding compensation are derived at construction time, never copied
    from hand arithmetic: K2 = round((3B - 3b - 1) * L / 2) merges the two
    share halves, comp = (E_f - E_m) * L / 2 removes the systematic
    exponent bias flooding introduces.
    """

    b: float = 0.045
    B: int = 127
    L: int = 1 << 23
    K1: int = MAGIC_K1
    F: float = 8192.0
    E_f: int = 140
    E_m: int = 128

    def __post_init__(self):
        if not 0 <= self.b < 1:
            raise ConfigError(f"log-linearization constant b={self.b} outside [0, 1)")
        if self.L <= 0 or self.L & (self.L - 1):
            raise ConfigError("L must be a positive power of two")
        if self.K1 <= 0:
            raise ConfigError("K1 must be positive")
        if self.F <= 0:
            raise ConfigError("flood constant must be positive")
        for name in ("E_f", "E_m"):
            value = getattr(self, name)
            if not 1 <= value <= 254:
                raise ConfigError(f"{name}={value} is not a normal binary32 exponent")

    @property
    def K2(self) -> int:
        return round((3 * self.B - 3 * self.b - 1) * self.L / 2)

    @property
    def comp(self) -> int:
        return ((self.E_f - self.E_m) * self.L) // 2

    @property
    def C0(self) -> int:
        # centers the masked-open factors near 1 under flooding
        return round(self.L * (self.E_f + 0.5) / 4)


@dataclass(frozen=True)
class NewtonConfig:
    iterations: int = 4
    divergence_bound: float = 2.0 ** 20
    strategy: str = STRATEGY_MASKED_OPEN

    def __post_init__(self):
        if not 0 <= self.iterations <= 16:
            raise ConfigError(f"iterations={self.iterations} outside 0..16")
        if self.divergence_bound <= 0:
            raise ConfigError("divergence_bound must be positive")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")


def seed_local(x: float, params: SeedParams = SeedParams()) -> float:
    """One-party seed: compose(K1 - packed(x)/2), relative error under 5%."""
    if not (isinstance(x, (int, float)) and math.isfinite(x) and x > 0):
        raise RangeError(f"seed_local needs a positive finite input, got {x!r}")
    i_x = pack_integer(decompose(to_binary32(x))).i
    return compose(unpack_integer(params.K1 - (i_x >> 1)))


def _packed_magnitude(value: float, params: SeedParams) -> int:
    mag = abs(value)
    if mag < MIN_MAGNITUDE:
        mag = MIN_MAGNITUDE
    return pack_integer(decompose(to_binary32(mag))).i


def seed_share_client(fc: float, params: SeedParams = SeedParams()) -> int:
    """Client half of the seed: minus a quarter of its packed magnitude."""
    return -(_packed_magnitude(fc, params) >> 2)


def seed_share_server(fs: float, params: SeedParams = SeedParams(),
                      flooded: bool = True) -> int:
    """Server half: quarter-shifted packed magnitude plus the merge constant
    K2, plus the flooding compensation when the shares are flooded."""
    o = -(_packed_magnitude(fs, params) >> 2) + params.K2
    if flooded:
        o += params.comp
    return o


def seed_shares(fc: float, fs: float, params: SeedParams = SeedParams(),
                flooded: bool = True):
    """Both parties' seed integers, each from its own share only.

    Pure local bit arithmetic: zero bytes, zero rounds. Share signs are
    ignored (the magnitudes carry the exponent information; the sign
    structure under flooding is systematic and absorbed by K2, the
    compensation, and the Newton refinement).
    """
    return (seed_share_client(fc, params),
            seed_share_server(fs, params, flooded))


def bits_to_value_batch(party: str, o_values, strategy: str, channel,
                        codec: FixedPointCodec, params: SeedParams,
                        triples=None, flooded: bool = True):
    """Carry seed integers into fixed-point value shares.

    masked-open: each party maps its integer to the exponential factor
    2^(o/L + centering), encodes it, and one Beaver multiplication joins
    the factors, so the pair reconstructs 2^((o_c + o_s)/L - B). That is
    within a factor 2^-phi, phi = log2(1+m) - m <= 0.0861, of the bit-exact
    composed seed; the shortfall only deepens the Newton undershoot. Costs
    one round and two ring elements per party per element.

    local-reinterpret: zero communication. Each party applies the affine
    map that linearizes the same exponential around the flood-expected
    packed value; usable only on flooded shares, where the seed is pinned
    near a known constant.
    """
    if strategy == STRATEGY_MASKED_OPEN:
        if party == CLIENT:
            x_vals = [codec.encode(2.0 ** ((o + params.C0) / params.L))
                      for o in o_values]
            y_vals = [0] * len(o_values)
        else:
            x_vals = [0] * len(o_values)
            y_vals = [codec.encode(2.0 ** ((o - params.C0) / params.L - params.B))
                      for o in o_values]
        views = triples.take(len(o_values))
        return beaver_mul_batch(party, x_vals, y_vals, views, channel, codec)
    if strategy == STRATEGY_LOCAL_REINTERPRET:
        if not flooded:
            raise UsageError(
                "local-reinterpret is only sound on flooded shares")
        p0 = params.K2 + params.comp - round(
            (params.E_f + LINEARIZE_MANTISSA) * params.L / 2)
        v0 = 2.0 ** (p0 / params.L - params.B)
        slope = v0 * math.log(2.0) / params.L
        if party == CLIENT:
            return [codec.encode(slope * o) for o in o_values]
        offset = v0 - slope * p0
        return [codec.encode(slope * o + offset) for o in o_values]
    raise ConfigError(f"unknown strategy {strategy!r}")


def bits_to_value_shares(o_c: int, o_s: int,
                         strategy: str = STRATEGY_MASKED_OPEN,
                         codec: FixedPointCodec = FixedPointCodec(),
                         params: SeedParams = SeedParams(),
                         dealer: DealerState | None = None,
                         flooded: bool = True):
    """Joint convenience form returning (client share, server share)."""
    if strategy == STRATEGY_LOCAL_REINTERPRET:
        c = bits_to_value_batch(CLIENT, [o_c], strategy, None, codec, params,
                                flooded=flooded)[0]
        s = bits_to_value_batch(SERVER, [o_s], strategy, None, codec, params,
                                flooded=flooded)[0]
        return RingShare(CLIENT, c), RingShare(SERVER, s)
    dealer = dealer or DealerState(codec, seed=0)
    stream_c, stream_s = dealer.pair_streams()

    def client_fn(ep):
        return bits_to_value_batch(CLIENT, [o_c], strategy, ep, codec,
                                   params, stream_c, flooded)[0]

    def server_fn(ep):
        return bits_to_value_batch(SERVER, [o_s], strategy, ep, codec,
                                   params, stream_s, flooded)[0]

    c, s = run_pair(client_fn, server_fn)
    return RingShare(CLIENT, c), RingShare(SERVER, s)


def newton_plain(x: float, y0: float, n: int) -> float:
    """n inverse-sqrt Newton steps; may diverge, the caller inspects."""
    if n < 0:
        raise RangeError("iteration count must be non-negative")
    if not x > 0:
        raise RangeError(f"newton_plain needs x > 0, got {x!r}")
    y = y0
    for _ in range(n):
        y = y * (1.5 - 0.5 * x * y * y)
        if not math.isfinite(y):
            return y
    return y


def newton_shared_batch(party: str, x_values, y_values, n: int, triples,
                        channel, codec: FixedPointCodec, probe=None):
    """n shared Newton iterations on batches, 3 multiplications each.

    Per iteration: t1 = y*y, t2 = (x/2)*t1, then y = y * (3/2 - t2); the
    3/2 - t2 step is an exact local affine map. x/2 is pre-computed once
    with a one-bit local truncation. probe, when given, is called after
    every iteration with (iteration, own share values) and is meant for
    test or bench harnesses only; a truthy return raises DivergenceError.
    """
    mod = codec.modulus
    enc_three_halves = codec.encode(1.5)
    is_server = party == SERVER
    half_x = [truncate_local(RingShare(party, v), codec, 1).value
              for v in x_values]
    y = list(y_values)
    for k in range(n):
        t1 = beaver_mul_batch(party, y, y, triples.take(len(y)), channel, codec)
        t2 = beaver_mul_batch(party, half_x, t1, triples.take(len(y)),
                              channel, codec)
        if is_server:
            w = [(enc_three_halves - v) % mod for v in t2]
        else:
            w = [(-v) % mod for v in t2]
        y = beaver_mul_batch(party, y, w, triples.take(len(y)), channel, codec)
        if probe is not None and probe(k, list(y)):
            raise DivergenceError(f"iterate left the safe interval at step {k}")
    return y


def newton_shared(x_share: RingShare, y_share: RingShare, n: int, triples,
                  channel, codec: FixedPointCodec, probe=None) -> RingShare:
    if x_share.party != y_share.party:
        raise UsageError("newton_shared operands must belong to one party")
    out = newton_shared_batch(x_share.party, [x_share.value], [y_share.value],
                              n, triples, channel, codec, probe)
    return RingShare(x_share.party, out[0])


def rsqrt_shared_batch(party: str, values, channel, codec: FixedPointCodec,
                       params: SeedParams, newton: NewtonConfig, triples,
                       flooded: bool = True, probe=None):
    """Full per-party pipeline on a batch of shares of positive values:
    local seed bits, value-domain conversion, shared Newton refinement.

    The seed reads each party's own float view of its share, so it runs on
    the values as given; the Newton phase first adds dealer zero-shares,
    because its truncations need a wrap-normalized (uniform-client) pair
    and callers may supply structured splits.
    """
    if party == CLIENT:
        o_values = [seed_share_client(codec.decode(v), params) for v in values]
    else:
        o_values = [seed_share_server(codec.decode(v), params, flooded)
                    for v in values]
    seeds = bits_to_value_batch(party, o_values, newton.strategy, channel,
                                codec, params, triples, flooded)
    mod = codec.modulus
    zeros = triples.take_zeros(len(values))
    arith = [(v + z) % mod for v, z in zip(values, zeros)]
    return newton_shared_batch(party, arith, seeds, newton.iterations,
                               triples, channel, codec, probe)


def rsqrt_shared(x_share: RingShare, channel, codec: FixedPointCodec,
                 params: SeedParams, newton: NewtonConfig, triples,
                 flooded: bool = True, probe=None) -> RingShare:
    out = rsqrt_shared_batch(x_share.party, [x_share.value], channel, codec,
                             params, newton, triples, flooded, probe)
    return RingShare(x_share.party, out[0])


def run_shared_rsqrt(share_pairs, codec: FixedPointCodec, params: SeedParams,
                     newton: NewtonConfig, dealer_seed: int = 0,
                     flooded: bool = True, transport: str = "inproc"):
    """Drive both parties over a fresh channel for a batch of share pairs.

    share_pairs is a list of (client value, server value) ring integers.
    Returns (decoded outputs, client stats, server stats).
    """
    dealer = DealerState(codec, seed=dealer_seed)
    stream_c, stream_s = dealer.pair_streams()
    stats = {}

    def party_fn(party, stream):
        idx = 0 if party == CLIENT else 1
        values = [pair[idx] for pair in share_pairs]

        def fn(ep):
            out = rsqrt_shared_batch(party, values, ep, codec, params,
                                     newton, stream, flooded)
            stats[party] = ep.stats()
            return out

        return fn

    out_c, out_s = run_pair(party_fn(CLIENT, stream_c),
                            party_fn(SERVER, stream_s), transport=transport)
    results = [
        reconstruct(RingShare(CLIENT, c), RingShare(SERVER, s), codec)
        for c, s in zip(out_c, out_s)
    ]
    return results, stats[CLIENT], stats[SERVER]


@dataclass(frozen=True)
class SweepRow:
    gap: int
    trials: int
    converged: int
    rate: float
    mean_rel_err: float


def closeness_sweep(gaps=range(13), trials: int = 200, n: int = 8,
                    tol: float = 1e-2, codec: FixedPointCodec | None = None,
                    params: SeedParams | None = None, seed: int = 1,
                    strategy: str = STRATEGY_MASKED_OPEN):
    """Convergence rate of the unflooded pipeline versus exponent gap.

    For each gap d, share pairs are built with a bit-exact binary32
    exponent gap of exactly d: the dominant share is a power of two
    (mantissa zero, mirroring the flood constant) and the counterpart has a
    uniform mantissa d octaves down, opposite-signed for d >= 2 the way a
    flooded client share is. No flooding, so the compensation term is off;
    the sweep isolates how seed quality decays as the gap opens. n defaults
    to 8 iterations, enough that the gap geometry, not the iteration
    budget, decides convergence.
    """
    if trials < 1:
        raise ConfigError("trials must be positive")
    codec = codec or FixedPointCodec()
    params = params or SeedParams()
    newton = NewtonConfig(iterations=n, strategy=strategy)
    rng = random.Random(seed)
    rows = []
    for gap in gaps:
        pairs = []
        xs = []
        for _ in range(trials):
            k = rng.randint(1, 5)
            c = 1.0 + rng.random()
            counterpart = c * 2.0 ** (k - gap)
            fs = 2.0 ** k
            fc = -counterpart if gap >= 2 else counterpart
            pairs.append((codec.encode(fc), codec.encode(fs)))
            xs.append(codec.decode((codec.encode(fc) + codec.encode(fs))
                                   % codec.modulus))
        results, _, _ = run_shared_rsqrt(pairs, codec, params, newton,
                                         dealer_seed=seed + gap,
                                         flooded=False)
        converged = 0
        err_sum = 0.0
        for x, y in zip(xs, results):
            rel = abs(y * math.sqrt(x) - 1.0)
            if rel <= tol:
                converged += 1
                err_sum += rel
        rows.append(SweepRow(
            gap=gap, trials=trials, converged=converged,
            rate=converged / trials,
            mean_rel_err=(err_sum / converged) if converged else float("nan"),
        ))
    return rows
