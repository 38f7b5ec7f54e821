"""Fixed-point additive secret sharing over Z_{2^l} with Beaver multiplication.

Values are reals scaled by 2^f and reduced mod 2^l, read back through a
two's-complement signed window. Each secret is split into two uniformly
masked summands, one per party. Multiplication consumes dealer-issued
Beaver triples: each party opens two masked differences (one round, two
ring elements on the wire) and combines locally, then truncates the doubled
scale away with a local probabilistic shift.
"""

import random
import threading
from dataclasses import dataclass

from .errors import ConfigError, ProtocolError, RangeError, UsageError

CLIENT = "client"
SERVER = "server"
PARTIES = (CLIENT, SERVER)


@dataclass(frozen=True)
class FixedPointCodec:
    """Scale-2^f fixed point inside Z_{2^l}, signed two's complement."""

    l: int = 64
    f: int = 16
    signed: bool = True

    def __post_init__(self):
        if not (isinstance(self.l, int) and isinstance(self.f, int)):
            raise ConfigError("codec parameters l and f must be integers")
        if not 2 <= self.f < self.l <= 64:
            raise ConfigError(
                f"codec requires 2 <= f < l <= 64, got l={self.l} f={self.f}")

    @property
    def modulus(self) -> int:
        return 1 << self.l

    @property
    def scale(self) -> int:
        return 1 << self.f

    @property
    def element_bytes(self) -> int:
        return (self.l + 7) // 8

    def encode(self, x: float) -> int:
        v = round(x * self.scale)
        half = 1 << (self.l - 1)
        if not -half <= v < half:
            raise RangeError(
                f"{x!r} outside the representable range at l={self.l} f={self.f}")
        return v % self.modulus

    def decode(self, v: int) -> float:
        v %= self.modulus
        if self.signed and v >= self.modulus // 2:
            v -= self.modulus
        return v / self.scale


def encode_fixed(x: float, codec: FixedPointCodec) -> int:
    return codec.encode(x)


@dataclass(frozen=True)
class RingShare:
    """One party's additive share, an unsigned ring integer."""

    party: str
    value: int

    def __post_init__(self):
        if self.party not in PARTIES:
            raise UsageError(f"unknown party {self.party!r}")


def make_shares(x: float, codec: FixedPointCodec, rng: random.Random):
    """Split x into (client, server) shares; each alone is uniform."""
    mask = rng.getrandbits(codec.l)
    value = codec.encode(x)
    return (RingShare(CLIENT, mask),
            RingShare(SERVER, (value - mask) % codec.modulus))


def reconstruct(sc: RingShare, ss: RingShare, codec: FixedPointCodec) -> float:
    if {sc.party, ss.party} != set(PARTIES):
        raise UsageError("reconstruct needs one share from each party")
    return codec.decode((sc.value + ss.value) % codec.modulus)


def reconstruct_raw(sc: RingShare, ss: RingShare, codec: FixedPointCodec) -> int:
    """Ring-integer sum of a share pair, without fixed-point decoding."""
    if {sc.party, ss.party} != set(PARTIES):
        raise UsageError("reconstruct needs one share from each party")
    return (sc.value + ss.value) % codec.modulus


def linear_combine(shares, coeffs, constant: int, codec: FixedPointCodec) -> RingShare:
    """Public-coefficient affine map, applied locally by one party.

    The public constant is added by the server only, so that applying the
    same map on both sides shifts the reconstructed value once.
    """
    if not shares:
        raise UsageError("linear_combine needs at least one share")
    if len(shares) != len(coeffs):
        raise UsageError("coefficient count must match share count")
    party = shares[0].party
    if any(s.party != party for s in shares):
        raise UsageError("linear_combine shares must belong to one party")
    acc = 0
    for share, coeff in zip(shares, coeffs):
        acc += coeff * share.value
    if party == SERVER:
        acc += constant
    return RingShare(party, acc % codec.modulus)


def truncate_local(share: RingShare, codec: FixedPointCodec,
                   shift: int | None = None) -> RingShare:
    """Local probabilistic truncation by 2^shift (default 2^f).

    Correct within one unit of the truncated scale, except with probability
    about |value| / 2^(l-1) of a large wrap error, where value is the ring
    magnitude being truncated. The client rounds (adds half before the
    shift); the server shifts the negated complement.
    """
    t = codec.f if shift is None else shift
    if t < 0:
        raise UsageError("shift must be non-negative")
    if t == 0:
        return share
    mod = codec.modulus
    v = share.value % mod
    if share.party == CLIENT:
        out = ((v + (1 << (t - 1))) >> t) % mod
    else:
        out = (mod - (((mod - v) % mod) >> t)) % mod
    return RingShare(share.party, out)


def _encode_elements(values, codec: FixedPointCodec) -> bytes:
    width = codec.element_bytes
    mod = codec.modulus
    return b"".join((v % mod).to_bytes(width, "little") for v in values)


def _decode_elements(payload: bytes, count: int, codec: FixedPointCodec):
    width = codec.element_bytes
    if len(payload) != count * width:
        raise ProtocolError(
            f"expected {count} elements ({count * width} bytes), got {len(payload)}")
    return [int.from_bytes(payload[k * width:(k + 1) * width], "little")
            for k in range(count)]


@dataclass
class BeaverTriple:
    """Both parties' shares of an (a, b, c = a*b mod 2^l) triple.

    c is the full ring product of the uniform factors; the fixed-point
    product identity appears after the post-multiplication truncation.
    """

    id: int
    a_client: int
    a_server: int
    b_client: int
    b_server: int
    c_client: int
    c_server: int
    used_client: bool = False
    used_server: bool = False

    def view(self, party: str):
        if party == CLIENT:
            return self.a_client, self.b_client, self.c_client
        if party == SERVER:
            return self.a_server, self.b_server, self.c_server
        raise UsageError(f"unknown party {party!r}")

    def shares_for(self, party: str):
        a, b, c = self.view(party)
        return RingShare(party, a), RingShare(party, b), RingShare(party, c)

    def mark_used(self, party: str) -> None:
        if party == CLIENT:
            if self.used_client:
                raise ProtocolError(f"triple {self.id} already used by client")
            self.used_client = True
        elif party == SERVER:
            if self.used_server:
                raise ProtocolError(f"triple {self.id} already used by server")
            self.used_server = True
        else:
            raise UsageError(f"unknown party {party!r}")


@dataclass(frozen=True)
class ZeroShare:
    """Additive sharing of zero: (r, -r) for uniform r.

    Adding one to a share pair leaves the secret untouched but makes the
    client half uniform, which the local truncation trick requires (it
    assumes the pair wraps the ring exactly once; structured same-sign
    pairs may not).
    """

    id: int
    client: int
    server: int

    def view(self, party: str) -> int:
        if party == CLIENT:
            return self.client
        if party == SERVER:
            return self.server
        raise UsageError(f"unknown party {party!r}")


@dataclass
class MatrixTriple:
    """Both parties' shares of matrices A (m x k), B (k x n), C = A @ B."""

    id: int
    m: int
    k: int
    n: int
    a_client: list
    a_server: list
    b_client: list
    b_server: list
    c_client: list
    c_server: list

    def view(self, party: str):
        if party == CLIENT:
            return self.a_client, self.b_client, self.c_client
        if party == SERVER:
            return self.a_server, self.b_server, self.c_server
        raise UsageError(f"unknown party {party!r}")


def _mat_mul_mod(a, b, m, k, n, mod):
    """Row-major integer matmul mod 2^l."""
    out = [0] * (m * n)
    for i in range(m):
        row = a[i * k:(i + 1) * k]
        base = i * n
        for j in range(n):
            acc = 0
            for t in range(k):
                acc += row[t] * b[t * n + j]
            out[base + j] = acc % mod
    return out


class DealerState:
    """Simulated trusted dealer issuing correlated randomness.

    Seeded and deterministic; never re-issues randomness. Dealer traffic is
    offline setup material and is not counted by the online channel stats.
    An optional budget caps the number of issue calls and models a finite
    preprocessing supply.
    """

    def __init__(self, codec: FixedPointCodec, seed: int = 0,
                 budget: int | None = None):
        self.codec = codec
        self._rng = random.Random(seed)
        self._budget = budget
        self._lock = threading.Lock()
        self.issued = 0
        self._sequence: list = []
        self._kinds: list = []

    def _charge(self) -> None:
        if self._budget is not None and self.issued >= self._budget:
            raise ProtocolError(
                f"dealer budget of {self._budget} issue calls exhausted")
        self.issued += 1

    def _draw(self) -> int:
        return self._rng.getrandbits(self.codec.l)

    def triple(self) -> BeaverTriple:
        with self._lock:
            return self._triple_locked()

    def _triple_locked(self) -> BeaverTriple:
        self._charge()
        mod = self.codec.modulus
        a, b = self._draw(), self._draw()
        c = (a * b) % mod
        a_c, b_c, c_c = self._draw(), self._draw(), self._draw()
        return BeaverTriple(
            id=self.issued - 1,
            a_client=a_c, a_server=(a - a_c) % mod,
            b_client=b_c, b_server=(b - b_c) % mod,
            c_client=c_c, c_server=(c - c_c) % mod,
        )

    def matrix_triple(self, m: int, k: int, n: int) -> MatrixTriple:
        with self._lock:
            return self._matrix_triple_locked(m, k, n)

    def zero_share(self) -> ZeroShare:
        with self._lock:
            return self._zero_locked()

    def _zero_locked(self) -> ZeroShare:
        self._charge()
        r = self._draw()
        return ZeroShare(id=self.issued - 1, client=r,
                         server=(-r) % self.codec.modulus)

    def _matrix_triple_locked(self, m, k, n) -> MatrixTriple:
        self._charge()
        mod = self.codec.modulus
        a = [self._draw() for _ in range(m * k)]
        b = [self._draw() for _ in range(k * n)]
        c = _mat_mul_mod(a, b, m, k, n, mod)
        a_c = [self._draw() for _ in range(m * k)]
        b_c = [self._draw() for _ in range(k * n)]
        c_c = [self._draw() for _ in range(m * n)]
        return MatrixTriple(
            id=self.issued - 1, m=m, k=k, n=n,
            a_client=a_c, a_server=[(x - y) % mod for x, y in zip(a, a_c)],
            b_client=b_c, b_server=[(x - y) % mod for x, y in zip(b, b_c)],
            c_client=c_c, c_server=[(x - y) % mod for x, y in zip(c, c_c)],
        )

    # Lockstep protocols running as two threads of one process pull from a
    # shared on-demand sequence: the first party to reach an index generates
    # the item, the second must request the same kind and shape.
    def _sequence_get(self, index: int, kind: tuple):
        with self._lock:
            if index < len(self._sequence):
                if self._kinds[index] != kind:
                    raise ProtocolError(
                        f"parties disagree on dealer item {index}: "
                        f"{self._kinds[index]} vs {kind}")
                return self._sequence[index]
            if index != len(self._sequence):
                raise ProtocolError("dealer sequence requested out of order")
            if kind[0] == "scalar":
                item = self._triple_locked()
            elif kind[0] == "zero":
                item = self._zero_locked()
            else:
                item = self._matrix_triple_locked(*kind[1:])
            self._sequence.append(item)
            self._kinds.append(kind)
            return item

    def pair_streams(self):
        return TripleStream(self, CLIENT), TripleStream(self, SERVER)


class TripleStream:
    """One party's cursor over the dealer's shared issue sequence."""

    def __init__(self, dealer: DealerState, party: str):
        if party not in PARTIES:
            raise UsageError(f"unknown party {party!r}")
        self.dealer = dealer
        self.party = party
        self._cursor = 0

    def take(self, count: int):
        """Next `count` scalar triples, as this party's (a, b, c) views."""
        views = []
        for _ in range(count):
            item = self.dealer._sequence_get(self._cursor, ("scalar",))
            self._cursor += 1
            views.append(item.view(self.party))
        return views

    def take_matrix(self, m: int, k: int, n: int):
        item = self.dealer._sequence_get(self._cursor, ("matrix", m, k, n))
        self._cursor += 1
        return item.view(self.party)

    def take_zeros(self, count: int):
        """Next `count` zero-share offsets for this party."""
        offsets = []
        for _ in range(count):
            item = self.dealer._sequence_get(self._cursor, ("zero",))
            self._cursor += 1
            offsets.append(item.view(self.party))
        return offsets


def beaver_mul_batch(party: str, x_values, y_values, triple_views,
                     channel, codec: FixedPointCodec):
    """Elementwise product of two batches of shares, one round total.

    Each party sends a single frame holding the masked openings d = x - a
    and e = y - b for every element (2 ring elements per element), then
    combines and truncates locally. Returns ring integers at scale 2^f.
    """
    count = len(x_values)
    if len(y_values) != count or len(triple_views) != count:
        raise UsageError("batch inputs must have equal lengths")
    mod = codec.modulus
    d_own = [0] * count
    e_own = [0] * count
    for i in range(count):
        a, b, _ = triple_views[i]
        d_own[i] = (x_values[i] - a) % mod
        e_own[i] = (y_values[i] - b) % mod
    channel.send_frame(_encode_elements(d_own + e_own, codec))
    peer = _decode_elements(channel.recv_frame(), 2 * count, codec)
    is_server = party == SERVER
    out = [0] * count
    half = 1 << (codec.f - 1)
    for i in range(count):
        a, b, c = triple_views[i]
        d = (d_own[i] + peer[i]) % mod
        e = (e_own[i] + peer[count + i]) % mod
        z = c + d * b + e * a
        if is_server:
            z += d * e
            z %= mod
            out[i] = (mod - (((mod - z) % mod) >> codec.f)) % mod
        else:
            out[i] = (((z % mod) + half) >> codec.f) % mod
    return out


def beaver_mul(x: RingShare, y: RingShare, triple: BeaverTriple,
               channel, codec: FixedPointCodec) -> RingShare:
    """Share of x*y in fixed-point semantics; 1 round, 2 elements sent."""
    if x.party != y.party:
        raise UsageError("beaver_mul operands must belong to one party")
    triple.mark_used(x.party)
    out = beaver_mul_batch(x.party, [x.value], [y.value],
                           [triple.view(x.party)], channel, codec)
    return RingShare(x.party, out[0])


def matmul_shared(party: str, a_values, b_values, matrix_view,
                  m: int, k: int, n: int, channel,
                  codec: FixedPointCodec):
    """Shared matrix product via one matrix Beaver triple, one round.

    a_values is this party's share of A (m x k, row-major flat), b_values of
    B (k x n). Each party opens A - R_a and B - R_b in a single frame of
    m*k + k*n ring elements; outputs are truncated to scale 2^f.
    """
    if len(a_values) != m * k or len(b_values) != k * n:
        raise UsageError("matrix share sizes disagree with the given shape")
    ra, rb, rc = matrix_view
    mod = codec.modulus
    d_own = [(x - r) % mod for x, r in zip(a_values, ra)]
    e_own = [(x - r) % mod for x, r in zip(b_values, rb)]
    channel.send_frame(_encode_elements(d_own + e_own, codec))
    peer = _decode_elements(channel.recv_frame(), m * k + k * n, codec)
    d = [(u + v) % mod for u, v in zip(d_own, peer[:m * k])]
    e = [(u + v) % mod for u, v in zip(e_own, peer[m * k:])]
    z = rc[:]
    db = _mat_mul_mod(d, rb, m, k, n, mod)
    ae = _mat_mul_mod(ra, e, m, k, n, mod)
    for i in range(m * n):
        z[i] = (z[i] + db[i] + ae[i]) % mod
    if party == SERVER:
        de = _mat_mul_mod(d, e, m, k, n, mod)
        for i in range(m * n):
            z[i] = (z[i] + de[i]) % mod
        return [(mod - (((mod - v) % mod) >> codec.f)) % mod for v in z]
    half = 1 << (codec.f - 1)
    return [((v + half) >> codec.f) % mod for v in z]
