"""Fixed-point codec, additive sharing, affine maps, truncation, and
Beaver multiplication, exercised at both supported ring widths."""

import math
import random

import pytest

from conftest import FixedBits, chi2_uniform_stat, mul_pairs, quantize
from rootshare.errors import ConfigError, ProtocolError, RangeError, UsageError
from rootshare.ring import (CLIENT, SERVER, BeaverTriple, DealerState,
                            FixedPointCodec, RingShare, beaver_mul,
                            beaver_mul_batch, encode_fixed, linear_combine,
                            make_shares, matmul_shared, reconstruct,
                            reconstruct_raw, truncate_local)
from rootshare.transport import open_inproc, run_pair


# ---------------------------------------------------------------- codec

def test_encode_worked_values():
    assert encode_fixed(7.25, FixedPointCodec(l=16, f=4)) == 116
    assert encode_fixed(0.0, FixedPointCodec()) == 0
    assert encode_fixed(-1.0, FixedPointCodec()) == 2 ** 64 - 65536


def test_decode_is_signed():
    codec = FixedPointCodec()
    assert codec.decode(codec.encode(-2.5)) == -2.5
    assert codec.decode(codec.modulus - 1) == -(2.0 ** -16)


def test_roundtrip_quantization_bound(codec):
    rng = random.Random(3)
    for _ in range(1000):
        x = rng.uniform(-1e6, 1e6)
        assert abs(codec.decode(codec.encode(x)) - x) <= 2.0 ** -(codec.f + 1)


def test_range_errors():
    codec = FixedPointCodec(l=32, f=12)
    top = 2.0 ** (codec.l - 1 - codec.f)
    codec.encode(top - 1.0)
    with pytest.raises(RangeError):
        codec.encode(top)
    with pytest.raises(RangeError):
        codec.encode(-top - 1.0)


def test_codec_parameter_validation():
    with pytest.raises(ConfigError):
        FixedPointCodec(l=65, f=16)
    with pytest.raises(ConfigError):
        FixedPointCodec(l=32, f=32)
    with pytest.raises(ConfigError):
        FixedPointCodec(l=32, f=1)


# ------------------------------------------------------------- sharing

def test_make_shares_sum_to_encoding(codec):
    rng = random.Random(5)
    for _ in range(200):
        x = rng.uniform(-500, 500)
        c, s = make_shares(x, codec, rng)
        assert (c.value + s.value) % codec.modulus == codec.encode(x)


def test_make_shares_with_scripted_mask(codec):
    c, s = make_shares(0.0, codec, FixedBits(5))
    assert (c.value, s.value) == (5, codec.modulus - 5)
    assert reconstruct(c, s, codec) == 0.0


def test_reconstruct_roundtrip_property(codec):
    rng = random.Random(6)
    for _ in range(1000):
        x = rng.uniform(-1000, 1000)
        c, s = make_shares(x, codec, rng)
        assert abs(reconstruct(c, s, codec) - x) <= 2.0 ** -codec.f


def test_reconstruct_flooded_worked_pair(codec):
    c = RingShare(CLIENT, codec.encode(-8191.998))
    s = RingShare(SERVER, codec.encode(8195.098))
    assert abs(reconstruct(c, s, codec) - 3.1) <= 2.0 ** -codec.f


def test_reconstruct_party_mismatch(codec):
    a = RingShare(CLIENT, 1)
    b = RingShare(CLIENT, 2)
    with pytest.raises(UsageError):
        reconstruct(a, b, codec)


def test_share_party_names_validated():
    with pytest.raises(UsageError):
        RingShare("observer", 0)


def test_single_share_bytes_look_uniform(codec):
    # marginal of the server share of a fixed value over fresh maskings;
    # each byte lane is compared against uniform at the p=0.01 cutoff
    rng = random.Random(123)
    x = 3.1
    counts = [[0] * 256 for _ in range(8)]
    for _ in range(100_000):
        _, s = make_shares(x, codec, rng)
        for lane, byte in enumerate(s.value.to_bytes(8, "little")):
            counts[lane][byte] += 1
    crit = 310.457  # chi-square upper 1% point at 255 degrees of freedom
    for lane in range(8):
        assert chi2_uniform_stat(counts[lane]) < crit


# -------------------------------------------------------- linear_combine

def test_linear_combine_identity(codec):
    share = RingShare(CLIENT, codec.encode(1.5))
    out = linear_combine([share], [1], 0, codec)
    assert out.value == share.value


def test_linear_combine_adds_reconstructions(codec):
    rng = random.Random(7)
    xc, xs = make_shares(2.25, codec, rng)
    yc, ys = make_shares(-0.75, codec, rng)
    out_c = linear_combine([xc, yc], [1, 1], 0, codec)
    out_s = linear_combine([xs, ys], [1, 1], 0, codec)
    assert reconstruct(out_c, out_s, codec) == pytest.approx(1.5, abs=2 ** -15)


def test_linear_combine_constant_only(codec):
    rng = random.Random(8)
    xc, xs = make_shares(4.0, codec, rng)
    k = codec.encode(9.5)
    out_c = linear_combine([xc], [0], k, codec)
    out_s = linear_combine([xs], [0], k, codec)
    # constant lands on the server side only, so it enters once
    assert reconstruct(out_c, out_s, codec) == 9.5


def test_affine_homomorphism_is_exact_in_ring(codec):
    rng = random.Random(9)
    for _ in range(200):
        n = rng.randint(1, 4)
        pairs = [make_shares(rng.uniform(-30, 30), codec, rng)
                 for _ in range(n)]
        coeffs = [rng.randint(-5, 5) for _ in range(n)]
        k = rng.randrange(codec.modulus)
        out_c = linear_combine([p[0] for p in pairs], coeffs, k, codec)
        out_s = linear_combine([p[1] for p in pairs], coeffs, k, codec)
        expect = k
        for (c, s), coeff in zip(pairs, coeffs):
            expect += coeff * reconstruct_raw(c, s, codec)
        assert reconstruct_raw(out_c, out_s, codec) == expect % codec.modulus


def test_linear_combine_usage_errors(codec):
    with pytest.raises(UsageError):
        linear_combine([], [], 0, codec)
    a = RingShare(CLIENT, 1)
    b = RingShare(SERVER, 2)
    with pytest.raises(UsageError):
        linear_combine([a, b], [1, 1], 0, codec)
    with pytest.raises(UsageError):
        linear_combine([a], [1, 2], 0, codec)


# ------------------------------------------------------------ truncation

def _trunc_pair(raw, mask, codec):
    mod = codec.modulus
    tc = truncate_local(RingShare(CLIENT, mask % mod), codec)
    ts = truncate_local(RingShare(SERVER, (raw - mask) % mod), codec)
    v = (tc.value + ts.value) % mod
    return v - mod if v >= mod // 2 else v


def test_truncate_recovers_product_scale(codec):
    rng = random.Random(11)
    raw = codec.encode(1.0) << codec.f     # 1.0 at the doubled scale
    for _ in range(200):
        got = _trunc_pair(raw, rng.getrandbits(codec.l), codec)
        assert abs(got - codec.encode(1.0)) <= 1


def test_truncate_zero(codec):
    rng = random.Random(12)
    for _ in range(100):
        assert abs(_trunc_pair(0, rng.getrandbits(codec.l), codec)) <= 1


def test_truncate_shift_zero_is_identity(codec):
    share = RingShare(CLIENT, 12345)
    assert truncate_local(share, codec, 0).value == 12345
    with pytest.raises(UsageError):
        truncate_local(share, codec, -1)


def test_truncate_wrap_rate_within_documented_bound():
    # failure probability scales as value / 2^(l-1); measurable at l=32
    codec = FixedPointCodec(l=32, f=12)
    raw = 1 << 24
    rng = random.Random(0)
    fails = 0
    trials = 100_000
    for _ in range(trials):
        got = _trunc_pair(raw, rng.getrandbits(32), codec)
        if abs(got - (raw >> 12)) > 2:
            fails += 1
    assert fails / trials <= raw / 2.0 ** 31


def test_truncate_wrap_rate_negligible_at_l64(codec):
    # at l=64 the same bound is ~2^-43 for values up to 2^20: none expected
    rng = random.Random(1)
    raw = 1 << 20
    fails = 0
    trials = 1_000_000
    for _ in range(trials):
        got = _trunc_pair(raw, rng.getrandbits(64), codec)
        if abs(got - (raw >> 16)) > 2:
            fails += 1
    assert fails / trials < 1e-4


# --------------------------------------------------------- multiplication

def test_beaver_scalar_products(codec):
    assert mul_pairs(codec, [2.0], [3.0], seed=1)[0] == pytest.approx(
        6.0, abs=2 * 2.0 ** -codec.f)
    assert mul_pairs(codec, [817.31], [0.0], seed=2)[0] == pytest.approx(
        0.0, abs=2.0 ** -codec.f)


def test_beaver_scalar_comm_cost(codec):
    rng = random.Random(3)
    dealer = DealerState(codec, seed=4)
    triple = dealer.triple()
    xc, xs = make_shares(2.0, codec, rng)
    yc, ys = make_shares(3.0, codec, rng)

    def client_fn(ep):
        out = beaver_mul(xc, yc, triple, ep, codec)
        return out, ep.stats()

    def server_fn(ep):
        out = beaver_mul(xs, ys, triple, ep, codec)
        return out, ep.stats()

    (rc, st_c), (rs, st_s) = run_pair(client_fn, server_fn)
    for st in (st_c, st_s):
        assert st.rounds == 1
        assert st.frames == 1
        assert st.payload_bytes == 2 * codec.element_bytes
    assert reconstruct(rc, rs, codec) == pytest.approx(6.0, abs=2 ** -14)


def test_beaver_soundness_l64(codec):
    # 10^4 pairs across [-2^8, 2^8]; operands are grid values so the only
    # error left is the truncation's, bounded by 4 units of 2^-f
    rng = random.Random(0)
    tol = 4 * 2.0 ** -codec.f
    for batch in range(10):
        xs = [quantize(rng.uniform(-256, 256), codec) for _ in range(1000)]
        ys = [quantize(rng.uniform(-256, 256), codec) for _ in range(1000)]
        got = mul_pairs(codec, xs, ys, seed=1000 + batch)
        for g, x, y in zip(got, xs, ys):
            assert abs(g - x * y) <= tol


def test_beaver_soundness_l32(codec32):
    # the local truncation wraps with probability ~ raw/2^(l-1); at l=32
    # a product of magnitude m has raw m*2^24, so the operand range must
    # shrink with the ring width to keep the expected wrap count near zero
    rng = random.Random(0)
    tol = 4 * 2.0 ** -codec32.f
    for batch in range(5):
        xs = [quantize(rng.uniform(-0.5, 0.5), codec32) for _ in range(100)]
        ys = [quantize(rng.uniform(-0.5, 0.5), codec32) for _ in range(100)]
        got = mul_pairs(codec32, xs, ys, seed=2000 + batch)
        for g, x, y in zip(got, xs, ys):
            assert abs(g - x * y) <= tol


def test_beaver_rejects_mismatched_batches(codec):
    a, b = open_inproc()
    with pytest.raises(UsageError):
        beaver_mul_batch(CLIENT, [1, 2], [3], [], a, codec)


def test_triple_reuse_is_refused(codec):
    rng = random.Random(5)
    dealer = DealerState(codec, seed=6)
    triple = dealer.triple()
    xc, xs = make_shares(1.0, codec, rng)

    def client_fn(ep):
        beaver_mul(xc, xc, triple, ep, codec)
        return beaver_mul(xc, xc, triple, ep, codec)

    def server_fn(ep):
        beaver_mul(xs, xs, triple, ep, codec)
        return beaver_mul(xs, xs, triple, ep, codec)

    with pytest.raises(ProtocolError, match="already used"):
        run_pair(client_fn, server_fn, timeout=5.0)


def test_triple_product_identity(codec):
    dealer = DealerState(codec, seed=7)
    t = dealer.triple()
    mod = codec.modulus
    a = (t.a_client + t.a_server) % mod
    b = (t.b_client + t.b_server) % mod
    c = (t.c_client + t.c_server) % mod
    assert c == (a * b) % mod


# ----------------------------------------------------------------- dealer

def test_dealer_budget_exhaustion(codec):
    dealer = DealerState(codec, seed=0, budget=2)
    dealer.triple()
    dealer.triple()
    with pytest.raises(ProtocolError, match="budget"):
        dealer.triple()


def test_dealer_is_deterministic(codec):
    t1 = DealerState(codec, seed=42).triple()
    t2 = DealerState(codec, seed=42).triple()
    assert (t1.a_client, t1.b_server, t1.c_client) == (
        t2.a_client, t2.b_server, t2.c_client)


def test_dealer_never_reissues(codec):
    dealer = DealerState(codec, seed=1)
    seen = {(t.a_client, t.b_client) for t in [dealer.triple()
                                               for _ in range(50)]}
    assert len(seen) == 50


def test_stream_kind_mismatch_is_protocol_error(codec):
    dealer = DealerState(codec, seed=2)
    sc, ss = dealer.pair_streams()
    sc.take(1)
    with pytest.raises(ProtocolError, match="disagree"):
        ss.take_matrix(2, 2, 2)


def test_stream_zero_shares_cancel(codec):
    dealer = DealerState(codec, seed=3)
    sc, ss = dealer.pair_streams()
    zc = sc.take_zeros(5)
    zs = ss.take_zeros(5)
    for c, s in zip(zc, zs):
        assert (c + s) % codec.modulus == 0
        assert c != 0      # overwhelmingly likely for a 64-bit draw


def test_zero_share_rerandomizes_without_changing_value(codec):
    rng = random.Random(9)
    dealer = DealerState(codec, seed=4)
    sc, ss = dealer.pair_streams()
    c, s = make_shares(41.25, codec, rng)
    c2 = (c.value + sc.take_zeros(1)[0]) % codec.modulus
    s2 = (s.value + ss.take_zeros(1)[0]) % codec.modulus
    assert c2 != c.value
    assert reconstruct(RingShare(CLIENT, c2), RingShare(SERVER, s2),
                       codec) == reconstruct(c, s, codec)


# ----------------------------------------------------------------- matmul

def test_matmul_shared_matches_plain(codec):
    rng = random.Random(10)
    m, k, n = 3, 4, 2
    a = [quantize(rng.uniform(-4, 4), codec) for _ in range(m * k)]
    b = [quantize(rng.uniform(-4, 4), codec) for _ in range(k * n)]
    expect = [sum(a[i * k + t] * b[t * n + j] for t in range(k))
              for i in range(m) for j in range(n)]

    dealer = DealerState(codec, seed=11)
    sc, ss = dealer.pair_streams()
    a_sh = [make_shares(v, codec, rng) for v in a]
    b_sh = [make_shares(v, codec, rng) for v in b]

    def party(name, stream, idx):
        def fn(ep):
            av = [p[idx].value for p in a_sh]
            bv = [p[idx].value for p in b_sh]
            out = matmul_shared(name, av, bv, stream.take_matrix(m, k, n),
                                m, k, n, ep, codec)
            return out, ep.stats()

        return fn

    (oc, st_c), (os_, st_s) = run_pair(party(CLIENT, sc, 0),
                                       party(SERVER, ss, 1))
    for got_c, got_s, want in zip(oc, os_, expect):
        got = reconstruct(RingShare(CLIENT, got_c), RingShare(SERVER, got_s),
                          codec)
        assert got == pytest.approx(want, abs=(k + 2) * 2.0 ** -codec.f)
    for st in (st_c, st_s):
        assert st.rounds == 1
        assert st.payload_bytes == (m * k + k * n) * codec.element_bytes


def test_matmul_shape_validation(codec):
    a, _ = open_inproc()
    dealer = DealerState(codec, seed=12)
    sc, _ = dealer.pair_streams()
    with pytest.raises(UsageError):
        matmul_shared(CLIENT, [0] * 5, [0] * 4, sc.take_matrix(2, 2, 2),
                      2, 2, 2, a, codec)
