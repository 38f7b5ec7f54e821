"""Baseline cost models, communication reports, and a toy encoder.

Baselines (table lookup, Taylor seeding, exponential seeding) are analytic
models: published formulas priced in bytes, rounds and multiplications,
never reimplementations. The rootshare rows are counted live off endpoint
counters. Modeled rows price payload only; counted rows include the 4-byte
frame headers, which only handicaps the counted side.
"""

import csv
import math
import random
from dataclasses import dataclass

from .errors import ConfigError, RangeError, UsageError
from .config import DEFAULT_CONFIG, ProtocolConfig
from .flood import ActivationSampler, adversarial_split, draw_flood_mask, \
    flood_mask, flood_share, shares_from_floats
from .nonlinear import GELU_PARAMS, layernorm_plain, layernorm_shared, \
    run_smu_shared, smu_plain, smu_shared_batch, softmax_star_plain, \
    softmax_star_shared, scalar_mul_values, add_public_values
from .ring import CLIENT, SERVER, DealerState, matmul_shared
from .rsqrt import NewtonConfig, rsqrt_shared_batch, run_shared_rsqrt
from .transport import run_pair


@dataclass(frozen=True)
class LutCostModel:
    """Table-lookup cost: sigma input bits, M entries, alpha output bits.

    Online cost per call is M * alpha + sigma bits; offline setup is
    2^sigma - log2(M) bits per call.
    """

    sigma: int = 16
    entries: int = 1 << 16
    alpha_bits: int = 32

    def __post_init__(self):
        if self.sigma < 1 or self.alpha_bits < 1 or self.entries < 1:
            raise ConfigError("all lookup-table parameters must be positive")
        if self.entries > (1 << self.sigma):
            raise ConfigError(
                f"{self.entries} entries do not fit in {self.sigma} input bits")


def lut_cost(model: LutCostModel, calls: int):
    """(online_bits, offline_bits) for a number of table lookups."""
    if calls < 0:
        raise RangeError("call count must be non-negative")
    if calls == 0:
        return (0, 0)
    online = calls * (model.entries * model.alpha_bits + model.sigma)
    offline = calls * ((1 << model.sigma) - math.log2(model.entries))
    return (online, offline)


# Series of x^(-1/2) about 1: coefficient k is (-1)^k * C(2k, k) / 4^k.
TAYLOR_COEFFS = (1.0, -0.5, 0.375, -0.3125, 0.2734375, -0.24609375,
                 0.2255859375, -0.20947265625)
TAYLOR_LOW_ORDER = 2
TAYLOR_HIGH_ORDER = 7


def taylor_seed(x: float, order: int) -> float:
    """Truncated series value; the cost model charges `order` muls."""
    if not 0 <= order < len(TAYLOR_COEFFS):
        raise ConfigError(f"order={order} outside 0..{len(TAYLOR_COEFFS) - 1}")
    if not x > 0:
        raise RangeError(f"taylor_seed needs x > 0, got {x!r}")
    t = x - 1.0
    acc = 0.0
    for c in reversed(TAYLOR_COEFFS[:order + 1]):
        acc = acc * t + c
    return acc


def taylor_cost(order: int) -> int:
    return order


def crypten_seed(x: float) -> float:
    """Exponential-decay seed 2.2 * exp(-x/2 + 1/5) + 1/5."""
    if not x > 0:
        raise RangeError(f"crypten_seed needs x > 0, got {x!r}")
    return 2.2 * math.exp(-0.5 * x + 0.2) + 0.2


def crypten_seed_cost(exp_squarings: int = 8, newton_iters: int = 10) -> int:
    """Multiplication count: limit-form exponential (repeated squaring)
    plus the default Newton budget at three muls per iteration."""
    return exp_squarings + 3 * newton_iters


def count_rsqrt_element(cfg: ProtocolConfig = DEFAULT_CONFIG,
                        x: float = 3.1, mask_offset: float = 3.098):
    """Counted per-party online stats for one flooded shared rsqrt element."""
    codec = cfg.codec
    mask = flood_mask(mask_offset, cfg.flood.F)
    share_c, share_s = flood_share(x, mask, codec)
    _, stats_c, stats_s = run_shared_rsqrt(
        [(share_c.value, share_s.value)], codec, cfg.seed, cfg.newton)
    return stats_c, stats_s


def count_rsqrt_element_bytes(cfg: ProtocolConfig = DEFAULT_CONFIG) -> int:
    """Per-party online bytes (headers included) for one rsqrt element."""
    stats_c, stats_s = count_rsqrt_element(cfg)
    return max(stats_c.bytes_sent, stats_s.bytes_sent)


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    method: str
    kind: str          # counted | modeled
    unit: str          # element | row | run
    online_bytes: float
    rounds: float | None
    muls: float | None


REPORT_SCENARIOS = ("activation", "softmax", "layernorm", "end2end")
REPORT_COLUMNS = ("scenario", "method", "kind", "unit", "online_bytes",
                  "rounds", "muls")


def _beaver_bytes(muls: float, codec) -> float:
    # one masked opening of two ring elements per party per multiplication
    return muls * 2 * codec.element_bytes


def comm_report(scenario: str, cfg: ProtocolConfig = DEFAULT_CONFIG,
                lut: LutCostModel = LutCostModel(), row_len: int = 8,
                seed: int = 0):
    """Rows of (method, counted-or-modeled, bytes, rounds, muls).

    rootshare rows come off live counters; baseline rows price the
    non-linear work with their published formulas. Lookup-table parameters
    never enter a counted row, so counted bytes are invariant in them.
    """
    codec = cfg.codec
    n = cfg.newton.iterations
    rows = []
    if scenario == "activation":
        inputs = [0.4 + 0.35 * i for i in range(row_len)]
        _, st_c, st_s = run_smu_shared(inputs, GELU_PARAMS, cfg, seed=seed)
        counted = max(st_c.bytes_sent, st_s.bytes_sent) / row_len
        rounds = max(st_c.rounds, st_s.rounds)
        rows.append(ReportRow(scenario, "rootshare", "counted", "element",
                              counted, rounds, 3 + 3 * n))
        rows.append(ReportRow(scenario, "lut", "modeled", "element",
                              lut_cost(lut, 1)[0] / 8, 1, 0))
        t_muls = TAYLOR_HIGH_ORDER + 3 * n
        rows.append(ReportRow(scenario, "taylor", "modeled", "element",
                              _beaver_bytes(t_muls, codec), t_muls, t_muls))
        c_muls = crypten_seed_cost()
        rows.append(ReportRow(scenario, "crypten", "modeled", "element",
                              _beaver_bytes(c_muls, codec), c_muls, c_muls))
        return rows
    if scenario == "softmax":
        from .nonlinear import run_softmax_star_shared
        rng = random.Random(seed)
        row = [rng.gauss(1.5, 0.8) for _ in range(row_len)]
        _, st_c, st_s = run_softmax_star_shared(row, cfg, seed=seed)
        counted = max(st_c.bytes_sent, st_s.bytes_sent)
        rounds = max(st_c.rounds, st_s.rounds)
        n_soft = 16
        muls = row_len * (3 + 3 * n_soft) + (2 + 3 * n_soft) + row_len
        rows.append(ReportRow(scenario, "rootshare", "counted", "row",
                              counted, rounds, muls))
        rows.append(ReportRow(scenario, "lut", "modeled", "row",
                              lut_cost(lut, row_len + 1)[0] / 8,
                              2, 0))
        c_muls = 8 * row_len + 3 * 10
        rows.append(ReportRow(scenario, "crypten", "modeled", "row",
                              _beaver_bytes(c_muls, codec), c_muls, c_muls))
        return rows
    if scenario == "layernorm":
        from .nonlinear import run_layernorm_shared
        rng = random.Random(seed)
        row = [rng.gauss(0.0, 1.0) for _ in range(row_len)]
        ones = [1.0] * row_len
        zeros = [0.0] * row_len
        _, st_c, st_s = run_layernorm_shared(row, ones, zeros, cfg, seed=seed)
        counted = max(st_c.bytes_sent, st_s.bytes_sent)
        rounds = max(st_c.rounds, st_s.rounds)
        n_ln = 8
        muls = 2 * row_len + (2 + 3 * n_ln)
        rows.append(ReportRow(scenario, "rootshare", "counted", "row",
                              counted, rounds, muls))
        rows.append(ReportRow(scenario, "lut", "modeled", "row",
                              lut_cost(lut, 1)[0] / 8, 1, 0))
        t_muls = TAYLOR_HIGH_ORDER + 3 * n
        rows.append(ReportRow(scenario, "taylor", "modeled", "row",
                              _beaver_bytes(t_muls, codec), t_muls, t_muls))
        c_muls = crypten_seed_cost()
        rows.append(ReportRow(scenario, "crypten", "modeled", "row",
                              _beaver_bytes(c_muls, codec), c_muls, c_muls))
        return rows
    if scenario == "end2end":
        enc_cfg = ToyEncoderConfig()
        rng = random.Random(seed)
        x = [[0.8 + 0.4 * rng.random() for _ in range(enc_cfg.model_dim)]
             for _ in range(enc_cfg.seq_len)]
        _, info = toy_encoder_infer(enc_cfg, x, mode="shared", protocol=cfg)
        for bucket in ("nonlinear", "matmul", "total"):
            rows.append(ReportRow(scenario, f"rootshare-{bucket}", "counted",
                                  "run", info["bytes"][bucket],
                                  info["rounds"] if bucket == "total" else None,
                                  None))
        calls = info["rsqrt_elements"]
        rows.append(ReportRow(scenario, "lut", "modeled", "run",
                              lut_cost(lut, calls)[0] / 8, None, None))
        c_muls = calls * crypten_seed_cost()
        rows.append(ReportRow(scenario, "crypten", "modeled", "run",
                              _beaver_bytes(c_muls, codec), None, c_muls))
        return rows
    raise ConfigError(f"unknown scenario {scenario!r}; "
                      f"expected one of {REPORT_SCENARIOS}")


def write_report_csv(rows, path: str):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in rows:
            writer.writerow([
                r.scenario, r.method, r.kind, r.unit,
                f"{r.online_bytes:.1f}",
                "" if r.rounds is None else r.rounds,
                "" if r.muls is None else r.muls,
            ])


@dataclass(frozen=True)
class ToyEncoderConfig:
    seq_len: int = 8
    model_dim: int = 16
    ffn_dim: int = 32
    heads: int = 1
    seed: int = 0
    weight_file: str | None = None

    def __post_init__(self):
        for name in ("seq_len", "model_dim", "ffn_dim", "heads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.model_dim % self.heads:
            raise ConfigError(
                f"heads={self.heads} must divide model_dim={self.model_dim}")


# Per-site seed configuration for the encoder's inverse-sqrt call sites.
# Expected-magnitude exponents follow the activation scales the default
# weight generator is designed to produce; values frozen from a measured
# plain-mode run of the default fixture.
@dataclass(frozen=True)
class EncoderSites:
    softmax_num_E_m: int = 131
    softmax_den_E_m: int = 132
    ffn_E_m: int = 129
    ln1_E_m: int = 121
    ln2_E_m: int = 127
    iterations: int = 4


def _weight_shapes(cfg: ToyEncoderConfig):
    d, f = cfg.model_dim, cfg.ffn_dim
    return {
        "wq": (d, d), "wk": (d, d), "wv": (d, d), "wo": (d, d),
        "w1": (d, f), "b1": (f, 1), "w2": (f, d), "b2": (d, 1),
        "ln1_gamma": (d, 1), "ln1_beta": (d, 1),
        "ln2_gamma": (d, 1), "ln2_beta": (d, 1),
    }


def generate_weights(cfg: ToyEncoderConfig):
    """Seeded fixture weights scaled so every non-linear call site sees
    activations inside its expected-magnitude band at desk scale."""
    rng = random.Random(cfg.seed)
    scale = 16.0 / cfg.model_dim
    shapes = _weight_shapes(cfg)
    bands = {"wq": (0.03, 0.08), "wk": (0.03, 0.08), "wv": (0.05, 0.10),
             "wo": (0.05, 0.10), "w1": (0.015, 0.035), "w2": (0.02, 0.05)}
    weights = {}
    for name, (m, n) in shapes.items():
        count = m * n
        if name in bands:
            lo, hi = bands[name]
            weights[name] = [rng.uniform(lo, hi) * scale for _ in range(count)]
        elif name == "b1":
            weights[name] = [1.9 + rng.uniform(-0.1, 0.1) for _ in range(count)]
        elif name == "b2":
            weights[name] = [rng.uniform(-0.05, 0.05) for _ in range(count)]
        elif name.endswith("gamma"):
            weights[name] = [1.0] * count
        else:
            weights[name] = [0.0] * count
    return weights


def save_weights_csv(path: str, weights: dict, cfg: ToyEncoderConfig):
    shapes = _weight_shapes(cfg)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("name", "i", "j", "value"))
        for name, (m, n) in shapes.items():
            flat = weights[name]
            for i in range(m):
                for j in range(n):
                    writer.writerow((name, i, j, repr(flat[i * n + j])))


def load_weights_csv(path: str, cfg: ToyEncoderConfig):
    shapes = _weight_shapes(cfg)
    weights = {name: [None] * (m * n) for name, (m, n) in shapes.items()}
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["name", "i", "j", "value"]:
            raise ConfigError(f"{path}: expected header name,i,j,value")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ConfigError(f"{path}:{lineno}: expected 4 columns")
            name, i_s, j_s, v_s = row
            if name not in shapes:
                raise ConfigError(f"{path}:{lineno}: unknown weight {name!r}")
            m, n = shapes[name]
            try:
                i, j, v = int(i_s), int(j_s), float(v_s)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad indices or value")
            if not (0 <= i < m and 0 <= j < n):
                raise ConfigError(f"{path}:{lineno}: index out of range")
            weights[name][i * n + j] = v
    for name, flat in weights.items():
        if any(v is None for v in flat):
            raise ConfigError(f"{path}: incomplete weight matrix {name!r}")
    return weights


def _mat_mul(a, b, m, k, n):
    out = [0.0] * (m * n)
    for i in range(m):
        base = i * k
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += a[base + t] * b[t * n + j]
            out[i * n + j] = acc
    return out


def _transpose(a, m, n):
    return [a[i * n + j] for j in range(n) for i in range(m)]


def _columns(a, m, n, j0, j1):
    return [a[i * n + j] for i in range(m) for j in range(j0, j1)]


def _encoder_plain(cfg: ToyEncoderConfig, x_rows, weights):
    s, d, f = cfg.seq_len, cfg.model_dim, cfg.ffn_dim
    dh = d // cfg.heads
    x = [v for row in x_rows for v in row]
    q = _mat_mul(x, weights["wq"], s, d, d)
    k = _mat_mul(x, weights["wk"], s, d, d)
    v = _mat_mul(x, weights["wv"], s, d, d)
    ctx = [0.0] * (s * d)
    for h in range(cfg.heads):
        j0, j1 = h * dh, (h + 1) * dh
        qh = _columns(q, s, d, j0, j1)
        kh = _columns(k, s, d, j0, j1)
        vh = _columns(v, s, d, j0, j1)
        scores = _mat_mul(qh, _transpose(kh, s, dh), s, dh, s)
        inv = 1.0 / math.sqrt(dh)
        weights_rows = []
        for i in range(s):
            row = [scores[i * s + j] * inv for j in range(s)]
            weights_rows.extend(softmax_star_plain(row))
        ctx_h = _mat_mul(weights_rows, vh, s, s, dh)
        for i in range(s):
            for j in range(dh):
                ctx[i * d + j0 + j] = ctx_h[i * dh + j]
    attn = _mat_mul(ctx, weights["wo"], s, d, d)
    h0 = [a + b for a, b in zip(x, attn)]
    h1 = []
    for i in range(s):
        h1.extend(layernorm_plain(h0[i * d:(i + 1) * d],
                                  weights["ln1_gamma"], weights["ln1_beta"]))
    pre = _mat_mul(h1, weights["w1"], s, d, f)
    pre = [pre[i * f + j] + weights["b1"][j]
           for i in range(s) for j in range(f)]
    act = [smu_plain(v, GELU_PARAMS) for v in pre]
    f2 = _mat_mul(act, weights["w2"], s, f, d)
    f2 = [f2[i * d + j] + weights["b2"][j] for i in range(s) for j in range(d)]
    h2 = [a + b for a, b in zip(h1, f2)]
    out = []
    for i in range(s):
        out.append(layernorm_plain(h2[i * d:(i + 1) * d],
                                   weights["ln2_gamma"], weights["ln2_beta"]))
    return out


def _encoder_shared(cfg: ToyEncoderConfig, x_rows, weights,
                    protocol: ProtocolConfig, sites: EncoderSites,
                    dealer_budget, transport: str):
    s, d, f = cfg.seq_len, cfg.model_dim, cfg.ffn_dim
    dh = d // cfg.heads
    codec = protocol.codec
    rng = random.Random(cfg.seed + 101)

    def split(flat):
        c, sv = [], []
        for value in flat:
            mask = rng.randrange(codec.modulus)
            c.append(mask)
            sv.append((codec.encode(value) - mask) % codec.modulus)
        return c, sv

    x = [v for row in x_rows for v in row]
    if len(x_rows) != s or any(len(row) != d for row in x_rows):
        raise UsageError(f"input must be {s} rows of {d} values")
    halves = {"x": split(x)}
    for name in ("wq", "wk", "wv", "wo", "w1", "w2"):
        halves[name] = split(weights[name])

    dealer = DealerState(codec, seed=cfg.seed + 202, budget=dealer_budget)
    stream_c, stream_s = dealer.pair_streams()
    results = {}
    n_iter = sites.iterations
    smu_cfg = protocol.with_site(E_m=sites.ffn_E_m, iterations=n_iter)

    def party_fn(party, stream):
        def fn(ep):
            flood_rng = random.Random(cfg.seed + 303) if party == SERVER else None
            idx = 0 if party == CLIENT else 1
            w = {name: halves[name][idx] for name in halves}
            buckets = {"matmul": 0, "nonlinear": 0}
            mod = codec.modulus

            def counted(bucket, fn_call):
                before = ep.stats().bytes_sent
                out = fn_call()
                buckets[bucket] += ep.stats().bytes_sent - before
                return out

            def mm(a, b, m, kk, nn):
                view = stream.take_matrix(m, kk, nn)
                return counted("matmul", lambda: matmul_shared(
                    party, a, b, view, m, kk, nn, ep, codec))

            q = mm(w["x"], w["wq"], s, d, d)
            k = mm(w["x"], w["wk"], s, d, d)
            v = mm(w["x"], w["wv"], s, d, d)
            ctx = [0] * (s * d)
            for h in range(cfg.heads):
                j0, j1 = h * dh, (h + 1) * dh
                qh = _columns(q, s, d, j0, j1)
                kh = _columns(k, s, d, j0, j1)
                vh = _columns(v, s, d, j0, j1)
                scores = mm(qh, _transpose(kh, s, dh), s, dh, s)
                scores = scalar_mul_values(party, scores,
                                           1.0 / math.sqrt(dh), codec)
                att = []
                for i in range(s):
                    row = scores[i * s:(i + 1) * s]
                    att.extend(counted("nonlinear", lambda r=row: softmax_star_shared(
                        party, r, ep, protocol, stream, flood_rng,
                        sites.softmax_num_E_m, sites.softmax_den_E_m, n_iter)))
                ctx_h = mm(att, vh, s, s, dh)
                for i in range(s):
                    for j in range(dh):
                        ctx[i * d + j0 + j] = ctx_h[i * dh + j]
            attn = mm(ctx, w["wo"], s, d, d)
            h0 = [(a + b) % mod for a, b in zip(w["x"], attn)]
            h1 = []
            for i in range(s):
                row = h0[i * d:(i + 1) * d]
                h1.extend(counted("nonlinear", lambda r=row: layernorm_shared(
                    party, r, weights["ln1_gamma"], weights["ln1_beta"], ep,
                    protocol, stream, flood_rng, sites.ln1_E_m, n_iter)))
            pre = mm(h1, w["w1"], s, d, f)
            b1 = weights["b1"] * s
            pre = add_public_values(party, pre, b1, codec)
            act = counted("nonlinear", lambda: smu_shared_batch(
                party, pre, GELU_PARAMS, ep, smu_cfg, stream, flood_rng))
            f2 = mm(act, w["w2"], s, f, d)
            b2 = weights["b2"] * s
            f2 = add_public_values(party, f2, b2, codec)
            h2 = [(a + b) % mod for a, b in zip(h1, f2)]
            out = []
            for i in range(s):
                row = h2[i * d:(i + 1) * d]
                out.extend(counted("nonlinear", lambda r=row: layernorm_shared(
                    party, r, weights["ln2_gamma"], weights["ln2_beta"], ep,
                    protocol, stream, flood_rng, sites.ln2_E_m, n_iter)))
            results[party] = {"buckets": buckets, "stats": ep.stats()}
            return out

        return fn

    out_c, out_s = run_pair(party_fn(CLIENT, stream_c),
                            party_fn(SERVER, stream_s), transport=transport)
    mod = codec.modulus
    flat = [codec.decode((a + b) % mod) for a, b in zip(out_c, out_s)]
    rows = [flat[i * d:(i + 1) * d] for i in range(s)]
    bytes_by = {
        name: results[CLIENT]["buckets"][name] + results[SERVER]["buckets"][name]
        for name in ("matmul", "nonlinear")
    }
    stats_c = results[CLIENT]["stats"]
    stats_s = results[SERVER]["stats"]
    bytes_by["total"] = stats_c.bytes_sent + stats_s.bytes_sent
    info = {
        "client": stats_c,
        "server": stats_s,
        "bytes": bytes_by,
        "rounds": max(stats_c.rounds, stats_s.rounds),
        "rsqrt_elements": s * s + s + s * f + 2 * s,
    }
    return rows, info


def toy_encoder_infer(cfg: ToyEncoderConfig, x_rows, mode: str = "plain",
                      protocol: ProtocolConfig = DEFAULT_CONFIG,
                      sites: EncoderSites = EncoderSites(),
                      weights: dict | None = None,
                      dealer_budget: int | None = None,
                      transport: str = "inproc"):
    """One encoder block: attention with normalized positive weights,
    residual + layernorm, smooth-unit FFN, residual + layernorm.

    plain mode returns the float reference rows. shared mode runs the same
    network on additive shares and returns (rows, info) where info carries
    per-bucket byte counts, rounds, and the inverse-sqrt element count.
    """
    if weights is None:
        if cfg.weight_file is not None:
            weights = load_weights_csv(cfg.weight_file, cfg)
        else:
            weights = generate_weights(cfg)
    if mode == "plain":
        return _encoder_plain(cfg, x_rows, weights)
    if mode == "shared":
        return _encoder_shared(cfg, x_rows, weights, protocol, sites,
                               dealer_budget, transport)
    raise ConfigError(f"unknown mode {mode!r}; expected plain or shared")


@dataclass(frozen=True)
class AblationRow:
    arm: str
    gap: int
    trials: int
    converged: int
    rate: float


def flood_ablation(gap: int = 6, trials: int = 200,
                   cfg: ProtocolConfig = DEFAULT_CONFIG, seed: int = 7,
                   tol: float = 1e-2, arms=("with-flood", "without-flood")):
    """Convergence with and without flooding on identical inputs.

    Each trial draws one activation; the with-flood arm splits it behind a
    flooded mask, the without-flood arm splits it adversarially at the
    requested exponent gap. Both arms run the same codec, seed constants,
    and iteration budget.
    """
    if gap < 0:
        raise ConfigError("gap must be non-negative")
    if trials < 1:
        raise ConfigError("trials must be positive")
    codec = cfg.codec
    sampler = ActivationSampler(cfg.sampler_log2_mean, cfg.sampler_log2_std,
                                seed=seed)
    xs = sampler.sample(trials)
    rng = random.Random(seed + 1)
    rows = []
    for arm in arms:
        if arm not in ("with-flood", "without-flood"):
            raise ConfigError(f"unknown ablation arm {arm!r}")
        pairs = []
        flooded = arm == "with-flood"
        for x in xs:
            if flooded:
                mask = draw_flood_mask(cfg.flood, rng)
                c, sv = flood_share(x, mask, codec)
            else:
                fc, mask = adversarial_split(x, gap, rng)
                c, sv = shares_from_floats(fc, mask, codec)
            pairs.append((c.value, sv.value))
        results, _, _ = run_shared_rsqrt(pairs, codec, cfg.seed, cfg.newton,
                                         dealer_seed=seed + 2, flooded=flooded)
        converged = sum(
            1 for x, y in zip(xs, results)
            if abs(y * math.sqrt(x) - 1.0) <= tol)
        rows.append(AblationRow(arm, gap, trials, converged,
                                converged / trials))
    return rows
