"""Two-party fixed-point toolkit around a communication-free inverse-sqrt
seed: additive sharing, Beaver multiplication, share flooding, smooth-unit
non-linear layers, and counted-communication benchmarks."""

from .errors import ConfigError, ConstructionError, DivergenceError, \
    ProtocolError, RangeError, RootshareError, TransportError, \
    UnsupportedValueError, UsageError
from .ring import CLIENT, SERVER, PARTIES, BeaverTriple, DealerState, \
    FixedPointCodec, MatrixTriple, RingShare, TripleStream, beaver_mul, \
    beaver_mul_batch, linear_combine, make_shares, matmul_shared, \
    reconstruct, reconstruct_raw, truncate_local
from .floatbits import FloatBits, SignedBitsInteger, compose, decompose, \
    pack_integer, share_to_float, to_binary32, unpack_integer
from .transport import CommStats, Endpoint, InprocEndpoint, SocketEndpoint, \
    open_inproc, open_socket, open_socket_pair, recv_frame, run_pair, \
    send_frame, stats_snapshot
from .flood import ActivationSampler, FloodConfig, adversarial_split, \
    draw_flood_mask, flood_mask, flood_reshare, flood_reshare_batch, \
    flood_share, shares_from_floats
from .rsqrt import MAGIC_K1, NewtonConfig, SeedParams, STRATEGIES, \
    STRATEGY_LOCAL_REINTERPRET, STRATEGY_MASKED_OPEN, SweepRow, \
    bits_to_value_batch, bits_to_value_shares, closeness_sweep, \
    newton_plain, newton_shared, newton_shared_batch, rsqrt_shared, \
    rsqrt_shared_batch, run_shared_rsqrt, seed_local, seed_share_client, \
    seed_share_server, seed_shares
from .config import DEFAULT_CONFIG, ProtocolConfig, config_from_mapping, \
    load_config_file
from .nonlinear import GELU_PARAMS, RELU_PARAMS, SmuParams, TensorShares, \
    gelu_plain, gelu_shared_batch, layernorm_plain, layernorm_shared, \
    reconstruct_tensor, relu_plain, run_layernorm_shared, run_smu_shared, \
    run_softmax_star_shared, share_tensor, smu_plain, smu_shared_batch, \
    softmax_plain, softmax_star_plain, softmax_star_shared
from .bench import AblationRow, EncoderSites, LutCostModel, ReportRow, \
    ToyEncoderConfig, comm_report, count_rsqrt_element, \
    count_rsqrt_element_bytes, crypten_seed, crypten_seed_cost, \
    flood_ablation, generate_weights, load_weights_csv, lut_cost, \
    save_weights_csv, taylor_cost, taylor_seed, toy_encoder_infer, \
    write_report_csv

__version__ = "0.1.0"
