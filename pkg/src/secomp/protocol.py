"""Finite-blocklength simulation of the two-stage secure computing protocol.

Stage one: every terminal assigns its length-n sequence a random bin and
broadcasts the bin index; the bin maps are drawn uniformly (one independent
bin per sequence) from a counter-based generator, so runs are reproducible
bit-for-bit from a seed.  Designated terminals decode the full data from
their own sequence plus the bins (terminals past m0 additionally receive
the private block as decoder side information, mirroring the constraint
family that sets their rates).

Stage two (cases 1 and 2): an omniscient terminal transmits a binning of
each remaining terminal's function block; in case 1 the message is
one-time padded with a key map evaluated on that terminal's sequence, in
case 2 it is sent in the clear.  Case 3 has no second stage.

Everything an eavesdropper sees is a deterministic map of the joint
sequence, so the secrecy metric I(G_0^n ; transcript)/n is computed
*exactly* by enumerating all joint sequences (capped at 2^24); per-terminal
computation error frequencies are Monte Carlo estimates over seeded trials.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _rand
from .errors import (
    ArgumentOutOfRange,
    EnumerationCapExceeded,
    NoConsistentSequence,
    RateVectorInfeasible,
    WrongCaseTag,
)
from .rateregion import (
    build_constraints,
    min_sum_rate,
)
from .sources import FunctionSpec, JointSource, cond_entropy, rv

DEFAULT_ENUM_CAP = 1 << 24
_RATE_TOL = 1e-9


def _num_bins(n: int, rate: float) -> int:
    if rate < 0:
        raise ArgumentOutOfRange(f"binning rate must be >= 0, got {rate!r}")
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-12))


# ---------------------------------------------------------------------------
# codes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinningCode:
    """Total map from length-n sequences of one alphabet to bins 0..r-1."""

    terminal: int
    n: int
    rate: float
    num_bins: int
    bins: np.ndarray
    seed_info: tuple

    def __post_init__(self):
        self.bins.setflags(write=False)


def build_binning_code(terminal: int, n: int, rate: float, seed: int,
                       alphabet_size: int, purpose: int = _rand.STAGE1_BIN,
                       enum_cap: int = DEFAULT_ENUM_CAP) -> BinningCode:
    """Independent uniform bin per sequence, keyed by (seed, purpose, terminal).

    The stream is counter-based, so the same arguments always reproduce the
    identical map regardless of what else was drawn before.
    """
    space = alphabet_size ** n
    if space > enum_cap:
        raise EnumerationCapExceeded(
            f"sequence space {alphabet_size}^{n} exceeds cap {enum_cap}")
    r = _num_bins(n, rate)
    gen = _rand.stream(seed, purpose, terminal)
    bins = gen.integers(0, r, size=space, dtype=np.int64)
    return BinningCode(terminal, n, float(rate), r, bins,
                       (int(seed), int(purpose), int(terminal)))


@dataclass(frozen=True)
class KeyMap:
    """Total map from a terminal's sequences to key values 0..r_key-1."""

    terminal: int
    n: int
    rate: float
    num_values: int
    table: np.ndarray
    seed_info: tuple

    def __post_init__(self):
        self.table.setflags(write=False)


def build_key_map(terminal: int, n: int, num_values: int, seed: int,
                  alphabet_size: int,
                  enum_cap: int = DEFAULT_ENUM_CAP) -> KeyMap:
    space = alphabet_size ** n
    if space > enum_cap:
        raise EnumerationCapExceeded(
            f"sequence space {alphabet_size}^{n} exceeds cap {enum_cap}")
    gen = _rand.stream(seed, _rand.STAGE2_KEY, terminal)
    table = gen.integers(0, num_values, size=space, dtype=np.int64)
    rate = math.log2(num_values) / n
    return KeyMap(terminal, n, rate, num_values, table,
                  (int(seed), _rand.STAGE2_KEY, int(terminal)))


# ---------------------------------------------------------------------------
# exact block model over joint sequences
# ---------------------------------------------------------------------------

def _accumulate(symbol_values: np.ndarray, radix: int, n: int) -> np.ndarray:
    """Sequence-level value sum_t value[s_t] * radix^(n-1-t) over all joint seqs."""
    out = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        out = (out[:, None] * radix + symbol_values[None, :]).ravel()
    return out


class BlockModel:
    """Exact i.i.d. law of n repetitions of the joint symbol.

    Joint sequences are indexed 0..A^n-1 with position 0 most significant,
    so ascending index order is lexicographic over time.  All per-terminal
    and per-function sequence indices are precomputed as flat arrays.
    """

    def __init__(self, src: JointSource, fns: FunctionSpec | None = None,
                 n: int = 1, enum_cap: int = DEFAULT_ENUM_CAP):
        if n < 1:
            raise ArgumentOutOfRange(f"block length must be >= 1, got {n}")
        a = src.num_symbols
        if a ** n > enum_cap:
            raise EnumerationCapExceeded(
                f"joint sequence space {a}^{n} exceeds cap {enum_cap}")
        self.src = src
        self.fns = fns
        self.n = n
        self.size = a ** n
        with np.errstate(divide="ignore"):
            sym_logp = np.where(src.pmf > 0.0, np.log2(src.pmf), -np.inf)
        logp = np.zeros(1)
        for _ in range(n):
            logp = (logp[:, None] + sym_logp[None, :]).ravel()
        self.logp = logp
        self.prob = np.exp2(logp, where=np.isfinite(logp),
                            out=np.zeros_like(logp))
        self._xseq = []
        for i in range(1, src.m + 1):
            seq = _accumulate(src.coordinate_symbols(i).astype(np.int64),
                              src.alphabet_sizes[i - 1], n)
            self._xseq.append(self._shrink(seq))
        self._gseq = []
        if fns is not None:
            for k in range(fns.m + 1):
                seq = _accumulate(fns.dense[k], fns.range_size(k), n)
                self._gseq.append(self._shrink(seq))

    @staticmethod
    def _shrink(arr: np.ndarray) -> np.ndarray:
        if arr.size and int(arr.max()) < np.iinfo(np.int32).max:
            arr = arr.astype(np.int32)
        arr.setflags(write=False)
        return arr

    def xseq(self, i: int) -> np.ndarray:
        return self._xseq[i - 1]

    def gseq(self, k: int) -> np.ndarray:
        return self._gseq[k]

    def seq_space(self, i: int) -> int:
        return self.src.alphabet_sizes[i - 1] ** self.n

    def sample(self, gen: np.random.Generator, trials: int) -> np.ndarray:
        """Draw i.i.d. joint sequences (as indices) position by position."""
        symbols = gen.choice(self.src.num_symbols, size=(trials, self.n),
                             p=self.src.pmf)
        idx = np.zeros(trials, dtype=np.int64)
        for t in range(self.n):
            idx = idx * self.src.num_symbols + symbols[:, t]
        return idx


# ---------------------------------------------------------------------------
# grouped MAP decoding
# ---------------------------------------------------------------------------

def _combine_keys(cols: Sequence[np.ndarray]) -> np.ndarray:
    """Fold integer columns into one key, densifying to avoid overflow."""
    key = np.zeros(len(cols[0]) if cols else 0, dtype=np.int64)
    span = 1
    for col in cols:
        radix = int(col.max()) + 1 if col.size else 1
        if span > (1 << 62) // max(radix, 1):
            _, key = np.unique(key, return_inverse=True)
            key = key.astype(np.int64)
            span = int(key.max()) + 1
        key = key * radix + col.astype(np.int64)
        span *= radix
    return key


def _group_argmax(keys: np.ndarray, logp: np.ndarray) -> np.ndarray:
    """Per element: index of the max-logp element sharing its key.

    Ties resolve to the smallest index (lexicographically smallest
    sequence), via a stable sort on (key, -logp).
    """
    order = np.lexsort((-logp, keys))
    sk = keys[order]
    starts = np.empty(sk.shape[0], dtype=bool)
    starts[0] = True
    np.not_equal(sk[1:], sk[:-1], out=starts[1:])
    gid = np.cumsum(starts) - 1
    winners = order[np.flatnonzero(starts)][gid]
    out = np.empty_like(winners)
    out[order] = winners
    return out


def sw_decode(model: BlockModel, codes: Mapping[int, BinningCode],
              bin_values: Mapping[int, int], side_terminal: int,
              side_sequence: int, g0_sequence: int | None = None) -> int:
    """Single-shot MAP decode of the joint sequence.

    Among joint sequences consistent with the decoder's own sequence, every
    observed bin value, and (when given) the private-function block, return
    the most probable one; ties break to the lexicographically smallest.
    """
    mask = model.xseq(side_terminal) == side_sequence
    for i, code in codes.items():
        mask &= code.bins[model.xseq(i)] == bin_values[i]
    if g0_sequence is not None:
        mask &= model.gseq(0) == g0_sequence
    cand = np.flatnonzero(mask)
    if cand.size == 0:
        raise NoConsistentSequence("no joint sequence matches the observations")
    return int(cand[np.argmax(model.logp[cand])])


# ---------------------------------------------------------------------------
# exact transcript law
# ---------------------------------------------------------------------------

class TranscriptLaw:
    """Exact joint law of (X_1^n..X_m^n, G_0^n, transcript components).

    Columns are integer-valued deterministic maps over the joint sequence
    index; all entropies are computed by exact aggregation of probability
    mass over column tuples.
    """

    def __init__(self, probs: np.ndarray, columns: Mapping[str, np.ndarray],
                 n: int, m: int, transcript_names: Sequence[str]):
        self.probs = probs
        self.columns = dict(columns)
        self.n = n
        self.m = m
        self.transcript_names = tuple(transcript_names)

    def x_name(self, i: int) -> str:
        return f"x{i}"

    def entropy(self, names: Sequence[str]) -> float:
        names = list(names)
        if not names:
            return 0.0
        key = _combine_keys([self.columns[name] for name in names])
        _, inv = np.unique(key, return_inverse=True)
        masses = np.bincount(inv, weights=self.probs)
        masses = masses[masses > 0.0]
        return float(-(masses @ np.log2(masses)))

    def mi(self, a: Sequence[str], b: Sequence[str],
           given: Sequence[str] = ()) -> float:
        a, b, given = list(a), list(b), list(given)
        value = (self.entropy(a + given) - self.entropy(given)
                 - self.entropy(a + b + given) + self.entropy(b + given))
        if abs(value) < 1e-12:  # aggregation noise around an exact zero
            return 0.0
        return value

    def transcript_cardinality(self) -> int:
        key = _combine_keys([self.columns[c] for c in self.transcript_names]) \
            if self.transcript_names else np.zeros(self.probs.shape[0], np.int64)
        return int(np.unique(key[self.probs > 0.0]).size)


def exact_transcript_law(src: JointSource, n: int, transcript,
                         fns: FunctionSpec | None = None,
                         enum_cap: int = DEFAULT_ENUM_CAP) -> TranscriptLaw:
    """Law of an arbitrary deterministic transcript of the joint sequence.

    ``transcript`` is an integer array over joint sequence indices, a
    mapping of named such arrays, or a callable producing one of those
    from the block model.
    """
    model = BlockModel(src, fns, n, enum_cap)
    if callable(transcript):
        transcript = transcript(model)
    if isinstance(transcript, Mapping):
        tcols = {str(k): np.asarray(v) for k, v in transcript.items()}
    else:
        tcols = {"F": np.asarray(transcript)}
    columns = {f"x{i}": model.xseq(i) for i in range(1, src.m + 1)}
    if fns is not None:
        columns["g0"] = model.gseq(0)
    columns.update(tcols)
    return TranscriptLaw(model.prob, columns, n, src.m, tuple(tcols))


def key_quality(law: TranscriptLaw, key: str, nominal_rate: float,
                conditioning: Sequence[str]) -> tuple[float, float]:
    """(uniformity deficit, independence leakage per symbol) of a key column."""
    deficit = abs(law.entropy([key]) / law.n - nominal_rate)
    leak = law.mi([key], list(conditioning)) / law.n
    return float(deficit), float(leak)


# ---------------------------------------------------------------------------
# protocol configuration and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    seed: int
    trials: int = 1000
    slack: float = 0.15
    rates: Mapping[str, float] | None = None
    encrypt: bool = True
    enum_cap: int = DEFAULT_ENUM_CAP
    case: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentOutOfRange(f"block length must be >= 1, got {self.n}")
        if self.trials < 1:
            raise ArgumentOutOfRange(f"trials must be >= 1, got {self.trials}")
        if self.rates is not None:
            for name, value in self.rates.items():
                if not np.isfinite(value) or value < 0:
                    raise RateVectorInfeasible(
                        f"rate override {name}={value!r} must be finite and >= 0")


@dataclass(frozen=True)
class RunReport:
    case: int
    n: int
    seed: int
    trials: int
    slack: float
    encrypt: bool
    rates: dict[str, float]
    bin_counts: dict[str, int]
    computation_error_freq: tuple[float, ...]
    omniscience_error_freq: tuple[float, ...]
    leakage_per_symbol: float
    key_uniformity_deficit: dict[str, float]
    key_independence_leakage: dict[str, float]
    transcript_rate: float

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "n": self.n,
            "seed": self.seed,
            "trials": self.trials,
            "slack": self.slack,
            "encrypt": self.encrypt,
            "rates": dict(sorted(self.rates.items())),
            "bin_counts": dict(sorted(self.bin_counts.items())),
            "computation_error_freq": list(self.computation_error_freq),
            "omniscience_error_freq": list(self.omniscience_error_freq),
            "leakage_per_symbol": self.leakage_per_symbol,
            "key_uniformity_deficit": dict(sorted(self.key_uniformity_deficit.items())),
            "key_independence_leakage": dict(sorted(self.key_independence_leakage.items())),
            "transcript_rate": self.transcript_rate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class ProtocolRun:
    """Full simulation result: the serializable report plus the exact law
    and exact per-terminal error probabilities (useful for trend tests)."""

    report: RunReport
    law: TranscriptLaw
    exact_computation_error: tuple[float, ...]
    exact_omniscience_error: tuple[float, ...]


# ---------------------------------------------------------------------------
# shared runner pieces
# ---------------------------------------------------------------------------

def _slacked(value: float, slack: float) -> float:
    """Add decoding margin only where there is something to decode."""
    return value + slack if value > _RATE_TOL else 0.0


def _stage1_rates(src, fns, cfg) -> tuple[dict[str, float], dict[str, float]]:
    """Rates actually used: LP vertex plus slack, or explicit overrides."""
    _, vertex = min_sum_rate(build_constraints(src, fns))
    rates = {name: _slacked(v, cfg.slack) for name, v in vertex.values.items()}
    if fns.case == 1:
        for j in range(fns.m0 + 1, src.m + 1):
            h = cond_entropy(src, fns, rv(g=[j]), rv(x=[j]))
            rates[f"Rp_{j}"] = _slacked(h, cfg.slack)
    if cfg.rates:
        unknown = set(cfg.rates) - set(rates)
        if unknown:
            raise RateVectorInfeasible(f"unknown rate names {sorted(unknown)}")
        rates.update({k: float(v) for k, v in cfg.rates.items()})
    return rates, vertex.values


def _pair_decode_table(src: JointSource, fns: FunctionSpec, j: int, n: int,
                       fcode: BinningCode, enum_cap: int) -> np.ndarray:
    """Decoded function block per (own sequence, received codeword) pair.

    Built by marginal MAP over the exact pair law of (X_j, G_j): the pair
    source has exactly these two coordinates, so the joint MAP over its
    sequences is the conditional MAP of the function block.
    """
    aj = src.alphabet_sizes[j - 1]
    yj = fns.range_size(j)
    xsym = src.coordinate_symbols(j)
    pair_pmf = np.bincount(xsym * yj + fns.dense[j], weights=src.pmf,
                           minlength=aj * yj)
    pair_src = JointSource((aj, yj), pair_pmf)
    pm = BlockModel(pair_src, None, n, enum_cap)
    fbin = fcode.bins[pm.xseq(2)]
    winners = _group_argmax(_combine_keys([pm.xseq(1), fbin]), pm.logp)
    table = np.full((aj ** n, fcode.num_bins), -1, dtype=np.int64)
    table[pm.xseq(1), fbin] = pm.xseq(2)[winners]
    return table


def _freq(err: np.ndarray, samples: np.ndarray) -> float:
    return float(np.mean(err[samples]))


def _exact(err: np.ndarray, prob: np.ndarray) -> float:
    return float(prob @ err)


def _assemble_run(src, fns, cfg, rates, model, bin_cols, codes,
                  transcript_cols, comp_err, omni_err, extra_cols,
                  key_names) -> ProtocolRun:
    columns = {f"x{i}": model.xseq(i) for i in range(1, src.m + 1)}
    columns["g0"] = model.gseq(0)
    columns.update(bin_cols)
    columns.update(transcript_cols)
    columns.update(extra_cols)
    tnames = tuple(bin_cols) + tuple(transcript_cols)
    law = TranscriptLaw(model.prob, columns, cfg.n, src.m, tnames)

    leak = law.mi(["g0"], list(tnames)) / cfg.n

    deficits, independence = {}, {}
    prior: list[str] = []
    for j, key_name, c_name in key_names:
        side = ["g0"] + list(bin_cols) + prior
        deficit, ind = key_quality(law, key_name, rates[f"Rp_{j}"], side)
        deficits[f"Rp_{j}"] = deficit
        independence[f"Rp_{j}"] = ind
        prior.append(c_name)

    gen = _rand.stream(cfg.seed, _rand.MC_SAMPLER)
    samples = model.sample(gen, cfg.trials)
    report = RunReport(
        case=fns.case, n=cfg.n, seed=cfg.seed, trials=cfg.trials,
        slack=cfg.slack, encrypt=cfg.encrypt,
        rates={k: float(v) for k, v in sorted(rates.items())},
        bin_counts={name: code.num_bins for name, code in codes.items()},
        computation_error_freq=tuple(_freq(e, samples) for e in comp_err),
        omniscience_error_freq=tuple(_freq(e, samples) for e in omni_err),
        leakage_per_symbol=float(max(leak, 0.0)),
        key_uniformity_deficit=deficits,
        key_independence_leakage=independence,
        transcript_rate=math.log2(law.transcript_cardinality()) / cfg.n,
    )
    return ProtocolRun(
        report=report, law=law,
        exact_computation_error=tuple(_exact(e, model.prob) for e in comp_err),
        exact_omniscience_error=tuple(_exact(e, model.prob) for e in omni_err),
    )


def _check_case(fns: FunctionSpec, cfg: ProtocolConfig, case: int) -> None:
    if fns.case != case:
        raise WrongCaseTag(f"expected a case-{case} spec, got case {fns.case}")
    if cfg.case is not None and cfg.case != case:
        raise WrongCaseTag(f"config declares case {cfg.case}, runner is case {case}")


# ---------------------------------------------------------------------------
# case runners
# ---------------------------------------------------------------------------

def simulate_case1(src: JointSource, fns: FunctionSpec,
                   cfg: ProtocolConfig) -> ProtocolRun:
    """Two-stage run: binned omniscience, then one-time-padded codewords.

    The stage-two sender is terminal 1; it evaluates both the function
    binning and the key map on its *decoded* data, so every message stays a
    function of one terminal's observation plus prior communication.
    """
    _check_case(fns, cfg, 1)
    m, m0, n = src.m, fns.m0, cfg.n
    rates, _ = _stage1_rates(src, fns, cfg)
    model = BlockModel(src, fns, n, cfg.enum_cap)

    codes = {f"b{i}": build_binning_code(i, n, rates[f"R_{i}"], cfg.seed,
                                         src.alphabet_sizes[i - 1],
                                         enum_cap=cfg.enum_cap)
             for i in range(1, m + 1)}
    bin_cols = {name: code.bins[model.xseq(code.terminal)]
                for name, code in codes.items()}
    all_bins = list(bin_cols.values())

    xhat = {}
    for i in range(1, m0 + 1):
        keys = _combine_keys([model.xseq(i)] + all_bins)
        xhat[i] = _group_argmax(keys, model.logp)
    for j in range(m0 + 1, m + 1):
        keys = _combine_keys([model.xseq(j)] + all_bins + [model.gseq(0)])
        xhat[j] = _group_argmax(keys, model.logp)

    sender = xhat[1]
    transcript_cols: dict[str, np.ndarray] = {}
    extra_cols: dict[str, np.ndarray] = {}
    key_names = []
    comp_err = [model.gseq(i)[xhat[i]] != model.gseq(i) for i in range(1, m0 + 1)]
    for j in range(m0 + 1, m + 1):
        rp = rates[f"Rp_{j}"]
        fcode = build_binning_code(j, n, rp, cfg.seed, fns.range_size(j),
                                   purpose=_rand.STAGE2_CODEWORD,
                                   enum_cap=cfg.enum_cap)
        codes[f"f{j}"] = fcode
        key = build_key_map(j, n, fcode.num_bins, cfg.seed,
                            src.alphabet_sizes[j - 1], enum_cap=cfg.enum_cap)
        fhat = fcode.bins[model.gseq(j)[sender]]
        key_at_sender = key.table[model.xseq(j)[sender]]
        key_true = key.table[model.xseq(j)]
        if cfg.encrypt:
            c = (fhat + key_at_sender) % key.num_values
            received = (c - key_true) % key.num_values
        else:
            c = fhat
            received = c
        table = _pair_decode_table(src, fns, j, n, fcode, cfg.enum_cap)
        decoded = table[model.xseq(j), received]
        if np.any(decoded < 0):
            raise NoConsistentSequence(
                f"stage-two decoder for terminal {j} hit an unreachable codeword")
        comp_err.append(decoded != model.gseq(j))
        transcript_cols[f"c{j}"] = c
        extra_cols[f"K{j}"] = key_true
        extra_cols[f"Fhat{j}"] = fhat
        key_names.append((j, f"K{j}", f"c{j}"))

    omni_err = [xhat[i] != np.arange(model.size) for i in range(1, m + 1)]
    return _assemble_run(src, fns, cfg, rates, model, bin_cols, codes,
                         transcript_cols, comp_err, omni_err, extra_cols,
                         key_names)


def simulate_case2(src: JointSource, fns: FunctionSpec,
                   cfg: ProtocolConfig) -> ProtocolRun:
    """As case 1, but stage-two codewords are sent in the clear at the
    rates the case-2 LP assigns to them (no keys exist in this regime)."""
    _check_case(fns, cfg, 2)
    m, m0, n = src.m, fns.m0, cfg.n
    rates, _ = _stage1_rates(src, fns, cfg)
    model = BlockModel(src, fns, n, cfg.enum_cap)

    codes = {f"b{i}": build_binning_code(i, n, rates[f"R_{i}"], cfg.seed,
                                         src.alphabet_sizes[i - 1],
                                         enum_cap=cfg.enum_cap)
             for i in range(1, m + 1)}
    bin_cols = {name: code.bins[model.xseq(code.terminal)]
                for name, code in codes.items()}
    all_bins = list(bin_cols.values())

    xhat = {}
    for i in range(1, m0 + 1):
        xhat[i] = _group_argmax(_combine_keys([model.xseq(i)] + all_bins),
                                model.logp)
    for j in range(m0 + 1, m + 1):
        keys = _combine_keys([model.xseq(j)] + all_bins + [model.gseq(0)])
        xhat[j] = _group_argmax(keys, model.logp)

    sender = xhat[1]
    transcript_cols = {}
    comp_err = [model.gseq(i)[xhat[i]] != model.gseq(i) for i in range(1, m0 + 1)]
    for j in range(m0 + 1, m + 1):
        fcode = build_binning_code(j, n, rates[f"Rp_{j}"], cfg.seed,
                                   fns.range_size(j),
                                   purpose=_rand.STAGE2_CODEWORD,
                                   enum_cap=cfg.enum_cap)
        codes[f"f{j}"] = fcode
        fhat = fcode.bins[model.gseq(j)[sender]]
        table = _pair_decode_table(src, fns, j, n, fcode, cfg.enum_cap)
        decoded = table[model.xseq(j), fhat]
        if np.any(decoded < 0):
            raise NoConsistentSequence(
                f"stage-two decoder for terminal {j} hit an unreachable codeword")
        comp_err.append(decoded != model.gseq(j))
        transcript_cols[f"c{j}"] = fhat

    omni_err = [xhat[i] != np.arange(model.size) for i in range(1, m + 1)]
    return _assemble_run(src, fns, cfg, rates, model, bin_cols, codes,
                         transcript_cols, comp_err, omni_err, {}, [])


def simulate_case3(src: JointSource, fns: FunctionSpec,
                   cfg: ProtocolConfig) -> ProtocolRun:
    """One-stage run: each terminal MAP-decodes the joint sequence from its
    own data plus all bins and projects onto its recovery set."""
    _check_case(fns, cfg, 3)
    m, n = src.m, cfg.n
    rates, _ = _stage1_rates(src, fns, cfg)
    model = BlockModel(src, fns, n, cfg.enum_cap)

    codes = {f"b{i}": build_binning_code(i, n, rates[f"R_{i}"], cfg.seed,
                                         src.alphabet_sizes[i - 1],
                                         enum_cap=cfg.enum_cap)
             for i in range(1, m + 1)}
    bin_cols = {name: code.bins[model.xseq(code.terminal)]
                for name, code in codes.items()}
    all_bins = list(bin_cols.values())

    comp_err, omni_err = [], []
    zeros = np.zeros(model.size, dtype=bool)
    for i in range(1, m + 1):
        members = sorted(fns.recovery_sets[i - 1])
        if not members:
            comp_err.append(zeros)
            omni_err.append(zeros)
            continue
        xhat = _group_argmax(_combine_keys([model.xseq(i)] + all_bins),
                             model.logp)
        err = np.zeros(model.size, dtype=bool)
        for j in members:
            err |= model.xseq(j)[xhat] != model.xseq(j)
        comp_err.append(err)
        omni_err.append(xhat != np.arange(model.size))

    return _assemble_run(src, fns, cfg, rates, model, bin_cols, codes,
                         {}, comp_err, omni_err, {}, [])


def run_case1_protocol(src, fns, cfg) -> RunReport:
    return simulate_case1(src, fns, cfg).report


def run_case2_protocol(src, fns, cfg) -> RunReport:
    return simulate_case2(src, fns, cfg).report


def run_case3_protocol(src, fns, cfg) -> RunReport:
    return simulate_case3(src, fns, cfg).report


def simulate(src: JointSource, fns: FunctionSpec,
             cfg: ProtocolConfig) -> ProtocolRun:
    """Dispatch to the case-appropriate runner."""
    runner = {1: simulate_case1, 2: simulate_case2, 3: simulate_case3}[fns.case]
    return runner(src, fns, cfg)
