"""SNR sweeps, shaping gain and CSV/JSON output."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import csv
import io
import json
import math
import os
import tempfile

import numpy as np

from . import __version__
from . import discrete_polar as dp
from . import gaussian_polar as gp
from .constellation import make_product_apsk, make_psk, make_square_qam
from .distributions import ChannelParams
from .numerics import EstimatorConfig

INPUT_KINDS = ("gaussian", "product_apsk", "square_qam", "psk")
CSV_COLUMNS = ["snr_db", "total", "amplitude", "phase", "cross", "amp_lower",
               "phase_upper", "total_err", "amplitude_err", "phase_err", "cross_err"]


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    input_kind: str = "gaussian"
    order: int = None
    snr_start_db: float = -10.0
    snr_stop_db: float = 20.0
    snr_step_db: float = 1.0
    config: EstimatorConfig = field(default_factory=EstimatorConfig)
    output_format: str = "csv"
    output_path: str = None
    workers: int = 1

    def __post_init__(self):
        if self.input_kind not in INPUT_KINDS:
            raise ValueError(f"input_kind must be one of {INPUT_KINDS}")
        if self.input_kind != "gaussian" and self.order is None:
            raise ValueError(f"{self.input_kind} needs an order")
        if not self.snr_step_db > 0:
            raise ValueError("snr step must be positive")
        if self.snr_start_db > self.snr_stop_db:
            raise ValueError("snr start must not exceed snr stop")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output format must be csv or json")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def grid(self):
        n = int(math.floor((self.snr_stop_db - self.snr_start_db) / self.snr_step_db + 1e-9)) + 1
        return [round(self.snr_start_db + i * self.snr_step_db, 10) for i in range(n)]


@dataclass
class SweepResult:
    records: list
    metadata: dict


def make_constellation(kind, order):
    if kind == "product_apsk":
        return make_product_apsk(order)
    if kind == "square_qam":
        return make_square_qam(order)
    if kind == "psk":
        return make_psk(order)
    raise ValueError(f"no constellation for input kind {kind!r}")


def _gaussian_row(snr_db, config):
    params = ChannelParams.from_snr_db(snr_db)
    d = gp.decompose_gaussian(params, config)
    return {
        "snr_db": snr_db,
        "total": d.total.value, "amplitude": d.amplitude.value,
        "phase": d.phase.value, "cross": d.cross.value,
        "amp_lower": gp.amp_lower_bound(params),
        "phase_upper": gp.phase_upper_bound(params),
        "total_err": 0.0, "amplitude_err": 0.0, "phase_err": 0.0, "cross_err": 0.0,
    }


def _constellation_row(kind, order, snr_db, config, index):
    c = make_constellation(kind, order)
    d = dp.decompose_discrete(c, float(c.snr_to_n0(snr_db)), config, labels=(index,))
    row = {"snr_db": snr_db, "amp_lower": None, "phase_upper": None}
    for name in ("total", "amplitude", "phase", "cross"):
        est = getattr(d, name)
        row[name] = None if est is None else est.value
        row[name + "_err"] = None if est is None else est.std_error
    return row


def _compute_point(args):
    kind, order, snr_db, config, index = args
    try:
        if kind == "gaussian":
            row = _gaussian_row(snr_db, config)
        else:
            row = _constellation_row(kind, order, snr_db, config, index)
    except Exception as exc:  # re-raised with the grid point attached
        raise SweepError(f"{kind} sweep failed at SNR {snr_db} dB: {exc}") from exc
    for key, val in row.items():
        if val is not None and not math.isfinite(val):
            raise SweepError(f"{kind} sweep produced non-finite {key} at SNR {snr_db} dB")
    return row


def run_sweep(spec):
    """Evaluate every grid point; write ``spec.output_path`` if given.

    Each point depends only on ``(seed, point index)``, so the worker count
    never changes the numbers.
    """
    grid = spec.grid()
    jobs = [(spec.input_kind, spec.order, snr, spec.config, i) for i, snr in enumerate(grid)]
    if spec.workers == 1 or len(jobs) == 1:
        rows = [_compute_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_compute_point, jobs))
    es = 1.0
    if spec.input_kind != "gaussian":
        es = make_constellation(spec.input_kind, spec.order).es
    metadata = {
        "input_kind": spec.input_kind,
        "order": spec.order,
        "seed": spec.config.seed,
        "config": asdict(spec.config),
        "es": es,
        "version": __version__,
    }
    result = SweepResult(rows, metadata)
    if spec.output_path:
        emit(result, spec.output_format, spec.output_path)
    return result


# --- output -------------------------------------------------------------------

def _fmt(val):
    return "" if val is None else f"{val:.6g}"


def _round6(val):
    return None if val is None else float(f"{val:.6g}")


def to_csv(result):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in result.records:
        writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def to_json(result):
    records = [{col: _round6(row.get(col)) for col in CSV_COLUMNS} for row in result.records]
    meta = {k: (_round6(v) if isinstance(v, float) else v) for k, v in result.metadata.items()}
    return json.dumps({"metadata": meta, "records": records}, indent=2, sort_keys=True) + "\n"


def emit(result, fmt, path):
    """Write the result atomically as ``csv`` or ``json``."""
    if fmt == "csv":
        text = to_csv(result)
    elif fmt == "json":
        text = to_json(result)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".polarmi-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# --- shaping gain --------------------------------------------------------------

def snr_for_rate(constellation, target_bits, config=EstimatorConfig()):
    """SNR in dB at which the AMI of ``constellation`` reaches ``target_bits``."""
    m = math.log2(constellation.size)
    if not 0 < target_bits < m:
        raise ValueError(f"target rate must lie in (0, {m:g}) bits")

    def rate(snr_db):
        return dp.ami(constellation, float(constellation.snr_to_n0(snr_db)), config).value

    # the AMI never exceeds capacity, so the crossing sits above this SNR
    lo = math.floor(10.0 * math.log10(2.0 ** target_bits - 1.0))
    hi = lo
    while rate(hi) < target_bits:
        lo = hi
        hi += 1.0
        if hi > lo + 60.0:
            raise ValueError("target rate not reached below +60 dB above capacity")
    fine = np.round(np.arange(lo, hi + 1e-9, 0.1), 10)
    vals = np.array([rate(s) for s in fine])
    k = int(np.argmax(vals >= target_bits))
    a, b = float(fine[max(k - 1, 0)]), float(fine[k])
    ra, rb = float(vals[max(k - 1, 0)]), float(vals[k])
    while b - a > 0.01:
        mid = 0.5 * (a + b)
        rm = rate(mid)
        if rm >= target_bits:
            b, rb = mid, rm
        else:
            a, ra = mid, rm
    if rb == ra:
        return b
    return a + (target_bits - ra) * (b - a) / (rb - ra)


def shaping_gain(m, target_bits, config=EstimatorConfig()):
    """SNR advantage (dB) of product-APSK over square QAM at ``target_bits``."""
    if not 0 < target_bits < m:
        raise ValueError(f"target rate must lie in (0, {m}) bits")
    qam = make_square_qam(m)
    apsk = make_product_apsk(m)
    return snr_for_rate(qam, target_bits, config) - snr_for_rate(apsk, target_bits, config)
