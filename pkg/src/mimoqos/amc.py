"""Adaptive modulation and coding: exponential PER model and SINR mode thresholds.

A table of N-1 modulation modes plus the implicit no-transmission level
partitions the SINR axis into N bins with edges 0 = omega_0 < omega_1 < ... <
omega_N = inf.  Mode n is used when omega_n <= rho < omega_{n+1}; each
threshold inverts the PER model at the target packet error rate.  SINR is
linear everywhere internally; dB only at I/O boundaries.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ModulationMode:
    """One constellation with its packet-error fit.

    The PER above the cutoff is per_scale * exp(-per_slope * rho); below the
    cutoff it is taken as 1.  cutoff_snr is linear.
    """

    index: int
    bits_per_symbol: int
    per_scale: float
    per_slope: float
    cutoff_snr: float
    name: str = ""

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("mode index starts at 1 (0 is the no-transmission level)")
        if self.bits_per_symbol < 1:
            raise ValueError("bits_per_symbol must be >= 1")
        if not (self.per_scale > 0 and self.per_slope > 0 and self.cutoff_snr > 0):
            raise ValueError("per_scale, per_slope and cutoff_snr must be > 0")


@dataclass(frozen=True)
class ModulationTable:
    """Ordered mode set with precomputed SINR bin edges.

    thresholds has length len(modes) + 2: a leading 0 for the
    no-transmission bin and a trailing inf for the top bin.
    """

    modes: tuple[ModulationMode, ...]
    p_obj: float
    symbol_rate: float
    thresholds: tuple[float, ...]

    def __post_init__(self):
        if len(self.thresholds) != len(self.modes) + 2:
            raise ValueError("thresholds must have len(modes) + 2 entries")
        if self.thresholds[0] != 0.0 or not math.isinf(self.thresholds[-1]):
            raise ValueError("thresholds must start at 0 and end at inf")
        for a, b in zip(self.thresholds, self.thresholds[1:]):
            if not a < b:
                raise ValueError("thresholds must be strictly increasing")

    @property
    def num_levels(self) -> int:
        """Serve levels including the no-transmission level 0."""
        return len(self.modes) + 1


def packet_error_rate(mode: ModulationMode, rho: float) -> float:
    """PER at linear SINR rho: 1 below the cutoff, clamped exponential above."""
    if rho < 0:
        raise ValueError("SINR must be >= 0")
    if rho < mode.cutoff_snr:
        return 1.0
    return min(mode.per_scale * math.exp(-mode.per_slope * rho), 1.0)


def build_thresholds(modes, p_obj: float, symbol_rate: float) -> ModulationTable:
    """Construct a ModulationTable with bin edges inverting the PER model at p_obj.

    Rejects parameter sets whose thresholds are not strictly increasing, whose
    thresholds fall below a mode's cutoff (the inversion is only valid on the
    exponential branch), or whose rates are not strictly increasing.
    """
    modes = tuple(modes)
    if not modes:
        raise ValueError("mode list must be nonempty")
    if not 0 < p_obj < min(m.per_scale for m in modes):
        raise ValueError("p_obj must lie in (0, min(per_scale))")
    if not symbol_rate > 0:
        raise ValueError("symbol_rate must be > 0")
    for a, b in zip(modes, modes[1:]):
        if not a.bits_per_symbol < b.bits_per_symbol:
            raise ValueError("bits_per_symbol must be strictly increasing with index")

    omegas = [0.0]
    for m in modes:
        om = math.log(m.per_scale / p_obj) / m.per_slope
        if om < m.cutoff_snr:
            raise ValueError(
                f"mode {m.index}: threshold {om:.4g} sits below the PER cutoff "
                f"{m.cutoff_snr:.4g}"
            )
        omegas.append(om)
    omegas.append(math.inf)
    for a, b in zip(omegas, omegas[1:]):
        if not a < b:
            raise ValueError("inconsistent parameter table: thresholds not increasing")
    return ModulationTable(
        modes=modes, p_obj=p_obj, symbol_rate=symbol_rate, thresholds=tuple(omegas)
    )


def select_mode(table: ModulationTable, rho: float) -> int:
    """Serve level n with omega_n <= rho < omega_{n+1}; 0 means no transmission."""
    if rho < 0:
        raise ValueError("SINR must be >= 0")
    return bisect.bisect_right(table.thresholds, rho) - 1


def serve_rate(table: ModulationTable, n: int) -> float:
    """Serve rate of level n in bits/second (bits-per-symbol times symbol rate)."""
    if not 0 <= n <= table.num_levels - 1:
        raise IndexError(f"serve level {n} out of range 0..{table.num_levels - 1}")
    if n == 0:
        return 0.0
    return table.modes[n - 1].bits_per_symbol * table.symbol_rate


# Default uncoded-QAM PER fits for 1080-bit packets (cutoffs in dB).
_DEFAULT_MODES = (
    (1, "BPSK", 1, 67.7328, 0.9819, 6.3281),
    (2, "QPSK", 2, 73.8279, 0.4945, 9.3945),
    (3, "8QAM", 3, 58.7332, 0.1641, 13.9470),
    (4, "16QAM", 4, 55.9137, 0.0989, 16.0938),
    (5, "32QAM", 5, 50.0552, 0.0381, 20.1103),
    (6, "64QAM", 6, 42.5594, 0.0235, 22.0340),
    (7, "128QAM", 7, 40.2559, 0.0094, 25.9677),
)


def default_modes() -> tuple[ModulationMode, ...]:
    return tuple(
        ModulationMode(
            index=i,
            name=name,
            bits_per_symbol=bps,
            per_scale=a,
            per_slope=g,
            cutoff_snr=db_to_linear(cut_db),
        )
        for i, name, bps, a, g, cut_db in _DEFAULT_MODES
    )


def default_table(p_obj: float = 1e-4, symbol_rate: float = 1e6) -> ModulationTable:
    """Built-in 7-mode table (BPSK..128QAM) with the default PER fits."""
    return build_thresholds(default_modes(), p_obj=p_obj, symbol_rate=symbol_rate)


def table_to_dict(table: ModulationTable) -> dict:
    """Serializable form; cutoffs are emitted in dB (field cutoff_snr_db)."""
    return {
        "p_obj": table.p_obj,
        "symbol_rate": table.symbol_rate,
        "modes": [
            {
                "index": m.index,
                "name": m.name,
                "bits_per_symbol": m.bits_per_symbol,
                "per_scale": m.per_scale,
                "per_slope": m.per_slope,
                "cutoff_snr_db": linear_to_db(m.cutoff_snr),
            }
            for m in table.modes
        ],
    }


def table_from_dict(d: dict) -> ModulationTable:
    modes = tuple(
        ModulationMode(
            index=int(row["index"]),
            name=str(row.get("name", "")),
            bits_per_symbol=int(row["bits_per_symbol"]),
            per_scale=float(row["per_scale"]),
            per_slope=float(row["per_slope"]),
            cutoff_snr=db_to_linear(float(row["cutoff_snr_db"])),
        )
        for row in d["modes"]
    )
    return build_thresholds(
        modes, p_obj=float(d["p_obj"]), symbol_rate=float(d["symbol_rate"])
    )


def load_table(path) -> ModulationTable:
    """Load a modulation table from a JSON file (see table_to_dict for the schema)."""
    with open(path, "r", encoding="utf-8") as fh:
        return table_from_dict(json.load(fh))
