"""Result-file formats and the flat key=value config format.

All CSV output is byte-stable: comma separators, '.' decimals, floats at 17
significant digits, LF line endings, one header row, and a leading metadata
block of '# key = value' comment lines.  Writers go through a temp file and
an atomic rename so consumers never see partial output.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import __version__
from . import genome as genome_mod

__all__ = [
    "fmt",
    "parse_config_text",
    "read_points_csv",
    "read_run_csv",
    "write_alpha_phi_csv",
    "write_fit_csv",
    "write_genome_json",
    "write_json",
    "write_run_csv",
    "write_runs_csv",
    "write_stats_csv",
    "write_text",
]

RUN_HEADER = "run_id,seed,generation,mean_fitness,fluctuation,best_fitness"
RUN_SUMMARY_HEADER = "run_id,seed,q_c,epsilon_opt,termination_reason,best_genome"
RUNS_HEADER = "run_id,seed,q_c,epsilon_opt,best_fitness,termination_reason,best_genome"
STATS_HEADER = "generation,mean_fitness,std_fitness,n"
ALPHA_PHI_HEADER = "run_id,alpha,phi,epsilon_opt"
FIT_HEADER = "a,b,c,a_err,b_err,c_err,rss,converged"


def fmt(value) -> str:
    """Canonical text for one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _metadata_lines(metadata: dict) -> list[str]:
    lines = [f"# evogate {__version__}"]
    for key, value in metadata.items():
        lines.append(f"# {key} = {fmt(value)}")
    return lines


def write_text(path, text: str) -> None:
    """Write a file atomically (temp file in place, then rename)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv(metadata: dict, header: str, rows) -> str:
    lines = _metadata_lines(metadata) + [header]
    for row in rows:
        lines.append(",".join(fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def write_run_csv(path, record, run_id: int, metadata: dict) -> None:
    """One generation per row, then a one-row summary section."""
    rows = [
        (run_id, record.seed, g + 1, record.mean_fitness[g], record.fluctuation[g],
         record.best_fitness_series[g])
        for g in range(record.q_c)
    ]
    body = _csv(metadata, RUN_HEADER, rows)
    summary = ",".join(
        fmt(cell)
        for cell in (
            run_id, record.seed, record.q_c, record.epsilon_opt,
            record.termination_reason, genome_mod.genome_to_field(record.best_genome),
        )
    )
    write_text(path, body + RUN_SUMMARY_HEADER + "\n" + summary + "\n")


def write_runs_csv(path, rows, metadata: dict) -> None:
    """Per-run summary table for a sweep (failed runs carry reason 'error')."""
    write_text(path, _csv(metadata, RUNS_HEADER, rows))


def write_stats_csv(path, generations, mean, std, counts, metadata: dict) -> None:
    rows = zip(generations, mean, std, counts)
    write_text(path, _csv(metadata, STATS_HEADER, rows))


def write_alpha_phi_csv(path, rows, metadata: dict) -> None:
    write_text(path, _csv(metadata, ALPHA_PHI_HEADER, rows))


def write_fit_csv(path, fit, metadata: dict) -> None:
    row = (fit.a, fit.b, fit.c, fit.a_err, fit.b_err, fit.c_err, fit.rss, fit.converged)
    write_text(path, _csv(metadata, FIT_HEADER, [row]))


def write_genome_json(path, genome: np.ndarray, metadata: dict) -> None:
    """Genome file: bit strings as ordered lists, slot index then generator index."""
    payload = {
        "metadata": {"version": __version__, **{k: _json_safe(v) for k, v in metadata.items()}},
        "slots": genome_mod.genome_to_strings(genome),
    }
    write_text(path, json.dumps(payload, indent=2) + "\n")


def _json_safe(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value]
    return value


def write_json(path, payload: dict) -> None:
    write_text(path, json.dumps(_json_tree(payload), indent=2) + "\n")


def _json_tree(node):
    if isinstance(node, dict):
        return {k: _json_tree(v) for k, v in node.items()}
    if isinstance(node, (list, tuple, np.ndarray)):
        return [_json_tree(v) for v in node]
    return _json_safe(node)


def read_run_csv(path):
    """Parse a single-run file back into (metadata, generation table, summary).

    The generation table is a dict of numpy arrays keyed by column; the
    summary dict carries the parsed q_c/epsilon_opt/termination_reason and
    the best genome as a bit array.
    """
    meta = {}
    gen_rows = []
    summary = None
    header = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("# ") and " = " in line:
                key, _, value = line[2:].partition(" = ")
                meta[key] = value
            elif line.startswith("#") or not line:
                continue
            elif line == RUN_HEADER:
                header = "generations"
            elif line == RUN_SUMMARY_HEADER:
                header = "summary"
            elif header == "generations":
                gen_rows.append(line.split(","))
            elif header == "summary":
                cells = line.split(",")
                summary = {
                    "run_id": int(cells[0]),
                    "seed": int(cells[1]),
                    "q_c": int(cells[2]),
                    "epsilon_opt": float(cells[3]),
                    "termination_reason": cells[4],
                    "best_genome": genome_mod.genome_from_field(cells[5]),
                }
    if header is None or summary is None:
        raise ValueError(f"{path}: not a run file")
    cols = RUN_HEADER.split(",")
    table = {
        name: np.array([row[i] for row in gen_rows], dtype=float)
        for i, name in enumerate(cols)
    }
    return meta, table, summary


def read_points_csv(path):
    """Load (eps, q) pairs from a CSV with '#' metadata lines.

    Accepts either a sweep summary table (columns ``epsilon_opt`` and ``q_c``)
    or a plain two-column table named ``epsilon`` and ``q``.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: no data rows")
    header = lines[0].split(",")
    for eps_col, q_col in (("epsilon_opt", "q_c"), ("epsilon", "q")):
        if eps_col in header and q_col in header:
            ei, qi = header.index(eps_col), header.index(q_col)
            break
    else:
        raise ValueError(
            f"{path}: expected columns epsilon_opt/q_c or epsilon/q, got {header}"
        )
    eps, q = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):  # a second header section ends the table
            break
        if cells[ei] == header[ei]:
            break
        try:
            e_val, q_val = float(cells[ei]), float(cells[qi])
        except ValueError:
            continue  # skip non-numeric rows (e.g. failed runs marked nan-free)
        if np.isfinite(e_val) and np.isfinite(q_val):
            eps.append(e_val)
            q.append(q_val)
    if not eps:
        raise ValueError(f"{path}: no usable data points")
    return np.array(eps), np.array(q)


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines ('#' comments and blanks allowed)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ValueError(f"config line {lineno}: empty key or value")
        if key in out:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out
