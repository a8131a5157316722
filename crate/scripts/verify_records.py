#!/usr/bin/env python3
"""Independent checker for serialized run artifacts.

Re-derives the failure-classification table and the headline metrics from
the record streams alone, without touching the simulator:

* every heralded_timeout_abort / heralded_physical_loss record must carry
  class erasure_marker;
* every unheralded_decoherence record must carry class depolarizing_noise;
* every qubit_measured / qubit_reset record must carry class
  pauli_frame_update;
* the erasure fraction recomputed from failures.jsonl must match
  metrics.json;
* every aborted transaction in outcomes.jsonl must own at least one record.

Usage: verify_records.py RUN_DIR
Exit code 0 when all checks pass, 1 otherwise.
"""

import json
import sys
from pathlib import Path

EXPECTED_CLASS = {
    "heralded_timeout_abort": "erasure_marker",
    "heralded_physical_loss": "erasure_marker",
    "unheralded_decoherence": "depolarizing_noise",
    "qubit_measured": "pauli_frame_update",
    "qubit_reset": "pauli_frame_update",
}


def load_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def main(run_dir):
    run = Path(run_dir)
    failures = load_lines(run / "failures.jsonl")
    outcomes = load_lines(run / "outcomes.jsonl")
    metrics = json.loads((run / "metrics.json").read_text())

    problems = []

    erasure = depolarizing = 0
    txns_with_records = set()
    for record in failures:
        if record.get("schema") != 1 or record.get("kind") != "failure":
            problems.append(f"malformed failure record: {record}")
            continue
        expected = EXPECTED_CLASS.get(record["failure"])
        if expected is None:
            problems.append(f"unknown failure kind: {record['failure']}")
        elif record["class"] != expected:
            problems.append(
                f"txn {record['txn']}: kind {record['failure']} classified "
                f"{record['class']}, expected {expected}"
            )
        if record["class"] == "erasure_marker":
            erasure += 1
        elif record["class"] == "depolarizing_noise":
            depolarizing += 1
        txns_with_records.add(record["txn"])

    noise = erasure + depolarizing
    if noise:
        fraction = erasure / noise
        reported = metrics.get("erasure_fraction")
        if reported is None or abs(fraction - reported) > 1e-12:
            problems.append(
                f"erasure fraction mismatch: recomputed {fraction}, reported {reported}"
            )

    aborted = {
        o["txn"]
        for o in outcomes
        if o["state"] in ("aborted_temporal", "aborted_physical")
    }
    missing = aborted - txns_with_records
    if missing:
        problems.append(f"{len(missing)} aborted transactions lack failure records")
    stray = txns_with_records - aborted
    if stray:
        problems.append(f"{len(stray)} non-aborted transactions carry failure records")

    counts = (
        metrics["n_consumed"] + metrics["n_expired"] + metrics["n_available_at_end"]
    )
    if metrics["n_generated"] != counts:
        problems.append(
            f"conservation mismatch: generated {metrics['n_generated']} != {counts}"
        )

    if problems:
        for p in problems:
            print(f"FAIL: {p}", file=sys.stderr)
        return 1
    print(
        f"ok: {len(failures)} records, {len(outcomes)} outcomes, "
        f"{erasure} erasure / {depolarizing} depolarizing"
    )
    return 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        sys.exit(2)
    sys.exit(main(sys.argv[1]))
