"""Brute-force replay of the curriculum schedule, kept deliberately naive.

Reimplements the documented trace contract from scratch: every quantity
is recomputed by scanning explicit per-sample records instead of
keeping running totals, and events are emitted as raw dicts. Used to
cross-check the streaming implementation byte for byte.
"""

import json
import random


def naive_partition(counts, s_high, s_low, cutover):
    """counts: {direction str: total}. Returns [(lo, hi, {dir: n})],
    ascending by lo, zero-count directions dropped."""
    bins = {}
    for direction in counts:
        n = counts[direction]
        if n == 0:
            continue
        if n >= cutover:
            lo = n - n % s_high
            hi = lo + s_high
        else:
            lo = n - n % s_low
            hi = lo + s_low
        key = (lo, hi)
        if key not in bins:
            bins[key] = {}
        bins[key][direction] = n
    return [(lo, hi, members) for (lo, hi), members in sorted(bins.items())]


def naive_order(partitioned):
    """Descending mean; ties by higher lo, then smallest member name."""
    def key(entry):
        lo, hi, members = entry
        mean = sum(members.values()) / len(members)
        return (-mean, -lo, min(members))
    return sorted(partitioned, key=key)


def _dump(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def naive_replay(counts, batch_size, seed, s_high, s_low, cutover):
    """Full pipeline replay; returns the trace as a list of JSON lines."""
    ordered = naive_order(naive_partition(counts, s_high, s_low, cutover))
    rng = random.Random(seed)
    lines = []
    carried_records = []   # (direction, uid) tuples left over from the donor
    carried_membership = []  # direction names joining the next interval
    batch_no = 0
    grand_total = 0

    for idx, (lo, hi, own) in enumerate(ordered):
        label = f"[{lo},{hi})"
        records = []
        for direction in sorted(own):
            for uid in range(own[direction]):
                records.append((direction, uid))
        records.extend(carried_records)
        member_names = sorted(own) + [d for d in carried_membership if d not in own]
        carried_records = []
        carried_membership = []
        rng.shuffle(records)

        lines.append(_dump({
            "kind": "interval_start",
            "interval": label,
            "mean": len(records) / len(member_names),
            "members": sorted(member_names),
            "pool": len(records),
        }))

        if idx + 1 < len(ordered):
            nxt = ordered[idx + 1][2]
            next_mean = sum(nxt.values()) / len(nxt)
        else:
            next_mean = 0.0

        consumed = 0
        while True:
            untrained = [r for r in records[consumed:]]
            mean_untrained = len(untrained) / len(member_names)
            if mean_untrained <= next_mean or not untrained:
                break
            batch = untrained[:batch_size]
            composition = {}
            for direction, _ in batch:
                composition[direction] = composition.get(direction, 0) + 1
            lines.append(_dump({
                "kind": "batch",
                "batch_index": batch_no,
                "interval": label,
                "composition": composition,
            }))
            consumed += len(batch)
            batch_no += 1
            grand_total += len(batch)

        if idx + 1 < len(ordered):
            leftovers = records[consumed:]
            carried_records = list(leftovers)
            leftover_names = []
            for direction in member_names:
                if any(d == direction for d, _ in leftovers):
                    leftover_names.append(direction)
            carried_membership = leftover_names
            target = ordered[idx + 1][2]
            merged_total = sum(target.values()) + len(leftovers)
            merged_count = len(target) + len(leftover_names)
            lines.append(_dump({
                "kind": "merge",
                "from": label,
                "to": f"[{ordered[idx + 1][0]},{ordered[idx + 1][1]})",
                "moved": len(leftovers),
                "new_mean": merged_total / merged_count,
            }))

    lines.append(_dump({"kind": "done", "batches": batch_no, "samples": grand_total}))
    return lines
