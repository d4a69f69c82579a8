"""Seeded synthetic person datasets with planted duplicates and known truth pairs."""

import itertools
import string
from dataclasses import dataclass

import numpy as np

from .tables import Column, Table

VOWELS = "aeiou"
CONSONANTS = "".join(c for c in string.ascii_lowercase if c not in VOWELS)

STREET_SUFFIXES = ["St", "Rd", "Ave", "Ln", "Dr", "Ct"]

CORRUPTION_PROFILES = {
    # weights over number of corruptions applied to each duplicate
    "light": {1: 1.0},
    "moderate": {1: 0.6, 2: 0.4},
    "heavy": {2: 0.6, 3: 0.4},
}

CORRUPTION_OPS = ("typo", "token_swap", "phone_change", "address_move", "field_drop")


class SynthError(Exception):
    pass


def _syllable(rng):
    return CONSONANTS[rng.integers(len(CONSONANTS))] + VOWELS[rng.integers(len(VOWELS))]


def _word(rng, n_syllables):
    w = "".join(_syllable(rng) for _ in range(n_syllables))
    return w.capitalize()


def _name_pool(rng, size, syllables=(2, 4)):
    pool = set()
    while len(pool) < size:
        pool.add(_word(rng, int(rng.integers(syllables[0], syllables[1] + 1))))
    return sorted(pool)


@dataclass
class GeneratorPools:
    first_names: list
    last_names: list
    streets: list
    cities: list


def _build_pools(rng, n):
    scale = max(1.0, n / 10_000)
    return GeneratorPools(
        first_names=_name_pool(rng, min(2000, max(200, int(200 * scale)))),
        last_names=_name_pool(rng, min(20000, max(500, int(2000 * scale)))),
        streets=_name_pool(rng, min(5000, max(300, int(500 * scale)))),
        cities=_name_pool(rng, 40, syllables=(2, 3)),
    )


def _phone(rng):
    return "04" + "".join(str(d) for d in rng.integers(0, 10, size=8))


def _dob(rng):
    year = int(rng.integers(1940, 2006))
    month = int(rng.integers(1, 13))
    day = int(rng.integers(1, 29))
    return f"{year:04d}-{month:02d}-{day:02d}"


def _address(rng, pools):
    num = int(rng.integers(1, 400))
    street = pools.streets[rng.integers(len(pools.streets))]
    suffix = STREET_SUFFIXES[rng.integers(len(STREET_SUFFIXES))]
    city = pools.cities[rng.integers(len(pools.cities))]
    return f"{num} {street} {suffix} {city}"


def _base_record(rng, pools):
    return {
        "first_name": pools.first_names[rng.integers(len(pools.first_names))],
        "last_name": pools.last_names[rng.integers(len(pools.last_names))],
        "dob": _dob(rng),
        "phone_1": _phone(rng),
        "phone_2": _phone(rng) if rng.random() < 0.4 else None,
        "address_1": _address(rng, pools),
        "address_2": _address(rng, pools) if rng.random() < 0.3 else None,
    }


def _typo(rng, s):
    if len(s) < 2:
        return s
    i = int(rng.integers(len(s)))
    op = rng.integers(3)
    alphabet = string.ascii_lowercase
    if op == 0:  # substitute
        return s[:i] + alphabet[rng.integers(26)] + s[i + 1 :]
    if op == 1:  # delete
        return s[:i] + s[i + 1 :]
    return s[:i] + alphabet[rng.integers(26)] + s[i:]  # insert


def _corrupt(rng, rec, pools):
    rec = dict(rec)
    op = CORRUPTION_OPS[rng.integers(len(CORRUPTION_OPS))]
    if op == "typo":
        fields = ["first_name", "last_name", "address_1"]
        f = fields[rng.integers(len(fields))]
        if rec[f] is not None:
            rec[f] = _typo(rng, rec[f])
    elif op == "token_swap":
        if rng.random() < 0.5:
            rec["first_name"], rec["last_name"] = rec["last_name"], rec["first_name"]
        elif rec["address_1"] is not None:
            toks = rec["address_1"].split()
            if len(toks) >= 2:
                i = int(rng.integers(len(toks) - 1))
                toks[i], toks[i + 1] = toks[i + 1], toks[i]
                rec["address_1"] = " ".join(toks)
    elif op == "phone_change":
        slot = "phone_2" if rng.random() < 0.5 and rec["phone_2"] is not None else "phone_1"
        rec[slot] = _phone(rng)
    elif op == "address_move":
        if rec["address_2"] is not None:
            rec["address_1"], rec["address_2"] = rec["address_2"], rec["address_1"]
        else:
            rec["address_2"] = rec["address_1"]
            rec["address_1"] = _address(rng, pools)
    else:  # field_drop
        fields = ["phone_2", "address_2", "dob", "phone_1"]
        f = fields[rng.integers(len(fields))]
        rec[f] = None
    return rec


COLUMNS = ["first_name", "last_name", "dob", "phone_1", "phone_2", "address_1", "address_2"]


def generate_synthetic(n, dup_rate, profile="moderate", seed=0):
    """n base records plus ceil(n * dup_rate) corrupted duplicates.

    Returns (Table, truth pair set). Truth holds every base-duplicate and
    duplicate-duplicate pair sharing one base record. Deterministic per seed.
    """
    if n < 10:
        raise SynthError("n must be >= 10")
    if not 0.0 <= dup_rate <= 0.5:
        raise SynthError("dup_rate must be in [0, 0.5]")
    if profile not in CORRUPTION_PROFILES:
        raise SynthError(f"unknown corruption profile {profile!r}")
    weights = CORRUPTION_PROFILES[profile]
    rng = np.random.default_rng(seed)
    pools = _build_pools(rng, n)

    records = [_base_record(rng, pools) for _ in range(n)]
    n_dups = int(np.ceil(n * dup_rate)) if dup_rate else 0

    base_of = {}  # duplicate row index -> base row index
    counts = sorted(weights)
    probs = np.array([weights[c] for c in counts], dtype=float)
    probs /= probs.sum()
    for d in range(n_dups):
        base = int(rng.integers(n))
        rec = records[base]
        k = int(rng.choice(counts, p=probs))
        for _ in range(k):
            rec = _corrupt(rng, rec, pools)
        base_of[len(records)] = base
        records.append(rec)

    truth = set()
    by_base = {}
    for dup, base in base_of.items():
        by_base.setdefault(base, []).append(dup)
    for base, dups in by_base.items():
        group = [base] + dups
        for a, b in itertools.combinations(sorted(group), 2):
            truth.add((a, b))

    columns = [
        Column(name, "text", [rec[name] for rec in records]) for name in COLUMNS
    ]
    table = Table(f"synthetic_{n}", list(range(len(records))), columns)
    return table, truth


def write_truth(truth, path, delimiter=","):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"id_a{delimiter}id_b\n")
        for a, b in sorted(truth):
            fh.write(f"{a}{delimiter}{b}\n")


def read_truth(path, delimiter=","):
    out = set()
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            a, b = line.rstrip("\n").split(delimiter)
            out.add((int(a), int(b)))
    return out
