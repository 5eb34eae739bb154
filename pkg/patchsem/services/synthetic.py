"""
Synthetic Corpus - Small, deterministic patch corpora for smoke runs and tests.

Security-like records inject bounds or NULL checks (or swap an unsafe copy
for a bounded one) and carry fix-worded messages. The others add logging,
rename locals or wire in a feature flag. Labels alternate 1, 0, 1, ...
"""

import random

from patchsem.schemas.patch import PatchRecord

_FUNCTIONS = ["parse_header", "read_packet", "copy_buffer", "decode_frame", "handle_ioctl", "load_table"]
_STRUCTS = ["sk_buff", "frame", "table", "request", "device"]
_BUFFERS = ["buf", "ctx", "req", "entry", "pkt"]
_LENGTHS = ["len", "size", "count", "offset", "idx"]
_FILES = ["net/core/parse", "drivers/media/decode", "fs/ext/table", "lib/codec/frame", "kernel/ioctl"]
_FEATURES = ["checksum", "tracing", "batching", "compression"]


def _render(path: str, start: int, before: list[str], removed: list[str], added: list[str], after: list[str]) -> str:
    old_count = len(before) + len(removed) + len(after)
    new_count = len(before) + len(added) + len(after)
    lines = [
        f"diff --git a/{path}.c b/{path}.c",
        f"--- a/{path}.c",
        f"+++ b/{path}.c",
        f"@@ -{start},{old_count} +{start},{new_count} @@",
        *(f" {line}" for line in before),
        *(f"-{line}" for line in removed),
        *(f"+{line}" for line in added),
        *(f" {line}" for line in after),
    ]
    return "\n".join(lines) + "\n"


def _security_patch(rng: random.Random) -> tuple[list[str], list[str], str]:
    fn = rng.choice(_FUNCTIONS)
    buf = rng.choice(_BUFFERS)
    length = rng.choice(_LENGTHS)
    kind = rng.randrange(3)
    if kind == 0:
        added = [f"\tif ({length} > {buf}->max_{length})", "\t\treturn -EINVAL;"]
        return [], added, f"{fn}: fix out-of-bounds access when {length} exceeds the buffer"
    if kind == 1:
        added = [f"\tif (!{buf})", "\t\treturn -ENOMEM;"]
        return [], added, f"{fn}: add missing NULL check to fix a crash"
    removed = [f"\tmemcpy({buf}->data, src, {length});"]
    added = [
        f"\tif ({length} >= sizeof({buf}->data))",
        "\t\treturn -EINVAL;",
        f"\tmemcpy({buf}->data, src, {length});",
    ]
    return removed, added, f"Prevent buffer overflow in {fn} (bounds check on {length})"


def _feature_patch(rng: random.Random) -> tuple[list[str], list[str], str]:
    fn = rng.choice(_FUNCTIONS)
    buf = rng.choice(_BUFFERS)
    kind = rng.randrange(3)
    if kind == 0:
        added = [f'\tpr_debug("{fn}: done\\n");']
        return [], added, f"{fn}: add debug logging"
    if kind == 1:
        old, new = rng.sample(["ret", "status", "result", "rc"], 2)
        return [f"\tint {old} = 0;"], [f"\tint {new} = 0;"], f"{fn}: rename {old} to {new}"
    feature = rng.choice(_FEATURES)
    added = [f"\t{buf}->flags |= FLAG_{feature.upper()};"]
    return [], added, f"{fn}: support the {feature} option"


def generate_synthetic_corpus(n: int, seed: int = 0) -> list[PatchRecord]:
    """
    Generate `n` labelled patches.

    Args:
        n: Number of records (>= 0)
        seed: Seed of the private random.Random instance

    Returns:
        Records with ids synth-0000, synth-0001, ...; even indices are
        security-like (label 1), odd indices are not (label 0)
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = random.Random(seed)
    records: list[PatchRecord] = []
    for i in range(n):
        label = 1 if i % 2 == 0 else 0
        removed, added, message = _security_patch(rng) if label else _feature_patch(rng)
        fn = rng.choice(_FUNCTIONS)
        struct = rng.choice(_STRUCTS)
        before = [f"static int {fn}(struct {struct} *dev, const void *src)", "{", "\tint ret = 0;"]
        after = ["\treturn ret;", "}"]
        diff = _render(rng.choice(_FILES), rng.randint(10, 400), before, removed, added, after)
        records.append(PatchRecord(id=f"synth-{i:04d}", diff=diff, message=message, label=label))
    return records
