"""Helpers for lists and dictionaries."""


def chunked(items, size):
    """Split the items into lists of at most the given size."""
    out = []
    for i in range(0, len(items), size):
        out.append(items[i:i + size])
    return out


def flatten(nested):
    """Flatten one level of nesting from a list of lists."""
    out = []
    for group in nested:
        out.extend(group)
    return out


def unique_keep_order(items):
    """Drop duplicates while preserving first-seen order."""
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def invert_mapping(mapping):
    """Swap keys and values of a dictionary."""
    return {v: k for k, v in mapping.items()}


def group_by(items, key):
    """Group the items into a dictionary by the key function."""
    groups = {}
    for item in items:
        groups.setdefault(key(item), []).append(item)
    return groups


def top_n(counts, n):
    """Return the n most frequent keys of a count dictionary."""
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [k for k, _ in ordered[:n]]


def zip_strict(a, b):
    """Pair two equally long lists, raising on length mismatch."""
    if len(a) != len(b):
        raise ValueError("length mismatch: %d vs %d" % (len(a), len(b)))
    return list(zip(a, b))


def partition(items, predicate):
    """Split items into those passing and failing the predicate."""
    yes, no = [], []
    for item in items:
        if predicate(item):
            yes.append(item)
        else:
            no.append(item)
    return yes, no


def rotate_left(items, k):
    """Rotate the list left by k positions."""
    if not items:
        return []
    k %= len(items)
    return items[k:] + items[:k]


def merge_sorted(a, b):
    """Merge two sorted lists into one sorted list."""
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] <= b[j]:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return out


def window_pairs(items):
    """List consecutive pairs from the sequence."""
    return list(zip(items, items[1:]))


def count_where(items, predicate):
    """Count the items for which the predicate holds."""
    total = 0
    for item in items:
        if predicate(item):
            total += 1
    return total


def deep_get(mapping, path, default=None):
    """Follow a dotted path through nested dictionaries."""
    current = mapping
    for part in path.split("."):
        if not isinstance(current, dict) or part not in current:
            return default
        current = current[part]
    return current


def first_or_none(items):
    """Return the first item or None for an empty sequence."""
    for item in items:
        return item
    return None
