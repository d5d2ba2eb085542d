"""Independent reference computations shared by the module and acceptance tests."""
import itertools

from slap.group import ORDER


def naive_tlp(m: int, n: int, kappa: int, z: int) -> int:
    """Direct exponentiation by e~ = 2^kappa + z."""
    return pow(m, 2**kappa + z, n)


def poly_at(attrs, s: int) -> int:
    """prod (s - a) over the attribute scalars, evaluated in Z_p."""
    out = 1
    for a in attrs:
        out = out * (s - a.scalar) % ORDER
    return out


def subsets(items, max_size=None):
    top = len(items) if max_size is None else max_size
    for r in range(top + 1):
        yield from itertools.combinations(items, r)


def pair_response(table, i: int, c: int) -> int:
    """Round i owns the pair (a[2i], a[2i+1]); challenge c picks one of them."""
    return list(zip(table[0::2], table[1::2]))[i][c]
