import numba


def njit(fn=None, *, inline=False):
    # compiled kernels are cached on disk next to the sources
    if fn is None:
        return lambda f: njit(f, inline=inline)
    return numba.njit(cache=True, nogil=True, inline="always" if inline else "never")(fn)


@njit(inline=True)
def lower_bound_row(a, row, lo, hi, v):
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[row, mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(inline=True)
def upper_bound_row(a, row, lo, hi, v):
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[row, mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(inline=True)
def lower_bound_col(a, col, lo, hi, v):
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid, col] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(inline=True)
def upper_bound_col(a, col, lo, hi, v):
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid, col] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo
