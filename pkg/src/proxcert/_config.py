import os

DEFAULT_CAP = 10**7


def enumeration_cap(cap=None):
    """Resolve an enumeration cap: explicit value, then ``PROXCERT_CAP``, then default."""
    if cap is not None:
        if cap <= 0:
            raise ValueError("cap must be positive")
        return int(cap)
    env = os.environ.get("PROXCERT_CAP")
    if env:
        value = int(env)
        if value <= 0:
            raise ValueError("PROXCERT_CAP must be positive")
        return value
    return DEFAULT_CAP
