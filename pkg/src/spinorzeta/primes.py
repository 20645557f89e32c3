import numpy as np


def prime_sieve(n: int) -> np.ndarray:
    """Primes <= n as an int64 array (Eratosthenes)."""
    if n < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, int(n**0.5) + 1):
        if is_prime[i]:
            is_prime[i * i :: i] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def largest_prime_at_most(n: int) -> int:
    ps = prime_sieve(n)
    return int(ps[-1]) if len(ps) else 1
