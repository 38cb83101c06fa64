"""Fixed and random operators from the catalog used across the tests."""
import numpy as np

from radialeig import bellman, linear, pucci_minus, pucci_plus


def fixed_catalog(dim=1):
    """One representative per kind, with variable coefficients and lower-order terms."""
    ramp = np.linspace(1.0, 2.0, 9)
    wave = 1.2 + 0.3 * np.sin(np.linspace(0.0, 3.0, 17))
    return {
        "linear": linear(a=wave, b=1.0, c=0.4, d=-0.5, dim=dim),
        "pucci_plus": pucci_plus(1.0, 2.0, dim=dim, grad=0.3, zero=0.2),
        "pucci_minus": pucci_minus(0.5, 1.5, dim=dim, grad=-0.2),
        "bellman_max": bellman([{"a": ramp, "c": 0.5}, {"a": 1.5, "d": -0.3}], True, dim=dim),
        "bellman_min": bellman([{"a": 1.0, "c": -0.4}, {"a": wave, "d": 0.3}], False, dim=dim),
    }


def random_spec(rng, dim=1):
    kind = rng.choice(["linear", "pucci_plus", "pucci_minus", "bellman_max", "bellman_min"])
    if kind.startswith("pucci"):
        lam = rng.uniform(0.5, 2.0)
        Lam = lam * rng.uniform(1.0, 3.0)
        make = pucci_plus if kind == "pucci_plus" else pucci_minus
        return make(lam, Lam, dim=dim, grad=rng.uniform(-1, 1), zero=rng.uniform(-1, 1))

    def branch():
        return {
            "a": rng.uniform(0.5, 2.0, size=rng.integers(1, 6)),
            "b": rng.uniform(0.5, 2.0),
            "c": rng.uniform(-1, 1, size=rng.integers(1, 4)),
            "d": rng.uniform(-1, 1),
        }

    if kind == "linear":
        br = branch()
        return linear(br["a"], br["b"], br["c"], br["d"], dim=dim)
    k = int(rng.integers(2, 4))
    return bellman([branch() for _ in range(k)], kind == "bellman_max", dim=dim)


def random_interval(rng):
    a = rng.uniform(-0.5, 0.5)
    return a, a + rng.uniform(0.3, 2.0)
