"""Reference values for the Mittag-Leffler and gamma functions.

Direct summation of the defining series in 200-digit arithmetic; the number
of extra digits covers the cancellation of the alternating series.
"""
import mpmath as mp

mp.mp.dps = 200


def ml_series(a, b, z):
    a, b, z = mp.mpf(a), mp.mpf(b), mp.mpf(z)
    s = mp.mpf(0)
    k = 0
    while True:
        t = z**k * mp.rgamma(a * k + b)
        s += t
        if k > 5 and abs(t) < mp.mpf(10) ** (-150) * max(abs(s), mp.mpf(10) ** (-60)):
            break
        k += 1
    return s


CASES = [
    (1.5, 0.5, -2.0),
    (1.5, 1.5, -2.0),
    (1.5, 0.5, -0.3),
    (1.1, 1.1, -7.5),
    (1.1, 0.1, -20.0),
    (1.3, 0.3, -3.0),
    (1.3, 1.3, -49.0),
    (1.5, 1.5, -10.0),
    (1.5, 0.5, -50.0),
    (1.8, 0.8, -50.0),
    (1.8, 1.8, -12.25),
    (1.9, 0.9, -100.0),
    (1.9, 1.9, -400.0),
    (1.5, 0.5, -1000.0),
    (1.5, 1.5, -1000.0),
    (1.2, 1.2, -30.0),
    (1.5, 2.0, -4.0),
    (1.5, 3.5, -1.0),
    (1.5, 3.5, -6.0),
    (0.6, 1.0, -8.0),
    (1.5, 1.5, 5.0),
    (2.0, 1.0, 9.0),
]

if __name__ == "__main__":
    for a, b, z in CASES:
        print(f"    ({a!r}, {b!r}, {z!r}, {mp.nstr(ml_series(a, b, z), 20)}),")
    for x in [0.1, 0.37, 1.5, 2.5, 7.25, 13.7, 27.3, 49.9, -0.5, -2.3]:
        print(f"    ({x}, {mp.nstr(mp.gamma(x), 20)}),")
