"""Regenerate wp_oracle.tsv.

Each lattice row m*2w1 + 2n*w2 is summed in closed form,
sum_m 1/(z - 2m w1 - 2n w2)^2 = (pi/(2 w1))^2 csc^2(pi (z - 2n w2)/(2 w1)),
and the rows are summed directly at 30 digits.
"""
import mpmath as mp

mp.mp.dps = 30


def wp(z, w1, w2, rows=60):
    k = mp.pi / (2 * w1)
    tau = w2 / w1
    s = -mp.mpf(1) / 3
    for n in range(-rows, rows + 1):
        s += mp.csc(k * (z - 2 * n * w2)) ** 2
        if n != 0:
            s -= mp.csc(mp.pi * n * tau) ** 2
    return k * k * s


lattices = [
    (mp.mpc(1, 0), mp.mpc(0, 1)),
    (mp.mpc(1, 0), mp.mpc(0.3, 0.9)),
    (mp.mpc(0.7, 0.2), mp.mpc(-0.1, 1.3)),
]
print("# w1_re\tw1_im\tw2_re\tw2_im\tz_re\tz_im\twp_re\twp_im")
for w1, w2 in lattices:
    for j in range(7):
        a = mp.mpf(-0.41) + mp.mpf(0.137) * j
        b = mp.mpf(0.37) - mp.mpf(0.113) * j
        z = a * w1 + b * w2 + mp.mpc(0.05, 0.02)
        v = wp(z, w1, w2)
        cells = [w1.real, w1.imag, w2.real, w2.imag, z.real, z.imag, v.real, v.imag]
        print("\t".join(mp.nstr(c, 20, min_fixed=-100, max_fixed=100) for c in cells))
