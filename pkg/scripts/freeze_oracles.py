"""Independent reference values for the NV-13C ground state, in 40-digit arithmetic.

Builds the 4x4 Hamiltonian directly from Pauli products with mpmath, diagonalizes
it and evaluates the sum-over-states QFI and the concurrence. Shares no code
with qfi_lab; the printed numbers are the ones frozen in tests/test_oracle.py.

Needs mpmath (``pip install mpmath``).
"""
import argparse

import mpmath as mp

mp.mp.dps = 40
TWO_PI = 2 * mp.pi
A = TWO_PI * mp.mpf("15.98")
A_PAR = TWO_PI * mp.mpf("11.832")
A_PERP = TWO_PI * mp.mpf("2.79")
OMEGA_C = TWO_PI * mp.mpf("1.0705e-3") * 504

SX = mp.matrix([[0, 1], [1, 0]])
SY = mp.matrix([[0, -1j], [1j, 0]])
SZ = mp.matrix([[1, 0], [0, -1]])
I2 = mp.eye(2)


def kron(a, b):
    m = mp.matrix(4, 4)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    m[2 * i + k, 2 * j + l] = a[i, j] * b[k, l]
    return m


def hamiltonian(beta, phi=0):
    t = mp.cos(phi) * SX + mp.sin(phi) * SY
    return ((A / 2) * (mp.cos(beta) * kron(SZ, I2) + mp.sin(beta) * kron(t, I2))
            - A_PAR / 4 * kron(SZ, SZ) - A_PERP / 4 * kron(SZ, SX)
            + (OMEGA_C / 2 - A_PAR / 4) * kron(I2, SZ) - A_PERP / 4 * kron(I2, SX))


def beta_derivative(beta, phi=0):
    t = mp.cos(phi) * SX + mp.sin(phi) * SY
    return (A / 2) * kron(-mp.sin(beta) * SZ + mp.cos(beta) * t, I2)


def reference(beta):
    energies, vecs = mp.eighe(hamiltonian(beta))
    order = sorted(range(4), key=lambda i: energies[i])
    energies = [energies[i] for i in order]
    vecs = [vecs[:, i] for i in order]
    g, dh = vecs[0], beta_derivative(beta)
    qfi = 4 * sum(abs((vecs[k].H * dh * g)[0]) ** 2 / (energies[k] - energies[0]) ** 2 for k in range(1, 4))
    conc = abs(2 * (g[0] * g[3] - g[1] * g[2]))
    return energies, qfi, conc


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("betas", nargs="*", default=["0", "0.2", "0.39", "0.4", "0.6"])
    args = parser.parse_args()
    for b in args.betas:
        energies, qfi, conc = reference(mp.mpf(b))
        print(f"beta={b}: E={[mp.nstr(e, 15) for e in energies]} F={mp.nstr(qfi, 15)} C={mp.nstr(conc, 15)}")


if __name__ == "__main__":
    main()
