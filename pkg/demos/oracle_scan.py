"""Scan the pulse ratio at fixed average jamming power.

Pulsing trades duty cycle for peak power.  Against a coherent BPSK victim a
short, strong BPSK burst beats always-on jamming; without phase lock the
bounded BPSK burst loses its edge and pulsed Gaussian noise does better.

    python3 demos/oracle_scan.py
"""
import numpy as np

from jamming_bandits.analytic import SerQuery, ser_numeric

SNR, JNR = 100.0, 10.0  # 20 dB victim, 10 dB jammer
RHOS = np.round(np.linspace(0.01, 1.0, 100), 2)


def curve(jammer, coherent):
    return np.array([ser_numeric(SerQuery("BPSK", jammer, SNR, JNR, r, coherent)) for r in RHOS])


def main():
    for coherent in (True, False):
        print("coherent" if coherent else "random carrier phase")
        for jammer in ("AWGN", "BPSK", "QPSK"):
            ser = curve(jammer, coherent)
            i = int(np.argmax(ser))
            print(f"  {jammer:<5} best rho {RHOS[i]:.2f}  SER {ser[i]:.5f}   always-on SER {ser[-1]:.2e}")
        print()


if __name__ == "__main__":
    main()
