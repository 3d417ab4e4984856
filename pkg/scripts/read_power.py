"""Inference read power of a fully selected 4x4 array versus read amplitude."""

from xbarcal import Crossbar, CrossbarParams

x = Crossbar(4, 4, CrossbarParams(), seed=0)
x.form_all()
cells = [(r, c) for r in range(4) for c in range(4)]
for mv in (10, 25, 50, 100, 200, 300):
    p = x.read_power(cells, mv * 1e-3)
    print(f"{mv:4d} mV  {p * 1e6:9.3f} uW")
