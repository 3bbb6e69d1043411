"""Writing and reading MetaImage volumes, and 3-channel CT windowing.

Run:  python3 demos/04_volume_io_and_windowing.py
"""

import tempfile
from pathlib import Path

import numpy as np

from lobewalker.io import DEFAULT_WINDOWS, hu_window, read_header, read_volume, write_volume
from lobewalker.volume import GridMeta, HUVolume

out = Path(tempfile.mkdtemp())
meta = GridMeta((32, 32, 8), spacing=(0.7, 0.7, 2.5))

# A fake CT slab: air outside, lung parenchyma inside, a soft-tissue blob.
z, y, x = np.indices(meta.shape)
hu = np.full(meta.shape, -1000, dtype=np.int16)
hu[(x - 16) ** 2 + (y - 16) ** 2 < 14**2] = -850
hu[(x - 20) ** 2 + (y - 12) ** 2 < 3**2] = 40
ct = HUVolume(meta, hu)

# .mhd writes a text header plus a .raw payload; .mha keeps both in one file.
write_volume(ct, out / "ct.mhd")
write_volume(ct, out / "ct.mha")
print((out / "ct.mhd").read_text())
for name in ("ct.mhd", "ct.mha"):
    back = read_volume(out / name)
    print(f"{name}: {read_header(out / name).element_type}, identical = {back == ct}")

# Three display windows turn HU into an 8-bit 3-channel image.
channels = hu_window(ct)
for w, ch in zip(DEFAULT_WINDOWS, channels):
    vals = np.unique(ch.data).tolist()
    print(f"window [{w.lo:g}, {w.hi:g}] -> values {vals}")
    write_volume(ch, out / f"ct_ch{DEFAULT_WINDOWS.index(w) + 1}.mhd")
print(f"files written to {out}")
