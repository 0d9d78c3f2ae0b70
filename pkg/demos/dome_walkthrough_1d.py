"""Walk the dome machinery on 1-D signals, printing every intermediate.

Two stories: a five-sample row where the plain dome merges two peaks and
the regularized marker pulls them apart again, then the multipeak test
signal where support counts fall as the offset grows.
"""

import numpy as np

from thermoseg.morphology import h_dome, reconstruct, regularized_marker
from thermoseg.raster import BinaryMask, ThermalRaster, connected_components
from thermoseg.synth import multipeak_signal


def show(label, values):
    print(f"  {label:<24}" + " ".join(f"{v:7.3f}" for v in np.asarray(values).ravel()))


def main():
    raster = ThermalRaster(np.array([[1.0, 3.0, 2.0, 5.0, 1.0]]))
    print("five-sample row, peaks at columns 1 and 3")
    show("signal", raster.values)

    for h in (2.0, 4.0):
        dome, supports = h_dome(raster, h)
        show(f"dome  h={h}", dome.values)
        print(f"  supports at h={h}: {len(supports)} "
              f"({'peaks separate' if len(supports) == 2 else 'peaks merged'})")

    # the cubic weight lowers the marker more under the taller peak, so the
    # reconstruction cannot flood the saddle between them
    h = 4.0
    marker = regularized_marker(raster, h)
    rec = reconstruct(marker, raster)
    dome_values = raster.values - rec.values
    regions = connected_components(BinaryMask(dome_values > 1e-6), 8)
    show(f"marker h={h} (weighted)", marker.values)
    show("reconstruction", rec.values)
    show("dome", dome_values)
    print(f"  regularized supports at h={h}: {len(regions)} (split restored)")

    print()
    print("multipeak signal, 500 samples over [0, 10]")
    x, f, _ = multipeak_signal(0.0, 10.0, 500)
    signal = ThermalRaster(f[None, :])
    for h in (0.5, 1.0, 2.0, 3.0, 4.0):
        _, supports = h_dome(signal, h)
        centers = ", ".join(
            f"x={x[int(np.median(r.pixels[:, 1]))]:.2f}" for r in supports
        )
        print(f"  h={h:<4} supports={len(supports):<2} near {centers}")
    print("  counts only fall: raising the offset merges or drowns supports,")
    print("  never creates new ones")


if __name__ == "__main__":
    main()
