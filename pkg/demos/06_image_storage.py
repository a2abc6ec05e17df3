"""Store an image imprinted on the probe beam; diffusion low-passes it.

A transmission mask (here a checkerboard, written as a PGM file) shapes
the probe's transverse amplitude.  During storage, diffusion multiplies
every spatial-frequency component by exp(-D k^2 t): the memory acts as a
spatial low-pass filter, so fine tiles wash out before coarse ones.
Outputs land in ./demo_out/image_storage/.
"""

import os

import numpy as np

from gemsim import TransverseGrid, apply_diffusion, load_image_mask
from gemsim.pgmio import write_pgm
from gemsim.scenarios import config_from_dict, run_scenario

D = 13.2e-4
OUT = "demo_out/image_storage"


def checkerboard(n, tile):
    idx = np.indices((n, n))
    return ((idx[0] // tile + idx[1] // tile) % 2).astype(float)


def main():
    os.makedirs(OUT, exist_ok=True)
    mask_path = os.path.join(OUT, "checkerboard.pgm")
    write_pgm(mask_path, checkerboard(64, 8), maxval=255)

    cfg = config_from_dict({
        "scenario": "image_storage",
        "grid.n": 256,
        "input.image": mask_path,
        "input.waist_mm": 2.0,
        "storage.times_us": "0,6,12,18,24,30",
        "output_dir": OUT,
    })
    result = run_scenario(cfg)
    print("t (us)   total efficiency   fitted sigma^2 (mm^2)")
    for row in result.rows:
        print(f"{row.t_us:6.0f}   {row.total_efficiency:16.4f}"
              f"   {row.sigma2_fit * 1e6:20.5f}")

    # Verify the transfer function on the stored field directly.
    n, extent = 256, 15.36e-3
    grid = TransverseGrid(n, n, extent / n, extent / n)
    field = load_image_mask(checkerboard(256, 16), 2e-3, grid)
    t = 6e-6
    diffused = apply_diffusion(field, D, t)
    f_in = np.fft.fft2(field.values)
    f_out = np.fft.fft2(diffused.values)
    k2 = grid.k_squared()
    sel = np.abs(f_in) > 1e-3 * np.abs(f_in).max()
    err = np.max(np.abs(np.abs(f_out[sel]) / np.abs(f_in[sel])
                        - np.exp(-D * k2[sel] * t)))
    print(f"\nspectral transfer vs exp(-D k^2 t): max deviation = {err:.2e}")
    print(f"wrote {len(result.image_paths)} PGM images and {result.csv_path}")


if __name__ == "__main__":
    main()
