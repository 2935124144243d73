"""Pure numpy implementations of the compiled kernels."""
import numpy as np


def accumulate_pairs(arm1, arm2, cols1, cols2, first_frame, s1, s2, s12, counts):
    nblocks = s1.shape[0]
    blocks = (first_frame + np.arange(arm1.shape[0])) % nblocks
    a = arm1[:, cols1]
    c = arm2[:, cols2]
    for b in np.unique(blocks):
        rows = blocks == b
        counts[b] += int(rows.sum())
        s1[b] += a[rows].sum(axis=0)
        s2[b] += c[rows].sum(axis=0)
        s12[b] += (a[rows] * c[rows]).sum(axis=0)


def fresnel_direct(u, x_src, x_obs, wavelength, distance, sign, chunk=256):
    u = np.asarray(u, dtype=np.complex128)
    x_src = np.asarray(x_src, dtype=float)
    x_obs = np.asarray(x_obs, dtype=float)
    scale = sign * np.pi / (wavelength * distance)
    out = np.empty(x_obs.size, dtype=np.complex128)
    for start in range(0, x_obs.size, chunk):
        sep = x_obs[start:start + chunk, None] - x_src[None, :]
        out[start:start + chunk] = np.exp(1j * scale * sep**2) @ u
    return out
