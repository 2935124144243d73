# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Signatures mirror ghostdiff._pykernels exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI, fmod

cnp.import_array()


def accumulate_pairs(const double[:, ::1] arm1,
                     const double[:, ::1] arm2,
                     const cnp.int64_t[::1] cols1,
                     const cnp.int64_t[::1] cols2,
                     long first_frame,
                     double[:, ::1] s1,
                     double[:, ::1] s2,
                     double[:, ::1] s12,
                     cnp.int64_t[::1] counts):
    """Add frames in row order: bin k pairs arm1[:, cols1[k]] with arm2[:, cols2[k]].

    Frame ``first_frame + r`` goes to block ``(first_frame + r) % nblocks``.
    """
    cdef Py_ssize_t nframes = arm1.shape[0]
    cdef Py_ssize_t nbins = cols1.shape[0]
    cdef Py_ssize_t nblocks = s1.shape[0]
    cdef Py_ssize_t r, k, b
    cdef double a, c
    for r in range(nframes):
        b = (first_frame + r) % nblocks
        counts[b] += 1
        for k in range(nbins):
            a = arm1[r, cols1[k]]
            c = arm2[r, cols2[k]]
            s1[b, k] += a
            s2[b, k] += c
            s12[b, k] += a * c


def fresnel_direct(const double complex[::1] u,
                   const double[::1] x_src,
                   const double[::1] x_obs,
                   double wavelength,
                   double distance,
                   int sign):
    """out[m] = sum_j u[j] * exp(sign * i*pi*(x_obs[m] - x_src[j])**2 / (wavelength*distance))."""
    cdef Py_ssize_t nsrc = x_src.shape[0]
    cdef Py_ssize_t nobs = x_obs.shape[0]
    out_arr = np.zeros(nobs, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double scale = sign * M_PI / (wavelength * distance)
    cdef double ph, dxm, re, im
    cdef Py_ssize_t m, j
    for m in range(nobs):
        re = 0.0
        im = 0.0
        for j in range(nsrc):
            dxm = x_obs[m] - x_src[j]
            ph = scale * dxm * dxm
            re += u[j].real * cos(ph) - u[j].imag * sin(ph)
            im += u[j].real * sin(ph) + u[j].imag * cos(ph)
        out[m] = re + 1j * im
    return out_arr
