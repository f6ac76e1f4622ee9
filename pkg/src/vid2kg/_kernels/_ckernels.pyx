# cython: boundscheck=False, wraparound=False, cdivision=True
"""C implementation of the two-layer MLP kernels.

Same contract as pykernels: float64, weights (rows_out, cols_in), tanh
hidden layer, sigmoid output, backward from the pre-sigmoid gradient.
The matrices here are small (tens of rows), so plain loops beat the
per-call overhead of vectorised numpy.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()

BACKEND = "compiled"


def mlp2_forward(double[::1] x, double[:, ::1] w1, double[::1] b1,
                 double[:, ::1] w2, double[::1] b2):
    cdef Py_ssize_t n_in = x.shape[0]
    cdef Py_ssize_t n_hid = w1.shape[0]
    cdef Py_ssize_t n_out = w2.shape[0]
    cdef cnp.ndarray[double, ndim=1] h_arr = np.empty(n_hid, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] y_arr = np.empty(n_out, dtype=np.float64)
    cdef double[::1] h = h_arr
    cdef double[::1] y = y_arr
    cdef Py_ssize_t i, j
    cdef double acc

    for i in range(n_hid):
        acc = b1[i]
        for j in range(n_in):
            acc += w1[i, j] * x[j]
        h[i] = tanh(acc)
    for i in range(n_out):
        acc = b2[i]
        for j in range(n_hid):
            acc += w2[i, j] * h[j]
        y[i] = 1.0 / (1.0 + exp(-acc))
    return h_arr, y_arr


def mlp2_backward(double[::1] x, double[::1] h, double[:, ::1] w1,
                  double[:, ::1] w2, double[::1] dz2):
    cdef Py_ssize_t n_in = x.shape[0]
    cdef Py_ssize_t n_hid = h.shape[0]
    cdef Py_ssize_t n_out = dz2.shape[0]
    cdef cnp.ndarray[double, ndim=2] dw1_arr = np.empty((n_hid, n_in), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] db1_arr = np.empty(n_hid, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] dw2_arr = np.empty((n_out, n_hid), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] db2_arr = np.empty(n_out, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] dx_arr = np.zeros(n_in, dtype=np.float64)
    cdef double[:, ::1] dw1 = dw1_arr
    cdef double[::1] db1 = db1_arr
    cdef double[:, ::1] dw2 = dw2_arr
    cdef double[::1] db2 = db2_arr
    cdef double[::1] dx = dx_arr
    cdef Py_ssize_t i, j
    cdef double g, dz1_i

    for i in range(n_out):
        g = dz2[i]
        db2[i] = g
        for j in range(n_hid):
            dw2[i, j] = g * h[j]
    for i in range(n_hid):
        g = 0.0
        for j in range(n_out):
            g += w2[j, i] * dz2[j]
        dz1_i = g * (1.0 - h[i] * h[i])
        db1[i] = dz1_i
        for j in range(n_in):
            dw1[i, j] = dz1_i * x[j]
            dx[j] += dz1_i * w1[i, j]
    return dw1_arr, db1_arr, dw2_arr, db2_arr, dx_arr
